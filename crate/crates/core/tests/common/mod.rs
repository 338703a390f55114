//! Oracles and fixtures shared by the integration test targets.
#![allow(dead_code)]

use nahm_core::nahm::{LenForm, SumFactor};
use nahm_core::qfactors::{
    eval_product, finite_length_reciprocal, theta_sum, theta_sum_signed, triple_product,
    PochFactor, ProductSpec, SignedMonomial,
};
use nahm_core::rat::{int, rat};
use nahm_core::series::{equal_to_order, linear_combine, Order, PuiseuxSeries};
use nahm_core::{LatticeCoset, NahmSpec, QuadExpr, Rat, SumSpec};
use num_traits::ToPrimitive;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

pub fn same(a: &PuiseuxSeries, b: &PuiseuxSeries, n: &Rat) -> bool {
    equal_to_order(a, b, n).unwrap().is_equal()
}

/// `F(u, v)` with `u = q^d`, `v = q^e` as a two-index sum.
pub fn f_spec(a: &Rat, b: &Rat, c: &Rat, d: &Rat, e: &Rat) -> SumSpec {
    SumSpec::rank2(
        a / int(2),
        b.clone(),
        c / int(2),
        d.clone(),
        e.clone(),
        int(0),
    )
    .with_den(SumFactor::qq(int(1), LenForm::new(vec![1, 0], 0)))
    .with_den(SumFactor::qq(int(1), LenForm::new(vec![0, 1], 0)))
}

/// `(a, b, c, d, e)` choices taken from the parity-splitting arguments.
pub fn dissection_params() -> Vec<[Rat; 5]> {
    vec![
        [int(1), int(-1), int(2), rat(-1, 2), int(1)],
        [rat(1, 2), rat(1, 2), rat(1, 2), int(0), rat(1, 2)],
        [rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2), rat(-1, 2)],
        [rat(1, 2), rat(1, 2), rat(1, 2), int(0), int(0)],
        [rat(3, 4), rat(-1, 4), rat(3, 4), rat(-1, 4), rat(1, 4)],
    ]
}

/// Direct summation of `Σ q^{Q(n)} / Π (q;q)_{n_i}` over every `n ≥ 0` in
/// the coset with `Q(n) ≤ order`, scanning a box that provably contains them.
pub fn box_sum(spec: &NahmSpec, order: &Rat) -> PuiseuxSeries {
    let r = spec.rank();
    let radius = box_radius(&spec.quad, order);
    let q1 = SignedMonomial::q(int(1));
    let mut terms: Vec<(Rat, PuiseuxSeries)> = Vec::new();
    let mut n = vec![0i64; r];
    loop {
        let e = spec.quad.value(&n);
        if spec.coset.contains(&n) && e <= *order {
            let rest = order - &e;
            let mut t = PuiseuxSeries::monomial(int(1), e.clone(), Order::Finite(order.clone()));
            for &k in &n {
                t = t.mul(&finite_length_reciprocal(k, &q1, &q1, &rest).unwrap());
            }
            terms.push((int(1), t.truncate(order)));
        }
        let mut i = 0;
        loop {
            if i == r {
                let refs: Vec<(Rat, &PuiseuxSeries)> =
                    terms.iter().map(|(w, s)| (w.clone(), s)).collect();
                return linear_combine(&refs).truncate(order);
            }
            n[i] += 1;
            if n[i] <= radius {
                break;
            }
            n[i] = 0;
            i += 1;
        }
    }
}

fn f(x: &Rat) -> f64 {
    x.to_f64().unwrap()
}

/// `R` with `Q(n) > order` whenever some `n_i > R`, from the smallest
/// eigenvalue of `A`.
fn box_radius(quad: &QuadExpr, order: &Rat) -> i64 {
    let lambda = match quad.rank() {
        1 => f(&quad.a[0][0]),
        _ => {
            let (a, b, c) = (f(&quad.a[0][0]), f(&quad.a[0][1]), f(&quad.a[1][1]));
            (a + c) / 2.0 - (((a - c) / 2.0).powi(2) + b * b).sqrt()
        }
    };
    assert!(lambda > 1e-9, "not positive definite");
    let bn: f64 = quad.b.iter().map(|x| f(x).abs()).sum();
    let slack = (f(order) - f(&quad.c)).max(0.0);
    // λ|n|²/2 − |B|₁|n| + C > order  ⇐  |n| > (|B|₁ + √(|B|₁² + 2λ·slack))/λ
    ((bn + (bn * bn + 2.0 * lambda * slack).sqrt()) / lambda).ceil() as i64 + 2
}

/// Twenty positive-definite specs of rank one and two, drawn from a fixed seed.
pub fn random_pd_specs() -> Vec<NahmSpec> {
    let half = |k: i64| rat(k, 2);
    let entry = (1i64..=6).prop_map(half);
    let off = (-2i64..=2).prop_map(half);
    let lin = (-2i64..=2).prop_map(half);
    let modulus = 1i64..=2;
    let strat = (
        proptest::bool::weighted(0.75),
        entry.clone(),
        off,
        entry,
        lin.clone(),
        lin,
        modulus.clone(),
        modulus,
        0i64..2,
        0i64..2,
    );
    let mut runner = TestRunner::new_with_rng(
        Config::default(),
        TestRng::from_seed(RngAlgorithm::ChaCha, &[7; 32]),
    );
    let mut out = Vec::new();
    while out.len() < 20 {
        let (two, a, b, c, b1, b2, m1, m2, v1, v2) = strat.new_tree(&mut runner).unwrap().current();
        let spec = if two {
            if &a * &c <= &b * &b {
                continue;
            }
            let quad =
                QuadExpr::new(vec![vec![a, b.clone()], vec![b, c]], vec![b1, b2], int(0)).unwrap();
            NahmSpec::new(quad, LatticeCoset::diagonal(&[m1, m2], &[v1 % m1, v2 % m2]))
        } else {
            let quad = QuadExpr::new(vec![vec![a]], vec![b1], int(0)).unwrap();
            NahmSpec::new(quad, LatticeCoset::diagonal(&[m1], &[v1 % m1]))
        };
        out.push(spec.unwrap());
    }
    out
}

/// Rows of three tables whose four cosets of `2Z²` are checked against the full sum.
pub const ADDITIVITY_ROWS: [&str; 3] = [
    "eq8-2-as-quadruple",
    "eq6-1-as-quadruple",
    "eq10-2-as-quadruple-table14-v10",
];

/// `Σ_v f_{v+L} − f_{Z²}` vanishes to `order` for `L = 2Z²`.
pub fn coset_additivity(spec: &NahmSpec, order: &Rat) -> bool {
    let full = NahmSpec::new(spec.quad.clone(), LatticeCoset::full(2)).unwrap();
    let whole = nahm_core::eval_nahm(&full, order).unwrap();
    let mut parts = PuiseuxSeries::zero(Order::Finite(order.clone()));
    for v in [[0, 0], [1, 0], [0, 1], [1, 1]] {
        let s = NahmSpec::new(spec.quad.clone(), LatticeCoset::diagonal(&[2, 2], &v)).unwrap();
        parts = parts.add(&nahm_core::eval_nahm(&s, order).unwrap());
    }
    same(&parts, &whole, order)
}

/// `z` choices for the triple product, as `(sign, exponent)`.
pub const JTP_POINTS: [(i8, (i64, i64)); 5] = [
    (1, (0, 1)),
    (1, (1, 2)),
    (-1, (1, 3)),
    (1, (2, 1)),
    (-1, (5, 4)),
];

/// `Σ_n z^n q^{(n²−n)/2}` for `z = sign·q^k` is a signed theta sum.
pub fn jtp_sides(sign: i8, k: Rat, n: &Rat) -> (PuiseuxSeries, PuiseuxSeries) {
    let sum = theta_sum_signed(&rat(1, 2), &(k.clone() - rat(1, 2)), sign, n).unwrap();
    let prod = eval_product(&triple_product(&SignedMonomial::new(sign, k)), n).unwrap();
    (sum, prod)
}

/// `θ(a,b)/(base;q)_∞` with `θ(a,b) = Σ_{n∈Z} q^{an²+bn}`, times `q^shift`.
pub fn theta_over(a: i64, b: i64, base: i64, shift: i64, n: i64) -> PuiseuxSeries {
    let t = theta_sum(&int(a), &int(b), &int(n)).unwrap();
    let inv = ProductSpec::new(
        int(1),
        int(shift),
        vec![PochFactor::new(
            SignedMonomial::q(int(base)),
            SignedMonomial::q(int(1)),
            -1,
        )],
    )
    .unwrap();
    t.mul(&eval_product(&inv, &int(n)).unwrap())
        .truncate(&int(n))
}
