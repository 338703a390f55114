use nahm_core::rat::{int, rat};
use nahm_core::series::{
    equal_to_order, flip_base_sign, invert, substitute_q_power, Order, PuiseuxSeries,
};
use nahm_core::Rat;
use proptest::prelude::*;
use std::collections::BTreeMap;

const N: i64 = 12;

/// Terms `c·q^{k/d}` with order `N`.
fn arb_terms(d: i64) -> impl Strategy<Value = Vec<(Rat, Rat)>> {
    proptest::collection::vec((-2 * d..=N * d, -9i64..=9, 1i64..=3), 0..12).prop_map(move |v| {
        v.into_iter()
            .map(|(k, a, b)| (rat(k, d), rat(a, b)))
            .collect()
    })
}

fn series(terms: &[(Rat, Rat)]) -> PuiseuxSeries {
    PuiseuxSeries::from_terms(terms.iter().cloned(), Order::Finite(int(N)))
}

/// Schoolbook product over term lists, truncated to `n`.
fn naive_mul(f: &[(Rat, Rat)], g: &[(Rat, Rat)], n: &Rat) -> BTreeMap<Rat, Rat> {
    let mut out = BTreeMap::new();
    for (e1, c1) in f {
        for (e2, c2) in g {
            let e = e1 + e2;
            if e <= *n {
                *out.entry(e).or_insert_with(|| int(0)) += c1 * c2;
            }
        }
    }
    out.retain(|_, c| *c != int(0));
    out
}

fn eq(f: &PuiseuxSeries, g: &PuiseuxSeries, n: &Rat) -> bool {
    equal_to_order(f, g, n).unwrap().is_equal()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_matches_schoolbook(f in arb_terms(4), g in arb_terms(3)) {
        let (sf, sg) = (series(&f), series(&g));
        let p = sf.mul(&sg);
        // known to N plus the smaller valuation
        let lim = match p.order() {
            Order::Finite(o) => o.clone(),
            Order::Infinite => unreachable!(),
        };
        let want = naive_mul(&f, &g, &lim);
        let got: BTreeMap<Rat, Rat> = p.truncate(&lim).terms().into_iter().collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn ring_laws(a in arb_terms(2), b in arb_terms(2), c in arb_terms(1)) {
        let (a, b, c) = (series(&a), series(&b), series(&c));
        let n = int(6);
        prop_assert!(eq(&a.mul(&b), &b.mul(&a), &n));
        prop_assert!(eq(&a.mul(&b).mul(&c), &a.mul(&b.mul(&c)), &n));
        prop_assert!(eq(&a.mul(&b.add(&c)), &a.mul(&b).add(&a.mul(&c)), &n));
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn inverse_is_two_sided(t in arb_terms(2), lead in 1i64..=5, v in 0i64..=3) {
        let mut t: Vec<(Rat, Rat)> = t.into_iter().filter(|(e, _)| *e > int(0)).collect();
        t.push((int(0), int(lead)));
        let f = series(&t).shift(&rat(-v, 2));
        let g = invert(&f).unwrap();
        let lim = match g.order() {
            Order::Finite(o) => o.clone() + rat(-v, 2),
            Order::Infinite => unreachable!(),
        };
        prop_assert!(eq(&f.mul(&g), &PuiseuxSeries::one(Order::Infinite), &lim));
    }

    #[test]
    fn substitution_moves_exponents(t in arb_terms(3), p in 1i64..=4, r in 1i64..=3) {
        let f = series(&t);
        let k = rat(p, r);
        let s = substitute_q_power(&f, &k).unwrap();
        for (e, c) in f.terms() {
            prop_assert_eq!(s.coefficient_at(&(e * &k)).unwrap(), c);
        }
        prop_assert_eq!(s.terms().len(), f.terms().len());
    }

    #[test]
    fn sign_flip_is_an_involution(t in arb_terms(2)) {
        let f = series(&t);
        prop_assert_eq!(flip_base_sign(&flip_base_sign(&f)), f);
    }

    #[test]
    fn json_round_trip(t in arb_terms(4)) {
        let f = series(&t);
        prop_assert_eq!(PuiseuxSeries::from_json(&f.to_json()).unwrap(), f);
    }
}

#[test]
fn order_is_enforced() {
    let f = series(&[(int(0), int(1))]);
    assert!(equal_to_order(&f, &f, &int(N + 1)).is_err());
    assert!(f.coefficient_at(&int(N + 1)).is_err());
    assert!(invert(&PuiseuxSeries::zero(Order::Finite(int(3)))).is_err());
}
