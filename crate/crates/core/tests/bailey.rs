mod common;

use common::theta_over;
use nahm_core::bailey::{
    bailey_limit_identity, check_bailey_pair, pairs, vanishing_numerator, vanishing_sum,
};
use nahm_core::qfactors::{finite_length_reciprocal, poch_finite, qbinomial_exact, SignedMonomial};
use nahm_core::rat::{int, rat};
use nahm_core::series::{equal_to_order, linear_combine, Order, PuiseuxSeries};
use nahm_core::{Error, Rat};

fn q(e: i64) -> SignedMonomial {
    SignedMonomial::q(int(e))
}

fn same(a: &PuiseuxSeries, b: &PuiseuxSeries, n: i64) -> bool {
    equal_to_order(a, b, &int(n)).unwrap().is_equal()
}

#[test]
fn explicit_pairs_satisfy_the_defining_relation() {
    for p in pairs::all() {
        let rep = check_bailey_pair(&p, 20, &int(30)).unwrap();
        assert!(rep.passed(), "{}: {:?}", p.name, rep.first_failure);
        assert_eq!(rep.checked, 21);
    }
}

#[test]
fn limit_identities_reach_theta_quotients() {
    let n = 40;
    let expected = [
        theta_over(6, 1, 1, 0, n),
        theta_over(6, 1, 2, 0, n),
        theta_over(6, 5, 2, 0, n),
        theta_over(6, 5, 1, 1, n),
    ];
    for (p, want) in pairs::all().iter().zip(expected) {
        let (l, r) = bailey_limit_identity(p, &int(n)).unwrap();
        assert!(same(&l, &r, n), "{}", p.name);
        assert!(same(&l, &want, n), "{}", p.name);
    }
}

#[test]
fn vanishing_sum_over_grid() {
    for n in 1..=12 {
        for t in 0..=3 {
            for s in (-1..=2 * t + 1).step_by(2) {
                assert!(
                    vanishing_numerator(n, t, s).unwrap().is_zero(),
                    "({n},{t},{s})"
                );
            }
        }
    }
    assert_eq!(
        vanishing_sum(1, 0, -1, &int(40)).unwrap(),
        PuiseuxSeries::zero(Order::Infinite)
    );
    assert!(vanishing_sum(3, 1, 1, &int(40)).unwrap().is_zero());
    assert!(vanishing_sum(5, 2, 3, &int(40)).unwrap().is_zero());
    assert!(matches!(
        vanishing_sum(1, 0, 0, &int(5)),
        Err(Error::InvalidParams(_))
    ));
}

fn signed_sum(terms: &[(Rat, PuiseuxSeries)]) -> PuiseuxSeries {
    let refs: Vec<(Rat, &PuiseuxSeries)> = terms.iter().map(|(w, s)| (w.clone(), s)).collect();
    linear_combine(&refs)
}

fn pm(i: i64) -> Rat {
    if i % 2 == 0 {
        int(1)
    } else {
        int(-1)
    }
}

#[test]
fn finite_gaussian_sums() {
    for n in 0..=16i64 {
        // Σ qⁱ[n i]_{q²} = (−q;q)_n
        let terms: Vec<_> = (0..=n)
            .map(|i| (int(1), qbinomial_exact(n, i, &q(2)).unwrap().shift(&int(i))))
            .collect();
        let want = poch_finite(&SignedMonomial::neg_q(int(1)), &q(1), n, &int(400)).unwrap();
        assert!(same(&signed_sum(&terms), &want, 300), "first, n={n}");

        // Σ (−1)ⁱ[n i] and Σ (−1)ⁱqⁱ[n i]
        let k = n / 2;
        let closed = |top: i64| {
            poch_finite(&q(1), &q(1), top, &int(400))
                .unwrap()
                .mul(&finite_length_reciprocal(k, &q(2), &q(2), &int(400)).unwrap())
        };
        let alt: Vec<_> = (0..=n)
            .map(|i| (pm(i), qbinomial_exact(n, i, &q(1)).unwrap()))
            .collect();
        let alt_q: Vec<_> = (0..=n)
            .map(|i| (pm(i), qbinomial_exact(n, i, &q(1)).unwrap().shift(&int(i))))
            .collect();
        if n % 2 == 0 {
            assert!(
                same(&signed_sum(&alt), &closed(2 * k), 300),
                "second, n={n}"
            );
            assert!(
                same(&signed_sum(&alt_q), &closed(2 * k), 300),
                "third, n={n}"
            );
        } else {
            assert!(signed_sum(&alt).is_zero());
            assert!(
                same(&signed_sum(&alt_q), &closed(2 * k + 1), 300),
                "third, n={n}"
            );
        }
    }
}

#[test]
fn half_integer_splitting() {
    let big = int(120);
    for n in 0..=16i64 {
        let mut plain = Vec::new();
        let mut by_j = Vec::new();
        let mut by_i = Vec::new();
        for i in 0..=n {
            let j = n - i;
            let e = int(i * i + j * j) + rat(j - i, 2);
            let t = finite_length_reciprocal(i, &q(2), &q(2), &big)
                .unwrap()
                .mul(&finite_length_reciprocal(j, &q(2), &q(2), &big).unwrap())
                .shift(&e);
            plain.push((int(1), t.clone()));
            by_j.push((pm(j), t.clone()));
            by_i.push((pm(i), t));
        }
        let head = finite_length_reciprocal(n, &q(1), &q(1), &big)
            .unwrap()
            .shift(&rat(n * n, 2));
        assert!(same(&signed_sum(&plain), &head, 100), "n={n}");
        let neg = finite_length_reciprocal(
            n,
            &SignedMonomial::neg_q(int(1)),
            &SignedMonomial::neg_q(int(1)),
            &big,
        )
        .unwrap()
        .shift(&rat(n * n, 2));
        let s2 = pm((n * n - n) / 2);
        let s3 = pm((n * n + n) / 2);
        assert!(
            same(&signed_sum(&by_j), &neg.scale_by(&s2), 100),
            "signed j, n={n}"
        );
        assert!(
            same(&signed_sum(&by_i), &neg.scale_by(&s3), 100),
            "signed i, n={n}"
        );
    }
}
