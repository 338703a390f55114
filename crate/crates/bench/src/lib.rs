//! Benchmark fixtures.

use nahm_core::discover::builtin_quadruples;
use nahm_core::rat::int;
use nahm_core::{
    eval_product, NahmSpec, PochFactor, ProductSpec, PuiseuxSeries, Rat, SignedMonomial,
};

/// `1/(q;q)_∞`.
pub fn partitions() -> ProductSpec {
    let q = SignedMonomial::q(int(1));
    ProductSpec::new(int(1), int(0), vec![PochFactor::new(q.clone(), q, -1)]).unwrap()
}

/// `(−q^{1/2};q)_∞ / (q^{1/3};q^2)_∞`, a product on the `q^{1/6}` lattice.
pub fn mixed_lattice() -> ProductSpec {
    ProductSpec::new(
        int(1),
        int(0),
        vec![
            PochFactor::new(
                SignedMonomial::neg_q(Rat::new(1.into(), 2.into())),
                SignedMonomial::q(int(1)),
                1,
            ),
            PochFactor::new(
                SignedMonomial::q(Rat::new(1.into(), 3.into())),
                SignedMonomial::q(int(2)),
                -1,
            ),
        ],
    )
    .unwrap()
}

pub fn series(p: &ProductSpec, n: i64) -> PuiseuxSeries {
    eval_product(p, &int(n)).unwrap()
}

/// Nahm quadruple of a table row.
pub fn quadruple(id: &str) -> NahmSpec {
    builtin_quadruples()
        .unwrap()
        .into_iter()
        .find(|r| r.id == id)
        .unwrap()
        .nahm
}
