mod common;

use common::{
    box_sum, coset_additivity, dissection_params, f_spec, random_pd_specs, same, ADDITIVITY_ROWS,
};
use nahm_core::discover::builtin_quadruples;
use nahm_core::eval_nahm;
use nahm_core::nahm::{dissection_transform, DissectionPattern};
use nahm_core::rat::int;

#[test]
fn every_dissection_pattern_for_each_parameter_set() {
    let n = int(30);
    for [a, b, c, d, e] in dissection_params() {
        let f = f_spec(&a, &b, &c, &d, &e);
        for p in DissectionPattern::ALL {
            let (l, r) = dissection_transform(&f, p).unwrap().evaluate(&n).unwrap();
            assert!(!l.is_zero());
            assert!(same(&l, &r, &n), "{p:?} at ({a},{b},{c},{d},{e})");
        }
    }
}

#[test]
fn cosets_of_twice_the_lattice_add_up() {
    let rows = builtin_quadruples().unwrap();
    for id in ADDITIVITY_ROWS {
        let row = rows.iter().find(|r| r.id == id).unwrap();
        assert!(coset_additivity(&row.nahm, &int(30)), "{id}");
    }
}

#[test]
fn adaptive_enumeration_matches_box_scan() {
    let n = int(20);
    for spec in random_pd_specs() {
        let got = eval_nahm(&spec, &n).unwrap();
        assert!(
            same(&got, &box_sum(&spec, &n), &n),
            "{}",
            serde_json::to_string(&spec).unwrap()
        );
    }
}

#[test]
fn box_scan_reproduces_rogers_ramanujan() {
    use nahm_core::{
        eval_product, LatticeCoset, NahmSpec, PochFactor, ProductSpec, QuadExpr, SignedMonomial,
    };
    let spec = NahmSpec::new(
        QuadExpr::new(vec![vec![int(2)]], vec![int(0)], int(0)).unwrap(),
        LatticeCoset::full(1),
    )
    .unwrap();
    let q = |e| SignedMonomial::q(int(e));
    let g = ProductSpec::new(
        int(1),
        int(0),
        vec![
            PochFactor::new(q(1), q(5), -1),
            PochFactor::new(q(4), q(5), -1),
        ],
    )
    .unwrap();
    let n = int(40);
    assert!(same(
        &box_sum(&spec, &n),
        &eval_product(&g, &n).unwrap(),
        &n
    ));
}
