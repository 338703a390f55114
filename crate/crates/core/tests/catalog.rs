use nahm_core::catalog::{builtin_catalog, verify_all, Status};
use nahm_core::rat::int;

#[test]
fn builtin_catalog_passes_at_order_40() {
    let cat = builtin_catalog().unwrap();
    let report = verify_all(&cat, &int(40), None).unwrap();
    let bad: Vec<_> = report
        .failures()
        .map(|r| format!("{}: {:?}", r.id, r.verdict))
        .collect();
    assert!(
        bad.is_empty(),
        "{} failures:\n{}",
        bad.len(),
        bad.join("\n")
    );
    assert!(
        cat.iter()
            .filter(|e| e.status == Status::Conjecture)
            .count()
            >= 2
    );
}

#[test]
fn conjectures_hold_at_order_200() {
    let cat = builtin_catalog().unwrap();
    let report = verify_all(&cat, &int(200), Some("eq1-[12]")).unwrap();
    assert_eq!(report.rows.len(), 2);
    for r in &report.rows {
        assert!(r.verdict.is_pass(), "{}: {:?}", r.id, r.verdict);
        assert_eq!(r.status, Status::Conjecture);
    }
}
