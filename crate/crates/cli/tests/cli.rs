use std::path::PathBuf;
use std::process::{Command, Output};

fn nahm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nahm"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("nahm-cli-{}-{name}", std::process::id()));
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn verify_passes_on_the_builtin_catalog() {
    let o = nahm(&["verify", "--id", "eq3-2", "--order", "40"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("eq3-2  pass"));
}

#[test]
fn verify_fails_on_a_seeded_typo() {
    let text = std::fs::read_to_string(data("catalog.json")).unwrap();
    let bad = text.replace("\"exp\": \"4ij + i + 3j\"", "\"exp\": \"4ij + i + 2j\"");
    assert_ne!(bad, text);
    let path = scratch("typo.json", &bad);
    let o = nahm(&[
        "verify",
        "--id",
        "eq3-2",
        "--order",
        "40",
        "--catalog",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stdout(&o).contains("FAIL first mismatch at q^"),
        "{}",
        stdout(&o)
    );

    let o = nahm(&[
        "verify",
        "--id",
        "eq3-2",
        "--order",
        "40",
        "--catalog",
        path.to_str().unwrap(),
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"][0]["verdict"], "fail");
    assert!(v["rows"][0]["first_mismatch"]["exponent"].is_string());
    std::fs::remove_file(path).unwrap();
}

#[test]
fn prefactor_of_a_table_row() {
    let o = nahm(&["prefactor", "--id", "s-39-as-quadruple"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).starts_with("required_C = -1/48"),
        "{}",
        stdout(&o)
    );

    let o = nahm(&["prefactor", "--id", "eq3-2-as-quadruple", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(
        (v["required_C"].as_str(), v["printed_C"].as_str()),
        (Some("1/12"), Some("-5/12"))
    );
}

#[test]
fn prefactor_of_an_explicit_pair() {
    let o = nahm(&[
        "prefactor",
        "--nahm",
        r#"{"A":[["1"]],"B":["1/2"],"v":[0],"L":[[1]]}"#,
        "--product",
        "(-q;q)_inf",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("required_C = 1/24"));
}

#[test]
fn expand_round_trips_as_json() {
    let o = nahm(&[
        "expand",
        "--product",
        "1/(q;q)_inf",
        "--order",
        "10",
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let coeffs: Vec<&str> = v["coeffs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(
        coeffs,
        ["1", "1", "2", "3", "5", "7", "11", "15", "22", "30", "42"]
    );
    assert_eq!(v["order"], "10");

    let o = nahm(&["expand", "--id", "rr@a=0", "--side", "rhs", "--order", "10"]);
    assert!(
        stdout(&o).starts_with("1 + q + q^2 + q^3 + 2*q^4"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn prodmake_finds_the_modular_coset_only() {
    let good = r#"{"A":[["0","1"],["1","0"]],"B":["1/2","1/2"],"v":[1,0],"L":[[2,0],[0,2]]}"#;
    let o = nahm(&["prodmake", "--nahm", good, "--order", "120"]);
    assert!(
        stdout(&o).contains("period 8: [2, 0, 2, 1, 2, 0, 2, -1]"),
        "{}",
        stdout(&o)
    );
    let bad = good.replace("[1,0]", "[0,0]");
    let o = nahm(&["prodmake", "--nahm", &bad, "--order", "120", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["period"].is_null());
}

#[test]
fn search_over_a_grid_file() {
    let grid = scratch(
        "grid.json",
        r#"{"A": [[["0","1"],["1","0"]]], "B_each": ["0","1/2"], "L": [[[2,0],[0,2]]]}"#,
    );
    let o = nahm(&[
        "search",
        "--grid",
        grid.to_str().unwrap(),
        "--order",
        "150",
        "--max-period",
        "40",
        "--json",
        "--jobs",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let cands = v.as_array().unwrap();
    assert_eq!(cands.len(), 2);
    assert!(cands.iter().all(|c| c["required_C"] == "1/12"));
    std::fs::remove_file(grid).unwrap();
}

#[test]
fn verify_all_and_listing() {
    let o = nahm(&["verify-all", "--filter", "ss-*", "--order", "30"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("2 passed, 0 failed to q^30"));
    let o = nahm(&["catalog-list", "--filter", "eq1-*", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v
        .as_array()
        .unwrap()
        .iter()
        .all(|e| e["status"] == "conjecture"));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["frobnicate"],
        vec!["verify"],
        vec!["verify", "--id", "no-such-entry"],
        vec!["expand", "--order", "5"],
        vec!["expand", "--product", "(q;q", "--order", "5"],
        vec!["verify", "--id", "eq3-2", "--order", "-3"],
    ] {
        assert_eq!(nahm(&args).status.code(), Some(2), "{args:?}");
    }
}
