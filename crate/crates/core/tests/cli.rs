use std::process::{Command, Output};

fn bunkbed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bunkbed")).args(args).env_remove("BUNKBED_WORKERS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn verify_square() {
    let o = bunkbed(&["verify-theorem", "--n", "2", "--p", "1/2", "--out", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    let detail = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "difference p=1/2").unwrap();
    assert_eq!(detail["detail"], "1/8");
}

#[test]
fn verify_grid_passes() {
    let o = bunkbed(&["verify-theorem", "--n", "4", "--p-grid", "1/2:1:1/20"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert!(rows.iter().all(|r| r.len() == 13));
    let ps: std::collections::BTreeSet<_> = rows.iter().map(|r| (r[1].clone(), r[2].clone())).collect();
    assert_eq!(ps.len(), 11);
}

#[test]
fn term_column_sums_to_difference() {
    use bunkbed::rational::rat;
    let o = bunkbed(&["verify-theorem", "--n", "3", "--p", "3/5"]);
    let total: bunkbed::Rational =
        csv_rows(&o).iter().map(|r| bunkbed::Rational::new(r[11].parse().unwrap(), r[12].parse().unwrap())).sum();
    let (v, vp) = bunkbed::verifier::direct_probabilities(3, &rat(3, 5), &Default::default()).unwrap();
    assert_eq!(total, v - vp);
}

#[test]
fn capacity_and_usage_codes() {
    assert_eq!(bunkbed(&["verify-theorem", "--n", "30", "--p", "1/2"]).status.code(), Some(3));
    let o = bunkbed(&["verify-theorem", "--n", "30", "--p", "1/2"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("mc"));
    assert_eq!(bunkbed(&["verify-theorem", "--n", "3", "--p", "0.5"]).status.code(), Some(2));
    assert_eq!(bunkbed(&["verify-theorem", "--n", "3", "--p", "3/2"]).status.code(), Some(2));
    assert_eq!(bunkbed(&["identities", "--k-max"]).status.code(), Some(2));
    assert_eq!(bunkbed(&["counts", "--n", "3", "--triplet", "3,3,1"]).status.code(), Some(2));
    assert_eq!(bunkbed(&["counts", "--n", "3", "--triplet", "2,1"]).status.code(), Some(2));
    assert_eq!(bunkbed(&["aux", "--prop", "averaged", "--n", "6"]).status.code(), Some(3));
    assert_eq!(bunkbed(&["--workers", "0", "identities", "--k-max", "2"]).status.code(), Some(2));
}

#[test]
fn identities_small_and_full() {
    let o = bunkbed(&["identities", "--k-max", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(csv_rows(&o).len(), 3);
    assert_eq!(bunkbed(&["identities", "--k-max", "60"]).status.code(), Some(0));
}

#[test]
fn counts_examples() {
    let o = bunkbed(&["counts", "--n", "3", "--triplet", "2,1,1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(csv_rows(&o), vec![vec!["3", "2", "1", "1", "5", "2", "1", "0", "4"]]);
    assert_eq!(bunkbed(&["counts", "--n", "4", "--all", "--check"]).status.code(), Some(0));
}

#[test]
fn aux_examples() {
    let o = bunkbed(&["aux", "--prop", "segment", "--n", "3", "--p", "1/2"]);
    assert_eq!(o.status.code(), Some(0));
    let row = &csv_rows(&o)[0];
    assert_eq!((&row[0][..], &row[1][..]), ("1", "32"));
    assert_eq!(bunkbed(&["aux", "--prop", "2.3", "--n", "3", "--p", "2/3"]).status.code(), Some(0));
    assert_eq!(bunkbed(&["aux", "--prop", "separation", "--n", "4", "--p", "1/2"]).status.code(), Some(0));
}

#[test]
fn mc_is_reproducible_across_workers() {
    let args = ["mc", "--n", "6", "--p", "0.6", "--samples", "20000", "--seed", "7"];
    let a = bunkbed(&args);
    assert_eq!(a.status.code(), Some(0));
    let b = Command::new(env!("CARGO_BIN_EXE_bunkbed")).args(args).env("BUNKBED_WORKERS", "3").output().unwrap();
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn threshold_is_reported() {
    let o = bunkbed(&["threshold", "--n", "4", "--step", "1/50", "--out", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 51);
}

#[test]
fn out_file_format_follows_extension() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let csv = dir.path().join("report.csv");
    for path in [&json, &csv] {
        let o = bunkbed(&["--out", path.to_str().unwrap(), "counts", "--n", "3", "--all"]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["columns"][4], "B");
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("n,x,y,z,B,"));
}
