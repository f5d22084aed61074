use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gmcantor(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmcantor"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn tower_round_trip_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&gmcantor(d, &["tower", "build", "--bases", "2,9", "--out", "t.json"])), 0);
    let ok = gmcantor(d, &["tower", "validate", "t.json"]);
    assert_eq!(code(&ok), 0);

    // a level-2 word that does not start with letter 1
    fs::write(d.join("w.json"), "[[[1,1],[1,1,1]],[[1,2]]]").unwrap();
    assert_eq!(code(&gmcantor(d, &["tower", "build", "--words", "w.json", "--out", "tw.json"])), 0);
    let mut json: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("tw.json")).unwrap()).unwrap();
    json["levels"][1]["words"] = serde_json::json!([[2, 1]]);
    fs::write(d.join("bad.json"), json.to_string()).unwrap();
    let bad = gmcantor(d, &["tower", "validate", "bad.json"]);
    assert_eq!(code(&bad), 1);
    assert!(String::from_utf8_lossy(&bad.stdout).contains("condition (5)"));
}

#[test]
fn growth_warning_is_not_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = gmcantor(dir.path(), &["tower", "build", "--bases", "2,2", "--strict", "--out", "t.json"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&gmcantor(d, &["tower", "build", "--out", "t.json"])), 2);
    assert_eq!(code(&gmcantor(d, &["tower", "build", "--bases", "2,9", "--out", "t.json"])), 0);
    // no lookahead level for depth equal to the height
    assert_eq!(code(&gmcantor(d, &["atlas", "build", "t.json", "--depth", "2", "--out", "a.json"])), 2);
    assert_eq!(code(&gmcantor(d, &["atlas", "build", "missing.json", "--depth", "1", "--out", "a.json"])), 2);
}

#[test]
fn strict_atlas_and_verification() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&gmcantor(d, &["tower", "build", "--bases", "2,9,73", "--out", "t.json"])), 0);
    let atlas = gmcantor(d, &["atlas", "build", "t.json", "--depth", "2", "--mode", "strict", "--out", "a.json"]);
    assert_eq!(code(&atlas), 0, "{}", String::from_utf8_lossy(&atlas.stderr));
    for args in [
        &["verify", "conjugacy", "a.json", "--depth", "2"][..],
        &["verify", "disjointness", "a.json"],
        &["verify", "lrs", "a.json", "--samples", "50"],
    ] {
        assert_eq!(code(&gmcantor(d, args)), 0, "{args:?}");
    }
    let q1 = gmcantor(d, &["verify", "quotients", "a.json", "--samples", "300", "--seed", "7", "--out", "q1.json"]);
    assert_eq!(code(&q1), 0);
    assert_eq!(code(&gmcantor(d, &["verify", "quotients", "a.json", "--samples", "300", "--seed", "7", "--out", "q2.json"])), 0);
    let (a, b) = (fs::read(d.join("q1.json")).unwrap(), fs::read(d.join("q2.json")).unwrap());
    assert_eq!(a, b);

    let report: serde_json::Value = serde_json::from_slice(&a).unwrap();
    let level2 = report["per_level"].as_array().unwrap().iter().find(|l| l["level"] == 2).unwrap();
    assert!(level2["max_bound_log2"].as_f64().unwrap() <= (27.0f64 / 131072.0).log2());
}

#[test]
fn extension_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&gmcantor(d, &["tower", "build", "--bases", "2,9,2,2,2,2", "--out", "t.json"])), 0);
    assert_eq!(code(&gmcantor(d, &["atlas", "build", "t.json", "--depth", "5", "--mode", "checked", "--out", "a.json"])), 0);
    let ok = gmcantor(
        d,
        &["extend", "build", "a.json", "--levels", "1", "--samples", "200", "--out", "e.json", "--report", "r.json"],
    );
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(String::from_utf8_lossy(&ok.stderr).contains("periods: 36"));

    let short = gmcantor(d, &["extend", "build", "a.json", "--levels", "1", "--horizon", "40", "--out", "e2.json"]);
    assert_eq!(code(&short), 1);
    assert!(String::from_utf8_lossy(&short.stderr).contains("horizon 40"));

    fs::write(d.join("w.json"), "[[[1,1],[1,1,1]],[[1,2],[1,1]],[[1,2]]]").unwrap();
    assert_eq!(code(&gmcantor(d, &["tower", "build", "--words", "w.json", "--out", "nb.json"])), 0);
    assert_eq!(code(&gmcantor(d, &["atlas", "build", "nb.json", "--depth", "2", "--mode", "checked", "--out", "nba.json"])), 0);
    assert_eq!(code(&gmcantor(d, &["extend", "build", "nba.json", "--out", "x.json"])), 2);
}

#[test]
fn plotdata_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gmcantor(d, &["tower", "build", "--bases", "2,9,2,2,2,2", "--out", "t.json"]);
    gmcantor(d, &["atlas", "build", "t.json", "--depth", "5", "--mode", "checked", "--out", "a.json"]);
    gmcantor(d, &["extend", "build", "a.json", "--levels", "1", "--samples", "20", "--out", "e.json"]);
    let out = gmcantor(d, &["export", "plotdata", "a.json", "--extension", "e.json", "--samples", "400", "--out-dir", "p"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let mut rdr = csv::Reader::from_path(d.join("p/intervals.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    // s_1 + ... + s_5 = 2 + 18 + 36 + 72 + 144
    assert_eq!(rows.len(), 272);

    let mut rdr = csv::Reader::from_path(d.join("p/quotients.csv")).unwrap();
    let curve: Vec<f64> = rdr
        .records()
        .map(Result::unwrap)
        .filter(|r| r[0].parse::<usize>().unwrap() >= 2)
        .map(|r| r[3].parse().unwrap())
        .collect();
    assert!(curve.windows(2).all(|w| w[1] < w[0]), "{curve:?}");

    let mut rdr = csv::Reader::from_path(d.join("p/spirals.csv")).unwrap();
    assert_eq!(rdr.records().count(), 36);
}
