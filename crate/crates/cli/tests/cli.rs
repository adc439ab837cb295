use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tiltwalk(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tiltwalk"))
        .args(args)
        .current_dir(dir)
        .env_remove(tiltwalk::persist::CACHE_DIR_ENV)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn manifest(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// CSV records after the schema line and header.
fn records(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(2)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn verdict(m: &Value, name: &str) -> Option<bool> {
    m["verdicts"]
        .as_array()?
        .iter()
        .find(|v| v["name"] == name)?["passed"]
        .as_bool()
}

#[test]
fn closed_form_coefficients_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = tiltwalk(
        dir.path(),
        &[
            "closed-form",
            "--model",
            "end-fixed-tree:k=4",
            "--coeffs",
            "5",
        ],
    );
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# tiltwalk-csv closed-form-coeffs 1\nlambda,n,coefficient\n"));
    let coeffs: Vec<String> = records(&text).into_iter().map(|r| r[2].clone()).collect();
    assert_eq!(coeffs, ["1", "4", "12", "36", "108"]);
}

#[test]
fn verify_lists_passed_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = tiltwalk(
        dir.path(),
        &[
            "verify",
            "--model",
            "end-fixed-tree:k=4",
            "--weight",
            "saw",
            "--nmax",
            "12",
            "--manifest",
            "m.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&dir.path().join("m.json"));
    for check in [
        "mtp",
        "bridge-reversal",
        "differential-inequality",
        "closed-form-coefficients",
    ] {
        assert_eq!(verdict(&m, check), Some(true), "{check}");
    }
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["config"]["n_max"], 12);
    assert_eq!(m["tool_version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("empty.toml"), "").unwrap();
    fs::write(
        dir.path().join("typo.toml"),
        "modle = \"end-fixed-tree:k=3\"\n",
    )
    .unwrap();
    let cases: [&[&str]; 7] = [
        &[],
        &["verify", "--config", "empty.toml"],
        &["enumerate", "--config", "typo.toml"],
        &["enumerate", "--model", "end-fixed-tree:k=1"],
        &[
            "analyze",
            "--model",
            "end-fixed-tree:k=3",
            "--z-grid",
            "1.5",
        ],
        &["closed-form", "--model", "end-fixed-tree:k=3"],
        &[
            "sample",
            "--model",
            "product-tree-zd:k=3,d=1",
            "--n",
            "40",
            "--method",
            "exact",
        ],
    ];
    for args in cases {
        assert_eq!(code(&tiltwalk(dir.path(), args)), 2, "{args:?}");
    }
}

#[test]
fn violations_exit_one_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = tiltwalk(
        dir.path(),
        &[
            "verify",
            "--model",
            "end-fixed-tree:k=3",
            "--weight",
            "planted-violation",
            "--nmax",
            "4",
            "--trials",
            "100",
        ],
    );
    assert_eq!(code(&out), 1);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("weight-properties"), "{stderr}");
    let report = dir.path().join("tiltwalk-verify.manifest.json");
    assert!(stderr.contains("tiltwalk-verify.manifest.json"));
    assert_eq!(
        verdict(&manifest(&report), "weight-properties"),
        Some(false)
    );
}

#[test]
fn cache_hits_and_recovers_from_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec![
            "enumerate",
            "--model",
            "product-tree-zd:k=3,d=1",
            "--nmax",
            "7",
            "--cache-dir",
            "cache",
            "--out",
            out,
        ]
    };
    assert_eq!(code(&tiltwalk(dir.path(), &args("a.csv"))), 0);
    let first = manifest(&dir.path().join("a.csv.manifest.json"));
    assert_eq!(first["cache"]["status"], "miss");
    assert_eq!(code(&tiltwalk(dir.path(), &args("b.csv"))), 0);
    let second = manifest(&dir.path().join("b.csv.manifest.json"));
    assert_eq!(second["cache"]["status"], "hit");
    assert_eq!(
        first["outputs"][0]["sha256"],
        second["outputs"][0]["sha256"]
    );

    let entry = first["cache"]["path"].as_str().unwrap();
    let entry = dir.path().join(entry);
    let text = fs::read_to_string(&entry).unwrap();
    fs::write(&entry, &text[..text.len() / 2]).unwrap();
    let out = tiltwalk(dir.path(), &args("c.csv"));
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("corrupt"));
    let third = manifest(&dir.path().join("c.csv.manifest.json"));
    assert_eq!(third["cache"]["status"], "corrupt");
    assert_eq!(first["outputs"][0]["sha256"], third["outputs"][0]["sha256"]);
    assert_eq!(fs::read_to_string(&entry).unwrap(), text);
}

#[test]
fn cache_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_tiltwalk"))
        .args([
            "enumerate",
            "--model",
            "end-fixed-tree:k=3",
            "--nmax",
            "5",
            "--out",
            "e.csv",
        ])
        .current_dir(dir.path())
        .env(
            tiltwalk::persist::CACHE_DIR_ENV,
            dir.path().join("envcache"),
        )
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(
        fs::read_dir(dir.path().join("envcache")).unwrap().count(),
        1
    );
    let m = manifest(&dir.path().join("e.csv.manifest.json"));
    assert_eq!(m["cache"]["status"], "miss");
    assert!(m["config"]["cache_dir"]
        .as_str()
        .unwrap()
        .ends_with("envcache"));
}

#[test]
fn outputs_do_not_depend_on_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut hashes = Vec::new();
    for threads in ["1", "4"] {
        for (cmd, extra) in [
            ("enumerate", vec!["--nmax", "8"]),
            (
                "sample",
                vec![
                    "--n",
                    "6",
                    "--count",
                    "500",
                    "--lambda",
                    "0.3",
                    "--method",
                    "rosenbluth",
                ],
            ),
        ] {
            let out = format!("{cmd}-{threads}.csv");
            let mut args = vec![
                cmd,
                "--model",
                "product-tree-zd:k=3,d=1",
                "--threads",
                threads,
                "--out",
                &out,
            ];
            args.extend(extra);
            assert_eq!(code(&tiltwalk(dir.path(), &args)), 0);
            hashes.push(
                manifest(&dir.path().join(format!("{out}.manifest.json")))["outputs"][0]["sha256"]
                    .clone(),
            );
        }
    }
    assert_eq!(hashes[0], hashes[2]);
    assert_eq!(hashes[1], hashes[3]);
}

#[test]
fn manifests_rerun_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "model = \"end-fixed-tree:k=3\"\nn = 12\ncount = 300\nlambda = 0.7\nseed = 11\nsampler = \"exact\"\n",
    )
    .unwrap();
    assert_eq!(
        code(&tiltwalk(
            dir.path(),
            &["sample", "--config", "run.toml", "--out", "s.csv"]
        )),
        0
    );
    let m = manifest(&dir.path().join("s.csv.manifest.json"));
    assert_eq!(m["inputs"][0]["role"], "config");
    let out = tiltwalk(
        dir.path(),
        &["rerun", "s.csv.manifest.json", "--out-dir", "again"],
    );
    assert_eq!(code(&out), 0);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "sample: identical\n"
    );
    assert_eq!(
        fs::read(dir.path().join("s.csv")).unwrap(),
        fs::read(dir.path().join("again/s.csv")).unwrap()
    );
}

#[test]
fn analyze_from_a_table_file() {
    let dir = tempfile::tempdir().unwrap();
    let enumerate = [
        "enumerate",
        "--model",
        "end-fixed-tree:k=4",
        "--nmax",
        "14",
        "--out",
        "e.csv",
        "--tables-out",
        "t.tables",
    ];
    assert_eq!(code(&tiltwalk(dir.path(), &enumerate)), 0);
    let out = tiltwalk(
        dir.path(),
        &[
            "analyze",
            "--tables",
            "t.tables",
            "--lambda-grid",
            "0,0.5",
            "--out",
            "b.csv",
            "--report",
            "r.json",
        ],
    );
    assert_eq!(code(&out), 0);
    let rows = records(&fs::read_to_string(dir.path().join("b.csv")).unwrap());
    let targets = [1.0 / 3.0, 3f64.powf(-0.5)];
    for (row, target) in rows.iter().zip(targets) {
        let (lo, hi): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
        assert!(lo <= target && target <= hi, "{row:?}");
        assert_eq!(row[3], "14");
    }
    let m = manifest(&dir.path().join("b.csv.manifest.json"));
    assert_eq!(verdict(&m, "closed-form-inside-bracket"), Some(true));
    assert_eq!(m["inputs"][0]["role"], "tables");
    let report: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["brackets"].as_array().unwrap().len(), 2);
}

#[test]
fn oriented_verdict_in_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = tiltwalk(
        dir.path(),
        &[
            "verify",
            "--model",
            "oriented-tree-112",
            "--nmax",
            "12",
            "--manifest",
            "m.json",
        ],
    );
    assert_eq!(code(&out), 0);
    let m = manifest(&dir.path().join("m.json"));
    assert_eq!(m["oriented_verdict"]["selected"], "one-minus-z-squared");
    assert_eq!(verdict(&m, "oriented-numerator-unique"), Some(true));
}

#[test]
fn sample_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = tiltwalk(
        dir.path(),
        &[
            "sample",
            "--model",
            "end-fixed-tree:k=3",
            "--n",
            "2",
            "--count",
            "3",
        ],
    );
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().nth(1),
        Some("sample_idx,height_units,distance,log_weight")
    );
    assert_eq!(records(&text).len(), 3);
}

#[test]
fn long_tree_enumeration_skips_bridges() {
    use num_bigint::BigUint;
    let dir = tempfile::tempdir().unwrap();
    let out = tiltwalk(
        dir.path(),
        &[
            "enumerate",
            "--model",
            "end-fixed-tree:k=4",
            "--nmax",
            "2000",
            "--out",
            "e.csv",
        ],
    );
    assert_eq!(code(&out), 0);
    let mut total = BigUint::default();
    for row in records(&fs::read_to_string(dir.path().join("e.csv")).unwrap()) {
        if row[0] == "2000" {
            total += row[3].parse::<BigUint>().unwrap();
        }
    }
    assert_eq!(total, BigUint::from(4u32) * BigUint::from(3u32).pow(1999));
    let m = manifest(&dir.path().join("e.csv.manifest.json"));
    assert_eq!(verdict(&m, "mtp"), Some(true));
    assert_eq!(verdict(&m, "bridge-reversal"), None);
}
