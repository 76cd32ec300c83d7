use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qsic(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsic"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .arg("--no-timestamp")
        .output()
        .unwrap()
}

fn data_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(str::to_owned)
        .collect()
}

#[test]
fn zero_steps_report_the_initial_ensemble() {
    let dir = tempfile::tempdir().unwrap();
    assert!(
        qsic(dir.path(), &["counts", "--set", "yu-oh", "--steps", "0"])
            .status
            .success()
    );
    assert_eq!(data_rows(&dir.path().join("counts_yu-oh.csv")), ["0,13"]);
    assert!(
        qsic(dir.path(), &["entropy", "--set", "yu-oh", "--steps", "0"])
            .status
            .success()
    );
    let rows = data_rows(&dir.path().join("entropy_yu-oh.csv"));
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("0,13,3.70044,"));
}

#[test]
fn csv_headers_are_versioned() {
    let dir = tempfile::tempdir().unwrap();
    qsic(dir.path(), &["counts", "--set", "pm", "--steps", "2"]);
    let text = fs::read_to_string(dir.path().join("counts_peres-mermin.csv")).unwrap();
    assert!(text.starts_with("# qsic-counts v1\n# set: peres-mermin\n"));
    assert!(text.contains("\nstep,reachable_count\n0,24\n1,24\n2,24\n"));
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        assert!(qsic(
            dir.path(),
            &[
                "entropy",
                "--set",
                "yu-oh",
                "--steps",
                "4",
                "--workers",
                "2"
            ]
        )
        .status
        .success());
        assert!(qsic(
            dir.path(),
            &["transducer", "--set", "peres-mermin", "--dot"]
        )
        .status
        .success());
        assert!(qsic(
            dir.path(),
            &["sample", "--set", "yu-oh", "--len", "300", "--seed", "4"]
        )
        .status
        .success());
    }
    for name in [
        "entropy_yu-oh.csv",
        "transducer_peres-mermin.json",
        "transducer_peres-mermin.dot",
        "trace_yu-oh_quantum_4.csv",
    ] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn timestamps_appear_unless_suppressed() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qsic"))
        .args(["counts", "--set", "pm", "--steps", "0"])
        .env("QSIC_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(
        fs::read_to_string(dir.path().join("counts_peres-mermin.csv"))
            .unwrap()
            .contains("# created: ")
    );
}

#[test]
fn malformed_set_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"name": "x", "dim": 2, "kind": "rank1", "vectors": [["1", "0"], ["1/0", "1"]]}"#,
    )
    .unwrap();
    for cmd in ["transducer", "verify"] {
        let out = qsic(dir.path(), &[cmd, "--set", bad.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&out.stderr).contains("vectors[1][0]"));
    }
    let missing = qsic(dir.path(), &["counts", "--set", "no-such-set.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn non_commuting_context_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("set.json");
    fs::write(
        &set,
        r#"{"name": "x", "dim": 2, "kind": "rank1", "vectors": [["1", "0"], ["1", "1"]], "contexts": [[0, 1]]}"#,
    )
    .unwrap();
    let out = qsic(dir.path(), &["verify", "--set", set.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("do not commute"));
}

#[test]
fn support_cap_is_a_resource_limit() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsic(
        dir.path(),
        &["counts", "--set", "yu-oh", "--steps", "5", "--cap", "100"],
    );
    assert_eq!(out.status.code(), Some(3));
    let out = qsic(
        dir.path(),
        &["transducer", "--set", "yu-oh", "--cap", "1000"],
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn empty_trace_has_a_valid_header() {
    let dir = tempfile::tempdir().unwrap();
    assert!(qsic(
        dir.path(),
        &["sample", "--set", "pm", "--len", "0", "--seed", "3"]
    )
    .status
    .success());
    let text = fs::read_to_string(dir.path().join("trace_peres-mermin_quantum_3.csv")).unwrap();
    assert!(text.starts_with("# qsic-trace v1\n"));
    assert!(text.contains("# seed: 3\n"));
    assert!(text.ends_with("index,measurement_label,outcome\n"));
}

#[test]
fn compare_reports_json_and_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    qsic(
        d,
        &["sample", "--set", "pm", "--len", "20000", "--seed", "1"],
    );
    qsic(
        d,
        &[
            "sample",
            "--set",
            "pm",
            "--len",
            "20000",
            "--seed",
            "2",
            "--source",
            "classical",
        ],
    );
    qsic(
        d,
        &[
            "sample", "--set", "pm", "--len", "20000", "--seed", "3", "--source", "coin",
        ],
    );
    let q = d.join("trace_peres-mermin_quantum_1.csv");
    let c = d.join("trace_peres-mermin_classical_2.csv");
    let k = d.join("trace_peres-mermin_coin_3.csv");
    let path = |p: &Path| p.to_str().unwrap().to_owned();

    let same = qsic(d, &["compare", &path(&q), &path(&q), "--window", "2"]);
    assert_eq!(
        same.status.code(),
        Some(1),
        "100 occurrences per context cannot reach N_min 1000"
    );
    assert!(String::from_utf8_lossy(&same.stderr).contains("insufficient data"));

    let report = d.join("report.json");
    let ok = qsic(
        d,
        &[
            "compare",
            &path(&q),
            &path(&c),
            "--window",
            "1",
            "--threshold",
            "0.05",
            "--out",
            &path(&report),
        ],
    );
    assert!(
        ok.status.success(),
        "{}",
        String::from_utf8_lossy(&ok.stdout)
    );
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["contexts_compared"], 9);

    let coin = qsic(
        d,
        &[
            "compare",
            &path(&q),
            &path(&k),
            "--window",
            "2",
            "--n-min",
            "100",
        ],
    );
    assert_eq!(coin.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&coin.stdout).contains("\"pass\": false"));
}

#[test]
fn verify_passes_on_peres_mermin() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsic(dir.path(), &["verify", "--set", "peres-mermin"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(!text.contains("FAIL"));
    assert!(text.contains("distinguishability     PASS  276 pairs, 0 failures"));
}

#[test]
fn exported_distribution_feeds_back_as_init() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(qsic(
        d,
        &["entropy", "--set", "yu-oh", "--steps", "2", "--export-dist"]
    )
    .status
    .success());
    let dist = d.join("distribution_yu-oh_step2.csv");
    assert!(qsic(
        d,
        &[
            "counts",
            "--set",
            "yu-oh",
            "--init",
            dist.to_str().unwrap(),
            "--steps",
            "1"
        ]
    )
    .status
    .success());
    assert_eq!(data_rows(&d.join("counts_yu-oh.csv")), ["0,73", "1,265"]);
}
