use lattice_index::cli;
use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["lattice-index"];
    full.extend_from_slice(args);
    let code = cli::run(full, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn index_of_shift_walk() {
    let (code, out, _) = run(&["index", "builtin:shift-walk-d2"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("index 2"));
}

#[test]
fn index_of_identity_qca() {
    let (code, out, _) = run(&["index", "builtin:identity-qca"]);
    assert_eq!(code, 0);
    assert!(out.contains("index 1/1"));
}

#[test]
fn non_unitary_file_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.json");
    std::fs::write(
        &f,
        r#"{"type":"walk","M":4,"dims":[1,1,1,1],"band":1,"blocks":[{"x":0,"y":0,"re":[[2.0]],"im":[[0.0]]}]}"#,
    )
    .unwrap();
    let (code, out, _) = run(&["index", path(&f)]);
    assert_eq!(code, 1);
    assert!(
        out.contains("not unitary") && out.contains("residual"),
        "{out}"
    );
    let (code, _, _) = run(&["index", path(&dir.path().join("missing.json"))]);
    assert_eq!(code, 1);
    let (code, _, _) = run(&["index", "builtin:nope"]);
    assert_eq!(code, 1);
}

#[test]
fn json_report_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("r.json");
    let (code, out, _) = run(&["index", "builtin:cluster-qca", "--json", "--out", path(&f)]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["index"], "1/1");
    assert_eq!(v["digest"].as_str().unwrap().len(), 64);
    let saved: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(f).unwrap()).unwrap();
    assert_eq!(saved["index"], "1/1");
}

#[test]
fn decouple_of_shift_is_a_disagreement() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(&[
        "construct",
        "builtin:shift-walk-d1",
        "--kind",
        "decouple",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(code, 2);
    assert!(out.contains("index 1 ≠ 0"), "{out}");
}

#[test]
fn two_layer_of_cluster_writes_layers() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(&[
        "construct",
        "builtin:cluster-qca",
        "--kind",
        "two-layer",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(code, 0, "{out}");
    for f in ["layer1.json", "layer2.json", "report.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    let res = report["residuals"][0]["value"].as_f64().unwrap();
    assert!(res <= 1e-9);
    // each layer is a valid automaton of index 1
    let (code, _, _) = run(&["index", path(&dir.path().join("layer1.json"))]);
    assert_eq!(code, 0);
}

#[test]
fn path_sample_has_band_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(&[
        "construct",
        "builtin:split-step-walk",
        "--kind",
        "path-sample",
        "--t",
        "0.5",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(code, 0, "{out}");
    let sample: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sample.json")).unwrap())
            .unwrap();
    assert!(sample["band"].as_u64().unwrap() <= 2);
}

#[test]
fn crossover_and_doubled() {
    let dir = tempfile::tempdir().unwrap();
    let other = dir.path().join("other.json");
    lattice_index::io::System::Walk(lattice_index::walk::BandedUnitary::shift(12, 1, 1).unwrap())
        .save(&other)
        .unwrap();
    let (code, out, _) = run(&[
        "construct",
        "builtin:shift-walk-d1",
        "--kind",
        "crossover",
        "--with",
        path(&other),
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(dir.path().join("crossover.json").exists());
    let (code, out, _) = run(&[
        "construct",
        "builtin:shift-walk-d1",
        "--kind",
        "doubled",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(code, 0, "{out}");
    let (code, out, _) = run(&[
        "construct",
        "builtin:shift-qca-d2",
        "--kind",
        "doubled",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn dispersion_csv() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("w.csv");
    let (code, out, _) = run(&[
        "dispersion",
        "builtin:W1-coin",
        "--grid",
        "256",
        "--out",
        path(&f),
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("winding sum 1"));
    let csv = std::fs::read_to_string(f).unwrap();
    assert_eq!(csv.lines().next(), Some("p,branch,omega,velocity"));
    assert_eq!(csv.lines().count(), 1 + 2 * 256);

    let (code, out, err) = run(&["dispersion", "builtin:constant-coin"]);
    assert_eq!(code, 0);
    assert!(err.contains("winding sum 0"));
    for line in out.lines().skip(1) {
        let v: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(v.abs() < 1e-9);
    }

    let (code, _, err) = run(&["dispersion", "builtin:random-ti", "--seed", "7"]);
    assert_eq!(code, 0);
    assert!(
        err.contains("winding sum 2") && err.contains("index 2"),
        "{err}"
    );

    let (code, _, _) = run(&["dispersion", "builtin:cluster-qca"]);
    assert_eq!(code, 1);
}

#[test]
fn verify_single_builtins() {
    let (code, out, _) = run(&["verify", "builtin:cluster-qca"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("index 1/1"));
    let (code, out, _) = run(&["verify", "builtin:hopping-ring-U1"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("index 1"));
}

#[test]
fn verify_is_deterministic_under_seed() {
    let strip = |s: String| {
        s.lines()
            .filter(|l| !l.trim_end().ends_with("ms"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let a = run(&["verify", "builtin:classical-shift-q2", "--seed", "5"]);
    let b = run(&["verify", "builtin:classical-shift-q2", "--seed", "5"]);
    assert_eq!(a.0, 0);
    assert_eq!(strip(a.1), strip(b.1));
}

#[test]
fn bad_flags_exit_one() {
    assert_eq!(run(&["index"]).0, 1);
    assert_eq!(run(&["index", "builtin:identity-qca", "--tol", "-1"]).0, 1);
    assert_eq!(
        run(&["construct", "builtin:identity-qca", "--kind", "sideways"]).0,
        1
    );
}

#[test]
fn binary_verifies_all_builtins() {
    let out = Command::new(env!("CARGO_BIN_EXE_lattice-index"))
        .args(["verify", "--all-builtin"])
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    let suites = text.lines().filter(|l| l.starts_with("PASS ")).count();
    assert!(suites >= 14, "{suites} suites");
}
