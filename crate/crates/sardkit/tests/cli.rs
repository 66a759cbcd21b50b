use std::path::Path;
use std::process::{Command, Output};

fn sardkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sardkit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ok(args: &[&str]) -> String {
    let o = sardkit(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn analyze_growth_at_origin() {
    let s = ok(&["analyze", "--model", "d224", "--point", "0,0,0,0"]);
    assert!(s.contains("growth (2,2,4)"), "{s}");
    let s = ok(&["analyze", "--model", "engel_std", "--point", "0,0,0,0"]);
    assert!(s.contains("growth (2,3,4)"), "{s}");
    assert!(s.contains("on_sigma false"));
}

#[test]
fn analyze_flags_invariant_disagreement() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.csv");
    let s = ok(&["analyze", "--model", "d224", "--point", "0,0,1,0", "--out", out.to_str().unwrap()]);
    assert!(s.contains("growth (2,3,4) certificate 0 on_sigma true disagreement true"), "{s}");
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][4], "2;3;4");
    assert_eq!(rows[0][8], "true");
}

#[test]
fn char_variants_for_d2334a_agree() {
    let s = ok(&["char", "--model", "d2334a"]);
    assert!(s.contains("printed vs oracle: identical"), "{s}");
    assert!(s.contains("corrected vs oracle: identical"), "{s}");
}

// The characteristic coefficients of d224 coincide in all three variants,
// so no printed/oracle discrepancy exists to list.
#[test]
fn char_d224_lists_printed_vs_oracle_discrepancy() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let s = ok(&["char", "--model", "d224", "--out", out.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let pairs = v["variant_pairs"].as_array().unwrap();
    let pv = pairs.iter().find(|p| p["a"] == "printed" && p["b"] == "oracle").unwrap();
    assert_eq!(pv["identical"], false, "{s}");
}

#[test]
fn char_engel_is_along_w() {
    let s = ok(&["char", "--model", "engel_std"]);
    assert!(s.contains("oracle: c = 0, e = 1"), "{s}");
}

#[test]
fn char_json_has_meta_first() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    ok(&["char", "--model", "d2334b", "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(&out).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["meta"]["model"], "d2334b");
    assert!(text.trim_start().starts_with("{\n  \"meta\""));
    assert_eq!(v["variants"].as_array().unwrap().len(), 3);
}

#[test]
fn flow_conserves_rho_for_d2334b() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.csv");
    ok(&["flow", "--model", "d2334b", "--start", "0,0,1,0", "--t", "10", "--monitor", "rho", "--out", out.to_str().unwrap()]);
    let rows = data_rows(&out);
    assert!(rows.len() > 10);
    let last: f64 = rows.last().unwrap()[0].parse().unwrap();
    assert!((last - 10.0).abs() < 1e-12);
    for r in &rows {
        let rho: f64 = r[5].parse().unwrap();
        assert!((rho - 1.0).abs() < 1e-8, "rho {rho}");
    }
}

#[test]
fn surface_d224_follows_formula() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    ok(&["surface", "--model", "d224", "--grid", "0.01:0.2:20", "--out", out.to_str().unwrap()]);
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 1600);
    for r in &rows {
        let v: Vec<f64> = r[..4].iter().map(|c| c.parse().unwrap()).collect();
        assert_eq!(r[4], "true");
        let (z, w, x, y) = (v[0], v[1], v[2], v[3]);
        let (px, py) = (-w * z * z / 3.0, -z * w * w / 3.0);
        assert!((x - px).abs() <= 1e-6 * px.abs(), "x {x} vs {px}");
        assert!((y - py).abs() <= 1e-6 * py.abs(), "y {y} vs {py}");
    }
}

#[test]
fn endpoint_char_control_is_singular() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.json");
    let s = ok(&[
        "endpoint", "--model", "d224", "--start", "-0.001/3,-0.001/3,0.1,0.1", "--char-duration", "1", "--out",
        out.to_str().unwrap(),
    ]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["classification"], "SINGULAR", "{s}");
    assert_eq!(v["jacobian_classification"], "SINGULAR");
}

#[test]
fn endpoint_random_control_is_regular_with_fd() {
    let s = ok(&["endpoint", "--model", "engel_std", "--random-segments", "16", "--fd"]);
    assert!(s.contains("-> REGULAR"), "{s}");
    let d: f64 = s.lines().find(|l| l.starts_with("finite-difference")).unwrap().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(d < 1e-6);
}

#[test]
fn endpoint_reads_control_files() {
    let dir = tempfile::tempdir().unwrap();
    let ctrl = dir.path().join("u.csv");
    std::fs::write(&ctrl, "u1,u2\n1,0\n0,1\n-1,0.5\n").unwrap();
    let s = ok(&["endpoint", "--model", "d2334b", "--start", "0.1,0.2,0.3,0.4", "--control", ctrl.to_str().unwrap()]);
    assert!(s.contains("endpoint ("), "{s}");
}

#[test]
fn endpoint_sard_writes_report_and_cloud() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let cloud = dir.path().join("cloud.csv");
    ok(&["endpoint", "--model", "d224", "--sard", "20", "--out", out.to_str().unwrap(), "--cloud", cloud.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["n_curves"], 20);
    assert!(v["max_surface_distance"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["detector_agreement"], 1.0);
    assert_eq!(data_rows(&cloud).len(), 20);
}

#[test]
fn user_model_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    std::fs::write(&m, r#"{"f": [[1, [0,0,1,0]]], "g": [["1/2", [0,0,2,0]]]}"#).unwrap();
    let s = ok(&["analyze", "--model", m.to_str().unwrap(), "--point", "1,2,3,4"]);
    assert!(s.contains("growth (2,3,4)"), "{s}");
}

#[test]
fn verify_all_exits_zero() {
    let o = sardkit(&["verify", "--all"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn single_criterion_runs() {
    let s = ok(&["verify", "--criterion", "1", "--criterion", "9"]);
    assert!(s.contains("criterion  1 PASS"));
    assert!(s.contains("criterion  9 PASS"));
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: &[&[&str]] = &[
        &["flow", "--model", "d224", "--start", "0,0,0.3,-0.2", "--t", "2", "--monitor", "rho,zw"],
        &["surface", "--model", "d224", "--grid", "0.05:0.1:3"],
        &["endpoint", "--model", "d2334a", "--random-segments", "8", "--seed", "7"],
        &["endpoint", "--model", "d2334b", "--sard", "5"],
        &["char", "--model", "d2334b"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let a = dir.path().join(format!("{i}a"));
        let b = dir.path().join(format!("{i}b"));
        for p in [&a, &b] {
            let mut v = args.to_vec();
            v.extend(["--out", p.to_str().unwrap()]);
            ok(&v);
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{args:?}");
    }
}

#[test]
fn seeds_are_recorded_and_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&["endpoint", "--model", "d224", "--random-segments", "8", "--seed", "1", "--out", a.to_str().unwrap()]);
    ok(&["endpoint", "--model", "d224", "--random-segments", "8", "--seed", "2", "--out", b.to_str().unwrap()]);
    let ta = std::fs::read_to_string(&a).unwrap();
    assert!(ta.contains("\"seed\": 1"));
    assert_ne!(ta, std::fs::read_to_string(&b).unwrap());
}

#[test]
fn bad_input_exits_2() {
    for args in [
        &["analyze", "--model", "nope"][..],
        &["analyze", "--model", "d224", "--point", "0,0,1"],
        &["flow", "--model", "d224", "--variant", "other"],
        &["flow", "--model", "d224", "--t", "0"],
        &["surface", "--model", "d224", "--grid", "0:1:3"],
        &["endpoint", "--model", "d224"],
        &["endpoint", "--model", "engel_std", "--char-duration", "0"],
        &["verify", "--criterion", "11"],
        &["flow", "--model", "d224", "--rtol", "-1"],
    ] {
        let o = sardkit(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
