use std::path::Path;
use std::process::{Command, Output};

use steercert_core::certify::{parse_csv, write_csv, SolverStatus};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steercert"))
        .args(args)
        .env_remove("STEERCERT_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("certificate JSON on stdout")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn construct_writes_files_and_prints_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["construct", "--d", "3", "--schmidt", "0.5,0.3,0.2", "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "beta=2.000000000000 beta_lhs=1.707106781187\n");
    for name in ["functional.json", "measurements.json", "assemblage.json"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["scenario"]["d"], 3);
        assert_eq!(v["elements"].as_object().unwrap().len(), 6);
    }
}

#[test]
fn construct_qubit_classical_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["construct", "--d", "2", "--schmidt", "maximal", "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let want = 1.0 + 0.5f64.sqrt();
    assert_eq!(stdout(&out), format!("beta=2.000000000000 beta_lhs={want:.12}\n"));
}

#[test]
fn rank_deficient_and_malformed_schmidt_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for schmidt in ["1,0", "0.5,0.4", "x,y"] {
        let out = run(&["construct", "--d", "2", "--schmidt", schmidt, "--out", p(dir.path())]);
        assert_eq!(out.status.code(), Some(2), "{schmidt}");
    }
    assert_eq!(run(&["verify", "--d", "2", "--schmidt", "1,0"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = run(&["construct", "--d", "2", "--out", p(&blocker.join("sub"))]);
    assert_eq!(out.status.code(), Some(3));
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["lhs-bound", "--functional", p(&missing)]).status.code(), Some(3));
}

#[test]
fn value_and_lhs_bound_read_constructed_files() {
    let dir = tempfile::tempdir().unwrap();
    run(&["construct", "--d", "3", "--schmidt", "0.5,0.3,0.2", "--out", p(dir.path())]);
    let f = dir.path().join("functional.json");
    let a = dir.path().join("assemblage.json");
    let out = run(&["value", "--functional", p(&f), "--assemblage", p(&a)]);
    assert_eq!(stdout(&out), "beta=2.000000000000\n");
    let out = run(&["lhs-bound", "--functional", p(&f)]);
    assert_eq!(stdout(&out), "beta_lhs=1.707106781187\n");
}

#[test]
fn certify_near_maximum_qubit() {
    let out = run(&["certify", "--d", "2", "--schmidt", "maximal", "--beta", "1.99999", "--xstar", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    // exact value 1/2 + √(ε(1 − ε)) at ε = 1e-5
    let eps: f64 = 2.0 - 1.99999;
    let reference = 0.5 + (eps * (1.0 - eps)).sqrt();
    let p_dual = v["p_guess_dual"].as_f64().unwrap();
    assert!(p_dual >= reference - 1e-9 && p_dual - reference < 1e-6, "{p_dual} vs {reference}");
    let h = v["h_min_bits"].as_f64().unwrap();
    assert!((h + reference.log2()).abs() < 1e-5 && (h - 1.0).abs() < 1e-2);
    assert_eq!(v["status"], "optimal");
}

#[test]
fn certify_above_classical_bound_is_positive() {
    let out = run(&["certify", "--d", "3", "--schmidt", "maximal", "--beta", "1.70711", "--xstar", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["h_min_bits"].as_f64().unwrap() > 0.0);
}

#[test]
fn certify_out_of_range_exits_2() {
    let out = run(&["certify", "--d", "2", "--beta", "2.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("BetaOutOfRange"));
}

#[test]
fn certify_at_least_mode_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    let out = run(&["certify", "--d", "3", "--beta", "1.8", "--constraint", "geq", "--out", p(&path)]);
    assert_eq!(out.status.code(), Some(0));
    let file: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(file, json(&out));
    let eq = json(&run(&["certify", "--d", "3", "--beta", "1.8"]));
    let a = file["p_guess_dual"].as_f64().unwrap();
    let b = eq["p_guess_dual"].as_f64().unwrap();
    // relaxing equality to ≥ can only help Eve
    assert!(a >= b - 1e-6);
}

#[test]
fn sweep_d4_is_monotone_and_reaches_two_bits() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let svg = dir.path().join("s.svg");
    let out = run(&[
        "sweep", "--d", "4", "--schmidt", "maximal", "--beta-min", "1.5", "--beta-max", "1.999999", "--steps", "20",
        "--xstar", "1", "--threads", "2", "--out", p(&csv), "--svg", p(&svg),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows = parse_csv(&text).unwrap();
    assert_eq!(rows.len(), 20);
    assert_eq!(write_csv(&rows), text);
    for w in rows.windows(2) {
        assert!(w[1].h_min_bits >= w[0].h_min_bits - 1e-6);
    }
    let last = rows.last().unwrap();
    assert!(matches!(last.status, SolverStatus::Optimal | SolverStatus::NearOptimal));
    // 2 − log₂ of the √ε-shifted value at ε = 1e-6 is about 5e-3
    assert!((last.h_min_bits - 2.0).abs() < 1e-2, "{}", last.h_min_bits);
    let svg_text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(svg_text.matches("<polyline").count(), 1);
}

#[test]
fn sweep_single_step_and_thread_env() {
    let out = Command::new(env!("CARGO_BIN_EXE_steercert"))
        .args(["sweep", "--d", "3", "--steps", "1"])
        .env("STEERCERT_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let rows = parse_csv(&stdout(&out)).unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].beta_obs - (1.0 + (1.0f64 / 3.0).sqrt())).abs() < 1e-9);
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let args = ["sweep", "--d", "3", "--steps", "5"];
    let one = run(&[&args[..], &["--threads", "1"]].concat());
    let three = run(&[&args[..], &["--threads", "3"]].concat());
    let strip = |o: &Output| {
        parse_csv(&stdout(o))
            .unwrap()
            .into_iter()
            .map(|r| (r.beta_obs, r.p_guess_dual, r.iterations))
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&one), strip(&three));
}

#[test]
fn sweep_rejects_bad_grids() {
    assert_eq!(run(&["sweep", "--d", "2", "--steps", "0"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--d", "2", "--beta-min", "1.9", "--beta-max", "1.8"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--d", "2", "--beta-max", "2.4"]).status.code(), Some(2));
}

#[test]
fn verify_battery_structure_and_offset_dependence() {
    // At the default offset 1e-6 the guessing probability sits √ε ≈ 1e-3
    // above its value at the maximum, outside the default 5e-4 tolerance.
    let out = run(&["verify", "--d", "2"]);
    assert_eq!(out.status.code(), Some(5));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    for prefix in ["PASS maximal value", "PASS classical bound", "PASS unique decomposition"] {
        assert!(lines.iter().any(|l| l.starts_with(prefix)), "{prefix}\n{text}");
    }
    assert_eq!(lines.iter().filter(|l| l.starts_with("FAIL guessing program vs analytic")).count(), 2);

    let out = run(&["verify", "--d", "3", "--schmidt", "0.5,0.3,0.2", "--eps", "1e-7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).lines().all(|l| l.starts_with("PASS")));
}
