use assert_cmd::Command;
use serde_json::Value;

fn example(name: &str) -> String {
    format!("{}/../core/examples/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn hypoheat() -> Command {
    Command::cargo_bin("hypoheat").unwrap()
}

fn json(out: &[u8]) -> Value {
    serde_json::from_slice(out).unwrap()
}

#[test]
fn lift_reports_the_grushin_dimensions() {
    let out = hypoheat().args(["lift", &example("grushin.json")]).assert().success();
    let v = json(&out.get_output().stdout);
    let r = &v["report"];
    assert_eq!((r["N"].as_u64(), r["p"].as_u64(), r["step"].as_u64()), (Some(3), Some(1), Some(2)));
    assert_eq!((r["q"].as_str(), r["q_star"].as_str(), r["Q"].as_str()), (Some("3"), Some("1"), Some("4")));
    assert_eq!(r["all_passed"], Value::Bool(true));
    assert_eq!(v["group"]["z"][1], serde_json::json!(["0", "x1", "1"]));
}

#[test]
fn lift_of_the_engel_system_has_no_kernel() {
    let out = hypoheat().args(["lift", &example("engel.json")]).assert().success();
    let r = json(&out.get_output().stdout)["report"].clone();
    assert_eq!((r["N"].as_u64(), r["p"].as_u64(), r["step"].as_u64()), (Some(4), Some(1), Some(3)));
    assert_eq!(r["kernel_family"], "unavailable");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let rank = dir.path().join("rank.json");
    std::fs::write(&rank, r#"{"n": 2, "weights": ["1", "1"], "fields": [["1", "0"]]}"#).unwrap();
    hypoheat()
        .args(["lift", rank.to_str().unwrap()])
        .assert()
        .code(2)
        .stderr(predicates::str::contains("(H.2)"));

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"n\": 2,\n \"weights\": [\"1\" \"2\"]}").unwrap();
    hypoheat()
        .args(["lift", broken.to_str().unwrap()])
        .assert()
        .code(2)
        .stderr(predicates::str::contains("line 2 column"));

    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"saturation": {"rel_tol": 1e-6, "typo": 1}}"#).unwrap();
    hypoheat()
        .args(["--config", cfg.to_str().unwrap(), "lift", &example("grushin.json")])
        .assert()
        .code(2)
        .stderr(predicates::str::contains("typo"));

    hypoheat()
        .args(["--format", "csv", "lift", &example("grushin.json")])
        .assert()
        .code(2);
}

#[test]
fn non_convergence_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"saturation": {"rel_tol": 1e-15, "max_intervals": 2}}"#).unwrap();
    let g = example("grushin.json");
    hypoheat()
        .args(["--config", cfg.to_str().unwrap(), "gamma", "eval", &g, "--x", "0,0", "--s", "1", "--y", "0.3,-0.2"])
        .assert()
        .code(3);
}

#[test]
fn failed_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"selftest": {"normalization_abs": 1e-15, "samples": 2}}"#).unwrap();
    let out = hypoheat()
        .args(["--config", cfg.to_str().unwrap(), "kernel", "selftest", &example("grushin.json")])
        .assert()
        .code(1);
    assert_eq!(json(&out.get_output().stdout)["all_passed"], Value::Bool(false));
}

#[test]
fn verify_skips_numeric_checks_without_a_kernel() {
    let out = hypoheat().args(["verify", &example("engel.json")]).assert().success();
    let v = json(&out.get_output().stdout);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 12);
    assert_eq!(checks[1]["status"], "pass");
    for c in &checks[2..] {
        assert_eq!(c["status"], "skipped");
        assert!(c["detail"].as_str().unwrap().starts_with("skipped: no kernel"));
    }
}

#[test]
fn verify_runs_selected_checks() {
    let out = hypoheat()
        .args(["verify", &example("grushin.json"), "--quick", "--only", "1,2,4,6,11,12", "--format", "csv"])
        .assert()
        .success();
    let text = String::from_utf8(out.get_output().stdout.clone()).unwrap();
    assert!(text.starts_with("id,check,status,metric,value,limit\n"));
    assert!(!text.contains(",fail,"));
    assert_eq!(text.lines().filter(|l| l.starts_with("11,")).count(), 2);
}

#[test]
fn gamma_grid_has_one_row_per_node() {
    let out = hypoheat()
        .args(["gamma", "grid", &example("grushin.json"), "--x", "0,0", "--s", "1"])
        .args(["--lo", "-3,-3", "--hi", "3,3", "--points", "41", "--format", "csv"])
        .assert()
        .success();
    let text = String::from_utf8(out.get_output().stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,y1,y2,gamma"));
    assert_eq!(lines.count(), 1681);
}

#[test]
fn constant_datum_gives_constant_solution() {
    let out = hypoheat()
        .args(["cauchy", &example("grushin.json"), "--datum", "one", "--t", "0.5"])
        .args(["--x", "0,0", "--x", "0.5,-1", "--format", "csv"])
        .assert()
        .success();
    let text = String::from_utf8(out.get_output().stdout.clone()).unwrap();
    for line in text.lines().skip(1) {
        let u: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((u - 1.0).abs() < 1e-4, "{line}");
    }
}

#[test]
fn derivative_and_kernel_values() {
    let g = example("grushin.json");
    let out = hypoheat()
        .args(["gamma", "eval", &g, "--x", "0.2,-0.1", "--s", "1", "--y", "0.6,0.4", "--derivative", "alpha=1"])
        .assert()
        .success();
    let d = json(&out.get_output().stdout);
    assert_eq!(d["derivative"]["alpha"], 1);
    assert!(d["value"].as_f64().unwrap().is_finite());
    let out = hypoheat()
        .args(["kernel", "eval", &g, "--t", "1", "--g", "0,0,0"])
        .assert()
        .success();
    assert!(json(&out.get_output().stdout)["gamma"].as_f64().unwrap() > 0.0);
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let g = example("grushin.json");
    let run = |threads: &str| {
        hypoheat()
            .env("HH_THREADS", threads)
            .args(["--seed", "5", "oracle", "mc", &g, "--start", "0,0", "--paths", "20000"])
            .args(["--lo=-2,-2", "--hi", "2,2", "--bins", "4"])
            .assert()
            .success()
            .get_output()
            .stdout
            .clone()
    };
    let a = run("1");
    assert_eq!(a, run("1"));
    assert_eq!(a, run("3"));
    let v = json(&a);
    assert_eq!(v["config"]["seed"], 5);
    assert_eq!(v["bins"].as_array().unwrap().len(), 16);
}

#[test]
fn finite_difference_oracle() {
    let out = hypoheat()
        .args(["oracle", "fd", "--datum", "one", "--t", "0.2", "--probe", "0,0", "--probe", "1,-1", "--cells", "20,24"])
        .assert()
        .success();
    let v = json(&out.get_output().stdout);
    for row in v["table"]["rows"].as_array().unwrap() {
        let u: f64 = row[3].as_str().unwrap().parse().unwrap();
        assert!((u - 1.0).abs() < 1e-12);
    }
    hypoheat()
        .args(["oracle", "fd", "--datum", "gauss", "--t", "0.2", "--probe", "0,0", "--dt", "1"])
        .assert()
        .code(2)
        .stderr(predicates::str::contains("CFL"));
}
