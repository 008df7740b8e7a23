use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_rbc-dekf");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("RBC_DEKF_LOG")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Column `name` of a CSV file, as raw strings.
fn column(path: &Path, name: &str) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(idx).unwrap().to_owned()).collect()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn compare_on_bundled_scenario_favours_the_dual_filter() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cmp");
    let o = run(&["compare", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&out);
    let (ekf, rbc) = (r["soc_rmse_ekf"].as_f64().unwrap(), r["soc_rmse_rbc"].as_f64().unwrap());
    assert!(rbc < ekf, "rbc {rbc} ekf {ekf}");
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("SOC RMSE [%]"));
    for f in ["trace.csv", "report.txt", "report.json", "manifest.json"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let header = fs::read_to_string(out.join("trace.csv")).unwrap();
    let header = header.lines().next().unwrap();
    assert!(header.starts_with("time_s,current_a,temp_c,v_meas,soc_true,ekf_soc,"));
    assert!(header.contains(",rbc_theta_hat,"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    for dir in [&a, &b] {
        let o = run(&["compare", "--input", "synthetic:duration=1800", "--seed", "11", "--out", p(dir)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for f in ["trace.csv", "report.json", "report.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let o = run(&["compare", "--input", "synthetic:duration=1800", "--seed", "12", "--out", p(&c)]);
    assert_eq!(code(&o), 0);
    assert_ne!(fs::read(a.join("trace.csv")).unwrap(), fs::read(c.join("trace.csv")).unwrap());
}

fn bundled_cell_text() -> String {
    fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures/synthetic_lfp_cell.toml")).unwrap()
}

#[test]
fn validate_names_the_offending_key() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, bundled_cell_text().replacen("c_min = 0.03", "c_min = 1.5", 1)).unwrap();
    let o = run(&["validate", "--cell", p(&bad)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("positive.c_min"), "{}", stderr(&o));

    let typo = tmp.path().join("typo.toml");
    fs::write(&typo, bundled_cell_text().replacen("r0_ohm", "r0_milliohm", 1)).unwrap();
    let o = run(&["validate", "--cell", p(&typo)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("r0_milliohm"), "{}", stderr(&o));

    let good = tmp.path().join("good.toml");
    fs::write(&good, bundled_cell_text()).unwrap();
    let o = run(&["validate", "--cell", p(&good), "--input", "synthetic:kind=pulse"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn validate_reports_bad_cycle_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("cycle.csv");
    fs::write(&csv, "time_s,current_a,voltage_v,temp_c\n0,1,3.3,25\n1,1,3.3,25\n1,1,3.3,25\n").unwrap();
    let o = run(&["validate", "--input", p(&csv)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("row 4"), "{}", stderr(&o));
}

fn simulate_dataset(dir: &Path, spec: &str) -> PathBuf {
    let o = run(&["simulate", "--input", spec, "--out", p(dir)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    dir.join("dataset.csv")
}

#[test]
fn inert_bias_dual_filter_matches_the_ekf() {
    let tmp = tempfile::tempdir().unwrap();
    let data = simulate_dataset(&tmp.path().join("sim"), "synthetic:bias_mv=0,duration=1800,soc0=0.4");
    let cfg = tmp.path().join("inert.toml");
    fs::write(&cfg, "[bias]\nprocess_noise = 0.0\ninitial = 0.0\ninitial_variance = 0.0\n").unwrap();
    let mut socs = Vec::new();
    for filter in ["ekf", "rbc-dekf"] {
        let out = tmp.path().join(filter);
        let o = run(&[
            "estimate", "--input", p(&data), "--filter", filter, "--filter-config", p(&cfg),
            "--initial-soc", "0.45", "--out", p(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        socs.push(column(&out.join("trace.csv"), "soc"));
    }
    assert_eq!(socs[0].len(), 1801);
    assert_eq!(socs[0], socs[1]);
}

#[test]
fn gen_simulate_compare_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let g = tmp.path().join("gen");
    let o = run(&["gen", "--input", "synthetic:kind=dst,duration=1200,scale=3", "--out", p(&g)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let profile = g.join("profile.csv");
    assert!(!fs::read_to_string(&profile).unwrap().contains("voltage_v"));

    let s = tmp.path().join("sim");
    let o = run(&["simulate", "--input", p(&profile), "--soc0", "0.6", "--out", p(&s)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(column(&s.join("dataset.csv"), "soc_ref")[0], "0.6");

    let c = tmp.path().join("cmp");
    let o = run(&["compare", "--input", p(&s.join("dataset.csv")), "--out", p(&c), "--sequential"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(report(&c)["samples"].as_u64(), Some(1201));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["compare", "--bogus"])), 1);
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    assert_eq!(code(&run(&["compare", "--filter", "ekf", "--out", p(&out)])), 1);
    assert_eq!(code(&run(&["estimate", "--initial-soc", "1.5", "--out", p(&out)])), 1);
    assert_eq!(code(&run(&["gen", "--input", "cycle.csv", "--out", p(&out)])), 1);
    assert_eq!(code(&run(&["validate"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn unknown_synthetic_key_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["compare", "--input", "synthetic:kind=pulse,level=2", "--out", p(tmp.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("level"));
}

#[test]
fn inputs_are_never_overwritten() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("sim");
    let data = simulate_dataset(&dir, "synthetic:duration=600,soc0=0.5");
    let before = fs::read(&data).unwrap();
    let o = run(&["simulate", "--input", p(&data), "--soc0", "0.5", "--out", p(&dir)]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert_eq!(fs::read(&data).unwrap(), before);
}

#[test]
fn numerical_failure_exits_3() {
    // a subnormal reaction rate overflows the overpotential
    let tmp = tempfile::tempdir().unwrap();
    let cell = tmp.path().join("cell.toml");
    fs::write(&cell, bundled_cell_text().replacen("d_per_s = 5e-4", "d_per_s = 1e-320", 1)).unwrap();
    let data = simulate_dataset(&tmp.path().join("sim"), "synthetic:duration=300,soc0=0.5");
    let o = run(&["estimate", "--cell", p(&cell), "--input", p(&data), "--out", p(&tmp.path().join("est"))]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn log_verbosity_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(BIN)
        .args(["estimate", "--input", "synthetic:duration=60", "--out", p(tmp.path())])
        .env("RBC_DEKF_LOG", "debug")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("building discrete model"), "{}", stderr(&o));
}
