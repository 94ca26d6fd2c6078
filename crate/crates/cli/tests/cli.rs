use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_floatwave"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("floatwave-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn invoke(dir: &Path, cfg: &str, args: &[&str]) -> Output {
    let path = dir.join("scenario.in");
    fs::write(&path, cfg).unwrap();
    bin()
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

#[test]
fn run_writes_csv_with_the_documented_columns() {
    let dir = scratch("run");
    let out = invoke(&dir, "kind = decay_linear\nmu = 0.3\n", &["run", "--n", "60"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let diag = fs::read_to_string(dir.join("out/diagnostics.csv")).unwrap();
    assert_eq!(diag.lines().next().unwrap(), "t,delta,delta_dot,qi_avg,zu_plus,zu_minus,volume");
    let fields = fs::read_to_string(dir.join("out/fields.csv")).unwrap();
    assert_eq!(fields.lines().next().unwrap(), "x,zeta,q");
    // both half-lines, N + 1 nodes each
    assert_eq!(fields.lines().count(), 1 + 2 * 61);
}

#[test]
fn converge_writes_report_and_plot_script() {
    let dir = scratch("converge");
    let cfg = "kind = decay_linear\nn_list = 60,120,240\n";
    let out = invoke(&dir, cfg, &["converge", "--scheme", "mc"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.join("out/report.csv")).unwrap();
    let mut lines = report.lines();
    assert_eq!(lines.next().unwrap(), "N,dx,err_delta,order_delta,runtime_s");
    assert_eq!(lines.count(), 3);
    assert!(dir.join("out/plot.py").exists());
    let resolved = fs::read_to_string(dir.join("out/scenario.cfg")).unwrap();
    assert!(resolved.contains("scheme = mc"));
}

#[test]
fn scheme_flag_overrides_the_config() {
    let dir = scratch("scheme");
    let out = invoke(&dir, "kind = decay_linear\nscheme = mc\n", &["run", "--scheme", "lf", "--n", "40"]);
    assert!(out.status.success());
    let resolved = fs::read_to_string(dir.join("out/scenario.cfg")).unwrap();
    assert!(resolved.contains("scheme = lf"));
}

#[test]
fn bad_spec_exits_with_2() {
    let dir = scratch("spec");
    assert_eq!(invoke(&dir, "kind = sloshing\n", &["run"]).status.code(), Some(2));
    // grounded object at t = 0 is a spec problem, not a solver abort
    let grounded = "kind = decay_nonlinear\ndelta0 = -5\nn_list = 119\n";
    assert_eq!(invoke(&dir, grounded, &["run"]).status.code(), Some(2));
    let unnested = "kind = decay_nonlinear\nn_list = 119,160,199\n";
    assert_eq!(invoke(&dir, unnested, &["converge"]).status.code(), Some(2));
}

#[test]
fn solver_abort_exits_with_3_and_leaves_a_snapshot() {
    let dir = scratch("abort");
    let cfg = "kind = decay_nonlinear\nmu = 0.1\ntrace_stepping = explicit\nn_list = 119\n";
    let out = invoke(&dir, cfg, &["run"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("aborted at step"), "{err}");
    assert!(dir.join("out/abort_decay_nonlinear_N119.csv").exists());
}

#[test]
fn disagreeing_oracle_exits_with_4() {
    let dir = scratch("oracle");
    let cfg = "kind = decay_linear\nn_list = 30,60,120\nt_final = 500\n";
    let out = invoke(&dir, cfg, &["converge"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn seed_check_prints_the_property_suite() {
    let out = bin().arg("--seed-check").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 13);
    assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
}
