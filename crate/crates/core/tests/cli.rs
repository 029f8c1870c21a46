use std::path::Path;
use std::process::{Command, Output};

fn rrhsim(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rrhsim"));
    cmd.args(args).env_remove("RRHSIM_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn rrhsim")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("exp.toml");
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

const SMALL_SWEEP: &str =
    "scenario = \"random_random\"\nN = [12, 40]\nK = [4, 16]\nq = [1, 2]\ntrials = 6\nseed = 3\n";

#[test]
fn bound_prints_m_max() {
    let o = rrhsim(&["bound", "--area-ratio", "10"], &[]);
    assert!(o.status.success());
    let first = stdout(&o).lines().next().unwrap().to_string();
    let v: f64 = first.strip_prefix("m_max = ").unwrap().parse().unwrap();
    assert!((v - 31.41593).abs() < 1e-5);
}

#[test]
fn code_prints_ell_and_efficiency() {
    let o = rrhsim(&["code", "--L", "5", "--K", "10"], &[]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "L=5 K=10 ell=2 eta=0.714286");
}

#[test]
fn decode_reports_single_user() {
    let o = rrhsim(
        &["decode", "--L", "3", "--K", "10", "--proximate", "4"],
        &[],
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("Single { user: 4"));
}

#[test]
fn bad_input_exits_nonzero() {
    assert!(!rrhsim(&["bound", "--area-ratio", "10", "--bogus"], &[])
        .status
        .success());
    assert!(!rrhsim(&["bound", "--area-ratio", "-1"], &[])
        .status
        .success());
    assert!(
        !rrhsim(&["decode", "--L", "3", "--K", "10", "--eps", "01x11"], &[])
            .status
            .success()
    );
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "scenario = \"random_random\"\nN = [5]\nK = []\n",
    );
    let o = rrhsim(&["sweep", "--config", &cfg], &[]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("`K`"));
    assert!(!rrhsim(&["sweep", "--config", "/nonexistent/x.toml"], &[])
        .status
        .success());
}

#[test]
fn sweep_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_SWEEP);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(rrhsim(
        &["sweep", "--config", &cfg, "--out", a.to_str().unwrap()],
        &[]
    )
    .status
    .success());
    let o = rrhsim(
        &["sweep", "--config", &cfg, "--out", b.to_str().unwrap()],
        &[("RAYON_NUM_THREADS", "3")],
    );
    assert!(o.status.success());
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    // 2 N × 2 q × (2 K × 2 metrics + 1 optimum) rows plus the header
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 5);
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_SWEEP);
    let base = stdout(&rrhsim(&["sweep", "--config", &cfg], &[]));
    let from_env = stdout(&rrhsim(
        &["sweep", "--config", &cfg],
        &[("RRHSIM_SEED", "77")],
    ));
    let from_flag = stdout(&rrhsim(&["sweep", "--config", &cfg, "--seed", "77"], &[]));
    let both = stdout(&rrhsim(
        &["sweep", "--config", &cfg, "--seed", "3"],
        &[("RRHSIM_SEED", "77")],
    ));
    assert_ne!(base, from_env);
    assert_eq!(from_env, from_flag);
    assert_eq!(both, base);
    assert!(
        !rrhsim(&["sweep", "--config", &cfg], &[("RRHSIM_SEED", "abc")])
            .status
            .success()
    );
}

#[test]
fn trials_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_SWEEP);
    let out = stdout(&rrhsim(&["sweep", "--config", &cfg, "--trials", "2"], &[]));
    assert!(out
        .lines()
        .skip(1)
        .all(|l| l.ends_with(",2") || l.ends_with(",0") || l.ends_with(",1")));
}
