use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use enslab::cli::FieldDump;

const BIN: &str = env!("CARGO_BIN_EXE_enslab");

fn enslab(dir: &Path, args: &[&str], cfg: &str, env: &[(&str, &str)]) -> Output {
    let path = dir.join("case.cfg");
    fs::write(&path, cfg).unwrap();
    let mut cmd = Command::new(BIN);
    cmd.args(args).arg("--config").arg(&path).arg("--out").arg(dir.join("out"));
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn summary(dir: &Path) -> String {
    fs::read_to_string(dir.join("out/summary.txt")).unwrap()
}

const SMALL: &str = "system = jl\nnu = 0.1\ndt = 2e-3\nT = 0.02\ngrid = 16\n";

#[test]
fn reduction_run_passes_and_writes_artifacts() {
    let d = tempfile::tempdir().unwrap();
    let o = enslab(d.path(), &["run"], &format!("{SMALL}ic = reduction\n"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(d.path());
    assert!(s.contains("margin div_ceiling") && s.contains("status = pass"), "{s}");
    let csv = fs::read_to_string(d.path().join("out/diagnostics.csv")).unwrap();
    assert!(csv.starts_with("t,"));
    assert_eq!(csv.lines().count(), 1 + 11);
    let u = FieldDump::read(&d.path().join("out/u_u.ensf")).unwrap();
    assert_eq!((u.nx, u.ny), (17, 16));
    assert!((u.time - 0.02).abs() < 1e-12);
}

#[test]
fn huge_step_exits_with_cfl_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = "system = jl\nnu = 0.1\ndt = 5\nT = 10\ngrid = 16\nic = perturbed\n";
    let o = enslab(d.path(), &["run"], cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("CFL"));
    assert!(summary(d.path()).contains("exit_code = 2"));
}

#[test]
fn bad_config_exits_one_with_summary() {
    let d = tempfile::tempdir().unwrap();
    let o = enslab(d.path(), &["run"], "system = jl\nnu = 0.1\n", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(summary(d.path()).contains("missing required key"));
    let o = Command::new(BIN).args(["run", "--bogus"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failed_check_exits_three_with_artifacts() {
    // Crank–Nicolson with ν μ dt ≈ 1.6 misses the continuous decay rate.
    let d = tempfile::tempdir().unwrap();
    let cfg = "system = jl\nnu = 1\ndt = 0.02\nT = 0.2\ngrid = 16\nic = eigenmode_div\nmode = 2\n";
    let o = enslab(d.path(), &["heat", "--quiet"], cfg, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL decay.decay_rate"));
    assert!(summary(d.path()).contains("status = fail"));
    assert!(d.path().join("out/g.ensf").exists());
}

#[test]
fn seeded_runs_are_deterministic_across_thread_counts() {
    let cfg = format!("{SMALL}ic = random\namp = 0.5\n");
    let run = |seed: &str, threads: &str| {
        let d = tempfile::tempdir().unwrap();
        let o = enslab(d.path(), &["run", "--seed", seed], &cfg, &[("ENSLAB_THREADS", threads)]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        FieldDump::read(&d.path().join("out/u_v.ensf")).unwrap().values
    };
    let a = run("11", "1");
    assert_eq!(a, run("11", "3"));
    assert_ne!(a, run("12", "1"));
}

#[test]
fn invalid_thread_count_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    let o = enslab(d.path(), &["run"], &format!("{SMALL}ic = reduction\n"), &[("ENSLAB_THREADS", "zero")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn quiet_pass_prints_nothing() {
    let d = tempfile::tempdir().unwrap();
    let o = enslab(d.path(), &["decompose", "--quiet"], &format!("{SMALL}ic = perturbed\neps = 0.1\n"), &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    for f in ["v_u", "v_v", "z_u", "z_v", "q"] {
        assert!(d.path().join(format!("out/{f}.ensf")).exists(), "{f}");
    }
}

#[test]
fn convergence_writes_an_order_table() {
    let d = tempfile::tempdir().unwrap();
    let cfg = "system = jl\nnu = 0.1\ndt = 1e-3\nT = 0.05\ngrid = 16\nic = reduction\nforcing = manufactured\n";
    let o = enslab(d.path(), &["convergence"], cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", summary(d.path()));
    let s = summary(d.path());
    for key in ["error_n016", "error_n032", "error_n064", "order_1", "order_2"] {
        assert!(s.contains(key), "{key} missing from\n{s}");
    }
}

#[test]
fn galerkin_runs_from_a_cached_basis() {
    let d = tempfile::tempdir().unwrap();
    let cache = d.path().join("out");
    let base = "system = jl\nroute = galerkin\nnu = 0.1\ndt = 1e-3\nT = 0.01\ngrid = 8\nk = 4\nic = reduction\n";
    let o = enslab(d.path(), &["basis"], base, &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(cache.join("lambdas.txt").exists());
    let e = tempfile::tempdir().unwrap();
    let cfg = format!("{base}basis = {}\n", cache.display());
    let o = enslab(e.path(), &["run"], &cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(e.path());
    assert!(s.contains("margin energy_monotone") && s.contains("margin orthonormal"), "{s}");
}
