use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bll_cli::parse_config;

const SMALL: &str = "\
[grid]
nx = 32
nz = 16

[nsf]
eps_list = 0.2, 0.1, 0.05
t_end = 0.1

[ob]
dt = 2e-3
t_end = 0.1
";

fn bll(dir: &Path, command: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("scenario.ini");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_bll"))
        .arg(command)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn thermo_check_on_defaults_writes_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bll(tmp.path(), "thermo-check", "", &["--quiet"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let out = tmp.path().join("out");
    for f in ["thermo_report.txt", "hypotheses.csv", "identities.csv", "coefficients.csv", "manifest.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let hyp = fs::read_to_string(out.join("hypotheses.csv")).unwrap();
    assert!(hyp.lines().any(|l| l.starts_with("w14,false")));
}

#[test]
fn manifest_echoes_the_resolved_config() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bll(tmp.path(), "hydrostatic", SMALL, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = fs::read_to_string(tmp.path().join("out/manifest.txt")).unwrap();
    assert!(manifest.contains("hydrostatic.csv") && manifest.contains("hydrostatic.dat"));
    // The manifest is itself a valid scenario with every default spelled out.
    let echoed = parse_config(&manifest).unwrap();
    assert_eq!(echoed.echo(), parse_config(SMALL).unwrap().echo());
    assert!(manifest.contains("kappa0 = 0.01"));
}

#[test]
fn sweep_writes_a_monotone_table() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bll(tmp.path(), "sweep", SMALL, &["--threads", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("out/convergence.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').take(4).map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for p in rows.windows(2) {
        for c in 1..4 {
            assert!(p[1][c] < p[0][c], "{csv}");
        }
    }
    assert!(String::from_utf8_lossy(&o.stdout).contains("monotone decrease: yes"));
}

#[test]
fn symmetric_compare_warns_on_stderr() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bll(tmp.path(), "compare", SMALL, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("coincide"));
    let csv = fs::read_to_string(tmp.path().join("out/compare.csv")).unwrap();
    let ratio: f64 = csv.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((ratio - 1.0).abs() <= 0.05);
}

#[test]
fn identical_configs_give_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = SMALL.replace("eps_list = 0.2, 0.1, 0.05", "eps = 0.1");
    for d in [&a, &b] {
        let o = bll(d.path(), "run-nsf", &cfg, &["--quiet"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["conservation.csv", "relative_energy.csv", "nsf_profile.csv", "nsf_profile.dat", "snapshots/rho_0002.bllf"] {
        let x = fs::read(a.path().join("out").join(f)).unwrap();
        let y = fs::read(b.path().join("out").join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
}

#[test]
fn run_ob_writes_snapshots_and_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!("{SMALL}\n[output]\ncadence = 0.05\nformats = csv, bllf\n");
    let o = bll(tmp.path(), "run-ob", &cfg, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("out");
    let trace = fs::read_to_string(out.join("lambda_trace.csv")).unwrap();
    assert!(trace.starts_with("t,mean_T,Lambda,flux,s24_residual\n"));
    let mut f = fs::File::open(out.join("snapshots/T_0002.bllf")).unwrap();
    let snap = bll_core::grid::read_snapshot(&mut f).unwrap();
    assert_eq!((snap.nx, snap.nz), (32, 16));
    assert!(!out.join("ob_profile.dat").exists());
}

#[test]
fn exit_codes_follow_the_error_category() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bll(tmp.path(), "run-nsf", "[nsf]\n\neps = -0.1\n", &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = bll(tmp.path(), "run-nsf", "[grid]\nnx = 16\ncolour = red\n", &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("unknown key 'colour'"));

    // Wall temperature 1 - 3·0.5 < 0: positivity is lost before the first step.
    let o = bll(tmp.path(), "run-nsf", "[grid]\nnx = 16\nnz = 8\n[nsf]\neps = 3\n", &[]);
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));

    let o = bll(tmp.path(), "sweep", "[grid]\nnx = 16\nnz = 8\n[nsf]\nt_end = 0.1\n", &[]);
    assert_eq!(o.status.code(), Some(3));

    let missing = Command::new(env!("CARGO_BIN_EXE_bll"))
        .args(["run-ob", "--config"])
        .arg(tmp.path().join("nope.ini"))
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(4));

    let usage = Command::new(env!("CARGO_BIN_EXE_bll")).arg("run-ob").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn thread_count_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("scenario.ini");
    fs::write(&cfg, "[grid]\nnx = 16\nnz = 8\n[nsf]\neps_list = 0.2, 0.1\nt_end = 0.05\n[ob]\nt_end = 0.05\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_bll"))
        .args(["sweep", "--quiet", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .env("BLL_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let bad = Command::new(env!("CARGO_BIN_EXE_bll"))
        .args(["sweep", "--config"])
        .arg(&cfg)
        .env("BLL_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
