use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn rydphon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rydphon")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn read(dir: &Path, file: &str) -> String {
    std::fs::read_to_string(dir.join(file)).unwrap_or_else(|e| panic!("{}: {e}", dir.join(file).display()))
}

fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

const SMALL: &str = r#"
seed = 7
[model]
kind = "full"
n_sites = 5
coupling = 3.0
[phonons]
site_cutoff = 1
[initial]
r0 = 2
[initial.vibrational]
kind = "thermal"
temperature = 16.0
samples = 6
[time]
t_max = 1.0
steps = 10
[fit]
windows = [[0.2, 1.0]]
"#;

#[test]
fn same_seed_gives_identical_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = rydphon(&["--config", &cfg, "--out", dir.to_str().unwrap(), "evolve"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["density.csv", "variance.csv", "beta.csv", "asymmetry.csv", "config.toml"] {
        assert_eq!(read(&a, f), read(&b, f), "{f} differs");
    }
    let other = tmp.path().join("c");
    rydphon(&["--config", &cfg, "--seed", "8", "--out", other.to_str().unwrap(), "evolve"]);
    assert_ne!(read(&a, "density.csv"), read(&other, "density.csv"));
}

#[test]
fn csv_columns_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("run");
    assert_eq!(code(&rydphon(&["--config", &cfg, "--out", out.to_str().unwrap(), "evolve"])), 0);
    let header = |f: &str| read(&out, f).lines().next().unwrap().to_string();
    assert_eq!(header("density.csv"), "t,site,value");
    assert_eq!(header("variance.csv"), "t,sigma,delta_sigma,norm,energy");
    assert_eq!(header("beta.csv"), "window_lo,window_hi,beta,r_squared");
    assert_eq!(header("asymmetry.csv"), "t,j,delta_n");
    let var = rows(&read(&out, "variance.csv"));
    assert_eq!(var.len(), 11);
    assert_eq!(var[0][2], 0.0);
    assert!(var.iter().all(|r| (r[3] - 1.0).abs() < 1e-10));
    let manifest: serde_json::Value = serde_json::from_str(&read(&out, "manifest.json")).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["dimension"], 20 * 32);
}

#[test]
fn mirror_identity_across_phase_sweep() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!(
            "[model]\nkind = \"full\"\nn_sites = 5\ncoupling = 4.0\n[phonons]\nsite_cutoff = 2\n[initial]\nr0 = 2\n\
             [initial.vibrational]\nkind = \"phase\"\nphi = 0.0\n[time]\nt_max = 2.0\nsteps = 8\n[fit]\nwindows = []\n\
             [sweep]\nphi = [0.0, {PI:?}]\n"
        ),
    );
    let out = tmp.path().join("sweep");
    let o = rydphon(&["--config", &cfg, "--out", out.to_str().unwrap(), "sweep"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let a = rows(&read(&out.join("phi=0"), "asymmetry.csv"));
    let b = rows(&read(&out.join(format!("phi={PI}")), "asymmetry.csv"));
    assert_eq!(a.len(), b.len());
    let mut nonzero = false;
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((x[0], x[1]), (y[0], y[1]));
        assert!((x[2] + y[2]).abs() < 1e-8);
        nonzero |= x[2].abs() > 1e-6;
    }
    assert!(nonzero, "phase should produce an asymmetry");
}

#[test]
fn inspection_commands() {
    let basis = String::from_utf8(rydphon(&["basis", "--n", "7"]).stdout).unwrap();
    assert_eq!(basis.lines().count(), 1 + 42);
    assert!(basis.lines().any(|l| l == "2,2,o,3,↑↑↑↓↓↓↓"));
    let coeffs = String::from_utf8(rydphon(&["coeffs", "--n", "5"]).stdout).unwrap();
    assert_eq!(coeffs.lines().count(), 1 + 4 * 4 * 5);
    assert!(rows(&coeffs).iter().all(|r| r[5] < 1e-10));
    let o = rydphon(&["hamiltonian", "--model", "constrained", "--dump"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("dimension 420"));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().next(), Some("row,col,re,im"));
    let o = rydphon(&["sw", "--q", "2", "--nph", "1"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("residual"));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write_config(tmp.path(), "[model]\nwidth = 3\n");
    let o = rydphon(&["--config", &bad, "evolve", "--dry-run"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("width"));

    let big = write_config(tmp.path(), "[model]\nkind = \"full\"\nsector = \"all\"\n[phonons]\nsite_cutoff = 2\n");
    assert_eq!(code(&rydphon(&["--config", &big, "hamiltonian"])), 2);

    let (n, q, k, kp, pm) = (5usize, 1usize, 1usize, 4usize, 2usize);
    let j = |x: usize| 4.0 * (PI * x as f64 / n as f64).cos();
    let omega = 2.0 * j(q) * (PI * k as f64 / n as f64).cos() - 2.0 * j(q + pm) * (PI * kp as f64 / n as f64).cos();
    let res = write_config(tmp.path(), &format!("[model]\nn_sites = 5\ntrap_freq = {omega:?}\ncoupling = 0.1\n"));
    assert_eq!(code(&rydphon(&["--config", &res, "sw", "--q", "1", "--nph", "0"])), 3);

    assert_eq!(code(&rydphon(&["experiment", "fig9"])), 1);
    assert_eq!(code(&rydphon(&["evolve"])), 1, "evolve needs --out");
}

#[test]
fn verify_fast_passes() {
    let o = rydphon(&["verify"]);
    let text = String::from_utf8(o.stdout.clone()).unwrap();
    assert_eq!(code(&o), 0, "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 5);
}

#[test]
fn empty_config_echoes_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = write_config(tmp.path(), "");
    let a = rydphon(&["--config", &empty, "evolve", "--dry-run"]).stdout;
    let b = rydphon(&["evolve", "--dry-run"]).stdout;
    assert_eq!(a, b);
    assert!(String::from_utf8(a).unwrap().starts_with("schema = 1\n"));
}
