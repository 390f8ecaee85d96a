//! Run orchestration: one configuration in, CSVs and a manifest out.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use rydphon_core::dynamics::{prepare_initial, propagate_prepared, variance, TrajectoryRecord};
use rydphon_core::momentum::{hq_position_on, BlockBasis, CouplingTensor};
use rydphon_core::position::SpinPhononModel;
use rydphon_core::propagate::{evolve, Method};
use rydphon_core::sw::sw_effective;
use rydphon_core::{HermitianOperator, C64};

use crate::config::{ExperimentConfig, ModelChoice};
use crate::output::{self, num, row};
use crate::presets::Preset;
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema: u32,
    pub label: String,
    pub preset: Option<String>,
    pub config_sha256: String,
    pub seed: u64,
    pub paper_values: BTreeMap<String, String>,
    pub overrides: BTreeMap<String, String>,
    pub dimension: usize,
    pub method: String,
    pub leakage: f64,
    pub files: Vec<String>,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub label: String,
    pub dir: PathBuf,
    pub record: TrajectoryRecord,
    pub manifest: Manifest,
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(cfg.to_toml().as_bytes()))
}

/// Runs every sweep point of `cfg`, each into its own subdirectory of `out`
/// (or into `out` itself when there is nothing to sweep).
pub fn run_sweep(cfg: &ExperimentConfig, out: &Path, preset: Option<&Preset>) -> Result<Vec<RunOutput>, CliError> {
    cfg.validate()?;
    let runs = cfg.expand();
    runs.par_iter()
        .map(|(label, c)| {
            let dir = if label.is_empty() { out.to_path_buf() } else { out.join(label) };
            run_experiment(c, label, &dir, preset)
        })
        .collect()
}

pub fn run_experiment(cfg: &ExperimentConfig, label: &str, dir: &Path, preset: Option<&Preset>) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    let start = Instant::now();
    std::fs::create_dir_all(dir)?;
    let (record, dimension, leakage, mut files) = match cfg.model.kind {
        ModelChoice::Full | ModelChoice::Constrained => position_run(cfg, dir)?,
        ModelChoice::Momentum | ModelChoice::Effective => block_run(cfg, dir)?,
    };
    std::fs::write(dir.join("config.toml"), cfg.to_toml())?;
    files.push("config.toml".into());
    let owned = |m: &BTreeMap<&'static str, String>| m.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    let manifest = Manifest {
        tool: "rydphon",
        version: env!("CARGO_PKG_VERSION"),
        schema: cfg.schema,
        label: label.to_string(),
        preset: preset.map(|p| p.name.to_string()),
        config_sha256: config_hash(cfg),
        seed: cfg.seed,
        paper_values: preset.map(|p| owned(&p.paper_values)).unwrap_or_default(),
        overrides: preset.map(|p| owned(&p.overrides)).unwrap_or_default(),
        dimension,
        method: record.method.map_or("none", method_name).to_string(),
        leakage,
        files,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
    Ok(RunOutput { label: label.to_string(), dir: dir.to_path_buf(), record, manifest })
}

type RunParts = (TrajectoryRecord, usize, f64, Vec<String>);

fn position_run(cfg: &ExperimentConfig, dir: &Path) -> Result<RunParts, CliError> {
    let (kind, sector) = cfg.kind_and_sector().expect("position model");
    let model = SpinPhononModel::new(cfg.params(), kind, sector, cfg.scheme())?;
    let prep = prepare_initial(&model, cfg.initial.r0, cfg.center(), &cfg.vibrational())?;
    let rec = propagate_prepared(&model, &prep, &cfg.times(), &cfg.propagator())?;
    let d = Some(dir);
    let mut files = vec!["density.csv".to_string(), "variance.csv".into(), "beta.csv".into()];
    output::density(&mut output::writer(d, "density.csv")?, &rec)?;
    output::variance(&mut output::writer(d, "variance.csv")?, &rec)?;
    output::beta(&mut output::writer(d, "beta.csv")?, &rec, &cfg.fit.windows)?;
    if cfg.initial.r0.is_multiple_of(2) {
        output::asymmetry(&mut output::writer(d, "asymmetry.csv")?, &rec)?;
        files.push("asymmetry.csv".into());
    }
    if let Some(w) = &rec.sector_weight {
        output::sector_weight(&mut output::writer(d, "sector_weight.csv")?, &rec, w)?;
        files.push("sector_weight.csv".into());
    }
    Ok((rec, model.dim(), prep.leakage, files))
}

/// Momentum blocks: populations of the relative coordinate (or quasiparticle
/// index) with the variance of that distribution.
fn block_run(cfg: &ExperimentConfig, dir: &Path) -> Result<RunParts, CliError> {
    let p = cfg.params().validate()?;
    let n = p.n_sites;
    let q = cfg.model.q;
    let (h, start, n_configs) = if cfg.model.kind == ModelChoice::Momentum {
        let basis = BlockBasis::new(&p, q, cfg.phonons.total_cutoff)?;
        let start = basis.index(cfg.initial.r0, 0);
        let len = basis.phonons.len();
        (hq_position_on(&p, &basis), start, len)
    } else {
        let eff = sw_effective(&p, q, cfg.model.n_phonons, &CouplingTensor::closed(n)?)?;
        let mut config = vec![0u8; n];
        config[0] = cfg.model.n_phonons as u8;
        let c = eff.configs.iter().position(|x| *x == config).expect("all phonons in one mode is a valid configuration");
        let start = eff.index(cfg.initial.k.unwrap_or(n - 1), c);
        let len = eff.configs.len();
        (eff.h, start, len)
    };
    let mut psi0 = vec![C64::new(0.0, 0.0); h.dim()];
    psi0[start] = C64::new(1.0, 0.0);
    let coords: Vec<f64> = (1..n).map(|i| i as f64).collect();
    let mut rec = TrajectoryRecord::default();
    let mut sigma0 = None;
    let method = evolve(&h, &psi0, &cfg.times(), &cfg.propagator(), |_, t, psi| {
        let pops: Vec<f64> =
            psi.chunks(n_configs).map(|block| block.iter().map(|a| a.norm_sqr()).sum()).collect();
        let s = variance(&pops, &coords)?;
        let s0 = *sigma0.get_or_insert(s);
        rec.times.push(t);
        rec.sigma.push(s);
        rec.delta_sigma.push(s - s0);
        rec.norm.push(pops.iter().sum::<f64>().sqrt());
        rec.energy.push(h.expectation(psi));
        rec.density.push(pops);
        Ok(())
    })?;
    rec.method = Some(method);
    let mut w = output::writer(Some(dir), "populations.csv")?;
    row(&mut w, ["t", "index", "value"].map(String::from))?;
    for (t, pops) in rec.times.iter().zip(&rec.density) {
        for (i, v) in pops.iter().enumerate() {
            row(&mut w, [num(*t), (i + 1).to_string(), num(*v)])?;
        }
    }
    w.flush()?;
    output::variance(&mut output::writer(Some(dir), "variance.csv")?, &rec)?;
    Ok((rec, h.dim(), 0.0, vec!["populations.csv".into(), "variance.csv".into()]))
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::Auto => "auto",
        Method::Dense => "dense",
        Method::Krylov => "krylov",
        Method::Chebyshev => "chebyshev",
    }
}
