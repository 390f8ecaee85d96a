//! Inspection commands: basis, operator and coefficient dumps.

use rydphon_core::basis::{domain_basis, domain_to_spins};
use rydphon_core::momentum::{f_coeff_closed, f_coeff_oracle, hq_position_on, BlockBasis, CouplingTensor};
use rydphon_core::position::SpinPhononModel;
use rydphon_core::sw::{sw_effective, SwDecomposition, RESONANCE_TOL};
use rydphon_core::{HermitianOperator, SparseHermitian};

use crate::config::{ExperimentConfig, ModelChoice};
use crate::output::{num, row, CsvWriter};
use crate::CliError;

pub fn basis(w: &mut CsvWriter, n: usize) -> Result<(), CliError> {
    row(w, ["c", "r", "parity", "exc_count", "spin_string"].map(String::from))?;
    for d in domain_basis(n)?.iter() {
        let spins = domain_to_spins(d, n);
        row(w, [d.cm.to_string(), d.rel.to_string(), d.parity.label().into(), d.exc_count().to_string(), spins.to_string()])?;
    }
    Ok(w.flush()?)
}

pub fn coeffs(w: &mut CsvWriter, n: usize) -> Result<f64, CliError> {
    row(w, ["k", "kprime", "p", "f_closed", "f_oracle", "abs_diff"].map(String::from))?;
    let mut worst: f64 = 0.0;
    for k in 1..n {
        for kp in 1..n {
            for p in 1..=n {
                let (a, b) = (f_coeff_closed(k, kp, p, n)?, f_coeff_oracle(k, kp, p, n)?);
                worst = worst.max((a - b).abs());
                row(w, [k.to_string(), kp.to_string(), p.to_string(), num(a), num(b), num((a - b).abs())])?;
            }
        }
    }
    w.flush()?;
    Ok(worst)
}

/// Operator selected by the configuration (`kind` overrides the config's model).
pub fn operator(cfg: &ExperimentConfig, kind: ModelChoice) -> Result<SparseHermitian, CliError> {
    let mut cfg = cfg.clone();
    cfg.model.kind = kind;
    let p = cfg.params();
    Ok(match kind {
        ModelChoice::Full | ModelChoice::Constrained => {
            let (k, s) = cfg.kind_and_sector().expect("position model");
            SpinPhononModel::new(p, k, s, cfg.scheme())?.to_sparse()
        }
        ModelChoice::Momentum => hq_position_on(&p, &BlockBasis::new(&p, cfg.model.q, cfg.phonons.total_cutoff)?),
        ModelChoice::Effective => {
            let n = p.validate()?.n_sites;
            sw_effective(&p, cfg.model.q, cfg.model.n_phonons, &CouplingTensor::closed(n)?)?.h
        }
    })
}

pub fn summary(h: &SparseHermitian) -> String {
    let (lo, hi) = h.spectral_bounds();
    format!("dimension {}, nonzeros {}, spectrum within [{lo}, {hi}], hermiticity defect {}", h.dim(), h.nnz(), h.hermiticity_defect())
}

/// Effective block on `nph` phonons and the generator residual.
pub fn sw(cfg: &ExperimentConfig, q: usize, nph: u32) -> Result<(SparseHermitian, f64), CliError> {
    let p = cfg.params().validate()?;
    let coeffs = CouplingTensor::closed(p.n_sites)?;
    let eff = sw_effective(&p, q, nph, &coeffs)?;
    let residual = SwDecomposition::new(&p, q, &coeffs, nph as usize + 1, RESONANCE_TOL)?.residual();
    Ok((eff.h, residual))
}
