//! Initial states, trajectories and observables.

mod initial;
mod observables;

pub use initial::{
    default_center, initial_domain, prepare_initial, site_vector, InitialState, Prepared, VibrationalSpec, MAX_LEAKAGE,
};
pub use observables::{asymmetry, coordinates, fit_beta, variance, BetaFit, MIN_FIT_SAMPLES};

use crate::error::{Error, Result};
use crate::operator::HermitianOperator;
use crate::position::{SpinPhononModel, SpinSector};
use crate::propagate::{evolve, norm, Method, PropagatorConfig};
use crate::C64;

/// Observables recorded along one run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    /// `⟨n_j(t)⟩`, one row per time, sites in order `1..=N`.
    pub density: Vec<Vec<f64>>,
    pub sigma: Vec<f64>,
    pub delta_sigma: Vec<f64>,
    pub energy: Vec<f64>,
    pub norm: Vec<f64>,
    /// Weight in the single-domain sector (unconstrained spin space only).
    pub sector_weight: Option<Vec<f64>>,
    pub origin: f64,
    pub method: Option<Method>,
}

impl TrajectoryRecord {
    pub fn coordinates(&self) -> Vec<f64> {
        coordinates(self.density.first().map_or(0, Vec::len), self.origin)
    }

    /// `Δn_j` at every recorded time.
    pub fn asymmetry(&self) -> Result<Vec<Vec<f64>>> {
        let c = self.coordinates();
        self.density.iter().map(|d| asymmetry(d, &c)).collect()
    }

    pub fn fit_beta(&self, window: (f64, f64)) -> Result<BetaFit> {
        fit_beta(&self.times, &self.delta_sigma, window)
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.energy.first().copied().unwrap_or(0.0);
        self.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max)
    }

    fn push(&mut self, t: f64, density: Vec<f64>, energy: f64, norm: f64, weight: Option<f64>) -> Result<()> {
        let sigma = variance(&density, &coordinates(density.len(), self.origin))?;
        let s0 = self.sigma.first().copied().unwrap_or(sigma);
        self.times.push(t);
        self.density.push(density);
        self.sigma.push(sigma);
        self.delta_sigma.push(sigma - s0);
        self.energy.push(energy);
        self.norm.push(norm);
        if let Some(w) = weight {
            self.sector_weight.get_or_insert_with(Vec::new).push(w);
        }
        Ok(())
    }
}

fn single_domain_weight(model: &SpinPhononModel, psi: &[C64]) -> f64 {
    model
        .spin_probabilities(psi)
        .into_iter()
        .enumerate()
        .filter(|(s, _)| {
            let spin = model.spin(*s);
            spin.domain_walls() == 2
        })
        .map(|(_, w)| w)
        .sum()
}

/// Evolves a pure state under `model` and records every observable.
pub fn propagate(
    model: &SpinPhononModel,
    psi0: &[C64],
    times: &[f64],
    origin: f64,
    cfg: &PropagatorConfig,
) -> Result<TrajectoryRecord> {
    let mut rec = TrajectoryRecord { origin, ..Default::default() };
    let track_sector = model.sector() == SpinSector::All;
    let method = evolve(model, psi0, times, cfg, |_, t, psi| {
        let weight = track_sector.then(|| single_domain_weight(model, psi));
        rec.push(t, model.density(psi), model.expectation(psi), norm(psi), weight)
    })?;
    rec.method = Some(method);
    Ok(rec)
}

/// Evolves a prepared state; ensembles are averaged sample by sample with
/// their weights (density, energy, norm and sector weight are linear; the
/// variance is recomputed from the averaged density).
pub fn propagate_prepared(
    model: &SpinPhononModel,
    prepared: &Prepared,
    times: &[f64],
    cfg: &PropagatorConfig,
) -> Result<TrajectoryRecord> {
    match &prepared.state {
        InitialState::Pure(psi) => propagate(model, psi, times, prepared.origin, cfg),
        InitialState::Ensemble(samples) => {
            let runs: Vec<(f64, TrajectoryRecord)> = samples
                .iter()
                .map(|(w, psi)| Ok((*w, propagate(model, psi, times, prepared.origin, cfg)?)))
                .collect::<Result<_>>()?;
            average(&runs, prepared.origin)
        }
    }
}

/// Weighted average of per-sample trajectories on a common grid.
pub fn average(runs: &[(f64, TrajectoryRecord)], origin: f64) -> Result<TrajectoryRecord> {
    let first = &runs.first().ok_or(Error::InsufficientSamples { needed: 1, found: 0 })?.1;
    let mut rec = TrajectoryRecord { origin, method: first.method, ..Default::default() };
    for (i, &t) in first.times.iter().enumerate() {
        let mut density = vec![0.0; first.density[i].len()];
        let (mut energy, mut nrm, mut weight) = (0.0, 0.0, first.sector_weight.as_ref().map(|_| 0.0));
        for (w, r) in runs {
            if r.times.len() != first.times.len() || r.times[i] != t {
                return Err(Error::BasisMismatch("ensemble members were recorded on different grids".into()));
            }
            for (d, x) in density.iter_mut().zip(&r.density[i]) {
                *d += w * x;
            }
            energy += w * r.energy[i];
            nrm += w * r.norm[i];
            if let (Some(acc), Some(sw)) = (weight.as_mut(), r.sector_weight.as_ref()) {
                *acc += w * sw[i];
            }
        }
        rec.push(t, density, energy, nrm, weight)?;
    }
    Ok(rec)
}

/// Uniform grid `0, dt, ..., t_max` with `steps` intervals.
pub fn time_grid(t_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| t_max * i as f64 / steps as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Parity;
    use crate::params::ModelParams;
    use crate::phonon::PhononScheme;
    use crate::position::{constrained_model, ModelKind, Truncation};

    fn pure(p: &Prepared) -> &[C64] {
        match &p.state {
            InitialState::Pure(v) => v,
            _ => panic!("expected a pure state"),
        }
    }

    #[test]
    fn nine_site_domain_variance() {
        let p = ModelParams::new(21, 500.0, 8.0, 0.0);
        let m = constrained_model(&p, Truncation::Site).unwrap();
        let prep = prepare_initial(&m, 9, 11.0, &VibrationalSpec::Fock(0)).unwrap();
        let rho = m.density(pure(&prep));
        let s = variance(&rho, &coordinates(21, prep.origin)).unwrap();
        assert!((s - 20.0 / 3.0).abs() < 1e-12);
        assert_eq!(prep.domain.parity, Parity::Odd);
    }

    #[test]
    fn phase_state_vector() {
        let v = site_vector(&VibrationalSpec::Phase(std::f64::consts::FRAC_PI_2), 3).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0] - C64::new(h, 0.0)).norm() < 1e-16);
        assert!((v[1] - C64::new(0.0, h)).norm() < 1e-16);
        assert_eq!(&v[2..], &[C64::default(); 2]);
    }

    #[test]
    fn cold_thermal_state_is_vacuum() {
        let p = ModelParams::new(5, 200.0, 8.0, 1.0);
        let m = SpinPhononModel::new(p, ModelKind::Full, SpinSector::SingleDomain, PhononScheme::Site { cutoff: 2 })
            .unwrap();
        let vib = VibrationalSpec::Thermal { temperature: 0.0, samples: 4, seed: 7 };
        let prep = prepare_initial(&m, 2, 3.5, &vib).unwrap();
        let vac = prepare_initial(&m, 2, 3.5, &VibrationalSpec::Fock(0)).unwrap();
        match prep.state {
            InitialState::Ensemble(s) => {
                assert_eq!(s.len(), 4);
                for (w, psi) in s {
                    assert_eq!(w, 0.25);
                    assert_eq!(psi, pure(&vac));
                }
            }
            _ => panic!(),
        }
    }

    #[test]
    fn parity_and_cutoff_errors() {
        let p = ModelParams::new(7, 200.0, 8.0, 1.0);
        let m = SpinPhononModel::new(p, ModelKind::Full, SpinSector::SingleDomain, PhononScheme::Site { cutoff: 1 })
            .unwrap();
        assert!(matches!(prepare_initial(&m, 2, 4.0, &VibrationalSpec::Fock(0)), Err(Error::ParityMismatch(_))));
        assert!(matches!(prepare_initial(&m, 3, 4.5, &VibrationalSpec::Fock(0)), Err(Error::ParityMismatch(_))));
        assert!(matches!(prepare_initial(&m, 3, 4.0, &VibrationalSpec::Fock(2)), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn coherent_leakage() {
        let p = ModelParams::new(5, 200.0, 8.0, 1.0);
        let m = SpinPhononModel::new(p, ModelKind::Full, SpinSector::SingleDomain, PhononScheme::Site { cutoff: 2 })
            .unwrap();
        let small = prepare_initial(&m, 1, 3.0, &VibrationalSpec::Coherent { re: 0.05, im: 0.0 }).unwrap();
        assert!(small.leakage < 1e-6 && small.leakage > 0.0);
        let big = prepare_initial(&m, 1, 3.0, &VibrationalSpec::Coherent { re: 1.0, im: 0.0 });
        assert!(matches!(big, Err(Error::Leakage { .. })));
    }

    #[test]
    fn ensemble_average_is_linear() {
        let p = ModelParams::new(5, 200.0, 8.0, 1.0);
        let m = SpinPhononModel::new(p, ModelKind::Full, SpinSector::SingleDomain, PhononScheme::Site { cutoff: 1 })
            .unwrap();
        let vib = VibrationalSpec::Thermal { temperature: 8.0, samples: 6, seed: 11 };
        let prep = prepare_initial(&m, 2, 3.5, &vib).unwrap();
        let times = time_grid(1.0, 4);
        let cfg = PropagatorConfig::default();
        let avg = propagate_prepared(&m, &prep, &times, &cfg).unwrap();
        let InitialState::Ensemble(samples) = &prep.state else { panic!() };
        let runs: Vec<(f64, TrajectoryRecord)> =
            samples.iter().map(|(w, psi)| (*w, propagate(&m, psi, &times, 3.5, &cfg).unwrap())).collect();
        for i in 0..times.len() {
            for j in 0..5 {
                let manual: f64 = runs.iter().map(|(w, r)| w * r.density[i][j]).sum();
                assert!((avg.density[i][j] - manual).abs() < 1e-12);
            }
            let energy: f64 = runs.iter().map(|(w, r)| w * r.energy[i]).sum();
            assert!((avg.energy[i] - energy).abs() < 1e-9);
        }
    }

    #[test]
    fn record_starts_flat() {
        let p = ModelParams::new(7, 200.0, 8.0, 0.0);
        let m = constrained_model(&p, Truncation::Site).unwrap();
        let prep = prepare_initial(&m, 1, 4.0, &VibrationalSpec::Fock(0)).unwrap();
        let rec = propagate_prepared(&m, &prep, &time_grid(1.0, 10), &PropagatorConfig::default()).unwrap();
        assert_eq!(rec.delta_sigma[0], 0.0);
        assert!(rec.max_norm_drift() < 1e-12);
        assert!(rec.sector_weight.is_none());
    }
}
