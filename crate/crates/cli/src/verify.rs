//! Self-check suite over the closed-form coefficients and the transformations
//! built on them.

use std::f64::consts::PI;
use std::fmt;

use rydphon_core::dynamics::{coordinates, default_center, prepare_initial, propagate, InitialState, VibrationalSpec};
use rydphon_core::momentum::{change_of_basis, hq_diagonalform_on, hq_position_on, BlockBasis, CouplingTensor};
use rydphon_core::phonon::PhononScheme;
use rydphon_core::position::{constrained_model, ModelKind, SpinPhononModel, SpinSector, Truncation};
use rydphon_core::propagate::{evolve, evolve_states, PropagatorConfig};
use rydphon_core::sw::{sw_effective_with_tol, RESONANCE_TOL};
use rydphon_core::{HermitianOperator, ModelParams, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Level {
    Fast,
    Full,
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "[{}] {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Signature of a coefficient function `f(k, k', p, N)`.
pub type CoeffFn = dyn Fn(usize, usize, usize, usize) -> Result<f64> + Sync;

/// Runs the suite with `coeff` standing in for the closed-form coefficients.
pub fn verify_suite(level: Level, coeff: &CoeffFn) -> Report {
    let full = level == Level::Full;
    let mut report = Report::default();
    let mut push = |name: &'static str, r: Result<(bool, String)>| {
        let (pass, detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
        report.checks.push(Check { name, pass, detail });
    };
    push("oracle-equivalence", oracle(if full { 15 } else { 9 }, coeff));
    push("unitarity", unitarity(if full { 21 } else { 11 }));
    push("spectral-equivalence", spectral(if full { 2 } else { 1 }, coeff));
    push("sw-scaling", sw_scaling(if full { &[0, 1] } else { &[0] }, coeff));
    push("mirror-symmetry", if full { mirror(7, 2) } else { mirror(5, 2) });
    report
}

fn oracle(n_max: usize, coeff: &CoeffFn) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for n in (3..=n_max).step_by(2) {
        worst = worst.max(CouplingTensor::from_fn(n, coeff)?.max_abs_diff(&CouplingTensor::oracle(n)?));
    }
    Ok((worst < 1e-10, format!("N=3..{n_max}: max |f - oracle| = {worst:.2e}")))
}

fn unitarity(n_max: usize) -> Result<(bool, String)> {
    let mut defect: f64 = 0.0;
    for n in (3..=n_max).step_by(2) {
        let u = change_of_basis(n)?;
        let g = &u * u.transpose();
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                defect = defect.max((g[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    let p = ModelParams::new(5, 200.0, 8.0, 3.0).with_site_cutoff(1);
    let m = constrained_model(&p, Truncation::Site)?;
    let prep = prepare_initial(&m, 2, default_center(5, 2), &VibrationalSpec::Phase(0.3))?;
    let InitialState::Pure(psi0) = prep.state else { unreachable!() };
    let e0 = m.expectation(&psi0);
    let (mut dn, mut de): (f64, f64) = (0.0, 0.0);
    evolve(&m, &psi0, &rydphon_core::dynamics::time_grid(10.0, 10), &PropagatorConfig::default(), |_, _, psi| {
        dn = dn.max((psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs());
        de = de.max((m.expectation(psi) - e0).abs());
        Ok(())
    })?;
    Ok((
        defect < 1e-12 && dn < 1e-10 && de < 1e-9,
        format!("|UU^T - 1| = {defect:.2e} up to N={n_max}; norm drift {dn:.2e}, energy drift {de:.2e}"),
    ))
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn spectral(cutoff: usize, coeff: &CoeffFn) -> Result<(bool, String)> {
    let n = 5;
    let coeffs = CouplingTensor::from_fn(n, coeff)?;
    let p = ModelParams::new(n, 200.0, 8.0, 1.0).with_total_cutoff(cutoff);
    let position = constrained_model(&p, Truncation::Total)?.to_sparse().eigenvalues();
    let (mut union, mut diag) = (Vec::new(), Vec::new());
    for q in 1..=n {
        let basis = BlockBasis::new(&p, q, cutoff)?;
        union.extend(hq_position_on(&p, &basis).eigenvalues());
        diag.extend(hq_diagonalform_on(&p, &basis, &coeffs, 1.0).eigenvalues());
    }
    let g1 = max_gap(&position, &sorted(union));
    let g2 = max_gap(&position, &sorted(diag));
    Ok((
        g1 < 1e-8 && g2 < 1e-8,
        format!("N={n}, total cutoff {cutoff}: position vs H_q' blocks {g1:.2e}, position vs H_q blocks {g2:.2e}"),
    ))
}

fn sw_scaling(phonon_numbers: &[u32], coeff: &CoeffFn) -> Result<(bool, String)> {
    let (n, q, k0) = (5, 1, 4);
    let coeffs = CouplingTensor::from_fn(n, coeff)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for &nph in phonon_numbers {
        let mut inf = Vec::new();
        for kappa in [0.1, 0.2, 0.4] {
            let p = ModelParams::new(n, 200.0, 8.0, kappa);
            let basis = BlockBasis::new(&p, q, nph as usize + 2)?;
            let hq = hq_diagonalform_on(&p, &basis, &coeffs, 1.0);
            let eff = sw_effective_with_tol(&p, q, nph, &coeffs, RESONANCE_TOL)?;
            let emb = eff.embedding(&basis)?;
            let mut config = vec![0u8; n];
            config[0] = nph as u8;
            let mut a = vec![C64::default(); basis.dim()];
            a[basis.index(k0, basis.phonons.index_of(&config).expect("in block"))] = C64::new(1.0, 0.0);
            let mut b = vec![C64::default(); eff.dim()];
            b[eff.index(k0, eff.configs.iter().position(|c| *c == config).expect("in subspace"))] = C64::new(1.0, 0.0);
            let cfg = PropagatorConfig::default();
            let a = evolve_states(&hq, &a, &[5.0], &cfg)?.pop().unwrap();
            let b = evolve_states(&eff.h, &b, &[5.0], &cfg)?.pop().unwrap();
            let ov: C64 = emb.iter().zip(&b).map(|(&i, y)| a[i].conj() * y).sum();
            inf.push(1.0 - ov.norm_sqr());
        }
        let ratios = [inf[1] / inf[0], inf[2] / inf[1]];
        pass &= ratios.iter().all(|r| (3.0..=6.0).contains(r));
        parts.push(format!("n={nph}: ratios {:.2}, {:.2}", ratios[0], ratios[1]));
    }
    Ok((pass, format!("{} (expected in [3, 6])", parts.join("; "))))
}

fn mirror(n: usize, cutoff: usize) -> Result<(bool, String)> {
    let p = ModelParams::new(n, 200.0, 8.0, 4.0);
    let m = SpinPhononModel::new(p, ModelKind::Full, SpinSector::SingleDomain, PhononScheme::Site { cutoff })?;
    let run = |phi: f64| -> Result<Vec<Vec<f64>>> {
        let prep = prepare_initial(&m, 2, default_center(n, 2), &VibrationalSpec::Phase(phi))?;
        let InitialState::Pure(psi) = &prep.state else { unreachable!() };
        Ok(propagate(&m, psi, &rydphon_core::dynamics::time_grid(2.0, 4), prep.origin, &PropagatorConfig::default())?.density)
    };
    let (a, b) = (run(0.0)?, run(PI)?);
    let c = coordinates(n, default_center(n, 2));
    let mirror = |s: usize| c.iter().position(|&y| ((c[s] + y) / n as f64).fract().abs() < 1e-9).expect("mirror site");
    let gap = a
        .iter()
        .zip(&b)
        .flat_map(|(x, y)| (0..n).map(move |s| (x[s] - y[mirror(s)]).abs()))
        .fold(0.0, f64::max);
    Ok((gap < 1e-8, format!("N={n}, site cutoff {cutoff}: max |n_j(0) - n_(-j-1)(pi)| = {gap:.2e}")))
}
