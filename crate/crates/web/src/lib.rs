//! WebAssembly bindings for the static demo page in `www/`.

use wasm_bindgen::prelude::*;

use rydphon_core::dynamics::{default_center, prepare_initial, propagate, InitialState, VibrationalSpec};
use rydphon_core::momentum::{hq_diagonalform_on, BlockBasis, CouplingTensor};
use rydphon_core::phonon::PhononScheme;
use rydphon_core::position::{ModelKind, SpinPhononModel, SpinSector};
use rydphon_core::propagate::PropagatorConfig;
use rydphon_core::sw::sw_effective;
use rydphon_core::{Error, HermitianOperator, ModelParams, Result};

/// Largest Hilbert space the page will propagate.
pub const MAX_DEMO_DIM: usize = 100_000;

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct DensityRun {
    sites: usize,
    times: Vec<f64>,
    density: Vec<f64>,
    sigma: Vec<f64>,
}

#[wasm_bindgen]
impl DensityRun {
    #[wasm_bindgen(getter)]
    pub fn sites(&self) -> usize {
        self.sites
    }

    #[wasm_bindgen(getter)]
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    /// `⟨n_j(t)⟩` row by row, one row per time.
    #[wasm_bindgen(getter)]
    pub fn density(&self) -> Vec<f64> {
        self.density.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn sigma(&self) -> Vec<f64> {
        self.sigma.clone()
    }
}

/// Full chain on single-domain states, every site in `(|0⟩ + e^{iφ}|1⟩)/√2`.
pub fn density_run(
    n: usize,
    r0: usize,
    kappa: f64,
    phi: f64,
    cutoff: usize,
    t_max: f64,
    steps: usize,
) -> Result<DensityRun> {
    let p = ModelParams::new(n, 200.0, 8.0, kappa).validate()?;
    let needed = PhononScheme::Site { cutoff }.count(n).saturating_mul((n * (n - 1)) as u128);
    if needed > MAX_DEMO_DIM as u128 {
        return Err(Error::Capacity { what: "demo Hilbert space", needed, limit: MAX_DEMO_DIM as u128 });
    }
    let m = SpinPhononModel::new(p, ModelKind::Full, SpinSector::SingleDomain, PhononScheme::Site { cutoff })?;
    let vib = if cutoff == 0 { VibrationalSpec::Fock(0) } else { VibrationalSpec::Phase(phi) };
    let prep = prepare_initial(&m, r0, default_center(n, r0), &vib)?;
    let InitialState::Pure(psi) = &prep.state else { unreachable!("pure vibrational state") };
    let times = rydphon_core::dynamics::time_grid(t_max, steps.max(1));
    let rec = propagate(&m, psi, &times, prep.origin, &PropagatorConfig::default())?;
    Ok(DensityRun { sites: n, times: rec.times, density: rec.density.concat(), sigma: rec.sigma })
}

#[wasm_bindgen]
pub fn evolve_density(
    n: usize,
    r0: usize,
    kappa: f64,
    phi: f64,
    cutoff: usize,
    t_max: f64,
    steps: usize,
) -> std::result::Result<DensityRun, JsError> {
    density_run(n, r0, kappa, phi, cutoff, t_max, steps).map_err(js)
}

/// `[k, k', p, f_closed, f_oracle]` for every index triple, flattened.
pub fn coefficient_rows(n: usize) -> Result<Vec<f64>> {
    let (closed, oracle) = (CouplingTensor::closed(n)?, CouplingTensor::oracle(n)?);
    let mut out = Vec::with_capacity(5 * (n - 1) * (n - 1) * n);
    for k in 1..n {
        for kp in 1..n {
            for p in 1..=n {
                out.extend([k as f64, kp as f64, p as f64, closed.get(k, kp, p), oracle.get(k, kp, p)]);
            }
        }
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn coefficient_table(n: usize) -> std::result::Result<Vec<f64>, JsError> {
    coefficient_rows(n).map_err(js)
}

/// Sorted spectra of the effective block on `nph` phonons and of the exact
/// block `H_q` truncated at `nph + 2`, concatenated with the effective
/// dimension first: `[d, eff_1..eff_d, exact...]`.
pub fn spectra(n: usize, q: usize, nph: u32, kappa: f64, omega: f64) -> Result<Vec<f64>> {
    let p = ModelParams::new(n, 200.0, omega, kappa);
    let coeffs = CouplingTensor::closed(p.validate()?.n_sites)?;
    let eff = sw_effective(&p, q, nph, &coeffs)?;
    let basis = BlockBasis::new(&p, q, nph as usize + 2)?;
    if basis.dim() > 2000 {
        return Err(Error::Capacity { what: "dense block", needed: basis.dim() as u128, limit: 2000 });
    }
    let exact = hq_diagonalform_on(&p, &basis, &coeffs, 1.0).to_dense();
    let mut out = vec![eff.dim() as f64];
    out.extend(eff.h.eigenvalues());
    out.extend(rydphon_core::operator::dense_eigenvalues(exact));
    Ok(out)
}

#[wasm_bindgen]
pub fn effective_spectrum(n: usize, q: usize, nph: u32, kappa: f64, omega: f64) -> std::result::Result<Vec<f64>, JsError> {
    spectra(n, q, nph, kappa, omega).map_err(js)
}
