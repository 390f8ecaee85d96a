//! Product initial states: one spin domain times per-site vibrational states.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::basis::{domain_to_spins, DomainState};
use crate::error::{Error, Result};
use crate::phonon::PhononScheme;
use crate::position::SpinPhononModel;
use crate::C64;

/// Largest truncation loss accepted for a vibrational state.
pub const MAX_LEAKAGE: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub enum VibrationalSpec {
    Fock(usize),
    /// `(|0⟩ + e^{iφ}|1⟩)/√2`.
    Phase(f64),
    Coherent { re: f64, im: f64 },
    Thermal { temperature: f64, samples: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    Pure(Vec<C64>),
    /// Weighted Fock-product samples; weights sum to one.
    Ensemble(Vec<(f64, Vec<C64>)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prepared {
    pub state: InitialState,
    /// Domain centre in 1-based site units.
    pub origin: f64,
    pub domain: DomainState,
    /// Norm lost to the phonon truncation before renormalization.
    pub leakage: f64,
}

/// Default domain centre: the middle site for odd `r0`, the bond to its
/// right for even `r0`.
pub fn default_center(n: usize, r0: usize) -> f64 {
    let mid = (n + 1) as f64 / 2.0;
    if r0 % 2 == 1 {
        mid
    } else {
        mid + 0.5
    }
}

pub fn initial_domain(n: usize, r0: usize, center: f64) -> Result<DomainState> {
    if !(1..n).contains(&r0) {
        return Err(Error::OutOfRange { what: "r0", value: r0 as i64, lo: 1, hi: n as i64 - 1 });
    }
    let frac = center - center.floor();
    let on_site = frac.abs() < 1e-12;
    let on_bond = (frac - 0.5).abs() < 1e-12;
    if (r0 % 2 == 1 && !on_site) || (r0.is_multiple_of(2) && !on_bond) {
        return Err(Error::ParityMismatch(format!(
            "a domain of {r0} excitations cannot be centred at {center}: odd domains centre on a site, even ones on a bond"
        )));
    }
    let left = (center - (r0 as f64 - 1.0) / 2.0).round() as i64;
    Ok(DomainState::from_extent(crate::basis::wrap(left, n), r0, n))
}

/// Single-site amplitudes `⟨n|v⟩` for `n = 0..=cutoff` (not renormalized).
pub fn site_vector(spec: &VibrationalSpec, cutoff: usize) -> Result<Vec<C64>> {
    let mut v = vec![C64::new(0.0, 0.0); cutoff + 1];
    match *spec {
        VibrationalSpec::Fock(n) => {
            if n > cutoff {
                return Err(Error::OutOfRange { what: "fock occupation", value: n as i64, lo: 0, hi: cutoff as i64 });
            }
            v[n] = C64::new(1.0, 0.0);
        }
        VibrationalSpec::Phase(phi) => {
            if cutoff < 1 {
                return Err(Error::InvalidParameter { name: "site_cutoff", reason: "phase states need cutoff >= 1".into() });
            }
            v[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            v[1] = C64::from_polar(std::f64::consts::FRAC_1_SQRT_2, phi);
        }
        VibrationalSpec::Coherent { re, im } => {
            let alpha = C64::new(re, im);
            let mut term = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
            for (n, slot) in v.iter_mut().enumerate() {
                if n > 0 {
                    term *= alpha / (n as f64).sqrt();
                }
                *slot = term;
            }
        }
        VibrationalSpec::Thermal { .. } => {
            return Err(Error::InvalidParameter { name: "vibrational", reason: "thermal states are ensembles".into() })
        }
    }
    Ok(v)
}

/// Prepares the domain of `r0` excitations centred at `center` with every
/// site in the vibrational state `vib`.
pub fn prepare_initial(model: &SpinPhononModel, r0: usize, center: f64, vib: &VibrationalSpec) -> Result<Prepared> {
    let n = model.params().n_sites;
    let domain = initial_domain(n, r0, center)?;
    let spin = model
        .spin_index(&domain_to_spins(&domain, n))
        .ok_or_else(|| Error::BasisMismatch("initial domain is not in the model's spin basis".into()))?;
    let cutoff = match model.phonons().scheme() {
        PhononScheme::Site { cutoff } | PhononScheme::Deviation { cutoff, .. } => *cutoff,
        PhononScheme::Total { .. } => {
            if *vib != VibrationalSpec::Fock(0) {
                return Err(Error::InvalidParameter {
                    name: "vibrational",
                    reason: "momentum-mode phonons only support the vacuum initial state".into(),
                });
            }
            0
        }
    };
    let phonons = model.phonons();
    let embed = |site_states: &[Vec<C64>]| -> (Vec<C64>, f64) {
        let mut psi = vec![C64::new(0.0, 0.0); crate::operator::HermitianOperator::dim(model)];
        let mut captured = 0.0;
        for c in 0..phonons.len() {
            let mut amp = C64::new(1.0, 0.0);
            for (m, &occ) in phonons.config(c).iter().enumerate() {
                let v = &site_states[m];
                amp *= if (occ as usize) < v.len() { v[occ as usize] } else { C64::new(0.0, 0.0) };
            }
            captured += amp.norm_sqr();
            psi[model.index(spin, c)] = amp;
        }
        (psi, (1.0 - captured).max(0.0))
    };
    let normalize = |mut psi: Vec<C64>| {
        let nrm = crate::propagate::norm(&psi);
        psi.iter_mut().for_each(|x| *x /= nrm);
        psi
    };
    let modes = phonons.n_modes();
    match vib {
        VibrationalSpec::Thermal { temperature, samples, seed } => {
            if *samples == 0 {
                return Err(Error::InvalidParameter { name: "samples", reason: "need at least one sample".into() });
            }
            if temperature.is_nan() || *temperature < 0.0 {
                return Err(Error::InvalidParameter { name: "temperature", reason: "must be non-negative".into() });
            }
            let omega = model.params().trap_freq;
            let weights: Vec<f64> = (0..=cutoff)
                .map(|k| if *temperature == 0.0 { (k == 0) as u8 as f64 } else { (-omega * k as f64 / temperature).exp() })
                .collect();
            let dist = WeightedIndex::new(&weights).expect("Boltzmann weights are positive");
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut out = Vec::with_capacity(*samples);
            let mut leakage: f64 = 0.0;
            for _ in 0..*samples {
                let states: Vec<Vec<C64>> =
                    (0..modes).map(|_| site_vector(&VibrationalSpec::Fock(dist.sample(&mut rng)), cutoff)).collect::<Result<_>>()?;
                let (psi, leak) = embed(&states);
                if leak > 1.0 - 1e-12 {
                    return Err(Error::Leakage { leakage: leak, limit: MAX_LEAKAGE });
                }
                leakage = leakage.max(leak);
                out.push((1.0 / *samples as f64, normalize(psi)));
            }
            Ok(Prepared { state: InitialState::Ensemble(out), origin: center, domain, leakage })
        }
        _ => {
            let v = site_vector(vib, cutoff)?;
            let (psi, leakage) = embed(&vec![v; modes]);
            if leakage > MAX_LEAKAGE {
                return Err(Error::Leakage { leakage, limit: MAX_LEAKAGE });
            }
            Ok(Prepared { state: InitialState::Pure(normalize(psi)), origin: center, domain, leakage })
        }
    }
}
