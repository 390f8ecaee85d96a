//! Position-space spin-phonon Hamiltonians.
//!
//! Both the unconstrained chain and the single-domain model are stored as a
//! spin graph (diagonal energies and flip amplitudes) times a phonon Fock
//! space, with per-spin-state linear couplings `g A_m + conj(g) A_m†`. The
//! operator is applied matrix-free block by block; small instances can be
//! assembled into a [`SparseHermitian`].

use std::f64::consts::PI;

use crate::basis::{domain_basis, domain_to_spins, facilitated_neighbors, BasisIndex, DomainState, SpinString};
use crate::error::{Error, Result};
use crate::operator::{gershgorin, HermitianOperator, SparseHermitian, TripletBuilder, DROP_TOL};
use crate::params::ModelParams;
use crate::phonon::{PhononScheme, PhononSpace, NO_RAISE};
use crate::C64;

/// Largest Hilbert-space dimension a model may have.
pub const MAX_DIM: usize = 1 << 25;

/// Which Hamiltonian acts on the spins.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// `Σ_j Ω σ^x_j + Δ n_j + ω a†a + [V − κ(x_j − x_{j+1})] n_j n_{j+1}`.
    Full,
    /// Single-domain hopping `2Ω` with wall displacement coupling.
    Constrained,
}

/// Which spin configurations are kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinSector {
    All,
    SingleDomain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    Site,
    Total,
}

#[derive(Clone, Debug)]
pub struct SpinPhononModel {
    params: ModelParams,
    kind: ModelKind,
    sector: SpinSector,
    spins: Vec<SpinString>,
    domains: Option<BasisIndex<DomainState>>,
    phonons: PhononSpace,
    spin_diag: Vec<f64>,
    hop_ptr: Vec<usize>,
    hops: Vec<(u32, f64)>,
    coup_ptr: Vec<usize>,
    coups: Vec<(u32, C64)>,
    phonon_diag: Vec<f64>,
    sqrt: Vec<f64>,
}

impl SpinPhononModel {
    pub fn new(params: ModelParams, kind: ModelKind, sector: SpinSector, scheme: PhononScheme) -> Result<Self> {
        let params = params.validate()?;
        let n = params.n_sites;
        if kind == ModelKind::Constrained && sector == SpinSector::All {
            return Err(Error::InvalidParameter {
                name: "sector",
                reason: "the constrained model is defined on the single-domain sector only".into(),
            });
        }
        let n_spin: u128 = match sector {
            SpinSector::All => 1u128 << n,
            SpinSector::SingleDomain => (n * (n - 1)) as u128,
        };
        let needed = n_spin.saturating_mul(scheme.count(n));
        if needed > MAX_DIM as u128 {
            return Err(Error::Capacity { what: "Hilbert-space dimension", needed, limit: MAX_DIM as u128 });
        }
        let phonons = PhononSpace::new(scheme, n)?;

        let (spins, domains): (Vec<SpinString>, _) = match sector {
            SpinSector::All => ((0..1u64 << n).map(|b| SpinString::from_bits(b, n)).collect(), None),
            SpinSector::SingleDomain => {
                let d = domain_basis(n)?;
                (d.iter().map(|s| domain_to_spins(s, n)).collect(), Some(d))
            }
        };

        let mut spin_diag = Vec::with_capacity(spins.len());
        let mut hop_ptr = vec![0];
        let mut hops = Vec::new();
        let mut coup_ptr = vec![0];
        let mut coups = Vec::new();
        let kappa = params.coupling;
        for (s, spin) in spins.iter().enumerate() {
            let mut site_coef: Vec<(usize, f64)> = Vec::new();
            match (kind, &domains) {
                (ModelKind::Full, None) => {
                    spin_diag.push(
                        params.detuning * spin.excitations() as f64
                            + params.nn_interaction * spin.adjacent_pairs() as f64,
                    );
                    for j in 1..=n {
                        hops.push(((spin.flipped(j).bits()) as u32, params.rabi));
                        if spin.is_up(j) && spin.is_up(j + 1) {
                            site_coef.push((j, -kappa));
                            site_coef.push((j % n + 1, kappa));
                        }
                    }
                }
                (_, Some(d)) => {
                    let state = d.element(s);
                    let (hop, sign, diag) = match kind {
                        // mΔ + (m-1)V = Δ for a block of m excitations
                        ModelKind::Full => (params.rabi, 1.0, params.detuning),
                        ModelKind::Constrained => (2.0 * params.rabi, -1.0, 0.0),
                    };
                    spin_diag.push(diag);
                    for t in facilitated_neighbors(state, n) {
                        hops.push((d.index_of(&t).expect("neighbour in sector") as u32, hop));
                    }
                    site_coef.push((state.leftmost_site(n), -sign * kappa));
                    site_coef.push((state.rightmost_site(n), sign * kappa));
                }
                (ModelKind::Constrained, None) => unreachable!(),
            }
            coups.extend(mode_couplings(&site_coef, n, phonons.scheme().is_momentum()));
            hop_ptr.push(hops.len());
            coup_ptr.push(coups.len());
        }

        let phonon_diag = (0..phonons.len()).map(|c| params.trap_freq * phonons.total(c) as f64).collect();
        let max_occ = (0..phonons.len()).map(|c| phonons.config(c).iter().copied().max().unwrap_or(0)).max().unwrap_or(0);
        let sqrt = (0..=max_occ as usize + 1).map(|k| (k as f64).sqrt()).collect();
        Ok(Self {
            params,
            kind,
            sector,
            spins,
            domains,
            phonons,
            spin_diag,
            hop_ptr,
            hops,
            coup_ptr,
            coups,
            phonon_diag,
            sqrt,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn sector(&self) -> SpinSector {
        self.sector
    }

    pub fn phonons(&self) -> &PhononSpace {
        &self.phonons
    }

    pub fn spin_count(&self) -> usize {
        self.spins.len()
    }

    pub fn spin(&self, s: usize) -> &SpinString {
        &self.spins[s]
    }

    pub fn domains(&self) -> Option<&BasisIndex<DomainState>> {
        self.domains.as_ref()
    }

    /// Dense index of a spin configuration in this model's spin basis.
    pub fn spin_index(&self, spin: &SpinString) -> Option<usize> {
        match &self.domains {
            None => Some(spin.bits() as usize),
            Some(d) => crate::basis::spins_to_domain(spin).ok().and_then(|s| d.index_of(&s)),
        }
    }

    pub fn index(&self, spin: usize, phonon: usize) -> usize {
        spin * self.phonons.len() + phonon
    }

    pub fn basis_label(&self) -> String {
        let spins = match self.sector {
            SpinSector::All => "spin-string",
            SpinSector::SingleDomain => "domain",
        };
        format!("{spins}⊗phonon-{}", self.phonons.scheme().label())
    }

    /// Probability of each spin configuration with the phonons traced out.
    pub fn spin_probabilities(&self, psi: &[C64]) -> Vec<f64> {
        psi.chunks(self.phonons.len()).map(|b| b.iter().map(|a| a.norm_sqr()).sum()).collect()
    }

    /// `⟨n_j⟩` for sites `1..=N` (index 0 holds site 1).
    pub fn density(&self, psi: &[C64]) -> Vec<f64> {
        let mut out = vec![0.0; self.params.n_sites];
        for (s, w) in self.spin_probabilities(psi).into_iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (j, up) in self.spins[s].occupations().enumerate() {
                if up {
                    out[j] += w;
                }
            }
        }
        out
    }

    pub fn to_sparse(&self) -> SparseHermitian {
        let p = self.phonons.len();
        let mut b = TripletBuilder::new(self.dim());
        for t in 0..self.spins.len() {
            for c in 0..p {
                b.add_diag(t * p + c, self.spin_diag[t] + self.phonon_diag[c]);
            }
            for &(s, amp) in &self.hops[self.hop_ptr[t]..self.hop_ptr[t + 1]] {
                if (s as usize) < t {
                    for c in 0..p {
                        b.add(t * p + c, s as usize * p + c, C64::new(amp, 0.0));
                    }
                }
            }
            for &(m, g) in &self.coups[self.coup_ptr[t]..self.coup_ptr[t + 1]] {
                let raise = self.phonons.raise_table(m as usize);
                for (c, &j) in raise.iter().enumerate() {
                    if j != NO_RAISE {
                        let f = self.sqrt[self.phonons.occupation(c, m as usize) as usize + 1];
                        b.add(t * p + j as usize, t * p + c, g.conj() * f);
                    }
                }
            }
        }
        b.build()
    }

    fn apply_block(&self, t: usize, x: &[C64], y: &mut [C64]) {
        let p = self.phonons.len();
        let xt = &x[t * p..(t + 1) * p];
        let d = self.spin_diag[t];
        for ((yc, xc), pd) in y.iter_mut().zip(xt).zip(&self.phonon_diag) {
            *yc = xc * (d + pd);
        }
        for &(s, amp) in &self.hops[self.hop_ptr[t]..self.hop_ptr[t + 1]] {
            let xs = &x[s as usize * p..(s as usize + 1) * p];
            for (yc, xc) in y.iter_mut().zip(xs) {
                *yc += xc * amp;
            }
        }
        for &(m, g) in &self.coups[self.coup_ptr[t]..self.coup_ptr[t + 1]] {
            let raise = self.phonons.raise_table(m as usize);
            let gc = g.conj();
            for c in 0..p {
                let j = raise[c];
                if j != NO_RAISE {
                    let j = j as usize;
                    let f = self.sqrt[self.phonons.occupation(c, m as usize) as usize + 1];
                    y[j] += gc * f * xt[c];
                    y[c] += g * f * xt[j];
                }
            }
        }
    }
}

impl HermitianOperator for SpinPhononModel {
    fn dim(&self) -> usize {
        self.spins.len() * self.phonons.len()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        let p = self.phonons.len();
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            y.par_chunks_mut(p).enumerate().for_each(|(t, yt)| self.apply_block(t, x, yt));
        }
        #[cfg(not(feature = "parallel"))]
        for (t, yt) in y.chunks_mut(p).enumerate() {
            self.apply_block(t, x, yt);
        }
    }

    fn spectral_bounds(&self) -> (f64, f64) {
        let p = self.phonons.len();
        let discs = (0..self.spins.len()).flat_map(move |t| {
            let hop_r: f64 = self.hops[self.hop_ptr[t]..self.hop_ptr[t + 1]].iter().map(|h| h.1.abs()).sum();
            (0..p).map(move |c| {
                let mut r = hop_r;
                for &(m, g) in &self.coups[self.coup_ptr[t]..self.coup_ptr[t + 1]] {
                    let n = self.phonons.occupation(c, m as usize) as usize;
                    r += g.norm() * self.sqrt[n];
                    if self.phonons.raised(c, m as usize).is_some() {
                        r += g.norm() * self.sqrt[n + 1];
                    }
                }
                (self.spin_diag[t] + self.phonon_diag[c], r)
            })
        });
        gershgorin(discs)
    }
}

/// Converts real site-displacement coefficients `Σ_j c_j (a_j + a_j†)` into
/// mode couplings, merging repeated sites.
fn mode_couplings(site_coef: &[(usize, f64)], n: usize, momentum: bool) -> Vec<(u32, C64)> {
    let mut per_site = vec![0.0; n];
    for &(j, c) in site_coef {
        per_site[j - 1] += c;
    }
    if !momentum {
        return per_site
            .iter()
            .enumerate()
            .filter(|(_, c)| c.abs() > DROP_TOL)
            .map(|(j, &c)| (j as u32, C64::new(c, 0.0)))
            .collect();
    }
    let norm = (n as f64).sqrt().recip();
    (1..=n)
        .filter_map(|p| {
            let g: C64 = per_site
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(j, &c)| C64::from_polar(c * norm, 2.0 * PI * ((j + 1) * p) as f64 / n as f64))
                .sum();
            (g.norm() > DROP_TOL).then_some(((p - 1) as u32, g))
        })
        .collect()
}

/// The unconstrained chain on all spin strings with per-site phonon cutoff.
pub fn build_full_hamiltonian(p: &ModelParams) -> Result<SparseHermitian> {
    let m = SpinPhononModel::new(*p, ModelKind::Full, SpinSector::All, PhononScheme::Site { cutoff: p.site_cutoff })?;
    Ok(m.to_sparse())
}

pub fn constrained_model(p: &ModelParams, truncation: Truncation) -> Result<SpinPhononModel> {
    let scheme = match truncation {
        Truncation::Site => PhononScheme::Site { cutoff: p.site_cutoff },
        Truncation::Total => PhononScheme::Total { cutoff: p.total_cutoff },
    };
    SpinPhononModel::new(*p, ModelKind::Constrained, SpinSector::SingleDomain, scheme)
}

pub fn build_constrained_hamiltonian(p: &ModelParams, truncation: Truncation) -> Result<SparseHermitian> {
    Ok(constrained_model(p, truncation)?.to_sparse())
}

/// Copies the single-domain amplitudes of a state of `full` into the basis of
/// `target`, returning the projected vector and its squared norm.
pub fn project_to_single_domain(
    full: &SpinPhononModel,
    psi: &[C64],
    target: &SpinPhononModel,
) -> Result<(Vec<C64>, f64)> {
    if full.sector != SpinSector::All || target.sector != SpinSector::SingleDomain {
        return Err(Error::BasisMismatch(format!(
            "need spin-string source and domain target, got {} -> {}",
            full.basis_label(),
            target.basis_label()
        )));
    }
    if full.params.n_sites != target.params.n_sites || full.phonons.scheme() != target.phonons.scheme() {
        return Err(Error::BasisMismatch(format!(
            "{} (N={}) vs {} (N={})",
            full.basis_label(),
            full.params.n_sites,
            target.basis_label(),
            target.params.n_sites
        )));
    }
    if psi.len() != full.dim() {
        return Err(Error::BasisMismatch(format!("state has length {}, basis has {}", psi.len(), full.dim())));
    }
    let p = full.phonons.len();
    let mut out = vec![C64::new(0.0, 0.0); target.dim()];
    for (s, spin) in target.spins.iter().enumerate() {
        let src = spin.bits() as usize;
        out[s * p..(s + 1) * p].copy_from_slice(&psi[src * p..(src + 1) * p]);
    }
    let weight = out.iter().map(|a| a.norm_sqr()).sum();
    Ok((out, weight))
}
