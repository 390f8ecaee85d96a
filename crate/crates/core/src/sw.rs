//! Second-order elimination of the one-phonon scattering term of `H_q`.
//!
//! `H_q = H_0 + V` with `H_0` diagonal in `|k, {N_p}⟩`. The generator
//! `S_ab = V_ab / (E_a - E_b)` solves `V + [S, H_0] = 0`, and the effective
//! Hamiltonian on a fixed total phonon number `n` is
//! `⟨a|H_eff|b⟩ = E_a δ_ab + ½ Σ_c V_ac V_cb [1/(E_a - E_c) + 1/(E_b - E_c)]`
//! with intermediate states `c` holding `n ± 1` phonons.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::momentum::{hq_diagonalform_on, quasiparticle_energy, BlockBasis, CouplingTensor};
use crate::operator::{SparseHermitian, SparseMatrix, TripletBuilder};
use crate::params::ModelParams;
use crate::C64;

/// Default resonance tolerance in units of the trap frequency.
pub const RESONANCE_TOL: f64 = 1e-6;

fn occupation_energy(params: &ModelParams, q: usize, k: usize, occ: &[u8]) -> f64 {
    let momentum = occ.iter().enumerate().map(|(i, &n)| (i + 1) * n as usize).sum();
    let total = occ.iter().map(|&n| n as u32).sum();
    quasiparticle_energy(params, q, k, momentum, total)
}

/// Energy denominators `(d1, d2)` for scattering `k' -> k` with a phonon in mode `p`:
/// `d1 = E_{k',N} - E_{k,N+1_p}` and `d2 = E_{k',N+1_p} - E_{k,N}`.
pub fn sw_denominators(
    k: usize,
    kp: usize,
    p: usize,
    q: usize,
    occupation: &[u8],
    params: &ModelParams,
) -> Result<(f64, f64)> {
    sw_denominators_with_tol(k, kp, p, q, occupation, params, RESONANCE_TOL)
}

pub fn sw_denominators_with_tol(
    k: usize,
    kp: usize,
    p: usize,
    q: usize,
    occupation: &[u8],
    params: &ModelParams,
    tol: f64,
) -> Result<(f64, f64)> {
    let n = params.n_sites;
    if occupation.len() != n {
        return Err(Error::BasisMismatch(format!("occupation has {} modes, chain has {n}", occupation.len())));
    }
    let mut raised = occupation.to_vec();
    raised[p - 1] += 1;
    let d1 = occupation_energy(params, q, kp, occupation) - occupation_energy(params, q, k, &raised);
    let d2 = occupation_energy(params, q, kp, &raised) - occupation_energy(params, q, k, occupation);
    let limit = tol * params.trap_freq;
    for (which, d) in [("d1", d1), ("d2", d2)] {
        if d.abs() < limit {
            return Err(Error::Resonance { which, value: d, tolerance: limit, k, kp, p });
        }
    }
    Ok((d1, d2))
}

/// `H_q = H_0 + V` on a truncated block with its generator.
#[derive(Clone, Debug)]
pub struct SwDecomposition {
    pub basis: BlockBasis,
    pub h0: Vec<f64>,
    pub v: SparseHermitian,
    pub generator: SparseMatrix,
}

impl SwDecomposition {
    pub fn new(
        params: &ModelParams,
        q: usize,
        coeffs: &CouplingTensor,
        total_cutoff: usize,
        tol: f64,
    ) -> Result<Self> {
        let basis = BlockBasis::new(params, q, total_cutoff)?;
        let h0 = hq_diagonalform_on(params, &basis, coeffs, 0.0).diagonal();
        let full = hq_diagonalform_on(params, &basis, coeffs, 1.0);
        let mut v = TripletBuilder::new(basis.dim());
        let mut s = Vec::new();
        let limit = tol * params.trap_freq;
        for (a, b, val) in full.matrix().triplets() {
            if a == b {
                continue;
            }
            if a < b {
                v.add(a, b, val);
            }
            let gap = h0[a] - h0[b];
            if gap.abs() < limit {
                let ph = &basis.phonons;
                let ((ka, ca), (kb, cb)) = (basis.split(a), basis.split(b));
                let (which, upper, lower) =
                    if ph.total(ca) > ph.total(cb) { ("d1", ca, cb) } else { ("d2", cb, ca) };
                let p = (0..basis.n_sites).find(|&m| ph.occupation(upper, m) > ph.occupation(lower, m)).unwrap() + 1;
                return Err(Error::Resonance { which, value: -gap, tolerance: limit, k: ka, kp: kb, p });
            }
            s.push((a as u32, b as u32, val / gap));
        }
        let dim = basis.dim();
        Ok(Self { basis, h0, v: v.build(), generator: SparseMatrix::from_triplets(dim, dim, s) })
    }

    /// `max |S + S†|`.
    pub fn anti_hermiticity_defect(&self) -> f64 {
        let s = &self.generator;
        s.triplets().map(|(i, j, x)| (x + s.get(j, i).conj()).norm()).fold(0.0, f64::max)
    }

    /// `max |(V + [S, H_0])_ab|` over rows below the phonon cutoff.
    pub fn residual(&self) -> f64 {
        let ph = &self.basis.phonons;
        let cutoff = (0..ph.len()).map(|c| ph.total(c)).max().unwrap_or(0);
        let interior = |i: usize| ph.total(self.basis.split(i).1) < cutoff;
        let mut r: HashMap<(usize, usize), C64> = HashMap::new();
        for (a, b, x) in self.v.matrix().triplets() {
            *r.entry((a, b)).or_default() += x;
        }
        for (a, b, x) in self.generator.triplets() {
            *r.entry((a, b)).or_default() += x * self.h0[b] - self.h0[a] * x;
        }
        r.into_iter().filter(|((a, _), _)| interior(*a)).map(|(_, x)| x.norm()).fold(0.0, f64::max)
    }

    /// `H_0 + ½[S, V]` restricted to `n` phonons, by dense matrix products.
    pub fn second_order_dense(&self, n_phonons: u32) -> DMatrix<C64> {
        let s = self.generator.to_dense();
        let v = self.v.dense();
        let mut h = (&s * &v - &v * &s) * C64::new(0.5, 0.0);
        for (i, e) in self.h0.iter().enumerate() {
            h[(i, i)] += e;
        }
        let ph = &self.basis.phonons;
        let keep: Vec<usize> = (0..self.basis.dim()).filter(|&i| ph.total(self.basis.split(i).1) == n_phonons).collect();
        h.select_rows(&keep).select_columns(&keep)
    }
}

pub fn sw_generator(params: &ModelParams, q: usize, coeffs: &CouplingTensor, total_cutoff: usize) -> Result<SparseMatrix> {
    Ok(SwDecomposition::new(params, q, coeffs, total_cutoff, RESONANCE_TOL)?.generator)
}

/// Effective Hamiltonian on the states `|k, {N_p}⟩` with `Σ N_p = n`.
#[derive(Clone, Debug)]
pub struct EffectiveHamiltonian {
    pub n_sites: usize,
    pub q: usize,
    pub n_phonons: u32,
    /// Phonon configurations of the subspace in basis order.
    pub configs: Vec<Vec<u8>>,
    pub h: SparseHermitian,
}

impl EffectiveHamiltonian {
    pub fn dim(&self) -> usize {
        (self.n_sites - 1) * self.configs.len()
    }

    pub fn index(&self, k: usize, config: usize) -> usize {
        (k - 1) * self.configs.len() + config
    }

    /// Positions of this subspace inside a larger block basis.
    pub fn embedding(&self, basis: &BlockBasis) -> Result<Vec<usize>> {
        if basis.n_sites != self.n_sites || basis.q != self.q {
            return Err(Error::BasisMismatch(format!(
                "effective block (N={}, q={}) vs block (N={}, q={})",
                self.n_sites, self.q, basis.n_sites, basis.q
            )));
        }
        let mut out = Vec::with_capacity(self.dim());
        for k in 1..self.n_sites {
            for c in &self.configs {
                let j = basis.phonons.index_of(c).ok_or_else(|| {
                    Error::BasisMismatch(format!("configuration {c:?} is outside the block's phonon cutoff"))
                })?;
                out.push(basis.index(k, j));
            }
        }
        Ok(out)
    }
}

pub fn sw_effective(
    params: &ModelParams,
    q: usize,
    n_phonons: u32,
    coeffs: &CouplingTensor,
) -> Result<EffectiveHamiltonian> {
    sw_effective_with_tol(params, q, n_phonons, coeffs, RESONANCE_TOL)
}

pub fn sw_effective_with_tol(
    params: &ModelParams,
    q: usize,
    n_phonons: u32,
    coeffs: &CouplingTensor,
    tol: f64,
) -> Result<EffectiveHamiltonian> {
    let sub = BlockBasis::new(params, q, n_phonons as usize)?;
    let n = sub.n_sites;
    if coeffs.n_sites() != n {
        return Err(Error::BasisMismatch(format!("coefficients for N={} used with N={n}", coeffs.n_sites())));
    }
    let configs: Vec<Vec<u8>> =
        (0..sub.phonons.len()).filter(|&c| sub.phonons.total(c) == n_phonons).map(|c| sub.phonons.config(c).to_vec()).collect();
    let lookup: HashMap<&[u8], usize> = configs.iter().enumerate().map(|(i, c)| (c.as_slice(), i)).collect();
    let nc = configs.len();
    let dim = (n - 1) * nc;
    let idx = |k: usize, c: usize| (k - 1) * nc + c;
    let kappa = params.coupling;
    let limit = tol * params.trap_freq;
    let energy = |k: usize, occ: &[u8]| occupation_energy(params, q, k, occ);

    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for (ci, occ) in configs.iter().enumerate() {
        for k in 1..n {
            let a = idx(k, ci);
            let ea = energy(k, occ);
            m[(a, a)] += ea;
            if kappa == 0.0 {
                continue;
            }
            for p in 1..=n {
                // intermediate with one more (raise) or one fewer (lower) phonon in p
                for raise in [true, false] {
                    let mut mid = occ.clone();
                    let f_in = if raise {
                        mid[p - 1] += 1;
                        (mid[p - 1] as f64).sqrt()
                    } else {
                        if occ[p - 1] == 0 {
                            continue;
                        }
                        mid[p - 1] -= 1;
                        (occ[p - 1] as f64).sqrt()
                    };
                    for kp in 1..n {
                        let v_ia = kappa * coeffs.get(kp, k, p) * f_in;
                        if v_ia == 0.0 {
                            continue;
                        }
                        let ei = energy(kp, &mid);
                        let da = ea - ei;
                        let which = if raise { "d2" } else { "d1" };
                        if da.abs() < limit {
                            return Err(Error::Resonance { which, value: -da, tolerance: limit, k, kp, p });
                        }
                        for p2 in 1..=n {
                            let mut out = mid.clone();
                            let f_out = if raise {
                                if mid[p2 - 1] == 0 {
                                    continue;
                                }
                                out[p2 - 1] -= 1;
                                (mid[p2 - 1] as f64).sqrt()
                            } else {
                                out[p2 - 1] += 1;
                                (out[p2 - 1] as f64).sqrt()
                            };
                            let cb = lookup[out.as_slice()];
                            for k3 in 1..n {
                                let v_bi = kappa * coeffs.get(k3, kp, p2) * f_out;
                                if v_bi == 0.0 {
                                    continue;
                                }
                                let db = energy(k3, &out) - ei;
                                if db.abs() < limit {
                                    return Err(Error::Resonance { which, value: -db, tolerance: limit, k: k3, kp, p: p2 });
                                }
                                m[(idx(k3, cb), a)] += 0.5 * v_bi * v_ia * (1.0 / da + 1.0 / db);
                            }
                        }
                    }
                }
            }
        }
    }
    let mut b = TripletBuilder::new(dim);
    for i in 0..dim {
        b.add_diag(i, m[(i, i)]);
        for j in i + 1..dim {
            b.add(i, j, C64::new(0.5 * (m[(i, j)] + m[(j, i)]), 0.0));
        }
    }
    Ok(EffectiveHamiltonian { n_sites: n, q, n_phonons, configs, h: b.build() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(kappa: f64) -> ModelParams {
        ModelParams::new(5, 500.0, 8.0, kappa)
    }

    #[test]
    fn denominators_without_drive() {
        let p = params(0.1).with_rabi(1e-300);
        for k in 1..5 {
            for kp in 1..5 {
                for m in 1..=5 {
                    let (d1, d2) = sw_denominators(k, kp, m, 1, &[0, 1, 0, 0, 2], &p).unwrap();
                    assert!((d1 + 8.0).abs() < 1e-12 && (d2 - 8.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn denominators_near_phonon_energy() {
        let p = params(0.1);
        let (d1, d2) = sw_denominators(2, 3, 1, 1, &[0; 5], &p).unwrap();
        assert!((d1 + 8.0).abs() <= 16.0 && d1 < 0.0);
        assert!((d2 - 8.0).abs() <= 16.0 && d2 > 0.0);
    }

    #[test]
    fn tuned_trap_frequency_is_resonant() {
        // ω = 2J_q cos(kπ/N) - 2J_{q+p} cos(k'π/N) closes d2 on the vacuum
        let (n, q, k, kp, pm) = (5, 1, 1, 4, 2);
        let j = |x: usize| 4.0 * (PI * x as f64 / n as f64).cos();
        let omega = 2.0 * j(q) * (PI * k as f64 / n as f64).cos() - 2.0 * j(q + pm) * (PI * kp as f64 / n as f64).cos();
        assert!(omega > 0.0);
        let p = ModelParams::new(n, 500.0, omega, 0.1);
        let err = sw_denominators(k, kp, pm, q, &[0; 5], &p).unwrap_err();
        assert!(matches!(err, Error::Resonance { which: "d2", .. }), "{err}");
        let coeffs = CouplingTensor::closed(n).unwrap();
        assert!(matches!(sw_effective(&p, q, 0, &coeffs), Err(Error::Resonance { .. })));
    }

    #[test]
    fn generator_vanishes_without_coupling() {
        let coeffs = CouplingTensor::closed(5).unwrap();
        let s = sw_generator(&params(0.0), 1, &coeffs, 2).unwrap();
        assert_eq!(s.nnz(), 0);
    }

    #[test]
    fn generator_solves_defining_identity() {
        let coeffs = CouplingTensor::closed(5).unwrap();
        let d = SwDecomposition::new(&params(0.1), 1, &coeffs, 1, RESONANCE_TOL).unwrap();
        assert!(d.residual() < 1e-9);
        assert!(d.anti_hermiticity_defect() < 1e-12);
        assert!(d.generator.nnz() > 0);
    }

    #[test]
    fn effective_without_coupling_is_h0() {
        let coeffs = CouplingTensor::closed(5).unwrap();
        let p = params(0.0);
        let eff = sw_effective(&p, 2, 1, &coeffs).unwrap();
        let basis = BlockBasis::new(&p, 2, 1).unwrap();
        let h0 = hq_diagonalform_on(&p, &basis, &coeffs, 0.0);
        let emb = eff.embedding(&basis).unwrap();
        for (a, &i) in emb.iter().enumerate() {
            for (b, &j) in emb.iter().enumerate() {
                assert_eq!(eff.h.get(a, b), h0.get(i, j));
            }
        }
    }

    #[test]
    fn per_element_and_commutator_routes_agree() {
        let coeffs = CouplingTensor::closed(5).unwrap();
        for n_ph in [0u32, 1] {
            for q in [1, 3] {
                let p = params(0.3);
                let eff = sw_effective(&p, q, n_ph, &coeffs).unwrap();
                let d = SwDecomposition::new(&p, q, &coeffs, n_ph as usize + 1, RESONANCE_TOL).unwrap();
                let dense = d.second_order_dense(n_ph);
                let diff = (eff.h.dense() - dense).camax();
                assert!(diff < 1e-12, "n={n_ph} q={q}: {diff}");
            }
        }
    }

    #[test]
    fn effective_is_hermitian() {
        let coeffs = CouplingTensor::closed(5).unwrap();
        let eff = sw_effective(&params(0.4), 4, 2, &coeffs).unwrap();
        assert!(eff.h.hermiticity_defect() < 1e-12);
        assert_eq!(eff.dim(), 4 * 15);
    }
}
