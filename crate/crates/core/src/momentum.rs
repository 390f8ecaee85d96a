//! Centre-of-mass momentum blocks of the single-domain model.
//!
//! For each CM momentum `q = 1..=N` the relative coordinate `r' = 1..N-1`
//! hops with an amplitude that depends on the total phonon momentum, and the
//! sine transform `U` turns the block into free quasiparticles `|k⟩`
//! scattered by phonons with amplitudes `f_{k,k',p}`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::basis::check_chain;
use crate::error::{Error, Result};
use crate::operator::{SparseHermitian, TripletBuilder};
use crate::params::ModelParams;
use crate::phonon::{PhononScheme, PhononSpace};
use crate::C64;

/// Below this magnitude the rational term of the closed form is evaluated by
/// the direct sum instead.
pub const DENOM_GUARD: f64 = 1e-12;

fn check_indices(k: usize, kp: usize, p: usize, n: usize) -> Result<()> {
    check_chain(n)?;
    for (what, v, hi) in [("k", k, n - 1), ("k'", kp, n - 1), ("p", p, n)] {
        if !(1..=hi).contains(&v) {
            return Err(Error::OutOfRange { what, value: v as i64, lo: 1, hi: hi as i64 });
        }
    }
    Ok(())
}

/// `-4 N^{-3/2} Σ_{r=1}^{N-1} sin(πkr/N) sin(πp(r-1)/N) sin(πk'r/N)`.
pub fn f_coeff_oracle(k: usize, kp: usize, p: usize, n: usize) -> Result<f64> {
    check_indices(k, kp, p, n)?;
    Ok(f_oracle_unchecked(k, kp, p, n))
}

fn f_oracle_unchecked(k: usize, kp: usize, p: usize, n: usize) -> f64 {
    let nf = n as f64;
    let s: f64 = (1..n)
        .map(|r| {
            let r = r as f64;
            (PI * k as f64 * r / nf).sin() * (PI * p as f64 * (r - 1.0) / nf).sin() * (PI * kp as f64 * r / nf).sin()
        })
        .sum();
    -4.0 * nf.powf(-1.5) * s
}

/// Closed form of the scattering amplitude `f_{k,k',p}`.
pub fn f_coeff_closed(k: usize, kp: usize, p: usize, n: usize) -> Result<f64> {
    check_indices(k, kp, p, n)?;
    let nf = n as f64;
    let (ki, kpi, pi, ni) = (k as i64, kp as i64, p as i64, n as i64);
    let (cp, ck, ckp) = ((PI * p as f64 / nf).cos(), (PI * k as f64 / nf).cos(), (PI * kp as f64 / nf).cos());
    let (sp, sk, skp) = ((PI * p as f64 / nf).sin(), (PI * k as f64 / nf).sin(), (PI * kp as f64 / nf).sin());

    let mut rational = 0.0;
    if (ki - kpi - pi).rem_euclid(2) == 1 {
        let denom = cp * cp + ck * ck + ckp * ckp - 2.0 * cp * ck * ckp - 1.0;
        if denom.abs() < DENOM_GUARD {
            return Ok(f_oracle_unchecked(k, kp, p, n));
        }
        rational = cp * sp * sk * skp / denom;
    }
    let delta = |a: i64, b: i64| if a == b { 1.0 } else { 0.0 };
    let d = ki - kpi;
    let s = ki + kpi;
    let kronecker = nf / 4.0 * sp * ((delta(d, -pi) + delta(d, pi)) - (delta(s, 2 * ni - pi) + delta(s, pi)));
    Ok(4.0 * nf.powf(-1.5) * (rational + kronecker))
}

/// All `f_{k,k',p}` for one chain length.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingTensor {
    n: usize,
    data: Vec<f64>,
}

impl CouplingTensor {
    pub fn closed(n: usize) -> Result<Self> {
        Self::from_fn(n, f_coeff_closed)
    }

    pub fn oracle(n: usize) -> Result<Self> {
        Self::from_fn(n, f_coeff_oracle)
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize, usize) -> Result<f64> + Sync) -> Result<Self> {
        check_chain(n)?;
        let m = n - 1;
        let row = |k: usize| -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(m * n);
            for kp in 1..=m {
                for p in 1..=n {
                    out.push(f(k, kp, p, n)?);
                }
            }
            Ok(out)
        };
        #[cfg(feature = "parallel")]
        let rows: Vec<Result<Vec<f64>>> = {
            use rayon::prelude::*;
            (1..=m).into_par_iter().map(row).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let rows: Vec<Result<Vec<f64>>> = (1..=m).map(row).collect();
        let mut data = Vec::with_capacity(m * m * n);
        for r in rows {
            data.extend(r?);
        }
        Ok(Self { n, data })
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    /// `f_{k,k',p}` with 1-based indices.
    pub fn get(&self, k: usize, kp: usize, p: usize) -> f64 {
        let n = self.n;
        self.data[((k - 1) * (n - 1) + (kp - 1)) * n + (p - 1)]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// `U[j][k] = √(2/N) sin(πkj/N)` for `j, k = 1..N-1` (stored 0-based).
pub fn change_of_basis(n: usize) -> Result<DMatrix<f64>> {
    check_chain(n)?;
    let m = n - 1;
    let nf = n as f64;
    Ok(DMatrix::from_fn(m, m, |j, k| (2.0 / nf).sqrt() * (PI * ((k + 1) * (j + 1)) as f64 / nf).sin()))
}

/// `J_q({N_p}) = 4Ω cos(π(q + Σ p N_p)/N)`.
pub fn hopping(params: &ModelParams, q: usize, momentum: usize) -> f64 {
    4.0 * params.rabi * (PI * (q + momentum) as f64 / params.n_sites as f64).cos()
}

/// Relative coordinate (or quasiparticle) times momentum-mode phonons.
#[derive(Clone, Debug)]
pub struct BlockBasis {
    pub n_sites: usize,
    pub q: usize,
    pub phonons: PhononSpace,
}

impl BlockBasis {
    pub fn new(params: &ModelParams, q: usize, total_cutoff: usize) -> Result<Self> {
        let params = params.validate()?;
        let n = params.n_sites;
        if !(1..=n).contains(&q) {
            return Err(Error::OutOfRange { what: "q", value: q as i64, lo: 1, hi: n as i64 });
        }
        Ok(Self { n_sites: n, q, phonons: PhononSpace::new(PhononScheme::Total { cutoff: total_cutoff }, n)? })
    }

    pub fn dim(&self) -> usize {
        (self.n_sites - 1) * self.phonons.len()
    }

    /// Index of relative state `r` (or quasiparticle `k`), 1-based, with phonon configuration `c`.
    pub fn index(&self, r: usize, c: usize) -> usize {
        (r - 1) * self.phonons.len() + c
    }

    pub fn split(&self, i: usize) -> (usize, usize) {
        (i / self.phonons.len() + 1, i % self.phonons.len())
    }
}

/// Block `H_q'` in the relative coordinate.
pub fn build_hq_position(params: &ModelParams, q: usize) -> Result<SparseHermitian> {
    let basis = BlockBasis::new(params, q, params.total_cutoff)?;
    Ok(hq_position_on(params, &basis))
}

pub fn hq_position_on(params: &ModelParams, basis: &BlockBasis) -> SparseHermitian {
    let n = basis.n_sites;
    let ph = &basis.phonons;
    let mut b = TripletBuilder::new(basis.dim());
    let g0 = -2.0 * params.coupling / (n as f64).sqrt();
    for c in 0..ph.len() {
        let j = hopping(params, basis.q, ph.momentum(c));
        for r in 1..n {
            b.add_diag(basis.index(r, c), params.trap_freq * ph.total(c) as f64);
            if r + 1 < n {
                b.add(basis.index(r + 1, c), basis.index(r, c), C64::new(j, 0.0));
            }
            for p in 1..=n {
                if let Some(up) = ph.raised(c, p - 1) {
                    let amp = g0 * (PI * ((r - 1) * p) as f64 / n as f64).sin();
                    let f = (ph.occupation(c, p - 1) as f64 + 1.0).sqrt();
                    b.add(basis.index(r, up), basis.index(r, c), C64::new(amp * f, 0.0));
                }
            }
        }
    }
    b.build()
}

/// Block `H_q` in the quasiparticle basis.
pub fn build_hq_diagonalform(params: &ModelParams, q: usize, coeffs: &CouplingTensor) -> Result<SparseHermitian> {
    let basis = BlockBasis::new(params, q, params.total_cutoff)?;
    if coeffs.n_sites() != basis.n_sites {
        return Err(Error::BasisMismatch(format!(
            "coefficients for N={} used with N={}",
            coeffs.n_sites(),
            basis.n_sites
        )));
    }
    Ok(hq_diagonalform_on(params, &basis, coeffs, 1.0))
}

/// `H_q` with the coupling term scaled by `coupling_scale` (0 gives `H_0`).
pub fn hq_diagonalform_on(
    params: &ModelParams,
    basis: &BlockBasis,
    coeffs: &CouplingTensor,
    coupling_scale: f64,
) -> SparseHermitian {
    let n = basis.n_sites;
    let ph = &basis.phonons;
    let mut b = TripletBuilder::new(basis.dim());
    let kappa = params.coupling * coupling_scale;
    for c in 0..ph.len() {
        for k in 1..n {
            b.add_diag(basis.index(k, c), quasiparticle_energy(params, basis.q, k, ph.momentum(c), ph.total(c)));
        }
        if kappa == 0.0 {
            continue;
        }
        for p in 1..=n {
            if let Some(up) = ph.raised(c, p - 1) {
                let f = (ph.occupation(c, p - 1) as f64 + 1.0).sqrt();
                for k in 1..n {
                    for kp in 1..n {
                        let v = kappa * coeffs.get(k, kp, p) * f;
                        b.add(basis.index(k, up), basis.index(kp, c), C64::new(v, 0.0));
                    }
                }
            }
        }
    }
    b.build()
}

/// `E_{k,{N_p}} = 2 J_q({N_p}) cos(kπ/N) + ω Σ N_p`.
pub fn quasiparticle_energy(params: &ModelParams, q: usize, k: usize, momentum: usize, n_tot: u32) -> f64 {
    2.0 * hopping(params, q, momentum) * (PI * k as f64 / params.n_sites as f64).cos()
        + params.trap_freq * n_tot as f64
}

/// `U ⊗ 1` on a block basis.
pub fn block_change_of_basis(basis: &BlockBasis) -> Result<DMatrix<f64>> {
    let u = change_of_basis(basis.n_sites)?;
    let p = basis.phonons.len();
    Ok(u.kronecker(&DMatrix::identity(p, p)))
}

/// One `H_q'` block per `q = 1..=N`.
pub fn assemble_blocks(params: &ModelParams) -> Result<Vec<SparseHermitian>> {
    let n = params.validate()?.n_sites;
    let build = |q: usize| build_hq_position(params, q);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (1..=n).into_par_iter().map(build).collect()
    }
    #[cfg(not(feature = "parallel"))]
    (1..=n).map(build).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_selection_zero() {
        assert_eq!(f_coeff_closed(1, 1, 4, 5).unwrap(), 0.0);
        assert!(f_coeff_oracle(1, 1, 4, 5).unwrap().abs() < 1e-15);
    }

    #[test]
    fn p_equal_n_vanishes() {
        for n in [3, 5, 7] {
            for k in 1..n {
                for kp in 1..n {
                    assert!(f_coeff_oracle(k, kp, n, n).unwrap().abs() < 1e-15);
                    assert!(f_coeff_closed(k, kp, n, n).unwrap().abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn out_of_range_indices() {
        assert!(matches!(f_coeff_closed(0, 1, 1, 5), Err(Error::OutOfRange { what: "k", .. })));
        assert!(matches!(f_coeff_oracle(1, 5, 1, 5), Err(Error::OutOfRange { what: "k'", .. })));
        assert!(matches!(f_coeff_closed(1, 1, 6, 5), Err(Error::OutOfRange { what: "p", .. })));
        assert!(f_coeff_closed(1, 1, 1, 4).is_err());
    }

    #[test]
    fn hopping_amplitudes() {
        let p = ModelParams::new(5, 500.0, 8.0, 0.0);
        assert!((hopping(&p, 5, 0) + 4.0).abs() < 1e-15);
        let h = build_hq_position(&p, 2).unwrap();
        let j = 4.0 * (2.0 * PI / 5.0).cos();
        for r in 0..3 {
            assert!((h.get(r + 1, r).re - j).abs() < 1e-15);
        }
    }

    #[test]
    fn first_relative_row_is_uncoupled() {
        let p = ModelParams::new(5, 500.0, 8.0, 1.0).with_total_cutoff(1);
        let basis = BlockBasis::new(&p, 1, 1).unwrap();
        let h = hq_position_on(&p, &basis);
        let pl = basis.phonons.len();
        for c in 0..pl {
            for c2 in 0..pl {
                if c != c2 {
                    assert_eq!(h.get(basis.index(1, c), basis.index(1, c2)), C64::default());
                }
            }
        }
    }

    #[test]
    fn sine_transform_diagonalizes_chain() {
        for n in [3, 5, 7, 9, 11] {
            let u = change_of_basis(n).unwrap();
            let m = n - 1;
            let chain = DMatrix::from_fn(m, m, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
            let d = u.transpose() * chain * &u;
            for i in 0..m {
                for j in 0..m {
                    let expected = if i == j { 2.0 * (PI * (i + 1) as f64 / n as f64).cos() } else { 0.0 };
                    assert!((d[(i, j)] - expected).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn three_site_transform() {
        let u = change_of_basis(3).unwrap();
        let s = (2.0f64 / 3.0).sqrt() * (PI / 3.0).sin();
        assert!((u[(0, 0)] - s).abs() < 1e-15);
        assert!((u[(0, 1)] - s).abs() < 1e-15);
        assert!((u[(1, 0)] - s).abs() < 1e-15);
        assert!((u[(1, 1)] + s).abs() < 1e-15);
    }

    #[test]
    fn free_quasiparticle_spectrum() {
        let p = ModelParams::new(7, 500.0, 8.0, 0.0);
        let coeffs = CouplingTensor::closed(7).unwrap();
        for q in 1..=7 {
            let ev = build_hq_diagonalform(&p, q, &coeffs).unwrap().eigenvalues();
            let mut expected: Vec<f64> =
                (1..7).map(|k| 8.0 * (PI * q as f64 / 7.0).cos() * (PI * k as f64 / 7.0).cos()).collect();
            expected.sort_by(f64::total_cmp);
            for (a, b) in ev.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn position_and_diagonal_forms_are_unitarily_equivalent() {
        let p = ModelParams::new(5, 500.0, 8.0, 1.0).with_total_cutoff(1);
        let coeffs = CouplingTensor::closed(5).unwrap();
        for q in 1..=5 {
            let basis = BlockBasis::new(&p, q, 1).unwrap();
            let u = block_change_of_basis(&basis).unwrap().map(|x| C64::new(x, 0.0));
            let hp = hq_position_on(&p, &basis).dense();
            let hq = hq_diagonalform_on(&p, &basis, &coeffs, 1.0).dense();
            let diff = u.transpose() * hp * &u - hq;
            assert!(diff.camax() < 1e-12, "q={q}: {}", diff.camax());
        }
    }

    #[test]
    fn block_count() {
        let p = ModelParams::new(7, 500.0, 8.0, 0.5).with_total_cutoff(1);
        assert_eq!(assemble_blocks(&p).unwrap().len(), 7);
    }
}
