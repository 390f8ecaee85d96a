//! Real-time propagation `ψ(t) = e^{-iHt} ψ(0)`.
//!
//! Small operators are diagonalized densely. Larger ones use Lanczos with a
//! stored, fully reorthogonalized basis and a posteriori step control; when
//! that basis would not fit in memory a Chebyshev expansion is used, which
//! keeps only four vectors alive.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operator::HermitianOperator;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Auto,
    Dense,
    Krylov,
    Chebyshev,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagatorConfig {
    pub method: Method,
    /// Largest dimension handled by dense diagonalization under `Auto`.
    pub dense_threshold: usize,
    pub krylov_dim: usize,
    /// Local error allowed per Krylov step or Chebyshev tail.
    pub tol: f64,
    pub min_dt: f64,
    /// Bytes the Krylov basis may occupy before `Auto` switches to Chebyshev.
    pub krylov_memory: usize,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            dense_threshold: 1024,
            krylov_dim: 30,
            tol: 1e-12,
            min_dt: 1e-9,
            krylov_memory: 1 << 31,
        }
    }
}

impl PropagatorConfig {
    pub fn resolve(&self, dim: usize) -> Method {
        match self.method {
            Method::Auto if dim <= self.dense_threshold => Method::Dense,
            Method::Auto if dim.saturating_mul(16 * (self.krylov_dim + 2)) <= self.krylov_memory => Method::Krylov,
            Method::Auto => Method::Chebyshev,
            m => m,
        }
    }
}

/// Propagates `psi0` and calls `visit(i, times[i], ψ(times[i]))` for each
/// grid time. Returns the method used.
pub fn evolve(
    h: &dyn HermitianOperator,
    psi0: &[C64],
    times: &[f64],
    cfg: &PropagatorConfig,
    mut visit: impl FnMut(usize, f64, &[C64]) -> Result<()>,
) -> Result<Method> {
    if psi0.len() != h.dim() {
        return Err(Error::BasisMismatch(format!("state has length {}, operator has dimension {}", psi0.len(), h.dim())));
    }
    check_grid(times)?;
    let method = cfg.resolve(h.dim());
    match method {
        Method::Dense => {
            let eig = DenseEvolution::new(h, psi0);
            for (i, &t) in times.iter().enumerate() {
                if t == 0.0 {
                    visit(i, t, psi0)?;
                } else {
                    visit(i, t, &eig.at(t))?;
                }
            }
        }
        Method::Krylov | Method::Chebyshev => {
            let mut psi = psi0.to_vec();
            let mut now = 0.0;
            let cheb = (method == Method::Chebyshev).then(|| Chebyshev::new(h));
            for (i, &t) in times.iter().enumerate() {
                if t > now {
                    match &cheb {
                        Some(c) => c.advance(h, &mut psi, t - now, cfg.tol),
                        None => krylov_advance(h, &mut psi, now, t - now, cfg)?,
                    }
                    now = t;
                }
                visit(i, t, &psi)?;
            }
        }
        Method::Auto => unreachable!(),
    }
    Ok(method)
}

/// States at every grid time.
pub fn evolve_states(h: &dyn HermitianOperator, psi0: &[C64], times: &[f64], cfg: &PropagatorConfig) -> Result<Vec<Vec<C64>>> {
    let mut out = Vec::with_capacity(times.len());
    evolve(h, psi0, times, cfg, |_, _, psi| {
        out.push(psi.to_vec());
        Ok(())
    })?;
    Ok(out)
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter {
            name: "times",
            reason: "time grid must be finite, non-negative and non-decreasing".into(),
        });
    }
    Ok(())
}

struct DenseEvolution {
    vectors: DMatrix<C64>,
    values: DVector<f64>,
    coeffs: DVector<C64>,
}

impl DenseEvolution {
    fn new(h: &dyn HermitianOperator, psi0: &[C64]) -> Self {
        let eig = h.to_dense().symmetric_eigen();
        let coeffs = eig.eigenvectors.adjoint() * DVector::from_column_slice(psi0);
        Self { vectors: eig.eigenvectors, values: eig.eigenvalues, coeffs }
    }

    fn at(&self, t: f64) -> Vec<C64> {
        let phased = DVector::from_iterator(
            self.coeffs.len(),
            self.coeffs.iter().zip(self.values.iter()).map(|(c, &e)| c * C64::from_polar(1.0, -e * t)),
        );
        (&self.vectors * phased).as_slice().to_vec()
    }
}

pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Lanczos tridiagonalization with full reorthogonalization.
struct Lanczos {
    basis: Vec<Vec<C64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// `β_m`, zero when the space became invariant.
    residual: f64,
}

impl Lanczos {
    fn build(h: &dyn HermitianOperator, start: &[C64], m: usize) -> Self {
        let nrm = norm(start);
        let mut v: Vec<C64> = start.iter().map(|x| x / nrm).collect();
        let mut basis = Vec::with_capacity(m);
        let mut alpha = Vec::with_capacity(m);
        let mut beta = Vec::with_capacity(m);
        let mut w = vec![C64::new(0.0, 0.0); start.len()];
        let scale = {
            let (lo, hi) = h.spectral_bounds();
            lo.abs().max(hi.abs()).max(1.0)
        };
        let mut residual = 0.0;
        for j in 0..m {
            h.apply(&v, &mut w);
            let a = dot(&v, &w).re;
            basis.push(v);
            // two passes of classical Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(b, &w);
                    axpy(-c, b, &mut w);
                }
            }
            alpha.push(a);
            let bnext = norm(&w);
            if bnext < 1e-13 * scale {
                residual = 0.0;
                break;
            }
            if j + 1 == m {
                residual = bnext;
                break;
            }
            beta.push(bnext);
            v = w.iter().map(|x| x / bnext).collect();
        }
        Self { basis, alpha, beta, residual }
    }
}

fn krylov_advance(h: &dyn HermitianOperator, psi: &mut [C64], t0: f64, span: f64, cfg: &PropagatorConfig) -> Result<()> {
    let mut done = 0.0;
    while done < span {
        let nrm = norm(psi);
        let lz = Lanczos::build(h, psi, cfg.krylov_dim.min(h.dim()).max(1));
        let m = lz.alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = lz.alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = lz.beta[i];
                t[(i + 1, i)] = lz.beta[i];
            }
        }
        let eig = t.symmetric_eigen();
        let small = |dt: f64| -> Vec<C64> {
            // e^{-iT dt} e_1
            (0..m)
                .map(|r| {
                    (0..m)
                        .map(|s| {
                            let vr = eig.eigenvectors[(r, s)];
                            let v0 = eig.eigenvectors[(0, s)];
                            C64::from_polar(vr * v0, -eig.eigenvalues[s] * dt)
                        })
                        .sum()
                })
                .collect()
        };
        let mut dt = span - done;
        let mut y = small(dt);
        let estimate = |y: &[C64]| nrm * lz.residual * y[m - 1].norm();
        while estimate(&y) > cfg.tol {
            dt *= 0.5;
            if dt < cfg.min_dt {
                return Err(Error::StepSize { t: t0 + done, dt, estimate: estimate(&y) });
            }
            y = small(dt);
        }
        psi.fill(C64::new(0.0, 0.0));
        for (b, c) in lz.basis.iter().zip(&y) {
            axpy(c * nrm, b, psi);
        }
        done += dt;
    }
    Ok(())
}

/// Chebyshev expansion of the propagator on a Gershgorin interval.
struct Chebyshev {
    center: f64,
    half_width: f64,
}

/// Largest `half_width · dt` per expansion.
const CHEB_MAX_ARG: f64 = 100.0;

impl Chebyshev {
    fn new(h: &dyn HermitianOperator) -> Self {
        let (lo, hi) = h.spectral_bounds();
        let half_width = ((hi - lo) / 2.0).max(1e-12) * 1.01;
        Self { center: (hi + lo) / 2.0, half_width }
    }

    fn advance(&self, h: &dyn HermitianOperator, psi: &mut [C64], span: f64, tol: f64) {
        let pieces = (self.half_width * span / CHEB_MAX_ARG).ceil().max(1.0) as usize;
        for _ in 0..pieces {
            self.step(h, psi, span / pieces as f64, tol);
        }
    }

    fn step(&self, h: &dyn HermitianOperator, psi: &mut [C64], dt: f64, tol: f64) {
        let x = self.half_width * dt;
        let bessel = bessel_j_sequence(x, chebyshev_order(x, tol));
        let (a, b) = (self.half_width, self.center);
        let n = psi.len();
        let mut prev = psi.to_vec();
        let mut cur = vec![C64::new(0.0, 0.0); n];
        let mut next = vec![C64::new(0.0, 0.0); n];
        let mut acc: Vec<C64> = prev.iter().map(|v| v * bessel[0]).collect();
        // T_1 ψ = H̃ ψ with H̃ = (H - b)/a
        h.apply(&prev, &mut cur);
        for (c, p) in cur.iter_mut().zip(&prev) {
            *c = (*c - p * b) / a;
        }
        let mut phase = C64::new(0.0, -1.0);
        axpy(phase * 2.0 * bessel[1], &cur, &mut acc);
        for &jk in &bessel[2..] {
            h.apply(&cur, &mut next);
            for ((nx, c), p) in next.iter_mut().zip(&cur).zip(&prev) {
                *nx = (*nx - c * b) * (2.0 / a) - p;
            }
            phase *= C64::new(0.0, -1.0);
            axpy(phase * 2.0 * jk, &next, &mut acc);
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
        let global = C64::from_polar(1.0, -b * dt);
        for (p, a) in psi.iter_mut().zip(&acc) {
            *p = a * global;
        }
    }
}

/// Highest Chebyshev order needed so that the Bessel tail falls below `tol`.
fn chebyshev_order(x: f64, tol: f64) -> usize {
    let mut k = x.ceil() as usize + 2;
    let j = bessel_j_sequence(x, k + 60);
    while k + 2 < j.len() && (j[k].abs() > tol * 1e-2 || j[k + 1].abs() > tol * 1e-2) {
        k += 1;
    }
    k + 1
}

/// `J_0(x) ..= J_kmax(x)` by Miller's downward recurrence.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    if x == 0.0 {
        let mut out = vec![0.0; kmax + 1];
        out[0] = 1.0;
        return out;
    }
    let start = kmax.max(x.abs() as usize) + 30 + (x.abs().sqrt() * 10.0) as usize;
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-300;
    for k in (1..=start).rev() {
        j[k - 1] = 2.0 * k as f64 / x * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    // J_0 + 2 Σ J_{2k} = 1
    let norm = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    j.truncate(kmax + 1);
    j.iter().map(|v| v / norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::TripletBuilder;
    use crate::SparseHermitian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(dim: usize, density: f64, seed: u64) -> SparseHermitian {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b = TripletBuilder::new(dim);
        for i in 0..dim {
            b.add_diag(i, rng.random_range(-3.0..3.0));
            for j in i + 1..dim {
                if rng.random_bool(density) {
                    b.add(i, j, C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
                }
            }
        }
        b.build()
    }

    fn random_state(dim: usize, seed: u64) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<C64> = (0..dim).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let n = norm(&v);
        v.into_iter().map(|x| x / n).collect()
    }

    #[test]
    fn bessel_values() {
        let j = bessel_j_sequence(1.0, 2);
        assert!((j[0] - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((j[1] - 0.440_050_585_744_933_5).abs() < 1e-14);
        let j = bessel_j_sequence(10.0, 5);
        assert!((j[5] + 0.234_061_528_186_793_6).abs() < 1e-13);
        let j = bessel_j_sequence(150.0, 200);
        let s: f64 = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_time_is_identity() {
        let h = random_hermitian(40, 0.2, 1);
        let psi = random_state(40, 2);
        for method in [Method::Dense, Method::Krylov, Method::Chebyshev] {
            let cfg = PropagatorConfig { method, ..Default::default() };
            let states = evolve_states(&h, &psi, &[0.0], &cfg).unwrap();
            assert_eq!(states[0], psi, "{method:?}");
        }
    }

    #[test]
    fn methods_agree() {
        let h = random_hermitian(200, 0.05, 3);
        let psi = random_state(200, 4);
        let times = [0.0, 0.5, 2.0, 5.0];
        let reference = evolve_states(&h, &psi, &times, &PropagatorConfig { method: Method::Dense, ..Default::default() })
            .unwrap();
        for method in [Method::Krylov, Method::Chebyshev] {
            let cfg = PropagatorConfig { method, ..Default::default() };
            let states = evolve_states(&h, &psi, &times, &cfg).unwrap();
            for (a, b) in states.iter().zip(&reference) {
                let err = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                assert!(err < 1e-9, "{method:?}: {err}");
            }
        }
    }

    #[test]
    fn unitarity_and_energy() {
        let h = random_hermitian(200, 0.05, 5);
        let psi = random_state(200, 6);
        let e0 = h.expectation(&psi);
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        for method in [Method::Dense, Method::Krylov, Method::Chebyshev] {
            let cfg = PropagatorConfig { method, ..Default::default() };
            evolve(&h, &psi, &times, &cfg, |_, _, s| {
                assert!((norm(s) - 1.0).abs() < 1e-10, "{method:?} norm");
                assert!((h.expectation(s) - e0).abs() < 1e-9, "{method:?} energy");
                Ok(())
            })
            .unwrap();
        }
    }

    #[test]
    fn invariant_subspace_is_exact() {
        // a 2x2 block: Lanczos breaks down after two vectors
        let mut b = TripletBuilder::new(2);
        b.add(0, 1, C64::new(1.0, 0.0));
        let h = b.build();
        let psi = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let cfg = PropagatorConfig { method: Method::Krylov, ..Default::default() };
        let s = evolve_states(&h, &psi, &[0.0, 1.0], &cfg).unwrap();
        assert!((s[1][0] - C64::new(1f64.cos(), 0.0)).norm() < 1e-14);
        assert!((s[1][1] - C64::new(0.0, -1f64.sin())).norm() < 1e-14);
    }

    #[test]
    fn impossible_tolerance_reports_step_size() {
        let h = random_hermitian(100, 0.1, 7);
        let psi = random_state(100, 8);
        let cfg = PropagatorConfig { method: Method::Krylov, krylov_dim: 3, tol: 1e-30, min_dt: 1e-3, ..Default::default() };
        let err = evolve_states(&h, &psi, &[0.0, 1.0], &cfg).unwrap_err();
        assert!(matches!(err, Error::StepSize { .. }), "{err}");
    }

    #[test]
    fn decreasing_grid_rejected() {
        let h = random_hermitian(4, 0.5, 9);
        let psi = random_state(4, 10);
        assert!(evolve_states(&h, &psi, &[0.0, 2.0, 1.0], &PropagatorConfig::default()).is_err());
    }
}
