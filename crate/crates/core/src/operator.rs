//! Sparse complex matrices and the operator interface used by the propagators.

use nalgebra::DMatrix;

use crate::C64;

/// Entries smaller than this are dropped during assembly.
pub const DROP_TOL: f64 = 1e-14;

/// A Hermitian linear map that can be applied to a state vector.
pub trait HermitianOperator: Sync {
    fn dim(&self) -> usize;

    /// Writes `H x` into `y`.
    fn apply(&self, x: &[C64], y: &mut [C64]);

    /// Interval guaranteed to contain the spectrum.
    fn spectral_bounds(&self) -> (f64, f64);

    /// Dense matrix obtained column by column; only sensible for small `dim`.
    fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![C64::new(0.0, 0.0); n];
        let mut col = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = C64::new(1.0, 0.0);
            self.apply(&e, &mut col);
            m.column_mut(j).copy_from_slice(&col);
            e[j] = C64::new(0.0, 0.0);
        }
        m
    }

    fn expectation(&self, x: &[C64]) -> f64 {
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        self.apply(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

/// Accumulates matrix elements of a Hermitian matrix.
///
/// Off-diagonal elements are added together with their conjugates, so the
/// assembled matrix is Hermitian regardless of what the caller supplies.
#[derive(Clone, Debug)]
pub struct TripletBuilder {
    dim: usize,
    entries: Vec<(u32, u32, C64)>,
}

impl TripletBuilder {
    pub fn new(dim: usize) -> Self {
        assert!(dim <= u32::MAX as usize);
        Self { dim, entries: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn add_diag(&mut self, i: usize, v: f64) {
        self.entries.push((i as u32, i as u32, C64::new(v, 0.0)));
    }

    /// Adds `v |row⟩⟨col| + h.c.`; for `row == col` only the real part counts.
    pub fn add(&mut self, row: usize, col: usize, v: C64) {
        debug_assert!(row < self.dim && col < self.dim);
        if row == col {
            self.add_diag(row, 2.0 * v.re);
        } else {
            self.entries.push((row as u32, col as u32, v));
            self.entries.push((col as u32, row as u32, v.conj()));
        }
    }

    pub fn build(self) -> SparseHermitian {
        let m = SparseMatrix::from_triplets(self.dim, self.dim, self.entries);
        SparseHermitian { m }
    }
}

/// General complex matrix in compressed sparse row form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    vals: Vec<C64>,
}

impl SparseMatrix {
    /// Sums duplicate entries and drops anything below [`DROP_TOL`].
    pub fn from_triplets(rows: usize, cols: usize, mut entries: Vec<(u32, u32, C64)>) -> Self {
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut vals = Vec::with_capacity(entries.len());
        let mut it = entries.into_iter().peekable();
        while let Some((r, c, mut v)) = it.next() {
            while let Some(&(r2, c2, v2)) = it.peek() {
                if (r2, c2) != (r, c) {
                    break;
                }
                v += v2;
                it.next();
            }
            if v.norm() >= DROP_TOL {
                row_ptr[r as usize + 1] += 1;
                col_idx.push(c);
                vals.push(v);
            }
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { rows, cols, row_ptr, col_idx, vals }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()].iter().map(|&c| c as usize).zip(self.vals[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[span.clone()].binary_search(&(j as u32)) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn mul_vec(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        let row_dot = |i: usize| {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.col_idx[k] as usize];
            }
            acc
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            if self.rows > 1 << 14 {
                y.par_iter_mut().enumerate().for_each(|(i, yi)| *yi = row_dot(i));
                return;
            }
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = row_dot(i);
        }
    }

    pub fn adjoint(&self) -> Self {
        let t = self.triplets().map(|(i, j, v)| (j as u32, i as u32, v.conj())).collect();
        Self::from_triplets(self.cols, self.rows, t)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Hermitian matrix stored in full CSR form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHermitian {
    m: SparseMatrix,
}

impl SparseHermitian {
    pub fn matrix(&self) -> &SparseMatrix {
        &self.m
    }

    pub fn nnz(&self) -> usize {
        self.m.nnz()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m.get(i, j)
    }

    /// Entries with `row <= col`.
    pub fn upper_triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.m.triplets().filter(|&(i, j, _)| i <= j)
    }

    /// Largest `|H_ij - conj(H_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.m.triplets().map(|(i, j, v)| (v - self.m.get(j, i).conj()).norm()).fold(0.0, f64::max)
    }

    pub fn dense(&self) -> DMatrix<C64> {
        self.m.to_dense()
    }

    /// Ascending eigenvalues by dense diagonalization.
    pub fn eigenvalues(&self) -> Vec<f64> {
        dense_eigenvalues(self.dense())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.m.rows).map(|i| self.m.get(i, i).re).collect()
    }
}

impl HermitianOperator for SparseHermitian {
    fn dim(&self) -> usize {
        self.m.rows
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.m.mul_vec(x, y);
    }

    fn spectral_bounds(&self) -> (f64, f64) {
        gershgorin((0..self.m.rows).map(|i| {
            let mut center = 0.0;
            let mut radius = 0.0;
            for (j, v) in self.m.row(i) {
                if i == j {
                    center = v.re;
                } else {
                    radius += v.norm();
                }
            }
            (center, radius)
        }))
    }

    fn to_dense(&self) -> DMatrix<C64> {
        self.dense()
    }
}

pub(crate) fn gershgorin(discs: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let (lo, hi) = discs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (c, r)| (lo.min(c - r), hi.max(c + r)));
    if lo > hi {
        (0.0, 0.0)
    } else {
        (lo, hi)
    }
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn dense_eigenvalues(m: DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}
