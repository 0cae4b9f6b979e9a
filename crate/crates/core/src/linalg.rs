//! Sparse complex matrices and the operator type shared by the Fock-space and free-product models.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::C64;

/// Compressed sparse row matrix with sorted, deduplicated column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![C64::new(1.0, 0.0); n],
        }
    }

    /// Builds a matrix from (row, col, value) triplets; duplicates are summed and exact zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trip: Vec<(usize, usize, C64)>) -> Self {
        trip.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(trip.len());
        let mut values: Vec<C64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(trip.len());
        for (r, c, v) in trip {
            assert!(r < nrows && c < ncols, "triplet out of range");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                rows.push(r);
                last = Some((r, c));
            }
        }
        let mut keep_idx = Vec::with_capacity(indices.len());
        let mut keep_val = Vec::with_capacity(values.len());
        for ((r, c), v) in rows.into_iter().zip(indices).zip(values) {
            if v != C64::new(0.0, 0.0) {
                indptr[r + 1] += 1;
                keep_idx.push(c);
                keep_val.push(v);
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices: keep_idx,
            values: keep_val,
        }
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let mut trip = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    trip.push((r, c, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), trip)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        self.indices[a..b]
            .iter()
            .copied()
            .zip(self.values[a..b].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        match self.indices[a..b].binary_search(&c) {
            Ok(k) => self.values[a + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// y = A x
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            y[r] = acc;
        }
    }

    /// y = A^H x
    pub fn adjoint_matvec(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for r in 0..self.nrows {
            let xr = x[r];
            if xr == C64::new(0.0, 0.0) {
                continue;
            }
            for k in self.indptr[r]..self.indptr[r + 1] {
                y[self.indices[k]] += self.values[k].conj() * xr;
            }
        }
    }

    pub fn adjoint(&self) -> CsrMatrix {
        let trip = self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect();
        CsrMatrix::from_triplets(self.ncols, self.nrows, trip)
    }

    pub fn scale(&self, s: C64) -> CsrMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        if s == C64::new(0.0, 0.0) {
            return CsrMatrix::zeros(self.nrows, self.ncols);
        }
        out
    }

    pub fn add(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let trip = self.triplets().chain(other.triplets()).collect();
        CsrMatrix::from_triplets(self.nrows, self.ncols, trip)
    }

    pub fn sub(&self, other: &CsrMatrix) -> CsrMatrix {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Sparse product using a dense accumulator per row.
    pub fn mul(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.ncols, other.nrows);
        let mut acc = vec![C64::new(0.0, 0.0); other.ncols];
        let mut mark = vec![usize::MAX; other.ncols];
        let mut touched = Vec::new();
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for r in 0..self.nrows {
            touched.clear();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = C64::new(0.0, 0.0);
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c] != C64::new(0.0, 0.0) {
                    indices.push(c);
                    values.push(acc[c]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: other.ncols,
            indptr,
            indices,
            values,
        }
    }

    /// coef ⊗ self, with row index i·n + u for coefficient row i and space row u.
    pub fn kron_left(coef: &DMatrix<C64>, m: &CsrMatrix) -> CsrMatrix {
        let mut trip = Vec::with_capacity(m.nnz() * coef.len());
        for i in 0..coef.nrows() {
            for j in 0..coef.ncols() {
                let c = coef[(i, j)];
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                for (r, col, v) in m.triplets() {
                    trip.push((i * m.nrows + r, j * m.ncols + col, c * v));
                }
            }
        }
        CsrMatrix::from_triplets(coef.nrows() * m.nrows, coef.ncols() * m.ncols, trip)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut d = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            d[(r, c)] += v;
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CsrMatrix) -> f64 {
        self.sub(other).max_abs()
    }

    /// Drops entries whose modulus is at most `tol`.
    pub fn pruned(&self, tol: f64) -> CsrMatrix {
        let trip = self.triplets().filter(|t| t.2.norm() > tol).collect();
        CsrMatrix::from_triplets(self.nrows, self.ncols, trip)
    }
}

/// A square operator on `coeff_dim`-fold amplification of a model space of dimension `space_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    pub coeff_dim: usize,
    pub space_dim: usize,
    pub matrix: CsrMatrix,
}

impl LinearOperator {
    pub fn new(coeff_dim: usize, space_dim: usize, matrix: CsrMatrix) -> Result<Self> {
        let n = coeff_dim * space_dim;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::validation(format!(
                "operator matrix is {}x{}, expected square of size {}",
                matrix.nrows(),
                matrix.ncols(),
                n
            )));
        }
        Ok(LinearOperator {
            coeff_dim,
            space_dim,
            matrix,
        })
    }

    pub fn from_space(matrix: CsrMatrix) -> Self {
        let n = matrix.nrows();
        assert_eq!(n, matrix.ncols(), "operator must be square");
        LinearOperator {
            coeff_dim: 1,
            space_dim: n,
            matrix,
        }
    }

    pub fn zero(coeff_dim: usize, space_dim: usize) -> Self {
        let n = coeff_dim * space_dim;
        LinearOperator {
            coeff_dim,
            space_dim,
            matrix: CsrMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim()];
        self.matrix.matvec(x, &mut y);
        y
    }

    pub fn apply_adjoint(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim()];
        self.matrix.adjoint_matvec(x, &mut y);
        y
    }

    pub fn adjoint(&self) -> Self {
        LinearOperator {
            coeff_dim: self.coeff_dim,
            space_dim: self.space_dim,
            matrix: self.matrix.adjoint(),
        }
    }

    fn same_shape(&self, other: &Self) {
        assert_eq!(
            (self.coeff_dim, self.space_dim),
            (other.coeff_dim, other.space_dim),
            "operators act on different spaces"
        );
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.same_shape(other);
        LinearOperator {
            coeff_dim: self.coeff_dim,
            space_dim: self.space_dim,
            matrix: self.matrix.mul(&other.matrix),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_shape(other);
        LinearOperator {
            coeff_dim: self.coeff_dim,
            space_dim: self.space_dim,
            matrix: self.matrix.add(&other.matrix),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        LinearOperator {
            coeff_dim: self.coeff_dim,
            space_dim: self.space_dim,
            matrix: self.matrix.scale(s),
        }
    }

    /// coef ⊗ self for a scalar (coeff_dim = 1) operator.
    pub fn amplify(&self, coef: &DMatrix<C64>) -> Self {
        assert_eq!(self.coeff_dim, 1, "amplify expects an unamplified operator");
        assert_eq!(coef.nrows(), coef.ncols(), "coefficient must be square");
        LinearOperator {
            coeff_dim: coef.nrows(),
            space_dim: self.space_dim,
            matrix: CsrMatrix::kron_left(coef, &self.matrix),
        }
    }

    /// Entry (i, j) block at the vacuum: ⟨e_i ⊗ Ω, T e_j ⊗ Ω⟩ with Ω the first space vector.
    pub fn vacuum_block(&self) -> DMatrix<C64> {
        let n = self.space_dim;
        DMatrix::from_fn(self.coeff_dim, self.coeff_dim, |i, j| {
            self.matrix.get(i * n, j * n)
        })
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        self.matrix.to_dense()
    }
}
