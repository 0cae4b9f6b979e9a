//! Schatten norms, row/column square functions, bracket norms and operator norms.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::LinearOperator;
use crate::scalar::C64;

/// Singular values below this fraction of the largest are treated as zero.
pub const SV_REL_ZERO: f64 = 1e-13;
/// Largest negative eigenvalue a nearly positive matrix may carry before repair fails.
pub const PSD_NEG_TOL: f64 = 1e-10;
/// Dense SVD is used up to this dimension; Lanczos above it.
pub const DENSE_OP_LIMIT: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PIndex {
    Finite(f64),
    Infinity,
}

impl PIndex {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            return Ok(PIndex::Infinity);
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::validation(format!(
                "p must lie in [1, inf], got {p}"
            )));
        }
        Ok(PIndex::Finite(p))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, PIndex::Infinity)
    }

    /// 1/p, zero at infinity.
    pub fn recip(&self) -> f64 {
        match self {
            PIndex::Finite(p) => 1.0 / p,
            PIndex::Infinity => 0.0,
        }
    }

    /// The conjugate index p' with 1/p + 1/p' = 1.
    pub fn conjugate(&self) -> PIndex {
        match self {
            PIndex::Infinity => PIndex::Finite(1.0),
            PIndex::Finite(p) if *p == 1.0 => PIndex::Infinity,
            PIndex::Finite(p) => PIndex::Finite(p / (p - 1.0)),
        }
    }

    /// Even integer value, if any.
    pub fn even(&self) -> Option<usize> {
        match self {
            PIndex::Finite(p) if p.fract() == 0.0 && (*p as usize) % 2 == 0 && *p >= 2.0 => {
                Some(*p as usize)
            }
            _ => None,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            PIndex::Finite(p) => *p,
            PIndex::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for PIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PIndex::Finite(p) => write!(f, "{p}"),
            PIndex::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for PIndex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "inf" || t == "infinity" || t == "∞" {
            return Ok(PIndex::Infinity);
        }
        let p: f64 = t
            .parse()
            .map_err(|_| Error::Parse(format!("cannot read p from '{s}'")))?;
        PIndex::new(p)
    }
}

impl Serialize for PIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PIndex::Finite(p) => s.serialize_f64(*p),
            PIndex::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::Number(n) => {
                PIndex::new(n.as_f64().unwrap_or(f64::NAN)).map_err(serde::de::Error::custom)
            }
            serde_json::Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            _ => Err(serde::de::Error::custom("p must be a number or \"inf\"")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceNormalization {
    /// tr(1) = n
    Unnormalized,
    /// tr(1) = 1
    Normalized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormedMatrix {
    pub matrix: DMatrix<C64>,
    pub normalization: TraceNormalization,
}

impl NormedMatrix {
    pub fn new(matrix: DMatrix<C64>, normalization: TraceNormalization) -> Self {
        NormedMatrix {
            matrix,
            normalization,
        }
    }

    pub fn schatten(&self, p: PIndex) -> f64 {
        schatten_norm(&self.matrix, p, self.normalization)
    }
}

pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let top = sv.first().copied().unwrap_or(0.0);
    for s in sv.iter_mut() {
        if *s < SV_REL_ZERO * top {
            *s = 0.0;
        }
    }
    sv
}

/// Combines singular values into a Schatten norm. `dim` is the size used by the normalized trace.
pub fn schatten_from_singular(
    sv: &[f64],
    p: PIndex,
    dim: usize,
    normalization: TraceNormalization,
) -> f64 {
    match p {
        PIndex::Infinity => sv.iter().copied().fold(0.0, f64::max),
        PIndex::Finite(p) => {
            let top = sv.iter().copied().fold(0.0, f64::max);
            if top == 0.0 {
                return 0.0;
            }
            // Scale by the largest value so high powers stay in range.
            let s: f64 = sv.iter().map(|x| (x / top).powf(p)).sum();
            let s = match normalization {
                TraceNormalization::Unnormalized => s,
                TraceNormalization::Normalized => s / dim.max(1) as f64,
            };
            top * s.powf(1.0 / p)
        }
    }
}

pub fn schatten_norm(m: &DMatrix<C64>, p: PIndex, normalization: TraceNormalization) -> f64 {
    let sv = singular_values(m);
    schatten_from_singular(
        &sv,
        p,
        m.nrows().min(m.ncols()).max(m.nrows()),
        normalization,
    )
}

fn hermitian_part(h: &DMatrix<C64>) -> DMatrix<C64> {
    (h + h.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &DMatrix<C64>) -> Vec<f64> {
    if h.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(hermitian_part(h))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Symmetrizes `h` and clips slightly negative eigenvalues. Fails if an eigenvalue is below
/// `-PSD_NEG_TOL · max(1, ‖h‖)`.
pub fn psd_repair(h: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if h.nrows() != h.ncols() {
        return Err(Error::validation("psd_repair needs a square matrix"));
    }
    if h.nrows() == 0 {
        return Ok(h.clone());
    }
    let eig = SymmetricEigen::new(hermitian_part(h));
    let scale = eig.eigenvalues.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let mut vals = eig.eigenvalues.clone();
    for v in vals.iter_mut() {
        if *v < 0.0 {
            if *v < -PSD_NEG_TOL * scale {
                return Err(Error::Numerical(format!(
                    "matrix is not positive semidefinite (eigenvalue {v:e})"
                )));
            }
            *v = 0.0;
        }
    }
    let d = DMatrix::from_diagonal(&vals.map(|v| C64::new(v, 0.0)));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.adjoint())
}

/// Repaired eigenvalues of a nearly positive Hermitian matrix, ascending and non-negative.
pub fn psd_eigenvalues(h: &DMatrix<C64>) -> Result<Vec<f64>> {
    let ev = hermitian_eigenvalues(h);
    let scale = ev.iter().map(|v| v.abs()).fold(1.0, f64::max);
    ev.into_iter()
        .map(|v| {
            if v < -PSD_NEG_TOL * scale {
                Err(Error::Numerical(format!(
                    "matrix is not positive semidefinite (eigenvalue {v:e})"
                )))
            } else {
                Ok(v.max(0.0))
            }
        })
        .collect()
}

/// Principal square root of a nearly positive Hermitian matrix.
pub fn psd_sqrt(h: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if h.nrows() == 0 {
        return Ok(h.clone());
    }
    let eig = SymmetricEigen::new(hermitian_part(h));
    let scale = eig.eigenvalues.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let mut vals = eig.eigenvalues.clone();
    for v in vals.iter_mut() {
        if *v < -PSD_NEG_TOL * scale {
            return Err(Error::Numerical(format!(
                "matrix is not positive semidefinite (eigenvalue {v:e})"
            )));
        }
        *v = v.max(0.0).sqrt();
    }
    let d = DMatrix::from_diagonal(&vals.map(|v| C64::new(v, 0.0)));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.adjoint())
}

/// ‖H^{1/2}‖_p for a positive H.
pub fn sqrt_psd_norm(
    h: &DMatrix<C64>,
    p: PIndex,
    normalization: TraceNormalization,
) -> Result<f64> {
    let ev = psd_eigenvalues(h)?;
    let mut sv: Vec<f64> = ev.iter().map(|v| v.sqrt()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let top = sv.first().copied().unwrap_or(0.0);
    for s in sv.iter_mut() {
        if *s < SV_REL_ZERO * top {
            *s = 0.0;
        }
    }
    Ok(schatten_from_singular(&sv, p, h.nrows(), normalization))
}

fn check_family(xs: &[DMatrix<C64>]) -> Result<(usize, usize)> {
    let first = xs
        .first()
        .ok_or_else(|| Error::validation("empty family of matrices"))?;
    let shape = (first.nrows(), first.ncols());
    if xs.iter().any(|x| (x.nrows(), x.ncols()) != shape) {
        return Err(Error::validation("matrices in a family must share a shape"));
    }
    Ok(shape)
}

/// ‖(Σ x_k x_k*)^{1/2}‖_p
pub fn row_norm(xs: &[DMatrix<C64>], p: PIndex, normalization: TraceNormalization) -> Result<f64> {
    let (r, _) = check_family(xs)?;
    let mut h = DMatrix::zeros(r, r);
    for x in xs {
        h += x * x.adjoint();
    }
    sqrt_psd_norm(&h, p, normalization)
}

/// ‖(Σ x_k* x_k)^{1/2}‖_p
pub fn col_norm(xs: &[DMatrix<C64>], p: PIndex, normalization: TraceNormalization) -> Result<f64> {
    let (_, c) = check_family(xs)?;
    let mut h = DMatrix::zeros(c, c);
    for x in xs {
        h += x.adjoint() * x;
    }
    sqrt_psd_norm(&h, p, normalization)
}

/// The matrix Σ_{α,β} b(α) G_{αβ} b(β)*, where `gram` is the block matrix [E(a(α) a(β)*)]
/// with blocks of size r and each b(α) is m×r.
pub fn bra_square(bs: &[DMatrix<C64>], gram: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let (m, r) = check_family(bs)?;
    let l = bs.len();
    if gram.nrows() != l * r || gram.ncols() != l * r {
        return Err(Error::validation(format!(
            "bra Gram has size {}x{}, expected {}",
            gram.nrows(),
            gram.ncols(),
            l * r
        )));
    }
    let mut big = DMatrix::zeros(m, l * r);
    for (a, b) in bs.iter().enumerate() {
        big.view_mut((0, a * r), (m, r)).copy_from(b);
    }
    Ok(&big * gram * big.adjoint())
}

/// The matrix Σ_{α,β} b(α)* G_{αβ} b(β), where `gram` is the block matrix [E(a(α)* a(β))]
/// with blocks of size r and each b(α) is r×m.
pub fn ket_square(bs: &[DMatrix<C64>], gram: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let (r, m) = check_family(bs)?;
    let l = bs.len();
    if gram.nrows() != l * r || gram.ncols() != l * r {
        return Err(Error::validation(format!(
            "ket Gram has size {}x{}, expected {}",
            gram.nrows(),
            gram.ncols(),
            l * r
        )));
    }
    let mut big = DMatrix::zeros(l * r, m);
    for (a, b) in bs.iter().enumerate() {
        big.view_mut((a * r, 0), (r, m)).copy_from(b);
    }
    Ok(big.adjoint() * gram * &big)
}

/// ‖Σ b(α)⟨a(α)|‖_p for matrix-valued b and a scalar-valued pairing.
pub fn bra_norm(
    bs: &[DMatrix<C64>],
    gram: &DMatrix<C64>,
    p: PIndex,
    normalization: TraceNormalization,
) -> Result<f64> {
    sqrt_psd_norm(&bra_square(bs, gram)?, p, normalization)
}

/// ‖Σ |a(α)⟩b(α)‖_p for matrix-valued b and a scalar-valued pairing.
pub fn ket_norm(
    bs: &[DMatrix<C64>],
    gram: &DMatrix<C64>,
    p: PIndex,
    normalization: TraceNormalization,
) -> Result<f64> {
    sqrt_psd_norm(&ket_square(bs, gram)?, p, normalization)
}

/// A factor F with F* F = G for a nearly positive G; F has as many rows as G has positive eigenvalues.
pub fn gram_factor(g: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = g.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(g));
    let scale = eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut rows = Vec::new();
    for (k, &v) in eig.eigenvalues.iter().enumerate() {
        if v < -PSD_NEG_TOL * scale.max(1.0) {
            return Err(Error::Numerical(format!(
                "Gram matrix is not positive semidefinite (eigenvalue {v:e})"
            )));
        }
        if v > SV_REL_ZERO * scale {
            let col = eig.eigenvectors.column(k);
            rows.push(col.adjoint() * C64::new(v.sqrt(), 0.0));
        }
    }
    if rows.is_empty() {
        return Ok(DMatrix::zeros(1, n));
    }
    let mut f = DMatrix::zeros(rows.len(), n);
    for (i, r) in rows.iter().enumerate() {
        f.row_mut(i).copy_from(r);
    }
    Ok(f)
}

/// Matrix with ‖·‖_{p'} = 1 attaining the duality ‖x‖_p = |tr(y* x)|.
pub fn duality_witness(x: &DMatrix<C64>, p: PIndex) -> DMatrix<C64> {
    let svd = x.clone().svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let s = &svd.singular_values;
    let top = s.iter().copied().fold(0.0, f64::max);
    let weights: Vec<f64> = match p {
        PIndex::Infinity => {
            let count = s.iter().filter(|v| **v >= top * (1.0 - 1e-12)).count() as f64;
            s.iter()
                .map(|v| {
                    if *v >= top * (1.0 - 1e-12) {
                        1.0 / count
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        PIndex::Finite(p) if p == 1.0 => {
            s.iter().map(|v| if *v > 0.0 { 1.0 } else { 0.0 }).collect()
        }
        PIndex::Finite(p) => {
            let norm = schatten_from_singular(
                s.as_slice(),
                PIndex::Finite(p),
                0,
                TraceNormalization::Unnormalized,
            );
            s.iter().map(|v| (v / norm).powf(p - 1.0)).collect()
        }
    };
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        weights.len(),
        weights.iter().map(|w| C64::new(*w, 0.0)),
    ));
    u * d * vt
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OpNormMethod {
    DenseSvd,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpNormEstimate {
    /// Square root of the top Ritz value of T*T; never exceeds the true norm up to rounding.
    pub value: f64,
    /// Residual ‖T*T y − θ y‖ of the top Ritz pair (zero for the dense route).
    pub residual: f64,
    pub iterations: usize,
    pub method: OpNormMethod,
}

pub fn op_norm(op: &LinearOperator) -> f64 {
    op_norm_estimate(op, 1e-8).value
}

pub fn op_norm_estimate(op: &LinearOperator, rel_tol: f64) -> OpNormEstimate {
    let n = op.dim();
    if n == 0 {
        return OpNormEstimate {
            value: 0.0,
            residual: 0.0,
            iterations: 0,
            method: OpNormMethod::DenseSvd,
        };
    }
    if n <= DENSE_OP_LIMIT {
        let sv = singular_values(&op.to_dense());
        return OpNormEstimate {
            value: sv.first().copied().unwrap_or(0.0),
            residual: 0.0,
            iterations: 0,
            method: OpNormMethod::DenseSvd,
        };
    }
    let (theta, res, it) = lanczos_top_eigenvalue(n, |x| op.apply_adjoint(&op.apply(x)), rel_tol);
    OpNormEstimate {
        value: theta.max(0.0).sqrt(),
        residual: res,
        iterations: it,
        method: OpNormMethod::Lanczos,
    }
}

/// Dense operator norm (largest singular value).
pub fn op_norm_dense(m: &DMatrix<C64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

fn start_vector(n: usize) -> Vec<C64> {
    // Fixed, non-symmetric start so no eigenvector is orthogonal to it by symmetry.
    let mut v: Vec<C64> = (0..n)
        .map(|k| {
            let t = k as f64;
            C64::new(1.0 + 0.5 * (0.7 * t + 0.3).sin(), 0.25 * (1.3 * t).cos())
        })
        .collect();
    normalize(&mut v);
    v
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [C64]) -> f64 {
    let n = norm2(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Largest eigenvalue of a positive Hermitian operator by restarted Lanczos with full
/// reorthogonalization. Returns (Ritz value, residual norm, total matvecs).
pub fn lanczos_top_eigenvalue(
    n: usize,
    apply: impl Fn(&[C64]) -> Vec<C64>,
    rel_tol: f64,
) -> (f64, f64, usize) {
    const BLOCK: usize = 60;
    const RESTARTS: usize = 40;
    let mut start = start_vector(n);
    let mut total = 0;
    let mut best = (0.0f64, f64::INFINITY);
    for _ in 0..RESTARTS {
        let k_max = BLOCK.min(n);
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(k_max);
        let mut alpha = Vec::with_capacity(k_max);
        let mut beta: Vec<f64> = Vec::with_capacity(k_max);
        basis.push(start.clone());
        let mut ritz = (0.0, f64::INFINITY, start.clone());
        for j in 0..k_max {
            let mut w = apply(&basis[j]);
            total += 1;
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            for _ in 0..2 {
                for b in basis.iter() {
                    let c = dot(b, &w);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let bnorm = norm2(&w);
            beta.push(bnorm);
            let m = alpha.len();
            let t = DMatrix::from_fn(m, m, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c {
                    beta[r]
                } else if c + 1 == r {
                    beta[c]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let (idx, theta) = eig.eigenvalues.iter().copied().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
            );
            let s = eig.eigenvectors.column(idx);
            let res = (bnorm * s[m - 1]).abs();
            let converged =
                res <= rel_tol * theta.abs().max(1e-300) || bnorm <= 1e-14 * theta.abs().max(1.0);
            if converged || j + 1 == k_max {
                let mut y = vec![C64::new(0.0, 0.0); n];
                for (i, b) in basis.iter().enumerate() {
                    let c = s[i];
                    y.iter_mut().zip(b).for_each(|(x, v)| *x += v * c);
                }
                normalize(&mut y);
                ritz = (theta, res, y);
                if converged {
                    return (theta, res, total);
                }
                break;
            }
            let mut next = w;
            next.iter_mut().for_each(|x| *x /= bnorm);
            basis.push(next);
        }
        if ritz.0 >= best.0 {
            best = (ritz.0, ritz.1);
        }
        start = ritz.2;
    }
    (best.0, best.1, total)
}
