//! Finite-dimensional probability spaces (A, φ) realized as *-subalgebras of M_r.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normcalc::{schatten_norm, PIndex, TraceNormalization};
use crate::scalar::C64;

const FAITHFUL_TOL: f64 = 1e-12;
const GS_DROP: f64 = 1e-10;

/// Reference measures for quadrature factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// Semicircle law on [-2, 2].
    Wigner,
    /// Uniform law on [-√3, √3] (unit variance).
    Uniform,
}

impl Measure {
    /// Recurrence coefficients (a_k, b_k) of the orthonormal polynomials, k = 0..m.
    fn jacobi(&self, m: usize) -> (Vec<f64>, Vec<f64>) {
        let a = vec![0.0; m];
        let b = match self {
            Measure::Wigner => vec![1.0; m],
            Measure::Uniform => (1..=m)
                .map(|k| {
                    let k = k as f64;
                    3f64.sqrt() * k / (4.0 * k * k - 1.0).sqrt()
                })
                .collect(),
        };
        (a, b)
    }

    /// Moment ∫ t^j dμ.
    pub fn moment(&self, j: usize) -> f64 {
        if j % 2 == 1 {
            return 0.0;
        }
        match self {
            Measure::Wigner => catalan(j / 2) as f64,
            Measure::Uniform => 3f64.powi(j as i32 / 2) / (j as f64 + 1.0),
        }
    }
}

pub fn catalan(k: usize) -> u64 {
    let mut c: u64 = 1;
    for i in 0..k as u64 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FactorKind {
    /// ℂ² with the uniform state; its mean-zero unit is diag(1, −1).
    Bernoulli,
    /// ℂ^m carrying the Gauss quadrature of `measure`.
    Quadrature { measure: Measure, nodes: usize },
    /// ℂ^m with arbitrary positive weights.
    Discrete { weights: Vec<f64> },
    /// M_r with density ρ given row by row as real entries.
    Matrix { size: usize, rho: Vec<Vec<f64>> },
}

/// A factor (A_k, φ_k) together with an orthonormal basis ξ_0 = 1, ξ_1, … of L_2(A_k, φ_k).
#[derive(Debug, Clone)]
pub struct FreeFactor {
    kind: FactorKind,
    size: usize,
    diagonal: bool,
    rho: DMatrix<C64>,
    onb: Vec<DMatrix<C64>>,
    nodes: Option<Vec<f64>>,
    tracial: bool,
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn diag(v: &[f64]) -> DMatrix<C64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        v.len(),
        v.iter().map(|x| c(*x)),
    ))
}

/// Gauss nodes and weights of `measure` with m points (Golub–Welsch), plus the orthonormal
/// polynomials p_0..p_{m−1} evaluated at the nodes.
pub fn gauss_quadrature(measure: Measure, m: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
    if m == 0 {
        return Err(Error::validation("quadrature needs at least one node"));
    }
    let (a, b) = measure.jacobi(m);
    let mut j = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        j[(i, i)] = a[i];
        if i + 1 < m {
            j[(i, i + 1)] = b[i];
            j[(i + 1, i)] = b[i];
        }
    }
    let eig = SymmetricEigen::new(j);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    let mut polys = vec![vec![0.0; m]; m];
    for (col, &i) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        let s = if v[0] < 0.0 { -1.0 } else { 1.0 };
        nodes.push(eig.eigenvalues[i]);
        weights.push(v[0] * v[0]);
        for k in 0..m {
            polys[k][col] = s * v[k] / (s * v[0]);
        }
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok((nodes, weights, polys))
}

impl FreeFactor {
    pub fn bernoulli() -> Self {
        Self::discrete_with_onb(
            FactorKind::Bernoulli,
            &[0.5, 0.5],
            vec![vec![1.0, 1.0], vec![1.0, -1.0]],
            None,
        )
    }

    pub fn quadrature(measure: Measure, m: usize) -> Result<Self> {
        let (nodes, weights, polys) = gauss_quadrature(measure, m)?;
        Ok(Self::discrete_with_onb(
            FactorKind::Quadrature { measure, nodes: m },
            &weights,
            polys,
            Some(nodes),
        ))
    }

    pub fn discrete(weights: &[f64]) -> Result<Self> {
        check_weights(weights)?;
        let m = weights.len();
        let basis: Vec<DMatrix<C64>> = (0..m)
            .map(|i| {
                let mut v = vec![0.0; m];
                v[i] = 1.0;
                diag(&v)
            })
            .collect();
        let rho = diag(weights);
        let onb = gram_schmidt(&basis, &rho, m);
        Ok(FreeFactor {
            kind: FactorKind::Discrete {
                weights: weights.to_vec(),
            },
            size: m,
            diagonal: true,
            rho,
            onb,
            nodes: None,
            tracial: true,
        })
    }

    pub fn matrix(rho: &DMatrix<C64>) -> Result<Self> {
        let r = rho.nrows();
        if r == 0 || rho.ncols() != r {
            return Err(Error::validation(
                "density must be a non-empty square matrix",
            ));
        }
        let herm = (rho - rho.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm > FAITHFUL_TOL {
            return Err(Error::validation("density must be Hermitian"));
        }
        let tr: C64 = rho.trace();
        if (tr - c(1.0)).norm() > FAITHFUL_TOL {
            return Err(Error::validation(format!(
                "state is not normalized: tr ρ = {tr}"
            )));
        }
        let min = crate::normcalc::hermitian_eigenvalues(rho)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min <= FAITHFUL_TOL {
            return Err(Error::validation(format!(
                "state is not faithful: smallest eigenvalue of ρ is {min:e}"
            )));
        }
        let mut basis = vec![DMatrix::identity(r, r)];
        for i in 0..r {
            for j in 0..r {
                let mut e = DMatrix::zeros(r, r);
                e[(i, j)] = c(1.0);
                basis.push(e);
            }
        }
        let onb = gram_schmidt(&basis, rho, r * r);
        let scaled = rho * c(r as f64);
        let tracial = (scaled - DMatrix::<C64>::identity(r, r))
            .iter()
            .all(|z| z.norm() < 1e-12);
        let rows = (0..r)
            .map(|i| (0..r).map(|j| rho[(i, j)].re).collect())
            .collect();
        Ok(FreeFactor {
            kind: FactorKind::Matrix { size: r, rho: rows },
            size: r,
            diagonal: false,
            rho: rho.clone(),
            onb,
            nodes: None,
            tracial,
        })
    }

    /// Builds a factor from its serializable description.
    pub fn make(kind: &FactorKind) -> Result<Self> {
        match kind {
            FactorKind::Bernoulli => Ok(Self::bernoulli()),
            FactorKind::Quadrature { measure, nodes } => Self::quadrature(*measure, *nodes),
            FactorKind::Discrete { weights } => Self::discrete(weights),
            FactorKind::Matrix { size, rho } => {
                if rho.len() != *size || rho.iter().any(|r| r.len() != *size) {
                    return Err(Error::validation(
                        "matrix factor density has the wrong shape",
                    ));
                }
                Self::matrix(&DMatrix::from_fn(*size, *size, |i, j| c(rho[i][j])))
            }
        }
    }

    fn discrete_with_onb(
        kind: FactorKind,
        weights: &[f64],
        polys: Vec<Vec<f64>>,
        nodes: Option<Vec<f64>>,
    ) -> Self {
        let onb = polys.iter().map(|p| diag(p)).collect();
        FreeFactor {
            kind,
            size: weights.len(),
            diagonal: true,
            rho: diag(weights),
            onb,
            nodes,
            tracial: true,
        }
    }

    pub fn kind(&self) -> &FactorKind {
        &self.kind
    }

    /// Matrix size r of the ambient M_r.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Dimension of A_k as a vector space.
    pub fn dim(&self) -> usize {
        self.onb.len()
    }

    pub fn meanzero_dim(&self) -> usize {
        self.onb.len() - 1
    }

    pub fn is_tracial(&self) -> bool {
        self.tracial
    }

    pub fn density(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn nodes(&self) -> Option<&[f64]> {
        self.nodes.as_deref()
    }

    pub fn unit(&self) -> DMatrix<C64> {
        DMatrix::identity(self.size, self.size)
    }

    /// ξ_b; b = 0 is the unit.
    pub fn basis_element(&self, b: usize) -> &DMatrix<C64> {
        &self.onb[b]
    }

    /// The mean-zero orthonormal basis ξ_1, ….
    pub fn meanzero_onb(&self) -> &[DMatrix<C64>] {
        &self.onb[1..]
    }

    /// The canonical generator: diag(nodes) for quadrature factors, ξ_1 otherwise.
    pub fn generator(&self) -> DMatrix<C64> {
        match &self.nodes {
            Some(n) => diag(n),
            None => self.onb[1.min(self.onb.len() - 1)].clone(),
        }
    }

    /// Pointwise function of the generator for diagonal algebras.
    pub fn function_of_generator(&self, f: impl Fn(f64) -> f64) -> Result<DMatrix<C64>> {
        let nodes = self
            .nodes
            .as_ref()
            .ok_or_else(|| Error::validation("functional calculus needs a quadrature factor"))?;
        let v: Vec<f64> = nodes.iter().map(|x| f(*x)).collect();
        Ok(diag(&v))
    }

    /// Element with value v_i on the i-th atom of a diagonal algebra.
    pub fn diagonal_element(&self, v: &[f64]) -> Result<DMatrix<C64>> {
        if !self.diagonal || v.len() != self.size {
            return Err(Error::validation(
                "diagonal_element needs a diagonal factor of matching size",
            ));
        }
        Ok(diag(v))
    }

    pub fn state(&self, a: &DMatrix<C64>) -> C64 {
        (&self.rho * a).trace()
    }

    /// ⟨a, b⟩ = φ(a* b).
    pub fn inner(&self, a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
        self.state(&(a.adjoint() * b))
    }

    pub fn contains(&self, a: &DMatrix<C64>) -> bool {
        if a.nrows() != self.size || a.ncols() != self.size {
            return false;
        }
        if !self.diagonal {
            return true;
        }
        let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
        (0..self.size).all(|i| (0..self.size).all(|j| i == j || a[(i, j)].norm() <= 1e-14 * scale))
    }

    pub fn check_element(&self, a: &DMatrix<C64>) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(Error::validation(format!(
                "element of shape {}x{} is not in the factor {:?}",
                a.nrows(),
                a.ncols(),
                self.kind
            )))
        }
    }

    /// Coordinates c_b = ⟨ξ_b, a⟩, so a = Σ c_b ξ_b.
    pub fn coords(&self, a: &DMatrix<C64>) -> Vec<C64> {
        self.onb.iter().map(|x| self.inner(x, a)).collect()
    }

    pub fn from_coords(&self, coords: &[C64]) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.size, self.size);
        for (x, c) in self.onb.iter().zip(coords) {
            out += x * *c;
        }
        out
    }

    /// Mean-zero element with the given coordinates along ξ_1, ….
    pub fn meanzero_from(&self, coords: &[C64]) -> DMatrix<C64> {
        let mut full = vec![C64::new(0.0, 0.0)];
        full.extend_from_slice(coords);
        full.resize(self.dim(), C64::new(0.0, 0.0));
        self.from_coords(&full)
    }

    /// Matrix of left multiplication by a on L_2(A, φ): M[c, b] = ⟨ξ_c, a ξ_b⟩.
    pub fn left_mult(&self, a: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.dim();
        let prods: Vec<DMatrix<C64>> = self.onb.iter().map(|x| a * x).collect();
        DMatrix::from_fn(d, d, |cc, b| self.inner(&self.onb[cc], &prods[b]))
    }

    /// ‖a‖_p in L_p(M_s ⊗ A, Tr ⊗ φ) for an element of M_s ⊗ M_r given as an (s·r)-square
    /// matrix in block form (block (i, j) is the A-valued entry). p < ∞ needs a tracial state
    /// unless p = 2.
    pub fn amplified_norm(&self, a: &DMatrix<C64>, p: PIndex) -> Result<f64> {
        let r = self.size;
        if a.nrows() % r != 0 || a.ncols() != a.nrows() {
            return Err(Error::validation("amplified element has the wrong shape"));
        }
        let s = a.nrows() / r;
        if p.is_infinite() {
            return Ok(crate::normcalc::op_norm_dense(a));
        }
        if !self.tracial && p.as_f64() != 2.0 {
            return Err(Error::validation(
                "finite p ≠ 2 needs a tracial factor state",
            ));
        }
        let pw = 1.0 / (2.0 * p.as_f64());
        let d = density_power(&self.rho, pw);
        let mut big = DMatrix::<C64>::zeros(s * r, s * r);
        for i in 0..s {
            big.view_mut((i * r, i * r), (r, r)).copy_from(&d);
        }
        let w = &big * a * &big;
        Ok(schatten_norm(&w, p, TraceNormalization::Unnormalized))
    }

    pub fn lp_norm(&self, a: &DMatrix<C64>, p: PIndex) -> Result<f64> {
        self.amplified_norm(a, p)
    }
}

fn density_power(rho: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(rho.clone());
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|x| c(x.max(0.0).powf(t))),
    ));
    v * d * v.adjoint()
}

fn check_weights(w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::validation(
            "a discrete factor needs at least one atom",
        ));
    }
    if w.iter().any(|x| !(x.is_finite() && *x > FAITHFUL_TOL)) {
        return Err(Error::validation(
            "state is not faithful: every weight must be positive",
        ));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > FAITHFUL_TOL {
        return Err(Error::validation(format!(
            "state is not normalized: weights sum to {s}"
        )));
    }
    Ok(())
}

/// Orthonormalizes `candidates` under ⟨a, b⟩ = tr(ρ a* b), always keeping the unit first and
/// then picking the candidate with the largest residual (ties broken by order).
fn gram_schmidt(candidates: &[DMatrix<C64>], rho: &DMatrix<C64>, dim: usize) -> Vec<DMatrix<C64>> {
    let inner = |a: &DMatrix<C64>, b: &DMatrix<C64>| (rho * (a.adjoint() * b)).trace();
    let r = rho.nrows();
    let mut onb: Vec<DMatrix<C64>> = vec![DMatrix::identity(r, r)];
    let mut pool: Vec<DMatrix<C64>> = candidates.to_vec();
    while onb.len() < dim && !pool.is_empty() {
        for v in pool.iter_mut() {
            for _ in 0..2 {
                for e in &onb {
                    let proj = inner(e, v);
                    *v -= e * proj;
                }
            }
        }
        let norms: Vec<f64> = pool
            .iter()
            .map(|v| inner(v, v).re.max(0.0).sqrt())
            .collect();
        let (best, &nb) = norms.iter().enumerate().fold((0, &-1.0), |acc, (i, n)| {
            if *n > *acc.1 + 1e-12 {
                (i, n)
            } else {
                acc
            }
        });
        if nb <= GS_DROP {
            break;
        }
        let v = pool.remove(best);
        onb.push(v / c(nb));
    }
    onb
}
