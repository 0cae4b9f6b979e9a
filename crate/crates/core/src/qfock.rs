//! Truncated full and q-deformed Fock spaces over the letters ±1, …, ±N.
//!
//! Basis words are ordered by length and then lexicographically with the letter order
//! 1, −1, 2, −2, …; index 0 is the vacuum. Vectors are stored in the algebraic (tensor)
//! coordinates; the q-inner product enters only through [`QMetric`].

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix};

use crate::capacity::Capacity;
use crate::error::{ensure, Error, Result};
use crate::linalg::{CsrMatrix, LinearOperator};
use crate::normcalc;
use crate::scalar::C64;

pub const MAX_ABS_Q: f64 = 0.95;
/// Largest word length for which the q-Gram matrix is enumerated over permutations.
pub const MAX_GRAM_LENGTH: usize = 8;
/// Above this dimension only matrix-free application is used for norms.
pub const MATRIX_FREE_THRESHOLD: usize = 4096;

pub type Letter = i32;

#[derive(Debug, Clone, PartialEq)]
pub struct FockSpaceSpec {
    num_letters: usize,
    depth: usize,
    q: f64,
    offsets: Vec<usize>,
}

impl FockSpaceSpec {
    pub fn new(num_letters: usize, depth: usize, q: f64) -> Result<Self> {
        Self::with_capacity(num_letters, depth, q, Capacity::global())
    }

    pub fn with_capacity(num_letters: usize, depth: usize, q: f64, cap: Capacity) -> Result<Self> {
        ensure(num_letters >= 1, || "num_letters must be at least 1".into())?;
        ensure(q.is_finite() && q.abs() <= MAX_ABS_Q, || {
            format!("|q| must not exceed {MAX_ABS_Q}, got {q}")
        })?;
        let alphabet = 2 * num_letters;
        let mut offsets = Vec::with_capacity(depth + 2);
        let mut total: usize = 0;
        let mut level: usize = 1;
        for l in 0..=depth {
            offsets.push(total);
            total = total
                .checked_add(level)
                .ok_or_else(|| Error::capacity("Fock basis", usize::MAX, cap.max_basis))?;
            cap.check_basis("Fock basis", total)?;
            if l < depth {
                level = level
                    .checked_mul(alphabet)
                    .ok_or_else(|| Error::capacity("Fock basis", usize::MAX, cap.max_basis))?;
            }
        }
        offsets.push(total);
        Ok(FockSpaceSpec {
            num_letters,
            depth,
            q,
            offsets,
        })
    }

    pub fn num_letters(&self) -> usize {
        self.num_letters
    }
    pub fn depth(&self) -> usize {
        self.depth
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn alphabet(&self) -> usize {
        2 * self.num_letters
    }
    pub fn dim(&self) -> usize {
        self.offsets[self.depth + 1]
    }

    /// Index range of the words of length `len`.
    pub fn level_range(&self, len: usize) -> std::ops::Range<usize> {
        self.offsets[len]..self.offsets[len + 1]
    }

    pub fn letters(&self) -> Vec<Letter> {
        (1..=self.num_letters as i32)
            .flat_map(|k| [k, -k])
            .collect()
    }

    pub fn check_letter(&self, e: Letter) -> Result<usize> {
        let k = e.unsigned_abs() as usize;
        ensure(e != 0 && k <= self.num_letters, || {
            format!("letter {e} outside ±1..±{}", self.num_letters)
        })?;
        Ok(letter_digit(e))
    }

    pub fn word_index(&self, word: &[Letter]) -> Option<usize> {
        if word.len() > self.depth {
            return None;
        }
        let a = self.alphabet();
        let mut idx = 0usize;
        for &e in word {
            let k = e.unsigned_abs() as usize;
            if e == 0 || k > self.num_letters {
                return None;
            }
            idx = idx * a + letter_digit(e);
        }
        Some(self.offsets[word.len()] + idx)
    }

    fn digits_of(&self, index: usize, out: &mut Vec<usize>) {
        let len = (0..=self.depth)
            .rfind(|&l| self.offsets[l] <= index)
            .unwrap();
        let mut rem = index - self.offsets[len];
        out.clear();
        out.resize(len, 0);
        let a = self.alphabet();
        for pos in (0..len).rev() {
            out[pos] = rem % a;
            rem /= a;
        }
    }

    fn digits_index(&self, digits: &[usize]) -> usize {
        let a = self.alphabet();
        self.offsets[digits.len()] + digits.iter().fold(0usize, |acc, &d| acc * a + d)
    }

    pub fn word_at(&self, index: usize) -> Vec<Letter> {
        let mut d = Vec::new();
        self.digits_of(index, &mut d);
        d.into_iter().map(digit_letter).collect()
    }

    pub fn basis(&self) -> Vec<Vec<Letter>> {
        (0..self.dim()).map(|i| self.word_at(i)).collect()
    }
}

pub fn letter_digit(e: Letter) -> usize {
    let k = e.unsigned_abs() as usize - 1;
    if e > 0 {
        2 * k
    } else {
        2 * k + 1
    }
}

pub fn digit_letter(d: usize) -> Letter {
    let k = (d / 2 + 1) as i32;
    if d % 2 == 0 {
        k
    } else {
        -k
    }
}

fn qpow(q: f64, k: usize) -> f64 {
    q.powi(k as i32)
}

/// ℓ(e) v: prepends e; the top level is sent to zero.
pub fn apply_creation(spec: &FockSpaceSpec, e: Letter, v: &[C64]) -> Result<Vec<C64>> {
    let d = spec.check_letter(e)?;
    let mut out = vec![C64::new(0.0, 0.0); spec.dim()];
    let a = spec.alphabet();
    for len in 0..spec.depth {
        let r = spec.level_range(len);
        let base = spec.offsets[len + 1] + d * a.pow(len as u32);
        for (k, idx) in r.enumerate() {
            out[base + k] = v[idx];
        }
    }
    Ok(out)
}

/// ℓ_q*(e) v: removes e from each position k (0-based) with weight q^k.
pub fn apply_annihilation(spec: &FockSpaceSpec, e: Letter, v: &[C64]) -> Result<Vec<C64>> {
    let d = spec.check_letter(e)?;
    let mut out = vec![C64::new(0.0, 0.0); spec.dim()];
    let mut digits = Vec::new();
    let mut rest = Vec::new();
    for idx in 1..spec.dim() {
        if v[idx] == C64::new(0.0, 0.0) {
            continue;
        }
        spec.digits_of(idx, &mut digits);
        for (pos, &x) in digits.iter().enumerate() {
            if x != d {
                continue;
            }
            let w = qpow(spec.q, pos);
            if w == 0.0 {
                continue;
            }
            rest.clear();
            rest.extend_from_slice(&digits[..pos]);
            rest.extend_from_slice(&digits[pos + 1..]);
            out[spec.digits_index(&rest)] += v[idx] * w;
        }
    }
    Ok(out)
}

pub fn creation(spec: &FockSpaceSpec, e: Letter) -> Result<LinearOperator> {
    let d = spec.check_letter(e)?;
    let a = spec.alphabet();
    let mut trip = Vec::new();
    for len in 0..spec.depth {
        let base = spec.offsets[len + 1] + d * a.pow(len as u32);
        for (k, idx) in spec.level_range(len).enumerate() {
            trip.push((base + k, idx, C64::new(1.0, 0.0)));
        }
    }
    let n = spec.dim();
    Ok(LinearOperator::from_space(CsrMatrix::from_triplets(
        n, n, trip,
    )))
}

pub fn annihilation(spec: &FockSpaceSpec, e: Letter) -> Result<LinearOperator> {
    let d = spec.check_letter(e)?;
    let mut trip = Vec::new();
    let mut digits = Vec::new();
    let mut rest = Vec::new();
    for idx in 1..spec.dim() {
        spec.digits_of(idx, &mut digits);
        for (pos, &x) in digits.iter().enumerate() {
            if x != d {
                continue;
            }
            let w = qpow(spec.q, pos);
            if w == 0.0 {
                continue;
            }
            rest.clear();
            rest.extend_from_slice(&digits[..pos]);
            rest.extend_from_slice(&digits[pos + 1..]);
            trip.push((spec.digits_index(&rest), idx, C64::new(w, 0.0)));
        }
    }
    let n = spec.dim();
    Ok(LinearOperator::from_space(CsrMatrix::from_triplets(
        n, n, trip,
    )))
}

/// g_k = λ ℓ_q(e_k) + μ ℓ_q*(e_{−k}).
pub fn generalized_circular(
    spec: &FockSpaceSpec,
    k: usize,
    lambda: f64,
    mu: f64,
) -> Result<LinearOperator> {
    ensure(k >= 1 && k <= spec.num_letters, || {
        format!("circular index {k} out of range")
    })?;
    ensure(lambda > 0.0 && mu > 0.0, || {
        "λ and μ must be positive".into()
    })?;
    let k = k as i32;
    Ok(creation(spec, k)?
        .scale(C64::new(lambda, 0.0))
        .add(&annihilation(spec, -k)?.scale(C64::new(mu, 0.0))))
}

/// g_k* = λ ℓ_q*(e_k) + μ ℓ_q(e_{−k}), the adjoint for the q-inner product.
pub fn generalized_circular_adjoint(
    spec: &FockSpaceSpec,
    k: usize,
    lambda: f64,
    mu: f64,
) -> Result<LinearOperator> {
    ensure(k >= 1 && k <= spec.num_letters, || {
        format!("circular index {k} out of range")
    })?;
    let k = k as i32;
    Ok(annihilation(spec, k)?
        .scale(C64::new(lambda, 0.0))
        .add(&creation(spec, -k)?.scale(C64::new(mu, 0.0))))
}

/// s = ℓ_q(e) + ℓ_q*(e); for q = 0 a standard semicircular element.
pub fn semicircular(spec: &FockSpaceSpec, e: Letter) -> Result<LinearOperator> {
    Ok(creation(spec, e)?.add(&annihilation(spec, e)?))
}

/// ⟨Ω, T Ω⟩ (the Gram weight of the vacuum is 1).
pub fn vacuum_state(op: &LinearOperator) -> C64 {
    op.matrix.get(0, 0)
}

/// Smallest depth at which vacuum moments of a product of `num_factors` creation/annihilation
/// terms agree with the untruncated space.
pub fn minimal_safe_depth(num_factors: usize) -> usize {
    num_factors.div_ceil(2)
}

fn inversions(perm: &[usize]) -> usize {
    let mut c = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                c += 1;
            }
        }
    }
    c
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    heap_permute(n, &mut p, &mut out);
    out
}

fn heap_permute(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(p.clone());
        return;
    }
    for i in 0..k {
        heap_permute(k - 1, p, out);
        if k % 2 == 0 {
            p.swap(i, k - 1);
        } else {
            p.swap(0, k - 1);
        }
    }
}

/// q-Gram matrix ⟨u, v⟩_q = Σ_π q^{inv π} Π_k δ(u_k = v_{π(k)}) on all words of length n,
/// enumerated over permutations. Rows follow the basis order of that level.
pub fn q_gram(num_letters: usize, n: usize, q: f64) -> Result<DMatrix<f64>> {
    ensure(n <= MAX_GRAM_LENGTH, || {
        format!("q-Gram enumeration limited to n ≤ {MAX_GRAM_LENGTH}")
    })?;
    let spec = FockSpaceSpec::new(num_letters, n, q)?;
    let r = spec.level_range(n);
    Capacity::global().check_basis("dense q-Gram", r.len() * r.len())?;
    let mut g = DMatrix::zeros(r.len(), r.len());
    let perms = permutations(n);
    let weights: Vec<f64> = perms.iter().map(|p| qpow(q, inversions(p))).collect();
    let mut u = Vec::new();
    let mut v = vec![0usize; n];
    for (i, idx) in r.clone().enumerate() {
        spec.digits_of(idx, &mut u);
        for (perm, w) in perms.iter().zip(&weights) {
            if *w == 0.0 {
                continue;
            }
            for k in 0..n {
                v[perm[k]] = u[k];
            }
            let j = spec.digits_index(&v) - r.start;
            g[(i, j)] += w;
        }
    }
    Ok(g)
}

/// Words of one level grouped by letter content; the q-Gram matrix is block diagonal over these.
fn multiset_blocks(spec: &FockSpaceSpec, len: usize) -> Vec<Vec<usize>> {
    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    let mut d = Vec::new();
    for idx in spec.level_range(len) {
        spec.digits_of(idx, &mut d);
        let mut key = d.clone();
        key.sort_unstable();
        groups.entry(key).or_default().push(idx);
    }
    groups.into_values().collect()
}

fn block_gram(
    spec: &FockSpaceSpec,
    words: &[usize],
    perms: &[Vec<usize>],
    weights: &[f64],
) -> DMatrix<f64> {
    let pos: BTreeMap<usize, usize> = words.iter().enumerate().map(|(i, &w)| (w, i)).collect();
    let m = words.len();
    let mut g = DMatrix::zeros(m, m);
    let mut u = Vec::new();
    let mut v = Vec::new();
    for (i, &w) in words.iter().enumerate() {
        spec.digits_of(w, &mut u);
        v.clear();
        v.resize(u.len(), 0);
        for (perm, wt) in perms.iter().zip(weights) {
            if *wt == 0.0 {
                continue;
            }
            for k in 0..u.len() {
                v[perm[k]] = u[k];
            }
            g[(i, pos[&spec.digits_index(&v)])] += wt;
        }
    }
    g
}

/// The q-inner product on the truncated space in factored form G = L Lᵀ, assembled from
/// Cholesky factors of the letter-content blocks.
#[derive(Debug, Clone)]
pub struct QMetric {
    spec: FockSpaceSpec,
    gram: CsrMatrix,
    chol: CsrMatrix,
    chol_inv: CsrMatrix,
    min_eigenvalue: f64,
}

impl QMetric {
    pub fn new(spec: &FockSpaceSpec) -> Result<Self> {
        ensure(spec.depth <= MAX_GRAM_LENGTH, || {
            format!("q-metric needs depth ≤ {MAX_GRAM_LENGTH}")
        })?;
        let mut g_trip = Vec::new();
        let mut l_trip = Vec::new();
        let mut li_trip = Vec::new();
        let mut min_eig = f64::INFINITY;
        for len in 0..=spec.depth {
            let perms = permutations(len);
            let weights: Vec<f64> = perms.iter().map(|p| qpow(spec.q, inversions(p))).collect();
            for words in multiset_blocks(spec, len) {
                let g = block_gram(spec, &words, &perms, &weights);
                let ev = normcalc::hermitian_eigenvalues(&g.map(|x| C64::new(x, 0.0)));
                min_eig = min_eig.min(ev[0]);
                let chol = Cholesky::new(g.clone()).ok_or_else(|| {
                    Error::Numerical("q-Gram block is not positive definite".into())
                })?;
                let l = chol.l();
                let m = words.len();
                let li = l
                    .clone()
                    .solve_lower_triangular(&DMatrix::identity(m, m))
                    .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
                for i in 0..m {
                    for j in 0..m {
                        if g[(i, j)] != 0.0 {
                            g_trip.push((words[i], words[j], C64::new(g[(i, j)], 0.0)));
                        }
                        if l[(i, j)] != 0.0 {
                            l_trip.push((words[i], words[j], C64::new(l[(i, j)], 0.0)));
                        }
                        if li[(i, j)] != 0.0 {
                            li_trip.push((words[i], words[j], C64::new(li[(i, j)], 0.0)));
                        }
                    }
                }
            }
        }
        let n = spec.dim();
        Ok(QMetric {
            spec: spec.clone(),
            gram: CsrMatrix::from_triplets(n, n, g_trip),
            chol: CsrMatrix::from_triplets(n, n, l_trip),
            chol_inv: CsrMatrix::from_triplets(n, n, li_trip),
            min_eigenvalue: min_eig,
        })
    }

    pub fn spec(&self) -> &FockSpaceSpec {
        &self.spec
    }

    pub fn gram(&self) -> &CsrMatrix {
        &self.gram
    }

    /// Smallest eigenvalue over all letter-content blocks of the Gram matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    fn amplified(&self, m: &CsrMatrix, coeff_dim: usize) -> CsrMatrix {
        if coeff_dim == 1 {
            m.clone()
        } else {
            CsrMatrix::kron_left(&DMatrix::identity(coeff_dim, coeff_dim), m)
        }
    }

    /// Lᵀ T L⁻ᵀ: the operator written in a q-orthonormal basis. Its Euclidean norms are the q-norms of T.
    pub fn orthonormal_form(&self, op: &LinearOperator) -> Result<LinearOperator> {
        ensure(op.space_dim == self.spec.dim(), || {
            "operator does not act on this Fock space".into()
        })?;
        let lt = self.amplified(&self.chol.adjoint(), op.coeff_dim);
        let lit = self.amplified(&self.chol_inv.adjoint(), op.coeff_dim);
        let m = lt.mul(&op.matrix).mul(&lit);
        LinearOperator::new(op.coeff_dim, op.space_dim, m.pruned(1e-15 * m.max_abs()))
    }

    /// Operator norm with respect to the q-inner product.
    pub fn q_norm(&self, op: &LinearOperator) -> Result<f64> {
        Ok(normcalc::op_norm(&self.orthonormal_form(op)?))
    }

    /// The q-adjoint G⁻¹ T† G.
    pub fn q_adjoint(&self, op: &LinearOperator) -> Result<LinearOperator> {
        let l = self.amplified(&self.chol, op.coeff_dim);
        let lt = self.amplified(&self.chol.adjoint(), op.coeff_dim);
        let li = self.amplified(&self.chol_inv, op.coeff_dim);
        let lit = self.amplified(&self.chol_inv.adjoint(), op.coeff_dim);
        let m = lit.mul(&li).mul(&op.matrix.adjoint()).mul(&l).mul(&lt);
        LinearOperator::new(op.coeff_dim, op.space_dim, m.pruned(1e-15 * m.max_abs()))
    }

    /// max |G ℓ_q*(e) − ℓ_q(e)† G| over the entries.
    pub fn adjointness_defect(&self, e: Letter) -> Result<f64> {
        let a = annihilation(&self.spec, e)?;
        let c = creation(&self.spec, e)?;
        let lhs = self.gram.mul(&a.matrix);
        let rhs = c.matrix.adjoint().mul(&self.gram);
        Ok(lhs.max_abs_diff(&rhs))
    }
}

/// Σ_e ℓ_q(e) ℓ_q*(e) over the given letters.
pub fn row_sum_operator(spec: &FockSpaceSpec, letters: &[Letter]) -> Result<LinearOperator> {
    let n = spec.dim();
    let mut acc = LinearOperator::zero(1, n);
    for &e in letters {
        acc = acc.add(&creation(spec, e)?.mul(&annihilation(spec, e)?));
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfTestResult {
    pub num_letters: usize,
    pub depth: usize,
    pub q: f64,
    pub max_adjointness_defect: f64,
    pub min_gram_eigenvalue: f64,
}

impl SelfTestResult {
    pub fn passed(&self) -> bool {
        self.max_adjointness_defect < 1e-12 && self.min_gram_eigenvalue >= -1e-10
    }
}

/// Adjointness of creation and q-annihilation plus positivity of the q-Gram matrix.
pub fn self_test(num_letters: usize, depth: usize, q: f64) -> Result<SelfTestResult> {
    let spec = FockSpaceSpec::new(num_letters, depth, q)?;
    let metric = QMetric::new(&spec)?;
    let mut defect: f64 = 0.0;
    for e in spec.letters() {
        defect = defect.max(metric.adjointness_defect(e)?);
    }
    Ok(SelfTestResult {
        num_letters,
        depth,
        q,
        max_adjointness_defect: defect,
        min_gram_eigenvalue: metric.min_eigenvalue(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_order_and_size() {
        let spec = FockSpaceSpec::new(1, 1, 0.0).unwrap();
        assert_eq!(spec.basis(), vec![vec![], vec![1], vec![-1]]);
        let spec = FockSpaceSpec::new(2, 3, 0.0).unwrap();
        assert_eq!(spec.dim(), 1 + 4 + 16 + 64);
        for i in 0..spec.dim() {
            assert_eq!(spec.word_index(&spec.word_at(i)), Some(i));
        }
    }

    #[test]
    fn q_bound_enforced() {
        assert!(FockSpaceSpec::new(1, 2, 0.96).is_err());
        assert!(FockSpaceSpec::new(1, 2, -0.95).is_ok());
    }

    #[test]
    fn capacity_error_for_huge_space() {
        let cap = Capacity::uniform(1000);
        let err = FockSpaceSpec::with_capacity(3, 6, 0.0, cap).unwrap_err();
        assert!(err.is_capacity());
    }

    #[test]
    fn free_annihilation_removes_first_letter_only() {
        let spec = FockSpaceSpec::new(2, 3, 0.0).unwrap();
        let a = annihilation(&spec, 1).unwrap();
        let w = spec.word_index(&[1, 2, 1]).unwrap();
        let target = spec.word_index(&[2, 1]).unwrap();
        assert_eq!(a.matrix.get(target, w), C64::new(1.0, 0.0));
        let w2 = spec.word_index(&[2, 1]).unwrap();
        let col: Vec<_> = a.matrix.triplets().filter(|t| t.1 == w2).collect();
        assert!(col.is_empty());
    }

    #[test]
    fn q_annihilation_weights_positions() {
        let spec = FockSpaceSpec::new(2, 3, 0.5).unwrap();
        let a = annihilation(&spec, 1).unwrap();
        let w = spec.word_index(&[2, 1, 1]).unwrap();
        let t = spec.word_index(&[2, 1]).unwrap();
        // positions 1 and 2 both give [2, 1]: 0.5 + 0.25
        assert!((a.matrix.get(t, w).re - 0.75).abs() < 1e-15);
    }

    #[test]
    fn matrix_free_apply_matches_matrices() {
        let spec = FockSpaceSpec::new(2, 3, -0.3).unwrap();
        let v: Vec<C64> = (0..spec.dim())
            .map(|k| C64::new((k as f64).sin(), (k as f64 * 0.3).cos()))
            .collect();
        for e in spec.letters() {
            let c1 = apply_creation(&spec, e, &v).unwrap();
            let c2 = creation(&spec, e).unwrap().apply(&v);
            let a1 = apply_annihilation(&spec, e, &v).unwrap();
            let a2 = annihilation(&spec, e).unwrap().apply(&v);
            for k in 0..spec.dim() {
                assert!((c1[k] - c2[k]).norm() < 1e-14);
                assert!((a1[k] - a2[k]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn gram_of_two_letter_words() {
        let g = q_gram(1, 2, 0.5).unwrap();
        let spec = FockSpaceSpec::new(1, 2, 0.5).unwrap();
        let base = spec.level_range(2).start;
        let i = spec.word_index(&[1, -1]).unwrap() - base;
        let j = spec.word_index(&[-1, 1]).unwrap() - base;
        let k = spec.word_index(&[1, 1]).unwrap() - base;
        assert_eq!(g[(i, i)], 1.0);
        assert_eq!(g[(i, j)], 0.5);
        assert_eq!(g[(k, k)], 1.5);
    }

    #[test]
    fn metric_matches_enumerated_gram() {
        let spec = FockSpaceSpec::new(2, 3, 0.7).unwrap();
        let metric = QMetric::new(&spec).unwrap();
        let g3 = q_gram(2, 3, 0.7).unwrap();
        let r = spec.level_range(3);
        for (i, a) in r.clone().enumerate() {
            for (j, b) in r.clone().enumerate() {
                assert!((metric.gram().get(a, b).re - g3[(i, j)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn semicircle_moments_are_catalan() {
        let spec = FockSpaceSpec::new(1, 6, 0.0).unwrap();
        let s = semicircular(&spec, 1).unwrap();
        let mut v = vec![C64::new(0.0, 0.0); spec.dim()];
        v[0] = C64::new(1.0, 0.0);
        let catalan = [1.0, 1.0, 2.0, 5.0, 14.0, 42.0, 132.0];
        let mut cur = v.clone();
        for k in 1..=12 {
            cur = s.apply(&cur);
            let m = cur[0].re;
            if k % 2 == 1 {
                assert_eq!(m, 0.0);
            } else {
                assert_eq!(m, catalan[k / 2]);
            }
        }
    }

    #[test]
    fn circular_vacuum_identity_example() {
        let spec = FockSpaceSpec::new(2, 2, 0.0).unwrap();
        let g = generalized_circular(&spec, 1, 2.0, 0.5).unwrap();
        let gs = generalized_circular_adjoint(&spec, 1, 2.0, 0.5).unwrap();
        assert!((vacuum_state(&g.mul(&gs)).re - 0.25).abs() < 1e-15);
        assert!((vacuum_state(&gs.mul(&g)).re - 4.0).abs() < 1e-15);
        let mut om = vec![C64::new(0.0, 0.0); spec.dim()];
        om[0] = C64::new(1.0, 0.0);
        let out = gs.apply(&om);
        let idx = spec.word_index(&[-1]).unwrap();
        assert_eq!(out[idx], C64::new(0.5, 0.0));
    }

    #[test]
    fn free_row_sum_is_projection() {
        let spec = FockSpaceSpec::new(2, 3, 0.0).unwrap();
        let t = row_sum_operator(&spec, &spec.letters()).unwrap();
        assert!((normcalc::op_norm(&t) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn q_adjoint_of_creation_is_annihilation() {
        let spec = FockSpaceSpec::new(1, 3, 0.6).unwrap();
        let metric = QMetric::new(&spec).unwrap();
        let c = creation(&spec, 1).unwrap();
        let a = annihilation(&spec, 1).unwrap();
        let adj = metric.q_adjoint(&c).unwrap();
        assert!(adj.matrix.max_abs_diff(&a.matrix) < 1e-12);
    }

    #[test]
    fn safe_depth() {
        assert_eq!(minimal_safe_depth(4), 2);
        assert_eq!(minimal_safe_depth(5), 3);
    }
}
