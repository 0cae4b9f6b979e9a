//! Matrix-amplified free Fock space with sparse vectors keyed by (coefficient index, word).
//!
//! Nothing is truncated here, so moments and Gram matrices computed through these vectors are
//! exact up to floating-point rounding.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use super::factor::FreeFactor;
use crate::capacity::Capacity;
use crate::error::{Error, Result};
use crate::scalar::C64;

/// `[coef, k1, b1, k2, b2, …]` with b_i ≥ 1 indexing the mean-zero basis of factor k_i.
pub type Key = SmallVec<[u16; 16]>;

const ZERO: C64 = C64::new(0.0, 0.0);

pub fn vacuum_key(coef: usize) -> Key {
    let mut k = Key::new();
    k.push(coef as u16);
    k
}

pub fn key_len(key: &Key) -> usize {
    (key.len() - 1) / 2
}

/// Left multiplication by one factor element, stored column-wise without zeros.
#[derive(Debug, Clone)]
pub struct CompiledLetter {
    pub factor: usize,
    /// columns[b] = nonzero (c, ⟨ξ_c, a ξ_b⟩)
    columns: Vec<Vec<(u16, C64)>>,
    mult: DMatrix<C64>,
}

impl CompiledLetter {
    pub fn new(factor: usize, mult: DMatrix<C64>) -> Self {
        let d = mult.nrows();
        let scale = mult.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let columns = (0..d)
            .map(|b| {
                (0..d)
                    .filter(|&cc| mult[(cc, b)].norm() > 1e-15 * scale)
                    .map(|cc| (cc as u16, mult[(cc, b)]))
                    .collect()
            })
            .collect();
        CompiledLetter {
            factor,
            columns,
            mult,
        }
    }

    pub fn from_element(factors: &[FreeFactor], k: usize, a: &DMatrix<C64>) -> Result<Self> {
        let f = factors
            .get(k)
            .ok_or_else(|| Error::validation(format!("factor index {k} out of range")))?;
        f.check_element(a)?;
        Ok(Self::new(k, f.left_mult(a)))
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.factor, self.mult.adjoint())
    }

    pub fn mult(&self) -> &DMatrix<C64> {
        &self.mult
    }

    /// Applies the letter to `val · key`, pushing the results.
    fn apply(&self, key: &[u16], val: C64, out: &mut Vec<(Key, C64)>) {
        let k = self.factor as u16;
        let (b, tail) = if key.len() >= 3 && key[1] == k {
            (key[2] as usize, &key[3..])
        } else {
            (0, &key[1..])
        };
        for &(cc, m) in &self.columns[b] {
            let mut nk = Key::with_capacity(tail.len() + 3);
            nk.push(key[0]);
            if cc != 0 {
                nk.push(k);
                nk.push(cc);
            }
            nk.extend_from_slice(tail);
            out.push((nk, val * m));
        }
    }
}

/// One term coef ⊗ π(a_1)⋯π(a_l) with a rows × cols coefficient.
#[derive(Debug, Clone)]
pub struct OpTerm {
    pub coef: DMatrix<C64>,
    pub letters: Vec<Arc<CompiledLetter>>,
}

/// A finite sum of amplified letter products, from ℂ^cols ⊗ H to ℂ^rows ⊗ H.
#[derive(Debug, Clone)]
pub struct FreeOp {
    rows: usize,
    cols: usize,
    terms: Vec<OpTerm>,
}

#[derive(Debug, Clone, Default)]
pub struct SparseVec {
    map: FxHashMap<Key, C64>,
}

impl SparseVec {
    pub fn basis(key: Key) -> Self {
        let mut map = FxHashMap::default();
        map.insert(key, C64::new(1.0, 0.0));
        SparseVec { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, key: &Key) -> C64 {
        self.map.get(key).copied().unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Key, &C64)> {
        self.map.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        let mut entries: Vec<(&Key, &C64)> = self.map.iter().collect();
        entries.sort_by(|a, b| a.0.cmp(b.0));
        entries.iter().map(|(_, v)| v.norm_sqr()).sum()
    }

    /// ⟨self, other⟩, conjugate-linear in self; summed in key order.
    pub fn inner(&self, other: &SparseVec) -> C64 {
        let (small, big, flip) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut entries: Vec<(&Key, &C64)> = small.map.iter().collect();
        entries.sort_by(|a, b| a.0.cmp(b.0));
        let mut acc = ZERO;
        for (k, v) in entries {
            if let Some(w) = big.map.get(k) {
                acc += if flip { w.conj() * v } else { v.conj() * w };
            }
        }
        acc
    }

    fn add(&mut self, key: Key, val: C64) {
        *self.map.entry(key).or_insert(ZERO) += val;
    }

    fn prune(&mut self) {
        self.map.retain(|_, v| v.norm_sqr() > 1e-300);
    }
}

impl FreeOp {
    pub fn zero(rows: usize, cols: usize) -> Self {
        FreeOp {
            rows,
            cols,
            terms: Vec::new(),
        }
    }

    pub fn scalar(coef: DMatrix<C64>) -> Self {
        FreeOp {
            rows: coef.nrows(),
            cols: coef.ncols(),
            terms: vec![OpTerm {
                coef,
                letters: Vec::new(),
            }],
        }
    }

    pub fn monomial(coef: DMatrix<C64>, letters: Vec<Arc<CompiledLetter>>) -> Self {
        FreeOp {
            rows: coef.nrows(),
            cols: coef.ncols(),
            terms: vec![OpTerm { coef, letters }],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn terms(&self) -> &[OpTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, coef: DMatrix<C64>, letters: Vec<Arc<CompiledLetter>>) -> Result<()> {
        if coef.nrows() != self.rows || coef.ncols() != self.cols {
            return Err(Error::validation(format!(
                "term coefficient is {}x{}, operator is {}x{}",
                coef.nrows(),
                coef.ncols(),
                self.rows,
                self.cols
            )));
        }
        if coef.iter().all(|z| *z == ZERO) {
            return Ok(());
        }
        self.terms.push(OpTerm { coef, letters });
        Ok(())
    }

    pub fn add(&self, other: &FreeOp) -> Result<FreeOp> {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.coef.clone(), t.letters.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> FreeOp {
        FreeOp {
            rows: self.rows,
            cols: self.cols,
            terms: self
                .terms
                .iter()
                .map(|t| OpTerm {
                    coef: &t.coef * s,
                    letters: t.letters.clone(),
                })
                .collect(),
        }
    }

    pub fn adjoint(&self) -> FreeOp {
        FreeOp {
            rows: self.cols,
            cols: self.rows,
            terms: self
                .terms
                .iter()
                .map(|t| OpTerm {
                    coef: t.coef.adjoint(),
                    letters: t
                        .letters
                        .iter()
                        .rev()
                        .map(|l| Arc::new(l.adjoint()))
                        .collect(),
                })
                .collect(),
        }
    }

    /// self ∘ other
    pub fn mul(&self, other: &FreeOp) -> Result<FreeOp> {
        if self.cols != other.rows {
            return Err(Error::validation("operator product shape mismatch"));
        }
        let mut out = FreeOp::zero(self.rows, other.cols);
        for a in &self.terms {
            for b in &other.terms {
                let mut letters = a.letters.clone();
                letters.extend(b.letters.iter().cloned());
                out.push(&a.coef * &b.coef, letters)?;
            }
        }
        Ok(out)
    }

    /// Left-multiplies every coefficient by `m` (rows change to m.nrows()).
    pub fn left_coef(&self, m: &DMatrix<C64>) -> Result<FreeOp> {
        if m.ncols() != self.rows {
            return Err(Error::validation("coefficient product shape mismatch"));
        }
        let mut out = FreeOp::zero(m.nrows(), self.cols);
        for t in &self.terms {
            out.push(m * &t.coef, t.letters.clone())?;
        }
        Ok(out)
    }

    /// Right-multiplies every coefficient by `m` (cols change to m.ncols()).
    pub fn right_coef(&self, m: &DMatrix<C64>) -> Result<FreeOp> {
        if m.nrows() != self.cols {
            return Err(Error::validation("coefficient product shape mismatch"));
        }
        let mut out = FreeOp::zero(self.rows, m.ncols());
        for t in &self.terms {
            out.push(&t.coef * m, t.letters.clone())?;
        }
        Ok(out)
    }

    /// The action on a single basis vector, before any merging of equal keys.
    pub fn apply_key(&self, key: &Key, val: C64, out: &mut Vec<(Key, C64)>) {
        let i = key[0] as usize;
        let mut cur: Vec<(Key, C64)> = Vec::new();
        let mut next: Vec<(Key, C64)> = Vec::new();
        for t in &self.terms {
            cur.clear();
            cur.push((key.clone(), val));
            for l in t.letters.iter().rev() {
                next.clear();
                for (k, v) in &cur {
                    l.apply(k, *v, &mut next);
                }
                std::mem::swap(&mut cur, &mut next);
            }
            for (k, v) in &cur {
                for r in 0..self.rows {
                    let cf = t.coef[(r, i)];
                    if cf != ZERO {
                        let mut nk = k.clone();
                        nk[0] = r as u16;
                        out.push((nk, *v * cf));
                    }
                }
            }
        }
    }

    /// Applies the operator to a sparse vector (keys must have coefficient index < cols).
    pub fn apply(&self, v: &SparseVec, cap: Capacity) -> Result<SparseVec> {
        let mut out = SparseVec::default();
        let mut buf = Vec::new();
        let mut entries: Vec<(&Key, &C64)> = v.iter().collect();
        entries.sort_by(|a, b| a.0.cmp(b.0));
        for (k, val) in entries {
            buf.clear();
            self.apply_key(k, *val, &mut buf);
            for (nk, nv) in buf.drain(..) {
                out.add(nk, nv);
            }
            if out.len() > cap.max_support {
                return Err(Error::capacity(
                    "Fock vector support",
                    out.len(),
                    cap.max_support,
                ));
            }
        }
        out.prune();
        Ok(out)
    }

    /// self (e_i ⊗ Ω)
    pub fn on_vacuum(&self, i: usize, cap: Capacity) -> Result<SparseVec> {
        self.apply(&SparseVec::basis(vacuum_key(i)), cap)
    }

    /// The coefficient-valued vacuum expectation (id ⊗ φ)(self), a rows × cols matrix.
    pub fn expectation(&self, cap: Capacity) -> Result<DMatrix<C64>> {
        let mut e = DMatrix::zeros(self.rows, self.cols);
        for j in 0..self.cols {
            let v = self.on_vacuum(j, cap)?;
            for i in 0..self.rows {
                e[(i, j)] = v.get(&vacuum_key(i));
            }
        }
        Ok(e)
    }

    /// (Tr ⊗ φ)((Z*Z)^m) obtained as Σ_i ‖Z Z* Z ⋯ (e_i ⊗ Ω)‖² with m alternating factors.
    pub fn trace_moment(&self, m: usize, cap: Capacity) -> Result<f64> {
        if m == 0 {
            return Ok(self.cols as f64);
        }
        let adj = self.adjoint();
        let parts: Vec<Result<f64>> = (0..self.cols)
            .into_par_iter()
            .map(|i| {
                let mut v = SparseVec::basis(vacuum_key(i));
                for step in 0..m {
                    v = if step % 2 == 0 {
                        self.apply(&v, cap)?
                    } else {
                        adj.apply(&v, cap)?
                    };
                    if v.is_empty() {
                        break;
                    }
                }
                Ok(v.norm_sqr())
            })
            .collect();
        let mut total = 0.0;
        for p in parts {
            total += p?;
        }
        Ok(total)
    }

    /// ‖Z‖_{2m} in L_{2m}(M ⊗ A, Tr ⊗ φ); requires a tracial state.
    pub fn lp_norm_even(&self, m: usize, cap: Capacity) -> Result<f64> {
        if m == 0 {
            return Err(Error::validation("even norm index must be positive"));
        }
        Ok(self
            .trace_moment(m, cap)?
            .max(0.0)
            .powf(1.0 / (2 * m) as f64))
    }
}

/// G[(α, i), (β, j)] = ⟨A_α (e_i ⊗ Ω), A_β (e_j ⊗ Ω)⟩ = E(A_α* A_β)[i, j] for a family sharing `rows`.
pub fn ket_gram(ops: &[FreeOp], cap: Capacity) -> Result<DMatrix<C64>> {
    let mut vecs = Vec::new();
    for op in ops {
        for i in 0..op.cols() {
            vecs.push(op.on_vacuum(i, cap)?);
        }
    }
    let n = vecs.len();
    let mut g = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let v = vecs[a].inner(&vecs[b]);
            g[(a, b)] = v;
            g[(b, a)] = v.conj();
        }
    }
    Ok(g)
}

/// G[(α, i), (β, j)] = E(A_α A_β*)[i, j], obtained from the adjoints.
pub fn bra_gram(ops: &[FreeOp], cap: Capacity) -> Result<DMatrix<C64>> {
    let adj: Vec<FreeOp> = ops.iter().map(|o| o.adjoint()).collect();
    ket_gram(&adj, cap)
}
