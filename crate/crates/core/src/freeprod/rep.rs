//! The free product Fock space truncated at word length D, with explicit sparse matrices.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use super::factor::FreeFactor;
use super::fock::{CompiledLetter, FreeOp, Key};
use super::poly::NcPoly;
use crate::capacity::Capacity;
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, LinearOperator};
use crate::normcalc::op_norm;
use crate::scalar::C64;

/// `[k1, b1, k2, b2, …]` with k_i ≠ k_{i+1} and b_i ≥ 1.
pub type AlternatingWord = SmallVec<[u16; 16]>;

#[derive(Debug)]
pub struct FreeProductRep {
    factors: Vec<FreeFactor>,
    depth: usize,
    basis: Vec<AlternatingWord>,
    index: FxHashMap<AlternatingWord, usize>,
    /// π_k(ξ_b) for every factor and basis index, built on first use.
    cache: OnceLock<Vec<Vec<CsrMatrix>>>,
}

/// Number of alternating words of each length 0..=depth.
pub fn word_counts(dims: &[usize], depth: usize) -> Vec<u128> {
    // ends[k] = number of words of the current length ending in factor k.
    let mut counts = vec![1u128];
    let mut ends: Vec<u128> = vec![0; dims.len()];
    for len in 1..=depth {
        let total_prev: u128 = if len == 1 { 1 } else { ends.iter().sum() };
        let next: Vec<u128> = (0..dims.len())
            .map(|k| {
                let prev = if len == 1 { 1 } else { total_prev - ends[k] };
                prev.saturating_mul(dims[k] as u128)
            })
            .collect();
        ends = next;
        counts.push(ends.iter().sum());
    }
    counts
}

impl FreeProductRep {
    pub fn new(factors: Vec<FreeFactor>, depth: usize) -> Result<Self> {
        Self::with_capacity(factors, depth, Capacity::global())
    }

    pub fn with_capacity(factors: Vec<FreeFactor>, depth: usize, cap: Capacity) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::validation(
                "a free product needs at least one factor",
            ));
        }
        if factors.len() > u16::MAX as usize || factors.iter().any(|f| f.dim() > u16::MAX as usize)
        {
            return Err(Error::validation(
                "too many factors or basis elements for 16-bit labels",
            ));
        }
        let dims: Vec<usize> = factors.iter().map(|f| f.meanzero_dim()).collect();
        let total: u128 = word_counts(&dims, depth).iter().sum();
        cap.check_basis("free product basis", total.min(usize::MAX as u128) as usize)?;
        let mut basis: Vec<AlternatingWord> = vec![AlternatingWord::new()];
        let mut level_start = 0;
        for _ in 0..depth {
            let level_end = basis.len();
            for w in level_start..level_end {
                let last = if basis[w].is_empty() {
                    None
                } else {
                    Some(basis[w][basis[w].len() - 2])
                };
                for (k, &d) in dims.iter().enumerate() {
                    if Some(k as u16) == last {
                        continue;
                    }
                    for b in 1..=d {
                        let mut nw = basis[w].clone();
                        nw.push(k as u16);
                        nw.push(b as u16);
                        basis.push(nw);
                    }
                }
            }
            level_start = level_end;
        }
        let index = basis
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok(FreeProductRep {
            factors,
            depth,
            basis,
            index,
            cache: OnceLock::new(),
        })
    }

    pub fn factors(&self) -> &[FreeFactor] {
        &self.factors
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[AlternatingWord] {
        &self.basis
    }

    pub fn index_of(&self, w: &[u16]) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// P_D x P_D for an operator on ℂ^m ⊗ H; rectangular coefficients are padded with zeros.
    /// Basis vector e_i ⊗ w has index i·dim + index(w).
    pub fn realize_op(&self, x: &FreeOp) -> Result<LinearOperator> {
        let m = x.rows().max(x.cols());
        let n = self.dim();
        let cols = x.cols();
        let trip: Vec<(usize, usize, C64)> = (0..cols * n)
            .into_par_iter()
            .flat_map_iter(|col| {
                let (j, u) = (col / n, col % n);
                let mut key = Key::with_capacity(self.basis[u].len() + 1);
                key.push(j as u16);
                key.extend_from_slice(&self.basis[u]);
                let mut out = Vec::new();
                x.apply_key(&key, C64::new(1.0, 0.0), &mut out);
                out.into_iter().filter_map(move |(nk, v)| {
                    self.index
                        .get(&nk[1..])
                        .map(|&r| (nk[0] as usize * n + r, j * n + u, v))
                })
            })
            .collect();
        LinearOperator::new(m, n, CsrMatrix::from_triplets(m * n, m * n, trip))
    }

    pub fn realize(&self, x: &NcPoly) -> Result<LinearOperator> {
        self.realize_op(&x.to_op(&self.factors)?)
    }

    fn cache(&self) -> &Vec<Vec<CsrMatrix>> {
        self.cache.get_or_init(|| {
            self.factors
                .iter()
                .enumerate()
                .map(|(k, f)| {
                    (0..f.dim())
                        .map(|b| {
                            let l = CompiledLetter::new(k, f.left_mult(f.basis_element(b)));
                            let op = FreeOp::monomial(DMatrix::identity(1, 1), vec![l.into()]);
                            self.realize_op(&op).expect("square scalar operator").matrix
                        })
                        .collect()
                })
                .collect()
        })
    }

    /// P_D π_k(a) P_D on the truncated space.
    pub fn represent(&self, k: usize, a: &DMatrix<C64>) -> Result<LinearOperator> {
        let f = self
            .factors
            .get(k)
            .ok_or_else(|| Error::validation(format!("factor index {k} out of range")))?;
        f.check_element(a)?;
        let coords = f.coords(a);
        let mats = &self.cache()[k];
        let n = self.dim();
        let mut acc = CsrMatrix::zeros(n, n);
        for (c, m) in coords.iter().zip(mats) {
            if c.norm() > 0.0 {
                acc = acc.add(&m.scale(*c));
            }
        }
        Ok(LinearOperator::from_space(acc))
    }

    /// ⟨Ω, π(a_1)⋯π(a_m) Ω⟩ computed with truncated matrices; exact when m ≤ 2D.
    pub fn vacuum_moment(&self, word: &[(usize, DMatrix<C64>)]) -> Result<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        v[0] = C64::new(1.0, 0.0);
        for (k, a) in word.iter().rev() {
            v = self.represent(*k, a)?.apply(&v);
        }
        Ok(v[0])
    }

    pub fn op_norm(&self, x: &FreeOp) -> Result<f64> {
        Ok(op_norm(&self.realize_op(x)?))
    }
}

/// (id ⊗ φ)(X): the vacuum block of an operator on ℂ^m ⊗ H.
pub fn scalar_e(x: &LinearOperator, coeff_dim: usize) -> Result<DMatrix<C64>> {
    if x.coeff_dim != coeff_dim {
        return Err(Error::validation(format!(
            "operator has coefficient size {}, expected {coeff_dim}",
            x.coeff_dim
        )));
    }
    Ok(x.vacuum_block())
}
