//! Norms of free-product operators: exact moments for even p, truncated operator norms at ∞.

use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::capacity::Capacity;
use crate::error::{Error, Result};
use crate::freeprod::{FreeFactor, FreeOp, FreeProductRep, NcPoly};
use crate::normcalc::PIndex;
use crate::scalar::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormValue {
    pub value: f64,
    /// True for the moment route; false for a truncated operator norm (a lower bound).
    pub exact: bool,
}

pub struct FreeNorms {
    factors: Vec<FreeFactor>,
    depth: usize,
    cap: Capacity,
    rep: OnceLock<std::result::Result<FreeProductRep, Error>>,
}

impl FreeNorms {
    pub fn new(factors: Vec<FreeFactor>, depth: usize) -> Self {
        Self::with_capacity(factors, depth, Capacity::global())
    }

    pub fn with_capacity(factors: Vec<FreeFactor>, depth: usize, cap: Capacity) -> Self {
        FreeNorms {
            factors,
            depth,
            cap,
            rep: OnceLock::new(),
        }
    }

    pub fn factors(&self) -> &[FreeFactor] {
        &self.factors
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn capacity(&self) -> Capacity {
        self.cap
    }

    pub fn all_tracial(&self) -> bool {
        self.factors.iter().all(|f| f.is_tracial())
    }

    pub fn rep(&self) -> Result<&FreeProductRep> {
        self.rep
            .get_or_init(|| {
                FreeProductRep::with_capacity(self.factors.clone(), self.depth, self.cap)
            })
            .as_ref()
            .map_err(|e| e.clone())
    }

    /// Checks that p is even or ∞, and that finite p ≠ 2 only meets tracial states.
    pub fn check_index(&self, p: PIndex) -> Result<()> {
        if p.is_infinite() {
            return Ok(());
        }
        match p.even() {
            Some(2) => Ok(()),
            Some(_) if self.all_tracial() => Ok(()),
            Some(_) => Err(Error::validation(
                "finite p ≠ 2 needs tracial factor states",
            )),
            None => Err(Error::validation(format!(
                "p must be an even integer or inf, got {p}"
            ))),
        }
    }

    pub fn norm(&self, x: &FreeOp, p: PIndex) -> Result<NormValue> {
        self.check_index(p)?;
        if x.is_zero() {
            return Ok(NormValue {
                value: 0.0,
                exact: true,
            });
        }
        match p.even() {
            Some(e) => Ok(NormValue {
                value: x.lp_norm_even(e / 2, self.cap)?,
                exact: true,
            }),
            None => Ok(NormValue {
                value: self.rep()?.op_norm(x)?,
                exact: false,
            }),
        }
    }

    pub fn poly_norm(&self, x: &NcPoly, p: PIndex) -> Result<NormValue> {
        self.norm(&x.to_op(&self.factors)?, p)
    }

    /// ‖Σ_k e_{1k} ⊗ x_k‖_p = ‖(Σ x_k x_k*)^{1/2}‖_p.
    pub fn row_norm(&self, xs: &[FreeOp], p: PIndex) -> Result<NormValue> {
        self.norm(&row_op(xs)?, p)
    }

    /// ‖Σ_k e_{k1} ⊗ x_k‖_p = ‖(Σ x_k* x_k)^{1/2}‖_p.
    pub fn col_norm(&self, xs: &[FreeOp], p: PIndex) -> Result<NormValue> {
        self.norm(&col_op(xs)?, p)
    }

    /// (id ⊗ φ)(x).
    pub fn expectation(&self, x: &FreeOp) -> Result<DMatrix<C64>> {
        x.expectation(self.cap)
    }
}

fn embed(m: &DMatrix<C64>, rows: usize, cols: usize, r0: usize, c0: usize) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(rows, cols);
    out.view_mut((r0, c0), (m.nrows(), m.ncols())).copy_from(m);
    out
}

/// The block row [x_1, …, x_n] as one operator.
pub fn row_op(xs: &[FreeOp]) -> Result<FreeOp> {
    let first = xs
        .first()
        .ok_or_else(|| Error::validation("empty family"))?;
    let (r, c) = (first.rows(), first.cols());
    let n = xs.len();
    let mut out = FreeOp::zero(r, n * c);
    for (k, x) in xs.iter().enumerate() {
        if (x.rows(), x.cols()) != (r, c) {
            return Err(Error::validation("operators in a row must share a shape"));
        }
        for t in x.terms() {
            out.push(embed(&t.coef, r, n * c, 0, k * c), t.letters.clone())?;
        }
    }
    Ok(out)
}

/// The block column [x_1; …; x_n] as one operator.
pub fn col_op(xs: &[FreeOp]) -> Result<FreeOp> {
    let first = xs
        .first()
        .ok_or_else(|| Error::validation("empty family"))?;
    let (r, c) = (first.rows(), first.cols());
    let n = xs.len();
    let mut out = FreeOp::zero(n * r, c);
    for (k, x) in xs.iter().enumerate() {
        if (x.rows(), x.cols()) != (r, c) {
            return Err(Error::validation(
                "operators in a column must share a shape",
            ));
        }
        for t in x.terms() {
            out.push(embed(&t.coef, n * r, c, k * r, 0), t.letters.clone())?;
        }
    }
    Ok(out)
}

/// The block matrix Σ_{ij} e_ij ⊗ x_ij from an n×n grid of equally shaped operators.
pub fn block_op(grid: &[Vec<FreeOp>]) -> Result<FreeOp> {
    let n = grid.len();
    let first = grid
        .first()
        .and_then(|r| r.first())
        .ok_or_else(|| Error::validation("empty grid"))?;
    let (r, c) = (first.rows(), first.cols());
    let mut out = FreeOp::zero(n * r, n * c);
    for (i, row) in grid.iter().enumerate() {
        if row.len() != n {
            return Err(Error::validation("block grid must be square"));
        }
        for (j, x) in row.iter().enumerate() {
            for t in x.terms() {
                out.push(
                    embed(&t.coef, n * r, n * c, i * r, j * c),
                    t.letters.clone(),
                )?;
            }
        }
    }
    Ok(out)
}

/// φ(A*A') for reduced words given as (index, letter) sequences: the product of the letter
/// pairings when the index sequences agree, zero otherwise.
pub fn word_ket_pairing(
    factors: &[FreeFactor],
    a: &[(usize, &DMatrix<C64>)],
    b: &[(usize, &DMatrix<C64>)],
) -> C64 {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.0 != y.0) {
        return C64::new(0.0, 0.0);
    }
    a.iter()
        .zip(b)
        .map(|((k, x), (_, y))| factors[*k].inner(x, y))
        .product()
}

/// φ(C C'*) for reduced words: Π φ(c_i c_i'*) when the index sequences agree.
pub fn word_bra_pairing(
    factors: &[FreeFactor],
    a: &[(usize, &DMatrix<C64>)],
    b: &[(usize, &DMatrix<C64>)],
) -> C64 {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.0 != y.0) {
        return C64::new(0.0, 0.0);
    }
    a.iter()
        .zip(b)
        .map(|((k, x), (_, y))| factors[*k].state(&(*x * y.adjoint())))
        .product()
}
