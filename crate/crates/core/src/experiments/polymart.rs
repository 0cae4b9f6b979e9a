//! Random homogeneous polynomial martingales and the bound of ‖Σ dx_k‖_∞ by the larger
//! square function.

use nalgebra::DMatrix;

use super::martingale::FreeMartingale;
use super::square::square_function_norms;
use crate::error::{Error, Result};
use crate::freeprod::{FreeFactor, NcPoly};
use crate::ineq::random::{alternating_indices, gaussian_matrix, random_poly_with, InstanceRng};
use crate::ineq::{safe_ratio, FreeNorms, InequalityReport};
use crate::normcalc::PIndex;
use crate::scalar::C64;

/// Constant known for degree d, if any: C(0) = 1 and C(1) ≤ 9.
pub fn square_function_envelope(d: usize) -> Option<f64> {
    match d {
        0 => Some(1.0),
        1 => Some(9.0),
        _ => None,
    }
}

/// Homogeneous degree-d martingale over factors 0..n: dx_k is a sum of reduced words over
/// factors ≤ k each containing a letter of factor k. For d = 0 the martingale is one constant.
pub fn random_martingale(
    rng: &mut InstanceRng,
    factors: &[FreeFactor],
    m: usize,
    d: usize,
    terms: usize,
) -> Result<FreeMartingale> {
    let n = factors.len();
    if n == 0 {
        return Err(Error::validation("need at least one factor"));
    }
    if d == 0 {
        return Ok(constant_martingale(factors, gaussian_matrix(rng, m, m)));
    }
    let mut differences = Vec::new();
    let mut levels = Vec::new();
    // a reduced word of length ≥ 2 needs two distinct factors
    let first = if d >= 2 { 1 } else { 0 };
    for k in first..n {
        let p = random_poly_with(rng, factors, m, d, terms, |r| loop {
            let idx = alternating_indices(r, k + 1, d);
            if idx.contains(&k) {
                return idx;
            }
        })?;
        differences.push(p);
        levels.push(k);
    }
    if differences.is_empty() {
        return Err(Error::validation(
            "positive degree above 1 needs two factors",
        ));
    }
    Ok(FreeMartingale {
        factors: factors.to_vec(),
        differences,
        levels,
        degree: d,
    })
}

/// ‖Σ dx_k‖_∞ against max(row, col) on the truncated representation.
pub fn prop_sq1_check(mart: &FreeMartingale, depth: usize) -> Result<InequalityReport> {
    if mart.degree > 3 {
        return Err(Error::validation("degree above 3 is out of desk scale"));
    }
    mart.check_filtration()?;
    let engine = FreeNorms::new(mart.factors.clone(), depth);
    let s = square_function_norms(&engine, mart, PIndex::Infinity)?;
    let d = mart.degree;
    let mut r = InequalityReport::new("martingale_square_function")
        .param("n", mart.factors.len())
        .param("d", d)
        .param("p", PIndex::Infinity)
        .param("m", mart.coeff_dim())
        .param("depth", depth);
    r.push_term("row", s.row.value);
    r.push_term("col", s.col.value);
    let ratio = safe_ratio(s.sum.value, s.square_function());
    r.diag("ratio", ratio);
    match square_function_envelope(d) {
        Some(c) => {
            r.check("ratio_le_constant", ratio, c, 1e-9 * c);
        }
        None => {
            r.check("ratio_finite", ratio, f64::MAX, 0.0);
            r.note("no stated constant at this degree, ratio logged");
        }
    }
    r.certified = false;
    r.note("truncated operator norms enter");
    r.finish(s.sum.value, s.square_function());
    Ok(r)
}

/// The degree-0 martingale consisting of one constant.
pub fn constant_martingale(factors: &[FreeFactor], c: DMatrix<C64>) -> FreeMartingale {
    FreeMartingale {
        factors: factors.to_vec(),
        differences: vec![NcPoly::constant(c)],
        levels: vec![0],
        degree: 0,
    }
}
