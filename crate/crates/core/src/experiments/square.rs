//! Square functions of free martingales, the triangular truncation witness and the
//! matrix-norm equivalence for the three-letter sum.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::martingale::{full_sum, FreeMartingale, MartingaleSpec};
use crate::capacity::Capacity;
use crate::error::{Error, Result};
use crate::freeprod::FreeOp;
use crate::ineq::{col_op, safe_ratio, FreeNorms, InequalityReport, NormValue};
use crate::normcalc::{op_norm_dense, PIndex};
use crate::scalar::C64;

/// Lower envelope and upper envelope for ‖x_{2n}‖ / ‖a‖.
pub const MATRIX_EQUIVALENCE_ENVELOPE: f64 = 16.0;

/// ‖Σ_k dx_k‖_p together with the row and column square functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareFunctionNorms {
    pub sum: NormValue,
    pub row: NormValue,
    pub col: NormValue,
}

impl SquareFunctionNorms {
    pub fn square_function(&self) -> f64 {
        self.row.value.max(self.col.value)
    }

    pub fn k_estimate(&self) -> f64 {
        safe_ratio(self.square_function(), self.sum.value)
    }

    pub fn exact(&self) -> bool {
        self.sum.exact && self.row.exact && self.col.exact
    }
}

fn nonzero(ops: Vec<FreeOp>) -> Vec<FreeOp> {
    ops.into_iter().filter(|o| !o.is_zero()).collect()
}

/// The row square function is the column square function of the adjoints; the column form
/// has a single vacuum start per coefficient column, so both are evaluated that way.
pub fn square_function_norms(
    engine: &FreeNorms,
    mart: &FreeMartingale,
    p: PIndex,
) -> Result<SquareFunctionNorms> {
    engine.check_index(p)?;
    let ops = nonzero(mart.difference_ops()?);
    let zero = NormValue {
        value: 0.0,
        exact: true,
    };
    if ops.is_empty() {
        return Ok(SquareFunctionNorms {
            sum: zero,
            row: zero,
            col: zero,
        });
    }
    let sum = engine.norm(&mart.sum_op()?, p)?;
    let col = engine.norm(&col_op(&ops)?, p)?;
    let adj: Vec<FreeOp> = ops.iter().map(|o| o.adjoint()).collect();
    let row = engine.norm(&col_op(&adj)?, p)?;
    Ok(SquareFunctionNorms { sum, row, col })
}

/// Report with lhs = ‖Σ dx_k‖_p, terms row and col, and the K-estimate S/‖Σ dx_k‖ as a
/// diagnostic.
pub fn square_function_ratio(
    mart: &FreeMartingale,
    p: PIndex,
    depth: usize,
) -> Result<InequalityReport> {
    square_function_ratio_with(mart, p, depth, Capacity::global())
}

pub fn square_function_ratio_with(
    mart: &FreeMartingale,
    p: PIndex,
    depth: usize,
    cap: Capacity,
) -> Result<InequalityReport> {
    mart.check_filtration()?;
    let engine = FreeNorms::with_capacity(mart.factors.clone(), depth, cap);
    let s = square_function_norms(&engine, mart, p)?;
    let mut r = InequalityReport::new("square_function")
        .param("differences", mart.differences.len())
        .param("d", mart.degree)
        .param("p", p)
        .param("m", mart.coeff_dim())
        .param(
            "route",
            if p.is_infinite() {
                "representation"
            } else {
                "moments"
            },
        )
        .param("depth", depth);
    r.push_term("row", s.row.value);
    r.push_term("col", s.col.value);
    r.diag("k_estimate", s.k_estimate());
    if p == PIndex::Finite(2.0) {
        let tol = 1e-10;
        r.check_equal("l2_orthogonality_col", s.col.value, s.sum.value, tol);
        if mart.coeff_dim() == 1 {
            r.check_equal("l2_orthogonality_row", s.row.value, s.sum.value, tol);
        }
    }
    r.certified = s.exact();
    if !s.exact() {
        r.note("truncated operator norms enter");
    }
    r.finish(s.sum.value, s.square_function());
    Ok(r)
}

/// Full and strictly lower-triangular operator norms of a witness matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangularWitness {
    pub n: usize,
    pub full_norm: f64,
    pub triangular_norm: f64,
    pub ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn strict_lower(w: &DMatrix<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(w.nrows(), w.ncols(), |i, j| {
        if i > j {
            w[(i, j)]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn triangular_projection_witness(w: &DMatrix<C64>) -> Result<TriangularWitness> {
    if w.nrows() != w.ncols() {
        return Err(Error::validation("witness must be square"));
    }
    let n = w.nrows();
    let full_norm = if n == 0 { 0.0 } else { op_norm_dense(w) };
    let triangular_norm = if n == 0 {
        0.0
    } else {
        op_norm_dense(&strict_lower(w))
    };
    let (ratio, note) = if full_norm == 0.0 {
        (0.0, Some("zero witness, ratio set to 0".to_string()))
    } else {
        (triangular_norm / full_norm, None)
    };
    Ok(TriangularWitness {
        n,
        full_norm,
        triangular_norm,
        ratio,
        note,
    })
}

/// ‖Σ a_ij w_i f w_j'‖ against ‖a‖ with the declared envelope [1/16, 16].
pub fn matrix_equivalence_report(spec: &MartingaleSpec, p: PIndex) -> Result<InequalityReport> {
    let (factors, x) = full_sum(spec)?;
    let engine = FreeNorms::new(factors, spec.depth);
    let lhs = engine.poly_norm(&x, p)?;
    let a = spec.matrix();
    let rhs = op_norm_dense(&a);
    let mut r = InequalityReport::new("matrix_equivalence")
        .param("n", spec.n)
        .param("p", p)
        .param("quadrature_size", spec.quadrature_size)
        .param("depth", spec.depth);
    r.push_term("matrix_norm", rhs);
    let ratio = safe_ratio(lhs.value, rhs);
    r.check("ratio_le_envelope", ratio, MATRIX_EQUIVALENCE_ENVELOPE, 0.0);
    r.check(
        "inverse_ratio_le_envelope",
        safe_ratio(rhs, lhs.value),
        MATRIX_EQUIVALENCE_ENVELOPE,
        0.0,
    );
    r.certified = lhs.exact;
    r.note("envelope 16 is a test envelope");
    if !lhs.exact {
        r.note("lhs is a truncated operator norm");
    }
    r.finish(lhs.value, rhs);
    Ok(r)
}

/// How operator norms enter the K-estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "route")]
pub enum NormRoute {
    /// max_k (t_{k+1}/t_k)^{1/2} with t_k = (Tr ⊗ φ)((x*x)^k) for 2(k+1) ≤ pmax; a lower
    /// bound for the operator norm.
    Moments { pmax: usize },
    /// Operator norm of the compression to words of length ≤ depth.
    Representation { depth: usize },
}

impl NormRoute {
    pub fn name(&self) -> &'static str {
        match self {
            NormRoute::Moments { .. } => "moments",
            NormRoute::Representation { .. } => "representation",
        }
    }
}

/// Largest square-rooted ratio of consecutive trace moments of x*x up to order pmax.
pub fn moment_ratio_norm(x: &FreeOp, pmax: usize, cap: Capacity) -> Result<f64> {
    if pmax < 2 || pmax % 2 != 0 {
        return Err(Error::validation("pmax must be an even integer ≥ 2"));
    }
    if x.is_zero() {
        return Ok(0.0);
    }
    let mut prev = x.trace_moment(0, cap)?;
    let mut best: f64 = 0.0;
    for k in 1..=pmax / 2 {
        let t = x.trace_moment(k, cap)?;
        if prev > 0.0 {
            best = best.max((t / prev).max(0.0).sqrt());
        }
        prev = t;
    }
    Ok(best)
}

/// K-estimate of a martingale along a route, with lhs = ‖Σ dx_k‖ and terms row and col.
pub fn k_estimate_report(mart: &FreeMartingale, route: NormRoute) -> Result<InequalityReport> {
    mart.check_filtration()?;
    let cap = Capacity::global();
    let ops = nonzero(mart.difference_ops()?);
    let (sum, row, col) = if ops.is_empty() {
        (0.0, 0.0, 0.0)
    } else {
        let sum_op = mart.sum_op()?;
        let col_o = col_op(&ops)?;
        let adj: Vec<FreeOp> = ops.iter().map(|o| o.adjoint()).collect();
        let row_o = col_op(&adj)?;
        match route {
            NormRoute::Moments { pmax } => (
                moment_ratio_norm(&sum_op, pmax, cap)?,
                moment_ratio_norm(&row_o, pmax, cap)?,
                moment_ratio_norm(&col_o, pmax, cap)?,
            ),
            NormRoute::Representation { depth } => {
                let e = FreeNorms::with_capacity(mart.factors.clone(), depth, cap);
                (
                    e.norm(&sum_op, PIndex::Infinity)?.value,
                    e.norm(&row_o, PIndex::Infinity)?.value,
                    e.norm(&col_o, PIndex::Infinity)?.value,
                )
            }
        }
    };
    let mut r = InequalityReport::new("k_estimate")
        .param("differences", mart.differences.len())
        .param("d", mart.degree)
        .param("route", route.name());
    match route {
        NormRoute::Moments { pmax } => r.set_param("pmax", pmax),
        NormRoute::Representation { depth } => r.set_param("depth", depth),
    }
    r.push_term("row", row);
    r.push_term("col", col);
    let s = row.max(col);
    r.diag("k_estimate", safe_ratio(s, sum));
    r.certified = false;
    r.note("operator norms are lower bounds");
    r.finish(sum, s);
    Ok(r)
}

/// K-estimates of the three-letter martingale for each n, with the dense triangular ratio of
/// the witness alongside.
pub fn k_estimate_sweep(
    witness: impl Fn(usize) -> DMatrix<C64>,
    ns: &[usize],
    route: NormRoute,
    quadrature_size: usize,
) -> Result<Vec<InequalityReport>> {
    let depth = match route {
        NormRoute::Representation { depth } => depth,
        NormRoute::Moments { .. } => 3,
    };
    ns.iter()
        .map(|&n| {
            let a = witness(n);
            let spec = MartingaleSpec::new(&a, quadrature_size, depth)?;
            let mart = super::martingale::build_theorem_d(&spec)?;
            let mut r = k_estimate_report(&mart, route)?;
            r.name = "theorem_d".into();
            r.set_param("n", n);
            r.set_param("quadrature_size", quadrature_size);
            let t = triangular_projection_witness(&a)?;
            r.diag("triangular_ratio", t.ratio);
            r.diag("matrix_norm", t.full_norm);
            Ok(r)
        })
        .collect()
}

/// True when every entry exceeds its predecessor.
pub fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::martingale::{build_theorem_d, hilbert_witness};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn explicit_two_by_two_witness() {
        let w = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(-1.0), c(0.0)]);
        let t = triangular_projection_witness(&w).unwrap();
        assert!((t.full_norm - 1.0).abs() < 1e-12);
        assert!((t.triangular_norm - 1.0).abs() < 1e-12);
        assert!((t.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_by_one_witness_is_degenerate() {
        let t = triangular_projection_witness(&hilbert_witness(1)).unwrap();
        assert_eq!(t.ratio, 0.0);
        assert!(t.note.is_some());
    }

    #[test]
    fn single_difference_has_unit_k() {
        let spec = MartingaleSpec::new(&DMatrix::from_element(1, 1, c(0.7)), 4, 3).unwrap();
        let m = build_theorem_d(&spec).unwrap();
        for p in [PIndex::Finite(4.0), PIndex::Infinity] {
            let r = square_function_ratio(&m, p, 3).unwrap();
            assert!(
                (r.diagnostic("k_estimate").unwrap() - 1.0).abs() < 1e-10,
                "{p}"
            );
        }
    }

    #[test]
    fn l2_square_function_is_the_l2_norm() {
        let spec = MartingaleSpec::new(&hilbert_witness(3), 4, 3).unwrap();
        let m = build_theorem_d(&spec).unwrap();
        let r = square_function_ratio(&m, PIndex::Finite(2.0), 3).unwrap();
        assert!(r.passed(), "{:?}", r.failed_checks());
    }

    #[test]
    fn adjoint_swaps_row_and_col() {
        let a = DMatrix::from_fn(2, 2, |i, j| C64::new(1.0 + i as f64, j as f64 - 0.5));
        let spec = MartingaleSpec::new(&a, 4, 3).unwrap();
        let m = build_theorem_d(&spec).unwrap();
        let r = square_function_ratio(&m, PIndex::Finite(4.0), 3).unwrap();
        let s = square_function_ratio(&m.adjoint(), PIndex::Finite(4.0), 3).unwrap();
        assert!((r.term("row").unwrap() - s.term("col").unwrap()).abs() < 1e-10);
        assert!((r.term("col").unwrap() - s.term("row").unwrap()).abs() < 1e-10);
        assert!((r.lhs - s.lhs).abs() < 1e-10);
    }

    #[test]
    fn upper_triangular_ones_at_n_two() {
        let a = DMatrix::from_fn(2, 2, |i, j| if i <= j { c(1.0) } else { c(0.0) });
        let spec = MartingaleSpec::new(&a, 5, 3).unwrap();
        let m = build_theorem_d(&spec).unwrap();
        let r = square_function_ratio(&m, PIndex::Infinity, 3).unwrap();
        let k = r.diagnostic("k_estimate").unwrap();
        assert!(k >= 1.0 - 1e-9, "{k}");
        // the witness equals its upper triangle, so the triangular-vs-full ratio is 1
        assert!((1.0 / 16.0..=16.0).contains(&k), "{k}");
    }

    #[test]
    fn k_estimate_routes_agree_on_one_difference() {
        let spec = MartingaleSpec::new(&DMatrix::from_element(1, 1, c(1.0)), 4, 3).unwrap();
        let m = build_theorem_d(&spec).unwrap();
        for route in [
            NormRoute::Moments { pmax: 8 },
            NormRoute::Representation { depth: 3 },
        ] {
            let r = k_estimate_report(&m, route).unwrap();
            assert!((r.diagnostic("k_estimate").unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn moment_ratio_is_a_lower_bound() {
        let spec = MartingaleSpec::new(&hilbert_witness(2), 4, 3).unwrap();
        let (f, x) = full_sum(&spec).unwrap();
        let op = x.to_op(&f).unwrap();
        let lo = moment_ratio_norm(&op, 8, Capacity::default()).unwrap();
        let l8 = op.lp_norm_even(4, Capacity::default()).unwrap();
        assert!(lo >= l8 - 1e-12);
        assert!(moment_ratio_norm(&op, 3, Capacity::default()).is_err());
    }

    #[test]
    fn k_estimate_sweep_records_the_witness_ratio() {
        let rs =
            k_estimate_sweep(hilbert_witness, &[2, 3], NormRoute::Moments { pmax: 6 }, 4).unwrap();
        assert_eq!(rs.len(), 2);
        assert!((rs[0].diagnostic("triangular_ratio").unwrap() - 1.0).abs() < 1e-12);
        assert!(strictly_increasing(&[1.0, 2.0]) && !strictly_increasing(&[1.0, 1.0]));
    }

    #[test]
    fn matrix_equivalence_at_n_two() {
        let spec = MartingaleSpec::new(&hilbert_witness(2), 5, 3).unwrap();
        let r = matrix_equivalence_report(&spec, PIndex::Infinity).unwrap();
        assert!(r.passed(), "{:?} {}", r.failed_checks(), r.lhs);
    }
}
