//! Operator-valued Voiculescu and free Rosenthal harnesses, plus the square-function bounds
//! for the maps L_k, R_k, Q_k.

use nalgebra::DMatrix;

use super::engine::{block_op, FreeNorms, NormValue};
use super::khintchine::lp_sum;
use super::report::{safe_ratio, InequalityReport};
use crate::error::{Error, Result};
use crate::freeprod::{sum_to_op, FreeOp, NcPoly};
use crate::normcalc::{op_norm_dense, sqrt_psd_norm, PIndex, TraceNormalization};
use crate::scalar::C64;

const UN: TraceNormalization = TraceNormalization::Unnormalized;

fn rel_tol(x: f64) -> f64 {
    1e-9 * x.max(1e-12)
}

/// ‖(Σ E(x_k* x_k))^{1/2}‖_p.
pub fn expectation_col(engine: &FreeNorms, xs: &[FreeOp], p: PIndex) -> Result<f64> {
    let mut h: Option<DMatrix<C64>> = None;
    for x in xs {
        let e = engine.expectation(&x.adjoint().mul(x)?)?;
        h = Some(match h {
            Some(acc) => acc + e,
            None => e,
        });
    }
    match h {
        Some(h) => sqrt_psd_norm(&h, p, UN),
        None => Ok(0.0),
    }
}

/// ‖(Σ E(x_k x_k*))^{1/2}‖_p.
pub fn expectation_row(engine: &FreeNorms, xs: &[FreeOp], p: PIndex) -> Result<f64> {
    let adj: Vec<FreeOp> = xs.iter().map(|x| x.adjoint()).collect();
    expectation_col(engine, &adj, p)
}

fn sum_ops(xs: &[FreeOp]) -> Result<FreeOp> {
    let first = xs
        .first()
        .ok_or_else(|| Error::validation("empty family"))?;
    let mut acc = FreeOp::zero(first.rows(), first.cols());
    for x in xs {
        acc = acc.add(x)?;
    }
    Ok(acc)
}

/// max_ε ‖Σ ε_k x_k‖_p / ‖Σ x_k‖_p over all sign patterns with ε_1 = +1.
pub fn sign_sweep(engine: &FreeNorms, xs: &[FreeOp], p: PIndex) -> Result<(f64, bool)> {
    let n = xs.len();
    if n > 12 {
        return Err(Error::validation("sign sweep limited to 12 terms"));
    }
    let base = engine.norm(&sum_ops(xs)?, p)?;
    let mut worst: f64 = 0.0;
    let mut exact = base.exact;
    for mask in 0u32..(1 << n.saturating_sub(1)) {
        let signed: Vec<FreeOp> = xs
            .iter()
            .enumerate()
            .map(|(k, x)| {
                if k > 0 && mask & (1 << (k - 1)) != 0 {
                    x.scale(C64::new(-1.0, 0.0))
                } else {
                    x.clone()
                }
            })
            .collect();
        let v = engine.norm(&sum_ops(&signed)?, p)?;
        exact &= v.exact;
        worst = worst.max(v.value);
    }
    Ok((safe_ratio(worst, base.value), exact))
}

/// Σ_k b_k ⊗ a_k against max_k ‖a_k ⊗ b_k‖ and the two expectation square functions (p = ∞).
pub fn voiculescu_report(
    engine: &FreeNorms,
    a: &[DMatrix<C64>],
    b: &[DMatrix<C64>],
) -> Result<InequalityReport> {
    let factors = engine.factors();
    if a.len() != factors.len() || b.len() != factors.len() {
        return Err(Error::validation(
            "one element and one coefficient per factor",
        ));
    }
    let m = b[0].nrows();
    if b.iter().any(|x| x.nrows() != m || x.ncols() != m) {
        return Err(Error::validation("coefficients must share a square shape"));
    }
    let polys = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(k, (ak, bk))| NcPoly::letter(factors, k, ak.clone(), bk.clone()))
        .collect::<Result<Vec<_>>>()?;
    let lhs = engine.norm(&sum_to_op(factors, &polys)?, PIndex::Infinity)?;
    let single = a
        .iter()
        .zip(b)
        .map(|(ak, bk)| op_norm_dense(&bk.kronecker(ak)))
        .fold(0.0, f64::max);
    let mut col = DMatrix::zeros(m, m);
    let mut row = DMatrix::zeros(m, m);
    for (k, (ak, bk)) in a.iter().zip(b).enumerate() {
        let f = &factors[k];
        col += bk.adjoint() * bk * f.state(&(ak.adjoint() * ak));
        row += bk * bk.adjoint() * f.state(&(ak * ak.adjoint()));
    }
    let col = sqrt_psd_norm(&col, PIndex::Infinity, UN)?;
    let row = sqrt_psd_norm(&row, PIndex::Infinity, UN)?;
    let mut r = InequalityReport::new("voiculescu")
        .param("n", factors.len())
        .param("m", m)
        .param("p", PIndex::Infinity)
        .param("depth", engine.depth());
    r.push_term("max_single", single);
    r.push_term("col", col);
    r.push_term("row", row);
    let tol = rel_tol(lhs.value);
    r.check("single_le_lhs", single, lhs.value, tol);
    r.check("col_le_lhs", col, lhs.value, tol);
    r.check("row_le_lhs", row, lhs.value, tol);
    r.certified = lhs.exact;
    r.note("lhs is a truncated operator norm");
    r.finish(lhs.value, single + col + row);
    Ok(r)
}

/// Free Rosenthal: ‖Σ Q_k(a_k)‖_p against the p-sum of the pieces and both expectation
/// square functions.
pub fn rosenthal_report(engine: &FreeNorms, a: &[NcPoly], p: PIndex) -> Result<InequalityReport> {
    engine.check_index(p)?;
    let factors = engine.factors();
    if a.len() != factors.len() {
        return Err(Error::validation("one polynomial per factor"));
    }
    let d = a[0].degree();
    let q: Vec<NcPoly> = a.iter().enumerate().map(|(k, x)| x.both(k)).collect();
    let ops = q
        .iter()
        .map(|x| x.to_op(factors))
        .collect::<Result<Vec<_>>>()?;
    let total = sum_ops(&ops)?;
    let lhs = engine.norm(&total, p)?;
    let pieces = ops
        .iter()
        .map(|x| engine.norm(x, p))
        .collect::<Result<Vec<NormValue>>>()?;
    let pvals: Vec<f64> = pieces.iter().map(|v| v.value).collect();
    let pterm = lp_sum(&pvals, p);
    let ecol = expectation_col(engine, &ops, p)?;
    let erow = expectation_row(engine, &ops, p)?;
    let mut r = InequalityReport::new("rosenthal")
        .param("n", factors.len())
        .param("d", d)
        .param("p", p)
        .param("m", a[0].coeff_dim())
        .param("depth", engine.depth());
    r.push_term("p_sum", pterm);
    r.push_term("e_col", ecol);
    r.push_term("e_row", erow);
    let tol = rel_tol(lhs.value);
    r.check("e_col_le_lhs", ecol, lhs.value, tol);
    r.check("e_row_le_lhs", erow, lhs.value, tol);
    if p == PIndex::Finite(2.0) {
        let s: f64 = pvals.iter().map(|v| v * v).sum();
        r.check_equal("l2_orthogonality", lhs.value * lhs.value, s, 1e-10);
    }
    let mut exact = lhs.exact && pieces.iter().all(|v| v.exact);
    if p.is_infinite() && factors.len() <= 8 && !total.is_zero() {
        let (ratio, ex) = sign_sweep(engine, &ops, p)?;
        exact &= ex;
        r.diag("sign_ratio", ratio);
        if d == 1 {
            r.check("sign_ratio_le_3", ratio, 3.0, 1e-9);
        }
    }
    if q.iter().all(|x| x.is_empty()) {
        r.note("every Q_k(a_k) vanishes at this degree");
    }
    r.certified = exact;
    if !exact {
        r.note("truncated operator norms enter");
    }
    r.finish(lhs.value, pterm + ecol + erow);
    Ok(r)
}

/// Square-function bounds for L_k and R_k, the two- and four-term decompositions, sign
/// unconditionality for Q_k and the exact structural identities.
pub fn lemma_bounds_report(
    engine: &FreeNorms,
    a: &[NcPoly],
    p: PIndex,
) -> Result<InequalityReport> {
    engine.check_index(p)?;
    let factors = engine.factors();
    let n = factors.len();
    if a.len() != n {
        return Err(Error::validation("one polynomial per factor"));
    }
    let d = a[0].degree();
    let m = a[0].coeff_dim();
    let to_ops = |v: &[NcPoly]| {
        v.iter()
            .map(|x| x.to_op(factors))
            .collect::<Result<Vec<_>>>()
    };
    let base = to_ops(a)?;
    let rk = to_ops(
        &a.iter()
            .enumerate()
            .map(|(k, x)| x.right(k))
            .collect::<Vec<_>>(),
    )?;
    let lk = to_ops(
        &a.iter()
            .enumerate()
            .map(|(k, x)| x.left(k))
            .collect::<Vec<_>>(),
    )?;
    let qk = to_ops(
        &a.iter()
            .enumerate()
            .map(|(k, x)| x.both(k))
            .collect::<Vec<_>>(),
    )?;

    let mut r = InequalityReport::new("lemma_bounds")
        .param("n", n)
        .param("d", d)
        .param("p", p)
        .param("m", m)
        .param("depth", engine.depth());
    let exact = std::cell::Cell::new(true);
    let val = |v: NormValue| {
        exact.set(exact.get() && v.exact);
        v.value
    };

    // Square-function boundedness of R_k and L_k.
    let col_a = val(engine.col_norm(&base, p)?);
    let row_a = val(engine.row_norm(&base, p)?);
    for (label, ops) in [("r", &rk), ("l", &lk)] {
        let c = val(engine.col_norm(ops, p)?);
        let w = val(engine.row_norm(ops, p)?);
        r.diag(&format!("{label}_col_ratio"), safe_ratio(c, col_a));
        r.diag(&format!("{label}_row_ratio"), safe_ratio(w, row_a));
    }

    // Two-term equivalences for Σ R_k(a_k) and Σ L_k(a_k).
    let sum_r = sum_ops(&rk)?;
    let sum_l = sum_ops(&lk)?;
    let nr = val(engine.norm(&sum_r, p)?);
    let nl = val(engine.norm(&sum_l, p)?);
    let r_row = val(engine.row_norm(&rk, p)?);
    let r_ecol = expectation_col(engine, &rk, p)?;
    let l_col = val(engine.col_norm(&lk, p)?);
    let l_erow = expectation_row(engine, &lk, p)?;
    let tol_r = rel_tol(nr);
    let tol_l = rel_tol(nl);
    r.check("r_e_col_le_norm", r_ecol, nr, tol_r);
    r.check("l_e_row_le_norm", l_erow, nl, tol_l);
    if p.is_infinite() {
        r.diag("r_max_ratio", safe_ratio(nr, r_row.max(r_ecol)));
        r.diag("l_max_ratio", safe_ratio(nl, l_col.max(l_erow)));
    }
    r.diag("r_sum_ratio", safe_ratio(nr, r_row + r_ecol));
    r.diag("l_sum_ratio", safe_ratio(nl, l_col + l_erow));

    // Sign unconditionality on Q_k.
    if p.is_infinite() && n <= 8 && qk.iter().any(|x| !x.is_zero()) {
        let (ratio, ex) = sign_sweep(engine, &qk, p)?;
        exact.set(exact.get() && ex);
        r.diag("sign_ratio", ratio);
        if d == 1 {
            r.check("sign_ratio_le_3", ratio, 3.0, 1e-9);
        }
    }

    // Four-term decomposition of x = Σ_k a_k.
    let mut x = NcPoly::zero(m, d);
    for ak in a {
        x = x.add(ak)?;
    }
    let xop = x.to_op(factors)?;
    let lhs = val(engine.norm(&xop, p)?);
    let grid = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| x.right(j).left(i).to_op(factors))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let block = val(engine.norm(&block_op(&grid)?, p)?);
    let erow = expectation_row(engine, std::slice::from_ref(&xop), p)?;
    let ecol = expectation_col(engine, std::slice::from_ref(&xop), p)?;
    r.push_term("block", block);
    r.push_term("e_row", erow);
    r.push_term("e_col", ecol);
    let tol = rel_tol(lhs);
    r.check("e_row_le_lhs", erow, lhs, tol);
    r.check("e_col_le_lhs", ecol, lhs, tol);

    // Σ_k L_k(x) = x and Σ_k R_k(x) = x, term by term.
    let lsum: usize = (0..n).map(|k| x.left(k).len()).sum();
    let rsum: usize = (0..n).map(|k| x.right(k).len()).sum();
    r.check_equal("left_partition", lsum as f64, x.len() as f64, 0.0);
    r.check_equal("right_partition", rsum as f64, x.len() as f64, 0.0);
    let mut lx = NcPoly::zero(m, d);
    for k in 0..n {
        lx = lx.add(&x.left(k))?;
    }
    let diff = lx.to_op(factors)?.add(&xop.scale(C64::new(-1.0, 0.0)))?;
    let dn = diff.lp_norm_even(1, engine.capacity())?;
    r.check("left_sum_residual", dn, 0.0, 1e-12 * lhs.max(1.0));

    // φ(R_k(x)* R_k(x)) ≤ φ(x* x) after tracing the coefficients.
    let ex = engine.expectation(&xop.adjoint().mul(&xop)?)?.trace().re;
    for k in 0..n {
        let y = x.right(k).to_op(factors)?;
        let ey = engine.expectation(&y.adjoint().mul(&y)?)?.trace().re;
        r.check(&format!("expect_order_{k}"), ey, ex, 1e-12 * ex.max(1.0));
    }

    // Q_k vanishes on constants.
    let c = NcPoly::constant(DMatrix::identity(m, m));
    let qc: usize = (0..n)
        .map(|k| c.both(k).len() + c.left(k).len() + c.right(k).len())
        .sum();
    r.check("maps_vanish_on_constants", qc as f64, 0.0, 0.0);

    r.certified = exact.get();
    if !r.certified {
        r.note("truncated operator norms enter");
    }
    r.finish(lhs, block + erow + ecol);
    Ok(r)
}
