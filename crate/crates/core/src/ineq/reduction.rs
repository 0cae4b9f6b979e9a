//! Length reduction: ‖Σ_α w_α x_α‖_p against the bra bracket ‖Σ w_α ⟨x_α|‖_p and the ket
//! bracket ‖Σ |w_α⟩ x_α‖_p, where no w_α ends in the factor of its x_α.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::engine::{row_op, FreeNorms};
use super::random::{
    alternating_indices, gaussian_matrix, meanzero_element, random_poly_with, InstanceRng,
};
use super::report::InequalityReport;
use crate::error::{Error, Result};
use crate::freeprod::{ket_gram, CompiledLetter, FreeFactor, FreeOp, NcPoly};
use crate::normcalc::{gram_factor, PIndex};
use crate::scalar::C64;

/// One summand w ⊗ x with x a mean-zero element of factor k.
#[derive(Debug, Clone)]
pub struct ReductionItem {
    pub k: usize,
    pub w: NcPoly,
    pub x: DMatrix<C64>,
}

fn validate(factors: &[FreeFactor], items: &[ReductionItem]) -> Result<(usize, usize)> {
    let first = items
        .first()
        .ok_or_else(|| Error::validation("empty family"))?;
    let (m, d) = (first.w.coeff_dim(), first.w.degree());
    for it in items {
        if it.k >= factors.len() {
            return Err(Error::validation("factor index out of range"));
        }
        if it.w.coeff_dim() != m || it.w.degree() != d {
            return Err(Error::validation(
                "all w must share degree and coefficient size",
            ));
        }
        if !it.w.right(it.k).is_empty() {
            return Err(Error::validation(format!(
                "w ends in factor {} next to its letter",
                it.k
            )));
        }
        factors[it.k].check_element(&it.x)?;
        if factors[it.k].state(&it.x).norm() > 1e-12 * it.x.norm().max(1.0) {
            return Err(Error::validation("x must be mean-zero"));
        }
    }
    Ok((m, d))
}

/// Σ_u e_{1u} ⊗ Σ_α conj(R[u, α]) w_α with R*R = [φ(x_α x_β*)].
pub fn bra_operator(factors: &[FreeFactor], items: &[ReductionItem]) -> Result<FreeOp> {
    let t = items.len();
    let k = DMatrix::from_fn(t, t, |a, b| {
        if items[a].k == items[b].k {
            factors[items[a].k].state(&(&items[a].x * items[b].x.adjoint()))
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let r = gram_factor(&k)?;
    let ws = items
        .iter()
        .map(|it| it.w.to_op(factors))
        .collect::<Result<Vec<_>>>()?;
    let m = items[0].w.coeff_dim();
    let mut ys = Vec::with_capacity(r.nrows());
    for u in 0..r.nrows() {
        let mut y = FreeOp::zero(m, m);
        for (a, w) in ws.iter().enumerate() {
            let c = r[(u, a)].conj();
            if c.norm() > 0.0 {
                y = y.add(&w.scale(c))?;
            }
        }
        ys.push(y);
    }
    if ys.is_empty() {
        return Ok(FreeOp::zero(m, m));
    }
    row_op(&ys)
}

/// Σ_β F_β ⊗ x_β with F*F = [E(w_α* w_β)], an r × m operator.
pub fn ket_operator(
    factors: &[FreeFactor],
    items: &[ReductionItem],
    engine: &FreeNorms,
) -> Result<FreeOp> {
    let ws = items
        .iter()
        .map(|it| it.w.to_op(factors))
        .collect::<Result<Vec<_>>>()?;
    let g = ket_gram(&ws, engine.capacity())?;
    let f = gram_factor(&g)?;
    let m = items[0].w.coeff_dim();
    let mut z = FreeOp::zero(f.nrows().max(1), m);
    if f.nrows() == 0 {
        return Ok(z);
    }
    for (b, it) in items.iter().enumerate() {
        let fb = f.columns(b * m, m).into_owned();
        let letter = Arc::new(CompiledLetter::from_element(factors, it.k, &it.x)?);
        z.push(fb, vec![letter])?;
    }
    Ok(z)
}

pub fn reduction_report(
    engine: &FreeNorms,
    items: &[ReductionItem],
    p: PIndex,
) -> Result<InequalityReport> {
    engine.check_index(p)?;
    let factors = engine.factors();
    let (m, d) = validate(factors, items)?;
    let mut lhs_op = FreeOp::zero(m, m);
    for it in items {
        lhs_op = lhs_op.add(&it.w.append_letter(factors, it.k, &it.x)?.to_op(factors)?)?;
    }
    let lhs = engine.norm(&lhs_op, p)?;
    let bra = engine.norm(&bra_operator(factors, items)?, p)?;
    let ket = engine.norm(&ket_operator(factors, items, engine)?, p)?;
    let mut r = InequalityReport::new("reduction")
        .param("n", factors.len())
        .param("d", d)
        .param("p", p)
        .param("m", m)
        .param("terms", items.len())
        .param("depth", engine.depth());
    r.push_term("bra", bra.value);
    r.push_term("ket", ket.value);
    let tol = 1e-9 * lhs.value.max(1e-12);
    r.check("ket_le_sqrt5_lhs", ket.value, 5f64.sqrt() * lhs.value, tol);
    r.check(
        "bra_le_sqrt(4d+1)_lhs",
        bra.value,
        ((4 * d + 1) as f64).sqrt() * lhs.value,
        tol,
    );
    if p == PIndex::Finite(2.0) {
        r.check_equal("l2_ket_equality", ket.value, lhs.value, 1e-10);
    }
    r.certified = lhs.exact && bra.exact && ket.exact;
    if !r.certified {
        r.note("truncated operator norms enter");
    }
    r.finish(lhs.value, bra.value + ket.value);
    Ok(r)
}

/// Random family: each w has degree d and does not end in the factor of its letter.
pub fn random_reduction_items(
    rng: &mut InstanceRng,
    factors: &[FreeFactor],
    m: usize,
    d: usize,
    count: usize,
    terms_per_w: usize,
) -> Result<Vec<ReductionItem>> {
    let n = factors.len();
    if n < 2 && d > 0 {
        return Err(Error::validation(
            "positive degree needs at least two factors",
        ));
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let k = super::random::alternating_indices(rng, n, 1)[0];
        let x = meanzero_element(rng, &factors[k]);
        let w = if d == 0 {
            NcPoly::constant(gaussian_matrix(rng, m, m))
        } else {
            random_poly_with(rng, factors, m, d, terms_per_w, |r| loop {
                let idx = alternating_indices(r, n, d);
                if idx[d - 1] != k {
                    return idx;
                }
            })?
        };
        out.push(ReductionItem { k, w, x });
    }
    Ok(out)
}
