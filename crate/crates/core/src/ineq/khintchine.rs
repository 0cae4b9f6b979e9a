//! Khintchine-type decomposition of a homogeneous polynomial: split-position brackets (the
//! first family) and middle-letter p-sums (the second family).

use nalgebra::DMatrix;

use super::brackets::{middle_norm, split_norm, SplitTerm};
use super::engine::{word_bra_pairing, word_ket_pairing, FreeNorms};
use super::report::InequalityReport;
use crate::error::{Error, Result};
use crate::freeprod::{FreeFactor, NcPoly, PolyTerm};
use crate::normcalc::PIndex;
use crate::scalar::C64;

type Word<'a> = Vec<(usize, &'a DMatrix<C64>)>;

fn word(t: &PolyTerm, range: std::ops::Range<usize>) -> Word<'_> {
    range.map(|i| (t.indices[i], &t.letters[i])).collect()
}

fn ket_gram_of(factors: &[FreeFactor], words: &[Word<'_>]) -> DMatrix<C64> {
    let n = words.len();
    DMatrix::from_fn(n, n, |a, b| word_ket_pairing(factors, &words[a], &words[b]))
}

fn bra_gram_of(factors: &[FreeFactor], words: &[Word<'_>]) -> DMatrix<C64> {
    let n = words.len();
    DMatrix::from_fn(n, n, |a, b| word_bra_pairing(factors, &words[a], &words[b]))
}

/// The bracket ‖Σ_t |a_1⋯a_s⟩ c_t ⟨a_{s+1}⋯a_d|‖_p.
pub fn split_term(factors: &[FreeFactor], x: &NcPoly, s: usize, p: PIndex) -> Result<f64> {
    let d = x.degree();
    if s > d {
        return Err(Error::validation("split position beyond the degree"));
    }
    let terms = x.terms();
    let kets: Vec<Word<'_>> = terms.iter().map(|t| word(t, 0..s)).collect();
    let bras: Vec<Word<'_>> = terms.iter().map(|t| word(t, s..d)).collect();
    let g = ket_gram_of(factors, &kets);
    let k = bra_gram_of(factors, &bras);
    let st: Vec<SplitTerm> = terms
        .iter()
        .enumerate()
        .map(|(i, t)| SplitTerm {
            ket: i,
            bra: i,
            coef: t.coef.clone(),
            middle: None,
        })
        .collect();
    split_norm(&g, &k, &st, p)
}

/// Per-factor norms ‖Σ_{t: j_s = k} |a_1⋯a_{s−1}⟩ c_t ⊗ a_s ⟨a_{s+1}⋯a_d|‖_p for s ≥ 1.
pub fn middle_terms(factors: &[FreeFactor], x: &NcPoly, s: usize, p: PIndex) -> Result<Vec<f64>> {
    let d = x.degree();
    if s == 0 || s > d {
        return Err(Error::validation("middle position must lie in 1..=d"));
    }
    let mut out = Vec::with_capacity(factors.len());
    for (k, f) in factors.iter().enumerate() {
        let sel: Vec<&PolyTerm> = x.terms().iter().filter(|t| t.indices[s - 1] == k).collect();
        if sel.is_empty() {
            out.push(0.0);
            continue;
        }
        let kets: Vec<Word<'_>> = sel.iter().map(|t| word(t, 0..s - 1)).collect();
        let bras: Vec<Word<'_>> = sel.iter().map(|t| word(t, s..d)).collect();
        let g = ket_gram_of(factors, &kets);
        let kb = bra_gram_of(factors, &bras);
        let st: Vec<SplitTerm> = sel
            .iter()
            .enumerate()
            .map(|(i, t)| SplitTerm {
                ket: i,
                bra: i,
                coef: t.coef.clone(),
                middle: Some(t.letters[s - 1].clone()),
            })
            .collect();
        out.push(middle_norm(f, &g, &kb, &st, p)?);
    }
    Ok(out)
}

pub fn lp_sum(xs: &[f64], p: PIndex) -> f64 {
    match p {
        PIndex::Infinity => xs.iter().fold(0.0, |a: f64, &b| a.max(b)),
        PIndex::Finite(e) => xs.iter().map(|v| v.powf(e)).sum::<f64>().powf(1.0 / e),
    }
}

pub fn sigma1_bound(d: usize) -> f64 {
    (d as f64 + 1.0) * (2.0 * d as f64 + 1.0).sqrt()
}

pub fn sigma2_bound(d: usize) -> f64 {
    let d = d as f64;
    12.0 * d * d * (10.0 * d + 5.0).sqrt()
}

pub fn khintchine_report(engine: &FreeNorms, x: &NcPoly, p: PIndex) -> Result<InequalityReport> {
    engine.check_index(p)?;
    let d = x.degree();
    if d > 3 {
        return Err(Error::validation("degree above 3 is out of desk scale"));
    }
    let factors = engine.factors();
    let lhs = engine.poly_norm(x, p)?;
    let mut r = InequalityReport::new("khintchine")
        .param("n", factors.len())
        .param("d", d)
        .param("p", p)
        .param("m", x.coeff_dim())
        .param("terms", x.len())
        .param("depth", engine.depth());
    let mut s1 = 0.0;
    for s in 0..=d {
        let v = split_term(factors, x, s, p)?;
        r.push_term(&format!("sigma1_s{s}"), v);
        s1 += v;
    }
    let mut s2 = 0.0;
    for s in 1..=d {
        let v = lp_sum(&middle_terms(factors, x, s, p)?, p);
        r.push_term(&format!("sigma2_s{s}"), v);
        s2 += v;
    }
    let tol = 1e-9 * lhs.value.max(1e-300);
    r.check("sigma1_lower", s1, sigma1_bound(d) * lhs.value, tol);
    r.check("sigma2_lower", s2, sigma2_bound(d) * lhs.value, tol);
    r.certified = lhs.exact;
    if !lhs.exact {
        r.note("lhs is a truncated operator norm");
    }
    r.finish(lhs.value, s1 + s2);
    Ok(r)
}
