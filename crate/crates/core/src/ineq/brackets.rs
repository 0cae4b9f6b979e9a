//! Mixed bracket norms ‖Σ_t |A_t⟩ c_t ⟨C_t|‖_p and ‖Σ_t |A_t⟩ c_t ⊗ x_t ⟨C_t|‖_p built from
//! Gram matrices of the kets and bras.
//!
//! With G = F*F for the ket Gram [E(A_a* A_a')] and K = R*R for the bra Gram [E(C_b C_b'*)],
//! the bracket is the matrix Σ_t f_a ⊗ c_t ⊗ h_b with f_a the a-th column of F and h_b the
//! conjugated b-th column of R laid out as a row.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::freeprod::FreeFactor;
use crate::normcalc::{gram_factor, schatten_norm, PIndex, TraceNormalization};
use crate::scalar::C64;

#[derive(Debug, Clone)]
pub struct SplitTerm {
    pub ket: usize,
    pub bra: usize,
    pub coef: DMatrix<C64>,
    /// A letter of one factor sitting between the ket and the bra.
    pub middle: Option<DMatrix<C64>>,
}

fn ket_columns(gram: &DMatrix<C64>) -> Result<Vec<DMatrix<C64>>> {
    let f = gram_factor(gram)?;
    Ok((0..gram.ncols())
        .map(|a| DMatrix::from_column_slice(f.nrows(), 1, f.column(a).as_slice()))
        .collect())
}

fn bra_rows(gram: &DMatrix<C64>) -> Result<Vec<DMatrix<C64>>> {
    let r = gram_factor(gram)?;
    Ok((0..gram.ncols())
        .map(|b| DMatrix::from_fn(1, r.nrows(), |_, u| r[(u, b)].conj()))
        .collect())
}

fn check_terms(terms: &[SplitTerm], nk: usize, nb: usize) -> Result<usize> {
    let m = terms.first().map(|t| t.coef.nrows()).unwrap_or(1);
    for t in terms {
        if t.ket >= nk || t.bra >= nb {
            return Err(Error::validation(
                "bracket term label outside its Gram matrix",
            ));
        }
        if t.coef.nrows() != m || t.coef.ncols() != m {
            return Err(Error::validation(
                "bracket coefficients must share a square shape",
            ));
        }
    }
    Ok(m)
}

/// Σ_t f_{ket(t)} ⊗ c_t ⊗ h_{bra(t)}.
pub fn split_matrix(
    ket_gram: &DMatrix<C64>,
    bra_gram: &DMatrix<C64>,
    terms: &[SplitTerm],
) -> Result<DMatrix<C64>> {
    let m = check_terms(terms, ket_gram.ncols(), bra_gram.ncols())?;
    let fs = ket_columns(ket_gram)?;
    let hs = bra_rows(bra_gram)?;
    let ra = fs.first().map(|f| f.nrows()).unwrap_or(1);
    let rc = hs.first().map(|h| h.ncols()).unwrap_or(1);
    let mut z = DMatrix::zeros(ra * m, m * rc);
    for t in terms {
        z += fs[t.ket].kronecker(&t.coef).kronecker(&hs[t.bra]);
    }
    Ok(z)
}

/// Schatten p-norm of the bracket (unnormalized trace on the coefficients).
pub fn split_norm(
    ket_gram: &DMatrix<C64>,
    bra_gram: &DMatrix<C64>,
    terms: &[SplitTerm],
    p: PIndex,
) -> Result<f64> {
    if terms.is_empty() {
        return Ok(0.0);
    }
    let z = split_matrix(ket_gram, bra_gram, terms)?;
    Ok(schatten_norm(&z, p, TraceNormalization::Unnormalized))
}

/// Norm in L_p(M ⊗ A_k) of Σ_t f ⊗ c_t ⊗ h ⊗ x_t with every middle letter in `factor`.
pub fn middle_norm(
    factor: &FreeFactor,
    ket_gram: &DMatrix<C64>,
    bra_gram: &DMatrix<C64>,
    terms: &[SplitTerm],
    p: PIndex,
) -> Result<f64> {
    if terms.is_empty() {
        return Ok(0.0);
    }
    let m = check_terms(terms, ket_gram.ncols(), bra_gram.ncols())?;
    let fs = ket_columns(ket_gram)?;
    let hs = bra_rows(bra_gram)?;
    let ra = fs.first().map(|f| f.nrows()).unwrap_or(1);
    let rc = hs.first().map(|h| h.ncols()).unwrap_or(1);
    let r = factor.size();
    let side = (ra * m).max(m * rc);
    let mut z = DMatrix::zeros(side * r, side * r);
    for t in terms {
        let x = t
            .middle
            .as_ref()
            .ok_or_else(|| Error::validation("middle bracket term without a letter"))?;
        factor.check_element(x)?;
        let block = fs[t.ket]
            .kronecker(&t.coef)
            .kronecker(&hs[t.bra])
            .kronecker(x);
        let mut v = z.view_mut((0, 0), (block.nrows(), block.ncols()));
        v += &block;
    }
    factor.amplified_norm(&z, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normcalc::{bra_norm, ket_norm};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn herm_psd(n: usize, seed: u64) -> DMatrix<C64> {
        let mut r = crate::ineq::random::rng(seed);
        let a = crate::ineq::random::gaussian_matrix(&mut r, n, n);
        &a * a.adjoint()
    }

    #[test]
    fn pure_ket_and_bra_match_normcalc() {
        let g = herm_psd(3, 1);
        let one = DMatrix::from_element(1, 1, c(1.0));
        let mut r = crate::ineq::random::rng(2);
        let coefs: Vec<DMatrix<C64>> = (0..3)
            .map(|_| crate::ineq::random::gaussian_matrix(&mut r, 2, 2))
            .collect();
        let kets: Vec<SplitTerm> = (0..3)
            .map(|a| SplitTerm {
                ket: a,
                bra: 0,
                coef: coefs[a].clone(),
                middle: None,
            })
            .collect();
        let bras: Vec<SplitTerm> = (0..3)
            .map(|b| SplitTerm {
                ket: 0,
                bra: b,
                coef: coefs[b].clone(),
                middle: None,
            })
            .collect();
        for p in [PIndex::Finite(2.0), PIndex::Finite(4.0), PIndex::Infinity] {
            let k1 = split_norm(&g, &one, &kets, p).unwrap();
            let gb = g.kronecker(&DMatrix::<C64>::identity(2, 2));
            let k2 = ket_norm(&coefs, &gb, p, TraceNormalization::Unnormalized).unwrap();
            assert!((k1 - k2).abs() < 1e-10 * k2.max(1.0), "{k1} {k2}");
            let b1 = split_norm(&one, &g, &bras, p).unwrap();
            let b2 = bra_norm(&coefs, &gb, p, TraceNormalization::Unnormalized).unwrap();
            assert!((b1 - b2).abs() < 1e-10 * b2.max(1.0), "{b1} {b2}");
        }
    }

    #[test]
    fn orthonormal_labels_give_block_matrix() {
        // |e_a⟩ c ⟨e_b| with identity Grams is the block matrix Σ e_ab ⊗ c_ab.
        let id = DMatrix::<C64>::identity(2, 2);
        let terms = vec![
            SplitTerm {
                ket: 0,
                bra: 1,
                coef: DMatrix::from_element(1, 1, c(3.0)),
                middle: None,
            },
            SplitTerm {
                ket: 1,
                bra: 0,
                coef: DMatrix::from_element(1, 1, c(4.0)),
                middle: None,
            },
        ];
        let v = split_norm(&id, &id, &terms, PIndex::Infinity).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        let v2 = split_norm(&id, &id, &terms, PIndex::Finite(2.0)).unwrap();
        assert!((v2 - 5.0).abs() < 1e-12);
    }

    #[test]
    fn middle_term_of_one_letter() {
        let f = FreeFactor::bernoulli();
        let x = f.meanzero_onb()[0].clone();
        let one = DMatrix::from_element(1, 1, c(1.0));
        let terms = vec![SplitTerm {
            ket: 0,
            bra: 0,
            coef: one.clone() * c(2.0),
            middle: Some(x),
        }];
        let v = middle_norm(&f, &one, &one, &terms, PIndex::Infinity).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = middle_norm(&f, &one, &one, &terms, PIndex::Finite(4.0)).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }
}
