//! Homogeneous free polynomials Σ coef ⊗ a_{j1}⋯a_{jd} with mean-zero letters and j1 ≠ j2 ≠ ⋯.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::factor::FreeFactor;
use super::fock::{CompiledLetter, FreeOp};
use crate::error::{Error, Result};
use crate::scalar::C64;

const MEAN_ZERO_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct PolyTerm {
    pub indices: Vec<usize>,
    pub letters: Vec<DMatrix<C64>>,
    pub coef: DMatrix<C64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyMap {
    /// Terms whose first letter lies in factor k.
    Left(usize),
    /// Terms whose last letter lies in factor k.
    Right(usize),
    /// Terms starting and ending in factor k.
    Both(usize),
    /// The homogeneous component of the given degree.
    Degree(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NcPoly {
    coeff_dim: usize,
    degree: usize,
    terms: Vec<PolyTerm>,
}

fn validate_term(
    factors: &[FreeFactor],
    coeff_dim: usize,
    degree: usize,
    t: &PolyTerm,
) -> Result<()> {
    if t.indices.len() != degree || t.letters.len() != degree {
        return Err(Error::validation(format!(
            "term has {} letters, polynomial degree is {degree}",
            t.letters.len()
        )));
    }
    if t.coef.nrows() != coeff_dim || t.coef.ncols() != coeff_dim {
        return Err(Error::validation(format!(
            "term coefficient is {}x{}, expected {coeff_dim}x{coeff_dim}",
            t.coef.nrows(),
            t.coef.ncols()
        )));
    }
    for w in t.indices.windows(2) {
        if w[0] == w[1] {
            return Err(Error::validation(format!(
                "adjacent letters share factor {}: indices must alternate",
                w[0]
            )));
        }
    }
    for (&k, a) in t.indices.iter().zip(&t.letters) {
        let f = factors
            .get(k)
            .ok_or_else(|| Error::validation(format!("factor index {k} out of range")))?;
        f.check_element(a)?;
        let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let m = f.state(a).norm();
        if m > MEAN_ZERO_TOL * scale {
            return Err(Error::validation(format!(
                "letter in factor {k} has mean {m:e}, expected 0"
            )));
        }
    }
    Ok(())
}

impl NcPoly {
    pub fn zero(coeff_dim: usize, degree: usize) -> Self {
        NcPoly {
            coeff_dim,
            degree,
            terms: Vec::new(),
        }
    }

    pub fn new(
        factors: &[FreeFactor],
        coeff_dim: usize,
        degree: usize,
        terms: Vec<PolyTerm>,
    ) -> Result<Self> {
        let mut p = Self::zero(coeff_dim, degree);
        for t in terms {
            p.push(factors, t)?;
        }
        Ok(p)
    }

    /// coef ⊗ 1
    pub fn constant(coef: DMatrix<C64>) -> Self {
        let m = coef.nrows();
        NcPoly {
            coeff_dim: m,
            degree: 0,
            terms: vec![PolyTerm {
                indices: vec![],
                letters: vec![],
                coef,
            }],
        }
    }

    /// coef ⊗ a for a single mean-zero letter.
    pub fn letter(
        factors: &[FreeFactor],
        k: usize,
        a: DMatrix<C64>,
        coef: DMatrix<C64>,
    ) -> Result<Self> {
        let m = coef.nrows();
        Self::new(
            factors,
            m,
            1,
            vec![PolyTerm {
                indices: vec![k],
                letters: vec![a],
                coef,
            }],
        )
    }

    pub fn push(&mut self, factors: &[FreeFactor], t: PolyTerm) -> Result<()> {
        validate_term(factors, self.coeff_dim, self.degree, &t)?;
        self.terms.push(t);
        Ok(())
    }

    pub fn coeff_dim(&self) -> usize {
        self.coeff_dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &[PolyTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn filtered(&self, keep: impl Fn(&PolyTerm) -> bool) -> NcPoly {
        NcPoly {
            coeff_dim: self.coeff_dim,
            degree: self.degree,
            terms: self.terms.iter().filter(|t| keep(t)).cloned().collect(),
        }
    }

    pub fn map(&self, which: PolyMap) -> NcPoly {
        match which {
            PolyMap::Left(k) => self.filtered(|t| t.indices.first() == Some(&k)),
            PolyMap::Right(k) => self.filtered(|t| t.indices.last() == Some(&k)),
            PolyMap::Both(k) => {
                self.filtered(|t| t.indices.first() == Some(&k) && t.indices.last() == Some(&k))
            }
            PolyMap::Degree(d) => self.filtered(|_| d == self.degree),
        }
    }

    pub fn left(&self, k: usize) -> NcPoly {
        self.map(PolyMap::Left(k))
    }

    pub fn right(&self, k: usize) -> NcPoly {
        self.map(PolyMap::Right(k))
    }

    pub fn both(&self, k: usize) -> NcPoly {
        self.map(PolyMap::Both(k))
    }

    /// x − R_k(x)
    pub fn not_right(&self, k: usize) -> NcPoly {
        self.filtered(|t| t.indices.last() != Some(&k))
    }

    /// x − L_k(x)
    pub fn not_left(&self, k: usize) -> NcPoly {
        self.filtered(|t| t.indices.first() != Some(&k))
    }

    pub fn adjoint(&self) -> NcPoly {
        NcPoly {
            coeff_dim: self.coeff_dim,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|t| PolyTerm {
                    indices: t.indices.iter().rev().copied().collect(),
                    letters: t.letters.iter().rev().map(|a| a.adjoint()).collect(),
                    coef: t.coef.adjoint(),
                })
                .collect(),
        }
    }

    pub fn scale(&self, s: C64) -> NcPoly {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coef *= s;
        }
        out
    }

    /// Multiplies every coefficient on the left by m.
    pub fn coef_left(&self, m: &DMatrix<C64>) -> Result<NcPoly> {
        if m.nrows() != self.coeff_dim || m.ncols() != self.coeff_dim {
            return Err(Error::validation(
                "coefficient multiplier has the wrong shape",
            ));
        }
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coef = m * &t.coef;
        }
        Ok(out)
    }

    pub fn add(&self, other: &NcPoly) -> Result<NcPoly> {
        if self.coeff_dim != other.coeff_dim || self.degree != other.degree {
            return Err(Error::validation(format!(
                "cannot add polynomials of (coeff_dim, degree) = ({}, {}) and ({}, {})",
                self.coeff_dim, self.degree, other.coeff_dim, other.degree
            )));
        }
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        Ok(out)
    }

    /// Appends the letter (k, a) on the right of every term; needs R_k(self) = 0.
    pub fn append_letter(
        &self,
        factors: &[FreeFactor],
        k: usize,
        a: &DMatrix<C64>,
    ) -> Result<NcPoly> {
        let mut out = NcPoly::zero(self.coeff_dim, self.degree + 1);
        for t in &self.terms {
            let mut nt = t.clone();
            nt.indices.push(k);
            nt.letters.push(a.clone());
            out.push(factors, nt)?;
        }
        Ok(out)
    }

    /// Prepends the letter (k, a) on the left of every term; needs L_k(self) = 0.
    pub fn prepend_letter(
        &self,
        factors: &[FreeFactor],
        k: usize,
        a: &DMatrix<C64>,
    ) -> Result<NcPoly> {
        let mut out = NcPoly::zero(self.coeff_dim, self.degree + 1);
        for t in &self.terms {
            let mut nt = t.clone();
            nt.indices.insert(0, k);
            nt.letters.insert(0, a.clone());
            out.push(factors, nt)?;
        }
        Ok(out)
    }

    /// Compiles to a Fock-space operator.
    pub fn to_op(&self, factors: &[FreeFactor]) -> Result<FreeOp> {
        let mut op = FreeOp::zero(self.coeff_dim, self.coeff_dim);
        for t in &self.terms {
            let letters = t
                .indices
                .iter()
                .zip(&t.letters)
                .map(|(&k, a)| CompiledLetter::from_element(factors, k, a).map(Arc::new))
                .collect::<Result<Vec<_>>>()?;
            op.push(t.coef.clone(), letters)?;
        }
        Ok(op)
    }
}

/// Sum of several polynomials of possibly different degrees, as one operator.
pub fn sum_to_op(factors: &[FreeFactor], polys: &[NcPoly]) -> Result<FreeOp> {
    let m = polys.first().map(|p| p.coeff_dim()).unwrap_or(1);
    let mut op = FreeOp::zero(m, m);
    for p in polys {
        op = op.add(&p.to_op(factors)?)?;
    }
    Ok(op)
}

/// JSON fixture form: letters are coordinates along the factor's mean-zero basis and complex
/// numbers are `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NcPolySpec {
    pub coeff_dim: usize,
    pub degree: usize,
    pub terms: Vec<TermSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub indices: Vec<usize>,
    pub letters: Vec<Vec<[f64; 2]>>,
    pub coef: Vec<Vec<[f64; 2]>>,
}

impl NcPolySpec {
    pub fn to_poly(&self, factors: &[FreeFactor]) -> Result<NcPoly> {
        let mut p = NcPoly::zero(self.coeff_dim, self.degree);
        for t in &self.terms {
            if t.letters.len() != t.indices.len() {
                return Err(Error::Parse("letters and indices differ in length".into()));
            }
            let mut letters = Vec::new();
            for (&k, coords) in t.indices.iter().zip(&t.letters) {
                let f = factors
                    .get(k)
                    .ok_or_else(|| Error::validation(format!("factor index {k} out of range")))?;
                if coords.len() != f.meanzero_dim() {
                    return Err(Error::Parse(format!(
                        "letter in factor {k} needs {} coordinates",
                        f.meanzero_dim()
                    )));
                }
                let cs: Vec<C64> = coords.iter().map(|z| C64::new(z[0], z[1])).collect();
                letters.push(f.meanzero_from(&cs));
            }
            if t.coef.len() != self.coeff_dim || t.coef.iter().any(|r| r.len() != self.coeff_dim) {
                return Err(Error::Parse(
                    "coefficient matrix has the wrong shape".into(),
                ));
            }
            let coef = DMatrix::from_fn(self.coeff_dim, self.coeff_dim, |i, j| {
                C64::new(t.coef[i][j][0], t.coef[i][j][1])
            });
            p.push(
                factors,
                PolyTerm {
                    indices: t.indices.clone(),
                    letters,
                    coef,
                },
            )?;
        }
        Ok(p)
    }

    pub fn from_poly(factors: &[FreeFactor], p: &NcPoly) -> Self {
        let terms = p
            .terms()
            .iter()
            .map(|t| TermSpec {
                indices: t.indices.clone(),
                letters: t
                    .indices
                    .iter()
                    .zip(&t.letters)
                    .map(|(&k, a)| {
                        factors[k].coords(a)[1..]
                            .iter()
                            .map(|z| [z.re, z.im])
                            .collect()
                    })
                    .collect(),
                coef: (0..p.coeff_dim())
                    .map(|i| {
                        (0..p.coeff_dim())
                            .map(|j| [t.coef[(i, j)].re, t.coef[(i, j)].im])
                            .collect()
                    })
                    .collect(),
            })
            .collect();
        NcPolySpec {
            coeff_dim: p.coeff_dim(),
            degree: p.degree(),
            terms,
        }
    }
}
