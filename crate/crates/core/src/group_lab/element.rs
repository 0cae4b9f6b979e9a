//! Finitely supported elements of the group algebra ℂ[F_n].

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;

use super::word::GroupWord;
use crate::capacity::Capacity;
use crate::error::{Error, Result};
use crate::scalar::{ExactC, Scalar, C64};

/// Σ c_w λ(w) with no zero coefficients stored.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAlgElement<S: Scalar> {
    terms: BTreeMap<GroupWord, S>,
}

impl<S: Scalar> Default for GroupAlgElement<S> {
    fn default() -> Self {
        GroupAlgElement {
            terms: BTreeMap::new(),
        }
    }
}

impl<S: Scalar> GroupAlgElement<S> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn unit() -> Self {
        Self::monomial(GroupWord::identity(), S::one())
    }

    pub fn monomial(w: GroupWord, c: S) -> Self {
        let mut x = Self::zero();
        x.add_term(w, c);
        x
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (GroupWord, S)>) -> Self {
        let mut x = Self::zero();
        for (w, c) in terms {
            x.add_term(w, c);
        }
        x
    }

    pub fn add_term(&mut self, w: GroupWord, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&w);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(w, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GroupWord, &S)> {
        self.terms.iter()
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &GroupWord) -> S {
        self.terms.get(w).cloned().unwrap_or_else(S::zero)
    }

    /// Coefficient of the identity.
    pub fn trace(&self) -> S {
        self.coeff(&GroupWord::identity())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&(-S::one())))
    }

    pub fn scale(&self, s: &S) -> Self {
        Self::from_terms(
            self.terms()
                .map(|(w, c)| (w.clone(), c.clone() * s.clone())),
        )
    }

    /// λ(w)* = λ(w⁻¹) with conjugated coefficient.
    pub fn adjoint(&self) -> Self {
        Self::from_terms(self.terms().map(|(w, c)| (w.inverse(), c.conj())))
    }

    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.convolve_with(other, Capacity::global())
    }

    pub fn convolve_with(&self, other: &Self, cap: Capacity) -> Result<Self> {
        let mut out: FxHashMap<GroupWord, S> = FxHashMap::default();
        for (u, a) in self.terms() {
            for (v, b) in other.terms() {
                let w = u.mul(v);
                let c = a.clone() * b.clone();
                match out.get_mut(&w) {
                    Some(x) => *x = x.clone() + c,
                    None => {
                        out.insert(w, c);
                        if out.len() > cap.max_support {
                            return Err(Error::capacity(
                                "group algebra product support",
                                out.len(),
                                cap.max_support,
                            ));
                        }
                    }
                }
            }
        }
        Ok(GroupAlgElement {
            terms: out.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    /// Keeps the words selected by `keep`.
    pub fn filter(&self, keep: impl Fn(&GroupWord) -> bool) -> Self {
        GroupAlgElement {
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| keep(w))
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    /// Σ |c_w|² (the ℓ₂ norm squared, which is τ(x*x)).
    pub fn l2_norm_sqr(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr_f64()).sum()
    }

    /// Largest block length in the support, 0 for scalars and the zero element.
    pub fn max_block_length(&self) -> usize {
        self.terms
            .keys()
            .map(|w| w.block_length())
            .max()
            .unwrap_or(0)
    }

    pub fn to_c64(&self) -> GroupAlgElement<C64> {
        GroupAlgElement::from_terms(self.terms().map(|(w, c)| (w.clone(), c.to_c64())))
    }

    pub fn to_exact(&self) -> GroupAlgElement<ExactC> {
        GroupAlgElement::from_terms(
            self.terms()
                .map(|(w, c)| (w.clone(), ExactC::from_c64(c.to_c64()))),
        )
    }
}

impl GroupAlgElement<C64> {
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sqr().sqrt()
    }

    /// max |x − y| over coefficients.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other)
            .terms()
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }
}
