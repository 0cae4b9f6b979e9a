//! φ(a_1⋯a_m) for letters from free factors, by the recursion that defines freeness.
//!
//! Adjacent letters from the same factor are multiplied; the first uncentered letter is split
//! as a = (a − φ(a)) + φ(a); a word of centered letters from alternating factors has moment 0.
//! Works over any [`Scalar`], so rational inputs give exact answers.

use nalgebra::DMatrix;

use super::factor::FreeFactor;
use crate::capacity::Capacity;
use crate::error::{Error, Result};
use crate::scalar::{ExactC, Scalar, C64};

/// Dense square matrix over a generic scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMat<S> {
    n: usize,
    data: Vec<S>,
}

impl<S: Scalar> DenseMat<S> {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![S::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = S::one();
        }
        DenseMat { n, data }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        DenseMat { n, data }
    }

    pub fn from_c64(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), |i, j| S::from_c64(m[(i, j)]))
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.n + j]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut data = vec![S::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other.data[k * n + j];
                    if !b.is_zero() {
                        data[i * n + j] = data[i * n + j].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        DenseMat { n, data }
    }

    /// self − s·1
    pub fn sub_scalar(&self, s: &S) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            let v = out.data[i * self.n + i].clone() - s.clone();
            out.data[i * self.n + i] = v;
        }
        out
    }

    /// trace(rho · self)
    pub fn trace_against(&self, rho: &Self) -> S {
        let n = self.n;
        let mut acc = S::zero();
        for i in 0..n {
            for k in 0..n {
                let r = &rho.data[i * n + k];
                let a = &self.data[k * n + i];
                if !r.is_zero() && !a.is_zero() {
                    acc = acc + r.clone() * a.clone();
                }
            }
        }
        acc
    }
}

#[derive(Clone)]
struct Letter<S> {
    factor: usize,
    a: DenseMat<S>,
    centered: bool,
}

fn merge<S: Scalar>(word: Vec<Letter<S>>) -> Vec<Letter<S>> {
    let mut out: Vec<Letter<S>> = Vec::with_capacity(word.len());
    for l in word {
        match out.last_mut() {
            Some(prev) if prev.factor == l.factor => {
                prev.a = prev.a.mul(&l.a);
                prev.centered = false;
            }
            _ => out.push(l),
        }
    }
    out
}

fn recurse<S: Scalar>(
    rhos: &[DenseMat<S>],
    word: Vec<Letter<S>>,
    calls: &mut usize,
    limit: usize,
) -> Result<S> {
    *calls += 1;
    if *calls > limit {
        return Err(Error::capacity("free moment recursion", *calls, limit));
    }
    let word = merge(word);
    let Some(i) = word.iter().position(|l| !l.centered) else {
        return Ok(if word.is_empty() { S::one() } else { S::zero() });
    };
    let k = word[i].factor;
    let mean = word[i].a.trace_against(&rhos[k]);
    let mut centered = word.clone();
    centered[i].a = centered[i].a.sub_scalar(&mean);
    centered[i].centered = true;
    let mut total = recurse(rhos, centered, calls, limit)?;
    if !mean.is_zero() {
        let mut rest = word;
        rest.remove(i);
        total = total + mean * recurse(rhos, rest, calls, limit)?;
    }
    Ok(total)
}

/// The generic recursion, with densities and letters already in the scalar field.
pub fn free_moment_generic<S: Scalar>(
    rhos: &[DenseMat<S>],
    word: &[(usize, DenseMat<S>)],
    cap: Capacity,
) -> Result<S> {
    for (k, a) in word {
        let rho = rhos
            .get(*k)
            .ok_or_else(|| Error::validation(format!("factor index {k} out of range")))?;
        if rho.size() != a.size() {
            return Err(Error::validation(format!(
                "letter for factor {k} has the wrong size"
            )));
        }
    }
    let letters = word
        .iter()
        .map(|(k, a)| Letter {
            factor: *k,
            a: a.clone(),
            centered: false,
        })
        .collect();
    let mut calls = 0;
    recurse(rhos, letters, &mut calls, cap.max_support)
}

fn convert<S: Scalar>(
    factors: &[FreeFactor],
    word: &[(usize, DMatrix<C64>)],
) -> Result<(Vec<DenseMat<S>>, Vec<(usize, DenseMat<S>)>)> {
    let rhos = factors
        .iter()
        .map(|f| DenseMat::from_c64(f.density()))
        .collect();
    let mut w = Vec::with_capacity(word.len());
    for (k, a) in word {
        let f = factors
            .get(*k)
            .ok_or_else(|| Error::validation(format!("factor index {k} out of range")))?;
        f.check_element(a)?;
        w.push((*k, DenseMat::from_c64(a)));
    }
    Ok((rhos, w))
}

/// φ(a_1⋯a_m) in floating point.
pub fn free_moment(factors: &[FreeFactor], word: &[(usize, DMatrix<C64>)]) -> Result<C64> {
    let (rhos, w) = convert::<C64>(factors, word)?;
    free_moment_generic(&rhos, &w, Capacity::global())
}

/// φ(a_1⋯a_m) with every double converted exactly to a rational before the recursion.
pub fn free_moment_exact(factors: &[FreeFactor], word: &[(usize, DMatrix<C64>)]) -> Result<ExactC> {
    let (rhos, w) = convert::<ExactC>(factors, word)?;
    free_moment_generic(&rhos, &w, Capacity::global())
}
