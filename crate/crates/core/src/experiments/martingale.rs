//! Free martingales over reduced free products, and the three-letter martingale whose square
//! function controls the triangular projection.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freeprod::{free_moment, sum_to_op, FreeFactor, FreeOp, Measure, NcPoly, PolyTerm};
use crate::scalar::C64;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Parameters of the three-letter martingale x_{2n} = Σ a_ij w_i f w_j'.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleSpec {
    pub n: usize,
    /// n×n coefficient matrix (real and imaginary parts).
    pub a: Vec<Vec<[f64; 2]>>,
    /// Number of Gauss nodes for each semicircular factor.
    pub quadrature_size: usize,
    /// Truncation depth for the representation route.
    pub depth: usize,
}

impl MartingaleSpec {
    pub fn new(a: &DMatrix<C64>, quadrature_size: usize, depth: usize) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(Error::validation(
                "coefficient matrix must be square and non-empty",
            ));
        }
        let n = a.nrows();
        Ok(MartingaleSpec {
            n,
            a: (0..n)
                .map(|i| (0..n).map(|j| [a[(i, j)].re, a[(i, j)].im]).collect())
                .collect(),
            quadrature_size,
            depth,
        })
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            C64::new(self.a[i][j][0], self.a[i][j][1])
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.a.len() != self.n || self.a.iter().any(|r| r.len() != self.n) {
            return Err(Error::validation("coefficient matrix must be n×n"));
        }
        if self.quadrature_size < 2 {
            return Err(Error::validation("quadrature size must be at least 2"));
        }
        Ok(())
    }
}

/// The mean-zero element f with ‖f‖₂ = 1/√n and ‖f‖_∞ = 1, realized on two atoms with
/// weights 1/(n+1), n/(n+1) and values 1, −1/n.
#[derive(Debug, Clone)]
pub struct FElement {
    pub factor: FreeFactor,
    pub f: DMatrix<C64>,
    pub mean: f64,
    pub l2: f64,
    pub linf: f64,
}

pub fn two_point_f(n: usize) -> Result<FElement> {
    if n == 0 {
        return Err(Error::validation("n must be positive"));
    }
    let nf = n as f64;
    let factor = FreeFactor::discrete(&[1.0 / (nf + 1.0), nf / (nf + 1.0)])?;
    let f = factor.diagonal_element(&[1.0, -1.0 / nf])?;
    let mean = factor.state(&f).re;
    let l2 = factor.inner(&f, &f).re.sqrt();
    let linf = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(FElement {
        factor,
        f,
        mean,
        l2,
        linf,
    })
}

/// Sign-like node function on Wigner quadrature nodes: +1 above a threshold, −β below, with
/// β fixed by the mean and the threshold bisected towards ‖f‖₂ = 1/√n.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCalibration {
    pub threshold: f64,
    pub beta: f64,
    pub l2: f64,
    pub linf: f64,
    pub target: f64,
}

pub fn calibrate_threshold(n: usize, m: usize) -> Result<ThresholdCalibration> {
    let fac = FreeFactor::quadrature(Measure::Wigner, m)?;
    let nodes = fac
        .nodes()
        .ok_or_else(|| Error::validation("quadrature factor without nodes"))?
        .to_vec();
    let w: Vec<f64> = (0..m).map(|i| fac.density()[(i, i)].re).collect();
    let target = 1.0 / (n as f64).sqrt();
    let eval = |t: f64| -> Option<(f64, f64, f64)> {
        let up: f64 = nodes
            .iter()
            .zip(&w)
            .filter(|(x, _)| **x > t)
            .map(|(_, p)| p)
            .sum();
        let down = 1.0 - up;
        if up <= 0.0 || down <= 0.0 {
            return None;
        }
        let beta = up / down;
        let (hi, b) = if beta <= 1.0 {
            (1.0, beta)
        } else {
            (1.0 / beta, 1.0)
        };
        let l2 = (up * hi * hi + down * b * b).sqrt();
        Some((beta, l2, hi.max(b)))
    };
    let (mut lo, mut hi) = (nodes[0] - 1e-9, nodes[m - 1]);
    let mut best: Option<ThresholdCalibration> = None;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        match eval(mid) {
            Some((beta, l2, linf)) => {
                let cand = ThresholdCalibration {
                    threshold: mid,
                    beta,
                    l2,
                    linf,
                    target,
                };
                if best
                    .as_ref()
                    .is_none_or(|b| (b.l2 - target).abs() > (l2 - target).abs())
                {
                    best = Some(cand);
                }
                if l2 > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            None => hi = mid,
        }
    }
    best.ok_or_else(|| Error::Numerical("no threshold separates the nodes".into()))
}

/// Martingale differences dx_1, …, dx_N adapted to A_0 ⊂ A_0 ∗ A_1 ⊂ ⋯; dx_k may only use
/// factors with index ≤ `level(k)`.
#[derive(Debug, Clone)]
pub struct FreeMartingale {
    pub factors: Vec<FreeFactor>,
    pub differences: Vec<NcPoly>,
    /// Highest factor index available to each difference.
    pub levels: Vec<usize>,
    pub degree: usize,
}

impl FreeMartingale {
    pub fn coeff_dim(&self) -> usize {
        self.differences.first().map(|d| d.coeff_dim()).unwrap_or(1)
    }

    pub fn difference_ops(&self) -> Result<Vec<FreeOp>> {
        self.differences
            .iter()
            .map(|d| d.to_op(&self.factors))
            .collect()
    }

    pub fn sum_op(&self) -> Result<FreeOp> {
        sum_to_op(&self.factors, &self.differences)
    }

    pub fn adjoint(&self) -> FreeMartingale {
        FreeMartingale {
            factors: self.factors.clone(),
            differences: self.differences.iter().map(|d| d.adjoint()).collect(),
            levels: self.levels.clone(),
            degree: self.degree,
        }
    }

    /// Every letter of dx_k lives in a factor ≤ level(k).
    pub fn check_filtration(&self) -> Result<()> {
        for (k, (d, &lvl)) in self.differences.iter().zip(&self.levels).enumerate() {
            if d.terms().iter().any(|t| t.indices.iter().any(|&j| j > lvl)) {
                return Err(Error::validation(format!(
                    "difference {} leaves its filtration level",
                    k + 1
                )));
            }
        }
        Ok(())
    }

    /// max |φ(dx_k u)| over alternating words u of length ≤ depth in the mean-zero bases of the
    /// factors below level(k) (with u = 1 included), computed by the freeness recursion. A
    /// constant first entry is the starting value and is exempt.
    pub fn adaptedness_residual(&self, depth: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (k, (d, &lvl)) in self.differences.iter().zip(&self.levels).enumerate() {
            let words = test_words(&self.factors, lvl, depth);
            for t in d.terms() {
                if t.indices.is_empty() {
                    // a constant is the starting value x_0 and may only open the sequence
                    if k > 0 {
                        worst = worst.max(t.coef.iter().map(|z| z.norm()).fold(0.0, f64::max));
                    }
                    continue;
                }
                let base: Vec<(usize, DMatrix<C64>)> = t
                    .indices
                    .iter()
                    .cloned()
                    .zip(t.letters.iter().cloned())
                    .collect();
                for u in &words {
                    let mut w = base.clone();
                    w.extend(u.iter().cloned());
                    let v = free_moment(&self.factors, &w)?;
                    let scale = t.coef.iter().map(|z| z.norm()).fold(0.0, f64::max);
                    worst = worst.max(v.norm() * scale);
                }
            }
        }
        Ok(worst)
    }
}

/// Alternating words over factors 0..level (exclusive) built from mean-zero basis letters.
fn test_words(
    factors: &[FreeFactor],
    level: usize,
    depth: usize,
) -> Vec<Vec<(usize, DMatrix<C64>)>> {
    let mut out: Vec<Vec<(usize, DMatrix<C64>)>> = vec![vec![]];
    let mut frontier = out.clone();
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &frontier {
            for (k, f) in factors.iter().enumerate().take(level) {
                if w.last().is_some_and(|(j, _)| *j == k) {
                    continue;
                }
                for b in f.meanzero_onb() {
                    let mut v = w.clone();
                    v.push((k, b.clone()));
                    next.push(v);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Factor layout: A_0 hosts f, w_i lives in A_{2i−1} and w_j' in A_{2j}.
pub fn martingale_factors(n: usize, m: usize) -> Result<(Vec<FreeFactor>, FElement)> {
    let fe = two_point_f(n)?;
    let semi = FreeFactor::quadrature(Measure::Wigner, m)?;
    let mut factors = vec![fe.factor.clone()];
    factors.extend(std::iter::repeat_n(semi, 2 * n));
    Ok((factors, fe))
}

fn three_letter(
    factors: &[FreeFactor],
    f: &DMatrix<C64>,
    i: usize,
    j: usize,
    coef: C64,
) -> PolyTerm {
    let w = factors[2 * i - 1].generator();
    let wp = factors[2 * j].generator();
    PolyTerm {
        indices: vec![2 * i - 1, 0, 2 * j],
        letters: vec![w, f.clone(), wp],
        coef: DMatrix::from_element(1, 1, coef),
    }
}

/// dx_{2k} = Σ_{i ≤ k} a_ik w_i f w_k' and dx_{2k−1} = Σ_{j < k} a_kj w_k f w_j' (1-based).
pub fn build_theorem_d(spec: &MartingaleSpec) -> Result<FreeMartingale> {
    spec.validate()?;
    let n = spec.n;
    let a = spec.matrix();
    let (factors, fe) = martingale_factors(n, spec.quadrature_size)?;
    let mut differences = Vec::with_capacity(2 * n);
    let mut levels = Vec::with_capacity(2 * n);
    for k in 1..=n {
        let mut odd = NcPoly::zero(1, 3);
        for j in 1..k {
            if a[(k - 1, j - 1)].norm() > 0.0 {
                odd.push(
                    &factors,
                    three_letter(&factors, &fe.f, k, j, a[(k - 1, j - 1)]),
                )?;
            }
        }
        differences.push(odd);
        levels.push(2 * k - 1);
        let mut even = NcPoly::zero(1, 3);
        for i in 1..=k {
            if a[(i - 1, k - 1)].norm() > 0.0 {
                even.push(
                    &factors,
                    three_letter(&factors, &fe.f, i, k, a[(i - 1, k - 1)]),
                )?;
            }
        }
        differences.push(even);
        levels.push(2 * k);
    }
    Ok(FreeMartingale {
        factors,
        differences,
        levels,
        degree: 3,
    })
}

/// x_{2n} = Σ_{i,j} a_ij w_i f w_j' as one polynomial.
pub fn full_sum(spec: &MartingaleSpec) -> Result<(Vec<FreeFactor>, NcPoly)> {
    spec.validate()?;
    let a = spec.matrix();
    let (factors, fe) = martingale_factors(spec.n, spec.quadrature_size)?;
    let mut x = NcPoly::zero(1, 3);
    for i in 1..=spec.n {
        for j in 1..=spec.n {
            if a[(i - 1, j - 1)].norm() > 0.0 {
                x.push(
                    &factors,
                    three_letter(&factors, &fe.f, i, j, a[(i - 1, j - 1)]),
                )?;
            }
        }
    }
    Ok((factors, x))
}

/// a_ij = 1/(i − j) off the diagonal, 0 on it.
pub fn hilbert_witness(n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c(0.0)
        } else {
            c(1.0 / (i as f64 - j as f64))
        }
    })
}
