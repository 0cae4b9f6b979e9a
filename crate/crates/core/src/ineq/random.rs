//! Seeded random instances: complex Gaussian coefficients, mean-zero factor elements and
//! homogeneous free polynomials.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::freeprod::{FreeFactor, NcPoly, PolyTerm};
use crate::scalar::C64;

pub type InstanceRng = ChaCha8Rng;

pub fn rng(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of the i-th instance derived from a base seed.
pub fn instance_seed(base: u64, i: u64) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(i.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        ^ (i << 17)
}

/// Standard complex Gaussian: E|z|² = 1.
pub fn gaussian(rng: &mut InstanceRng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_real(rng: &mut InstanceRng) -> f64 {
    rng.sample(StandardNormal)
}

/// Uniform on [lo, hi).
pub fn uniform(rng: &mut InstanceRng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

pub fn gaussian_matrix(rng: &mut InstanceRng, r: usize, c: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(r, c);
    for j in 0..c {
        for i in 0..r {
            m[(i, j)] = gaussian(rng);
        }
    }
    m
}

pub fn random_sign(rng: &mut InstanceRng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Unit vector distributed as the first column of a Haar unitary.
pub fn haar_unit_vector(rng: &mut InstanceRng, n: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Mean-zero element with unit L₂ norm: the mean-zero ONB mixed by a Haar unit vector.
pub fn meanzero_element(rng: &mut InstanceRng, f: &FreeFactor) -> DMatrix<C64> {
    let c = haar_unit_vector(rng, f.meanzero_dim());
    f.meanzero_from(&c)
}

/// Self-adjoint mean-zero element with unit L₂ norm (real coordinates in a self-adjoint ONB
/// only for diagonal factors; otherwise the Hermitian part of a random element).
pub fn meanzero_selfadjoint(rng: &mut InstanceRng, f: &FreeFactor) -> DMatrix<C64> {
    let a = meanzero_element(rng, f);
    let h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
    let n = f.inner(&h, &h).re.sqrt();
    if n > 1e-8 {
        h / C64::new(n, 0.0)
    } else {
        a
    }
}

/// A uniformly chosen index sequence j_1 ≠ ⋯ ≠ j_d over n factors.
pub fn alternating_indices(rng: &mut InstanceRng, n: usize, d: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(d);
    for i in 0..d {
        let k = if i == 0 || n == 1 {
            rng.random_range(0..n)
        } else {
            let r = rng.random_range(0..n - 1);
            if r >= out[i - 1] {
                r + 1
            } else {
                r
            }
        };
        out.push(k);
    }
    out
}

/// A degree-d polynomial with `terms` random terms, m×m Gaussian coefficients scaled by
/// 1/√terms, and index tuples drawn by `pick`.
pub fn random_poly_with(
    rng: &mut InstanceRng,
    factors: &[FreeFactor],
    m: usize,
    d: usize,
    terms: usize,
    mut pick: impl FnMut(&mut InstanceRng) -> Vec<usize>,
) -> Result<NcPoly> {
    let scale = C64::new(1.0 / (terms.max(1) as f64).sqrt(), 0.0);
    let mut p = NcPoly::zero(m, d);
    for _ in 0..terms {
        let idx = pick(rng);
        let letters = idx
            .iter()
            .map(|&k| meanzero_element(rng, &factors[k]))
            .collect();
        let coef = gaussian_matrix(rng, m, m) * scale;
        p.push(
            factors,
            PolyTerm {
                indices: idx,
                letters,
                coef,
            },
        )?;
    }
    Ok(p)
}

pub fn random_poly(
    rng: &mut InstanceRng,
    factors: &[FreeFactor],
    m: usize,
    d: usize,
    terms: usize,
) -> Result<NcPoly> {
    let n = factors.len();
    random_poly_with(rng, factors, m, d, terms, |r| alternating_indices(r, n, d))
}

/// Random polynomial whose terms all start and end in factor k (the range of Q_k); zero when
/// that range is empty (d = 2, or d ≥ 2 with one factor).
pub fn random_q_poly(
    rng: &mut InstanceRng,
    factors: &[FreeFactor],
    k: usize,
    m: usize,
    d: usize,
    terms: usize,
) -> Result<NcPoly> {
    let n = factors.len();
    if d == 2 || (d > 1 && n == 1) {
        return Ok(NcPoly::zero(m, d));
    }
    random_poly_with(rng, factors, m, d, terms, |r| loop {
        let mut idx = alternating_indices(r, n, d);
        if let Some(first) = idx.first_mut() {
            *first = k;
        }
        if let Some(last) = idx.last_mut() {
            *last = k;
        }
        if idx.windows(2).all(|w| w[0] != w[1]) {
            return idx;
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_streams_repeat() {
        let mut a = rng(5);
        let mut b = rng(5);
        for _ in 0..10 {
            assert_eq!(gaussian(&mut a), gaussian(&mut b));
        }
        assert_ne!(instance_seed(1, 0), instance_seed(1, 1));
    }

    #[test]
    fn alternating_indices_alternate() {
        let mut r = rng(1);
        for _ in 0..100 {
            let idx = alternating_indices(&mut r, 3, 5);
            assert!(idx.windows(2).all(|w| w[0] != w[1]));
            assert!(idx.iter().all(|&k| k < 3));
        }
    }

    #[test]
    fn meanzero_elements_are_normalized() {
        let f = FreeFactor::quadrature(crate::freeprod::Measure::Wigner, 4).unwrap();
        let mut r = rng(3);
        let a = meanzero_element(&mut r, &f);
        assert!(f.state(&a).norm() < 1e-14);
        assert!((f.inner(&a, &a).re - 1.0).abs() < 1e-12);
    }
}
