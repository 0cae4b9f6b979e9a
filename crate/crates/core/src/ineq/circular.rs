//! Generalized circular families on the (q-)Fock space: the Khintchine endpoints for
//! Σ x_k ⊗ g_k and the double-indexed chaos Σ_{i≠j} x_ij ⊗ g_i g_j.

use nalgebra::DMatrix;

use super::brackets::{split_norm, SplitTerm};
use super::report::InequalityReport;
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, LinearOperator};
use crate::normcalc::{
    op_norm, op_norm_dense, psd_sqrt, sqrt_psd_norm, PIndex, TraceNormalization,
};
use crate::qfock::{generalized_circular, generalized_circular_adjoint, FockSpaceSpec, QMetric};
use crate::scalar::C64;

const UN: TraceNormalization = TraceNormalization::Unnormalized;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn check_weights(n: usize, lambda: &[f64], mu: &[f64]) -> Result<()> {
    if lambda.len() != n || mu.len() != n {
        return Err(Error::validation("one λ and one μ per index"));
    }
    if lambda
        .iter()
        .chain(mu)
        .any(|v| !(v.is_finite() && *v > 0.0))
    {
        return Err(Error::validation("λ and μ must be positive"));
    }
    Ok(())
}

fn check_square(xs: &[&DMatrix<C64>]) -> Result<usize> {
    let m = xs.first().map(|x| x.nrows()).unwrap_or(1);
    if xs.iter().any(|x| x.nrows() != m || x.ncols() != m) {
        return Err(Error::validation("coefficients must share a square shape"));
    }
    Ok(m)
}

/// A # B = A^{1/2} (A^{−1/2} B A^{−1/2})^{1/2} A^{1/2} for positive definite A and PSD B.
pub fn geometric_mean(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let ah = psd_sqrt(a)?;
    let ahi = ah.clone().try_inverse().ok_or_else(|| {
        Error::Numerical("geometric mean needs an invertible first argument".into())
    })?;
    let inner = &ahi * b * &ahi;
    let inner = (&inner + inner.adjoint()) * c(0.5);
    Ok(&ah * psd_sqrt(&inner)? * &ah)
}

/// ⟨u, v⟩ for the Gram matrix g.
fn q_inner(g: &CsrMatrix, u: &[C64], v: &[C64]) -> C64 {
    let mut gv = vec![c(0.0); v.len()];
    g.matvec(v, &mut gv);
    u.iter().zip(&gv).map(|(a, b)| a.conj() * b).sum()
}

fn vacuum(dim: usize) -> Vec<C64> {
    let mut v = vec![c(0.0); dim];
    v[0] = c(1.0);
    v
}

/// ‖Σ x_k ⊗ g_k‖ at p = ∞ (truncated q-Fock norm) or p = 2 (vacuum pairing).
pub fn theorem_e_report(
    x: &[DMatrix<C64>],
    lambda: &[f64],
    mu: &[f64],
    q: f64,
    p: PIndex,
    depth: usize,
) -> Result<InequalityReport> {
    let n = x.len();
    if n == 0 {
        return Err(Error::validation("empty family"));
    }
    check_weights(n, lambda, mu)?;
    let m = check_square(&x.iter().collect::<Vec<_>>())?;
    let mut r = InequalityReport::new("gen_circular")
        .param("n", n)
        .param("m", m)
        .param("p", p)
        .param("q", q)
        .param("lambda", lambda)
        .param("mu", mu)
        .param("depth", depth);
    match p {
        PIndex::Infinity => {
            let spec = FockSpaceSpec::new(n, depth, q)?;
            let metric = QMetric::new(&spec)?;
            let mut op = LinearOperator::zero(m, spec.dim());
            for k in 0..n {
                op = op.add(&generalized_circular(&spec, k + 1, lambda[k], mu[k])?.amplify(&x[k]));
            }
            let lhs = metric.q_norm(&op)?;
            let mut rowh = DMatrix::zeros(m, m);
            let mut colh = DMatrix::zeros(m, m);
            for k in 0..n {
                rowh += &x[k] * x[k].adjoint() * c(mu[k] * mu[k]);
                colh += x[k].adjoint() * &x[k] * c(lambda[k] * lambda[k]);
            }
            let row = sqrt_psd_norm(&rowh, p, UN)?;
            let col = sqrt_psd_norm(&colh, p, UN)?;
            r.push_term("row", row);
            r.push_term("col", col);
            let rhs = row.max(col);
            let cq = 2.0 / (1.0 - q.abs()).sqrt();
            r.check("lhs_le_cq_rhs", lhs, cq * rhs, 1e-6);
            r.certified = false;
            r.note("lhs is a truncated operator norm");
            r.finish(lhs, rhs);
        }
        PIndex::Finite(e) if e == 2.0 => {
            let spec = FockSpaceSpec::new(n, 1, q)?;
            let metric = QMetric::new(&spec)?;
            let g = metric.gram();
            let om = vacuum(spec.dim());
            let kets = (0..n)
                .map(|k| Ok(generalized_circular(&spec, k + 1, lambda[k], mu[k])?.apply(&om)))
                .collect::<Result<Vec<_>>>()?;
            let bras = (0..n)
                .map(|k| {
                    Ok(generalized_circular_adjoint(&spec, k + 1, lambda[k], mu[k])?.apply(&om))
                })
                .collect::<Result<Vec<_>>>()?;
            let a = DMatrix::from_fn(n, n, |k, l| q_inner(g, &kets[k], &kets[l]));
            let b = DMatrix::from_fn(n, n, |k, l| q_inner(g, &bras[l], &bras[k]));
            let pm = geometric_mean(&a, &b)?;
            let mut lhs2 = c(0.0);
            for k in 0..n {
                for l in 0..n {
                    lhs2 += (x[k].adjoint() * &x[l]).trace() * pm[(k, l)];
                }
            }
            let lhs = lhs2.re.max(0.0).sqrt();
            let target: f64 = (0..n)
                .map(|k| lambda[k] * mu[k] * (x[k].adjoint() * &x[k]).trace().re)
                .sum();
            let rhs = target.sqrt();
            r.push_term("row", rhs);
            r.push_term("col", rhs);
            r.check_equal("l2_identity", lhs2.re, target, 1e-10);
            r.certified = true;
            r.finish(lhs, rhs);
        }
        _ => return Err(Error::validation(format!("p must be 2 or inf, got {p}"))),
    }
    Ok(r)
}

/// Restriction of an amplified operator to the first `keep` basis vectors of its space.
pub fn compress(op: &LinearOperator, keep: usize) -> Result<LinearOperator> {
    let (m, s) = (op.coeff_dim, op.space_dim);
    if keep > s {
        return Err(Error::validation("cannot compress to a larger space"));
    }
    let trip: Vec<(usize, usize, C64)> = op
        .matrix
        .triplets()
        .filter(|&(i, j, _)| i % s < keep && j % s < keep)
        .map(|(i, j, v)| ((i / s) * keep + i % s, (j / s) * keep + j % s, v))
        .collect();
    LinearOperator::new(m, keep, CsrMatrix::from_triplets(m * keep, m * keep, trip))
}

/// ‖Σ_{i≠j} x_ij ⊗ g_i g_j‖ on the free (q = 0) Fock space against the weighted row, column
/// and block norms at p = ∞.
pub fn theorem_f_report(
    x: &[Vec<Option<DMatrix<C64>>>],
    lambda: &[f64],
    mu: &[f64],
    depth: usize,
) -> Result<InequalityReport> {
    let n = x.len();
    if n < 2 || x.iter().any(|row| row.len() != n) {
        return Err(Error::validation("x must be an n×n grid with n ≥ 2"));
    }
    if (0..n).any(|i| x[i][i].is_some()) {
        return Err(Error::validation("diagonal pairs are not allowed"));
    }
    check_weights(n, lambda, mu)?;
    let pairs: Vec<(usize, usize, &DMatrix<C64>)> = (0..n)
        .flat_map(|i| (0..n).filter_map(move |j| x[i][j].as_ref().map(|v| (i, j, v))))
        .collect();
    let m = check_square(&pairs.iter().map(|t| t.2).collect::<Vec<_>>())?;
    if depth < 1 {
        return Err(Error::validation("depth must be at least 1"));
    }

    // The product g_i g_j is compressed exactly by working one level deeper.
    let spec = FockSpaceSpec::new(n, depth + 1, 0.0)?;
    let gs = (0..n)
        .map(|k| generalized_circular(&spec, k + 1, lambda[k], mu[k]))
        .collect::<Result<Vec<_>>>()?;
    let mut op = LinearOperator::zero(m, spec.dim());
    for &(i, j, v) in &pairs {
        op = op.add(&gs[i].mul(&gs[j]).amplify(v));
    }
    let keep = spec.level_range(depth).end;
    let lhs = if pairs.is_empty() {
        0.0
    } else {
        op_norm(&compress(&op, keep)?)
    };

    let mut block = DMatrix::zeros(n * m, n * m);
    let mut rowh = DMatrix::zeros(m, m);
    let mut colh = DMatrix::zeros(m, m);
    for &(i, j, v) in &pairs {
        block
            .view_mut((i * m, j * m), (m, m))
            .copy_from(&(v * c(lambda[i] * mu[j])));
        rowh += v * v.adjoint() * c((mu[i] * mu[j]).powi(2));
        colh += v.adjoint() * v * c((lambda[i] * lambda[j]).powi(2));
    }
    let row = sqrt_psd_norm(&rowh, PIndex::Infinity, UN)?;
    let mid = op_norm_dense(&block);
    let col = sqrt_psd_norm(&colh, PIndex::Infinity, UN)?;

    // Split-position brackets from Fock-space vacuum Gram matrices.
    let sigma1 = if pairs.is_empty() {
        0.0
    } else {
        let om = vacuum(spec.dim());
        let adj = (0..n)
            .map(|k| generalized_circular_adjoint(&spec, k + 1, lambda[k], mu[k]))
            .collect::<Result<Vec<_>>>()?;
        let gram = CsrMatrix::identity(spec.dim());
        let gram_of = |vs: &[Vec<C64>]| {
            DMatrix::from_fn(vs.len(), vs.len(), |a, b| q_inner(&gram, &vs[a], &vs[b]))
        };
        let one = DMatrix::from_element(1, 1, c(1.0));
        let full_kets: Vec<Vec<C64>> = pairs
            .iter()
            .map(|&(i, j, _)| gs[i].apply(&gs[j].apply(&om)))
            .collect();
        let full_bras: Vec<Vec<C64>> = pairs
            .iter()
            .map(|&(i, j, _)| adj[j].apply(&adj[i].apply(&om)))
            .collect();
        let single_kets: Vec<Vec<C64>> = (0..n).map(|i| gs[i].apply(&om)).collect();
        let single_bras: Vec<Vec<C64>> = (0..n).map(|j| adj[j].apply(&om)).collect();
        let coef = |t: usize| pairs[t].2.clone();
        let s2: Vec<SplitTerm> = (0..pairs.len())
            .map(|t| SplitTerm {
                ket: t,
                bra: 0,
                coef: coef(t),
                middle: None,
            })
            .collect();
        let s0: Vec<SplitTerm> = (0..pairs.len())
            .map(|t| SplitTerm {
                ket: 0,
                bra: t,
                coef: coef(t),
                middle: None,
            })
            .collect();
        let s1: Vec<SplitTerm> = (0..pairs.len())
            .map(|t| SplitTerm {
                ket: pairs[t].0,
                bra: pairs[t].1,
                coef: coef(t),
                middle: None,
            })
            .collect();
        let inf = PIndex::Infinity;
        split_norm(&one, &gram_of(&full_bras), &s0, inf)?
            + split_norm(&gram_of(&single_kets), &gram_of(&single_bras), &s1, inf)?
            + split_norm(&gram_of(&full_kets), &one, &s2, inf)?
    };

    let mut r = InequalityReport::new("theorem_f")
        .param("n", n)
        .param("m", m)
        .param("p", PIndex::Infinity)
        .param("q", 0.0)
        .param("lambda", lambda)
        .param("mu", mu)
        .param("depth", depth);
    r.push_term("row", row);
    r.push_term("mid", mid);
    r.push_term("col", col);
    let rhs = row.max(mid).max(col);
    r.diag("sigma1", sigma1);
    let tol = 1e-9 * rhs.max(1e-12);
    r.check("lhs_le_sigma1", lhs, sigma1, tol);
    r.check("rhs_le_sigma1", rhs, sigma1, tol);
    r.check("sigma1_le_4rhs", sigma1, 4.0 * rhs, tol);
    r.certified = false;
    r.note("lhs is a truncated operator norm");
    r.finish(lhs, rhs);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ineq::random::{gaussian_matrix, rng};

    #[test]
    fn geometric_mean_of_diagonals() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(4.0), c(1.0)]));
        let b = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(9.0), c(16.0)]));
        let g = geometric_mean(&a, &b).unwrap();
        assert!((g[(0, 0)].re - 6.0).abs() < 1e-12);
        assert!((g[(1, 1)].re - 4.0).abs() < 1e-12);
        assert!(g[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn geometric_mean_is_symmetric() {
        let mut g = rng(3);
        let x = gaussian_matrix(&mut g, 3, 3);
        let y = gaussian_matrix(&mut g, 3, 3);
        let a = &x * x.adjoint() + DMatrix::identity(3, 3);
        let b = &y * y.adjoint() + DMatrix::identity(3, 3);
        let ab = geometric_mean(&a, &b).unwrap();
        let ba = geometric_mean(&b, &a).unwrap();
        assert!((ab - ba).norm() < 1e-10);
    }

    #[test]
    fn scalar_single_circular() {
        // ‖λℓ + μℓ*‖ on the free Fock space is λ + μ; the truncation approaches it from below.
        let one = vec![DMatrix::from_element(1, 1, c(1.0))];
        let r = theorem_e_report(&one, &[1.0], &[0.5], 0.0, PIndex::Infinity, 8).unwrap();
        assert!(r.lhs <= 1.5 + 1e-12 && r.lhs > 1.35, "{}", r.lhs);
        assert!((r.rhs_combined - 1.0).abs() < 1e-12);
        assert!(r.passed());
    }

    #[test]
    fn l2_identity_on_diagonal_units() {
        let n = 3;
        let x: Vec<DMatrix<C64>> = (0..n)
            .map(|k| {
                let mut e = DMatrix::zeros(n, n);
                e[(k, k)] = c(1.0);
                e
            })
            .collect();
        let lam = [0.5, 1.0, 2.0];
        let mu = [1.5, 0.3, 0.7];
        for q in [0.0, 0.5, -0.5] {
            let r = theorem_e_report(&x, &lam, &mu, q, PIndex::Finite(2.0), 1).unwrap();
            let expect: f64 = lam.iter().zip(&mu).map(|(a, b)| a * b).sum();
            assert!((r.lhs * r.lhs - expect).abs() < 1e-12);
            assert!(r.passed());
        }
        assert!(theorem_e_report(&x, &lam, &mu, 0.0, PIndex::Finite(3.0), 1).is_err());
    }

    #[test]
    fn double_chaos_cross_check() {
        let mut g = rng(8);
        let n = 3;
        let x: Vec<Vec<Option<DMatrix<C64>>>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (i != j).then(|| gaussian_matrix(&mut g, 2, 2)))
                    .collect()
            })
            .collect();
        let r = theorem_f_report(&x, &[1.0, 0.7, 1.3], &[0.4, 1.1, 0.9], 3).unwrap();
        assert!(r.passed(), "{:?}", r.failed_checks());
        let s1 = r.diagnostic("sigma1").unwrap();
        let sum = r.term("row").unwrap() + r.term("mid").unwrap() + r.term("col").unwrap();
        assert!((s1 - sum).abs() < 1e-10 * sum);
    }

    #[test]
    fn zero_chaos() {
        let z = || Some(DMatrix::<C64>::zeros(2, 2));
        let x: Vec<Vec<Option<DMatrix<C64>>>> = vec![vec![None, z()], vec![z(), None]];
        let r = theorem_f_report(&x, &[1.0, 1.0], &[1.0, 1.0], 2).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs_combined, 0.0);
        assert!(r.rhs_terms.iter().all(|t| t.value == 0.0));
        assert!(r.passed());
    }
}
