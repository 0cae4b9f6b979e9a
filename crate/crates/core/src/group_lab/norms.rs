//! Even L_p norms and operator-norm estimates from trace moments τ((x*x)^m).

use serde::{Deserialize, Serialize};

use super::element::GroupAlgElement;
use super::packed::{Alphabet, PackedElement};
use crate::capacity::Capacity;
use crate::error::{ensure, Result};
use crate::scalar::{Scalar, C64};

/// Work bound (support × support products) for one convolution in the moment sequence.
pub const DEFAULT_WORK_LIMIT: usize = 40_000_000;

fn trace_of_product<S: Scalar>(a: &GroupAlgElement<S>, b_selfadjoint: &GroupAlgElement<S>) -> S {
    // τ(a b) = Σ_w a(w) b(w⁻¹) and b(w⁻¹) = conj b(w) for self-adjoint b.
    let mut acc = S::zero();
    for (w, c) in a.terms() {
        let d = b_selfadjoint.coeff(w);
        if !num_traits::Zero::is_zero(&d) {
            acc = acc + c.clone() * d.conj();
        }
    }
    acc
}

/// τ((x*x)^m) computed exactly in the coefficient field.
pub fn trace_power<S: Scalar>(x: &GroupAlgElement<S>, m: usize) -> Result<S> {
    let y = x.adjoint().convolve(x)?;
    if m == 0 {
        return Ok(S::one());
    }
    let a = m.div_ceil(2);
    let b = m / 2;
    let mut pows = vec![GroupAlgElement::unit()];
    for _ in 0..a {
        let next = pows.last().unwrap().convolve(&y)?;
        pows.push(next);
    }
    Ok(trace_of_product(&pows[a], &pows[b]))
}

/// ‖x‖_{2m} = τ((x*x)^m)^{1/2m}.
pub fn lp_norm_even<S: Scalar>(x: &GroupAlgElement<S>, m: usize) -> Result<f64> {
    ensure(m >= 1, || "lp_norm_even needs m ≥ 1".into())?;
    let t = trace_power(x, m)?.to_c64().re;
    Ok(t.max(0.0).powf(1.0 / (2 * m) as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpNormDiagnostics {
    /// τ((x*x)^m) for m = 0..=m_reached+1 (as far as computed).
    pub moments: Vec<f64>,
    /// √(t_{m+1}/t_m) for m = 0..=m_reached.
    pub ratios: Vec<f64>,
    /// Aitken Δ² value from the last three ratios, if available.
    pub aitken: Option<f64>,
    /// Fit of log t_m ≈ c + 2m log R − γ log m on the last three moments: (R, γ).
    pub power_law_fit: Option<(f64, f64)>,
    /// Largest m whose ratio was computed.
    pub m_reached: usize,
    pub m_requested: usize,
    pub capacity_limited: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupOpNormEstimate {
    /// max_m √(t_{m+1}/t_m): a rigorous lower bound for ‖λ(x)‖.
    pub lower_bound: f64,
    /// Extrapolated value, never below the lower bound.
    pub extrapolated: f64,
    pub diagnostics: OpNormDiagnostics,
}

/// Estimates ‖λ(x)‖ from the moment ratios for m ≤ m_max, stopping early when the
/// supports of (x*x)^k outgrow the capacity or the work limit.
pub fn op_norm_estimate(x: &GroupAlgElement<C64>, m_max: usize) -> Result<GroupOpNormEstimate> {
    op_norm_estimate_with(x, m_max, Capacity::global(), DEFAULT_WORK_LIMIT)
}

pub fn op_norm_estimate_with(
    x: &GroupAlgElement<C64>,
    m_max: usize,
    cap: Capacity,
    work_limit: usize,
) -> Result<GroupOpNormEstimate> {
    ensure(m_max >= 1, || "m_max must be at least 1".into())?;
    let (moments, limited) = chain_moments(x, m_max, cap, work_limit)?;
    if moments.get(1).copied().unwrap_or(0.0) <= 0.0 {
        return Ok(GroupOpNormEstimate {
            lower_bound: 0.0,
            extrapolated: 0.0,
            diagnostics: OpNormDiagnostics {
                moments,
                ratios: vec![],
                aitken: None,
                power_law_fit: None,
                m_reached: 0,
                m_requested: m_max,
                capacity_limited: limited,
            },
        });
    }
    let ratios: Vec<f64> = moments
        .windows(2)
        .map(|w| (w[1] / w[0]).max(0.0).sqrt())
        .collect();
    let lower = ratios.iter().copied().fold(0.0, f64::max);
    let aitken = if ratios.len() >= 3 {
        let n = ratios.len();
        let (s0, s1, s2) = (ratios[n - 3], ratios[n - 2], ratios[n - 1]);
        let den = s2 - 2.0 * s1 + s0;
        if den.abs() > 1e-300 {
            Some(s2 - (s2 - s1).powi(2) / den)
        } else {
            Some(s2)
        }
    } else {
        None
    };
    let fit = if moments.len() >= 4 {
        let m = (moments.len() - 2) as f64;
        power_law_fit(
            [m - 1.0, m, m + 1.0],
            [
                moments[moments.len() - 3].ln(),
                moments[moments.len() - 2].ln(),
                moments[moments.len() - 1].ln(),
            ],
        )
    } else {
        None
    };
    let candidate = match (fit, aitken) {
        (Some((r, gamma)), _) if r.is_finite() && (0.0..=4.0).contains(&gamma) => r,
        (_, Some(a)) if a.is_finite() => a,
        _ => lower,
    };
    Ok(GroupOpNormEstimate {
        lower_bound: lower,
        extrapolated: candidate.max(lower),
        diagnostics: OpNormDiagnostics {
            moments,
            m_reached: ratios.len() - 1,
            ratios,
            aitken,
            power_law_fit: fit,
            m_requested: m_max,
            capacity_limited: limited,
        },
    })
}

/// τ((x*x)^k) for k = 0..=m_max+1 as ‖u_k‖₂² with u_k = x x* x x* ... (k factors); stops
/// early (second value true) at the capacity or the work limit.
fn chain_moments(
    x: &GroupAlgElement<C64>,
    m_max: usize,
    cap: Capacity,
    work_limit: usize,
) -> Result<(Vec<f64>, bool)> {
    let xs = x.adjoint();
    let n = x.terms().map(|(w, _)| w.max_generator()).max().unwrap_or(0);
    let longest = x.terms().map(|(w, _)| w.letter_length()).max().unwrap_or(0);
    let mut moments = vec![1.0];
    if let Some(a) = Alphabet::new(n, longest * (m_max + 1)) {
        let f = [PackedElement::pack(x, &a), PackedElement::pack(&xs, &a)];
        let mut u = PackedElement::unit();
        for k in 1..=m_max + 1 {
            let fk = &f[(k + 1) % 2];
            if u.len().saturating_mul(fk.len()) > work_limit {
                return Ok((moments, true));
            }
            match u.convolve(fk, &a, cap) {
                Ok(next) => u = next,
                Err(e) if e.is_capacity() => return Ok((moments, true)),
                Err(e) => return Err(e),
            }
            moments.push(u.l2_norm_sqr());
        }
        return Ok((moments, false));
    }
    let mut u = GroupAlgElement::<C64>::unit();
    for k in 1..=m_max + 1 {
        let fk = if k % 2 == 1 { x } else { &xs };
        if u.support_len().saturating_mul(fk.support_len()) > work_limit {
            return Ok((moments, true));
        }
        match u.convolve_with(fk, cap) {
            Ok(next) => u = next,
            Err(e) if e.is_capacity() => return Ok((moments, true)),
            Err(e) => return Err(e),
        }
        moments.push(u.l2_norm_sqr());
    }
    Ok((moments, false))
}

/// Solves log t_m = c + 2m log R − γ log m through three points; returns (R, γ).
fn power_law_fit(ms: [f64; 3], logs: [f64; 3]) -> Option<(f64, f64)> {
    let a = nalgebra::Matrix3::new(
        1.0,
        2.0 * ms[0],
        -ms[0].ln(),
        1.0,
        2.0 * ms[1],
        -ms[1].ln(),
        1.0,
        2.0 * ms[2],
        -ms[2].ln(),
    );
    let b = nalgebra::Vector3::new(logs[0], logs[1], logs[2]);
    let sol = a.lu().solve(&b)?;
    Some((sol[1].exp(), sol[2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_lab::GroupWord;
    use crate::scalar::{exact_gaussian, ExactC};

    fn gens(n: u32) -> GroupAlgElement<ExactC> {
        GroupAlgElement::from_terms(
            (1..=n).map(|k| (GroupWord::generator(k), exact_gaussian(1, 0))),
        )
    }

    #[test]
    fn four_norm_of_two_generators() {
        let x = gens(2);
        assert_eq!(trace_power(&x, 2).unwrap(), exact_gaussian(6, 0));
        let v = lp_norm_even(&x, 2).unwrap();
        assert!((v - 6f64.powf(0.25)).abs() < 1e-15);
    }

    #[test]
    fn first_ratio_is_sqrt_three() {
        let x = gens(2).to_c64();
        let est = op_norm_estimate(&x, 1).unwrap();
        assert!((est.diagnostics.ratios[1] - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn kesten_three_generators() {
        let x = gens(3).to_c64();
        let est = op_norm_estimate(&x, 8).unwrap();
        let target = 2.0 * 2f64.sqrt();
        assert!(est.lower_bound <= target);
        assert!(
            ((est.extrapolated - target) / target).abs() < 0.02,
            "{est:?}"
        );
        assert!(!est.diagnostics.capacity_limited);
        // Moment sequence of Σ λ(g_k) for three generators.
        assert_eq!(
            &est.diagnostics.moments[..5],
            &[1.0, 3.0, 15.0, 87.0, 543.0]
        );
    }

    #[test]
    fn chain_moments_match_trace_powers() {
        let x: GroupAlgElement<ExactC> = GroupAlgElement::from_terms([
            (GroupWord::parse("g1*g2").unwrap(), exact_gaussian(2, -1)),
            (GroupWord::parse("g2^-1").unwrap(), exact_gaussian(1, 3)),
            (GroupWord::parse("g3*g1^2").unwrap(), exact_gaussian(-1, 0)),
        ]);
        let est = op_norm_estimate(&x.to_c64(), 5).unwrap();
        for m in 0..=6 {
            let t = trace_power(&x, m).unwrap();
            let exact = crate::scalar::rat_to_f64(&t.re);
            assert!(
                (est.diagnostics.moments[m] - exact).abs() <= 1e-12 * exact,
                "m = {m}"
            );
        }
    }

    #[test]
    fn zero_element() {
        let est = op_norm_estimate(&GroupAlgElement::<C64>::zero(), 4).unwrap();
        assert_eq!(est.extrapolated, 0.0);
    }
}
