//! Haagerup's inequality on words of fixed length: ℓ₂ ≤ ‖Σ α_w λ(w)‖ ≤ (1 + d) ℓ₂.

use super::random::{gaussian, InstanceRng};
use super::report::InequalityReport;
use crate::error::{Error, Result};
use crate::group_lab::{op_norm_estimate, words_of_letter_length, GroupAlgElement, GroupWord};
use crate::normcalc::PIndex;
use crate::scalar::C64;

/// Declared slack on the extrapolated operator norm.
pub const EXTRAPOLATION_SLACK: f64 = 1.05;

pub fn haagerup_report(
    alpha: &[(GroupWord, C64)],
    d: usize,
    m_max: usize,
) -> Result<InequalityReport> {
    if alpha.iter().any(|(w, _)| w.letter_length() != d) {
        return Err(Error::validation(format!(
            "every word must have length {d}"
        )));
    }
    let x = GroupAlgElement::from_terms(alpha.iter().cloned());
    let l2 = x.l2_norm();
    let est = op_norm_estimate(&x, m_max)?;
    let n = alpha
        .iter()
        .map(|(w, _)| w.max_generator())
        .max()
        .unwrap_or(0);
    let mut r = InequalityReport::new("haagerup")
        .param("n", n)
        .param("d", d)
        .param("p", PIndex::Infinity)
        .param("m_max", m_max)
        .param("words", alpha.len());
    r.push_term("l2", l2);
    r.diag("lower_bound", est.lower_bound);
    r.diag("m_reached", est.diagnostics.m_reached as f64);
    r.check("l2_le_lower_bound", l2, est.lower_bound, 1e-9);
    r.check(
        "extrapolated_le_(1+d)_l2",
        est.extrapolated,
        (1 + d) as f64 * l2 * EXTRAPOLATION_SLACK,
        0.0,
    );
    r.certified = false;
    r.note("lhs is an extrapolated operator norm");
    if est.diagnostics.capacity_limited {
        r.note(&format!(
            "moments stopped at m = {}",
            est.diagnostics.m_reached
        ));
    }
    r.finish(est.extrapolated, l2);
    Ok(r)
}

/// Gaussian coefficients on every reduced word of length d in F_n.
pub fn random_haagerup(rng: &mut InstanceRng, n: u32, d: usize) -> Vec<(GroupWord, C64)> {
    words_of_letter_length(n, d)
        .into_iter()
        .map(|w| (w, gaussian(rng)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ineq::random::rng;

    #[test]
    fn single_generator_is_unitary() {
        let r = haagerup_report(&[(GroupWord::generator(1), C64::new(1.0, 0.0))], 1, 8).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-9);
        assert!((r.rhs_combined - 1.0).abs() < 1e-15);
        assert!(r.passed());
    }

    #[test]
    fn equal_weights_reach_kesten_value() {
        let alpha: Vec<_> = (1..=3)
            .map(|k| (GroupWord::generator(k), C64::new(1.0, 0.0)))
            .collect();
        let r = haagerup_report(&alpha, 1, 8).unwrap();
        let expect = 2.0 * 2f64.sqrt() / 3f64.sqrt();
        assert!(
            (r.ratio_lo - expect).abs() < 0.02 * expect,
            "{}",
            r.ratio_lo
        );
    }

    #[test]
    fn random_length_two_words() {
        let mut g = rng(3);
        let alpha = random_haagerup(&mut g, 2, 2);
        assert_eq!(alpha.len(), 12);
        let r = haagerup_report(&alpha, 2, 8).unwrap();
        assert!(r.passed(), "{:?}", r.failed_checks());
        assert!(r.ratio_lo >= 1.0 && r.ratio_lo <= 3.0 * EXTRAPOLATION_SLACK);
    }
}
