//! Acceptance suite: one PASS/FAIL line per criterion, with sub-check details.
//!
//! Runs without the libtest harness so the lines are always printed. The process exits
//! nonzero only when a sub-check fails that is not listed in `KNOWN_FAILURES`.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use freechaos::experiments::{
    hilbert_witness, k_estimate_sweep, matrix_equivalence_report, prop_sq1_check,
    random_martingale, standard_factors, strictly_increasing, triangular_projection_witness,
    MartingaleSpec, NormRoute,
};
use freechaos::freeprod::{
    catalan, free_moment, free_moment_exact, FreeFactor, FreeProductRep, Measure,
};
use freechaos::group_lab::{
    bubble_identities_hold, dykema_residual, lp_norm_even, op_norm_estimate, popa_example,
    trace_power, GroupAlgElement, GroupWord,
};
use freechaos::ineq::random::{
    gaussian_matrix, instance_seed, meanzero_element, random_poly, random_q_poly, rng, uniform,
    InstanceRng,
};
use freechaos::ineq::{
    haagerup_report, khintchine_report, random_haagerup, random_reduction_items, reduction_report,
    rosenthal_report, theorem_e_report, FreeNorms, InequalityReport,
};
use freechaos::normcalc::PIndex;
use freechaos::qfock::{
    self, generalized_circular, generalized_circular_adjoint, row_sum_operator, semicircular,
    vacuum_state, FockSpaceSpec, QMetric,
};
use freechaos::scalar::{exact_gaussian, rat_to_f64, ExactC, Scalar, C64};
use freechaos::Result;

use freechaos_cli::config::{ExperimentConfig, Format, EXPERIMENTS};
use freechaos_cli::output::render;
use freechaos_cli::run::run;

/// Sub-checks that fail for reasons analysed in the decisions ledger.
const KNOWN_FAILURES: &[&str] = &["14/k_trend_moments", "14/triangular_gap"];

const SEED: u64 = 20_240_601;

struct Sub {
    name: String,
    passed: bool,
    detail: String,
}

#[derive(Default)]
struct Outcome {
    subs: Vec<Sub>,
}

impl Outcome {
    fn record(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.subs.push(Sub {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    /// Every report must pass its own checks; the first failures are listed.
    fn reports(&mut self, name: &str, reports: &[InequalityReport]) {
        let bad: Vec<String> = reports
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.passed())
            .take(3)
            .map(|(i, r)| {
                let c: Vec<String> = r
                    .failed_checks()
                    .iter()
                    .map(|c| format!("{} {:.6e} > {:.6e}", c.name, c.value, c.bound))
                    .collect();
                format!("#{i} {}", c.join("; "))
            })
            .collect();
        let detail = if bad.is_empty() {
            format!("{} reports", reports.len())
        } else {
            format!("{} reports, failing {}", reports.len(), bad.join(" | "))
        };
        self.record(name, bad.is_empty(), detail);
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn vacuum(dim: usize) -> Vec<C64> {
    let mut v = vec![c(0.0); dim];
    v[0] = c(1.0);
    v
}

fn small_int(g: &mut InstanceRng, r: i64) -> i64 {
    uniform(g, -(r as f64) - 0.5, r as f64 + 0.5).round() as i64
}

fn c1_qfock_selftest(o: &mut Outcome) -> Result<()> {
    let mut worst_adj: f64 = 0.0;
    let mut worst_eig = f64::INFINITY;
    for letters in 1..=3 {
        for depth in 1..=4 {
            for q in [-0.9, -0.5, 0.0, 0.5, 0.9] {
                let t = qfock::self_test(letters, depth, q)?;
                worst_adj = worst_adj.max(t.max_adjointness_defect);
                worst_eig = worst_eig.min(t.min_gram_eigenvalue);
            }
        }
    }
    o.record(
        "adjointness",
        worst_adj < 1e-12,
        format!("max defect {worst_adj:.3e}"),
    );
    o.record(
        "gram_psd",
        worst_eig >= -1e-10,
        format!("min eigenvalue {worst_eig:.3e}"),
    );
    Ok(())
}

fn c2_semicircle(o: &mut Outcome) -> Result<()> {
    let spec = FockSpaceSpec::new(1, 6, 0.0)?;
    let s = semicircular(&spec, 1)?;
    let mut v = vacuum(spec.dim());
    let mut bad = Vec::new();
    for j in 1..=12 {
        v = s.apply(&v);
        if j % 2 == 0 {
            let k = j / 2;
            let m = v[0];
            if m != c(catalan(k) as f64) {
                bad.push(format!("k={k}: {m}"));
            }
        }
    }
    o.record(
        "moments_equal_catalan",
        bad.is_empty(),
        format!("k = 1..6 {}", bad.join(", ")),
    );
    Ok(())
}

fn c3_circular_vacuum(o: &mut Outcome) -> Result<()> {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for q in [0.0, 0.5, -0.5] {
        for n in 1..=4 {
            let mut g = rng(instance_seed(
                SEED,
                (n * 10) as u64 + (q * 4.0 + 2.0) as u64,
            ));
            let lambda: Vec<f64> = (0..n).map(|_| uniform(&mut g, 0.25, 2.0)).collect();
            let mu: Vec<f64> = (0..n).map(|_| uniform(&mut g, 0.25, 2.0)).collect();
            let spec = FockSpaceSpec::new(n, 2, q)?;
            let gs: Vec<_> = (0..n)
                .map(|k| generalized_circular(&spec, k + 1, lambda[k], mu[k]))
                .collect::<Result<_>>()?;
            let gas: Vec<_> = (0..n)
                .map(|k| generalized_circular_adjoint(&spec, k + 1, lambda[k], mu[k]))
                .collect::<Result<_>>()?;
            for i in 0..n {
                for j in 0..n {
                    let d = if i == j { 1.0 } else { 0.0 };
                    let a = vacuum_state(&gs[i].mul(&gas[j]));
                    let b = vacuum_state(&gas[i].mul(&gs[j]));
                    worst = worst.max((a - c(d * mu[i] * mu[i])).norm());
                    worst = worst.max((b - c(d * lambda[i] * lambda[i])).norm());
                    cases += 1;
                }
            }
        }
    }
    o.record(
        "both_identities",
        worst <= 1e-13,
        format!("{cases} pairs, max error {worst:.3e}"),
    );
    Ok(())
}

fn c4_q_row_bound(o: &mut Outcome) -> Result<()> {
    let mut worst = f64::NEG_INFINITY;
    let mut detail = Vec::new();
    for q in [-0.9, -0.5, 0.0, 0.5, 0.9] {
        let spec = FockSpaceSpec::new(3, 5, q)?;
        let metric = QMetric::new(&spec)?;
        let t = row_sum_operator(&spec, &[1, 2, 3])?;
        let v = metric.q_norm(&t)?.sqrt();
        let bound = 1.0 / (1.0 - q.abs()).sqrt();
        worst = worst.max(v - bound);
        detail.push(format!("q={q}: {v:.6}/{bound:.6}"));
    }
    o.record("row_le_bound", worst <= 1e-8, detail.join(", "));
    Ok(())
}

fn random_group_element(g: &mut InstanceRng) -> GroupAlgElement<ExactC> {
    let terms = 1 + small_int(g, 3).unsigned_abs() as usize;
    GroupAlgElement::from_terms((0..terms).map(|_| {
        let len = small_int(g, 4).unsigned_abs() as usize;
        let letters: Vec<i32> = (0..len)
            .map(|_| {
                let k = 1 + (uniform(g, 0.0, 3.0).floor() as i32).min(2);
                if uniform(g, 0.0, 1.0) < 0.5 {
                    k
                } else {
                    -k
                }
            })
            .collect();
        (
            GroupWord::from_letters(&letters),
            exact_gaussian(small_int(g, 4), small_int(g, 4)),
        )
    }))
}

fn c5_group_norms(o: &mut Outcome) -> Result<()> {
    let x = GroupAlgElement::from_terms([
        (GroupWord::generator(1), ExactC::from_i64(1)),
        (GroupWord::generator(2), ExactC::from_i64(1)),
    ]);
    let t = trace_power(&x, 2)?;
    let v = lp_norm_even(&x, 2)?;
    o.record(
        "four_norm",
        t == ExactC::from_i64(6) && (v - 6f64.powf(0.25)).abs() < 1e-15,
        format!("τ((x*x)²) = {}, ‖x‖₄ = {v:.16}", rat_to_f64(&t.re)),
    );
    let mut g = rng(instance_seed(SEED, 5));
    let mut bad = 0;
    for _ in 0..100 {
        let x = random_group_element(&mut g);
        let tr = x.adjoint().convolve(&x)?.trace();
        let mut s = ExactC::from_i64(0);
        for (_, a) in x.terms() {
            s = s + ExactC::new(a.norm_sqr(), ExactC::from_i64(0).re);
        }
        if tr != s {
            bad += 1;
        }
    }
    o.record("plancherel", bad == 0, format!("{bad} of 100 mismatches"));
    Ok(())
}

fn c6_haagerup(o: &mut Outcome) -> Result<()> {
    let mut reports = Vec::new();
    for (ci, (n, d)) in [(2u32, 1usize), (2, 2), (3, 1), (3, 2), (2, 3)]
        .into_iter()
        .enumerate()
    {
        for t in 0..20 {
            let mut g = rng(instance_seed(instance_seed(SEED, 600 + ci as u64), t));
            reports.push(haagerup_report(&random_haagerup(&mut g, n, d), d, 8)?);
        }
    }
    o.reports("sandwich", &reports);
    Ok(())
}

fn c7_kesten(o: &mut Outcome) -> Result<()> {
    let x = GroupAlgElement::from_terms((1..=3).map(|k| (GroupWord::generator(k), c(1.0))));
    let est = op_norm_estimate(&x, 8)?;
    let target = 2.0 * 2f64.sqrt();
    let err = (est.extrapolated - target).abs() / target;
    o.record(
        "within_2pct",
        err < 0.02,
        format!(
            "{:.6} vs {target:.6} ({:.3}%)",
            est.extrapolated,
            100.0 * err
        ),
    );
    Ok(())
}

/// Nonzero element supported on words of exactly d syllables.
fn random_homogeneous(g: &mut InstanceRng, d: usize) -> GroupAlgElement<ExactC> {
    loop {
        let x = homogeneous_draw(g, d);
        if !x.is_zero() {
            return x;
        }
    }
}

fn homogeneous_draw(g: &mut InstanceRng, d: usize) -> GroupAlgElement<ExactC> {
    let terms = 1 + small_int(g, 2).unsigned_abs() as usize;
    GroupAlgElement::from_terms((0..terms).map(|_| {
        let mut syl: Vec<(u32, i32)> = Vec::new();
        while syl.len() < d {
            let k = 1 + (uniform(g, 0.0, 3.0).floor() as u32).min(2);
            if syl.last().is_some_and(|&(j, _)| j == k) {
                continue;
            }
            let mut e = small_int(g, 2) as i32;
            if e == 0 {
                e = 1;
            }
            syl.push((k, e));
        }
        let re = small_int(g, 3);
        (
            GroupWord::from_syllables(&syl),
            exact_gaussian(if re == 0 { 1 } else { re }, small_int(g, 3)),
        )
    }))
}

fn c8_lemma_identities(o: &mut Outcome) -> Result<()> {
    let mut g = rng(instance_seed(SEED, 8));
    let mut bad = 0;
    for t in 0..50 {
        let d = 1 + t % 3;
        let a = random_homogeneous(&mut g, d);
        let b = random_homogeneous(&mut g, d);
        let h = random_group_element(&mut g);
        let i = 1 + (uniform(&mut g, 0.0, 3.0).floor() as u32).min(2);
        let j = 1 + (uniform(&mut g, 0.0, 3.0).floor() as u32).min(2);
        if !bubble_identities_hold(&a, &b, i, j, &h)? {
            bad += 1;
        }
    }
    o.record(
        "bubble_identities",
        bad == 0,
        format!("{bad} of 50 pairs fail"),
    );
    let expect = GroupAlgElement::monomial(GroupWord::parse("g1*g2*g1*g2")?, ExactC::from_i64(1));
    o.record(
        "dykema_residual",
        dykema_residual()? == expect,
        "λ(g1 g2 g1 g2)",
    );
    let mismatches: Vec<i64> = (-4..=4)
        .filter(|&k| k != 0)
        .filter(|&k| popa_example(k).is_zero() == (k > 0))
        .collect();
    o.record(
        "popa_filter",
        mismatches.is_empty(),
        format!(
            "k in ±1..4, mismatches {mismatches:?}; k = 0 keeps λ(g1): {}",
            !popa_example(0).is_zero()
        ),
    );
    Ok(())
}

fn random_factor_element(g: &mut InstanceRng, f: &FreeFactor) -> DMatrix<C64> {
    meanzero_element(g, f) + f.unit() * c(uniform(g, -1.0, 1.0))
}

fn rational_factor_element(g: &mut InstanceRng, f: &FreeFactor) -> Result<DMatrix<C64>> {
    let v: Vec<f64> = (0..f.size()).map(|_| small_int(g, 3) as f64).collect();
    f.diagonal_element(&v)
}

fn c9_freeness_oracle(o: &mut Outcome) -> Result<()> {
    let factors = vec![
        FreeFactor::bernoulli(),
        FreeFactor::quadrature(Measure::Wigner, 3)?,
        FreeFactor::discrete(&[0.25, 0.25, 0.5])?,
    ];
    let rational = vec![factors[0].clone(), factors[2].clone()];
    let rep = FreeProductRep::new(factors.clone(), 3)?;
    let rep_q = FreeProductRep::new(rational.clone(), 3)?;
    let mut g = rng(instance_seed(SEED, 9));
    let mut worst: f64 = 0.0;
    let mut worst_exact: f64 = 0.0;
    for t in 0..200 {
        let len = 1 + t % 6;
        let exact = t % 4 == 0;
        let (fs, r) = if exact {
            (&rational, &rep_q)
        } else {
            (&factors, &rep)
        };
        let mut word = Vec::with_capacity(len);
        for _ in 0..len {
            let k = (uniform(&mut g, 0.0, fs.len() as f64).floor() as usize).min(fs.len() - 1);
            let a = if exact {
                rational_factor_element(&mut g, &fs[k])?
            } else {
                random_factor_element(&mut g, &fs[k])
            };
            word.push((k, a));
        }
        let via_rep = r.vacuum_moment(&word)?;
        if exact {
            let e = free_moment_exact(fs, &word)?;
            let ef = C64::new(rat_to_f64(&e.re), rat_to_f64(&e.im));
            worst_exact = worst_exact.max((ef - via_rep).norm() / ef.norm().max(1.0));
            worst_exact =
                worst_exact.max((ef - free_moment(fs, &word)?).norm() / ef.norm().max(1.0));
        } else {
            let v = free_moment(fs, &word)?;
            worst = worst.max((v - via_rep).norm() / v.norm().max(1.0));
        }
    }
    o.record(
        "recursion_vs_rep",
        worst <= 1e-10 && worst_exact <= 1e-10,
        format!("max rel diff {worst:.3e}, rational inputs {worst_exact:.3e}"),
    );
    let bern = vec![FreeFactor::bernoulli(), FreeFactor::bernoulli()];
    let x = bern[0].meanzero_onb()[0].clone();
    let alt: Vec<_> = (0..4).map(|i| (i % 2, x.clone())).collect();
    let xyxy = free_moment_exact(&bern, &alt)?;
    let mut total = ExactC::from_i64(0);
    for mask in 0..16u32 {
        let w: Vec<_> = (0..4)
            .map(|i| (((mask >> i) & 1) as usize, x.clone()))
            .collect();
        total = total + free_moment_exact(&bern, &w)?;
    }
    o.record(
        "bernoulli_moments",
        xyxy == ExactC::from_i64(0) && total == ExactC::from_i64(6),
        format!(
            "φ(xyxy) = {}, φ((x+y)⁴) = {}",
            rat_to_f64(&xyxy.re),
            rat_to_f64(&total.re)
        ),
    );
    Ok(())
}

fn c10_rosenthal(o: &mut Outcome) -> Result<()> {
    let mut reports = Vec::new();
    let mut sign_ratios = Vec::new();
    for (pi, p) in [PIndex::Finite(2.0), PIndex::Finite(4.0), PIndex::Infinity]
        .into_iter()
        .enumerate()
    {
        for d in 1..=2 {
            for t in 0..20u64 {
                let n = 2 + (t as usize) % 3;
                let f = standard_factors(n)?;
                let eng = FreeNorms::new(f.clone(), 3);
                let mut g = rng(instance_seed(
                    instance_seed(SEED, 1000 + 10 * pi as u64 + d as u64),
                    t,
                ));
                let a = (0..n)
                    .map(|k| random_q_poly(&mut g, &f, k, 2, d, 3))
                    .collect::<Result<Vec<_>>>()?;
                let r = rosenthal_report(&eng, &a, p)?;
                if let Some(s) = r.diagnostic("sign_ratio") {
                    if d == 1 {
                        sign_ratios.push(s);
                    }
                }
                reports.push(r);
            }
        }
    }
    o.reports("certified_checks", &reports);
    let smax = sign_ratios.iter().cloned().fold(0.0, f64::max);
    o.record(
        "sign_sweep_le_3",
        sign_ratios.len() == 20 && smax <= 3.0 + 1e-9,
        format!("{} sweeps, max ratio {smax:.4}", sign_ratios.len()),
    );
    let hi = reports.iter().map(|r| r.ratio_hi).fold(0.0, f64::max);
    o.record(
        "upper_ratio_finite",
        reports
            .iter()
            .all(|r| r.ratio_hi.is_finite() && r.ratio_hi < f64::MAX),
        format!("max rhs/lhs {hi:.4}"),
    );
    Ok(())
}

fn c11_reduction(o: &mut Outcome) -> Result<()> {
    let mut reports = Vec::new();
    for (pi, p) in [PIndex::Finite(2.0), PIndex::Infinity]
        .into_iter()
        .enumerate()
    {
        for d in 1..=2 {
            for t in 0..20u64 {
                let n = 2 + (t as usize) % 2;
                let f = standard_factors(n)?;
                let eng = FreeNorms::new(f.clone(), 3);
                let mut g = rng(instance_seed(
                    instance_seed(SEED, 1100 + 10 * pi as u64 + d as u64),
                    t,
                ));
                let items = random_reduction_items(&mut g, &f, 2, d, 3, 2)?;
                reports.push(reduction_report(&eng, &items, p)?);
            }
        }
    }
    o.reports("lower_constants", &reports);
    Ok(())
}

fn c12_khintchine(o: &mut Outcome) -> Result<()> {
    let f = standard_factors(3)?;
    let eng = FreeNorms::new(f.clone(), 3);
    let mut reports = Vec::new();
    for d in 1..=2 {
        for (pi, p) in [PIndex::Finite(2.0), PIndex::Finite(4.0), PIndex::Infinity]
            .into_iter()
            .enumerate()
        {
            for t in 0..10u64 {
                let mut g = rng(instance_seed(
                    instance_seed(SEED, 1200 + 10 * pi as u64 + d as u64),
                    t,
                ));
                let x = random_poly(&mut g, &f, 2, d, 3)?;
                reports.push(khintchine_report(&eng, &x, p)?);
            }
        }
    }
    o.reports("sigma_bounds", &reports);
    Ok(())
}

fn c13_circular_endpoints(o: &mut Outcome) -> Result<()> {
    let mut l2 = Vec::new();
    for (qi, q) in [0.0, 0.5, -0.5].into_iter().enumerate() {
        for t in 0..8u64 {
            let n = 1 + (t as usize) % 4;
            let mut g = rng(instance_seed(instance_seed(SEED, 1300 + qi as u64), t));
            let lambda: Vec<f64> = (0..n).map(|_| uniform(&mut g, 0.25, 1.0)).collect();
            let mu: Vec<f64> = (0..n).map(|_| uniform(&mut g, 0.25, 1.0)).collect();
            let x: Vec<_> = (0..n).map(|_| gaussian_matrix(&mut g, 2, 2)).collect();
            l2.push(theorem_e_report(
                &x,
                &lambda,
                &mu,
                q,
                PIndex::Finite(2.0),
                1,
            )?);
        }
    }
    o.reports("l2_identity", &l2);
    let mut sup = Vec::new();
    for (qi, q) in [0.0, 0.5].into_iter().enumerate() {
        for t in 0..20u64 {
            let n = 1 + (t as usize) % 2;
            let mut g = rng(instance_seed(instance_seed(SEED, 1310 + qi as u64), t));
            let lambda: Vec<f64> = (0..n).map(|_| uniform(&mut g, 0.25, 1.0)).collect();
            let mu: Vec<f64> = (0..n).map(|_| uniform(&mut g, 0.25, 1.0)).collect();
            let x: Vec<_> = (0..n).map(|_| gaussian_matrix(&mut g, 2, 2)).collect();
            sup.push(theorem_e_report(&x, &lambda, &mu, q, PIndex::Infinity, 5)?);
        }
    }
    o.reports("sup_norm_bound", &sup);
    Ok(())
}

fn c14_theorem_d(o: &mut Outcome) -> Result<()> {
    let ns: Vec<usize> = (2..=6).collect();
    let reports = k_estimate_sweep(hilbert_witness, &ns, NormRoute::Moments { pmax: 8 }, 5)?;
    let k: Vec<f64> = reports
        .iter()
        .map(|r| r.diagnostic("k_estimate").unwrap_or(f64::NAN))
        .collect();
    let tri: Vec<f64> = reports
        .iter()
        .map(|r| r.diagnostic("triangular_ratio").unwrap_or(f64::NAN))
        .collect();
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.4}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    o.record(
        "k_trend_moments",
        strictly_increasing(&k),
        format!(
            "K(n=2..6) = [{}]; dense triangular ratio [{}]",
            fmt(&k),
            fmt(&tri)
        ),
    );
    let mut eq = Vec::new();
    for n in [2, 3] {
        let spec = MartingaleSpec::new(&hilbert_witness(n), 5, 3)?;
        eq.push(matrix_equivalence_report(&spec, PIndex::Infinity)?);
    }
    let ratios: Vec<f64> = eq.iter().map(|r| r.ratio_lo).collect();
    o.record(
        "matrix_equivalence",
        eq.iter().all(|r| r.passed()) && ratios.iter().all(|&r| (1.0 / 16.0..=16.0).contains(&r)),
        format!("ratio(n=2,3) = [{}]", fmt(&ratios)),
    );
    let r8 = triangular_projection_witness(&hilbert_witness(8))?.ratio;
    let r64 = triangular_projection_witness(&hilbert_witness(64))?.ratio;
    o.record(
        "triangular_gap",
        r64 - r8 >= 0.5,
        format!(
            "ratio(64) − ratio(8) = {r64:.4} − {r8:.4} = {:.4}",
            r64 - r8
        ),
    );
    Ok(())
}

fn c15_martingale_square(o: &mut Outcome) -> Result<()> {
    let mut by_d = vec![Vec::new(), Vec::new()];
    for d in 0..=1 {
        for t in 0..20u64 {
            let n = 1 + (t as usize) % 4;
            let f = standard_factors(n)?;
            let mut g = rng(instance_seed(instance_seed(SEED, 1500 + d as u64), t));
            let mart = random_martingale(&mut g, &f, 2, d, 3)?;
            by_d[d].push(prop_sq1_check(&mart, 3)?);
        }
    }
    for (d, reports) in by_d.iter().enumerate() {
        let max = reports
            .iter()
            .filter_map(|r| r.diagnostic("ratio"))
            .fold(0.0, f64::max);
        let bound = if d == 0 { 1.0 + 1e-9 } else { 9.0 };
        o.record(
            &format!("d{d}_ratio"),
            reports.iter().all(|r| r.passed()) && max <= bound,
            format!("{} martingales, max ratio {max:.6}", reports.len()),
        );
    }
    Ok(())
}

fn small_settings(name: &str) -> BTreeMap<String, String> {
    let mut s = BTreeMap::new();
    let mut put = |k: &str, v: &str| {
        s.insert(k.to_string(), v.to_string());
    };
    put("experiment", name);
    match name {
        "qfock-selftest" => {
            put("n", "2");
            put("depth", "3");
        }
        "theorem-d" => put("n", "3"),
        "triangular" => put("ns", "4,8"),
        "sweep" => {
            put("ns", "2");
            put("ds", "1");
            put("ps", "2,inf");
            put("trials", "2");
            put("seed", "7");
        }
        "gen-circular" | "theorem-f" => {
            put("n", "2");
            put("depth", "3");
            put("trials", "3");
            put("seed", "7");
        }
        _ => {
            put("trials", "3");
            put("seed", "7");
        }
    }
    s
}

fn c16_reproducibility(o: &mut Outcome) -> Result<()> {
    let mut differing = Vec::new();
    for e in EXPERIMENTS {
        let cfg = ExperimentConfig::from_settings(&small_settings(e.name()))?;
        let a = run(&cfg)?;
        let b = run(&cfg)?;
        let same = render(&a.reports, Format::Json)? == render(&b.reports, Format::Json)?
            && render(&a.reports, Format::Csv)? == render(&b.reports, Format::Csv)?
            && a.extras == b.extras
            && !a.reports.is_empty();
        if !same {
            differing.push(e.name());
        }
    }
    o.record(
        "byte_identical_json",
        differing.is_empty(),
        format!("{} experiments, differing {differing:?}", EXPERIMENTS.len()),
    );
    Ok(())
}

type Criterion = (u32, &'static str, u64, fn(&mut Outcome) -> Result<()>);

const CRITERIA: [Criterion; 16] = [
    (1, "q-Fock self-test", 10, c1_qfock_selftest),
    (2, "semicircular moments", 1, c2_semicircle),
    (
        3,
        "generalized circular vacuum identities",
        5,
        c3_circular_vacuum,
    ),
    (4, "q-row bound", 10, c4_q_row_bound),
    (5, "exact group-algebra norms", 5, c5_group_norms),
    (6, "reduced-word sandwich", 120, c6_haagerup),
    (7, "Kesten value", 30, c7_kesten),
    (
        8,
        "bubble identities and projection examples",
        30,
        c8_lemma_identities,
    ),
    (
        9,
        "freeness recursion vs representation",
        30,
        c9_freeness_oracle,
    ),
    (
        10,
        "free Rosenthal certified directions",
        180,
        c10_rosenthal,
    ),
    (11, "reduction lower constants", 120, c11_reduction),
    (12, "free Khintchine lower constants", 180, c12_khintchine),
    (
        13,
        "generalized circular endpoints",
        60,
        c13_circular_endpoints,
    ),
    (14, "martingale square-function trend", 600, c14_theorem_d),
    (
        15,
        "martingale square-function constants",
        120,
        c15_martingale_square,
    ),
    (16, "reproducibility", 60, c16_reproducibility),
];

fn main() {
    let only: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut unexpected = Vec::new();
    let mut total = Duration::ZERO;
    for (id, title, budget, f) in CRITERIA {
        if only.is_some_and(|k| k != id) {
            continue;
        }
        let mut o = Outcome::default();
        let start = Instant::now();
        if let Err(e) = f(&mut o) {
            o.record("error", false, e.to_string());
        }
        let elapsed = start.elapsed();
        total += elapsed;
        o.record(
            "runtime",
            elapsed.as_secs_f64() < budget as f64,
            format!("{:.2} s of {budget} s", elapsed.as_secs_f64()),
        );
        let ok = o.subs.iter().all(|s| s.passed);
        println!(
            "{} criterion {id:>2}: {title} ({:.2} s)",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        for s in &o.subs {
            let key = format!("{id}/{}", s.name);
            let known = KNOWN_FAILURES.contains(&key.as_str());
            let tag = match (s.passed, known) {
                (true, _) => "ok",
                (false, true) => "known failure",
                (false, false) => "FAILED",
            };
            println!("      {:<24} {tag:<13} {}", s.name, s.detail);
            if !s.passed && !known {
                unexpected.push(key);
            }
        }
    }
    println!("acceptance total {:.1} s", total.as_secs_f64());
    if !unexpected.is_empty() {
        println!("unexpected failures: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
