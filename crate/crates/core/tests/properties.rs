//! Property tests over randomly drawn instances.

use nalgebra::DMatrix;
use proptest::prelude::*;

use freechaos::capacity::Capacity;
use freechaos::experiments::{
    moment_ratio_norm, random_martingale, square_function_norms, standard_factors, strict_lower,
    triangular_projection_witness,
};
use freechaos::freeprod::{free_moment, FreeFactor, FreeProductRep, Measure};
use freechaos::group_lab::{
    bubble_identities_hold, op_norm_estimate, trace_power, GroupAlgElement, GroupWord,
};
use freechaos::ineq::random::{gaussian_matrix, meanzero_element, random_poly, rng, uniform};
use freechaos::ineq::{
    khintchine_report, reports_from_csv, reports_from_jsonl, reports_to_csv, reports_to_jsonl,
    FreeNorms,
};
use freechaos::normcalc::PIndex;
use freechaos::qfock;
use freechaos::scalar::{exact_gaussian, rat_to_f64, ExactC, Scalar, C64};

fn letters(max_len: usize) -> impl Strategy<Value = Vec<i32>> {
    prop::collection::vec(prop_oneof![1..=3i32, -3..=-1i32], 0..=max_len)
}

fn word(max_len: usize) -> impl Strategy<Value = GroupWord> {
    letters(max_len).prop_map(|l| GroupWord::from_letters(&l))
}

fn element(max_terms: usize, max_len: usize) -> impl Strategy<Value = GroupAlgElement<ExactC>> {
    prop::collection::vec((word(max_len), -4i64..=4, -4i64..=4), 1..=max_terms).prop_map(|ts| {
        GroupAlgElement::from_terms(ts.into_iter().map(|(w, a, b)| (w, exact_gaussian(a, b))))
    })
}

/// Words of exactly d syllables over g1..g3.
fn homogeneous(d: usize) -> impl Strategy<Value = GroupAlgElement<ExactC>> {
    let syllable = (1u32..=3, prop_oneof![1..=2i32, -2..=-1i32]);
    let w = prop::collection::vec(syllable, d).prop_filter_map(
        "adjacent syllables share a generator",
        |s| {
            s.windows(2)
                .all(|p| p[0].0 != p[1].0)
                .then(|| GroupWord::from_syllables(&s))
        },
    );
    prop::collection::vec((w, 1i64..=3, -3i64..=3), 1..=3)
        .prop_map(|ts| {
            GroupAlgElement::from_terms(ts.into_iter().map(|(w, a, b)| (w, exact_gaussian(a, b))))
        })
        .prop_filter("nonzero", |x| !x.is_zero())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn word_product_is_associative(a in word(6), b in word(6), c in word(6)) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert!(a.mul(&a.inverse()).is_identity());
    }

    #[test]
    fn convolution_adjoint_reverses_order(x in element(4, 4), y in element(4, 4)) {
        let lhs = x.convolve(&y).unwrap().adjoint();
        let rhs = y.adjoint().convolve(&x.adjoint()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn plancherel_is_exact(x in element(6, 5)) {
        let tr = x.adjoint().convolve(&x).unwrap().trace();
        let mut s = ExactC::from_i64(0);
        for (_, c) in x.terms() {
            s = s + ExactC::new(c.norm_sqr(), ExactC::from_i64(0).re);
        }
        prop_assert_eq!(tr, s);
    }

    #[test]
    fn moment_chain_matches_trace_powers(x in element(4, 3)) {
        let est = op_norm_estimate(&x.to_c64(), 4).unwrap();
        for (m, &t) in est.diagnostics.moments.iter().enumerate() {
            let exact = rat_to_f64(&trace_power(&x, m).unwrap().re);
            prop_assert!((t - exact).abs() <= 1e-10 * exact.max(1.0), "m = {}: {} vs {}", m, t, exact);
        }
        prop_assert!(est.lower_bound <= est.extrapolated);
        prop_assert!(x.to_c64().l2_norm() <= est.lower_bound * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn bubble_identities_on_homogeneous_pairs(
        (a, b) in (1usize..=3).prop_flat_map(|d| (homogeneous(d), homogeneous(d))),
        h in element(3, 4),
        i in 1u32..=3,
        j in 1u32..=3,
    ) {
        prop_assert!(bubble_identities_hold(&a, &b, i, j, &h).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn q_creation_and_annihilation_are_adjoint(q in -0.9f64..0.9, letters in 1usize..=2, depth in 1usize..=3) {
        let t = qfock::self_test(letters, depth, q).unwrap();
        prop_assert!(t.max_adjointness_defect < 1e-12);
        prop_assert!(t.min_gram_eigenvalue > -1e-10);
    }

    #[test]
    fn free_moments_agree_with_representation(seed in any::<u64>(), len in 1usize..=6) {
        let f = vec![
            FreeFactor::bernoulli(),
            FreeFactor::quadrature(Measure::Wigner, 3).unwrap(),
            FreeFactor::discrete(&[0.25, 0.25, 0.5]).unwrap(),
        ];
        let rep = FreeProductRep::new(f.clone(), 3).unwrap();
        let mut g = rng(seed);
        let word: Vec<(usize, DMatrix<C64>)> = (0..len)
            .map(|_| {
                let k = (uniform(&mut g, 0.0, 3.0).floor() as usize).min(2);
                let a = meanzero_element(&mut g, &f[k]) + f[k].unit() * C64::new(uniform(&mut g, -1.0, 1.0), 0.0);
                (k, a)
            })
            .collect();
        let a = free_moment(&f, &word).unwrap();
        let b = rep.vacuum_moment(&word).unwrap();
        prop_assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
    }

    #[test]
    fn martingale_differences_are_adapted_and_orthogonal(seed in any::<u64>(), n in 2usize..=3, d in 1usize..=2) {
        let f = standard_factors(n).unwrap();
        let mart = random_martingale(&mut rng(seed), &f, 2, d, 2).unwrap();
        prop_assert!(mart.adaptedness_residual(3).unwrap() < 1e-12);
        let eng = FreeNorms::new(f.clone(), 3);
        let p = PIndex::Finite(2.0);
        let sum = eng.norm(&mart.sum_op().unwrap(), p).unwrap().value;
        let parts: f64 = mart
            .difference_ops()
            .unwrap()
            .iter()
            .map(|x| eng.norm(x, p).unwrap().value.powi(2))
            .sum();
        prop_assert!((sum * sum - parts).abs() <= 1e-10 * parts.max(1.0));
    }

    #[test]
    fn adjoint_swaps_row_and_column(seed in any::<u64>(), n in 2usize..=3) {
        let f = standard_factors(n).unwrap();
        let mart = random_martingale(&mut rng(seed), &f, 2, 1, 2).unwrap();
        let eng = FreeNorms::new(f, 2);
        for p in [PIndex::Finite(2.0), PIndex::Finite(4.0)] {
            let s = square_function_norms(&eng, &mart, p).unwrap();
            let t = square_function_norms(&eng, &mart.adjoint(), p).unwrap();
            prop_assert!((s.row.value - t.col.value).abs() <= 1e-9 * s.row.value.max(1.0));
            prop_assert!((s.col.value - t.row.value).abs() <= 1e-9 * s.col.value.max(1.0));
        }
    }

    #[test]
    fn moment_ratio_norm_grows_with_order(seed in any::<u64>()) {
        let f = standard_factors(2).unwrap();
        let x = random_poly(&mut rng(seed), &f, 2, 1, 2).unwrap().to_op(&f).unwrap();
        let cap = Capacity::default();
        let lo = moment_ratio_norm(&x, 4, cap).unwrap();
        let hi = moment_ratio_norm(&x, 8, cap).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn triangular_ratio_is_scale_invariant(seed in any::<u64>(), n in 1usize..=8, s in 0.1f64..10.0) {
        let a = gaussian_matrix(&mut rng(seed), n, n);
        let r = triangular_projection_witness(&a).unwrap().ratio;
        let rs = triangular_projection_witness(&(a.clone() * C64::new(s, 0.0))).unwrap().ratio;
        prop_assert!((r - rs).abs() <= 1e-10 * r.max(1.0));
        let l = strict_lower(&a);
        if l.iter().any(|z| z.norm() > 0.0) {
            let rl = triangular_projection_witness(&l).unwrap().ratio;
            prop_assert!((rl - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn reports_round_trip_through_json_and_csv(seed in any::<u64>(), d in 1usize..=2) {
        let f = standard_factors(3).unwrap();
        let eng = FreeNorms::new(f.clone(), 2);
        let x = random_poly(&mut rng(seed), &f, 2, d, 2).unwrap();
        let reports = vec![
            khintchine_report(&eng, &x, PIndex::Finite(2.0)).unwrap(),
            khintchine_report(&eng, &x, PIndex::Finite(4.0)).unwrap(),
        ];
        let json = reports_to_jsonl(&reports).unwrap();
        prop_assert_eq!(&reports_from_jsonl(&json).unwrap(), &reports);
        prop_assert_eq!(reports_to_jsonl(&reports).unwrap(), json);
        let rows = reports_from_csv(&reports_to_csv(&reports).unwrap()).unwrap();
        for (row, r) in rows.iter().zip(&reports) {
            prop_assert_eq!(row.lhs, r.lhs);
            prop_assert_eq!(row.rhs_combined, r.rhs_combined);
        }
    }

    #[test]
    fn norm_index_round_trips(k in 1usize..=8, inf in any::<bool>()) {
        let p = if inf { PIndex::Infinity } else { PIndex::Finite(2.0 * k as f64) };
        prop_assert_eq!(p.to_string().parse::<PIndex>().unwrap(), p);
    }
}
