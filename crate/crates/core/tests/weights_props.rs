//! Property and oracle tests for the weight kernels.

use asclt_core::{
    check_c2, check_c3, lemma1_trace, lemma5_ratio, pair_sum_bruteforce, pair_sum_checkpoints,
    power_sum, prefix_sums, v_quantity, PairSumMode, WeightScheme, PAIR_SUM_AGREEMENT,
};
use proptest::prelude::*;

fn any_scheme() -> impl Strategy<Value = WeightScheme> {
    prop_oneof![
        Just(WeightScheme::harmonic()),
        (0.0f64..3.0).prop_map(|g| WeightScheme::power_log(g).unwrap()),
        (0.05f64..=1.0).prop_map(|t| WeightScheme::power(t).unwrap()),
        prop::collection::vec(0.5f64..2.0, 1..200)
            .prop_map(|v| WeightScheme::custom(v).unwrap()),
    ]
}

/// Caps a probe index to what the scheme can serve.
fn cap(scheme: &WeightScheme, n: usize) -> usize {
    scheme.len_limit().map_or(n, |l| l.min(n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn factorized_pair_sum_matches_brute_force(
        scheme in any_scheme(),
        alpha in 0.05f64..0.95,
        n in 1usize..400,
    ) {
        let n = cap(&scheme, n);
        let fast = pair_sum_checkpoints(&scheme, alpha, &[n]).unwrap()[0];
        let brute = pair_sum_bruteforce(&scheme, alpha, n).unwrap();
        let rel = (fast - brute).abs() / brute.abs().max(f64::MIN_POSITIVE);
        prop_assert!(rel <= PAIR_SUM_AGREEMENT, "rel = {rel:e} at n = {n}");
    }

    #[test]
    fn prefix_sums_increase_and_difference_back(
        scheme in any_scheme(),
        n in 2usize..400,
    ) {
        let n = cap(&scheme, n);
        prop_assume!(n >= 2);
        let cache = prefix_sums(&scheme, n).unwrap();
        let totals = cache.totals();
        prop_assert!(totals.windows(2).all(|w| w[0] < w[1]));
        for k in 2..=n {
            let recovered = totals[k - 1] - totals[k - 2];
            let d = scheme.weight(k).unwrap();
            prop_assert!(
                (recovered - d).abs() <= 1e-12 * d,
                "k = {k}: recovered {recovered}, weight {d}"
            );
        }
        prop_assert_eq!(totals[0], scheme.weight(1).unwrap());
    }

    #[test]
    fn v_quantity_is_additive_in_the_outer_range(
        scheme in any_scheme(),
        beta in 0.05f64..0.95,
        (m, j, n) in (1usize..100, 0usize..50, 1usize..100)
            .prop_map(|(m, a, b)| (m, m + a, m + a + b)),
    ) {
        let n = cap(&scheme, n);
        let m = m.min(n);
        let j = j.clamp(m, n);
        let whole = v_quantity(&scheme, beta, m, n).unwrap();
        let left = v_quantity(&scheme, beta, m, j).unwrap();
        let right = if j < n { v_quantity(&scheme, beta, j + 1, n).unwrap() } else { 0.0 };
        let rel = (whole - (left + right)).abs() / whole.abs().max(f64::MIN_POSITIVE);
        prop_assert!(rel <= 1e-12, "rel = {rel:e} for ({m}, {j}, {n})");
    }

    #[test]
    fn condition_reports_keep_their_verdict_contract(
        scheme in any_scheme(),
        alpha in 0.05f64..0.95,
        rho in 0.2f64..2.0,
    ) {
        let big_k = cap(&scheme, 4000);
        let c2 = check_c2(&scheme, alpha, 64, big_k).unwrap();
        if c2.verdict.passed() {
            prop_assert!(c2.sup_statistic <= c2.threshold);
            prop_assert_eq!(c2.violation_count, 0);
        }
        if let Ok(c3) = check_c3(&scheme, rho, big_k) {
            if c3.verdict.passed() {
                prop_assert!(c3.sup_statistic <= c3.threshold);
                prop_assert_eq!(c3.violation_count, 0);
            }
        }
    }
}

#[test]
fn harmonic_total_matches_reference_value() {
    // H_1000, checked against an independent high-precision evaluation.
    let cache = prefix_sums(&WeightScheme::harmonic(), 1000).unwrap();
    assert!((cache.total(1000).unwrap() - 7.485470860550345).abs() < 1e-12);
}

#[test]
fn log_over_k_weight_value() {
    // d_8 = ln(8)/8 for the log-over-k family at gamma = 1.
    let scheme = WeightScheme::power_log(1.0).unwrap();
    assert!((scheme.weight(8).unwrap() - 0.2599301927099795).abs() < 1e-15);
}

#[test]
fn power_sum_matches_direct_loop() {
    let scheme = WeightScheme::power(0.7).unwrap();
    for beta in [-0.5, 0.3, 1.0] {
        let via_cache = power_sum(&scheme, beta, 500).unwrap();
        let mut direct = 0.0;
        for k in 1..=500u32 {
            direct += scheme.weight(k as usize).unwrap() * (k as f64).powf(beta);
        }
        assert!(
            (via_cache - direct).abs() <= 1e-10 * direct.abs(),
            "beta = {beta}: {via_cache} vs {direct}"
        );
    }
}

#[test]
fn harmonic_subpolynomial_growth_at_every_epsilon() {
    for eps in [0.5, 1.0] {
        let r = lemma1_trace(&WeightScheme::harmonic(), eps, &[10, 100, 1000, 10_000, 100_000])
            .unwrap();
        assert!(r.verdict.passed(), "eps = {eps}");
    }
    // log(N)/N^eps peaks at N = e^(1/eps), about 2.2e4 for eps = 0.1, so the
    // decrease is only visible on a grid that starts past the turnover.
    let r = lemma1_trace(
        &WeightScheme::harmonic(),
        0.1,
        &[30_000, 60_000, 100_000, 300_000, 1_000_000],
    )
    .unwrap();
    assert!(r.verdict.passed(), "eps = 0.1 past the turnover");
    // Constant weights grow linearly and fail for eps < 1.
    let flat = WeightScheme::custom(vec![1.0; 100_000]).unwrap();
    let r = lemma1_trace(&flat, 0.5, &[10, 100, 1000, 10_000, 100_000]).unwrap();
    assert!(!r.verdict.passed());
}

#[test]
fn pair_sum_checkpoints_prefixes_are_consistent() {
    // A multi-checkpoint pass equals independent single-checkpoint passes.
    let scheme = WeightScheme::power_log(1.0).unwrap();
    let all = pair_sum_checkpoints(&scheme, 0.5, &[10, 100, 1000]).unwrap();
    for (i, n) in [10usize, 100, 1000].into_iter().enumerate() {
        let single = pair_sum_checkpoints(&scheme, 0.5, &[n]).unwrap()[0];
        assert_eq!(all[i], single);
    }
}

#[test]
fn correlation_ratio_check_cross_validates_routes() {
    // BruteForce mode recomputes every grid point quadratically and must
    // agree with the factorized route to pass at all.
    let scheme = WeightScheme::harmonic();
    let fast = lemma5_ratio(&scheme, 0.5, 0.9, 3000, PairSumMode::Fast).unwrap();
    let checked = lemma5_ratio(&scheme, 0.5, 0.9, 3000, PairSumMode::BruteForce).unwrap();
    assert_eq!(fast.trace.len(), checked.trace.len());
    for (a, b) in fast.trace.iter().zip(&checked.trace) {
        assert_eq!(a.value, b.value);
    }
}

#[test]
fn reports_serialize_to_json_and_csv() {
    let r = check_c2(&WeightScheme::harmonic(), 0.5, 64, 10_000).unwrap();
    let json = r.to_json().unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed["condition"], "c2");
    assert!(parsed["verdict"].is_string());
    let csv = r.to_csv();
    assert!(csv.starts_with("condition,index,value,stderr,sup_statistic,threshold,verdict\n"));
    assert_eq!(csv.lines().count(), 1 + r.trace.len());
}
