//! Distributional and determinism tests for the partial-sum models.

use asclt_core::{
    check_c4_growth, estimate_mu_moment, ks_statistic, simulate_path, IncrementLaw, LimitLaw,
    SequenceModel,
};

const LAWS: [IncrementLaw; 4] = [
    IncrementLaw::StandardNormal,
    IncrementLaw::Rademacher,
    IncrementLaw::UniformCentered,
    IncrementLaw::ExponentialCentered,
];

/// Normalized sums of Gaussian increments are exactly standard normal at
/// every length, so the KS statistic over a large seed ensemble must clear
/// the 1% critical value in at least 19 of 20 meta-runs.
#[test]
fn normalized_gaussian_sums_pass_the_ks_gauntlet() {
    let model = SequenceModel::new(IncrementLaw::StandardNormal);
    let law = LimitLaw::StandardNormal;
    let ensemble = 10_000usize;
    // Asymptotic 1% critical value: 1.6276 / sqrt(n).
    let critical = 1.6276 / (ensemble as f64).sqrt();

    let mut below = 0;
    for meta in 0u64..20 {
        let samples: Vec<f64> = (0..ensemble)
            .map(|i| {
                let seed = meta * 1_000_000 + i as u64;
                let path = simulate_path(model, 8, seed).unwrap();
                path.normalized_at(8).unwrap()
            })
            .collect();
        if ks_statistic(&samples, |x| law.cdf(x)) < critical {
            below += 1;
        }
    }
    assert!(below >= 19, "only {below}/20 meta-runs under the critical value");
}

/// Every built-in increment law is standardized, so the second absolute
/// moment of `T_n` is exactly 1 at every `n`.
#[test]
fn second_moment_is_one_for_every_law() {
    for law in LAWS {
        let model = SequenceModel::new(law);
        let r = estimate_mu_moment(model, &[10, 100], 2, 20_000, 42).unwrap();
        for (pt, se) in r.trace.iter().zip(&r.stderrs) {
            assert!(
                (pt.value - 1.0).abs() <= 3.0 * se,
                "{law:?} at n = {}: {} +- {se}",
                pt.index,
                pt.value
            );
        }
        assert!(r.verdict.passed(), "{law:?}");
    }
}

#[test]
fn diagonal_pairs_score_the_reciprocal_constant() {
    let model = SequenceModel::new(IncrementLaw::StandardNormal);
    let r = check_c4_growth(model, 2.0, 0.5, &[(3, 3), (10, 10), (64, 64)]).unwrap();
    assert!(r.verdict.passed());
    for pt in &r.trace {
        assert!((pt.value - 0.5).abs() < 1e-15);
    }
}

#[test]
fn path_dump_format() {
    let model = SequenceModel::new(IncrementLaw::Rademacher);
    let p = simulate_path(model, 3, 99).unwrap();
    let csv = p.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "k,S_k,T_k");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("1,"));
    assert_eq!(p.model_id, "rademacher/sqrt");
}

/// Identical (model, n, seed) must reproduce the sample bit for bit; the
/// guarantee covers every law.
#[test]
fn paths_replay_exactly_for_every_law() {
    for law in LAWS {
        let model = SequenceModel::new(law);
        let a = simulate_path(model, 200, 4242).unwrap();
        let b = simulate_path(model, 200, 4242).unwrap();
        assert_eq!(a.partial_sums, b.partial_sums, "{law:?}");
        assert_eq!(a.normalized, b.normalized, "{law:?}");
    }
}

/// Increment laws have the first two moments they claim: sample means near
/// 0 and sample variances near 1 at one-sigma-scaled tolerances.
#[test]
fn increment_laws_are_standardized() {
    for law in LAWS {
        let model = SequenceModel::new(law);
        let n = 100_000usize;
        let path = simulate_path(model, n, 7).unwrap();
        let mean = path.partial_sum(n).unwrap() / n as f64;
        assert!(mean.abs() < 5.0 / (n as f64).sqrt(), "{law:?} mean {mean}");
        // Variance via the increments recovered from consecutive sums.
        let mut sq = 0.0;
        let mut prev = 0.0;
        for k in 1..=n {
            let s = path.partial_sum(k).unwrap();
            let x = s - prev;
            sq += x * x;
            prev = s;
        }
        let var = sq / n as f64;
        assert!((var - 1.0).abs() < 0.05, "{law:?} var {var}");
    }
}
