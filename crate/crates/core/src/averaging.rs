//! Weighted log-averaging of functionals along a partial-sum path.
//!
//! The running statistic is `A_N = (sum_{k<=N} d_k f(T_k)) / D_N` with
//! `D_N = sum_{k<=N} d_k`. For admissible weights and models, `A_N`
//! converges almost surely to the integral of `f` against the limit law;
//! [`run_experiment`] measures that convergence over a seed ensemble and a
//! checkpoint grid.
//!
//! Convergence in `N` is logarithmically slow, so checkpoint grids are
//! geometric. [`subsequence_checkpoints`] yields the natural sparse grid
//! `N_j = min { N : D_N >= exp(sqrt(j)) }` along which the averages
//! fluctuate on a roughly even scale.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::LipschitzFunction;
use crate::models::{PathStream, SequenceModel};
use crate::numeric::{median, KahanSum};
use crate::report::{Condition, ConditionReport, TracePoint};
use crate::weights::WeightScheme;

/// Quadrature tolerance used when a convergence target must be computed
/// numerically.
pub const INTEGRAL_TOL: f64 = 1e-8;

/// Streaming accumulator for `A_N`; one instance per path.
#[derive(Debug, Clone, Default)]
pub struct LogAverageAccumulator {
    count: usize,
    weighted: KahanSum,
    total: KahanSum,
}

impl LogAverageAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Feeds one term `d_k f(T_k)`. Weights must be positive and finite;
    /// values must be finite.
    pub fn accumulate(&mut self, weight: f64, value: f64) -> Result<()> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::invalid(format!("weight must be positive and finite, got {weight}")));
        }
        if !value.is_finite() {
            return Err(Error::invalid(format!("non-finite functional value {value}")));
        }
        self.count += 1;
        self.weighted.add(weight * value);
        self.total.add(weight);
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// `D_N` so far.
    pub fn total_weight(&self) -> f64 {
        self.total.value()
    }

    /// `A_N`, or `None` before the first term.
    pub fn average(&self) -> Option<f64> {
        if self.count == 0 {
            None
        } else {
            Some(self.weighted.value() / self.total.value())
        }
    }
}

/// Per-checkpoint error summary across the seed ensemble.
#[derive(Debug, Clone, Serialize)]
pub struct CheckpointSummary {
    pub n: usize,
    pub median_abs_error: f64,
    pub max_abs_error: f64,
}

/// Results of a convergence experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTrace {
    pub model_id: String,
    pub scheme: String,
    pub function: String,
    /// Integral of the function against the limit law.
    pub target: f64,
    pub checkpoints: Vec<usize>,
    pub seeds: Vec<u64>,
    /// `values[i][j]` is `A_N` for `seeds[i]` at `checkpoints[j]`.
    pub values: Vec<Vec<f64>>,
    pub summary: Vec<CheckpointSummary>,
}

impl ConvergenceTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    /// One row per (seed, checkpoint).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,N,A_N,target,abs_error\n");
        for (seed, row) in self.seeds.iter().zip(&self.values) {
            for (n, a) in self.checkpoints.iter().zip(row) {
                out.push_str(&format!(
                    "{seed},{n},{a},{},{}\n",
                    self.target,
                    (a - self.target).abs()
                ));
            }
        }
        out
    }
}

/// Runs the log-averaging experiment: for every seed, one path of length
/// `n_max` with `A_N` recorded at each checkpoint.
///
/// The target is the integral of `f` against the model's limit law, so
/// the model must use zero centering. Seeds are processed in parallel
/// with an ordered reduction; the output is a pure function of the
/// arguments.
pub fn run_experiment(
    model: SequenceModel,
    scheme: &WeightScheme,
    f: &LipschitzFunction,
    n_max: usize,
    checkpoints: &[usize],
    seeds: &[u64],
) -> Result<ConvergenceTrace> {
    if model.centering() != 0.0 {
        return Err(Error::invalid(
            "experiment requires zero centering; the convergence target assumes it",
        ));
    }
    if n_max == 0 {
        return Err(Error::invalid("path length must be >= 1"));
    }
    if checkpoints.is_empty() {
        return Err(Error::invalid("no checkpoints given"));
    }
    if checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("checkpoints must be strictly increasing and >= 1"));
    }
    if *checkpoints.last().unwrap() > n_max {
        return Err(Error::invalid(format!(
            "last checkpoint {} exceeds path length {n_max}",
            checkpoints.last().unwrap()
        )));
    }
    if seeds.is_empty() {
        return Err(Error::invalid("no seeds given"));
    }
    if let Some(limit) = scheme.len_limit() {
        if limit < n_max {
            return Err(Error::invalid(format!(
                "weight table has {limit} entries; experiment needs {n_max}"
            )));
        }
    }

    let target = crate::functions::integral_against(f, model.limit_law(), INTEGRAL_TOL)?.value;

    let values: Vec<Vec<f64>> = seeds
        .par_iter()
        .map(|&seed| {
            let mut acc = LogAverageAccumulator::new();
            let mut row = Vec::with_capacity(checkpoints.len());
            let mut next = 0;
            for pt in PathStream::new(model, seed).take(n_max) {
                acc.accumulate(scheme.weight(pt.k)?, f.eval(pt.normalized))?;
                if next < checkpoints.len() && pt.k == checkpoints[next] {
                    row.push(acc.average().expect("terms accumulated"));
                    next += 1;
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let mut summary = Vec::with_capacity(checkpoints.len());
    for (j, &n) in checkpoints.iter().enumerate() {
        let errs: Vec<f64> = values.iter().map(|row| (row[j] - target).abs()).collect();
        let max = errs.iter().copied().fold(0.0_f64, f64::max);
        summary.push(CheckpointSummary { n, median_abs_error: median(&errs), max_abs_error: max });
    }

    Ok(ConvergenceTrace {
        model_id: model.model_id(),
        scheme: scheme.to_string(),
        function: f.label(),
        target,
        checkpoints: checkpoints.to_vec(),
        seeds: seeds.to_vec(),
        values,
        summary,
    })
}

/// The sparse checkpoint grid `N_j = min { N <= n_cap : D_N >= exp(sqrt(j)) }`
/// for `j = 1..=j_max`. Indices hit by several consecutive `j` appear once;
/// levels unreachable within the cap are omitted.
pub fn subsequence_checkpoints(
    scheme: &WeightScheme,
    j_max: usize,
    n_cap: usize,
) -> Result<Vec<usize>> {
    if j_max == 0 || n_cap == 0 {
        return Err(Error::invalid("j_max and n_cap must be >= 1"));
    }
    let mut out = Vec::new();
    let mut total = KahanSum::new();
    let mut j = 1usize;
    let mut threshold = 1f64.exp();
    for n in 1..=n_cap {
        total.add(scheme.weight(n)?);
        while j <= j_max && total.value() >= threshold {
            if out.last() != Some(&n) {
                out.push(n);
            }
            j += 1;
            threshold = (j as f64).sqrt().exp();
        }
        if j > j_max {
            break;
        }
    }
    Ok(out)
}

/// Consecutive mass ratios `D_{N+1} / D_N` over a grid; admissible schemes
/// drive the ratio to 1. Verdict: the final ratio sits within `1e-3` of 1.
/// Repeated grid points are allowed and produce identical values.
pub fn ratio_consecutive(scheme: &WeightScheme, n_grid: &[usize]) -> Result<ConditionReport> {
    if n_grid.is_empty() {
        return Err(Error::invalid("empty grid"));
    }
    if n_grid[0] == 0 || n_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("grid must be non-decreasing and >= 1"));
    }
    let n_max = *n_grid.last().unwrap();
    let cache = crate::weights::prefix_sums(scheme, n_max + 1)?;
    let mut trace = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let ratio = cache.total(n + 1)? / cache.total(n)?;
        trace.push(TracePoint { index: n, value: ratio });
    }
    let sup = (trace.last().unwrap().value - 1.0).abs();
    Ok(ConditionReport::new(Condition::ConsecutiveRatio, sup, 1e-3, vec![], trace, vec![]))
}

/// Decades merged with the sparse subsequence grid; the default checkpoint
/// set for experiments up to `n_max`.
pub fn default_checkpoints(scheme: &WeightScheme, n_max: usize) -> Result<Vec<usize>> {
    let mut grid = crate::numeric::decade_grid(n_max);
    grid.extend(subsequence_checkpoints(scheme, 12, n_max)?);
    grid.sort_unstable();
    grid.dedup();
    Ok(grid)
}
