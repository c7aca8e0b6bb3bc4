//! Weight sequences `d_k > 0`, their prefix totals `D_N`, and the growth
//! diagnostics that decide whether a sequence is admissible for
//! logarithmic averaging.
//!
//! The built-in families:
//!
//! * `Harmonic`: `d_k = 1/k`, the classical choice; `D_N` grows like `log N`.
//! * `PowerLog(gamma)`: `d_k = (log k)^gamma / k` with `d_1 = d_2` so the
//!   first weight stays positive (`log 1 = 0` would kill it).
//! * `Power(theta)`: `d_k = k^{-theta}`, `0 < theta <= 1`. For `theta < 1`
//!   the scaled weight `k d_k = k^{1-theta}` is unbounded, which the
//!   boundedness check is expected to flag.
//! * `Custom`: an explicit positive table, 1-based by position.
//!
//! Conventions used by every scan in this module: logarithms are natural,
//! statistics involving `log D_k` are only evaluated where `D_k > e` (so the
//! logarithm exceeds 1 and ratios cannot blow up on tiny denominators), and
//! "bounded" is operationalized as stabilization of the running maximum: no
//! new maximum may appear over the final half of the evaluation range.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::{decade_grid, log_spaced, KahanSum};
use crate::report::{Condition, ConditionReport, TracePoint, Verdict};

/// Relative slack for monotonicity comparisons between closed-form weight
/// statistics; absorbs 1-ulp rounding wobble in `powf` without hiding any
/// real violation (genuine trends move far faster than 1e-12 per step).
const MONOTONE_SLACK: f64 = 1e-12;

/// First index where prefix totals support `log D_k > 1`.
fn exceeds_e(total: f64) -> bool {
    total > std::f64::consts::E
}

#[derive(Debug, Clone)]
enum SchemeKind {
    Harmonic,
    PowerLog { gamma: f64 },
    Power { theta: f64 },
    Custom { table: Arc<[f64]> },
}

/// A positive weight sequence `d_1, d_2, ...` (1-based).
///
/// Parameters are validated at construction; every later lookup of a valid
/// index is infallible, and `Custom` lookups past the table end report an
/// out-of-range error rather than extrapolating.
#[derive(Debug, Clone)]
pub struct WeightScheme {
    kind: SchemeKind,
}

impl WeightScheme {
    /// `d_k = 1/k`.
    pub fn harmonic() -> Self {
        Self { kind: SchemeKind::Harmonic }
    }

    /// `d_k = (log k)^gamma / k` for `k >= 2`, with `d_1 = d_2`.
    pub fn power_log(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::invalid(format!(
                "power-log exponent must satisfy gamma >= 0, got {gamma}"
            )));
        }
        Ok(Self { kind: SchemeKind::PowerLog { gamma } })
    }

    /// `d_k = k^{-theta}`, `0 < theta <= 1`.
    pub fn power(theta: f64) -> Result<Self> {
        if !theta.is_finite() || theta <= 0.0 || theta > 1.0 {
            return Err(Error::invalid(format!(
                "power exponent must satisfy 0 < theta <= 1, got {theta}"
            )));
        }
        Ok(Self { kind: SchemeKind::Power { theta } })
    }

    /// An explicit weight table; every entry must be finite and positive.
    pub fn custom(table: Vec<f64>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::invalid("custom weight table is empty"));
        }
        for (i, &w) in table.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::invalid(format!(
                    "custom weight at index {} must be finite and positive, got {w}",
                    i + 1
                )));
            }
        }
        Ok(Self { kind: SchemeKind::Custom { table: table.into() } })
    }

    /// Loads a custom table from a text file: one positive decimal per
    /// line, the line number being the 1-based index. Trailing blank lines
    /// are tolerated; anything else must parse.
    pub fn custom_from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut lines: Vec<&str> = text.lines().collect();
        while lines.last().is_some_and(|l| l.trim().is_empty()) {
            lines.pop();
        }
        let mut table = Vec::with_capacity(lines.len());
        for (i, line) in lines.iter().enumerate() {
            let value: f64 = line.trim().parse().map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("{e}: {line:?}"),
            })?;
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("weight must be finite and positive, got {value}"),
                });
            }
            table.push(value);
        }
        Self::custom(table)
    }

    /// `d_k`. Indices are 1-based; `k = 0` is invalid and `Custom` lookups
    /// past the table end are out of range.
    pub fn weight(&self, k: usize) -> Result<f64> {
        self.check_index(k)?;
        Ok(self.weight_unchecked(k))
    }

    /// `k * d_k`, evaluated in closed form per family. For `Harmonic` this
    /// is exactly 1.0 at every k; the naive product `k * (1/k)` rounds one
    /// ulp low for roughly 15% of indices.
    pub fn scaled_weight(&self, k: usize) -> Result<f64> {
        self.check_index(k)?;
        Ok(match &self.kind {
            SchemeKind::Harmonic => 1.0,
            SchemeKind::PowerLog { gamma } => {
                if k == 1 {
                    (2f64.ln()).powf(*gamma) / 2.0
                } else {
                    (k as f64).ln().powf(*gamma)
                }
            }
            SchemeKind::Power { theta } => (k as f64).powf(1.0 - theta),
            SchemeKind::Custom { table } => k as f64 * table[k - 1],
        })
    }

    /// Length of the underlying table for `Custom`; unbounded families
    /// return `None`.
    pub fn len_limit(&self) -> Option<usize> {
        match &self.kind {
            SchemeKind::Custom { table } => Some(table.len()),
            _ => None,
        }
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k == 0 {
            return Err(Error::invalid("weight indices are 1-based; k must be >= 1"));
        }
        if let SchemeKind::Custom { table } = &self.kind {
            if k > table.len() {
                return Err(Error::OutOfRange { index: k, len: table.len() });
            }
        }
        Ok(())
    }

    #[inline]
    fn weight_unchecked(&self, k: usize) -> f64 {
        match &self.kind {
            SchemeKind::Harmonic => 1.0 / k as f64,
            SchemeKind::PowerLog { gamma } => {
                let k = k.max(2);
                (k as f64).ln().powf(*gamma) / k as f64
            }
            SchemeKind::Power { theta } => (k as f64).powf(-theta),
            SchemeKind::Custom { table } => table[k - 1],
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SchemeKind::Harmonic => write!(f, "harmonic"),
            SchemeKind::PowerLog { gamma } => write!(f, "power-log(gamma={gamma})"),
            SchemeKind::Power { theta } => write!(f, "power(theta={theta})"),
            SchemeKind::Custom { table } => write!(f, "custom(len={})", table.len()),
        }
    }
}

/// Prefix totals `D_n = d_1 + ... + d_n`, compensated.
#[derive(Debug, Clone)]
pub struct PrefixCache {
    scheme: WeightScheme,
    totals: Vec<f64>,
}

/// Builds the prefix totals `D_1..D_n` for `scheme`.
pub fn prefix_sums(scheme: &WeightScheme, n: usize) -> Result<PrefixCache> {
    if n == 0 {
        return Err(Error::invalid("prefix length must be >= 1"));
    }
    scheme.check_index(n)?;
    let mut acc = KahanSum::new();
    let mut totals = Vec::with_capacity(n);
    for k in 1..=n {
        acc.add(scheme.weight_unchecked(k));
        totals.push(acc.value());
    }
    Ok(PrefixCache { scheme: scheme.clone(), totals })
}

impl PrefixCache {
    pub fn len(&self) -> usize {
        self.totals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.totals.is_empty()
    }

    /// `D_n` (1-based).
    pub fn total(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.totals.len() {
            return Err(Error::OutOfRange { index: n, len: self.totals.len() });
        }
        Ok(self.totals[n - 1])
    }

    pub fn totals(&self) -> &[f64] {
        &self.totals
    }

    pub fn scheme(&self) -> &WeightScheme {
        &self.scheme
    }
}

/// Incremental cache for `sum_{k<=l} d_k k^beta`; O(1) amortized per
/// successive `l` because the compensated partial sum is extended in place.
#[derive(Debug, Clone)]
pub struct PowerSumCache {
    scheme: WeightScheme,
    beta: f64,
    sums: Vec<f64>,
    acc: KahanSum,
}

impl PowerSumCache {
    pub fn new(scheme: &WeightScheme, beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::invalid(format!("beta must be finite, got {beta}")));
        }
        Ok(Self { scheme: scheme.clone(), beta, sums: Vec::new(), acc: KahanSum::new() })
    }

    /// `sum_{k=1}^{l} d_k k^beta`, extending the cache as needed.
    pub fn sum_to(&mut self, l: usize) -> Result<f64> {
        if l == 0 {
            return Err(Error::invalid("power sum endpoint must be >= 1"));
        }
        self.scheme.check_index(l)?;
        while self.sums.len() < l {
            let k = self.sums.len() + 1;
            self.acc.add(self.scheme.weight_unchecked(k) * (k as f64).powf(self.beta));
            self.sums.push(self.acc.value());
        }
        Ok(self.sums[l - 1])
    }
}

/// One-shot `sum_{k=1}^{l} d_k k^beta`.
pub fn power_sum(scheme: &WeightScheme, beta: f64, l: usize) -> Result<f64> {
    PowerSumCache::new(scheme, beta)?.sum_to(l)
}

/// `V_{m,n} = sum_{l=m}^{n} d_l l^{-beta} (sum_{k=1}^{l} d_k k^beta)`.
///
/// The inner sums come from one incremental pass, so the whole quantity is
/// O(n). Additive in the outer range: `V(m,n) = V(m,j) + V(j+1,n)` up to
/// compensated rounding.
pub fn v_quantity(scheme: &WeightScheme, beta: f64, m: usize, n: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("range start must be >= 1"));
    }
    if m > n {
        return Err(Error::invalid(format!("empty range: m={m} > n={n}")));
    }
    scheme.check_index(n)?;
    let mut inner = PowerSumCache::new(scheme, beta)?;
    let mut acc = KahanSum::new();
    for l in m..=n {
        let p = inner.sum_to(l)?;
        acc.add(scheme.weight_unchecked(l) * (l as f64).powf(-beta) * p);
    }
    Ok(acc.value())
}

/// Evaluation mode for the pair-sum diagnostics: the O(N) factorized route
/// or the O(N^2) direct double loop. `BruteForce` computes both and fails
/// with an internal consistency error if they disagree beyond 1e-10
/// relative, so the fast route can never silently drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSumMode {
    Fast,
    BruteForce,
}

/// Relative agreement demanded between the two pair-sum routes.
pub const PAIR_SUM_AGREEMENT: f64 = 1e-10;

/// `S(N') = sum_{1<=k<=l<=N'} d_k d_l (k/l)^alpha` at each checkpoint, in
/// one O(max N') pass via the factorization
/// `S(N) = sum_l d_l l^{-alpha} (sum_{k<=l} d_k k^alpha)`.
pub fn pair_sum_checkpoints(
    scheme: &WeightScheme,
    alpha: f64,
    checkpoints: &[usize],
) -> Result<Vec<f64>> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    if checkpoints.is_empty() {
        return Err(Error::invalid("no checkpoints given"));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints[0] == 0 {
        return Err(Error::invalid("checkpoints must be strictly increasing and >= 1"));
    }
    let max = *checkpoints.last().expect("nonempty");
    scheme.check_index(max)?;

    let mut inner = KahanSum::new();
    let mut outer = KahanSum::new();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    for l in 1..=max {
        let d = scheme.weight_unchecked(l);
        let lf = l as f64;
        inner.add(d * lf.powf(alpha));
        outer.add(d * lf.powf(-alpha) * inner.value());
        if checkpoints[next] == l {
            out.push(outer.value());
            next += 1;
            if next == checkpoints.len() {
                break;
            }
        }
    }
    Ok(out)
}

/// Direct O(N^2) evaluation of the same double sum, kept deliberately
/// independent of the factorized route (it forms `(k/l)^alpha` per pair).
pub fn pair_sum_bruteforce(scheme: &WeightScheme, alpha: f64, n: usize) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    if n == 0 {
        return Err(Error::invalid("pair sum endpoint must be >= 1"));
    }
    scheme.check_index(n)?;
    let weights: Vec<f64> = (1..=n).map(|k| scheme.weight_unchecked(k)).collect();
    let mut acc = KahanSum::new();
    for l in 1..=n {
        for k in 1..=l {
            acc.add(weights[k - 1] * weights[l - 1] * (k as f64 / l as f64).powf(alpha));
        }
    }
    Ok(acc.value())
}

/// Scaled-weight boundedness and eventual monotonicity scan.
///
/// Two requirements are checked over `k = 1..=big_k`:
///
/// * `k d_k` stays bounded, operationalized as stabilization: the running
///   maximum of `k d_k` attains no new value over the final half of the
///   range. `sup_statistic` is the overall maximum, `threshold` the running
///   maximum at the midpoint, and any index in the final half where a new
///   maximum appears is recorded as a violation.
/// * `d_k k^alpha` is non-increasing from `k_burnin` on; every `k` in
///   `[k_burnin, big_k)` where the next value is larger (beyond 1e-12
///   relative slack) is a violation.
pub fn check_c2(
    scheme: &WeightScheme,
    alpha: f64,
    k_burnin: usize,
    big_k: usize,
) -> Result<ConditionReport> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "alpha must satisfy 0 < alpha < 1, got {alpha}"
        )));
    }
    if k_burnin == 0 {
        return Err(Error::invalid("burn-in index must be >= 1"));
    }
    if big_k == 0 {
        return Err(Error::invalid("scan length must be >= 1"));
    }
    scheme.check_index(big_k)?;

    let split = big_k.div_ceil(2);
    let trace_at = log_spaced(1, big_k, 128);
    let mut trace = Vec::with_capacity(trace_at.len());
    let mut trace_next = 0;

    let mut running = f64::NEG_INFINITY;
    let mut threshold = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    let mut prev_mono = f64::NAN;

    for k in 1..=big_k {
        let scaled = scheme.scaled_weight(k).expect("index pre-checked");
        if scaled > running {
            running = scaled;
            if k > split {
                violations.push(k);
            }
        }
        if k == split {
            threshold = running;
        }

        let mono = scheme.weight_unchecked(k) * (k as f64).powf(alpha);
        if k > k_burnin && k >= 2 && mono > prev_mono * (1.0 + MONOTONE_SLACK) {
            // record the left index of the offending step, per convention
            violations.push(k - 1);
        }
        prev_mono = mono;

        if trace_next < trace_at.len() && trace_at[trace_next] == k {
            trace.push(TracePoint { index: k, value: scaled });
            trace_next += 1;
        }
    }

    violations.sort_unstable();
    violations.dedup();
    Ok(ConditionReport::new(Condition::C2, running, threshold, violations, trace, vec![]))
}

/// Decay-rate scan: the statistic `d_k k (log D_k)^rho / D_k` must stay
/// bounded, again as running-maximum stabilization. Evaluation starts at
/// the first `k0` with `D_{k0} > e`; if no index up to `big_k` qualifies
/// the evaluation range is empty and that is an input error.
pub fn check_c3(scheme: &WeightScheme, rho: f64, big_k: usize) -> Result<ConditionReport> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::invalid(format!("rho must be positive, got {rho}")));
    }
    if big_k == 0 {
        return Err(Error::invalid("scan length must be >= 1"));
    }
    scheme.check_index(big_k)?;

    let mut total = KahanSum::new();
    let mut k0 = None;
    let mut stats: Vec<f64> = Vec::new();
    let mut ks: Vec<usize> = Vec::new();
    for k in 1..=big_k {
        total.add(scheme.weight_unchecked(k));
        let d_total = total.value();
        if k0.is_none() {
            if exceeds_e(d_total) {
                k0 = Some(k);
            } else {
                continue;
            }
        }
        let stat = scheme.scaled_weight(k).expect("index pre-checked") * d_total.ln().powf(rho)
            / d_total;
        stats.push(stat);
        ks.push(k);
    }
    if k0.is_none() {
        return Err(Error::invalid(format!(
            "empty evaluation range: no k <= {big_k} has prefix total above e"
        )));
    }

    let (sup, threshold, late) = crate::report::running_max_stabilization(&stats);
    let violations: Vec<usize> = late.into_iter().map(|pos| ks[pos]).collect();
    let trace_at = log_spaced(0, stats.len() - 1, 128);
    let trace = trace_at
        .into_iter()
        .map(|pos| TracePoint { index: ks[pos], value: stats[pos] })
        .collect();
    Ok(ConditionReport::new(Condition::C3, sup, threshold, violations, trace, vec![]))
}

/// Sub-polynomial growth trace: `D_N / N^eps` over `n_grid`.
///
/// Passes when the last trace value is strictly below the first and the
/// final half of the grid is monotone non-increasing. `sup_statistic` is
/// the last-to-first ratio and the threshold is exactly 1.
pub fn lemma1_trace(
    scheme: &WeightScheme,
    eps: f64,
    n_grid: &[usize],
) -> Result<ConditionReport> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    if n_grid.is_empty() {
        return Err(Error::invalid("empty evaluation grid"));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) || n_grid[0] == 0 {
        return Err(Error::invalid("grid must be strictly increasing and >= 1"));
    }
    let max = *n_grid.last().expect("nonempty");
    scheme.check_index(max)?;

    let mut total = KahanSum::new();
    let mut values = Vec::with_capacity(n_grid.len());
    let mut next = 0;
    for k in 1..=max {
        total.add(scheme.weight_unchecked(k));
        if n_grid[next] == k {
            values.push(total.value() / (k as f64).powf(eps));
            next += 1;
            if next == n_grid.len() {
                break;
            }
        }
    }

    let split = n_grid.len().div_ceil(2);
    let mut violations = Vec::new();
    for i in split.max(1)..values.len() {
        if values[i] > values[i - 1] {
            violations.push(n_grid[i]);
        }
    }
    let ratio = values[values.len() - 1] / values[0];
    let trace: Vec<TracePoint> = n_grid
        .iter()
        .zip(&values)
        .map(|(&n, &v)| TracePoint { index: n, value: v })
        .collect();
    let pass = ratio < 1.0 && violations.is_empty();
    Ok(ConditionReport::from_parts(
        Condition::Lemma1,
        ratio,
        1.0,
        violations,
        trace,
        vec![],
        Verdict::from_bool(pass),
    ))
}

/// Pair-sum decay diagnostic: the ratio
/// `R(N') = S(N') (log D_{N'})^eta / D_{N'}^2` on a decade grid up to `n`,
/// restricted to points with `D_{N'} > e`. Passes when the running maximum
/// of `R` stabilizes over the final half of the grid.
///
/// `BruteForce` mode additionally recomputes `S` by the direct double loop
/// at every grid point and errors out on disagreement beyond
/// [`PAIR_SUM_AGREEMENT`] relative.
pub fn lemma5_ratio(
    scheme: &WeightScheme,
    alpha: f64,
    eta: f64,
    n: usize,
    mode: PairSumMode,
) -> Result<ConditionReport> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::invalid(format!("eta must be positive, got {eta}")));
    }
    if n == 0 {
        return Err(Error::invalid("scan length must be >= 1"));
    }
    scheme.check_index(n)?;

    // Admissible grid: decade points (plus n itself) where D > e.
    let grid_all = decade_grid(n);
    let mut total = KahanSum::new();
    let mut totals = Vec::with_capacity(grid_all.len());
    let mut next = 0;
    for k in 1..=n {
        total.add(scheme.weight_unchecked(k));
        if grid_all[next] == k {
            totals.push(total.value());
            next += 1;
            if next == grid_all.len() {
                break;
            }
        }
    }
    let grid: Vec<usize> = grid_all
        .iter()
        .zip(&totals)
        .filter(|(_, &d)| exceeds_e(d))
        .map(|(&g, _)| g)
        .collect();
    let grid_totals: Vec<f64> = totals.iter().copied().filter(|&d| exceeds_e(d)).collect();
    if grid.is_empty() {
        return Err(Error::invalid(format!(
            "no evaluation point up to {n} has prefix total above e"
        )));
    }

    let sums = pair_sum_checkpoints(scheme, alpha, &grid)?;
    if mode == PairSumMode::BruteForce {
        for (i, &g) in grid.iter().enumerate() {
            let brute = pair_sum_bruteforce(scheme, alpha, g)?;
            let rel = (sums[i] - brute).abs() / brute.abs().max(f64::MIN_POSITIVE);
            if rel > PAIR_SUM_AGREEMENT {
                return Err(Error::inconsistency(format!(
                    "pair sum routes disagree at N={g}: fast={}, bruteforce={brute}, rel={rel:e}",
                    sums[i]
                )));
            }
        }
    }

    let ratios: Vec<f64> = sums
        .iter()
        .zip(&grid_totals)
        .map(|(&s, &d)| s * d.ln().powf(eta) / (d * d))
        .collect();
    let (sup, threshold, late) = crate::report::running_max_stabilization(&ratios);
    let violations: Vec<usize> = late.into_iter().map(|pos| grid[pos]).collect();
    let trace: Vec<TracePoint> = grid
        .iter()
        .zip(&ratios)
        .map(|(&g, &r)| TracePoint { index: g, value: r })
        .collect();
    Ok(ConditionReport::new(Condition::Lemma5, sup, threshold, violations, trace, vec![]))
}
