//! Report types shared by the diagnostic and verification routines.
//!
//! Two shapes cover everything the crate checks. [`ConditionReport`] is for
//! deterministic or single-statistic scans (weight growth conditions, trace
//! monotonicity, moment trends). [`BoundReport`] is for Monte Carlo bound
//! checks where an estimated left-hand side is compared against a structural
//! right-hand side over a parameter grid.
//!
//! Both serialize to JSON as-is and flatten to CSV with one row per trace or
//! grid point, so artifacts can be diffed and plotted without custom tooling.

use serde::Serialize;

use crate::error::Result;

/// Which check produced a [`ConditionReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Weight boundedness and eventual monotonicity of `d_k * k^alpha`.
    C2,
    /// Decay rate `d_k = O(D_k / (k (log D_k)^rho))`.
    C3,
    /// Sub-polynomial growth of the weight totals: `D_N / N^eps` trace.
    Lemma1,
    /// Stabilization of the correlation-weighted pair sum ratio.
    Lemma5,
    /// Normalizer growth `a_k/a_l <= C (k/l)^beta` over index pairs.
    C4Growth,
    /// Trend of the `mu`-th absolute moment of normalized sums.
    MuMoment,
    /// Empirical Lipschitz constant audit on a grid.
    Lipschitz,
    /// Consecutive weight-total ratio `D_{N+1}/D_N` against 1.
    ConsecutiveRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// One sampled point of a diagnostic trace.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TracePoint {
    pub index: usize,
    pub value: f64,
}

/// Violation indices kept in a report before truncation. Full scans can
/// flag hundreds of thousands of indices (a constant weight table violates
/// everywhere); the count is always exact, the listing is capped.
pub const MAX_STORED_VIOLATIONS: usize = 1024;

/// Outcome of a condition scan.
///
/// The verdict is `Pass` exactly when `sup_statistic <= threshold` and no
/// violation was recorded. Each check documents what its statistic,
/// threshold, and violations mean.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub sup_statistic: f64,
    pub threshold: f64,
    /// Exact number of violating indices found.
    pub violation_count: usize,
    /// At most [`MAX_STORED_VIOLATIONS`] of them, in increasing order.
    pub violation_indices: Vec<usize>,
    pub trace: Vec<TracePoint>,
    /// Standard errors parallel to `trace` for Monte Carlo checks; empty
    /// for deterministic scans.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub stderrs: Vec<f64>,
    pub verdict: Verdict,
}

impl ConditionReport {
    pub(crate) fn new(
        condition: Condition,
        sup_statistic: f64,
        threshold: f64,
        mut violations: Vec<usize>,
        trace: Vec<TracePoint>,
        stderrs: Vec<f64>,
    ) -> Self {
        let violation_count = violations.len();
        violations.truncate(MAX_STORED_VIOLATIONS);
        let verdict =
            Verdict::from_bool(sup_statistic <= threshold && violation_count == 0);
        Self {
            condition,
            sup_statistic,
            threshold,
            violation_count,
            violation_indices: violations,
            trace,
            stderrs,
            verdict,
        }
    }

    /// For checks whose pass rule is stricter than `sup <= threshold`
    /// (e.g. a strict decrease requirement); a passing verdict still
    /// implies `sup_statistic <= threshold` with no violations.
    pub(crate) fn from_parts(
        condition: Condition,
        sup_statistic: f64,
        threshold: f64,
        mut violations: Vec<usize>,
        trace: Vec<TracePoint>,
        stderrs: Vec<f64>,
        verdict: Verdict,
    ) -> Self {
        let violation_count = violations.len();
        violations.truncate(MAX_STORED_VIOLATIONS);
        Self {
            condition,
            sup_statistic,
            threshold,
            violation_count,
            violation_indices: violations,
            trace,
            stderrs,
            verdict,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self).expect("report serialization"))
    }

    /// One CSV row per trace point; scan-level fields repeat per row so the
    /// file stands alone when concatenated with other reports.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("condition,index,value,stderr,sup_statistic,threshold,verdict\n");
        let cond = format!("{:?}", self.condition).to_lowercase();
        let verdict = if self.verdict.passed() { "pass" } else { "fail" };
        for (i, pt) in self.trace.iter().enumerate() {
            let se = self.stderrs.get(i).map(|s| s.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{cond},{},{},{se},{},{},{verdict}\n",
                pt.index, pt.value, self.sup_statistic, self.threshold
            ));
        }
        out
    }
}

/// Which moment bound a [`BoundReport`] verifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Lemma {
    /// Covariance decay over index pairs.
    L2,
    /// Centered block-increment moment bound.
    L3,
    /// Full weighted-sum moment bound.
    L4,
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Outcome of a Monte Carlo bound verification over a parameter grid.
///
/// `ratio_trace` holds the point estimates `lhs / rhs_structural`;
/// `ratio_upper` holds `(lhs + 2 se) / rhs_structural`, and the verdict is
/// computed from the upper ratios so sampling noise cannot mask growth.
/// The bound "holds with some constant" is operationalized as: the running
/// maximum of the upper ratio attains no new maximum over the final half of
/// the grid.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub lemma: Lemma,
    /// Names of the grid coordinates, e.g. `["k", "l"]`.
    pub grid_labels: Vec<String>,
    /// One tuple per grid point, parallel to `lhs`.
    pub grid: Vec<Vec<u64>>,
    pub lhs: Vec<Estimate>,
    pub rhs_structural: Vec<f64>,
    pub ratio_trace: Vec<f64>,
    pub ratio_upper: Vec<f64>,
    /// Shape of the structural prefactor where the bound specifies one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structural_prefactor: Option<f64>,
    /// Companion quantity `V_{1,N}` per grid point (moment-bound checks).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_quantity: Option<Vec<f64>>,
    pub verdict: Verdict,
}

impl BoundReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self).expect("report serialization"))
    }

    /// Flat CSV: one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut header = String::from("lemma");
        for label in &self.grid_labels {
            header.push(',');
            header.push_str(label);
        }
        header.push_str(",lhs,std_error,rhs_structural,ratio,ratio_upper");
        if self.v_quantity.is_some() {
            header.push_str(",v_quantity");
        }
        header.push_str(",verdict\n");

        let mut out = header;
        let lemma = format!("{:?}", self.lemma).to_lowercase();
        let verdict = if self.verdict.passed() { "pass" } else { "fail" };
        for i in 0..self.grid.len() {
            out.push_str(&lemma);
            for coord in &self.grid[i] {
                out.push_str(&format!(",{coord}"));
            }
            out.push_str(&format!(
                ",{},{},{},{},{}",
                self.lhs[i].value,
                self.lhs[i].std_error,
                self.rhs_structural[i],
                self.ratio_trace[i],
                self.ratio_upper[i]
            ));
            if let Some(v) = &self.v_quantity {
                out.push_str(&format!(",{}", v[i]));
            }
            out.push_str(&format!(",{verdict}\n"));
        }
        out
    }
}

/// Splits a sequence of statistic values into a stabilization verdict.
///
/// Returns `(sup, threshold, late_new_max_positions)` where `threshold` is
/// the running maximum over the first half of the values and the positions
/// list every index in the final half where a strictly new maximum appears.
/// "Stabilizes" means that list is empty, i.e. `sup <= threshold`.
pub(crate) fn running_max_stabilization(values: &[f64]) -> (f64, f64, Vec<usize>) {
    assert!(!values.is_empty());
    let split = values.len().div_ceil(2);
    let mut running = f64::NEG_INFINITY;
    let mut threshold = f64::NEG_INFINITY;
    let mut late = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        if v > running {
            running = v;
            if i >= split {
                late.push(i);
            }
        }
        if i + 1 == split {
            threshold = running;
        }
    }
    (running, threshold, late)
}
