//! The test-function catalog and integrals against the limit law.
//!
//! Averages `A_N = D_N^{-1} sum d_k f(T_k)` are compared against
//! `integral of f` with respect to the limit law, so `f` must be Lipschitz
//! and the integral must be computable two independent ways: in closed form
//! where one exists, and by quadrature as the cross-check. Each catalog
//! entry knows its Lipschitz constant, its kink locations (quadrature
//! panels split there), and whether it is odd (odd `f` against a symmetric
//! law integrates to zero exactly, no quadrature involved).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::LimitLaw;
use crate::numeric::{log_spaced, KahanSum};
use crate::quadrature::integrate_panels;
use crate::report::{Condition, ConditionReport, TracePoint};

/// Relative slack allowed over the analytic Lipschitz constant in the
/// empirical audit; covers rounding in the finite-difference quotients.
pub const AUDIT_SLACK: f64 = 1e-9;

/// Gauss–Legendre order per panel for limit-law integrals.
const QUAD_ORDER: usize = 32;

/// Refinement floor: panels start at unit width and halve until the
/// embedded error estimate meets the tolerance, at most this many times.
const MAX_REFINEMENTS: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
enum FnKind {
    Constant(f64),
    Identity,
    Abs,
    Arctan,
    ClampedLinear { lo: f64, hi: f64 },
    SoftIndicator { x0: f64, delta: f64 },
}

/// A Lipschitz test function from the catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzFunction {
    kind: FnKind,
}

impl LipschitzFunction {
    pub fn constant(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::invalid(format!("constant must be finite, got {c}")));
        }
        Ok(Self { kind: FnKind::Constant(c) })
    }

    pub fn identity() -> Self {
        Self { kind: FnKind::Identity }
    }

    pub fn abs() -> Self {
        Self { kind: FnKind::Abs }
    }

    pub fn arctan() -> Self {
        Self { kind: FnKind::Arctan }
    }

    /// `x` clamped into `[lo, hi]`; slope 1 between the clamps.
    pub fn clamped_linear(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!(
                "clamp bounds must be finite with lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { kind: FnKind::ClampedLinear { lo, hi } })
    }

    /// 1 up to `x0`, 0 from `x0 + delta`, linear in between: a Lipschitz
    /// surrogate for the indicator of `(-inf, x0]` with constant `1/delta`.
    pub fn soft_indicator(x0: f64, delta: f64) -> Result<Self> {
        if !(x0.is_finite() && delta.is_finite() && delta > 0.0) {
            return Err(Error::invalid(format!(
                "soft indicator needs finite x0 and delta > 0, got x0={x0}, delta={delta}"
            )));
        }
        Ok(Self { kind: FnKind::SoftIndicator { x0, delta } })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            FnKind::Constant(c) => c,
            FnKind::Identity => x,
            FnKind::Abs => x.abs(),
            FnKind::Arctan => x.atan(),
            FnKind::ClampedLinear { lo, hi } => x.clamp(lo, hi),
            FnKind::SoftIndicator { x0, delta } => {
                if x <= x0 {
                    1.0
                } else if x >= x0 + delta {
                    0.0
                } else {
                    1.0 - (x - x0) / delta
                }
            }
        }
    }

    /// The analytic (smallest) Lipschitz constant.
    pub fn lipschitz_constant(&self) -> f64 {
        match self.kind {
            FnKind::Constant(_) => 0.0,
            FnKind::Identity | FnKind::Abs | FnKind::Arctan => 1.0,
            FnKind::ClampedLinear { .. } => 1.0,
            FnKind::SoftIndicator { delta, .. } => 1.0 / delta,
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self.kind, FnKind::Identity | FnKind::Abs)
    }

    /// `Some(c)` for the constant function; constants admit exact centering
    /// without sampling.
    pub fn constant_value(&self) -> Option<f64> {
        match self.kind {
            FnKind::Constant(c) => Some(c),
            _ => None,
        }
    }

    /// Odd functions integrate to exactly zero against symmetric laws.
    pub fn is_odd(&self) -> bool {
        match self.kind {
            FnKind::Constant(c) => c == 0.0,
            FnKind::Identity | FnKind::Arctan => true,
            FnKind::Abs => false,
            FnKind::ClampedLinear { lo, hi } => lo == -hi,
            FnKind::SoftIndicator { .. } => false,
        }
    }

    /// Kink locations; quadrature panels must not straddle these.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.kind {
            FnKind::Abs => vec![0.0],
            FnKind::ClampedLinear { lo, hi } => vec![lo, hi],
            FnKind::SoftIndicator { x0, delta } => vec![x0, x0 + delta],
            _ => vec![],
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            FnKind::Constant(c) => format!("constant({c})"),
            FnKind::Identity => "identity".into(),
            FnKind::Abs => "abs".into(),
            FnKind::Arctan => "arctan".into(),
            FnKind::ClampedLinear { lo, hi } => format!("clamped-linear({lo},{hi})"),
            FnKind::SoftIndicator { x0, delta } => format!("soft-indicator({x0},{delta})"),
        }
    }

    /// Closed-form value of the integral against `law`, where one exists.
    fn closed_form_against(&self, law: LimitLaw) -> Option<f64> {
        if self.is_odd() && law.is_symmetric() {
            return Some(0.0);
        }
        match law {
            LimitLaw::StandardNormal => Some(match self.kind {
                FnKind::Constant(c) => c,
                FnKind::Identity => 0.0,
                FnKind::Arctan => 0.0,
                // E|Z| = sqrt(2/pi)
                FnKind::Abs => (2.0 / std::f64::consts::PI).sqrt(),
                // lo Phi(lo) + hi (1 - Phi(hi)) + phi(lo) - phi(hi)
                FnKind::ClampedLinear { lo, hi } => {
                    law.cdf(lo) * lo + (1.0 - law.cdf(hi)) * hi + law.pdf(lo) - law.pdf(hi)
                }
                // Phi(a) + (1 + a/delta)(Phi(b) - Phi(a)) - (phi(a) - phi(b))/delta
                FnKind::SoftIndicator { x0, delta } => {
                    let (a, b) = (x0, x0 + delta);
                    law.cdf(a) + (1.0 + a / delta) * (law.cdf(b) - law.cdf(a))
                        - (law.pdf(a) - law.pdf(b)) / delta
                }
            }),
        }
    }
}

impl std::fmt::Display for LipschitzFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
}

/// An integral value with its error estimate and provenance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub method: Method,
}

/// `integral of f dH`: closed form when the catalog knows one, quadrature
/// otherwise. Both routes exist for every catalog entry against the
/// standard normal law; [`integral_quadrature`] exposes the second route
/// directly so the two can be cross-checked.
pub fn integral_against(
    f: &LipschitzFunction,
    law: LimitLaw,
    tol: f64,
) -> Result<IntegralResult> {
    check_tol(tol)?;
    check_supported(f, law)?;
    if let Some(value) = f.closed_form_against(law) {
        return Ok(IntegralResult { value, error_estimate: 0.0, method: Method::ClosedForm });
    }
    integral_quadrature(f, law, tol)
}

/// The quadrature route: panels over `[-cutoff, cutoff]` split at the
/// function's breakpoints, halving panel width until the embedded error
/// estimate (plus the documented tail allowance) meets `tol`.
pub fn integral_quadrature(
    f: &LipschitzFunction,
    law: LimitLaw,
    tol: f64,
) -> Result<IntegralResult> {
    check_tol(tol)?;
    check_supported(f, law)?;
    let cutoff = law.support_cutoff();
    let mut cuts = vec![-cutoff, cutoff];
    cuts.extend(f.breakpoints().into_iter().filter(|x| x.abs() < cutoff));
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite cuts"));
    cuts.dedup();

    // Mass beyond the cutoff, with the linear growth of the unbounded
    // catalog entries absorbed into the (1 + cutoff) factor.
    let tail = law.pdf(cutoff) * (1.0 + cutoff) * 2.0;

    let g = |x: f64| f.eval(x) * law.pdf(x);
    for refinement in 0..=MAX_REFINEMENTS {
        let width = 1.0 / f64::from(1u32 << refinement);
        let mut value = KahanSum::new();
        let mut err = tail;
        for pair in cuts.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let panels = ((b - a) / width).ceil().max(1.0) as usize;
            let (v, e) = integrate_panels(&g, a, b, QUAD_ORDER, panels);
            value.add(v);
            err += e;
        }
        if err <= tol {
            return Ok(IntegralResult {
                value: value.value(),
                error_estimate: err,
                method: Method::Quadrature,
            });
        }
    }
    Err(Error::Unsupported(format!(
        "quadrature could not reach tolerance {tol:e} for {f} against {law:?}"
    )))
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

fn check_supported(f: &LipschitzFunction, law: LimitLaw) -> Result<()> {
    if !f.is_bounded() && !law.has_first_moment() {
        return Err(Error::Unsupported(format!(
            "unbounded function {f} against a law without a first moment"
        )));
    }
    Ok(())
}

/// Evaluation grid for the empirical Lipschitz audit.
#[derive(Debug, Clone, Copy)]
pub struct AuditGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for AuditGrid {
    fn default() -> Self {
        Self { lo: -20.0, hi: 20.0, step: 1e-3 }
    }
}

/// Checks the empirical slope of `f` over adjacent grid points against the
/// analytic constant. `sup_statistic` is the largest observed quotient,
/// the threshold is `L (1 + 1e-9)`, and every left grid index whose step
/// exceeds the threshold is a violation.
pub fn lipschitz_audit(f: &LipschitzFunction, grid: &AuditGrid) -> Result<ConditionReport> {
    if !(grid.lo.is_finite() && grid.hi.is_finite() && grid.lo < grid.hi) {
        return Err(Error::invalid(format!(
            "audit grid must satisfy lo < hi, got [{}, {}]",
            grid.lo, grid.hi
        )));
    }
    if !(grid.step.is_finite() && grid.step > 0.0) {
        return Err(Error::invalid(format!("audit step must be positive, got {}", grid.step)));
    }
    let count = ((grid.hi - grid.lo) / grid.step).floor() as usize + 1;
    if count < 2 {
        return Err(Error::invalid("audit grid has fewer than two points"));
    }
    if count > 100_000_000 {
        return Err(Error::invalid(format!("audit grid has {count} points; refusing")));
    }

    let point = |i: usize| grid.lo + i as f64 * grid.step;
    let threshold = f.lipschitz_constant() * (1.0 + AUDIT_SLACK);
    let mut sup = 0.0_f64;
    let mut violations = Vec::new();
    let mut slopes = Vec::with_capacity(count - 1);
    let mut prev_x = point(0);
    let mut prev_y = f.eval(prev_x);
    for i in 1..count {
        let x = point(i);
        let y = f.eval(x);
        let slope = ((y - prev_y) / (x - prev_x)).abs();
        if slope > threshold {
            violations.push(i - 1);
        }
        sup = sup.max(slope);
        slopes.push(slope);
        prev_x = x;
        prev_y = y;
    }
    let trace = log_spaced(0, slopes.len() - 1, 128)
        .into_iter()
        .map(|i| TracePoint { index: i, value: slopes[i] })
        .collect();
    Ok(ConditionReport::new(Condition::Lipschitz, sup, threshold, violations, trace, vec![]))
}
