//! Integral and audit tests for the function catalog.

use asclt_core::{
    integral_against, integral_quadrature, lipschitz_audit, AuditGrid, LimitLaw,
    LipschitzFunction, Method,
};

const TOL: f64 = 1e-8;

fn catalog() -> Vec<LipschitzFunction> {
    vec![
        LipschitzFunction::constant(3.0).unwrap(),
        LipschitzFunction::identity(),
        LipschitzFunction::abs(),
        LipschitzFunction::arctan(),
        LipschitzFunction::clamped_linear(-1.0, 1.0).unwrap(),
        LipschitzFunction::clamped_linear(-0.5, 2.0).unwrap(),
        LipschitzFunction::soft_indicator(0.0, 0.1).unwrap(),
        LipschitzFunction::soft_indicator(-1.0, 0.5).unwrap(),
    ]
}

#[test]
fn closed_form_and_quadrature_agree_for_the_whole_catalog() {
    for f in catalog() {
        let closed = integral_against(&f, LimitLaw::StandardNormal, TOL).unwrap();
        assert_eq!(closed.method, Method::ClosedForm, "{}", f.label());
        let quad = integral_quadrature(&f, LimitLaw::StandardNormal, TOL).unwrap();
        assert!(
            (closed.value - quad.value).abs() <= 2.0 * TOL,
            "{}: closed {} vs quadrature {}",
            f.label(),
            closed.value,
            quad.value
        );
        assert!(quad.error_estimate <= TOL);
    }
}

#[test]
fn odd_functions_integrate_to_exactly_zero() {
    for f in [
        LipschitzFunction::identity(),
        LipschitzFunction::arctan(),
        LipschitzFunction::clamped_linear(-2.0, 2.0).unwrap(),
        LipschitzFunction::constant(0.0).unwrap(),
    ] {
        let r = integral_against(&f, LimitLaw::StandardNormal, TOL).unwrap();
        assert_eq!(r.value, 0.0, "{}", f.label());
        assert_eq!(r.method, Method::ClosedForm);
    }
}

#[test]
fn absolute_value_integral_is_the_half_normal_mean() {
    let r = integral_against(&LipschitzFunction::abs(), LimitLaw::StandardNormal, TOL).unwrap();
    assert!((r.value - 0.7978845608028654).abs() < 1e-12);
}

#[test]
fn soft_indicator_integral_reference_and_sandwich() {
    let law = LimitLaw::StandardNormal;
    let f = LipschitzFunction::soft_indicator(0.0, 0.1).unwrap();
    let r = integral_against(&f, law, TOL).unwrap();
    assert!((r.value - 0.5199305080328199).abs() < 1e-9);
    // The ramp is sandwiched by the two step functions it interpolates.
    assert!(r.value >= law.cdf(0.0));
    assert!(r.value <= law.cdf(0.1));

    let g = LipschitzFunction::soft_indicator(-1.0, 0.5).unwrap();
    let r = integral_against(&g, law, TOL).unwrap();
    assert!(r.value >= law.cdf(-1.0) && r.value <= law.cdf(-0.5));
}

#[test]
fn audit_confirms_declared_constants_on_the_default_grid() {
    let grid = AuditGrid::default();
    for f in catalog() {
        let r = lipschitz_audit(&f, &grid).unwrap();
        assert!(r.verdict.passed(), "{}", f.label());
        assert!(r.sup_statistic <= f.lipschitz_constant() * (1.0 + 1e-9));
    }
}

#[test]
fn audit_sup_values_match_calculus() {
    let grid = AuditGrid::default();
    // Identity: every chord has slope exactly 1.
    let r = lipschitz_audit(&LipschitzFunction::identity(), &grid).unwrap();
    assert!((r.sup_statistic - 1.0).abs() < 1e-9);
    // Arctan: steepest near 0, slightly below 1 on a discrete grid.
    let r = lipschitz_audit(&LipschitzFunction::arctan(), &grid).unwrap();
    assert!(r.sup_statistic <= 1.0 && r.sup_statistic > 0.999);
    // Soft indicator ramp: slope 1/delta on the ramp.
    let f = LipschitzFunction::soft_indicator(0.0, 0.1).unwrap();
    let r = lipschitz_audit(&f, &grid).unwrap();
    assert!((r.sup_statistic - 10.0).abs() < 1e-3);
}
