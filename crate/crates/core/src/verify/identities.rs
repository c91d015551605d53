//! Deterministic checks: each identity is evaluated by two independent
//! quadratures, or by quadrature against a closed form.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::testfn::{Composed, TestFunction};
use super::{CheckKind, CheckResult};
use crate::circles::{circle_avg_fn, circle_nodes, closed_cov, exact_cov, mean_square_difference, theorem2_bound, CovarianceQuery};
use crate::error::{Error, Result};
use crate::poincare::{mobius_to_origin, DiskPoint};
use crate::quadrature::{clipped_circle_mean, PolarRegion, PolarRule, QuadratureSpec};
use crate::spectral::dirichlet_inner;

pub const PROPERTY1_TOL: f64 = 1e-7;
pub const MEAN_VALUE_TOL: f64 = 1e-9;
pub const INVERSION_REL_TOL: f64 = 1e-5;
pub const ISOMETRY_TOL: f64 = 1e-5;
pub const COVARIANCE_TOL: f64 = 1e-9;

/// Node count used for hyperbolic circle means of test functions.
pub const MEAN_VALUE_NODES: usize = 1024;

fn deterministic(name: String, value: f64, reference: f64, tolerance: f64, detail: String) -> CheckResult {
    CheckResult::new(name, CheckKind::Deterministic, value, reference, tolerance, detail)
}

/// Circle mean at the origin of radius `r`, restricted to the support.
fn euclid_circle_mean<G: FnMut(Complex64) -> f64>(f: &TestFunction, r: f64, rule: &PolarRule, mut g: G) -> f64 {
    clipped_circle_mean(Complex64::new(0.0, 0.0), r, f.support(), rule, |w, _| g(w))
}

/// Annulus identity about the origin: the difference of Euclidean circle
/// means `f_r(0) − f_R(0)` against
/// (a) `(1/2π)∫ ∇f·∇G₀` over the annulus, and
/// (b) `ln r/(2π)·∮_{C_r} ∂_n f − ln R/(2π)·∮_{C_R} ∂_n f − (1/2π)∫ G₀ Δf`.
///
/// The reported value is whichever expression lies farther from the
/// circle-mean difference.
pub fn check_property1(f: &TestFunction, r: f64, big_r: f64, rule: &PolarRule) -> Result<CheckResult> {
    if !(0.0 < r && r < big_r && big_r < 1.0) {
        return Err(Error::domain("check_property1", format!("need 0 < r < R < 1, got r = {r}, R = {big_r}")));
    }
    let mean_r = euclid_circle_mean(f, r, rule, |w| f.eval(w));
    let mean_big = euclid_circle_mean(f, big_r, rule, |w| f.eval(w));
    let reference = mean_r - mean_big;

    let annulus = PolarRegion {
        pole: Complex64::new(0.0, 0.0),
        lo: r,
        hi: big_r,
        clip: f.support(),
    };
    let grad_form = annulus.integrate(rule, |w, _, _| {
        let g = f.grad(w);
        let n2 = w.norm_sqr();
        // ∇G₀ = −w/|w|²
        -(g[0] * w.re + g[1] * w.im) / n2
    }) / TAU;

    let radial_derivative = |w: Complex64| {
        let g = f.grad(w);
        (g[0] * w.re + g[1] * w.im) / w.norm()
    };
    // ∮_{C_ρ} ∂_n f ds = 2πρ · mean of ∂_ρ f
    let flux_r = TAU * r * euclid_circle_mean(f, r, rule, radial_derivative);
    let flux_big = TAU * big_r * euclid_circle_mean(f, big_r, rule, radial_derivative);
    let green_lap = annulus.integrate(rule, |w, rho, _| -rho.ln() * f.laplacian(w)) / TAU;
    let boundary_form = r.ln() / TAU * flux_r - big_r.ln() / TAU * flux_big - green_lap;

    let err_a = (grad_form - reference).abs();
    let err_b = (boundary_form - reference).abs();
    let value = if err_a >= err_b { grad_form } else { boundary_form };
    Ok(deterministic(
        format!("property1 {f} r={r} R={big_r}"),
        value,
        reference,
        PROPERTY1_TOL,
        format!(
            "circle-mean difference {reference:e}; gradient form {grad_form:e} (err {err_a:e}); boundary form {boundary_form:e} (err {err_b:e})"
        ),
    ))
}

/// Hyperbolic mean-value property of a harmonic function.
pub fn check_mean_value(f: &TestFunction, z0: DiskPoint, rho: f64) -> Result<CheckResult> {
    if !f.is_harmonic() {
        return Err(Error::domain("check_mean_value", "test function must be harmonic"));
    }
    let avg = circle_avg_fn(f, z0, rho, circle_nodes(rho, MEAN_VALUE_NODES))?;
    let reference = f.eval(z0.as_complex());
    Ok(deterministic(
        format!("mean_value {f} z0=({} {}) rho={rho}", z0.x(), z0.y()),
        avg,
        reference,
        MEAN_VALUE_TOL,
        String::from("hyperbolic circle mean against the value at the center"),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Green {
    /// `G_𝔻(z₀, ·)`
    Disk,
    /// `G₀(· − z₀)`, the plane kernel
    Plane,
}

/// `f(z₀) = −(1/2π)∫ G(z₀, ·) Δf`, integrated in polar coordinates about the
/// singularity with geometric grading towards it.
pub fn check_inversion(f: &TestFunction, z0: DiskPoint, green: Green, rule: &PolarRule) -> Result<CheckResult> {
    let TestFunction::Bump { radius, .. } = *f else {
        return Err(Error::domain("check_inversion", "test function must be a bump"));
    };
    let p = z0.as_complex();
    let region = PolarRegion {
        pole: p,
        lo: 0.0,
        hi: f64::INFINITY,
        clip: f.support(),
    };
    let integral = region.integrate(rule, |w, rho, _| {
        let g = match green {
            // −ln|Φ_{z₀}(w)| = −ln|w − z₀| + ln|1 − z̄₀w|
            Green::Disk => -rho.ln() + (Complex64::new(1.0, 0.0) - p.conj() * w).norm().ln(),
            Green::Plane => -rho.ln(),
        };
        g * f.laplacian(w)
    });
    let value = -integral / TAU;
    let reference = f.eval(p);
    let peak = radius.powi(6);
    Ok(deterministic(
        format!("inversion {green:?} {f} z0=({} {})", z0.x(), z0.y()),
        value,
        reference,
        INVERSION_REL_TOL * peak,
        format!("tolerance is {INVERSION_REL_TOL:e} of the peak value {peak:e}"),
    ))
}

/// `⟨u∘Φ, v∘Φ⟩ = ⟨u, v⟩` for `Φ = Φ_{z₀}`.
pub fn check_isometry_invariance(
    u: &TestFunction,
    v: &TestFunction,
    z0: DiskPoint,
    q: &QuadratureSpec,
) -> Result<CheckResult> {
    let phi = mobius_to_origin(z0);
    let plain = dirichlet_inner(u, v, q)?;
    let moved = dirichlet_inner(&Composed { f: u, phi }, &Composed { f: v, phi }, q)?;
    Ok(deterministic(
        format!("isometry_invariance {u} {v} pole=({} {})", z0.x(), z0.y()),
        moved,
        plain,
        ISOMETRY_TOL,
        format!("Dirichlet form by {}x{} polar quadrature", q.radial_nodes, q.angular_nodes),
    ))
}

fn query_label(q: &CovarianceQuery) -> String {
    format!(
        "z1=({} {}) rho1={} z2=({} {}) rho2={}",
        q.z1.x(),
        q.z1.y(),
        q.rho1,
        q.z2.x(),
        q.z2.y(),
        q.rho2
    )
}

/// Quadrature covariance against the nested/disjoint closed form.
pub fn check_closed_covariance(q: &CovarianceQuery, n_nodes: usize) -> Result<CheckResult> {
    let exact = exact_cov(q, n_nodes)?;
    let closed = closed_cov(q)?;
    Ok(deterministic(
        format!("covariance {} {}", q.regime(), query_label(q)),
        exact,
        closed,
        COVARIANCE_TOL,
        String::from("circle-average quadrature against the closed form"),
    ))
}

/// `E[(W₁ − W₂)²] ≤ bound`. Reported as `value = max(0, msd − bound)` with
/// reference 0, so the check passes when any excess stays within the slack.
pub fn check_theorem2(q: &CovarianceQuery, n_nodes: usize) -> Result<CheckResult> {
    let msd = mean_square_difference(q, n_nodes)?;
    let bound = theorem2_bound(q);
    Ok(deterministic(
        format!("increment_bound {} {}", q.regime(), query_label(q)),
        (msd - bound).max(0.0),
        0.0,
        COVARIANCE_TOL,
        format!("E[(W1-W2)^2] = {msd:e}, bound = {bound:e}"),
    ))
}
