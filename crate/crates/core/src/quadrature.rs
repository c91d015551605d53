//! Quadrature rules: Gauss–Legendre, periodic trapezoid, compensated sums and
//! piecewise-smooth polar integration over clipped disks.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Neumaier-compensated accumulator. Summation order is the push order, so
/// results are reproducible bit for bit.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    xs.into_iter().collect::<KahanSum>().value()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on_interval(a, b).map(|(x, w)| w * f(x)).collect::<KahanSum>().value()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, dp)
}

/// Mean of a `2π`-periodic function over `n` equispaced nodes `2πk/n`.
pub fn periodic_mean<F: FnMut(f64) -> f64>(n: usize, mut f: F) -> f64 {
    let h = TAU / n as f64;
    (0..n).map(|k| f(h * k as f64)).collect::<KahanSum>().value() / n as f64
}

/// Tensor quadrature resolution for integrals over the unit disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub radial_nodes: usize,
    pub angular_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            radial_nodes: 64,
            angular_nodes: 256,
        }
    }
}

impl QuadratureSpec {
    pub fn new(radial_nodes: usize, angular_nodes: usize) -> Result<Self> {
        let q = QuadratureSpec {
            radial_nodes,
            angular_nodes,
        };
        q.validate(0)?;
        Ok(q)
    }

    /// Checks the resolution floor for fields with angular frequency up to
    /// `n_max`.
    pub fn validate(&self, n_max: usize) -> Result<()> {
        if self.radial_nodes < 16 {
            return Err(Error::domain(
                "quadrature",
                format!("need at least 16 radial nodes, got {}", self.radial_nodes),
            ));
        }
        let floor = 4 * n_max + 16;
        if self.angular_nodes < floor {
            return Err(Error::domain(
                "quadrature",
                format!("need at least {floor} angular nodes, got {}", self.angular_nodes),
            ));
        }
        Ok(())
    }

    /// Polar tensor nodes on the unit disk as `(r, θ, weight)`, where the
    /// weight already includes the Jacobian `r`. The weights sum to `π`.
    pub fn disk_nodes(&self) -> Vec<(f64, f64, f64)> {
        let gl = GaussLegendre::new(self.radial_nodes);
        let h = TAU / self.angular_nodes as f64;
        let mut out = Vec::with_capacity(self.radial_nodes * self.angular_nodes);
        for (r, w) in gl.on_interval(0.0, 1.0) {
            for j in 0..self.angular_nodes {
                out.push((r, h * j as f64, w * r * h));
            }
        }
        out
    }
}

/// Smooth reparametrization of `[-1, 1]` onto itself with vanishing
/// derivative at both ends: `x = τ(3 − τ²)/2`. Square-root endpoint
/// behaviour in the integrand becomes smooth after the change of variable.
#[inline]
fn cubic_end_map(tau: f64) -> (f64, f64) {
    (0.5 * tau * (3.0 - tau * tau), 1.5 * (1.0 - tau * tau))
}

/// Integrates `f` on `[a, b]` with `panels` Gauss–Legendre panels after the
/// endpoint-flattening change of variable.
fn integrate_flattened<F: FnMut(f64) -> f64>(gl: &GaussLegendre, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let step = 2.0 / panels as f64;
    let mut acc = KahanSum::new();
    for p in 0..panels {
        let lo = -1.0 + step * p as f64;
        for (tau, w) in gl.on_interval(lo, lo + step) {
            let (x, dx) = cubic_end_map(tau);
            acc.add(w * dx * half * f(mid + half * x));
        }
    }
    acc.value()
}

/// A closed Euclidean disk used to clip integration regions to a support.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClipDisk {
    pub center: Complex64,
    pub radius: f64,
}

/// A planar region described in polar coordinates `(ρ, θ)` about `pole`:
/// the annulus `lo ≤ ρ ≤ hi`, optionally intersected with a clip disk.
#[derive(Clone, Copy, Debug)]
pub struct PolarRegion {
    pub pole: Complex64,
    pub lo: f64,
    pub hi: f64,
    pub clip: Option<ClipDisk>,
}

/// Node counts for [`PolarRegion::integrate`].
#[derive(Clone, Copy, Debug)]
pub struct PolarRule {
    /// Gauss–Legendre order used on each panel.
    pub order: usize,
    /// Panels per radial interval.
    pub radial_panels: usize,
    /// Panels per `2π` of angle.
    pub angular_panels: usize,
    /// Geometric grading levels used when a radial interval starts at the
    /// pole, where the integrand may carry a logarithmic singularity.
    pub grading_levels: usize,
}

impl Default for PolarRule {
    fn default() -> Self {
        PolarRule {
            order: 24,
            radial_panels: 2,
            angular_panels: 16,
            grading_levels: 30,
        }
    }
}

impl PolarRegion {
    fn angular_breakpoints(&self) -> Vec<f64> {
        let Some(clip) = self.clip else {
            return Vec::new();
        };
        let c = clip.center - self.pole;
        let d = c.norm();
        let s = clip.radius;
        let alpha = c.arg();
        let mut out = Vec::new();
        if d > s {
            let beta = (s / d).asin();
            out.push(alpha - beta);
            out.push(alpha + beta);
        }
        for radius in [self.lo, self.hi] {
            if radius <= 0.0 || !radius.is_finite() || d == 0.0 {
                continue;
            }
            if (radius - s).abs() < d && d < radius + s {
                let cosb = ((radius * radius + d * d - s * s) / (2.0 * radius * d)).clamp(-1.0, 1.0);
                let beta = cosb.acos();
                out.push(alpha - beta);
                out.push(alpha + beta);
            }
        }
        out
    }

    /// Radial interval on the ray of direction `e`, or `None` when empty.
    fn radial_interval(&self, e: Complex64) -> Option<(f64, f64)> {
        let (mut a, mut b) = (self.lo, self.hi);
        if let Some(clip) = self.clip {
            let c = clip.center - self.pole;
            let proj = c.re * e.re + c.im * e.im;
            let disc = proj * proj - (c.norm_sqr() - clip.radius * clip.radius);
            if disc < 0.0 {
                return None;
            }
            let sq = disc.sqrt();
            a = a.max(proj - sq);
            b = b.min(proj + sq);
        }
        (b > a).then_some((a, b))
    }

    /// `∫∫ f dA` over the region. `f` receives the point and its polar
    /// coordinates about the pole.
    pub fn integrate<F>(&self, rule: &PolarRule, mut f: F) -> f64
    where
        F: FnMut(Complex64, f64, f64) -> f64,
    {
        let gl = GaussLegendre::new(rule.order);
        let mut breaks = self.angular_breakpoints();
        let radial = |theta: f64, f: &mut F| -> f64 {
            let e = Complex64::from_polar(1.0, theta);
            let Some((a, b)) = self.radial_interval(e) else {
                return 0.0;
            };
            let mut acc = KahanSum::new();
            let mut panel = |lo: f64, hi: f64, panels: usize, acc: &mut KahanSum| {
                let step = (hi - lo) / panels as f64;
                for p in 0..panels {
                    let l = lo + step * p as f64;
                    for (rho, w) in gl.on_interval(l, l + step) {
                        acc.add(w * rho * f(self.pole + e * rho, rho, theta));
                    }
                }
            };
            if a <= 0.0 {
                let q: f64 = 0.25;
                let mut hi = b;
                for _ in 0..rule.grading_levels {
                    let lo = hi * q;
                    panel(lo, hi, 1, &mut acc);
                    hi = lo;
                }
            } else {
                panel(a, b, rule.radial_panels, &mut acc);
            }
            acc.value()
        };

        if breaks.is_empty() {
            let n = rule.angular_panels * rule.order;
            let h = TAU / n as f64;
            return (0..n).map(|k| h * radial(h * k as f64, &mut f)).collect::<KahanSum>().value();
        }

        let base = breaks[0];
        for b in breaks.iter_mut() {
            *b = base + (*b - base).rem_euclid(TAU);
        }
        breaks.sort_by(|x, y| x.total_cmp(y));
        breaks.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
        let mut acc = KahanSum::new();
        let m = breaks.len();
        for i in 0..m {
            let a = breaks[i];
            let b = if i + 1 < m { breaks[i + 1] } else { breaks[0] + TAU };
            if b - a <= 0.0 {
                continue;
            }
            let e = Complex64::from_polar(1.0, 0.5 * (a + b));
            if self.radial_interval(e).is_none() {
                continue;
            }
            let panels = ((b - a) / TAU * rule.angular_panels as f64).ceil().max(1.0) as usize;
            acc.add(integrate_flattened(&gl, a, b, panels, |t| radial(t, &mut f)));
        }
        acc.value()
    }
}

/// Mean `(1/2π)∫ f(p + R e^{it}) dt` restricted to the part of the circle
/// inside `clip` (the integrand is taken as zero elsewhere).
pub fn clipped_circle_mean<F>(center: Complex64, radius: f64, clip: Option<ClipDisk>, rule: &PolarRule, mut f: F) -> f64
where
    F: FnMut(Complex64, f64) -> f64,
{
    let gl = GaussLegendre::new(rule.order);
    let point = |t: f64| center + Complex64::from_polar(radius, t);
    let Some(clip) = clip else {
        let n = rule.angular_panels * rule.order;
        return periodic_mean(n, |t| f(point(t), t));
    };
    let c = clip.center - center;
    let d = c.norm();
    let s = clip.radius;
    if d + radius <= s {
        let n = rule.angular_panels * rule.order;
        return periodic_mean(n, |t| f(point(t), t));
    }
    if d >= radius + s || d + s <= radius {
        // the circle misses the clip disk
        return 0.0;
    }
    let alpha = c.arg();
    let beta = ((radius * radius + d * d - s * s) / (2.0 * radius * d)).clamp(-1.0, 1.0).acos();
    let panels = ((2.0 * beta) / TAU * rule.angular_panels as f64).ceil().max(1.0) as usize;
    integrate_flattened(&gl, alpha - beta, alpha + beta, panels, |t| f(point(t), t)) / TAU
}

/// Adaptive Gauss–Legendre on `[a, b]`: a panel is accepted once the
/// single-panel and two-half-panel estimates agree to `tol` scaled by the
/// panel's share of the interval.
pub fn adaptive_gauss<F: FnMut(f64) -> f64>(gl: &GaussLegendre, a: f64, b: f64, tol: f64, mut f: F) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: FnMut(f64) -> f64>(
        gl: &GaussLegendre,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
        f: &mut F,
        acc: &mut KahanSum,
    ) {
        let m = 0.5 * (a + b);
        let left = gl.integrate(a, m, &mut *f);
        let right = gl.integrate(m, b, &mut *f);
        if depth == 0 || (left + right - whole).abs() <= tol {
            acc.add(left);
            acc.add(right);
            return;
        }
        recurse(gl, a, m, left, 0.5 * tol, depth - 1, f, acc);
        recurse(gl, m, b, right, 0.5 * tol, depth - 1, f, acc);
    }
    let whole = gl.integrate(a, b, &mut f);
    let mut acc = KahanSum::new();
    recurse(gl, a, b, whole, tol, 40, &mut f, &mut acc);
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16, 64] {
            let gl = GaussLegendre::new(n);
            let wsum: f64 = gl.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "n = {n}");
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let got = gl.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
                assert!((got - exact).abs() < 1e-13, "n = {n}, deg = {deg}");
            }
        }
        let gl = GaussLegendre::new(20);
        let got = gl.integrate(0.0, PI, f64::sin);
        assert!((got - 2.0).abs() < 1e-14);
    }

    #[test]
    fn periodic_trapezoid_is_exact_on_trig_polynomials() {
        let m = periodic_mean(16, |t| 3.0 + (5.0 * t).cos() + (7.0 * t).sin());
        assert!((m - 3.0).abs() < 1e-15);
    }

    #[test]
    fn disk_nodes_sum_to_area() {
        let q = QuadratureSpec::default();
        let area = compensated_sum(q.disk_nodes().iter().map(|n| n.2));
        assert!((area - PI).abs() < 1e-13);
    }

    #[test]
    fn quadrature_spec_floors() {
        assert!(QuadratureSpec::new(8, 256).is_err());
        let q = QuadratureSpec::new(64, 64).unwrap();
        assert!(q.validate(12).is_ok());
        assert!(q.validate(13).is_err());
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn polar_region_area_of_clipped_disks() {
        let rule = PolarRule::default();
        // disk of radius 0.3 about 0.2 seen from a pole outside it
        let clip = ClipDisk {
            center: Complex64::new(0.2, 0.1),
            radius: 0.3,
        };
        let region = PolarRegion {
            pole: Complex64::new(-0.5, 0.0),
            lo: 0.0,
            hi: f64::INFINITY,
            clip: Some(clip),
        };
        let area = region.integrate(&rule, |_, _, _| 1.0);
        assert!((area - PI * 0.09).abs() < 1e-12, "{area}");

        // same disk seen from an interior pole
        let region = PolarRegion {
            pole: Complex64::new(0.25, 0.05),
            ..region
        };
        let area = region.integrate(&rule, |_, _, _| 1.0);
        assert!((area - PI * 0.09).abs() < 1e-12, "{area}");

        // annulus 0.1 ≤ |z| ≤ 0.4 about the origin
        let region = PolarRegion {
            pole: Complex64::new(0.0, 0.0),
            lo: 0.1,
            hi: 0.4,
            clip: None,
        };
        let area = region.integrate(&rule, |_, _, _| 1.0);
        assert!((area - PI * (0.16 - 0.01)).abs() < 1e-13);
    }

    #[test]
    fn polar_region_handles_log_singularity() {
        // ∫_{|z|<1/2} −ln|z| dA = 2π ∫₀^{1/2} −ρ ln ρ dρ = π(ln 2 / 4 + 1/8)
        let region = PolarRegion {
            pole: Complex64::new(0.0, 0.0),
            lo: 0.0,
            hi: 0.5,
            clip: None,
        };
        let got = region.integrate(&PolarRule::default(), |_, rho, _| -rho.ln());
        let exact = PI * (std::f64::consts::LN_2 / 4.0 + 0.125);
        assert!((got - exact).abs() < 1e-12, "{got} vs {exact}");
    }

    #[test]
    fn clipped_circle_arc_length() {
        // fraction of the unit-radius circle inside a disk through its center
        let clip = ClipDisk {
            center: Complex64::new(1.0, 0.0),
            radius: 1.0,
        };
        let frac = clipped_circle_mean(Complex64::new(0.0, 0.0), 1.0, Some(clip), &PolarRule::default(), |_, _| 1.0);
        assert!((frac - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_gauss_on_kinked_integrand() {
        let gl = GaussLegendre::new(16);
        let got = adaptive_gauss(&gl, -1.0, 2.0, 1e-14, |x| x.abs().sqrt());
        let exact = 2.0 / 3.0 * (1.0 + 2f64.powf(1.5));
        assert!((got - exact).abs() < 1e-12);
    }
}
