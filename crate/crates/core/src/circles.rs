//! Hyperbolic circle averages and their covariances.
//!
//! The circle average of `f` over `𝒞ʰ(z₀, ρ)` is `(1/2π)∫ f(Φ_{z₀}(r e^{it})) dt`
//! with `r = tanh ρ`. It is also the Dirichlet pairing of `f` with the
//! truncated kernel `G₀ʳ ∘ Φ_{z₀}`, so the covariance of two field circle
//! averages is the circle average of one truncated kernel over the other
//! circle, which is a one-dimensional integral.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldSample;
use crate::kernels::{green_disk, TruncatedKernel};
use crate::poincare::{hyp_distance, mobius_to_origin, time_to_rho, DiskPoint, HyperbolicCircle};
use crate::quadrature::{adaptive_gauss, periodic_mean, GaussLegendre, KahanSum};
use crate::spectral::{ScalarField, SpectralBasis};

/// Default trapezoid node count for [`exact_cov`].
pub const EXACT_COV_NODES: usize = 2048;
/// Default base node count for circle averages of the field. Large circles
/// near the boundary need about 512 nodes to resolve the default basis.
pub const FIELD_CIRCLE_NODES: usize = 1024;

/// Node count for averaging basis modes over a circle of radius `rho`:
/// at least `base`, and at least `16 / tanh ρ` so small circles keep a
/// fixed number of nodes per unit Euclidean length.
pub fn circle_nodes(rho: f64, base: usize) -> usize {
    let small = (16.0 / rho.tanh()).ceil();
    let n = if small.is_finite() && small < 1e8 { base.max(small as usize) } else { base };
    n.next_multiple_of(4)
}

/// `(1/2π)∫ f(Φ_{z₀}(r e^{it})) dt` by the periodic trapezoid rule.
pub fn circle_avg_fn<F: ScalarField + ?Sized>(f: &F, z0: DiskPoint, rho: f64, n_nodes: usize) -> Result<f64> {
    if n_nodes < 16 {
        return Err(Error::domain("circle_avg_fn", format!("need at least 16 nodes, got {n_nodes}")));
    }
    let c = HyperbolicCircle::new(z0, rho)?;
    let mut acc = KahanSum::new();
    for (index, w) in c.nodes(n_nodes).enumerate() {
        let v = f.value(w);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                index,
                x: w.x(),
                y: w.y(),
            });
        }
        acc.add(v);
    }
    Ok(acc.value() / n_nodes as f64)
}

/// Circle averages `m_j` of every basis mode over `𝒞ʰ(z₀, ρ)`.
pub fn mode_circle_averages(basis: &SpectralBasis, z0: DiskPoint, rho: f64, n_nodes: usize) -> Result<Vec<f64>> {
    if n_nodes < 16 {
        return Err(Error::domain("mode_circle_averages", format!("need at least 16 nodes, got {n_nodes}")));
    }
    let c = HyperbolicCircle::new(z0, rho)?;
    let h = std::f64::consts::TAU / n_nodes as f64;
    let values: Vec<Vec<f64>> = (0..n_nodes)
        .into_par_iter()
        .map(|k| {
            let mut out = vec![0.0; basis.len()];
            basis.eval_all(c.point_at(h * k as f64), &mut out);
            out
        })
        .collect();
    let mut sums = vec![KahanSum::new(); basis.len()];
    for row in &values {
        for (s, &v) in sums.iter_mut().zip(row) {
            s.add(v);
        }
    }
    Ok(sums.iter().map(|s| s.value() / n_nodes as f64).collect())
}

type CacheKey = (u64, u64, u64, usize);

/// Memoized mode circle averages for one basis. Keys are the exact bits of
/// `(z₀, ρ)` and the node count. Safe for concurrent use.
pub struct CircleAverager<'a> {
    basis: &'a SpectralBasis,
    base_nodes: usize,
    cache: RwLock<HashMap<CacheKey, Arc<Vec<f64>>>>,
}

impl<'a> CircleAverager<'a> {
    pub fn new(basis: &'a SpectralBasis, base_nodes: usize) -> Self {
        CircleAverager {
            basis,
            base_nodes,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn basis(&self) -> &'a SpectralBasis {
        self.basis
    }

    pub fn nodes_for(&self, rho: f64) -> usize {
        circle_nodes(rho, self.base_nodes)
    }

    pub fn mode_averages(&self, z0: DiskPoint, rho: f64) -> Result<Arc<Vec<f64>>> {
        let n = self.nodes_for(rho);
        let key = (z0.x().to_bits(), z0.y().to_bits(), rho.to_bits(), n);
        if let Some(hit) = self.cache.read().expect("cache lock poisoned").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let m = Arc::new(mode_circle_averages(self.basis, z0, rho, n)?);
        let mut map = self.cache.write().expect("cache lock poisoned");
        Ok(Arc::clone(map.entry(key).or_insert(m)))
    }

    /// `Σ_j a_j m_j(z₀, ρ)`.
    pub fn field_average(&self, s: &FieldSample<'_>, z0: DiskPoint, rho: f64) -> Result<f64> {
        let m = self.mode_averages(z0, rho)?;
        s.pair(&m)
    }

    /// Truncated-law covariance `Σ_j m_j(z₁, ρ₁) m_j(z₂, ρ₂)`.
    pub fn truncated_cov(&self, q: &CovarianceQuery) -> Result<f64> {
        let a = self.mode_averages(q.z1, q.rho1)?;
        let b = self.mode_averages(q.z2, q.rho2)?;
        Ok(dot(&a, &b))
    }

    /// Partial sums `Σ_{j≤M} m_j(z₀, ρ)²` for `M = 1..=len`.
    pub fn truncated_variance_profile(&self, z0: DiskPoint, rho: f64) -> Result<Vec<f64>> {
        let m = self.mode_averages(z0, rho)?;
        let mut acc = KahanSum::new();
        Ok(m.iter()
            .map(|v| {
                acc.add(v * v);
                acc.value()
            })
            .collect())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).collect::<KahanSum>().value()
}

/// Field circle average with a fresh computation of the mode averages.
pub fn circle_avg_field(s: &FieldSample<'_>, z0: DiskPoint, rho: f64) -> Result<f64> {
    let m = mode_circle_averages(s.basis(), z0, rho, circle_nodes(rho, FIELD_CIRCLE_NODES))?;
    s.pair(&m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Nested,
    Disjoint,
    Overlapping,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Nested => "nested",
            Regime::Disjoint => "disjoint",
            Regime::Overlapping => "overlapping",
        })
    }
}

/// A pair of hyperbolic circles `𝒞ʰ(z₁, ρ₁)`, `𝒞ʰ(z₂, ρ₂)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovarianceQuery {
    pub z1: DiskPoint,
    pub rho1: f64,
    pub z2: DiskPoint,
    pub rho2: f64,
}

impl CovarianceQuery {
    pub fn new(z1: DiskPoint, rho1: f64, z2: DiskPoint, rho2: f64) -> Result<Self> {
        // validates both radii
        HyperbolicCircle::new(z1, rho1)?;
        HyperbolicCircle::new(z2, rho2)?;
        Ok(CovarianceQuery { z1, rho1, z2, rho2 })
    }

    pub fn distance(&self) -> f64 {
        hyp_distance(self.z1, self.z2)
    }

    /// Nested if `d ≤ |ρ₂ − ρ₁|`, disjoint if `d ≥ ρ₁ + ρ₂`, else overlapping.
    pub fn regime(&self) -> Regime {
        let d = self.distance();
        if d <= (self.rho2 - self.rho1).abs() {
            Regime::Nested
        } else if d >= self.rho1 + self.rho2 {
            Regime::Disjoint
        } else {
            Regime::Overlapping
        }
    }

    pub fn swapped(&self) -> Self {
        CovarianceQuery {
            z1: self.z2,
            rho1: self.rho2,
            z2: self.z1,
            rho2: self.rho1,
        }
    }
}

/// Covariance of the limiting field's circle averages,
/// `⟨G₀^{r₁}∘Φ_{z₁}, G₀^{r₂}∘Φ_{z₂}⟩`, as the mean of the larger circle's
/// truncated kernel over the smaller circle.
///
/// Nested and disjoint pairs give an analytic integrand and use the periodic
/// trapezoid with at least `n_nodes` nodes; in the disjoint case the count is
/// raised until the geometric convergence factor `tanh ρ_small / tanh d`
/// reaches 1e−16. Overlapping pairs have two kinks; the arc inside the
/// plateau is exact and the other arc uses adaptive Gauss–Legendre.
pub fn exact_cov(q: &CovarianceQuery, n_nodes: usize) -> Result<f64> {
    if n_nodes < 64 {
        return Err(Error::domain("exact_cov", format!("need at least 64 nodes, got {n_nodes}")));
    }
    let (zs, rho_s, zb, rho_b) = if q.rho1 <= q.rho2 {
        (q.z1, q.rho1, q.z2, q.rho2)
    } else {
        (q.z2, q.rho2, q.z1, q.rho1)
    };
    let small = HyperbolicCircle::new(zs, rho_s)?;
    let big = HyperbolicCircle::new(zb, rho_b)?;
    let kernel = TruncatedKernel::from_circle(&big);
    let integrand = |t: f64| kernel.value(small.point_at(t));

    match q.regime() {
        Regime::Nested => Ok(periodic_mean(n_nodes, integrand)),
        Regime::Disjoint => {
            // big center seen from the small circle's frame
            let a = mobius_to_origin(zs).image_modulus(zb);
            let ratio = small.r() / a;
            let needed = if ratio > 0.0 && ratio < 1.0 {
                (-16.0 * std::f64::consts::LN_10 / ratio.ln()).ceil()
            } else {
                f64::INFINITY
            };
            let n = if needed.is_finite() {
                n_nodes.max((needed as usize).min(1 << 21))
            } else {
                1 << 21
            };
            Ok(periodic_mean(n, integrand))
        }
        Regime::Overlapping => {
            let a = mobius_to_origin(zs).apply(zb);
            let frame_big = HyperbolicCircle::new(a, rho_b)?;
            let center = frame_big.euclid_center().as_complex();
            let radius = frame_big.euclid_radius();
            let rs = small.r();
            let d = center.norm();
            let cos_beta = ((rs * rs + d * d - radius * radius) / (2.0 * rs * d)).clamp(-1.0, 1.0);
            let beta = cos_beta.acos();
            let alpha = center.arg();
            let gl = GaussLegendre::new(16);
            let outer = adaptive_gauss(&gl, alpha + beta, alpha - beta + std::f64::consts::TAU, 1e-15, |t| {
                let w = Complex64::from_polar(rs, t);
                -kernel_frame_modulus(a, w).max(big.r()).ln()
            });
            let plateau = 2.0 * beta * -big.r().ln();
            Ok((plateau + outer) / std::f64::consts::TAU)
        }
    }
}

/// `|Φ_a(w)| = |w − a| / |1 − ā w|`.
#[inline]
fn kernel_frame_modulus(a: DiskPoint, w: Complex64) -> f64 {
    let a = a.as_complex();
    (w - a).norm() / (Complex64::new(1.0, 0.0) - a.conj() * w).norm()
}

/// Closed forms: `−ln tanh max(ρ₁, ρ₂)` for nested pairs and `G_𝔻(z₁, z₂)`
/// for disjoint pairs.
pub fn closed_cov(q: &CovarianceQuery) -> Result<f64> {
    match q.regime() {
        Regime::Nested => Ok(-q.rho1.max(q.rho2).tanh().ln()),
        Regime::Disjoint => green_disk(q.z1, q.z2),
        Regime::Overlapping => Err(Error::NoClosedForm),
    }
}

/// `|ln tanh ρ₁ − ln tanh ρ₂| + 2(1/sinh 2ρ₁ + 1/sinh 2ρ₂)·d(z₁, z₂)`.
pub fn theorem2_bound(q: &CovarianceQuery) -> f64 {
    let lt = |r: f64| r.tanh().ln();
    (lt(q.rho1) - lt(q.rho2)).abs()
        + 2.0 * (1.0 / (2.0 * q.rho1).sinh() + 1.0 / (2.0 * q.rho2).sinh()) * q.distance()
}

/// `E[(W₁ − W₂)²]` assembled from three [`exact_cov`] evaluations.
pub fn mean_square_difference(q: &CovarianceQuery, n_nodes: usize) -> Result<f64> {
    let v1 = exact_cov(&CovarianceQuery { z2: q.z1, rho2: q.rho1, ..*q }, n_nodes)?;
    let v2 = exact_cov(&CovarianceQuery { z1: q.z2, rho1: q.rho2, ..*q }, n_nodes)?;
    let c = exact_cov(q, n_nodes)?;
    Ok(v1 + v2 - 2.0 * c)
}

fn check_times(times: &[f64]) -> Result<()> {
    let mut prev = 0.0;
    for &t in times {
        if !(t.is_finite() && t > prev) {
            return Err(Error::domain(
                "brownian_path",
                "times must be positive, finite and strictly increasing",
            ));
        }
        prev = t;
    }
    Ok(())
}

/// `B_t = W^h_{ρ(t)}(z₀)` with `ρ(t) = argtanh(e^{−t})`.
pub fn brownian_path(s: &FieldSample<'_>, z0: DiskPoint, times: &[f64]) -> Result<Vec<f64>> {
    let averager = CircleAverager::new(s.basis(), FIELD_CIRCLE_NODES);
    brownian_path_with(&averager, s, z0, times)
}

pub fn brownian_path_with(
    averager: &CircleAverager<'_>,
    s: &FieldSample<'_>,
    z0: DiskPoint,
    times: &[f64],
) -> Result<Vec<f64>> {
    check_times(times)?;
    times
        .iter()
        .map(|&t| averager.field_average(s, z0, time_to_rho(t)?))
        .collect()
}

/// The path with the point `(0, 0)` prepended.
pub fn brownian_path_from_origin(s: &FieldSample<'_>, z0: DiskPoint, times: &[f64]) -> Result<Vec<(f64, f64)>> {
    let path = brownian_path(s, z0, times)?;
    Ok(std::iter::once((0.0, 0.0)).chain(times.iter().copied().zip(path)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poincare::artanh;
    use crate::spectral::build_basis;
    use std::f64::consts::LN_2;

    fn p(x: f64, y: f64) -> DiskPoint {
        DiskPoint::new(x, y).unwrap()
    }

    #[test]
    fn circle_means_of_simple_functions() {
        let c = |_: DiskPoint| 3.25;
        assert_eq!(circle_avg_fn(&c, p(0.1, 0.2), 0.7, 64).unwrap(), 3.25);
        let re_z2 = |z: DiskPoint| z.x() * z.x() - z.y() * z.y();
        for rho in [0.2, 1.0, 2.5] {
            let m = circle_avg_fn(&re_z2, p(0.3, 0.2), rho, circle_nodes(rho, 256)).unwrap();
            assert!((m - 0.05).abs() < 1e-10, "rho = {rho}: {m}");
        }
        let g = |z: DiskPoint| green_disk(DiskPoint::ORIGIN, z).unwrap();
        let m = circle_avg_fn(&g, DiskPoint::ORIGIN, artanh(0.5), 64).unwrap();
        assert!((m - LN_2).abs() < 1e-15);
        assert!(circle_avg_fn(&c, p(0.1, 0.2), 0.7, 8).is_err());
        let bad = |_: DiskPoint| f64::NAN;
        assert!(circle_avg_fn(&bad, p(0.1, 0.2), 0.7, 64).is_err());
    }

    #[test]
    fn regimes() {
        let q = CovarianceQuery::new(DiskPoint::ORIGIN, 0.5, p(0.1, 0.0), 0.5).unwrap();
        assert_eq!(q.regime(), Regime::Overlapping);
        assert!(matches!(closed_cov(&q), Err(Error::NoClosedForm)));
        let q = CovarianceQuery::new(p(-0.5, 0.0), 0.4, p(0.5, 0.0), 0.4).unwrap();
        assert_eq!(q.regime(), Regime::Disjoint);
        let q = CovarianceQuery::new(p(0.2, 0.1), 0.3, p(0.2, 0.1), 0.3).unwrap();
        assert_eq!(q.regime(), Regime::Nested);
        assert!(CovarianceQuery::new(DiskPoint::ORIGIN, 0.0, DiskPoint::ORIGIN, 1.0).is_err());
    }

    #[test]
    fn covariance_examples() {
        let z = p(0.3, -0.4);
        let q = CovarianceQuery::new(z, 0.8, z, 0.8).unwrap();
        assert!((exact_cov(&q, EXACT_COV_NODES).unwrap() + 0.8f64.tanh().ln()).abs() < 1e-10);

        let q = CovarianceQuery::new(z, 0.3, mobius_to_origin(z).apply(p(0.1, 0.0)), 1.2).unwrap();
        assert_eq!(q.regime(), Regime::Nested);
        let want = -1.2f64.tanh().ln();
        assert!((exact_cov(&q, EXACT_COV_NODES).unwrap() - want).abs() < 1e-10);
        assert!((closed_cov(&q).unwrap() - want).abs() < 1e-15);

        let q = CovarianceQuery::new(p(-0.5, 0.0), 0.4, p(0.5, 0.0), 0.4).unwrap();
        let e = exact_cov(&q, EXACT_COV_NODES).unwrap();
        assert!((e - 0.223_143_551_314_209_7).abs() < 1e-10, "{e}");
        assert!((closed_cov(&q).unwrap() - 0.223_143_551_314_209_7).abs() < 1e-15);
    }

    #[test]
    fn overlapping_is_symmetric_and_between_closed_forms() {
        let q = CovarianceQuery::new(DiskPoint::ORIGIN, 0.5, p(0.1, 0.0), 0.5).unwrap();
        let a = exact_cov(&q, EXACT_COV_NODES).unwrap();
        let b = exact_cov(&q.swapped(), EXACT_COV_NODES).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!(a < -0.5f64.tanh().ln());
        // matches a brute-force trapezoid on the first circle
        let c1 = HyperbolicCircle::new(q.z1, q.rho1).unwrap();
        let k2 = TruncatedKernel::new(q.z2, q.rho2.tanh()).unwrap();
        let brute = periodic_mean(1 << 20, |t| k2.value(c1.point_at(t)));
        assert!((a - brute).abs() < 1e-9, "{a} vs {brute}");
    }

    #[test]
    fn bound_edge_cases() {
        let z = p(0.1, 0.2);
        let q = CovarianceQuery::new(z, 0.7, z, 0.7).unwrap();
        assert_eq!(theorem2_bound(&q), 0.0);
        let q = CovarianceQuery::new(z, 0.7, z, 1.3).unwrap();
        let want = (0.7f64.tanh().ln() - 1.3f64.tanh().ln()).abs();
        assert!((theorem2_bound(&q) - want).abs() < 1e-15);
        let msd = mean_square_difference(&q, EXACT_COV_NODES).unwrap();
        assert!((msd - want).abs() < 1e-12);
    }

    #[test]
    fn brownian_covariance_is_min() {
        let z0 = p(-0.2, 0.35);
        for (s, t) in [(0.5, 1.0), (1.0, 2.0), (0.3, 4.0)] {
            let q = CovarianceQuery::new(z0, time_to_rho(s).unwrap(), z0, time_to_rho(t).unwrap()).unwrap();
            let c = exact_cov(&q, EXACT_COV_NODES).unwrap();
            assert!((c - f64::min(s, t)).abs() < 1e-10);
        }
    }

    #[test]
    fn brownian_path_inputs() {
        let b = build_basis(2, 2).unwrap();
        let zero = FieldSample::from_coeffs(&b, vec![0.0; b.len()], 0).unwrap();
        assert_eq!(brownian_path(&zero, DiskPoint::ORIGIN, &[1.0]).unwrap(), vec![0.0]);
        assert!(brownian_path(&zero, DiskPoint::ORIGIN, &[1.0, 1.0]).is_err());
        assert!(brownian_path(&zero, DiskPoint::ORIGIN, &[0.0, 1.0]).is_err());
        assert!(brownian_path(&zero, DiskPoint::ORIGIN, &[2.0, 1.0]).is_err());
        let with0 = brownian_path_from_origin(&zero, DiskPoint::ORIGIN, &[1.0, 2.0]).unwrap();
        assert_eq!(with0, vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
    }

    #[test]
    fn field_average_is_linear_in_modes() {
        let b = build_basis(3, 3).unwrap();
        let z0 = p(0.25, -0.1);
        let rho = 0.6;
        let mut c = vec![0.0; b.len()];
        c[4] = 1.0;
        let s = FieldSample::from_coeffs(&b, c, 0).unwrap();
        let direct = circle_avg_fn(&b.modes()[4], z0, rho, circle_nodes(rho, FIELD_CIRCLE_NODES)).unwrap();
        assert!((circle_avg_field(&s, z0, rho).unwrap() - direct).abs() < 1e-14);
        let zero = FieldSample::from_coeffs(&b, vec![0.0; b.len()], 0).unwrap();
        assert_eq!(circle_avg_field(&zero, z0, rho).unwrap(), 0.0);
    }

    #[test]
    fn cache_returns_identical_values() {
        let b = build_basis(3, 3).unwrap();
        let avg = CircleAverager::new(&b, 256);
        let a = avg.mode_averages(p(0.1, 0.1), 0.5).unwrap();
        let c = avg.mode_averages(p(0.1, 0.1), 0.5).unwrap();
        assert!(Arc::ptr_eq(&a, &c));
        let fresh = mode_circle_averages(&b, p(0.1, 0.1), 0.5, avg.nodes_for(0.5)).unwrap();
        assert_eq!(*a, fresh);
    }

    #[test]
    fn default_nodes_resolve_circles_near_the_boundary() {
        let b = build_basis(24, 24).unwrap();
        let z = p(0.8, 0.0);
        let coarse = mode_circle_averages(&b, z, 3.0, circle_nodes(3.0, FIELD_CIRCLE_NODES)).unwrap();
        let fine = mode_circle_averages(&b, z, 3.0, 16 * FIELD_CIRCLE_NODES).unwrap();
        let err = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-14, "{err:e}");
    }
}
