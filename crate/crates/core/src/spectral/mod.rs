//! Dirichlet-orthonormal Fourier–Bessel basis of `H¹₀(𝔻)` and the Dirichlet
//! inner product `⟨φ, ψ⟩ = (1/2π)∫∇φ·∇ψ`.
//!
//! Each mode is `c·J_n(j_{n,k}|z|)·cos(nθ)` or `c·J_n(j_{n,k}|z|)·sin(nθ)`,
//! an eigenfunction of the Dirichlet Laplacian with eigenvalue `j_{n,k}²`.
//! An `L²`-normalized eigenfunction has Dirichlet norm `λ/(2π)`, and
//! `∫₀¹ J_n(jr)² r dr = J_{n+1}(j)²/2`, which fixes `c` in closed form.

pub mod bessel;

use std::f64::consts::{PI, TAU};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::Real;
use crate::poincare::DiskPoint;
pub use crate::quadrature::QuadratureSpec;
use crate::quadrature::KahanSum;

use bessel::{bessel_j_over_x_unchecked, bessel_j_prime_unchecked, bessel_j_unchecked};

/// Step used for central-difference gradients.
pub const FD_STEP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Cos,
    Sin,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Cos => "cos",
            Parity::Sin => "sin",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralMode {
    pub n: usize,
    pub parity: Parity,
    pub k: usize,
    pub zero: f64,
    pub eigenvalue: f64,
    pub norm_const: f64,
}

impl SpectralMode {
    pub fn new(n: usize, parity: Parity, k: usize, zero: f64) -> Result<Self> {
        if n == 0 && parity == Parity::Sin {
            return Err(Error::domain("spectral_mode", "no sine mode at n = 0"));
        }
        if k == 0 {
            return Err(Error::domain("spectral_mode", "radial index starts at 1"));
        }
        let jn1 = bessel::bessel_j(n + 1, zero)?;
        let norm_const = if n == 0 {
            2f64.sqrt() / (zero * jn1.abs())
        } else {
            2.0 / (zero * jn1.abs())
        };
        Ok(SpectralMode {
            n,
            parity,
            k,
            zero,
            eigenvalue: zero * zero,
            norm_const,
        })
    }

    #[inline]
    fn angular(&self, theta: f64) -> (f64, f64) {
        let (s, c) = (self.n as f64 * theta).sin_cos();
        match self.parity {
            Parity::Cos => (c, -s),
            Parity::Sin => (s, c),
        }
    }

    pub fn value(&self, z: DiskPoint) -> f64 {
        let r = z.norm();
        let theta = z.y().atan2(z.x());
        self.norm_const * bessel_j_unchecked(self.n, self.zero * r) * self.angular(theta).0
    }

    /// Analytic gradient from `J_n'` and `J_n(x)/x`.
    pub fn gradient(&self, z: DiskPoint) -> [f64; 2] {
        let r = z.norm();
        let theta = z.y().atan2(z.x());
        let x = self.zero * r;
        let (t, dt) = self.angular(theta);
        let dr = self.norm_const * self.zero * bessel_j_prime_unchecked(self.n, x) * t;
        // (1/r)∂θ
        let dth = if self.n == 0 {
            0.0
        } else {
            self.norm_const * self.zero * bessel_j_over_x_unchecked(self.n, x) * self.n as f64 * dt
        };
        let (s, c) = theta.sin_cos();
        [dr * c - dth * s, dr * s + dth * c]
    }
}

pub fn mode_eval(m: &SpectralMode, z: DiskPoint) -> f64 {
    m.value(z)
}

/// A function on the disk with a gradient. The default gradient is a
/// central difference with step [`FD_STEP`].
pub trait ScalarField {
    fn value(&self, z: DiskPoint) -> f64;

    fn gradient(&self, z: DiskPoint) -> [f64; 2] {
        central_gradient(|w| self.value(w), z, FD_STEP)
    }
}

impl<F: Fn(DiskPoint) -> f64> ScalarField for F {
    fn value(&self, z: DiskPoint) -> f64 {
        self(z)
    }
}

impl ScalarField for SpectralMode {
    fn value(&self, z: DiskPoint) -> f64 {
        SpectralMode::value(self, z)
    }

    fn gradient(&self, z: DiskPoint) -> [f64; 2] {
        SpectralMode::gradient(self, z)
    }
}

/// A value function paired with an analytic gradient.
pub struct WithGradient<F, G> {
    pub value: F,
    pub gradient: G,
}

impl<F, G> ScalarField for WithGradient<F, G>
where
    F: Fn(DiskPoint) -> f64,
    G: Fn(DiskPoint) -> [f64; 2],
{
    fn value(&self, z: DiskPoint) -> f64 {
        (self.value)(z)
    }

    fn gradient(&self, z: DiskPoint) -> [f64; 2] {
        (self.gradient)(z)
    }
}

pub fn central_gradient<F: Fn(DiskPoint) -> f64>(f: F, z: DiskPoint, h: f64) -> [f64; 2] {
    let at = |dx: f64, dy: f64| {
        f(DiskPoint::from_complex_unchecked(
            z.as_complex() + num_complex::Complex64::new(dx, dy),
        ))
    };
    [
        (at(h, 0.0) - at(-h, 0.0)) / (2.0 * h),
        (at(0.0, h) - at(0.0, -h)) / (2.0 * h),
    ]
}

fn tensor_inner<U, V, W>(u: &U, v: &V, q: &QuadratureSpec, weight: W) -> Result<f64>
where
    U: ScalarField + ?Sized,
    V: ScalarField + ?Sized,
    W: Fn(DiskPoint, [f64; 2], [f64; 2]) -> f64,
{
    q.validate(0)?;
    let mut acc = KahanSum::new();
    for (index, (r, theta, w)) in q.disk_nodes().into_iter().enumerate() {
        let z = DiskPoint::from_complex_unchecked(num_complex::Complex64::from_polar(r, theta));
        let term = weight(z, u.gradient(z), v.gradient(z));
        if !term.is_finite() {
            return Err(Error::NonFinite {
                index,
                x: z.x(),
                y: z.y(),
            });
        }
        acc.add(w * term);
    }
    Ok(acc.value() / TAU)
}

/// `(1/2π)∫_𝔻 ∇u·∇v dx dy` by Gauss–Legendre in `r` and the periodic
/// trapezoid in `θ`.
pub fn dirichlet_inner<U, V>(u: &U, v: &V, q: &QuadratureSpec) -> Result<f64>
where
    U: ScalarField + ?Sized,
    V: ScalarField + ?Sized,
{
    tensor_inner(u, v, q, |_, gu, gv| gu[0] * gv[0] + gu[1] * gv[1])
}

/// The same form written with the Poincaré metric `g/(1−|z|²)²`: hyperbolic
/// gradients, hyperbolic inner product and hyperbolic area. The conformal
/// factors cancel, so this must agree with [`dirichlet_inner`].
pub fn hyperbolic_dirichlet_inner<U, V>(u: &U, v: &V, q: &QuadratureSpec) -> Result<f64>
where
    U: ScalarField + ?Sized,
    V: ScalarField + ?Sized,
{
    tensor_inner(u, v, q, |z, gu, gv| {
        let lambda = 1.0 - z.norm_sqr();
        let conf = lambda * lambda;
        // ∇ʰ = (1−|z|²)²∇, gʰ = g/(1−|z|²)², ωʰ = ω/(1−|z|²)²
        let hu = [conf * gu[0], conf * gu[1]];
        let hv = [conf * gv[0], conf * gv[1]];
        let metric = (hu[0] * hv[0] + hu[1] * hv[1]) / conf;
        metric / conf
    })
}

/// Fourier–Bessel modes ordered by eigenvalue, ties broken by
/// `(n, parity, k)`.
#[derive(Clone, Debug)]
pub struct SpectralBasis {
    modes: Vec<SpectralMode>,
    n_max: usize,
    k_max: usize,
    // index of each mode's radial factor in `radial`
    radial_of: Vec<usize>,
    radial: Vec<(usize, f64)>,
}

/// One row of the exported basis manifest.
#[derive(Clone, Debug, Serialize)]
pub struct ModeRecord {
    pub n: usize,
    pub parity: Parity,
    pub k: usize,
    pub zero: Real,
    pub eigenvalue: Real,
    pub norm_const: Real,
}

impl SpectralBasis {
    pub fn build(n_max: usize, k_max: usize) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::domain("build_basis", "k_max must be at least 1"));
        }
        let zeros = bessel::zero_table(n_max, k_max)?;
        let mut modes = Vec::with_capacity((2 * n_max + 1) * k_max);
        for (n, row) in zeros.iter().enumerate() {
            for (k, &zero) in row.iter().take(k_max).enumerate() {
                modes.push(SpectralMode::new(n, Parity::Cos, k + 1, zero)?);
                if n > 0 {
                    modes.push(SpectralMode::new(n, Parity::Sin, k + 1, zero)?);
                }
            }
        }
        modes.sort_by(|a, b| {
            a.eigenvalue
                .total_cmp(&b.eigenvalue)
                .then(a.n.cmp(&b.n))
                .then(a.parity.cmp(&b.parity))
                .then(a.k.cmp(&b.k))
        });
        let mut radial: Vec<(usize, f64)> = Vec::new();
        let mut radial_of = Vec::with_capacity(modes.len());
        for m in &modes {
            let idx = match radial.iter().rposition(|&(n, z)| n == m.n && z == m.zero) {
                Some(i) => i,
                None => {
                    radial.push((m.n, m.zero));
                    radial.len() - 1
                }
            };
            radial_of.push(idx);
        }
        Ok(SpectralBasis {
            modes,
            n_max,
            k_max,
            radial_of,
            radial,
        })
    }

    pub fn modes(&self) -> &[SpectralMode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Writes every mode's value at `z` into `out`.
    pub fn eval_all(&self, z: DiskPoint, out: &mut [f64]) {
        assert_eq!(out.len(), self.modes.len());
        let r = z.norm();
        let theta = z.y().atan2(z.x());
        let radial: Vec<f64> = self
            .radial
            .iter()
            .map(|&(n, zero)| bessel_j_unchecked(n, zero * r))
            .collect();
        let trig: Vec<(f64, f64)> = (0..=self.n_max).map(|n| (n as f64 * theta).sin_cos()).collect();
        for ((slot, m), &ri) in out.iter_mut().zip(&self.modes).zip(&self.radial_of) {
            let (s, c) = trig[m.n];
            let t = match m.parity {
                Parity::Cos => c,
                Parity::Sin => s,
            };
            *slot = m.norm_const * radial[ri] * t;
        }
    }

    pub fn manifest(&self) -> Vec<ModeRecord> {
        self.modes
            .iter()
            .map(|m| ModeRecord {
                n: m.n,
                parity: m.parity,
                k: m.k,
                zero: Real(m.zero),
                eigenvalue: Real(m.eigenvalue),
                norm_const: Real(m.norm_const),
            })
            .collect()
    }

    /// Dirichlet Gram matrix of the first `count` modes, row-major, using
    /// analytic mode gradients.
    pub fn gram_matrix(&self, count: usize, q: &QuadratureSpec) -> Result<Vec<f64>> {
        let count = count.min(self.modes.len());
        let n_used = self.modes[..count].iter().map(|m| m.n).max().unwrap_or(0);
        q.validate(n_used)?;
        let nodes = q.disk_nodes();
        let grads: Vec<Vec<[f64; 2]>> = self.modes[..count]
            .par_iter()
            .map(|m| {
                nodes
                    .iter()
                    .map(|&(r, theta, _)| {
                        m.gradient(DiskPoint::from_complex_unchecked(num_complex::Complex64::from_polar(
                            r, theta,
                        )))
                    })
                    .collect()
            })
            .collect();
        let mut gram = vec![0.0; count * count];
        let rows: Vec<Vec<f64>> = (0..count)
            .into_par_iter()
            .map(|i| {
                (i..count)
                    .map(|j| {
                        let mut acc = KahanSum::new();
                        for ((gi, gj), node) in grads[i].iter().zip(&grads[j]).zip(&nodes) {
                            acc.add(node.2 * (gi[0] * gj[0] + gi[1] * gj[1]));
                        }
                        acc.value() / TAU
                    })
                    .collect()
            })
            .collect();
        for (i, row) in rows.iter().enumerate() {
            for (off, &v) in row.iter().enumerate() {
                let j = i + off;
                gram[i * count + j] = v;
                gram[j * count + i] = v;
            }
        }
        Ok(gram)
    }
}

pub fn build_basis(n_max: usize, k_max: usize) -> Result<SpectralBasis> {
    SpectralBasis::build(n_max, k_max)
}

/// `L²` norm squared of a mode over the unit disk, in closed form.
pub fn l2_norm_sqr(m: &SpectralMode) -> f64 {
    let jn1 = bessel_j_unchecked(m.n + 1, m.zero);
    let angular = if m.n == 0 { TAU } else { PI };
    m.norm_const * m.norm_const * 0.5 * jn1 * jn1 * angular
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn p(x: f64, y: f64) -> DiskPoint {
        DiskPoint::new(x, y).unwrap()
    }

    #[test]
    fn basis_sizes_and_first_eigenvalue() {
        let b = build_basis(0, 1).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b.modes()[0].eigenvalue - 5.783_185_962_946_784).abs() < 1e-12);
        assert_eq!(build_basis(1, 1).unwrap().len(), 3);
        assert_eq!(build_basis(3, 4).unwrap().len(), 28);
        assert!(build_basis(2, 0).is_err());
    }

    #[test]
    fn ordering_is_ascending_with_cos_before_sin() {
        let b = build_basis(6, 6).unwrap();
        for w in b.modes().windows(2) {
            assert!(w[0].eigenvalue <= w[1].eigenvalue);
            if w[0].eigenvalue == w[1].eigenvalue {
                assert_eq!((w[0].n, w[0].k), (w[1].n, w[1].k));
                assert_eq!((w[0].parity, w[1].parity), (Parity::Cos, Parity::Sin));
            }
        }
    }

    #[test]
    fn mode_point_values() {
        let b = build_basis(2, 2).unwrap();
        let m0 = b.modes()[0];
        assert_eq!((m0.n, m0.k), (0, 1));
        assert_eq!(m0.value(DiskPoint::ORIGIN), m0.norm_const);
        let near = p(1.0 - 1e-9, 0.0);
        assert!(m0.value(near).abs() < 1e-6 * m0.norm_const);
        for m in b.modes().iter().filter(|m| m.parity == Parity::Sin) {
            assert!(m.value(p(0.37, 0.0)).abs() < 1e-16);
        }
    }

    #[test]
    fn eval_all_agrees_with_individual_modes() {
        let b = build_basis(5, 4).unwrap();
        let z = p(-0.3, 0.55);
        let mut out = vec![0.0; b.len()];
        b.eval_all(z, &mut out);
        for (m, v) in b.modes().iter().zip(&out) {
            assert!((m.value(z) - v).abs() < 1e-14);
        }
    }

    #[test]
    fn l2_normalization_matches_dirichlet_normalization() {
        // an L²-normalized eigenfunction has Dirichlet norm λ/(2π)
        for m in build_basis(4, 3).unwrap().modes() {
            let dir = l2_norm_sqr(m) * m.eigenvalue / TAU;
            assert!((dir - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_difference() {
        let b = build_basis(4, 3).unwrap();
        for m in b.modes() {
            for z in [p(0.3, 0.2), p(-0.7, 0.1), p(0.05, -0.9), p(1e-3, 0.0)] {
                let g = m.gradient(z);
                let fd = central_gradient(|w| m.value(w), z, 1e-6);
                let scale = 1.0 + g[0].abs().max(g[1].abs());
                assert!((g[0] - fd[0]).abs() < 1e-6 * scale && (g[1] - fd[1]).abs() < 1e-6 * scale);
            }
        }
    }

    #[test]
    fn gradient_at_origin_is_finite() {
        let b = build_basis(2, 1).unwrap();
        for m in b.modes() {
            let g = m.gradient(DiskPoint::ORIGIN);
            assert!(g[0].is_finite() && g[1].is_finite());
        }
    }

    #[test]
    fn eigen_relation_by_five_point_laplacian() {
        let b = build_basis(5, 3).unwrap();
        let h = 1e-4;
        for m in b.modes() {
            for z in [Complex64::new(0.3, 0.2), Complex64::new(-0.5, 0.4), Complex64::new(0.1, -0.6)] {
                let f = |w: Complex64| m.value(DiskPoint::from_complex_unchecked(w));
                let c = f(z);
                if c.abs() < 1e-2 * m.norm_const {
                    continue;
                }
                let lap = (f(z + h) + f(z - h) + f(z + Complex64::new(0.0, h)) + f(z - Complex64::new(0.0, h))
                    - 4.0 * c)
                    / (h * h);
                let rel = (lap + m.eigenvalue * c).abs() / (m.eigenvalue * c.abs());
                assert!(rel < 1e-3, "mode ({}, {}, {}) rel {rel}", m.n, m.parity, m.k);
            }
        }
    }

    #[test]
    fn first_twenty_modes_are_orthonormal() {
        let b = build_basis(6, 6).unwrap();
        let q = QuadratureSpec::default();
        let gram = b.gram_matrix(20, &q).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i * 20 + j] - want).abs() < 1e-6, "({i}, {j}) = {}", gram[i * 20 + j]);
            }
        }
        // the generic quadrature path agrees with the cached-gradient path
        let m = &b.modes()[3];
        let direct = dirichlet_inner(m, m, &q).unwrap();
        assert!((direct - gram[3 * 20 + 3]).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_inner_reports_non_finite_nodes() {
        let bad = |z: DiskPoint| if z.x() > 0.5 { f64::NAN } else { z.x() };
        let err = dirichlet_inner(&bad, &bad, &QuadratureSpec::default()).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn hyperbolic_form_agrees() {
        let b = build_basis(3, 3).unwrap();
        let q = QuadratureSpec::default();
        let u = &b.modes()[2];
        let v = |z: DiskPoint| (1.0 - z.norm_sqr()) * (z.x() + 2.0 * z.y() * z.y());
        let e = dirichlet_inner(u, &v, &q).unwrap();
        let h = hyperbolic_dirichlet_inner(u, &v, &q).unwrap();
        assert!((e - h).abs() < 1e-6);
    }
}
