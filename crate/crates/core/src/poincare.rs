//! Geometry of the Poincaré disk.
//!
//! Points are stored as complex numbers. The isometry used throughout is the
//! anti-Möbius involution `Φ_{z₀}(z) = (z₀/z̄₀)·(z̄ − z̄₀)/(z₀z̄ − 1)`, which
//! swaps `z₀` and the origin. Hyperbolic distances follow from
//! `tanh d(z, w) = |Φ_z(w)|`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Points with modulus at or above this bound are rejected.
pub const MAX_MODULUS: f64 = 1.0 - 1e-12;

/// Inverse hyperbolic tangent written with `ln_1p` so it keeps accuracy as
/// `x → 1`.
#[inline]
pub fn artanh(x: f64) -> f64 {
    0.5 * (x.ln_1p() - (-x).ln_1p())
}

/// A point of the open unit disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub const ORIGIN: DiskPoint = DiskPoint(Complex64 { re: 0.0, im: 0.0 });

    pub fn new(x: f64, y: f64) -> Result<Self> {
        Self::from_complex(Complex64::new(x, y))
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) || z.norm() >= MAX_MODULUS {
            return Err(Error::OutsideDisk { x: z.re, y: z.im });
        }
        Ok(DiskPoint(z))
    }

    pub fn from_polar(r: f64, theta: f64) -> Result<Self> {
        Self::from_complex(Complex64::from_polar(r, theta))
    }

    /// Wraps a value known to lie in the disk up to rounding, such as the
    /// image of a disk point under an isometry.
    pub(crate) fn from_complex_unchecked(z: Complex64) -> Self {
        DiskPoint(z)
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.0.re
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.0.im
    }

    #[inline]
    pub fn as_complex(&self) -> Complex64 {
        self.0
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.0.norm_sqr()
    }

    #[inline]
    pub fn is_origin(&self) -> bool {
        self.0.re == 0.0 && self.0.im == 0.0
    }
}

impl From<DiskPoint> for Complex64 {
    fn from(p: DiskPoint) -> Self {
        p.0
    }
}

/// The involutive isometry swapping `pole` and the origin.
///
/// A zero pole stands for the identity map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusInvolution {
    pole: DiskPoint,
    // z₀ / z̄₀, unit modulus
    rotation: Complex64,
}

impl MobiusInvolution {
    pub const IDENTITY: MobiusInvolution = MobiusInvolution {
        pole: DiskPoint::ORIGIN,
        rotation: Complex64 { re: 1.0, im: 0.0 },
    };

    pub fn pole(&self) -> DiskPoint {
        self.pole
    }

    pub fn is_identity(&self) -> bool {
        self.pole.is_origin()
    }

    /// Applies the map to a raw complex number. Valid on the whole plane
    /// except `1/z̄₀`.
    #[inline]
    pub fn apply_complex(&self, z: Complex64) -> Complex64 {
        if self.is_identity() {
            return z;
        }
        let z0 = self.pole.0;
        let zc = z.conj();
        self.rotation * (zc - z0.conj()) / (z0 * zc - 1.0)
    }

    #[inline]
    pub fn apply(&self, z: DiskPoint) -> DiskPoint {
        DiskPoint::from_complex_unchecked(self.apply_complex(z.0))
    }

    /// `∂Φ/∂z̄` at `z`; the map is antiholomorphic away from the identity.
    /// Returns `None` for the identity, which is holomorphic.
    pub fn conj_derivative(&self, z: Complex64) -> Option<Complex64> {
        if self.is_identity() {
            return None;
        }
        let z0 = self.pole.0;
        let den = z0 * z.conj() - 1.0;
        Some(self.rotation * (z0.norm_sqr() - 1.0) / (den * den))
    }

    /// `|Φ(z)|`, which equals `tanh d(pole, z)`.
    #[inline]
    pub fn image_modulus(&self, z: DiskPoint) -> f64 {
        self.apply_complex(z.0).norm()
    }
}

pub fn mobius_to_origin(z0: DiskPoint) -> MobiusInvolution {
    if z0.is_origin() {
        return MobiusInvolution::IDENTITY;
    }
    let z = z0.0;
    MobiusInvolution {
        pole: z0,
        rotation: z / z.conj(),
    }
}

pub fn mobius_apply(phi: &MobiusInvolution, z: DiskPoint) -> DiskPoint {
    phi.apply(z)
}

/// Hyperbolic distance, computed as `artanh |Φ_z(w)|`.
pub fn hyp_distance(z: DiskPoint, w: DiskPoint) -> f64 {
    artanh(mobius_to_origin(z).image_modulus(w))
}

pub fn rho_to_r(rho: f64) -> Result<f64> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::domain("rho_to_r", format!("radius must be positive and finite, got {rho}")));
    }
    Ok(rho.tanh())
}

pub fn r_to_rho(r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::domain("r_to_rho", format!("Euclidean radius must lie in (0, 1), got {r}")));
    }
    Ok(artanh(r))
}

/// Hyperbolic radius `argtanh(e^{−t})` attached to Brownian time `t`.
pub fn time_to_rho(t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::domain("time_to_rho", format!("time must be positive and finite, got {t}")));
    }
    Ok(artanh((-t).exp()))
}

/// A hyperbolic circle together with its Euclidean realization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperbolicCircle {
    center: DiskPoint,
    rho: f64,
    r: f64,
    phi: MobiusInvolution,
    euclid_center: DiskPoint,
    euclid_radius: f64,
}

impl HyperbolicCircle {
    pub fn new(center: DiskPoint, rho: f64) -> Result<Self> {
        let r = rho_to_r(rho)?;
        if r >= MAX_MODULUS {
            return Err(Error::domain(
                "circle",
                format!("hyperbolic radius {rho} is too large to represent"),
            ));
        }
        let phi = mobius_to_origin(center);
        // The diameter through 0 and z₀ is mapped to itself by Φ, so the two
        // points ±r·u land on a Euclidean diameter of the image circle.
        let u = if center.is_origin() {
            Complex64::new(1.0, 0.0)
        } else {
            center.0 / center.norm()
        };
        let a = phi.apply_complex(u * r);
        let b = phi.apply_complex(-u * r);
        let euclid_center = DiskPoint::from_complex_unchecked((a + b) * 0.5);
        let euclid_radius = 0.5 * (a - b).norm();
        Ok(HyperbolicCircle {
            center,
            rho,
            r,
            phi,
            euclid_center,
            euclid_radius,
        })
    }

    pub fn center(&self) -> DiskPoint {
        self.center
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Euclidean radius `tanh ρ` of the same circle moved to the origin.
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn involution(&self) -> &MobiusInvolution {
        &self.phi
    }

    pub fn euclid_center(&self) -> DiskPoint {
        self.euclid_center
    }

    pub fn euclid_radius(&self) -> f64 {
        self.euclid_radius
    }

    /// `Φ_{z₀}(r·e^{it})`. Uniform `t` is uniform in hyperbolic arc length.
    pub fn point_at(&self, t: f64) -> DiskPoint {
        self.phi.apply(DiskPoint(Complex64::from_polar(self.r, t)))
    }

    /// The `n` equispaced trapezoid nodes `t_k = 2πk/n`.
    pub fn nodes(&self, n: usize) -> impl Iterator<Item = DiskPoint> + '_ {
        (0..n).map(move |k| self.point_at(TAU * k as f64 / n as f64))
    }
}

pub fn circle(center: DiskPoint, rho: f64) -> Result<HyperbolicCircle> {
    HyperbolicCircle::new(center, rho)
}

pub fn circle_point(c: &HyperbolicCircle, t: f64) -> DiskPoint {
    c.point_at(t)
}
