//! Green functions of the plane and of the disk, and the truncated kernel
//! whose Dirichlet pairing with a function gives its hyperbolic circle mean.

use crate::error::{Error, Result};
use crate::poincare::{mobius_to_origin, DiskPoint, HyperbolicCircle, MobiusInvolution};

/// `G₀(z) = −½ ln(x² + y²)`.
pub fn green_euclidean(z: DiskPoint) -> Result<f64> {
    let r2 = z.norm_sqr();
    if r2 == 0.0 {
        return Err(Error::domain("green_euclidean", "singular at the origin"));
    }
    Ok(-0.5 * r2.ln())
}

/// `∇G₀(z) = −z / |z|²`.
pub fn grad_green_euclidean(z: DiskPoint) -> Result<[f64; 2]> {
    let r2 = z.norm_sqr();
    if r2 == 0.0 {
        return Err(Error::domain("grad_green_euclidean", "singular at the origin"));
    }
    Ok([-z.x() / r2, -z.y() / r2])
}

/// `G_𝔻(z₀, z) = −ln tanh d(z₀, z)`, with `tanh d` read off as `|Φ_{z₀}(z)|`.
pub fn green_disk(z0: DiskPoint, z: DiskPoint) -> Result<f64> {
    let t = mobius_to_origin(z0).image_modulus(z);
    if t == 0.0 {
        return Err(Error::domain("green_disk", "singular at z = z0"));
    }
    Ok(-t.ln())
}

/// `G₀ʳ ∘ Φ_{z₀}`: equal to `−ln r` on the closed hyperbolic disk of radius
/// `artanh r` about `z₀` and to `G_𝔻(z₀, ·)` outside it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedKernel {
    center: DiskPoint,
    r: f64,
    phi: MobiusInvolution,
}

impl TruncatedKernel {
    pub fn new(center: DiskPoint, r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::domain(
                "truncated_kernel",
                format!("truncation radius must lie in (0, 1), got {r}"),
            ));
        }
        Ok(TruncatedKernel {
            center,
            r,
            phi: mobius_to_origin(center),
        })
    }

    pub fn from_circle(c: &HyperbolicCircle) -> Self {
        TruncatedKernel {
            center: c.center(),
            r: c.r(),
            phi: *c.involution(),
        }
    }

    pub fn center(&self) -> DiskPoint {
        self.center
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Value on the plateau, `−ln r`.
    pub fn plateau(&self) -> f64 {
        -self.r.ln()
    }

    #[inline]
    pub fn value(&self, z: DiskPoint) -> f64 {
        -self.r.max(self.phi.image_modulus(z)).ln()
    }
}

pub fn kernel_value(k: &TruncatedKernel, z: DiskPoint) -> f64 {
    k.value(z)
}
