use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poincare::{DiskPoint, MobiusInvolution};
use crate::quadrature::ClipDisk;
use crate::spectral::{ScalarField, SpectralMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

/// Test functions with closed-form gradients and Laplacians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TestFunction {
    /// `(s² − |z − c|²)³` on `|z − c| < s`, zero elsewhere. C² with compact
    /// support.
    Bump { center: Complex64, radius: f64 },
    /// `Re(zᵐ)` or `Im(zᵐ)`.
    HarmonicPoly { degree: u32, part: Part },
    Mode(SpectralMode),
}

impl std::fmt::Display for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestFunction::Bump { center, radius } => write!(f, "bump[c=({} {}) s={radius}]", center.re, center.im),
            TestFunction::HarmonicPoly { degree, part } => write!(f, "{part:?}(z^{degree})"),
            TestFunction::Mode(m) => write!(f, "mode[n={} {} k={}]", m.n, m.parity, m.k),
        }
    }
}

impl TestFunction {
    /// A bump whose closed support lies inside the disk.
    pub fn bump(center: DiskPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && center.norm() + radius < 1.0) {
            return Err(Error::domain(
                "bump",
                format!("support of radius {radius} about {center:?} must lie inside the disk"),
            ));
        }
        Ok(TestFunction::Bump {
            center: center.as_complex(),
            radius,
        })
    }

    pub fn harmonic(degree: u32, part: Part) -> Self {
        TestFunction::HarmonicPoly { degree, part }
    }

    pub fn support(&self) -> Option<ClipDisk> {
        match *self {
            TestFunction::Bump { center, radius } => Some(ClipDisk { center, radius }),
            _ => None,
        }
    }

    pub fn is_harmonic(&self) -> bool {
        matches!(self, TestFunction::HarmonicPoly { .. })
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        match *self {
            TestFunction::Bump { center, radius } => {
                let u = radius * radius - (z - center).norm_sqr();
                if u > 0.0 {
                    u * u * u
                } else {
                    0.0
                }
            }
            TestFunction::HarmonicPoly { degree, part } => {
                let w = z.powu(degree);
                match part {
                    Part::Re => w.re,
                    Part::Im => w.im,
                }
            }
            TestFunction::Mode(m) => m.value(DiskPoint::from_complex_unchecked(z)),
        }
    }

    pub fn grad(&self, z: Complex64) -> [f64; 2] {
        match *self {
            TestFunction::Bump { center, radius } => {
                let v = z - center;
                let u = radius * radius - v.norm_sqr();
                if u > 0.0 {
                    let k = -6.0 * u * u;
                    [k * v.re, k * v.im]
                } else {
                    [0.0, 0.0]
                }
            }
            TestFunction::HarmonicPoly { degree, part } => {
                if degree == 0 {
                    return [0.0, 0.0];
                }
                let d = z.powu(degree - 1) * degree as f64;
                match part {
                    Part::Re => [d.re, -d.im],
                    Part::Im => [d.im, d.re],
                }
            }
            TestFunction::Mode(m) => m.gradient(DiskPoint::from_complex_unchecked(z)),
        }
    }

    /// `Δf = f_xx + f_yy`.
    pub fn laplacian(&self, z: Complex64) -> f64 {
        match *self {
            TestFunction::Bump { center, radius } => {
                let rho2 = (z - center).norm_sqr();
                let u = radius * radius - rho2;
                if u > 0.0 {
                    -12.0 * u * u + 24.0 * u * rho2
                } else {
                    0.0
                }
            }
            TestFunction::HarmonicPoly { .. } => 0.0,
            TestFunction::Mode(m) => -m.eigenvalue * m.value(DiskPoint::from_complex_unchecked(z)),
        }
    }
}

impl ScalarField for TestFunction {
    fn value(&self, z: DiskPoint) -> f64 {
        self.eval(z.as_complex())
    }

    fn gradient(&self, z: DiskPoint) -> [f64; 2] {
        self.grad(z.as_complex())
    }
}

/// `f ∘ Φ`, with the gradient assembled by the chain rule from the analytic
/// gradient of `f` and a central-difference Jacobian of `Φ`.
pub struct Composed<'a> {
    pub f: &'a TestFunction,
    pub phi: MobiusInvolution,
}

impl ScalarField for Composed<'_> {
    fn value(&self, z: DiskPoint) -> f64 {
        self.f.eval(self.phi.apply_complex(z.as_complex()))
    }

    fn gradient(&self, z: DiskPoint) -> [f64; 2] {
        let g = self.f.grad(self.phi.apply_complex(z.as_complex()));
        // Φ = h(z̄) with h' = c, so ∂Φ/∂x = c and ∂Φ/∂y = −ic; ∇(f∘Φ) = DΦᵀ∇f.
        match self.phi.conj_derivative(z.as_complex()) {
            None => g,
            Some(c) => [g[0] * c.re + g[1] * c.im, g[0] * c.im - g[1] * c.re],
        }
    }
}
