//! Gaussian free field on the unit disk.
//!
//! The field is realized through a truncated Karhunen–Loève expansion in the
//! Dirichlet-orthonormal Fourier–Bessel basis of `H¹₀(𝔻)`. Hyperbolic circle
//! averages of the field are computed mode by mode, and their covariances are
//! compared against the closed forms obtained from the Green function of the
//! Poincaré disk, both by quadrature and by Monte Carlo.
//!
//! Module map:
//!
//! - [`poincare`]: points, Möbius involutions, hyperbolic distance and circles.
//! - [`kernels`]: Euclidean and hyperbolic Green functions, truncated kernels.
//! - [`spectral`]: Bessel functions, the eigenbasis and the Dirichlet form.
//! - [`field`]: sampling and evaluating truncated field realizations.
//! - [`circles`]: circle averages, covariances, the Brownian reparametrization.
//! - [`verify`]: deterministic and statistical check suites.
//! - [`cli`]: the `gff-disk` command line.

pub mod circles;
pub mod cli;
pub mod error;
pub mod field;
pub mod format;
pub mod kernels;
pub mod poincare;
pub mod quadrature;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use poincare::{DiskPoint, HyperbolicCircle, MobiusInvolution};
