//! Truncated Gaussian free field realizations.
//!
//! A sample is the vector of i.i.d. standard normal coefficients `a_j`
//! against a [`SpectralBasis`]. The field is `Σ a_j e_j`, and pairing with
//! `u = Σ u_j e_j` gives `⟨u, W⟩ = Σ u_j a_j`, a centered Gaussian of variance
//! `‖u‖²`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::Real;
use crate::poincare::DiskPoint;
use crate::quadrature::compensated_sum;
use crate::rng;
use crate::spectral::SpectralBasis;

#[derive(Clone, Debug)]
pub struct FieldSample<'a> {
    basis: &'a SpectralBasis,
    coeffs: Vec<f64>,
    seed: u64,
}

impl<'a> FieldSample<'a> {
    /// Draws the coefficients for `seed`. Coefficient `j` depends only on
    /// `(seed, j)`.
    pub fn sample(basis: &'a SpectralBasis, seed: u64) -> Self {
        FieldSample {
            basis,
            coeffs: rng::normals(seed, basis.len()),
            seed,
        }
    }

    /// A sample with explicit coefficients, e.g. a single basis mode.
    pub fn from_coeffs(basis: &'a SpectralBasis, coeffs: Vec<f64>, seed: u64) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::LengthMismatch {
                expected: basis.len(),
                actual: coeffs.len(),
            });
        }
        Ok(FieldSample { basis, coeffs, seed })
    }

    pub fn basis(&self) -> &'a SpectralBasis {
        self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `Σ_j a_j e_j(z)`.
    pub fn eval(&self, z: DiskPoint) -> f64 {
        let mut vals = vec![0.0; self.basis.len()];
        self.basis.eval_all(z, &mut vals);
        compensated_sum(vals.iter().zip(&self.coeffs).map(|(v, a)| v * a))
    }

    /// `⟨u, W⟩ = Σ_j u_j a_j`.
    pub fn pair(&self, u_coeffs: &[f64]) -> Result<f64> {
        if u_coeffs.len() != self.coeffs.len() {
            return Err(Error::LengthMismatch {
                expected: self.coeffs.len(),
                actual: u_coeffs.len(),
            });
        }
        Ok(compensated_sum(u_coeffs.iter().zip(&self.coeffs).map(|(u, a)| u * a)))
    }

    pub fn grid(&self, resolution: usize) -> Result<FieldGrid> {
        field_grid(self, resolution)
    }
}

pub fn sample_field(basis: &SpectralBasis, seed: u64) -> FieldSample<'_> {
    FieldSample::sample(basis, seed)
}

pub fn eval_field(s: &FieldSample<'_>, z: DiskPoint) -> f64 {
    s.eval(z)
}

pub fn pair_field(s: &FieldSample<'_>, u_coeffs: &[f64]) -> Result<f64> {
    s.pair(u_coeffs)
}

/// Field values on the `resolution × resolution` lattice spanning
/// `[-1, 1]²` (corners included), row-major with `y` ascending by row.
/// Nodes outside the open disk are masked and hold `0.0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldGrid {
    pub resolution: usize,
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

#[derive(Serialize)]
struct GridJson<'a> {
    resolution: usize,
    values: Vec<Real>,
    mask: &'a [bool],
}

impl FieldGrid {
    pub fn coordinate(&self, i: usize) -> f64 {
        -1.0 + 2.0 * i as f64 / (self.resolution - 1) as f64
    }

    /// `x,y,value` with masked nodes omitted.
    pub fn to_csv(&self) -> String {
        use crate::format::fmt_real;
        let mut out = String::from("x,y,value\n");
        for row in 0..self.resolution {
            for col in 0..self.resolution {
                let idx = row * self.resolution + col;
                if self.mask[idx] {
                    continue;
                }
                out.push_str(&format!(
                    "{},{},{}\n",
                    fmt_real(self.coordinate(col)),
                    fmt_real(self.coordinate(row)),
                    fmt_real(self.values[idx])
                ));
            }
        }
        out
    }

    /// `{resolution, values, mask}` where `mask[i]` is true for nodes
    /// outside the disk.
    pub fn to_json(&self) -> Result<String> {
        let doc = GridJson {
            resolution: self.resolution,
            values: self.values.iter().copied().map(Real).collect(),
            mask: &self.mask,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

pub fn field_grid(s: &FieldSample<'_>, resolution: usize) -> Result<FieldGrid> {
    if resolution < 2 {
        return Err(Error::domain("field_grid", format!("resolution must be at least 2, got {resolution}")));
    }
    let mut grid = FieldGrid {
        resolution,
        values: vec![0.0; resolution * resolution],
        mask: vec![true; resolution * resolution],
    };
    for row in 0..resolution {
        for col in 0..resolution {
            let idx = row * resolution + col;
            if let Ok(z) = DiskPoint::new(grid.coordinate(col), grid.coordinate(row)) {
                grid.values[idx] = s.eval(z);
                grid.mask[idx] = false;
            }
        }
    }
    Ok(grid)
}

#[derive(Serialize)]
struct CoeffJson {
    seed: u64,
    coeffs: Vec<Real>,
}

/// Coefficient dump `{seed, coeffs}`.
pub fn coeffs_json(s: &FieldSample<'_>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&CoeffJson {
        seed: s.seed,
        coeffs: s.coeffs.iter().copied().map(Real).collect(),
    })?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::build_basis;

    fn p(x: f64, y: f64) -> DiskPoint {
        DiskPoint::new(x, y).unwrap()
    }

    #[test]
    fn sampling_is_deterministic() {
        let b = build_basis(3, 3).unwrap();
        let a = sample_field(&b, 7);
        let c = sample_field(&b, 7);
        assert_eq!(a.coeffs(), c.coeffs());
        assert_ne!(a.coeffs(), sample_field(&b, 8).coeffs());
        // prefix property: truncation size does not change shared coefficients
        let small = build_basis(1, 1).unwrap();
        assert_eq!(sample_field(&small, 7).coeffs(), &a.coeffs()[..small.len()]);
    }

    #[test]
    fn zero_and_single_mode_fields() {
        let b = build_basis(3, 3).unwrap();
        let zero = FieldSample::from_coeffs(&b, vec![0.0; b.len()], 0).unwrap();
        assert_eq!(zero.eval(p(0.2, 0.3)), 0.0);
        let mut c = vec![0.0; b.len()];
        c[0] = 1.0;
        let one = FieldSample::from_coeffs(&b, c, 0).unwrap();
        let z = p(-0.4, 0.1);
        assert!((one.eval(z) - b.modes()[0].value(z)).abs() < 1e-15);
        assert!(FieldSample::from_coeffs(&b, vec![0.0; 3], 0).is_err());

        let s = sample_field(&b, 3);
        assert!(s.eval(p(1.0 - 1e-13 - 1e-12, 0.0)).abs() < 1e-9);
    }

    #[test]
    fn pairing() {
        let b = build_basis(2, 2).unwrap();
        let s = sample_field(&b, 11);
        let mut e1 = vec![0.0; b.len()];
        e1[0] = 1.0;
        assert_eq!(s.pair(&e1).unwrap(), s.coeffs()[0]);
        assert_eq!(s.pair(&vec![0.0; b.len()]).unwrap(), 0.0);
        assert!(matches!(s.pair(&[1.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn grids() {
        let b = build_basis(2, 2).unwrap();
        let zero = FieldSample::from_coeffs(&b, vec![0.0; b.len()], 0).unwrap();
        let g = zero.grid(9).unwrap();
        assert!(g.values.iter().all(|&v| v == 0.0));
        let g2 = zero.grid(2).unwrap();
        assert_eq!(g2.values.len(), 4);
        assert!(g2.mask.iter().all(|&m| m));
        assert!(zero.grid(1).is_err());

        let s = sample_field(&b, 5);
        let g = s.grid(11).unwrap();
        for row in 0..11 {
            for col in 0..11 {
                let idx = row * 11 + col;
                if !g.mask[idx] {
                    let z = p(g.coordinate(col), g.coordinate(row));
                    assert_eq!(g.values[idx], s.eval(z));
                }
            }
        }
        let csv = g.to_csv();
        assert!(csv.starts_with("x,y,value\n"));
        assert_eq!(csv.lines().count() - 1, g.mask.iter().filter(|m| !**m).count());
    }
}
