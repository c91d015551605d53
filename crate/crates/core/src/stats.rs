//! Sample statistics with a fixed summation order.

use crate::quadrature::compensated_sum;

pub fn mean(xs: &[f64]) -> f64 {
    compensated_sum(xs.iter().copied()) / xs.len() as f64
}

/// Unbiased sample covariance.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (mx, my) = (mean(xs), mean(ys));
    compensated_sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my))) / (xs.len() as f64 - 1.0)
}

pub fn variance(xs: &[f64]) -> f64 {
    covariance(xs, xs)
}

/// Standard error of the sample covariance, estimated from the spread of
/// the centered products.
pub fn covariance_std_error(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    (variance(&prods) / xs.len() as f64).sqrt()
}

pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    covariance(xs, ys) / (variance(xs) * variance(ys)).sqrt()
}

/// Standardized skewness `m₃ / m₂^{3/2}` and excess kurtosis `m₄ / m₂² − 3`
/// from central moments.
pub fn skewness_kurtosis(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    let n = xs.len() as f64;
    let m2 = compensated_sum(xs.iter().map(|x| (x - m).powi(2))) / n;
    let m3 = compensated_sum(xs.iter().map(|x| (x - m).powi(3))) / n;
    let m4 = compensated_sum(xs.iter().map(|x| (x - m).powi(4))) / n;
    (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_samples() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
        let ys = [2.0, 4.0, 6.0, 8.0];
        assert!((correlation(&xs, &ys) - 1.0).abs() < 1e-15);
        let (s, _) = skewness_kurtosis(&xs);
        assert!(s.abs() < 1e-15);
    }

    #[test]
    fn kurtosis_of_two_point_law() {
        // symmetric ±1: m₄/m₂² = 1
        let xs = [1.0, -1.0, 1.0, -1.0];
        let (s, k) = skewness_kurtosis(&xs);
        assert_eq!(s, 0.0);
        assert!((k + 2.0).abs() < 1e-15);
    }
}
