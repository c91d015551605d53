//! Counter-based standard normal draws.
//!
//! Coefficient `j` of the sample with seed `s` is read from the ChaCha20
//! keystream keyed by `s` at 64-bit word `j`, so it does not depend on how
//! many coefficients are drawn or in which order, and can be recomputed in
//! isolation. Uniforms are mapped to normals through the inverse CDF.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use statrs::function::erf::erfc_inv;

/// Maps 64 random bits to a uniform in the open interval `(0, 1)`.
#[inline]
pub fn open_uniform(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Standard normal quantile.
#[inline]
pub fn normal_quantile(u: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
}

fn keystream(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// The normal draw at counter `index` under `seed`.
pub fn normal_at(seed: u64, index: usize) -> f64 {
    let mut rng = keystream(seed);
    rng.set_word_pos(2 * index as u128);
    normal_quantile(open_uniform(rng.next_u64()))
}

/// The first `count` normal draws under `seed`; entry `j` equals
/// `normal_at(seed, j)`.
pub fn normals(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = keystream(seed);
    (0..count)
        .map(|_| normal_quantile(open_uniform(rng.next_u64())))
        .collect()
}

/// Seed of Monte Carlo replicate `index` derived from `base` (SplitMix64
/// finalizer over the pair).
pub fn replicate_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_access_matches_stream() {
        let seq = normals(42, 50);
        for (j, &v) in seq.iter().enumerate() {
            assert_eq!(normal_at(42, j), v);
        }
        assert_eq!(normals(42, 10), seq[..10].to_vec());
        assert_ne!(normals(43, 5), seq[..5].to_vec());
    }

    #[test]
    fn quantile_is_accurate() {
        assert_eq!(normal_quantile(0.5), 0.0);
        assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-12);
        assert!((normal_quantile(1e-10) + 6.361_340_902_404_056).abs() < 1e-9);
        let u = open_uniform(0);
        assert!(u > 0.0 && normal_quantile(u).is_finite());
        let u = open_uniform(u64::MAX);
        assert!(u < 1.0 && normal_quantile(u).is_finite());
    }

    #[test]
    fn replicate_seeds_are_distinct() {
        let mut seen: Vec<u64> = (0..10_000).map(|i| replicate_seed(1, i)).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 10_000);
    }
}
