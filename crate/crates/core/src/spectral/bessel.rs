//! Bessel functions of the first kind of integer order and their zeros.
//!
//! Small arguments use the ascending power series; everything else uses
//! Miller's backward recurrence normalized by `J₀ + 2ΣJ₂ₖ = 1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest supported order.
pub const MAX_ORDER: usize = 200;
/// Largest supported argument.
pub const MAX_ARGUMENT: f64 = 1e4;

fn check(n: usize, x: f64) -> Result<()> {
    if n > MAX_ORDER {
        return Err(Error::UnsupportedOrder(n));
    }
    if !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(Error::domain(
            "bessel_j",
            format!("argument must lie in [0, {MAX_ARGUMENT}], got {x}"),
        ));
    }
    Ok(())
}

/// `J_n(x)` for `0 ≤ n ≤ MAX_ORDER`, `0 ≤ x ≤ MAX_ARGUMENT`.
pub fn bessel_j(n: usize, x: f64) -> Result<f64> {
    check(n, x)?;
    Ok(bessel_j_unchecked(n, x))
}

pub(crate) fn bessel_j_unchecked(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    // The series is free of cancellation while x²/4 stays below the order.
    if x <= 4.0 || 0.25 * x * x <= (n + 1) as f64 {
        series(n, x)
    } else {
        miller(n, x)
    }
}

fn series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=n {
        term *= half / i as f64;
    }
    if term == 0.0 {
        return 0.0;
    }
    let q = -half * half;
    let mut sum = term;
    for k in 1..500 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn miller(n: usize, x: f64) -> f64 {
    let start = n.max(x.ceil() as usize) + 30 + (8.0 * x.cbrt()).ceil() as usize;
    let m = start + start % 2;
    let two_over_x = 2.0 / x;
    let mut above = 0.0;
    let mut current = 1e-30;
    let mut norm = 0.0;
    let mut wanted = 0.0;
    // current holds J_k (unnormalized), above holds J_{k+1}
    let mut k = m;
    loop {
        if k == n {
            wanted = current;
        }
        if k.is_multiple_of(2) {
            norm += if k == 0 { current } else { 2.0 * current };
        }
        if k == 0 {
            break;
        }
        let below = k as f64 * two_over_x * current - above;
        above = current;
        current = below;
        k -= 1;
        if current.abs() > 1e250 {
            current *= 1e-250;
            above *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
    }
    wanted / norm
}

/// `J_n'(x)` from `J₀' = −J₁` and `J_n' = (J_{n−1} − J_{n+1})/2`.
pub fn bessel_j_prime(n: usize, x: f64) -> Result<f64> {
    check(n + 1, x)?;
    Ok(bessel_j_prime_unchecked(n, x))
}

pub(crate) fn bessel_j_prime_unchecked(n: usize, x: f64) -> f64 {
    if n == 0 {
        -bessel_j_unchecked(1, x)
    } else {
        0.5 * (bessel_j_unchecked(n - 1, x) - bessel_j_unchecked(n + 1, x))
    }
}

/// `J_n(x)/x` for `n ≥ 1`, finite at `x = 0`.
pub(crate) fn bessel_j_over_x_unchecked(n: usize, x: f64) -> f64 {
    debug_assert!(n >= 1);
    (bessel_j_unchecked(n - 1, x) + bessel_j_unchecked(n + 1, x)) / (2.0 * n as f64)
}

/// McMahon's large-zero expansion of `j_{n,k}`.
fn mcmahon(n: usize, k: usize) -> f64 {
    let mu = 4.0 * (n * n) as f64;
    let beta = (k as f64 + 0.5 * n as f64 - 0.25) * PI;
    let b8 = 8.0 * beta;
    beta - (mu - 1.0) / b8 - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8 * b8 * b8)
}

/// Newton iteration kept inside a sign-change bracket, with bisection
/// whenever a step would leave it.
fn bracketed_root(n: usize, mut a: f64, mut b: f64, guess: f64) -> Result<f64> {
    let f = |x: f64| bessel_j_unchecked(n, x);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::domain(
            "bessel_zero",
            format!("no sign change of J_{n} on [{a}, {b}]"),
        ));
    }
    let mut x = if guess > a && guess < b { guess } else { 0.5 * (a + b) };
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        let d = bessel_j_prime_unchecked(n, x);
        let newton = x - fx / d;
        let next = if d != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - x).abs() <= 1e-15 * x || b - a <= 4.0 * f64::EPSILON * x {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Zeros `j_{n,k}` for `n ≤ n_max`, with row `n` holding the first
/// `k_max + n_max − n` zeros. Row `n` is bracketed by interlacing against
/// row `n − 1`: `j_{n−1,k} < j_{n,k} < j_{n−1,k+1}`.
pub fn zero_table(n_max: usize, k_max: usize) -> Result<Vec<Vec<f64>>> {
    if k_max == 0 {
        return Err(Error::domain("bessel_zero", "k must be at least 1"));
    }
    check(n_max + 1, 0.0)?;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
    let len0 = k_max + n_max;
    let mut row0 = Vec::with_capacity(len0);
    for k in 1..=len0 {
        let kf = k as f64;
        row0.push(bracketed_root(0, (kf - 0.5) * PI, kf * PI, mcmahon(0, k))?);
    }
    rows.push(row0);
    for n in 1..=n_max {
        let prev = &rows[n - 1];
        let len = k_max + n_max - n;
        let mut row = Vec::with_capacity(len);
        for k in 1..=len {
            row.push(bracketed_root(n, prev[k - 1], prev[k], mcmahon(n, k))?);
        }
        rows.push(row);
    }
    if rows.iter().flatten().any(|&z| z > MAX_ARGUMENT) {
        return Err(Error::domain("bessel_zero", "zero exceeds the supported argument range"));
    }
    Ok(rows)
}

/// The `k`-th positive zero of `J_n`.
pub fn bessel_zero(n: usize, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("bessel_zero", "k must be at least 1"));
    }
    let table = zero_table(n, k)?;
    Ok(table[n][k - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `J_n(x) = (1/π)∫₀^π cos(nτ − x sin τ) dτ` by the trapezoid rule, which
    /// converges geometrically once the node count exceeds `x + n`.
    fn integral_oracle(n: usize, x: f64) -> f64 {
        let m = 2 * (x as usize + n) + 200;
        let h = PI / m as f64;
        let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
        let mut s = 0.5 * (f(0.0) + f(PI));
        for i in 1..m {
            s += f(h * i as f64);
        }
        s * h / PI
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(7, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(bessel_j(0, -1.0).is_err());
        assert!(bessel_j(0, f64::NAN).is_err());
        assert!(bessel_j(0, 2e4).is_err());
        assert!(bessel_j(MAX_ORDER + 1, 1.0).is_err());
        assert!(bessel_zero(0, 0).is_err());
    }

    #[test]
    fn matches_integral_representation() {
        for n in [0usize, 1, 2, 5, 10, 24, 40] {
            for &x in &[0.1, 1.0, 3.9, 4.1, 7.5, 12.0, 20.0, 37.3, 75.0, 110.0] {
                let got = bessel_j(n, x).unwrap();
                let want = integral_oracle(n, x);
                assert!((got - want).abs() < 2e-14, "J_{n}({x}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn large_arguments_stay_accurate() {
        for &x in &[500.0, 2500.0, 9999.0] {
            for n in [0usize, 3, 60] {
                let got = bessel_j(n, x).unwrap();
                let want = integral_oracle(n, x);
                assert!((got - want).abs() < 1e-12, "J_{n}({x}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        for n in [0usize, 1, 4] {
            let x = 6.3;
            let h = 1e-5;
            let fd = (bessel_j(n, x + h).unwrap() - bessel_j(n, x - h).unwrap()) / (2.0 * h);
            assert!((bessel_j_prime(n, x).unwrap() - fd).abs() < 1e-9);
        }
    }

    #[test]
    fn first_zeros() {
        let j01 = bessel_zero(0, 1).unwrap();
        assert!((j01 - 2.404_825_557_695_773).abs() < 1e-13);
        let j11 = bessel_zero(1, 1).unwrap();
        assert!((j11 - 3.831_705_970_207_512).abs() < 1e-13);
        assert!(bessel_j(0, 2.404826).unwrap().abs() < 1e-6);
    }

    #[test]
    fn zeros_vanish_and_interlace() {
        let table = zero_table(24, 24).unwrap();
        for (n, row) in table.iter().enumerate() {
            for (k, &z) in row.iter().enumerate() {
                assert!(bessel_j(n, z).unwrap().abs() < 1e-13, "J_{n}(j_{n},{})", k + 1);
                if k > 0 {
                    assert!(row[k - 1] < z);
                }
            }
        }
        for n in 0..5 {
            for k in 0..5 {
                assert!(table[n][k] < table[n + 1][k]);
                assert!(table[n + 1][k] < table[n][k + 1]);
            }
        }
    }
}
