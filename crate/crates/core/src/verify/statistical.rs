//! Monte Carlo checks of the truncated field law.
//!
//! Every statistic is a linear functional `Σ_j v_j a_j` of the coefficients,
//! so a run draws each replicate once and projects it on all the vectors it
//! needs. Replicates run in parallel; the per-replicate projections are
//! stored and reduced in replicate order.

use std::sync::Arc;

use rayon::prelude::*;

use super::{CheckKind, CheckResult};
use crate::circles::{dot, exact_cov, CircleAverager, CovarianceQuery, EXACT_COV_NODES};
use crate::error::{Error, Result};
use crate::poincare::{time_to_rho, DiskPoint};
use crate::rng::{normals, replicate_seed};
use crate::stats::{correlation, covariance, covariance_std_error, mean, skewness_kurtosis, variance};

/// Band, in standard errors, for means and covariances.
pub const SIGMA_BAND: f64 = 3.0;
/// Band, in standard errors, for skewness and kurtosis.
pub const MOMENT_BAND: f64 = 4.0;
pub const MIN_REPLICATES: usize = 100;
/// Largest Brownian time accepted by [`brownian_suite`].
pub const MAX_BROWNIAN_TIME: f64 = 5.0;

/// Projections `⟨v_k, a^{(i)}⟩` of `n` replicate coefficient vectors, one row
/// per replicate.
pub fn project(vectors: &[Arc<Vec<f64>>], seed: u64, n: usize) -> Vec<Vec<f64>> {
    let len = vectors.iter().map(|v| v.len()).max().unwrap_or(0);
    (0..n)
        .into_par_iter()
        .map(|i| {
            let a = normals(replicate_seed(seed, i as u64), len);
            vectors.iter().map(|v| dot(v, &a[..v.len()])).collect()
        })
        .collect()
}

fn column(rows: &[Vec<f64>], k: usize) -> Vec<f64> {
    rows.iter().map(|r| r[k]).collect()
}

fn statistical(name: String, value: f64, reference: f64, tolerance: f64, detail: String) -> CheckResult {
    CheckResult::new(name, CheckKind::Statistical, value, reference, tolerance, detail)
}

fn check_replicates(n: usize) -> Result<()> {
    if n < MIN_REPLICATES {
        return Err(Error::domain(
            "monte_carlo",
            format!("need at least {MIN_REPLICATES} replicates, got {n}"),
        ));
    }
    Ok(())
}

/// Sample covariance of `x`, `y` against `reference` within
/// [`SIGMA_BAND`] standard errors.
fn covariance_check(name: String, x: &[f64], y: &[f64], reference: f64, detail: String) -> CheckResult {
    let cov = covariance(x, y);
    let se = covariance_std_error(x, y);
    statistical(name, cov, reference, SIGMA_BAND * se, format!("{detail}; standard error {se:e}"))
}

fn moment_checks(name: &str, xs: &[f64]) -> [CheckResult; 2] {
    let n = xs.len() as f64;
    let (skew, kurt) = skewness_kurtosis(xs);
    [
        statistical(
            format!("{name} skewness"),
            skew,
            0.0,
            MOMENT_BAND * (6.0 / n).sqrt(),
            format!("{MOMENT_BAND} sigma band"),
        ),
        statistical(
            format!("{name} excess_kurtosis"),
            kurt,
            0.0,
            MOMENT_BAND * (24.0 / n).sqrt(),
            format!("{MOMENT_BAND} sigma band"),
        ),
    ]
}

/// Circle-average covariance: Monte Carlo estimate against the truncated
/// reference `Σ_j m_j(z₁, ρ₁) m_j(z₂, ρ₂)`. The detail line also reports the
/// gap between that reference and the untruncated covariance.
pub fn mc_covariance(
    q: &CovarianceQuery,
    n_replicates: usize,
    seed: u64,
    averager: &CircleAverager<'_>,
) -> Result<CheckResult> {
    check_replicates(n_replicates)?;
    let m1 = averager.mode_averages(q.z1, q.rho1)?;
    let m2 = averager.mode_averages(q.z2, q.rho2)?;
    let rows = project(&[m1, m2], seed, n_replicates);
    covariance_from_rows(q, &rows, 0, 1, averager)
}

fn covariance_from_rows(
    q: &CovarianceQuery,
    rows: &[Vec<f64>],
    i: usize,
    j: usize,
    averager: &CircleAverager<'_>,
) -> Result<CheckResult> {
    let reference = averager.truncated_cov(q)?;
    let exact = exact_cov(q, EXACT_COV_NODES)?;
    Ok(covariance_check(
        format!(
            "mc_covariance {} z1=({} {}) rho1={} z2=({} {}) rho2={}",
            q.regime(),
            q.z1.x(),
            q.z1.y(),
            q.rho1,
            q.z2.x(),
            q.z2.y(),
            q.rho2
        ),
        &column(rows, i),
        &column(rows, j),
        reference,
        format!(
            "{} replicates; untruncated covariance {exact:e}; truncation gap {:e}",
            rows.len(),
            (reference - exact).abs()
        ),
    ))
}

/// Covariance checks for several queries sharing one set of replicates.
pub fn mc_covariances(
    queries: &[CovarianceQuery],
    n_replicates: usize,
    seed: u64,
    averager: &CircleAverager<'_>,
) -> Result<Vec<CheckResult>> {
    check_replicates(n_replicates)?;
    let mut vectors = Vec::with_capacity(2 * queries.len());
    for q in queries {
        vectors.push(averager.mode_averages(q.z1, q.rho1)?);
        vectors.push(averager.mode_averages(q.z2, q.rho2)?);
    }
    let rows = project(&vectors, seed, n_replicates);
    queries
        .iter()
        .enumerate()
        .map(|(k, q)| covariance_from_rows(q, &rows, 2 * k, 2 * k + 1, averager))
        .collect()
}

/// Brownian motion from circle averages at `z₀`: covariance matrix against
/// the truncated reference, increment variances, increment normality and
/// decorrelation of consecutive increments.
pub fn brownian_suite(
    z0: DiskPoint,
    times: &[f64],
    n_replicates: usize,
    seed: u64,
    averager: &CircleAverager<'_>,
) -> Result<Vec<CheckResult>> {
    check_replicates(n_replicates)?;
    let mut prev = 0.0;
    for &t in times {
        if !(t > prev && t <= MAX_BROWNIAN_TIME) {
            return Err(Error::domain(
                "brownian_suite",
                format!("times must be strictly increasing within (0, {MAX_BROWNIAN_TIME}]"),
            ));
        }
        prev = t;
    }
    let label = format!("z0=({} {})", z0.x(), z0.y());
    let ms: Vec<Arc<Vec<f64>>> = times
        .iter()
        .map(|&t| averager.mode_averages(z0, time_to_rho(t)?))
        .collect::<Result<_>>()?;
    let rows = project(&ms, seed, n_replicates);
    let paths: Vec<Vec<f64>> = (0..times.len()).map(|k| column(&rows, k)).collect();
    let mut out = Vec::new();

    for i in 0..times.len() {
        for j in i..times.len() {
            let reference = dot(&ms[i], &ms[j]);
            out.push(covariance_check(
                format!("brownian cov(B_{}, B_{}) {label}", times[i], times[j]),
                &paths[i],
                &paths[j],
                reference,
                format!(
                    "truncated reference; untruncated min(s,t) = {}, truncation gap {:e}",
                    times[i],
                    (reference - times[i]).abs()
                ),
            ));
        }
    }

    // increments over consecutive times, starting from B_0 = 0
    let zero = vec![0.0; ms[0].len()];
    let mut increments = Vec::with_capacity(times.len());
    let mut inc_vectors = Vec::with_capacity(times.len());
    for k in 0..times.len() {
        let (prev_path, prev_m, s) = if k == 0 {
            (None, &zero, 0.0)
        } else {
            (Some(&paths[k - 1]), ms[k - 1].as_ref(), times[k - 1])
        };
        let inc: Vec<f64> = match prev_path {
            Some(p) => paths[k].iter().zip(p).map(|(b, a)| b - a).collect(),
            None => paths[k].clone(),
        };
        let dm: Vec<f64> = ms[k].iter().zip(prev_m).map(|(b, a)| b - a).collect();
        let reference = dot(&dm, &dm);
        let t = times[k];
        out.push(covariance_check(
            format!("brownian var(B_{t} - B_{s}) {label}"),
            &inc,
            &inc,
            reference,
            format!("truncated reference; untruncated t - s = {}", t - s),
        ));
        out.extend(moment_checks(&format!("brownian increment B_{t} - B_{s} {label}"), &inc));
        increments.push((s, t, inc));
        inc_vectors.push(dm);
    }
    for k in 1..increments.len() {
        let (s0, t0, a) = &increments[k - 1];
        let (s1, t1, b) = &increments[k];
        let corr = correlation(a, b);
        let truncated = dot(&inc_vectors[k - 1], &inc_vectors[k])
            / (dot(&inc_vectors[k - 1], &inc_vectors[k - 1]) * dot(&inc_vectors[k], &inc_vectors[k])).sqrt();
        out.push(statistical(
            format!("brownian corr(B_{t0} - B_{s0}, B_{t1} - B_{s1}) {label}"),
            corr,
            truncated,
            SIGMA_BAND / (a.len() as f64).sqrt(),
            String::from("truncated reference; untruncated increments are independent"),
        ));
    }
    Ok(out)
}

/// Law of the coefficients and of pairings: mean and variance of `a_1`,
/// variance of `⟨u, W⟩` for a unit vector `u`, and its normality bands.
pub fn field_law_checks(basis_len: usize, n_replicates: usize, seed: u64) -> Result<Vec<CheckResult>> {
    check_replicates(n_replicates)?;
    if basis_len == 0 {
        return Err(Error::domain("field_law_checks", "empty basis"));
    }
    let mut e1 = vec![0.0; basis_len];
    e1[0] = 1.0;
    let raw: Vec<f64> = (0..basis_len).map(|j| 1.0 / (1.0 + j as f64)).collect();
    let norm = dot(&raw, &raw).sqrt();
    let u: Vec<f64> = raw.iter().map(|x| x / norm).collect();
    let rows = project(&[Arc::new(e1), Arc::new(u)], seed, n_replicates);
    let a1 = column(&rows, 0);
    let pu = column(&rows, 1);
    let n = n_replicates as f64;
    let mut out = vec![
        statistical(
            "field coefficient a_1 mean".into(),
            mean(&a1),
            0.0,
            SIGMA_BAND / n.sqrt(),
            format!("{n_replicates} replicates"),
        ),
        statistical(
            "field coefficient a_1 variance".into(),
            variance(&a1),
            1.0,
            SIGMA_BAND * (2.0 / (n - 1.0)).sqrt(),
            format!("{n_replicates} replicates"),
        ),
    ];
    out.push(covariance_check(
        "field pairing <u,W> variance, |u| = 1".into(),
        &pu,
        &pu,
        1.0,
        format!("{n_replicates} replicates"),
    ));
    out.extend(moment_checks("field pairing <u,W>", &pu));
    Ok(out)
}
