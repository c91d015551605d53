//! Verification suites and their machine-readable reports.
//!
//! The deterministic suite evaluates the circle-average, inversion,
//! isometry and covariance identities by quadrature. The statistical suite
//! checks the Monte Carlo law of the truncated field against its truncated
//! references. A statistical check that fails is rerun once with a derived
//! seed; it only counts as failed if the rerun fails too.

pub mod identities;
pub mod statistical;
pub mod testfn;

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circles::{exact_cov, CircleAverager, CovarianceQuery, Regime, EXACT_COV_NODES};
use crate::error::Result;
use crate::format::{fmt_real, Real};
use crate::poincare::{mobius_to_origin, time_to_rho, DiskPoint, MAX_MODULUS};
use crate::quadrature::{PolarRule, QuadratureSpec};
use crate::rng::{open_uniform, replicate_seed};
use crate::spectral::{dirichlet_inner, hyperbolic_dirichlet_inner, SpectralBasis};

pub use identities::{check_inversion, check_isometry_invariance, check_mean_value, check_property1, Green};
pub use statistical::{brownian_suite, field_law_checks, mc_covariance, mc_covariances};
pub use testfn::{Part, TestFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Deterministic,
    Statistical,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub kind: CheckKind,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    /// Builds a result; `passed` is `|value − reference| ≤ tolerance`.
    pub fn new(name: String, kind: CheckKind, value: f64, reference: f64, tolerance: f64, detail: String) -> Self {
        let passed = (value - reference).abs() <= tolerance;
        CheckResult {
            name,
            kind,
            value,
            reference,
            tolerance,
            passed,
            detail,
        }
    }

    pub fn error(&self) -> f64 {
        (self.value - self.reference).abs()
    }
}

#[derive(Serialize)]
struct CheckJson<'a> {
    name: &'a str,
    kind: CheckKind,
    value: Real,
    reference: Real,
    tolerance: Real,
    passed: bool,
    detail: &'a str,
}

impl Serialize for CheckResult {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CheckJson {
            name: &self.name,
            kind: self.kind,
            value: Real(self.value),
            reference: Real(self.reference),
            tolerance: Real(self.tolerance),
            passed: self.passed,
            detail: &self.detail,
        }
        .serialize(serializer)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    /// Number of reported results, reruns included.
    pub total: usize,
    pub passed: usize,
    /// Deterministic failures plus statistical checks that failed twice.
    pub failed: usize,
    pub retried: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub checks: Vec<CheckResult>,
    pub summary: Summary,
}

impl Report {
    pub fn success(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "kind", "value", "reference", "tolerance", "passed", "detail"])?;
        for c in &self.checks {
            let kind = match c.kind {
                CheckKind::Deterministic => "deterministic",
                CheckKind::Statistical => "statistical",
            };
            w.write_record([
                c.name.as_str(),
                kind,
                &fmt_real(c.value),
                &fmt_real(c.reference),
                &fmt_real(c.tolerance),
                if c.passed { "true" } else { "false" },
                c.detail.as_str(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Deterministic,
    Statistical,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub quad: QuadratureSpec,
    pub replicates: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 1,
            quad: QuadratureSpec::default(),
            replicates: 10_000,
        }
    }
}

/// Deterministic uniform stream for generating test configurations.
pub struct ConfigRng(ChaCha8Rng);

impl ConfigRng {
    pub fn new(seed: u64) -> Self {
        ConfigRng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * open_uniform(self.0.next_u64())
    }

    /// A point drawn uniformly by area from the disk of radius `max_r`.
    pub fn point(&mut self, max_r: f64) -> DiskPoint {
        let r = max_r * self.uniform(0.0, 1.0).sqrt();
        let t = self.uniform(0.0, TAU);
        DiskPoint::from_polar(r, t).expect("radius below one")
    }
}

/// A random circle pair in the requested regime: `z₁` uniform in
/// `|z| ≤ 0.8`, radii uniform in `rho_range`, and `z₂` placed at a distance
/// drawn uniformly from the regime's distance interval (at most
/// `ρ₁ + ρ₂ + 2` for disjoint pairs).
pub fn random_query(rng: &mut ConfigRng, regime: Regime, rho_range: (f64, f64)) -> CovarianceQuery {
    loop {
        let z1 = rng.point(0.8);
        let rho1 = rng.uniform(rho_range.0, rho_range.1);
        let rho2 = rng.uniform(rho_range.0, rho_range.1);
        let (lo, hi) = match regime {
            Regime::Nested => (0.0, (rho2 - rho1).abs()),
            Regime::Overlapping => ((rho2 - rho1).abs(), rho1 + rho2),
            Regime::Disjoint => (rho1 + rho2, rho1 + rho2 + 2.0),
        };
        let d = rng.uniform(lo, hi);
        let w = Complex64::from_polar(d.tanh(), rng.uniform(0.0, TAU));
        let z2 = mobius_to_origin(z1).apply_complex(w);
        if z2.norm() >= MAX_MODULUS {
            continue;
        }
        let Ok(z2) = DiskPoint::from_complex(z2) else { continue };
        let Ok(q) = CovarianceQuery::new(z1, rho1, z2, rho2) else { continue };
        if q.regime() == regime {
            return q;
        }
    }
}

fn p(x: f64, y: f64) -> DiskPoint {
    DiskPoint::new(x, y).expect("fixed configuration inside the disk")
}

/// Bump/annulus configurations for the circle-average identity.
pub fn property1_configs() -> Result<Vec<(TestFunction, f64, f64)>> {
    Ok(vec![
        (TestFunction::harmonic(2, Part::Re), 0.2, 0.7),
        (TestFunction::harmonic(5, Part::Im), 0.35, 0.9),
        (TestFunction::bump(p(0.45, 0.1), 0.1)?, 0.2, 0.8),
        (TestFunction::bump(DiskPoint::ORIGIN, 0.5)?, 0.3, 0.7),
        (TestFunction::bump(DiskPoint::ORIGIN, 0.6)?, 0.1, 0.9),
        (TestFunction::bump(p(0.1, 0.05), 0.5)?, 0.2, 0.45),
        (TestFunction::bump(p(-0.2, 0.3), 0.45)?, 0.15, 0.6),
        (TestFunction::bump(p(0.5, -0.2), 0.3)?, 0.35, 0.75),
        (TestFunction::bump(p(0.0, -0.6), 0.35)?, 0.4, 0.8),
        (TestFunction::bump(p(0.3, 0.3), 0.55)?, 0.05, 0.5),
    ])
}

/// Ten fixed circle pairs covering the three regimes, for Monte Carlo.
pub fn monte_carlo_queries() -> Result<Vec<CovarianceQuery>> {
    let q = CovarianceQuery::new;
    Ok(vec![
        q(DiskPoint::ORIGIN, 0.5, DiskPoint::ORIGIN, 0.5)?,
        q(p(0.3, -0.2), 0.4, p(0.3, -0.2), 1.0)?,
        q(p(-0.5, 0.0), 0.4, p(0.5, 0.0), 0.4)?,
        q(p(0.1, 0.4), 0.3, p(-0.4, -0.3), 0.6)?,
        q(DiskPoint::ORIGIN, 0.5, p(0.1, 0.0), 0.5)?,
        q(p(0.2, 0.2), 0.8, p(0.35, 0.1), 0.6)?,
        q(p(-0.3, 0.1), 1.2, p(-0.25, 0.05), 0.3)?,
        q(p(0.6, 0.0), 0.5, p(0.0, 0.6), 0.5)?,
        q(p(0.0, -0.5), 0.7, p(0.2, -0.3), 0.9)?,
        q(p(-0.7, 0.2), 0.3, p(0.7, -0.2), 0.3)?,
    ])
}

pub const TRUNCATION_RHOS: [f64; 3] = [0.3, 0.5, 1.0];
pub const TRUNCATION_FRACTION: f64 = 0.98;
pub const GRAM_MODES: usize = 100;
pub const GRAM_TOL: f64 = 1e-6;
pub const BROWNIAN_TIMES: [f64; 3] = [0.5, 1.0, 2.0];

/// Truncated variance at the origin as a fraction of `−ln tanh ρ`, with a
/// monotonicity flag for the partial sums.
pub fn truncation_fraction(averager: &CircleAverager<'_>, rho: f64) -> Result<(f64, bool)> {
    let profile = averager.truncated_variance_profile(DiskPoint::ORIGIN, rho)?;
    let monotone = profile.windows(2).all(|w| w[1] >= w[0]);
    let last = profile.last().copied().unwrap_or(0.0);
    Ok((last / -rho.tanh().ln(), monotone))
}

pub fn deterministic_checks(basis: &SpectralBasis, config: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let rule = PolarRule::default();
    let mut out = Vec::new();

    for (f, r, big_r) in property1_configs()? {
        out.push(check_property1(&f, r, big_r, &rule)?);
    }

    let mut rng = ConfigRng::new(0x6d65_616e);
    for degree in 0..=6 {
        for part in [Part::Re, Part::Im] {
            if degree == 0 && part == Part::Im {
                continue;
            }
            let z0 = rng.point(0.8);
            let rho = rng.uniform(0.1, 3.0);
            out.push(check_mean_value(&TestFunction::harmonic(degree, part), z0, rho)?);
        }
    }

    let bump = TestFunction::bump(p(0.2, -0.1), 0.4)?;
    out.push(check_inversion(&bump, p(0.2, -0.1), Green::Disk, &rule)?);
    out.push(check_inversion(&bump, p(0.35, 0.05), Green::Disk, &rule)?);
    out.push(check_inversion(&bump, p(-0.5, 0.5), Green::Disk, &rule)?);
    let centered = TestFunction::bump(DiskPoint::ORIGIN, 0.6)?;
    out.push(check_inversion(&centered, DiskPoint::ORIGIN, Green::Plane, &rule)?);
    out.push(check_inversion(&centered, DiskPoint::ORIGIN, Green::Disk, &rule)?);

    let u = TestFunction::bump(p(0.2, 0.0), 0.3)?;
    let v = TestFunction::bump(p(0.1, 0.25), 0.35)?;
    let w = TestFunction::bump(p(-0.5, 0.1), 0.2)?;
    out.push(check_isometry_invariance(&u, &u, p(0.5, 0.0), &config.quad)?);
    out.push(check_isometry_invariance(&u, &v, p(-0.3, 0.4), &config.quad)?);
    out.push(check_isometry_invariance(&u, &w, p(0.3, -0.2), &config.quad)?);

    let mut rng = ConfigRng::new(0x636f_7661);
    for _ in 0..10 {
        let z = rng.point(0.8);
        let rho = rng.uniform(0.1, 3.0);
        let q = CovarianceQuery::new(z, rho, z, rho)?;
        out.push(identities::check_closed_covariance(&q, EXACT_COV_NODES)?);
    }
    for regime in [Regime::Nested, Regime::Disjoint] {
        for _ in 0..10 {
            let q = random_query(&mut rng, regime, (0.1, 3.0));
            out.push(identities::check_closed_covariance(&q, EXACT_COV_NODES)?);
        }
    }
    for regime in [Regime::Nested, Regime::Overlapping, Regime::Disjoint] {
        for _ in 0..10 {
            let q = random_query(&mut rng, regime, (0.05, 3.0));
            out.push(identities::check_theorem2(&q, EXACT_COV_NODES)?);
        }
    }

    let z0 = p(0.25, -0.3);
    for (s, t) in [(0.5, 1.0), (1.0, 2.0), (0.5, 2.0)] {
        let q = CovarianceQuery::new(z0, time_to_rho(s)?, z0, time_to_rho(t)?)?;
        out.push(CheckResult::new(
            format!("brownian exact cov(B_{s}, B_{t})"),
            CheckKind::Deterministic,
            exact_cov(&q, EXACT_COV_NODES)?,
            s.min(t),
            identities::COVARIANCE_TOL,
            String::from("untruncated covariance equals min(s,t)"),
        ));
    }

    let count = GRAM_MODES.min(basis.len());
    let gram = basis.gram_matrix(count, &config.quad)?;
    let max_dev = (0..count * count)
        .map(|idx| {
            let want = if idx / count == idx % count { 1.0 } else { 0.0 };
            (gram[idx] - want).abs()
        })
        .fold(0.0, f64::max);
    out.push(CheckResult::new(
        format!("basis orthonormality, first {count} modes"),
        CheckKind::Deterministic,
        max_dev,
        0.0,
        GRAM_TOL,
        String::from("max |Gram - I|"),
    ));

    let m = &basis.modes()[basis.len().min(5) - 1];
    let bump_v = TestFunction::bump(p(0.1, -0.2), 0.5)?;
    let euclid = dirichlet_inner(m, &bump_v, &config.quad)?;
    let hyper = hyperbolic_dirichlet_inner(m, &bump_v, &config.quad)?;
    out.push(CheckResult::new(
        String::from("metric independence of the Dirichlet form"),
        CheckKind::Deterministic,
        hyper,
        euclid,
        GRAM_TOL,
        String::from("hyperbolic-metric quadrature against Euclidean quadrature"),
    ));

    let averager = CircleAverager::new(basis, 4 * config.quad.angular_nodes);
    for rho in TRUNCATION_RHOS {
        let (fraction, monotone) = truncation_fraction(&averager, rho)?;
        let mut c = CheckResult::new(
            format!("truncated variance fraction rho={rho}"),
            CheckKind::Deterministic,
            fraction,
            1.0,
            1.0 - TRUNCATION_FRACTION,
            format!("partial sums nondecreasing: {monotone}; must not exceed 1"),
        );
        c.passed &= monotone && fraction <= 1.0 + 1e-12;
        out.push(c);
    }
    Ok(out)
}

type Group<'a> = Box<dyn Fn(u64) -> Result<Vec<CheckResult>> + 'a>;

fn statistical_groups<'a>(averager: &'a CircleAverager<'a>, config: &'a SuiteConfig) -> Result<Vec<Group<'a>>> {
    let n = config.replicates;
    let len = averager.basis().len();
    let queries = monte_carlo_queries()?;
    Ok(vec![
        Box::new(move |seed| field_law_checks(len, n, seed)),
        Box::new(move |seed| mc_covariances(&queries, n, seed, averager)),
        Box::new(move |seed| brownian_suite(DiskPoint::ORIGIN, &BROWNIAN_TIMES, n, seed, averager)),
        Box::new(move |seed| brownian_suite(p(0.3, -0.2), &BROWNIAN_TIMES, n, seed, averager)),
    ])
}

pub fn statistical_checks(basis: &SpectralBasis, config: &SuiteConfig) -> Result<(Vec<CheckResult>, usize, usize)> {
    let averager = CircleAverager::new(basis, 4 * config.quad.angular_nodes);
    let mut out = Vec::new();
    let mut failed = 0;
    let mut retried = 0;
    for (g, group) in statistical_groups(&averager, config)?.iter().enumerate() {
        let seed = replicate_seed(config.seed, 1 + g as u64);
        let first = group(seed)?;
        let failures: Vec<String> = first.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
        out.extend(first);
        if failures.is_empty() {
            continue;
        }
        let second = group(replicate_seed(seed, u64::MAX))?;
        for mut c in second.into_iter().filter(|c| failures.contains(&c.name)) {
            retried += 1;
            if !c.passed {
                failed += 1;
            }
            c.name.push_str(" [retry]");
            out.push(c);
        }
    }
    Ok((out, failed, retried))
}

pub fn run_suite(suite: Suite, basis: &SpectralBasis, config: &SuiteConfig) -> Result<Report> {
    let mut checks = Vec::new();
    let mut failed = 0;
    let mut retried = 0;
    if matches!(suite, Suite::Deterministic | Suite::All) {
        let det = deterministic_checks(basis, config)?;
        failed += det.iter().filter(|c| !c.passed).count();
        checks.extend(det);
    }
    if matches!(suite, Suite::Statistical | Suite::All) {
        let (stat, f, r) = statistical_checks(basis, config)?;
        failed += f;
        retried += r;
        checks.extend(stat);
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    Ok(Report {
        summary: Summary {
            total: checks.len(),
            passed,
            failed,
            retried,
        },
        checks,
    })
}
