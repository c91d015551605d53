//! The `gff-disk` command line.
//!
//! Every subcommand resolves a [`RunConfig`] from flags, an optional JSON
//! config file and the defaults, in that order of precedence, and writes its
//! result to `--out` or standard output. Exit codes: 0 success, 1 failed
//! verification, 2 usage error, 3 I/O error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::circles::{
    closed_cov, exact_cov, theorem2_bound, brownian_path_with, CircleAverager, CovarianceQuery, Regime,
    EXACT_COV_NODES,
};
use crate::error::{Error, Result};
use crate::field::{coeffs_json, FieldSample};
use crate::format::{fmt_real, Real};
use crate::poincare::DiskPoint;
use crate::quadrature::QuadratureSpec;
use crate::spectral::SpectralBasis;
use crate::verify::{run_suite, Suite, SuiteConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Deterministic,
    Statistical,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Deterministic => Suite::Deterministic,
            SuiteArg::Statistical => Suite::Statistical,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gff-disk", version, about = "Gaussian free field on the Poincaré disk")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    /// Largest angular frequency n in the basis [default: 24]
    #[arg(long, global = true)]
    pub n_max: Option<usize>,
    /// Number of radial modes k per frequency [default: 24]
    #[arg(long, global = true)]
    pub k_max: Option<usize>,
    /// Random seed [default: 1]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Gauss–Legendre nodes in r for disk integrals [default: 64]
    #[arg(long, global = true)]
    pub quad_radial: Option<usize>,
    /// Trapezoid nodes in θ for disk integrals [default: 256]
    #[arg(long, global = true)]
    pub quad_angular: Option<usize>,
    /// Output format [default: csv]
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Output file; standard output when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON file with any of the above settings
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the basis manifest: zeros, eigenvalues and normalizations
    Basis,
    /// Draw a field sample and write its coefficients
    Sample,
    /// Draw a field sample and evaluate it on a square lattice
    Grid {
        /// Lattice points per side, corners included
        #[arg(long, default_value_t = 101)]
        resolution: usize,
    },
    /// Tabulate exact and closed-form covariances for a CSV of circle pairs
    Cov {
        /// CSV with columns z1x,z1y,rho1,z2x,z2y,rho2 (header optional)
        queries: PathBuf,
    },
    /// Sample B_t = circle average at radius artanh(e^-t)
    Brownian {
        /// Center as x,y
        #[arg(long, default_value = "0,0", value_parser = parse_point)]
        z0: DiskPoint,
        /// Comma-separated increasing positive times
        #[arg(long, value_delimiter = ',', required = true)]
        times: Vec<f64>,
        /// Prepend the point (0, 0)
        #[arg(long)]
        origin: bool,
    },
    /// Run verification suites and write the report
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        /// Monte Carlo replicates for the statistical suite
        #[arg(long, default_value_t = 10_000)]
        replicates: usize,
    },
}

fn parse_point(s: &str) -> std::result::Result<DiskPoint, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let x: f64 = x.trim().parse().map_err(|e| format!("{x:?}: {e}"))?;
    let y: f64 = y.trim().parse().map_err(|e| format!("{y:?}: {e}"))?;
    DiskPoint::new(x, y).map_err(|e| e.to_string())
}

/// Settings accepted in the `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n_max: Option<usize>,
    pub k_max: Option<usize>,
    pub seed: Option<u64>,
    pub quad_radial: Option<usize>,
    pub quad_angular: Option<usize>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n_max: usize,
    pub k_max: usize,
    pub seed: u64,
    pub quad: QuadratureSpec,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_max: 24,
            k_max: 24,
            seed: 1,
            quad: QuadratureSpec::default(),
            format: OutputFormat::Csv,
            out: None,
        }
    }
}

/// Why a command stopped; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Io(String),
    Checks,
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Io(_) => EXIT_IO,
            Failure::Checks => EXIT_CHECK_FAILED,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Io(e.to_string()),
            Error::Csv(ref c) if matches!(c.kind(), csv::ErrorKind::Io(_)) => Failure::Io(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl RunConfig {
    pub fn resolve(args: &GlobalArgs) -> std::result::Result<Self, Failure> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Io(format!("reading {}: {e}", path.display())))?;
                serde_json::from_str::<FileConfig>(&text)
                    .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let d = RunConfig::default();
        let config = RunConfig {
            n_max: args.n_max.or(file.n_max).unwrap_or(d.n_max),
            k_max: args.k_max.or(file.k_max).unwrap_or(d.k_max),
            seed: args.seed.or(file.seed).unwrap_or(d.seed),
            quad: QuadratureSpec {
                radial_nodes: args.quad_radial.or(file.quad_radial).unwrap_or(d.quad.radial_nodes),
                angular_nodes: args.quad_angular.or(file.quad_angular).unwrap_or(d.quad.angular_nodes),
            },
            format: args.format.or(file.format).unwrap_or(d.format),
            out: args.out.clone().or(file.out),
        };
        if config.k_max == 0 {
            return Err(Failure::Usage(String::from("--k-max must be positive")));
        }
        config.quad.validate(config.n_max)?;
        Ok(config)
    }

    fn basis(&self) -> Result<SpectralBasis> {
        SpectralBasis::build(self.n_max, self.k_max)
    }
}

fn emit(config: &RunConfig, text: &str) -> std::result::Result<(), Failure> {
    let io = |p: &Path, e: std::io::Error| Failure::Io(format!("writing {}: {e}", p.display()));
    match &config.out {
        Some(path) => std::fs::write(path, text).map_err(|e| io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| io(Path::new("<stdout>"), e))
        }
    }
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn csv_text<F>(header: &[&str], write_rows: F) -> Result<String>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    write_rows(&mut w)?;
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn cmd_basis(config: &RunConfig) -> Result<String> {
    let manifest = config.basis()?.manifest();
    match config.format {
        OutputFormat::Json => json(&manifest),
        OutputFormat::Csv => csv_text(&["n", "parity", "k", "zero", "eigenvalue", "norm_const"], |w| {
            for m in &manifest {
                w.write_record([
                    m.n.to_string(),
                    m.parity.to_string(),
                    m.k.to_string(),
                    fmt_real(m.zero.0),
                    fmt_real(m.eigenvalue.0),
                    fmt_real(m.norm_const.0),
                ])?;
            }
            Ok(())
        }),
    }
}

pub fn cmd_sample(config: &RunConfig) -> Result<String> {
    let basis = config.basis()?;
    let s = FieldSample::sample(&basis, config.seed);
    match config.format {
        OutputFormat::Json => {
            let mut text = coeffs_json(&s)?;
            text.push('\n');
            Ok(text)
        }
        OutputFormat::Csv => csv_text(&["j", "n", "parity", "k", "coeff"], |w| {
            for (j, (m, a)) in basis.modes().iter().zip(s.coeffs()).enumerate() {
                w.write_record([j.to_string(), m.n.to_string(), m.parity.to_string(), m.k.to_string(), fmt_real(*a)])?;
            }
            Ok(())
        }),
    }
}

pub fn cmd_grid(config: &RunConfig, resolution: usize) -> Result<String> {
    let basis = config.basis()?;
    let grid = FieldSample::sample(&basis, config.seed).grid(resolution)?;
    match config.format {
        OutputFormat::Json => {
            let mut text = grid.to_json()?;
            text.push('\n');
            Ok(text)
        }
        OutputFormat::Csv => Ok(grid.to_csv()),
    }
}

/// Reads `z1x,z1y,rho1,z2x,z2y,rho2` rows; a first row that does not parse
/// as numbers is taken as a header.
pub fn read_queries(path: &Path) -> Result<Vec<CovarianceQuery>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 6 {
            return Err(Error::domain(
                "cov",
                format!("line {}: expected 6 columns, got {}", line + 1, record.len()),
            ));
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let v = match parsed {
            Ok(v) => v,
            Err(_) if line == 0 => continue,
            Err(e) => return Err(Error::domain("cov", format!("line {}: {e}", line + 1))),
        };
        out.push(CovarianceQuery::new(
            DiskPoint::new(v[0], v[1])?,
            v[2],
            DiskPoint::new(v[3], v[4])?,
            v[5],
        )?);
    }
    Ok(out)
}

#[derive(Serialize)]
struct CovRow {
    z1x: Real,
    z1y: Real,
    rho1: Real,
    z2x: Real,
    z2y: Real,
    rho2: Real,
    regime: Regime,
    exact: Real,
    closed: Option<Real>,
    bound: Real,
}

pub fn cmd_cov(config: &RunConfig, queries: &Path) -> Result<String> {
    let queries = read_queries(queries)?;
    let mut rows = Vec::with_capacity(queries.len());
    for q in &queries {
        let closed = match q.regime() {
            Regime::Overlapping => None,
            _ => Some(Real(closed_cov(q)?)),
        };
        rows.push(CovRow {
            z1x: Real(q.z1.x()),
            z1y: Real(q.z1.y()),
            rho1: Real(q.rho1),
            z2x: Real(q.z2.x()),
            z2y: Real(q.z2.y()),
            rho2: Real(q.rho2),
            regime: q.regime(),
            exact: Real(exact_cov(q, EXACT_COV_NODES)?),
            closed,
            bound: Real(theorem2_bound(q)),
        });
    }
    match config.format {
        OutputFormat::Json => json(&rows),
        OutputFormat::Csv => csv_text(
            &["z1x", "z1y", "rho1", "z2x", "z2y", "rho2", "regime", "exact", "closed", "bound"],
            |w| {
                for r in &rows {
                    w.write_record([
                        fmt_real(r.z1x.0),
                        fmt_real(r.z1y.0),
                        fmt_real(r.rho1.0),
                        fmt_real(r.z2x.0),
                        fmt_real(r.z2y.0),
                        fmt_real(r.rho2.0),
                        r.regime.to_string(),
                        fmt_real(r.exact.0),
                        r.closed.map(|c| fmt_real(c.0)).unwrap_or_default(),
                        fmt_real(r.bound.0),
                    ])?;
                }
                Ok(())
            },
        ),
    }
}

#[derive(Serialize)]
struct PathPoint {
    t: Real,
    #[serde(rename = "B_t")]
    b: Real,
}

pub fn cmd_brownian(config: &RunConfig, z0: DiskPoint, times: &[f64], origin: bool) -> Result<String> {
    let basis = config.basis()?;
    let s = FieldSample::sample(&basis, config.seed);
    let averager = CircleAverager::new(&basis, 4 * config.quad.angular_nodes);
    let values = brownian_path_with(&averager, &s, z0, times)?;
    let mut path: Vec<(f64, f64)> = times.iter().copied().zip(values).collect();
    if origin {
        path.insert(0, (0.0, 0.0));
    }
    match config.format {
        OutputFormat::Json => json(&path.iter().map(|&(t, b)| PathPoint { t: Real(t), b: Real(b) }).collect::<Vec<_>>()),
        OutputFormat::Csv => Ok(path
            .iter()
            .map(|&(t, b)| format!("{},{}\n", fmt_real(t), fmt_real(b)))
            .collect()),
    }
}

/// Returns the report text and whether every check passed.
pub fn cmd_verify(config: &RunConfig, suite: Suite, replicates: usize) -> Result<(String, bool)> {
    if replicates < crate::verify::statistical::MIN_REPLICATES {
        return Err(Error::domain(
            "verify",
            format!(
                "need at least {} replicates, got {replicates}",
                crate::verify::statistical::MIN_REPLICATES
            ),
        ));
    }
    let basis = config.basis()?;
    let suite_config = SuiteConfig {
        seed: config.seed,
        quad: config.quad,
        replicates,
    };
    let report = run_suite(suite, &basis, &suite_config)?;
    let text = match config.format {
        OutputFormat::Json => report.to_json()?,
        OutputFormat::Csv => report.to_csv()?,
    };
    Ok((text, report.success()))
}

pub fn execute(cli: &Cli) -> std::result::Result<(), Failure> {
    let config = RunConfig::resolve(&cli.global)?;
    let text = match &cli.command {
        Command::Basis => cmd_basis(&config)?,
        Command::Sample => cmd_sample(&config)?,
        Command::Grid { resolution } => cmd_grid(&config, *resolution)?,
        Command::Cov { queries } => cmd_cov(&config, queries)?,
        Command::Brownian { z0, times, origin } => cmd_brownian(&config, *z0, times, *origin)?,
        Command::Verify { suite, replicates } => {
            let (text, ok) = cmd_verify(&config, (*suite).into(), *replicates)?;
            emit(&config, &text)?;
            return if ok { Ok(()) } else { Err(Failure::Checks) };
        }
    };
    emit(&config, &text)
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            match &f {
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Io(msg) => eprintln!("I/O error: {msg}"),
                Failure::Checks => eprintln!("verification failed"),
            }
            f.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("gff-disk").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn defaults_and_precedence() {
        let cli = parse(&["basis"]);
        assert_eq!(RunConfig::resolve(&cli.global).unwrap(), RunConfig::default());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"n_max": 3, "k_max": 5, "seed": 9, "format": "json"}"#).unwrap();
        let p = path.to_str().unwrap();
        let cli = parse(&["--config", p, "--k-max", "2", "basis"]);
        let c = RunConfig::resolve(&cli.global).unwrap();
        assert_eq!((c.n_max, c.k_max, c.seed, c.format), (3, 2, 9, OutputFormat::Json));

        std::fs::write(&path, r#"{"bogus": 1}"#).unwrap();
        let cli = parse(&["--config", p, "basis"]);
        assert!(matches!(RunConfig::resolve(&cli.global), Err(Failure::Usage(_))));
    }

    #[test]
    fn usage_errors() {
        let cli = parse(&["--k-max", "0", "basis"]);
        assert_eq!(RunConfig::resolve(&cli.global).unwrap_err().exit_code(), EXIT_USAGE);
        assert_eq!(run(["gff-disk", "nonsense"]), EXIT_USAGE);
        assert_eq!(run(["gff-disk", "brownian", "--z0", "2,0", "--times", "1"]), EXIT_USAGE);
        let cli = parse(&["--config", "/nonexistent/c.json", "basis"]);
        assert_eq!(RunConfig::resolve(&cli.global).unwrap_err().exit_code(), EXIT_IO);
    }

    #[test]
    fn basis_manifest() {
        let c = RunConfig {
            n_max: 0,
            k_max: 1,
            ..RunConfig::default()
        };
        let text = cmd_basis(&c).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("0,cos,1,2.40482555769577"));
    }

    #[test]
    fn query_file_with_and_without_header() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        std::fs::write(&a, "z1x,z1y,rho1,z2x,z2y,rho2\n0,0,0.5,0.1,0,0.5\n").unwrap();
        let b = dir.path().join("b.csv");
        std::fs::write(&b, "0,0,0.5,0.1,0,0.5\n0.2,0,0.3,-0.2,0,0.3\n").unwrap();
        assert_eq!(read_queries(&a).unwrap().len(), 1);
        assert_eq!(read_queries(&b).unwrap().len(), 2);
        let bad = dir.path().join("c.csv");
        std::fs::write(&bad, "0,0,0.5,0.1,0,0.5\n0,0,x,0,0,1\n").unwrap();
        assert!(read_queries(&bad).is_err());
    }
}
