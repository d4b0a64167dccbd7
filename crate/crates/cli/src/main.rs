use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use ewfkit::ewf::{ewf_decorrelate, ewf_polar, ewf_triangularize, EwfResult};
use ewfkit::mimosim::{run_experiment, ExperimentConfig};
use ewfkit::stats::whiteness_test;
use ewfkit::whitening::{
    check_swf, check_wf, random_swf, swf_cholesky, swf_eigen, whitening_residual, CovarianceModel, FilterKind,
    FilterRecord, WhiteningFilter,
};
use ewfkit::{rng, ComplexMatrix, Error};

const EXIT_SEMANTIC: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "ewfkit",
    version,
    about = "Whitening filters, extended whitening filters and MIMO detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a seeded random Hermitian positive-definite matrix.
    GenCov {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        dim: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10.0, value_parser = parse_condition)]
        condition_number: f64,
    },
    /// Build a standard whitening filter for a covariance.
    Whiten {
        #[arg(long)]
        cov: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a filter against a covariance.
    Verify {
        #[arg(long)]
        cov: PathBuf,
        #[arg(long)]
        filter: PathBuf,
        /// Also run a Monte Carlo whiteness test with this many samples.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the max-entry tolerance on `F·Σ·Fᴴ − I`.
        #[arg(long, value_parser = parse_positive)]
        tolerance: Option<f64>,
    },
    /// Build an extended whitening filter.
    Ewf {
        #[arg(long)]
        cov: PathBuf,
        #[arg(long, value_enum)]
        construction: ConstructionArg,
        #[arg(long)]
        secondary: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a MIMO detection experiment.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_json: PathBuf,
        #[arg(long)]
        out_csv: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Cholesky,
    Eigen,
    Random,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConstructionArg {
    Decorrelate,
    Triangularize,
    Polar,
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {s}"))
    }
}

fn parse_condition(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v >= 1.0 {
        Ok(v)
    } else {
        Err(format!("condition number must be at least 1, got {s}"))
    }
}

/// An error carrying the process exit code it maps to.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl Failure {
    fn input(err: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_INPUT,
            err: err.into(),
        }
    }
}

impl fmt::Debug for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.err)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InternalInvariantViolation(_) | Error::NoConvergence { .. } => EXIT_INTERNAL,
            _ => EXIT_INPUT,
        };
        Self { code, err: e.into() }
    }
}

type CmdResult = Result<u8, Failure>;

/// Rounds to 6 significant digits for terminal output.
fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.5e}")
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::input)?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(Failure::input)
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::input)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string(value).map_err(|e| Failure {
        code: EXIT_INTERNAL,
        err: e.into(),
    })?;
    text.push('\n');
    write_text(path, &text)
}

fn read_cov(path: &Path) -> Result<CovarianceModel, Failure> {
    let sigma: ComplexMatrix = read_json(path)?;
    CovarianceModel::new(&sigma)
        .with_context(|| format!("covariance in {}", path.display()))
        .map_err(|e| {
            let code = match e.downcast_ref::<Error>() {
                Some(Error::InternalInvariantViolation(_)) => EXIT_INTERNAL,
                _ => EXIT_INPUT,
            };
            Failure { code, err: e }
        })
}

/// Accepts either a filter record or a bare matrix.
fn read_filter(path: &Path) -> Result<ComplexMatrix, Failure> {
    let value: Value = read_json(path)?;
    if value.get("f").is_some() {
        let record: FilterRecord = serde_json::from_value(value)
            .with_context(|| format!("parsing filter record {}", path.display()))
            .map_err(Failure::input)?;
        Ok(record.f)
    } else {
        serde_json::from_value(value)
            .with_context(|| format!("parsing filter matrix {}", path.display()))
            .map_err(Failure::input)
    }
}

fn gen_cov(dim: u64, seed: u64, condition_number: f64, out: &Path) -> CmdResult {
    let dim = usize::try_from(dim).map_err(Failure::input)?;
    let sigma = rng::random_spd(dim, condition_number, seed)?;
    write_json(out, &sigma)?;
    Ok(0)
}

fn whiten(cov: &Path, method: Method, seed: u64, out: &Path) -> CmdResult {
    let cov = read_cov(cov)?;
    let filter = match method {
        Method::Cholesky => swf_cholesky(&cov)?,
        Method::Eigen => swf_eigen(&cov)?,
        Method::Random => random_swf(&cov, seed)?,
    };
    let residual = whitening_residual(filter.matrix(), cov.sigma())?;
    write_json(out, &FilterRecord::from(filter))?;
    println!("residual {}", sig6(residual));
    Ok(0)
}

fn verify(cov: &Path, filter: &Path, samples: Option<usize>, seed: u64, tolerance: Option<f64>) -> CmdResult {
    let cov = read_cov(cov)?;
    let f = read_filter(filter)?;
    let swf = check_swf(&f, &cov)?;
    let wf = check_wf(&f, &cov)?;
    let is_swf = match tolerance {
        Some(t) => swf.residual <= t,
        None => swf.is_swf,
    };
    let is_wf = match tolerance {
        Some(t) => wf.c > 0.0 && wf.residual <= t * wf.c * wf.c,
        None => wf.is_wf,
    };
    println!("is_swf {is_swf}");
    println!("is_wf {is_wf}");
    println!("c {}", sig6(wf.c));
    println!("residual {}", sig6(swf.residual));
    if let Some(n) = samples {
        if is_wf {
            let (kind, c) = if is_swf {
                (FilterKind::RotatedSwf, 1.0)
            } else {
                (FilterKind::ExtendedWf, wf.c)
            };
            // Certification re-checks against the library tolerance; a filter
            // accepted only through --tolerance may not pass it.
            match WhiteningFilter::certify(f, kind, c, &cov) {
                Ok(w) => {
                    let r = whiteness_test(&w, &cov, n, seed)?;
                    println!("whiteness {}", if r.pass { "pass" } else { "fail" });
                    println!("max_dev {}", sig6(r.max_dev));
                    println!("threshold {}", sig6(r.threshold));
                }
                Err(e) => println!("whiteness skipped: {e}"),
            }
        } else {
            println!("whiteness skipped: not a whitening filter");
        }
    }
    Ok(if is_swf { 0 } else { EXIT_SEMANTIC })
}

fn ewf(cov: &Path, construction: ConstructionArg, secondary: &Path, out: &Path) -> CmdResult {
    let primary = read_cov(cov)?;
    let result: EwfResult = match construction {
        ConstructionArg::Decorrelate => ewf_decorrelate(&primary, &read_cov(secondary)?)?,
        ConstructionArg::Triangularize => ewf_triangularize(&primary, &read_json(secondary)?)?,
        ConstructionArg::Polar => ewf_polar(&primary, &read_json(secondary)?)?,
    };
    let residual = result.structure_residual()?;
    write_json(out, &result)?;
    println!("structure_residual {}", sig6(residual));
    Ok(0)
}

fn simulate(config: &Path, out_json: &Path, out_csv: &Path) -> CmdResult {
    let config: ExperimentConfig = read_json(config)?;
    config.validate()?;
    let report = run_experiment(&config)?;
    write_json(out_json, &report)?;
    write_text(out_csv, &report.to_csv()?)?;
    let agree = report.min_agree_fraction();
    println!("points {}", report.points.len());
    println!("min_agree_fraction {}", sig6(agree));
    if agree < 1.0 {
        eprintln!("error: detector formulations disagreed");
        return Ok(EXIT_INTERNAL);
    }
    Ok(0)
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::GenCov {
            dim,
            seed,
            out,
            condition_number,
        } => gen_cov(dim, seed, condition_number, &out),
        Command::Whiten { cov, method, seed, out } => whiten(&cov, method, seed, &out),
        Command::Verify {
            cov,
            filter,
            samples,
            seed,
            tolerance,
        } => verify(&cov, &filter, samples, seed, tolerance),
        Command::Ewf {
            cov,
            construction,
            secondary,
            out,
        } => ewf(&cov, construction, &secondary, &out),
        Command::Simulate {
            config,
            out_json,
            out_csv,
        } => simulate(&config, &out_json, &out_csv),
    }
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>, Failure> {
    let Ok(raw) = std::env::var("EWFKIT_THREADS") else {
        return Ok(None);
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::input(anyhow::anyhow!(
            "EWFKIT_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| Failure {
            code: EXIT_INTERNAL,
            err: e.into(),
        })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = thread_pool().and_then(|pool| match pool {
        Some(pool) => pool.install(|| run(cli)),
        None => run(cli),
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
