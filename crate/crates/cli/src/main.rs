mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;
use twm_core::bump::Bump;
use twm_core::moments::Prop31Shape;

/// Experiments on central values of quadratic twists of the discriminant
/// modular form Δ.
///
/// JSON reports go to --out (or stdout) as {"command", "config", "report",
/// "meta"}; only "meta" (timing, thread count, cache location) varies
/// between identical runs. Errors are reported as JSON on stderr with exit
/// codes 2 (usage), 3 (out-of-range input), 4 (corrupt cache), 5
/// (computation failed), 6 (I/O).
#[derive(Debug, Parser)]
#[command(name = "twm", version, args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Family size: twists 8d ≤ X
    #[arg(long = "X")]
    pub x: Option<f64>,
    /// Mollifier length
    #[arg(long = "U")]
    pub u: Option<f64>,
    #[arg(long = "U1")]
    pub u1: Option<f64>,
    #[arg(long = "U2")]
    pub u2: Option<f64>,
    /// Truncation accuracy of each L-value, in [1e-15, 1e-6]
    #[arg(long, default_value_t = 1e-9)]
    pub eps: f64,
    /// Primes p ≤ this enter the Euler products of the moment constant
    #[arg(long, default_value_t = 100_000)]
    pub prime_cutoff: u64,
    /// Worker threads (default: one per core)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Seed for randomized checks
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the main output here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory of cached coefficient tables
    #[arg(long, env = "TWM_CACHE_DIR", default_value = ".twm_cache")]
    pub cache_dir: PathBuf,
    /// File of `key = value` lines using the long flag names; flags given on
    /// the command line take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expand (or load) Δ's coefficient table and check its invariants.
    ///
    /// CSV (--csv): n, lambda
    Coeffs {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1_048_575)]
        n_max: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// The second-moment constant c = (2/π²) L(1, sym²Δ)³ Z₂(0, 0).
    Constant {
        #[command(flatten)]
        common: Common,
    },
    /// Central values L(½, Δ⊗χ_{8d}) for all 8d ≤ X.
    ///
    /// CSV: d, 8d, L, N_trunc, tail_bound
    Lvalues {
        #[command(flatten)]
        common: Common,
    },
    /// Σ L(½)² over 8d ≤ X against c·X·log X (smoothed by F when --f is given).
    ///
    /// CSV (--csv): d, 8d, L, N_trunc, tail_bound
    Moment {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        f: Option<Bump>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Brute-force twisted sum against its diagonal main term.
    Prop31 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "bump_a")]
        f: Bump,
        #[arg(long, value_enum, default_value = "product")]
        shape: ShapeArg,
    },
    /// Cauchy–Schwarz lower bound (Σ L𝓐_U F)² / (Σ 𝓐_U² F · Σ L² F).
    Lowerbound {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "bump_b")]
        f: Bump,
    },
    /// Smoothed second moments of 𝓐_U and 𝓑_U = L − 𝓐_U.
    Absplit {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "bump_b")]
        f: Bump,
    },
    /// Statistics of log|L(½+z₁)L(½+z₂)| and the counts N(V).
    ///
    /// CSV (--csv): d, 8d, log_abs_product (empty when an L-value vanished)
    Distribution {
        #[command(flatten)]
        common: Common,
        /// Shift as `re` or `re,im`
        #[arg(long, default_value = "0")]
        z1: String,
        #[arg(long, default_value = "0")]
        z2: String,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Closed-form Gauss sums against direct summation.
    ///
    /// CSV: n, k, abs_diff, bound (the worst k for each odd n; bound = 1e-8·(1+n))
    GaussSelftest {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2000)]
        n_max: i64,
        #[arg(long, default_value_t = 50)]
        k_max: i64,
    },
    /// Twisted Poisson summation for odd n ≤ n-max.
    ///
    /// CSV: n, Z, F, residual
    PoissonCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 99)]
        n_max: i64,
        #[arg(long = "Z", value_delimiter = ',', default_value = "100,1000")]
        z: Vec<f64>,
        /// Only this test function (default: both)
        #[arg(long)]
        f: Option<Bump>,
    },
    /// Quadratic large sieve ratio for random coefficients.
    SieveCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long = "M", default_value_t = 500)]
        m: usize,
        #[arg(long = "N", default_value_t = 500)]
        n: usize,
    },
    /// 2k-th moments of Σ a(p)χ_d(p)p^{−1/2} for random unit a(p).
    Polymoment {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20.0)]
        y: f64,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = 10)]
        draws: usize,
        /// Record rather than reject y^k > √X/log X
        #[arg(long)]
        report_only: bool,
    },
    /// Σ |L(σ+it₁)L(σ+it₂)| / (X √log X) over pairs of heights.
    Decorrelation {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
        #[arg(long = "t", value_delimiter = ',', default_value = "0,1,2,5")]
        t: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum ShapeArg {
    Product,
    Mollifier,
}

impl From<ShapeArg> for Prop31Shape {
    fn from(s: ShapeArg) -> Self {
        match s {
            ShapeArg::Product => Prop31Shape::Product,
            ShapeArg::Mollifier => Prop31Shape::Mollifier,
        }
    }
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, kind: "usage", message: message.into() }
    }
    pub fn range(message: impl Into<String>) -> Self {
        Self { code: 3, kind: "range", message: message.into() }
    }
    pub fn io(message: impl Into<String>) -> Self {
        Self { code: 6, kind: "io", message: message.into() }
    }
}

impl From<twm_core::Error> for Failure {
    fn from(e: twm_core::Error) -> Self {
        use twm_core::Error as E;
        let message = e.to_string();
        let (code, kind) = match e.root() {
            E::InvalidInput(_) | E::Hypothesis(_) | E::Overflow { .. } | E::Truncation { .. } => (3, "range"),
            E::CacheCorrupt(_) => (4, "cache"),
            E::Io(_) => (6, "io"),
            _ => (5, "computation"),
        };
        Self { code, kind, message }
    }
}

fn fail(f: Failure) -> ExitCode {
    eprintln!("{}", json!({ "error": f.kind, "message": f.message, "exit_code": f.code }));
    ExitCode::from(f.code)
}

fn main() -> ExitCode {
    let args: Vec<OsString> = std::env::args_os().collect();
    let args = match config::config_path(&args) {
        Some(path) => match config::load(path.as_ref()) {
            Ok(extra) => config::splice(args, extra),
            Err(config::ConfigError::Io(e)) => {
                return fail(Failure::io(format!("reading config {}: {e}", path.to_string_lossy())))
            }
            Err(config::ConfigError::Syntax { line, text }) => {
                return fail(Failure::usage(format!("config line {line} is not `key = value`: {text}")))
            }
        },
        None => args,
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return fail(Failure::usage(e.render().to_string().trim().trim_start_matches("error: ")));
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(f),
    }
}
