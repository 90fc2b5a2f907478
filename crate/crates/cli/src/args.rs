use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use deltaprime::convergence::{DEFAULT_HALF_WIDTH, DEFAULT_INTERIOR_NODES};
use deltaprime::resonance::{DEFAULT_ALPHA_MAX, DEFAULT_ALPHA_MIN, DEFAULT_CLASSIFY_TOL, DEFAULT_SCAN_STEP};

#[derive(Debug, Parser)]
#[command(
    name = "deltaprime",
    version,
    about = "Resonances, coupling and scattering for Schrödinger operators with δ′-like potentials",
    after_help = "Environment: DELTAPRIME_THREADS caps worker threads (0 = all cores)."
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Built-in profile: seba-quadratic, step or zero.
    #[arg(long, value_name = "NAME")]
    pub builtin: Option<String>,

    /// Profile JSON file.
    #[arg(long, value_name = "PATH")]
    pub profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub source: Source,

    /// Reflect the profile, ξ → -ξ (incidence from the right).
    #[arg(long)]
    pub mirror: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ∫Ψ and ∫ξΨ of a profile.
    Moments {
        #[command(flatten)]
        profile: ProfileArgs,
    },
    /// Boundary data of the fundamental solutions at ξ = 1.
    Shoot {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, value_parser = finite, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, value_parser = finite, default_value_t = 0.0, allow_hyphen_values = true)]
        kappa_sq: f64,
    },
    /// Resonant set in a window of α.
    Resonances {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, value_parser = finite, default_value_t = DEFAULT_ALPHA_MIN, allow_hyphen_values = true)]
        alpha_min: f64,
        #[arg(long, value_parser = finite, default_value_t = DEFAULT_ALPHA_MAX, allow_hyphen_values = true)]
        alpha_max: f64,
        #[arg(long, value_parser = finite, default_value_t = DEFAULT_SCAN_STEP, allow_hyphen_values = true)]
        scan_step: f64,
    },
    /// Coupling θ at a resonant α.
    Theta {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, value_parser = finite, allow_hyphen_values = true)]
        alpha: f64,
        /// Distance within which α is matched to a resonance.
        #[arg(long, value_parser = finite, default_value_t = DEFAULT_CLASSIFY_TOL, allow_hyphen_values = true)]
        tol: f64,
    },
    /// ε → 0 reflection and transmission.
    ScatterLimit {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, value_parser = finite, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, value_parser = finite, default_value_t = DEFAULT_CLASSIFY_TOL, allow_hyphen_values = true)]
        tol: f64,
    },
    /// Reflection and transmission at finite ε.
    ScatterEps {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, value_parser = finite, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, value_parser = finite, allow_hyphen_values = true)]
        k: f64,
        #[arg(long, value_parser = finite, allow_hyphen_values = true)]
        eps: f64,
    },
    /// Leading-order small-ϰ reflection and transmission.
    ScatterAsymptotic {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, value_parser = finite, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, value_parser = finite, allow_hyphen_values = true)]
        kappa: f64,
    },
    /// Resolvent distance between S_ε and its limit as ε decreases.
    Converge {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, value_parser = finite, allow_hyphen_values = true)]
        alpha: f64,
        /// Comma-separated, strictly decreasing.
        #[arg(long, value_parser = finite, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025")]
        eps: Vec<f64>,
        /// Interior grid nodes (even).
        #[arg(long, default_value_t = DEFAULT_INTERIOR_NODES)]
        nodes: usize,
        #[arg(long, value_parser = finite, default_value_t = DEFAULT_HALF_WIDTH)]
        half_width: f64,
        /// Real part of k².
        #[arg(long, value_parser = finite, default_value_t = 0.0, allow_hyphen_values = true)]
        k2_re: f64,
        /// Imaginary part of k²; must be nonzero.
        #[arg(long, value_parser = finite, default_value_t = 1.0, allow_hyphen_values = true)]
        k2_im: f64,
        #[arg(long, value_parser = finite, default_value_t = DEFAULT_CLASSIFY_TOL, allow_hyphen_values = true)]
        tol: f64,
    },
    /// Resonances of the quadratic profile on [0, 200] with θ and |T|².
    Table6,
    /// Write a profile as JSON.
    Export {
        #[command(flatten)]
        profile: ProfileArgs,
        /// Destination file; standard output when omitted.
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
}

fn finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a finite number, got {s}"))
    }
}
