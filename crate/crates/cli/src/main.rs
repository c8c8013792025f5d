//! `adoheston` command-line front end.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::PricingModel;

#[derive(Debug, Parser)]
#[command(
    name = "adoheston",
    version,
    about = "ADO-Heston skew, simulation and pricing tools"
)]
pub struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Seed for Monte Carlo commands.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Run every batch sequentially.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ATM skew and its analytic bound over (H, T) grids; CSV `H,T,skew,upper_bound`.
    SkewCurve {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Analytic skew bound only; CSV `H,T,upper_bound`.
    SkewBound {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Power-law fits of skew curves; JSON.
    Fit {
        /// CSV with columns `H,T,skew` (extra columns ignored); computed from
        /// the configuration when omitted.
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Forward-start ATM skew; CSV `H,s,Tbar,skew`.
    FwdSkew {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        quad: QuadArgs,
        /// Determination date.
        #[arg(long)]
        s: Option<f64>,
        /// Smallest horizon T - s.
        #[arg(long)]
        tbar_min: Option<f64>,
        /// Largest horizon T - s.
        #[arg(long)]
        tbar_max: Option<f64>,
        /// Number of log-spaced horizons.
        #[arg(long)]
        n_tbar: Option<usize>,
    },
    /// Deterministic drift ODE with ζ(h) = α·h; CSV `t,v,V`.
    DriftPath {
        #[command(flatten)]
        model: ModelArgs,
        /// Slope α of ζ(h) = α·h.
        #[arg(long)]
        alpha: Option<f64>,
        /// First grid time (must be positive).
        #[arg(long)]
        t0: Option<f64>,
        /// Last grid time.
        #[arg(long)]
        t_end: Option<f64>,
        /// Number of RK4 steps.
        #[arg(long)]
        n_steps: Option<usize>,
    },
    /// Monte Carlo of the risk-neutral dynamics; CSV `path,t,F,v,V,h`.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Number of paths.
        #[arg(long)]
        n_paths: Option<usize>,
        /// Time steps to maturity (at least 8).
        #[arg(long)]
        n_steps: Option<usize>,
        /// Horizon of the simulation.
        #[arg(long)]
        maturity: Option<f64>,
        /// Indicator cutoff (default: first grid time).
        #[arg(long)]
        sim_eps: Option<f64>,
        /// Use ζ(h) = α·h instead of a constant ζ.
        #[arg(long)]
        alpha: Option<f64>,
        /// Keep every n-th time step in the output.
        #[arg(long)]
        record_stride: Option<usize>,
    },
    /// Carr–Madan forward-start call prices; CSV `K,price` (plus
    /// `closed_form` for the Black–Scholes model).
    PriceFwd {
        #[command(flatten)]
        model: ModelArgs,
        /// Characteristic function used by the FFT.
        #[arg(long, value_enum)]
        pricing_model: Option<PricingModel>,
        /// Determination date.
        #[arg(long)]
        s: Option<f64>,
        /// Option maturity T > s.
        #[arg(long)]
        maturity: Option<f64>,
        /// Comma-separated strikes.
        #[arg(long, value_delimiter = ',')]
        strikes: Option<Vec<f64>>,
        /// Smallest strike of a uniform strike grid (ignored with --strikes).
        #[arg(long)]
        k_min: Option<f64>,
        /// Largest strike of the uniform strike grid.
        #[arg(long)]
        k_max: Option<f64>,
        /// Number of strikes in the uniform grid.
        #[arg(long)]
        n_strikes: Option<usize>,
        /// FFT length (power of two).
        #[arg(long)]
        fft_n: Option<usize>,
        /// Frequency spacing of the FFT grid.
        #[arg(long)]
        eta: Option<f64>,
        /// Damping exponent.
        #[arg(long)]
        damping: Option<f64>,
        /// Paths used for the variance at the determination date (ADO model).
        #[arg(long)]
        n_paths: Option<usize>,
        /// Time steps to the determination date (ADO model).
        #[arg(long)]
        n_steps: Option<usize>,
    },
}

/// Model parameter overrides shared by all commands.
#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    /// Hurst exponents, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub hurst: Option<Vec<f64>>,
    /// Mean-reversion speed κ.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Volatility of variance ξ.
    #[arg(long)]
    pub xi: Option<f64>,
    /// Spot-variance correlation ρ.
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Constant market price of risk ζ.
    #[arg(long, allow_negative_numbers = true)]
    pub zeta: Option<f64>,
    /// Implied-volatility level I.
    #[arg(long)]
    pub implied_vol: Option<f64>,
    /// Indicator cutoff ε of the drift.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Initial variance (default I²).
    #[arg(long)]
    pub v0: Option<f64>,
    /// Initial value of the ADO factor.
    #[arg(long, allow_negative_numbers = true)]
    pub vv0: Option<f64>,
    /// Initial forward.
    #[arg(long)]
    pub f0: Option<f64>,
    /// Interest rate.
    #[arg(long, allow_negative_numbers = true)]
    pub r: Option<f64>,
    /// Dividend yield.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Variance in the skew integrand (default I²).
    #[arg(long)]
    pub skew_variance: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct GridArgs {
    /// Smallest maturity.
    #[arg(long)]
    pub t_min: Option<f64>,
    /// Largest maturity.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of log-spaced maturities.
    #[arg(long)]
    pub n_t: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct QuadArgs {
    /// Upper limit of the skew integral (automatic when omitted).
    #[arg(long)]
    pub u_max: Option<f64>,
    /// Relative tolerance of the adaptive quadrature.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Subdivision budget of the adaptive quadrature.
    #[arg(long)]
    pub max_subdivisions: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, flags or input data.
    Input(String),
    Lib(adoheston::Error),
    Io(std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<adoheston::Error> for CliError {
    fn from(e: adoheston::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
