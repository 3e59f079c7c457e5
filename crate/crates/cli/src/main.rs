//! `detlab`: run one verification and emit a JSON or CSV report.
//!
//! Exit status is 0 on success, 1 when a checked inequality fails and 2 on
//! usage or precision errors.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "detlab", version, about = "Hankel-minor positivity checks for the Riemann xi kernel")]
pub struct Cli {
    /// Working precision in decimal digits.
    #[arg(long, global = true, default_value_t = 100)]
    pub prec: u32,
    /// Report path (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Directory holding the moment cache.
    #[arg(long, global = true, env = "DETLAB_CACHE")]
    pub cache: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Grid bounds as exact decimals or fractions.
#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    #[arg(long)]
    pub u_min: Option<String>,
    #[arg(long)]
    pub u_max: Option<String>,
    #[arg(long)]
    pub step: Option<String>,
    /// Skip the bisection after a failing point.
    #[arg(long)]
    pub no_refine: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Derivatives of Phi, or of the m-th cumulant kernel.
    Phi {
        #[arg(long)]
        u: String,
        /// Highest derivative order.
        #[arg(long, default_value_t = 0)]
        j: usize,
        #[arg(long, default_value_t = 0)]
        m: usize,
    },
    /// Taylor coefficients beta_0..beta_n.
    Beta {
        #[arg(long, default_value_t = 30)]
        n: usize,
    },
    /// The minor D(n, r).
    Det {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
    },
    /// Turan inequalities for 1..=n.
    Turan {
        #[arg(long, default_value_t = 30)]
        n: usize,
    },
    /// Small-n minors for r = 2..=r-max.
    Exceptional {
        #[arg(long, default_value_t = 4)]
        r_max: usize,
    },
    /// Sign of eps_p w_p(u) over a grid for p = 1..=r.
    WronskianScan {
        #[arg(long, default_value_t = 4)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Smallest sign-regular cumulant order m(r) and eta(r).
    MrTable {
        #[arg(long, default_value_t = 9)]
        r_max: usize,
        #[arg(long, default_value_t = 6)]
        m_cap: usize,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// q(u, v) over a square grid.
    QScan {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// CV polynomials and their closed-form coefficients.
    Cvpoly {
        #[arg(long, default_value_t = 10)]
        k: usize,
    },
    /// eps_r W_r(y) and its vanishing pattern.
    WrPoly {
        #[arg(long)]
        r: usize,
    },
    /// Normalised Gamma determinant as a polynomial in 1/(2n).
    DeltaPoly {
        #[arg(long)]
        r: usize,
    },
    /// Zero pattern of the large-n expansion coefficients.
    Conj3 {
        #[arg(long)]
        r: usize,
    },
    /// Order-two Wronskian bound table at y = pi.
    BoundsLemma25,
    /// Xi(t) from the Taylor coefficients.
    Xi {
        #[arg(long)]
        t: String,
        /// Number of series terms.
        #[arg(long, default_value_t = 60)]
        n: usize,
    },
    /// Every acceptance criterion.
    VerifyAll {
        /// Comma-separated subset of criteria.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("detlab: {e}");
            ExitCode::from(2)
        }
    }
}
