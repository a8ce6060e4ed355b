//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "lrchain",
    version,
    about = "Two-party entanglement in a long-range p-wave fermion chain"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// `key = value` file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Absolute tolerance on each correlator `G_x` [default: 1e-10].
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Largest separation `d` evaluated in profiles [default: 400].
    #[arg(long, global = true)]
    pub dmax: Option<usize>,
    /// Worker threads for sweeps and validation [default: all cores].
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory [default: lrchain-out].
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

/// Hamiltonian couplings. Missing values come from the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Chemical potential.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// Hopping amplitude [default: 1].
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Pairing amplitude.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Hopping decay rate.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Pairing decay rate.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Tie the pairing decay rate to the hopping decay rate (beta = alpha).
    #[arg(long)]
    pub lock_beta: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate ε₁(k), ε₂(k) and E(k), and locate the global gap.
    Dispersion {
        #[command(flatten)]
        params: ParamArgs,
        /// Momenta sampled on [-π, π] [default: 513].
        #[arg(long)]
        points: Option<usize>,
    },
    /// Analytic phase boundaries α* (and μ* when --alpha is given).
    Boundary {
        #[command(flatten)]
        params: ParamArgs,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Concurrence profile C_d, truncation lengths, totals and bound checks.
    Profile {
        #[command(flatten)]
        params: ParamArgs,
        /// Evaluate every d up to --dmax instead of stopping once C_d has vanished.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Block entropy S_A(L) and the central-charge fit.
    Entropy {
        #[command(flatten)]
        params: ParamArgs,
        /// Largest block [default: 256].
        #[arg(long)]
        lmax: Option<usize>,
        /// Smallest block inside the fit window [default: 32].
        #[arg(long)]
        fit_min: Option<usize>,
        /// Largest block inside the fit window [default: --lmax].
        #[arg(long)]
        fit_max: Option<usize>,
    },
    /// Derivative fits ∂C_d/∂x ≃ k_d ln|x − x*| and k_d = q d + q′.
    Scaling {
        #[command(flatten)]
        params: ParamArgs,
        /// Coupling varied across the transition: alpha or mu [default: alpha].
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated separations [default: 1,2,3,4,5,6,7,8].
        #[arg(long)]
        distances: Option<String>,
        /// below, above or both [default: both].
        #[arg(long)]
        side: Option<String>,
        /// Finite-difference step [default: 1e-4].
        #[arg(long)]
        step: Option<f64>,
        /// Lower end of the window in ln|x − x*| [default: -9].
        #[arg(long, allow_hyphen_values = true)]
        window_lo: Option<f64>,
        /// Upper end of the window in ln|x − x*| [default: -4].
        #[arg(long, allow_hyphen_values = true)]
        window_hi: Option<f64>,
        /// Samples per side [default: 16].
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Validate closed forms against finite-ring exact diagonalization.
    OracleCheck {
        /// Ring size [default: 512].
        #[arg(long)]
        n_sites: Option<usize>,
        /// Gapped parameter draws [default: 10].
        #[arg(long)]
        draws: Option<usize>,
        /// Largest |x| compared for G_x [default: 20].
        #[arg(long)]
        xmax: Option<usize>,
        /// Random X-states for the concurrence check [default: 10000].
        #[arg(long)]
        x_states: Option<usize>,
        /// Largest d for the Wick reconstruction check [default: 8].
        #[arg(long)]
        wick_dmax: Option<usize>,
    },
    /// Evaluate quantities over a one- or two-parameter grid.
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        /// First axis as name:start:stop:steps, e.g. mu:-30:10:81.
        #[arg(long, allow_hyphen_values = true)]
        x_axis: Option<String>,
        /// Optional second axis, same format.
        #[arg(long, allow_hyphen_values = true)]
        y_axis: Option<String>,
        /// Comma-separated subset of gap,xi,profile,entropy [default: gap].
        #[arg(long)]
        quantities: Option<String>,
        /// Refuse grids with more points than this [default: 100000].
        #[arg(long)]
        max_points: Option<usize>,
        /// Largest block for the entropy quantity [default: 128].
        #[arg(long)]
        lmax: Option<usize>,
    },
}
