use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod grid;
mod svg;
mod table;

use grid::{Linspace, StepRange};
use table::Format;

/// Spectral computations for the two-dimensional δ′ interface model with
/// oscillator coupling `β/y`.
#[derive(Parser, Debug)]
#[command(name = "deltaprime", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output format; csv unless the command says otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct BetaArgs {
    /// Coupling constant; repeat or comma-separate for several.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub beta: Vec<f64>,
    /// Inclusive range lo:hi:step of coupling constants.
    #[arg(long, value_name = "LO:HI:STEP")]
    pub beta_grid: Option<StepRange>,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// Target accuracy of each eigenvalue.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Initial truncation of the coefficient recurrence (default: from the decay rate).
    #[arg(long)]
    pub trunc: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MatrixKind {
    /// Zero-diagonal matrix J(ε) on levels 0..N.
    JEps,
    /// Limit matrix J₀ on levels 1..N.
    J0,
    /// Matrix J₀(μ) = DS + S*D + 2μY₀.
    J0Mu,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// All eigenvalues below 1/2, one row per eigenvalue.
    Spectrum {
        #[command(flatten)]
        betas: BetaArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Eigenvalue counts near the critical coupling against 1/(4√(2(μ−1))).
    ScanCritical {
        #[command(flatten)]
        betas: BetaArgs,
        /// μ = β/(2√2); repeat or comma-separate for several.
        #[arg(long, value_delimiter = ',')]
        mu: Vec<f64>,
        /// Inclusive range lo:hi:step of μ values.
        #[arg(long, value_name = "LO:HI:STEP")]
        mu_grid: Option<StepRange>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Ground state against 1/2 − 4/β⁴.
    WeakCoupling {
        #[command(flatten)]
        betas: BetaArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Eigenvalues of a truncated Jacobi matrix above a threshold.
    Jacobi {
        #[arg(long, value_enum)]
        matrix: MatrixKind,
        /// ε for J(ε), in (0, 1/2].
        #[arg(long)]
        eps: Option<f64>,
        /// μ for J₀(μ) and the default threshold of J(ε).
        #[arg(long)]
        mu: Option<f64>,
        /// Alternative to --mu.
        #[arg(long)]
        beta: Option<f64>,
        /// Matrix size N.
        #[arg(long, default_value_t = 2000)]
        trunc: usize,
        /// Count eigenvalues above this value (default: μ, 1, 0 for j-eps, j0, j0-mu).
        #[arg(long, allow_negative_numbers = true)]
        threshold: Option<f64>,
        /// Number of eigenvalues above the threshold to list.
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Form bound on seeded random trial states and the weak-coupling witness.
    FormsCheck {
        #[command(flatten)]
        betas: BetaArgs,
        /// Random states per coupling constant.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Samples an eigenfunction on a tensor grid.
    Field {
        #[arg(long)]
        beta: f64,
        /// Eigenvalue index, 1 for the ground state.
        #[arg(long, default_value_t = 1)]
        index: usize,
        #[arg(long, value_name = "LO:HI:POINTS", default_value = "-5:5:201")]
        x_grid: Linspace,
        #[arg(long, value_name = "LO:HI:POINTS", default_value = "-5:5:201")]
        y_grid: Linspace,
        /// Metadata file for CSV output (default: --out with a .json extension).
        #[arg(long)]
        sidecar: Option<PathBuf>,
        /// Also render |Ψ| as an SVG heat map.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Runs every invariant check; exit status 1 if any fails.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true)]
        bound_constant: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Spectrum { betas, solver, output } => commands::spectrum(&betas, &solver, &output),
        Command::ScanCritical {
            betas,
            mu,
            mu_grid,
            solver,
            output,
        } => commands::scan_critical(&betas, &mu, mu_grid.as_ref(), &solver, &output),
        Command::WeakCoupling { betas, solver, output } => commands::weak_coupling(&betas, &solver, &output),
        Command::Jacobi {
            matrix,
            eps,
            mu,
            beta,
            trunc,
            threshold,
            n_max,
            output,
        } => commands::jacobi(
            &commands::JacobiRequest {
                matrix,
                eps,
                mu,
                beta,
                size: trunc,
                threshold,
                n_max,
            },
            &output,
        ),
        Command::FormsCheck {
            betas,
            samples,
            seed,
            output,
        } => commands::forms_check(&betas, samples, seed, &output),
        Command::Field {
            beta,
            index,
            x_grid,
            y_grid,
            sidecar,
            svg,
            solver,
            output,
        } => commands::field(
            &commands::FieldRequest {
                beta,
                index,
                xs: x_grid.0,
                ys: y_grid.0,
                sidecar,
                svg,
            },
            &solver,
            &output,
        ),
        Command::Verify {
            seed,
            bound_constant,
            output,
        } => commands::verify(seed, bound_constant, &output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
