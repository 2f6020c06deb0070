mod commands;
mod error;
mod input;

use clap::{Args, Parser, Subcommand, ValueEnum};
use commands::{AtomFormat, CheckArgs, MaArgs, Suite};
use error::{CliError, CliResult};
use input::{parse_params, write_text};
use std::path::PathBuf;
use std::process::ExitCode;

/// Generalized Gaussian volumes, surface measures and Minkowski-type problems.
///
/// Exit codes: 0 success, 1 failed check, 2 input error, 3 precondition
/// violated, 4 no convergence.
#[derive(Debug, Parser)]
#[command(name = "gengauss", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Density and problem parameters as n,alpha,q,p.
    #[arg(long)]
    params: String,
    /// Grid size: facets for named shapes, samples for planar fields.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Main tolerance of the command.
    #[arg(long)]
    tol: Option<f64>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// G(K) with an error estimate.
    Volume {
        #[command(flatten)]
        common: Common,
        /// Body JSON: {"facets": [...]}, {"shape": "ball", "radius": r} or {"shape": "cube", "half": s}.
        #[arg(long)]
        body: PathBuf,
    },
    /// Atoms of the L_p weighted surface measure (p from --params).
    SurfaceMeasure {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        body: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Normalized Minkowski problem for a discrete measure.
    SolveNormalized {
        #[command(flatten)]
        common: Common,
        /// Problem JSON: {"c": c, "measure": {"atoms": [{"dir": [...], "w": w}], "even": bool}}.
        #[arg(long)]
        problem: PathBuf,
        /// Overrides the target volume in the problem file.
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Planar equation with right-hand side f.
    SolveMa2d {
        #[command(flatten)]
        common: Common,
        /// f as JSON ({"type": "cosine", "c", "amp", "mode"} or {"type": "constant", "c"}) or CSV.
        #[arg(long)]
        rhs: PathBuf,
        #[arg(long, default_value_t = 16)]
        steps: usize,
        /// Initializations for the uniqueness probe (p ≥ 2).
        #[arg(long, default_value_t = 0)]
        probe: usize,
        /// Mass threshold reported against ∫ f (1 ≤ p < 2).
        #[arg(long)]
        threshold: Option<f64>,
        /// Solution table path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Constant solutions for constant data.
    Isotropic {
        #[command(flatten)]
        common: Common,
        /// Constant data values.
        #[arg(long, required = true, value_delimiter = ',')]
        c: Vec<f64>,
        /// Φ-curve table path.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
    /// Randomized inequality suites.
    Check {
        #[arg(value_enum)]
        suite: Suite,
        /// Parameter sets as n,alpha,q,p; trials cycle through them.
        #[arg(long, required = true)]
        params: Vec<String>,
        /// Directions per random body.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        lambdas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1,1.5,2,3")]
        ps: Vec<f64>,
        /// Isoperimetric profile value at 1/2; estimated when absent.
        #[arg(long)]
        i_half: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn positive_tol(t: Option<f64>) -> CliResult<Option<f64>> {
    match t {
        Some(v) if !(v > 0.0 && v.is_finite()) => Err(CliError::Usage(format!("--tol must be positive, got {v}"))),
        _ => Ok(t),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Volume { common, body } => {
            let params = parse_params(&common.params)?;
            let rep = commands::volume(&params, &body, common.grid, positive_tol(common.tol)?)?;
            emit(common.out.as_ref(), &commands::to_json_text(&rep))
        }
        Command::SurfaceMeasure { common, body, format } => {
            let params = parse_params(&common.params)?;
            let format = match format {
                Format::Csv => AtomFormat::Csv,
                Format::Json => AtomFormat::Json,
            };
            let text = commands::surface_measure(&params, &body, common.grid, format)?;
            emit(common.out.as_ref(), &text)
        }
        Command::SolveNormalized {
            common,
            problem,
            c,
            max_iter,
        } => {
            let params = parse_params(&common.params)?;
            let rep = commands::solve_normalized_cmd(&params, &problem, c, positive_tol(common.tol)?, max_iter)?;
            emit(common.out.as_ref(), &commands::to_json_text(&rep))
        }
        Command::SolveMa2d {
            common,
            rhs,
            steps,
            probe,
            threshold,
            csv,
        } => {
            let params = parse_params(&common.params)?;
            let args = MaArgs {
                rhs: &rhs,
                grid: common.grid,
                steps,
                probe,
                threshold,
                tol: positive_tol(common.tol)?,
                seed: common.seed,
                csv: csv.as_deref(),
            };
            let rep = commands::solve_ma2d(&params, &args)?;
            emit(common.out.as_ref(), &commands::to_json_text(&rep))
        }
        Command::Isotropic { common, c, csv, points } => {
            let params = parse_params(&common.params)?;
            if points == 0 {
                return Err(CliError::Usage("--points must be positive".into()));
            }
            let rep = commands::isotropic(&params, &c, points, csv.as_deref())?;
            emit(common.out.as_ref(), &commands::to_json_text(&rep))
        }
        Command::Check {
            suite,
            params,
            grid,
            seed,
            trials,
            lambdas,
            ps,
            i_half,
            out,
        } => {
            let params = params.iter().map(|s| parse_params(s)).collect::<CliResult<Vec<_>>>()?;
            let args = CheckArgs {
                suite,
                params: &params,
                trials,
                seed,
                grid,
                lambdas: &lambdas,
                ps: &ps,
                i_half,
            };
            let (rep, failure) = commands::check(&args)?;
            emit(out.as_ref(), &commands::to_json_text(&rep))?;
            match failure {
                Some(msg) => Err(CliError::CheckFailed(msg)),
                None => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gengauss: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
