use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tgv1d_core::analysis::SweepMode;
use tgv1d_core::solver::{Method, SolverOptions};
use tgv1d_core::{Result, ShapeSpec};

#[derive(Debug, Parser)]
#[command(name = "tgv1d", version, about = "One-dimensional L²-TGV² denoising experiments")]
#[command(arg_required_else_help = true, args_conflicts_with_subcommands = true)]
pub struct Cli {
    /// Re-run the command recorded in a run manifest.
    #[arg(long, value_name = "MANIFEST")]
    pub replay: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Sample a canonical data shape, optionally with a noisy copy.
    Generate(GenerateArgs),
    /// Minimise the discrete TGV² (or TV) energy for a signal file.
    Solve(SolveArgs),
    /// Write the closed-form minimiser for a canonical shape.
    Exact(ExactArgs),
    /// Check the optimality conditions of a candidate solution.
    Verify(VerifyArgs),
    /// Label a grid of (α, β) pairs by regime.
    Sweep(SweepArgs),
    /// Compare two solution files.
    Compare(CompareArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Solve(_) => "solve",
            Command::Exact(_) => "exact",
            Command::Verify(_) => "verify",
            Command::Sweep(_) => "sweep",
            Command::Compare(_) => "compare",
        }
    }

    pub fn manifest_override(&self) -> Option<&PathBuf> {
        match self {
            Command::Generate(a) => a.manifest.as_ref(),
            Command::Solve(a) => a.manifest.as_ref(),
            Command::Exact(a) => a.manifest.as_ref(),
            Command::Verify(a) => a.manifest.as_ref(),
            Command::Sweep(a) => a.manifest.as_ref(),
            Command::Compare(a) => a.manifest.as_ref(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeArg {
    Step,
    AffineStep,
    Hat,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ShapeArgs {
    #[arg(long, value_enum)]
    pub shape: ShapeArg,
    /// Half-length L of the domain (0, 2L).
    #[arg(long = "L", default_value_t = 1.0)]
    pub half_length: f64,
    /// Jump height (step shapes).
    #[arg(long = "h", default_value_t = 1.0)]
    pub height: f64,
    /// Slope of the affine step or the hat.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
}

impl ShapeArgs {
    pub fn spec(&self) -> Result<ShapeSpec> {
        match self.shape {
            ShapeArg::Step => ShapeSpec::step(self.half_length, self.height),
            ShapeArg::AffineStep => ShapeSpec::affine_step(self.half_length, self.height, self.lambda),
            ShapeArg::Hat => ShapeSpec::hat(self.half_length, self.lambda),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    ActiveSet,
    ChambollePock,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::ActiveSet)]
    pub method: MethodArg,
    /// Relative duality-gap tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 200_000)]
    pub max_iters: usize,
    /// Gap evaluation cadence (iterations).
    #[arg(long, default_value_t = 50)]
    pub check_every: usize,
}

impl SolverArgs {
    pub fn options(&self) -> Result<SolverOptions> {
        let method = match self.method {
            MethodArg::ActiveSet => Method::ActiveSet,
            MethodArg::ChambollePock => Method::ChambollePock,
        };
        SolverOptions { method, tol: self.tol, max_iters: self.max_iters, check_every: self.check_every, ..SolverOptions::default() }
            .validated()
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    /// Signal JSON for the clean samples.
    #[arg(long)]
    pub out: PathBuf,
    /// Standard deviation of the Gaussian noise for the noisy copy.
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    /// Noise seed; `TGV1D_SEED` takes precedence.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Signal JSON for the noisy copy [default: <out>.noisy.json when sigma > 0].
    #[arg(long)]
    pub noisy_out: Option<PathBuf>,
    /// Run manifest path [default: <out>.manifest.json].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Tgv,
    Tv,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    /// Signal JSON with the data f.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    /// Omit for TV.
    #[arg(long)]
    pub beta: Option<f64>,
    /// [default: tgv when --beta is given, tv otherwise]
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Solution JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Solution CSV (x, f, u, w) [default: <out> with extension csv].
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Run manifest path [default: <out>.manifest.json].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExactArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    /// Cells of the sampled CSV.
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    /// Exact solution JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Sampled CSV (x, f, u, w, v) [default: <out> with extension csv].
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Run manifest path [default: <out>.manifest.json].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// Signal JSON with the data f.
    #[arg(long)]
    pub data: PathBuf,
    /// Solution JSON from `solve` or `exact`.
    #[arg(long)]
    pub solution: PathBuf,
    /// [default: taken from the solution file]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// [default: taken from the solution file]
    #[arg(long)]
    pub beta: Option<f64>,
    /// Relative tolerance of every condition.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Certificate report JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run manifest path [default: <out>.manifest.json when --out is given].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Analytic,
    Numeric,
}

impl From<ModeArg> for SweepMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Analytic => SweepMode::Analytic,
            ModeArg::Numeric => SweepMode::Numeric,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long)]
    pub alpha_min: f64,
    #[arg(long)]
    pub alpha_max: f64,
    /// Number of α values.
    #[arg(long, default_value_t = 50)]
    pub alpha_steps: usize,
    #[arg(long)]
    pub beta_min: f64,
    #[arg(long)]
    pub beta_max: f64,
    /// Number of β values.
    #[arg(long, default_value_t = 50)]
    pub beta_steps: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Analytic)]
    pub mode: ModeArg,
    /// Cells per numeric solve.
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Worker threads for numeric sweeps [default: logical cores].
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Regime map CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// gnuplot script [default: <out> with extension gp].
    #[arg(long)]
    pub script: Option<PathBuf>,
    /// Run manifest path [default: <out>.manifest.json].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    /// Reference solution JSON (sampled or exact).
    #[arg(long)]
    pub reference: PathBuf,
    /// Candidate solution JSON (sampled or exact).
    #[arg(long)]
    pub candidate: PathBuf,
    /// Largest accepted sup-norm difference.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Cells used when both files are exact.
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    /// Pointwise difference CSV (x, reference, candidate, difference).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comparison report JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Run manifest path [default: <out>.manifest.json when --out is given].
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    use super::*;

    #[test]
    fn grammar_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn documented_defaults() {
        let cli = Cli::try_parse_from(["tgv1d", "solve", "--input", "f.json", "--alpha", "0.1", "--out", "s.json"]).unwrap();
        let Some(Command::Solve(a)) = cli.command else { panic!("not a solve command") };
        assert_eq!((a.solver.tol, a.solver.max_iters), (1e-6, 200_000));
        assert_eq!(a.solver.method, MethodArg::ActiveSet);
        let cli = Cli::try_parse_from(["tgv1d", "generate", "--shape", "hat", "--out", "f.json"]).unwrap();
        let Some(Command::Generate(a)) = cli.command else { panic!("not a generate command") };
        assert_eq!(a.n, 2000);
        assert!(Cli::try_parse_from(["tgv1d", "--replay", "m.json", "generate"]).is_err());
    }
}
