use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use redundancy_core::montecarlo::{DEFAULT_SEED, DEFAULT_TRIALS};
use redundancy_core::{EvalMethod, ScalingModel, Scenario, ServiceDistribution};

#[derive(Debug, Parser)]
#[command(name = "redundancy", version, about = "Expected completion time of coded distributed jobs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expected completion time for every divisor k of n.
    Sweep(SweepArgs),
    /// Best strategy for one scenario.
    Optimal(OptimalArgs),
    /// Data behind one of the published figures.
    Figure(FigureArgs),
    /// Grid scan for counterexamples to a conjecture.
    Probe(ProbeArgs),
    /// Generalised birthday expectation E(n, d).
    Birthday(BirthdayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// sexp:DELTA,W | pareto:LAMBDA,ALPHA | bimodal:B,EPS
    #[arg(long)]
    pub dist: ServiceDistribution,
    #[arg(long)]
    pub scaling: ScalingModel,
    #[arg(long)]
    pub n: u32,
    /// Per-unit shift; data scaling of pareto and bimodal only.
    #[arg(long)]
    pub shift: Option<f64>,
}

impl ScenarioArgs {
    pub fn scenario(&self) -> redundancy_core::Result<Scenario> {
        Scenario::new(self.dist, self.scaling, self.shift)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Analytic,
    Mc,
    Lln,
    Auto,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct McArgs {
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct MethodArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    #[command(flatten)]
    pub mc: McArgs,
}

impl MethodArgs {
    pub fn eval_method(&self) -> EvalMethod {
        let McArgs { trials, seed } = self.mc;
        match self.method {
            MethodArg::Analytic => EvalMethod::Analytic,
            MethodArg::Mc => EvalMethod::MonteCarlo { trials, seed },
            MethodArg::Lln => EvalMethod::Lln,
            MethodArg::Auto => EvalMethod::Auto { trials, seed },
        }
    }

    pub fn token(&self) -> &'static str {
        match self.method {
            MethodArg::Analytic => "analytic",
            MethodArg::Mc => "mc",
            MethodArg::Lln => "lln",
            MethodArg::Auto => "auto",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimalArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    pub id: String,
    /// Workers; each figure has its own default.
    #[arg(long)]
    pub n: Option<u32>,
    /// Job sizes for figures with n on the x axis.
    #[arg(long)]
    pub n_grid: Option<Grid>,
    /// Monte Carlo trials; simulated figures default to 10000.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Conjecture {
    /// Server scaling: replication is optimal only when the scaled part of
    /// the unit time has no constant component.
    C1,
    /// Bi-modal, additive scaling: some k >= 2 beats replication.
    C2,
    /// Additive scaling, any distribution: some k >= 2 beats replication.
    C3,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(value_enum)]
    pub conjecture: Conjecture,
    #[arg(long)]
    pub dist: Option<ServiceDistribution>,
    #[arg(long, default_value_t = 12)]
    pub n: u32,
    #[arg(long)]
    pub delta_grid: Option<Grid>,
    #[arg(long)]
    pub w_grid: Option<Grid>,
    #[arg(long)]
    pub lambda_grid: Option<Grid>,
    #[arg(long)]
    pub alpha_grid: Option<Grid>,
    #[arg(long)]
    pub b_grid: Option<Grid>,
    #[arg(long)]
    pub eps_grid: Option<Grid>,
    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Args)]
pub struct BirthdayArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub d: u32,
    /// Also print the large-n approximation and the ratio.
    #[arg(long)]
    pub asymptotic: bool,
}

/// `a:b:step` (inclusive) or a single value.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("bad number '{t}' in grid '{s}'"))
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [x] => Ok(Grid(vec![num(x)?])),
            [a, b, step] => {
                let (a, b, step) = (num(a)?, num(b)?, num(step)?);
                if step <= 0.0 || b < a {
                    return Err(format!("grid '{s}' needs start <= end and step > 0"));
                }
                let count = ((b - a) / step + 1e-9).floor() as usize + 1;
                if count > 1_000_000 {
                    return Err(format!("grid '{s}' has too many points"));
                }
                // Rounded to 13 significant digits so 0.1:0.9:0.1 yields 0.3, not 0.30000000000000004.
                let clean = |x: f64| format!("{x:.12e}").parse::<f64>().unwrap_or(x);
                Ok(Grid((0..count).map(|i| clean(a + i as f64 * step)).collect()))
            }
            _ => Err(format!("grid '{s}' is not of the form start:end:step")),
        }
    }
}
