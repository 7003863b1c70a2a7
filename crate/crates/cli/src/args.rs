use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "confsense",
    version,
    about = "Sensitivity analysis for unmeasured confounding"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a dataset from a structural model.
    Simulate(SimulateArgs),
    /// Ground-truth value of an estimand in a structural model.
    Truth(TruthArgs),
    /// Naive or adjusted estimate from data.
    Estimate(EstimateArgs),
    /// Sensitivity analyses.
    #[command(subcommand)]
    Sens(SensCommand),
    /// Recommend sensitivity methods from the six workflow answers.
    Workflow(WorkflowArgs),
    /// Run the three-setting simulation study and compare with published values.
    ReproducePaper(ReproArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "UPPER")]
pub enum EstimandArg {
    Ace,
    Nde,
    Nie,
    Total,
    Late,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TruthMethodArg {
    Auto,
    PathTrace,
    MonteCarlo,
}

#[derive(Debug, Args)]
pub struct TruthArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, ignore_case = true)]
    pub estimand: EstimandArg,
    #[arg(long)]
    pub treatment: String,
    #[arg(long)]
    pub outcome: String,
    #[arg(long)]
    pub mediator: Option<String>,
    #[arg(long)]
    pub instrument: Option<String>,
    /// Monte Carlo draws.
    #[arg(long, default_value_t = 200_000)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = TruthMethodArg::Auto)]
    pub method: TruthMethodArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EstimateMethod {
    DiffInMeans,
    Ols,
    Wald,
    Mediation,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub method: EstimateMethod,
    #[arg(long)]
    pub treatment: String,
    #[arg(long)]
    pub outcome: String,
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
    #[arg(long)]
    pub instrument: Option<String>,
    #[arg(long)]
    pub mediator: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SensCommand {
    /// E-value for a risk ratio (or a standardized mean difference).
    Evalue(EvalueArgs),
    /// Assumption-free bounds for a binary outcome.
    Manski(ManskiArgs),
    /// Omitted-variable bias contours on the partial-R² scale.
    Ovb(OvbArgs),
    /// Gaussian-copula ρ curve for the ACE.
    Copula(CopulaArgs),
    /// Error-correlation bounds for NDE and NIE.
    Mediation(MediationArgs),
    /// Confounding bias of a discrete joint (columns x,u,a,p,ey).
    BiasTable(BiasTableArgs),
}

#[derive(Debug, Args)]
pub struct EvalueArgs {
    #[arg(
        long,
        required_unless_present = "smd",
        conflicts_with = "smd",
        allow_hyphen_values = true
    )]
    pub rr: Option<f64>,
    #[arg(long, requires = "rr")]
    pub lower: Option<f64>,
    #[arg(long, requires = "rr")]
    pub upper: Option<f64>,
    /// Standardized mean difference, converted with RR = exp(0.91 d).
    #[arg(long, allow_hyphen_values = true)]
    pub smd: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ManskiArgs {
    #[arg(long, required_unless_present = "p_treat")]
    pub data: Option<PathBuf>,
    #[arg(long, default_value = "A")]
    pub treatment: String,
    #[arg(long, default_value = "Y")]
    pub outcome: String,
    /// Discrete covariate to compute bounds within.
    #[arg(long)]
    pub stratify: Option<String>,
    #[arg(long, conflicts_with = "data", requires_all = ["p_y1_t1", "p_y1_t0"])]
    pub p_treat: Option<f64>,
    #[arg(long)]
    pub p_y1_t1: Option<f64>,
    #[arg(long)]
    pub p_y1_t0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OvbArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "A")]
    pub treatment: String,
    #[arg(long, default_value = "Y")]
    pub outcome: String,
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
    #[arg(long, default_value_t = 41)]
    pub grid: usize,
    #[arg(long = "r2max", default_value_t = 0.8)]
    pub r2_max: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CopulaModeArg {
    Exact,
    Naive,
}

#[derive(Debug, Args)]
pub struct CopulaArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "A")]
    pub treatment: String,
    #[arg(long, default_value = "Y")]
    pub outcome: String,
    #[arg(long, default_value_t = 0.95)]
    pub rho_max: f64,
    #[arg(long, default_value_t = 39)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = CopulaModeArg::Exact)]
    pub mode: CopulaModeArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MediationArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "A")]
    pub treatment: String,
    #[arg(long, default_value = "M")]
    pub mediator: String,
    #[arg(long, default_value = "Y")]
    pub outcome: String,
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
    #[arg(long, default_value_t = 0.9)]
    pub rho_max: f64,
    #[arg(long, default_value_t = 19)]
    pub grid: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BiasTableArgs {
    #[arg(long)]
    pub table: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    Setting1,
    Setting2,
    Setting3,
    Wildcard,
}

/// Flags override the answers file, which overrides the preset.
#[derive(Debug, Args)]
pub struct WorkflowArgs {
    #[arg(long)]
    pub answers: Option<PathBuf>,
    #[arg(long, value_enum, conflicts_with = "answers")]
    pub preset: Option<Preset>,
    /// Step 1; repeatable or comma separated, or "any".
    #[arg(long, value_delimiter = ',')]
    pub estimand: Vec<String>,
    /// Step 2.
    #[arg(long, value_delimiter = ',')]
    pub position: Vec<String>,
    /// Step 3.
    #[arg(long, value_delimiter = ',')]
    pub metric: Vec<String>,
    /// Step 3.
    #[arg(long)]
    pub outcome: Option<String>,
    /// Step 4.
    #[arg(long)]
    pub covariate_adjustment: Option<bool>,
    /// Step 5.
    #[arg(long)]
    pub u_type: Option<String>,
    /// Step 5.
    #[arg(long)]
    pub distribution_prior: Option<bool>,
    /// Step 5.
    #[arg(long)]
    pub u_count: Option<u32>,
    /// Step 5.
    #[arg(long)]
    pub assumption_free: Option<bool>,
    /// Step 6.
    #[arg(long, value_delimiter = ',')]
    pub class: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    #[arg(long, default_value_t = crate::repro::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = crate::repro::DEFAULT_N)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
