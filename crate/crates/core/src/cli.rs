//! Command-line front end. `main` calls [`run`]; tests call [`dispatch`].
//!
//! Every subcommand writes exactly one JSON document to stdout, wrapped in a
//! schema-versioned envelope. Logs go to stderr.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::eigen::{ConeReading, ConeSearchConfig, EigenAuditor, EigenReport, EnumMode, SetExtremes, ConditionD};
use crate::error::{Error, Result};
use crate::harness::bounds::{verify_bounds, FamilySummary, VerifyReport};
use crate::harness::dashboard::{dashboard, Sweep};
use crate::harness::scenario::{generate, Scenario, ScenarioConfig};
use crate::harness::simulate::{simulate, simulation_report, write_metrics_csv};
use crate::harness::suite::{default_suite, run_suite};
use crate::harness::ScenarioContext;
use crate::irrep::{example_design, irrep_report, worst_case_design};
use crate::lasso::{solve, FitResult, SolverOptions, WeightedLassoProblem};
use crate::linalg::{ls_refit, normalize_columns, read_matrix_csv, read_vector_csv, DesignMatrix};
use crate::oracle::{oracle_scalars, oracle_search, OracleScalars, OracleSolution};
use crate::report::{envelope, to_writer};
use crate::two_stage::{
    adaptive_from_initial, threshold_from_initial, tuning_conditions, tuning_eigen, TuningConstants, TuningReport,
    TwoStageResult,
};
use crate::Mode;

pub const SEED_ENV: &str = "SPARSE2STAGE_SEED";

#[derive(Debug, Parser)]
#[command(name = "sparse2stage", version, about = "Lasso, adaptive and thresholded Lasso, spectral audits and bound checks")]
pub struct Cli {
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Treat solver non-convergence as an error (exit 3).
    #[arg(long, global = true)]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weighted Lasso by coordinate descent.
    Solve(SolveArgs),
    /// Adaptive or thresholded Lasso.
    TwoStage(TwoStageArgs),
    /// Sparse and restricted eigenvalues of the Gram matrix.
    Eigen(EigenArgs),
    /// Oracle set and derived scalars.
    Oracle(OracleArgs),
    /// Weighted irrepresentable condition.
    Irrep(IrrepArgs),
    /// Replicated fits of a scenario.
    Simulate(SimulateArgs),
    /// Replicated fits with every bound checked.
    VerifyBounds(VerifyArgs),
    /// Mean errors against nominal rates along a sweep.
    Dashboard(DashboardArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Design matrix CSV (rows are observations).
    #[arg(long, value_name = "CSV", conflicts_with = "scenario")]
    pub design: Option<PathBuf>,
    /// Response CSV (one column).
    #[arg(long, value_name = "CSV", conflicts_with = "scenario")]
    pub response: Option<PathBuf>,
    /// Skip one header line in each CSV.
    #[arg(long)]
    pub header: bool,
    /// Scenario JSON; the data are generated instead of read.
    #[arg(long, value_name = "JSON")]
    pub scenario: Option<PathBuf>,
    /// Replication whose noise draw forms the response.
    #[arg(long, default_value_t = 0, requires = "scenario")]
    pub replication: usize,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub lambda_init: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub lambda_weight: f64,
    /// Weights CSV, or `ones`.
    #[arg(long, default_value = "ones")]
    pub weights: String,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Adaptive,
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TuningArg {
    Manual,
    #[value(name = "AA", alias = "aa")]
    Aa,
    #[value(name = "BB", alias = "bb")]
    Bb,
    #[value(name = "CC", alias = "cc")]
    Cc,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Noisy,
    Noiseless,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Noisy => Mode::Noisy,
            ModeArg::Noiseless => Mode::Noiseless,
        }
    }
}

#[derive(Debug, Args)]
pub struct TwoStageArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long)]
    pub lambda_init: Option<f64>,
    #[arg(long)]
    pub lambda_adap: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, value_enum, default_value = "manual")]
    pub tuning: TuningArg,
    /// Oracle set for spectral tuning, e.g. `0,2,5`.
    #[arg(long, value_delimiter = ',')]
    pub s0: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value = "noisy")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1.0)]
    pub c_aa: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c_bb: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c_cc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    LambdaMax,
    LambdaSet,
    SparseMax,
    SparseMin,
    Restricted,
    RestrictedMin,
    ConditionD,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EnumArg {
    Auto,
    Exact,
    Greedy,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ReadingArg {
    LargestOutside,
    Literal,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "lambda-max")]
    pub quantity: Vec<Quantity>,
    #[arg(long, value_delimiter = ',')]
    pub set: Option<Vec<usize>>,
    /// Cone constant.
    #[arg(long = "L", default_value_t = 2.0)]
    pub l: f64,
    /// Superset size (for `sparse-max`, the subset size; for `condition-d`, `s*`).
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value = "auto")]
    pub mode: EnumArg,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub reading: Option<ReadingArg>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// True support; the response file is read as the target `f⁰`.
    #[arg(long, value_delimiter = ',')]
    pub s_true: Option<Vec<usize>>,
    #[arg(long)]
    pub lambda_init: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Debug, Args)]
pub struct IrrepArgs {
    #[arg(long, value_name = "CSV", conflicts_with = "example")]
    pub design: Option<PathBuf>,
    #[arg(long)]
    pub header: bool,
    /// Build the example Gram matrix `s,p,rho` instead of reading a design.
    /// With weights, the worst case for them; otherwise uniform `c₁` and `c₂ = e₁`.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub example: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub set: Option<Vec<usize>>,
    /// Weights CSV, or `ones`.
    #[arg(long, default_value = "ones")]
    pub weights: String,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_name = "JSON")]
    pub scenario: PathBuf,
    #[arg(long)]
    pub replications: Option<usize>,
    /// Metrics table, one row per replication and method.
    #[arg(long, value_name = "CSV")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_name = "JSON", required_unless_present = "suite", conflicts_with = "suite")]
    pub scenario: Option<PathBuf>,
    /// Run the built-in sweep over design families and sizes.
    #[arg(long)]
    pub suite: bool,
    #[arg(long)]
    pub replications: Option<usize>,
    /// Full bound report.
    #[arg(long, value_name = "JSON")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "CSV")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DashboardArgs {
    #[arg(long, value_name = "JSON")]
    pub scenario: PathBuf,
    /// Sweep as JSON, e.g. `{"kind":"sample_size","values":[50,100,200]}`.
    #[arg(long)]
    pub sweep: String,
    #[arg(long, default_value_t = 20)]
    pub replications: usize,
    #[arg(long, value_name = "CSV")]
    pub csv: Option<PathBuf>,
}

/// Parses the process arguments, runs, and returns the exit code.
pub fn run() -> i32 {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    dispatch(std::env::args_os(), &mut lock)
}

pub fn dispatch<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).target(env_logger::Target::Stderr).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut buf = Vec::new();
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| execute(&cli, &mut buf)),
            Err(e) => Err(Error::InvalidProblem(format!("thread pool: {e}"))),
        },
        None => execute(&cli, &mut buf),
    }
    .and_then(|()| out.write_all(&buf).and_then(|()| out.flush()).map_err(Error::from));
    match result {
        Ok(()) => 0,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, kind: &'static str, body: &T) -> Result<()> {
    to_writer(&mut *out, &envelope(kind, body))?;
    writeln!(out)?;
    Ok(())
}

fn write_json_file<T: Serialize>(path: &Path, kind: &'static str, body: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    to_writer(&mut w, &envelope(kind, body))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let mut cfg: ScenarioConfig = serde_json::from_reader(File::open(path)?)?;
    if let Ok(v) = std::env::var(SEED_ENV) {
        cfg.seed = v.trim().parse().map_err(|_| Error::InvalidProblem(format!("{SEED_ENV} = {v:?} is not an integer")))?;
    }
    Ok(cfg)
}

enum Data {
    Files { design: DesignMatrix, response: Option<Vec<f64>> },
    Generated(Box<Scenario>, usize),
}

impl Data {
    fn load(args: &DataArgs, need_response: bool) -> Result<Data> {
        if let Some(path) = &args.scenario {
            return Ok(Data::Generated(Box::new(generate(&load_scenario(path)?)?), args.replication));
        }
        let design_path = args.design.as_ref().ok_or_else(|| Error::InvalidProblem("need --design or --scenario".into()))?;
        let design = normalize_columns(&read_matrix_csv(design_path, args.header)?)?;
        let response = match &args.response {
            Some(p) => {
                let y = read_vector_csv(p, args.header)?;
                if y.len() != design.n() {
                    return Err(Error::DimensionMismatch(format!("response has {} rows, design has {}", y.len(), design.n())));
                }
                Some(y)
            }
            None if need_response => return Err(Error::InvalidProblem("need --response".into())),
            None => None,
        };
        Ok(Data::Files { design, response })
    }

    fn design(&self) -> &DesignMatrix {
        match self {
            Data::Files { design, .. } => design,
            Data::Generated(s, _) => &s.design,
        }
    }

    fn response(&self) -> Vec<f64> {
        match self {
            Data::Files { response, .. } => response.clone().unwrap_or_default(),
            Data::Generated(s, r) => s.response(*r),
        }
    }

    fn scenario(&self) -> Option<&Scenario> {
        match self {
            Data::Generated(s, _) => Some(s),
            Data::Files { .. } => None,
        }
    }

    fn lambda_init(&self, flag: Option<f64>) -> Result<f64> {
        flag.or_else(|| self.scenario().map(|s| s.lambda_init))
            .ok_or_else(|| Error::InvalidProblem("need --lambda-init".into()))
    }
}

fn read_weights(spec: &str, p: usize, header: bool) -> Result<Vec<f64>> {
    if spec == "ones" {
        return Ok(vec![1.0; p]);
    }
    let w = read_vector_csv(Path::new(spec), header)?;
    if w.len() != p {
        return Err(Error::DimensionMismatch(format!("{} weights for p = {p}", w.len())));
    }
    Ok(w)
}

fn check_converged(strict: bool, fits: &[&FitResult], warnings: &mut Vec<String>) -> Result<()> {
    for f in fits {
        if !f.converged {
            if strict {
                f.ensure_converged()?;
            }
            let msg = format!("solver did not converge (KKT violation {:e} after {} cycles)", f.kkt.max_violation, f.iterations);
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SolveOutput {
    #[serde(flatten)]
    fit: FitResult,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct TwoStageOutput {
    #[serde(flatten)]
    result: TwoStageResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    tuning: Option<TuningReport>,
}

#[derive(Serialize)]
struct OracleOutput {
    oracle: OracleSolution,
    scalars: OracleScalars,
}

#[derive(Serialize)]
struct BoundReportFile<'a> {
    reports: &'a [VerifyReport],
}

#[derive(Serialize)]
struct VerifySummary {
    scenarios: usize,
    records: usize,
    failures: usize,
    summary: FamilySummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<String>,
}

fn execute(cli: &Cli, out: &mut Vec<u8>) -> Result<()> {
    match &cli.command {
        Command::Solve(a) => {
            let data = Data::load(&a.data, true)?;
            let d = data.design();
            let y = data.response();
            let weights = read_weights(&a.weights, d.p(), a.data.header)?;
            let prob = WeightedLassoProblem::weighted(d, &y, data.lambda_init(a.lambda_init)?, a.lambda_weight, weights);
            let fit = solve(&prob, &SolverOptions { tol: a.tol, max_iter: a.max_iter, warm_start: None })?;
            let mut warnings = vec![];
            check_converged(cli.strict, &[&fit], &mut warnings)?;
            emit(out, "fit_result", &SolveOutput { fit, warnings })
        }
        Command::TwoStage(a) => two_stage_cmd(cli, a, out),
        Command::Eigen(a) => eigen_cmd(a, out),
        Command::Oracle(a) => {
            let data = Data::load(&a.data, a.data.scenario.is_none())?;
            let d = data.design();
            let (f0, s_true, mode) = match data.scenario() {
                Some(s) => (s.f0.clone(), a.s_true.clone().unwrap_or_else(|| s.s_true.clone()), a.mode.map(Mode::from).unwrap_or(s.mode)),
                None => (
                    data.response(),
                    a.s_true.clone().ok_or_else(|| Error::InvalidProblem("need --s-true".into()))?,
                    a.mode.map(Mode::from).unwrap_or(Mode::Noisy),
                ),
            };
            let cone = data.scenario().and_then(|s| s.config.cone.clone()).unwrap_or_default();
            let auditor = EigenAuditor::new(d.gram().clone(), cone);
            let oracle = oracle_search(d, &f0, &s_true, data.lambda_init(a.lambda_init)?, mode, &auditor)?;
            let scalars = oracle_scalars(&oracle, &auditor)?;
            emit(out, "oracle_solution", &OracleOutput { oracle, scalars })
        }
        Command::Irrep(a) => {
            let (gram, p) = match (&a.example, &a.design) {
                (Some(ex), _) => {
                    let (s, p, rho) = (ex[0] as usize, ex[1] as usize, ex[2]);
                    if ex[0] != s as f64 || ex[1] != p as f64 || s == 0 || s >= p {
                        return Err(Error::InvalidFamily("--example needs integers 0 < s < p".into()));
                    }
                    let g = if a.weights == "ones" {
                        let c1 = vec![1.0 / (s as f64).sqrt(); s];
                        let mut c2 = vec![0.0; p - s];
                        c2[0] = 1.0;
                        example_design(s, p, rho, &c1, &c2)?
                    } else {
                        worst_case_design(s, p, rho, &read_weights(&a.weights, p, a.header)?)?
                    };
                    (g, p)
                }
                (None, Some(path)) => {
                    let d = normalize_columns(&read_matrix_csv(path, a.header)?)?;
                    (d.gram().clone(), d.p())
                }
                (None, None) => return Err(Error::InvalidProblem("need --design or --example".into())),
            };
            let set = match (&a.set, &a.example) {
                (Some(s), _) => s.clone(),
                (None, Some(ex)) => (0..ex[0] as usize).collect(),
                (None, None) => return Err(Error::InvalidProblem("need --set".into())),
            };
            let w = read_weights(&a.weights, p, a.header)?;
            emit(out, "irrep_report", &irrep_report(&gram, &set, &w)?)
        }
        Command::Simulate(a) => {
            let mut cfg = load_scenario(&a.scenario)?;
            if let Some(r) = a.replications {
                cfg.replications = r;
            }
            let ctx = ScenarioContext::build(&cfg)?;
            let outcomes = simulate(&ctx, cfg.replications)?;
            if cli.strict {
                for o in &outcomes {
                    if !(o.initial.converged && o.adaptive.converged) {
                        return Err(Error::NotConverged { max_violation: o.initial.kkt_violation.max(o.adaptive.kkt_violation), iterations: 0 });
                    }
                }
            }
            if let Some(path) = &a.csv {
                write_metrics_csv(File::create(path)?, &cfg.label(), &outcomes)?;
            }
            emit(out, "simulation_report", &simulation_report(&ctx, outcomes))
        }
        Command::VerifyBounds(a) => {
            let (reports, outcomes) = if a.suite {
                let mut configs = default_suite();
                if let Some(r) = a.replications {
                    configs.iter_mut().filter(|c| c.sigma > 0.0).for_each(|c| c.replications = r);
                }
                (run_suite(&configs)?.scenarios, vec![])
            } else {
                let mut cfg = load_scenario(a.scenario.as_ref().expect("clap requires a scenario"))?;
                if let Some(r) = a.replications {
                    cfg.replications = r;
                }
                let ctx = ScenarioContext::build(&cfg)?;
                let (rep, outcomes) = verify_bounds(&ctx, cfg.replications)?;
                (vec![rep], vec![(cfg.label(), outcomes)])
            };
            if let Some(path) = &a.csv {
                let f = File::create(path)?;
                for (label, o) in &outcomes {
                    write_metrics_csv(&f, label, o)?;
                }
            }
            if let Some(path) = &a.out {
                write_json_file(path, "bound_report", &BoundReportFile { reports: &reports })?;
            }
            let mut summary = FamilySummary::new();
            for r in &reports {
                for (fam, c) in &r.summary {
                    summary.entry(*fam).or_default().merge(c);
                }
            }
            let body = VerifySummary {
                scenarios: reports.len(),
                records: reports.iter().map(|r| r.records().count()).sum(),
                failures: summary.values().map(|c| c.fail).sum(),
                summary,
                out: a.out.as_ref().map(|p| p.display().to_string()),
            };
            eprintln!("verified {} scenarios: {} records, {} failures", body.scenarios, body.records, body.failures);
            emit(out, "verify_summary", &body)
        }
        Command::Dashboard(a) => {
            let cfg = load_scenario(&a.scenario)?;
            let sweep: Sweep = serde_json::from_str(&a.sweep)?;
            let dash = dashboard(&cfg, &sweep, a.replications)?;
            if let Some(path) = &a.csv {
                let mut w = csv::Writer::from_writer(File::create(path)?);
                for r in &dash.rows {
                    w.serialize(r)?;
                }
                w.flush()?;
            }
            emit(out, "dashboard", &dash)
        }
    }
}

fn two_stage_cmd(cli: &Cli, a: &TwoStageArgs, out: &mut dyn Write) -> Result<()> {
    let data = Data::load(&a.data, true)?;
    let d = data.design();
    let y = data.response();
    let mode: Mode = a.mode.into();
    let lambda = match (a.lambda_init, data.scenario()) {
        (Some(l), _) => l,
        (None, Some(s)) => s.lambda_init,
        (None, None) => return Err(Error::InvalidProblem("need --lambda-init".into())),
    };
    let opts = SolverOptions::default();
    let initial = solve(&WeightedLassoProblem::lasso(d, &y, lambda), &opts)?;

    let tuning = if a.tuning == TuningArg::Manual {
        None
    } else {
        let s0 = a.s0.clone().ok_or_else(|| Error::InvalidProblem("spectral tuning needs --s0".into()))?;
        let auditor = EigenAuditor::new(d.gram().clone(), ConeSearchConfig::default());
        let eig = tuning_eigen(&auditor, &s0)?;
        // plug-in b⁰: least squares of the response on S₀
        let b0 = ls_refit(d, &s0, &y)?.coefficients;
        let constants = TuningConstants { c_aa: a.c_aa, c_bb: a.c_bb, c_cc: a.c_cc };
        Some(tuning_conditions(mode, lambda, &s0, Some(&b0), &eig, d.p(), constants)?)
    };
    let pick = |manual: Option<f64>, tuned: Option<f64>, what: &str| -> Result<f64> {
        manual.or(tuned).ok_or_else(|| Error::InvalidProblem(format!("need --{what} or a tuning rule that sets it")))
    };
    let mut result = match a.method {
        MethodArg::Adaptive => {
            let tuned = tuning.as_ref().and_then(|t| match a.tuning {
                TuningArg::Cc => t.lambda_adap_cc,
                TuningArg::Bb | TuningArg::Aa => t.lambda_adap_bb,
                TuningArg::Manual => None,
            });
            adaptive_from_initial(d, &y, initial, pick(a.lambda_adap, tuned, "lambda-adap")?, &opts)?
        }
        MethodArg::Threshold => {
            let tuned = tuning.as_ref().and_then(|t| t.lambda_thres);
            threshold_from_initial(d, &y, initial, pick(a.delta, tuned, "delta")?)?
        }
    };
    let fits: Vec<&FitResult> = std::iter::once(&result.initial).chain(result.adaptive.as_ref()).collect();
    let mut warnings = vec![];
    check_converged(cli.strict, &fits, &mut warnings)?;
    if let Some(t) = &tuning {
        result.warnings.extend(t.warnings.iter().cloned());
    }
    emit(out, "two_stage_result", &TwoStageOutput { result, tuning })
}

fn eigen_cmd(a: &EigenArgs, out: &mut dyn Write) -> Result<()> {
    let gram = match (&a.data.scenario, &a.data.design) {
        (Some(_), _) | (None, Some(_)) => Data::load(&a.data, false)?.design().gram().clone(),
        (None, None) => return Err(Error::InvalidProblem("need --design or --scenario".into())),
    };
    let mut cfg = ConeSearchConfig::default();
    if let Some(r) = a.restarts {
        cfg.restarts = r;
    }
    if let Some(s) = a.seed.or_else(|| std::env::var(SEED_ENV).ok().and_then(|v| v.trim().parse().ok())) {
        cfg.seed = s;
    }
    if let Some(r) = a.reading {
        cfg.reading = match r {
            ReadingArg::LargestOutside => ConeReading::LargestOutside,
            ReadingArg::Literal => ConeReading::Literal,
        };
    }
    let mode = match a.mode {
        EnumArg::Auto => EnumMode::Auto,
        EnumArg::Exact => EnumMode::Exact,
        EnumArg::Greedy => EnumMode::Greedy,
    };
    let auditor = EigenAuditor::new(gram, cfg);
    let p = auditor.p();
    let set = || a.set.clone().ok_or_else(|| Error::InvalidProblem("this quantity needs --set".into()));
    let mut rep = EigenReport::default();
    for q in &a.quantity {
        match q {
            Quantity::LambdaMax => {
                rep.lambda_max = Some(auditor.lambda_max());
                rep.lambda_min = Some(auditor.lambda_min());
            }
            Quantity::LambdaSet => {
                let s = set()?;
                let (lo, hi) = auditor.set_extremes(&s)?;
                rep.set_extremes.push(SetExtremes { set: crate::linalg::sorted_unique(&s), lambda_min: lo, lambda_max: hi });
            }
            Quantity::SparseMax => {
                let n = a.n.or_else(|| a.set.as_ref().map(|s| s.len())).ok_or_else(|| Error::InvalidProblem("sparse-max needs --N".into()))?;
                rep.sparse_max.push(auditor.sparse_max(n, mode)?);
            }
            Quantity::SparseMin => {
                let s = set()?;
                rep.sparse_min.push(auditor.sparse_min(&s, a.n.unwrap_or((2 * s.len()).min(p)), mode)?);
            }
            Quantity::Restricted => {
                let s = set()?;
                rep.restricted.push(auditor.restricted(a.l, &s, a.n.unwrap_or(s.len()))?);
            }
            Quantity::RestrictedMin => {
                let s = set()?;
                rep.restricted_min.push(auditor.restricted_min(a.l, &s, a.n.unwrap_or((2 * s.len()).min(p)))?);
            }
            Quantity::ConditionD => {
                let s = set()?;
                let s_star = a.n.unwrap_or((2 * s.len()).min(p));
                rep.condition_d.push(ConditionD { s_star, s0: crate::linalg::sorted_unique(&s), value: auditor.condition_d(s_star, &s)? });
            }
        }
    }
    let violations = rep.ordering_violations(1e-9);
    if !violations.is_empty() {
        return Err(Error::InvalidProblem(format!("eigen ordering violated: {}", violations.join("; "))));
    }
    emit(out, "eigen_report", &rep)
}
