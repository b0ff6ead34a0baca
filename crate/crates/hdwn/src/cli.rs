//! Command-line interface: `test`, `simulate` and `are`.
//!
//! Exit codes: 0 on success (whether or not a test rejects), 2 for usage or
//! input errors, 3 for numerical failures.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use hdwn_core::power::{are_ss_flm, radial_moments, AreInput, RadialMoments};
use hdwn_core::{Error as CoreError, LagWindow, PreparedSeries, TestKind, TestOutcome};
use serde::{Deserialize, Serialize};

use crate::config::{parse_config, ConfigError, Experiment, Layout};
use crate::csv_io::{self, CsvError};
use crate::montecarlo::{power_table, size_table, McError, McReport, Table};

pub const THREADS_ENV: &str = "HDWN_THREADS";
pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const TABLE1_PRESET: &str = include_str!("../presets/table1.cfg");
const TABLE2_PRESET: &str = include_str!("../presets/table2.cfg");

#[derive(Debug, Parser)]
#[command(name = "hdwn", version, about = "Spatial-sign white-noise tests for high-dimensional time series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one test on a CSV series (rows = time points).
    Test(TestArgs),
    /// Run Monte Carlo size/power experiments.
    Simulate(SimulateArgs),
    /// Asymptotic relative efficiency of SS with respect to FLM.
    Are(AreArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, clap::Args)]
pub struct TestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "ss", value_parser = parse_test_kind)]
    pub test: TestKind,
    #[arg(long, default_value_t = 1)]
    pub lags: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Table1,
    Table2,
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    /// Experiment config file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    /// Bundled experiment grid.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Override the replication count of every cell.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Override the master seed of every cell.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (overrides HDWN_THREADS and the config).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Run only the named cells (repeatable).
    #[arg(long = "cell")]
    pub cells: Vec<String>,
    /// Directory for report.json, cells.csv and table.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dist {
    Normal,
    T,
    Mixture,
}

#[derive(Debug, clap::Args)]
pub struct AreArgs {
    #[arg(long, value_enum)]
    pub dist: Dist,
    /// Degrees of freedom of the t law.
    #[arg(long)]
    pub df: Option<f64>,
    /// Mixture weight of the scaled component.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Scale of the second mixture component.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Also report finite-p radial moments.
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

fn parse_test_kind(s: &str) -> Result<TestKind, String> {
    s.parse().map_err(|e: CoreError| e.to_string())
}

/// JSON document printed by `hdwn test`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: TestKind,
    pub lags: usize,
    pub n: usize,
    pub p: usize,
    pub header: Option<Vec<String>>,
    pub outcome: TestOutcome,
}

/// JSON document printed by `hdwn are`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreReport {
    pub input: AreInput,
    pub are: f64,
    pub p: Option<usize>,
    pub radial_moments: Option<RadialMoments>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Mc(#[from] McError),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn core_exit_code(e: &CoreError) -> i32 {
    match e {
        CoreError::NotPositiveDefinite | CoreError::Explosive(_) => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Csv(_) | CliError::Config(_) | CliError::Io { .. } => EXIT_INPUT,
            CliError::Core(e) | CliError::Mc(McError::Core(e)) => core_exit_code(e),
            CliError::Mc(McError::Config(_)) => EXIT_INPUT,
            CliError::Mc(_) | CliError::Json(_) => EXIT_NUMERICAL,
        }
    }
}

fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Test(args) => cmd_test(&args, out),
        Command::Simulate(args) => cmd_simulate(&args, std::env::var(THREADS_ENV).ok().as_deref(), out),
        Command::Are(args) => cmd_are(&args, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(io_err("stdout"))
}

pub fn cmd_test(args: &TestArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::Usage(format!("--alpha must lie in (0, 1), got {}", args.alpha)));
    }
    let series = csv_io::read_series_path(&args.input)?;
    let lags = LagWindow::new(args.lags)?;
    let outcome = PreparedSeries::new(&series.data).outcome(args.test, lags, args.alpha)?;
    let report = TestReport {
        test: args.test,
        lags: args.lags,
        n: series.data.n(),
        p: series.data.p(),
        header: series.header,
        outcome,
    };
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Text => render_test(&report),
    };
    emit(out, &text)
}

fn render_test(r: &TestReport) -> String {
    let o = &r.outcome;
    let mut lines = vec![
        format!("test          {}", r.test),
        format!("lags          {}", r.lags),
        format!("n             {}", r.n),
        format!("p             {}", r.p),
        format!("statistic     {:.10e}", o.statistic),
        format!("standardized  {:.6}", o.standardized),
        format!("p_value       {:.6e}", o.p_value),
        format!("alpha         {}", o.alpha),
        format!("reject        {}", o.reject),
    ];
    for (k, v) in &o.nuisance {
        lines.push(format!("{k:<13} {v:.10e}"));
    }
    lines.join("\n") + "\n"
}

/// Loads the experiment grid for `simulate` and applies command-line overrides.
pub fn load_experiment(args: &SimulateArgs, env_threads: Option<&str>) -> Result<Experiment, CliError> {
    let text = match (&args.config, args.preset) {
        (Some(path), _) => std::fs::read_to_string(path).map_err(io_err(path.display().to_string()))?,
        (None, Some(Preset::Table1)) => TABLE1_PRESET.to_string(),
        (None, Some(Preset::Table2)) => TABLE2_PRESET.to_string(),
        (None, None) => return Err(CliError::Usage("one of --config or --preset is required".into())),
    };
    let mut exp = parse_config(&text)?;
    if !args.cells.is_empty() {
        let missing: Vec<&str> =
            args.cells.iter().filter(|c| !exp.cells.iter().any(|x| &x.name == *c)).map(String::as_str).collect();
        if !missing.is_empty() {
            return Err(CliError::Usage(format!("unknown cells: {}", missing.join(", "))));
        }
        exp.cells.retain(|c| args.cells.contains(&c.name));
    }
    let env_threads = match env_threads {
        Some(s) => Some(
            s.trim()
                .parse::<usize>()
                .ok()
                .filter(|&t| t > 0)
                .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{s}`")))?,
        ),
        None => None,
    };
    for cell in &mut exp.cells {
        if let Some(r) = args.reps {
            cell.reps = r;
        }
        if let Some(s) = args.seed {
            cell.master_seed = s;
        }
        if let Some(t) = args.threads.or(env_threads) {
            cell.threads = Some(t);
        }
    }
    Ok(exp)
}

pub fn cmd_simulate(args: &SimulateArgs, env_threads: Option<&str>, out: &mut dyn Write) -> Result<(), CliError> {
    let exp = load_experiment(args, env_threads)?;
    for cell in &exp.cells {
        cell.validate()?;
    }
    let (table, reports) = match exp.layout {
        Layout::Size => size_table(&exp.cells)?,
        Layout::Power => power_table(&exp.cells)?,
    };
    if let Some(dir) = &args.out {
        write_outputs(dir, &table, &reports)?;
    }
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&reports)? + "\n",
        Format::Text => table.to_string(),
    };
    emit(out, &text)
}

fn write_outputs(dir: &Path, table: &Table, reports: &[McReport]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir.display().to_string()))?;
    let create = |name: &str| {
        let path = dir.join(name);
        std::fs::File::create(&path).map_err(io_err(path.display().to_string()))
    };
    serde_json::to_writer_pretty(create("report.json")?, reports)?;
    csv_io::write_cells(reports, create("cells.csv")?)?;
    csv_io::write_table(table, create("table.csv")?)?;
    Ok(())
}

pub fn are_input(args: &AreArgs) -> Result<AreInput, CliError> {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| CliError::Usage(format!("--dist {:?} needs {flag}", args.dist).to_lowercase()));
    Ok(match args.dist {
        Dist::Normal => AreInput::Normal,
        Dist::T => AreInput::StudentT { v: need(args.df, "--df")? },
        Dist::Mixture => AreInput::MixtureNormal { v: need(args.gamma, "--gamma")?, sigma: need(args.sigma, "--sigma")? },
    })
}

pub fn cmd_are(args: &AreArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let input = are_input(args)?;
    let are = are_ss_flm(input)?;
    let moments = args.p.map(|p| radial_moments(input, p)).transpose()?;
    let report = AreReport { input, are, p: args.p, radial_moments: moments };
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Text => {
            let mut s = format!("are           {are:.6}\n");
            if let (Some(p), Some(m)) = (report.p, report.radial_moments) {
                s += &format!("p             {p}\nE(1/r)        {:.10e}\nE(r^2)        {:.10e}\nc1            {:.10}\n", m.inv_mean, m.second_moment, m.c1);
            }
            s
        }
    };
    emit(out, &text)
}
