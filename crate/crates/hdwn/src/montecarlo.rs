//! Replication engine for empirical size and power.
//!
//! Replication `r` draws its series from the stream `(master_seed, r)` and
//! runs every requested test at every lag window on it. Results are merged
//! in replication order, so a report depends only on its configuration and
//! never on the thread count.

use std::fmt::{self, Write as _};
use std::time::Instant;

use hdwn_core::dgp::{
    build_covariance, gen_coeff, A1Shape, CoeffRegime, CoeffSpec, CovarianceKind, CovarianceSpec, H1Model, H1Spec,
    InnovationSampler, LinearProcess, ModelKind, ModelSpec, Radial, Scenario,
};
use hdwn_core::rng::{derive_seed, replication_rng, StreamRng, COEFFICIENT_TAG};
use hdwn_core::{Error as CoreError, LagWindow, PreparedSeries, SeriesMatrix, TestKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest tolerated fraction of failed replications per cell.
pub const MAX_ERROR_FRACTION: f64 = 0.01;

#[derive(Debug, thiserror::Error)]
pub enum McError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{test} with H = {lags}: {errors} of {reps} replications failed (first error: {first})")]
    ErrorBudget { test: TestKind, lags: usize, errors: usize, reps: usize, first: String },
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Series generator of an experiment cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Process {
    /// i.i.d. or VAR/VMA/VARMA series driven by scenario innovations.
    Linear {
        scenario: Scenario,
        covariance: CovarianceKind,
        model: ModelKind,
        /// Required unless `model` is `iid_null`.
        coeff: Option<CoeffRegime>,
        burn_in: Option<usize>,
    },
    /// The elliptical lag-one alternative.
    LagOne { sigma0: CovarianceKind, sigma1_scale: Option<f64>, a1_shape: A1Shape, radial: Radial },
}

impl Process {
    pub fn iid(scenario: Scenario) -> Self {
        Process::Linear { scenario, covariance: CovarianceKind::Identity, model: ModelKind::IidNull, coeff: None, burn_in: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub name: String,
    pub tests: Vec<TestKind>,
    pub process: Process,
    pub n: usize,
    pub p: usize,
    pub lags: Vec<usize>,
    pub alpha: f64,
    pub reps: usize,
    pub master_seed: u64,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
}

impl McConfig {
    pub fn validate(&self) -> Result<(), McError> {
        let fail = |msg: String| Err(McError::Config(format!("{}: {msg}", self.name)));
        if self.reps == 0 {
            return fail("reps must be at least 1".into());
        }
        if self.tests.is_empty() {
            return fail("no tests requested".into());
        }
        if self.lags.is_empty() {
            return fail("no lag windows requested".into());
        }
        for &h in &self.lags {
            if h == 0 || h + 2 > self.n {
                return fail(format!("lag window H = {h} needs 1 <= H <= n - 2 = {}", self.n as i64 - 2));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.threads == Some(0) {
            return fail("threads must be at least 1".into());
        }
        if self.p == 0 {
            return fail("p must be at least 1".into());
        }
        Ok(())
    }
}

/// Empirical rejection rate of one test at one lag window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub test: TestKind,
    pub lags: usize,
    pub rejections: usize,
    /// Replications in the denominator (`reps − errors`).
    pub valid: usize,
    pub errors: usize,
    pub reps: usize,
    pub rejection_rate: f64,
    /// `sqrt(rate (1 − rate) / valid)`.
    pub mc_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub config: McConfig,
    /// Seed of the coefficient matrix, when the model has one.
    pub coeff_seed: Option<u64>,
    pub cells: Vec<Cell>,
    pub wall_time_secs: f64,
}

impl McReport {
    pub fn cell(&self, test: TestKind, lags: usize) -> Option<&Cell> {
        self.cells.iter().find(|c| c.test == test && c.lags == lags)
    }
}

enum Generator {
    Linear(LinearProcess),
    LagOne(H1Model),
}

impl Generator {
    fn generate(&self, n: usize, rng: &mut StreamRng) -> Result<SeriesMatrix, CoreError> {
        match self {
            Generator::Linear(g) => g.generate(n, rng),
            Generator::LagOne(g) => g.generate(n, rng),
        }
    }
}

fn build_generator(cfg: &McConfig) -> Result<(Generator, Option<u64>), McError> {
    match cfg.process {
        Process::Linear { scenario, covariance, model, coeff, burn_in } => {
            let cov = build_covariance(CovarianceSpec { kind: covariance, p: cfg.p })?;
            let sampler = InnovationSampler::new(scenario, &cov)?;
            let (a, seed) = match (model, coeff) {
                (ModelKind::IidNull, _) => (hdwn_core::Matrix::zeros(cfg.p, cfg.p), None),
                (_, None) => return Err(McError::Config(format!("{}: model {model:?} needs a coefficient regime", cfg.name))),
                (_, Some(regime)) => {
                    let seed = derive_seed(cfg.master_seed, COEFFICIENT_TAG);
                    let a = gen_coeff(CoeffSpec { regime, p: cfg.p }, &mut replication_rng(seed, 0))?;
                    (a, Some(seed))
                }
            };
            let process = LinearProcess::new(ModelSpec { kind: model, burn_in }, a, sampler)?;
            Ok((Generator::Linear(process), seed))
        }
        Process::LagOne { sigma0, sigma1_scale, a1_shape, radial } => {
            let spec = H1Spec { sigma0, sigma1_scale, a1_shape, radial };
            Ok((Generator::LagOne(H1Model::new(spec, cfg.n, cfg.p)?), None))
        }
    }
}

/// Runs `f(r)` for `r in 0..reps` on a pool of `threads` workers and returns
/// the results in replication order.
pub fn map_replications<T, F>(reps: usize, threads: Option<usize>, f: F) -> Result<Vec<T>, McError>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| McError::Pool(e.to_string()))?;
    Ok(pool.install(|| (0..reps as u64).into_par_iter().map(&f).collect()))
}

/// Per replication: one entry per (test, lag), `Err` holding the message.
type RepOutcome = Result<Vec<Result<bool, String>>, CoreError>;

pub fn run_experiment(cfg: &McConfig) -> Result<McReport, McError> {
    cfg.validate()?;
    let start = Instant::now();
    let (generator, coeff_seed) = build_generator(cfg)?;
    let windows: Vec<LagWindow> = cfg.lags.iter().map(|&h| LagWindow::new(h)).collect::<Result<_, _>>()?;
    let results: Vec<RepOutcome> = map_replications(cfg.reps, cfg.threads, |r| {
        let series = generator.generate(cfg.n, &mut replication_rng(cfg.master_seed, r))?;
        let mut prepared = PreparedSeries::new(&series);
        let mut flags = Vec::with_capacity(cfg.tests.len() * windows.len());
        for &test in &cfg.tests {
            for &w in &windows {
                flags.push(prepared.outcome(test, w, cfg.alpha).map(|o| o.reject).map_err(|e| e.to_string()));
            }
        }
        Ok(flags)
    })?;
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        rows.push(r?);
    }
    let mut cells = Vec::new();
    for (ti, &test) in cfg.tests.iter().enumerate() {
        for (li, &lags) in cfg.lags.iter().enumerate() {
            let k = ti * cfg.lags.len() + li;
            let (mut rejections, mut errors, mut first) = (0, 0, None);
            for row in &rows {
                match &row[k] {
                    Ok(true) => rejections += 1,
                    Ok(false) => {}
                    Err(msg) => {
                        errors += 1;
                        first.get_or_insert_with(|| msg.clone());
                    }
                }
            }
            let valid = cfg.reps - errors;
            if errors as f64 > MAX_ERROR_FRACTION * cfg.reps as f64 || valid == 0 {
                return Err(McError::ErrorBudget { test, lags, errors, reps: cfg.reps, first: first.unwrap_or_default() });
            }
            let rate = rejections as f64 / valid as f64;
            cells.push(Cell {
                test,
                lags,
                rejections,
                valid,
                errors,
                reps: cfg.reps,
                rejection_rate: rate,
                mc_se: (rate * (1.0 - rate) / valid as f64).sqrt(),
            });
        }
    }
    Ok(McReport { config: cfg.clone(), coeff_seed, cells, wall_time_secs: start.elapsed().as_secs_f64() })
}

/// Rates laid out as rows (one per experiment) by `test × H` columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub row_labels: Vec<String>,
    /// `(test, H)` per column.
    pub columns: Vec<(TestKind, usize)>,
    /// `values[row][col]`; `None` when the experiment did not run that pair.
    pub values: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn from_reports(reports: &[McReport], label: impl Fn(&McConfig) -> String) -> Self {
        let mut lags: Vec<usize> = Vec::new();
        let mut tests: Vec<TestKind> = Vec::new();
        for c in reports.iter().flat_map(|r| &r.cells) {
            if !lags.contains(&c.lags) {
                lags.push(c.lags);
            }
            if !tests.contains(&c.test) {
                tests.push(c.test);
            }
        }
        lags.sort_unstable();
        let columns: Vec<(TestKind, usize)> = lags.iter().flat_map(|&h| tests.iter().map(move |&t| (t, h))).collect();
        let values = reports
            .iter()
            .map(|r| columns.iter().map(|&(t, h)| r.cell(t, h).map(|c| c.rejection_rate)).collect())
            .collect();
        Self { row_labels: reports.iter().map(|r| label(&r.config)).collect(), columns, values }
    }

    pub fn is_empty(&self) -> bool {
        self.row_labels.is_empty()
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|(t, h)| format!("{} H={h}", t.name().to_uppercase())).collect()
    }
}

impl fmt::Display for Table {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label_width = self.row_labels.iter().map(|l| l.chars().count()).max().unwrap_or(0).max(4);
        let names = self.column_names();
        let width = names.iter().map(String::len).max().unwrap_or(0).max(6);
        let mut line = format!("{:label_width$}", "cell");
        for name in &names {
            write!(line, "  {name:>width$}")?;
        }
        writeln!(f, "{}", line.trim_end())?;
        for (label, row) in self.row_labels.iter().zip(&self.values) {
            let mut line = format!("{label:label_width$}");
            for v in row {
                match v {
                    Some(v) => write!(line, "  {v:>width$.3}")?,
                    None => write!(line, "  {:>width$}", "-")?,
                }
            }
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

fn scenario_label(s: Scenario) -> String {
    match s {
        Scenario::Normal => "normal".into(),
        Scenario::StudentT { df } => format!("t({df})"),
        Scenario::MixtureNormal { gamma, scale_factor } => format!("mixture({gamma},{scale_factor})"),
    }
}

fn process_label(p: &Process) -> String {
    match p {
        Process::Linear { scenario, coeff, model, .. } => {
            let model = match model {
                ModelKind::IidNull => "iid",
                ModelKind::Var1 => "VAR(1)",
                ModelKind::Vma1 => "VMA(1)",
                ModelKind::Varma1 => "VARMA(1)",
            };
            let regime = match coeff {
                None => String::new(),
                Some(CoeffRegime::Dense) => " dense".into(),
                Some(CoeffRegime::Sparse) => " sparse".into(),
                Some(CoeffRegime::Explicit { m, .. }) => format!(" m={m}"),
            };
            format!("{}{regime} {model}", scenario_label(*scenario))
        }
        Process::LagOne { radial, .. } => format!("lag-one {radial:?}"),
    }
}

fn run_grid(grid: &[McConfig]) -> Result<Vec<McReport>, McError> {
    grid.iter().map(run_experiment).collect()
}

/// Size layout: one row per `(scenario, n, p)`.
pub fn size_table(grid: &[McConfig]) -> Result<(Table, Vec<McReport>), McError> {
    let reports = run_grid(grid)?;
    let table = Table::from_reports(&reports, |c| {
        let scenario = match &c.process {
            Process::Linear { scenario, .. } => scenario_label(*scenario),
            other => process_label(other),
        };
        format!("{scenario} n={} p={}", c.n, c.p)
    });
    Ok((table, reports))
}

/// Power layout: one row per `(scenario, regime, model)`.
pub fn power_table(grid: &[McConfig]) -> Result<(Table, Vec<McReport>), McError> {
    let reports = run_grid(grid)?;
    let table = Table::from_reports(&reports, |c| process_label(&c.process));
    Ok((table, reports))
}
