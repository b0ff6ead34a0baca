//! Experiment configuration files.
//!
//! A config is TOML with an optional top-level `layout`, a `[defaults]`
//! table and one `[cell.NAME]` table per experiment cell. Cell keys override
//! defaults. Example:
//!
//! ```toml
//! layout = "size"
//!
//! [defaults]
//! tests = ["max", "ss", "flm", "fc"]
//! lags = [1, 2, 3]
//! reps = 1000
//! seed = 7
//!
//! [cell.normal_100_40]
//! scenario = "normal"
//! n = 100
//! p = 40
//! ```

use hdwn_core::dgp::{A1Shape, CoeffRegime, CovarianceKind, ModelKind, Radial, Scenario};
use hdwn_core::TestKind;
use serde::Deserialize;

use crate::montecarlo::{McConfig, Process};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("unknown config keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Table layout used when rendering results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    #[default]
    Size,
    Power,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub layout: Layout,
    pub cells: Vec<McConfig>,
}

const TOP_LEVEL_KEYS: &[&str] = &["layout", "defaults", "cell"];

const CELL_KEYS: &[&str] = &[
    "tests", "lags", "alpha", "reps", "seed", "threads", "n", "p", "model", "scenario", "df", "gamma",
    "mixture_scale", "covariance", "coeff", "coeff_m", "coeff_low", "coeff_high", "burn_in", "sigma0", "tau", "a1",
    "radial", "radial_value", "radial_df",
];

pub const DEFAULT_TESTS: [TestKind; 4] = [TestKind::Max, TestKind::Ss, TestKind::Flm, TestKind::Fc];
pub const DEFAULT_LAGS: [usize; 3] = [1, 2, 3];
pub const DEFAULT_REPS: usize = 1000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Default, Deserialize)]
struct RawCell {
    tests: Option<Vec<String>>,
    lags: Option<Vec<usize>>,
    alpha: Option<f64>,
    reps: Option<usize>,
    seed: Option<u64>,
    threads: Option<usize>,
    n: Option<usize>,
    p: Option<usize>,
    model: Option<String>,
    scenario: Option<String>,
    df: Option<f64>,
    gamma: Option<f64>,
    mixture_scale: Option<f64>,
    covariance: Option<String>,
    coeff: Option<String>,
    coeff_m: Option<usize>,
    coeff_low: Option<f64>,
    coeff_high: Option<f64>,
    burn_in: Option<usize>,
    sigma0: Option<String>,
    tau: Option<f64>,
    a1: Option<String>,
    radial: Option<String>,
    radial_value: Option<f64>,
    radial_df: Option<f64>,
}

fn unknown_keys(table: &toml::Table, allowed: &[&str], prefix: &str, out: &mut Vec<String>) {
    for key in table.keys() {
        if !allowed.contains(&key.as_str()) {
            out.push(format!("{prefix}{key}"));
        }
    }
}

fn as_table<'a>(value: &'a toml::Value, what: &str) -> Result<&'a toml::Table, ConfigError> {
    value.as_table().ok_or_else(|| ConfigError::Invalid(format!("`{what}` must be a table")))
}

pub fn parse_config(text: &str) -> Result<Experiment, ConfigError> {
    let root: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    let empty = toml::Table::new();
    let defaults = match root.get("defaults") {
        Some(v) => as_table(v, "defaults")?,
        None => &empty,
    };
    let cells = match root.get("cell") {
        Some(v) => as_table(v, "cell")?,
        None => &empty,
    };

    let mut unknown = Vec::new();
    unknown_keys(&root, TOP_LEVEL_KEYS, "", &mut unknown);
    unknown_keys(defaults, CELL_KEYS, "defaults.", &mut unknown);
    for (name, cell) in cells {
        unknown_keys(as_table(cell, &format!("cell.{name}"))?, CELL_KEYS, &format!("cell.{name}."), &mut unknown);
    }
    if !unknown.is_empty() {
        return Err(ConfigError::UnknownKeys(unknown));
    }

    let layout = match root.get("layout") {
        Some(v) => v.clone().try_into().map_err(|e: toml::de::Error| ConfigError::Invalid(format!("layout: {e}")))?,
        None => Layout::default(),
    };
    let mut out = Vec::with_capacity(cells.len());
    for (name, cell) in cells {
        let mut merged = defaults.clone();
        for (k, v) in as_table(cell, name)? {
            merged.insert(k.clone(), v.clone());
        }
        let raw: RawCell = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Invalid(format!("cell.{name}: {e}")))?;
        out.push(build_cell(name, raw).map_err(|e| ConfigError::Invalid(format!("cell.{name}: {e}")))?);
    }
    Ok(Experiment { layout, cells: out })
}

fn parse_scenario(raw: &RawCell) -> Result<Scenario, String> {
    match raw.scenario.as_deref().unwrap_or("normal") {
        "normal" => Ok(Scenario::Normal),
        "t" => Ok(Scenario::StudentT { df: raw.df.unwrap_or(Scenario::DEFAULT_DF) }),
        "mixture" => Ok(Scenario::MixtureNormal {
            gamma: raw.gamma.unwrap_or(Scenario::DEFAULT_GAMMA),
            scale_factor: raw.mixture_scale.unwrap_or(Scenario::DEFAULT_SCALE_FACTOR),
        }),
        other => Err(format!("unknown scenario `{other}` (normal, t, mixture)")),
    }
}

fn parse_covariance(name: Option<&str>) -> Result<CovarianceKind, String> {
    match name.unwrap_or("identity") {
        "identity" => Ok(CovarianceKind::Identity),
        "poly_decay" => Ok(CovarianceKind::PolyDecay),
        other => Err(format!("unknown covariance `{other}` (identity, poly_decay)")),
    }
}

fn parse_coeff(raw: &RawCell) -> Result<Option<CoeffRegime>, String> {
    Ok(match raw.coeff.as_deref() {
        None => None,
        Some("dense") => Some(CoeffRegime::Dense),
        Some("sparse") => Some(CoeffRegime::Sparse),
        Some("explicit") => Some(CoeffRegime::Explicit {
            m: raw.coeff_m.ok_or("explicit coefficients need coeff_m")?,
            low: raw.coeff_low.ok_or("explicit coefficients need coeff_low")?,
            high: raw.coeff_high.ok_or("explicit coefficients need coeff_high")?,
        }),
        Some(other) => return Err(format!("unknown coeff `{other}` (dense, sparse, explicit)")),
    })
}

fn parse_radial(raw: &RawCell) -> Result<Radial, String> {
    match raw.radial.as_deref().unwrap_or("chi") {
        "chi" => Ok(Radial::ChiP),
        "constant" => Ok(Radial::Constant { value: raw.radial_value.unwrap_or(1.0) }),
        "t" => Ok(Radial::StudentT { df: raw.radial_df.ok_or("t radial needs radial_df")? }),
        other => Err(format!("unknown radial `{other}` (chi, constant, t)")),
    }
}

fn build_cell(name: &str, raw: RawCell) -> Result<McConfig, String> {
    let tests = match &raw.tests {
        None => DEFAULT_TESTS.to_vec(),
        Some(names) => names.iter().map(|s| s.parse::<TestKind>().map_err(|e| e.to_string())).collect::<Result<_, _>>()?,
    };
    let model = raw.model.as_deref().unwrap_or("iid");
    let process = if model == "lag_one" {
        Process::LagOne {
            sigma0: parse_covariance(raw.sigma0.as_deref())?,
            sigma1_scale: raw.tau,
            a1_shape: match raw.a1.as_deref().unwrap_or("shift") {
                "shift" => A1Shape::CyclicShift,
                "identity" => A1Shape::Identity,
                other => return Err(format!("unknown a1 `{other}` (shift, identity)")),
            },
            radial: parse_radial(&raw)?,
        }
    } else {
        let model = match model {
            "iid" => ModelKind::IidNull,
            "var1" => ModelKind::Var1,
            "vma1" => ModelKind::Vma1,
            "varma1" => ModelKind::Varma1,
            other => return Err(format!("unknown model `{other}` (iid, var1, vma1, varma1, lag_one)")),
        };
        Process::Linear {
            scenario: parse_scenario(&raw)?,
            covariance: parse_covariance(raw.covariance.as_deref())?,
            model,
            coeff: parse_coeff(&raw)?,
            burn_in: raw.burn_in,
        }
    };
    Ok(McConfig {
        name: name.to_string(),
        tests,
        process,
        n: raw.n.ok_or("missing n")?,
        p: raw.p.ok_or("missing p")?,
        lags: raw.lags.clone().unwrap_or_else(|| DEFAULT_LAGS.to_vec()),
        alpha: raw.alpha.unwrap_or(0.05),
        reps: raw.reps.unwrap_or(DEFAULT_REPS),
        master_seed: raw.seed.unwrap_or(DEFAULT_SEED),
        threads: raw.threads,
    })
}
