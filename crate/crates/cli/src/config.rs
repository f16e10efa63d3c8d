//! TOML config files.
//!
//! Keys mirror the fields of [`ExperimentConfig`]; complex numbers are written
//! as `a+bi` strings. Every config has a canonical form (polynomial in normal
//! form, every optional field spelled out) whose SHA-256 is the config hash.
//!
//! ```toml
//! polynomial = "x1 - 2"
//! alphas = ["1+0i"]
//! cutoff = 12
//! steps_per_unit_time = 20.0
//! scan_grid = 19
//!
//! [boundary]
//! scheme = "antiperiodic"
//! c = "1+0i"
//!
//! [t_sweep]
//! t0 = 1.0
//! ratio = 2.0
//! count = 8
//! ```

use std::fmt;
use std::path::Path;

use adia_core::criterion::{ExperimentConfig, InitialState, SearchOptions, TSweep};
use adia_core::{Boundary, C64};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// A complex number stored as `a+bi` text.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexText(pub C64);

impl fmt::Display for ComplexText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Debug keeps every digit of both parts
        let C64 { re, im } = self.0;
        // a negative zero imaginary part prints as +0 so the text is canonical
        let sign = if im < 0.0 { '-' } else { '+' };
        write!(f, "{re:?}{sign}{:?}i", im.abs())
    }
}

impl Serialize for ComplexText {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ComplexText {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_complex(&text).map(ComplexText).map_err(serde::de::Error::custom)
    }
}

/// Parses `a+bi`, `a`, or `bi`.
pub fn parse_complex(text: &str) -> std::result::Result<C64, String> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    compact.parse::<C64>().map_err(|_| format!("invalid complex number `{text}`, expected a+bi"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Abrupt,
    Periodic,
    Antiperiodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    pub scheme: Scheme,
    /// Wrap coefficient; defaults to `1+0i` for wrapped schemes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<ComplexText>,
}

impl BoundarySection {
    pub fn resolve(&self) -> std::result::Result<Boundary, String> {
        let c = self.c.map_or(C64::new(1.0, 0.0), |c| c.0);
        let bc = match self.scheme {
            Scheme::Abrupt if self.c.is_some() => return Err("`c` only applies to wrapped schemes".into()),
            Scheme::Abrupt => Ok(Boundary::Abrupt),
            Scheme::Periodic => Boundary::periodic(c),
            Scheme::Antiperiodic => Boundary::antiperiodic(c),
        };
        bc.map_err(|e| e.to_string())
    }

    pub fn from_boundary(bc: &Boundary) -> Self {
        match *bc {
            Boundary::Abrupt => Self { scheme: Scheme::Abrupt, c: None },
            Boundary::Periodic { c } => Self { scheme: Scheme::Periodic, c: Some(ComplexText(c)) },
            Boundary::AntiPeriodic { c } => Self { scheme: Scheme::Antiperiodic, c: Some(ComplexText(c)) },
        }
    }
}

fn default_steps() -> f64 {
    20.0
}

fn default_grid() -> usize {
    19
}

/// On-disk form of [`ExperimentConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub polynomial: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_vars: Option<usize>,
    pub alphas: Vec<ComplexText>,
    pub cutoff: usize,
    #[serde(default = "default_steps")]
    pub steps_per_unit_time: f64,
    #[serde(default = "default_grid")]
    pub scan_grid: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub initial_state: InitialState,
    pub boundary: BoundarySection,
    pub t_sweep: TSweep,
}

impl ExperimentFile {
    pub fn into_config(self) -> std::result::Result<ExperimentConfig, String> {
        let config = ExperimentConfig {
            polynomial: self.polynomial,
            num_vars: self.num_vars,
            alphas: self.alphas.into_iter().map(|a| a.0).collect(),
            cutoff: self.cutoff,
            boundary: self.boundary.resolve()?,
            t_sweep: self.t_sweep,
            steps_per_unit_time: self.steps_per_unit_time,
            scan_grid: self.scan_grid,
            seed: self.seed,
            initial_state: self.initial_state,
        };
        config.validate().map_err(|e| e.to_string())?;
        Ok(config)
    }

    fn from_config(config: &ExperimentConfig) -> adia_core::Result<Self> {
        let poly = config.validate()?;
        Ok(Self {
            polynomial: poly.to_string(),
            num_vars: Some(poly.num_vars()),
            alphas: config.alphas.iter().copied().map(ComplexText).collect(),
            cutoff: config.cutoff,
            steps_per_unit_time: config.steps_per_unit_time,
            scan_grid: config.scan_grid,
            seed: config.seed,
            initial_state: config.initial_state,
            boundary: BoundarySection::from_boundary(&config.boundary),
            t_sweep: config.t_sweep,
        })
    }
}

/// Canonical TOML text of a valid config.
pub fn canonical_toml(config: &ExperimentConfig) -> Result<String> {
    Ok(toml::to_string(&ExperimentFile::from_config(config)?)?)
}

/// Hex SHA-256 of [`canonical_toml`].
pub fn config_hash(config: &ExperimentConfig) -> Result<String> {
    Ok(digest(&canonical_toml(config)?))
}

pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })
}

fn invalid(path: &Path, message: impl fmt::Display) -> CliError {
    CliError::Config { path: path.to_path_buf(), message: message.to_string() }
}

pub fn parse_experiment(text: &str, path: &Path) -> Result<ExperimentConfig> {
    let file: ExperimentFile = toml::from_str(text).map_err(|e| invalid(path, e.message()))?;
    file.into_config().map_err(|m| invalid(path, m))
}

pub fn load_experiment(path: &Path) -> Result<ExperimentConfig> {
    parse_experiment(&read(path)?, path)
}

/// Optional overrides of the search sampling ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptionsSection {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub coefficient_bound: i64,
    pub max_degree: u32,
    pub t_min: f64,
    pub t_max: f64,
    pub steps_per_unit_time: f64,
}

impl Default for OptionsSection {
    fn default() -> Self {
        let o = SearchOptions::default();
        Self {
            alpha_min: o.alpha_min,
            alpha_max: o.alpha_max,
            coefficient_bound: o.coefficient_bound,
            max_degree: o.max_degree,
            t_min: o.t_min,
            t_max: o.t_max,
            steps_per_unit_time: o.steps_per_unit_time,
        }
    }
}

impl From<OptionsSection> for SearchOptions {
    fn from(o: OptionsSection) -> Self {
        Self {
            alpha_min: o.alpha_min,
            alpha_max: o.alpha_max,
            coefficient_bound: o.coefficient_bound,
            max_degree: o.max_degree,
            t_min: o.t_min,
            t_max: o.t_max,
            steps_per_unit_time: o.steps_per_unit_time,
        }
    }
}

/// Config of a counterexample search.
///
/// ```toml
/// dimension = 5
/// trials = 10000
/// seed = 2006
///
/// [boundary]
/// scheme = "abrupt"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchFile {
    pub dimension: usize,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    pub boundary: BoundarySection,
    #[serde(default)]
    pub options: OptionsSection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub dimension: usize,
    pub trials: u64,
    pub seed: u64,
    pub boundary: Boundary,
    pub options: SearchOptions,
    pub hash: String,
}

fn validate_options(o: &OptionsSection) -> std::result::Result<(), String> {
    if !(o.alpha_min > 0.0 && o.alpha_min <= o.alpha_max && o.alpha_max.is_finite()) {
        return Err(format!("need 0 < alpha_min <= alpha_max, got {} and {}", o.alpha_min, o.alpha_max));
    }
    if !(o.t_min > 0.0 && o.t_min <= o.t_max && o.t_max.is_finite()) {
        return Err(format!("need 0 < t_min <= t_max, got {} and {}", o.t_min, o.t_max));
    }
    if o.coefficient_bound < 0 {
        return Err(format!("coefficient_bound must be non-negative, got {}", o.coefficient_bound));
    }
    if !(o.steps_per_unit_time > 0.0 && o.steps_per_unit_time.is_finite()) {
        return Err(format!("steps_per_unit_time must be positive, got {}", o.steps_per_unit_time));
    }
    Ok(())
}

pub fn parse_search(text: &str, path: &Path) -> Result<SearchConfig> {
    let file: SearchFile = toml::from_str(text).map_err(|e| invalid(path, e.message()))?;
    let boundary = file.boundary.resolve().map_err(|m| invalid(path, m))?;
    if file.dimension < 2 {
        return Err(invalid(path, format!("dimension must be at least 2, got {}", file.dimension)));
    }
    validate_options(&file.options).map_err(|m| invalid(path, m))?;
    let canonical = SearchFile { boundary: BoundarySection::from_boundary(&boundary), ..file.clone() };
    Ok(SearchConfig {
        dimension: file.dimension,
        trials: file.trials,
        seed: file.seed,
        boundary,
        options: file.options.into(),
        hash: digest(&toml::to_string(&canonical)?),
    })
}

pub fn load_search(path: &Path) -> Result<SearchConfig> {
    parse_search(&read(path)?, path)
}
