//! Run configuration, read from TOML.
//!
//! ```toml
//! [model]
//! family = "tfim-para"
//! n_sites = 8
//! s_max = 0.5
//! gap = 1.0
//!
//! [schedule]
//! k_max = 16
//! eps_final = 1e-3
//!
//! [filter]
//! q = "auto"
//!
//! [observables]
//! products = ["Z*", "X*"]
//!
//! [output]
//! log = "-"
//! ```
//!
//! Every key outside `[model]` has a default. Unknown keys are rejected.

use std::fmt;

use adiabat_core::filter::Quadrature;
use adiabat_core::model::ModelSpec;
use serde::{Deserialize, Serialize};

use crate::observables::parse_observable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoKeyword {
    #[serde(rename = "auto")]
    Auto,
}

/// A value that may be left to the program as `"auto"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AutoOr<T> {
    Auto(AutoKeyword),
    Value(T),
}

impl<T: Copy> AutoOr<T> {
    pub fn auto() -> Self {
        AutoOr::Auto(AutoKeyword::Auto)
    }

    pub fn value(self) -> Option<T> {
        match self {
            AutoOr::Auto(_) => None,
            AutoOr::Value(v) => Some(v),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Step2a {
    #[default]
    Gaussian,
    Power,
    EvenOdd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub observables: ObservablesConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub k_max: usize,
    pub eps_final: f64,
    pub paper_faithful: bool,
    pub oracle_checks: bool,
    pub seed: u64,
    /// Abort with exit 3 when an improved state's bond exceeds this.
    pub max_bond_budget: usize,
    pub step2a: Step2a,
    pub tau: f64,
    pub steps_per_a: usize,
    pub fine_schedule_factor: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            k_max: 16,
            eps_final: 1e-3,
            paper_faithful: false,
            oracle_checks: true,
            seed: 0,
            max_bond_budget: 4096,
            step2a: Step2a::Gaussian,
            tau: 0.05,
            steps_per_a: 8,
            fine_schedule_factor: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterConfig {
    pub q: AutoOr<f64>,
    /// `auto` uses the schedule's per-step target.
    pub target_eps: AutoOr<f64>,
    pub quadrature: Quadrature,
    pub substeps_per_unit: usize,
    /// `auto` is `4 k_max`.
    pub evolve_bond_cap: AutoOr<usize>,
    pub sum_batch: usize,
    pub max_nodes: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            q: AutoOr::auto(),
            target_eps: AutoOr::auto(),
            quadrature: Quadrature::Trapezoid,
            substeps_per_unit: 20,
            evolve_bond_cap: AutoOr::auto(),
            sum_batch: 8,
            max_nodes: 200_000,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservablesConfig {
    /// Products like `"Z3 X4"`; `"Z*"` expands to one entry per site.
    pub products: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Log file, `-` for stdout.
    pub log: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { log: "-".into() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(
                f,
                "config error at line {l}, key `{}`: {}",
                self.key, self.message
            ),
            None => write!(f, "config error, key `{}`: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// 1-based line of `key` inside `[section]`, by a plain scan.
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix('[') {
            current = rest.trim_end_matches(']').trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let mut line = e
            .span()
            .map(|sp| text[..sp.start.min(text.len())].lines().count().max(1));
        let key = e.message().split('`').nth(1).unwrap_or("").to_string();
        // unknown fields are reported at their table; point at the key itself
        if e.message().starts_with("unknown field") {
            let from = line.unwrap_or(1);
            let hit = text
                .lines()
                .enumerate()
                .skip(from - 1)
                .find(|(_, l)| l.split_once('=').is_some_and(|(k, _)| k.trim() == key));
            if let Some((i, _)) = hit {
                line = Some(i + 1);
            }
        }
        ConfigError {
            key,
            line,
            message: e.message().trim().to_string(),
        }
    })?;
    validate(&cfg, text)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig, text: &str) -> Result<(), ConfigError> {
    let fail = |section: &str, key: &str, message: String| ConfigError {
        key: format!("{section}.{key}"),
        line: locate(text, section, key),
        message,
    };
    let m = &cfg.model;
    if m.n_sites < 2 {
        return Err(fail(
            "model",
            "n_sites",
            format!("n_sites must be >= 2, got {}", m.n_sites),
        ));
    }
    if !(m.s_max >= 0.0 && m.s_max.is_finite()) {
        return Err(fail(
            "model",
            "s_max",
            format!("s_max must be >= 0, got {}", m.s_max),
        ));
    }
    if !(m.gap > 0.0 && m.gap.is_finite()) {
        return Err(fail(
            "model",
            "gap",
            format!("gap must be > 0, got {}", m.gap),
        ));
    }
    if !matches!(m.family.as_str(), "tfim-para" | "custom") {
        return Err(fail(
            "model",
            "family",
            format!("family must be tfim-para or custom, got {:?}", m.family),
        ));
    }
    let s = &cfg.schedule;
    if s.k_max < 1 {
        return Err(fail("schedule", "k_max", "k_max must be >= 1".into()));
    }
    if !(s.eps_final > 0.0 && s.eps_final < 1.0) {
        return Err(fail(
            "schedule",
            "eps_final",
            "eps_final must be in (0,1)".into(),
        ));
    }
    if s.max_bond_budget < s.k_max {
        return Err(fail(
            "schedule",
            "max_bond_budget",
            "max_bond_budget must be >= k_max".into(),
        ));
    }
    if s.step2a == Step2a::EvenOdd && !(s.tau > 0.0) {
        return Err(fail(
            "schedule",
            "tau",
            format!("tau must be > 0, got {}", s.tau),
        ));
    }
    if s.fine_schedule_factor < 1 {
        return Err(fail(
            "schedule",
            "fine_schedule_factor",
            "fine_schedule_factor must be >= 1".into(),
        ));
    }
    let f = &cfg.filter;
    if let Some(q) = f.q.value() {
        if !(q > 0.0) {
            return Err(fail("filter", "q", format!("q must be > 0, got {q}")));
        }
    }
    if let Some(e) = f.target_eps.value() {
        if !(e > 0.0 && e < 1.0) {
            return Err(fail(
                "filter",
                "target_eps",
                "target_eps must be in (0,1)".into(),
            ));
        }
    }
    if f.substeps_per_unit < 1 {
        return Err(fail(
            "filter",
            "substeps_per_unit",
            "substeps_per_unit must be >= 1".into(),
        ));
    }
    if f.evolve_bond_cap.value() == Some(0) {
        return Err(fail(
            "filter",
            "evolve_bond_cap",
            "evolve_bond_cap must be >= 1".into(),
        ));
    }
    if f.sum_batch < 1 {
        return Err(fail("filter", "sum_batch", "sum_batch must be >= 1".into()));
    }
    for p in &cfg.observables.products {
        if let Err(e) = parse_observable(p, m.n_sites) {
            return Err(fail("observables", "products", e.to_string()));
        }
    }
    if cfg.output.log.is_empty() {
        return Err(fail("output", "log", "log must be a path or -".into()));
    }
    Ok(())
}

/// Canonical text form: every key present, fixed order.
pub fn to_canonical(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("config is always representable")
}
