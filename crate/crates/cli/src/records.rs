//! Line-delimited JSON log. Every line is one object whose `record` field
//! names its kind. Wall-clock values only ever appear under a `timing` key,
//! so logs compare equal across runs once `timing` is dropped.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use adiabat_core::driver::StepDiagnostics;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableValue {
    pub label: String,
    pub re: f64,
    pub im: f64,
}

/// Values the run derives from its config before the first step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub coupling: f64,
    pub rescale: f64,
    pub a_max: usize,
    pub delta: f64,
    pub eps_step: f64,
    pub tracking_bound: f64,
    pub steps: usize,
    pub q: Option<f64>,
    pub t_max: Option<f64>,
    pub n_nodes: Option<usize>,
    pub evolve_bond_cap: Option<usize>,
    pub oracle_mode: bool,
    pub parallel: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub mode: String,
    pub steps: usize,
    pub final_fidelity: Option<f64>,
    pub final_energy: f64,
    pub max_eps: Option<f64>,
    pub flagged_steps: usize,
    pub timing: Timing,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum Record {
    Header {
        schema: u32,
        command: String,
        /// The config with every default filled in.
        config: Value,
        derived: Derived,
    },
    Warning {
        message: String,
    },
    Step(StepDiagnostics),
    Result {
        steps: usize,
        flagged_steps: usize,
        observables: Vec<ObservableValue>,
        final_energy: f64,
        final_fidelity: Option<f64>,
        min_gap: Option<f64>,
        final_max_bond: usize,
    },
    Error {
        exit_code: i32,
        kind: String,
        message: String,
    },
    Check {
        suite: String,
        name: String,
        measured: f64,
        bound: f64,
        pass: bool,
        #[serde(default, skip_serializing_if = "String::is_empty")]
        detail: String,
    },
    Summary {
        suite: String,
        checks: usize,
        failed: usize,
        pass: bool,
    },
    Comparison {
        rows: Vec<ComparisonRow>,
    },
    Oracle {
        model: String,
        n_sites: usize,
        s: f64,
        ground_energy: f64,
        gap: f64,
        degenerate: bool,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        observables: Vec<ObservableValue>,
    },
    Diagnostic {
        name: String,
        value: Value,
        timing: Timing,
    },
}

/// Single writer for one log stream; flushes after every record so a crash
/// leaves a complete prefix.
pub struct LogWriter {
    out: Box<dyn Write>,
}

impl LogWriter {
    pub fn stdout() -> Self {
        LogWriter {
            out: Box::new(io::stdout()),
        }
    }

    pub fn to_path(path: &Path) -> io::Result<Self> {
        if path.as_os_str() == "-" {
            return Ok(Self::stdout());
        }
        Ok(LogWriter {
            out: Box::new(BufWriter::new(File::create(path)?)),
        })
    }

    pub fn from_writer(out: Box<dyn Write>) -> Self {
        LogWriter { out }
    }

    pub fn emit(&mut self, record: &Record) -> io::Result<()> {
        let line = serde_json::to_string(record).map_err(io::Error::other)?;
        writeln!(self.out, "{line}")?;
        self.out.flush()
    }
}

/// Drops every `timing` key, recursively.
pub fn strip_timing(mut v: Value) -> Value {
    fn walk(v: &mut Value) {
        match v {
            Value::Object(m) => {
                m.remove("timing");
                m.values_mut().for_each(walk);
            }
            Value::Array(a) => a.iter_mut().for_each(walk),
            _ => {}
        }
    }
    walk(&mut v);
    v
}
