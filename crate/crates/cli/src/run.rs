use std::path::Path;

use adiabat_core::driver::{
    adiabatic_follow, compute_schedule, filter_plan_for, AdiabaticSchedule, DriverError,
    FollowEvent, FollowOptions, RunResult,
};
use adiabat_core::filter::{FilterError, FilterOptions};
use adiabat_core::model::{build_path, HamiltonianPath, ModelError};
use adiabat_core::mps::ObservableProduct;
use adiabat_core::oracle::{OracleError, OracleLimits};
use adiabat_core::par::Exec;
use adiabat_core::variants::{variant_follow, VariantConfig};

use crate::config::{RunConfig, Step2a};
use crate::observables::parse_all;
use crate::records::{Derived, LogWriter, ObservableValue, Record, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_BREACH: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

pub fn exit_code_for(err: &DriverError) -> i32 {
    match err {
        DriverError::InvariantBreach { .. } => EXIT_BREACH,
        DriverError::ResourceAbort(_)
        | DriverError::Filter(FilterError::TooManyNodes { .. })
        | DriverError::Oracle(OracleError::TooLarge { .. } | OracleError::TooManySites { .. }) => {
            EXIT_RESOURCE
        }
        DriverError::InvalidSchedule(_) | DriverError::Filter(FilterError::InvalidParameter(_)) => {
            EXIT_USAGE
        }
        _ => EXIT_BREACH,
    }
}

fn error_kind(err: &DriverError) -> &'static str {
    match err {
        DriverError::InvariantBreach { .. } => "invariant_breach",
        DriverError::ResourceAbort(_) => "resource_abort",
        DriverError::InvalidSchedule(_) => "invalid_schedule",
        DriverError::Filter(_) => "filter",
        DriverError::Mps(_) => "mps",
        DriverError::Oracle(_) => "oracle",
    }
}

fn model_exit(err: &ModelError) -> (i32, &'static str) {
    match err {
        ModelError::BoundViolated(..) => (EXIT_BREACH, "bound_violated"),
        _ => (EXIT_USAGE, "model"),
    }
}

pub fn default_exec() -> Exec {
    if cfg!(feature = "parallel") {
        Exec::Parallel
    } else {
        Exec::Sequential
    }
}

/// Driver options implied by a config.
pub fn follow_options(cfg: &RunConfig) -> FollowOptions {
    let f = &cfg.filter;
    let s = &cfg.schedule;
    FollowOptions {
        filter: FilterOptions {
            quadrature: f.quadrature,
            paper_faithful: s.paper_faithful,
            substeps_per_unit: f.substeps_per_unit,
            evolve_bond_cap: f.evolve_bond_cap.value(),
            max_nodes: f.max_nodes,
            sum_batch: f.sum_batch,
            exec: default_exec(),
        },
        q: f.q.value(),
        target_eps: f.target_eps.value(),
        oracle_checks: s.oracle_checks,
        oracle_limits: OracleLimits {
            seed: s.seed,
            ..OracleLimits::default()
        },
        max_bond_budget: Some(s.max_bond_budget),
        variance: false,
        abort_on_breach: true,
    }
}

pub fn variant_config(cfg: &RunConfig) -> Option<VariantConfig> {
    let s = &cfg.schedule;
    match s.step2a {
        Step2a::Gaussian => None,
        Step2a::Power => Some(VariantConfig::power(s.steps_per_a, s.fine_schedule_factor)),
        Step2a::EvenOdd => Some(VariantConfig::even_odd(
            s.tau,
            s.steps_per_a,
            s.fine_schedule_factor,
        )),
    }
}

fn derived(
    path: &HamiltonianPath,
    schedule: &AdiabaticSchedule,
    opts: &FollowOptions,
    variant: Option<&VariantConfig>,
) -> Result<Derived, DriverError> {
    let steps = if schedule.delta > 0.0 {
        schedule.a_max * variant.map_or(1, |v| v.fine_schedule_factor)
    } else {
        0
    };
    let mut d = Derived {
        coupling: path.coupling(),
        rescale: path.rescale(),
        a_max: schedule.a_max,
        delta: schedule.delta,
        eps_step: schedule.eps_step,
        tracking_bound: schedule.tracking_bound(),
        steps,
        q: None,
        t_max: None,
        n_nodes: None,
        evolve_bond_cap: None,
        oracle_mode: opts.oracle_checks && path.n_sites() <= 12,
        parallel: opts.filter.exec.is_parallel(),
    };
    if variant.is_none() {
        let plan = filter_plan_for(path, schedule, opts)?;
        d.q = Some(plan.q);
        d.t_max = Some(plan.t_max);
        d.n_nodes = Some(plan.n_nodes());
        d.evolve_bond_cap = plan.evolve_bond_cap;
    }
    Ok(d)
}

pub fn observable_values(
    labels: &[String],
    values: &[num_complex::Complex64],
) -> Vec<ObservableValue> {
    labels
        .iter()
        .zip(values)
        .map(|(l, v)| ObservableValue {
            label: l.clone(),
            re: v.re,
            im: v.im,
        })
        .collect()
}

/// Runs the tracking loop for `cfg`, writing every record to `log`.
/// Returns the exit status and, on success, the result.
pub fn run_with_log(cfg: &RunConfig, log: &mut LogWriter) -> (i32, Option<RunResult>) {
    match run_inner(cfg, log) {
        Ok(res) => (EXIT_OK, Some(res)),
        Err((code, kind, message)) => {
            let _ = log.emit(&Record::Error {
                exit_code: code,
                kind: kind.into(),
                message,
            });
            (code, None)
        }
    }
}

type Failure = (i32, &'static str, String);

fn driver_failure(e: DriverError) -> Failure {
    (exit_code_for(&e), error_kind(&e), e.to_string())
}

fn io_failure(e: std::io::Error) -> Failure {
    (EXIT_USAGE, "io", e.to_string())
}

fn run_inner(cfg: &RunConfig, log: &mut LogWriter) -> Result<RunResult, Failure> {
    let path = build_path(&cfg.model).map_err(|e| {
        let (code, kind) = model_exit(&e);
        (code, kind, e.to_string())
    })?;
    let (labels, observables): (Vec<String>, Vec<ObservableProduct>) =
        parse_all(&cfg.observables.products, path.n_sites())
            .map_err(|e| (EXIT_USAGE, "config", e.to_string()))?
            .into_iter()
            .unzip();
    let schedule = compute_schedule(&path, cfg.schedule.k_max, cfg.schedule.eps_final)
        .map_err(driver_failure)?;
    let opts = follow_options(cfg);
    let variant = variant_config(cfg);
    if let Some(v) = &variant {
        v.validate(path.coupling()).map_err(driver_failure)?;
    }
    let derived = derived(&path, &schedule, &opts, variant.as_ref()).map_err(driver_failure)?;
    let config = serde_json::to_value(cfg).map_err(|e| (EXIT_USAGE, "config", e.to_string()))?;
    log.emit(&Record::Header {
        schema: SCHEMA_VERSION,
        command: "run".into(),
        config,
        derived,
    })
    .map_err(io_failure)?;

    let mut io_error = None;
    let mut observer = |ev: FollowEvent<'_>| {
        let rec = match ev {
            FollowEvent::Warning(m) => Record::Warning {
                message: m.to_string(),
            },
            FollowEvent::Step(d) => Record::Step(d.clone()),
        };
        if let Err(e) = log.emit(&rec) {
            io_error.get_or_insert(e);
        }
    };
    let result = match &variant {
        None => adiabatic_follow(&path, &schedule, &opts, &observables, &mut observer),
        Some(v) => variant_follow(&path, &schedule, v, &opts, &observables, &mut observer),
    };
    if let Some(e) = io_error {
        return Err(io_failure(e));
    }
    let result = result.map_err(driver_failure)?;
    log.emit(&Record::Result {
        steps: result.steps.len(),
        flagged_steps: result.steps.iter().filter(|d| d.flagged).count(),
        observables: observable_values(&labels, &result.observables),
        final_energy: result.final_energy,
        final_fidelity: result.final_fidelity,
        min_gap: result.min_gap,
        final_max_bond: result.final_state.max_bond(),
    })
    .map_err(io_failure)?;
    Ok(result)
}

/// `run --config <path>`.
pub fn run_file(config_path: &Path) -> i32 {
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", config_path.display());
            return EXIT_USAGE;
        }
    };
    let cfg = match crate::config::parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_USAGE;
        }
    };
    let mut log = match LogWriter::to_path(Path::new(&cfg.output.log)) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("cannot open log {}: {e}", cfg.output.log);
            return EXIT_USAGE;
        }
    };
    run_with_log(&cfg, &mut log).0
}

pub fn exit_code_for_suite(err: &crate::suites::SuiteError) -> i32 {
    match err {
        crate::suites::SuiteError::Driver(e) => exit_code_for(e),
        _ => EXIT_USAGE,
    }
}
