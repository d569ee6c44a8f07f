//! Property suites behind `verify <suite>`. Each check is one `check`
//! record with the measured value next to its bound; each suite ends with
//! a `summary` record.

use std::time::Instant;

use adiabat_core::driver::{
    adiabatic_follow, compute_schedule, filter_plan_for, filter_step, verify_overlap_lemma,
    AdiabaticSchedule, DriverError, FollowOptions, RunResult,
};
use adiabat_core::filter::{
    gaussian_filter, make_filter_plan_with, trotter_evolve, EnergyEstimate, FilterOptions,
};
use adiabat_core::linalg::{self, c};
use adiabat_core::model::{build_path, verify_bounds, HamiltonianPath, ModelSpec};
use adiabat_core::mps::{
    add_states, apply_two_site_gate, expect_product_observable, inner_product, schmidt_spectrum,
    truncate_to_bond, MatrixProductState, ObservableProduct,
};
use adiabat_core::oracle::{self, OracleLimits};
use adiabat_core::par::Exec;
use adiabat_core::variants::variant_follow;
use adiabat_core::C64;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::{parse_config, RunConfig, Step2a};
use crate::observables::parse_all;
use crate::records::{ComparisonRow, LogWriter, Record, Timing};
use crate::run::{follow_options, variant_config};

pub const ACCEPTANCE_TOML: &str = include_str!("../configs/acceptance.toml");

pub const SUITES: &[&str] = &[
    "schedule",
    "model",
    "overlap-lemma",
    "filter",
    "truncation",
    "trotter",
    "mps-oracle",
    "tracking",
    "variants",
    "cost-trend",
];

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unknown suite {0:?}; known: {list}, all", list = SUITES.join(", "))]
    Unknown(String),
    #[error(transparent)]
    Driver(#[from] DriverError),
    #[error("{0}")]
    Setup(String),
    #[error("log: {0}")]
    Io(#[from] std::io::Error),
}

impl From<adiabat_core::mps::MpsError> for SuiteError {
    fn from(e: adiabat_core::mps::MpsError) -> Self {
        SuiteError::Driver(e.into())
    }
}

impl From<adiabat_core::oracle::OracleError> for SuiteError {
    fn from(e: adiabat_core::oracle::OracleError) -> Self {
        SuiteError::Driver(e.into())
    }
}

impl From<adiabat_core::filter::FilterError> for SuiteError {
    fn from(e: adiabat_core::filter::FilterError) -> Self {
        SuiteError::Driver(e.into())
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Filter sharpness values for the `filter` suite.
    pub q: Vec<f64>,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            q: vec![9.0, 18.0, 36.0],
            seed: 0,
            exec: crate::run::default_exec(),
        }
    }
}

struct Reporter<'a> {
    suite: &'a str,
    log: &'a mut LogWriter,
    checks: usize,
    failed: usize,
}

impl<'a> Reporter<'a> {
    fn new(suite: &'a str, log: &'a mut LogWriter) -> Self {
        Reporter {
            suite,
            log,
            checks: 0,
            failed: 0,
        }
    }

    fn check(
        &mut self,
        name: impl Into<String>,
        measured: f64,
        bound: f64,
        pass: bool,
        detail: impl Into<String>,
    ) -> std::io::Result<()> {
        self.checks += 1;
        if !pass {
            self.failed += 1;
        }
        self.log.emit(&Record::Check {
            suite: self.suite.into(),
            name: name.into(),
            measured,
            bound,
            pass,
            detail: detail.into(),
        })
    }

    /// `measured <= bound`.
    fn at_most(
        &mut self,
        name: impl Into<String>,
        measured: f64,
        bound: f64,
    ) -> std::io::Result<()> {
        self.check(name, measured, bound, measured <= bound, "")
    }

    /// `measured >= bound`.
    fn at_least(
        &mut self,
        name: impl Into<String>,
        measured: f64,
        bound: f64,
    ) -> std::io::Result<()> {
        self.check(name, measured, bound, measured >= bound, "")
    }

    fn finish(self) -> std::io::Result<bool> {
        let pass = self.failed == 0;
        self.log.emit(&Record::Summary {
            suite: self.suite.into(),
            checks: self.checks,
            failed: self.failed,
            pass,
        })?;
        Ok(pass)
    }
}

/// The tfim-para N=8 tracking instance.
pub fn acceptance_config() -> RunConfig {
    parse_config(ACCEPTANCE_TOML).expect("bundled acceptance config is valid")
}

/// Runs one suite (or `all`); `Ok(true)` iff every check passed.
pub fn run_suite(
    name: &str,
    opts: &VerifyOptions,
    log: &mut LogWriter,
) -> Result<bool, SuiteError> {
    if name == "all" {
        let mut failed = 0;
        for s in SUITES {
            if !run_suite(s, opts, log)? {
                failed += 1;
            }
        }
        log.emit(&Record::Summary {
            suite: "all".into(),
            checks: SUITES.len(),
            failed,
            pass: failed == 0,
        })?;
        return Ok(failed == 0);
    }
    let Some(&suite) = SUITES.iter().find(|s| **s == name) else {
        return Err(SuiteError::Unknown(name.into()));
    };
    let mut r = Reporter::new(suite, log);
    match suite {
        "schedule" => schedule_suite(&mut r, opts)?,
        "model" => model_suite(&mut r)?,
        "overlap-lemma" => overlap_suite(&mut r, opts)?,
        "filter" => filter_suite(&mut r, opts)?,
        "truncation" => truncation_suite(&mut r, opts)?,
        "trotter" => trotter_suite(&mut r, opts)?,
        "mps-oracle" => mps_oracle_suite(&mut r, opts)?,
        "tracking" => tracking_suite(&mut r)?,
        "variants" => variants_suite(&mut r)?,
        "cost-trend" => cost_trend_suite(&mut r, opts)?,
        _ => unreachable!("suite list and dispatch agree"),
    }
    Ok(r.finish()?)
}

fn schedule_suite(r: &mut Reporter<'_>, opts: &VerifyOptions) -> Result<(), SuiteError> {
    let sch = AdiabaticSchedule::from_parameters(10, 1.0, 1.0, 1.0, 16, 1e-3)?;
    r.check(
        "a_max for (N, J, gap, s_max) = (10, 1, 1, 1)",
        sch.a_max as f64,
        41.0,
        sch.a_max == 41,
        "",
    )?;
    r.at_most("|delta - 1/41|", (sch.delta - 1.0 / 41.0).abs(), 1e-15)?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst: f64 = 0.0;
    let mut last_ok = true;
    for _ in 0..100 {
        let n = rng.random_range(2..=64);
        let j = rng.random_range(0.1..10.0);
        let gap = rng.random_range(0.01..5.0);
        let s_max = rng.random_range(0.01..3.0);
        let sch = AdiabaticSchedule::from_parameters(n, j, gap, s_max, 8, 1e-3)?;
        let ratio = sch.delta * 4.0 * n as f64 * j / gap;
        worst = worst.max(ratio);
        last_ok &= (sch.s(sch.a_max) - s_max).abs() <= 1e-12 * s_max.max(1.0);
    }
    r.check(
        "max delta 4NJ/gap over 100 random draws",
        worst,
        1.0,
        worst <= 1.0,
        "",
    )?;
    r.check(
        "grid ends at s_max on every draw",
        last_ok as u8 as f64,
        1.0,
        last_ok,
        "",
    )?;
    Ok(())
}

fn acceptance_path() -> Result<HamiltonianPath, SuiteError> {
    build_path(&acceptance_config().model).map_err(|e| SuiteError::Setup(e.to_string()))
}

fn model_suite(r: &mut Reporter<'_>) -> Result<(), SuiteError> {
    let path = acceptance_path()?;
    let rep = verify_bounds(&path, 101);
    r.at_most(
        "max ||h_i(s)|| / J",
        rep.max_term_norm / rep.coupling,
        1.0 + 1e-12,
    )?;
    r.at_most(
        "max ||dh_i/ds|| / J",
        rep.max_derivative_norm / rep.coupling,
        1.0 + 1e-12,
    )?;
    r.at_most("max hermiticity defect", rep.max_hermiticity_defect, 1e-12)?;
    Ok(())
}

fn overlap_suite(r: &mut Reporter<'_>, opts: &VerifyOptions) -> Result<(), SuiteError> {
    let cfg = acceptance_config();
    let path = acceptance_path()?;
    let schedule = compute_schedule(&path, cfg.schedule.k_max, cfg.schedule.eps_final)?;
    let rep = verify_overlap_lemma(&path, &schedule, &OracleLimits::default(), opts.exec)?;
    for p in &rep.pairs {
        r.at_least(format!("a={} ground-state overlap", p.a), p.overlap, 0.5)?;
        r.at_most(
            format!("a={} ||H(s_a) - H(s_a-1)||", p.a),
            p.hamiltonian_step,
            rep.step_bound + 1e-9,
        )?;
    }
    r.check(
        "no degenerate ground states",
        rep.degenerate.len() as f64,
        0.0,
        rep.degenerate.is_empty(),
        "",
    )?;
    Ok(())
}

/// `sqrt(keep) g + sqrt(1 - keep) e` with `e` a normalized excited mix.
fn contaminated(vectors: &DMatrix<C64>, excited: &[usize], keep: f64) -> DVector<C64> {
    let mut e = DVector::zeros(vectors.nrows());
    for &k in excited {
        e += vectors.column(k);
    }
    e /= c(e.norm(), 0.);
    vectors.column(0) * c(keep.sqrt(), 0.) + e * c((1.0 - keep).sqrt(), 0.)
}

fn filter_suite(r: &mut Reporter<'_>, opts: &VerifyOptions) -> Result<(), SuiteError> {
    const SUBSTEPS: usize = 100;
    const TARGET: f64 = 1e-6;
    // quadrature target plus the Strang error at SUBSTEPS per unit time
    const COMPONENT_TOL: f64 = 2e-5;
    let n = 6;
    let s = 0.3;
    let path = build_path(&ModelSpec::tfim_para(n, 0.5, 1.0))
        .map_err(|e| SuiteError::Setup(e.to_string()))?;
    let gap = path.gap();
    let spec = oracle::dense_spectrum(&path, s, &OracleLimits::default())?;
    let dim = spec.eigenvalues.len();
    let e0 = spec.eigenvalues[0];
    r.at_least("measured gap at s", spec.gap(), gap)?;
    let inputs = [
        ("spread", (1..dim).collect::<Vec<_>>()),
        ("first-excited", vec![1]),
    ];
    let fopts = FilterOptions {
        substeps_per_unit: SUBSTEPS,
        exec: opts.exec,
        ..FilterOptions::default()
    };
    for &q in &opts.q {
        let plan = make_filter_plan_with(q, gap, n, path.coupling(), TARGET, &fopts)?;
        for (label, excited) in &inputs {
            let psi = contaminated(&spec.eigenvectors, excited, 0.6);
            let mps = MatrixProductState::from_dense(&psi, n, 2)?;
            for (shift_label, offset) in [
                ("exact", 0.0),
                ("-gap/3", -gap / 3.0),
                ("+gap/3", gap / 3.0),
            ] {
                let shift = EnergyEstimate {
                    value: e0 + offset,
                    claimed_accuracy: gap / 3.0,
                };
                let out = gaussian_filter(&mps, &path, s, &plan, &shift)?;
                let phi = out.state.to_dense() * c(out.raw_norm, 0.);
                let ground = spec.eigenvectors.column(0).dotc(&phi).norm();
                let excited_amp = (phi.norm_squared() - ground * ground).max(0.0).sqrt();
                let mut dev: f64 = 0.0;
                for k in 0..dim {
                    let v = spec.eigenvectors.column(k);
                    let x = (spec.eigenvalues[k] - shift.value) / gap;
                    let want = (-q * x * x / 2.0).exp() * v.dotc(&psi).norm();
                    dev = dev.max((v.dotc(&phi).norm() - want).abs());
                }
                let tag = format!("q={q} {label} shift {shift_label}");
                r.at_least(
                    format!("{tag}: ground amplitude"),
                    ground,
                    0.25 * (-q / 18.0).exp(),
                )?;
                r.at_most(
                    format!("{tag}: excited amplitude"),
                    excited_amp,
                    (-2.0 * q / 9.0).exp() + TARGET,
                )?;
                r.at_most(
                    format!("{tag}: max eigencomponent deviation"),
                    dev,
                    COMPONENT_TOL,
                )?;
            }
        }
    }
    Ok(())
}

fn truncation_suite(r: &mut Reporter<'_>, opts: &VerifyOptions) -> Result<(), SuiteError> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = 6;
    for case in 0..50 {
        let psi = MatrixProductState::random(n, 2, 8, &mut rng);
        let (out, rep) = truncate_to_bond(&psi, 4)?;
        let a = psi.to_dense();
        let b = out.to_dense();
        let overlap = b.dotc(&a);
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            c(1., 0.)
        };
        let realized = (&a - b * phase).norm_squared();
        let bound = 8.0 * (n - 1) as f64 * rep.max_discarded();
        r.at_most(
            format!("state {case}: |psi_out - psi_in|^2"),
            realized,
            bound,
        )?;
    }
    Ok(())
}

/// Phase-aligned distance `min_φ |a - e^{iφ} b|`.
fn aligned_distance(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    let overlap = b.dotc(a);
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        c(1., 0.)
    };
    (a - b * phase).norm()
}

/// Errors of [`trotter_evolve`] against the dense exponential for each
/// substep count; N=6, t=1, random χ=4 input.
pub fn trotter_errors(seed: u64, substeps: &[usize]) -> Result<Vec<f64>, SuiteError> {
    let path = build_path(&ModelSpec::tfim_para(6, 0.5, 1.0))
        .map_err(|e| SuiteError::Setup(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi = MatrixProductState::random(6, 2, 4, &mut rng);
    let (s, t) = (0.5, 1.0);
    let exact = oracle::dense_evolve(&psi.to_dense(), &path, s, t, &OracleLimits::default())?;
    substeps
        .iter()
        .map(|&k| {
            let (out, _) = trotter_evolve(&psi, &path, s, t, k, None)?;
            Ok(aligned_distance(&exact, &out.to_dense()))
        })
        .collect()
}

fn trotter_suite(r: &mut Reporter<'_>, opts: &VerifyOptions) -> Result<(), SuiteError> {
    let steps = [8, 16, 32];
    let errs = trotter_errors(opts.seed, &steps)?;
    r.log.emit(&Record::Diagnostic {
        name: "trotter-errors".into(),
        value: serde_json::json!({ "substeps": steps, "errors": errs }),
        timing: Timing::default(),
    })?;
    for w in 0..2 {
        let ratio = errs[w] / errs[w + 1];
        r.check(
            format!("error ratio {} -> {} substeps", steps[w], steps[w + 1]),
            ratio,
            4.0,
            (3.0..=5.0).contains(&ratio),
            "pass range [3, 5]",
        )?;
    }
    Ok(())
}

fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn mps_oracle_suite(r: &mut Reporter<'_>, opts: &VerifyOptions) -> Result<(), SuiteError> {
    const CASES: usize = 100;
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let draw = |rng: &mut ChaCha8Rng| {
        let n = rng.random_range(2..=8);
        let chi = rng.random_range(1..=4);
        (n, MatrixProductState::random(n, 2, chi, rng))
    };
    let mut worst = [0.0f64; 5];
    for _ in 0..CASES {
        // inner product
        let (n, a) = draw(&mut rng);
        let b = MatrixProductState::random(n, 2, rng.random_range(1..=4), &mut rng);
        let got = inner_product(&a, &b)?;
        worst[0] = worst[0].max((got - a.to_dense().dotc(&b.to_dense())).norm());

        // product observable
        let (n, a) = draw(&mut rng);
        let mut obs = ObservableProduct::identity(n, 2);
        for site in 0..n {
            if rng.random_bool(0.5) {
                let letter = ['X', 'Y', 'Z'][rng.random_range(0..3)];
                obs = obs.with_site(site, linalg::pauli(letter).expect("pauli letter"))?;
            }
        }
        let v = a.to_dense();
        let want = v.dotc(&(obs.to_dense() * &v));
        worst[1] = worst[1].max((expect_product_observable(&a, &obs)? - want).norm());

        // Schmidt spectrum
        let (n, a) = draw(&mut rng);
        let bond = rng.random_range(1..n);
        let v = a.to_dense();
        let cols = 1usize << (n - bond);
        let m = DMatrix::from_fn(1 << bond, cols, |i, j| v[i * cols + j]);
        let sv = linalg::SortedSvd::new(&m).s;
        let got = schmidt_spectrum(&a, bond)?.coefficients;
        let diff = (0..sv.len())
            .map(|k| (got.get(k).copied().unwrap_or(0.0) - sv[k]).abs())
            .fold(0.0, f64::max);
        worst[2] = worst[2].max(diff);

        // two-site gate
        let (n, a) = draw(&mut rng);
        let i = rng.random_range(0..n - 1);
        let gate = DMatrix::from_fn(4, 4, |_, _| random_complex(&mut rng));
        let (out, _) = apply_two_site_gate(&a, &gate, (i, i + 1), None)?;
        let mut terms = vec![DMatrix::zeros(4, 4); n - 1];
        terms[i] = gate;
        let want = oracle::apply_bond_terms(&terms, n, 2, &a.to_dense());
        worst[3] = worst[3].max((out.to_dense() - &want).camax() / want.camax().max(1.0));

        // state sum
        let (n, a) = draw(&mut rng);
        let b = MatrixProductState::random(n, 2, rng.random_range(1..=4), &mut rng);
        let (x, y) = (random_complex(&mut rng), random_complex(&mut rng));
        let sum = add_states(&[(x, &a), (y, &b)])?;
        let want = a.to_dense() * x + b.to_dense() * y;
        worst[4] = worst[4].max((sum.to_dense() - want).camax());
    }
    let names = [
        "inner product",
        "product observable",
        "Schmidt spectrum",
        "two-site gate",
        "state sum",
    ];
    for (name, w) in names.iter().zip(worst) {
        r.at_most(format!("{name}: max deviation over {CASES} cases"), w, TOL)?;
    }
    Ok(())
}

/// Dense ground state and its observable values at `s`.
fn exact_observables(
    path: &HamiltonianPath,
    s: f64,
    observables: &[ObservableProduct],
) -> Result<(DVector<C64>, Vec<f64>), SuiteError> {
    let gs = oracle::exact_ground_state(path, s, &OracleLimits::default())?;
    let values = observables
        .iter()
        .map(|o| gs.vector.dotc(&(o.to_dense() * &gs.vector)).re)
        .collect();
    Ok((gs.vector, values))
}

/// The Gaussian-filter run of the acceptance instance.
pub fn acceptance_run(
    cfg: &RunConfig,
) -> Result<(RunResult, Vec<String>, Vec<ObservableProduct>, f64), SuiteError> {
    let path = build_path(&cfg.model).map_err(|e| SuiteError::Setup(e.to_string()))?;
    let schedule = compute_schedule(&path, cfg.schedule.k_max, cfg.schedule.eps_final)?;
    let (labels, obs): (Vec<_>, Vec<_>) = parse_all(&cfg.observables.products, path.n_sites())
        .map_err(|e| SuiteError::Setup(e.to_string()))?
        .into_iter()
        .unzip();
    let opts = follow_options(cfg);
    let start = Instant::now();
    let res = match variant_config(cfg) {
        None => adiabatic_follow(&path, &schedule, &opts, &obs, &mut |_| {})?,
        Some(v) => variant_follow(&path, &schedule, &v, &opts, &obs, &mut |_| {})?,
    };
    Ok((res, labels, obs, start.elapsed().as_secs_f64()))
}

fn tracking_suite(r: &mut Reporter<'_>) -> Result<(), SuiteError> {
    let cfg = acceptance_config();
    let path = acceptance_path()?;
    let (res, labels, obs, _) = acceptance_run(&cfg)?;
    let schedule = compute_schedule(&path, cfg.schedule.k_max, cfg.schedule.eps_final)?;
    let bound = schedule.tracking_bound();
    let infidelity = 1.0 - res.final_fidelity.unwrap_or(0.0);
    r.at_most("final infidelity", infidelity, 1e-3)?;
    r.at_least("measured min gap", res.min_gap.unwrap_or(0.0), path.gap())?;
    r.check(
        "steps run",
        res.steps.len() as f64,
        schedule.a_max as f64,
        res.steps.len() == schedule.a_max,
        "",
    )?;
    for d in &res.steps {
        r.at_most(
            format!("a={} eps", d.a),
            d.eps.unwrap_or(f64::INFINITY),
            bound,
        )?;
        r.at_least(
            format!("a={} pre-filter overlap", d.a),
            d.pre_filter_overlap.unwrap_or(0.0),
            0.25,
        )?;
    }
    let (_, exact) = exact_observables(&path, path.s_max(), &obs)?;
    let tol = 2.0 * 1e-3f64.sqrt();
    for ((label, got), want) in labels.iter().zip(&res.observables).zip(&exact) {
        r.at_most(format!("<{label}> deviation"), (got.re - want).abs(), tol)?;
    }
    Ok(())
}

fn comparison_row(mode: &str, res: &RunResult, seconds: f64) -> ComparisonRow {
    ComparisonRow {
        mode: mode.into(),
        steps: res.steps.len(),
        final_fidelity: res.final_fidelity,
        final_energy: res.final_energy,
        max_eps: res.steps.iter().filter_map(|d| d.eps).reduce(f64::max),
        flagged_steps: res.steps.iter().filter(|d| d.flagged).count(),
        timing: Timing {
            wall_seconds: seconds,
        },
    }
}

/// Runs the acceptance instance in every step-2a mode and returns the
/// comparison rows, Gaussian first.
pub fn compare_modes() -> Result<Vec<ComparisonRow>, SuiteError> {
    let mut rows = Vec::new();
    for (mode, step2a) in [
        ("gaussian", Step2a::Gaussian),
        ("power", Step2a::Power),
        ("even-odd", Step2a::EvenOdd),
    ] {
        let mut cfg = acceptance_config();
        cfg.schedule.step2a = step2a;
        let (res, _, _, secs) = acceptance_run(&cfg)?;
        rows.push(comparison_row(mode, &res, secs));
    }
    Ok(rows)
}

fn variants_suite(r: &mut Reporter<'_>) -> Result<(), SuiteError> {
    let rows = compare_modes()?;
    r.log.emit(&Record::Comparison { rows: rows.clone() })?;
    for row in &rows {
        let bound = if row.mode == "gaussian" { 1e-3 } else { 1e-2 };
        r.at_most(
            format!("{} final infidelity", row.mode),
            1.0 - row.final_fidelity.unwrap_or(0.0),
            bound,
        )?;
    }
    Ok(())
}

/// Wall time of one improve-and-truncate step at `s_max` for N=10 and each
/// bond cap, starting from a random state at that cap.
pub fn cost_trend(seed: u64, caps: &[usize], exec: Exec) -> Result<Vec<f64>, SuiteError> {
    let path = build_path(&ModelSpec::tfim_para(10, 0.5, 1.0))
        .map_err(|e| SuiteError::Setup(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    caps.iter()
        .map(|&k| {
            let schedule = compute_schedule(&path, k, 1e-3)?;
            let mut opts = FollowOptions::default();
            opts.filter.exec = exec;
            opts.filter.evolve_bond_cap = Some(k);
            let plan = filter_plan_for(&path, &schedule, &opts)?;
            let psi = MatrixProductState::random(10, 2, k, &mut rng);
            let start = Instant::now();
            let improved = filter_step(&psi, &path, schedule.s_max, &plan)?;
            truncate_to_bond(&improved.state, k)?;
            Ok(start.elapsed().as_secs_f64())
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn cost_trend_suite(r: &mut Reporter<'_>, opts: &VerifyOptions) -> Result<(), SuiteError> {
    let caps = [8usize, 16, 32];
    let times = cost_trend(opts.seed, &caps, opts.exec)?;
    r.log.emit(&Record::Diagnostic {
        name: "cost-trend".into(),
        value: serde_json::json!({ "n_sites": 10, "k_max": caps }),
        timing: Timing {
            wall_seconds: times.iter().sum(),
        },
    })?;
    let monotone = times.windows(2).all(|w| w[1] > w[0]);
    let xs: Vec<f64> = caps.iter().map(|&k| k as f64).collect();
    let slope = log_log_slope(&xs, &times);
    let seg: Vec<f64> = (0..2).map(|i| (times[i + 1] / times[i]).log2()).collect();
    r.check(
        "wall time strictly increasing in k_max",
        monotone as u8 as f64,
        1.0,
        monotone,
        format!(
            "seconds per step {:?}",
            times
                .iter()
                .map(|t| (t * 1e3).round() / 1e3)
                .collect::<Vec<_>>()
        ),
    )?;
    // exponential growth in k would double the local slope between segments
    let polynomial = slope > 0.0 && slope <= 6.0 && seg[1] <= 2.0 * seg[0].max(1.0);
    r.check(
        "log-log slope",
        slope,
        6.0,
        polynomial,
        format!(
            "local slopes {:.2}, {:.2}; expected range 2..4",
            seg[0], seg[1]
        ),
    )?;
    Ok(())
}
