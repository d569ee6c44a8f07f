//! Adiabatic ground-state following: filter toward the ground state of
//! `H(s_a)`, truncate to `k_max`, repeat along `s_a = a δ`.

use std::time::Instant;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filter::{
    self, energy_variance, estimate_ground_energy, gaussian_filter, make_filter_plan_with,
    FilterError, FilterOptions, FilterPlan,
};
use crate::model::HamiltonianPath;
use crate::mps::{
    expect_product_observable, truncate_to_bond, MatrixProductState, MpsError, ObservableProduct,
};
use crate::oracle::{self, OracleError, OracleLimits};
use crate::par::Exec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriverError {
    #[error("invariant breach at step {step}: {message}")]
    InvariantBreach { step: usize, message: String },
    #[error("resource limit: {0}")]
    ResourceAbort(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Mps(#[from] MpsError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Tracking invariant `min(ΔE / 12 N J, 1/99)`.
pub fn tracking_bound(n_sites: usize, coupling: f64, gap: f64) -> f64 {
    (gap / (12.0 * n_sites as f64 * coupling)).min(1.0 / 99.0)
}

/// Growth factor `1 + 8(N-1) + 2√(8(N-1))` of one filter-and-truncate step.
pub fn step_error_factor(n_sites: usize) -> f64 {
    let m = 8.0 * n_sites.saturating_sub(1) as f64;
    1.0 + m + 2.0 * m.sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticSchedule {
    pub a_max: usize,
    pub delta: f64,
    pub s_max: f64,
    pub k_max: usize,
    /// Per-step filter target.
    pub eps_step: f64,
    pub eps_final: f64,
    pub n_sites: usize,
    pub coupling: f64,
    pub gap: f64,
}

impl AdiabaticSchedule {
    /// `a_max = ⌊4 N J s_max / ΔE⌋ + 1`, `δ = s_max / a_max`, and `eps_step`
    /// small enough that one step keeps the error below both the tracking
    /// invariant and `eps_final`.
    pub fn from_parameters(
        n_sites: usize,
        coupling: f64,
        gap: f64,
        s_max: f64,
        k_max: usize,
        eps_final: f64,
    ) -> Result<Self, DriverError> {
        if !(gap > 0.0) {
            return Err(DriverError::InvalidSchedule(format!(
                "gap must be > 0, got {gap}"
            )));
        }
        if !(coupling > 0.0) {
            return Err(DriverError::InvalidSchedule(format!(
                "coupling must be > 0, got {coupling}"
            )));
        }
        if !(s_max >= 0.0) || !s_max.is_finite() {
            return Err(DriverError::InvalidSchedule(format!(
                "s_max must be >= 0, got {s_max}"
            )));
        }
        if !(eps_final > 0.0 && eps_final < 1.0) {
            return Err(DriverError::InvalidSchedule(format!(
                "eps_final must be in (0,1), got {eps_final}"
            )));
        }
        if k_max < 1 {
            return Err(DriverError::InvalidSchedule("k_max must be >= 1".into()));
        }
        if n_sites < 1 {
            return Err(DriverError::InvalidSchedule("n_sites must be >= 1".into()));
        }
        let ratio = 4.0 * n_sites as f64 * coupling * s_max / gap;
        let a_max = ratio.floor() as usize + 1;
        let delta = s_max / a_max as f64;
        let budget = tracking_bound(n_sites, coupling, gap).min(eps_final);
        Ok(AdiabaticSchedule {
            a_max,
            delta,
            s_max,
            k_max,
            eps_step: budget / step_error_factor(n_sites),
            eps_final,
            n_sites,
            coupling,
            gap,
        })
    }

    /// `s_a`, with `s_{a_max} = s_max` exactly.
    pub fn s(&self, a: usize) -> f64 {
        if a >= self.a_max {
            self.s_max
        } else {
            a as f64 * self.delta
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..=self.a_max).map(|a| self.s(a)).collect()
    }

    /// Default sharpness `q = 6 ln(4 / eps_step)`, for which the excited
    /// to ground amplitude ratio after the filter is at most `eps_step`.
    pub fn auto_q(&self) -> f64 {
        6.0 * (4.0 / self.eps_step).ln()
    }

    pub fn tracking_bound(&self) -> f64 {
        tracking_bound(self.n_sites, self.coupling, self.gap)
    }
}

pub fn compute_schedule(
    path: &HamiltonianPath,
    k_max: usize,
    eps_final: f64,
) -> Result<AdiabaticSchedule, DriverError> {
    AdiabaticSchedule::from_parameters(
        path.n_sites(),
        path.coupling(),
        path.gap(),
        path.s_max(),
        k_max,
        eps_final,
    )
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepTiming {
    pub wall_seconds: f64,
}

/// One record per schedule step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub a: usize,
    pub s: f64,
    pub energy_estimate: f64,
    /// Largest bond of the improved state before truncation.
    pub filter_max_bond: usize,
    pub filter_raw_norm: Option<f64>,
    pub evolve_discarded: f64,
    pub discarded_weights: Vec<f64>,
    pub truncation_bound: f64,
    pub truncation_error: f64,
    pub max_bond: usize,
    /// `1 - |⟨ψ_a, ψ⁰_a⟩|²` after truncation.
    pub eps: Option<f64>,
    /// Same, before truncation.
    pub eps_filtered: Option<f64>,
    /// `|⟨ψ_{a-1}, ψ⁰_a⟩|²`.
    pub pre_filter_overlap: Option<f64>,
    pub ground_energy: Option<f64>,
    /// `⟨H²⟩ - ⟨H⟩²` of the truncated state, reported without an oracle.
    pub energy_variance: Option<f64>,
    pub flagged: bool,
    pub notes: Vec<String>,
    pub timing: StepTiming,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub final_state: MatrixProductState,
    pub steps: Vec<StepDiagnostics>,
    pub observables: Vec<C64>,
    pub final_energy: f64,
    pub final_fidelity: Option<f64>,
    pub min_gap: Option<f64>,
    pub warnings: Vec<String>,
}

/// Progress reported to the caller while a run proceeds.
#[derive(Clone, Debug)]
pub enum FollowEvent<'a> {
    Warning(&'a str),
    Step(&'a StepDiagnostics),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FollowOptions {
    pub filter: FilterOptions,
    /// Filter sharpness; `None` picks [`AdiabaticSchedule::auto_q`].
    pub q: Option<f64>,
    /// Filter accuracy; `None` uses the schedule's per-step target.
    pub target_eps: Option<f64>,
    pub oracle_checks: bool,
    pub oracle_limits: OracleLimits,
    /// Abort when an improved state's bond exceeds this.
    pub max_bond_budget: Option<usize>,
    /// Report the energy variance in every step (always on without an oracle).
    pub variance: bool,
    /// Stop at the first invariant breach when the gap promise holds.
    pub abort_on_breach: bool,
}

impl Default for FollowOptions {
    fn default() -> Self {
        FollowOptions {
            filter: FilterOptions::default(),
            q: None,
            target_eps: None,
            oracle_checks: true,
            oracle_limits: OracleLimits::default(),
            max_bond_budget: None,
            variance: false,
            abort_on_breach: true,
        }
    }
}

/// Output of one improvement (step 2a) before truncation.
#[derive(Clone, Debug)]
pub struct Improved {
    pub state: MatrixProductState,
    pub energy_estimate: f64,
    pub raw_norm: Option<f64>,
    pub evolve_discarded: f64,
}

/// The plan [`adiabatic_follow`] uses for a schedule.
pub fn filter_plan_for(
    path: &HamiltonianPath,
    schedule: &AdiabaticSchedule,
    opts: &FollowOptions,
) -> Result<FilterPlan, DriverError> {
    let mut fopts = opts.filter;
    if fopts.evolve_bond_cap.is_none() {
        fopts.evolve_bond_cap = Some(4 * schedule.k_max);
    }
    let q = opts.q.unwrap_or_else(|| schedule.auto_q());
    Ok(make_filter_plan_with(
        q,
        path.gap(),
        path.n_sites(),
        path.coupling(),
        opts.target_eps.unwrap_or(schedule.eps_step),
        &fopts,
    )?)
}

/// Step 2a with the Gaussian filter.
pub fn filter_step(
    state: &MatrixProductState,
    path: &HamiltonianPath,
    s: f64,
    plan: &FilterPlan,
) -> Result<Improved, DriverError> {
    let shift = estimate_ground_energy(state, path, s)?;
    let out = gaussian_filter(state, path, s, plan, &shift)?;
    Ok(Improved {
        state: out.state,
        energy_estimate: shift.value,
        raw_norm: Some(out.raw_norm),
        evolve_discarded: out.trotter_discarded + out.sum_discarded,
    })
}

/// Runs the tracking loop with the Gaussian filter as step 2a.
pub fn adiabatic_follow(
    path: &HamiltonianPath,
    schedule: &AdiabaticSchedule,
    opts: &FollowOptions,
    observables: &[ObservableProduct],
    observer: &mut dyn FnMut(FollowEvent<'_>),
) -> Result<RunResult, DriverError> {
    let plan = filter_plan_for(path, schedule, opts)?;
    let grid: Vec<(usize, f64)> = (1..=schedule.a_max).map(|a| (a, schedule.s(a))).collect();
    follow_with(
        path,
        schedule,
        opts,
        &grid,
        observables,
        observer,
        &mut |state, s| filter_step(state, path, s, &plan),
    )
}

/// Shared tracking loop: `improve` is step 2a, truncation to `k_max` is
/// step 2b. `grid` lists `(index, s)` for every step.
pub(crate) fn follow_with(
    path: &HamiltonianPath,
    schedule: &AdiabaticSchedule,
    opts: &FollowOptions,
    grid: &[(usize, f64)],
    observables: &[ObservableProduct],
    observer: &mut dyn FnMut(FollowEvent<'_>),
    improve: &mut dyn FnMut(&MatrixProductState, f64) -> Result<Improved, DriverError>,
) -> Result<RunResult, DriverError> {
    if schedule.n_sites != path.n_sites() {
        return Err(DriverError::InvalidSchedule(format!(
            "schedule for {} sites, path has {}",
            schedule.n_sites,
            path.n_sites()
        )));
    }
    let limits = opts.oracle_limits;
    let mut warnings = Vec::new();
    let warn =
        |msg: String, observer: &mut dyn FnMut(FollowEvent<'_>), warnings: &mut Vec<String>| {
            observer(FollowEvent::Warning(&msg));
            warnings.push(msg);
        };

    let oracle_on = opts.oracle_checks && path.n_sites() <= 12;
    if opts.oracle_checks && !oracle_on {
        warn(
            format!(
                "oracle checks need N <= 12, got N = {}; reporting proxies",
                path.n_sites()
            ),
            observer,
            &mut warnings,
        );
    }
    // the gap promise decides whether a breach aborts or only flags
    let mut promise_holds = true;
    let mut min_gap = None;
    if oracle_on && schedule.a_max > 0 {
        let mut points: Vec<f64> = grid.iter().map(|&(_, s)| s).collect();
        points.insert(0, 0.0);
        let scan = oracle::gap_scan(path, &points, opts.filter.exec, &limits)?;
        min_gap = Some(scan.min_gap);
        if scan.min_gap < path.gap() {
            promise_holds = false;
            warn(
                format!(
                    "gap promise {} not met: measured min gap {:.6} at s = {:.6}; invariant breaches are flagged, not fatal",
                    path.gap(),
                    scan.min_gap,
                    scan.argmin
                ),
                observer,
                &mut warnings,
            );
        }
    }

    let bound = schedule.tracking_bound();
    let mut state = MatrixProductState::product(path.initial_product_state())?;
    let mut steps = Vec::new();
    let run_steps = schedule.delta > 0.0;
    for &(a, s) in grid.iter().filter(|_| run_steps) {
        let start = Instant::now();
        let improved = improve(&state, s)?;
        let filter_max_bond = improved.state.max_bond();
        if let Some(budget) = opts.max_bond_budget {
            if filter_max_bond > budget {
                return Err(DriverError::ResourceAbort(format!(
                    "step {a}: bond dimension {filter_max_bond} exceeds the budget {budget}"
                )));
            }
        }
        let (next, trunc) = truncate_to_bond(&improved.state, schedule.k_max)?;
        let mut diag = StepDiagnostics {
            a,
            s,
            energy_estimate: improved.energy_estimate,
            filter_max_bond,
            filter_raw_norm: improved.raw_norm,
            evolve_discarded: improved.evolve_discarded,
            truncation_bound: trunc.bound_rhs,
            truncation_error: trunc.realized_error,
            discarded_weights: trunc.discarded_weights,
            max_bond: next.max_bond(),
            eps: None,
            eps_filtered: None,
            pre_filter_overlap: None,
            ground_energy: None,
            energy_variance: None,
            flagged: false,
            notes: Vec::new(),
            timing: StepTiming::default(),
        };
        let mut breach = None;
        if oracle_on {
            let gs = oracle::exact_ground_state(path, s, &limits)?;
            let overlap = |st: &MatrixProductState| oracle::fidelity(st, &gs.vector);
            let pre = overlap(&state)?;
            let eps = 1.0 - overlap(&next)?;
            diag.pre_filter_overlap = Some(pre);
            diag.eps_filtered = Some(1.0 - overlap(&improved.state)?);
            diag.eps = Some(eps);
            diag.ground_energy = Some(gs.energy);
            if gs.degenerate {
                diag.notes
                    .push("degenerate ground state; bound checks skipped".into());
            } else if eps > bound {
                breach = Some(format!(
                    "eps_a = {eps:.3e} exceeds min(ΔE/12NJ, 1/99) = {bound:.3e}"
                ));
            } else if pre < 0.25 {
                breach = Some(format!("pre-filter overlap {pre:.4} below 1/4"));
            }
        } else {
            // truncation is the only error source visible without an oracle
            let max_tail = diag.discarded_weights.iter().copied().fold(0.0, f64::max);
            if diag.truncation_bound > bound {
                diag.notes.push(format!(
                    "truncation tail {max_tail:.3e} gives error bound {:.3e} over {bound:.3e}",
                    diag.truncation_bound
                ));
                diag.flagged = true;
            }
        }
        if opts.variance || !oracle_on {
            diag.energy_variance = Some(energy_variance(&next, path, s)?);
        }
        diag.timing.wall_seconds = start.elapsed().as_secs_f64();
        if let Some(msg) = breach {
            diag.flagged = true;
            diag.notes.push(msg.clone());
            observer(FollowEvent::Step(&diag));
            if promise_holds && opts.abort_on_breach {
                return Err(DriverError::InvariantBreach {
                    step: a,
                    message: msg,
                });
            }
        } else {
            observer(FollowEvent::Step(&diag));
        }
        steps.push(diag);
        state = next;
    }

    let observables = observables
        .iter()
        .map(|o| expect_product_observable(&state, o))
        .collect::<Result<Vec<_>, _>>()?;
    let final_energy = filter::estimate_ground_energy(&state, path, schedule.s_max)?.value;
    let final_fidelity = if oracle_on {
        let gs = oracle::exact_ground_state(path, schedule.s_max, &limits)?;
        Some(oracle::fidelity(&state, &gs.vector)?)
    } else {
        None
    };
    Ok(RunResult {
        final_state: state,
        steps,
        observables,
        final_energy,
        final_fidelity,
        min_gap,
        warnings,
    })
}

/// Consecutive-pair checks along a schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapPair {
    pub a: usize,
    /// `|⟨ψ⁰_a, ψ⁰_{a-1}⟩|²`.
    pub overlap: f64,
    /// `‖H(s_a) - H(s_{a-1})‖`.
    pub hamiltonian_step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapLemmaReport {
    pub pairs: Vec<OverlapPair>,
    pub min_overlap: f64,
    pub max_hamiltonian_step: f64,
    /// `ΔE / 4`.
    pub step_bound: f64,
    pub overlap_ok: bool,
    pub step_ok: bool,
    /// Grid indices with a degenerate ground state.
    pub degenerate: Vec<usize>,
}

impl OverlapLemmaReport {
    pub fn pass(&self) -> bool {
        self.overlap_ok && self.step_ok
    }
}

/// Ground-state overlaps and Hamiltonian steps between consecutive grid
/// points, from the oracle.
pub fn verify_overlap_lemma(
    path: &HamiltonianPath,
    schedule: &AdiabaticSchedule,
    limits: &OracleLimits,
    exec: Exec,
) -> Result<OverlapLemmaReport, DriverError> {
    let grid = schedule.grid();
    let states: Vec<(DVector<C64>, bool)> = exec
        .map(grid.clone(), |s| {
            oracle::exact_ground_state(path, s, limits).map(|g| (g.vector, g.degenerate))
        })
        .into_iter()
        .collect::<Result<_, _>>()?;
    let steps: Vec<f64> = exec
        .map_range(grid.len().saturating_sub(1), |k| {
            oracle::hamiltonian_difference_norm(path, grid[k + 1], grid[k], limits)
        })
        .into_iter()
        .collect::<Result<_, _>>()?;
    let pairs: Vec<OverlapPair> = (1..grid.len())
        .map(|a| OverlapPair {
            a,
            overlap: states[a].0.dotc(&states[a - 1].0).norm_sqr(),
            hamiltonian_step: steps[a - 1],
        })
        .collect();
    let min_overlap = pairs.iter().map(|p| p.overlap).fold(1.0, f64::min);
    let max_hamiltonian_step = pairs.iter().map(|p| p.hamiltonian_step).fold(0.0, f64::max);
    let step_bound = path.gap() / 4.0;
    Ok(OverlapLemmaReport {
        min_overlap,
        max_hamiltonian_step,
        step_bound,
        overlap_ok: min_overlap >= 0.5,
        step_ok: max_hamiltonian_step <= step_bound + 1e-9,
        degenerate: states
            .iter()
            .enumerate()
            .filter(|(_, s)| s.1)
            .map(|(i, _)| i)
            .collect(),
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_path, ModelSpec, PauliTerm};

    #[test]
    fn schedule_examples() {
        let s = AdiabaticSchedule::from_parameters(10, 1.0, 1.0, 1.0, 16, 1e-3).unwrap();
        assert_eq!(s.a_max, 41);
        assert!((s.delta - 1.0 / 41.0).abs() < 1e-15);
        let s = AdiabaticSchedule::from_parameters(2, 1.0, 2.0, 1.0, 4, 1e-3).unwrap();
        assert_eq!(s.a_max, 5);
        assert!((s.delta - 0.2).abs() < 1e-15);
        assert_eq!(s.s(5), 1.0);
    }

    #[test]
    fn schedule_rejects_bad_input() {
        assert!(AdiabaticSchedule::from_parameters(4, 1.0, 0.0, 1.0, 4, 1e-3).is_err());
        let err = AdiabaticSchedule::from_parameters(4, 1.0, 1.0, 1.0, 4, 2.0).unwrap_err();
        assert!(err.to_string().contains("eps_final must be in (0,1)"));
    }

    #[test]
    fn eps_step_meets_the_recursion() {
        let s = AdiabaticSchedule::from_parameters(8, 1.58, 1.0, 0.5, 16, 1e-3).unwrap();
        let total = s.eps_step * step_error_factor(8);
        assert!(total <= s.tracking_bound().min(1e-3) * (1.0 + 1e-12));
    }

    #[test]
    fn zero_length_path_returns_initial_state() {
        let path = build_path(&ModelSpec::tfim_para(4, 0.0, 1.0)).unwrap();
        let sched = compute_schedule(&path, 4, 1e-3).unwrap();
        assert_eq!((sched.a_max, sched.delta), (1, 0.0));
        let x0 = ObservableProduct::identity(4, 2)
            .with_site(0, crate::linalg::pauli_x())
            .unwrap();
        let res =
            adiabatic_follow(&path, &sched, &FollowOptions::default(), &[x0], &mut |_| {}).unwrap();
        assert!(res.steps.is_empty());
        assert!((res.observables[0].re - 1.0).abs() < 1e-14);
        assert!((res.final_fidelity.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_path_overlaps_are_one() {
        let spec = ModelSpec {
            family: "custom".into(),
            n_sites: 4,
            s_max: 1.0,
            gap: 1.0,
            coupling: None,
            field: 1.0,
            zz: 1.0,
            terms: vec![
                PauliTerm {
                    pauli: "XI".into(),
                    c0: -0.5,
                    c1: 0.0,
                },
                PauliTerm {
                    pauli: "IX".into(),
                    c0: -0.5,
                    c1: 0.0,
                },
            ],
            initial: Some("+".into()),
        };
        let path = build_path(&spec).unwrap();
        let sched = compute_schedule(&path, 4, 1e-3).unwrap();
        let rep = verify_overlap_lemma(&path, &sched, &OracleLimits::default(), Exec::Sequential)
            .unwrap();
        assert!(rep.pairs.iter().all(|p| (p.overlap - 1.0).abs() < 1e-10));
        assert_eq!(rep.max_hamiltonian_step, 0.0);
        assert!(rep.pass());
    }
}
