//! Cheaper replacements for the filter step: one power-method step
//! `(1 - H/‖H‖)` and one even/odd imaginary-time step. Neither carries a
//! proof of adequacy; runs report breaches instead of aborting.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::driver::{
    follow_with, AdiabaticSchedule, DriverError, FollowEvent, FollowOptions, Improved, RunResult,
};
use crate::filter::{apply_hamiltonian_mps, estimate_ground_energy, FilterError};
use crate::linalg::{self, c};
use crate::model::HamiltonianPath;
use crate::mps::{add_states, truncate_to_bond, GateSide, MatrixProductState, ObservableProduct};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantKind {
    Power,
    EvenOddImaginary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantConfig {
    pub kind: VariantKind,
    /// Imaginary-time step (even-odd only).
    pub tau: f64,
    /// Applications per schedule step.
    pub steps_per_a: usize,
    /// Multiplier on `a_max`.
    pub fine_schedule_factor: usize,
}

impl VariantConfig {
    pub fn power(steps_per_a: usize, fine_schedule_factor: usize) -> Self {
        VariantConfig {
            kind: VariantKind::Power,
            tau: 0.0,
            steps_per_a,
            fine_schedule_factor,
        }
    }

    pub fn even_odd(tau: f64, steps_per_a: usize, fine_schedule_factor: usize) -> Self {
        VariantConfig {
            kind: VariantKind::EvenOddImaginary,
            tau,
            steps_per_a,
            fine_schedule_factor,
        }
    }

    pub fn validate(&self, coupling: f64) -> Result<(), DriverError> {
        if self.fine_schedule_factor < 1 {
            return Err(DriverError::InvalidSchedule(
                "fine_schedule_factor must be >= 1".into(),
            ));
        }
        if self.kind == VariantKind::EvenOddImaginary {
            if !(self.tau > 0.0) {
                return Err(DriverError::InvalidSchedule(format!(
                    "tau must be > 0, got {}",
                    self.tau
                )));
            }
            if self.tau * 2.0 * coupling >= 1.0 {
                return Err(DriverError::InvalidSchedule(format!(
                    "tau * 2J must be < 1, got {}",
                    self.tau * 2.0 * coupling
                )));
            }
        }
        Ok(())
    }
}

/// `(1 - H(s)/‖H‖) ψ` with `‖H‖` replaced by `(N-1) J`, truncated to
/// `bond_cap` and normalized. Returns the state and its largest per-bond tail.
pub fn power_step(
    state: &MatrixProductState,
    path: &HamiltonianPath,
    s: f64,
    bond_cap: usize,
) -> Result<(MatrixProductState, f64), DriverError> {
    let h_psi = apply_hamiltonian_mps(state, path, s)?;
    let norm = path.norm_bound();
    let sum = add_states(&[(c(1., 0.), state), (c(-1.0 / norm, 0.), &h_psi)])?;
    let (out, rep) = truncate_to_bond(&sum, bond_cap)?;
    Ok((out, rep.max_discarded()))
}

/// `exp(-H_B τ) exp(-H_A τ) ψ`, where `A` holds the bonds with an even
/// left site (applied first) and `B` the rest; each gate is split with
/// `bond_cap`, then the state is normalized. `τ = 0` is the identity.
pub fn even_odd_imaginary_step(
    state: &MatrixProductState,
    path: &HamiltonianPath,
    s: f64,
    tau: f64,
    bond_cap: usize,
) -> Result<(MatrixProductState, f64), DriverError> {
    if !(tau >= 0.0) {
        return Err(FilterError::InvalidParameter(format!("tau must be >= 0, got {tau}")).into());
    }
    if bond_cap < 1 {
        return Err(FilterError::InvalidParameter("bond cap must be >= 1".into()).into());
    }
    let mut out = state.clone();
    if tau == 0.0 {
        return Ok((out, 0.0));
    }
    let terms = path.bond_terms(s);
    let gates: Vec<_> = terms
        .iter()
        .map(|h| linalg::expm_hermitian(h, C64::new(-tau, 0.0)))
        .collect();
    let mut discarded: f64 = 0.0;
    for i in (0..terms.len()).step_by(2) {
        discarded =
            discarded.max(out.apply_gate_in_place(&gates[i], i, Some(bond_cap), GateSide::Right));
    }
    for i in (1..terms.len()).step_by(2).rev() {
        discarded =
            discarded.max(out.apply_gate_in_place(&gates[i], i, Some(bond_cap), GateSide::Left));
    }
    Ok((out.normalized()?, discarded))
}

/// The tracking loop with the filter swapped for `variant`, on the refined
/// grid `s_j = j δ / f`, `j = 1 ..= a_max f`. Diagnostics match
/// [`crate::driver::adiabatic_follow`]; breaches are flagged, not fatal.
pub fn variant_follow(
    path: &HamiltonianPath,
    schedule: &AdiabaticSchedule,
    variant: &VariantConfig,
    opts: &FollowOptions,
    observables: &[ObservableProduct],
    observer: &mut dyn FnMut(FollowEvent<'_>),
) -> Result<RunResult, DriverError> {
    variant.validate(path.coupling())?;
    let f = variant.fine_schedule_factor;
    let fine = schedule.a_max * f;
    let grid: Vec<(usize, f64)> = (1..=fine)
        .map(|j| {
            (
                j,
                if j == fine {
                    schedule.s_max
                } else {
                    j as f64 * schedule.delta / f as f64
                },
            )
        })
        .collect();
    let k_max = schedule.k_max;
    let mut opts = opts.clone();
    opts.abort_on_breach = false;
    follow_with(
        path,
        schedule,
        &opts,
        &grid,
        observables,
        observer,
        &mut |state, s| {
            let energy_estimate = estimate_ground_energy(state, path, s)?.value;
            let mut cur = state.clone();
            let mut discarded: f64 = 0.0;
            for _ in 0..variant.steps_per_a {
                let (next, w) = match variant.kind {
                    VariantKind::Power => power_step(&cur, path, s, k_max)?,
                    VariantKind::EvenOddImaginary => {
                        even_odd_imaginary_step(&cur, path, s, variant.tau, k_max)?
                    }
                };
                discarded = discarded.max(w);
                cur = next;
            }
            Ok(Improved {
                state: cur,
                energy_estimate,
                raw_norm: None,
                evolve_discarded: discarded,
            })
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_path, ModelSpec};
    use crate::oracle::{self, OracleLimits};

    #[test]
    fn ground_state_is_fixed_by_both_steps() {
        let path = build_path(&ModelSpec::tfim_para(6, 0.5, 1.0)).unwrap();
        let gs = oracle::exact_ground_state(&path, 0.3, &OracleLimits::default()).unwrap();
        let psi = MatrixProductState::from_dense(&gs.vector, 6, 2).unwrap();
        let (p, _) = power_step(&psi, &path, 0.3, 64).unwrap();
        assert!(1.0 - oracle::fidelity(&p, &gs.vector).unwrap() < 1e-10);
        let (e, _) = even_odd_imaginary_step(&psi, &path, 0.3, 0.0, 64).unwrap();
        assert!(1.0 - oracle::fidelity(&e, &gs.vector).unwrap() < 1e-12);
    }

    #[test]
    fn single_bond_imaginary_step_is_exact() {
        let path = build_path(&ModelSpec::tfim_para(2, 0.5, 1.0)).unwrap();
        let psi = MatrixProductState::basis(2, &[0, 1]).unwrap();
        let (out, _) = even_odd_imaginary_step(&psi, &path, 0.4, 0.3, 4).unwrap();
        let h = oracle::dense_hamiltonian(&path, 0.4, &OracleLimits::default()).unwrap();
        let mut want = linalg::expm_hermitian(&h, c(-0.3, 0.)) * psi.to_dense();
        want /= c(want.norm(), 0.);
        assert!((oracle::dense_fidelity(&out.to_dense(), &want).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn negative_tau_is_rejected() {
        let path = build_path(&ModelSpec::tfim_para(3, 0.5, 1.0)).unwrap();
        let psi = MatrixProductState::basis(2, &[0, 0, 0]).unwrap();
        assert!(even_odd_imaginary_step(&psi, &path, 0.1, -0.1, 4).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(VariantConfig::even_odd(0.05, 8, 4).validate(1.58).is_ok());
        assert!(VariantConfig::even_odd(0.5, 8, 4).validate(1.58).is_err());
        assert!(VariantConfig::power(8, 0).validate(1.0).is_err());
    }
}
