use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::FilterError;
use crate::linalg::{self, c};
use crate::model::HamiltonianPath;
use crate::mps::{GateSide, MatrixProductState};

/// Bond gates for one second-order splitting step `A(dt/2) B(dt) A(dt/2)`,
/// where `A` holds the bonds with an even left site and `B` the odd ones.
pub(crate) struct StrangGates {
    half_a: Vec<(usize, DMatrix<C64>)>,
    full_a: Vec<(usize, DMatrix<C64>)>,
    full_b: Vec<(usize, DMatrix<C64>)>,
}

impl StrangGates {
    /// Gates of `exp(i h dt)` for each bond of `H(s)`.
    pub(crate) fn new(path: &HamiltonianPath, s: f64, dt: f64) -> Self {
        let terms = path.bond_terms(s);
        let gate = |i: usize, tau: f64| (i, linalg::expm_hermitian(&terms[i], c(0.0, tau)));
        let even: Vec<usize> = (0..terms.len()).step_by(2).collect();
        let odd: Vec<usize> = (1..terms.len()).step_by(2).collect();
        StrangGates {
            half_a: even.iter().map(|&i| gate(i, dt / 2.0)).collect(),
            full_a: even.iter().map(|&i| gate(i, dt)).collect(),
            full_b: odd.iter().map(|&i| gate(i, dt)).collect(),
        }
    }

    /// Runs `steps` splitting steps in place, merging the adjacent `A`
    /// half steps. Returns the summed discarded weight fraction.
    pub(crate) fn run(
        &self,
        state: &mut MatrixProductState,
        steps: usize,
        cap: Option<usize>,
    ) -> f64 {
        let mut discarded = 0.0;
        let sweep = |state: &mut MatrixProductState,
                     gates: &[(usize, DMatrix<C64>)],
                     forward: bool|
         -> f64 {
            let mut w = 0.0;
            if forward {
                for (i, g) in gates {
                    w += state.apply_gate_in_place(g, *i, cap, GateSide::Right);
                }
            } else {
                for (i, g) in gates.iter().rev() {
                    w += state.apply_gate_in_place(g, *i, cap, GateSide::Left);
                }
            }
            w
        };
        for k in 0..steps {
            let a = if k == 0 { &self.half_a } else { &self.full_a };
            discarded += sweep(state, a, true);
            discarded += sweep(state, &self.full_b, false);
        }
        if steps > 0 {
            discarded += sweep(state, &self.half_a, true);
        }
        discarded
    }
}

/// Approximates `exp(i H(s) t) state` with `substeps` second-order
/// even/odd splitting steps.
///
/// Each two-site gate goes through the SVD split with `bond_cap`. Returns
/// the evolved state and the summed discarded weight fraction.
pub fn trotter_evolve(
    state: &MatrixProductState,
    path: &HamiltonianPath,
    s: f64,
    t: f64,
    substeps: usize,
    bond_cap: Option<usize>,
) -> Result<(MatrixProductState, f64), FilterError> {
    if substeps < 1 {
        return Err(FilterError::InvalidParameter(
            "substeps must be >= 1".into(),
        ));
    }
    if bond_cap == Some(0) {
        return Err(FilterError::InvalidParameter(
            "bond cap must be >= 1".into(),
        ));
    }
    if state.n_sites() != path.n_sites() || state.phys_dim() != path.phys_dim() {
        return Err(FilterError::InvalidParameter(format!(
            "state has {} sites of dimension {}, path {} of dimension {}",
            state.n_sites(),
            state.phys_dim(),
            path.n_sites(),
            path.phys_dim()
        )));
    }
    let mut out = state.clone();
    if t == 0.0 || path.n_sites() < 2 {
        return Ok((out, 0.0));
    }
    let gates = StrangGates::new(path, s, t / substeps as f64);
    let w = gates.run(&mut out, substeps, bond_cap);
    Ok((out, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_path, ModelSpec};
    use crate::oracle::{self, OracleLimits};

    #[test]
    fn single_bond_is_exact() {
        let path = build_path(&ModelSpec::tfim_para(2, 0.5, 1.0)).unwrap();
        let psi = MatrixProductState::basis(2, &[0, 1]).unwrap();
        let (out, w) = trotter_evolve(&psi, &path, 0.4, 0.7, 1, None).unwrap();
        let want = oracle::dense_evolve(&psi.to_dense(), &path, 0.4, 0.7, &OracleLimits::default())
            .unwrap();
        assert!((out.to_dense() - want).norm() < 1e-10);
        assert_eq!(w, 0.0);
    }

    #[test]
    fn zero_time_is_identity() {
        let path = build_path(&ModelSpec::tfim_para(5, 0.5, 1.0)).unwrap();
        let psi = MatrixProductState::basis(2, &[0, 1, 1, 0, 1]).unwrap();
        let (out, _) = trotter_evolve(&psi, &path, 0.4, 0.0, 3, None).unwrap();
        assert!((out.to_dense() - psi.to_dense()).norm() < 1e-12);
    }

    #[test]
    fn rejects_zero_substeps() {
        let path = build_path(&ModelSpec::tfim_para(3, 0.5, 1.0)).unwrap();
        let psi = MatrixProductState::basis(2, &[0, 0, 0]).unwrap();
        assert!(trotter_evolve(&psi, &path, 0.1, 1.0, 0, None).is_err());
    }
}
