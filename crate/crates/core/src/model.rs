//! Parameter-dependent nearest-neighbour Hamiltonian paths.
//!
//! A path is `H(s) = Σ_i h_{i,i+1}(s)` for `s ∈ [0, s_max]`, with every bond
//! term bounded by `‖h‖ ≤ J` and `‖∂_s h‖ ≤ J`, a promised uniform gap `ΔE`,
//! and a known product ground state of `H(0)`. Bond terms are indexed by
//! their left site `i ∈ 0..N-1`.
//!
//! Built-in families (all qubits, `D = 2`):
//!
//! - `tfim-para`: `h_{i,i+1}(s) = -(g/2)(w_l X_i + w_r X_{i+1}) - s·c·Z_i Z_{i+1}`
//!   where the edge weights `w` are 2 on the chain ends and 1 inside so that
//!   `Σ h = -g Σ X_i - s c Σ Z_i Z_{i+1}`. Starts from `|+⟩^N`.
//! - `custom`: a bond-uniform sum of two-qubit Pauli strings with
//!   coefficients `c0 + c1·s`, and a uniform product initial state.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, c};
use crate::oracle::{self, OracleLimits};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown model family {0:?} (known: tfim-para, custom)")]
    UnknownFamily(String),
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    #[error("bound violated: {0}")]
    BoundViolated(String),
    #[error("s = {s} outside [0, {s_max}]")]
    OutOfRange { s: f64, s_max: f64 },
    #[error("bond {bond} out of range for {n_sites} sites")]
    BondOutOfRange { bond: usize, n_sites: usize },
    #[error("initial product state is not a ground state of H(0): {0}")]
    BadInitialState(String),
}

pub type TermFn = Arc<dyn Fn(usize, f64) -> DMatrix<C64> + Send + Sync>;

/// One Pauli-string contribution `(c0 + c1 s) P_i ⊗ Q_{i+1}` to a custom bond
/// term, with `pauli` a two-letter string over `IXYZ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PauliTerm {
    pub pauli: String,
    #[serde(default)]
    pub c0: f64,
    #[serde(default)]
    pub c1: f64,
}

/// Declarative description of a path, as read from a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: String,
    pub n_sites: usize,
    pub s_max: f64,
    /// Promised uniform gap ΔE.
    pub gap: f64,
    /// Declared coupling bound J; measured from the terms when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    /// Transverse field `g` (tfim-para).
    #[serde(default = "one")]
    pub field: f64,
    /// ZZ coupling scale `c` (tfim-para).
    #[serde(default = "one")]
    pub zz: f64,
    /// Bond terms (custom).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<PauliTerm>,
    /// Single-site initial state label `0`, `1`, `+` or `-` (custom).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
}

fn one() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn tfim_para(n_sites: usize, s_max: f64, gap: f64) -> Self {
        ModelSpec {
            family: "tfim-para".into(),
            n_sites,
            s_max,
            gap,
            coupling: None,
            field: 1.0,
            zz: 1.0,
            terms: Vec::new(),
            initial: None,
        }
    }
}

#[derive(Clone)]
pub struct HamiltonianPath {
    n_sites: usize,
    phys_dim: usize,
    terms: TermFn,
    coupling: f64,
    gap: f64,
    s_max: f64,
    initial: Vec<Vec<C64>>,
    rescale: f64,
    label: String,
}

impl fmt::Debug for HamiltonianPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianPath")
            .field("label", &self.label)
            .field("n_sites", &self.n_sites)
            .field("phys_dim", &self.phys_dim)
            .field("coupling", &self.coupling)
            .field("gap", &self.gap)
            .field("s_max", &self.s_max)
            .field("rescale", &self.rescale)
            .finish()
    }
}

impl HamiltonianPath {
    /// Assembles a path without checking any bound; see [`verify_bounds`].
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        label: impl Into<String>,
        n_sites: usize,
        phys_dim: usize,
        terms: TermFn,
        coupling: f64,
        gap: f64,
        s_max: f64,
        initial: Vec<Vec<C64>>,
    ) -> Self {
        HamiltonianPath {
            n_sites,
            phys_dim,
            terms,
            coupling,
            gap,
            s_max,
            initial,
            rescale: 1.0,
            label: label.into(),
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn phys_dim(&self) -> usize {
        self.phys_dim
    }

    /// The bound `J` on `‖h‖` and `‖∂_s h‖`.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// The promised gap `ΔE`.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    /// Factor `X/J` applied to the family's own parameter (1 if none).
    pub fn rescale(&self) -> f64 {
        self.rescale
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn initial_product_state(&self) -> &[Vec<C64>] {
        &self.initial
    }

    /// Same path with a different gap promise.
    pub fn with_gap(mut self, gap: f64) -> Self {
        self.gap = gap;
        self
    }

    /// `h_{i,i+1}(s)` with range checks.
    pub fn local_term(&self, i: usize, s: f64) -> Result<DMatrix<C64>, ModelError> {
        if i + 1 >= self.n_sites {
            return Err(ModelError::BondOutOfRange {
                bond: i,
                n_sites: self.n_sites,
            });
        }
        if !(0.0..=self.s_max * (1.0 + 1e-12)).contains(&s) {
            return Err(ModelError::OutOfRange {
                s,
                s_max: self.s_max,
            });
        }
        Ok(self.term_unchecked(i, s))
    }

    /// `h_{i,i+1}(s)` without range checks, for finite differences and
    /// internal sweeps over an already validated grid.
    pub fn term_unchecked(&self, i: usize, s: f64) -> DMatrix<C64> {
        (self.terms)(i, s)
    }

    /// All bond terms at `s`, bond 0 first.
    pub fn bond_terms(&self, s: f64) -> Vec<DMatrix<C64>> {
        (0..self.n_sites - 1)
            .map(|i| self.term_unchecked(i, s))
            .collect()
    }

    /// Cheap upper bound `(N-1) J` on `‖H(s)‖`.
    pub fn norm_bound(&self) -> f64 {
        (self.n_sites.saturating_sub(1)) as f64 * self.coupling
    }
}

fn single_site_state(label: &str) -> Option<Vec<C64>> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match label {
        "0" => Some(vec![c(1., 0.), c(0., 0.)]),
        "1" => Some(vec![c(0., 0.), c(1., 0.)]),
        "+" => Some(vec![c(r, 0.), c(r, 0.)]),
        "-" => Some(vec![c(r, 0.), c(-r, 0.)]),
        _ => None,
    }
}

fn tfim_terms(n: usize, field: f64, zz: f64) -> TermFn {
    let x1 = linalg::kron(&linalg::pauli_x(), &linalg::identity(2));
    let x2 = linalg::kron(&linalg::identity(2), &linalg::pauli_x());
    let zz_op = linalg::kron(&linalg::pauli_z(), &linalg::pauli_z());
    Arc::new(move |i, s| {
        let wl = if i == 0 { 1.0 } else { 0.5 };
        let wr = if i + 2 == n { 1.0 } else { 0.5 };
        &x1 * c(-field * wl, 0.0) + &x2 * c(-field * wr, 0.0) + &zz_op * c(-s * zz, 0.0)
    })
}

fn custom_terms(terms: &[PauliTerm]) -> Result<TermFn, ModelError> {
    let mut parts = Vec::with_capacity(terms.len());
    for t in terms {
        let chars: Vec<char> = t.pauli.chars().collect();
        let ops = match chars.as_slice() {
            [a, b] => linalg::pauli(*a).zip(linalg::pauli(*b)),
            _ => None,
        };
        let (a, b) = ops.ok_or_else(|| {
            ModelError::InvalidParameter(format!(
                "pauli string {:?} must be two letters from IXYZ",
                t.pauli
            ))
        })?;
        parts.push((linalg::kron(&a, &b), t.c0, t.c1));
    }
    if parts.is_empty() {
        return Err(ModelError::InvalidParameter(
            "custom family needs at least one term".into(),
        ));
    }
    Ok(Arc::new(move |_, s| {
        let mut h = DMatrix::zeros(4, 4);
        for (op, c0, c1) in &parts {
            h += op * c(c0 + c1 * s, 0.0);
        }
        h
    }))
}

/// Sampling grid used when measuring `J` and checking the initial state.
const BOUND_GRID: usize = 51;

/// Resolves a [`ModelSpec`] into a validated path.
///
/// `J` is the declared coupling or, if absent, the largest `‖h_{i,i+1}(s)‖`
/// over bonds and a 51-point grid. When `‖∂_s h‖` exceeds `J`, the parameter
/// is rescaled `s → s X/J` (with `s_max` scaled alike) so the derivative bound
/// holds. For `N ≤ 12` the initial product state is checked against the
/// oracle's ground energy of `H(0)`.
pub fn build_path(spec: &ModelSpec) -> Result<HamiltonianPath, ModelError> {
    let n = spec.n_sites;
    if n < 2 {
        return Err(ModelError::InvalidParameter(format!(
            "n_sites must be >= 2, got {n}"
        )));
    }
    if !(spec.s_max >= 0.0) || !spec.s_max.is_finite() {
        return Err(ModelError::InvalidParameter(format!(
            "s_max must be >= 0, got {}",
            spec.s_max
        )));
    }
    if !(spec.gap > 0.0) || !spec.gap.is_finite() {
        return Err(ModelError::InvalidParameter(format!(
            "gap must be > 0, got {}",
            spec.gap
        )));
    }
    let (terms, initial) = match spec.family.as_str() {
        "tfim-para" => {
            if !(spec.field > 0.0) {
                return Err(ModelError::InvalidParameter(format!(
                    "tfim-para needs field > 0 for a |+> ground state, got {}",
                    spec.field
                )));
            }
            (
                tfim_terms(n, spec.field, spec.zz),
                single_site_state("+").expect("known"),
            )
        }
        "custom" => {
            let label = spec.initial.as_deref().unwrap_or("+");
            let init = single_site_state(label).ok_or_else(|| {
                ModelError::InvalidParameter(format!(
                    "initial state {label:?} must be one of 0, 1, +, -"
                ))
            })?;
            (custom_terms(&spec.terms)?, init)
        }
        other => return Err(ModelError::UnknownFamily(other.to_string())),
    };
    let mut path = HamiltonianPath::new(
        spec.family.clone(),
        n,
        2,
        terms,
        0.0,
        spec.gap,
        spec.s_max,
        vec![initial; n],
    );

    let report = measure_bounds(&path, BOUND_GRID);
    let coupling = match spec.coupling {
        Some(j) => {
            if !(j > 0.0) {
                return Err(ModelError::InvalidParameter(format!(
                    "coupling must be > 0, got {j}"
                )));
            }
            if report.max_term_norm > j * (1.0 + 1e-9) {
                let (bond, s) = report.worst_term;
                return Err(ModelError::BoundViolated(format!(
                    "‖h‖ <= J fails: ‖h_{{{bond},{}}}({s})‖ = {:.6} > J = {j}",
                    bond + 1,
                    report.max_term_norm
                )));
            }
            j
        }
        None => report.max_term_norm,
    };
    if !(coupling > 0.0) {
        return Err(ModelError::InvalidParameter(
            "all bond terms vanish; J would be 0".into(),
        ));
    }
    path.coupling = coupling;
    if report.max_derivative_norm > coupling * (1.0 + 1e-6) {
        let factor = report.max_derivative_norm / coupling;
        let inner = path.terms.clone();
        path.terms = Arc::new(move |i, s| inner(i, s / factor));
        path.s_max *= factor;
        path.rescale = factor;
    }

    if n <= 12 {
        check_initial_state(&path)?;
    }
    Ok(path)
}

fn check_initial_state(path: &HamiltonianPath) -> Result<(), ModelError> {
    let limits = OracleLimits::default();
    let psi = oracle::product_vector(path.initial_product_state());
    let h_psi = oracle::apply_hamiltonian(path, 0.0, &psi);
    let energy = psi.dotc(&h_psi).re;
    let resid = (&h_psi - &psi * c(energy, 0.0)).norm();
    let scale = path.norm_bound().max(1.0);
    if resid > 1e-10 * scale {
        return Err(ModelError::BadInitialState(format!(
            "not an eigenvector, residual {resid:.3e}"
        )));
    }
    let gs = oracle::exact_ground_state(path, 0.0, &limits)
        .map_err(|e| ModelError::BadInitialState(e.to_string()))?;
    if energy > gs.energy + 1e-9 * scale {
        return Err(ModelError::BadInitialState(format!(
            "energy {energy:.10} above the ground energy {:.10}",
            gs.energy
        )));
    }
    Ok(())
}

/// Measured norm bounds of a path on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub grid_points: usize,
    pub coupling: f64,
    pub max_term_norm: f64,
    /// `(bond, s)` where `‖h‖` peaks.
    pub worst_term: (usize, f64),
    pub max_derivative_norm: f64,
    /// `(bond, s)` where the finite-difference `‖∂_s h‖` peaks.
    pub worst_derivative: (usize, f64),
    pub max_hermiticity_defect: f64,
    pub term_bound_ok: bool,
    pub derivative_bound_ok: bool,
    pub hermitian_ok: bool,
}

impl BoundsReport {
    pub fn pass(&self) -> bool {
        self.term_bound_ok && self.derivative_bound_ok && self.hermitian_ok
    }
}

fn measure_bounds(path: &HamiltonianPath, grid_points: usize) -> BoundsReport {
    let grid_points = grid_points.max(2);
    let s_max = path.s_max;
    let step = 1e-5 * if s_max > 0.0 { s_max } else { 1.0 };
    let mut rep = BoundsReport {
        grid_points,
        coupling: path.coupling,
        max_term_norm: 0.0,
        worst_term: (0, 0.0),
        max_derivative_norm: 0.0,
        worst_derivative: (0, 0.0),
        max_hermiticity_defect: 0.0,
        term_bound_ok: true,
        derivative_bound_ok: true,
        hermitian_ok: true,
    };
    for k in 0..grid_points {
        let s = s_max * k as f64 / (grid_points - 1) as f64;
        for i in 0..path.n_sites - 1 {
            let h = path.term_unchecked(i, s);
            let norm = linalg::operator_norm(&h);
            if norm > rep.max_term_norm {
                rep.max_term_norm = norm;
                rep.worst_term = (i, s);
            }
            rep.max_hermiticity_defect = rep
                .max_hermiticity_defect
                .max(linalg::hermiticity_defect(&h));
            let dh = (path.term_unchecked(i, s + step) - path.term_unchecked(i, s - step))
                * c(0.5 / step, 0.0);
            let dnorm = linalg::operator_norm(&dh);
            if dnorm > rep.max_derivative_norm {
                rep.max_derivative_norm = dnorm;
                rep.worst_derivative = (i, s);
            }
        }
    }
    let j = path.coupling;
    rep.term_bound_ok = rep.max_term_norm <= j * (1.0 + 1e-9);
    // finite differences carry O(step²) truncation and O(eps/step) roundoff
    rep.derivative_bound_ok = rep.max_derivative_norm <= j * (1.0 + 1e-6);
    rep.hermitian_ok = rep.max_hermiticity_defect <= 1e-12;
    rep
}

/// Samples `s` on a uniform grid and checks Hermiticity, `‖h‖ <= J` and the
/// central-difference `‖∂_s h‖ <= J` (step `1e-5 s_max`). Failures are
/// reported, never raised.
pub fn verify_bounds(path: &HamiltonianPath, grid_points: usize) -> BoundsReport {
    measure_bounds(path, grid_points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tfim_two_sites_at_zero() {
        let path = build_path(&ModelSpec::tfim_para(2, 0.5, 1.0)).unwrap();
        let h = path.local_term(0, 0.0).unwrap();
        let want = linalg::kron(&linalg::pauli_x(), &linalg::identity(2)) * c(-1., 0.)
            - linalg::kron(&linalg::identity(2), &linalg::pauli_x());
        assert!((h - want).norm() < 1e-15);
    }

    #[test]
    fn interior_terms_have_unit_norm_at_zero() {
        let path = build_path(&ModelSpec::tfim_para(8, 0.5, 1.0)).unwrap();
        for i in 1..6 {
            let n = linalg::operator_norm(&path.local_term(i, 0.0).unwrap());
            assert!((n - 1.0).abs() < 1e-12);
        }
        // boundary bond at s_max: ‖-X - X/2 - Z Z/2‖ = sqrt(1.5² + 0.5²)
        assert!((path.coupling() - 2.5f64.sqrt()).abs() < 1e-9);
        assert_eq!(path.rescale(), 1.0);
    }

    #[test]
    fn out_of_range_s_is_rejected() {
        let path = build_path(&ModelSpec::tfim_para(4, 0.5, 1.0)).unwrap();
        assert!(matches!(
            path.local_term(0, 0.6),
            Err(ModelError::OutOfRange { .. })
        ));
        assert!(matches!(
            path.local_term(0, -0.1),
            Err(ModelError::OutOfRange { .. })
        ));
        assert!(matches!(
            path.local_term(3, 0.1),
            Err(ModelError::BondOutOfRange { .. })
        ));
    }

    #[test]
    fn hermitian_and_lipschitz_on_random_samples() {
        use rand::{Rng, SeedableRng};
        let path = build_path(&ModelSpec::tfim_para(8, 0.5, 1.0)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let i = rng.random_range(0..7);
            let s = rng.random_range(0.0..0.5);
            let s2 = rng.random_range(0.0..0.5);
            let h = path.local_term(i, s).unwrap();
            assert!(linalg::hermiticity_defect(&h) <= 1e-12);
            let diff = linalg::operator_norm(&(h - path.local_term(i, s2).unwrap()));
            assert!(diff <= path.coupling() * (s - s2).abs() + 1e-9);
        }
    }

    #[test]
    fn steep_family_is_rescaled() {
        // ‖∂_s h‖ = 3 while ‖h‖ <= 1 + 3 s_max
        let spec = ModelSpec {
            family: "custom".into(),
            n_sites: 3,
            s_max: 0.2,
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
                PauliTerm {
                    pauli: "ZZ".into(),
                    c0: 0.0,
                    c1: -3.0,
                },
            ],
            initial: Some("+".into()),
        };
        let path = build_path(&spec).unwrap();
        let j = path.coupling();
        assert!(j < 3.0);
        assert!((path.rescale() - 3.0 / j).abs() < 1e-6);
        assert!((path.s_max() - 0.2 * 3.0 / j).abs() < 1e-6);
        assert!(verify_bounds(&path, 21).pass());
    }

    #[test]
    fn declared_coupling_too_small_is_rejected() {
        let mut spec = ModelSpec::tfim_para(6, 0.5, 1.0);
        spec.coupling = Some(1.0);
        let err = build_path(&spec).unwrap_err();
        assert!(matches!(err, ModelError::BoundViolated(ref m) if m.contains("‖h‖ <= J")));
    }

    #[test]
    fn unknown_family() {
        let mut spec = ModelSpec::tfim_para(4, 0.5, 1.0);
        spec.family = "heisenberg".into();
        assert_eq!(
            build_path(&spec).unwrap_err(),
            ModelError::UnknownFamily("heisenberg".into())
        );
    }

    #[test]
    fn verify_bounds_flags_misdeclared_coupling() {
        let good = build_path(&ModelSpec::tfim_para(8, 0.5, 1.0)).unwrap();
        assert!(verify_bounds(&good, 51).pass());
        let n = 8;
        let bad = HamiltonianPath::new(
            "mis-scaled",
            n,
            2,
            tfim_terms(n, 1.0, 1.0),
            1.0,
            1.0,
            0.5,
            good.initial_product_state().to_vec(),
        );
        let rep = verify_bounds(&bad, 51);
        assert!(!rep.pass());
        assert!(!rep.term_bound_ok);
        // the boundary bond at s_max is the worst offender
        assert!(rep.worst_term.0 == 0 || rep.worst_term.0 == n - 2);
        assert!((rep.worst_term.1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_path_has_zero_derivative() {
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
        let rep = verify_bounds(&path, 11);
        assert!(rep.pass());
        assert_eq!(rep.max_derivative_norm, 0.0);
    }
}
