use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{MatrixProductState, MpsError, MpsResult, SiteTensor};
use crate::linalg;

/// A product `O_0 ⊗ O_1 ⊗ ... ⊗ O_{N-1}` of single-site operators.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableProduct {
    ops: Vec<DMatrix<C64>>,
    norms: Vec<f64>,
}

impl ObservableProduct {
    pub fn identity(n_sites: usize, phys_dim: usize) -> Self {
        let ops = vec![linalg::identity(phys_dim); n_sites];
        let norms = vec![1.0; n_sites];
        ObservableProduct { ops, norms }
    }

    /// Identity everywhere except the listed `(site, operator)` pairs.
    pub fn from_sites(
        n_sites: usize,
        phys_dim: usize,
        sites: &[(usize, DMatrix<C64>)],
    ) -> MpsResult<Self> {
        let mut obs = Self::identity(n_sites, phys_dim);
        for (site, op) in sites {
            obs = obs.with_site(*site, op.clone())?;
        }
        Ok(obs)
    }

    pub fn with_site(mut self, site: usize, op: DMatrix<C64>) -> MpsResult<Self> {
        if site >= self.ops.len() {
            return Err(MpsError::SiteOutOfRange {
                site,
                n_sites: self.ops.len(),
            });
        }
        self.norms[site] = linalg::operator_norm(&op);
        self.ops[site] = op;
        Ok(self)
    }

    pub fn n_sites(&self) -> usize {
        self.ops.len()
    }

    pub fn ops(&self) -> &[DMatrix<C64>] {
        &self.ops
    }

    /// Operator norm of each factor.
    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// `‖O‖ = Π ‖O_i‖`.
    pub fn norm(&self) -> f64 {
        self.norms.iter().product()
    }

    /// Dense `D^N x D^N` matrix, for oracle comparisons only.
    pub fn to_dense(&self) -> DMatrix<C64> {
        self.ops
            .iter()
            .skip(1)
            .fold(self.ops[0].clone(), |acc, op| linalg::kron(&acc, op))
    }
}

fn check_same_shape(a: &MatrixProductState, b: &MatrixProductState) -> MpsResult<()> {
    if a.n_sites() != b.n_sites() || a.phys_dim() != b.phys_dim() {
        return Err(MpsError::Shape(format!(
            "states differ: N={} D={} vs N={} D={}",
            a.n_sites(),
            a.phys_dim(),
            b.n_sites(),
            b.phys_dim()
        )));
    }
    Ok(())
}

/// One transfer-matrix step `E' = Σ_p A_p† E B_p`.
fn transfer(env: &DMatrix<C64>, a: &SiteTensor, b: &SiteTensor) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(a.right(), b.right());
    for p in 0..a.phys() {
        out += a.slice(p).adjoint() * env * b.slice(p);
    }
    out
}

/// Like [`transfer`] with a single-site operator between bra and ket.
fn transfer_op(
    env: &DMatrix<C64>,
    a: &SiteTensor,
    b: &SiteTensor,
    op: &DMatrix<C64>,
) -> DMatrix<C64> {
    let d = a.phys();
    let b_slices: Vec<DMatrix<C64>> = (0..d).map(|p| b.slice(p)).collect();
    let mut out = DMatrix::zeros(a.right(), b.right());
    for p in 0..d {
        let mut ob = DMatrix::zeros(b.left(), b.right());
        for (q, bq) in b_slices.iter().enumerate() {
            let w = op[(p, q)];
            if w != C64::new(0.0, 0.0) {
                ob += bq * w;
            }
        }
        out += a.slice(p).adjoint() * env * ob;
    }
    out
}

/// `⟨a|b⟩`, antilinear in `a`. Cost is linear in `N`.
pub fn inner_product(a: &MatrixProductState, b: &MatrixProductState) -> MpsResult<C64> {
    check_same_shape(a, b)?;
    let mut env = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for (ta, tb) in a.tensors().iter().zip(b.tensors()) {
        env = transfer(&env, ta, tb);
    }
    Ok(env[(0, 0)] * (a.log_norm() + b.log_norm()).exp())
}

/// `⟨ψ|O|ψ⟩ / ⟨ψ|ψ⟩` for a product observable.
pub fn expect_product_observable(
    state: &MatrixProductState,
    obs: &ObservableProduct,
) -> MpsResult<C64> {
    if obs.n_sites() != state.n_sites() {
        return Err(MpsError::Shape(format!(
            "observable covers {} sites, state has {}",
            obs.n_sites(),
            state.n_sites()
        )));
    }
    let d = state.phys_dim();
    for (site, op) in obs.ops().iter().enumerate() {
        if op.nrows() != d || op.ncols() != d {
            return Err(MpsError::OperatorShape {
                site,
                rows: op.nrows(),
                cols: op.ncols(),
                expected: d,
            });
        }
    }
    let mut env = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    let mut norm_env = env.clone();
    for (t, op) in state.tensors().iter().zip(obs.ops()) {
        env = transfer_op(&env, t, t, op);
        norm_env = transfer(&norm_env, t, t);
    }
    let nrm = norm_env[(0, 0)];
    if nrm.norm() == 0.0 {
        return Err(MpsError::ZeroNorm);
    }
    Ok(env[(0, 0)] / nrm)
}

/// `⟨ψ|h|ψ⟩ / ⟨ψ|ψ⟩` for a `D² x D²` operator on sites `(i, i+1)`.
///
/// Expects `state` to have its centre at `i`; callers sweep the centre along
/// the chain so a full Hamiltonian costs one pass.
pub(crate) fn expect_two_site_at_center(
    state: &MatrixProductState,
    op: &DMatrix<C64>,
    i: usize,
) -> C64 {
    debug_assert_eq!(state.canonical_center(), Some(i));
    let theta = two_site_theta(&state.tensors()[i], &state.tensors()[i + 1]);
    let applied = super::gate::apply_to_theta(&theta, op, state.phys_dim());
    let num: C64 = theta
        .data
        .iter()
        .zip(&applied.data)
        .map(|(a, b)| a.conj() * b)
        .sum();
    let den: f64 = theta.data.iter().map(|z| z.norm_sqr()).sum();
    num / den
}

/// Public form of [`expect_two_site_at_center`] that handles gauge itself.
pub fn expect_two_site(state: &MatrixProductState, op: &DMatrix<C64>, i: usize) -> MpsResult<C64> {
    let n = state.n_sites();
    if i + 1 >= n {
        return Err(MpsError::SiteOutOfRange {
            site: i + 1,
            n_sites: n,
        });
    }
    let dd = state.phys_dim() * state.phys_dim();
    if op.nrows() != dd || op.ncols() != dd {
        return Err(MpsError::GateShape {
            rows: op.nrows(),
            cols: op.ncols(),
            expected: dd,
        });
    }
    let mut s = state.clone();
    s.move_center(i);
    Ok(expect_two_site_at_center(&s, op, i))
}

/// Two-site block `θ[l, p, q, r]` stored row-major.
pub(crate) struct Theta {
    pub left: usize,
    pub right: usize,
    pub data: Vec<C64>,
}

pub(crate) fn two_site_theta(a: &SiteTensor, b: &SiteTensor) -> Theta {
    let m = a.left_matrix() * b.right_matrix(); // (l*p, q*r)
    let data = m.transpose().as_slice().to_vec();
    Theta {
        left: a.left(),
        right: b.right(),
        data,
    }
}
