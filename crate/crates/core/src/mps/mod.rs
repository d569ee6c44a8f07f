//! Open-boundary matrix product states with a uniform physical dimension.
//!
//! Site tensors are `T_i[left, phys, right]` with boundary bonds of size 1.
//! A state may carry a canonical centre `c`: tensors left of `c` are left
//! isometries and tensors right of `c` are right isometries, so the Schmidt
//! coefficients of any bond adjacent to `c` are the singular values of the
//! centre tensor. Dense vectors use big-endian site order (site 0 is the most
//! significant digit).
//!
//! Bonds are numbered `1..N-1` by the number of sites to their left, sites are
//! numbered `0..N` as usual in Rust.
//!
//! Every public operation takes its inputs by reference and returns a fresh
//! state; nothing here holds shared mutable state, so states can be moved
//! between threads freely.

mod contract;
mod gate;
mod schmidt;
mod sum;
mod tensor;
mod truncate;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, SortedSvd};

pub(crate) use contract::expect_two_site_at_center;
pub use contract::{expect_product_observable, expect_two_site, inner_product, ObservableProduct};
pub use gate::{apply_two_site_gate, GateSide};
pub use schmidt::{dump, schmidt_spectrum, SchmidtSpectrum, StateDump};
pub use sum::add_states;
pub use tensor::SiteTensor;
pub use truncate::{compress, truncate_to_bond, TruncationReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpsError {
    #[error("structural error: {0}")]
    Shape(String),
    #[error("bond {bond} out of range 1..{n_sites}")]
    BondOutOfRange { bond: usize, n_sites: usize },
    #[error("site {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("two-site gate needs adjacent sites (i, i+1), got ({0}, {1})")]
    NonAdjacent(usize, usize),
    #[error("gate is {rows}x{cols}, expected {expected}x{expected}")]
    GateShape {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("operator on site {site} is {rows}x{cols}, expected {expected}x{expected}")]
    OperatorShape {
        site: usize,
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("cannot add an empty list of states")]
    EmptySum,
    #[error("bond cap must be at least 1")]
    InvalidBondCap,
    #[error("state has zero norm")]
    ZeroNorm,
}

pub type MpsResult<T> = Result<T, MpsError>;

/// A matrix product state `exp(log_norm) * Σ T_0 T_1 ... T_{N-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixProductState {
    tensors: Vec<SiteTensor>,
    phys_dim: usize,
    center: Option<usize>,
    log_norm: f64,
}

impl MatrixProductState {
    /// Builds a state from raw tensors, checking that bond shapes chain.
    pub fn from_tensors(tensors: Vec<SiteTensor>) -> MpsResult<Self> {
        let first = tensors
            .first()
            .ok_or_else(|| MpsError::Shape("no sites".into()))?;
        let d = first.phys();
        if d == 0 {
            return Err(MpsError::Shape("zero physical dimension".into()));
        }
        if first.left() != 1 || tensors.last().map(|t| t.right()) != Some(1) {
            return Err(MpsError::Shape(
                "boundary bonds must have dimension 1".into(),
            ));
        }
        for (i, t) in tensors.iter().enumerate() {
            if t.phys() != d {
                return Err(MpsError::Shape(format!(
                    "site {i} has physical dimension {} != {d}",
                    t.phys()
                )));
            }
            if i + 1 < tensors.len() && t.right() != tensors[i + 1].left() {
                return Err(MpsError::Shape(format!(
                    "bond {} mismatch: right of site {i} is {}, left of site {} is {}",
                    i + 1,
                    t.right(),
                    i + 1,
                    tensors[i + 1].left()
                )));
            }
        }
        Ok(MatrixProductState {
            tensors,
            phys_dim: d,
            center: None,
            log_norm: 0.0,
        })
    }

    /// Product state from one (not necessarily normalized) vector per site.
    pub fn product(site_vectors: &[Vec<C64>]) -> MpsResult<Self> {
        let tensors = site_vectors
            .iter()
            .map(|v| SiteTensor::from_fn(1, v.len(), 1, |_, p, _| v[p]))
            .collect();
        let mut mps = Self::from_tensors(tensors)?;
        mps.center = Some(0);
        Ok(mps)
    }

    /// Computational basis state `|digits[0] digits[1] ...⟩`.
    pub fn basis(phys_dim: usize, digits: &[usize]) -> MpsResult<Self> {
        let vecs: Vec<Vec<C64>> = digits
            .iter()
            .map(|&k| {
                (0..phys_dim)
                    .map(|p| C64::new(if p == k { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
        if digits.iter().any(|&k| k >= phys_dim) {
            return Err(MpsError::Shape(
                "basis digit exceeds physical dimension".into(),
            ));
        }
        Self::product(&vecs)
    }

    /// Exact MPS of a dense vector by successive SVDs (zero singular values
    /// dropped). The result is left-canonical with centre `N-1`.
    pub fn from_dense(vector: &DVector<C64>, n_sites: usize, phys_dim: usize) -> MpsResult<Self> {
        let dim = phys_dim.checked_pow(n_sites as u32).unwrap_or(usize::MAX);
        if n_sites == 0 || vector.len() != dim {
            return Err(MpsError::Shape(format!(
                "vector of length {} is not {phys_dim}^{n_sites}",
                vector.len()
            )));
        }
        let mut tensors = Vec::with_capacity(n_sites);
        // remainder as a (left, rest) matrix
        let mut rest = DMatrix::from_row_slice(1, dim, vector.as_slice());
        for _ in 0..n_sites - 1 {
            let left = rest.nrows();
            let cols = rest.ncols() / phys_dim;
            // regroup (left, phys*cols) -> (left*phys, cols); row-major data is unchanged
            let data: Vec<C64> = rest.transpose().as_slice().to_vec();
            let m = DMatrix::from_row_slice(left * phys_dim, cols, &data);
            let svd = SortedSvd::new(&m);
            let k = svd.numerical_rank().max(1);
            let u = svd.u.columns(0, k).into_owned();
            tensors.push(SiteTensor::from_left_matrix(&u, phys_dim));
            let sv = DMatrix::from_fn(k, cols, |i, j| svd.v_t[(i, j)] * svd.s[i]);
            rest = sv;
        }
        let left = rest.nrows();
        let data: Vec<C64> = rest.transpose().as_slice().to_vec();
        tensors.push(SiteTensor::from_vec(left, phys_dim, 1, data).expect("shape"));
        let mut mps = Self::from_tensors(tensors)?;
        mps.center = Some(n_sites - 1);
        Ok(mps)
    }

    /// Random normalized state; bond `b` has dimension
    /// `min(chi, d^b, d^(N-b))`. Entries are uniform in the unit square.
    pub fn random<R: Rng + ?Sized>(
        n_sites: usize,
        phys_dim: usize,
        chi: usize,
        rng: &mut R,
    ) -> Self {
        let dims = max_bond_dims(n_sites, phys_dim, chi);
        let tensors = (0..n_sites)
            .map(|i| {
                SiteTensor::from_fn(dims[i], phys_dim, dims[i + 1], |_, _, _| {
                    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                })
            })
            .collect();
        let mut mps = Self::from_tensors(tensors).expect("consistent random shapes");
        mps.normalize_in_place().expect("random state is nonzero");
        mps
    }

    pub fn n_sites(&self) -> usize {
        self.tensors.len()
    }

    pub fn phys_dim(&self) -> usize {
        self.phys_dim
    }

    pub fn tensors(&self) -> &[SiteTensor] {
        &self.tensors
    }

    pub fn canonical_center(&self) -> Option<usize> {
        self.center
    }

    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// Interior bond dimensions, bond 1 first.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.tensors.len() - 1]
            .iter()
            .map(|t| t.right())
            .collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Number of complex entries over all site tensors.
    pub fn num_parameters(&self) -> usize {
        self.tensors.iter().map(|t| t.data().len()).sum()
    }

    /// Contracts to a dense vector of length `d^N`.
    pub fn to_dense(&self) -> DVector<C64> {
        // running (prefix, bond) matrix
        let mut acc = DMatrix::from_element(1, 1, C64::new(self.log_norm.exp(), 0.0));
        for t in &self.tensors {
            let m = t.right_matrix();
            let prod = &acc * m; // (prefix, phys*right)
            let prefix = acc.nrows();
            // regroup (prefix, phys*right) -> (prefix*phys, right)
            let data: Vec<C64> = prod.transpose().as_slice().to_vec();
            acc = DMatrix::from_row_slice(prefix * t.phys(), t.right(), &data);
        }
        DVector::from_column_slice(acc.as_slice())
    }

    pub fn norm_sqr(&self) -> f64 {
        match self.center {
            Some(c) => self.tensors[c].norm_sqr() * (2.0 * self.log_norm).exp(),
            None => inner_product(self, self).expect("same shape").re,
        }
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Returns a copy scaled to unit norm with `log_norm = 0`.
    pub fn normalized(&self) -> MpsResult<Self> {
        let mut out = self.clone();
        out.normalize_in_place()?;
        Ok(out)
    }

    /// Multiplies the represented vector by `f`.
    pub fn scaled(&self, f: C64) -> Self {
        let mut out = self.clone();
        let site = out.center.unwrap_or(0);
        out.tensors[site].scale(f);
        out
    }

    /// Max isometry defect over all sites away from the centre, or `None`
    /// when the state carries no centre.
    pub fn canonical_defect(&self) -> Option<f64> {
        let c = self.center?;
        let left = self.tensors[..c].iter().map(|t| t.left_isometry_defect());
        let right = self.tensors[c + 1..]
            .iter()
            .map(|t| t.right_isometry_defect());
        Some(left.chain(right).fold(0.0, f64::max))
    }

    pub(crate) fn tensors_mut(&mut self) -> &mut [SiteTensor] {
        &mut self.tensors
    }

    pub(crate) fn set_center(&mut self, c: Option<usize>) {
        self.center = c;
    }

    pub(crate) fn from_parts(
        tensors: Vec<SiteTensor>,
        center: Option<usize>,
        log_norm: f64,
    ) -> Self {
        let phys_dim = tensors[0].phys();
        MatrixProductState {
            tensors,
            phys_dim,
            center,
            log_norm,
        }
    }

    pub(crate) fn normalize_in_place(&mut self) -> MpsResult<()> {
        let c = self.center.unwrap_or(0);
        self.move_center(c);
        let n = self.tensors[c].norm_sqr().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(MpsError::ZeroNorm);
        }
        self.tensors[c].scale(C64::new(1.0 / n, 0.0));
        self.log_norm = 0.0;
        Ok(())
    }

    /// Moves the centre from site `i` to `i + 1` with a QR step.
    fn shift_right(&mut self, i: usize) {
        let d = self.phys_dim;
        let (q, r) = linalg::qr_thin(self.tensors[i].left_matrix());
        self.tensors[i] = SiteTensor::from_left_matrix(&q, d);
        let next = r * self.tensors[i + 1].right_matrix();
        self.tensors[i + 1] = SiteTensor::from_right_matrix(&next, d);
    }

    /// Moves the centre from site `i` to `i - 1` with an LQ step.
    fn shift_left(&mut self, i: usize) {
        let d = self.phys_dim;
        let (l, q) = linalg::lq_thin(&self.tensors[i].right_matrix());
        self.tensors[i] = SiteTensor::from_right_matrix(&q, d);
        let prev = self.tensors[i - 1].left_matrix() * l;
        self.tensors[i - 1] = SiteTensor::from_left_matrix(&prev, d);
    }

    /// Brings the state into mixed canonical form around `c` in place.
    pub(crate) fn move_center(&mut self, c: usize) {
        let n = self.n_sites();
        match self.center {
            Some(cur) if cur == c => {}
            Some(cur) if cur < c => {
                for i in cur..c {
                    self.shift_right(i);
                }
            }
            Some(cur) => {
                for i in (c + 1..=cur).rev() {
                    self.shift_left(i);
                }
            }
            None => {
                for i in 0..c {
                    self.shift_right(i);
                }
                for i in (c + 1..n).rev() {
                    self.shift_left(i);
                }
            }
        }
        self.center = Some(c);
    }
}

/// Largest bond dimensions an `N`-site chain can need, capped at `chi`;
/// entry `b` is bond `b` with the boundary bonds included.
pub fn max_bond_dims(n_sites: usize, phys_dim: usize, chi: usize) -> Vec<usize> {
    (0..=n_sites)
        .map(|b| {
            let lhs = phys_dim.saturating_pow(b as u32);
            let rhs = phys_dim.saturating_pow((n_sites - b) as u32);
            lhs.min(rhs).min(chi).max(1)
        })
        .collect()
}

/// Returns a copy in mixed canonical form around `center`. The represented
/// vector is unchanged up to roundoff.
pub fn canonicalize(state: &MatrixProductState, center: usize) -> MpsResult<MatrixProductState> {
    if center >= state.n_sites() {
        return Err(MpsError::SiteOutOfRange {
            site: center,
            n_sites: state.n_sites(),
        });
    }
    // re-validate in case tensors were assembled by hand
    MatrixProductState::from_tensors(state.tensors.clone())?;
    let mut out = state.clone();
    out.move_center(center);
    Ok(out)
}
