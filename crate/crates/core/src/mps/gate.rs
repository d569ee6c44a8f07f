use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::contract::{two_site_theta, Theta};
use super::{MatrixProductState, MpsError, MpsResult, SiteTensor};
use crate::linalg::SortedSvd;

/// Which of the two sites holds the canonical centre after a gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateSide {
    Left,
    Right,
}

/// `θ'[l, p', q', r] = Σ G[(p'q'), (pq)] θ[l, p, q, r]`.
pub(crate) fn apply_to_theta(theta: &Theta, gate: &DMatrix<C64>, d: usize) -> Theta {
    let dd = d * d;
    let (left, right) = (theta.left, theta.right);
    let mut out = vec![C64::new(0.0, 0.0); theta.data.len()];
    let mut column = vec![C64::new(0.0, 0.0); dd];
    for l in 0..left {
        for r in 0..right {
            for (pq, slot) in column.iter_mut().enumerate() {
                *slot = theta.data[(l * dd + pq) * right + r];
            }
            for row in 0..dd {
                let mut acc = C64::new(0.0, 0.0);
                for (pq, v) in column.iter().enumerate() {
                    acc += gate[(row, pq)] * v;
                }
                out[(l * dd + row) * right + r] = acc;
            }
        }
    }
    Theta {
        left,
        right,
        data: out,
    }
}

impl MatrixProductState {
    /// Applies `gate` to sites `(i, i+1)` and re-splits by SVD.
    ///
    /// Keeps at most `cap` singular values (and never the numerically zero
    /// ones), rescales the kept spectrum to the pre-truncation norm, and
    /// returns the discarded fraction of the squared norm.
    pub(crate) fn apply_gate_in_place(
        &mut self,
        gate: &DMatrix<C64>,
        i: usize,
        cap: Option<usize>,
        side: GateSide,
    ) -> f64 {
        let d = self.phys_dim();
        if self.canonical_center() != Some(i) {
            self.move_center(i);
        }
        let theta = two_site_theta(&self.tensors()[i], &self.tensors()[i + 1]);
        let theta = apply_to_theta(&theta, gate, d);
        let (left, right) = (theta.left, theta.right);
        let m = DMatrix::from_row_slice(left * d, d * right, &theta.data);
        let svd = SortedSvd::new(&m);
        let total = svd.total_weight();
        let mut keep = svd.numerical_rank().max(1);
        if let Some(cap) = cap {
            keep = keep.min(cap);
        }
        let kept: f64 = svd.s[..keep].iter().map(|x| x * x).sum();
        let discarded = if total > 0.0 {
            ((total - kept) / total).max(0.0)
        } else {
            0.0
        };
        let rescale = if kept > 0.0 {
            (total / kept).sqrt()
        } else {
            1.0
        };
        let s: Vec<f64> = svd.s[..keep].iter().map(|x| x * rescale).collect();
        let u = svd.u.columns(0, keep).into_owned();
        let vt = svd.v_t.rows(0, keep).into_owned();
        let tensors = self.tensors_mut();
        match side {
            GateSide::Right => {
                tensors[i] = SiteTensor::from_left_matrix(&u, d);
                let sv = DMatrix::from_fn(keep, vt.ncols(), |a, b| vt[(a, b)] * s[a]);
                tensors[i + 1] = SiteTensor::from_right_matrix(&sv, d);
                self.set_center(Some(i + 1));
            }
            GateSide::Left => {
                let us = DMatrix::from_fn(u.nrows(), keep, |a, b| u[(a, b)] * s[b]);
                tensors[i] = SiteTensor::from_left_matrix(&us, d);
                tensors[i + 1] = SiteTensor::from_right_matrix(&vt, d);
                self.set_center(Some(i));
            }
        }
        discarded
    }
}

/// Applies a `D² x D²` two-site operator to adjacent sites `(i, i+1)`.
///
/// The operator does not need to be unitary. The state is brought to
/// canonical form around `i` first if needed, so the SVD split yields the
/// exact Schmidt spectrum of the updated bond; with `bond_cap` set, the
/// smallest values beyond the cap are dropped. The output's centre is at
/// `i + 1`. Returns the new state and the discarded weight fraction.
pub fn apply_two_site_gate(
    state: &MatrixProductState,
    gate: &DMatrix<C64>,
    sites: (usize, usize),
    bond_cap: Option<usize>,
) -> MpsResult<(MatrixProductState, f64)> {
    let (i, j) = sites;
    if j != i + 1 {
        return Err(MpsError::NonAdjacent(i, j));
    }
    if j >= state.n_sites() {
        return Err(MpsError::SiteOutOfRange {
            site: j,
            n_sites: state.n_sites(),
        });
    }
    let dd = state.phys_dim() * state.phys_dim();
    if gate.nrows() != dd || gate.ncols() != dd {
        return Err(MpsError::GateShape {
            rows: gate.nrows(),
            cols: gate.ncols(),
            expected: dd,
        });
    }
    if bond_cap == Some(0) {
        return Err(MpsError::InvalidBondCap);
    }
    let mut out = state.clone();
    let w = out.apply_gate_in_place(gate, i, bond_cap, GateSide::Right);
    Ok((out, w))
}
