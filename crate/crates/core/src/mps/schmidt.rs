use std::fmt;

use serde::{Deserialize, Serialize};

use super::{MatrixProductState, MpsError, MpsResult};
use crate::linalg::SortedSvd;

/// Schmidt coefficients `A(α)` of one bipartition, non-increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSpectrum {
    pub bond_index: usize,
    pub coefficients: Vec<f64>,
}

impl SchmidtSpectrum {
    /// `Σ_{α>k} |A(α)|²` (1-based `α`), the weight lost by keeping `k` values.
    pub fn tail_weight(&self, k: usize) -> f64 {
        self.coefficients.iter().skip(k).map(|a| a * a).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.tail_weight(0)
    }

    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// Von Neumann entanglement entropy (natural log).
    pub fn entropy(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|a| a * a)
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.ln())
            .sum()
    }
}

/// Schmidt spectrum across bond `bond` (sites `0..bond` | `bond..N`).
///
/// Coefficients are scaled so their squares sum to one; values below
/// `1e-14` of the largest are dropped.
pub fn schmidt_spectrum(state: &MatrixProductState, bond: usize) -> MpsResult<SchmidtSpectrum> {
    let n = state.n_sites();
    if bond == 0 || bond >= n {
        return Err(MpsError::BondOutOfRange { bond, n_sites: n });
    }
    let mut s = state.clone();
    s.move_center(bond - 1);
    let svd = SortedSvd::new(&s.tensors()[bond - 1].left_matrix());
    let rank = svd.numerical_rank();
    let total = svd.total_weight().sqrt();
    if total == 0.0 {
        return Err(MpsError::ZeroNorm);
    }
    let coefficients = svd.s[..rank].iter().map(|x| x / total).collect();
    Ok(SchmidtSpectrum {
        bond_index: bond,
        coefficients,
    })
}

/// Structured debug record of a state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateDump {
    pub n_sites: usize,
    pub phys_dim: usize,
    pub shapes: Vec<(usize, usize, usize)>,
    pub bond_dims: Vec<usize>,
    pub canonical_center: Option<usize>,
    pub log_norm: f64,
    pub spectra: Vec<SchmidtSpectrum>,
}

pub fn dump(state: &MatrixProductState) -> MpsResult<StateDump> {
    let spectra = (1..state.n_sites())
        .map(|b| schmidt_spectrum(state, b))
        .collect::<MpsResult<_>>()?;
    Ok(StateDump {
        n_sites: state.n_sites(),
        phys_dim: state.phys_dim(),
        shapes: state.tensors().iter().map(|t| t.shape()).collect(),
        bond_dims: state.bond_dims(),
        canonical_center: state.canonical_center(),
        log_norm: state.log_norm(),
        spectra,
    })
}

impl fmt::Display for StateDump {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "mps n_sites={} phys_dim={} log_norm={:.6e}",
            self.n_sites, self.phys_dim, self.log_norm
        )?;
        match self.canonical_center {
            Some(c) => writeln!(f, "center {c}")?,
            None => writeln!(f, "center none")?,
        }
        for (i, (l, p, r)) in self.shapes.iter().enumerate() {
            writeln!(f, "site {i} shape ({l}, {p}, {r})")?;
        }
        for s in &self.spectra {
            let head: Vec<String> = s
                .coefficients
                .iter()
                .take(8)
                .map(|a| format!("{a:.3e}"))
                .collect();
            let more = if s.rank() > 8 { " ..." } else { "" };
            writeln!(
                f,
                "bond {} rank {} entropy {:.6} [{}{more}]",
                s.bond_index,
                s.rank(),
                s.entropy(),
                head.join(", ")
            )?;
        }
        Ok(())
    }
}
