//! Exact-diagonalization reference for small chains.
//!
//! Dense vectors use big-endian site order: site 0 is the most significant
//! digit of the basis index, matching [`MatrixProductState::to_dense`].
//! Hamiltonians are applied matrix-free; a dense matrix is only formed when
//! the memory guard allows it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, c};
use crate::model::HamiltonianPath;
use crate::mps::MatrixProductState;
use crate::par::Exec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("dense matrix of dimension {dim} needs {mib} MiB, over the {limit_mib} MiB guard")]
    TooLarge {
        dim: usize,
        mib: usize,
        limit_mib: usize,
    },
    #[error("Hilbert space dimension {dim} over the matrix-free limit {limit}")]
    TooManySites { dim: usize, limit: usize },
    #[error("Lanczos did not converge in {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("vector length {got} does not match dimension {want}")]
    Dimension { got: usize, want: usize },
    #[error("zero vector")]
    ZeroVector,
}

/// Resource guards for exact methods.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleLimits {
    /// Largest dense matrix allowed, in bytes.
    pub max_dense_bytes: usize,
    /// Largest dimension handled matrix-free.
    pub max_sparse_dim: usize,
    /// Dimension up to which eigendecompositions are done densely.
    pub full_diag_dim: usize,
    /// Start-vector seed for Lanczos.
    pub seed: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_dense_bytes: 512 << 20,
            max_sparse_dim: 1 << 20,
            full_diag_dim: 256,
            seed: 0,
        }
    }
}

fn hilbert_dim(path: &HamiltonianPath) -> usize {
    path.phys_dim().pow(path.n_sites() as u32)
}

fn check_sparse(path: &HamiltonianPath, limits: &OracleLimits) -> Result<usize, OracleError> {
    let d = path.phys_dim() as f64;
    let dim_f = d.powi(path.n_sites() as i32);
    if dim_f > limits.max_sparse_dim as f64 {
        return Err(OracleError::TooManySites {
            dim: dim_f.min(usize::MAX as f64) as usize,
            limit: limits.max_sparse_dim,
        });
    }
    Ok(hilbert_dim(path))
}

/// Dense `⊗_i v_i`.
pub fn product_vector(sites: &[Vec<C64>]) -> DVector<C64> {
    let mut out = vec![c(1., 0.)];
    for v in sites {
        let mut next = Vec::with_capacity(out.len() * v.len());
        for a in &out {
            for b in v {
                next.push(a * b);
            }
        }
        out = next;
    }
    DVector::from_vec(out)
}

/// `Σ_i h_{i,i+1} v` for explicit bond terms on `n` sites of dimension `d`.
pub fn apply_bond_terms(
    terms: &[DMatrix<C64>],
    n: usize,
    d: usize,
    v: &DVector<C64>,
) -> DVector<C64> {
    let mut out = DVector::zeros(v.len());
    let dd = d * d;
    let mut buf = vec![c(0., 0.); dd];
    for (i, h) in terms.iter().enumerate() {
        let right = d.pow((n - i - 2) as u32);
        let left = v.len() / (dd * right);
        for a in 0..left {
            for r in 0..right {
                let base = a * dd * right + r;
                for (k, b) in buf.iter_mut().enumerate() {
                    *b = v[base + k * right];
                }
                for row in 0..dd {
                    let mut acc = c(0., 0.);
                    for (col, b) in buf.iter().enumerate() {
                        acc += h[(row, col)] * b;
                    }
                    out[base + row * right] += acc;
                }
            }
        }
    }
    out
}

/// `H(s) v`, matrix-free.
pub fn apply_hamiltonian(path: &HamiltonianPath, s: f64, v: &DVector<C64>) -> DVector<C64> {
    apply_bond_terms(&path.bond_terms(s), path.n_sites(), path.phys_dim(), v)
}

/// Dense `H(s)`, refused when it would exceed the memory guard.
pub fn dense_hamiltonian(
    path: &HamiltonianPath,
    s: f64,
    limits: &OracleLimits,
) -> Result<DMatrix<C64>, OracleError> {
    let dim = check_sparse(path, limits)?;
    let bytes = dim
        .saturating_mul(dim)
        .saturating_mul(std::mem::size_of::<C64>());
    if bytes > limits.max_dense_bytes {
        return Err(OracleError::TooLarge {
            dim,
            mib: bytes >> 20,
            limit_mib: limits.max_dense_bytes >> 20,
        });
    }
    let (n, d) = (path.n_sites(), path.phys_dim());
    let dd = d * d;
    let mut m = DMatrix::zeros(dim, dim);
    for (i, h) in path.bond_terms(s).iter().enumerate() {
        let right = d.pow((n - i - 2) as u32);
        let left = dim / (dd * right);
        for a in 0..left {
            for r in 0..right {
                let base = a * dd * right + r;
                for row in 0..dd {
                    for col in 0..dd {
                        m[(base + row * right, base + col * right)] += h[(row, col)];
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Full spectrum of a dense Hermitian matrix, ascending.
#[derive(Clone, Debug)]
pub struct DenseSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors.
    pub eigenvectors: DMatrix<C64>,
}

impl DenseSpectrum {
    pub fn new(h: &DMatrix<C64>) -> Self {
        let (eigenvalues, eigenvectors) = linalg::eigh(h);
        DenseSpectrum {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn gap(&self) -> f64 {
        self.eigenvalues
            .get(1)
            .map_or(f64::INFINITY, |e1| e1 - self.eigenvalues[0])
    }
}

pub fn dense_spectrum(
    path: &HamiltonianPath,
    s: f64,
    limits: &OracleLimits,
) -> Result<DenseSpectrum, OracleError> {
    Ok(DenseSpectrum::new(&dense_hamiltonian(path, s, limits)?))
}

/// Lowest Ritz pairs from [`lanczos_lowest`].
#[derive(Clone, Debug)]
pub struct LanczosResult {
    pub values: Vec<f64>,
    pub vectors: Vec<DVector<C64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// Lanczos with full reorthogonalization for the `n_vec` lowest eigenpairs
/// of the Hermitian operator `apply` on `C^dim`.
///
/// Converged when every requested Ritz residual `‖A x - λ x‖` is at most
/// `tol`. Invariant subspaces are escaped by restarting with a fresh random
/// vector orthogonal to the basis.
pub fn lanczos_lowest<F>(
    apply: F,
    dim: usize,
    n_vec: usize,
    seed: u64,
    tol: f64,
) -> Result<LanczosResult, OracleError>
where
    F: Fn(&DVector<C64>) -> DVector<C64>,
{
    let n_vec = n_vec.min(dim).max(1);
    let max_iter = dim.min(400);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_vec = |rng: &mut ChaCha8Rng| {
        DVector::from_fn(dim, |_, _| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    };
    let mut basis: Vec<DVector<C64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut v = random_vec(&mut rng);
    v /= c(v.norm(), 0.);
    let mut last_resid = f64::INFINITY;

    for j in 0..max_iter {
        basis.push(v.clone());
        let mut w = apply(&v);
        let alpha = v.dotc(&w).re;
        alphas.push(alpha);
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&w);
                w -= b * proj;
            }
        }
        let beta = w.norm();
        let done = j + 1 == max_iter;
        let check = done || beta < 1e-12 || (j + 1) % 8 == 0 || j + 1 >= dim;
        if check && j + 1 >= n_vec {
            let (vals, vecs) = tridiag_eigs(&alphas, &betas);
            let resid: Vec<f64> = (0..n_vec).map(|k| (beta * vecs[(j, k)]).abs()).collect();
            last_resid = resid.iter().copied().fold(0.0, f64::max);
            if last_resid <= tol || j + 1 >= dim {
                let vectors = (0..n_vec)
                    .map(|k| {
                        let mut x = DVector::zeros(dim);
                        for (i, b) in basis.iter().enumerate() {
                            x += b * c(vecs[(i, k)], 0.);
                        }
                        let nrm = x.norm();
                        x / c(nrm, 0.)
                    })
                    .collect();
                return Ok(LanczosResult {
                    values: vals[..n_vec].to_vec(),
                    vectors,
                    residuals: resid,
                    iterations: j + 1,
                });
            }
        }
        if beta < 1e-12 {
            // invariant subspace: continue from a fresh orthogonal direction
            let mut fresh = random_vec(&mut rng);
            for _ in 0..2 {
                for b in &basis {
                    let proj = b.dotc(&fresh);
                    fresh -= b * proj;
                }
            }
            let nrm = fresh.norm();
            if nrm < 1e-12 {
                break;
            }
            betas.push(0.0);
            v = fresh / c(nrm, 0.);
        } else {
            betas.push(beta);
            v = w / c(beta, 0.);
        }
    }
    Err(OracleError::NoConvergence {
        iterations: basis.len(),
        residual: last_resid,
    })
}

/// Ascending eigenpairs of the real symmetric tridiagonal matrix.
fn tridiag_eigs(alphas: &[f64], betas: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alphas.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = DMatrix::from_fn(m, m, |i, k| eig.eigenvectors[(i, order[k])]);
    (vals, vecs)
}

/// Ground state of `H(s)` with its gap.
#[derive(Clone, Debug)]
pub struct GroundState {
    pub vector: DVector<C64>,
    pub energy: f64,
    /// `E_1 - E_0`.
    pub gap: f64,
    /// Set when `E_1 - E_0` is below `1e-8`, i.e. the ground state is not unique.
    pub degenerate: bool,
    pub residual: f64,
}

/// Lowest eigenpair and gap of `H(s)` via matrix-free Lanczos, with residual
/// at most `1e-9 ‖H‖`.
pub fn exact_ground_state(
    path: &HamiltonianPath,
    s: f64,
    limits: &OracleLimits,
) -> Result<GroundState, OracleError> {
    let dim = check_sparse(path, limits)?;
    let terms = path.bond_terms(s);
    let (n, d) = (path.n_sites(), path.phys_dim());
    let scale = path.norm_bound().max(1.0);
    let res = lanczos_lowest(
        |v| apply_bond_terms(&terms, n, d, v),
        dim,
        2,
        limits.seed,
        1e-10 * scale,
    )?;
    let energy = res.values[0];
    let gap = res.values.get(1).map_or(f64::INFINITY, |e1| e1 - energy);
    Ok(GroundState {
        vector: res.vectors[0].clone(),
        energy,
        gap,
        degenerate: gap < 1e-8,
        residual: res.residuals[0],
    })
}

/// `|⟨ref|ψ⟩|² / (⟨ψ|ψ⟩⟨ref|ref⟩)`.
pub fn fidelity(state: &MatrixProductState, reference: &DVector<C64>) -> Result<f64, OracleError> {
    let v = state.to_dense();
    if v.len() != reference.len() {
        return Err(OracleError::Dimension {
            got: v.len(),
            want: reference.len(),
        });
    }
    dense_fidelity(&v, reference)
}

pub fn dense_fidelity(a: &DVector<C64>, b: &DVector<C64>) -> Result<f64, OracleError> {
    let (na, nb) = (a.norm_squared(), b.norm_squared());
    if na == 0.0 || nb == 0.0 {
        return Err(OracleError::ZeroVector);
    }
    Ok(a.dotc(b).norm_sqr() / (na * nb))
}

/// `e^{i t H(s)} v`.
///
/// Up to `full_diag_dim` this uses a dense eigendecomposition; above it a
/// Krylov exponential with 30-dimensional subspaces and substeps of
/// `‖H‖ τ <= 4`.
pub fn dense_evolve(
    v: &DVector<C64>,
    path: &HamiltonianPath,
    s: f64,
    t: f64,
    limits: &OracleLimits,
) -> Result<DVector<C64>, OracleError> {
    let dim = check_sparse(path, limits)?;
    if v.len() != dim {
        return Err(OracleError::Dimension {
            got: v.len(),
            want: dim,
        });
    }
    if dim <= limits.full_diag_dim {
        let spec = dense_spectrum(path, s, limits)?;
        let u = &spec.eigenvectors;
        let mut coeffs = u.adjoint() * v;
        for (k, e) in spec.eigenvalues.iter().enumerate() {
            coeffs[k] *= C64::from_polar(1.0, e * t);
        }
        return Ok(u * coeffs);
    }
    let terms = path.bond_terms(s);
    let (n, d) = (path.n_sites(), path.phys_dim());
    let steps = ((t.abs() * path.norm_bound()) / 4.0).ceil().max(1.0) as usize;
    let tau = t / steps as f64;
    let mut x = v.clone();
    for _ in 0..steps {
        x = krylov_step(|y| apply_bond_terms(&terms, n, d, y), &x, tau, 30);
    }
    Ok(x)
}

fn krylov_step<F>(apply: F, v: &DVector<C64>, tau: f64, m_max: usize) -> DVector<C64>
where
    F: Fn(&DVector<C64>) -> DVector<C64>,
{
    let beta0 = v.norm();
    if beta0 == 0.0 {
        return v.clone();
    }
    let mut basis = vec![v / c(beta0, 0.)];
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    for j in 0..m_max.min(v.len()) {
        let mut w = apply(&basis[j]);
        alphas.push(basis[j].dotc(&w).re);
        for _ in 0..2 {
            for b in &basis {
                let p = b.dotc(&w);
                w -= b * p;
            }
        }
        let beta = w.norm();
        if beta < 1e-13 || j + 1 == m_max.min(v.len()) {
            break;
        }
        betas.push(beta);
        basis.push(w / c(beta, 0.));
    }
    let m = alphas.len();
    let (vals, vecs) = tridiag_eigs(&alphas, &betas[..m - 1]);
    // e^{iτT} e_1
    let coeffs: Vec<C64> = (0..m)
        .map(|i| {
            (0..m)
                .map(|k| C64::from_polar(1.0, vals[k] * tau) * vecs[(i, k)] * vecs[(0, k)])
                .sum()
        })
        .collect();
    let mut out = DVector::zeros(v.len());
    for (b, cf) in basis.iter().zip(&coeffs) {
        out += b * (cf * beta0);
    }
    out
}

/// Gap of `H(s)` over a grid, with its minimum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapScan {
    pub s: Vec<f64>,
    pub gaps: Vec<f64>,
    pub min_gap: f64,
    pub argmin: f64,
}

pub fn gap_scan(
    path: &HamiltonianPath,
    grid: &[f64],
    exec: Exec,
    limits: &OracleLimits,
) -> Result<GapScan, OracleError> {
    let gaps: Vec<f64> = exec
        .map(grid.to_vec(), |s| {
            exact_ground_state(path, s, limits).map(|g| g.gap)
        })
        .into_iter()
        .collect::<Result<_, _>>()?;
    let (mut min_gap, mut argmin) = (f64::INFINITY, 0.0);
    for (&s, &g) in grid.iter().zip(&gaps) {
        if g < min_gap {
            min_gap = g;
            argmin = s;
        }
    }
    Ok(GapScan {
        s: grid.to_vec(),
        gaps,
        min_gap,
        argmin,
    })
}

/// `‖H(s1) - H(s2)‖` from the extremal eigenvalues of the difference.
pub fn hamiltonian_difference_norm(
    path: &HamiltonianPath,
    s1: f64,
    s2: f64,
    limits: &OracleLimits,
) -> Result<f64, OracleError> {
    let dim = check_sparse(path, limits)?;
    let (n, d) = (path.n_sites(), path.phys_dim());
    let diff: Vec<DMatrix<C64>> = path
        .bond_terms(s1)
        .iter()
        .zip(path.bond_terms(s2))
        .map(|(a, b)| a - b)
        .collect();
    if dim <= limits.full_diag_dim {
        let mut m = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            let mut e = DVector::zeros(dim);
            e[k] = c(1., 0.);
            m.set_column(k, &apply_bond_terms(&diff, n, d, &e));
        }
        return Ok(linalg::operator_norm(&m));
    }
    let tol = 1e-10 * path.norm_bound().max(1.0);
    let low = lanczos_lowest(|v| apply_bond_terms(&diff, n, d, v), dim, 1, 11, tol)?.values[0];
    let high = -lanczos_lowest(|v| -apply_bond_terms(&diff, n, d, v), dim, 1, 12, tol)?.values[0];
    Ok(low.abs().max(high.abs()))
}
