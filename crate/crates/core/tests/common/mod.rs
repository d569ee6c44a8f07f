//! Dense reference built from Kronecker products only; shares no code with
//! the library's oracle.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn x() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn y() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn z() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

pub fn eye(d: usize) -> DMatrix<C64> {
    DMatrix::identity(d, d)
}

/// Operator on `n` qubits: `ops` placed at their sites, identity elsewhere.
/// Site 0 is the most significant factor.
pub fn embed(n: usize, ops: &[(usize, DMatrix<C64>)]) -> DMatrix<C64> {
    let mut out = DMatrix::from_element(1, 1, c(1., 0.));
    for site in 0..n {
        let f = ops
            .iter()
            .find(|(s, _)| *s == site)
            .map_or_else(|| eye(2), |(_, m)| m.clone());
        out = out.kronecker(&f);
    }
    out
}

/// Two-site operator on `(i, i+1)`.
pub fn embed_pair(n: usize, i: usize, op: &DMatrix<C64>) -> DMatrix<C64> {
    eye(1 << i).kronecker(op).kronecker(&eye(1 << (n - i - 2)))
}

/// `-g Σ X_i - s c Σ Z_i Z_{i+1}`.
pub fn tfim(n: usize, s: f64, g: f64, zz: f64) -> DMatrix<C64> {
    let mut h = DMatrix::zeros(1 << n, 1 << n);
    for i in 0..n {
        h -= embed(n, &[(i, x())]) * c(g, 0.);
    }
    for i in 0..n - 1 {
        h -= embed(n, &[(i, z()), (i + 1, z())]) * c(s * zz, 0.);
    }
    h
}

/// Eigenvalues ascending with eigenvectors, for a real symmetric matrix
/// stored as complex.
pub fn eigh_real(h: &DMatrix<C64>) -> (Vec<f64>, Vec<DVector<C64>>) {
    let re = h.map(|v| v.re);
    let dim = re.nrows();
    let eig = re.symmetric_eigen();
    let mut idx: Vec<usize> = (0..dim).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = idx
        .iter()
        .map(|&k| eig.eigenvectors.column(k).map(|v| c(v, 0.)))
        .collect();
    (vals, vecs)
}

pub fn fidelity(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    a.dotc(b).norm_sqr() / (a.norm_squared() * b.norm_squared())
}

pub fn expect(v: &DVector<C64>, op: &DMatrix<C64>) -> C64 {
    v.dotc(&(op * v)) / c(v.norm_squared(), 0.)
}

/// `exp(i t H) v` for Hermitian real `H`, by eigendecomposition.
pub fn evolve(h: &DMatrix<C64>, t: f64, v: &DVector<C64>) -> DVector<C64> {
    let (vals, vecs) = eigh_real(h);
    let mut out = DVector::zeros(v.len());
    for (e, u) in vals.iter().zip(&vecs) {
        out += u * (u.dotc(v) * C64::from_polar(1.0, e * t));
    }
    out
}

/// Schmidt coefficients of `v` across `bond` (sites `0..bond` on the left),
/// normalized, non-increasing.
pub fn schmidt(v: &DVector<C64>, n: usize, bond: usize) -> Vec<f64> {
    let cols = 1usize << (n - bond);
    let m = DMatrix::from_fn(1 << bond, cols, |i, j| v[i * cols + j]);
    let mut s: Vec<f64> = m
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    s.iter().map(|x| x / norm).collect()
}

/// `min_φ |a - e^{iφ} b|²`.
pub fn aligned_distance_sqr(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    let ov = b.dotc(a);
    let phase = if ov.norm() > 0.0 {
        ov / ov.norm()
    } else {
        c(1., 0.)
    };
    (a - b * phase).norm_squared()
}
