//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// Singular values below this fraction of the largest are treated as zero.
pub const RANK_TOL: f64 = 1e-14;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli_x() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn pauli_y() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn pauli_z() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// Pauli matrix by letter, `I` included.
pub fn pauli(letter: char) -> Option<DMatrix<C64>> {
    match letter {
        'I' => Some(identity(2)),
        'X' => Some(pauli_x()),
        'Y' => Some(pauli_y()),
        'Z' => Some(pauli_z()),
        _ => None,
    }
}

pub fn identity(d: usize) -> DMatrix<C64> {
    DMatrix::identity(d, d)
}

/// Kronecker product with `a` acting on the more significant index.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Thin SVD with singular values sorted in non-increasing order.
///
/// Ties keep their original relative order, so the decomposition is
/// reproducible run to run.
pub struct SortedSvd {
    pub u: DMatrix<C64>,
    pub s: Vec<f64>,
    pub v_t: DMatrix<C64>,
}

impl SortedSvd {
    pub fn new(m: &DMatrix<C64>) -> Self {
        let (rows, cols) = m.shape();
        let k = rows.min(cols);
        if k == 0 {
            return SortedSvd {
                u: DMatrix::zeros(rows, 0),
                s: Vec::new(),
                v_t: DMatrix::zeros(0, cols),
            };
        }
        let svd = m.clone().svd(true, true);
        let u = svd.u.expect("u requested");
        let v_t = svd.v_t.expect("v_t requested");
        let raw: Vec<f64> = svd.singular_values.iter().copied().collect();
        let mut order: Vec<usize> = (0..raw.len()).collect();
        // stable sort: descending value, then ascending original index
        order.sort_by(|&a, &b| {
            raw[b]
                .partial_cmp(&raw[a])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let u = DMatrix::from_fn(rows, k, |r, j| u[(r, order[j])]);
        let v_t = DMatrix::from_fn(k, cols, |j, col| v_t[(order[j], col)]);
        let s = order.iter().map(|&j| raw[j]).collect();
        SortedSvd { u, s, v_t }
    }

    /// Number of singular values above the relative rank tolerance.
    pub fn numerical_rank(&self) -> usize {
        let smax = self.s.first().copied().unwrap_or(0.0);
        if smax == 0.0 {
            return 0;
        }
        self.s.iter().take_while(|&&x| x > RANK_TOL * smax).count()
    }

    pub fn total_weight(&self) -> f64 {
        self.s.iter().map(|x| x * x).sum()
    }
}

/// Thin QR: `m = q * r` with `q` having orthonormal columns.
pub fn qr_thin(m: DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    let qr = m.qr();
    (qr.q(), qr.r())
}

/// Thin LQ: `m = l * q` with `q` having orthonormal rows.
pub fn lq_thin(m: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    let (q, r) = qr_thin(m.adjoint());
    (r.adjoint(), q.adjoint())
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = m.nrows();
    // symmetrize against roundoff
    let herm = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vals = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, j| eig.eigenvectors[(r, order[j])]);
    (vals, vecs)
}

/// Spectral norm of an arbitrary matrix.
pub fn operator_norm(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    SortedSvd::new(m).s[0]
}

/// Largest |entry| of `m - m†`.
pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    (m - m.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// `exp(coeff * h)` for Hermitian `h`, via its eigenbasis.
pub fn expm_hermitian(h: &DMatrix<C64>, coeff: C64) -> DMatrix<C64> {
    let (vals, vecs) = eigh(h);
    let n = h.nrows();
    let mut scaled = vecs.clone();
    for j in 0..n {
        let f = (coeff * vals[j]).exp();
        for r in 0..n {
            scaled[(r, j)] *= f;
        }
    }
    scaled * vecs.adjoint()
}

pub fn frobenius_sqr(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn vdot(a: &DVector<C64>, b: &DVector<C64>) -> C64 {
    a.dotc(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_svd_reconstructs() {
        let m = DMatrix::from_fn(5, 3, |i, j| {
            c((i * 3 + j) as f64 * 0.37 - 1.0, (i as f64) * 0.1)
        });
        let svd = SortedSvd::new(&m);
        assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
        let sigma = DMatrix::from_diagonal(&DVector::from_iterator(
            svd.s.len(),
            svd.s.iter().map(|&x| c(x, 0.0)),
        ));
        let back = &svd.u * sigma * &svd.v_t;
        assert!((back - m).norm() < 1e-12);
    }

    #[test]
    fn lq_reconstructs_with_orthonormal_rows() {
        let m = DMatrix::from_fn(2, 6, |i, j| c(i as f64 + 0.3 * j as f64, (j as f64).sin()));
        let (l, q) = lq_thin(&m);
        assert!((&l * &q - &m).norm() < 1e-12);
        let qq = &q * q.adjoint();
        assert!((qq - DMatrix::identity(q.nrows(), q.nrows())).norm() < 1e-12);
    }

    #[test]
    fn expm_of_pauli_x() {
        let x = pauli_x();
        let t: f64 = 0.3;
        let u = expm_hermitian(&x, c(0.0, t));
        let expect = identity(2) * c(t.cos(), 0.0) + x * c(0.0, t.sin());
        assert!((u - expect).norm() < 1e-13);
    }

    #[test]
    fn operator_norm_of_sum_of_paulis() {
        let h = kron(&pauli_x(), &identity(2)) + kron(&identity(2), &pauli_x());
        assert!((operator_norm(&h) - 2.0).abs() < 1e-12);
    }
}
