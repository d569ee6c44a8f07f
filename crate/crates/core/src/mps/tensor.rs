use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// A three-index site tensor `T[left, phys, right]`, stored row-major so that
/// both the left-fused `(left*phys, right)` and right-fused
/// `(left, phys*right)` matrix views share the same memory order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteTensor {
    left: usize,
    phys: usize,
    right: usize,
    data: Vec<C64>,
}

impl SiteTensor {
    pub fn zeros(left: usize, phys: usize, right: usize) -> Self {
        SiteTensor {
            left,
            phys,
            right,
            data: vec![C64::new(0.0, 0.0); left * phys * right],
        }
    }

    pub fn from_fn(
        left: usize,
        phys: usize,
        right: usize,
        mut f: impl FnMut(usize, usize, usize) -> C64,
    ) -> Self {
        let mut data = Vec::with_capacity(left * phys * right);
        for l in 0..left {
            for p in 0..phys {
                for r in 0..right {
                    data.push(f(l, p, r));
                }
            }
        }
        SiteTensor {
            left,
            phys,
            right,
            data,
        }
    }

    /// Returns `None` if `data` does not have `left * phys * right` entries.
    pub fn from_vec(left: usize, phys: usize, right: usize, data: Vec<C64>) -> Option<Self> {
        (data.len() == left * phys * right).then_some(SiteTensor {
            left,
            phys,
            right,
            data,
        })
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn phys(&self) -> usize {
        self.phys
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.left, self.phys, self.right)
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, l: usize, p: usize, r: usize) -> C64 {
        self.data[(l * self.phys + p) * self.right + r]
    }

    #[inline]
    pub fn get_mut(&mut self, l: usize, p: usize, r: usize) -> &mut C64 {
        &mut self.data[(l * self.phys + p) * self.right + r]
    }

    pub fn scale(&mut self, f: C64) {
        self.data.iter_mut().for_each(|z| *z *= f);
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `(left*phys) x right` matrix.
    pub fn left_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.left * self.phys, self.right, &self.data)
    }

    /// `left x (phys*right)` matrix.
    pub fn right_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.left, self.phys * self.right, &self.data)
    }

    pub fn from_left_matrix(m: &DMatrix<C64>, phys: usize) -> Self {
        debug_assert_eq!(m.nrows() % phys, 0);
        SiteTensor {
            left: m.nrows() / phys,
            phys,
            right: m.ncols(),
            data: row_major(m),
        }
    }

    pub fn from_right_matrix(m: &DMatrix<C64>, phys: usize) -> Self {
        debug_assert_eq!(m.ncols() % phys, 0);
        SiteTensor {
            left: m.nrows(),
            phys,
            right: m.ncols() / phys,
            data: row_major(m),
        }
    }

    /// The `left x right` matrix for physical index `p`.
    pub fn slice(&self, p: usize) -> DMatrix<C64> {
        DMatrix::from_fn(self.left, self.right, |l, r| self.get(l, p, r))
    }

    /// Max deviation of `Σ_{l,p} conj(T) T` from the identity on the right bond.
    pub fn left_isometry_defect(&self) -> f64 {
        let m = self.left_matrix();
        let g = m.adjoint() * &m;
        (g - DMatrix::<C64>::identity(self.right, self.right))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Max deviation of `Σ_{p,r} T conj(T)` from the identity on the left bond.
    pub fn right_isometry_defect(&self) -> f64 {
        let m = self.right_matrix();
        let g = &m * m.adjoint();
        (g - DMatrix::<C64>::identity(self.left, self.left))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

fn row_major(m: &DMatrix<C64>) -> Vec<C64> {
    // nalgebra is column-major; the transpose's storage is our row-major order
    m.transpose().as_slice().to_vec()
}
