use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Node rule for the Gaussian time integral.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrature {
    /// Uniform nodes on `[-t_max, t_max]`, spacing set by the spectral width
    /// so that aliased copies of the filter stay below the target.
    #[default]
    Trapezoid,
    /// Gauss-Hermite nodes in the scaled variable `x = ΔE t / √(2q)`.
    GaussHermite,
}

/// Physicists' Gauss-Hermite rule: `∫ e^{-x²} f(x) dx ≈ Σ w_k f(x_k)`.
///
/// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix with
/// off-diagonal `√(k/2)`, weights `√π v_0²`. Nodes ascending; the output is
/// symmetrized so `x_k = -x_{n-1-k}` and `w_k = w_{n-1-k}` hold exactly.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j {
            (j as f64 / 2.0).sqrt()
        } else if j + 1 == i {
            (i as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            (
                eig.eigenvalues[k],
                std::f64::consts::PI.sqrt() * eig.eigenvectors[(0, k)].powi(2),
            )
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n.div_ceil(2) {
        let (a, b) = (pairs[k], pairs[n - 1 - k]);
        let node = 0.5 * (b.0 - a.0);
        let weight = 0.5 * (a.1 + b.1);
        x[k] = -node;
        x[n - 1 - k] = node;
        w[k] = weight;
        w[n - 1 - k] = weight;
    }
    (x, w)
}

/// Largest error of the rule on the Gaussian's characteristic function,
/// `|Σ w_k cos(ω x_k)/√π - e^{-ω²/4}|`, over `ω ∈ [0, omega_max]`.
pub(crate) fn gauss_hermite_error(x: &[f64], w: &[f64], omega_max: f64) -> f64 {
    let samples = 400;
    let sqrt_pi = std::f64::consts::PI.sqrt();
    (0..=samples)
        .map(|k| {
            let om = omega_max * k as f64 / samples as f64;
            let q: f64 = x
                .iter()
                .zip(w)
                .map(|(xi, wi)| wi * (om * xi).cos())
                .sum::<f64>()
                / sqrt_pi;
            (q - (-om * om / 4.0).exp()).abs()
        })
        .fold(0.0, f64::max)
}
