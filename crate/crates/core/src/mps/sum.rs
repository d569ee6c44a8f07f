use num_complex::Complex64 as C64;

use super::{MatrixProductState, MpsError, MpsResult, SiteTensor};

/// `Σ_k w_k |ψ_k⟩` as a single MPS with block-diagonal bonds.
///
/// Each interior bond dimension of the result is the sum of the terms' bond
/// dimensions there; the boundary bonds stay 1. No compression is done.
/// Scale factors are pulled out relative to the largest `log_norm` so very
/// different magnitudes can be mixed.
pub fn add_states(terms: &[(C64, &MatrixProductState)]) -> MpsResult<MatrixProductState> {
    let (_, first) = terms.first().ok_or(MpsError::EmptySum)?;
    let n = first.n_sites();
    let d = first.phys_dim();
    for (_, s) in terms {
        if s.n_sites() != n || s.phys_dim() != d {
            return Err(MpsError::Shape(
                "all terms of a sum must share N and D".into(),
            ));
        }
    }
    let ref_log = terms
        .iter()
        .map(|(_, s)| s.log_norm())
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<C64> = terms
        .iter()
        .map(|(w, s)| w * (s.log_norm() - ref_log).exp())
        .collect();

    if n == 1 {
        let t = SiteTensor::from_fn(1, d, 1, |_, p, _| {
            terms
                .iter()
                .zip(&weights)
                .map(|((_, s), w)| w * s.tensors()[0].get(0, p, 0))
                .sum()
        });
        return Ok(MatrixProductState::from_parts(vec![t], Some(0), ref_log));
    }

    let mut tensors = Vec::with_capacity(n);
    for site in 0..n {
        let first_site = site == 0;
        let last_site = site + 1 == n;
        let left: usize = if first_site {
            1
        } else {
            terms.iter().map(|(_, s)| s.tensors()[site].left()).sum()
        };
        let right: usize = if last_site {
            1
        } else {
            terms.iter().map(|(_, s)| s.tensors()[site].right()).sum()
        };
        let mut t = SiteTensor::zeros(left, d, right);
        let (mut l_off, mut r_off) = (0, 0);
        for ((_, s), w) in terms.iter().zip(&weights) {
            let src = &s.tensors()[site];
            // the weight rides on the first site of each term
            let f = if first_site { *w } else { C64::new(1.0, 0.0) };
            for l in 0..src.left() {
                for p in 0..d {
                    for r in 0..src.right() {
                        let (ll, rr) = (
                            if first_site { 0 } else { l_off + l },
                            if last_site { 0 } else { r_off + r },
                        );
                        *t.get_mut(ll, p, rr) += f * src.get(l, p, r);
                    }
                }
            }
            if !first_site {
                l_off += src.left();
            }
            if !last_site {
                r_off += src.right();
            }
        }
        tensors.push(t);
    }
    Ok(MatrixProductState::from_parts(tensors, None, ref_log))
}
