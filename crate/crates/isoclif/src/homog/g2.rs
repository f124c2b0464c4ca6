//! `𝔤₂ ⊂ so(7)` as the stabilizer of the associative 3-form.

use crate::error::{pre, Error, Result};
use crate::numkernel::linalg::kernel_rref;
use crate::numkernel::Matrix;
use crate::DenseMatrix;

/// `e123 + e145 + e167 + e246 − e257 − e347 − e356`, zero-based.
pub fn associative_form() -> [([usize; 3], f64); 7] {
    [
        ([0, 1, 2], 1.0),
        ([0, 3, 4], 1.0),
        ([0, 5, 6], 1.0),
        ([1, 3, 5], 1.0),
        ([1, 4, 6], -1.0),
        ([2, 3, 6], -1.0),
        ([2, 4, 5], -1.0),
    ]
}

fn form_tensor() -> Vec<f64> {
    let mut t = vec![0.0; 343];
    let idx = |i: usize, j: usize, k: usize| 49 * i + 7 * j + k;
    for ([a, b, c], s) in associative_form() {
        for (p, sign) in [([a, b, c], 1.0), ([b, c, a], 1.0), ([c, a, b], 1.0), ([b, a, c], -1.0), ([a, c, b], -1.0), ([c, b, a], -1.0)] {
            t[idx(p[0], p[1], p[2])] = s * sign;
        }
    }
    t
}

/// Basis of the annihilator of the associative form in `so(7)`, embedded in
/// the upper-left corner of `so(n)`, `n ≥ 7`. Has 14 elements.
pub fn g2_basis(n: usize) -> Result<Vec<DenseMatrix>> {
    pre(n >= 7, || format!("g2 needs n >= 7, got {n}"))?;
    let phi = form_tensor();
    let at = |i: usize, j: usize, k: usize| phi[49 * i + 7 * j + k];
    let pairs: Vec<(usize, usize)> = (0..7).flat_map(|a| (a + 1..7).map(move |b| (a, b))).collect();
    let triples: Vec<[usize; 3]> =
        (0..7).flat_map(|i| (i + 1..7).flat_map(move |j| (j + 1..7).map(move |k| [i, j, k]))).collect();
    // (X·φ)_{ijk} = Σ_l X_{li} φ_{ljk} + X_{lj} φ_{ilk} + X_{lk} φ_{ijl}
    let sys = Matrix::from_fn(triples.len(), pairs.len(), |r, c| {
        let [i, j, k] = triples[r];
        let (a, b) = pairs[c];
        let x = |l: usize, m: usize| {
            if (l, m) == (a, b) {
                1.0
            } else if (l, m) == (b, a) {
                -1.0
            } else {
                0.0
            }
        };
        (0..7).map(|l| x(l, i) * at(l, j, k) + x(l, j) * at(i, l, k) + x(l, k) * at(i, j, l)).sum()
    });
    let ker = kernel_rref(&sys, 1e-12);
    if ker.len() != 14 {
        return Err(Error::Construction(format!("stabilizer of the 3-form has dimension {}", ker.len())));
    }
    Ok(ker
        .iter()
        .map(|v| {
            let mut m = Matrix::zeros(n, n);
            for (&(a, b), &c) in pairs.iter().zip(v) {
                m[(a, b)] = c;
                m[(b, a)] = -c;
            }
            m
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homog::{bracket, orthonormal_mats, projection_defect};

    #[test]
    fn fourteen_dimensional_subalgebra() {
        let g = orthonormal_mats(&g2_basis(7).unwrap(), 1e-12);
        assert_eq!(g.len(), 14);
        for a in &g {
            for b in &g {
                assert!(projection_defect(&bracket(a, b), &g) < 1e-12);
            }
        }
    }
}
