use crate::error::{Error, Result};
use crate::numkernel::eig::sym_eig;
use crate::numkernel::linalg::solve_vec;
use crate::numkernel::vector::{axpy, max_abs};
use crate::numkernel::Matrix;
use crate::scalar::Real;

const RANK_FLOOR: f64 = 1e-10;

/// Gauss–Newton projection onto `{g = 0}` with minimum-norm steps
/// `Δ = −Jᵀ(JJᵀ)⁻¹ g`.
pub fn newton_project<T: Real>(
    g: impl Fn(&[T]) -> Vec<T>,
    jac: impl Fn(&[T]) -> Matrix<T>,
    x0: &[T],
    tol: T,
    max_iter: usize,
) -> Result<Vec<T>> {
    if tol <= T::zero() {
        return Err(Error::Precondition("newton_project tolerance must be positive".into()));
    }
    let mut x = x0.to_vec();
    let mut r = g(&x);
    for _ in 0..max_iter {
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("constraint residual".into()));
        }
        if max_abs(&r) <= tol {
            return Ok(x);
        }
        let j = jac(&x);
        let jjt = j.matmul(&j.transpose());
        let smin = sym_eig(&jjt)?.values[0].max(T::zero()).sqrt();
        if smin < T::lit(RANK_FLOOR) {
            return Err(Error::Singular(format!(
                "constraint Jacobian rank deficient (smallest singular value {:e})",
                smin.to_f64_lossy()
            )));
        }
        let y = solve_vec(&jjt, &r)?;
        let step = j.tr_matvec(&y);
        axpy(&mut x, -T::one(), &step);
        r = g(&x);
    }
    if max_abs(&r) <= tol {
        return Ok(x);
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: max_abs(&r).to_f64_lossy() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> Vec<f64> {
        vec![x.iter().map(|v| v * v).sum::<f64>() - 1.0]
    }

    fn sphere_jac(x: &[f64]) -> Matrix<f64> {
        Matrix::from_vec(1, x.len(), x.iter().map(|v| 2.0 * v).collect())
    }

    #[test]
    fn radial_projection() {
        let x = newton_project(sphere, sphere_jac, &[2.0, 0.0], 1e-14, 50).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && x[1] == 0.0);
    }

    #[test]
    fn satisfied_start_is_returned_unchanged() {
        let x0 = [0.6, 0.8];
        assert_eq!(newton_project(sphere, sphere_jac, &x0, 1e-12, 50).unwrap(), x0.to_vec());
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let r = newton_project(sphere, sphere_jac, &[0.0, 0.0], 1e-12, 50);
        assert!(matches!(r, Err(Error::Singular(_))));
    }

    #[test]
    fn iteration_cap_carries_residual() {
        match newton_project(sphere, sphere_jac, &[10.0, 0.0], 1e-14, 1) {
            Err(Error::NoConvergence { residual, .. }) => assert!(residual > 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
