use crate::error::{Error, Result};
use crate::numkernel::Matrix;
use crate::scalar::Real;

pub const DEFAULT_STEP: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum FdMode {
    #[default]
    Central,
    /// Central differences at `h` and `h/2` combined as `(4D_{h/2} − D_h)/3`.
    Richardson,
}

/// Central-difference Jacobian; column `j` is `(f(x+he_j) − f(x−he_j))/2h`.
pub fn fd_jacobian<T: Real>(f: impl Fn(&[T]) -> Vec<T>, x: &[T], h: T) -> Result<Matrix<T>> {
    if h <= T::zero() {
        return Err(Error::Precondition("finite-difference step must be positive".into()));
    }
    let n = x.len();
    let mut xp = x.to_vec();
    let mut cols = Vec::with_capacity(n);
    let two_h = h + h;
    for j in 0..n {
        xp[j] = x[j] + h;
        let fp = f(&xp);
        xp[j] = x[j] - h;
        let fm = f(&xp);
        xp[j] = x[j];
        if fp.iter().chain(&fm).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("field evaluation near coordinate {j}")));
        }
        cols.push(fp.iter().zip(&fm).map(|(&a, &b)| (a - b) / two_h).collect::<Vec<T>>());
    }
    let m = cols.first().map_or(0, Vec::len);
    Ok(Matrix::from_cols(m, &cols))
}

pub fn fd_jacobian_mode<T: Real>(
    f: impl Fn(&[T]) -> Vec<T>,
    x: &[T],
    h: T,
    mode: FdMode,
) -> Result<Matrix<T>> {
    match mode {
        FdMode::Central => fd_jacobian(&f, x, h),
        FdMode::Richardson => {
            let coarse = fd_jacobian(&f, x, h)?;
            let fine = fd_jacobian(&f, x, h * T::lit(0.5))?;
            Ok((&fine.scale(T::lit(4.0)) - &coarse).scale(T::one() / T::lit(3.0)))
        }
    }
}

/// Central-difference gradient of a scalar function.
pub fn fd_gradient<T: Real>(f: impl Fn(&[T]) -> T, x: &[T], h: T) -> Result<Vec<T>> {
    Ok(fd_jacobian(|y| vec![f(y)], x, h)?.into_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_field_is_exact() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![-3.0, 0.5], vec![0.0, 4.0]]);
        let j = fd_jacobian(|x| a.matvec(x), &[0.3, -0.7], 1e-5).unwrap();
        assert!(j.max_abs_diff(&a) < 1e-9);
    }

    #[test]
    fn identity_field() {
        let j = fd_jacobian(|x: &[f64]| x.to_vec(), &[1.0, 2.0, 3.0], 1e-5).unwrap();
        assert!(j.max_abs_diff(&Matrix::identity(3)) < 1e-10);
    }

    #[test]
    fn non_finite_is_reported() {
        let r = fd_jacobian(|x: &[f64]| vec![(x[0] - 1e-5).ln()], &[0.0], 1e-5);
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn richardson_beats_central_on_cubic() {
        let f = |x: &[f64]| vec![x[0].powi(3)];
        let exact = 3.0 * 0.7f64.powi(2);
        let c = fd_jacobian_mode(f, &[0.7], 1e-2, FdMode::Central).unwrap()[(0, 0)];
        let r = fd_jacobian_mode(f, &[0.7], 1e-2, FdMode::Richardson).unwrap()[(0, 0)];
        assert!((r - exact).abs() < (c - exact).abs() * 1e-3);
    }
}
