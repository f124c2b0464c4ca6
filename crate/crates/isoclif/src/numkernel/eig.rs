use crate::error::{Error, Result};
use crate::numkernel::Matrix;
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymEig<T> {
    /// Ascending.
    pub values: Vec<T>,
    /// Column `j` is the unit eigenvector for `values[j]`.
    pub vectors: Matrix<T>,
}

impl<T: Real> SymEig<T> {
    pub fn vector(&self, j: usize) -> Vec<T> {
        self.vectors.col(j)
    }
}

/// Cyclic Jacobi eigen-solver.
///
/// Eigenvalues come back ascending; each eigenvector has its first
/// non-negligible component positive.
pub fn sym_eig<T: Real>(a: &Matrix<T>) -> Result<SymEig<T>> {
    if !a.is_square() {
        return Err(Error::Precondition(format!("sym_eig needs a square matrix, got {:?}", a.shape())));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("sym_eig input".into()));
    }
    let scale = a.max_abs();
    let sym_tol = T::lit(1e-10).max(T::epsilon() * T::lit(100.0)) * (T::one() + scale);
    let asym = a.asymmetry();
    if asym > sym_tol {
        return Err(Error::Precondition(format!(
            "sym_eig needs a symmetric matrix (asymmetry {:e})",
            asym.to_f64_lossy()
        )));
    }
    let n = a.rows();
    let mut m = a.symmetrize();
    // rows of `vt` are the eigenvectors, kept row-major for contiguous updates
    let mut vt = Matrix::<T>::identity(n);
    let total = m.frobenius();
    let tol = T::jacobi_tol() * total;

    let off = |m: &Matrix<T>| {
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)] * m[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    let mut residual = off(&m);
    while residual > tol {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                iterations: sweeps,
                residual: residual.to_f64_lossy(),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                if apq.abs() <= T::epsilon() * T::lit(0.01) * (app.abs() + aqq.abs()) {
                    m[(p, q)] = T::zero();
                    m[(q, p)] = T::zero();
                    continue;
                }
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                rotate(&mut m, p, q, c, s);
                rotate_rows(&mut vt, p, q, c, s);
            }
        }
        residual = off(&m);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).expect("finite eigenvalues"));
    let values: Vec<T> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    let sign_floor = T::lit(1e-8).max(T::epsilon().sqrt());
    for (col, &i) in order.iter().enumerate() {
        let v = vt.row(i);
        let lead = v.iter().find(|x| x.abs() > sign_floor).copied().unwrap_or(T::one());
        let sgn = if lead < T::zero() { -T::one() } else { T::one() };
        for (r, &x) in v.iter().enumerate() {
            vectors[(r, col)] = sgn * x;
        }
    }
    Ok(SymEig { values, vectors })
}

/// Two-sided rotation `Jᵀ M J` in the (p, q) plane.
fn rotate<T: Real>(m: &mut Matrix<T>, p: usize, q: usize, c: T, s: T) {
    let n = m.rows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    rotate_rows(m, p, q, c, s);
}

fn rotate_rows<T: Real>(m: &mut Matrix<T>, p: usize, q: usize, c: T, s: T) {
    let n = m.cols();
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
}

/// Singular values, descending, from the eigenvalues of `AᵀA` (or `AAᵀ`,
/// whichever is smaller).
pub fn singular_values<T: Real>(a: &Matrix<T>) -> Result<Vec<T>> {
    let gram = if a.rows() < a.cols() { a.matmul(&a.transpose()) } else { a.transpose().matmul(a) };
    let eig = sym_eig(&gram)?;
    let mut s: Vec<T> = eig.values.iter().map(|&l| l.max(T::zero()).sqrt()).collect();
    s.reverse();
    Ok(s)
}

/// Symmetric function of a symmetric matrix, `V f(Λ) Vᵀ`.
pub fn sym_fn<T: Real>(a: &Matrix<T>, f: impl Fn(T) -> T) -> Result<Matrix<T>> {
    let eig = sym_eig(a)?;
    let n = a.rows();
    let fv: Vec<T> = eig.values.iter().map(|&l| f(l)).collect();
    Ok(Matrix::from_fn(n, n, |i, j| {
        (0..n).map(|k| eig.vectors[(i, k)] * fv[k] * eig.vectors[(j, k)]).sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input() {
        let e = sym_eig(&Matrix::diag(&[2.0, 1.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0]);
        assert_eq!(e.vector(0), vec![0.0, 1.0]);
        assert_eq!(e.vector(1), vec![1.0, 0.0]);
    }

    #[test]
    fn swap_matrix() {
        let a = Matrix::from_rows(&[vec![0.0f64, 1.0], vec![1.0, 0.0]]);
        let e = sym_eig(&a).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        let r = 0.5f64.sqrt();
        let v0 = e.vector(0);
        assert!((v0[0] - r).abs() < 1e-14 && (v0[1] + r).abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric_and_rectangular() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert!(matches!(sym_eig(&a), Err(Error::Precondition(_))));
        assert!(matches!(sym_eig(&Matrix::<f64>::zeros(2, 3)), Err(Error::Precondition(_))));
    }

    #[test]
    fn works_in_single_precision() {
        let a = Matrix::from_rows(&[vec![2.0f32, 1.0], vec![1.0, 2.0]]);
        let e = sym_eig(&a).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-6 && (e.values[1] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn singular_values_of_rank_one() {
        let a = Matrix::from_rows(&[vec![3.0f64, 4.0], vec![0.0, 0.0]]);
        let s = singular_values(&a).unwrap();
        assert!((s[0] - 5.0).abs() < 1e-12 && s[1].abs() < 1e-7);
    }
}
