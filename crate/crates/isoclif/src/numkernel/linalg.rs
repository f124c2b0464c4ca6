use crate::error::{Error, Result};
use crate::numkernel::vector::{axpy, dot, norm};
use crate::numkernel::Matrix;
use crate::scalar::Real;

/// Solve `A X = B` by Gaussian elimination with partial pivoting.
pub fn solve<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(Error::Precondition(format!("solve: shapes {:?} and {:?}", a.shape(), b.shape())));
    }
    let n = a.rows();
    let mut m = a.clone();
    let mut x = b.clone();
    let scale = a.max_abs().max(T::min_positive_value());
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m[(i, k)].abs().partial_cmp(&m[(j, k)].abs()).expect("finite"))
            .expect("non-empty");
        if m[(piv, k)].abs() <= T::epsilon() * scale * T::lit(n as f64) {
            return Err(Error::Singular(format!("solve: zero pivot in column {k}")));
        }
        if piv != k {
            swap_rows(&mut m, piv, k);
            swap_rows(&mut x, piv, k);
        }
        let d = m[(k, k)];
        for i in k + 1..n {
            let f = m[(i, k)] / d;
            if f == T::zero() {
                continue;
            }
            for j in k..n {
                let v = m[(k, j)];
                m[(i, j)] -= f * v;
            }
            for j in 0..x.cols() {
                let v = x[(k, j)];
                x[(i, j)] -= f * v;
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..x.cols() {
            let mut s = x[(k, j)];
            for i in k + 1..n {
                s -= m[(k, i)] * x[(i, j)];
            }
            x[(k, j)] = s / m[(k, k)];
        }
    }
    Ok(x)
}

pub fn solve_vec<T: Real>(a: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    Ok(solve(a, &Matrix::from_vec(b.len(), 1, b.to_vec()))?.into_vec())
}

pub fn inverse<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    solve(a, &Matrix::identity(a.rows()))
}

fn swap_rows<T: Real>(m: &mut Matrix<T>, i: usize, j: usize) {
    for c in 0..m.cols() {
        let t = m[(i, c)];
        m[(i, c)] = m[(j, c)];
        m[(j, c)] = t;
    }
}

/// Kernel of `A` by reduced row echelon form with full pivoting; pivots below
/// `tol·max|A|` count as zero. Returned vectors are orthonormal.
///
/// Much cheaper than the spectral route for the large, well-conditioned
/// systems that describe commutants.
pub fn kernel_rref<T: Real>(a: &Matrix<T>, tol: T) -> Vec<Vec<T>> {
    let (rows, cols) = a.shape();
    let mut m = a.clone();
    let cut = tol * a.max_abs().max(T::min_positive_value());
    let mut colperm: Vec<usize> = (0..cols).collect();
    let mut rank = 0;
    while rank < rows.min(cols) {
        let mut best = (rank, rank, T::zero());
        for i in rank..rows {
            for j in rank..cols {
                let v = m[(i, j)].abs();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        if best.2 <= cut {
            break;
        }
        swap_rows(&mut m, rank, best.0);
        if best.1 != rank {
            for r in 0..rows {
                let t = m[(r, rank)];
                m[(r, rank)] = m[(r, best.1)];
                m[(r, best.1)] = t;
            }
            colperm.swap(rank, best.1);
        }
        let d = m[(rank, rank)];
        for j in rank..cols {
            m[(rank, j)] /= d;
        }
        let pivot_row: Vec<T> = m.row(rank).to_vec();
        for i in 0..rows {
            if i == rank {
                continue;
            }
            let f = m[(i, rank)];
            if f != T::zero() {
                let row = m.row_mut(i);
                for j in rank..cols {
                    row[j] -= f * pivot_row[j];
                }
            }
        }
        rank += 1;
    }
    let mut out = Vec::with_capacity(cols - rank);
    for free in rank..cols {
        let mut v = vec![T::zero(); cols];
        v[colperm[free]] = T::one();
        for r in 0..rank {
            v[colperm[r]] = -m[(r, free)];
        }
        out.push(v);
    }
    orthonormalize(&out, T::lit(1e-10))
}

/// Modified Gram–Schmidt with re-orthogonalization; vectors whose residual
/// falls below `tol` times their original norm are dropped.
pub fn orthonormalize<T: Real>(vecs: &[Vec<T>], tol: T) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = Vec::new();
    for v in vecs {
        let n0 = norm(v);
        if n0 == T::zero() {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = dot(q, &w);
                axpy(&mut w, -c, q);
            }
        }
        let n = norm(&w);
        if n > tol * n0 {
            out.push(w.iter().map(|&x| x / n).collect());
        }
    }
    out
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm<T: Real>(a: &Matrix<T>) -> Matrix<T> {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.rows();
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].abs()).sum::<T>())
        .fold(T::zero(), T::max);
    let mut squarings = 0;
    let mut s = T::one();
    while norm1 * s > T::lit(0.5) {
        s *= T::lit(0.5);
        squarings += 1;
    }
    let b = a.scale(s);
    let mut term = Matrix::identity(n);
    let mut acc = Matrix::identity(n);
    for k in 1..=18 {
        term = term.matmul(&b).scale(T::one() / T::lit(k as f64));
        acc = &acc + &term;
    }
    for _ in 0..squarings {
        acc = acc.matmul(&acc);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        let a = Matrix::from_rows(&[vec![0.0f64, 2.0], vec![1.0, 1.0]]);
        let x = solve_vec(&a, &[4.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn singular_solve_is_reported() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(inverse(&a), Err(Error::Singular(_))));
    }

    #[test]
    fn expm_of_rotation_generator() {
        let t = 0.7f64;
        let a = Matrix::from_rows(&[vec![0.0, -t], vec![t, 0.0]]);
        let e = expm(&a);
        assert!((e[(0, 0)] - t.cos()).abs() < 1e-14);
        assert!((e[(1, 0)] - t.sin()).abs() < 1e-14);
    }

    #[test]
    fn rref_kernel_dimension() {
        let a = Matrix::from_rows(&[vec![1.0f64, 1.0, 0.0], vec![2.0, 2.0, 0.0]]);
        let k = kernel_rref(&a, 1e-12);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(a.matvec(v).iter().all(|x| x.abs() < 1e-14));
        }
    }
}
