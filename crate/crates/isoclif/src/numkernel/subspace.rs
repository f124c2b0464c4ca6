use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::eig::{singular_values, sym_eig};
use crate::numkernel::linalg::orthonormalize;
use crate::numkernel::vector::{axpy, dot, norm, sub};
use crate::numkernel::Matrix;
use crate::scalar::Real;

/// Linear subspace of `R^n` held by an orthonormal basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subspace<T> {
    ambient_dim: usize,
    basis: Vec<Vec<T>>,
}

impl<T: Real> Subspace<T> {
    pub fn zero(ambient_dim: usize) -> Self {
        Self { ambient_dim, basis: Vec::new() }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self::from_orthonormal(
            ambient_dim,
            (0..ambient_dim).map(|i| crate::numkernel::vector::basis(ambient_dim, i)).collect(),
        )
    }

    /// Caller guarantees orthonormality.
    pub fn from_orthonormal(ambient_dim: usize, basis: Vec<Vec<T>>) -> Self {
        debug_assert!(basis.iter().all(|v| v.len() == ambient_dim));
        Self { ambient_dim, basis }
    }

    /// Span of arbitrary vectors; directions whose Gram–Schmidt residual is
    /// below `tol` relative to the input vector are discarded.
    pub fn span(ambient_dim: usize, vecs: &[Vec<T>], tol: T) -> Self {
        Self { ambient_dim, basis: orthonormalize(vecs, tol) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<T>] {
        &self.basis
    }

    /// `n × dim` matrix with the basis as columns.
    pub fn matrix(&self) -> Matrix<T> {
        Matrix::from_cols(self.ambient_dim, &self.basis)
    }

    /// Orthogonal projector `Q Qᵀ`.
    pub fn projector(&self) -> Matrix<T> {
        let n = self.ambient_dim;
        let mut p = Matrix::zeros(n, n);
        for q in &self.basis {
            for i in 0..n {
                if q[i] == T::zero() {
                    continue;
                }
                for j in 0..n {
                    p[(i, j)] += q[i] * q[j];
                }
            }
        }
        p
    }

    pub fn project(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.ambient_dim];
        for q in &self.basis {
            axpy(&mut out, dot(q, v), q);
        }
        out
    }

    pub fn coords(&self, v: &[T]) -> Vec<T> {
        self.basis.iter().map(|q| dot(q, v)).collect()
    }

    /// Distance of `v` from the subspace.
    pub fn defect(&self, v: &[T]) -> T {
        norm(&sub(v, &self.project(v)))
    }

    pub fn complement(&self) -> Self {
        let p = self.projector();
        let n = self.ambient_dim;
        let candidates: Vec<Vec<T>> = (0..n)
            .map(|i| {
                let mut e = crate::numkernel::vector::basis(n, i);
                for j in 0..n {
                    e[j] -= p[(j, i)];
                }
                e
            })
            .collect();
        let mut out = Self::span(n, &candidates, T::lit(1e-8));
        out.basis.truncate(n - self.dim());
        out
    }

    /// Orthogonal direct sum of mutually orthogonal pieces.
    pub fn direct_sum(parts: &[&Self]) -> Self {
        let n = parts.first().map_or(0, |p| p.ambient_dim);
        let basis = parts.iter().flat_map(|p| p.basis.iter().cloned()).collect();
        Self { ambient_dim: n, basis }
    }

    /// Image under a linear map, re-orthonormalized.
    pub fn image(&self, a: &Matrix<T>) -> Self {
        let imgs: Vec<Vec<T>> = self.basis.iter().map(|q| a.matvec(q)).collect();
        Self::span(a.rows(), &imgs, T::lit(1e-10))
    }

    /// Gram matrix deviation from the identity.
    pub fn orthonormality_defect(&self) -> T {
        let mut worst = T::zero();
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((dot(a, b) - target).abs());
            }
        }
        worst
    }
}

/// Kernel of `A`: right singular vectors whose singular value is at most
/// `tol` times the largest one.
///
/// Wide matrices go through the row space (eigen-decomposition of `AAᵀ`) and
/// take its complement, which keeps the basis accurate to machine precision.
/// Otherwise the eigenvalues of `AᵀA` are thresholded, with a floor at the
/// rounding level of the squared spectrum.
pub fn null_space<T: Real>(a: &Matrix<T>, tol: T) -> Result<Subspace<T>> {
    if tol <= T::zero() {
        return Err(Error::Precondition("null_space tolerance must be positive".into()));
    }
    let n = a.cols();
    if a.rows() < n {
        let eig = sym_eig(&a.matmul(&a.transpose()))?;
        let smax = eig.values.last().map_or(T::zero(), |&l| l.max(T::zero()).sqrt());
        let rows: Vec<Vec<T>> = (0..a.rows())
            .filter(|&j| eig.values[j].max(T::zero()).sqrt() > tol * smax)
            .map(|j| a.tr_matvec(&eig.vector(j)))
            .collect();
        if rows.is_empty() {
            return Ok(Subspace::full(n));
        }
        return Ok(Subspace::span(n, &rows, T::lit(1e-12)).complement());
    }
    let eig = sym_eig(&a.transpose().matmul(a))?;
    let lmax = eig.values.last().map_or(T::zero(), |&l| l.max(T::zero()));
    let floor = T::lit(100.0 * n as f64) * T::epsilon() * lmax;
    let cut = (tol * tol * lmax).max(floor);
    let basis = (0..n).filter(|&j| eig.values[j] <= cut).map(|j| eig.vector(j)).collect();
    Ok(Subspace::from_orthonormal(n, basis))
}

/// Principal angles between two subspaces, ascending, in `[0, π/2]`.
///
/// Small angles come from sines of the residual `(I − UUᵀ)V`, large ones from
/// cosines of `UᵀV`; each route is accurate where the other is not.
pub fn principal_angles<T: Real>(u: &Subspace<T>, v: &Subspace<T>) -> Result<Vec<T>> {
    if u.ambient_dim() != v.ambient_dim() {
        return Err(Error::Precondition(format!(
            "principal_angles: ambient dimensions {} and {}",
            u.ambient_dim(),
            v.ambient_dim()
        )));
    }
    let (u, v) = if v.dim() > u.dim() { (v, u) } else { (u, v) };
    let q = v.dim();
    if q == 0 {
        return Ok(Vec::new());
    }
    let um = u.matrix();
    let vm = v.matrix();
    let m = um.transpose().matmul(&vm);
    let resid = &vm - &um.matmul(&m);
    let cos2 = sym_eig(&m.transpose().matmul(&m))?.values;
    let mut sin2 = sym_eig(&resid.transpose().matmul(&resid))?.values;
    sin2.reverse();
    let half = T::lit(0.5);
    let mut angles: Vec<T> = cos2
        .iter()
        .zip(&sin2)
        .map(|(&c2, &s2)| {
            if c2 >= half {
                s2.max(T::zero()).min(T::one()).sqrt().asin()
            } else {
                c2.max(T::zero()).min(T::one()).sqrt().acos()
            }
        })
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));
    Ok(angles)
}

/// Rank of `A` with relative singular-value cut `tol`.
pub fn rank<T: Real>(a: &Matrix<T>, tol: T) -> Result<usize> {
    let s = singular_values(a)?;
    let smax = s.first().copied().unwrap_or(T::zero());
    Ok(s.iter().filter(|&&x| x > tol * smax).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn null_space_of_zero_matrix_is_everything() {
        assert_eq!(null_space(&Matrix::<f64>::zeros(3, 3), 1e-10).unwrap().dim(), 3);
    }

    #[test]
    fn null_space_of_row_vector() {
        let s = null_space(&Matrix::from_rows(&[vec![1.0f64, 0.0, 0.0]]), 1e-10).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(s.basis().iter().all(|v| v[0].abs() < 1e-14));
    }

    #[test]
    fn angles_of_coordinate_lines() {
        let a = Subspace::from_orthonormal(2, vec![vec![1.0, 0.0]]);
        let b = Subspace::from_orthonormal(2, vec![vec![0.0, 1.0]]);
        let ang = principal_angles(&a, &b).unwrap();
        assert!((ang[0] - FRAC_PI_2).abs() < 1e-14);
        assert_eq!(principal_angles(&a, &a).unwrap(), vec![0.0]);
    }

    #[test]
    fn ambient_mismatch_is_rejected() {
        let a = Subspace::<f64>::full(2);
        let b = Subspace::<f64>::full(3);
        assert!(principal_angles(&a, &b).is_err());
    }

    #[test]
    fn complement_dimension() {
        let a = Subspace::span(4, &[vec![1.0f64, 1.0, 0.0, 0.0]], 1e-12);
        let c = a.complement();
        assert_eq!(c.dim(), 3);
        assert!(c.basis().iter().all(|v| dot(v, &a.basis()[0]).abs() < 1e-14));
    }
}
