//! Free functions on `&[T]` vectors.

use crate::scalar::Real;

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn max_abs<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

pub fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn scale<T: Real>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

/// `y += s·x`.
pub fn axpy<T: Real>(y: &mut [T], s: T, x: &[T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

pub fn normalize<T: Real>(a: &[T]) -> Vec<T> {
    let n = norm(a);
    scale(a, T::one() / n)
}

pub fn basis<T: Real>(n: usize, i: usize) -> Vec<T> {
    let mut e = vec![T::zero(); n];
    e[i] = T::one();
    e
}

/// Linear combination `Σ cᵢ vᵢ`.
pub fn combine<T: Real>(coeffs: &[T], vecs: &[Vec<T>]) -> Vec<T> {
    let n = vecs.first().map_or(0, Vec::len);
    let mut out = vec![T::zero(); n];
    for (&c, v) in coeffs.iter().zip(vecs) {
        axpy(&mut out, c, v);
    }
    out
}
