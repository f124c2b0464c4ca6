//! Isotypic decomposition of an orthogonal Lie algebra representation by its
//! commutant, and the Schur-type test for invariant complex structures.

use serde::{Deserialize, Serialize};

use super::{ad_matrix, bracket, orthonormal_mats, projection_defect};
use crate::error::{pre, Error, Result};
use crate::numkernel::eig::{sym_eig, sym_fn};
use crate::numkernel::linalg::kernel_rref;
use crate::numkernel::Matrix;
use crate::rng::{gaussian_vec, stream};
use crate::DenseMatrix;

const INVARIANCE_TOL: f64 = 1e-9;
const SPLIT: f64 = 1e-6;
const RANK_TOL: f64 = 1e-8;
const WITNESS_TOL: f64 = 1e-10;
const RESEEDS: u64 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DivisionType {
    Real,
    Complex,
    Quaternionic,
}

impl DivisionType {
    /// Dimension of the commutant of one irreducible summand.
    pub fn dim(self) -> usize {
        match self {
            DivisionType::Real => 1,
            DivisionType::Complex => 2,
            DivisionType::Quaternionic => 4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IsotypicComponent {
    /// Orthonormal basis of the component inside the module.
    pub basis: Vec<DenseMatrix>,
    /// Same, as columns of module coordinates.
    pub coords: DenseMatrix,
    pub multiplicity: usize,
    pub irreducible_dim: usize,
    pub division: DivisionType,
}

impl IsotypicComponent {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn admits_complex_structure(&self) -> bool {
        self.division != DivisionType::Real || self.multiplicity.is_multiple_of(2)
    }
}

#[derive(Clone, Debug)]
pub struct IsotypicDecomposition {
    /// Orthonormal basis of the module.
    pub module: Vec<DenseMatrix>,
    /// Action of each algebra basis element in module coordinates.
    pub rho: Vec<DenseMatrix>,
    /// Orthonormal basis of the commutant, in module coordinates.
    pub commutant: Vec<DenseMatrix>,
    /// Sorted by irreducible dimension, largest first.
    pub components: Vec<IsotypicComponent>,
    /// Smallest gap between the eigenvalues that separate components.
    pub eigen_gap: f64,
    pub seed: u64,
}

impl IsotypicDecomposition {
    pub fn dim(&self) -> usize {
        self.module.len()
    }

    /// Dimensions of the irreducible summands, with repetition.
    pub fn summand_dims(&self) -> Vec<usize> {
        self.components.iter().flat_map(|c| std::iter::repeat_n(c.irreducible_dim, c.multiplicity)).collect()
    }
}

/// Orthonormal basis of `{T : ρ_b(X) T = T ρ_a(X) for all X}`, each `T` a
/// `dim_b × dim_a` matrix.
///
/// The linear system is sparse; it is folded into its normal matrix row by
/// row and the kernel taken by full-pivot elimination.
pub fn equivariant_maps(rho_a: &[DenseMatrix], rho_b: &[DenseMatrix]) -> Vec<DenseMatrix> {
    assert_eq!(rho_a.len(), rho_b.len(), "one action matrix per generator on each side");
    let da = rho_a.first().map_or(0, Matrix::rows);
    let db = rho_b.first().map_or(0, Matrix::rows);
    if rho_a.is_empty() {
        return Vec::new();
    }
    let n = da * db;
    let mut gram = Matrix::zeros(n, n);
    let mut row: Vec<(usize, f64)> = Vec::new();
    for (ra, rb) in rho_a.iter().zip(rho_b) {
        for r in 0..db {
            for c in 0..da {
                row.clear();
                for s in 0..db {
                    let v = rb[(r, s)];
                    if v != 0.0 {
                        row.push((s * da + c, v));
                    }
                }
                for s in 0..da {
                    let v = ra[(s, c)];
                    if v != 0.0 {
                        row.push((r * da + s, -v));
                    }
                }
                for &(u, cu) in &row {
                    for &(v, cv) in &row {
                        gram[(u, v)] += cu * cv;
                    }
                }
            }
        }
    }
    kernel_rref(&gram, 1e-9).into_iter().map(|v| Matrix::from_vec(db, da, v)).collect()
}

/// Action matrices of `algebra` on the span of `module`, after checking the
/// span is invariant.
fn action(algebra: &[DenseMatrix], module: &[DenseMatrix]) -> Result<Vec<DenseMatrix>> {
    for x in algebra {
        for m in module {
            let d = projection_defect(&bracket(x, m), module);
            pre(d <= INVARIANCE_TOL, || format!("module is not invariant (defect {d:e})"))?;
        }
    }
    Ok(algebra.iter().map(|x| ad_matrix(x, module, module)).collect())
}

fn span_dim(mats: &[DenseMatrix]) -> usize {
    orthonormal_mats(mats, RANK_TOL).len()
}

/// Kernel of `Z ↦ ([Z, C_j])_j` on the span of the commutant.
fn center(commutant: &[DenseMatrix]) -> Result<Vec<DenseMatrix>> {
    let nc = commutant.len();
    let brackets: Vec<Vec<DenseMatrix>> =
        commutant.iter().map(|a| commutant.iter().map(|c| bracket(a, c)).collect()).collect();
    let gram = Matrix::from_fn(nc, nc, |a, b| brackets[a].iter().zip(&brackets[b]).map(|(x, y)| x.frob_dot(y)).sum());
    let eig = sym_eig(&gram)?;
    let cut = 1e-9 * eig.values.last().copied().unwrap_or(0.0).max(1.0);
    Ok((0..nc)
        .filter(|&j| eig.values[j] <= cut)
        .map(|j| {
            let c = eig.vector(j);
            commutant.iter().zip(&c).fold(Matrix::zeros(commutant[0].rows(), commutant[0].cols()), |acc, (m, &x)| {
                &acc + &m.scale(x)
            })
        })
        .collect())
}

fn isqrt_exact(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

/// Division type and multiplicity from the dimensions of the commutant, its
/// center and its symmetric part restricted to one isotypic component.
fn classify_component(c: usize, z: usize, s: usize) -> Result<(DivisionType, usize)> {
    let found = match z {
        2 => isqrt_exact(c / 2).filter(|&m| 2 * m * m == c && s == m * m).map(|m| (DivisionType::Complex, m)),
        1 => isqrt_exact(c)
            .filter(|&m| s == m * (m + 1) / 2)
            .map(|m| (DivisionType::Real, m))
            .or_else(|| isqrt_exact(c / 4).filter(|&m| 4 * m * m == c && s == m * (2 * m - 1)).map(|m| (DivisionType::Quaternionic, m))),
        _ => None,
    };
    found.ok_or_else(|| {
        Error::Classification(format!("commutant dimensions (algebra {c}, center {z}, symmetric {s}) fit no division type"))
    })
}

/// Splits `module` under the action of `algebra` into isotypic components,
/// the eigenspaces of a random symmetric central element of the commutant.
pub fn isotypic_decomposition(module: &[DenseMatrix], algebra: &[DenseMatrix], seed: u64) -> Result<IsotypicDecomposition> {
    let module = orthonormal_mats(module, 1e-10);
    let d = module.len();
    pre(d > 0, || "empty module".to_string())?;
    let rho = action(algebra, &module)?;
    let commutant = if rho.is_empty() {
        (0..d * d).map(|i| Matrix::from_fn(d, d, |r, c| if r * d + c == i { 1.0 } else { 0.0 })).collect()
    } else {
        equivariant_maps(&rho, &rho)
    };
    let center = center(&commutant)?;
    let sym_center = orthonormal_mats(&center.iter().map(Matrix::symmetrize).collect::<Vec<_>>(), RANK_TOL);
    let n_components = sym_center.len();
    pre(n_components > 0, || "commutant has no symmetric central element".to_string())?;

    let mut split = None;
    for attempt in 0..RESEEDS {
        let mut rng = stream(seed, attempt);
        let g = gaussian_vec(&mut rng, n_components);
        let s = sym_center.iter().zip(&g).fold(Matrix::zeros(d, d), |acc, (m, &x)| &acc + &m.scale(x));
        let eig = sym_eig(&s)?;
        let mut groups: Vec<Vec<usize>> = vec![vec![0]];
        let mut gap = f64::INFINITY;
        for j in 1..d {
            let step = eig.values[j] - eig.values[j - 1];
            if step > SPLIT {
                gap = gap.min(step);
                groups.push(Vec::new());
            }
            groups.last_mut().expect("non-empty").push(j);
        }
        if groups.len() == n_components {
            split = Some((eig, groups, gap));
            break;
        }
    }
    let (eig, groups, eigen_gap) = split.ok_or_else(|| {
        Error::Classification(format!("central element failed to separate {n_components} components after {RESEEDS} seeds"))
    })?;

    let mut components = Vec::with_capacity(groups.len());
    for g in groups {
        let cols: Vec<Vec<f64>> = g.iter().map(|&j| eig.vector(j)).collect();
        let v = Matrix::from_cols(d, &cols);
        let restrict = |m: &DenseMatrix| v.transpose().matmul(&m.matmul(&v));
        let sub: Vec<DenseMatrix> = commutant.iter().map(restrict).collect();
        let c = span_dim(&sub);
        let z = span_dim(&center.iter().map(restrict).collect::<Vec<_>>());
        let s = span_dim(&sub.iter().map(Matrix::symmetrize).collect::<Vec<_>>());
        let (division, multiplicity) = classify_component(c, z, s)?;
        let di = cols.len();
        if !di.is_multiple_of(multiplicity) {
            return Err(Error::Classification(format!("component of dimension {di} with multiplicity {multiplicity}")));
        }
        let basis = cols.iter().map(|c| super::from_coords(c, &module)).collect();
        components.push(IsotypicComponent { basis, coords: v, multiplicity, irreducible_dim: di / multiplicity, division });
    }
    components.sort_by(|a, b| b.irreducible_dim.cmp(&a.irreducible_dim).then(b.multiplicity.cmp(&a.multiplicity)));
    Ok(IsotypicDecomposition { module, rho, commutant, components, eigen_gap, seed })
}

/// Outcome of the search for an invariant `I` with `I² = −Id`.
#[derive(Clone, Debug)]
pub struct AcsExistence {
    pub exists: bool,
    /// Indices of components that forbid a structure: real type with odd
    /// multiplicity.
    pub obstructions: Vec<usize>,
    /// In module coordinates.
    pub witness: Option<DenseMatrix>,
    pub square_residual: f64,
    pub equivariance_residual: f64,
}

/// Decides existence component by component; when it exists, builds a
/// witness as the orthogonal polar factor of a random skew commutant element.
pub fn invariant_acs_exists(dec: &IsotypicDecomposition, seed: u64) -> Result<AcsExistence> {
    let obstructions: Vec<usize> =
        dec.components.iter().enumerate().filter(|(_, c)| !c.admits_complex_structure()).map(|(i, _)| i).collect();
    if !obstructions.is_empty() {
        return Ok(AcsExistence {
            exists: false,
            obstructions,
            witness: None,
            square_residual: f64::NAN,
            equivariance_residual: f64::NAN,
        });
    }
    let d = dec.dim();
    let skews: Vec<DenseMatrix> = dec.commutant.iter().map(|c| (c - &c.transpose()).scale(0.5)).collect();
    for attempt in 0..RESEEDS {
        let mut rng = stream(seed, attempt);
        let g = gaussian_vec(&mut rng, skews.len());
        let a = skews.iter().zip(&g).fold(Matrix::zeros(d, d), |acc, (m, &x)| &acc + &m.scale(x));
        let s = a.transpose().matmul(&a).symmetrize();
        let lam = sym_eig(&s)?.values;
        let (lo, hi) = (lam[0], lam[d - 1]);
        if hi <= 0.0 || lo <= 1e-6 * hi {
            continue;
        }
        let i = a.matmul(&sym_fn(&s, |x| 1.0 / x.sqrt())?);
        let square_residual = (&i.matmul(&i) + &Matrix::identity(d)).max_abs();
        let equivariance_residual =
            dec.rho.iter().map(|r| i.commutator(r).max_abs()).fold(0.0, f64::max);
        if square_residual <= WITNESS_TOL && equivariance_residual <= WITNESS_TOL {
            return Ok(AcsExistence {
                exists: true,
                obstructions,
                witness: Some(i),
                square_residual,
                equivariance_residual,
            });
        }
    }
    Err(Error::Classification(format!("no invertible skew commutant element found after {RESEEDS} seeds")))
}

/// `Hom_𝔥(A, B)` for `𝔥`-invariant subspaces `A`, `B`; maps are written in
/// orthonormal bases of `A` and `B` (those returned by Gram–Schmidt on the
/// inputs).
pub fn intertwiner_space(algebra: &[DenseMatrix], a: &[DenseMatrix], b: &[DenseMatrix]) -> Result<Vec<DenseMatrix>> {
    let a = orthonormal_mats(a, 1e-10);
    let b = orthonormal_mats(b, 1e-10);
    pre(!a.is_empty() && !b.is_empty(), || "intertwiners between empty modules".to_string())?;
    let ra = action(algebra, &a)?;
    let rb = action(algebra, &b)?;
    if ra.is_empty() {
        return Ok((0..a.len() * b.len())
            .map(|i| Matrix::from_fn(b.len(), a.len(), |r, c| if r * a.len() + c == i { 1.0 } else { 0.0 }))
            .collect());
    }
    Ok(equivariant_maps(&ra, &rb))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn so3() -> Vec<DenseMatrix> {
        let mut out = Vec::new();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let mut m = Matrix::zeros(3, 3);
            m[(i, j)] = 1.0;
            m[(j, i)] = -1.0;
            out.push(m);
        }
        out
    }

    #[test]
    fn commutant_of_so3_on_two_copies() {
        let rho: Vec<DenseMatrix> = so3().iter().map(|m| Matrix::block_diag(&[m.clone(), m.clone()])).collect();
        let c = equivariant_maps(&rho, &rho);
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn component_classification() {
        assert_eq!(classify_component(1, 1, 1).unwrap(), (DivisionType::Real, 1));
        assert_eq!(classify_component(4, 1, 3).unwrap(), (DivisionType::Real, 2));
        assert_eq!(classify_component(4, 1, 1).unwrap(), (DivisionType::Quaternionic, 1));
        assert_eq!(classify_component(2, 2, 1).unwrap(), (DivisionType::Complex, 1));
        assert_eq!(classify_component(8, 2, 4).unwrap(), (DivisionType::Complex, 2));
        assert!(classify_component(3, 1, 2).is_err());
    }
}
