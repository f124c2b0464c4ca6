//! Restricted root decomposition of a rank-two symmetric pair with respect to
//! a generic `H ∈ 𝔞`.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ad_matrix, bracket, from_coords, projection_defect, SymmetricPair};
use crate::error::{pre, Error, Result};
use crate::numkernel::eig::sym_eig;
use crate::numkernel::subspace::null_space;
use crate::numkernel::Matrix;
use crate::DenseMatrix;

const ZERO_EIG: f64 = 1e-8;
const MATCH_TOL: f64 = 1e-7;
const EIGEN_TOL: f64 = 1e-9;
const BRACKET_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RootLabel {
    A1,
    A2,
    TwoA1,
    TwoA2,
    A1PlusA2,
    A1MinusA2,
}

impl RootLabel {
    pub const ALL: [RootLabel; 6] =
        [RootLabel::A1, RootLabel::A2, RootLabel::TwoA1, RootLabel::TwoA2, RootLabel::A1PlusA2, RootLabel::A1MinusA2];

    /// Roots whose half is not a root.
    pub const REDUCED: [RootLabel; 4] = [RootLabel::A1, RootLabel::A2, RootLabel::A1PlusA2, RootLabel::A1MinusA2];

    /// `(c₁, c₂)` with `α = c₁α₁ + c₂α₂`.
    pub fn coeffs(self) -> (f64, f64) {
        match self {
            RootLabel::A1 => (1.0, 0.0),
            RootLabel::A2 => (0.0, 1.0),
            RootLabel::TwoA1 => (2.0, 0.0),
            RootLabel::TwoA2 => (0.0, 2.0),
            RootLabel::A1PlusA2 => (1.0, 1.0),
            RootLabel::A1MinusA2 => (1.0, -1.0),
        }
    }

    /// Label of `±(c₁α₁ + c₂α₂)`, if any.
    pub fn from_coeffs(c1: f64, c2: f64) -> Option<Self> {
        Self::ALL.into_iter().find(|l| {
            let (a, b) = l.coeffs();
            (a == c1 && b == c2) || (a == -c1 && b == -c2)
        })
    }

    pub fn eval(self, xi1: f64, xi2: f64) -> f64 {
        let (a, b) = self.coeffs();
        a * xi1 + b * xi2
    }

    pub fn double(self) -> Option<Self> {
        match self {
            RootLabel::A1 => Some(RootLabel::TwoA1),
            RootLabel::A2 => Some(RootLabel::TwoA2),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RootLabel::A1 => "a1",
            RootLabel::A2 => "a2",
            RootLabel::TwoA1 => "2a1",
            RootLabel::TwoA2 => "2a2",
            RootLabel::A1PlusA2 => "a1+a2",
            RootLabel::A1MinusA2 => "a1-a2",
        }
    }
}

impl fmt::Display for RootLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct RootCluster {
    pub label: RootLabel,
    /// `α(H)²`.
    pub alpha_sq: f64,
    /// Orthonormal, possibly empty.
    pub k_alpha: Vec<DenseMatrix>,
    pub p_alpha: Vec<DenseMatrix>,
}

#[derive(Clone, Debug)]
pub struct RootDecomposition {
    pub xi: (f64, f64),
    pub h: DenseMatrix,
    /// Unit vectors along `H(1,0)` and `H(0,1)`.
    pub a_basis: [DenseMatrix; 2],
    /// Norms of `H(1,0)` and `H(0,1)`.
    pub a_scale: [f64; 2],
    /// Centralizer of `𝔞` in `𝔨`, orthonormal.
    pub k0: Vec<DenseMatrix>,
    /// One per label, in `RootLabel::ALL` order.
    pub clusters: Vec<RootCluster>,
    /// Worst `‖(ad H)²X + α(H)²X‖` over the root vectors.
    pub eigen_residual: f64,
    /// Worst relative distance of `[𝔞, 𝔨_α]` from `𝔭_α`.
    pub bracket_defect: f64,
}

impl RootDecomposition {
    pub fn cluster(&self, label: RootLabel) -> &RootCluster {
        &self.clusters[RootLabel::ALL.iter().position(|&l| l == label).expect("every label")]
    }

    /// `dim 𝔨_α` in `RootLabel::ALL` order.
    pub fn dims(&self) -> [usize; 6] {
        let mut d = [0; 6];
        for (slot, c) in d.iter_mut().zip(&self.clusters) {
            *slot = c.k_alpha.len();
        }
        d
    }

    /// `𝔪 = ⊕ 𝔨_α`, the orthogonal complement of `𝔨₀` in `𝔨`.
    pub fn m_basis(&self) -> Vec<DenseMatrix> {
        self.clusters.iter().flat_map(|c| c.k_alpha.iter().cloned()).collect()
    }

    /// `(b₁, b₂)` with `B = H(b₁, b₂)`.
    pub fn a_coords(&self, b: &DenseMatrix) -> (f64, f64) {
        (self.a_basis[0].frob_dot(b) / self.a_scale[0], self.a_basis[1].frob_dot(b) / self.a_scale[1])
    }
}

/// Groups the eigenvectors of a positive semidefinite operator by the
/// predicted `α(H)²`; returns the kernel vectors first.
fn classify(m: &DenseMatrix, preds: &[f64; 6]) -> Result<(Vec<Vec<f64>>, [Vec<Vec<f64>>; 6])> {
    let eig = sym_eig(m)?;
    let mut zero = Vec::new();
    let mut groups: [Vec<Vec<f64>>; 6] = Default::default();
    for (j, &lam) in eig.values.iter().enumerate() {
        if lam.abs() < ZERO_EIG {
            zero.push(eig.vector(j));
            continue;
        }
        let (best, gap) = preds
            .iter()
            .enumerate()
            .map(|(i, &p)| (i, (p - lam).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("six predictions");
        if gap > MATCH_TOL * lam.max(1.0) {
            return Err(Error::Classification(format!("eigenvalue {lam} of -(ad H)^2 matches no root")));
        }
        groups[best].push(eig.vector(j));
    }
    Ok((zero, groups))
}

/// Root spaces `𝔨_α`, `𝔭_α` as eigenspaces of `−(ad H)²` for
/// `H = H(ξ₁, ξ₂)`, and `𝔨₀` as the joint kernel of `ad 𝔞` on `𝔨`.
pub fn root_decomposition(pair: &SymmetricPair, xi: (f64, f64)) -> Result<RootDecomposition> {
    let (h, h1, h2) = match (pair.cartan_element(xi.0, xi.1), pair.cartan_element(1.0, 0.0), pair.cartan_element(0.0, 1.0)) {
        (Some(h), Some(a), Some(b)) => (h, a, b),
        _ => return Err(Error::Precondition(format!("pair {} has no restricted roots", pair.id))),
    };
    let preds: [f64; 6] = RootLabel::ALL.map(|l| l.eval(xi.0, xi.1).powi(2));
    for (i, &p) in preds.iter().enumerate() {
        pre(p > 1e-6, || format!("H({}, {}) is singular: a root vanishes", xi.0, xi.1))?;
        for &q in &preds[i + 1..] {
            pre((p - q).abs() > 1e-6, || format!("H({}, {}) is not generic: roots collide", xi.0, xi.1))?;
        }
    }
    let a_scale = [h1.frobenius(), h2.frobenius()];
    let a_basis = [h1.scale(1.0 / a_scale[0]), h2.scale(1.0 / a_scale[1])];
    let (kb, pb) = (&pair.k_basis, &pair.p_basis);

    let ad = ad_matrix(&h, kb, pb);
    let (k_zero, k_groups) = classify(&ad.transpose().matmul(&ad), &preds)?;
    let (p_zero, p_groups) = classify(&ad.matmul(&ad.transpose()), &preds)?;
    if p_zero.len() != 2 {
        return Err(Error::Classification(format!("centralizer of H in p has dimension {}", p_zero.len())));
    }

    let stacked = Matrix::block(&[vec![ad_matrix(&a_basis[0], kb, pb)], vec![ad_matrix(&a_basis[1], kb, pb)]]);
    let k0_coords = null_space(&stacked, 1e-9)?;
    if k0_coords.dim() != k_zero.len() {
        return Err(Error::Classification(format!(
            "centralizer of a has dimension {} but ad H has {} zero modes on k",
            k0_coords.dim(),
            k_zero.len()
        )));
    }
    let k0: Vec<DenseMatrix> = k0_coords.basis().iter().map(|c| from_coords(c, kb)).collect();

    let mut clusters = Vec::with_capacity(6);
    let mut eigen_residual: f64 = 0.0;
    let mut bracket_defect: f64 = 0.0;
    for ((label, kv), pv) in RootLabel::ALL.into_iter().zip(k_groups).zip(p_groups) {
        let alpha_sq = label.eval(xi.0, xi.1).powi(2);
        let k_alpha: Vec<DenseMatrix> = kv.iter().map(|c| from_coords(c, kb)).collect();
        let p_alpha: Vec<DenseMatrix> = pv.iter().map(|c| from_coords(c, pb)).collect();
        if k_alpha.len() != p_alpha.len() {
            return Err(Error::Invariant(format!(
                "root {label}: dim k_alpha = {} but dim p_alpha = {}",
                k_alpha.len(),
                p_alpha.len()
            )));
        }
        for x in k_alpha.iter().chain(&p_alpha) {
            let hh = bracket(&h, &bracket(&h, x));
            eigen_residual = eigen_residual.max((&hh + &x.scale(alpha_sq)).frobenius());
        }
        for x in &k_alpha {
            for a in &a_basis {
                let z = bracket(a, x);
                let nz = z.frobenius();
                if nz > 1e-12 {
                    bracket_defect = bracket_defect.max(projection_defect(&z, &p_alpha) / nz);
                }
            }
        }
        clusters.push(RootCluster { label, alpha_sq, k_alpha, p_alpha });
    }
    if eigen_residual > EIGEN_TOL {
        return Err(Error::Invariant(format!("root vectors fail the eigen-equation by {eigen_residual:e}")));
    }
    if bracket_defect > BRACKET_TOL {
        return Err(Error::Invariant(format!("[a, k_alpha] leaves p_alpha by {bracket_defect:e}")));
    }
    Ok(RootDecomposition { xi, h, a_basis, a_scale, k0, clusters, eigen_residual, bracket_defect })
}

/// Principal curvatures `−α(B)/α(H)` of the orbit through `H`, with
/// multiplicities `m(α) + m(2α)`, for `B ⊥ H` in `𝔞` with `|B| = |H|`.
/// Ascending; roots of total multiplicity zero are omitted.
pub fn principal_curvatures_orbit(rd: &RootDecomposition, b: &DenseMatrix) -> Result<Vec<(f64, usize)>> {
    let hn = rd.h.frobenius();
    let bn = b.frobenius();
    let in_a = projection_defect(b, &rd.a_basis);
    pre(in_a <= 1e-9 * bn.max(1.0), || format!("B is not in a (defect {in_a:e})"))?;
    pre(b.frob_dot(&rd.h).abs() <= 1e-9 * hn * bn, || "B is not orthogonal to H".to_string())?;
    pre((bn - hn).abs() <= 1e-9 * hn, || format!("|B| = {bn} differs from |H| = {hn}"))?;
    let (b1, b2) = rd.a_coords(b);
    let mut out: Vec<(f64, usize)> = RootLabel::REDUCED
        .into_iter()
        .filter_map(|l| {
            let mult = rd.cluster(l).p_alpha.len() + l.double().map_or(0, |d| rd.cluster(d).p_alpha.len());
            (mult > 0).then(|| (-l.eval(b1, b2) / l.eval(rd.xi.0, rd.xi.1), mult))
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homog::{build_pair, PairId};

    fn dims(id: PairId, k: Option<usize>) -> [usize; 6] {
        let p = build_pair(id, k).unwrap();
        root_decomposition(&p, (0.4f64.cos(), 0.4f64.sin())).unwrap().dims()
    }

    #[test]
    fn root_multiplicities() {
        assert_eq!(dims(PairId::So, Some(5)), [3, 3, 0, 0, 1, 1]);
        assert_eq!(dims(PairId::U, Some(5)), [6, 6, 1, 1, 2, 2]);
        assert_eq!(dims(PairId::Sp, Some(3)), [4, 4, 3, 3, 4, 4]);
        assert_eq!(dims(PairId::Sp, Some(2)), [0, 0, 3, 3, 4, 4]);
        assert_eq!(dims(PairId::So10U5, None), [4, 4, 1, 1, 4, 4]);
    }

    #[test]
    fn centralizer_dimensions() {
        let k0 = |id, k| {
            let p = build_pair(id, k).unwrap();
            root_decomposition(&p, (0.4f64.cos(), 0.4f64.sin())).unwrap().k0.len()
        };
        assert_eq!(k0(PairId::So, Some(5)), 3);
        assert_eq!(k0(PairId::So, Some(3)), 0);
        assert_eq!(k0(PairId::U, Some(5)), 2 + 9);
        assert_eq!(k0(PairId::Sp, Some(3)), 9);
        assert_eq!(k0(PairId::So10U5, None), 7);
    }

    #[test]
    fn degenerate_h_is_rejected() {
        let p = build_pair(PairId::So, Some(3)).unwrap();
        assert!(root_decomposition(&p, (1.0, 1.0)).is_err());
        assert!(root_decomposition(&p, (1.0, 0.0)).is_err());
        assert!(root_decomposition(&build_pair(PairId::Spin9G2, None).unwrap(), (0.9, 0.3)).is_err());
    }

    #[test]
    fn orbit_curvatures_need_orthogonal_b() {
        let p = build_pair(PairId::So, Some(3)).unwrap();
        let rd = root_decomposition(&p, (0.3f64.cos(), 0.3f64.sin())).unwrap();
        assert!(principal_curvatures_orbit(&rd, &rd.h).is_err());
        let b = p.cartan_element(0.3f64.sin(), -0.3f64.cos()).unwrap();
        assert_eq!(principal_curvatures_orbit(&rd, &b).unwrap().len(), 4);
    }
}
