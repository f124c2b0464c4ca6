//! Compact symmetric pairs of rank two, their restricted roots, the isotropy
//! representation of `K₀` on `𝔪 = 𝔨₀^⊥ ⊂ 𝔨`, invariant almost complex
//! structures and the Koszul integrability test. Also the reductive pair
//! `(so(9), 𝔤₂)`.
//!
//! All algebras are realized by real skew matrices with bracket the
//! commutator and inner product `⟨A, B⟩ = −tr(AB)`, which is the Frobenius
//! product on skew matrices.

mod g2;
mod isotypic;
mod koszul;
mod roots;

pub use g2::{associative_form, g2_basis};
pub use isotypic::{
    equivariant_maps, intertwiner_space, invariant_acs_exists, isotypic_decomposition, AcsExistence,
    DivisionType, IsotypicComponent, IsotypicDecomposition,
};
pub use koszul::{koszul_check, family_structure, KoszulParams, ModuleEndomorphism, KOSZUL_TOL};
pub use roots::{principal_curvatures_orbit, root_decomposition, RootCluster, RootDecomposition, RootLabel};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{pre, Error, Result};
use crate::numkernel::linalg::orthonormalize;
use crate::numkernel::Matrix;
use crate::report::{VerificationReport, Verdict};
use crate::DenseMatrix;

/// Bracket-closure tolerance for constructed pairs.
pub const CLOSURE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairId {
    /// `(so(k+2), so(2) ⊕ so(k))`.
    So,
    /// `(u(k+2), u(2) ⊕ u(k))`.
    U,
    /// `(sp(k+2), sp(2) ⊕ sp(k))`.
    Sp,
    /// `(so(10), u(5))`.
    So10U5,
    /// `(so(9), 𝔤₂)`, reductive but not symmetric.
    Spin9G2,
}

impl PairId {
    pub const ALL: [PairId; 5] = [PairId::So, PairId::U, PairId::Sp, PairId::So10U5, PairId::Spin9G2];

    pub fn as_str(self) -> &'static str {
        match self {
            PairId::So => "so",
            PairId::U => "u",
            PairId::Sp => "sp",
            PairId::So10U5 => "so10u5",
            PairId::Spin9G2 => "spin9g2",
        }
    }

    pub fn is_symmetric(self) -> bool {
        self != PairId::Spin9G2
    }

    fn uses_k(self) -> bool {
        matches!(self, PairId::So | PairId::U | PairId::Sp)
    }
}

impl fmt::Display for PairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PairId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PairId::ALL
            .into_iter()
            .find(|p| p.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Precondition(format!("unknown pair '{s}'")))
    }
}

/// A pair `(𝔤, 𝔨)` with `𝔤 = 𝔨 ⊕ 𝔭`. For `spin9g2`, `k_basis` spans `𝔤₂` and
/// `p_basis` its orthogonal complement `𝔪` in `so(9)`.
#[derive(Clone, Debug)]
pub struct SymmetricPair {
    pub id: PairId,
    pub k: Option<usize>,
    /// Size of the realizing matrices.
    pub n: usize,
    /// Orthonormal.
    pub k_basis: Vec<DenseMatrix>,
    /// Orthonormal.
    pub p_basis: Vec<DenseMatrix>,
    /// `[𝔨,𝔨] ⊆ 𝔨`, `[𝔨,𝔭] ⊆ 𝔭`, `[𝔭,𝔭] ⊆ 𝔨` defects (the last is not
    /// required for the reductive pair and recorded only).
    pub closure: [f64; 3],
}

impl SymmetricPair {
    pub fn dim_g(&self) -> usize {
        self.k_basis.len() + self.p_basis.len()
    }

    pub fn g_basis(&self) -> Vec<DenseMatrix> {
        self.k_basis.iter().chain(&self.p_basis).cloned().collect()
    }

    /// `H(ξ₁, ξ₂)` spanning a maximal abelian subspace of `𝔭`; `None` for the
    /// reductive pair.
    pub fn cartan_element(&self, xi1: f64, xi2: f64) -> Option<DenseMatrix> {
        let n = self.n;
        match self.id {
            PairId::So => Some(real_h(n, xi1, xi2)),
            PairId::U => Some(cplx(&real_h(n / 2, xi1, xi2), &Matrix::zeros(n / 2, n / 2))),
            PairId::Sp => Some(quat_real(&real_h(n / 4, xi1, xi2))),
            PairId::So10U5 => {
                let mut a = Matrix::zeros(5, 5);
                a[(0, 1)] = xi1;
                a[(1, 0)] = -xi1;
                a[(2, 3)] = xi2;
                a[(3, 2)] = -xi2;
                let z = Matrix::zeros(5, 5);
                Some(Matrix::block(&[vec![a.clone(), z.clone()], vec![z, -&a]]))
            }
            PairId::Spin9G2 => None,
        }
    }
}

/// `ξ₁(E₀₂ − E₂₀) + ξ₂(E₁₃ − E₃₁)`.
fn real_h(n: usize, xi1: f64, xi2: f64) -> DenseMatrix {
    let mut h = Matrix::zeros(n, n);
    h[(0, 2)] = xi1;
    h[(2, 0)] = -xi1;
    h[(1, 3)] = xi2;
    h[(3, 1)] = -xi2;
    h
}

pub(crate) fn bracket(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    a.commutator(b)
}

/// Frobenius-orthonormal basis of the span. Inputs below `tol` times the
/// largest input norm count as zero, so rounding noise is never normalized up.
pub(crate) fn orthonormal_mats(mats: &[DenseMatrix], tol: f64) -> Vec<DenseMatrix> {
    let Some(first) = mats.first() else { return Vec::new() };
    let (r, c) = first.shape();
    let biggest = mats.iter().map(Matrix::frobenius).fold(0.0, f64::max);
    let flat: Vec<Vec<f64>> =
        mats.iter().filter(|m| m.frobenius() > tol * biggest).map(|m| m.as_slice().to_vec()).collect();
    orthonormalize(&flat, tol).into_iter().map(|v| Matrix::from_vec(r, c, v)).collect()
}

/// Coordinates in an orthonormal basis.
pub(crate) fn coords(z: &DenseMatrix, basis: &[DenseMatrix]) -> Vec<f64> {
    basis.iter().map(|b| b.frob_dot(z)).collect()
}

pub(crate) fn from_coords(c: &[f64], basis: &[DenseMatrix]) -> DenseMatrix {
    let (r, s) = basis.first().map_or((0, 0), Matrix::shape);
    basis.iter().zip(c).fold(Matrix::zeros(r, s), |acc, (b, &x)| &acc + &b.scale(x))
}

/// Distance of `z` from the span of an orthonormal basis.
pub(crate) fn projection_defect(z: &DenseMatrix, basis: &[DenseMatrix]) -> f64 {
    let p = from_coords(&coords(z, basis), basis);
    (z - &p).frobenius()
}

/// Matrix of `ad X` from the span of `from` to the span of `to`, both
/// orthonormal; columns are coordinates of `[X, from_j]`.
pub(crate) fn ad_matrix(x: &DenseMatrix, from: &[DenseMatrix], to: &[DenseMatrix]) -> DenseMatrix {
    let cols: Vec<Vec<f64>> = from.iter().map(|b| coords(&bracket(x, b), to)).collect();
    Matrix::from_cols(to.len(), &cols)
}

fn e(n: usize, i: usize, j: usize) -> DenseMatrix {
    let mut m = Matrix::zeros(n, n);
    m[(i, j)] = 1.0;
    m
}

fn skew(n: usize, i: usize, j: usize) -> DenseMatrix {
    &e(n, i, j) - &e(n, j, i)
}

fn sym(n: usize, i: usize, j: usize) -> DenseMatrix {
    if i == j {
        e(n, i, i)
    } else {
        &e(n, i, j) + &e(n, j, i)
    }
}

/// `A + iB ↦ [[A, −B], [B, A]]`.
pub(crate) fn cplx(re: &DenseMatrix, im: &DenseMatrix) -> DenseMatrix {
    Matrix::block(&[vec![re.clone(), -im], vec![im.clone(), re.clone()]])
}

/// Left multiplication by `1, i, j, k` on `H = R⁴`.
fn quat_units() -> [DenseMatrix; 4] {
    let i = Matrix::from_rows(&[
        vec![0.0, -1.0, 0.0, 0.0],
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, -1.0],
        vec![0.0, 0.0, 1.0, 0.0],
    ]);
    let j = Matrix::from_rows(&[
        vec![0.0, 0.0, -1.0, 0.0],
        vec![0.0, 0.0, 0.0, 1.0],
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, -1.0, 0.0, 0.0],
    ]);
    let k = i.matmul(&j);
    [Matrix::identity(4), i, j, k]
}

/// Real `4n × 4n` form of a quaternionic matrix given by its four real parts.
fn quat(parts: [&DenseMatrix; 4]) -> DenseMatrix {
    let units = quat_units();
    parts.iter().zip(&units).fold(Matrix::zeros(4 * parts[0].rows(), 4 * parts[0].cols()), |acc, (p, u)| {
        &acc + &p.kron(u)
    })
}

fn quat_real(m: &DenseMatrix) -> DenseMatrix {
    let z = Matrix::zeros(m.rows(), m.cols());
    quat([m, &z, &z, &z])
}

/// Anti-Hermitian basis of `𝔤𝔩(n, F)` restricted to entries `(i, j)` with
/// `keep(i, j)`, for `F = R (d = 1), C (2), H (4)`.
fn anti_hermitian(n: usize, d: usize, keep: impl Fn(usize, usize) -> bool) -> Vec<DenseMatrix> {
    let z = Matrix::zeros(n, n);
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            if !keep(i, j) {
                continue;
            }
            // real part must be skew, imaginary parts symmetric
            if i != j {
                let s = skew(n, i, j);
                out.push(match d {
                    1 => s,
                    2 => cplx(&s, &z),
                    _ => quat([&s, &z, &z, &z]),
                });
            }
            for unit in 1..d {
                let s = sym(n, i, j);
                out.push(if d == 2 {
                    cplx(&z, &s)
                } else {
                    let mut parts = [&z, &z, &z, &z];
                    parts[unit] = &s;
                    quat(parts)
                });
            }
        }
    }
    out
}

/// Builds and validates one of the shipped pairs.
pub fn build_pair(id: PairId, k: Option<usize>) -> Result<SymmetricPair> {
    let k = if id.uses_k() {
        let k = k.ok_or_else(|| Error::Precondition(format!("pair {id} needs k")))?;
        let min = if id == PairId::Sp { 2 } else { 3 };
        pre(k >= min, || format!("pair {id} needs k >= {min}, got {k}"))?;
        Some(k)
    } else {
        None
    };
    let (n, kb, pb) = match id {
        PairId::So | PairId::U | PairId::Sp => {
            let size = k.expect("checked") + 2;
            let d = match id {
                PairId::So => 1,
                PairId::U => 2,
                _ => 4,
            };
            let kb = anti_hermitian(size, d, |i, j| (i < 2) == (j < 2));
            let pb = anti_hermitian(size, d, |i, j| (i < 2) != (j < 2));
            (size * d, kb, pb)
        }
        PairId::So10U5 => {
            let z = Matrix::zeros(5, 5);
            let km = |x: &DenseMatrix, y: &DenseMatrix| Matrix::block(&[vec![x.clone(), y.clone()], vec![-y, x.clone()]]);
            let pm = |a: &DenseMatrix, b: &DenseMatrix| Matrix::block(&[vec![a.clone(), b.clone()], vec![b.clone(), -a]]);
            let mut kb = Vec::new();
            let mut pb = Vec::new();
            for i in 0..5 {
                for j in i..5 {
                    kb.push(km(&z, &sym(5, i, j)));
                    if i < j {
                        kb.push(km(&skew(5, i, j), &z));
                        pb.push(pm(&skew(5, i, j), &z));
                        pb.push(pm(&z, &skew(5, i, j)));
                    }
                }
            }
            (10, kb, pb)
        }
        PairId::Spin9G2 => {
            let h = g2_basis(9)?;
            let all: Vec<DenseMatrix> = (0..9).flat_map(|i| (i + 1..9).map(move |j| skew(9, i, j))).collect();
            let hb = orthonormal_mats(&h, 1e-10);
            let mut span = hb.clone();
            span.extend(all);
            let m: Vec<DenseMatrix> = orthonormal_mats(&span, 1e-8).split_off(hb.len());
            (9, h, m)
        }
    };
    let k_basis = orthonormal_mats(&kb, 1e-10);
    let p_basis = orthonormal_mats(&pb, 1e-10);
    pre(k_basis.len() == kb.len() && p_basis.len() == pb.len(), || format!("{id}: dependent basis"))?;
    let mut pair = SymmetricPair { id, k, n, k_basis, p_basis, closure: [0.0; 3] };
    pair.closure = closure_defects(&pair);
    let limit = if id.is_symmetric() { 3 } else { 2 };
    if let Some(bad) = pair.closure[..limit].iter().position(|&d| d > CLOSURE_TOL) {
        let what = ["[k,k] ⊆ k", "[k,p] ⊆ p", "[p,p] ⊆ k"][bad];
        return Err(Error::Construction(format!("{id}: bracket closure {what} fails by {:e}", pair.closure[bad])));
    }
    Ok(pair)
}

fn closure_defects(pair: &SymmetricPair) -> [f64; 3] {
    let (kb, pb) = (&pair.k_basis, &pair.p_basis);
    let worst = |xs: &[DenseMatrix], ys: &[DenseMatrix], target: &[DenseMatrix], same: bool| {
        let mut w: f64 = 0.0;
        for (i, x) in xs.iter().enumerate() {
            for y in ys.iter().skip(if same { i + 1 } else { 0 }) {
                w = w.max(projection_defect(&bracket(x, y), target));
            }
        }
        w
    };
    let pp = if pair.id.is_symmetric() { worst(pb, pb, kb, true) } else { f64::NAN };
    [worst(kb, kb, kb, true), worst(kb, pb, pb, false), pp]
}

/// `𝔪` and the algebra acting on it: `𝔨₀^⊥ ⊂ 𝔨` under `𝔨₀` for the
/// symmetric pairs, `𝔤₂^⊥ ⊂ so(9)` under `𝔤₂` for the reductive one.
#[derive(Clone, Debug)]
pub struct Isotropy {
    pub module: Vec<DenseMatrix>,
    pub algebra: Vec<DenseMatrix>,
}

pub fn isotropy(pair: &SymmetricPair, rootdec: Option<&RootDecomposition>) -> Result<Isotropy> {
    if !pair.id.is_symmetric() {
        return Ok(Isotropy { module: pair.p_basis.clone(), algebra: pair.k_basis.clone() });
    }
    let rd = rootdec.ok_or_else(|| Error::Precondition(format!("pair {} needs its root decomposition", pair.id)))?;
    Ok(Isotropy { module: rd.m_basis(), algebra: rd.k0.clone() })
}

/// Options for [`analyze`].
#[derive(Clone, Copy, Debug)]
pub struct AnalyzeOptions {
    /// Parameters of the generic `H(ξ₁, ξ₂)`.
    pub xi: (f64, f64),
    pub seed: u64,
    pub koszul: Option<KoszulParams>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self { xi: (0.4f64.cos(), 0.4f64.sin()), seed: crate::rng::DEFAULT_SEED, koszul: None }
    }
}

/// Full pipeline for one pair: construction, roots, isotropy representation,
/// existence of an invariant complex structure and optionally the Koszul test.
pub fn analyze(id: PairId, k: Option<usize>, opts: &AnalyzeOptions) -> Result<Vec<VerificationReport>> {
    let pair = build_pair(id, k)?;
    let mut reports = Vec::new();
    let base = |name: &str| {
        let r = VerificationReport::new(name).param("pair", id.as_str());
        match pair.k {
            Some(k) => r.param("k", k),
            None => r,
        }
    };

    let mut r = base("homog.pair").param("dim_g", pair.dim_g()).param("dim_k", pair.k_basis.len());
    r.set_param("dim_p", pair.p_basis.len());
    r.residual("closure_kk", pair.closure[0]);
    r.residual("closure_kp", pair.closure[1]);
    if id.is_symmetric() {
        r.residual("closure_pp", pair.closure[2]);
    }
    reports.push(r);

    let rd = if id.is_symmetric() {
        let rd = root_decomposition(&pair, opts.xi)?;
        let mut r = base("homog.roots").param("xi1", opts.xi.0).param("xi2", opts.xi.1);
        r.set_param("dim_k0", rd.k0.len());
        for c in &rd.clusters {
            r.set_param(&format!("dim_{}", c.label), c.k_alpha.len());
        }
        r.residual("eigen_residual", rd.eigen_residual);
        r.residual("bracket_defect", rd.bracket_defect);
        reports.push(r);
        Some(rd)
    } else {
        None
    };

    let iso = isotropy(&pair, rd.as_ref())?;
    let dec = isotypic_decomposition(&iso.module, &iso.algebra, opts.seed)?;
    let ex = invariant_acs_exists(&dec, opts.seed)?;
    let mut r = base("homog.acs").param("dim_m", dec.dim()).with_seed(opts.seed);
    let summands: Vec<String> = dec.summand_dims().iter().map(usize::to_string).collect();
    r.set_param("summands", summands.join(","));
    r.verdict = if ex.exists { Verdict::Exists } else { Verdict::NoStructure };
    if ex.exists {
        r.residual("square_residual", ex.square_residual);
        r.residual("equivariance_residual", ex.equivariance_residual);
    }
    let comps: Vec<serde_json::Value> = dec
        .components
        .iter()
        .map(|c| {
            serde_json::json!({
                "dim": c.dim(),
                "irreducible_dim": c.irreducible_dim,
                "multiplicity": c.multiplicity,
                "division": c.division,
            })
        })
        .collect();
    r.witness = Some(serde_json::json!({ "components": comps, "obstructions": ex.obstructions }));
    reports.push(r);

    if let (Some(params), Some(rd)) = (opts.koszul, rd.as_ref()) {
        let endo = family_structure(&pair, params)?;
        let mut r = koszul_check(&pair, rd, &endo)?;
        for (key, v) in [("lambda1", params.lambda1), ("lambda2", params.lambda2), ("mu1", params.mu1), ("mu2", params.mu2)] {
            r.set_param(key, v);
        }
        reports.push(r);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        let so4 = build_pair(PairId::So, Some(4)).unwrap();
        assert_eq!((so4.k_basis.len(), so4.p_basis.len()), (7, 8));
        let sp3 = build_pair(PairId::Sp, Some(3)).unwrap();
        assert_eq!(sp3.dim_g(), 55);
        let u3 = build_pair(PairId::U, Some(3)).unwrap();
        assert_eq!((u3.k_basis.len(), u3.p_basis.len()), (4 + 9, 12));
        let s = build_pair(PairId::So10U5, None).unwrap();
        assert_eq!((s.k_basis.len(), s.p_basis.len()), (25, 20));
        let g = build_pair(PairId::Spin9G2, None).unwrap();
        assert_eq!((g.k_basis.len(), g.p_basis.len()), (14, 22));
    }

    #[test]
    fn closure_holds() {
        for (id, k) in [(PairId::So, Some(3)), (PairId::U, Some(3)), (PairId::Sp, Some(2)), (PairId::So10U5, None)] {
            let p = build_pair(id, k).unwrap();
            assert!(p.closure.iter().all(|&d| d <= CLOSURE_TOL), "{id}: {:?}", p.closure);
        }
    }

    #[test]
    fn quaternion_units_multiply() {
        let [one, i, j, k] = quat_units();
        assert!(i.matmul(&i).max_abs_diff(&one.scale(-1.0)) == 0.0);
        assert!(j.matmul(&k).max_abs_diff(&i) == 0.0);
        assert!(k.matmul(&i).max_abs_diff(&j) == 0.0);
    }

    fn acs_verdict(id: PairId, k: Option<usize>) -> (bool, Vec<usize>) {
        let pair = build_pair(id, k).unwrap();
        let rd = id.is_symmetric().then(|| root_decomposition(&pair, (0.4f64.cos(), 0.4f64.sin())).unwrap());
        let iso = isotropy(&pair, rd.as_ref()).unwrap();
        let dec = isotypic_decomposition(&iso.module, &iso.algebra, 7).unwrap();
        let ex = invariant_acs_exists(&dec, 7).unwrap();
        if let Some(w) = &ex.witness {
            assert!(ex.square_residual <= 1e-10 && ex.equivariance_residual <= 1e-10, "{id}");
            assert_eq!(w.rows(), dec.dim());
        }
        (ex.exists, dec.summand_dims())
    }

    #[test]
    fn invariant_structures() {
        assert!(acs_verdict(PairId::So, Some(3)).0);
        assert!(acs_verdict(PairId::So, Some(4)).0);
        assert!(acs_verdict(PairId::So, Some(5)).0);
        assert!(acs_verdict(PairId::U, Some(3)).0);
        assert!(acs_verdict(PairId::So10U5, None).0);
        assert!(!acs_verdict(PairId::Sp, Some(2)).0);
        assert!(!acs_verdict(PairId::Sp, Some(3)).0);
        let (exists, dims) = acs_verdict(PairId::Spin9G2, None);
        assert!(!exists);
        assert_eq!(dims, vec![7, 7, 7, 1]);
    }

    #[test]
    fn analyze_reports() {
        let opts = AnalyzeOptions { koszul: Some(KoszulParams::default()), ..Default::default() };
        let reps = analyze(PairId::So, Some(4), &opts).unwrap();
        let ids: Vec<&str> = reps.iter().map(|r| r.check_id.as_str()).collect();
        assert_eq!(ids, ["homog.pair", "homog.roots", "homog.acs", "homog.koszul"]);
        assert_eq!(reps[3].verdict, Verdict::Integrable);
    }

    #[test]
    fn bad_input() {
        assert!(build_pair(PairId::So, Some(2)).is_err());
        assert!(build_pair(PairId::Sp, None).is_err());
        assert!("foo".parse::<PairId>().is_err());
        assert_eq!("SO10U5".parse::<PairId>().unwrap(), PairId::So10U5);
    }
}
