//! The quartic `F(x) = |x|⁴ − 2Σ⟨P_i x, x⟩²`, its level hypersurfaces `M_t`,
//! the focal submanifold `M₊`, the focal map and principal distributions.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

use serde::{Deserialize, Serialize};

use crate::clifford::CliffordSystem;
use crate::error::{pre, Error, Result};
use crate::numkernel::vector::{axpy, dot, norm, normalize, sub};
use crate::numkernel::{
    fd_jacobian, newton_project, null_space, principal_angles, sym_eig, Matrix,
};
use crate::report::{Verdict, VerificationReport};
use crate::rng::{gaussian_vec, stream, uniform, unit_vec};
use crate::{DenseMatrix, Subspace};

pub const SHAPE_FD_STEP: f64 = 1e-5;
/// Eigenvalues within this distance of a predicted curvature are accepted silently.
pub const CLUSTER_TOL: f64 = 1e-6;
/// Eigenvalues further than this from every predicted curvature are a classification error.
pub const CLUSTER_REJECT: f64 = 1e-4;
const NEWTON_TOL: f64 = 1e-14;
const NEWTON_ITERS: usize = 50;

/// A Clifford system together with its floating-point matrices and `J₀ = P₀P₁`.
#[derive(Clone, Debug)]
pub struct Family {
    cs: CliffordSystem,
    p: Vec<DenseMatrix>,
    j0: DenseMatrix,
}

impl Family {
    /// Requires `l − m − 1 > 0` so that both focal submanifolds are proper.
    pub fn new(cs: CliffordSystem) -> Result<Self> {
        pre(cs.l > cs.m + 1, || format!("hypersurface family needs l - m - 1 > 0 (m = {}, l = {})", cs.m, cs.l))?;
        let p = cs.real_matrices();
        let j0 = p[0].matmul(&p[1]);
        Ok(Self { cs, p, j0 })
    }

    pub fn cs(&self) -> &CliffordSystem {
        &self.cs
    }

    pub fn p(&self) -> &[DenseMatrix] {
        &self.p
    }

    /// `J₀ = P₀P₁`, the complex structure used as multiplication by `√−1`.
    pub fn j0(&self) -> &DenseMatrix {
        &self.j0
    }

    pub fn dim(&self) -> usize {
        self.cs.dim()
    }

    pub fn m(&self) -> usize {
        self.cs.m
    }

    pub fn l(&self) -> usize {
        self.cs.l
    }

    /// `(m₁, m₂) = (m, l − m − 1)`.
    pub fn multiplicities(&self) -> (usize, usize) {
        self.cs.multiplicities()
    }

    /// `⟨P_i x, x⟩` for every `i`.
    pub fn coeffs(&self, x: &[f64]) -> Vec<f64> {
        self.p.iter().map(|q| dot(&q.matvec(x), x)).collect()
    }

    pub fn eval_f(&self, x: &[f64]) -> f64 {
        let r2 = dot(x, x);
        r2 * r2 - 2.0 * self.coeffs(x).iter().map(|c| c * c).sum::<f64>()
    }

    /// `4|x|²x − 8Σ⟨P_i x, x⟩ P_i x`.
    pub fn grad_f(&self, x: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = x.iter().map(|v| 4.0 * dot(x, x) * v).collect();
        for q in &self.p {
            let qx = q.matvec(x);
            axpy(&mut g, -8.0 * dot(&qx, x), &qx);
        }
        g
    }

    /// `4|x|²I + 8xxᵀ − 8Σ(c_i P_i + 2 P_i x (P_i x)ᵀ)`.
    pub fn hess_f(&self, x: &[f64]) -> DenseMatrix {
        let n = self.dim();
        let mut h = &Matrix::identity(n).scale(4.0 * dot(x, x)) + &Matrix::outer(x, x).scale(8.0);
        for q in &self.p {
            let qx = q.matvec(x);
            let c = dot(&qx, x);
            h = &h - &(&q.scale(8.0 * c) + &Matrix::outer(&qx, &qx).scale(16.0));
        }
        h
    }

    /// Sphere-tangential gradient `∇F − ⟨∇F, x⟩x`.
    pub fn sphere_grad(&self, x: &[f64]) -> Vec<f64> {
        let g = self.grad_f(x);
        let mut s = g.clone();
        axpy(&mut s, -dot(&g, x), x);
        s
    }

    /// Unit normal `+∇ˢF/|∇ˢF|`, the direction `ξ` of the parametrized family.
    pub fn grad_normal(&self, x: &[f64]) -> Result<Vec<f64>> {
        let s = self.sphere_grad(x);
        let n = norm(&s);
        if n < 1e-12 {
            return Err(Error::Singular("sphere-tangential gradient vanishes (focal point)".into()));
        }
        Ok(s.iter().map(|v| v / n).collect())
    }

    /// Unit normal used for shape operators: `ν = −∇ˢF/|∇ˢF|`, which puts
    /// `cot t` on the eigenspace of dimension `m₂`.
    pub fn shape_normal(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.grad_normal(x)?.iter().map(|v| -v).collect())
    }

    /// Level parameter `t ∈ [0, π/4]` with `F(x) = −cos 4t` for unit `x`.
    pub fn level_of(&self, x: &[f64]) -> f64 {
        (-self.eval_f(x)).clamp(-1.0, 1.0).acos() / 4.0
    }

    /// Focal map `x − 2Σ⟨P_i x, x⟩P_i x`, only defined on `M = M_{π/8}`.
    pub fn xi_map(&self, x: &[f64]) -> Result<Vec<f64>> {
        let f = self.eval_f(x);
        if f.abs() > 1e-10 || (norm(x) - 1.0).abs() > 1e-10 {
            return Err(Error::Precondition(format!(
                "focal map needs a point of F = 0 on the sphere (F = {f:e}, |x| = {})",
                norm(x)
            )));
        }
        Ok(self.xi_raw(x))
    }

    pub fn xi_raw(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        for q in &self.p {
            let qx = q.matvec(x);
            axpy(&mut out, -2.0 * dot(&qx, x), &qx);
        }
        out
    }

    /// Exact Jacobian of the focal map, `I − 2Σc_i P_i − 4ΣP_i x (P_i x)ᵀ`.
    pub fn xi_jacobian(&self, x: &[f64]) -> DenseMatrix {
        let n = self.dim();
        let mut d = Matrix::identity(n);
        for q in &self.p {
            let qx = q.matvec(x);
            let c = dot(&qx, x);
            d = &d - &(&q.scale(2.0 * c) + &Matrix::outer(&qx, &qx).scale(4.0));
        }
        d
    }

    /// `P = Σ⟨P_i x, x⟩ P_i`.
    pub fn focal_p(&self, x: &[f64]) -> DenseMatrix {
        let c = self.coeffs(x);
        let n = self.dim();
        self.p.iter().zip(&c).fold(Matrix::zeros(n, n), |acc, (q, &ci)| &acc + &q.scale(ci))
    }

    /// Orthogonal projector onto `Span{P₀x, …, P_m x}`.
    pub fn focal_q(&self, x: &[f64]) -> DenseMatrix {
        let n = self.dim();
        self.p.iter().fold(Matrix::zeros(n, n), |acc, q| {
            let qx = q.matvec(x);
            &acc + &Matrix::outer(&qx, &qx)
        })
    }

    /// Tangent projector of the level hypersurface through `x`, valid in a
    /// neighbourhood off the sphere: `I − x̂x̂ᵀ − ν̂ν̂ᵀ`.
    pub fn level_tangent_projector(&self, x: &[f64]) -> Result<DenseMatrix> {
        let xh = normalize(x);
        let nu = self.grad_normal(&xh)?;
        let n = self.dim();
        Ok(&(&Matrix::identity(n) - &Matrix::outer(&xh, &xh)) - &Matrix::outer(&nu, &nu))
    }

    /// Ambient shape operator `Π (∇²F − ⟨∇F, x⟩I) Π / |∇ˢF|` with respect to
    /// `ν = −∇ˢF/|∇ˢF|`; smooth in `x` away from the focal sets.
    pub fn ambient_shape_operator(&self, x: &[f64]) -> Result<DenseMatrix> {
        let xh = normalize(x);
        let s = self.sphere_grad(&xh);
        let sn = norm(&s);
        if sn < 1e-12 {
            return Err(Error::Singular("sphere-tangential gradient vanishes (focal point)".into()));
        }
        let pi = self.level_tangent_projector(&xh)?;
        let n = self.dim();
        let h = &self.hess_f(&xh) - &Matrix::identity(n).scale(dot(&self.grad_f(&xh), &xh));
        Ok(pi.matmul(&h).matmul(&pi).scale(1.0 / sn))
    }

    /// Ambient orthogonal projectors onto `D₁..D₄` at level `t`, as Lagrange
    /// polynomials in the ambient shape operator.
    pub fn principal_projectors(&self, x: &[f64], t: f64) -> Result<[DenseMatrix; 4]> {
        let a = self.ambient_shape_operator(x)?;
        let pi = self.level_tangent_projector(x)?;
        let lam = principal_curvatures(t);
        let proj = |j: usize| {
            let mut out = pi.clone();
            for k in 0..4 {
                if k != j {
                    let f = &a - &pi.scale(lam[k]);
                    out = out.matmul(&f).scale(1.0 / (lam[j] - lam[k]));
                }
            }
            out
        };
        Ok([proj(0), proj(1), proj(2), proj(3)])
    }
}

/// `λ_j = cot(t + jπ/4)` for `j = 1..4`.
pub fn principal_curvatures(t: f64) -> [f64; 4] {
    let cot = |a: f64| a.cos() / a.sin();
    [cot(t + FRAC_PI_4), cot(t + 2.0 * FRAC_PI_4), cot(t + 3.0 * FRAC_PI_4), cot(t)]
}

/// Curvatures in focal-map labelling, `κ_i = cot(π/8 + (i−1)π/4)`.
pub fn focal_curvatures() -> [f64; 4] {
    let cot = |a: f64| a.cos() / a.sin();
    [cot(FRAC_PI_8), cot(3.0 * FRAC_PI_8), cot(5.0 * FRAC_PI_8), cot(7.0 * FRAC_PI_8)]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    T(f64),
    FocalPlus,
    /// `S^{2k−1} × S^{2k−1}`.
    ProductSpheres,
    /// The complex hypersurface `{⟨x, y⟩ = ⟨x, iy⟩ = 0}` of the product.
    ProductHypersurface,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifoldPoint {
    pub x: Vec<f64>,
    pub level: Level,
    pub tangent: Subspace,
    pub normal: Subspace,
}

impl ManifoldPoint {
    pub fn t(&self) -> Option<f64> {
        match self.level {
            Level::T(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_tangent(&self, v: &[f64], tol: f64) -> bool {
        self.normal.project(v).iter().map(|a| a * a).sum::<f64>().sqrt() <= tol * (1.0 + norm(v))
    }
}

/// Build the frames of a point on a level hypersurface.
pub fn hypersurface_point(fam: &Family, x: &[f64], t: f64) -> Result<ManifoldPoint> {
    let nu = fam.grad_normal(x)?;
    let n = fam.dim();
    let rows = Matrix::from_rows(&[x.to_vec(), nu.clone()]);
    let tangent = null_space(&rows, 1e-9)?;
    pre(tangent.dim() == n - 2, || format!("tangent space has dimension {}", tangent.dim()))?;
    let normal = Subspace::from_orthonormal(n, vec![x.to_vec(), nu]);
    Ok(ManifoldPoint { x: x.to_vec(), level: Level::T(t), tangent, normal })
}

/// `φ_t(θ; u, v) = e^{J₀θ}(cos t·u + sin t·J₀v)` with `u, v` in the first `R^l` factor.
pub fn phi_t(fam: &Family, t: f64, theta: f64, u: &[f64], v: &[f64]) -> Vec<f64> {
    let l = fam.l();
    let mut uu = vec![0.0; 2 * l];
    let mut vv = vec![0.0; 2 * l];
    uu[..l].copy_from_slice(u);
    vv[..l].copy_from_slice(v);
    let jv = fam.j0().matvec(&vv);
    let w: Vec<f64> = uu.iter().zip(&jv).map(|(a, b)| t.cos() * a + t.sin() * b).collect();
    let jw = fam.j0().matvec(&w);
    w.iter().zip(&jw).map(|(a, b)| theta.cos() * a + theta.sin() * b).collect()
}

fn check_level(t: f64) -> Result<()> {
    pre(t > 0.0 && t < FRAC_PI_4, || format!("level t = {t} outside (0, π/4)"))
}

/// Seeded point of `M_t` from the parametrization (m = 1 only).
pub fn sample_hypersurface_m1(fam: &Family, t: f64, seed: u64) -> Result<ManifoldPoint> {
    pre(fam.m() == 1, || format!("the parametrization needs m = 1, got m = {}", fam.m()))?;
    check_level(t)?;
    let l = fam.l();
    let mut rng = stream(seed, 0);
    let theta = uniform(&mut rng, 0.0, 2.0 * PI);
    let u = unit_vec(&mut rng, l);
    let g = gaussian_vec(&mut rng, l);
    let v = normalize(&sub(&g, &u.iter().map(|a| a * dot(&u, &g)).collect::<Vec<_>>()));
    hypersurface_point(fam, &phi_t(fam, t, theta, &u, &v), t)
}

/// Seeded point of `M_t` for any `m`, by Newton projection onto
/// `{F + cos 4t = 0, |x|² = 1}`.
pub fn sample_level(fam: &Family, t: f64, seed: u64) -> Result<ManifoldPoint> {
    check_level(t)?;
    let target = (4.0 * t).cos();
    let mut last = None;
    for attempt in 0..8u64 {
        let mut rng = stream(seed, attempt);
        let x0 = unit_vec(&mut rng, fam.dim());
        let res = newton_project(
            |x| vec![fam.eval_f(x) + target, dot(x, x) - 1.0],
            |x| Matrix::from_rows(&[fam.grad_f(x), x.iter().map(|v| 2.0 * v).collect()]),
            &x0,
            NEWTON_TOL,
            NEWTON_ITERS,
        );
        match res {
            Ok(x) => return hypersurface_point(fam, &x, t),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Point of the hypersurface at level `t`, using the parametrization when `m = 1`.
pub fn sample_point(fam: &Family, t: f64, seed: u64) -> Result<ManifoldPoint> {
    if fam.m() == 1 {
        sample_hypersurface_m1(fam, t, seed)
    } else {
        sample_level(fam, t, seed)
    }
}

/// Newton projection onto `M₊ = {|x| = 1, ⟨P_i x, x⟩ = 0}`.
pub fn project_to_mplus(fam: &Family, x0: &[f64]) -> Result<ManifoldPoint> {
    pre(norm(x0) > 0.0, || "cannot project the origin".into())?;
    let x = newton_project(
        |x| {
            let mut r = fam.coeffs(x);
            r.push(dot(x, x) - 1.0);
            r
        },
        |x| {
            let mut rows: Vec<Vec<f64>> =
                fam.p().iter().map(|q| q.matvec(x).iter().map(|v| 2.0 * v).collect()).collect();
            rows.push(x.iter().map(|v| 2.0 * v).collect());
            Matrix::from_rows(&rows)
        },
        x0,
        NEWTON_TOL,
        NEWTON_ITERS,
    )?;
    mplus_point(fam, &x)
}

/// Frames at a point already on `M₊`.
pub fn mplus_point(fam: &Family, x: &[f64]) -> Result<ManifoldPoint> {
    let mut normals = vec![x.to_vec()];
    normals.extend(fam.p().iter().map(|q| q.matvec(x)));
    let rows = Matrix::from_rows(&normals.iter().map(|v| v.iter().map(|a| 2.0 * a).collect()).collect::<Vec<_>>());
    let tangent = null_space(&rows, 1e-9)?;
    let n = fam.dim();
    pre(tangent.dim() + normals.len() == n, || format!("M₊ tangent space has dimension {}", tangent.dim()))?;
    Ok(ManifoldPoint { x: x.to_vec(), level: Level::FocalPlus, tangent, normal: Subspace::from_orthonormal(n, normals) })
}

pub fn sample_mplus(fam: &Family, seed: u64) -> Result<ManifoldPoint> {
    let mut rng = stream(seed, 0);
    project_to_mplus(fam, &unit_vec(&mut rng, fam.dim()))
}

/// Shape operator in the tangent basis of `p`.
#[derive(Clone, Debug)]
pub struct ShapeOperator {
    /// Symmetrized matrix.
    pub matrix: DenseMatrix,
    /// Max asymmetry before symmetrization.
    pub asymmetry: f64,
}

impl ShapeOperator {
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(sym_eig(&self.matrix)?.values)
    }
}

/// `−Tᵀ dν T` with `dν` from central differences (step `1e-5`).
pub fn shape_operator(fam: &Family, p: &ManifoldPoint) -> Result<ShapeOperator> {
    shape_operator_fd(fam, p, SHAPE_FD_STEP)
}

pub fn shape_operator_fd(fam: &Family, p: &ManifoldPoint, h: f64) -> Result<ShapeOperator> {
    pre(p.t().is_some(), || "shape operator needs a hypersurface point".into())?;
    fam.grad_normal(&p.x)?;
    let dnu = fd_jacobian(
        |y| fam.shape_normal(y).unwrap_or_else(|_| vec![f64::NAN; y.len()]),
        &p.x,
        h,
    )?;
    let t = p.tangent.matrix();
    let a = t.transpose().matmul(&dnu).matmul(&t).scale(-1.0);
    Ok(ShapeOperator { asymmetry: a.asymmetry(), matrix: a.symmetrize() })
}

/// `Tᵀ (∇²F − ⟨∇F, x⟩I) T / |∇ˢF|`.
pub fn shape_operator_analytic(fam: &Family, p: &ManifoldPoint) -> Result<ShapeOperator> {
    pre(p.t().is_some(), || "shape operator needs a hypersurface point".into())?;
    let a = fam.ambient_shape_operator(&p.x)?;
    let t = p.tangent.matrix();
    let m = t.transpose().matmul(&a).matmul(&t);
    Ok(ShapeOperator { asymmetry: m.asymmetry(), matrix: m.symmetrize() })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrincipalSplit {
    pub t: f64,
    pub values: [f64; 4],
    pub parts: [Subspace; 4],
    /// Largest distance from an eigenvalue to its predicted curvature.
    pub max_deviation: f64,
}

impl PrincipalSplit {
    pub fn dims(&self) -> [usize; 4] {
        [self.parts[0].dim(), self.parts[1].dim(), self.parts[2].dim(), self.parts[3].dim()]
    }
}

/// Group shape-operator eigenvectors by the predicted curvatures `cot(t + jπ/4)`.
pub fn principal_split(fam: &Family, p: &ManifoldPoint, t: f64) -> Result<PrincipalSplit> {
    let s = shape_operator(fam, p)?;
    split_from_operator(fam, p, &s, t)
}

pub fn split_from_operator(fam: &Family, p: &ManifoldPoint, s: &ShapeOperator, t: f64) -> Result<PrincipalSplit> {
    let values = principal_curvatures(t);
    let eig = sym_eig(&s.matrix)?;
    let tm = p.tangent.matrix();
    let mut groups: [Vec<Vec<f64>>; 4] = Default::default();
    let mut max_dev: f64 = 0.0;
    for (k, &ev) in eig.values.iter().enumerate() {
        let (j, dev) = values
            .iter()
            .enumerate()
            .map(|(j, &v)| (j, (ev - v).abs()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"))
            .expect("four curvatures");
        if dev > CLUSTER_REJECT {
            return Err(Error::Classification(format!(
                "eigenvalue {ev} is {dev:e} from every predicted curvature at t = {t}"
            )));
        }
        max_dev = max_dev.max(dev);
        groups[j].push(tm.matvec(&eig.vector(k)));
    }
    let n = fam.dim();
    let (m1, m2) = fam.multiplicities();
    let parts = groups.map(|g| Subspace::span(n, &g, 1e-8));
    let dims = [parts[0].dim(), parts[1].dim(), parts[2].dim(), parts[3].dim()];
    if dims != [m1, m2, m1, m2] {
        return Err(Error::Classification(format!("principal dimensions {dims:?}, expected {:?}", [m1, m2, m1, m2])));
    }
    Ok(PrincipalSplit { t, values, parts, max_deviation: max_dev })
}

/// Split of `T_xM` at `t = π/8` relabelled so that `dξ X = −κ_i X` on part `i`.
pub fn focal_split(fam: &Family, p: &ManifoldPoint) -> Result<PrincipalSplit> {
    let s = principal_split(fam, p, FRAC_PI_8)?;
    let [d1, d2, d3, d4] = s.parts;
    Ok(PrincipalSplit { t: FRAC_PI_8, values: focal_curvatures(), parts: [d3, d2, d1, d4], max_deviation: s.max_deviation })
}

fn check_on_m(fam: &Family, p: &ManifoldPoint) -> Result<()> {
    let f = fam.eval_f(&p.x);
    pre(f.abs() <= 1e-10, || format!("point is not on F = 0 (F = {f:e})"))
}

/// Checks of the focal-map law and of `P = Σ⟨P_i x, x⟩P_i` at a point of `M`.
pub fn focal_isomorphism(fam: &Family, p: &ManifoldPoint) -> Result<VerificationReport> {
    check_on_m(fam, p)?;
    let split = focal_split(fam, p)?;
    let pm = fam.focal_p(&p.x);
    let q = fam.focal_q(&p.x);
    let dxi = fam.xi_jacobian(&p.x);
    let mut r = VerificationReport::new("isopgeom.focal");
    let mut law: f64 = 0.0;
    for (part, &k) in split.parts.iter().zip(&split.values) {
        for x in part.basis() {
            let mut d = dxi.matvec(x);
            axpy(&mut d, k, x);
            law = law.max(norm(&d));
        }
    }
    let mut angle: f64 = 0.0;
    let mut half: f64 = 0.0;
    for x in split.parts[0].basis() {
        let y = pm.matvec(x);
        half = half.max((dot(&y, &y) - 0.5).abs());
        let line = Subspace::span(fam.dim(), &[y], 1e-12);
        angle = angle.max(principal_angles(&line, &split.parts[2])?.into_iter().fold(0.0, f64::max));
    }
    let psq = pm.matmul(&pm).max_abs_diff(&Matrix::identity(fam.dim()).scale(0.5));
    let qsq = q.matmul(&q).max_abs_diff(&q);
    r.residual("xi_law", law);
    r.residual("p_maps_d1_to_d3_angle", angle);
    r.residual("p_image_norm_sq_minus_half", half);
    r.residual("p_squared_minus_half_id", psq);
    r.residual("q_idempotence", qsq);
    r.verdict = Verdict::from_bool(law <= 1e-7 && angle <= 1e-7 && half <= 1e-8 && qsq <= 1e-10);
    Ok(r)
}

/// Point of `M = M_{π/8}`.
pub fn sample_m(fam: &Family, seed: u64) -> Result<ManifoldPoint> {
    sample_point(fam, FRAC_PI_8, seed)
}

/// Principal curvatures from the shape operator, with `(value, multiplicity)`
/// clusters merged at `tol`.
pub fn spectrum_clusters(values: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &v in values {
        match out.last_mut() {
            Some((c, k)) if (v - *c).abs() <= tol => {
                *c = (*c * *k as f64 + v) / (*k as f64 + 1.0);
                *k += 1;
            }
            _ => out.push((v, 1)),
        }
    }
    out
}

/// Shape-operator spectra at seeded points of `M_t` against `cot(t + jπ/4)`
/// with multiplicities `(m₁, m₂, m₁, m₂)`, both from the analytic operator
/// and from central differences. At `t = π/8` also the extreme values
/// `±(√2 + 1)`.
pub fn check_spectrum(fam: &Family, t: f64, samples: usize, seed: u64, tol: f64) -> VerificationReport {
    let mut r = VerificationReport::new("isopgeom.spectrum")
        .param("m", fam.m())
        .param("l", fam.l())
        .param("t", t)
        .param("samples", samples)
        .with_seed(seed);
    let (m1, m2) = fam.multiplicities();
    let mut expected: Vec<f64> = principal_curvatures(t)
        .iter()
        .zip([m1, m2, m1, m2])
        .flat_map(|(&v, k)| std::iter::repeat_n(v, k))
        .collect();
    expected.sort_by(f64::total_cmp);
    let deviation = |values: &[f64]| {
        if values.len() != expected.len() {
            return f64::INFINITY;
        }
        values.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let run = || -> Result<(f64, f64, f64, Vec<(f64, usize)>)> {
        let (mut ana, mut fd, mut extreme): (f64, f64, f64) = (0.0, 0.0, 0.0);
        let mut clusters = Vec::new();
        for i in 0..samples.max(1) {
            let p = sample_point(fam, t, seed.wrapping_add(i as u64))?;
            let a = shape_operator_analytic(fam, &p)?.eigenvalues()?;
            let f = shape_operator(fam, &p)?.eigenvalues()?;
            ana = ana.max(deviation(&a));
            fd = fd.max(deviation(&f));
            if (t - FRAC_PI_8).abs() < 1e-15 {
                let top = 2f64.sqrt() + 1.0;
                extreme = extreme.max((a[a.len() - 1] - top).abs()).max((a[0] + top).abs());
            }
            clusters = spectrum_clusters(&a, CLUSTER_TOL);
        }
        Ok((ana, fd, extreme, clusters))
    };
    match run() {
        Ok((ana, fd, extreme, clusters)) => {
            r.residual("analytic_deviation", ana);
            r.residual("fd_deviation", fd);
            if (t - FRAC_PI_8).abs() < 1e-15 {
                r.residual("extreme_deviation", extreme);
            }
            let mults: Vec<String> = clusters.iter().map(|(_, k)| k.to_string()).collect();
            r.set_param("multiplicities", mults.join(","));
            r.verdict = Verdict::from_bool(ana <= tol && fd <= tol && extreme <= tol);
        }
        Err(e) => {
            r.verdict = Verdict::Fail;
            r.note(e.to_string());
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{build_system, Variant};
    use crate::numkernel::fd_gradient;

    fn fam(m: usize, l: usize) -> Family {
        Family::new(build_system(m, l, Variant::Unique).unwrap()).unwrap()
    }

    #[test]
    fn f_on_focal_and_eigenvector_points() {
        let f = fam(1, 3);
        let p = sample_mplus(&f, 3).unwrap();
        assert!((f.eval_f(&p.x) - 1.0).abs() < 1e-12);
        // eigenvector of P₀ with ⟨P₁x, x⟩ = 0
        let x = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!((f.eval_f(&x) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let f = fam(2, 4);
        for s in 0..10 {
            let x = unit_vec(&mut stream(s, 9), 8);
            let g = fd_gradient(|y| f.eval_f(y), &x, 1e-5).unwrap();
            let e = f.grad_f(&x);
            assert!(g.iter().zip(&e).all(|(a, b)| (a - b).abs() < 1e-8));
        }
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let f = fam(1, 4);
        let x = unit_vec(&mut stream(5, 1), 8);
        let h = fd_jacobian(|y| f.grad_f(y), &x, 1e-5).unwrap();
        assert!(h.max_abs_diff(&f.hess_f(&x)) < 1e-7);
    }

    #[test]
    fn parametrized_point_lies_on_level() {
        let f = fam(1, 4);
        let t = 0.3;
        let x = phi_t(&f, t, 0.0, &[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]);
        assert!((x[0] - t.cos()).abs() < 1e-15 && (x[5] + t.sin()).abs() < 1e-15);
        assert!((f.eval_f(&x) + (4.0 * t).cos()).abs() < 1e-12);
        let a = sample_hypersurface_m1(&f, t, 9).unwrap();
        let b = sample_hypersurface_m1(&f, t, 9).unwrap();
        assert_eq!(a.x, b.x);
        assert!(sample_hypersurface_m1(&f, 0.9, 9).is_err());
    }

    #[test]
    fn spectrum_m1() {
        let f = fam(1, 4);
        let t = 0.3;
        let p = sample_hypersurface_m1(&f, t, 1).unwrap();
        let s = principal_split(&f, &p, t).unwrap();
        assert_eq!(s.dims(), [1, 2, 1, 2]);
        assert!(s.max_deviation < 1e-7);
    }

    #[test]
    fn spectrum_m2_level_set() {
        let f = fam(2, 4);
        let p = sample_level(&f, 0.3, 4).unwrap();
        assert_eq!(principal_split(&f, &p, 0.3).unwrap().dims(), [2, 1, 2, 1]);
    }

    #[test]
    fn analytic_and_fd_shape_operators_agree() {
        let f = fam(1, 5);
        let p = sample_hypersurface_m1(&f, 0.6, 2).unwrap();
        let a = shape_operator(&f, &p).unwrap();
        let b = shape_operator_analytic(&f, &p).unwrap();
        assert!(a.matrix.max_abs_diff(&b.matrix) < 1e-7);
        assert!(a.asymmetry < 1e-8);
    }

    #[test]
    fn projectors_match_split() {
        let f = fam(1, 4);
        let t = 0.3;
        let p = sample_hypersurface_m1(&f, t, 6).unwrap();
        let s = principal_split(&f, &p, t).unwrap();
        let pr = f.principal_projectors(&p.x, t).unwrap();
        for j in 0..4 {
            assert!(pr[j].max_abs_diff(&s.parts[j].projector()) < 1e-9);
        }
    }

    #[test]
    fn mplus_projection() {
        let f = fam(2, 4);
        let p = sample_mplus(&f, 0).unwrap();
        assert_eq!(p.tangent.dim(), 4);
        assert!(f.coeffs(&p.x).iter().all(|c| c.abs() < 1e-12));
        assert!(p.normal.orthonormality_defect() < 1e-12);
        let again = project_to_mplus(&f, &p.x).unwrap();
        assert_eq!(again.x, p.x);
    }

    #[test]
    fn focal_map_preserves_m() {
        let f = fam(1, 3);
        let p = sample_m(&f, 2).unwrap();
        let y = f.xi_map(&p.x).unwrap();
        assert!((norm(&y) - 1.0).abs() < 1e-10);
        assert!(f.eval_f(&y).abs() < 1e-9);
        let d = fd_jacobian(|z| f.xi_raw(z), &p.x, 1e-5).unwrap();
        assert!(d.max_abs_diff(&f.xi_jacobian(&p.x)) < 1e-8);
        let off = sample_hypersurface_m1(&f, 0.3, 2).unwrap();
        assert!(f.xi_map(&off.x).is_err());
    }

    #[test]
    fn focal_report_passes() {
        let f = fam(1, 4);
        let p = sample_m(&f, 11).unwrap();
        let r = focal_isomorphism(&f, &p).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    }

    #[test]
    fn family_rejects_small_l() {
        assert!(Family::new(build_system(1, 2, Variant::Unique).unwrap()).is_err());
    }
}
