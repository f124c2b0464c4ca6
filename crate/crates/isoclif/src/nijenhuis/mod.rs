//! Finite-difference Nijenhuis tensor of an ambient matrix field and sampled
//! integrability scans.
//!
//! Tangent vectors `X` at `p` are extended as `x ↦ Π_x X`; since the tensor is
//! independent of the extension, any smooth choice gives the same value up to
//! discretization error.

mod balanced;

pub use balanced::{
    balanced_residual_m1, check_balanced, closed_control_residual, BalancedChart, BALANCED_GRID_STEP,
};

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::acs::AcsOperator;
use crate::error::{pre, Error, Result};
use crate::isopgeom::ManifoldPoint;
use crate::numkernel::vector::{axpy, norm, normalize, sub};
use crate::numkernel::{fd_jacobian_mode, FdMode, Matrix};
use crate::report::{Param, ScanReport, ScanWitness, Verdict};
use crate::rng::{gaussian_vec, stream};
use crate::DenseMatrix;

/// At or below this the scan reports an integrable structure.
pub const INTEGRABLE_TOL: f64 = 1e-5;
/// At or above this the scan reports a non-integrable structure.
pub const NON_INTEGRABLE_TOL: f64 = 1e-2;
pub const DEFAULT_H: f64 = 1e-5;

/// A matrix field `x ↦ J_x` on a neighbourhood of a submanifold together with
/// a smooth tangent projector `x ↦ Π_x`, with `J_x = Π_x J_x Π_x`.
pub trait AmbientField: Sync {
    fn ambient_dim(&self) -> usize;
    fn j(&self, x: &[f64]) -> Result<DenseMatrix>;
    fn projector(&self, x: &[f64]) -> Result<DenseMatrix>;
}

impl AmbientField for AcsOperator {
    fn ambient_dim(&self) -> usize {
        AcsOperator::ambient_dim(self)
    }

    fn j(&self, x: &[f64]) -> Result<DenseMatrix> {
        self.structure(x)
    }

    fn projector(&self, x: &[f64]) -> Result<DenseMatrix> {
        AcsOperator::projector(self, x)
    }
}

/// Values and first partial derivatives of `J` and `Π` at a point.
#[derive(Clone, Debug)]
pub struct FieldJet {
    pub x: Vec<f64>,
    pub j: DenseMatrix,
    pub pi: DenseMatrix,
    /// `∂_i J` for each ambient coordinate.
    pub dj: Vec<DenseMatrix>,
    /// `∂_i Π`.
    pub dpi: Vec<DenseMatrix>,
}

impl FieldJet {
    /// One finite-difference Jacobian of the flattened pair `(J, Π)`.
    pub fn new<F: AmbientField + ?Sized>(field: &F, x: &[f64], h: f64, mode: FdMode) -> Result<Self> {
        pre(h > 0.0, || format!("finite-difference step must be positive, got {h}"))?;
        let n = field.ambient_dim();
        pre(x.len() == n, || format!("point has dimension {}, field lives on R^{n}", x.len()))?;
        let flat = |y: &[f64]| -> Vec<f64> {
            match (field.j(y), field.projector(y)) {
                (Ok(j), Ok(p)) => j.as_slice().iter().chain(p.as_slice()).copied().collect(),
                _ => vec![f64::NAN; 2 * n * n],
            }
        };
        let jac = fd_jacobian_mode(flat, x, h, mode)?;
        let unflatten = |col: &[f64], offset: usize| Matrix::from_vec(n, n, col[offset..offset + n * n].to_vec());
        let cols = jac.columns();
        Ok(Self {
            x: x.to_vec(),
            j: field.j(x)?,
            pi: field.projector(x)?,
            dj: cols.iter().map(|c| unflatten(c, 0)).collect(),
            dpi: cols.iter().map(|c| unflatten(c, n * n)).collect(),
        })
    }

    fn directional(d: &[DenseMatrix], v: &[f64]) -> DenseMatrix {
        let n = v.len();
        d.iter().zip(v).fold(Matrix::zeros(n, n), |acc, (m, &c)| if c == 0.0 { acc } else { &acc + &m.scale(c) })
    }

    /// Nijenhuis tensor for the extensions `x ↦ Π_x(X + C_X(x − p))` and the
    /// same for `Y`; `None` means `C = 0`.
    pub fn nijenhuis(
        &self,
        x: &[f64],
        y: &[f64],
        cx: Option<&DenseMatrix>,
        cy: Option<&DenseMatrix>,
    ) -> Vec<f64> {
        // A field M(z)·w(z) with M ∈ {Π, J} and w(z) = w + C(z − p) has
        // derivative (∂_v M) w + M C v along v.
        struct Field<'a> {
            m: &'a DenseMatrix,
            dm: &'a [DenseMatrix],
            w: &'a [f64],
            c: Option<&'a DenseMatrix>,
        }
        impl Field<'_> {
            fn value(&self) -> Vec<f64> {
                self.m.matvec(self.w)
            }
            fn deriv(&self, v: &[f64]) -> Vec<f64> {
                let mut out = FieldJet::directional(self.dm, v).matvec(self.w);
                if let Some(c) = self.c {
                    axpy(&mut out, 1.0, &self.m.matvec(&c.matvec(v)));
                }
                out
            }
        }
        let bracket = |a: &Field, b: &Field| sub(&b.deriv(&a.value()), &a.deriv(&b.value()));
        let fx = Field { m: &self.pi, dm: &self.dpi, w: x, c: cx };
        let fy = Field { m: &self.pi, dm: &self.dpi, w: y, c: cy };
        let jx = Field { m: &self.j, dm: &self.dj, w: x, c: cx };
        let jy = Field { m: &self.j, dm: &self.dj, w: y, c: cy };
        let mut out = bracket(&jx, &jy);
        axpy(&mut out, -1.0, &bracket(&fx, &fy));
        let mut inner = bracket(&jx, &fy);
        axpy(&mut inner, 1.0, &bracket(&fx, &jy));
        axpy(&mut out, -1.0, &self.j.matvec(&inner));
        out
    }
}

/// `N(X, Y) = [JX, JY] − [X, Y] − J[JX, Y] − J[X, JY]` at `p`, with brackets
/// of the extensions `x ↦ Π_x X` from a central-difference Jacobian.
pub fn nijenhuis_at<F: AmbientField + ?Sized>(
    field: &F,
    p: &[f64],
    x: &[f64],
    y: &[f64],
    h: f64,
    mode: FdMode,
) -> Result<Vec<f64>> {
    Ok(FieldJet::new(field, p, h, mode)?.nijenhuis(x, y, None, None))
}

/// Scan settings; defaults follow the command-line defaults.
#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub n_points: usize,
    pub n_pairs: usize,
    pub seed: u64,
    pub h: f64,
    pub mode: FdMode,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { n_points: 30, n_pairs: 10, seed: crate::rng::DEFAULT_SEED, h: DEFAULT_H, mode: FdMode::Central }
    }
}

pub fn verdict_for(residual: f64) -> Verdict {
    if !residual.is_finite() {
        Verdict::Inconclusive
    } else if residual <= INTEGRABLE_TOL {
        Verdict::Integrable
    } else if residual >= NON_INTEGRABLE_TOL {
        Verdict::NonIntegrable
    } else {
        Verdict::Inconclusive
    }
}

fn random_unit_tangent(p: &ManifoldPoint, rng: &mut impl rand::Rng) -> Vec<f64> {
    let g = gaussian_vec(rng, p.tangent.dim());
    let mut v = vec![0.0; p.x.len()];
    for (c, q) in g.iter().zip(p.tangent.basis()) {
        axpy(&mut v, *c, q);
    }
    normalize(&v)
}

struct PointResult {
    max: f64,
    pair: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    point: Vec<f64>,
}

/// Max of `‖N(X, Y)‖` over unit tangent pairs at sampled points, in parallel
/// over points. The witness is the lowest (point, pair) index attaining the max.
pub fn integrability_scan<F, S>(
    field: &F,
    sampler: S,
    kind: &str,
    params: BTreeMap<String, Param>,
    cfg: &ScanConfig,
) -> Result<ScanReport>
where
    F: AmbientField + ?Sized,
    S: Fn(u64) -> Result<ManifoldPoint> + Sync,
{
    pre(cfg.n_points > 0 && cfg.n_pairs > 0, || "scan needs at least one point and one pair".into())?;
    let results: Vec<Result<PointResult>> = (0..cfg.n_points)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(cfg.seed, i as u64);
            let point_seed = rand::Rng::random::<u64>(&mut rng);
            let p = sampler(point_seed)?;
            let jet = FieldJet::new(field, &p.x, cfg.h, cfg.mode)?;
            let mut best = PointResult { max: -1.0, pair: 0, x: Vec::new(), y: Vec::new(), point: p.x.clone() };
            for k in 0..cfg.n_pairs {
                let x = random_unit_tangent(&p, &mut rng);
                let y = random_unit_tangent(&p, &mut rng);
                let r = norm(&jet.nijenhuis(&x, &y, None, None));
                let r = if r.is_finite() { r } else { f64::INFINITY };
                if r > best.max {
                    best = PointResult { max: r, pair: k, x, y, point: p.x.clone() };
                }
            }
            Ok(best)
        })
        .collect();
    let mut worst: Option<(usize, PointResult)> = None;
    for (i, r) in results.into_iter().enumerate() {
        let r = r?;
        if worst.as_ref().is_none_or(|(_, w)| r.max > w.max) {
            worst = Some((i, r));
        }
    }
    let (i, w) = worst.ok_or_else(|| Error::Invariant("empty scan".into()))?;
    Ok(ScanReport {
        kind: kind.to_string(),
        params,
        n_points: cfg.n_points,
        seed: cfg.seed,
        h: cfg.h,
        max_residual: w.max,
        verdict: verdict_for(w.max),
        witness: Some(ScanWitness { point_index: i, pair_index: w.pair, point: w.point, x: w.x, y: w.y }),
    })
}

/// Scan of an operator on its own manifold.
pub fn scan_operator(op: &AcsOperator, cfg: &ScanConfig) -> Result<ScanReport> {
    let mut r = crate::report::VerificationReport::new("");
    op.describe(&mut r);
    r.set_param("n_pairs", cfg.n_pairs);
    if cfg.mode == FdMode::Richardson {
        r.set_param("richardson", true);
    }
    integrability_scan(op, |s| op.sample(s), op.kind().as_str(), r.parameters, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acs::AcsOperator;
    use crate::clifford::{build_system, Variant};
    use crate::isopgeom::Family;
    use crate::rng::unit_vec;

    fn fam(m: usize, l: usize) -> Family {
        Family::new(build_system(m, l, Variant::Unique).unwrap()).unwrap()
    }

    /// A constant complex structure on R^4 with the identity projector.
    struct Flat;

    impl AmbientField for Flat {
        fn ambient_dim(&self) -> usize {
            4
        }
        fn j(&self, _: &[f64]) -> Result<DenseMatrix> {
            Ok(Matrix::from_rows(&[
                vec![0.0, -1.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, -1.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ]))
        }
        fn projector(&self, _: &[f64]) -> Result<DenseMatrix> {
            Ok(Matrix::identity(4))
        }
    }

    /// Complex lines in R^4 that rotate with the second coordinate.
    struct Twisted;

    impl AmbientField for Twisted {
        fn ambient_dim(&self) -> usize {
            4
        }
        fn j(&self, x: &[f64]) -> Result<DenseMatrix> {
            let (c, s) = (x[1].cos(), x[1].sin());
            let a = vec![c, 0.0, s, 0.0];
            let b = vec![0.0, 1.0, 0.0, 0.0];
            let e = vec![-s, 0.0, c, 0.0];
            let f = vec![0.0, 0.0, 0.0, 1.0];
            let mut j = &Matrix::outer(&b, &a) - &Matrix::outer(&a, &b);
            j = &(&j + &Matrix::outer(&f, &e)) - &Matrix::outer(&e, &f);
            Ok(j)
        }
        fn projector(&self, _: &[f64]) -> Result<DenseMatrix> {
            Ok(Matrix::identity(4))
        }
    }

    #[test]
    fn constant_structure_is_integrable() {
        let n = nijenhuis_at(&Flat, &[0.1, 0.2, 0.3, 0.4], &[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0], 1e-5, FdMode::Central)
            .unwrap();
        assert!(norm(&n) < 1e-12);
    }

    #[test]
    fn rotating_structure_is_not() {
        let n = nijenhuis_at(&Twisted, &[0.0; 4], &[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0], 1e-5, FdMode::Central)
            .unwrap();
        assert!(norm(&n) > 0.1, "{n:?}");
    }

    #[test]
    fn antisymmetry_and_type() {
        let op = AcsOperator::jtilde(fam(1, 4), 0.3).unwrap();
        let p = op.sample(4).unwrap();
        let jet = FieldJet::new(&op, &p.x, 1e-5, FdMode::Central).unwrap();
        let mut rng = stream(4, 9);
        let x = random_unit_tangent(&p, &mut rng);
        let y = random_unit_tangent(&p, &mut rng);
        assert!(norm(&jet.nijenhuis(&x, &x, None, None)) <= 1e-9);
        let nxy = jet.nijenhuis(&x, &y, None, None);
        let nyx = jet.nijenhuis(&y, &x, None, None);
        assert!(norm(&crate::numkernel::vector::add(&nxy, &nyx)) <= 1e-9);
        let jx = jet.j.matvec(&x);
        let mut lhs = jet.nijenhuis(&jx, &y, None, None);
        axpy(&mut lhs, 1.0, &jet.j.matvec(&nxy));
        assert!(norm(&lhs) <= 1e-5, "{}", norm(&lhs));
        assert!(norm(&nxy) > 1e-2);
    }

    #[test]
    fn extension_does_not_matter() {
        let op = AcsOperator::jtilde(fam(1, 4), 0.3).unwrap();
        let p = op.sample(2).unwrap();
        let jet = FieldJet::new(&op, &p.x, 1e-5, FdMode::Central).unwrap();
        let mut rng = stream(2, 3);
        let x = random_unit_tangent(&p, &mut rng);
        let y = random_unit_tangent(&p, &mut rng);
        let n = p.x.len();
        let c1 = Matrix::from_fn(n, n, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
        let c2 = Matrix::from_fn(n, n, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
        let a = jet.nijenhuis(&x, &y, None, None);
        let b = jet.nijenhuis(&x, &y, Some(&c1), Some(&c2));
        assert!(norm(&sub(&a, &b)) <= 1e-5);
    }

    #[test]
    fn scan_verdicts_on_small_samples() {
        let cfg = ScanConfig { n_points: 4, n_pairs: 4, ..ScanConfig::default() };
        let cases = [
            (AcsOperator::jtilde(fam(1, 4), 0.3).unwrap(), Verdict::NonIntegrable),
            (AcsOperator::jthm2(fam(1, 4), 0.3).unwrap(), Verdict::Integrable),
            (AcsOperator::jlambdamu(fam(1, 4), 0.3, 0.7, -1.0).unwrap(), Verdict::Integrable),
            (AcsOperator::jlambdamu(fam(1, 4), 0.3, 0.7, 2.0).unwrap(), Verdict::NonIntegrable),
            (AcsOperator::jm2(fam(2, 4)).unwrap(), Verdict::Integrable),
            (AcsOperator::jproduct(3).unwrap(), Verdict::Integrable),
        ];
        for (op, want) in cases {
            let r = scan_operator(&op, &cfg).unwrap();
            assert_eq!(r.verdict, want, "{}: {}", op.kind(), r.max_residual);
        }
    }

    #[test]
    fn scan_is_deterministic() {
        let op = AcsOperator::jtilde(fam(1, 4), 0.3).unwrap();
        let cfg = ScanConfig { n_points: 3, n_pairs: 2, ..ScanConfig::default() };
        let a = scan_operator(&op, &cfg).unwrap();
        let b = scan_operator(&op, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_step_is_rejected() {
        assert!(nijenhuis_at(&Flat, &unit_vec(&mut stream(1, 0), 4), &[1.0, 0.0, 0.0, 0.0], &[0.0; 4], 0.0, FdMode::Central)
            .is_err());
    }
}
