//! The Hermitian metric on `M_t` (m = 1, l = 4) obtained by rescaling the
//! induced metric on each principal distribution, and a finite-difference
//! test of `d(ω ∧ ω) = 0` in a local chart.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::acs::AcsOperator;
use crate::error::{pre, Error, Result};
use crate::isopgeom::{phi_t, Family};
use crate::numkernel::linalg::orthonormalize;
use crate::numkernel::vector::basis;
use crate::numkernel::{expm, singular_values, Matrix};
use crate::report::{Verdict, VerificationReport};
use crate::rng::{stream, uniform, unit_vec};
use crate::DenseMatrix;

pub const BALANCED_GRID_STEP: f64 = 1e-3;
/// `d(ω∧ω)` above this refutes balancedness.
pub const BALANCED_REFUTE: f64 = 1e-2;
/// The closed control form must stay below this.
pub const CONTROL_TOL: f64 = 1e-4;
const CHART_DIM: usize = 6;

/// Local coordinates `(θ, s₁, …, s₅)` around `φ_t(θ₀, u₀, v₀)`:
/// `ψ(θ, s) = φ_t(θ₀ + θ, R(s)u₀, R(s)v₀)` with `R(s) = e^{s₁A₁}⋯e^{s₅A₅}`
/// and `A_a` spanning the complement of the stabilizer of `(u₀, v₀)` in `so(4)`.
#[derive(Clone, Debug)]
pub struct BalancedChart {
    fam: Family,
    t: f64,
    theta0: f64,
    u0: Vec<f64>,
    v0: Vec<f64>,
    gens: Vec<DenseMatrix>,
    op: AcsOperator,
}

/// Weights of the Hermitian metric on `D₁..D₄`: `1/c²` for the constants
/// `(sin t + cos t)/√2, cos t, (sin t − cos t)/√2, sin t`.
pub fn metric_weights(t: f64) -> [f64; 4] {
    let c = [(t.sin() + t.cos()) * FRAC_1_SQRT_2, t.cos(), (t.sin() - t.cos()) * FRAC_1_SQRT_2, t.sin()];
    c.map(|v| 1.0 / (v * v))
}

impl BalancedChart {
    pub fn new(fam: &Family, t: f64, seed: u64) -> Result<Self> {
        pre(fam.m() == 1 && fam.l() == 4, || {
            format!("the balanced check is set up for m = 1, l = 4, got m = {}, l = {}", fam.m(), fam.l())
        })?;
        let op = AcsOperator::jthm2(fam.clone(), t)?;
        let mut rng = stream(seed, 0);
        let theta0 = uniform(&mut rng, 0.0, 2.0 * PI);
        let mut frame = vec![unit_vec(&mut rng, 4), unit_vec(&mut rng, 4)];
        frame.extend((0..4).map(|i| basis(4, i)));
        let frame = orthonormalize(&frame, 1e-8);
        pre(frame.len() == 4, || "could not complete the base frame".into())?;
        let e = |a: &[f64], b: &[f64]| &Matrix::outer(b, a) - &Matrix::outer(a, b);
        let (u, v, w1, w2) = (&frame[0], &frame[1], &frame[2], &frame[3]);
        let gens = vec![e(u, v), e(u, w1), e(u, w2), e(v, w1), e(v, w2)];
        Ok(Self { fam: fam.clone(), t, theta0, u0: u.clone(), v0: v.clone(), gens, op })
    }

    fn factors(&self, q: &[f64]) -> Vec<DenseMatrix> {
        self.gens.iter().zip(&q[1..]).map(|(a, &s)| expm(&a.scale(s))).collect()
    }

    fn product(ms: &[DenseMatrix]) -> DenseMatrix {
        ms.iter().fold(Matrix::identity(4), |acc, m| acc.matmul(m))
    }

    pub fn point(&self, q: &[f64]) -> Vec<f64> {
        let r = Self::product(&self.factors(q));
        phi_t(&self.fam, self.t, self.theta0 + q[0], &r.matvec(&self.u0), &r.matvec(&self.v0))
    }

    /// Columns `∂ψ/∂q_a`, exact.
    pub fn frame(&self, q: &[f64]) -> DenseMatrix {
        let rs = self.factors(q);
        let theta = self.theta0 + q[0];
        let x = self.point(q);
        let mut cols = vec![self.fam.j0().matvec(&x)];
        for a in 0..5 {
            let mut parts = rs.clone();
            parts[a] = self.gens[a].matmul(&rs[a]);
            let dr = Self::product(&parts);
            cols.push(phi_t(&self.fam, self.t, theta, &dr.matvec(&self.u0), &dr.matvec(&self.v0)));
        }
        Matrix::from_cols(x.len(), &cols)
    }

    /// `Σ w_j Pr_j` as an ambient matrix; `g(X, Y) = Xᵀ G Y` on tangent vectors.
    pub fn metric(&self, x: &[f64]) -> Result<DenseMatrix> {
        let prs = self.fam.principal_projectors(x, self.t)?;
        let w = metric_weights(self.t);
        let n = x.len();
        Ok(prs.iter().zip(w).fold(Matrix::zeros(n, n), |acc, (p, wj)| &acc + &p.scale(wj)))
    }

    /// Chart components `ω_ab = g(J∂_a, ∂_b)`.
    pub fn kahler_form(&self, q: &[f64]) -> Result<DenseMatrix> {
        let x = self.point(q);
        let t = self.frame(q);
        let s = singular_values(&t)?;
        if s.last().copied().unwrap_or(0.0) < 1e-8 * s[0] {
            return Err(Error::Singular("chart frame is rank deficient".into()));
        }
        let g = self.metric(&x)?;
        let j = self.op.structure(&x)?;
        Ok(j.matmul(&t).transpose().matmul(&g).matmul(&t))
    }

    /// `max |g(JX, JY) − g(X, Y)|` over the chart frame at `q`.
    pub fn hermitian_defect(&self, q: &[f64]) -> Result<f64> {
        let x = self.point(q);
        let t = self.frame(q);
        let g = self.metric(&x)?;
        let jt = self.op.structure(&x)?.matmul(&t);
        let a = jt.transpose().matmul(&g).matmul(&jt);
        let b = t.transpose().matmul(&g).matmul(&t);
        Ok(a.max_abs_diff(&b))
    }
}

/// `(ω∧ω)_{abcd}` for `a < b < c < d`.
fn square_component(w: &DenseMatrix, i: [usize; 4]) -> f64 {
    let [a, b, c, d] = i;
    2.0 * (w[(a, b)] * w[(c, d)] - w[(a, c)] * w[(b, d)] + w[(a, d)] * w[(b, c)])
}

/// Max over 5-index sets of the central-difference `d(ω∧ω)` at the chart origin.
fn d_of_square(omega: impl Fn(&[f64]) -> Result<DenseMatrix>, h: f64) -> Result<f64> {
    pre(h > 0.0, || format!("grid step must be positive, got {h}"))?;
    let mut plus = Vec::with_capacity(CHART_DIM);
    let mut minus = Vec::with_capacity(CHART_DIM);
    for a in 0..CHART_DIM {
        let mut q = [0.0; CHART_DIM];
        q[a] = h;
        plus.push(omega(&q)?);
        q[a] = -h;
        minus.push(omega(&q)?);
    }
    let deriv = |a: usize, idx: [usize; 4]| {
        (square_component(&plus[a], idx) - square_component(&minus[a], idx)) / (2.0 * h)
    };
    let mut worst: f64 = 0.0;
    for skip in 0..CHART_DIM {
        let five: Vec<usize> = (0..CHART_DIM).filter(|&i| i != skip).collect();
        let mut total = 0.0;
        for k in 0..5 {
            let rest: Vec<usize> = five.iter().copied().filter(|&i| i != five[k]).collect();
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * deriv(five[k], [rest[0], rest[1], rest[2], rest[3]]);
        }
        worst = worst.max(total.abs());
    }
    if !worst.is_finite() {
        return Err(Error::NonFinite("exterior derivative".into()));
    }
    Ok(worst)
}

/// Max-norm of `d(ω∧ω)` at a seeded chart origin on `M_t`, `(m, l) = (1, 4)`.
pub fn balanced_residual_m1(fam: &Family, t: f64, grid_step: f64, seed: u64) -> Result<f64> {
    let chart = BalancedChart::new(fam, t, seed)?;
    d_of_square(|q| chart.kahler_form(q), grid_step)
}

/// The same harness applied to a closed form: the flat-torus form
/// `dq₀∧dq₁ + dq₂∧dq₃ + dq₄∧dq₅` plus `dβ` for a seeded trigonometric 1-form `β`.
pub fn closed_control_residual(grid_step: f64, seed: u64) -> Result<f64> {
    let mut rng = stream(seed, 7);
    let c = Matrix::from_fn(CHART_DIM, CHART_DIM, |_, _| uniform(&mut rng, -1.0, 1.0));
    let phase: Vec<f64> = (0..CHART_DIM).map(|_| uniform(&mut rng, 0.0, 2.0 * PI)).collect();
    let omega = |q: &[f64]| -> Result<DenseMatrix> {
        // β_b = sin(⟨C_b, q⟩ + φ_b), ∂_a β_b = C_ba cos(⟨C_b, q⟩ + φ_b)
        let arg: Vec<f64> = (0..CHART_DIM).map(|b| (0..CHART_DIM).map(|a| c[(b, a)] * q[a]).sum::<f64>() + phase[b]).collect();
        Ok(Matrix::from_fn(CHART_DIM, CHART_DIM, |a, b| {
            let flat = if a / 2 == b / 2 && a != b { if a < b { 1.0 } else { -1.0 } } else { 0.0 };
            flat + c[(b, a)] * arg[b].cos() - c[(a, b)] * arg[a].cos()
        }))
    };
    d_of_square(omega, grid_step)
}

/// Refutation of balancedness: residual above `1e-2` with the control below `1e-4`.
pub fn check_balanced(fam: &Family, t: f64, grid_step: f64, seed: u64) -> VerificationReport {
    let mut r = VerificationReport::new("nijenhuis.balanced")
        .param("m", fam.m())
        .param("l", fam.l())
        .param("t", t)
        .param("grid_step", grid_step)
        .with_seed(seed);
    let run = || -> Result<(f64, f64, f64)> {
        let chart = BalancedChart::new(fam, t, seed)?;
        let herm = chart.hermitian_defect(&[0.0; CHART_DIM])?;
        let res = d_of_square(|q| chart.kahler_form(q), grid_step)?;
        Ok((res, closed_control_residual(grid_step, seed)?, herm))
    };
    match run() {
        Ok((res, ctrl, herm)) => {
            r.residual("d_omega_squared", res);
            r.residual("closed_control", ctrl);
            r.residual("hermitian_defect", herm);
            r.verdict = Verdict::from_bool(res > BALANCED_REFUTE && ctrl <= CONTROL_TOL && herm <= 1e-9);
            r.note("PASS means the metric is shown not to be balanced");
            r
        }
        Err(e) => {
            let mut f = VerificationReport::failed("nijenhuis.balanced", &e);
            f.parameters = r.parameters;
            f.seed = Some(seed);
            f
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{build_system, Variant};

    fn fam() -> Family {
        Family::new(build_system(1, 4, Variant::Unique).unwrap()).unwrap()
    }

    #[test]
    fn frame_matches_finite_differences() {
        let chart = BalancedChart::new(&fam(), 0.3, 3).unwrap();
        let q = [0.01, -0.02, 0.03, 0.0, 0.01, -0.01];
        let t = chart.frame(&q);
        let fd = crate::numkernel::fd_jacobian(|y| chart.point(y), &q, 1e-6).unwrap();
        assert!(t.max_abs_diff(&fd) < 1e-8);
    }

    #[test]
    fn chart_stays_on_the_level_set() {
        let f = fam();
        let chart = BalancedChart::new(&f, 0.3, 1).unwrap();
        let x = chart.point(&[0.1, 0.2, -0.1, 0.05, 0.0, 0.3]);
        assert!((f.eval_f(&x) + (1.2f64).cos()).abs() < 1e-12);
    }

    #[test]
    fn metric_makes_the_structure_hermitian() {
        let chart = BalancedChart::new(&fam(), 0.35, 5).unwrap();
        assert!(chart.hermitian_defect(&[0.0; 6]).unwrap() < 1e-9);
        let w = chart.kahler_form(&[0.0; 6]).unwrap();
        assert!(w.asymmetry() > 0.1 && (&w + &w.transpose()).max_abs() < 1e-9);
    }

    #[test]
    fn not_balanced_at_several_base_points() {
        let f = fam();
        for seed in 0..5 {
            let r = balanced_residual_m1(&f, 0.3, BALANCED_GRID_STEP, seed).unwrap();
            assert!(r > BALANCED_REFUTE, "seed {seed}: {r}");
        }
    }

    #[test]
    fn control_is_closed() {
        for seed in 0..3 {
            assert!(closed_control_residual(BALANCED_GRID_STEP, seed).unwrap() <= CONTROL_TOL);
        }
    }

    #[test]
    fn other_shapes_are_rejected() {
        let f = Family::new(build_system(1, 5, Variant::Unique).unwrap()).unwrap();
        assert!(balanced_residual_m1(&f, 0.3, 1e-3, 0).is_err());
    }
}
