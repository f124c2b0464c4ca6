use isoclif::clifford::{build_system, Variant};
use isoclif::homog::*;
use isoclif::isopgeom::{sample_hypersurface_m1, shape_operator_analytic, Family};
use isoclif::DenseMatrix;

fn generic() -> (f64, f64) {
    (0.4f64.cos(), 0.4f64.sin())
}

fn frob_defect(z: &DenseMatrix, basis: &[DenseMatrix]) -> f64 {
    // basis is orthonormal
    let mut rest = z.clone();
    for b in basis {
        rest = &rest - &b.scale(b.frob_dot(z));
    }
    rest.frobenius()
}

fn orthonormal(mats: Vec<DenseMatrix>) -> Vec<DenseMatrix> {
    let mut out: Vec<DenseMatrix> = Vec::new();
    for m in mats {
        let mut w = m.clone();
        for q in &out {
            w = &w - &q.scale(q.frob_dot(&w));
        }
        let n = w.frobenius();
        if n > 1e-9 * m.frobenius().max(1e-300) {
            out.push(w.scale(1.0 / n));
        }
    }
    out
}

#[test]
fn root_brackets_land_in_sum_and_difference() {
    for (id, k) in [(PairId::So, Some(5)), (PairId::Sp, Some(3)), (PairId::So10U5, None), (PairId::U, Some(4))] {
        let pair = build_pair(id, k).unwrap();
        let rd = root_decomposition(&pair, generic()).unwrap();
        let mut worst: f64 = 0.0;
        for ca in &rd.clusters {
            for cb in &rd.clusters {
                let (a1, a2) = ca.label.coeffs();
                let (b1, b2) = cb.label.coeffs();
                let mut target = Vec::new();
                for (c1, c2) in [(a1 + b1, a2 + b2), (a1 - b1, a2 - b2)] {
                    if c1 == 0.0 && c2 == 0.0 {
                        target.extend(rd.a_basis.iter().cloned());
                    } else if let Some(l) = RootLabel::from_coeffs(c1, c2) {
                        target.extend(rd.cluster(l).p_alpha.iter().cloned());
                    }
                }
                let target = orthonormal(target);
                for x in &ca.k_alpha {
                    for y in &cb.p_alpha {
                        worst = worst.max(frob_defect(&x.commutator(y), &target));
                    }
                }
            }
        }
        assert!(worst <= 1e-8, "{id}: {worst:e}");
    }
}

#[test]
fn equivalent_root_spaces_of_so10_mod_u5() {
    let pair = build_pair(PairId::So10U5, None).unwrap();
    let rd = root_decomposition(&pair, generic()).unwrap();
    let hom = intertwiner_space(
        &rd.k0,
        &rd.cluster(RootLabel::A1PlusA2).k_alpha,
        &rd.cluster(RootLabel::A1MinusA2).k_alpha,
    )
    .unwrap();
    assert_eq!(hom.len(), 1);
}

#[test]
fn inequivalent_root_spaces_of_u5() {
    let pair = build_pair(PairId::U, Some(5)).unwrap();
    let rd = root_decomposition(&pair, generic()).unwrap();
    let hom = intertwiner_space(&rd.k0, &rd.cluster(RootLabel::A1).k_alpha, &rd.cluster(RootLabel::A2).k_alpha).unwrap();
    assert!(hom.is_empty());
}

#[test]
fn intertwiner_rejects_non_invariant_input() {
    let pair = build_pair(PairId::So, Some(5)).unwrap();
    let rd = root_decomposition(&pair, generic()).unwrap();
    let mixed = vec![&rd.cluster(RootLabel::A1).k_alpha[0] + &rd.cluster(RootLabel::A2).k_alpha[0]];
    assert!(intertwiner_space(&rd.k0, &mixed, &rd.cluster(RootLabel::A2).k_alpha).is_err());
}

#[test]
fn orbit_curvatures_match_shape_operator() {
    let t = 0.3f64;
    let pair = build_pair(PairId::So, Some(3)).unwrap();
    let rd = root_decomposition(&pair, (t.cos(), t.sin())).unwrap();
    let b = pair.cartan_element(t.sin(), -t.cos()).unwrap();
    let mut lie: Vec<f64> = principal_curvatures_orbit(&rd, &b)
        .unwrap()
        .into_iter()
        .flat_map(|(v, m)| std::iter::repeat_n(v, m))
        .collect();
    lie.sort_by(f64::total_cmp);

    let fam = Family::new(build_system(1, 3, Variant::Unique).unwrap()).unwrap();
    let p = sample_hypersurface_m1(&fam, t, 11).unwrap();
    let geo = shape_operator_analytic(&fam, &p).unwrap().eigenvalues().unwrap();
    assert_eq!(lie.len(), geo.len());
    for (a, g) in lie.iter().zip(&geo) {
        assert!((a - g).abs() <= 1e-6, "{lie:?} vs {geo:?}");
    }
}

#[test]
fn so_family_integrable_iff_mu1_squared_is_one() {
    let pair = build_pair(PairId::So, Some(4)).unwrap();
    let rd = root_decomposition(&pair, generic()).unwrap();
    let run = |p: KoszulParams| koszul_check(&pair, &rd, &family_structure(&pair, p).unwrap()).unwrap().get("koszul").unwrap();
    let base = KoszulParams::default();
    assert!(run(KoszulParams { mu2: 0.5, ..base }) <= KOSZUL_TOL);
    assert!(run(KoszulParams { mu1: -1.0, mu2: 3.0, ..base }) <= KOSZUL_TOL);
    assert!(run(KoszulParams { mu1: 0.5, ..base }) > 1e-2);
    // the mixed a1 / a1+a2 condition is violated here
    let lam = KoszulParams { lambda1: 0.7, lambda2: -1.3, mu1: 1.0, mu2: -1.0 };
    let c = lam.lambda2 + (1.0 + lam.lambda2.powi(2)) / lam.mu2;
    let cond = -(1.0 + lam.lambda1.powi(2)) / lam.mu1 * c + lam.lambda1 * (lam.mu1 + (1.0 + lam.lambda1.powi(2)) / lam.mu1) + lam.mu1 * c;
    assert!(cond.abs() > 1.0);
    assert!(run(lam) > 1e-2);
}

#[test]
fn analysis_is_deterministic() {
    let opts = AnalyzeOptions::default();
    let a = serde_json::to_string(&analyze(PairId::Sp, Some(3), &opts).unwrap()).unwrap();
    let b = serde_json::to_string(&analyze(PairId::Sp, Some(3), &opts).unwrap()).unwrap();
    assert_eq!(a, b);
}
