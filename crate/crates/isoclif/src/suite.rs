//! The fixed matrix of reproducible checks run by `suite paper`. Each
//! criterion yields reports whose verdict is PASS exactly when the observed
//! outcome matches the expected one within the pinned tolerance.

use std::f64::consts::FRAC_PI_8;

use crate::acs::{
    check_equivariance, check_product_hypersurface, generator_preset, m4_gram_deviation, sample_product, AcsOperator,
};
use crate::clifford::{build_system, verify_system, Variant};
use crate::error::{Error, Result};
use crate::homog::{
    build_pair, intertwiner_space, invariant_acs_exists, isotropy, isotypic_decomposition, koszul_check,
    family_structure, principal_curvatures_orbit, root_decomposition, KoszulParams, PairId, RootLabel,
};
use crate::isopgeom::{
    check_spectrum, focal_isomorphism, sample_hypersurface_m1, sample_m, sample_mplus, shape_operator_analytic, Family,
};
use crate::nijenhuis::{check_balanced, scan_operator, ScanConfig, BALANCED_GRID_STEP};
use crate::report::{Verdict, VerificationReport};

pub const TITLES: [&str; 10] = [
    "clifford exactness",
    "spectrum reproduction",
    "focal-map law",
    "integrability matrix",
    "definite-only well-definedness",
    "homogeneous verdicts",
    "koszul certification",
    "equivariance",
    "balanced refutation",
    "cross-validation",
];

/// Level used for the m = 1 structures.
pub const LEVEL: f64 = 0.3;

#[derive(Clone, Debug)]
pub struct Criterion {
    pub id: usize,
    pub title: &'static str,
    pub reports: Vec<VerificationReport>,
}

impl Criterion {
    pub fn passed(&self) -> bool {
        !self.reports.is_empty() && self.reports.iter().all(|r| r.verdict == Verdict::Pass)
    }

    pub fn failures(&self) -> Vec<&VerificationReport> {
        self.reports.iter().filter(|r| r.verdict != Verdict::Pass).collect()
    }
}

fn family(m: usize, l: usize, variant: Variant) -> Result<Family> {
    Family::new(build_system(m, l, variant)?)
}

fn unique(m: usize, l: usize) -> Result<Family> {
    family(m, l, Variant::Unique)
}

/// Re-labels `r` as a suite check: PASS iff its verdict is `want`.
fn expect(mut r: VerificationReport, want: Verdict, c: usize) -> VerificationReport {
    r.set_param("observed", r.verdict.to_string());
    r.set_param("expected", want.to_string());
    r.check_id = format!("suite.c{c}.{}", r.check_id);
    r.verdict = Verdict::from_bool(r.verdict == want);
    r
}

fn or_failed(c: usize, name: &str, r: Result<VerificationReport>) -> VerificationReport {
    r.unwrap_or_else(|e| VerificationReport::failed(format!("suite.c{c}.{name}"), &e))
}

pub fn run_criterion(id: usize, seed: u64) -> Result<Criterion> {
    let reports = match id {
        1 => clifford_exactness(),
        2 => spectra(seed),
        3 => focal_law(seed),
        4 => integrability(seed),
        5 => definite_frame(seed),
        6 => homogeneous(seed),
        7 => koszul(),
        8 => equivariance(seed),
        9 => balanced(seed),
        10 => vec![or_failed(10, "orbit_curvatures", cross_validation(seed))],
        _ => return Err(Error::Precondition(format!("no criterion {id}; valid ids are 1..=10"))),
    };
    Ok(Criterion { id, title: TITLES[id - 1], reports })
}

pub fn run_all(seed: u64) -> Vec<Criterion> {
    (1..=TITLES.len()).map(|i| run_criterion(i, seed).expect("valid id")).collect()
}

fn clifford_exactness() -> Vec<VerificationReport> {
    let cases = [
        (1, 2, Variant::Unique),
        (1, 4, Variant::Unique),
        (2, 2, Variant::Unique),
        (2, 4, Variant::Unique),
        (3, 4, Variant::Unique),
        (4, 8, Variant::Definite),
        (4, 8, Variant::Indefinite),
        (4, 16, Variant::Definite),
    ];
    cases
        .into_iter()
        .map(|(m, l, v)| {
            let r = build_system(m, l, v).map(|cs| verify_system(&cs));
            let mut r = or_failed(1, "clifford.verify", r);
            r.check_id = format!("suite.c1.{}", r.check_id);
            r
        })
        .collect()
}

fn spectra(seed: u64) -> Vec<VerificationReport> {
    let mut out = Vec::new();
    for l in 3..=5 {
        for t in [0.2, FRAC_PI_8, 0.6] {
            let r = unique(1, l).map(|f| check_spectrum(&f, t, 5, seed, 1e-7));
            let mut r = or_failed(2, "isopgeom.spectrum", r);
            r.check_id = format!("suite.c2.{}", r.check_id.trim_start_matches("suite.c2."));
            out.push(r);
        }
    }
    out
}

const FOCAL_POINTS: usize = 50;

fn focal_law(seed: u64) -> Vec<VerificationReport> {
    [(1, 4), (2, 4)]
        .into_iter()
        .map(|(m, l)| {
            let run = || -> Result<VerificationReport> {
                let f = unique(m, l)?;
                let mut r = VerificationReport::new("suite.c3.focal")
                    .param("m", m)
                    .param("l", l)
                    .param("points", FOCAL_POINTS)
                    .with_seed(seed);
                let keys = ["xi_law", "p_maps_d1_to_d3_angle", "p_squared_minus_half_id"];
                let mut worst = [0.0f64; 3];
                for i in 0..FOCAL_POINTS {
                    let p = sample_m(&f, seed.wrapping_add(i as u64))?;
                    let one = focal_isomorphism(&f, &p)?;
                    for (w, k) in worst.iter_mut().zip(keys) {
                        *w = w.max(one.get(k).unwrap_or(f64::INFINITY));
                    }
                }
                for (w, k) in worst.iter().zip(keys) {
                    r.residual(k, *w);
                }
                r.verdict = Verdict::from_bool(worst[0] <= 1e-7 && worst[1] <= 1e-7 && worst[2] <= 1e-8);
                Ok(r)
            };
            or_failed(3, "focal", run())
        })
        .collect()
}

fn scan(c: usize, op: Result<AcsOperator>, want: Verdict, seed: u64, label: &str) -> VerificationReport {
    let cfg = ScanConfig { seed, ..ScanConfig::default() };
    let r = op.and_then(|op| scan_operator(&op, &cfg)).map(VerificationReport::from);
    match r {
        Ok(r) => expect(r, want, c),
        Err(e) => {
            let mut f = VerificationReport::failed(format!("suite.c{c}.nijenhuis.scan.{label}"), &e);
            f.set_param("expected", want.to_string());
            f
        }
    }
}

fn integrability(seed: u64) -> Vec<VerificationReport> {
    use Verdict::{Integrable as Yes, NonIntegrable as No};
    let t = LEVEL;
    let mut out = Vec::new();
    for l in [4, 5] {
        out.push(scan(4, unique(1, l).and_then(|f| AcsOperator::jtilde(f, t)), No, seed, "jtilde"));
        out.push(scan(4, unique(1, l).and_then(|f| AcsOperator::jthm2(f, t)), Yes, seed, "jthm2"));
        for lambda in [0.0, 0.7] {
            for (mu, want) in [(1.0, Yes), (-1.0, Yes), (2.0, No), (0.5, No)] {
                let op = unique(1, l).and_then(|f| AcsOperator::jlambdamu(f, t, lambda, mu));
                let mut r = scan(4, op, want, seed, "jlambdamu");
                r.set_param("l", l);
                r.set_param("lambda", lambda);
                r.set_param("mu", mu);
                out.push(r);
            }
        }
    }
    for l in [4, 6] {
        out.push(scan(4, unique(2, l).and_then(AcsOperator::jm2), Yes, seed, "jm2"));
    }
    out.push(scan(4, AcsOperator::jproduct(3), Yes, seed, "jproduct"));
    let product = sample_product(3, seed, true)
        .and_then(|p| check_product_hypersurface(3, &p, 10, seed, Some(&unique(2, 6)?)));
    let mut r = or_failed(4, "acs.product_hypersurface", product);
    if !r.check_id.starts_with("suite.") {
        r.check_id = format!("suite.c4.{}", r.check_id);
    }
    out.push(r);
    out.push(scan(4, family(4, 8, Variant::Definite).and_then(AcsOperator::jm4def), Yes, seed, "jm4def"));
    out
}

const FRAME_SAMPLES: u64 = 50;

fn definite_frame(seed: u64) -> Vec<VerificationReport> {
    let run = || -> Result<VerificationReport> {
        let def = family(4, 8, Variant::Definite)?;
        let ind = family(4, 8, Variant::Indefinite)?;
        let (mut d, mut i): (f64, f64) = (0.0, 0.0);
        for s in 0..FRAME_SAMPLES {
            d = d.max(m4_gram_deviation(&def, &sample_mplus(&def, seed.wrapping_add(s))?.x)?);
            i = i.max(m4_gram_deviation(&ind, &sample_mplus(&ind, seed.wrapping_add(s))?.x)?);
        }
        let mut r = VerificationReport::new("suite.c5.m4_frame").param("samples", FRAME_SAMPLES as usize).with_seed(seed);
        r.residual("definite_gram_deviation", d);
        r.residual("indefinite_gram_deviation", i);
        r.verdict = Verdict::from_bool(d <= 1e-10 && i > 0.01);
        Ok(r)
    };
    vec![or_failed(5, "m4_frame", run())]
}

/// Expected `dim 𝔨_α` in `RootLabel::ALL` order.
fn expected_dims(id: PairId, k: Option<usize>) -> Option<[usize; 6]> {
    match (id, k) {
        (PairId::So, Some(k)) => Some([k - 2, k - 2, 0, 0, 1, 1]),
        (PairId::U, Some(k)) => Some([2 * (k - 2), 2 * (k - 2), 1, 1, 2, 2]),
        (PairId::So10U5, _) => Some([4, 4, 1, 1, 4, 4]),
        (PairId::Sp, Some(k)) => Some([4 * k - 8, 4 * k - 8, 3, 3, 4, 4]),
        _ => None,
    }
}

fn homogeneous_one(id: PairId, k: Option<usize>, exists: bool, seed: u64) -> Result<VerificationReport> {
    let pair = build_pair(id, k)?;
    let mut r = VerificationReport::new(format!("suite.c6.{id}")).param("pair", id.as_str()).with_seed(seed);
    if let Some(k) = k {
        r.set_param("k", k);
    }
    let mut ok = true;
    let rd = if id.is_symmetric() {
        let rd = root_decomposition(&pair, (0.4f64.cos(), 0.4f64.sin()))?;
        let dims = rd.dims();
        r.set_param("root_dims", format!("{dims:?}"));
        ok &= expected_dims(id, k).is_none_or(|e| e == dims);
        Some(rd)
    } else {
        None
    };
    let iso = isotropy(&pair, rd.as_ref())?;
    let dec = isotypic_decomposition(&iso.module, &iso.algebra, seed)?;
    let ex = invariant_acs_exists(&dec, seed)?;
    let summands = dec.summand_dims();
    r.set_param("dim_m", dec.dim());
    r.set_param("summands", format!("{summands:?}"));
    r.set_param("structure_exists", ex.exists);
    if id == PairId::Spin9G2 {
        ok &= dec.dim() == 22 && summands == [7, 7, 7, 1];
    }
    if ex.exists {
        r.residual("witness_square", ex.square_residual);
        r.residual("witness_equivariance", ex.equivariance_residual);
        ok &= ex.square_residual <= 1e-10 && ex.equivariance_residual <= 1e-10;
    }
    ok &= ex.exists == exists;
    r.note("verdict computed for the Lie algebra of the isotropy group; its connectedness is not modelled");
    r.verdict = Verdict::from_bool(ok);
    Ok(r)
}

fn homogeneous(seed: u64) -> Vec<VerificationReport> {
    let cases = [
        (PairId::So, Some(3), true),
        (PairId::So, Some(5), true),
        (PairId::U, Some(3), true),
        (PairId::U, Some(5), true),
        (PairId::So10U5, None, true),
        (PairId::Sp, Some(2), false),
        (PairId::Sp, Some(3), false),
        (PairId::Spin9G2, None, false),
    ];
    cases.into_iter().map(|(id, k, e)| or_failed(6, id.as_str(), homogeneous_one(id, k, e, seed))).collect()
}

fn koszul_one(id: PairId, k: Option<usize>, params: KoszulParams, want: Verdict) -> Result<VerificationReport> {
    let pair = build_pair(id, k)?;
    let rd = root_decomposition(&pair, (0.4f64.cos(), 0.4f64.sin()))?;
    let mut r = koszul_check(&pair, &rd, &family_structure(&pair, params)?)?;
    r.set_param("mu1", params.mu1);
    r.set_param("mu2", params.mu2);
    r.set_param("lambda1", params.lambda1);
    r.set_param("lambda2", params.lambda2);
    let res = r.get("koszul").unwrap_or(f64::INFINITY);
    let mut r = expect(r, want, 7);
    if want == Verdict::NonIntegrable && res <= 1e-2 {
        r.verdict = Verdict::Fail;
    }
    Ok(r)
}

fn koszul() -> Vec<VerificationReport> {
    use Verdict::{Integrable as Yes, NonIntegrable as No};
    let p = |mu1, mu2| KoszulParams { mu1, mu2, ..KoszulParams::default() };
    let cases = [
        (PairId::So, Some(5), p(1.0, 1.0), Yes),
        (PairId::So, Some(5), p(2.0, 1.0), No),
        (PairId::U, Some(5), p(1.0, 1.0), Yes),
        (PairId::U, Some(5), p(1.0, 2.0), No),
        (PairId::So10U5, None, p(1.0, 1.0), Yes),
        (PairId::So10U5, None, p(1.0, 2.0), No),
    ];
    let mut out: Vec<VerificationReport> =
        cases.into_iter().map(|(id, k, q, w)| or_failed(7, "homog.koszul", koszul_one(id, k, q, w))).collect();
    let run = || -> Result<VerificationReport> {
        let pair = build_pair(PairId::So10U5, None)?;
        let rd = root_decomposition(&pair, (0.4f64.cos(), 0.4f64.sin()))?;
        let hom = intertwiner_space(
            &rd.k0,
            &rd.cluster(RootLabel::A1PlusA2).k_alpha,
            &rd.cluster(RootLabel::A1MinusA2).k_alpha,
        )?;
        let mut r = VerificationReport::new("suite.c7.intertwiner").param("pair", "so10u5");
        r.set_param("dim_hom", hom.len());
        r.verdict = Verdict::from_bool(hom.len() == 1);
        Ok(r)
    };
    out.push(or_failed(7, "intertwiner", run()));
    out
}

fn equivariance(seed: u64) -> Vec<VerificationReport> {
    let cases: [(&str, Result<AcsOperator>, bool); 5] = [
        ("m1_so2xso", unique(1, 5).and_then(|f| AcsOperator::jthm2(f, LEVEL)), true),
        ("m2_diag_unitary", unique(2, 6).and_then(AcsOperator::jm2), true),
        ("m4_diag_symplectic", family(4, 8, Variant::Definite).and_then(AcsOperator::jm4def), true),
        ("m2_extended", unique(2, 6).and_then(AcsOperator::jm2), false),
        ("m4_extended", family(4, 8, Variant::Definite).and_then(AcsOperator::jm4def), false),
    ];
    cases
        .into_iter()
        .map(|(preset, op, good)| {
            let run = || -> Result<VerificationReport> {
                let op = op?;
                let gens = generator_preset(preset, op.family().expect("family-based operator"))?;
                let mut r = check_equivariance(&op, &gens, 5, seed)?;
                r.set_param("preset", preset);
                r.check_id = format!("suite.c8.{}", r.check_id);
                let res = r.get("max_equivariance").unwrap_or(f64::INFINITY);
                r.verdict = Verdict::from_bool(if good { res <= 1e-7 } else { res > 1e-3 });
                r.set_param("expect_violation", !good);
                Ok(r)
            };
            or_failed(8, preset, run())
        })
        .collect()
}

fn balanced(seed: u64) -> Vec<VerificationReport> {
    [0.25, 0.35]
        .into_iter()
        .map(|t| {
            let mut r = or_failed(9, "balanced", unique(1, 4).map(|f| check_balanced(&f, t, BALANCED_GRID_STEP, seed)));
            r.check_id = format!("suite.c9.{}", r.check_id.trim_start_matches("suite.c9."));
            r
        })
        .collect()
}

/// Orbit curvatures of `(so(5), so(2) ⊕ so(3))` against the shape operator
/// of the `m = 1, l = 3` hypersurface at `t = 0.3`.
pub fn cross_validation(seed: u64) -> Result<VerificationReport> {
    let t = LEVEL;
    let pair = build_pair(PairId::So, Some(3))?;
    let rd = root_decomposition(&pair, (t.cos(), t.sin()))?;
    let b = pair.cartan_element(t.sin(), -t.cos()).expect("symmetric pair");
    let mut lie: Vec<f64> = principal_curvatures_orbit(&rd, &b)?
        .into_iter()
        .flat_map(|(v, m)| std::iter::repeat_n(v, m))
        .collect();
    lie.sort_by(f64::total_cmp);
    let fam = unique(1, 3)?;
    let p = sample_hypersurface_m1(&fam, t, seed)?;
    let geo = shape_operator_analytic(&fam, &p)?.eigenvalues()?;
    let dev = if lie.len() == geo.len() {
        lie.iter().zip(&geo).map(|(a, g)| (a - g).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let mut r = VerificationReport::new("suite.c10.orbit_curvatures").param("t", t).with_seed(seed);
    r.residual("spectrum_deviation", dev);
    r.verdict = Verdict::from_bool(dev <= 1e-6);
    Ok(r)
}
