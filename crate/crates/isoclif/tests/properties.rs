use std::f64::consts::FRAC_PI_4;

use proptest::prelude::*;

use isoclif::acs::{check_acs, AcsOperator};
use isoclif::clifford::{build_system, Variant};
use isoclif::homog::{build_pair, PairId};
use isoclif::isopgeom::Family;
use isoclif::nijenhuis::{scan_operator, ScanConfig};
use isoclif::report::{Verdict, VerificationReport};
use isoclif::DenseMatrix;

fn m1(l: usize) -> Family {
    Family::new(build_system(1, l, Variant::Unique).unwrap()).unwrap()
}

fn combo(basis: &[DenseMatrix], coef: &[f64]) -> DenseMatrix {
    basis.iter().zip(coef.iter().cycle()).fold(basis[0].scale(0.0), |acc, (b, c)| &acc + &b.scale(*c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn structures_square_to_minus_identity(
        l in 3usize..6,
        t in 0.05f64..(FRAC_PI_4 - 0.05),
        lambda in prop_oneof![-2.0f64..-0.2, 0.2f64..2.0],
        mu in prop_oneof![-2.0f64..-0.2, 0.2f64..2.0],
        seed in 0u64..1000,
    ) {
        let ops = [
            AcsOperator::jtilde(m1(l), t).unwrap(),
            AcsOperator::jthm2(m1(l), t).unwrap(),
            AcsOperator::jlambdamu(m1(l), t, lambda, mu).unwrap(),
        ];
        for op in &ops {
            let p = op.sample(seed).unwrap();
            let r = check_acs(op, &p, 4, seed);
            prop_assert!(r.get("j_squared_plus_id").unwrap() <= 1e-9, "{:?}", r);
            prop_assert!(r.get("tangency").unwrap() <= 1e-9, "{:?}", r);
        }
    }

    #[test]
    fn jacobi_identity_in_every_algebra(
        coef in prop::collection::vec(-1.0f64..1.0, 3 * 7),
        which in 0usize..5,
    ) {
        let (id, k) = [
            (PairId::So, Some(4)),
            (PairId::U, Some(3)),
            (PairId::Sp, Some(2)),
            (PairId::So10U5, None),
            (PairId::Spin9G2, None),
        ][which];
        let pair = build_pair(id, k).unwrap();
        let g = pair.g_basis();
        let x = combo(&g, &coef[0..7]);
        let y = combo(&g[1..], &coef[7..14]);
        let z = combo(&g[2..], &coef[14..21]);
        let jac = &(&x.commutator(&y.commutator(&z)) + &y.commutator(&z.commutator(&x))) + &z.commutator(&x.commutator(&y));
        prop_assert!(jac.max_abs() <= 1e-10, "{id}: {:e}", jac.max_abs());
    }

    #[test]
    fn reports_roundtrip_through_json(
        id in "[a-z]{1,8}(\\.[a-z_]{1,8}){0,2}",
        res in prop::collection::btree_map("[a-z_]{1,10}", -1e300f64..1e300, 0..5),
        ints in prop::collection::btree_map("[a-z]{1,6}", any::<i64>(), 0..4),
        verdict in prop::sample::select(vec![
            Verdict::Pass, Verdict::Fail, Verdict::Inconclusive, Verdict::NoStructure,
            Verdict::Exists, Verdict::Integrable, Verdict::NonIntegrable,
        ]),
        seed in any::<u64>(),
    ) {
        let mut r = VerificationReport::new(id).with_seed(seed);
        for (k, v) in &res {
            r.residual(k, *v);
        }
        for (k, v) in &ints {
            r.set_param(&format!("i_{k}"), *v);
        }
        r.verdict = verdict;
        let text = serde_json::to_string(&r).unwrap();
        let back: VerificationReport = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, r);
    }
}

/// Central differences are second order, so halving `h` on an integrable
/// structure divides the residual by about four.
#[test]
fn integrable_residual_is_finite_difference_error() {
    for op in [AcsOperator::jthm2(m1(4), 0.3).unwrap(), AcsOperator::jlambdamu(m1(4), 0.3, 0.7, -1.0).unwrap()] {
        let at = |h: f64| {
            let cfg = ScanConfig { n_points: 6, n_pairs: 4, h, ..ScanConfig::default() };
            VerificationReport::from(scan_operator(&op, &cfg).unwrap()).get("max_nijenhuis").unwrap()
        };
        let ratio = at(2e-3) / at(1e-3);
        assert!((2.5..=5.5).contains(&ratio), "{}: ratio {ratio}", op.kind());
    }
}
