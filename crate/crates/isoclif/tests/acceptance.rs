//! Acceptance matrix. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use isoclif::report::Param;
use isoclif::suite::{run_criterion, Criterion, TITLES};
use isoclif::{Verdict, VerificationReport};

const SEED: u64 = 42;

fn res(r: &VerificationReport, key: &str) -> f64 {
    r.get(key).unwrap_or(f64::INFINITY)
}

fn text(r: &VerificationReport, key: &str) -> String {
    r.parameters.get(key).map(Param::to_string).unwrap_or_default()
}

/// Tolerance checks on the residuals, independent of the report verdicts.
fn pinned(id: usize, r: &VerificationReport) -> Vec<String> {
    let mut bad = Vec::new();
    let mut need = |ok: bool, what: String| {
        if !ok {
            bad.push(what);
        }
    };
    match id {
        1 => {
            need(res(r, "anticommutator_max") == 0.0, "anticommutator not exactly zero".into());
            need(res(r, "asymmetry_max") == 0.0, "matrices not exactly symmetric".into());
        }
        2 => {
            need(res(r, "analytic_deviation") <= 1e-7, format!("analytic deviation {:e}", res(r, "analytic_deviation")));
            if let Some(e) = r.get("extreme_deviation") {
                need(e <= 1e-7, format!("extreme deviation {e:e}"));
            }
        }
        3 => {
            need(res(r, "xi_law") <= 1e-7, format!("xi law {:e}", res(r, "xi_law")));
            need(res(r, "p_maps_d1_to_d3_angle") <= 1e-7, "P D1 to D3 angle".into());
            need(res(r, "p_squared_minus_half_id") <= 1e-8, "P squared".into());
        }
        4 => {
            if r.check_id.contains("product_hypersurface") {
                need(res(r, "j_xi1_minus_xi2") <= 1e-10, format!("J xi1 - xi2 = {:e}", res(r, "j_xi1_minus_xi2")));
            } else {
                need(text(r, "observed") == text(r, "expected"), format!("observed '{}'", text(r, "observed")));
                if r.check_id.ends_with("jthm2") {
                    need(res(r, "max_nijenhuis") <= 1e-5, format!("jthm2 residual {:e}", res(r, "max_nijenhuis")));
                }
            }
        }
        5 => {
            need(res(r, "definite_gram_deviation") <= 1e-10, "definite gram".into());
            need(res(r, "indefinite_gram_deviation") > 0.01, "indefinite gram".into());
        }
        6 => {
            if text(r, "structure_exists") == "true" {
                need(res(r, "witness_square") <= 1e-10, "witness square".into());
                need(res(r, "witness_equivariance") <= 1e-10, "witness equivariance".into());
            }
        }
        7 => {
            if r.check_id.ends_with("intertwiner") {
                need(text(r, "dim_hom") == "1", format!("dim Hom = {}", text(r, "dim_hom")));
            } else if text(r, "expected") == Verdict::Integrable.to_string() {
                need(res(r, "koszul") <= 1e-8, format!("koszul {:e}", res(r, "koszul")));
            } else {
                need(res(r, "koszul") > 0.01, format!("koszul {:e}", res(r, "koszul")));
            }
        }
        8 => {
            let e = res(r, "max_equivariance");
            if text(r, "expect_violation") == "true" {
                need(e.is_finite() && e > 1e-3, format!("extended preset residual {e:e}"));
            } else {
                need(e <= 1e-7, format!("equivariance {e:e}"));
            }
        }
        9 => {
            need(res(r, "d_omega_squared") > 0.01, format!("balanced residual {:e}", res(r, "d_omega_squared")));
            need(res(r, "closed_control") <= 1e-4, format!("control {:e}", res(r, "closed_control")));
        }
        10 => need(res(r, "spectrum_deviation") <= 1e-6, format!("deviation {:e}", res(r, "spectrum_deviation"))),
        _ => unreachable!(),
    }
    bad
}

fn evaluate(c: &Criterion) -> Vec<String> {
    let mut problems = Vec::new();
    for r in &c.reports {
        let mut why = pinned(c.id, r);
        if r.verdict != Verdict::Pass {
            why.extend(r.notes.iter().cloned());
            if why.is_empty() {
                why.push(format!("verdict {}", r.verdict));
            }
        }
        if !why.is_empty() {
            let params: Vec<String> = r
                .parameters
                .iter()
                .filter(|(k, _)| ["l", "m", "k", "t", "lambda", "mu", "mu1", "mu2", "pair", "preset"].contains(&k.as_str()))
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            problems.push(format!("{} [{}]: {}", r.check_id, params.join(" "), why.join("; ")));
        }
    }
    problems
}

fn main() {
    let mut failed = 0;
    for id in 1..=TITLES.len() {
        let c = run_criterion(id, SEED).expect("criterion id in range");
        let problems = evaluate(&c);
        let status = if problems.is_empty() && c.passed() { "PASS" } else { "FAIL" };
        println!("{status} criterion {id:>2} {} ({} checks)", c.title, c.reports.len());
        for p in &problems {
            println!("       {p}");
        }
        if status == "FAIL" {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", TITLES.len() - failed, TITLES.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
