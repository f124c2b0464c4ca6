//! Command-line front end. Every subcommand produces a list of reports that
//! is either printed as a table or written as a JSON array.

use std::f64::consts::FRAC_PI_8;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::acs::{check_acs, check_distribution_swap, AcsKind, AcsOperator};
use crate::clifford::{build_system, verify_system, Variant};
use crate::error::{Error, Result};
use crate::homog::{analyze, AnalyzeOptions, KoszulParams, PairId};
use crate::isopgeom::{check_spectrum, Family};
use crate::nijenhuis::{check_balanced, scan_operator, ScanConfig, BALANCED_GRID_STEP};
use crate::numkernel::FdMode;
use crate::report::{Verdict, VerificationReport};
use crate::rng::DEFAULT_SEED;
use crate::suite;

/// Exit status when every verdict is non-FAIL.
pub const EXIT_OK: i32 = 0;
/// Exit status when at least one check failed.
pub const EXIT_FAIL: i32 = 1;
/// Exit status for malformed invocations and rejected inputs.
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "isoclif", version, about = "Clifford systems, isoparametric hypersurfaces and their complex structures")]
pub struct Cli {
    /// Write the report array to this file instead of printing a table.
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Symmetric Clifford systems.
    #[command(subcommand)]
    Clifford(CliffordCmd),
    /// Level hypersurfaces of the isoparametric family.
    #[command(subcommand)]
    Hypersurface(HypersurfaceCmd),
    /// Pointwise checks of the almost complex structures.
    #[command(subcommand)]
    Acs(AcsCmd),
    /// Integrability scans and the balanced-metric check.
    #[command(subcommand)]
    Nijenhuis(NijenhuisCmd),
    /// Symmetric pairs and invariant complex structures.
    #[command(subcommand)]
    Homog(HomogCmd),
    /// Fixed check matrices.
    #[command(subcommand)]
    Suite(SuiteCmd),
}

#[derive(Subcommand, Debug)]
pub enum CliffordCmd {
    Verify {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        l: usize,
        #[arg(long, default_value = "unique")]
        variant: Variant,
    },
}

#[derive(Subcommand, Debug)]
pub enum HypersurfaceCmd {
    Spectrum {
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long)]
        l: usize,
        #[arg(long, default_value_t = FRAC_PI_8)]
        t: f64,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
}

/// Selects one structure operator.
#[derive(Args, Debug, Clone)]
pub struct OperatorArgs {
    #[arg(long)]
    pub kind: AcsKind,
    /// Second size of the Clifford system; defaults to 4, or 8 for jm4def.
    #[arg(long)]
    pub l: Option<usize>,
    /// Level of the hypersurface for jtilde, jthm2 and jlambdamu.
    #[arg(long, default_value_t = crate::suite::LEVEL)]
    pub t: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub mu: f64,
    /// Complex dimension of each sphere factor for jproduct.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value = "definite")]
    pub variant: Variant,
}

impl OperatorArgs {
    pub fn build(&self) -> Result<AcsOperator> {
        let fam = |m: usize, dl: usize, v: Variant| Family::new(build_system(m, self.l.unwrap_or(dl), v)?);
        match self.kind {
            AcsKind::JTilde => AcsOperator::jtilde(fam(1, 4, Variant::Unique)?, self.t),
            AcsKind::JThm2 => AcsOperator::jthm2(fam(1, 4, Variant::Unique)?, self.t),
            AcsKind::JLambdaMu => AcsOperator::jlambdamu(fam(1, 4, Variant::Unique)?, self.t, self.lambda, self.mu),
            AcsKind::JM2 => AcsOperator::jm2(fam(2, 4, Variant::Unique)?),
            AcsKind::JM4Def => AcsOperator::jm4def(fam(4, 8, self.variant)?),
            AcsKind::JProduct => AcsOperator::jproduct(self.k),
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum AcsCmd {
    Check {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum NijenhuisCmd {
    Scan {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long, default_value_t = 30)]
        points: usize,
        #[arg(long, default_value_t = 10)]
        pairs: usize,
        #[arg(long, default_value_t = crate::nijenhuis::DEFAULT_H)]
        h: f64,
        #[arg(long)]
        richardson: bool,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    Balanced {
        #[arg(long, default_value_t = 4)]
        l: usize,
        #[arg(long, default_value_t = crate::suite::LEVEL)]
        t: f64,
        #[arg(long, default_value_t = BALANCED_GRID_STEP)]
        grid_step: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum HomogCmd {
    Analyze {
        #[arg(long)]
        pair: PairId,
        #[arg(long)]
        k: Option<usize>,
        /// Also test the integrability of the explicit invariant structure.
        #[arg(long)]
        koszul: bool,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lambda1: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lambda2: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        mu1: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        mu2: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum SuiteCmd {
    /// Every criterion of the reproduction matrix.
    Paper {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Run only these criteria (1 to 10).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

pub fn execute(cmd: &Command) -> Result<Vec<VerificationReport>> {
    match cmd {
        Command::Clifford(CliffordCmd::Verify { m, l, variant }) => Ok(vec![verify_system(&build_system(*m, *l, *variant)?)]),
        Command::Hypersurface(HypersurfaceCmd::Spectrum { m, l, t, samples, seed, tol }) => {
            let fam = Family::new(build_system(*m, *l, Variant::Unique)?)?;
            Ok(vec![check_spectrum(&fam, *t, *samples, *seed, *tol)])
        }
        Command::Acs(AcsCmd::Check { op, samples, seed }) => {
            let op = op.build()?;
            let mut out = Vec::new();
            for i in 0..*samples {
                let s = seed.wrapping_add(i as u64);
                let p = op.sample(s)?;
                out.push(check_acs(&op, &p, 8, s));
                if op.t().is_some() {
                    out.push(check_distribution_swap(&op, &p));
                }
            }
            Ok(out)
        }
        Command::Nijenhuis(NijenhuisCmd::Scan { op, points, pairs, h, richardson, seed }) => {
            let cfg = ScanConfig {
                n_points: *points,
                n_pairs: *pairs,
                seed: *seed,
                h: *h,
                mode: if *richardson { FdMode::Richardson } else { FdMode::Central },
            };
            Ok(vec![scan_operator(&op.build()?, &cfg)?.into()])
        }
        Command::Nijenhuis(NijenhuisCmd::Balanced { l, t, grid_step, seed }) => {
            let fam = Family::new(build_system(1, *l, Variant::Unique)?)?;
            Ok(vec![check_balanced(&fam, *t, *grid_step, *seed)])
        }
        Command::Homog(HomogCmd::Analyze { pair, k, koszul, lambda1, lambda2, mu1, mu2, seed }) => {
            let opts = AnalyzeOptions {
                seed: *seed,
                koszul: koszul.then_some(KoszulParams {
                    lambda1: *lambda1,
                    lambda2: *lambda2,
                    mu1: *mu1,
                    mu2: *mu2,
                }),
                ..AnalyzeOptions::default()
            };
            analyze(*pair, *k, &opts)
        }
        Command::Suite(SuiteCmd::Paper { seed, only }) => {
            let ids: Vec<usize> = if only.is_empty() { (1..=suite::TITLES.len()).collect() } else { only.clone() };
            let mut out = Vec::new();
            for id in ids {
                let c = suite::run_criterion(id, *seed)?;
                for mut r in c.reports {
                    r.set_param("criterion", id);
                    out.push(r);
                }
            }
            Ok(out)
        }
    }
}

fn fmt_num(v: f64) -> String {
    if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        format!("{v:.6}").trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.3e}")
    }
}

/// Human-readable table, one block per report.
pub fn render_table(reports: &[VerificationReport]) -> String {
    let mut s = String::new();
    let width = reports.iter().map(|r| r.check_id.len()).max().unwrap_or(0);
    for r in reports {
        let params: Vec<String> = r.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
        s.push_str(&format!("{:<14} {:<width$}  {}\n", r.verdict.to_string(), r.check_id, params.join(" ")));
        if !r.residuals.is_empty() {
            let res: Vec<String> = r.residuals.iter().map(|(k, v)| format!("{k}={}", fmt_num(*v))).collect();
            s.push_str(&format!("{:<14} {:<width$}  {}\n", "", "", res.join(" ")));
        }
        for n in &r.notes {
            s.push_str(&format!("{:<14} {:<width$}  note: {n}\n", "", ""));
        }
    }
    let fails = reports.iter().filter(|r| r.verdict.is_fail()).count();
    s.push_str(&format!("{} report(s), {fails} failed\n", reports.len()));
    s
}

pub fn exit_code(reports: &[VerificationReport]) -> i32 {
    if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        EXIT_FAIL
    } else {
        EXIT_OK
    }
}

/// Caps the global thread pool from `ISOCLIF_THREADS`; ignored when unset or invalid.
pub fn configure_threads() {
    if let Some(n) = std::env::var("ISOCLIF_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    configure_threads();
    let reports = match execute(&cli.command) {
        Ok(r) => r,
        Err(e @ Error::Precondition(_)) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAIL;
        }
    };
    match &cli.json {
        Some(path) => {
            let text = serde_json::to_string_pretty(&reports).expect("reports serialize");
            if let Err(e) = std::fs::write(path, text + "\n") {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
        }
        None => {
            let _ = std::io::stdout().write_all(render_table(&reports).as_bytes());
        }
    }
    exit_code(&reports)
}
