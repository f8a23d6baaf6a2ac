use blmix::chain::{build_kernel, build_kernel_exact, ChainParams};
use blmix::coupling::{adjacent_difference_law, contraction_estimate, difference_law_exact, CoupledState};
use blmix::dn::{llt_decay_check, normalizer_check};
use blmix::ratios::RatioTriple;
use blmix::spectral::{
    lemma_checks, s1_squared_decomposition_check, verify_eigen_identity, verify_eigen_identity_exact, Eigen,
};
use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{emit, CliError, Suite, VerifyArgs};

/// Exact residuals must vanish up to this `n` (every valid quadruple).
const EXACT_SCAN_MAX_N: u32 = 16;
const FLOAT_EIGEN_TOL: f64 = 1e-9;
const DECOMPOSITION_TOL: f64 = 1e-12;
const SCALED_DEFECT_BOUND: f64 = 10.0;
const SCALED_POWER_BOUND: f64 = 10.0;
const NORMALIZER_BOUND: f64 = 5.0;
const SIGMAS: f64 = 3.0;

#[derive(Debug, Serialize)]
struct Check {
    suite: &'static str,
    name: String,
    passed: bool,
    detail: Value,
}

#[derive(Debug, Serialize)]
struct Report {
    seed: u64,
    passed: bool,
    checks: Vec<Check>,
}

fn check(suite: &'static str, name: impl Into<String>, passed: bool, detail: Value) -> Check {
    Check {
        suite,
        name: name.into(),
        passed,
        detail,
    }
}

fn all_params(max_n: u32) -> Vec<ChainParams> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        for m in 1..n {
            for r in 0..=n {
                for k in 1..=m.min(n - m) {
                    out.push(ChainParams::new(n, m, r, k).expect("enumerated valid"));
                }
            }
        }
    }
    out
}

fn float_sample() -> Vec<ChainParams> {
    [
        (50, 25, 25, 5),
        (200, 80, 90, 10),
        (300, 100, 150, 30),
        (500, 250, 250, 10),
        (1000, 500, 500, 20),
        (1000, 300, 400, 50),
    ]
    .into_iter()
    .map(|(n, m, r, k)| ChainParams::new(n, m, r, k).expect("valid sample"))
    .collect()
}

fn family(triple: RatioTriple, ns: impl IntoIterator<Item = u32>) -> Result<Vec<ChainParams>, CliError> {
    ns.into_iter().map(|n| triple.instantiate(n).map_err(CliError::from)).collect()
}

fn spectral_suite() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();

    let mut nonzero = Vec::new();
    let mut scanned = 0usize;
    let mut worst_decomposition = 0.0f64;
    for params in all_params(EXACT_SCAN_MAX_N) {
        let kernel = build_kernel_exact(params)?;
        for which in [Eigen::First, Eigen::Second] {
            if let Ok(residual) = verify_eigen_identity_exact(&kernel, which) {
                scanned += 1;
                if !residual.is_zero() {
                    nonzero.push(format!("{params} {which:?}"));
                }
            }
        }
        if let Ok(residual) = s1_squared_decomposition_check(params) {
            worst_decomposition = worst_decomposition.max(residual);
        }
    }
    checks.push(check(
        "spectral",
        format!("exact eigen identities, n <= {EXACT_SCAN_MAX_N}"),
        nonzero.is_empty(),
        json!({ "identities": scanned, "nonzero": nonzero }),
    ));
    checks.push(check(
        "spectral",
        "s1^2 decomposition",
        worst_decomposition <= DECOMPOSITION_TOL,
        json!({ "max_residual": worst_decomposition, "tolerance": DECOMPOSITION_TOL }),
    ));

    let mut worst = 0.0f64;
    for params in float_sample() {
        let kernel = build_kernel(params)?;
        for which in [Eigen::First, Eigen::Second] {
            worst = worst.max(verify_eigen_identity(&kernel, which)?);
        }
    }
    checks.push(check(
        "spectral",
        "float eigen identities",
        worst <= FLOAT_EIGEN_TOL,
        json!({ "max_residual": worst, "tolerance": FLOAT_EIGEN_TOL }),
    ));

    let triple = RatioTriple::new(0.02, 0.5, 0.5);
    let report = lemma_checks(&family(triple, (1..=20).map(|i| 50 * i))?)?;
    let power = report.max_scaled_power.unwrap_or(f64::INFINITY);
    checks.push(check(
        "spectral",
        "lemma scaling (0.02, 0.5, 0.5)",
        report.all_defects_nonnegative
            && report.max_scaled_defect <= SCALED_DEFECT_BOUND
            && power <= SCALED_POWER_BOUND,
        json!({
            "defects_nonnegative": report.all_defects_nonnegative,
            "max_scaled_defect": report.max_scaled_defect,
            "max_scaled_power": power,
        }),
    ));
    Ok(checks)
}

fn coupling_suite(seed: u64, trials: usize) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let instances = [
        (6, 3, 3, 1, 2, 1),
        (20, 10, 10, 3, 5, 4),
        (40, 15, 20, 5, 9, 8),
        (60, 30, 30, 7, 15, 14),
        (100, 50, 50, 5, 25, 24),
    ];

    let mut mismatched = Vec::new();
    for &(n, m, r, k, x, y) in &instances {
        let params = ChainParams::new(n, m, r, k)?;
        let law = difference_law_exact(CoupledState::new(params, x, y)?);
        if law != adjacent_difference_law(params) {
            mismatched.push(params.to_string());
        }
    }
    checks.push(check(
        "coupling",
        "exact one-step law for adjacent states",
        mismatched.is_empty(),
        json!({ "instances": instances.len(), "mismatched": mismatched }),
    ));

    for &(n, m, r, k, x, y) in &instances {
        let params = ChainParams::new(n, m, r, k)?;
        let est = contraction_estimate(params, x, y, 1, trials, seed)?;
        checks.push(check(
            "coupling",
            format!("contraction {params}"),
            est.agrees_with(est.coefficient, SIGMAS),
            json!({
                "mean": est.mean,
                "std_error": est.std_error,
                "coefficient": est.coefficient,
                "trials": trials,
            }),
        ));
    }
    Ok(checks)
}

fn llt_suite() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let ns: Vec<u32> = (1..=20).map(|i| 100 * i).collect();
    for triple in [RatioTriple::new(0.02, 0.5, 0.5), RatioTriple::new(0.10, 0.4, 0.4)] {
        let report = llt_decay_check(triple, &ns)?;
        checks.push(check(
            "llt",
            format!("sqrt(n) TV ({}, {}, {})", triple.k, triple.r, triple.m),
            report.bounded(),
            json!({ "last": report.last_scaled(), "median": report.median_scaled() }),
        ));
        let norm = normalizer_check(triple, &ns)?;
        checks.push(check(
            "llt",
            format!("sqrt(n) |N - 1| ({}, {}, {})", triple.k, triple.r, triple.m),
            norm.max_scaled() <= NORMALIZER_BOUND,
            json!({ "max": norm.max_scaled(), "bound": NORMALIZER_BOUND }),
        ));
    }
    Ok(checks)
}

pub fn run(args: &VerifyArgs) -> Result<(), CliError> {
    if args.trials < 2 {
        return Err(CliError::Invalid("need at least two trials".into()));
    }
    let mut checks = Vec::new();
    if matches!(args.suite, Suite::Spectral | Suite::All) {
        checks.extend(spectral_suite()?);
    }
    if matches!(args.suite, Suite::Coupling | Suite::All) {
        checks.extend(coupling_suite(args.seed, args.trials)?);
    }
    if matches!(args.suite, Suite::Llt | Suite::All) {
        checks.extend(llt_suite()?);
    }
    let report = Report {
        seed: args.seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    emit(args.output.as_ref(), &text)?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Failed)
    }
}
