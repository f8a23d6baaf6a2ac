use blmix::chain::{build_kernel, build_kernel_exact, ChainParams};
use blmix::mixing::{worst_case_curve, worst_case_curve_exact, MixingOptions, MixingOutcome, StartSet};
use blmix::numeric::ratio_to_f64;
use blmix::spectral::{classify, lambda1_exact, lambda2_exact, q_n, t_n, Regime};
use serde::Serialize;

use crate::{check_epsilon, Backend, CliError, MixArgs};

#[derive(Debug, Serialize)]
struct ParamsJson {
    n: u32,
    m: u32,
    r: u32,
    k: u32,
}

#[derive(Debug, Serialize)]
struct MixReport {
    params: ParamsJson,
    epsilon: f64,
    t_mix: Option<usize>,
    non_mixing: bool,
    t_n: Option<f64>,
    q_n: Option<f64>,
    lambda1: f64,
    lambda2: Option<f64>,
    regime: Regime,
    backend: &'static str,
    starts: StartSet,
    /// Worst-case distance at the cap when no crossing was found.
    #[serde(skip_serializing_if = "Option::is_none")]
    d_at_cap: Option<f64>,
}

pub fn run(args: &MixArgs) -> Result<(), CliError> {
    check_epsilon(args.epsilon)?;
    let params = ChainParams::new(args.n, args.m, args.r, args.k)?;
    let starts = if args.extremes { StartSet::Extremes } else { StartSet::All };
    let mut options = MixingOptions::new(args.epsilon).with_starts(starts);
    if let Some(cap) = args.cap {
        if cap == 0 {
            return Err(CliError::Invalid("cap must be at least 1".into()));
        }
        options = options.with_cap(cap);
    }

    let (outcome, cap, backend) = match args.backend {
        Backend::Float => {
            let curve = worst_case_curve(&build_kernel(params)?, &options)?;
            (curve.outcome, curve.cap, "float")
        }
        Backend::Exact => {
            let curve = worst_case_curve_exact(&build_kernel_exact(params)?, &options)?;
            let outcome = match curve.outcome {
                MixingOutcome::Mixed(t) => MixingOutcome::Mixed(t),
                MixingOutcome::NonMixing => MixingOutcome::NonMixing,
                MixingOutcome::Inconclusive { d_at_cap } => MixingOutcome::Inconclusive {
                    d_at_cap: ratio_to_f64(&d_at_cap),
                },
            };
            (outcome, curve.cap, "exact")
        }
    };

    let report = MixReport {
        params: ParamsJson {
            n: params.n(),
            m: params.m(),
            r: params.r(),
            k: params.k(),
        },
        epsilon: args.epsilon,
        t_mix: match outcome {
            MixingOutcome::Mixed(t) => Some(t),
            _ => None,
        },
        non_mixing: matches!(outcome, MixingOutcome::NonMixing),
        t_n: t_n(params).ok(),
        q_n: q_n(params).ok(),
        lambda1: ratio_to_f64(&lambda1_exact(params)),
        lambda2: lambda2_exact(params).map(|v| ratio_to_f64(&v)),
        regime: classify(params),
        backend,
        starts,
        d_at_cap: match outcome {
            MixingOutcome::Inconclusive { d_at_cap } => Some(d_at_cap),
            _ => None,
        },
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(d) = report.d_at_cap {
        return Err(CliError::Inconclusive(format!("no crossing within {cap} steps (d = {d:e})")));
    }
    Ok(())
}
