use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::{worst_case_curve, MixingCurve, MixingOptions, MixingOutcome};
use crate::chain::{build_kernel, ChainParams};
use crate::error::{Error, Result};
use crate::ratios::RatioTriple;
use crate::spectral::{classify, lambda1_exact, q_n, t_n, Regime};
use crate::numeric::ratio_to_f64;

fn mixed_curve(params: ChainParams, epsilon: f64) -> Result<MixingCurve> {
    let curve = worst_case_curve(&build_kernel(params)?, &MixingOptions::new(epsilon))?;
    match curve.outcome {
        MixingOutcome::Mixed(_) => Ok(curve),
        MixingOutcome::NonMixing => Err(Error::NonMixing),
        MixingOutcome::Inconclusive { d_at_cap } => Err(Error::Inconclusive { cap: curve.cap, d_at_cap }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffRow {
    pub n: u32,
    pub t_mix: usize,
    /// `t_mix(1 - epsilon)`, read off the same curve.
    pub t_mix_complement: usize,
    pub t_n: f64,
    /// `t_mix - t_n`.
    pub offset: f64,
    /// `t_mix(epsilon) / t_mix(1 - epsilon)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffReport {
    pub triple: RatioTriple,
    pub epsilon: f64,
    pub rows: Vec<CutoffRow>,
}

impl CutoffReport {
    /// `max - min` of `t_mix - t_n` over the sequence.
    pub fn offset_range(&self) -> f64 {
        let (lo, hi) = self
            .rows
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.offset), hi.max(r.offset)));
        hi - lo
    }

    /// Whether the window ratio shrank from the first size to the last.
    pub fn ratio_shrinks(&self) -> bool {
        match (self.rows.first(), self.rows.last()) {
            (Some(a), Some(b)) => self.rows.len() > 1 && b.ratio < a.ratio,
            _ => false,
        }
    }
}

/// Mixing times against the predicted cutoff location along a fixed-ratio
/// family. Only meaningful in the generic regime.
pub fn cutoff_diagnostics(triple: RatioTriple, ns: &[u32], epsilon: f64) -> Result<CutoffReport> {
    if triple.regime() != Regime::Generic {
        return Err(Error::Regime(format!(
            "ratios ({}, {}, {}) are {}; use the bounded-regime check",
            triple.k,
            triple.r,
            triple.m,
            triple.regime()
        )));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidEpsilon(format!("{epsilon} (the window needs epsilon < 1/2)")));
    }
    let rows = ns
        .par_iter()
        .map(|&n| {
            let params = triple.instantiate(n)?;
            let prediction = t_n(params)?;
            let curve = mixed_curve(params, epsilon)?;
            let t_mix = curve.t_mix().expect("mixed");
            let t_mix_complement = curve.first_below(1.0 - epsilon).expect("d(t_mix) <= 1 - epsilon");
            Ok(CutoffRow {
                n,
                t_mix,
                t_mix_complement,
                t_n: prediction,
                offset: t_mix as f64 - prediction,
                ratio: t_mix as f64 / t_mix_complement.max(1) as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CutoffReport { triple, epsilon, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundedRow {
    pub n: u32,
    pub t_mix: usize,
    pub lambda1: f64,
    pub q_n: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundedReport {
    pub triple: RatioTriple,
    pub epsilon: f64,
    pub rows: Vec<BoundedRow>,
}

impl BoundedReport {
    pub fn min(&self) -> Option<usize> {
        self.rows.iter().map(|r| r.t_mix).min()
    }

    pub fn max(&self) -> Option<usize> {
        self.rows.iter().map(|r| r.t_mix).max()
    }

    /// Every mixing time lies in `lo..=hi`.
    pub fn within(&self, lo: usize, hi: usize) -> bool {
        self.rows.iter().all(|r| (lo..=hi).contains(&r.t_mix))
    }
}

/// Mixing times along a critical family, where they should stay bounded.
///
/// Accepts ratios that are critical in the limit (`gamma = h(1 - h)`), and
/// also near-critical families whose every instance in `ns` classifies as
/// critical on its own.
pub fn bounded_regime_check(triple: RatioTriple, ns: &[u32], epsilon: f64) -> Result<BoundedReport> {
    let params: Vec<ChainParams> = ns.iter().map(|&n| triple.instantiate(n)).collect::<Result<_>>()?;
    let critical = triple.regime() == Regime::Critical
        || (!params.is_empty() && params.iter().all(|&p| classify(p) == Regime::Critical));
    if !critical {
        return Err(Error::Regime(format!(
            "ratios ({}, {}, {}) are {}; use cutoff diagnostics",
            triple.k,
            triple.r,
            triple.m,
            triple.regime()
        )));
    }
    let rows = params
        .par_iter()
        .map(|&p| {
            let curve = mixed_curve(p, epsilon)?;
            Ok(BoundedRow {
                n: p.n(),
                t_mix: curve.t_mix().expect("mixed"),
                lambda1: ratio_to_f64(&lambda1_exact(p)),
                q_n: q_n(p).ok(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundedReport { triple, epsilon, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_small_sequence() {
        let report = cutoff_diagnostics(RatioTriple::new(0.02, 0.5, 0.5), &[50, 100], 0.01).unwrap();
        assert_eq!(report.rows[0].t_mix, 68);
        assert_eq!(report.rows[1].t_mix, 72);
        assert!((report.rows[0].t_n - 23.46).abs() < 0.01);
        assert!(report.offset_range() <= 3.0);
        assert!(report.ratio_shrinks());
    }

    #[test]
    fn refuses_wrong_regime() {
        let critical = RatioTriple::new(0.25, 0.5, 0.5);
        assert!(matches!(cutoff_diagnostics(critical, &[100], 0.01), Err(Error::Regime(_))));
        let generic = RatioTriple::new(0.02, 0.5, 0.5);
        assert!(matches!(bounded_regime_check(generic, &[100], 0.01), Err(Error::Regime(_))));
    }

    #[test]
    fn bounded_examples() {
        let report = bounded_regime_check(RatioTriple::new(0.25, 0.5, 0.5), &[52, 100, 200], 0.01).unwrap();
        assert!(report.within(2, 3));
        let near = RatioTriple::new(0.24, 0.5, 0.5);
        assert_eq!(bounded_regime_check(near, &[250], 0.01).unwrap().rows[0].t_mix, 3);
        assert_eq!(bounded_regime_check(near, &[50], 0.01).unwrap().rows[0].t_mix, 2);
    }
}
