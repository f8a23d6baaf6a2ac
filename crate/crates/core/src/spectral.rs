//! Closed-form spectral quantities of the chain.
//!
//! The first two right eigenfunctions are
//!
//! ```text
//! s1(x) = 1 - n x / (r m)
//! s2(x) = 1 - 2(n-1) x / (r m) + (n-1)(n-2) x (x-1) / (r (r-1) m (m-1))
//! ```
//!
//! with eigenvalues
//!
//! ```text
//! lambda1 = 1 - n k / (m (n-m))
//! lambda2 = 1 - 2(n-1) k / (m (n-m)) + (n-1)(n-2) k (k-1) / (m (m-1) (n-m) (n-m-1))
//! ```
//!
//! Everything is evaluated as an exact rational first and rounded once, so
//! `1 - nk/(m(n-m))` never loses digits to cancellation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::chain::{ChainParams, ExactKernel, Kernel, TransitionKernel};
use crate::error::{Error, Result};
use crate::numeric::{big_ratio, compensated_sum, ratio_to_f64};

/// Instances with `|lambda1| <= CRITICAL_CONSTANT / sqrt(n)` are classified critical.
pub const CRITICAL_CONSTANT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Generic,
    Critical,
    NonMixing,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Generic => "generic",
            Regime::Critical => "critical",
            Regime::NonMixing => "non-mixing",
        })
    }
}

/// Which eigenpair to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Eigen {
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub params: ChainParams,
    pub lambda1: f64,
    /// Undefined when `m = 1` or `n - m = 1`.
    pub lambda2: Option<f64>,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    /// Only in the generic regime.
    pub t_n: Option<f64>,
    pub q_n: Option<f64>,
    pub regime: Regime,
}

fn i(v: u32) -> i128 {
    v as i128
}

pub fn lambda1_exact(params: ChainParams) -> BigRational {
    let (n, m, k) = (i(params.n()), i(params.m()), i(params.k()));
    let denom = m * (n - m);
    big_ratio(denom - n * k, denom)
}

pub fn lambda2_exact(params: ChainParams) -> Option<BigRational> {
    let (n, m, k) = (i(params.n()), i(params.m()), i(params.k()));
    if m < 2 || n - m < 2 {
        return None;
    }
    let denom = m * (m - 1) * (n - m) * (n - m - 1);
    let numer = denom - 2 * (n - 1) * k * (m - 1) * (n - m - 1) + (n - 1) * (n - 2) * k * (k - 1);
    Some(big_ratio(numer, denom))
}

/// `s1` as `numerator(x) / denominator` with integer numerator.
fn s1_scaled(params: ChainParams, x: u32) -> Option<(i128, i128)> {
    let (n, m, r) = (i(params.n()), i(params.m()), i(params.r()));
    if r < 1 {
        return None;
    }
    Some((r * m - n * i(x), r * m))
}

fn s2_scaled(params: ChainParams, x: u32) -> Option<(i128, i128)> {
    let (n, m, r) = (i(params.n()), i(params.m()), i(params.r()));
    if r < 2 || m < 2 {
        return None;
    }
    let x = i(x);
    let denom = r * (r - 1) * m * (m - 1);
    let numer = denom - 2 * (n - 1) * (r - 1) * (m - 1) * x + (n - 1) * (n - 2) * x * (x - 1);
    Some((numer, denom))
}

/// Evaluations of the two eigenfunctions.
#[derive(Debug, Clone, Copy)]
pub struct EigenfunctionValues {
    params: ChainParams,
}

impl EigenfunctionValues {
    pub fn new(params: ChainParams) -> Self {
        Self { params }
    }

    pub fn s1_exact(&self, x: u32) -> Option<BigRational> {
        s1_scaled(self.params, x).map(|(a, b)| big_ratio(a, b))
    }

    /// Undefined when `r < 2` or `m < 2`.
    pub fn s2_exact(&self, x: u32) -> Option<BigRational> {
        s2_scaled(self.params, x).map(|(a, b)| big_ratio(a, b))
    }

    pub fn s1(&self, x: u32) -> Option<f64> {
        self.s1_exact(x).map(|v| ratio_to_f64(&v))
    }

    pub fn s2(&self, x: u32) -> Option<f64> {
        self.s2_exact(x).map(|v| ratio_to_f64(&v))
    }

    pub fn get(&self, which: Eigen, x: u32) -> Option<BigRational> {
        match which {
            Eigen::First => self.s1_exact(x),
            Eigen::Second => self.s2_exact(x),
        }
    }
}

/// `(b0, b1, b2)` with `s1^2 = b0 + b1 s1 + b2 s2`.
pub fn b_coefficients_exact(params: ChainParams) -> Result<[BigRational; 3]> {
    let (n, m, r) = (i(params.n()), i(params.m()), i(params.r()));
    if n < 3 {
        return Err(Error::UnsupportedSize(format!(
            "b-coefficients need n >= 3, got n = {n}"
        )));
    }
    if r < 1 {
        return Err(Error::Undefined("b-coefficients (r = 0)"));
    }
    let b0 = big_ratio((n - m) * (n - r), (n - 1) * r * m);
    let b1 = big_ratio(-(n - 2 * r) * (n - 2 * m), (n - 2) * r * m);
    let b2 = big_ratio(n * n * (r - 1) * (m - 1), (n - 1) * (n - 2) * r * m);
    Ok([b0, b1, b2])
}

/// Generic / critical / non-mixing classification of a single instance.
pub fn classify(params: ChainParams) -> Regime {
    if params.is_full_swap() {
        return Regime::NonMixing;
    }
    let lambda1 = lambda1_exact(params);
    if lambda1.is_zero() {
        return Regime::Critical;
    }
    let threshold = CRITICAL_CONSTANT / (params.n() as f64).sqrt();
    if ratio_to_f64(&lambda1).abs() <= threshold {
        Regime::Critical
    } else {
        Regime::Generic
    }
}

/// Predicted cutoff location `log n / (2 |log |lambda1||)`.
pub fn t_n(params: ChainParams) -> Result<f64> {
    let lambda1 = ratio_to_f64(&lambda1_exact(params));
    match classify(params) {
        Regime::NonMixing => Err(Error::NonMixing),
        Regime::Critical => Err(Error::CriticalRegime { lambda1 }),
        Regime::Generic => Ok((params.n() as f64).ln() / (2.0 * lambda1.abs().ln().abs())),
    }
}

/// `log n / |log |lambda2||`, or 1 when `lambda2 = 0`.
pub fn q_n(params: ChainParams) -> Result<f64> {
    let lambda2 = lambda2_exact(params).ok_or(Error::Undefined("lambda2"))?;
    if lambda2.is_zero() {
        return Ok(1.0);
    }
    let value = ratio_to_f64(&lambda2).abs();
    Ok((params.n() as f64).ln() / value.ln().abs())
}

pub fn eigen_data(params: ChainParams) -> Result<SpectralData> {
    let [b0, b1, b2] = b_coefficients_exact(params)?;
    let lambda2 = lambda2_exact(params).map(|v| ratio_to_f64(&v));
    Ok(SpectralData {
        params,
        lambda1: ratio_to_f64(&lambda1_exact(params)),
        lambda2,
        b0: ratio_to_f64(&b0),
        b1: ratio_to_f64(&b1),
        b2: ratio_to_f64(&b2),
        t_n: t_n(params).ok(),
        q_n: q_n(params).ok(),
        regime: classify(params),
    })
}

fn eigen_pair(which: Eigen, params: ChainParams) -> Result<(BigRational, EigenfunctionValues)> {
    let values = EigenfunctionValues::new(params);
    let lambda = match which {
        Eigen::First => {
            values.s1_exact(params.state_space().lo).ok_or(Error::Undefined("s1"))?;
            lambda1_exact(params)
        }
        Eigen::Second => {
            values.s2_exact(params.state_space().lo).ok_or(Error::Undefined("s2"))?;
            lambda2_exact(params).ok_or(Error::Undefined("lambda2"))?
        }
    };
    Ok((lambda, values))
}

/// `max_x |sum_y p(x, y) s(y) - lambda s(x)|` over the float kernel.
pub fn verify_eigen_identity(kernel: &TransitionKernel, which: Eigen) -> Result<f64> {
    let params = kernel.params();
    let (lambda, values) = eigen_pair(which, params)?;
    let lambda = ratio_to_f64(&lambda);
    let space = kernel.space();
    let s: Vec<f64> = space
        .states()
        .map(|y| ratio_to_f64(&values.get(which, y).expect("checked defined")))
        .collect();
    let mut worst = 0.0f64;
    for from in 0..space.size() {
        let row = kernel.row_slice(from);
        let band = kernel.band(from);
        let projected = compensated_sum(band.map(|to| row[to] * s[to]));
        worst = worst.max((projected - lambda * s[from]).abs());
    }
    Ok(worst)
}

/// Exact residual; zero exactly when the identity holds.
pub fn verify_eigen_identity_exact(kernel: &ExactKernel, which: Eigen) -> Result<BigRational> {
    let params = kernel.params();
    let (lambda, _) = eigen_pair(which, params)?;
    let scaled = |x: u32| match which {
        Eigen::First => s1_scaled(params, x),
        Eigen::Second => s2_scaled(params, x),
    };
    let space = kernel.space();
    let (s_num, s_den): (Vec<BigInt>, i128) = {
        let entries: Vec<(i128, i128)> = space.states().map(|y| scaled(y).expect("checked defined")).collect();
        let den = entries[0].1;
        (entries.into_iter().map(|(a, _)| BigInt::from(a)).collect(), den)
    };
    let d = BigInt::from(kernel.denominator());
    let lambda_num = lambda.numer().clone();
    let lambda_den = lambda.denom().clone();
    let mut worst = BigRational::zero();
    for from in 0..space.size() {
        let projected: BigInt = kernel
            .band(from)
            .map(|to| BigInt::from(kernel.numerator_at(from, to)) * &s_num[to])
            .sum();
        // sum_y N(x,y) S(y) / (D s_den) - (lam_num/lam_den) S(x) / s_den
        let numer = projected * &lambda_den - &lambda_num * &s_num[from] * &d;
        if !numer.is_zero() {
            let residual = BigRational::new(numer, d.clone() * BigInt::from(s_den) * &lambda_den).abs();
            if residual > worst {
                worst = residual;
            }
        }
    }
    Ok(worst)
}

/// `max_x |s1(x)^2 - (b0 + b1 s1(x) + b2 s2(x))|` in floats.
///
/// When `r = 1` or `m = 1`, `b2 = 0` and the `s2` term is dropped.
pub fn s1_squared_decomposition_check(params: ChainParams) -> Result<f64> {
    let [b0, b1, b2] = b_coefficients_exact(params)?;
    let (b0, b1, b2) = (ratio_to_f64(&b0), ratio_to_f64(&b1), ratio_to_f64(&b2));
    let values = EigenfunctionValues::new(params);
    let mut worst = 0.0f64;
    for x in params.state_space().states() {
        let s1 = values.s1(x).ok_or(Error::Undefined("s1"))?;
        let s2 = values.s2(x).unwrap_or(0.0);
        let residual = s1 * s1 - compensated_sum([b0, b1 * s1, b2 * s2]);
        worst = worst.max(residual.abs());
    }
    Ok(worst)
}

pub fn s1_squared_decomposition_check_exact(params: ChainParams) -> Result<BigRational> {
    let [b0, b1, b2] = b_coefficients_exact(params)?;
    let values = EigenfunctionValues::new(params);
    let mut worst = BigRational::zero();
    for x in params.state_space().states() {
        let s1 = values.s1_exact(x).ok_or(Error::Undefined("s1"))?;
        let s2 = values.s2_exact(x).unwrap_or_else(BigRational::zero);
        let residual = (&s1 * &s1 - (&b0 + &b1 * &s1 + &b2 * &s2)).abs();
        if residual > worst {
            worst = residual;
        }
    }
    Ok(worst)
}

/// `lambda1^2 - lambda2`, exactly.
pub fn spectral_gap_defect_exact(params: ChainParams) -> Option<BigRational> {
    let l1 = lambda1_exact(params);
    lambda2_exact(params).map(|l2| &l1 * &l1 - l2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaRow {
    pub params: ChainParams,
    /// `lambda1^2 - lambda2`.
    pub defect: f64,
    pub defect_nonnegative: bool,
    /// `n (lambda1^2 - lambda2)`.
    pub scaled_defect: f64,
    /// `n |lambda2|^{t_n}`; absent outside the generic regime.
    pub scaled_power: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub rows: Vec<LemmaRow>,
    pub all_defects_nonnegative: bool,
    pub max_scaled_defect: f64,
    pub max_scaled_power: Option<f64>,
    pub skipped: usize,
}

/// Scaling checks along a parameter sequence: `lambda1^2 - lambda2 >= 0`,
/// `n (lambda1^2 - lambda2)` and `n |lambda2|^{t_n}` (the latter skipped for
/// instances without a generic `t_n`).
pub fn lemma_checks(sequence: &[ChainParams]) -> Result<LemmaReport> {
    let mut rows = Vec::with_capacity(sequence.len());
    for &params in sequence {
        let defect = spectral_gap_defect_exact(params).ok_or(Error::Undefined("lambda2"))?;
        let n = params.n() as f64;
        let defect_f = ratio_to_f64(&defect);
        let (scaled_power, note) = match t_n(params) {
            Ok(t) => {
                let l2 = ratio_to_f64(&lambda2_exact(params).expect("defined above")).abs();
                let power = if l2 == 0.0 { 0.0 } else { (t * l2.ln()).exp() };
                (Some(n * power), None)
            }
            Err(e) => (None, Some(format!("lambda2^t_n check skipped: {e}"))),
        };
        rows.push(LemmaRow {
            params,
            defect: defect_f,
            defect_nonnegative: !defect.is_negative(),
            scaled_defect: n * defect_f,
            scaled_power,
            note,
        });
    }
    let max_scaled_power = rows
        .iter()
        .filter_map(|r| r.scaled_power)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    Ok(LemmaReport {
        all_defects_nonnegative: rows.iter().all(|r| r.defect_nonnegative),
        max_scaled_defect: rows.iter().map(|r| r.scaled_defect).fold(f64::NEG_INFINITY, f64::max),
        max_scaled_power,
        skipped: rows.iter().filter(|r| r.scaled_power.is_none()).count(),
        rows,
    })
}

/// Exact `lambda1` as a reduced fraction, handy for reports.
pub fn lambda1_fraction(params: ChainParams) -> (BigInt, BigInt) {
    let l = lambda1_exact(params);
    (l.numer().clone(), l.denom().clone())
}
