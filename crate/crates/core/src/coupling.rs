//! The shared-label coupling of two copies of the chain.
//!
//! Both copies number the balls of each urn so that red balls get the lowest
//! labels, then swap the same label sets. With left-urn red counts `x >= y`,
//! the left-urn draw splits into a common red prefix of `y` labels, a band of
//! `x - y` labels red only in the first copy, and the rest; the right urn
//! likewise has a common red prefix of `r - x` and a band of `x - y` red only
//! in the second copy. Each split is a pair of hypergeometric draws, so the
//! coupling runs on counts alone.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Hypergeometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{hypergeom_pmf_exact, hypergeom_support, ChainParams};
use crate::error::{Error, Result};
use crate::numeric::big_ratio;
use crate::spectral::t_n;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoupledState {
    pub params: ChainParams,
    pub x: u32,
    pub y: u32,
}

impl CoupledState {
    pub fn new(params: ChainParams, x: u32, y: u32) -> Result<Self> {
        let space = params.state_space();
        space.index(x)?;
        space.index(y)?;
        Ok(Self { params, x, y })
    }

    pub fn distance(&self) -> u32 {
        self.x.abs_diff(self.y)
    }

    pub fn coalesced(&self) -> bool {
        self.x == self.y
    }
}

/// The four overlap counts of one coupled swap, for `hi >= lo`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Overlaps {
    /// Left urn: common red prefix, then the band red only in the `hi` copy.
    left_common: u32,
    left_band: u32,
    /// Right urn: common red prefix, then the band red only in the `lo` copy.
    right_common: u32,
    right_band: u32,
}

impl Overlaps {
    fn apply(&self, hi: u32, lo: u32) -> (u32, u32) {
        let hi_next = hi - self.left_common - self.left_band + self.right_common;
        let lo_next = lo - self.left_common + self.right_common + self.right_band;
        (hi_next, lo_next)
    }
}

fn sample_hyp<R: Rng + ?Sized>(rng: &mut R, population: u32, successes: u32, draws: u32) -> u32 {
    if successes == 0 || draws == 0 {
        return 0;
    }
    if successes == population {
        return draws;
    }
    Hypergeometric::new(population as u64, successes as u64, draws as u64)
        .expect("valid hypergeometric shape")
        .sample(rng) as u32
}

fn sample_overlaps<R: Rng + ?Sized>(rng: &mut R, params: ChainParams, hi: u32, lo: u32) -> Overlaps {
    let (n, m, r, k) = (params.n(), params.m(), params.r(), params.k());
    let band = hi - lo;
    let left_common = sample_hyp(rng, m, lo, k);
    let left_band = sample_hyp(rng, m - lo, band, k - left_common);
    let right_red = r - hi;
    let right_common = sample_hyp(rng, n - m, right_red, k);
    let right_band = sample_hyp(rng, n - m - right_red, band, k - right_common);
    Overlaps {
        left_common,
        left_band,
        right_common,
        right_band,
    }
}

/// One coupled step. Each coordinate on its own is one chain step; equal
/// coordinates stay equal.
pub fn coupled_step<R: Rng + ?Sized>(state: CoupledState, rng: &mut R) -> CoupledState {
    let (hi, lo, swapped) = if state.x >= state.y {
        (state.x, state.y, false)
    } else {
        (state.y, state.x, true)
    };
    let (hi_next, lo_next) = sample_overlaps(rng, state.params, hi, lo).apply(hi, lo);
    let (x, y) = if swapped { (lo_next, hi_next) } else { (hi_next, lo_next) };
    CoupledState { x, y, ..state }
}

/// Per-trial generator: trial `i` is seeded with `seed ^ i`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ trial)
}

fn exact_law(population: u32, successes: u32, draws: u32) -> Vec<(u32, BigRational)> {
    let (lo, hi) = hypergeom_support(population as u64, successes as u64, draws as u64);
    (lo..=hi)
        .map(|j| {
            let p = hypergeom_pmf_exact(population as u64, successes as u64, draws as u64, j as i64)
                .expect("valid hypergeometric shape");
            (j as u32, p)
        })
        .filter(|(_, p)| !p.is_zero())
        .collect()
}

/// Exact joint law of the next coupled state, by enumerating the four
/// overlap counts.
pub fn coupled_step_law_exact(state: CoupledState) -> BTreeMap<(u32, u32), BigRational> {
    let params = state.params;
    let (n, m, r, k) = (params.n(), params.m(), params.r(), params.k());
    let (hi, lo, swapped) = if state.x >= state.y {
        (state.x, state.y, false)
    } else {
        (state.y, state.x, true)
    };
    let band = hi - lo;
    let right_red = r - hi;
    let mut law: BTreeMap<(u32, u32), BigRational> = BTreeMap::new();
    for (lc, p_lc) in exact_law(m, lo, k) {
        for (lb, p_lb) in exact_law(m - lo, band, k - lc) {
            for (rc, p_rc) in exact_law(n - m, right_red, k) {
                for (rb, p_rb) in exact_law(n - m - right_red, band, k - rc) {
                    let o = Overlaps {
                        left_common: lc,
                        left_band: lb,
                        right_common: rc,
                        right_band: rb,
                    };
                    let (hi_next, lo_next) = o.apply(hi, lo);
                    let key = if swapped { (lo_next, hi_next) } else { (hi_next, lo_next) };
                    let p = &p_lc * &p_lb * &p_rc * &p_rb;
                    *law.entry(key).or_insert_with(BigRational::zero) += p;
                }
            }
        }
    }
    law
}

/// Exact law of `X_1 - Y_1` after one coupled step.
pub fn difference_law_exact(state: CoupledState) -> BTreeMap<i64, BigRational> {
    let mut out: BTreeMap<i64, BigRational> = BTreeMap::new();
    for ((x, y), p) in coupled_step_law_exact(state) {
        *out.entry(x as i64 - y as i64).or_insert_with(BigRational::zero) += p;
    }
    out
}

/// The one-step law for adjacent states: `{-1: k^2 / (m (n-m)),
/// +1: (m-k)(n-m-k) / (m (n-m)), 0: rest}`.
pub fn adjacent_difference_law(params: ChainParams) -> BTreeMap<i64, BigRational> {
    let (n, m, k) = (params.n() as i64, params.m() as i64, params.k() as i64);
    let denom = m * (n - m);
    let down = big_ratio(k * k, denom);
    let up = big_ratio((m - k) * (n - m - k), denom);
    let stay = BigRational::from_integer(BigInt::from(1)) - &down - &up;
    [(-1, down), (0, stay), (1, up)]
        .into_iter()
        .filter(|(_, p)| !p.is_zero())
        .collect()
}

/// `1 - k (n - 2k) / (m (n - m))`.
pub fn contraction_coefficient(params: ChainParams) -> f64 {
    let (n, m, k) = (params.n() as f64, params.m() as f64, params.k() as f64);
    1.0 - k * (n - 2.0 * k) / (m * (n - m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionEstimate {
    pub params: ChainParams,
    pub x: u32,
    pub y: u32,
    pub t: usize,
    pub trials: usize,
    /// Monte-Carlo mean of `|X_t - Y_t|`.
    pub mean: f64,
    pub std_error: f64,
    pub coefficient: f64,
    /// `|x - y| * coefficient^t`.
    pub bound: f64,
}

impl ContractionEstimate {
    /// Whether the estimate is within `sigmas` standard errors of `target`.
    pub fn agrees_with(&self, target: f64, sigmas: f64) -> bool {
        (self.mean - target).abs() <= sigmas * self.std_error
    }

    pub fn below_bound(&self, sigmas: f64) -> bool {
        self.mean <= self.bound + sigmas * self.std_error
    }
}

pub fn contraction_estimate(
    params: ChainParams,
    x: u32,
    y: u32,
    t: usize,
    trials: usize,
    seed: u64,
) -> Result<ContractionEstimate> {
    if trials == 0 {
        return Err(Error::InvalidParams("need at least one trial".into()));
    }
    let start = CoupledState::new(params, x, y)?;
    let distances: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let mut state = start;
            for _ in 0..t {
                if state.coalesced() {
                    break;
                }
                state = coupled_step(state, &mut rng);
            }
            state.distance() as f64
        })
        .collect();
    let count = trials as f64;
    let mean = distances.iter().sum::<f64>() / count;
    let var = if trials > 1 {
        distances.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    let coefficient = contraction_coefficient(params);
    Ok(ContractionEstimate {
        params,
        x,
        y,
        t,
        trials,
        mean,
        std_error: (var / count).sqrt(),
        coefficient,
        bound: start.distance() as f64 * coefficient.powi(t as i32),
    })
}

/// Windows around stationarity: `I_n(kappa) = {x : |x - rm/n| <= kappa sqrt(n)}`
/// and `F_n(kappa) = {(x, y) in I_n^2 : |x - y| <= sqrt(n) / kappa^3}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaSets {
    pub kappa: f64,
    pub center: f64,
    pub sqrt_n: f64,
}

impl KappaSets {
    pub fn new(params: ChainParams, kappa: f64) -> Result<Self> {
        if kappa.is_nan() || kappa < 1.0 {
            return Err(Error::InvalidParams(format!("need kappa >= 1, got {kappa}")));
        }
        Ok(Self {
            kappa,
            center: params.stationary_mean(),
            sqrt_n: (params.n() as f64).sqrt(),
        })
    }

    pub fn in_window(&self, x: u32) -> bool {
        (x as f64 - self.center).abs() <= self.kappa * self.sqrt_n
    }

    pub fn in_target(&self, x: u32, y: u32) -> bool {
        self.in_window(x) && self.in_window(y) && x.abs_diff(y) as f64 <= self.sqrt_n / self.kappa.powi(3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauReport {
    pub params: ChainParams,
    pub kappa: f64,
    pub cap: usize,
    pub t_n: f64,
    /// Hitting time per trial; `None` when censored at the cap.
    pub times: Vec<Option<usize>>,
}

impl TauReport {
    pub fn censored(&self) -> usize {
        self.times.iter().filter(|t| t.is_none()).count()
    }

    /// Empirical `P(tau > t_n + kappa)`; censored trials count as exceeding.
    pub fn tail(&self) -> f64 {
        let threshold = self.t_n + self.kappa;
        let over = self
            .times
            .iter()
            .filter(|t| t.is_none_or(|t| t as f64 > threshold))
            .count();
        over as f64 / self.times.len() as f64
    }

    /// Median hitting time, treating censored trials as `+inf`.
    pub fn median(&self) -> Option<usize> {
        let mut sorted: Vec<usize> = self.times.iter().map(|t| t.unwrap_or(usize::MAX)).collect();
        sorted.sort_unstable();
        sorted.get(sorted.len() / 2).copied().filter(|&t| t != usize::MAX)
    }
}

/// Runs coupled copies from `(x, y)` until they enter `F_n(kappa)`.
pub fn tau_hitting_time(
    params: ChainParams,
    x: u32,
    y: u32,
    kappa: f64,
    trials: usize,
    cap: usize,
    seed: u64,
) -> Result<TauReport> {
    if trials == 0 {
        return Err(Error::InvalidParams("need at least one trial".into()));
    }
    let sets = KappaSets::new(params, kappa)?;
    let prediction = t_n(params)?;
    let start = CoupledState::new(params, x, y)?;
    let times = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let mut state = start;
            for t in 0..=cap {
                if sets.in_target(state.x, state.y) {
                    return Some(t);
                }
                if t < cap {
                    state = coupled_step(state, &mut rng);
                }
            }
            None
        })
        .collect();
    Ok(TauReport {
        params,
        kappa,
        cap,
        t_n: prediction,
        times,
    })
}

/// Smallest `kappa >= 2` from which `kappa^4 c^kappa <= 1 / kappa^2` holds
/// for every larger `kappa`, where `c` is the limiting contraction
/// coefficient. `None` when `c >= 1`.
///
/// `kappa = 1` always satisfies the inequality and is excluded.
pub fn smallest_kappa(contraction: f64) -> Option<u32> {
    let c = contraction.abs();
    if c >= 1.0 {
        return None;
    }
    if c == 0.0 {
        return Some(2);
    }
    let log_c = c.ln();
    // kappa^6 c^kappa decreases past 6 / |ln c|.
    let peak = 6.0 / log_c.abs();
    let holds = |kappa: u32| 6.0 * (kappa as f64).ln() + kappa as f64 * log_c <= 0.0;
    let mut last_failure = 1;
    let mut kappa = 2u32;
    while (kappa as f64) <= peak || !holds(kappa) {
        if !holds(kappa) {
            last_failure = kappa;
        }
        kappa = kappa.checked_add(1)?;
    }
    Some(last_failure + 1)
}

/// One-step marginal counts of both coordinates from `(x, y)` over `samples`
/// independent coupled steps, indexed densely from the state-space floor.
pub fn marginal_counts(params: ChainParams, x: u32, y: u32, samples: usize, seed: u64) -> Result<(Vec<u64>, Vec<u64>)> {
    let start = CoupledState::new(params, x, y)?;
    let space = params.state_space();
    let mut rng = trial_rng(seed, 0);
    let mut first = vec![0u64; space.size()];
    let mut second = vec![0u64; space.size()];
    for _ in 0..samples {
        let next = coupled_step(start, &mut rng);
        first[(next.x - space.lo) as usize] += 1;
        second[(next.y - space.lo) as usize] += 1;
    }
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratios::RatioTriple;

    fn p(n: u32, m: u32, r: u32, k: u32) -> ChainParams {
        ChainParams::new(n, m, r, k).unwrap()
    }

    #[test]
    fn adjacent_law_small_case() {
        let params = p(6, 3, 3, 1);
        let state = CoupledState::new(params, 2, 1).unwrap();
        let law = difference_law_exact(state);
        assert_eq!(law[&-1], big_ratio(1, 9));
        assert_eq!(law[&0], big_ratio(4, 9));
        assert_eq!(law[&1], big_ratio(4, 9));
        assert_eq!(law, adjacent_difference_law(params));
    }

    #[test]
    fn coalescence_is_absorbing() {
        let params = p(40, 20, 20, 5);
        let mut rng = trial_rng(7, 0);
        let mut state = CoupledState::new(params, 9, 9).unwrap();
        for _ in 0..200 {
            state = coupled_step(state, &mut rng);
            assert!(state.coalesced());
        }
        let law = coupled_step_law_exact(state);
        assert!(law.keys().all(|(a, b)| a == b));
    }

    #[test]
    fn contraction_small_case() {
        let est = contraction_estimate(p(6, 3, 3, 1), 2, 1, 1, 100_000, 1).unwrap();
        assert!(est.agrees_with(5.0 / 9.0, 3.0), "{est:?}");
        let same = contraction_estimate(p(100, 50, 50, 5), 20, 20, 10, 100, 1).unwrap();
        assert_eq!(same.mean, 0.0);
        let far = contraction_estimate(p(100, 50, 50, 5), 25, 20, 10, 20_000, 3).unwrap();
        assert!(far.below_bound(3.0), "{far:?}");
    }

    #[test]
    fn deterministic_by_seed() {
        let a = contraction_estimate(p(60, 30, 30, 3), 0, 30, 5, 500, 99).unwrap();
        let b = contraction_estimate(p(60, 30, 30, 3), 0, 30, 5, 500, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exact_law_marginals_are_chain_rows() {
        use crate::chain::transition_row_exact;
        let params = p(12, 5, 6, 2);
        let state = CoupledState::new(params, 4, 1).unwrap();
        let law = coupled_step_law_exact(state);
        let row_x = transition_row_exact(params, 4).unwrap();
        let row_y = transition_row_exact(params, 1).unwrap();
        for z in params.state_space().states() {
            let px: BigRational = law.iter().filter(|((a, _), _)| *a == z).map(|(_, p)| p.clone()).sum();
            let py: BigRational = law.iter().filter(|((_, b), _)| *b == z).map(|(_, p)| p.clone()).sum();
            assert_eq!(px, row_x.get(z as i64));
            assert_eq!(py, row_y.get(z as i64));
        }
    }

    #[test]
    fn tau_starts_inside() {
        let params = p(400, 200, 200, 8);
        let report = tau_hitting_time(params, 100, 100, 20.0, 50, 10, 5).unwrap();
        assert!(report.times.iter().all(|t| *t == Some(0)));
        assert_eq!(report.tail(), 0.0);
    }

    #[test]
    fn kappa_helper() {
        let c = RatioTriple::new(0.02, 0.5, 0.5).contraction_limit();
        let kappa = smallest_kappa(c).unwrap();
        let f = |k: u32| 6.0 * (k as f64).ln() + k as f64 * c.ln();
        assert!(f(kappa) <= 0.0 && f(kappa - 1) > 0.0);
        assert_eq!(kappa, 461);
        assert_eq!(smallest_kappa(1.0), None);
    }
}
