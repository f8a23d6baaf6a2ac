use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{stationary_pmf, ChainParams, Kernel, TransitionKernel};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::spectral::{classify, t_n, Regime};

/// Float crossings are accepted at `d(t) <= epsilon + CROSSING_TOL`.
///
/// Table cells are integers; a rounding overshoot of order 1e-15 at an exact
/// tie must not move a cell by one step.
pub const CROSSING_TOL: f64 = 1e-12;

/// Iteration cap outside the generic regime, and the floor inside it.
pub const DEFAULT_CAP: usize = 1000;

/// Which starting states the worst case is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartSet {
    /// Every state; the definitional supremum.
    #[default]
    All,
    /// Only `lo` and `hi`. Cheaper, but approximate.
    Extremes,
}

impl StartSet {
    pub(crate) fn indices(self, size: usize) -> Vec<usize> {
        match self {
            StartSet::All => (0..size).collect(),
            StartSet::Extremes if size > 1 => vec![0, size - 1],
            StartSet::Extremes => vec![0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingOptions {
    pub epsilon: f64,
    /// `None` selects [`default_cap`].
    pub cap: Option<usize>,
    pub starts: StartSet,
}

impl MixingOptions {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            cap: None,
            starts: StartSet::All,
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = Some(cap);
        self
    }

    pub fn with_starts(mut self, starts: StartSet) -> Self {
        self.starts = starts;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidEpsilon(self.epsilon.to_string()));
        }
        if self.cap == Some(0) {
            return Err(Error::InvalidParams("cap must be at least 1".into()));
        }
        Ok(())
    }

    pub(crate) fn resolved_cap(&self, params: ChainParams) -> usize {
        self.cap.unwrap_or_else(|| default_cap(params))
    }
}

/// `max(1000, ceil(10 t_n))` for generic instances, 1000 otherwise.
pub fn default_cap(params: ChainParams) -> usize {
    match t_n(params) {
        Ok(t) if classify(params) == Regime::Generic => DEFAULT_CAP.max((10.0 * t).ceil() as usize),
        _ => DEFAULT_CAP,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixingOutcome<W = f64> {
    Mixed(usize),
    /// Structural: `k = m = n - m` with at least two states.
    NonMixing,
    /// The cap was reached first; `d_at_cap` tells how far off it was.
    Inconclusive { d_at_cap: W },
}

/// Worst-case distance to stationarity `d(t)` for `t = 0, 1, ...` up to the
/// first epsilon crossing.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingCurve<W = f64> {
    pub params: ChainParams,
    pub epsilon: f64,
    pub cap: usize,
    pub starts: StartSet,
    /// Empty for structurally non-mixing chains.
    pub d: Vec<W>,
    /// Argmax starting state per step (lowest state on ties).
    pub worst_start: Vec<u32>,
    pub outcome: MixingOutcome<W>,
}

impl<W> MixingCurve<W> {
    pub fn t_mix(&self) -> Option<usize> {
        match self.outcome {
            MixingOutcome::Mixed(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_non_mixing(&self) -> bool {
        matches!(self.outcome, MixingOutcome::NonMixing)
    }
}

impl MixingCurve<f64> {
    /// First recorded `t` with `d(t) <= threshold + CROSSING_TOL`.
    pub fn first_below(&self, threshold: f64) -> Option<usize> {
        self.d.iter().position(|&v| v <= threshold + CROSSING_TOL)
    }

    /// Largest increase `d(t + 1) - d(t)`; nonpositive for a monotone curve.
    pub fn monotonicity_defect(&self) -> f64 {
        self.d
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_monotone(&self) -> bool {
        self.d.len() < 2 || self.monotonicity_defect() <= CROSSING_TOL
    }
}

pub(crate) fn non_mixing_curve<W>(params: ChainParams, options: &MixingOptions, cap: usize) -> MixingCurve<W> {
    MixingCurve {
        params,
        epsilon: options.epsilon,
        cap,
        starts: options.starts,
        d: Vec::new(),
        worst_start: Vec::new(),
        outcome: MixingOutcome::NonMixing,
    }
}

pub(crate) fn structurally_non_mixing(params: ChainParams) -> bool {
    params.is_full_swap() && params.state_space().size() > 1
}

fn half_l1(row: &[f64], pi: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for (a, b) in row.iter().zip(pi) {
        acc.add((a - b).abs());
    }
    0.5 * acc.value()
}

/// `next = cur * P` for one dense row, touching only the band of each
/// nonzero entry.
fn step_row(kernel: &TransitionKernel, cur: &[f64], next: &mut [f64]) {
    next.fill(0.0);
    for (z, &w) in cur.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let band = kernel.band(z);
        let src = &kernel.row_slice(z)[band.clone()];
        for (dst, &p) in next[band].iter_mut().zip(src) {
            *dst += w * p;
        }
    }
}

/// Evolves every selected point mass at once and records the worst distance
/// to stationarity until it drops to epsilon.
pub fn worst_case_curve(kernel: &TransitionKernel, options: &MixingOptions) -> Result<MixingCurve> {
    options.validate()?;
    let params = kernel.params();
    let cap = options.resolved_cap(params);
    if structurally_non_mixing(params) {
        return Ok(non_mixing_curve(params, options, cap));
    }

    let space = kernel.space();
    let size = space.size();
    let pi = stationary_pmf(params);
    let pi = pi.weights();
    let starts = options.starts.indices(size);

    let mut cur = vec![0.0; starts.len() * size];
    for (row, &s) in cur.chunks_mut(size).zip(&starts) {
        row[s] = 1.0;
    }
    let mut next = vec![0.0; cur.len()];

    let mut d = Vec::new();
    let mut worst_start = Vec::new();
    let threshold = options.epsilon + CROSSING_TOL;
    let mut t = 0;
    loop {
        let distances: Vec<f64> = cur.par_chunks(size).map(|row| half_l1(row, pi)).collect();
        let (arg, worst) = distances
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        d.push(worst);
        worst_start.push(space.state(starts[arg]));
        if worst <= threshold {
            return Ok(MixingCurve {
                params,
                epsilon: options.epsilon,
                cap,
                starts: options.starts,
                d,
                worst_start,
                outcome: MixingOutcome::Mixed(t),
            });
        }
        if t == cap {
            return Ok(MixingCurve {
                params,
                epsilon: options.epsilon,
                cap,
                starts: options.starts,
                d,
                worst_start,
                outcome: MixingOutcome::Inconclusive { d_at_cap: worst },
            });
        }
        next.par_chunks_mut(size)
            .zip(cur.par_chunks(size))
            .for_each(|(dst, src)| step_row(kernel, src, dst));
        std::mem::swap(&mut cur, &mut next);
        t += 1;
    }
}

/// Convenience wrapper: build the kernel and run the curve over all starts.
pub fn mixing_time(params: ChainParams, epsilon: f64) -> Result<MixingCurve> {
    let kernel = crate::chain::build_kernel(params)?;
    worst_case_curve(&kernel, &MixingOptions::new(epsilon))
}
