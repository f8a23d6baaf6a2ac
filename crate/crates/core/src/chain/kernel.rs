use std::ops::Range;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rayon::prelude::*;

use super::hypergeom::{hypergeom_law, hypergeom_pmf, hypergeom_pmf_exact};
use super::params::{ChainParams, StateSpace};
use super::prob::{ExactProbVector, ProbVector};
use crate::error::{Error, Result};
use crate::numeric::{binomial_small, Weight, EXACT_MAX_N};

/// Dense row-stochastic matrix over a chain's state space.
///
/// Implemented by the float [`TransitionKernel`] and the exact [`ExactKernel`].
pub trait Kernel: Sync {
    type W: Weight;

    fn params(&self) -> ChainParams;

    fn space(&self) -> StateSpace {
        self.params().state_space()
    }

    /// Entry `p(x, y)` by dense indices.
    fn entry_at(&self, from: usize, to: usize) -> Self::W;

    /// Dense column range that can be nonzero in row `from` (`|x - y| <= k`).
    fn band(&self, from: usize) -> Range<usize> {
        band_range(self.space(), self.params().k(), from)
    }
}

fn band_range(space: StateSpace, k: u32, from: usize) -> Range<usize> {
    let k = k as usize;
    let start = from.saturating_sub(k);
    let end = (from + k + 1).min(space.size());
    start..end
}

/// Float transition kernel, immutable after construction.
#[derive(Debug, Clone)]
pub struct TransitionKernel {
    params: ChainParams,
    space: StateSpace,
    entries: Vec<f64>,
}

impl TransitionKernel {
    pub fn size(&self) -> usize {
        self.space.size()
    }

    /// `p(x, y)` by state values; zero when either lies outside the space.
    pub fn entry(&self, x: u32, y: u32) -> f64 {
        match (self.space.index(x), self.space.index(y)) {
            (Ok(i), Ok(j)) => self.entries[i * self.size() + j],
            _ => 0.0,
        }
    }

    /// Row by dense index.
    pub fn row_slice(&self, from: usize) -> &[f64] {
        let s = self.size();
        &self.entries[from * s..(from + 1) * s]
    }

    pub fn row(&self, x: u32) -> Result<ProbVector> {
        let idx = self.space.index(x)?;
        Ok(ProbVector::from_parts(self.space, self.row_slice(idx).to_vec()))
    }
}

impl Kernel for TransitionKernel {
    type W = f64;

    fn params(&self) -> ChainParams {
        self.params
    }

    fn space(&self) -> StateSpace {
        self.space
    }

    fn entry_at(&self, from: usize, to: usize) -> f64 {
        self.entries[from * self.size() + to]
    }
}

fn row_weights(params: ChainParams, x: u32) -> Result<Vec<f64>> {
    let space = params.state_space();
    space.index(x)?;
    let (n, m, r, k) = (
        params.n() as u64,
        params.m() as u64,
        params.r() as u64,
        params.k() as u64,
    );
    let x64 = x as u64;
    let out_law = hypergeom_law(m, x64, k)?;
    let in_law = hypergeom_law(n - m, r - x64, k)?;
    let mut row = vec![0.0; space.size()];
    for (a, &pa) in out_law.iter().enumerate() {
        if pa == 0.0 {
            continue;
        }
        for (b, &pb) in in_law.iter().enumerate() {
            if pb == 0.0 {
                continue;
            }
            let y = x as i64 - a as i64 + b as i64;
            // Nonzero pairs always land inside the space.
            row[(y - space.lo as i64) as usize] += pa * pb;
        }
    }
    Ok(row)
}

/// Law of `x - H1 + H2` with `H1 ~ Hyp(m, x, k)` and `H2 ~ Hyp(n - m, r - x, k)`.
pub fn transition_row(params: ChainParams, x: u32) -> Result<ProbVector> {
    let weights = row_weights(params, x)?;
    ProbVector::new(params.state_space(), weights)
}

pub fn build_kernel(params: ChainParams) -> Result<TransitionKernel> {
    let space = params.state_space();
    let rows: Vec<Vec<f64>> = space
        .states()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|x| row_weights(params, x))
        .collect::<Result<_>>()?;
    Ok(TransitionKernel {
        params,
        space,
        entries: rows.concat(),
    })
}

/// `Hyp(n, r, m)` on the state space.
pub fn stationary_pmf(params: ChainParams) -> ProbVector {
    let space = params.state_space();
    let weights = space
        .states()
        .map(|j| {
            hypergeom_pmf(params.n() as u64, params.r() as u64, params.m() as u64, j as i64)
                .expect("validated parameters give valid hypergeometric bounds")
        })
        .collect();
    ProbVector::from_parts(space, weights)
}

pub fn stationary_pmf_exact(params: ChainParams) -> ExactProbVector {
    let space = params.state_space();
    let weights = space
        .states()
        .map(|j| {
            hypergeom_pmf_exact(params.n() as u64, params.r() as u64, params.m() as u64, j as i64)
                .expect("validated parameters give valid hypergeometric bounds")
        })
        .collect();
    ProbVector::from_parts(space, weights)
}

/// Exact kernel with a shared denominator `C(m, k) C(n - m, k)`.
///
/// Entries are `numerator(x, y) / denominator`; every numerator fits in
/// `u128` for `n <= 64`.
#[derive(Debug, Clone)]
pub struct ExactKernel {
    params: ChainParams,
    space: StateSpace,
    denominator: u128,
    numerators: Vec<u128>,
}

impl ExactKernel {
    pub fn size(&self) -> usize {
        self.space.size()
    }

    pub fn denominator(&self) -> u128 {
        self.denominator
    }

    pub fn numerator_at(&self, from: usize, to: usize) -> u128 {
        self.numerators[from * self.size() + to]
    }

    pub fn numerator_row(&self, from: usize) -> &[u128] {
        let s = self.size();
        &self.numerators[from * s..(from + 1) * s]
    }

    pub fn entry(&self, x: u32, y: u32) -> BigRational {
        match (self.space.index(x), self.space.index(y)) {
            (Ok(i), Ok(j)) => self.entry_at(i, j),
            _ => BigRational::from_integer(BigInt::from(0)),
        }
    }

    pub fn row(&self, x: u32) -> Result<ExactProbVector> {
        let idx = self.space.index(x)?;
        let weights = (0..self.size()).map(|j| self.entry_at(idx, j)).collect();
        Ok(ProbVector::from_parts(self.space, weights))
    }

    pub fn to_float(&self) -> TransitionKernel {
        let d = self.denominator as f64;
        TransitionKernel {
            params: self.params,
            space: self.space,
            entries: self.numerators.iter().map(|&v| v as f64 / d).collect(),
        }
    }
}

impl Kernel for ExactKernel {
    type W = BigRational;

    fn params(&self) -> ChainParams {
        self.params
    }

    fn space(&self) -> StateSpace {
        self.space
    }

    fn entry_at(&self, from: usize, to: usize) -> BigRational {
        BigRational::new(
            BigInt::from(self.numerator_at(from, to)),
            BigInt::from(self.denominator),
        )
    }
}

fn check_exact_size(params: ChainParams) -> Result<()> {
    if params.n() > EXACT_MAX_N {
        return Err(Error::BackendLimit {
            n: params.n(),
            max: EXACT_MAX_N,
        });
    }
    Ok(())
}

fn exact_row_numerators(params: ChainParams, x: u32) -> Result<Vec<u128>> {
    let space = params.state_space();
    space.index(x)?;
    let (n, m, r, k) = (params.n(), params.m(), params.r(), params.k() as i64);
    let x64 = x as i64;
    let out_counts: Vec<u128> = (0..=k)
        .map(|a| binomial_small(x, a) * binomial_small(m - x, k - a))
        .collect();
    let (red_right, white_right) = (r - x, n - m - (r - x));
    let in_counts: Vec<u128> = (0..=k)
        .map(|b| binomial_small(red_right, b) * binomial_small(white_right, k - b))
        .collect();
    let mut row = vec![0u128; space.size()];
    for (a, &ca) in out_counts.iter().enumerate() {
        if ca == 0 {
            continue;
        }
        for (b, &cb) in in_counts.iter().enumerate() {
            if cb == 0 {
                continue;
            }
            let y = x64 - a as i64 + b as i64;
            row[(y - space.lo as i64) as usize] += ca * cb;
        }
    }
    Ok(row)
}

fn exact_denominator(params: ChainParams) -> u128 {
    let k = params.k() as i64;
    binomial_small(params.m(), k) * binomial_small(params.n() - params.m(), k)
}

pub fn transition_row_exact(params: ChainParams, x: u32) -> Result<ExactProbVector> {
    check_exact_size(params)?;
    let denom = BigInt::from(exact_denominator(params));
    let weights = exact_row_numerators(params, x)?
        .into_iter()
        .map(|v| BigRational::new(BigInt::from(v), denom.clone()))
        .collect();
    ProbVector::new(params.state_space(), weights)
}

/// Exact kernel; available for `n <= 64`.
pub fn build_kernel_exact(params: ChainParams) -> Result<ExactKernel> {
    check_exact_size(params)?;
    let space = params.state_space();
    let mut numerators = Vec::with_capacity(space.size() * space.size());
    for x in space.states() {
        numerators.extend(exact_row_numerators(params, x)?);
    }
    Ok(ExactKernel {
        params,
        space,
        denominator: exact_denominator(params),
        numerators,
    })
}

/// Integer numerators `C(r, j) C(n - r, m - j)` of the stationary law and
/// their common denominator `C(n, m)`.
pub(crate) fn stationary_counts(params: ChainParams) -> (Vec<BigUint>, BigUint) {
    use crate::numeric::binomial_big;
    let (n, m, r) = (params.n() as u64, params.m() as u64, params.r() as u64);
    let counts = params
        .state_space()
        .states()
        .map(|j| {
            let j = j as u64;
            binomial_big(r, j) * binomial_big(n - r, m - j)
        })
        .collect();
    (counts, binomial_big(n, m))
}
