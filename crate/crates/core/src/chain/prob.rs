use num_rational::BigRational;

use super::params::StateSpace;
use crate::error::{Error, Result};
use crate::numeric::Weight;

/// A probability distribution over a [`StateSpace`].
///
/// `W = f64` is the float backend (weights sum to one within `1e-12`);
/// `W = BigRational` is the exact backend (weights sum to exactly one).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector<W = f64> {
    space: StateSpace,
    weights: Vec<W>,
}

pub type ExactProbVector = ProbVector<BigRational>;

impl<W: Weight> ProbVector<W> {
    pub fn new(space: StateSpace, weights: Vec<W>) -> Result<Self> {
        if weights.len() != space.size() {
            return Err(Error::NotAProbability(format!(
                "{} weights for {} states",
                weights.len(),
                space.size()
            )));
        }
        if let Some(w) = weights.iter().find(|w| w.is_negative()) {
            return Err(Error::NotAProbability(format!("negative weight {w:?}")));
        }
        let total = W::total(&weights);
        if !W::is_unit_total(&total) {
            return Err(Error::NotAProbability(format!("weights sum to {total:?}")));
        }
        Ok(Self { space, weights })
    }

    /// Skips validation; callers guarantee the invariant.
    pub(crate) fn from_parts(space: StateSpace, weights: Vec<W>) -> Self {
        debug_assert_eq!(weights.len(), space.size());
        Self { space, weights }
    }

    pub fn point_mass(space: StateSpace, x: u32) -> Result<Self> {
        let idx = space.index(x)?;
        let mut weights = vec![W::zero(); space.size()];
        weights[idx] = W::one();
        Ok(Self { space, weights })
    }

    pub fn space(&self) -> StateSpace {
        self.space
    }

    /// Weights indexed from `space().lo`.
    pub fn weights(&self) -> &[W] {
        &self.weights
    }

    /// Mass at state `x`; zero outside the support.
    pub fn get(&self, x: i64) -> W {
        if self.space.contains(x) {
            self.weights[(x - self.space.lo as i64) as usize].clone()
        } else {
            W::zero()
        }
    }

    pub fn mean(&self) -> f64 {
        self.space
            .states()
            .zip(&self.weights)
            .map(|(x, w)| x as f64 * w.as_f64())
            .sum()
    }

    pub fn to_f64(&self) -> ProbVector<f64> {
        ProbVector {
            space: self.space,
            weights: self.weights.iter().map(|w| w.as_f64()).collect(),
        }
    }
}
