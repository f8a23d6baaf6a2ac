//! Exact analysis of the generalized two-urn Bernoulli-Laplace chain.
//!
//! `n` balls, `r` of them red, sit in two urns; the left urn holds `m`. Each
//! step swaps `k` uniformly chosen balls between the urns. The state is the
//! number of red balls in the left urn.
//!
//! - [`chain`]: parameters, kernels (float and exact), stationary law.
//! - [`spectral`]: closed-form eigenpairs, `t_n`, `q_n`, regime classification.
//! - [`mixing`]: total variation, worst-case mixing curves, parameter sweeps.
//! - [`coupling`]: the shared-label coupling and its contraction.
//! - [`dn`]: discrete normal laws and local-limit comparisons.

pub mod chain;
pub mod coupling;
pub mod dn;
pub mod error;
pub mod mixing;
pub mod numeric;
pub mod ratios;
pub mod spectral;

pub use chain::{ChainParams, ProbVector, StateSpace, TransitionKernel};
pub use error::{Error, Result};
