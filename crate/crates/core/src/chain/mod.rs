//! Chain parameters, state space, hypergeometric laws, the one-step kernel
//! and the stationary distribution.

mod hypergeom;
mod kernel;
mod params;
mod prob;

pub use hypergeom::{hypergeom_law, hypergeom_pmf, hypergeom_pmf_exact, hypergeom_support};
pub(crate) use kernel::stationary_counts;
pub use kernel::{
    build_kernel, build_kernel_exact, stationary_pmf, stationary_pmf_exact, transition_row,
    transition_row_exact, ExactKernel, Kernel, TransitionKernel,
};
pub use params::{ChainParams, Relabel, StateSpace};
pub use prob::{ExactProbVector, ProbVector};
