use thiserror::Error;

/// Errors raised by chain construction and the analyses built on top of it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("state {state} outside state space [{lo}, {hi}]")]
    StateOutOfRange { state: i64, lo: u32, hi: u32 },

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("critical regime (lambda1 = {lambda1:e}); t_n is undefined, use q_n")]
    CriticalRegime { lambda1: f64 },

    #[error("chain does not mix: k = m = n - m forces a deterministic full swap")]
    NonMixing,

    #[error("support mismatch: [{a_lo}, {a_hi}] vs [{b_lo}, {b_hi}]")]
    ShapeMismatch {
        a_lo: u32,
        a_hi: u32,
        b_lo: u32,
        b_hi: u32,
    },

    #[error("rational backend supports n <= {max}, got n = {n}")]
    BackendLimit { n: u32, max: u32 },

    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(String),

    #[error("no epsilon crossing within {cap} steps (d = {d_at_cap:e}); raise the cap")]
    Inconclusive { cap: usize, d_at_cap: f64 },

    #[error("regime mismatch: {0}")]
    Regime(String),

    #[error("{0} is undefined for these parameters")]
    Undefined(&'static str),

    #[error("weights do not form a probability vector: {0}")]
    NotAProbability(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
