use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One chain instance: `n` balls, a left urn holding `m` of them, `r` red
/// balls overall, and `k` balls swapped between the urns per step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChainParams {
    n: u32,
    m: u32,
    r: u32,
    k: u32,
}

impl ChainParams {
    pub fn new(n: u32, m: u32, r: u32, k: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("need n >= 2, got n = {n}")));
        }
        if m < 1 || m > n - 1 {
            return Err(Error::InvalidParams(format!(
                "need 1 <= m <= n - 1, got m = {m}, n = {n}"
            )));
        }
        if r > n {
            return Err(Error::InvalidParams(format!(
                "need r <= n, got r = {r}, n = {n}"
            )));
        }
        let max_k = m.min(n - m);
        if k < 1 || k > max_k {
            return Err(Error::InvalidParams(format!(
                "need 1 <= k <= min(m, n - m) = {max_k}, got k = {k}"
            )));
        }
        Ok(Self { n, m, r, k })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn state_space(&self) -> StateSpace {
        StateSpace {
            lo: (self.r + self.m).saturating_sub(self.n),
            hi: self.m.min(self.r),
        }
    }

    /// `r <= n/2` and `m <= n/2`.
    pub fn is_canonical(&self) -> bool {
        2 * self.r <= self.n && 2 * self.m <= self.n
    }

    /// `k = m = n - m`: every step exchanges the full urn contents.
    pub fn is_full_swap(&self) -> bool {
        self.k == self.m && self.m == self.n - self.m
    }

    /// Stationary mean of the left-urn red count, `rm/n`.
    pub fn stationary_mean(&self) -> f64 {
        self.r as f64 * self.m as f64 / self.n as f64
    }

    /// Maps the parameters onto `r, m <= n/2` by swapping colors and/or urns.
    ///
    /// The returned [`Relabel`] translates states between the two descriptions;
    /// kernels agree entrywise under it.
    pub fn canonicalize(&self) -> (ChainParams, Relabel) {
        let color_swap = 2 * self.r > self.n;
        let r1 = if color_swap { self.n - self.r } else { self.r };
        let urn_swap = 2 * self.m > self.n;
        let m1 = if urn_swap { self.n - self.m } else { self.m };
        let canonical = ChainParams {
            n: self.n,
            m: m1,
            r: r1,
            k: self.k,
        };
        (
            canonical,
            Relabel {
                raw: *self,
                color_swap,
                urn_swap,
            },
        )
    }
}

impl std::fmt::Display for ChainParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(n={}, m={}, r={}, k={})", self.n, self.m, self.r, self.k)
    }
}

/// State relabeling between raw and canonical parameters.
///
/// A color swap sends `x` to `m - x` (counting white balls instead of red);
/// an urn swap then sends `x` to `r' - x` (counting reds in the other urn).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Relabel {
    raw: ChainParams,
    pub color_swap: bool,
    pub urn_swap: bool,
}

impl Relabel {
    pub fn is_identity(&self) -> bool {
        !self.color_swap && !self.urn_swap
    }

    fn recolored_r(&self) -> u32 {
        if self.color_swap {
            self.raw.n - self.raw.r
        } else {
            self.raw.r
        }
    }

    /// Raw state to canonical state.
    pub fn to_canonical(&self, x: u32) -> u32 {
        let x1 = if self.color_swap { self.raw.m - x } else { x };
        if self.urn_swap {
            self.recolored_r() - x1
        } else {
            x1
        }
    }

    /// Canonical state back to raw state.
    pub fn to_raw(&self, y: u32) -> u32 {
        let x1 = if self.urn_swap {
            self.recolored_r() - y
        } else {
            y
        };
        if self.color_swap {
            self.raw.m - x1
        } else {
            x1
        }
    }
}

/// Contiguous range of left-urn red counts `{lo, ..., hi}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateSpace {
    pub lo: u32,
    pub hi: u32,
}

impl StateSpace {
    pub fn size(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn contains(&self, x: i64) -> bool {
        x >= self.lo as i64 && x <= self.hi as i64
    }

    /// Position of state `x` in dense storage.
    pub fn index(&self, x: u32) -> Result<usize> {
        if self.contains(x as i64) {
            Ok((x - self.lo) as usize)
        } else {
            Err(Error::StateOutOfRange {
                state: x as i64,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    pub fn state(&self, index: usize) -> u32 {
        self.lo + index as u32
    }

    pub fn states(&self) -> impl Iterator<Item = u32> {
        self.lo..=self.hi
    }
}
