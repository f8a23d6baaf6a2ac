//! Fixed-ratio chain families `(k/n, r/n, m/n)` and their integral instances.

use serde::{Deserialize, Serialize};

use crate::chain::ChainParams;
use crate::error::{Error, Result};
use crate::spectral::Regime;

/// `ratio * n` counts as integral when within this distance of an integer.
pub const INTEGRALITY_TOL: f64 = 1e-9;

/// Rounds `ratio * n`, rejecting products that are not integral.
pub fn integral_count(ratio: f64, n: u32) -> Option<u32> {
    let product = ratio * n as f64;
    let rounded = product.round();
    if rounded < 0.0 || (product - rounded).abs() > INTEGRALITY_TOL {
        return None;
    }
    Some(rounded as u32)
}

/// Limits `k/n -> gamma`, `r/n -> eta`, `m/n -> h` of a chain family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioTriple {
    pub k: f64,
    pub r: f64,
    pub m: f64,
}

impl RatioTriple {
    pub fn new(k: f64, r: f64, m: f64) -> Self {
        Self { k, r, m }
    }

    /// The instance at size `n`; fails when a count is not integral or the
    /// counts do not form valid parameters.
    pub fn instantiate(&self, n: u32) -> Result<ChainParams> {
        let count = |ratio: f64, name: &str| {
            integral_count(ratio, n).ok_or_else(|| {
                Error::InvalidParams(format!(
                    "{name}/n = {ratio} gives non-integral {name} = {} at n = {n}",
                    ratio * n as f64
                ))
            })
        };
        let k = count(self.k, "k")?;
        let r = count(self.r, "r")?;
        let m = count(self.m, "m")?;
        ChainParams::new(n, m, r, k)
    }

    /// Regime of the limiting family: non-mixing when `gamma = h = 1/2`,
    /// critical when `gamma = h(1 - h)`, generic otherwise.
    pub fn regime(&self) -> Regime {
        let h = self.m.min(1.0 - self.m);
        let gamma = self.k;
        if (gamma - 0.5).abs() < INTEGRALITY_TOL && (h - 0.5).abs() < INTEGRALITY_TOL {
            Regime::NonMixing
        } else if (gamma - h * (1.0 - h)).abs() < INTEGRALITY_TOL {
            Regime::Critical
        } else {
            Regime::Generic
        }
    }

    /// Limiting path-coupling contraction `1 - gamma(1 - 2 gamma) / (h(1 - h))`.
    pub fn contraction_limit(&self) -> f64 {
        let h = self.m.min(1.0 - self.m);
        1.0 - self.k * (1.0 - 2.0 * self.k) / (h * (1.0 - h))
    }
}
