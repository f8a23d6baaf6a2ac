//! Discrete normal laws and local-limit comparisons with the hypergeometric
//! draw counts that drive the chain.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{hypergeom_law, ChainParams};
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::ratios::RatioTriple;

fn std_normal_density(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Sum of nonnegative terms, smallest first.
fn ascending_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    compensated_sum(terms)
}

/// `dN(zeta, xi)` on `{0, ..., k}`: the normal density sampled at the
/// integers and renormalized by `N = sum_x phi((x - zeta) / xi) / xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteNormal {
    pub zeta: f64,
    pub xi: f64,
    pub k: u32,
    pub normalizer: f64,
    /// Half the squared distance from `zeta` to the closest support point,
    /// in units of `xi`; factored out so far tails do not underflow.
    shift: f64,
    /// `sum_x exp(shift - z_x^2 / 2)`.
    shifted_sum: f64,
}

impl DiscreteNormal {
    pub fn new(zeta: f64, xi: f64, k: u32) -> Result<Self> {
        if !(xi > 0.0 && xi.is_finite()) || !zeta.is_finite() {
            return Err(Error::InvalidParams(format!("need finite zeta and xi > 0, got ({zeta}, {xi})")));
        }
        let nearest = zeta.round().clamp(0.0, k as f64);
        let shift = 0.5 * ((nearest - zeta) / xi).powi(2);
        let shifted = |x: f64| (shift - 0.5 * ((x - zeta) / xi).powi(2)).exp();
        let shifted_sum = ascending_sum((0..=k).map(|x| shifted(x as f64)).collect());
        let terms = (0..=k).map(|x| std_normal_density((x as f64 - zeta) / xi) / xi).collect();
        Ok(Self {
            zeta,
            xi,
            k,
            normalizer: ascending_sum(terms),
            shift,
            shifted_sum,
        })
    }

    /// `phi((j - zeta) / xi) / (xi N)`; zero off the support.
    pub fn pmf(&self, j: i64) -> f64 {
        if j < 0 || j > self.k as i64 {
            return 0.0;
        }
        (self.shift - 0.5 * ((j as f64 - self.zeta) / self.xi).powi(2)).exp() / self.shifted_sum
    }

    pub fn law(&self) -> Vec<f64> {
        (0..=self.k as i64).map(|j| self.pmf(j)).collect()
    }
}

/// Parameters of the normal approximation to `Hyp(m, l, k)`:
/// `p = l/m`, `sigma = max(1, sqrt(k p q (1 - k/n)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LltParams {
    pub l: u32,
    pub p: f64,
    pub q: f64,
    pub sigma: f64,
}

impl LltParams {
    pub fn new(params: ChainParams, l: u32) -> Result<Self> {
        if l > params.m() {
            return Err(Error::InvalidParams(format!("need l <= m = {}, got {l}", params.m())));
        }
        let (n, m, k) = (params.n() as f64, params.m() as f64, params.k() as f64);
        let p = l as f64 / m;
        let q = 1.0 - p;
        let sigma = (k * p * q * (1.0 - k / n)).sqrt().max(1.0);
        Ok(Self { l, p, q, sigma })
    }

    pub fn discrete_normal(&self, k: u32) -> DiscreteNormal {
        DiscreteNormal::new(k as f64 * self.p, self.sigma, k).expect("sigma >= 1")
    }
}

/// `round(rm/n)`, the typical red count in the left urn.
pub fn typical_red_count(params: ChainParams) -> u32 {
    params.stationary_mean().round() as u32
}

/// `||Hyp(m, l, k) - dN(kp, sigma)||_TV` over `{0, ..., k}`.
pub fn llt_tv(params: ChainParams, l: u32) -> Result<f64> {
    let llt = LltParams::new(params, l)?;
    let k = params.k();
    let hyp = hypergeom_law(params.m() as u64, l as u64, k as u64)?;
    let dn = llt.discrete_normal(k).law();
    let diffs = hyp.iter().zip(&dn).map(|(a, b)| (a - b).abs()).collect();
    Ok(0.5 * ascending_sum(diffs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerRow {
    pub n: u32,
    pub l: u32,
    pub sigma: f64,
    pub normalizer: f64,
    /// `sqrt(n) |N - 1|`.
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerReport {
    pub triple: RatioTriple,
    pub rows: Vec<NormalizerRow>,
}

impl NormalizerReport {
    pub fn max_scaled(&self) -> f64 {
        self.rows.iter().map(|r| r.scaled).fold(0.0, f64::max)
    }
}

/// `sqrt(n) |N_{kp, sigma} - 1|` along a fixed-ratio family with `l = round(rm/n)`.
pub fn normalizer_check(triple: RatioTriple, ns: &[u32]) -> Result<NormalizerReport> {
    let rows = ns
        .par_iter()
        .map(|&n| {
            let params = triple.instantiate(n)?;
            let l = typical_red_count(params);
            let llt = LltParams::new(params, l)?;
            let dn = llt.discrete_normal(params.k());
            Ok(NormalizerRow {
                n,
                l,
                sigma: llt.sigma,
                normalizer: dn.normalizer,
                scaled: (n as f64).sqrt() * (dn.normalizer - 1.0).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NormalizerReport { triple, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LltRow {
    pub n: u32,
    pub l: u32,
    pub tv: f64,
    /// `sqrt(n) tv`.
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LltReport {
    pub triple: RatioTriple,
    pub rows: Vec<LltRow>,
}

impl LltReport {
    pub fn median_scaled(&self) -> f64 {
        let mut values: Vec<f64> = self.rows.iter().map(|r| r.scaled).collect();
        values.sort_by(f64::total_cmp);
        let len = values.len();
        match len {
            0 => f64::NAN,
            _ if len % 2 == 1 => values[len / 2],
            _ => 0.5 * (values[len / 2 - 1] + values[len / 2]),
        }
    }

    pub fn last_scaled(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.scaled)
    }

    /// No growth trend: the last value is at most twice the median.
    pub fn bounded(&self) -> bool {
        self.last_scaled() <= 2.0 * self.median_scaled()
    }
}

/// `sqrt(n) llt_tv(l = round(rm/n))` along a fixed-ratio family.
pub fn llt_decay_check(triple: RatioTriple, ns: &[u32]) -> Result<LltReport> {
    let rows = ns
        .par_iter()
        .map(|&n| {
            let params = triple.instantiate(n)?;
            let l = typical_red_count(params);
            let tv = llt_tv(params, l)?;
            Ok(LltRow {
                n,
                l,
                tv,
                scaled: (n as f64).sqrt() * tv,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LltReport { triple, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_properties() {
        let dn = DiscreteNormal::new(10.0, 2.0, 20).unwrap();
        let total: f64 = dn.law().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
        for j in 0..=20 {
            assert!((dn.pmf(j) - dn.pmf(20 - j)).abs() < 1e-16);
        }
        assert!((dn.pmf(10) / dn.pmf(12) - 0.5f64.exp()).abs() < 1e-12);
        assert_eq!(dn.pmf(-1), 0.0);
        assert_eq!(dn.pmf(21), 0.0);
    }

    #[test]
    fn flat_limit() {
        let dn = DiscreteNormal::new(10.0, 1e6, 20).unwrap();
        let flat = 21.0 / 1e6 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((dn.normalizer - flat).abs() / flat < 1e-9);
    }

    #[test]
    fn sigma_clamp() {
        let params = ChainParams::new(100, 50, 50, 2).unwrap();
        assert_eq!(LltParams::new(params, 25).unwrap().sigma, 1.0);
        let params = ChainParams::new(1000, 500, 500, 20).unwrap();
        assert!(LltParams::new(params, 250).unwrap().sigma > 1.0);
    }

    #[test]
    fn degenerate_hypergeometric() {
        let params = ChainParams::new(100, 50, 50, 5).unwrap();
        let dn = LltParams::new(params, 0).unwrap().discrete_normal(5);
        assert!((llt_tv(params, 0).unwrap() - (1.0 - dn.pmf(0))).abs() < 1e-15);
    }

    #[test]
    fn reflection_symmetry() {
        let params = ChainParams::new(200, 80, 100, 10).unwrap();
        for l in [5, 20, 33] {
            let a = llt_tv(params, l).unwrap();
            let b = llt_tv(params, 80 - l).unwrap();
            assert!((a - b).abs() < 1e-13);
            assert!((0.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn decay_report() {
        let ns: Vec<u32> = (1..=20).map(|i| 100 * i).collect();
        let report = llt_decay_check(RatioTriple::new(0.02, 0.5, 0.5), &ns).unwrap();
        assert!(report.bounded());
        assert!(report.rows[0].tv > 0.0);
        let norm = normalizer_check(RatioTriple::new(0.02, 0.5, 0.5), &ns).unwrap();
        assert!(norm.max_scaled() <= 5.0);
    }
}
