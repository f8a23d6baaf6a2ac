//! Hypergeometric probability mass, in floats and exactly.
//!
//! The float path evaluates `ln C(K, j) + ln C(N-K, d-j) - ln C(N, d)` through
//! Stirling-corrected log-factorials (Loader's saddle-point form: `stirlerr`
//! plus the deviance `bd0`). Each binomial factor is expanded around the same
//! success rate `d/N`, which keeps the large `ln Γ` terms from cancelling, and
//! the result is exponentiated once.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::numeric::binomial_big;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// `ln n! - ((n + 1/2) ln n - n + ln sqrt(2 pi))` for `n = 1..=15`.
#[allow(clippy::excessive_precision)]
const STIRLERR_SMALL: [f64; 15] = [
    0.081_061_466_795_327_258,
    0.041_340_695_955_409_294,
    0.027_677_925_684_998_339,
    0.020_790_672_103_765_093,
    0.016_644_691_189_821_192,
    0.013_876_128_823_070_748,
    0.011_896_709_945_891_770,
    0.010_411_265_261_972_096,
    0.009_255_462_182_712_733,
    0.008_330_563_433_362_871,
    0.007_573_675_487_951_841,
    0.006_942_840_107_209_530,
    0.006_408_994_188_004_207,
    0.005_951_370_112_758_848,
    0.005_554_733_551_962_801,
];

/// Error of Stirling's approximation to `ln n!`.
fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n == 0 {
        return 0.0;
    }
    if n <= 15 {
        return STIRLERR_SMALL[(n - 1) as usize];
    }
    let x = n as f64;
    let nn = x * x;
    if n > 500 {
        (S0 - S1 / nn) / x
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / x
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / x
    }
}

/// Deviance term `x ln(x / np) + np - x`, computed without cancellation.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let v2 = v * v;
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        for j in 1..1000 {
            ej *= v2;
            let next = s + ej / (2 * j + 1) as f64;
            if next == s {
                return next;
            }
            s = next;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// `ln Binom(size, p).pmf(x)`, with `q = 1 - p` passed separately.
fn ln_binom_pmf(x: u64, size: u64, p: f64, q: f64) -> f64 {
    if x > size {
        return f64::NEG_INFINITY;
    }
    if p == 0.0 {
        return if x == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if x == size { 0.0 } else { f64::NEG_INFINITY };
    }
    let nf = size as f64;
    if x == 0 {
        if size == 0 {
            return 0.0;
        }
        return if p < 0.1 {
            -bd0(nf, nf * q) - nf * p
        } else {
            nf * q.ln()
        };
    }
    if x == size {
        return if q < 0.1 {
            -bd0(nf, nf * p) - nf * q
        } else {
            nf * p.ln()
        };
    }
    let xf = x as f64;
    let lc = stirlerr(size) - stirlerr(x) - stirlerr(size - x) - bd0(xf, nf * p) - bd0(nf - xf, nf * q);
    let lf = LN_2PI + xf.ln() + (-xf / nf).ln_1p();
    lc - 0.5 * lf
}

fn check_bounds(population: u64, successes: u64, draws: u64) -> Result<()> {
    if successes > population || draws > population {
        return Err(Error::InvalidParams(format!(
            "hypergeometric needs successes, draws <= population; got N = {population}, K = {successes}, draws = {draws}"
        )));
    }
    Ok(())
}

/// Inclusive support `[max(0, d - (N - K)), min(K, d)]`.
pub fn hypergeom_support(population: u64, successes: u64, draws: u64) -> (u64, u64) {
    let lo = draws.saturating_sub(population - successes);
    (lo, successes.min(draws))
}

/// `P(H = j)` for `H ~ Hyp(population, successes, draws)`; zero off the support.
pub fn hypergeom_pmf(population: u64, successes: u64, draws: u64, j: i64) -> Result<f64> {
    check_bounds(population, successes, draws)?;
    let (lo, hi) = hypergeom_support(population, successes, draws);
    if j < lo as i64 || j > hi as i64 {
        return Ok(0.0);
    }
    let j = j as u64;
    let p = draws as f64 / population as f64;
    let q = (population - draws) as f64 / population as f64;
    let ln = ln_binom_pmf(j, successes, p, q) + ln_binom_pmf(draws - j, population - successes, p, q)
        - ln_binom_pmf(draws, population, p, q);
    Ok(ln.exp())
}

/// Full law `(P(H = 0), ..., P(H = draws))`.
pub fn hypergeom_law(population: u64, successes: u64, draws: u64) -> Result<Vec<f64>> {
    check_bounds(population, successes, draws)?;
    (0..=draws as i64)
        .map(|j| hypergeom_pmf(population, successes, draws, j))
        .collect()
}

/// Exact `C(K, j) C(N - K, d - j) / C(N, d)`.
pub fn hypergeom_pmf_exact(population: u64, successes: u64, draws: u64, j: i64) -> Result<BigRational> {
    check_bounds(population, successes, draws)?;
    let (lo, hi) = hypergeom_support(population, successes, draws);
    if j < lo as i64 || j > hi as i64 {
        return Ok(BigRational::zero());
    }
    let j = j as u64;
    let numer = binomial_big(successes, j) * binomial_big(population - successes, draws - j);
    let denom = binomial_big(population, draws);
    Ok(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{big_ratio, ratio_to_f64};

    #[test]
    fn small_cases() {
        assert!((hypergeom_pmf(4, 2, 2, 1).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(hypergeom_pmf(4, 2, 2, 3).unwrap(), 0.0);
        assert_eq!(hypergeom_pmf(4, 2, 2, -1).unwrap(), 0.0);
        assert_eq!(hypergeom_pmf_exact(4, 2, 2, 1).unwrap(), big_ratio(2, 3));
        assert_eq!(hypergeom_pmf_exact(4, 2, 2, 3).unwrap(), BigRational::zero());
    }

    #[test]
    fn degenerate_draws() {
        assert_eq!(hypergeom_pmf(10, 4, 0, 0).unwrap(), 1.0);
        assert_eq!(hypergeom_pmf(10, 0, 3, 0).unwrap(), 1.0);
        assert_eq!(hypergeom_pmf(10, 10, 3, 3).unwrap(), 1.0);
        assert!((hypergeom_pmf(10, 4, 10, 4).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(hypergeom_pmf(4, 5, 2, 1).is_err());
        assert!(hypergeom_pmf(4, 2, 5, 1).is_err());
        assert!(hypergeom_pmf_exact(4, 2, 5, 1).is_err());
    }

    #[test]
    fn large_population_matches_exact_oracle() {
        let exact = ratio_to_f64(&hypergeom_pmf_exact(1000, 500, 20, 10).unwrap());
        let float = hypergeom_pmf(1000, 500, 20, 10).unwrap();
        assert!(((float - exact) / exact).abs() < 1e-13, "{float} vs {exact}");
    }

    #[test]
    fn stirlerr_matches_log_factorial_past_table() {
        // ln n! summed in extended steps around the table boundary.
        let mut ln_fact = 0.0f64;
        for n in 1..=40u64 {
            ln_fact += (n as f64).ln();
            let nf = n as f64;
            let direct = ln_fact - ((nf + 0.5) * nf.ln() - nf + 0.5 * LN_2PI);
            assert!((stirlerr(n) - direct).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn law_sums_to_one() {
        for &(n, k, d) in &[(50u64, 20u64, 7u64), (1000, 333, 250), (64, 1, 32), (7, 7, 3)] {
            let total: f64 = hypergeom_law(n, k, d).unwrap().iter().sum();
            assert!((total - 1.0).abs() < 1e-13, "({n},{k},{d}) -> {total}");
        }
    }
}
