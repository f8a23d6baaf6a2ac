//! Numeric helpers shared by the float and exact backends.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Largest `n` for which the exact backend keeps kernel numerators in `u128`.
pub const EXACT_MAX_N: u32 = 64;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Scalar type a probability vector can be built from.
///
/// Implemented for `f64` (tolerant comparisons, compensated sums) and
/// [`BigRational`] (exact).
pub trait Weight: Clone + std::fmt::Debug + PartialOrd + Signed + Send + Sync {
    /// Sum of a sequence of weights; compensated for floats.
    fn total<'a, I>(values: I) -> Self
    where
        I: IntoIterator<Item = &'a Self>,
        Self: 'a;

    /// Whether `total` is one, up to the backend's tolerance.
    fn is_unit_total(total: &Self) -> bool;

    fn as_f64(&self) -> f64;

    fn halve(&self) -> Self;
}

/// Tolerance for float probability vectors to sum to one.
pub const FLOAT_SUM_TOL: f64 = 1e-12;

impl Weight for f64 {
    fn total<'a, I>(values: I) -> Self
    where
        I: IntoIterator<Item = &'a Self>,
    {
        compensated_sum(values.into_iter().copied())
    }

    fn is_unit_total(total: &Self) -> bool {
        (total - 1.0).abs() <= FLOAT_SUM_TOL
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn halve(&self) -> Self {
        0.5 * self
    }
}

impl Weight for BigRational {
    fn total<'a, I>(values: I) -> Self
    where
        I: IntoIterator<Item = &'a Self>,
    {
        values.into_iter().fold(BigRational::zero(), |acc, v| acc + v)
    }

    fn is_unit_total(total: &Self) -> bool {
        total.is_one()
    }

    fn as_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn halve(&self) -> Self {
        self / BigRational::from_integer(BigInt::from(2))
    }
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

/// Exact binomial coefficient for arbitrary sizes.
pub fn binomial_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn pascal() -> &'static [Vec<u128>] {
    static TABLE: OnceLock<Vec<Vec<u128>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let size = EXACT_MAX_N as usize + 1;
        let mut rows: Vec<Vec<u128>> = Vec::with_capacity(size);
        for n in 0..size {
            let mut row = vec![1u128; n + 1];
            for k in 1..n {
                row[k] = rows[n - 1][k - 1] + rows[n - 1][k];
            }
            rows.push(row);
        }
        rows
    })
}

/// Binomial coefficient from a cached Pascal triangle, `n <= EXACT_MAX_N`.
///
/// Returns 0 when `k` is negative or exceeds `n`.
pub fn binomial_small(n: u32, k: i64) -> u128 {
    if k < 0 || k > n as i64 {
        return 0;
    }
    pascal()[n as usize][k as usize]
}

/// Parses a plain or scientific decimal literal into an exact rational.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let text = text.trim();
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = digits.parse().ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Exact rational equal to the shortest decimal that round-trips to `x`.
///
/// `0.01_f64` maps to exactly `1/100`, not to the binary value.
pub fn decimal_to_rational(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    parse_decimal(&format!("{x}"))
}

pub fn big_ratio(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> BigRational {
    BigRational::new(numer.into(), denom.into())
}

pub fn big_int(v: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let values = [1.0, 1e-16, 1e-16, 1e-16, 1e-16, -1.0];
        assert!((compensated_sum(values) - 4e-16).abs() < 1e-30);
    }

    #[test]
    fn pascal_matches_bigint() {
        for n in 0..=EXACT_MAX_N {
            for k in 0..=n {
                let big = binomial_big(n as u64, k as u64);
                assert_eq!(BigUint::from(binomial_small(n, k as i64)), big);
            }
        }
        assert_eq!(binomial_small(5, -1), 0);
        assert_eq!(binomial_small(5, 6), 0);
    }

    #[test]
    fn decimals_parse_exactly() {
        assert_eq!(decimal_to_rational(0.01).unwrap(), big_ratio(1, 100));
        assert_eq!(parse_decimal("2.5e-3").unwrap(), big_ratio(1, 400));
        assert_eq!(parse_decimal("12").unwrap(), big_int(12));
        assert_eq!(parse_decimal("-.5").unwrap(), big_ratio(-1, 2));
        assert!(parse_decimal("abc").is_none());
        assert!(parse_decimal(".").is_none());
    }
}
