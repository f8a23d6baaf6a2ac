//! Integer route for the exact worst-case curve.
//!
//! With `D = C(m, k) C(n - m, k)` the kernel is `N / D` for an integer matrix
//! `N`, so `M_t = D^t P^t = N^t` stays integral. The stationary law is
//! `A / C` with `C = C(n, m)`. For start `s`,
//!
//! ```text
//! 2 d_s(t) = sum_y |M_t[s][y] / D^t - A[y] / C| = T_s / (D^t C),
//! T_s      = sum_y |M_t[s][y] C - A[y] D^t|,
//! ```
//!
//! and `d_s(t) <= p / q` iff `T_s q <= 2 D^t C p`: no rational arithmetic in
//! the loop.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::curve::{non_mixing_curve, structurally_non_mixing, MixingCurve, MixingOptions, MixingOutcome};
use crate::chain::{stationary_counts, ExactKernel, Kernel};
use crate::error::{Error, Result};
use crate::numeric::decimal_to_rational;

fn abs_diff(a: &BigUint, b: &BigUint) -> BigUint {
    if a >= b {
        a - b
    } else {
        b - a
    }
}

fn step_row(kernel: &ExactKernel, cur: &[BigUint], next: &mut [BigUint]) {
    for v in next.iter_mut() {
        v.set_zero();
    }
    for (z, w) in cur.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        let nums = kernel.numerator_row(z);
        for y in kernel.band(z) {
            let p = nums[y];
            if p != 0 {
                next[y] += w * p;
            }
        }
    }
}

/// Exact counterpart of [`super::worst_case_curve`]; epsilon is read as the
/// shortest decimal that round-trips (`0.01` is exactly `1/100`) and crossings
/// use exact `<=`.
pub fn worst_case_curve_exact(
    kernel: &ExactKernel,
    options: &MixingOptions,
) -> Result<MixingCurve<BigRational>> {
    options.validate()?;
    let params = kernel.params();
    let cap = options.resolved_cap(params);
    if structurally_non_mixing(params) {
        return Ok(non_mixing_curve(params, options, cap));
    }
    let eps = decimal_to_rational(options.epsilon)
        .ok_or_else(|| Error::InvalidEpsilon(options.epsilon.to_string()))?;
    let (eps_p, eps_q) = (
        eps.numer().to_biguint().expect("positive epsilon"),
        eps.denom().to_biguint().expect("positive denominator"),
    );

    let space = kernel.space();
    let size = space.size();
    let (pi_counts, pi_denom) = stationary_counts(params);
    let starts = options.starts.indices(size);
    let step_denom = BigUint::from(kernel.denominator());

    let mut cur: Vec<Vec<BigUint>> = starts
        .iter()
        .map(|&s| {
            let mut row = vec![BigUint::zero(); size];
            row[s] = BigUint::one();
            row
        })
        .collect();
    let mut next = cur.clone();
    let mut scale = BigUint::one();

    let mut d = Vec::new();
    let mut worst_start = Vec::new();
    let mut t = 0;
    loop {
        let scaled_pi: Vec<BigUint> = pi_counts.iter().map(|a| a * &scale).collect();
        let mut worst: Option<(usize, BigUint)> = None;
        for (i, row) in cur.iter().enumerate() {
            let total: BigUint = row
                .iter()
                .zip(&scaled_pi)
                .map(|(mv, a)| abs_diff(&(mv * &pi_denom), a))
                .sum();
            if worst.as_ref().is_none_or(|(_, w)| total > *w) {
                worst = Some((i, total));
            }
        }
        let (arg, total) = worst.expect("at least one start");
        let full = &scale * &pi_denom * 2u32;
        let mixed = &total * &eps_q <= &full * &eps_p;
        let value = BigRational::new(BigInt::from(total), BigInt::from(full));
        d.push(value.clone());
        worst_start.push(space.state(starts[arg]));

        let outcome = if mixed {
            Some(MixingOutcome::Mixed(t))
        } else if t == cap {
            Some(MixingOutcome::Inconclusive { d_at_cap: value })
        } else {
            None
        };
        if let Some(outcome) = outcome {
            return Ok(MixingCurve {
                params,
                epsilon: options.epsilon,
                cap,
                starts: options.starts,
                d,
                worst_start,
                outcome,
            });
        }
        for (src, dst) in cur.iter().zip(next.iter_mut()) {
            step_row(kernel, src, dst);
        }
        std::mem::swap(&mut cur, &mut next);
        scale *= &step_denom;
        t += 1;
    }
}
