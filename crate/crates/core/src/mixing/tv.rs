use num_traits::Zero;

use crate::chain::{Kernel, ProbVector};
use crate::error::{Error, Result};
use crate::numeric::Weight;

/// Half-L1 distance between two laws on the same state space.
pub fn tv_distance<W: Weight>(a: &ProbVector<W>, b: &ProbVector<W>) -> Result<W> {
    let (sa, sb) = (a.space(), b.space());
    if sa != sb {
        return Err(Error::ShapeMismatch {
            a_lo: sa.lo,
            a_hi: sa.hi,
            b_lo: sb.lo,
            b_hi: sb.hi,
        });
    }
    let diffs: Vec<W> = a
        .weights()
        .iter()
        .zip(b.weights())
        .map(|(x, y)| (x.clone() - y.clone()).abs())
        .collect();
    Ok(W::total(&diffs).halve())
}

/// `start * P^t` by `t` vector-kernel products.
pub fn evolve<K: Kernel>(
    kernel: &K,
    start: &ProbVector<K::W>,
    t: usize,
) -> Result<ProbVector<K::W>> {
    let space = kernel.space();
    if start.space() != space {
        let s = start.space();
        return Err(Error::ShapeMismatch {
            a_lo: s.lo,
            a_hi: s.hi,
            b_lo: space.lo,
            b_hi: space.hi,
        });
    }
    let mut cur = start.weights().to_vec();
    for _ in 0..t {
        let mut next = vec![K::W::zero(); space.size()];
        for (z, w) in cur.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for y in kernel.band(z) {
                next[y] = next[y].clone() + w.clone() * kernel.entry_at(z, y);
            }
        }
        cur = next;
    }
    Ok(ProbVector::from_parts(space, cur))
}
