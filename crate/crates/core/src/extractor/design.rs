//! Block weak designs built from polynomial (basic) designs.
//!
//! Each output bit needs a subseed of `t = 2 ell` bits. A basic design over the
//! prime `q` (least prime `>= t`) uses a seed segment of `t * q` bits viewed as a
//! `t x q` grid; the `k`-th set of a block is the graph of the `k`-th polynomial
//! over GF(q), `S_k = { x q + p_k(x) : x = 0..t-1 }`, where the coefficients of
//! `p_k` are the base-`q` digits of `k` (constant term first). Two sets from one
//! block meet in at most `deg` points.
//!
//! Blocks occupy consecutive seed segments and receive output bits contiguously.
//! While more than `t` outputs remain (`r` of them), the next block takes
//! `ceil((r - 2e)/(2e))` (at least 1); the remaining `<= t` outputs form a final
//! block of constant polynomials, whose sets are pairwise disjoint.

use crate::error::{invalid, Error, Result};
use std::f64::consts::E;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    /// First output index served by this block.
    pub first: u64,
    pub len: u64,
    /// First seed bit of the block's segment.
    pub seed_offset: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakDesign {
    pub m: u64,
    pub ell: usize,
    /// Set size, `2 ell`.
    pub t: usize,
    pub q: u64,
    pub blocks: Vec<Block>,
    /// Total seed length.
    pub d: u64,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

pub fn least_prime_at_least(n: u64) -> u64 {
    let mut p = n.max(2);
    while !is_prime(p) {
        p += 1;
    }
    p
}

/// Block sizes for `m` outputs with sets of size `t`.
pub fn block_sizes(m: u64, t: usize) -> Vec<u64> {
    let two_e = 2.0 * E;
    let mut sizes = Vec::new();
    let mut r = m;
    while r > t as u64 {
        let b = ((r as f64 - two_e) / two_e).ceil().max(1.0) as u64;
        sizes.push(b);
        r -= b;
    }
    if r > 0 {
        sizes.push(r);
    }
    sizes
}

impl WeakDesign {
    pub fn new(m: u64, ell: usize) -> Result<Self> {
        if m < 1 {
            return invalid("weak design needs m >= 1");
        }
        if ell < 2 {
            return invalid(format!("weak design needs ell >= 2, got {ell}"));
        }
        let t = 2 * ell;
        let q = least_prime_at_least(t as u64);
        let segment = t as u64 * q;
        // distinct polynomials of degree < t give distinct sets
        let capacity = (q as f64).powi(t as i32);
        let mut blocks = Vec::new();
        let mut first = 0;
        for (b, len) in block_sizes(m, t).into_iter().enumerate() {
            if len as f64 > capacity {
                return Err(Error::Infeasible(format!("block of {len} sets exceeds {q}^{t} polynomials")));
            }
            blocks.push(Block { first, len, seed_offset: b as u64 * segment });
            first += len;
        }
        let d = blocks.len() as u64 * segment;
        Ok(WeakDesign { m, ell, t, q, blocks, d })
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Block index and in-block index of output `i`.
    pub fn locate(&self, i: u64) -> (usize, u64) {
        assert!(i < self.m, "output index {i} out of range {}", self.m);
        let b = self.blocks.partition_point(|blk| blk.first + blk.len <= i);
        (b, i - self.blocks[b].first)
    }

    /// Seed positions of set `S_i`, ordered by evaluation point `x`.
    pub fn set(&self, i: u64) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.t);
        self.set_into(i, &mut out);
        out
    }

    pub fn set_into(&self, i: u64, out: &mut Vec<u64>) {
        let (b, k) = self.locate(i);
        let base = self.blocks[b].seed_offset;
        let q = self.q;
        let mut coeffs = Vec::new();
        let mut r = k;
        while r > 0 {
            coeffs.push(r % q);
            r /= q;
        }
        out.clear();
        for x in 0..self.t as u64 {
            // Horner in GF(q)
            let mut v = 0;
            for c in coeffs.iter().rev() {
                v = (v * x + c) % q;
            }
            out.push(base + x * q + v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        assert_eq!(least_prime_at_least(4), 5);
        assert_eq!(least_prime_at_least(18), 19);
        assert_eq!(least_prime_at_least(316), 317);
    }

    #[test]
    fn single_output() {
        let d = WeakDesign::new(1, 4).unwrap();
        assert_eq!(d.block_count(), 1);
        assert_eq!(d.d, 8 * 11);
        assert_eq!(d.set(0), (0..8).map(|x| x * 11).collect::<Vec<_>>());
    }

    #[test]
    fn block_sizes_sum() {
        for m in [1u64, 7, 8, 9, 100, 1000, 123_457] {
            for t in [4usize, 8, 64] {
                let s = block_sizes(m, t);
                assert_eq!(s.iter().sum::<u64>(), m);
                assert!(*s.last().unwrap() <= t as u64 || s.len() == 1 && m <= t as u64);
            }
        }
    }

    #[test]
    fn locate_is_consistent() {
        let d = WeakDesign::new(500, 5).unwrap();
        let mut seen = 0;
        for (b, blk) in d.blocks.iter().enumerate() {
            for k in 0..blk.len {
                assert_eq!(d.locate(blk.first + k), (b, k));
                seen += 1;
            }
        }
        assert_eq!(seen, 500);
    }
}
