//! Bernoulli sampling from uniform bits by interval subdivision.
//!
//! Orientation: the unit interval is split as `[0, 1-gamma) -> 0` and
//! `[1-gamma, 1) -> 1`; input bits are the binary digits of a uniform point `U`.

use super::bits::BitSource;
use crate::error::{invalid, Error, Result};

/// Binary digits of `1 - gamma`, exact for any double `gamma` in (0,1).
fn complement_digits(gamma: f64) -> Vec<bool> {
    // gamma = g * 2^-p with g odd, computed exactly
    let mut g = gamma;
    let mut p = 0usize;
    while g.fract() != 0.0 {
        g *= 2.0;
        p += 1;
    }
    // digits of gamma: p positions
    let mut gd = vec![false; p];
    let mut frac = gamma;
    for d in gd.iter_mut() {
        frac *= 2.0;
        if frac >= 1.0 {
            *d = true;
            frac -= 1.0;
        }
    }
    // 1 - gamma = (2^p - g) 2^-p; subtract digit-wise with borrow
    let mut out = vec![false; p];
    let mut borrow = false;
    for i in (0..p).rev() {
        let v = 0i32 - gd[i] as i32 - borrow as i32;
        borrow = v < 0;
        out[i] = v.rem_euclid(2) == 1;
    }
    out
}

/// Exact single draw: reads digits of `U` until it is known on which side of
/// `1 - gamma` it lies. Expected consumption is at most 2 bits; the worst case
/// is the binary length of `gamma` as a double.
pub fn interval_sample(gamma: f64, source: &mut dyn BitSource) -> Result<(bool, u64)> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return invalid(format!("gamma={gamma} outside (0,1)"));
    }
    let t = complement_digits(gamma);
    let mut used = 0;
    for &tk in &t {
        let u = source.next_bit()?;
        used += 1;
        if u != tk {
            return Ok((u, used));
        }
    }
    // U shares every digit of 1-gamma, hence U >= 1-gamma
    Ok((true, used))
}

/// Sequential interval algorithm for i.i.d. Bernoulli(gamma) draws.
///
/// The uniform point is refined across draws instead of restarted, so `n`
/// draws cost about `n h(gamma) + 64` input bits. Arithmetic is fixed point:
/// `gamma` is rounded to a multiple of `2^-64` and each draw has bias below
/// `2^-62`. The sampler refuses to read more than its budget, which makes the
/// caller abort rather than overdraw.
#[derive(Debug, Clone)]
pub struct IntervalSampler {
    gamma_fixed: u128,
    range: u128,
    code: u128,
    consumed: u64,
    budget: u64,
}

const HALF: u128 = 1 << 63;

impl IntervalSampler {
    pub fn new(gamma: f64, budget: u64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return invalid(format!("gamma={gamma} outside (0,1)"));
        }
        let g = (gamma * 2f64.powi(64)).round().clamp(2.0, 2f64.powi(64) - 2.0) as u128;
        Ok(IntervalSampler { gamma_fixed: g, range: 1, code: 0, consumed: 0, budget })
    }

    /// Upper bound on `|P(draw = 1) - gamma|` for each draw.
    pub fn bias_bound() -> f64 {
        2f64.powi(-62)
    }

    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    fn refill(&mut self, source: &mut dyn BitSource) -> Result<()> {
        while self.range < HALF {
            if self.consumed >= self.budget {
                return Err(Error::SourceExhausted(self.consumed));
            }
            let b = source.next_bit()?;
            self.consumed += 1;
            self.range <<= 1;
            self.code = (self.code << 1) | b as u128;
        }
        Ok(())
    }

    /// Next draw and the number of input bits it consumed.
    pub fn next(&mut self, source: &mut dyn BitSource) -> Result<(bool, u64)> {
        let before = self.consumed;
        self.refill(source)?;
        let split = (self.range * self.gamma_fixed) >> 64;
        let split = split.clamp(1, self.range - 1);
        let threshold = self.range - split;
        let out = self.code >= threshold;
        if out {
            self.code -= threshold;
            self.range = split;
        } else {
            self.range = threshold;
        }
        Ok((out, self.consumed - before))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_of_dyadics() {
        assert_eq!(complement_digits(0.5), vec![true]);
        assert_eq!(complement_digits(0.25), vec![true, true]);
        assert_eq!(complement_digits(0.375), vec![true, false, true]);
    }
}
