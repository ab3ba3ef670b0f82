//! Frequency, block frequency, runs and cumulative-sums tests in the form of
//! NIST SP 800-22, plus the battery report over equal subsequences.

use crate::error::{invalid, Error, Result};
use crate::extractor::BitString;
use rayon::prelude::*;
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;
use std::f64::consts::SQRT_2;

/// Shortest sequence accepted by every test here.
pub const MIN_LEN: usize = 100;
pub const DEFAULT_ALPHA: f64 = 0.01;

fn check_len(bits: &BitString, test: &str) -> Result<()> {
    if bits.len() < MIN_LEN {
        return Err(Error::InputTooShort(format!("{test} needs >= {MIN_LEN} bits, got {}", bits.len())));
    }
    Ok(())
}

/// Regularized upper incomplete gamma; `Q(a, 0) = 1` (statrs rejects `x = 0`).
fn igamc(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        gamma_ur(a, x)
    }
}

fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

pub fn frequency_test(bits: &BitString) -> Result<f64> {
    check_len(bits, "frequency")?;
    let n = bits.len() as f64;
    let s = 2.0 * bits.count_ones() as f64 - n;
    Ok(erfc(s.abs() / n.sqrt() / SQRT_2))
}

/// Chi-square over the ones-proportions of `n / block_len` disjoint blocks.
pub fn block_frequency_test(bits: &BitString, block_len: usize) -> Result<f64> {
    check_len(bits, "block frequency")?;
    if block_len < 2 || block_len > bits.len() {
        return invalid(format!("block length {block_len} not in [2, {}]", bits.len()));
    }
    let blocks = bits.len() / block_len;
    let m = block_len as f64;
    let chi2: f64 = (0..blocks)
        .map(|b| {
            let ones = (b * block_len..(b + 1) * block_len).filter(|&i| bits.get(i)).count();
            let pi = ones as f64 / m - 0.5;
            pi * pi
        })
        .sum::<f64>()
        * 4.0
        * m;
    Ok(igamc(blocks as f64 / 2.0, chi2 / 2.0))
}

/// Number of runs against its expectation; 0 when the frequency prerequisite
/// `|pi - 1/2| < 2/sqrt(n)` fails.
pub fn runs_test(bits: &BitString) -> Result<f64> {
    check_len(bits, "runs")?;
    let n = bits.len() as f64;
    let pi = bits.count_ones() as f64 / n;
    if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
        return Ok(0.0);
    }
    let changes = (1..bits.len()).filter(|&i| bits.get(i) != bits.get(i - 1)).count();
    let v = 1.0 + changes as f64;
    let q = pi * (1.0 - pi);
    Ok(erfc((v - 2.0 * n * q).abs() / (2.0 * (2.0 * n).sqrt() * q)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Maximal excursion of the +-1 random walk.
pub fn cusum_test(bits: &BitString, direction: Direction) -> Result<f64> {
    check_len(bits, "cumulative sums")?;
    let len = bits.len();
    let mut s: i64 = 0;
    let mut z: i64 = 0;
    for k in 0..len {
        let i = match direction {
            Direction::Forward => k,
            Direction::Backward => len - 1 - k,
        };
        s += if bits.get(i) { 1 } else { -1 };
        z = z.max(s.abs());
    }
    let n = len as f64;
    let z = z as f64;
    let sq = n.sqrt();
    // summation limits truncate toward zero, as in the reference code
    let range = |lo: f64, hi: f64| (lo.trunc() as i64)..=(hi.trunc() as i64);
    let mut sum1 = 0.0;
    for k in range((-n / z + 1.0) / 4.0, (n / z - 1.0) / 4.0) {
        let k = k as f64;
        sum1 += phi((4.0 * k + 1.0) * z / sq) - phi((4.0 * k - 1.0) * z / sq);
    }
    let mut sum2 = 0.0;
    for k in range((-n / z - 3.0) / 4.0, (n / z - 1.0) / 4.0) {
        let k = k as f64;
        sum2 += phi((4.0 * k + 3.0) * z / sq) - phi((4.0 * k + 1.0) * z / sq);
    }
    Ok((1.0 - sum1 + sum2).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub name: String,
    pub p_values: Vec<f64>,
    pub passed: usize,
    /// `passed / p_values.len()`.
    pub proportion: f64,
    pub alpha: f64,
    /// Chi-square uniformity of the p-values over ten equal bins.
    pub uniformity: f64,
}

impl TestReport {
    pub fn from_p_values(name: &str, p_values: Vec<f64>, alpha: f64) -> Self {
        let passed = p_values.iter().filter(|&&p| p >= alpha).count();
        let proportion = passed as f64 / p_values.len().max(1) as f64;
        let uniformity = uniformity_p_value(&p_values);
        TestReport { name: name.to_string(), p_values, passed, proportion, alpha, uniformity }
    }

    /// `passed/total`, e.g. `96/97`.
    pub fn proportion_label(&self) -> String {
        format!("{}/{}", self.passed, self.p_values.len())
    }
}

pub fn uniformity_p_value(p_values: &[f64]) -> f64 {
    if p_values.is_empty() {
        return f64::NAN;
    }
    let mut bins = [0usize; 10];
    for &p in p_values {
        bins[((p * 10.0) as usize).min(9)] += 1;
    }
    let expect = p_values.len() as f64 / 10.0;
    let chi2: f64 = bins.iter().map(|&f| (f as f64 - expect).powi(2) / expect).sum();
    igamc(4.5, chi2 / 2.0)
}

/// Names in battery order.
pub const TESTS: [&str; 5] =
    ["Frequency", "BlockFrequency", "Runs", "CumulativeSums (forward)", "CumulativeSums (backward)"];

/// Split `bits` into `sequences` equal subsequences (tail dropped) and run every
/// test on each.
pub fn battery(bits: &BitString, sequences: usize, block_len: usize, alpha: f64) -> Result<Vec<TestReport>> {
    if sequences == 0 {
        return invalid("need at least one sequence");
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha={alpha} outside (0,1)"));
    }
    let len = bits.len() / sequences;
    if len < MIN_LEN {
        return Err(Error::InputTooShort(format!(
            "{} bits give {sequences} sequences of {len} < {MIN_LEN} bits",
            bits.len()
        )));
    }
    let rows: Vec<[f64; 5]> = (0..sequences)
        .into_par_iter()
        .map(|i| {
            let seq = bits.slice(i * len, len);
            Ok([
                frequency_test(&seq)?,
                block_frequency_test(&seq, block_len)?,
                runs_test(&seq)?,
                cusum_test(&seq, Direction::Forward)?,
                cusum_test(&seq, Direction::Backward)?,
            ])
        })
        .collect::<Result<_>>()?;
    Ok(TESTS
        .iter()
        .enumerate()
        .map(|(k, name)| TestReport::from_p_values(name, rows.iter().map(|r| r[k]).collect(), alpha))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_frequency_example() {
        // 100-bit example sequence from the test-suite documentation
        let e = "11001001000011111101101010100010001000010110100011\
                 00001000110100110001001100011001100010100010111000";
        let bits = BitString::from_str01(e).unwrap();
        assert!((frequency_test(&bits).unwrap() - 0.109599).abs() < 1e-6);
        assert!((runs_test(&bits).unwrap() - 0.500798).abs() < 1e-6);
        assert!((block_frequency_test(&bits, 10).unwrap() - 0.706438).abs() < 1e-6);
        assert!((cusum_test(&bits, Direction::Forward).unwrap() - 0.219194).abs() < 1e-6);
        assert!((cusum_test(&bits, Direction::Backward).unwrap() - 0.114866).abs() < 1e-6);
    }
}
