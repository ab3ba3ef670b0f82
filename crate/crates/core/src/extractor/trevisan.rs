//! Trevisan's extractor: one RSH bit per weak-design set.

use super::bits::BitString;
use super::design::WeakDesign;
use super::gf2::Gf2Field;
use super::rsh::{extract_bit, split_subseed, Symbols};
use crate::error::{invalid, Result};
use crate::rates;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractorSpec {
    /// Source length, `2n` for `n` rounds.
    pub input_len: u64,
    pub m: u64,
    pub ell: usize,
    /// Block count from the closed-form seed-length formula, when defined.
    pub a_formula: Option<u64>,
    pub eps_1: f64,
    pub design: WeakDesign,
}

impl ExtractorSpec {
    /// Spec for `n` rounds (source of `2n` bits), `m` outputs, per-bit error `eps_1`.
    pub fn new(n: u64, m: u64, eps_1: f64) -> Result<Self> {
        let ell = rates::field_degree(n, eps_1)? as usize;
        let a_formula = rates::seed_length(n, m, eps_1).ok().map(|s| s.a);
        let mut spec = Self::with_degree(2 * n, m, ell)?;
        spec.eps_1 = eps_1;
        spec.a_formula = a_formula;
        Ok(spec)
    }

    /// Spec with an explicit field degree.
    pub fn with_degree(input_len: u64, m: u64, ell: usize) -> Result<Self> {
        if input_len == 0 {
            return invalid("empty source");
        }
        Gf2Field::new(ell)?;
        let design = WeakDesign::new(m, ell)?;
        // eps_1 implied by ell: ell >= log2(N) + 2 log2(2/eps_1)
        let eps_1 = 2.0 * 2f64.powf(-(ell as f64 - (input_len as f64).log2()) / 2.0);
        Ok(ExtractorSpec { input_len, m, ell, a_formula: None, eps_1: eps_1.min(1.0), design })
    }

    /// Seed bits required.
    pub fn d(&self) -> u64 {
        self.design.d
    }
}

/// Extract `spec.m` bits; bit `i` uses the seed restricted to `S_i`.
///
/// Work is spread over the current rayon pool; the result does not depend on
/// the number of threads.
pub fn trevisan_extract(source: &BitString, seed: &BitString, spec: &ExtractorSpec) -> Result<BitString> {
    if source.len() as u64 != spec.input_len {
        return invalid(format!("source has {} bits, spec expects {}", source.len(), spec.input_len));
    }
    if (seed.len() as u64) < spec.d() {
        return invalid(format!("seed has {} bits, spec needs {}", seed.len(), spec.d()));
    }
    let field = Gf2Field::new(spec.ell)?;
    let symbols = Symbols::new(&field, source);
    let bits: Vec<bool> = (0..spec.m)
        .into_par_iter()
        .map_init(Vec::new, |idx, i| {
            spec.design.set_into(i, idx);
            let (z, h) = split_subseed(&field, idx.iter().map(|&p| seed.get(p as usize)));
            extract_bit(&field, &symbols, &z, &h)
        })
        .collect();
    Ok(BitString::from_bits(bits))
}
