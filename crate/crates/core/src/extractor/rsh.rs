//! Reed-Solomon / Hadamard one-bit extractor.
//!
//! The source is cut into `s = ceil(N / ell)` symbols of `ell` bits (the last
//! one zero-padded), each read most-significant first into GF(2^ell). With the
//! subseed split as `z || h` (`ell` bits each), the output bit is
//! `<h, sum_j c_j z^(s-1-j)>` over GF(2): the Reed-Solomon codeword symbol at
//! position `z`, then one Hadamard bit selected by `h`.

use super::bits::BitString;
use super::gf2::{Elem, Gf2Field, MulTable, ZERO};
use crate::error::{invalid, Result};

/// Horner steps below which a window table is not worth building.
const TABLE_THRESHOLD: usize = 32;

/// Source symbols packed for a fixed limb count.
#[derive(Debug, Clone)]
pub enum Symbols {
    W1(Vec<[u64; 1]>),
    W2(Vec<[u64; 2]>),
    W3(Vec<[u64; 3]>),
    W4(Vec<[u64; 4]>),
}

fn pack<const W: usize>(field: &Gf2Field, source: &BitString) -> Vec<[u64; W]> {
    let ell = field.degree();
    let s = source.len().div_ceil(ell);
    let mut out = vec![[0u64; W]; s];
    for (j, sym) in out.iter_mut().enumerate() {
        for i in 0..ell {
            let pos = j * ell + i;
            if pos < source.len() && source.get(pos) {
                let k = ell - 1 - i;
                sym[k / 64] |= 1 << (k % 64);
            }
        }
    }
    out
}

impl Symbols {
    pub fn new(field: &Gf2Field, source: &BitString) -> Self {
        match field.words() {
            1 => Symbols::W1(pack(field, source)),
            2 => Symbols::W2(pack(field, source)),
            3 => Symbols::W3(pack(field, source)),
            _ => Symbols::W4(pack(field, source)),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Symbols::W1(v) => v.len(),
            Symbols::W2(v) => v.len(),
            Symbols::W3(v) => v.len(),
            Symbols::W4(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Reed-Solomon symbol `sum_j c_j z^(s-1-j)`.
    pub fn evaluate(&self, field: &Gf2Field, z: &Elem) -> Elem {
        match self {
            Symbols::W1(v) => horner(field, v, z),
            Symbols::W2(v) => horner(field, v, z),
            Symbols::W3(v) => horner(field, v, z),
            Symbols::W4(v) => horner(field, v, z),
        }
    }
}

fn widen<const W: usize>(a: &[u64; W]) -> Elem {
    let mut e = ZERO;
    e[..W].copy_from_slice(a);
    e
}

fn horner<const W: usize>(field: &Gf2Field, symbols: &[[u64; W]], z: &Elem) -> Elem {
    if symbols.len() < TABLE_THRESHOLD {
        let mut acc = ZERO;
        for c in symbols {
            acc = field.mul(&acc, z);
            for k in 0..W {
                acc[k] ^= c[k];
            }
        }
        return acc;
    }
    let table = MulTable::<W>::new(field, z);
    let mut acc = [0u64; W];
    for c in symbols {
        acc = table.mul(&acc);
        for k in 0..W {
            acc[k] ^= c[k];
        }
    }
    widen(&acc)
}

fn parity_and(a: &Elem, b: &Elem) -> bool {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum::<u32>() & 1 == 1
}

/// Split a `2 ell`-bit subseed into `(z, h)`.
pub fn split_subseed(field: &Gf2Field, subseed: impl IntoIterator<Item = bool>) -> (Elem, Elem) {
    let ell = field.degree();
    let bits: Vec<bool> = subseed.into_iter().collect();
    assert_eq!(bits.len(), 2 * ell);
    (field.from_bits_msb(bits[..ell].iter().copied()), field.from_bits_msb(bits[ell..].iter().copied()))
}

/// Output bit for prepared symbols and subseed halves.
pub fn extract_bit(field: &Gf2Field, symbols: &Symbols, z: &Elem, h: &Elem) -> bool {
    parity_and(&symbols.evaluate(field, z), h)
}

/// One-bit extractor over GF(2^ell) with `ell = subseed.len() / 2`.
pub fn one_bit_extract(source: &BitString, subseed: &BitString) -> Result<bool> {
    if subseed.len() < 4 || !subseed.len().is_multiple_of(2) {
        return invalid(format!("subseed length {} must be even and >= 4", subseed.len()));
    }
    if source.is_empty() {
        return invalid("empty source");
    }
    let field = Gf2Field::new(subseed.len() / 2)?;
    let symbols = Symbols::new(&field, source);
    let (z, h) = split_subseed(&field, subseed.iter());
    Ok(extract_bit(&field, &symbols, &z, &h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_and_plain_paths_agree() {
        let field = Gf2Field::new(13).unwrap();
        let mut x = 0x2545f4914f6cdd1du64;
        let mut next = || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            x
        };
        let source = BitString::from_bits((0..13 * 100).map(|_| next() & 1 == 1));
        let symbols = Symbols::new(&field, &source);
        let z = field.from_u64(next());
        let fast = symbols.evaluate(&field, &z);
        let mut slow = ZERO;
        if let Symbols::W1(v) = &symbols {
            for c in v {
                slow = field.mul(&slow, &z);
                slow[0] ^= c[0];
            }
        }
        assert_eq!(fast, slow);
    }
}
