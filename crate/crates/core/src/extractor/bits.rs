//! Packed bit strings and bit sources.
//!
//! Bits are packed most-significant-bit first: bit `i` lives in byte `i / 8`
//! at position `7 - i % 8`. Padding bits of the final byte are zero.

use crate::error::{invalid, Error, Result};
use rand::RngCore;

#[derive(Clone, PartialEq, Eq, Default)]
pub struct BitString {
    len: usize,
    bytes: Vec<u8>,
}

impl std::fmt::Debug for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitString({} bits", self.len)?;
        if self.len <= 64 {
            write!(f, ": ")?;
            for i in 0..self.len {
                write!(f, "{}", self.get(i) as u8)?;
            }
        }
        write!(f, ")")
    }
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString { len, bytes: vec![0; len.div_ceil(8)] }
    }

    /// Wrap packed bytes; bits beyond `len` must be zero.
    pub fn from_bytes(bytes: Vec<u8>, len: usize) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return invalid(format!("{} bytes cannot hold exactly {len} bits", bytes.len()));
        }
        let s = BitString { len, bytes };
        if !len.is_multiple_of(8) && s.bytes[len / 8] & (0xff >> (len % 8)) != 0 {
            return invalid("padding bits must be zero");
        }
        Ok(s)
    }

    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        let mut s = BitString::default();
        for b in bits {
            s.push(b);
        }
        s
    }

    /// Parse a string of '0'/'1' characters.
    pub fn from_str01(s: &str) -> Result<Self> {
        let mut out = BitString::default();
        for c in s.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                _ => return invalid(format!("unexpected character {c:?} in bit string")),
            }
        }
        Ok(out)
    }

    pub fn random(len: usize, rng: &mut impl RngCore) -> Self {
        let mut bytes = vec![0u8; len.div_ceil(8)];
        rng.fill_bytes(&mut bytes);
        if !len.is_multiple_of(8) {
            let last = bytes.len() - 1;
            bytes[last] &= !(0xffu8 >> (len % 8));
        }
        BitString { len, bytes }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.bytes[i >> 3] >> (7 - (i & 7))) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 0x80u8 >> (i & 7);
        if v {
            self.bytes[i >> 3] |= mask;
        } else {
            self.bytes[i >> 3] &= !mask;
        }
    }

    pub fn push(&mut self, v: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, v);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Bits `start..start+len` as a new string.
    pub fn slice(&self, start: usize, len: usize) -> BitString {
        BitString::from_bits((start..start + len).map(|i| self.get(i)))
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        if self.len != other.len {
            return invalid("xor of bit strings of different length");
        }
        let bytes = self.bytes.iter().zip(&other.bytes).map(|(a, b)| a ^ b).collect();
        Ok(BitString { len: self.len, bytes })
    }

    pub fn to_string01(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }
}

/// A supply of uniform bits.
pub trait BitSource {
    fn next_bit(&mut self) -> Result<bool>;
    /// Bits handed out so far.
    fn consumed(&self) -> u64;

    fn take(&mut self, len: usize) -> Result<BitString> {
        let mut s = BitString::zeros(len);
        for i in 0..len {
            s.set(i, self.next_bit()?);
        }
        Ok(s)
    }
}

/// Reads a finite bit string front to back; running past the end is an error.
#[derive(Debug, Clone)]
pub struct BitReader {
    bits: BitString,
    pos: usize,
}

impl BitReader {
    pub fn new(bits: BitString) -> Self {
        BitReader { bits, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }
}

impl BitSource for BitReader {
    fn next_bit(&mut self) -> Result<bool> {
        if self.pos >= self.bits.len() {
            return Err(Error::SourceExhausted(self.pos as u64));
        }
        let b = self.bits.get(self.pos);
        self.pos += 1;
        Ok(b)
    }

    fn consumed(&self) -> u64 {
        self.pos as u64
    }
}

/// Unbounded bits from a generator, 64 at a time.
pub struct RngBitSource<R: RngCore> {
    rng: R,
    word: u64,
    left: u32,
    consumed: u64,
}

impl<R: RngCore> RngBitSource<R> {
    pub fn new(rng: R) -> Self {
        RngBitSource { rng, word: 0, left: 0, consumed: 0 }
    }
}

impl<R: RngCore> BitSource for RngBitSource<R> {
    fn next_bit(&mut self) -> Result<bool> {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        self.left -= 1;
        self.consumed += 1;
        Ok((self.word >> self.left) & 1 == 1)
    }

    fn consumed(&self) -> u64 {
        self.consumed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_first_packing() {
        let s = BitString::from_str01("1000000001").unwrap();
        assert_eq!(s.as_bytes(), &[0x80, 0x40]);
        assert_eq!(s.len(), 10);
        assert!(BitString::from_bytes(vec![0x80, 0x41], 10).is_err());
        assert_eq!(BitString::from_bytes(vec![0x80, 0x40], 10).unwrap(), s);
    }

    #[test]
    fn reader_exhausts() {
        let mut r = BitReader::new(BitString::from_str01("10").unwrap());
        assert!(r.next_bit().unwrap());
        assert!(!r.next_bit().unwrap());
        assert_eq!(r.next_bit(), Err(Error::SourceExhausted(2)));
    }
}
