//! Binary extension fields GF(2^ell), 2 <= ell <= 256.
//!
//! An element is a polynomial over GF(2) of degree < ell stored little-endian in
//! 64-bit limbs: bit `i` of limb `i / 64` is the coefficient of `x^(i mod 64 + 64 (i / 64))`.
//! Reduction uses the pinned polynomial from [`super::gf2_polys`].

use super::gf2_polys::{MAX_DEGREE, MIDDLE_TERMS, MIN_DEGREE};
use crate::error::{Error, Result};

pub const LIMBS: usize = MAX_DEGREE / 64;
pub type Elem = [u64; LIMBS];

pub const ZERO: Elem = [0; LIMBS];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Field {
    degree: usize,
    /// Reduction polynomial without its leading `x^degree` term.
    low: Elem,
    words: usize,
}

impl Gf2Field {
    pub fn new(degree: usize) -> Result<Self> {
        if !(MIN_DEGREE..=MAX_DEGREE).contains(&degree) {
            return Err(Error::FieldDegreeUnsupported(degree));
        }
        let mut low = ZERO;
        low[0] = 1;
        for &k in &MIDDLE_TERMS[degree - MIN_DEGREE] {
            if k > 0 {
                low[k as usize / 64] |= 1 << (k % 64);
            }
        }
        Ok(Gf2Field { degree, low, words: degree.div_ceil(64) })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Limbs actually used by elements of this field.
    pub fn words(&self) -> usize {
        self.words
    }

    /// Exponents with nonzero coefficient in the reduction polynomial, descending.
    pub fn modulus_exponents(&self) -> Vec<usize> {
        let mut e = vec![self.degree];
        e.extend((0..self.degree).rev().filter(|&i| bit(&self.low, i)));
        e
    }

    /// Multiply by `x`.
    #[inline]
    pub fn mul_x(&self, a: &mut Elem) {
        let top = bit(a, self.degree - 1);
        let mut carry = 0;
        for w in a.iter_mut().take(self.words) {
            let next = *w >> 63;
            *w = (*w << 1) | carry;
            carry = next;
        }
        clear_above(a, self.degree);
        if top {
            for (w, l) in a.iter_mut().zip(&self.low) {
                *w ^= l;
            }
        }
    }

    /// Shift-and-add multiplication.
    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        let mut acc = ZERO;
        let mut s = *a;
        for i in 0..self.degree {
            if bit(b, i) {
                for k in 0..self.words {
                    acc[k] ^= s[k];
                }
            }
            self.mul_x(&mut s);
        }
        acc
    }

    pub fn pow(&self, a: &Elem, mut e: u128) -> Elem {
        let mut r = self.one();
        let mut base = *a;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        r
    }

    pub fn one(&self) -> Elem {
        let mut e = ZERO;
        e[0] = 1;
        e
    }

    /// Element from `degree` bits, the first bit being the coefficient of
    /// `x^(degree-1)`.
    pub fn from_bits_msb(&self, bits: impl IntoIterator<Item = bool>) -> Elem {
        let mut e = ZERO;
        let mut n = 0;
        for (i, b) in bits.into_iter().enumerate() {
            assert!(i < self.degree, "too many bits for GF(2^{})", self.degree);
            if b {
                let k = self.degree - 1 - i;
                e[k / 64] |= 1 << (k % 64);
            }
            n = i + 1;
        }
        assert_eq!(n, self.degree, "element needs exactly {} bits", self.degree);
        e
    }

    pub fn from_u64(&self, v: u64) -> Elem {
        let mut e = ZERO;
        e[0] = v;
        clear_above(&mut e, self.degree);
        e
    }
}

#[inline]
pub fn bit(a: &Elem, i: usize) -> bool {
    (a[i / 64] >> (i % 64)) & 1 == 1
}

#[inline]
fn clear_above(a: &mut Elem, degree: usize) {
    for (k, w) in a.iter_mut().enumerate() {
        let lo = k * 64;
        if lo >= degree {
            *w = 0;
        } else if degree - lo < 64 {
            *w &= (1u64 << (degree - lo)) - 1;
        }
    }
}

/// Multiplication by a fixed element `z` through 8-bit window tables:
/// `a * z = xor_j T[j][byte_j(a)]`.
pub struct MulTable<const W: usize> {
    table: Vec<[u64; W]>,
    nbytes: usize,
}

impl<const W: usize> MulTable<W> {
    pub fn new(field: &Gf2Field, z: &Elem) -> Self {
        assert_eq!(field.words(), W);
        let nbytes = field.degree().div_ceil(8);
        let mut table = vec![[0u64; W]; nbytes * 256];
        let mut s = *z;
        for j in 0..nbytes {
            let base = j * 256;
            for i in 0..8 {
                let single = 1usize << i;
                let mut v = [0u64; W];
                v.copy_from_slice(&s[..W]);
                table[base + single] = v;
                field.mul_x(&mut s);
            }
            for b in 1..256usize {
                if b.is_power_of_two() {
                    continue;
                }
                let low = b & b.wrapping_neg();
                let mut v = table[base + (b ^ low)];
                let u = table[base + low];
                for k in 0..W {
                    v[k] ^= u[k];
                }
                table[base + b] = v;
            }
        }
        MulTable { table, nbytes }
    }

    #[inline(always)]
    pub fn mul(&self, a: &[u64; W]) -> [u64; W] {
        let mut acc = [0u64; W];
        for j in 0..self.nbytes {
            let byte = ((a[j >> 3] >> ((j & 7) * 8)) & 0xff) as usize;
            let row = &self.table[(j << 8) + byte];
            for k in 0..W {
                acc[k] ^= row[k];
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aes_field_known_product() {
        // GF(2^8) with x^8 + x^4 + x^3 + x + 1: 0x57 * 0x83 = 0xc1
        let f = Gf2Field::new(8).unwrap();
        assert_eq!(f.modulus_exponents(), vec![8, 4, 3, 1, 0]);
        let p = f.mul(&f.from_u64(0x57), &f.from_u64(0x83));
        assert_eq!(p[0], 0xc1);
    }

    #[test]
    fn table_matches_shift_and_add() {
        for degree in [2, 9, 63, 64, 65, 130, 200, 256] {
            let f = Gf2Field::new(degree).unwrap();
            let mut z = ZERO;
            let mut a = ZERO;
            let mut seed = 0x9e3779b97f4a7c15u64 ^ degree as u64;
            for k in 0..LIMBS {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                z[k] = seed;
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                a[k] = seed;
            }
            clear_above(&mut z, degree);
            clear_above(&mut a, degree);
            let want = f.mul(&a, &z);
            macro_rules! check {
                ($w:literal) => {{
                    let t = MulTable::<$w>::new(&f, &z);
                    let mut aw = [0u64; $w];
                    aw.copy_from_slice(&a[..$w]);
                    let got = t.mul(&aw);
                    assert_eq!(&got[..], &want[..$w], "degree {degree}");
                }};
            }
            match f.words() {
                1 => check!(1),
                2 => check!(2),
                3 => check!(3),
                _ => check!(4),
            }
        }
    }

    #[test]
    fn unsupported_degree() {
        assert_eq!(Gf2Field::new(1), Err(Error::FieldDegreeUnsupported(1)));
        assert_eq!(Gf2Field::new(257), Err(Error::FieldDegreeUnsupported(257)));
    }
}
