//! Fixed-width bit-strings, 1..=16 bits, LSB-aligned in a `u16`.
//!
//! Equality is bit-exact and width-sensitive. Ordering is by (width, bits)
//! so values of mixed widths never compare equal.

use crate::error::{Error, Result};
use std::fmt;
use std::ops::BitXor;

pub const MAX_WIDTH: u8 = 16;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitStr {
    width: u8,
    bits: u16,
}

impl BitStr {
    pub fn new(bits: u16, width: u8) -> Result<Self> {
        if width == 0 || width > MAX_WIDTH {
            return Err(Error::Domain(format!("bit width {width} not in 1..=16")));
        }
        if width < 16 && bits >> width != 0 {
            return Err(Error::Domain(format!(
                "value {bits:#x} does not fit in {width} bits"
            )));
        }
        Ok(BitStr { width, bits })
    }

    /// Truncate a wider word to `width` bits.
    pub fn masked(bits: u64, width: u8) -> Self {
        assert!((1..=MAX_WIDTH).contains(&width));
        BitStr {
            width,
            bits: (bits & ((1u64 << width) - 1)) as u16,
        }
    }

    pub fn zero(width: u8) -> Self {
        BitStr::masked(0, width)
    }

    pub fn all_ones(width: u8) -> Self {
        BitStr::masked(u64::MAX, width)
    }

    #[inline]
    pub fn bits(&self) -> u16 {
        self.bits
    }

    #[inline]
    pub fn width(&self) -> u8 {
        self.width
    }

    /// Number of values of this width.
    pub fn domain_size(width: u8) -> u32 {
        1u32 << width
    }

    /// True when the top `k` bits are all zero. `k = 0` is vacuously true.
    pub fn top_bits_zero(&self, k: u8) -> bool {
        assert!(k <= self.width);
        if k == 0 {
            return true;
        }
        self.bits >> (self.width - k) == 0
    }

    /// Flip the lowest output bit.
    pub fn flip_low_bit(&self) -> Self {
        BitStr {
            width: self.width,
            bits: self.bits ^ 1,
        }
    }

    /// `self` becomes the high part, `low` the low part.
    pub fn concat(&self, low: BitStr) -> BitStr {
        let width = self.width + low.width;
        assert!(width <= MAX_WIDTH);
        BitStr {
            width,
            bits: (self.bits << low.width) | low.bits,
        }
    }

    /// Split into (high, low) where the low part has `low_width` bits.
    pub fn split(&self, low_width: u8) -> (BitStr, BitStr) {
        assert!(low_width >= 1 && low_width < self.width);
        let high = BitStr {
            width: self.width - low_width,
            bits: self.bits >> low_width,
        };
        let low = BitStr::masked(self.bits as u64, low_width);
        (high, low)
    }

    /// Extract `count` bits starting `offset` bits below the top.
    pub fn slice_from_top(&self, offset: u8, count: u8) -> BitStr {
        assert!(offset + count <= self.width && count >= 1);
        BitStr::masked((self.bits >> (self.width - offset - count)) as u64, count)
    }

    /// Zero-padded hex, one digit per nibble of width.
    pub fn hex(&self) -> String {
        let digits = (self.width as usize).div_ceil(4);
        format!("{:0digits$x}", self.bits)
    }

    pub fn from_hex(s: &str, width: u8) -> Result<Self> {
        let bits = u16::from_str_radix(s.trim_start_matches("0x"), 16)
            .map_err(|e| Error::Domain(format!("bad hex {s:?}: {e}")))?;
        BitStr::new(bits, width)
    }

    /// All values of a width, ascending.
    pub fn enumerate(width: u8) -> impl Iterator<Item = BitStr> {
        (0..Self::domain_size(width)).map(move |v| BitStr::masked(v as u64, width))
    }
}

impl BitXor for BitStr {
    type Output = BitStr;
    fn bitxor(self, rhs: BitStr) -> BitStr {
        assert_eq!(self.width, rhs.width, "xor of mismatched widths");
        BitStr {
            width: self.width,
            bits: self.bits ^ rhs.bits,
        }
    }
}

impl fmt::Debug for BitStr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.hex(), self.width)
    }
}

impl fmt::Display for BitStr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.hex())
    }
}
