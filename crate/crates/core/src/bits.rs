// SPDX-License-Identifier: Apache-2.0

//! Fixed-width two-state bit vectors.
//!
//! `Bits` is the packing unit for replay frames: bit `i` of a value lives at
//! byte `i / 8`, bit `i % 8` of the backing buffer (LSB-first). The buffer is
//! always exactly `ceil(width / 8)` bytes and unused high bits of the last
//! byte are zero, so equal values have equal byte images and frames can be
//! compared, hashed, and serialized directly from the buffer.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Packed bit vector with a fixed width in bits.
///
/// Invariants: `bytes.len() == ceil(width / 8)` and all padding bits beyond
/// `width` are zero. Every constructor and mutator preserves both.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bits {
    width: usize,
    bytes: Vec<u8>,
}

impl Bits {
    /// Number of backing bytes for a `width`-bit vector.
    pub fn byte_len(width: usize) -> usize {
        width.div_ceil(8)
    }

    /// All-zero vector. `width` of zero is allowed and holds no bits.
    pub fn zeros(width: usize) -> Self {
        Bits {
            width,
            bytes: vec![0; Self::byte_len(width)],
        }
    }

    /// All-one vector.
    pub fn ones(width: usize) -> Self {
        let mut b = Self::zeros(width);
        for i in 0..width {
            b.set(i, true);
        }
        b
    }

    /// Builds from a little-endian byte buffer of exactly `byte_len(width)`
    /// bytes whose padding bits are zero.
    pub fn from_bytes(width: usize, bytes: Vec<u8>) -> Result<Self, BitsError> {
        if bytes.len() != Self::byte_len(width) {
            return Err(BitsError::LengthMismatch {
                width,
                got: bytes.len(),
            });
        }
        let b = Bits { width, bytes };
        if !b.padding_is_zero() {
            return Err(BitsError::PaddingNotZero { width });
        }
        Ok(b)
    }

    /// Builds a vector of up to 64 bits from an integer.
    ///
    /// Panics if `value` has bits set at or above `width`; callers truncate
    /// explicitly when they mean to.
    pub fn from_u64(width: usize, value: u64) -> Self {
        assert!(
            width >= 64 || value >> width == 0,
            "value does not fit in {width} bits"
        );
        let mut b = Self::zeros(width);
        for i in 0..width.min(64) {
            if value >> i & 1 == 1 {
                b.set(i, true);
            }
        }
        b
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Little-endian byte image, padding bits zero.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn get(&self, bit: usize) -> bool {
        assert!(bit < self.width, "bit {bit} out of range for width {}", self.width);
        self.bytes[bit / 8] >> (bit % 8) & 1 == 1
    }

    pub fn set(&mut self, bit: usize, value: bool) {
        assert!(bit < self.width, "bit {bit} out of range for width {}", self.width);
        let mask = 1u8 << (bit % 8);
        if value {
            self.bytes[bit / 8] |= mask;
        } else {
            self.bytes[bit / 8] &= !mask;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.bytes.iter().all(|&b| b == 0)
    }

    /// Value as an integer; width must not exceed 64.
    pub fn to_u64(&self) -> u64 {
        assert!(self.width <= 64, "width {} exceeds u64", self.width);
        let mut v = 0u64;
        for (i, &b) in self.bytes.iter().enumerate() {
            v |= (b as u64) << (8 * i);
        }
        v
    }

    /// Copies bits `[offset, offset + width)` into a new vector.
    pub fn field(&self, offset: usize, width: usize) -> Bits {
        assert!(
            offset + width <= self.width,
            "field [{offset}, {}) out of range for width {}",
            offset + width,
            self.width
        );
        let mut out = Bits::zeros(width);
        for i in 0..width {
            if self.get(offset + i) {
                out.set(i, true);
            }
        }
        out
    }

    /// Overwrites bits `[offset, offset + value.width())` from `value`.
    pub fn set_field(&mut self, offset: usize, value: &Bits) {
        assert!(
            offset + value.width <= self.width,
            "field [{offset}, {}) out of range for width {}",
            offset + value.width,
            self.width
        );
        for i in 0..value.width {
            self.set(offset + i, value.get(i));
        }
    }

    /// Reads up to 64 bits starting at `offset`; bits past the end of the
    /// vector read as zero. Used for word-at-a-time hex emission.
    pub fn word(&self, offset: usize, width: usize) -> u64 {
        assert!(width <= 64);
        let mut v = 0u64;
        for i in 0..width {
            let bit = offset + i;
            if bit < self.width && self.get(bit) {
                v |= 1 << i;
            }
        }
        v
    }

    /// Bitwise XOR of equal-width vectors.
    pub fn xor(&self, other: &Bits) -> Bits {
        assert_eq!(self.width, other.width, "width mismatch in xor");
        let bytes = self
            .bytes
            .iter()
            .zip(&other.bytes)
            .map(|(a, b)| a ^ b)
            .collect();
        Bits {
            width: self.width,
            bytes,
        }
    }

    /// Bitwise AND of equal-width vectors.
    pub fn and(&self, other: &Bits) -> Bits {
        assert_eq!(self.width, other.width, "width mismatch in and");
        let bytes = self
            .bytes
            .iter()
            .zip(&other.bytes)
            .map(|(a, b)| a & b)
            .collect();
        Bits {
            width: self.width,
            bytes,
        }
    }

    /// Lowercase hex rendering, most significant digit first, exactly
    /// `ceil(width / 4)` digits. Zero-width renders as the empty string.
    pub fn to_hex(&self) -> String {
        let digits = self.width.div_ceil(4);
        let mut s = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let nibble = self.word(d * 4, 4) as u32;
            s.push(core::char::from_digit(nibble, 16).unwrap());
        }
        s
    }

    /// Parses a hex string into a `width`-bit vector. The value must fit.
    pub fn from_hex(width: usize, text: &str) -> Result<Self, BitsError> {
        let mut b = Bits::zeros(width);
        let digits: Vec<u32> = text
            .chars()
            .map(|c| c.to_digit(16).ok_or(BitsError::BadHexDigit(c)))
            .collect::<Result<_, _>>()?;
        if digits.is_empty() {
            return Err(BitsError::EmptyHex);
        }
        for (pos, &d) in digits.iter().rev().enumerate() {
            for i in 0..4 {
                if d >> i & 1 == 1 {
                    let bit = pos * 4 + i;
                    if bit >= width {
                        return Err(BitsError::HexOverflow { width });
                    }
                    b.set(bit, true);
                }
            }
        }
        Ok(b)
    }

    fn padding_is_zero(&self) -> bool {
        let tail = self.width % 8;
        if tail == 0 {
            return true;
        }
        match self.bytes.last() {
            Some(&last) => last >> tail == 0,
            None => true,
        }
    }
}

impl core::fmt::Debug for Bits {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}'h{}", self.width, self.to_hex())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BitsError {
    #[error("expected {} bytes for {width} bits, got {got}", Bits::byte_len(*width))]
    LengthMismatch { width: usize, got: usize },
    #[error("padding bits beyond width {width} are not zero")]
    PaddingNotZero { width: usize },
    #[error("invalid hex digit '{0}'")]
    BadHexDigit(char),
    #[error("empty hex literal")]
    EmptyHex,
    #[error("hex literal does not fit in {width} bits")]
    HexOverflow { width: usize },
}
