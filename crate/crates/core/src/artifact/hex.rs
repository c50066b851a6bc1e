// SPDX-License-Identifier: Apache-2.0

//! Hex memory images and ROM footprint arithmetic.
//!
//! [`emit_hex`] renders an artifact's frames as `$readmemh`-compatible text:
//! frames in cycle order, each split into `ceil(W / word_width)` words, one
//! word per line, least significant word first, lowercase, zero-padded to
//! the full word width. Bits past the end of a frame read as zero. The same
//! routine feeds generated HDL, so software and hardware load identical
//! images byte for byte.

use alloc::string::String;
use core::fmt::Write as _;

use super::ReplayArtifact;
use crate::bits::Bits;

/// ROM word width in bits. Limiting the menu to byte multiples up to 64
/// keeps words addressable by `u64` and lines a whole number of hex digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordWidth {
    W8,
    W16,
    W32,
    W64,
}

impl WordWidth {
    pub fn bits(self) -> usize {
        match self {
            WordWidth::W8 => 8,
            WordWidth::W16 => 16,
            WordWidth::W32 => 32,
            WordWidth::W64 => 64,
        }
    }

    pub fn hex_digits(self) -> usize {
        self.bits() / 4
    }
}

impl TryFrom<u32> for WordWidth {
    type Error = BadWordWidth;

    fn try_from(v: u32) -> Result<Self, BadWordWidth> {
        match v {
            8 => Ok(WordWidth::W8),
            16 => Ok(WordWidth::W16),
            32 => Ok(WordWidth::W32),
            64 => Ok(WordWidth::W64),
            other => Err(BadWordWidth(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("word width must be 8, 16, 32, or 64, got {0}")]
pub struct BadWordWidth(pub u32);

/// Paired data and care images; identical shapes, identical word order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HexImage {
    pub data: String,
    pub care: String,
}

impl HexImage {
    /// Lines per image: `N * ceil(W / word_width)`.
    pub fn line_count(&self) -> usize {
        self.data.lines().count()
    }
}

/// Renders the data and care planes of an artifact as hex text.
pub fn emit_hex(artifact: &ReplayArtifact, word_width: WordWidth) -> HexImage {
    let words_per_frame = words_per_frame(artifact.frame_width(), word_width);
    let render = |plane: fn(&super::Frame) -> &Bits| {
        let mut out = String::new();
        for frame in artifact.frames() {
            let bits = plane(frame);
            for w in 0..words_per_frame {
                let value = bits.word(w * word_width.bits(), word_width.bits());
                let _ = writeln!(out, "{:0digits$x}", value, digits = word_width.hex_digits());
            }
        }
        out
    };
    HexImage {
        data: render(|f| &f.data),
        care: render(|f| &f.care),
    }
}

pub fn words_per_frame(frame_width: usize, word_width: WordWidth) -> usize {
    frame_width.div_ceil(word_width.bits())
}

/// Storage arithmetic for the replay ROM.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FootprintReport {
    pub frame_width: usize,
    pub cycles: u64,
    /// Data plus care storage: `2 * N * W`.
    pub rom_bits: u64,
    /// Bits that regenerating clocks avoids storing: two planes of one bit
    /// per cycle for each captured clock.
    pub clock_bits_saved: u64,
}

/// Computes ROM storage and the saving from clock regeneration.
/// `captured_clock_count` is how many clock-like signals the capture had;
/// they are measured, not stored, so each saves `2 * N` bits.
pub fn footprint(artifact: &ReplayArtifact, captured_clock_count: u64) -> FootprintReport {
    let n = artifact.cycle_count();
    let w = artifact.frame_width() as u64;
    FootprintReport {
        frame_width: artifact.frame_width(),
        cycles: n,
        rom_bits: 2 * n * w,
        clock_bits_saved: 2 * n * captured_clock_count,
    }
}
