// SPDX-License-Identifier: Apache-2.0

//! Four-state logic values as captured in waveform dumps.
//!
//! Simulation nets are two-state, but captured waveforms may carry `x`
//! (unknown) and `z` (high impedance), and the encoder's don't-care handling
//! depends on telling those apart from driven bits.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::bits::Bits;

/// One four-state logic value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FourState {
    Zero,
    One,
    X,
    Z,
}

impl FourState {
    pub fn from_char(c: char) -> Option<FourState> {
        match c {
            '0' => Some(FourState::Zero),
            '1' => Some(FourState::One),
            'x' | 'X' => Some(FourState::X),
            'z' | 'Z' => Some(FourState::Z),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            FourState::Zero => '0',
            FourState::One => '1',
            FourState::X => 'x',
            FourState::Z => 'z',
        }
    }

    pub fn is_known(self) -> bool {
        matches!(self, FourState::Zero | FourState::One)
    }
}

/// Fixed-width vector of four-state values, bit 0 least significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FourStateVector {
    bits: Vec<FourState>,
}

impl FourStateVector {
    /// All bits unknown; the value of any signal before its first event.
    pub fn all_x(width: usize) -> Self {
        FourStateVector {
            bits: vec![FourState::X; width],
        }
    }

    pub fn scalar(value: FourState) -> Self {
        FourStateVector { bits: vec![value] }
    }

    /// Lifts a two-state vector; every bit is known.
    pub fn from_bits(value: &Bits) -> Self {
        let bits = (0..value.width())
            .map(|i| {
                if value.get(i) {
                    FourState::One
                } else {
                    FourState::Zero
                }
            })
            .collect();
        FourStateVector { bits }
    }

    /// Parses value text as it appears in a dump, most significant bit first,
    /// applying the standard left-extension rule when the text is shorter
    /// than `width`: a leading `0` or `1` extends with `0`, a leading `x` or
    /// `z` extends with itself.
    pub fn parse_extend(text: &str, width: usize) -> Result<Self, ValueParseError> {
        let mut parsed: Vec<FourState> = Vec::with_capacity(text.len());
        for c in text.chars() {
            parsed.push(FourState::from_char(c).ok_or(ValueParseError::BadChar(c))?);
        }
        if parsed.is_empty() {
            return Err(ValueParseError::Empty);
        }
        if parsed.len() > width {
            return Err(ValueParseError::TooWide {
                width,
                got: parsed.len(),
            });
        }
        let fill = match parsed[0] {
            FourState::Zero | FourState::One => FourState::Zero,
            other => other,
        };
        let mut bits = vec![fill; width];
        // `parsed` is MSB first; place it at the low end of the vector.
        for (i, v) in parsed.iter().rev().enumerate() {
            bits[i] = *v;
        }
        Ok(FourStateVector { bits })
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn bit(&self, i: usize) -> FourState {
        self.bits[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = FourState> + '_ {
        self.bits.iter().copied()
    }

    pub fn all_known(&self) -> bool {
        self.bits.iter().all(|b| b.is_known())
    }

    /// Two-state image when every bit is known.
    pub fn to_bits(&self) -> Option<Bits> {
        let mut out = Bits::zeros(self.width());
        for (i, b) in self.bits.iter().enumerate() {
            match b {
                FourState::Zero => {}
                FourState::One => out.set(i, true),
                _ => return None,
            }
        }
        Some(out)
    }

    /// Dump rendering, most significant bit first, full declared width.
    pub fn to_text(&self) -> String {
        self.bits.iter().rev().map(|b| b.to_char()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ValueParseError {
    #[error("invalid value character '{0}'")]
    BadChar(char),
    #[error("empty value text")]
    Empty,
    #[error("value has {got} bits but the signal is {width} bits wide")]
    TooWide { width: usize, got: usize },
}
