// SPDX-License-Identifier: Apache-2.0

//! Replay artifacts: the frozen, cycle-ordered record of one capture.
//!
//! An artifact holds one bit frame per qualifying clock edge. Frame bit
//! ranges are assigned by the interface's frame layout and recorded in the
//! artifact's own signal directory, so an artifact is self-describing: replay
//! and ROM generation need no external interface description. Alongside each
//! data frame sits a care mask with the same layout; a zero care bit means
//! the captured value was unknown and must not be compared.

mod encode;
mod format;
mod hex;

pub use encode::{check_fixed_period, encode_artifact, EncodeError, EncodeOptions, EncodeWarnings, XPolicy};
pub use format::{deserialize_artifact, serialize_artifact, FormatError, FORMAT_VERSION, MAGIC};
pub use hex::{emit_hex, footprint, words_per_frame, FootprintReport, HexImage, WordWidth};

use alloc::string::String;
use alloc::vec::Vec;

use crate::bits::Bits;
use crate::ifspec::{CheckPolicy, Direction, StartCondition};
use crate::waveform::Timescale;

/// One signal's slot in the artifact's frames.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectoryEntry {
    pub name: String,
    pub width: usize,
    pub direction: Direction,
    pub check: CheckPolicy,
    pub offset: usize,
}

/// One clock edge's worth of boundary state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub data: Bits,
    /// Set bits are trustworthy; clear bits were unknown at capture time.
    pub care: Bits,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayArtifact {
    frame_width: usize,
    clock_period: u64,
    timescale: Timescale,
    start: StartCondition,
    directory: Vec<DirectoryEntry>,
    frames: Vec<Frame>,
}

impl ReplayArtifact {
    /// Builds a validated artifact. The directory must tile the frame
    /// exactly: entries in offset order, each starting where the previous
    /// ended, jointly spanning `[0, frame_width)`. Zero frames is legal
    /// (an empty capture); zero directory entries is not.
    pub fn new(
        timescale: Timescale,
        clock_period: u64,
        start: StartCondition,
        directory: Vec<DirectoryEntry>,
        frames: Vec<Frame>,
    ) -> Result<Self, ArtifactError> {
        if clock_period == 0 {
            return Err(ArtifactError::ZeroPeriod);
        }
        if directory.is_empty() {
            return Err(ArtifactError::EmptyDirectory);
        }
        let mut offset = 0usize;
        for (i, e) in directory.iter().enumerate() {
            if e.name.is_empty() {
                return Err(ArtifactError::EmptyName { index: i });
            }
            if e.name.len() > u16::MAX as usize {
                return Err(ArtifactError::NameTooLong {
                    name: e.name.clone(),
                });
            }
            if e.width == 0 {
                return Err(ArtifactError::ZeroWidth {
                    name: e.name.clone(),
                });
            }
            if directory[..i].iter().any(|o| o.name == e.name) {
                return Err(ArtifactError::DuplicateName {
                    name: e.name.clone(),
                });
            }
            if e.offset != offset {
                return Err(ArtifactError::BadOffset {
                    name: e.name.clone(),
                    expected: offset,
                    got: e.offset,
                });
            }
            if let CheckPolicy::Masked(mask) = &e.check {
                if mask.width() != e.width {
                    return Err(ArtifactError::MaskWidthMismatch {
                        name: e.name.clone(),
                        signal: e.width,
                        mask: mask.width(),
                    });
                }
            }
            offset += e.width;
        }
        let frame_width = offset;
        if frame_width > u32::MAX as usize {
            return Err(ArtifactError::FrameTooWide { width: frame_width });
        }
        for (i, f) in frames.iter().enumerate() {
            if f.data.width() != frame_width || f.care.width() != frame_width {
                return Err(ArtifactError::FrameWidthMismatch {
                    index: i,
                    expected: frame_width,
                    data: f.data.width(),
                    care: f.care.width(),
                });
            }
            // Drive values must be defined: agent bits always carry care=1.
            for e in directory.iter().filter(|e| e.direction == Direction::AgentDriven) {
                for bit in e.offset..e.offset + e.width {
                    if !f.care.get(bit) {
                        return Err(ArtifactError::UndefinedDriveBit {
                            frame: i,
                            name: e.name.clone(),
                        });
                    }
                }
            }
        }
        Ok(ReplayArtifact {
            frame_width,
            clock_period,
            timescale,
            start,
            directory,
            frames,
        })
    }

    pub fn frame_width(&self) -> usize {
        self.frame_width
    }

    /// Number of replay cycles (frames).
    pub fn cycle_count(&self) -> u64 {
        self.frames.len() as u64
    }

    /// Regenerated clock period in dump ticks.
    pub fn clock_period(&self) -> u64 {
        self.clock_period
    }

    pub fn timescale(&self) -> Timescale {
        self.timescale
    }

    pub fn start_condition(&self) -> StartCondition {
        self.start
    }

    pub fn directory(&self) -> &[DirectoryEntry] {
        &self.directory
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn entry(&self, name: &str) -> Option<&DirectoryEntry> {
        self.directory.iter().find(|e| e.name == name)
    }

    pub fn agent_entries(&self) -> impl Iterator<Item = &DirectoryEntry> {
        self.directory
            .iter()
            .filter(|e| e.direction == Direction::AgentDriven)
    }

    pub fn dut_entries(&self) -> impl Iterator<Item = &DirectoryEntry> {
        self.directory
            .iter()
            .filter(|e| e.direction == Direction::DutDriven)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArtifactError {
    #[error("clock period must be nonzero")]
    ZeroPeriod,
    #[error("artifact directory is empty")]
    EmptyDirectory,
    #[error("directory entry {index} has an empty name")]
    EmptyName { index: usize },
    #[error("signal name '{name}' exceeds the 65535-byte limit")]
    NameTooLong { name: String },
    #[error("signal '{name}' declared with zero width")]
    ZeroWidth { name: String },
    #[error("duplicate signal name '{name}' in directory")]
    DuplicateName { name: String },
    #[error("directory entry '{name}' at bit {got}, expected {expected}; entries must tile the frame")]
    BadOffset {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("mask for '{name}' is {mask} bits but the signal is {signal} bits")]
    MaskWidthMismatch {
        name: String,
        signal: usize,
        mask: usize,
    },
    #[error("frame {index} is {data}/{care} bits (data/care), expected {expected}")]
    FrameWidthMismatch {
        index: usize,
        expected: usize,
        data: usize,
        care: usize,
    },
    #[error("frame width {width} exceeds the format limit")]
    FrameTooWide { width: usize },
    #[error("frame {frame} leaves a care bit clear on agent-driven '{name}'")]
    UndefinedDriveBit { frame: usize, name: String },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::TimescaleUnit;

    fn ts() -> Timescale {
        Timescale::new(1, TimescaleUnit::Ns).unwrap()
    }

    fn entry(name: &str, width: usize, offset: usize) -> DirectoryEntry {
        DirectoryEntry {
            name: name.into(),
            width,
            direction: Direction::AgentDriven,
            check: CheckPolicy::Strict,
            offset,
        }
    }

    #[test]
    fn directory_must_tile_the_frame() {
        let err = ReplayArtifact::new(
            ts(),
            10,
            StartCondition::FirstEdge,
            vec![entry("a", 4, 0), entry("b", 4, 5)],
            vec![],
        )
        .unwrap_err();
        assert_eq!(
            err,
            ArtifactError::BadOffset {
                name: "b".into(),
                expected: 4,
                got: 5
            }
        );
    }

    #[test]
    fn zero_frames_is_legal() {
        let a = ReplayArtifact::new(
            ts(),
            10,
            StartCondition::FirstEdge,
            vec![entry("a", 4, 0)],
            vec![],
        )
        .unwrap();
        assert_eq!(a.cycle_count(), 0);
        assert_eq!(a.frame_width(), 4);
    }

    #[test]
    fn empty_directory_is_rejected() {
        let err =
            ReplayArtifact::new(ts(), 10, StartCondition::FirstEdge, vec![], vec![]).unwrap_err();
        assert_eq!(err, ArtifactError::EmptyDirectory);
    }

    #[test]
    fn frame_width_must_match_directory() {
        let err = ReplayArtifact::new(
            ts(),
            10,
            StartCondition::FirstEdge,
            vec![entry("a", 4, 0)],
            vec![Frame {
                data: Bits::zeros(5),
                care: Bits::zeros(4),
            }],
        )
        .unwrap_err();
        assert!(matches!(err, ArtifactError::FrameWidthMismatch { index: 0, .. }));
    }

    #[test]
    fn zero_period_is_rejected() {
        let err = ReplayArtifact::new(
            ts(),
            0,
            StartCondition::FirstEdge,
            vec![entry("a", 1, 0)],
            vec![],
        )
        .unwrap_err();
        assert_eq!(err, ArtifactError::ZeroPeriod);
    }

    #[test]
    fn agent_bits_must_have_defined_drives() {
        let mut dut = entry("b", 2, 4);
        dut.direction = Direction::DutDriven;
        let err = ReplayArtifact::new(
            ts(),
            10,
            StartCondition::FirstEdge,
            vec![entry("a", 4, 0), dut],
            vec![
                Frame {
                    data: Bits::zeros(6),
                    care: Bits::from_u64(6, 0b00_1111),
                },
                Frame {
                    data: Bits::zeros(6),
                    // Bit 2 sits inside agent entry "a": rejected.
                    care: Bits::from_u64(6, 0b11_1011),
                },
            ],
        )
        .unwrap_err();
        assert_eq!(
            err,
            ArtifactError::UndefinedDriveBit {
                frame: 1,
                name: "a".into()
            }
        );
    }
}
