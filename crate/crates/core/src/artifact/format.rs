// SPDX-License-Identifier: Apache-2.0

//! On-disk replay artifact format.
//!
//! All multi-byte integers are little-endian. Layout:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "RPAF"
//! 4       2     format version (currently 1)
//! 6       4     frame width W in bits
//! 10      8     frame count N
//! 18      8     clock period in timescale ticks
//! 26      1     timescale code (see below)
//! 27      1     start condition: 0 first edge, 1 after reset deassert
//! 28      4     directory entry count
//! 32      ...   directory entries
//! ...     N*S   data frames, S = ceil(W / 8) bytes each, bit i of a frame
//!               at byte i/8 bit i%8, padding bits zero
//! ...     N*S   care frames, same packing
//! ```
//!
//! Directory entry:
//!
//! ```text
//! u16   name length in bytes, then that many bytes of UTF-8
//! u32   width in bits
//! u8    direction: 0 agent-driven, 1 dut-driven
//! u8    check policy: 0 strict, 1 ignore, 2 masked;
//!       if masked, ceil(width / 8) mask bytes follow (same bit packing)
//! u32   frame bit offset
//! ```
//!
//! Timescale code: `unit * 3 + magnitude` with units s=0, ms=1, us=2, ns=3,
//! ps=4, fs=5 and magnitudes 1=0, 10=1, 100=2 (so `1ns` is 9).
//!
//! Deserialization re-runs full artifact validation and rejects trailing
//! bytes, so `deserialize(serialize(a)) == a` and corrupt files fail loudly.

use alloc::string::String;
use alloc::vec::Vec;

use super::{ArtifactError, DirectoryEntry, Frame, ReplayArtifact};
use crate::bits::Bits;
use crate::ifspec::{CheckPolicy, Direction, StartCondition};
use crate::waveform::{Timescale, TimescaleUnit};

pub const MAGIC: [u8; 4] = *b"RPAF";
pub const FORMAT_VERSION: u16 = 1;

pub fn serialize_artifact(a: &ReplayArtifact) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(a.frame_width() as u32).to_le_bytes());
    out.extend_from_slice(&a.cycle_count().to_le_bytes());
    out.extend_from_slice(&a.clock_period().to_le_bytes());
    out.push(timescale_code(a.timescale()));
    out.push(match a.start_condition() {
        StartCondition::FirstEdge => 0,
        StartCondition::AfterResetDeassert => 1,
    });
    out.extend_from_slice(&(a.directory().len() as u32).to_le_bytes());
    for e in a.directory() {
        out.extend_from_slice(&(e.name.len() as u16).to_le_bytes());
        out.extend_from_slice(e.name.as_bytes());
        out.extend_from_slice(&(e.width as u32).to_le_bytes());
        out.push(match e.direction {
            Direction::AgentDriven => 0,
            Direction::DutDriven => 1,
        });
        match &e.check {
            CheckPolicy::Strict => out.push(0),
            CheckPolicy::Ignore => out.push(1),
            CheckPolicy::Masked(mask) => {
                out.push(2);
                out.extend_from_slice(mask.as_bytes());
            }
        }
        out.extend_from_slice(&(e.offset as u32).to_le_bytes());
    }
    for f in a.frames() {
        out.extend_from_slice(f.data.as_bytes());
    }
    for f in a.frames() {
        out.extend_from_slice(f.care.as_bytes());
    }
    out
}

pub fn deserialize_artifact(bytes: &[u8]) -> Result<ReplayArtifact, FormatError> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let frame_width = r.u32()? as usize;
    let frame_count = r.u64()?;
    let clock_period = r.u64()?;
    let timescale = decode_timescale(r.u8()?)?;
    let start = match r.u8()? {
        0 => StartCondition::FirstEdge,
        1 => StartCondition::AfterResetDeassert,
        v => {
            return Err(FormatError::BadEnum {
                field: "start condition",
                value: v,
            })
        }
    };
    let dir_count = r.u32()?;

    let mut directory = Vec::new();
    for _ in 0..dir_count {
        let name_len = r.u16()? as usize;
        let name = String::from_utf8(r.take(name_len)?.to_vec())
            .map_err(|_| FormatError::NameNotUtf8)?;
        let width = r.u32()? as usize;
        let direction = match r.u8()? {
            0 => Direction::AgentDriven,
            1 => Direction::DutDriven,
            v => {
                return Err(FormatError::BadEnum {
                    field: "direction",
                    value: v,
                })
            }
        };
        let check = match r.u8()? {
            0 => CheckPolicy::Strict,
            1 => CheckPolicy::Ignore,
            2 => {
                let mask_bytes = r.take(Bits::byte_len(width))?.to_vec();
                let mask = Bits::from_bytes(width, mask_bytes)
                    .map_err(|_| FormatError::MaskPadding { name: name.clone() })?;
                CheckPolicy::Masked(mask)
            }
            v => {
                return Err(FormatError::BadEnum {
                    field: "check policy",
                    value: v,
                })
            }
        };
        let offset = r.u32()? as usize;
        directory.push(DirectoryEntry {
            name,
            width,
            direction,
            check,
            offset,
        });
    }

    let stride = Bits::byte_len(frame_width);
    let need = (frame_count as usize)
        .checked_mul(stride)
        .and_then(|n| n.checked_mul(2))
        .ok_or(FormatError::Truncated)?;
    if r.remaining() < need {
        return Err(FormatError::Truncated);
    }
    let mut data = Vec::with_capacity(frame_count as usize);
    for i in 0..frame_count {
        let b = Bits::from_bytes(frame_width, r.take(stride)?.to_vec())
            .map_err(|_| FormatError::FramePadding {
                which: "data",
                index: i,
            })?;
        data.push(b);
    }
    let mut frames = Vec::with_capacity(frame_count as usize);
    for (i, data) in data.into_iter().enumerate() {
        let care = Bits::from_bytes(frame_width, r.take(stride)?.to_vec())
            .map_err(|_| FormatError::FramePadding {
                which: "care",
                index: i as u64,
            })?;
        frames.push(Frame { data, care });
    }
    if r.remaining() != 0 {
        return Err(FormatError::TrailingBytes(r.remaining()));
    }

    let artifact = ReplayArtifact::new(timescale, clock_period, start, directory, frames)?;
    if artifact.frame_width() != frame_width {
        return Err(FormatError::FrameWidthHeaderMismatch {
            header: frame_width,
            directory: artifact.frame_width(),
        });
    }
    Ok(artifact)
}

fn timescale_code(ts: Timescale) -> u8 {
    let unit = match ts.unit() {
        TimescaleUnit::S => 0u8,
        TimescaleUnit::Ms => 1,
        TimescaleUnit::Us => 2,
        TimescaleUnit::Ns => 3,
        TimescaleUnit::Ps => 4,
        TimescaleUnit::Fs => 5,
    };
    let mag = match ts.magnitude() {
        1 => 0u8,
        10 => 1,
        _ => 2,
    };
    unit * 3 + mag
}

fn decode_timescale(code: u8) -> Result<Timescale, FormatError> {
    let unit = match code / 3 {
        0 => TimescaleUnit::S,
        1 => TimescaleUnit::Ms,
        2 => TimescaleUnit::Us,
        3 => TimescaleUnit::Ns,
        4 => TimescaleUnit::Ps,
        5 => TimescaleUnit::Fs,
        _ => return Err(FormatError::BadTimescaleCode(code)),
    };
    let magnitude = match code % 3 {
        0 => 1,
        1 => 10,
        _ => 100,
    };
    Ok(Timescale::new(magnitude, unit).unwrap())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.remaining() < n {
            return Err(FormatError::Truncated);
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, FormatError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("not a replay artifact (bad magic)")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("file is truncated")]
    Truncated,
    #[error("invalid {field} byte {value}")]
    BadEnum { field: &'static str, value: u8 },
    #[error("invalid timescale code {0}")]
    BadTimescaleCode(u8),
    #[error("directory entry name is not valid UTF-8")]
    NameNotUtf8,
    #[error("mask for '{name}' has nonzero padding bits")]
    MaskPadding { name: String },
    #[error("{which} frame {index} has nonzero padding bits")]
    FramePadding { which: &'static str, index: u64 },
    #[error("{0} trailing bytes after the last care frame")]
    TrailingBytes(usize),
    #[error("header says {header} frame bits, directory sums to {directory}")]
    FrameWidthHeaderMismatch { header: usize, directory: usize },
    #[error(transparent)]
    Artifact(#[from] ArtifactError),
}
