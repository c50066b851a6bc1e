// SPDX-License-Identifier: Apache-2.0

//! In-memory waveform database.
//!
//! A [`WaveformDb`] holds a set of declared signals and, per signal, a
//! time-ordered list of value changes. It is the common model between the
//! dump parser, the dump writer, the simulator's tracer, and the replay
//! encoder. Per-signal change lists are canonical: times are strictly
//! increasing (a second write at the same time replaces the first), which
//! makes sampling queries unambiguous.

mod parse;
mod write;

pub use parse::{parse_vcd, VcdParseError, VcdParseErrorKind};
pub use write::write_vcd;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::fourstate::{FourState, FourStateVector};

/// Dump time unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimescaleUnit {
    S,
    Ms,
    Us,
    Ns,
    Ps,
    Fs,
}

impl TimescaleUnit {
    pub fn label(self) -> &'static str {
        match self {
            TimescaleUnit::S => "s",
            TimescaleUnit::Ms => "ms",
            TimescaleUnit::Us => "us",
            TimescaleUnit::Ns => "ns",
            TimescaleUnit::Ps => "ps",
            TimescaleUnit::Fs => "fs",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "s" => Some(TimescaleUnit::S),
            "ms" => Some(TimescaleUnit::Ms),
            "us" => Some(TimescaleUnit::Us),
            "ns" => Some(TimescaleUnit::Ns),
            "ps" => Some(TimescaleUnit::Ps),
            "fs" => Some(TimescaleUnit::Fs),
            _ => None,
        }
    }
}

/// Dump timescale: one tick equals `magnitude` times `unit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Timescale {
    magnitude: u16,
    unit: TimescaleUnit,
}

impl Timescale {
    /// Magnitude must be 1, 10, or 100.
    pub fn new(magnitude: u16, unit: TimescaleUnit) -> Result<Self, WaveformError> {
        if !matches!(magnitude, 1 | 10 | 100) {
            return Err(WaveformError::BadTimescaleMagnitude(magnitude));
        }
        Ok(Timescale { magnitude, unit })
    }

    pub fn magnitude(&self) -> u16 {
        self.magnitude
    }

    pub fn unit(&self) -> TimescaleUnit {
        self.unit
    }
}

impl core::fmt::Display for Timescale {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}{}", self.magnitude, self.unit.label())
    }
}

/// Opaque handle to a declared signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignalId(usize);

/// A declared signal: hierarchical dot-separated path plus width in bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalDecl {
    pub idcode: String,
    pub path: String,
    pub width: usize,
}

/// Rising-edge scan result. `unknown_skips` counts transitions into `1` from
/// `x` or `z`, which are not treated as sampling edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RisingEdges {
    pub times: Vec<u64>,
    pub unknown_skips: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaveformDb {
    timescale: Timescale,
    decls: Vec<SignalDecl>,
    changes: Vec<Vec<(u64, FourStateVector)>>,
    by_path: BTreeMap<String, usize>,
}

impl WaveformDb {
    pub fn new(timescale: Timescale) -> Self {
        WaveformDb {
            timescale,
            decls: Vec::new(),
            changes: Vec::new(),
            by_path: BTreeMap::new(),
        }
    }

    pub fn timescale(&self) -> Timescale {
        self.timescale
    }

    /// Declares a signal with a generated identifier code.
    pub fn add_signal(&mut self, path: &str, width: usize) -> Result<SignalId, WaveformError> {
        let idcode = idcode_for_index(self.decls.len());
        self.add_signal_with_idcode(path, width, idcode)
    }

    /// Declares a signal with an explicit identifier code (dump parser path).
    pub fn add_signal_with_idcode(
        &mut self,
        path: &str,
        width: usize,
        idcode: String,
    ) -> Result<SignalId, WaveformError> {
        if width == 0 {
            return Err(WaveformError::ZeroWidth(path.into()));
        }
        if path.is_empty()
            || path.split('.').any(|seg| seg.is_empty())
            || path.chars().any(char::is_whitespace)
        {
            return Err(WaveformError::BadPath(path.into()));
        }
        if self.by_path.contains_key(path) {
            return Err(WaveformError::DuplicatePath(path.into()));
        }
        if self.decls.iter().any(|d| d.idcode == idcode) {
            return Err(WaveformError::DuplicateIdcode(idcode));
        }
        let id = SignalId(self.decls.len());
        self.by_path.insert(path.into(), id.0);
        self.decls.push(SignalDecl {
            idcode,
            path: path.into(),
            width,
        });
        self.changes.push(Vec::new());
        Ok(id)
    }

    pub fn signal(&self, path: &str) -> Result<SignalId, WaveformError> {
        self.by_path
            .get(path)
            .map(|&i| SignalId(i))
            .ok_or_else(|| WaveformError::UnknownSignal(path.into()))
    }

    /// Linear scan; only the dump parser resolves identifier codes.
    pub fn signal_by_idcode(&self, idcode: &str) -> Option<SignalId> {
        self.decls
            .iter()
            .position(|d| d.idcode == idcode)
            .map(SignalId)
    }

    pub fn decls(&self) -> &[SignalDecl] {
        &self.decls
    }

    pub fn decl(&self, sig: SignalId) -> &SignalDecl {
        &self.decls[sig.0]
    }

    pub fn changes(&self, sig: SignalId) -> &[(u64, FourStateVector)] {
        &self.changes[sig.0]
    }

    /// Appends a value change. Times must not go backwards; a change at the
    /// same time as the previous one replaces it (last write wins), keeping
    /// the list canonical.
    pub fn record_change(
        &mut self,
        sig: SignalId,
        time: u64,
        value: FourStateVector,
    ) -> Result<(), WaveformError> {
        let decl = &self.decls[sig.0];
        if value.width() != decl.width {
            return Err(WaveformError::WidthMismatch {
                path: decl.path.clone(),
                declared: decl.width,
                got: value.width(),
            });
        }
        let list = &mut self.changes[sig.0];
        match list.last_mut() {
            Some((last, slot)) if *last == time => *slot = value,
            Some((last, _)) if *last > time => {
                return Err(WaveformError::TimeBackwards {
                    path: decl.path.clone(),
                    at: time,
                    prev: *last,
                })
            }
            _ => list.push((time, value)),
        }
        Ok(())
    }

    /// Value of the signal immediately before `time`: the last change at a
    /// time strictly less than `time`, or all-`x` if there is none. This is
    /// the sampling rule for clock edges; a change happening exactly at an
    /// edge is not yet visible at that edge.
    pub fn value_before(&self, sig: SignalId, time: u64) -> FourStateVector {
        let list = &self.changes[sig.0];
        let idx = list.partition_point(|(t, _)| *t < time);
        if idx == 0 {
            FourStateVector::all_x(self.decls[sig.0].width)
        } else {
            list[idx - 1].1.clone()
        }
    }

    /// Scans a one-bit signal for `0 -> 1` transitions, in time order.
    /// Transitions into `1` from `x` or `z` are tallied, not counted as
    /// edges; a signal is considered unknown before its first change.
    pub fn rising_edges(&self, sig: SignalId) -> Result<RisingEdges, WaveformError> {
        let decl = &self.decls[sig.0];
        if decl.width != 1 {
            return Err(WaveformError::NotScalar {
                path: decl.path.clone(),
                width: decl.width,
            });
        }
        let mut prev = FourState::X;
        let mut times = Vec::new();
        let mut unknown_skips = 0u32;
        for (t, v) in &self.changes[sig.0] {
            let cur = v.bit(0);
            if cur == FourState::One && prev != FourState::One {
                if prev == FourState::Zero {
                    times.push(*t);
                } else {
                    unknown_skips += 1;
                }
            }
            prev = cur;
        }
        Ok(RisingEdges {
            times,
            unknown_skips,
        })
    }
}

/// Generates compact printable identifier codes: `!`, `"`, ..., `~`, `!!`, ...
fn idcode_for_index(index: usize) -> String {
    const FIRST: u8 = b'!';
    const COUNT: usize = 94; // printable ASCII '!' through '~'
    let mut n = index;
    let mut out = Vec::new();
    loop {
        out.push(FIRST + (n % COUNT) as u8);
        n /= COUNT;
        if n == 0 {
            break;
        }
        n -= 1;
    }
    out.reverse();
    String::from_utf8(out).unwrap()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WaveformError {
    #[error("timescale magnitude must be 1, 10, or 100, got {0}")]
    BadTimescaleMagnitude(u16),
    #[error("signal '{0}' declared with zero width")]
    ZeroWidth(String),
    #[error("invalid signal path '{0}'")]
    BadPath(String),
    #[error("duplicate signal path '{0}'")]
    DuplicatePath(String),
    #[error("duplicate identifier code '{0}'")]
    DuplicateIdcode(String),
    #[error("unknown signal '{0}'")]
    UnknownSignal(String),
    #[error("signal '{path}' is {declared} bits wide, change has {got}")]
    WidthMismatch {
        path: String,
        declared: usize,
        got: usize,
    },
    #[error("change on '{path}' at time {at} is before previous change at {prev}")]
    TimeBackwards { path: String, at: u64, prev: u64 },
    #[error("signal '{path}' has width {width}, expected a one-bit signal")]
    NotScalar { path: String, width: usize },
}
