// SPDX-License-Identifier: Apache-2.0

//! Capture-to-artifact encoder.
//!
//! Walks the capture's clock, samples every bound signal immediately before
//! each qualifying rising edge, and packs the samples into frames. The clock
//! itself is never stored; its period is measured, checked for jitter, and
//! recorded so replay can regenerate it.

use alloc::string::String;
use alloc::vec::Vec;

use super::{ArtifactError, DirectoryEntry, Frame, ReplayArtifact};
use crate::bits::Bits;
use crate::fourstate::FourState;
use crate::ifspec::{Direction, InterfaceSpec, StartCondition};
use crate::waveform::{SignalId, WaveformDb, WaveformError};

/// What to do when an agent-driven bit is `x` or `z` at a sampling edge.
/// Unknown device-driven bits are always recorded as don't-care; unknown
/// drive bits have no safe replay value, so encoding them is opt-in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XPolicy {
    /// Refuse to encode, naming the signal and cycle.
    Error,
    /// Drive 0, clear the care bit, and count the bit in the warnings.
    ZeroWithWarning,
}

#[derive(Debug, Clone)]
pub struct EncodeOptions {
    pub x_policy: XPolicy,
    /// Clock period override; required when the capture has a single edge.
    pub explicit_period: Option<u64>,
    /// Permitted deviation, in ticks, of each edge-to-edge distance from the
    /// nominal period. Zero demands a perfectly fixed-frequency clock.
    pub period_tolerance: u64,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions {
            x_policy: XPolicy::Error,
            explicit_period: None,
            period_tolerance: 0,
        }
    }
}

/// Non-fatal encode observations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EncodeWarnings {
    /// Agent-driven bits zeroed under [`XPolicy::ZeroWithWarning`].
    pub zeroed_drive_bits: u64,
    /// Clock transitions into `1` from `x`/`z`, which produce no frame.
    pub skipped_unknown_clock_edges: u32,
}

/// Verifies that rising edges are evenly spaced and returns the period.
///
/// The nominal period is `explicit_period` if given, otherwise the distance
/// between the first two edges. Every subsequent distance must match the
/// nominal within `tolerance` ticks. A single edge has no measurable period
/// and requires `explicit_period`; replay of a one-frame capture still needs
/// to know how long the cycle lasts.
pub fn check_fixed_period(
    edges: &[u64],
    explicit_period: Option<u64>,
    tolerance: u64,
) -> Result<u64, EncodeError> {
    if edges.is_empty() {
        return Err(EncodeError::NoEdges);
    }
    if edges.len() == 1 {
        return match explicit_period {
            Some(p) if p > 0 => Ok(p),
            Some(_) => Err(EncodeError::ZeroExplicitPeriod),
            None => Err(EncodeError::SingleEdgeNeedsPeriod),
        };
    }
    let nominal = match explicit_period {
        Some(0) => return Err(EncodeError::ZeroExplicitPeriod),
        Some(p) => p,
        None => edges[1] - edges[0],
    };
    if nominal == 0 {
        // Two edges at the same tick; the dump is canonical so this cannot
        // happen for a real clock, but an explicit check keeps the error clear.
        return Err(EncodeError::ZeroExplicitPeriod);
    }
    for i in 1..edges.len() {
        let found = edges[i] - edges[i - 1];
        if found.abs_diff(nominal) > tolerance {
            return Err(EncodeError::PeriodDeviation {
                edge_index: i,
                expected: nominal,
                found,
            });
        }
    }
    Ok(nominal)
}

/// Encodes a capture into a replay artifact.
pub fn encode_artifact(
    db: &WaveformDb,
    spec: &InterfaceSpec,
    opts: &EncodeOptions,
) -> Result<(ReplayArtifact, EncodeWarnings), EncodeError> {
    let clock = resolve(db, &spec.clock().capture_path)?;
    let scan = db.rising_edges(clock).map_err(EncodeError::from_db)?;
    let mut warnings = EncodeWarnings {
        zeroed_drive_bits: 0,
        skipped_unknown_clock_edges: scan.unknown_skips,
    };

    // Cycle zero: either the first edge, or the first edge with reset
    // sampled inactive. Sampling uses the same strictly-before rule as data,
    // so a reset deasserting exactly at an edge qualifies only the next one.
    let edges: &[u64] = match spec.start_condition() {
        StartCondition::FirstEdge => &scan.times,
        StartCondition::AfterResetDeassert => {
            let reset = spec.reset().expect("start condition requires a reset");
            let rst = resolve(db, &reset.capture_path)?;
            if db.decl(rst).width != 1 {
                return Err(EncodeError::from_db(WaveformError::NotScalar {
                    path: reset.capture_path.clone(),
                    width: db.decl(rst).width,
                }));
            }
            let inactive = if reset.active_level {
                FourState::Zero
            } else {
                FourState::One
            };
            let first = scan
                .times
                .iter()
                .position(|&t| db.value_before(rst, t).bit(0) == inactive);
            match first {
                Some(i) => &scan.times[i..],
                None => &[],
            }
        }
    };
    if edges.is_empty() {
        return Err(EncodeError::NoQualifyingEdges);
    }
    let period = check_fixed_period(edges, opts.explicit_period, opts.period_tolerance)?;

    let layout = spec.frame_layout();
    let signals: Vec<SignalId> = spec
        .bindings()
        .iter()
        .map(|b| {
            let sig = resolve(db, &b.capture_path)?;
            let found = db.decl(sig).width;
            if found != b.width {
                return Err(EncodeError::SignalWidthMismatch {
                    path: b.capture_path.clone(),
                    bound: b.width,
                    found,
                });
            }
            Ok(sig)
        })
        .collect::<Result<_, _>>()?;

    let mut frames = Vec::with_capacity(edges.len());
    for (cycle, &t) in edges.iter().enumerate() {
        let mut data = Bits::zeros(layout.width);
        let mut care = Bits::zeros(layout.width);
        for (field, &sig) in layout.fields.iter().zip(&signals) {
            let value = db.value_before(sig, t);
            for bit in 0..field.width {
                match value.bit(bit) {
                    FourState::Zero => care.set(field.offset + bit, true),
                    FourState::One => {
                        data.set(field.offset + bit, true);
                        care.set(field.offset + bit, true);
                    }
                    FourState::X | FourState::Z => match field.direction {
                        Direction::DutDriven => {}
                        Direction::AgentDriven => match opts.x_policy {
                            XPolicy::Error => {
                                return Err(EncodeError::UnknownDriveBits {
                                    name: field.name.clone(),
                                    cycle: cycle as u64,
                                })
                            }
                            XPolicy::ZeroWithWarning => {
                                // The zeroed bit becomes a defined drive.
                                care.set(field.offset + bit, true);
                                warnings.zeroed_drive_bits += 1;
                            }
                        },
                    },
                }
            }
        }
        frames.push(Frame { data, care });
    }

    let directory = layout
        .fields
        .into_iter()
        .map(|f| DirectoryEntry {
            name: f.name,
            width: f.width,
            direction: f.direction,
            check: f.check,
            offset: f.offset,
        })
        .collect();
    let artifact = ReplayArtifact::new(
        db.timescale(),
        period,
        spec.start_condition(),
        directory,
        frames,
    )?;
    Ok((artifact, warnings))
}

fn resolve(db: &WaveformDb, path: &str) -> Result<SignalId, EncodeError> {
    db.signal(path).map_err(EncodeError::from_db)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("capture problem: {0}")]
    Capture(WaveformError),
    #[error("clock has no rising edges")]
    NoEdges,
    #[error("no clock edges qualify under the start condition")]
    NoQualifyingEdges,
    #[error("a single clock edge has no measurable period; pass an explicit period")]
    SingleEdgeNeedsPeriod,
    #[error("explicit clock period must be nonzero")]
    ZeroExplicitPeriod,
    #[error("clock is not fixed-frequency: edge {edge_index} arrives {found} ticks after the previous one, expected {expected}")]
    PeriodDeviation {
        edge_index: usize,
        expected: u64,
        found: u64,
    },
    #[error("signal '{path}' is bound as {bound} bits but captured as {found}")]
    SignalWidthMismatch {
        path: String,
        bound: usize,
        found: usize,
    },
    #[error("agent-driven signal '{name}' has unknown bits at cycle {cycle}")]
    UnknownDriveBits { name: String, cycle: u64 },
    #[error(transparent)]
    Artifact(#[from] ArtifactError),
}

impl EncodeError {
    fn from_db(e: WaveformError) -> Self {
        EncodeError::Capture(e)
    }
}
