// SPDX-License-Identifier: Apache-2.0

//! Replay engine: drives captured agent traffic and checks device outputs.
//!
//! The engine is open loop by construction. Drive values come only from the
//! artifact and the cycle index; observed device outputs are compared, never
//! fed back. That one-way flow is what makes replay a determinism check: if
//! the device diverges from the capture, the engine does not adapt, it
//! reports exactly where the divergence began.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::artifact::ReplayArtifact;
use crate::bits::Bits;
use crate::ifspec::{CheckPolicy, Direction};

#[derive(Debug, Clone)]
pub struct ReplayOptions {
    /// When false, device outputs are ignored entirely; replay still drives.
    pub check_enabled: bool,
    /// Halt at the first mismatching cycle instead of running to the end.
    pub stop_on_first_mismatch: bool,
    /// Cap on the recorded mismatch list; counting never stops.
    pub max_recorded_mismatches: usize,
}

impl Default for ReplayOptions {
    fn default() -> Self {
        ReplayOptions {
            check_enabled: true,
            stop_on_first_mismatch: false,
            max_recorded_mismatches: 100,
        }
    }
}

/// One failed comparison. The mask is the effective compare mask: capture
/// care bits AND the signal's check policy. By construction
/// `(expected ^ observed) & mask != 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub cycle: u64,
    pub signal: String,
    pub expected: Bits,
    pub observed: Bits,
    pub mask: Bits,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReplayStatus {
    /// `cycle` is the next frame to execute.
    Running { cycle: u64 },
    /// All frames executed. `pass` means zero mismatches.
    Done { pass: bool },
    /// Stopped early at `cycle` by `stop_on_first_mismatch`.
    Halted { cycle: u64 },
}

/// Result of one engine step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutput {
    /// Agent-driven values for the cycle just executed.
    pub drive: BTreeMap<String, Bits>,
    /// True when this step consumed the final frame.
    pub done: bool,
}

#[derive(Debug, Clone)]
pub struct ReplayEngine {
    artifact: ReplayArtifact,
    opts: ReplayOptions,
    cycle: u64,
    mismatch_count: u64,
    first_mismatch: Option<Mismatch>,
    recorded: Vec<Mismatch>,
    status: ReplayStatus,
}

impl ReplayEngine {
    /// A zero-frame artifact is already done, and trivially passing.
    pub fn new(artifact: ReplayArtifact, opts: ReplayOptions) -> Self {
        let status = if artifact.cycle_count() == 0 {
            ReplayStatus::Done { pass: true }
        } else {
            ReplayStatus::Running { cycle: 0 }
        };
        ReplayEngine {
            artifact,
            opts,
            cycle: 0,
            mismatch_count: 0,
            first_mismatch: None,
            recorded: Vec::new(),
            status,
        }
    }

    pub fn artifact(&self) -> &ReplayArtifact {
        &self.artifact
    }

    pub fn status(&self) -> &ReplayStatus {
        &self.status
    }

    /// Agent-driven values for an arbitrary cycle: a pure function of the
    /// artifact, independent of anything observed. `None` past the end.
    pub fn drive_frame(&self, cycle: u64) -> Option<BTreeMap<String, Bits>> {
        let frame = self.artifact.frames().get(cycle as usize)?;
        Some(
            self.artifact
                .agent_entries()
                .map(|e| (e.name.clone(), frame.data.field(e.offset, e.width)))
                .collect(),
        )
    }

    /// Executes one cycle: checks `observed` device outputs against the
    /// current frame, advances, and returns this cycle's drive values.
    ///
    /// `observed` must contain exactly the artifact's device-driven signals
    /// at their declared widths.
    pub fn step(&mut self, observed: &BTreeMap<String, Bits>) -> Result<StepOutput, ReplayError> {
        if !matches!(self.status, ReplayStatus::Running { .. }) {
            return Err(ReplayError::NotRunning);
        }
        let cycle = self.cycle;
        let frame = &self.artifact.frames()[cycle as usize];

        for name in observed.keys() {
            let known = self
                .artifact
                .entry(name)
                .is_some_and(|e| e.direction == Direction::DutDriven);
            if !known {
                return Err(ReplayError::UnexpectedObserved(name.clone()));
            }
        }

        let mut halt = false;
        for entry in self.artifact.dut_entries() {
            let obs = observed
                .get(&entry.name)
                .ok_or_else(|| ReplayError::MissingObserved(entry.name.clone()))?;
            if obs.width() != entry.width {
                return Err(ReplayError::ObservedWidthMismatch {
                    name: entry.name.clone(),
                    expected: entry.width,
                    got: obs.width(),
                });
            }
            if !self.opts.check_enabled || halt {
                continue;
            }
            let care = frame.care.field(entry.offset, entry.width);
            let mask = match &entry.check {
                CheckPolicy::Strict => care,
                CheckPolicy::Ignore => Bits::zeros(entry.width),
                CheckPolicy::Masked(m) => care.and(m),
            };
            let expected = frame.data.field(entry.offset, entry.width);
            if !expected.xor(obs).and(&mask).is_zero() {
                let m = Mismatch {
                    cycle,
                    signal: entry.name.clone(),
                    expected,
                    observed: obs.clone(),
                    mask,
                };
                self.mismatch_count += 1;
                if self.first_mismatch.is_none() {
                    self.first_mismatch = Some(m.clone());
                }
                if self.recorded.len() < self.opts.max_recorded_mismatches {
                    self.recorded.push(m);
                }
                if self.opts.stop_on_first_mismatch {
                    halt = true;
                }
            }
        }

        let drive = self
            .drive_frame(cycle)
            .expect("running implies a current frame");
        self.cycle += 1;
        let done = self.cycle == self.artifact.cycle_count();
        self.status = if halt {
            ReplayStatus::Halted { cycle }
        } else if done {
            ReplayStatus::Done {
                pass: self.mismatch_count == 0,
            }
        } else {
            ReplayStatus::Running { cycle: self.cycle }
        };
        Ok(StepOutput {
            drive,
            done: matches!(self.status, ReplayStatus::Done { .. }),
        })
    }

    pub fn report(&self) -> ReplayReport {
        let complete = matches!(self.status, ReplayStatus::Done { .. });
        ReplayReport {
            cycle_count: self.artifact.cycle_count(),
            cycles_executed: self.cycle,
            mismatch_count: self.mismatch_count,
            first_mismatch: self.first_mismatch.clone(),
            recorded: self.recorded.clone(),
            complete,
            pass: complete && self.mismatch_count == 0,
        }
    }
}

/// Summary of a replay run. `Display` output is stable and line-oriented,
/// suitable for writing to a report file and diffing across runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayReport {
    pub cycle_count: u64,
    pub cycles_executed: u64,
    pub mismatch_count: u64,
    pub first_mismatch: Option<Mismatch>,
    /// Bounded by `max_recorded_mismatches`; `mismatch_count` is not.
    pub recorded: Vec<Mismatch>,
    pub complete: bool,
    pub pass: bool,
}

impl core::fmt::Display for ReplayReport {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        writeln!(f, "cycles executed: {}/{}", self.cycles_executed, self.cycle_count)?;
        writeln!(f, "mismatches: {}", self.mismatch_count)?;
        if let Some(m) = &self.first_mismatch {
            writeln!(
                f,
                "first mismatch: cycle {} signal {} expected {}'h{} observed {}'h{} mask {}'h{}",
                m.cycle,
                m.signal,
                m.expected.width(),
                m.expected.to_hex(),
                m.observed.width(),
                m.observed.to_hex(),
                m.mask.width(),
                m.mask.to_hex()
            )?;
        }
        for m in &self.recorded {
            writeln!(
                f,
                "mismatch: cycle {} signal {} expected {} observed {}",
                m.cycle,
                m.signal,
                m.expected.to_hex(),
                m.observed.to_hex()
            )?;
        }
        writeln!(f, "result: {}", if self.pass { "PASS" } else { "FAIL" })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("engine is not running")]
    NotRunning,
    #[error("observed value for '{0}' which is not a checked device output")]
    UnexpectedObserved(String),
    #[error("no observed value for device output '{0}'")]
    MissingObserved(String),
    #[error("observed '{name}' is {got} bits, artifact says {expected}")]
    ObservedWidthMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
}
