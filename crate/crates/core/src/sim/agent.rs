// SPDX-License-Identifier: Apache-2.0

//! Bus-functional agent for the toy GPU boundary.
//!
//! Deterministic by design: it acknowledges the power request a fixed three
//! cycles after sampling it, then streams the configured fuse words, and
//! holds the memory write port ready from reset deassertion onward. All
//! run-to-run variation in a capture therefore comes from the device side,
//! which is the property replay relies on.

use alloc::vec::Vec;

use super::{Component, NetId, NetValues, Staged};
use crate::bits::Bits;

/// Edges between sampling `pm_req` high and the device sampling `pm_ack`.
pub const PM_ACK_LATENCY: u32 = 3;

pub struct AgentInputs {
    pub rst: NetId,
    pub pm_req: NetId,
    pub fuse_ready: NetId,
}

pub struct AgentOutputs {
    pub pm_ack: NetId,
    pub fuse_valid: NetId,
    pub fuse_data: NetId,
    pub mem_ready: NetId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Idle,
    AckWait { left: u32 },
    Ack,
    FuseStream,
    Drained,
}

pub struct AgentBfm {
    fuse_words: Vec<u32>,
    ins: AgentInputs,
    outs: AgentOutputs,
    phase: Phase,
    fuse_idx: usize,
}

impl AgentBfm {
    pub fn new(fuse_words: Vec<u32>, ins: AgentInputs, outs: AgentOutputs) -> Self {
        AgentBfm {
            fuse_words,
            ins,
            outs,
            phase: Phase::Idle,
            fuse_idx: 0,
        }
    }

    fn start_fuse_stream(&self) -> Phase {
        if self.fuse_words.is_empty() {
            Phase::Drained
        } else {
            Phase::FuseStream
        }
    }
}

impl Component for AgentBfm {
    fn eval(&mut self, _cycle: u64, nets: &NetValues) -> Staged {
        let in_reset = nets.is_high(self.ins.rst);
        self.phase = if in_reset {
            self.fuse_idx = 0;
            Phase::Idle
        } else {
            match self.phase {
                Phase::Idle => {
                    if nets.is_high(self.ins.pm_req) {
                        // Ack becomes visible PM_ACK_LATENCY edges after the
                        // request was sampled: two waiting states, then the
                        // commit of Ack's output makes the third.
                        Phase::AckWait {
                            left: PM_ACK_LATENCY - 1,
                        }
                    } else {
                        Phase::Idle
                    }
                }
                Phase::AckWait { left: 1 } => Phase::Ack,
                Phase::AckWait { left } => Phase::AckWait { left: left - 1 },
                Phase::Ack => {
                    if nets.is_high(self.ins.pm_req) {
                        Phase::Ack
                    } else {
                        // Request dropped: the device saw the ack.
                        self.start_fuse_stream()
                    }
                }
                Phase::FuseStream => {
                    if nets.is_high(self.ins.fuse_ready) {
                        self.fuse_idx += 1;
                        if self.fuse_idx == self.fuse_words.len() {
                            Phase::Drained
                        } else {
                            Phase::FuseStream
                        }
                    } else {
                        Phase::FuseStream
                    }
                }
                Phase::Drained => Phase::Drained,
            }
        };

        let mut s = Staged::new();
        s.set_bit(self.outs.pm_ack, matches!(self.phase, Phase::Ack));
        let streaming = matches!(self.phase, Phase::FuseStream);
        s.set_bit(self.outs.fuse_valid, streaming);
        let word = if streaming {
            self.fuse_words[self.fuse_idx] as u64
        } else {
            0
        };
        s.set(self.outs.fuse_data, Bits::from_u64(32, word));
        s.set_bit(self.outs.mem_ready, !in_reset);
        s
    }

    fn as_any(&self) -> &dyn core::any::Any {
        self
    }
}
