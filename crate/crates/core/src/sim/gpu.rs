// SPDX-License-Identifier: Apache-2.0

//! Toy GPU device model.
//!
//! A small synchronous state machine exercising three agent-facing
//! interfaces in sequence, the way a real device boots: a power-management
//! request/acknowledge handshake, a fuse streaming interface it consumes,
//! and a valid/ready memory write port through which it writes one 32-bit
//! word per index into agent memory, then raises `done`.
//!
//! With randomization enabled, the device inserts seeded stalls before
//! asserting its handshake outputs. That models the flop-init jitter real
//! devices show between otherwise identical runs: the traffic content stays
//! the same while its timing moves, which is exactly what replay checking
//! must detect. With randomization disabled the device is cycle-identical
//! from run to run.

use alloc::vec::Vec;

use super::rng::XorShift64Star;
use super::{Component, NetId, NetValues, SimBuildError, Staged};
use crate::bits::Bits;

/// Seeded stall injection. `max_stall` bounds each inserted stall in cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomizationConfig {
    pub enabled: bool,
    pub seed: u64,
    pub max_stall: u32,
}

impl Default for RandomizationConfig {
    fn default() -> Self {
        RandomizationConfig {
            enabled: false,
            seed: 1,
            max_stall: 3,
        }
    }
}

/// Device parameters. Defaults reproduce the canonical bring-up sequence:
/// sixteen words written at `0x43_16bc_0000`, word `i` holding value `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToyGpuConfig {
    pub mem_base: u64,
    pub word_count: u32,
    pub fuse_words: Vec<u32>,
    pub randomization: RandomizationConfig,
}

impl Default for ToyGpuConfig {
    fn default() -> Self {
        ToyGpuConfig {
            mem_base: 0x43_16bc_0000,
            word_count: 16,
            fuse_words: alloc::vec![0xdead_beef, 0xc0ff_ee42, 0x1234_5678, 0x0bad_f00d],
            randomization: RandomizationConfig::default(),
        }
    }
}

impl ToyGpuConfig {
    pub fn validate(&self) -> Result<(), SimBuildError> {
        if self.word_count == 0 {
            return Err(SimBuildError::InvalidConfig(
                "word_count must be at least 1".into(),
            ));
        }
        if self
            .mem_base
            .checked_add(4 * self.word_count as u64)
            .is_none()
        {
            return Err(SimBuildError::InvalidConfig(
                "memory region wraps the address space".into(),
            ));
        }
        Ok(())
    }
}

/// Input nets, sampled pre-edge.
pub struct GpuInputs {
    pub rst: NetId,
    pub pm_ack: NetId,
    pub fuse_valid: NetId,
    pub fuse_data: NetId,
    pub mem_ready: NetId,
}

/// Output nets; all registered (committed at the edge, visible next cycle).
pub struct GpuOutputs {
    pub pm_req: NetId,
    pub fuse_ready: NetId,
    pub mem_valid: NetId,
    pub mem_addr: NetId,
    pub mem_wdata: NetId,
    pub done: NetId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Reset,
    PmStall { left: u32 },
    PmReq,
    FuseStall { left: u32 },
    FuseReady,
    MemStall { left: u32 },
    MemIssue,
    Done,
}

pub struct ToyGpu {
    cfg: ToyGpuConfig,
    ins: GpuInputs,
    outs: GpuOutputs,
    rng: XorShift64Star,
    phase: Phase,
    fuse_idx: usize,
    word_idx: u32,
    fuses_seen: Vec<u32>,
}

impl ToyGpu {
    pub fn new(cfg: ToyGpuConfig, ins: GpuInputs, outs: GpuOutputs) -> Self {
        let rng = XorShift64Star::new(cfg.randomization.seed);
        ToyGpu {
            cfg,
            ins,
            outs,
            rng,
            phase: Phase::Reset,
            fuse_idx: 0,
            word_idx: 0,
            fuses_seen: Vec::new(),
        }
    }

    fn stall(&mut self) -> u32 {
        if self.cfg.randomization.enabled {
            self.rng.next_at_most(self.cfg.randomization.max_stall)
        } else {
            0
        }
    }

    fn enter_fuse_phase(&mut self) -> Phase {
        if self.fuse_idx == self.cfg.fuse_words.len() {
            return self.enter_mem_phase();
        }
        match self.stall() {
            0 => Phase::FuseReady,
            n => Phase::FuseStall { left: n },
        }
    }

    fn enter_mem_phase(&mut self) -> Phase {
        if self.word_idx == self.cfg.word_count {
            return Phase::Done;
        }
        match self.stall() {
            0 => Phase::MemIssue,
            n => Phase::MemStall { left: n },
        }
    }
}

impl Component for ToyGpu {
    fn eval(&mut self, _cycle: u64, nets: &NetValues) -> Staged {
        // State transition from sampled inputs. Being in a handshake phase
        // means the corresponding output has been high for the cycle that
        // just elapsed, so sampling the peer's signal completes the shake.
        self.phase = if nets.is_high(self.ins.rst) {
            self.fuse_idx = 0;
            self.word_idx = 0;
            self.fuses_seen.clear();
            Phase::Reset
        } else {
            match self.phase {
                Phase::Reset => match self.stall() {
                    0 => Phase::PmReq,
                    n => Phase::PmStall { left: n },
                },
                Phase::PmStall { left: 1 } => Phase::PmReq,
                Phase::PmStall { left } => Phase::PmStall { left: left - 1 },
                Phase::PmReq => {
                    if nets.is_high(self.ins.pm_ack) {
                        self.enter_fuse_phase()
                    } else {
                        Phase::PmReq
                    }
                }
                Phase::FuseStall { left: 1 } => Phase::FuseReady,
                Phase::FuseStall { left } => Phase::FuseStall { left: left - 1 },
                Phase::FuseReady => {
                    if nets.is_high(self.ins.fuse_valid) {
                        self.fuses_seen
                            .push(nets.get(self.ins.fuse_data).to_u64() as u32);
                        self.fuse_idx += 1;
                        self.enter_fuse_phase()
                    } else {
                        Phase::FuseReady
                    }
                }
                Phase::MemStall { left: 1 } => Phase::MemIssue,
                Phase::MemStall { left } => Phase::MemStall { left: left - 1 },
                Phase::MemIssue => {
                    if nets.is_high(self.ins.mem_ready) {
                        self.word_idx += 1;
                        self.enter_mem_phase()
                    } else {
                        Phase::MemIssue
                    }
                }
                Phase::Done => Phase::Done,
            }
        };

        // Registered outputs from the new state.
        let mut s = Staged::new();
        s.set_bit(self.outs.pm_req, matches!(self.phase, Phase::PmReq));
        s.set_bit(self.outs.fuse_ready, matches!(self.phase, Phase::FuseReady));
        let issuing = matches!(self.phase, Phase::MemIssue);
        s.set_bit(self.outs.mem_valid, issuing);
        let (addr, wdata) = if issuing {
            (
                self.cfg.mem_base + 4 * self.word_idx as u64,
                self.word_idx as u64,
            )
        } else {
            (0, 0)
        };
        s.set(self.outs.mem_addr, Bits::from_u64(64, addr));
        s.set(self.outs.mem_wdata, Bits::from_u64(32, wdata));
        s.set_bit(self.outs.done, matches!(self.phase, Phase::Done));
        s
    }

    fn as_any(&self) -> &dyn core::any::Any {
        self
    }
}
