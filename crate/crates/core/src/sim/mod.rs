// SPDX-License-Identifier: Apache-2.0

//! Cycle-accurate simulation kernel.
//!
//! The kernel models a single clock domain with two-phase edges: on every
//! rising edge, all components evaluate against the pre-edge net values and
//! stage their writes; only after every component has evaluated are the
//! staged writes committed. Evaluation order is therefore unobservable, and
//! a value written at edge `i` is first seen by other components at edge
//! `i + 1`, exactly like registered outputs between flops.
//!
//! Every net change is traced into a waveform database at the tick of the
//! edge that committed it; the clock itself is regenerated into the trace
//! rather than being a net, so captures always carry a clean fixed-period
//! clock.

mod adapter;
mod agent;
mod bench;
mod gpu;
mod memory;
mod rng;

pub use adapter::ReplayAdapter;
pub use agent::AgentBfm;
pub use bench::{
    boundary_interface_spec, build_ip_testbench, build_soc_testbench, RESET_CYCLES,
};
pub use gpu::{RandomizationConfig, ToyGpu, ToyGpuConfig};
pub use memory::SparseMemory;
pub use rng::XorShift64Star;

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::bits::Bits;
use crate::engine::ReplayReport;
use crate::fourstate::FourStateVector;
use crate::waveform::{SignalId, Timescale, WaveformDb};

/// Handle to a net inside one testbench.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetId(usize);

/// Read-only pre-edge view of all nets, as passed to `Component::eval`.
#[derive(Debug)]
pub struct NetValues {
    values: Vec<Bits>,
}

impl NetValues {
    pub fn get(&self, id: NetId) -> &Bits {
        &self.values[id.0]
    }

    /// Convenience for one-bit nets.
    pub fn is_high(&self, id: NetId) -> bool {
        self.values[id.0].get(0)
    }
}

/// Writes staged during evaluation, committed after all components ran.
#[derive(Debug, Default)]
pub struct Staged {
    nets: Vec<(NetId, Bits)>,
    mem_writes: Vec<(u64, Vec<u8>)>,
}

impl Staged {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, net: NetId, value: Bits) {
        self.nets.push((net, value));
    }

    pub fn set_bit(&mut self, net: NetId, value: bool) {
        self.nets.push((net, Bits::from_u64(1, value as u64)));
    }

    pub fn write_mem(&mut self, addr: u64, data: Vec<u8>) {
        self.mem_writes.push((addr, data));
    }
}

/// A synchronous block evaluated once per rising clock edge.
///
/// `eval` sees pre-edge values and stages post-edge values; it must write
/// only to nets declared as its outputs at registration.
pub trait Component: Send + core::any::Any {
    fn eval(&mut self, cycle: u64, nets: &NetValues) -> Staged;
    fn as_any(&self) -> &dyn core::any::Any;
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    /// The done net was sampled high at this cycle (which still executed).
    DoneAsserted(u64),
    /// The cycle budget ran out first.
    Timeout,
}

pub struct Testbench {
    scope: String,
    clock_period: u64,
    timescale: Timescale,
    net_names: Vec<String>,
    net_widths: Vec<usize>,
    values: NetValues,
    drivers: Vec<Option<usize>>,
    components: Vec<(String, Box<dyn Component>)>,
    outputs: Vec<Vec<NetId>>,
    done_net: Option<NetId>,
    memory: SparseMemory,
    db: WaveformDb,
    net_sigs: Vec<SignalId>,
    clk_sig: SignalId,
    cycles_run: u64,
    ran: bool,
}

impl Testbench {
    /// `clock_period` is in timescale ticks; rising edges land at
    /// `period/2 + i*period` so the clock starts low at tick 0.
    pub fn new(scope: &str, clock_period: u64, timescale: Timescale) -> Result<Self, SimBuildError> {
        if clock_period < 2 {
            return Err(SimBuildError::BadClockPeriod(clock_period));
        }
        let mut db = WaveformDb::new(timescale);
        let clk_sig = db
            .add_signal(&alloc::format!("{scope}.clk"), 1)
            .map_err(|e| SimBuildError::Trace(e.to_string()))?;
        Ok(Testbench {
            scope: scope.into(),
            clock_period,
            timescale,
            net_names: Vec::new(),
            net_widths: Vec::new(),
            values: NetValues { values: Vec::new() },
            drivers: Vec::new(),
            components: Vec::new(),
            outputs: Vec::new(),
            done_net: None,
            memory: SparseMemory::new(),
            db,
            net_sigs: Vec::new(),
            clk_sig,
            cycles_run: 0,
            ran: false,
        })
    }

    pub fn clock_period(&self) -> u64 {
        self.clock_period
    }

    pub fn timescale(&self) -> Timescale {
        self.timescale
    }

    /// Declares a net, initialized to all zeros.
    pub fn add_net(&mut self, name: &str, width: usize) -> Result<NetId, SimBuildError> {
        if self.net_names.iter().any(|n| n == name) {
            return Err(SimBuildError::DuplicateNet(name.into()));
        }
        let sig = self
            .db
            .add_signal(&alloc::format!("{}.{name}", self.scope), width)
            .map_err(|e| SimBuildError::Trace(e.to_string()))?;
        let id = NetId(self.net_names.len());
        self.net_names.push(name.into());
        self.net_widths.push(width);
        self.values.values.push(Bits::zeros(width));
        self.drivers.push(None);
        self.net_sigs.push(sig);
        Ok(id)
    }

    /// Value a net holds before the first edge (sampled at edge 0).
    pub fn set_initial(&mut self, net: NetId, value: Bits) {
        assert!(!self.ran, "initial values must be set before run");
        assert_eq!(value.width(), self.net_widths[net.0], "initial value width");
        self.values.values[net.0] = value;
    }

    /// Registers a component and claims its output nets. Each net is
    /// writable by exactly one component.
    pub fn add_component(
        &mut self,
        name: &str,
        component: Box<dyn Component>,
        outputs: &[NetId],
    ) -> Result<(), SimBuildError> {
        let idx = self.components.len();
        for &net in outputs {
            if let Some(owner) = self.drivers[net.0] {
                return Err(SimBuildError::DriverConflict {
                    net: self.net_names[net.0].clone(),
                    first: self.components[owner].0.clone(),
                    second: name.into(),
                });
            }
            self.drivers[net.0] = Some(idx);
        }
        self.components.push((name.into(), component));
        self.outputs.push(outputs.to_vec());
        Ok(())
    }

    /// Marks the net whose sampled-high value ends the run.
    pub fn set_done_net(&mut self, net: NetId) {
        self.done_net = Some(net);
    }

    pub fn net(&self, name: &str) -> Option<NetId> {
        self.net_names.iter().position(|n| n == name).map(NetId)
    }

    pub fn net_value(&self, net: NetId) -> &Bits {
        &self.values.values[net.0]
    }

    pub fn memory(&self) -> &SparseMemory {
        &self.memory
    }

    /// Trace of everything committed so far, including initial values.
    pub fn vcd(&self) -> &WaveformDb {
        &self.db
    }

    pub fn cycles_run(&self) -> u64 {
        self.cycles_run
    }

    /// Report of the replay adapter, if this bench contains one.
    pub fn replay_report(&self) -> Option<ReplayReport> {
        self.components
            .iter()
            .filter_map(|(_, c)| c.as_any().downcast_ref::<ReplayAdapter>())
            .map(|a| a.report())
            .next()
    }

    /// Runs until the done net is sampled high or `max_cycles` edges passed.
    /// Single-shot: a testbench cannot be rerun.
    pub fn run(&mut self, max_cycles: u64) -> RunStatus {
        assert!(!self.ran, "a testbench can only run once");
        self.ran = true;

        // Tick 0: record every initial value and the low clock, so every
        // signal has a defined value before the first edge.
        for (i, sig) in self.net_sigs.iter().enumerate() {
            let v = FourStateVector::from_bits(&self.values.values[i]);
            self.db.record_change(*sig, 0, v).expect("tick 0 trace");
        }
        let low = FourStateVector::from_bits(&Bits::zeros(1));
        let high = FourStateVector::from_bits(&Bits::from_u64(1, 1));
        self.db
            .record_change(self.clk_sig, 0, low.clone())
            .expect("tick 0 clock");

        let half = self.clock_period / 2;
        for cycle in 0..max_cycles {
            let edge_tick = half + cycle * self.clock_period;
            let done_sampled = self
                .done_net
                .map(|d| self.values.values[d.0].get(0))
                .unwrap_or(false);

            // Phase one: evaluate everything against pre-edge values.
            let mut staged: Vec<Staged> = Vec::with_capacity(self.components.len());
            for (_, component) in self.components.iter_mut() {
                staged.push(component.eval(cycle, &self.values));
            }

            // Phase two: commit. Trace the edge and any changed nets at the
            // same tick; sampling is strictly-before, so these changes are
            // visible at edge `cycle + 1`, not this one.
            self.db
                .record_change(self.clk_sig, edge_tick, high.clone())
                .expect("clock trace");
            for (idx, s) in staged.into_iter().enumerate() {
                for (net, value) in s.nets {
                    assert!(
                        self.outputs[idx].contains(&net),
                        "component '{}' wrote undeclared net '{}'",
                        self.components[idx].0,
                        self.net_names[net.0]
                    );
                    assert_eq!(
                        value.width(),
                        self.net_widths[net.0],
                        "component '{}' wrote {} bits to '{}'",
                        self.components[idx].0,
                        value.width(),
                        self.net_names[net.0]
                    );
                    if self.values.values[net.0] != value {
                        self.db
                            .record_change(
                                self.net_sigs[net.0],
                                edge_tick,
                                FourStateVector::from_bits(&value),
                            )
                            .expect("net trace");
                        self.values.values[net.0] = value;
                    }
                }
                for (addr, data) in s.mem_writes {
                    self.memory.write(addr, &data);
                }
            }
            self.db
                .record_change(self.clk_sig, edge_tick + half, low.clone())
                .expect("clock trace");

            self.cycles_run = cycle + 1;
            if done_sampled {
                return RunStatus::DoneAsserted(cycle);
            }
        }
        RunStatus::Timeout
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimBuildError {
    #[error("clock period must be at least 2 ticks, got {0}")]
    BadClockPeriod(u64),
    #[error("duplicate net '{0}'")]
    DuplicateNet(String),
    #[error("net '{net}' driven by both '{first}' and '{second}'")]
    DriverConflict {
        net: String,
        first: String,
        second: String,
    },
    #[error("invalid testbench config: {0}")]
    InvalidConfig(String),
    #[error("artifact signal '{0}' is not a boundary port")]
    UnknownPort(String),
    #[error("artifact signal '{name}' is {artifact} bits, boundary port is {net}")]
    PortWidthMismatch {
        name: String,
        artifact: usize,
        net: usize,
    },
    #[error("artifact signal '{0}' has the wrong direction for its boundary port")]
    PortDirectionMismatch(String),
    #[error("artifact is missing agent-driven boundary port '{0}'")]
    MissingAgentPort(String),
    #[error("trace setup failed: {0}")]
    Trace(String),
}
