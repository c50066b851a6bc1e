// SPDX-License-Identifier: Apache-2.0

//! Prebuilt testbenches for the toy GPU boundary.
//!
//! Two benches share one netlist shape. The IP bench pairs the device with
//! its live bus-functional agent and is the capture source. The SoC bench
//! replaces the agent with a replay adapter fed from an artifact, which is
//! the software twin of dropping a replay ROM into a chip-level testbench.
//! Both write device memory traffic through the same passive sink, so their
//! memory images are directly comparable.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::adapter::ReplayAdapter;
use super::agent::{AgentBfm, AgentInputs, AgentOutputs};
use super::gpu::{GpuInputs, GpuOutputs, ToyGpu, ToyGpuConfig};
use super::{Component, NetId, NetValues, SimBuildError, Staged, Testbench};
use crate::artifact::ReplayArtifact;
use crate::bits::Bits;
use crate::engine::{ReplayEngine, ReplayOptions};
use crate::ifspec::{
    CheckPolicy, ClockSpec, Direction, InterfaceSpec, ResetSpec, SignalBinding, StartCondition,
};
use crate::waveform::{Timescale, TimescaleUnit};

/// Edges during which reset is sampled asserted at the start of a run.
pub const RESET_CYCLES: u64 = 5;

/// Default clock period in ticks (one tick is 1 ns).
pub const CLOCK_PERIOD: u64 = 10;

/// Boundary ports: name, width, who drives it during replay.
const PORTS: &[(&str, usize, Direction)] = &[
    ("pm_ack", 1, Direction::AgentDriven),
    ("fuse_valid", 1, Direction::AgentDriven),
    ("fuse_data", 32, Direction::AgentDriven),
    ("mem_ready", 1, Direction::AgentDriven),
    ("pm_req", 1, Direction::DutDriven),
    ("fuse_ready", 1, Direction::DutDriven),
    ("mem_valid", 1, Direction::DutDriven),
    ("mem_addr", 64, Direction::DutDriven),
    ("mem_wdata", 32, Direction::DutDriven),
    ("done", 1, Direction::DutDriven),
];

/// The capture description matching the benches built here: clock and
/// active-high reset under `scope`, every boundary port bound under its own
/// name, strict checking, cycle zero after reset deassertion.
pub fn boundary_interface_spec(scope: &str) -> InterfaceSpec {
    let bindings = PORTS
        .iter()
        .map(|&(name, width, direction)| SignalBinding {
            name: name.into(),
            capture_path: alloc::format!("{scope}.{name}"),
            width,
            direction,
            check: CheckPolicy::Strict,
        })
        .collect();
    InterfaceSpec::new(
        ClockSpec {
            capture_path: alloc::format!("{scope}.clk"),
        },
        Some(ResetSpec {
            capture_path: alloc::format!("{scope}.rst"),
            active_level: true,
            start: StartCondition::AfterResetDeassert,
        }),
        bindings,
    )
    .expect("boundary spec is statically valid")
}

/// Drives the reset net: asserted for [`RESET_CYCLES`] sampled edges.
struct ResetGen {
    rst: NetId,
    active_cycles: u64,
}

impl Component for ResetGen {
    fn eval(&mut self, cycle: u64, _nets: &NetValues) -> Staged {
        let mut s = Staged::new();
        // With the initial value asserted at tick 0, committing the
        // deassertion at edge `active_cycles - 1` yields exactly
        // `active_cycles` edges that sample reset high.
        s.set_bit(self.rst, cycle + 1 < self.active_cycles);
        s
    }

    fn as_any(&self) -> &dyn core::any::Any {
        self
    }
}

/// Observes the memory write port and commits accepted beats to bench
/// memory. Passive: drives nothing.
struct MemorySink {
    mem_valid: NetId,
    mem_ready: NetId,
    mem_addr: NetId,
    mem_wdata: NetId,
}

impl Component for MemorySink {
    fn eval(&mut self, _cycle: u64, nets: &NetValues) -> Staged {
        let mut s = Staged::new();
        if nets.is_high(self.mem_valid) && nets.is_high(self.mem_ready) {
            let addr = nets.get(self.mem_addr).to_u64();
            let wdata = nets.get(self.mem_wdata).to_u64() as u32;
            s.write_mem(addr, wdata.to_le_bytes().to_vec());
        }
        s
    }

    fn as_any(&self) -> &dyn core::any::Any {
        self
    }
}

struct Nets {
    rst: NetId,
    pm_req: NetId,
    pm_ack: NetId,
    fuse_valid: NetId,
    fuse_ready: NetId,
    fuse_data: NetId,
    mem_valid: NetId,
    mem_ready: NetId,
    mem_addr: NetId,
    mem_wdata: NetId,
    done: NetId,
}

fn build_common(cfg: &ToyGpuConfig) -> Result<(Testbench, Nets), SimBuildError> {
    cfg.validate()?;
    let ts = Timescale::new(1, TimescaleUnit::Ns).expect("static timescale");
    let mut tb = Testbench::new("tb", CLOCK_PERIOD, ts)?;
    let rst = tb.add_net("rst", 1)?;
    let add = |tb: &mut Testbench, name: &str| -> Result<NetId, SimBuildError> {
        let (_, width, _) = PORTS.iter().find(|(n, _, _)| *n == name).unwrap();
        tb.add_net(name, *width)
    };
    let nets = Nets {
        rst,
        pm_ack: add(&mut tb, "pm_ack")?,
        fuse_valid: add(&mut tb, "fuse_valid")?,
        fuse_data: add(&mut tb, "fuse_data")?,
        mem_ready: add(&mut tb, "mem_ready")?,
        pm_req: add(&mut tb, "pm_req")?,
        fuse_ready: add(&mut tb, "fuse_ready")?,
        mem_valid: add(&mut tb, "mem_valid")?,
        mem_addr: add(&mut tb, "mem_addr")?,
        mem_wdata: add(&mut tb, "mem_wdata")?,
        done: add(&mut tb, "done")?,
    };
    tb.set_initial(rst, Bits::from_u64(1, 1));
    tb.add_component(
        "reset_gen",
        Box::new(ResetGen {
            rst,
            active_cycles: RESET_CYCLES,
        }),
        &[rst],
    )?;
    tb.add_component(
        "gpu",
        Box::new(ToyGpu::new(
            cfg.clone(),
            GpuInputs {
                rst,
                pm_ack: nets.pm_ack,
                fuse_valid: nets.fuse_valid,
                fuse_data: nets.fuse_data,
                mem_ready: nets.mem_ready,
            },
            GpuOutputs {
                pm_req: nets.pm_req,
                fuse_ready: nets.fuse_ready,
                mem_valid: nets.mem_valid,
                mem_addr: nets.mem_addr,
                mem_wdata: nets.mem_wdata,
                done: nets.done,
            },
        )),
        &[
            nets.pm_req,
            nets.fuse_ready,
            nets.mem_valid,
            nets.mem_addr,
            nets.mem_wdata,
            nets.done,
        ],
    )?;
    tb.add_component(
        "mem_sink",
        Box::new(MemorySink {
            mem_valid: nets.mem_valid,
            mem_ready: nets.mem_ready,
            mem_addr: nets.mem_addr,
            mem_wdata: nets.mem_wdata,
        }),
        &[],
    )?;
    tb.set_done_net(nets.done);
    Ok((tb, nets))
}

/// Capture bench: device plus live agent.
pub fn build_ip_testbench(cfg: &ToyGpuConfig) -> Result<Testbench, SimBuildError> {
    let (mut tb, nets) = build_common(cfg)?;
    tb.add_component(
        "agent",
        Box::new(AgentBfm::new(
            cfg.fuse_words.clone(),
            AgentInputs {
                rst: nets.rst,
                pm_req: nets.pm_req,
                fuse_ready: nets.fuse_ready,
            },
            AgentOutputs {
                pm_ack: nets.pm_ack,
                fuse_valid: nets.fuse_valid,
                fuse_data: nets.fuse_data,
                mem_ready: nets.mem_ready,
            },
        )),
        &[nets.pm_ack, nets.fuse_valid, nets.fuse_data, nets.mem_ready],
    )?;
    Ok(tb)
}

/// Replay bench: device plus replay adapter standing in for the agent.
///
/// The artifact's agent-driven entries must cover the boundary's
/// agent-driven ports exactly, at matching widths; its device-driven
/// entries may be any subset of the device-driven ports.
pub fn build_soc_testbench(
    artifact: ReplayArtifact,
    cfg: &ToyGpuConfig,
    opts: ReplayOptions,
) -> Result<Testbench, SimBuildError> {
    let (mut tb, nets) = build_common(cfg)?;

    let port_net = |name: &str| -> NetId {
        match name {
            "pm_ack" => nets.pm_ack,
            "fuse_valid" => nets.fuse_valid,
            "fuse_data" => nets.fuse_data,
            "mem_ready" => nets.mem_ready,
            "pm_req" => nets.pm_req,
            "fuse_ready" => nets.fuse_ready,
            "mem_valid" => nets.mem_valid,
            "mem_addr" => nets.mem_addr,
            "mem_wdata" => nets.mem_wdata,
            "done" => nets.done,
            _ => unreachable!("checked against PORTS"),
        }
    };

    let mut drives: Vec<(String, NetId)> = Vec::new();
    let mut observes: Vec<(String, NetId)> = Vec::new();
    for entry in artifact.directory() {
        let port = PORTS
            .iter()
            .find(|(n, _, _)| *n == entry.name)
            .ok_or_else(|| SimBuildError::UnknownPort(entry.name.clone()))?;
        if port.1 != entry.width {
            return Err(SimBuildError::PortWidthMismatch {
                name: entry.name.clone(),
                artifact: entry.width,
                net: port.1,
            });
        }
        if port.2 != entry.direction {
            return Err(SimBuildError::PortDirectionMismatch(entry.name.clone()));
        }
        match entry.direction {
            Direction::AgentDriven => drives.push((entry.name.clone(), port_net(&entry.name))),
            Direction::DutDriven => observes.push((entry.name.clone(), port_net(&entry.name))),
        }
    }
    // Every agent port must be driven or the device would read dead nets.
    for &(name, _, dir) in PORTS {
        if dir == Direction::AgentDriven && !drives.iter().any(|(n, _)| n == name) {
            return Err(SimBuildError::MissingAgentPort(name.into()));
        }
    }

    let engine = ReplayEngine::new(artifact, opts);
    let adapter = ReplayAdapter::new(engine, drives, observes, Some((nets.rst, true)));
    // Frame zero must be live before the first edge, not one edge late.
    let mut initial_nets: Vec<(NetId, Bits)> = Vec::new();
    for (name, value) in adapter.initial_drives() {
        initial_nets.push((port_net(name), value.clone()));
    }
    for (net, value) in initial_nets {
        tb.set_initial(net, value);
    }
    let outputs: Vec<NetId> = vec![
        nets.pm_ack,
        nets.fuse_valid,
        nets.fuse_data,
        nets.mem_ready,
    ];
    tb.add_component("replay_adapter", Box::new(adapter), &outputs)?;
    Ok(tb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::artifact::{encode_artifact, EncodeOptions};
    use crate::sim::RunStatus;
    use crate::waveform::write_vcd;

    fn default_cfg() -> ToyGpuConfig {
        ToyGpuConfig::default()
    }

    fn run_capture(cfg: &ToyGpuConfig) -> Testbench {
        let mut tb = build_ip_testbench(cfg).unwrap();
        let status = tb.run(10_000);
        assert!(matches!(status, RunStatus::DoneAsserted(_)), "{status:?}");
        tb
    }

    #[test]
    fn default_run_writes_ascending_words() {
        let tb = run_capture(&default_cfg());
        let mem = tb.memory().dump(0x43_16bc_0000, 64);
        let mut expected = Vec::new();
        for i in 0u32..16 {
            expected.extend_from_slice(&i.to_le_bytes());
        }
        assert_eq!(mem, expected);
        assert_eq!(tb.memory().written_len(), 64);
    }

    #[test]
    fn single_word_run_completes() {
        let cfg = ToyGpuConfig {
            word_count: 1,
            ..default_cfg()
        };
        let tb = run_capture(&cfg);
        assert_eq!(tb.memory().dump(0x43_16bc_0000, 4), vec![0, 0, 0, 0]);
        assert_eq!(tb.memory().written_len(), 4);
    }

    #[test]
    fn empty_fuse_list_skips_the_fuse_phase() {
        let cfg = ToyGpuConfig {
            fuse_words: vec![],
            word_count: 2,
            ..default_cfg()
        };
        let tb = run_capture(&cfg);
        assert_eq!(tb.memory().written_len(), 8);
        // fuse_ready never rose.
        let db = tb.vcd();
        let sig = db.signal("tb.fuse_ready").unwrap();
        assert!(db.rising_edges(sig).unwrap().times.is_empty());
    }

    #[test]
    fn capture_is_deterministic() {
        let a = write_vcd(run_capture(&default_cfg()).vcd());
        let b = write_vcd(run_capture(&default_cfg()).vcd());
        assert_eq!(a, b);
    }

    #[test]
    fn randomization_changes_timing_but_not_memory() {
        let mut cfg_s = default_cfg();
        cfg_s.randomization.enabled = true;
        cfg_s.randomization.seed = 11;
        let mut cfg_t = cfg_s.clone();
        cfg_t.randomization.seed = 12;
        let tb_s = run_capture(&cfg_s);
        let tb_t = run_capture(&cfg_t);
        assert_ne!(
            write_vcd(tb_s.vcd()),
            write_vcd(tb_t.vcd()),
            "different seeds should shift timing"
        );
        assert_eq!(
            tb_s.memory().dump(0x43_16bc_0000, 64),
            tb_t.memory().dump(0x43_16bc_0000, 64),
            "content is seed-independent"
        );
    }

    #[test]
    fn zero_word_count_is_rejected() {
        let cfg = ToyGpuConfig {
            word_count: 0,
            ..default_cfg()
        };
        assert!(matches!(
            build_ip_testbench(&cfg),
            Err(SimBuildError::InvalidConfig(_))
        ));
    }

    #[test]
    fn reset_is_sampled_active_for_exactly_reset_cycles_edges() {
        let tb = run_capture(&default_cfg());
        let db = tb.vcd();
        let rst = db.signal("tb.rst").unwrap();
        let clk = db.signal("tb.clk").unwrap();
        let edges = db.rising_edges(clk).unwrap().times;
        let active: Vec<bool> = edges
            .iter()
            .map(|&t| db.value_before(rst, t).to_bits().unwrap().get(0))
            .collect();
        assert_eq!(active.iter().take_while(|&&a| a).count() as u64, RESET_CYCLES);
        assert!(active[RESET_CYCLES as usize..].iter().all(|&a| !a));
    }

    #[test]
    fn capture_encodes_and_replays_closed_loop() {
        let cfg = default_cfg();
        let capture = run_capture(&cfg);
        let spec = boundary_interface_spec("tb");
        let (artifact, warnings) =
            encode_artifact(capture.vcd(), &spec, &EncodeOptions::default()).unwrap();
        assert_eq!(warnings.zeroed_drive_bits, 0);
        assert_eq!(artifact.clock_period(), CLOCK_PERIOD);
        assert!(artifact.cycle_count() > 0);

        let mut soc = build_soc_testbench(artifact, &cfg, ReplayOptions::default()).unwrap();
        let status = soc.run(10_000);
        assert!(matches!(status, RunStatus::DoneAsserted(_)), "{status:?}");
        let report = soc.replay_report().unwrap();
        assert!(report.complete, "replay should consume every frame");
        assert_eq!(report.mismatch_count, 0, "{report}");
        assert!(report.pass);
        assert_eq!(
            soc.memory().dump(0x43_16bc_0000, 64),
            capture.memory().dump(0x43_16bc_0000, 64)
        );
    }

    #[test]
    fn replay_with_different_seed_mismatches() {
        let mut cfg_s = default_cfg();
        cfg_s.randomization.enabled = true;
        cfg_s.randomization.seed = 5;
        let capture = run_capture(&cfg_s);
        let spec = boundary_interface_spec("tb");
        let (artifact, _) =
            encode_artifact(capture.vcd(), &spec, &EncodeOptions::default()).unwrap();

        let mut cfg_t = cfg_s.clone();
        cfg_t.randomization.seed = 6;
        let mut soc = build_soc_testbench(artifact, &cfg_t, ReplayOptions::default()).unwrap();
        soc.run(10_000);
        let report = soc.replay_report().unwrap();
        assert!(report.mismatch_count > 0);
        assert!(!report.pass);
        let first = report.first_mismatch.unwrap();
        assert!(!first.expected.xor(&first.observed).and(&first.mask).is_zero());
    }

    #[test]
    fn artifact_with_unknown_port_is_rejected() {
        let capture = run_capture(&default_cfg());
        // Rename a binding so the artifact directory has a foreign name.
        let mut spec_bindings: Vec<SignalBinding> = boundary_interface_spec("tb")
            .bindings()
            .to_vec();
        spec_bindings[0].name = "weird".into();
        let spec = InterfaceSpec::new(
            ClockSpec {
                capture_path: "tb.clk".into(),
            },
            Some(ResetSpec {
                capture_path: "tb.rst".into(),
                active_level: true,
                start: StartCondition::AfterResetDeassert,
            }),
            spec_bindings,
        )
        .unwrap();
        let (artifact, _) =
            encode_artifact(capture.vcd(), &spec, &EncodeOptions::default()).unwrap();
        assert!(matches!(
            build_soc_testbench(artifact, &default_cfg(), ReplayOptions::default()),
            Err(SimBuildError::UnknownPort(name)) if name == "weird"
        ));
    }

    #[test]
    fn artifact_missing_an_agent_port_is_rejected() {
        let capture = run_capture(&default_cfg());
        let full = boundary_interface_spec("tb");
        let bindings: Vec<SignalBinding> = full
            .bindings()
            .iter()
            .filter(|b| b.name != "mem_ready")
            .cloned()
            .collect();
        let spec = InterfaceSpec::new(
            ClockSpec {
                capture_path: "tb.clk".into(),
            },
            Some(ResetSpec {
                capture_path: "tb.rst".into(),
                active_level: true,
                start: StartCondition::AfterResetDeassert,
            }),
            bindings,
        )
        .unwrap();
        let (artifact, _) =
            encode_artifact(capture.vcd(), &spec, &EncodeOptions::default()).unwrap();
        assert!(matches!(
            build_soc_testbench(artifact, &default_cfg(), ReplayOptions::default()),
            Err(SimBuildError::MissingAgentPort(name)) if name == "mem_ready"
        ));
    }
}
