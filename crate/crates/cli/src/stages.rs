// SPDX-License-Identifier: Apache-2.0

//! Pipeline stages shared by the individual subcommands and `flow`.
//!
//! Each stage reads its inputs from and writes its outputs to the configured
//! output directory, echoing every written path, so manually composed
//! subcommands produce exactly what `flow` produces. Failures carry the
//! stage's documented exit code.

use std::fs;
use std::path::{Path, PathBuf};

use retrace_core::artifact::{
    deserialize_artifact, encode_artifact, footprint, serialize_artifact, ReplayArtifact,
};
use retrace_core::golden::{compare_memory, parse_golden, render_dump, GoldenDump, Normalization};
use retrace_core::ifspec::{CheckPolicy, Direction, StartCondition};
use retrace_core::romgen::emit_hdl_module;
use retrace_core::sim::{build_ip_testbench, build_soc_testbench, RunStatus};
use retrace_core::waveform::{parse_vcd, write_vcd};

use crate::config::Config;

pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_RUN_IP: i32 = 4;
pub const EXIT_ENCODE: i32 = 5;
pub const EXIT_REPLAY: i32 = 6;
pub const EXIT_COMPARE: i32 = 7;
pub const EXIT_ROMGEN: i32 = 8;
pub const EXIT_IO: i32 = 9;

/// A stage failure: message for stderr plus the documented process exit code.
#[derive(Debug)]
pub struct StageError {
    pub exit_code: i32,
    pub message: String,
}

fn fail(exit_code: i32, message: impl Into<String>) -> StageError {
    StageError {
        exit_code,
        message: message.into(),
    }
}

/// Locations of every file the pipeline reads or writes.
pub struct OutPaths {
    dir: PathBuf,
}

impl OutPaths {
    pub fn new(cfg: &Config) -> Self {
        OutPaths {
            dir: PathBuf::from(&cfg.flow.out_dir),
        }
    }

    pub fn capture_vcd(&self) -> PathBuf {
        self.dir.join("capture.vcd")
    }

    pub fn golden(&self) -> PathBuf {
        self.dir.join("golden.txt")
    }

    pub fn artifact(&self) -> PathBuf {
        self.dir.join("capture.rpaf")
    }

    pub fn replay_report(&self) -> PathBuf {
        self.dir.join("replay_report.txt")
    }

    pub fn replay_dump(&self) -> PathBuf {
        self.dir.join("replay_dump.txt")
    }

    pub fn compare_report(&self) -> PathBuf {
        self.dir.join("compare_report.txt")
    }

    pub fn hdl(&self, module: &str) -> PathBuf {
        self.dir.join(format!("{module}.v"))
    }

    pub fn data_hex(&self, module: &str) -> PathBuf {
        self.dir.join(format!("{module}_data.hex"))
    }

    pub fn care_hex(&self, module: &str) -> PathBuf {
        self.dir.join(format!("{module}_care.hex"))
    }
}

fn read_text(path: &Path) -> Result<String, StageError> {
    fs::read_to_string(path).map_err(|e| fail(EXIT_IO, format!("cannot read {}: {e}", path.display())))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, StageError> {
    fs::read(path).map_err(|e| fail(EXIT_IO, format!("cannot read {}: {e}", path.display())))
}

/// Writes a file and echoes its path; creates the parent directory.
fn write_output(path: &Path, contents: &[u8]) -> Result<(), StageError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| fail(EXIT_IO, format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    fs::write(path, contents)
        .map_err(|e| fail(EXIT_IO, format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// The memory window dumped after each run: the compare section's range when
/// present, otherwise the full region the workload writes.
fn dump_region(cfg: &Config) -> (u64, usize) {
    match &cfg.flow.compare {
        Some(c) => (c.base, c.length as usize),
        None => (
            cfg.testbench.mem_base,
            cfg.testbench.word_count as usize * 4,
        ),
    }
}

fn normalization(cfg: &Config) -> Normalization {
    cfg.flow
        .compare
        .as_ref()
        .map(|c| c.normalization())
        .unwrap_or_else(Normalization::identity)
}

/// Simulate the device with its live agent; write the capture waveform and
/// the golden memory dump.
pub fn run_ip(cfg: &Config) -> Result<(), StageError> {
    let gpu = cfg.testbench.gpu_config();
    let mut tb =
        build_ip_testbench(&gpu).map_err(|e| fail(EXIT_RUN_IP, format!("run-ip: {e}")))?;
    match tb.run(cfg.flow.max_cycles) {
        RunStatus::DoneAsserted(_) => {}
        RunStatus::Timeout => {
            return Err(fail(
                EXIT_RUN_IP,
                format!(
                    "run-ip: device did not finish within {} cycles",
                    cfg.flow.max_cycles
                ),
            ))
        }
    }
    let paths = OutPaths::new(cfg);
    write_output(&paths.capture_vcd(), write_vcd(tb.vcd()).as_bytes())?;
    let (base, len) = dump_region(cfg);
    let dump = render_dump(base, &tb.memory().dump(base, len));
    write_output(&paths.golden(), dump.as_bytes())?;
    Ok(())
}

/// Encode the capture waveform into a replay artifact.
pub fn encode(cfg: &Config) -> Result<(), StageError> {
    let paths = OutPaths::new(cfg);
    let text = read_text(&paths.capture_vcd())?;
    let db = parse_vcd(&text).map_err(|e| fail(EXIT_ENCODE, format!("encode: {e}")))?;
    let spec = cfg
        .interface
        .to_spec()
        .map_err(|e| fail(EXIT_CONFIG, format!("encode: {e}")))?;
    let (artifact, warnings) = encode_artifact(&db, &spec, &cfg.flow.encode_options())
        .map_err(|e| fail(EXIT_ENCODE, format!("encode: {e}")))?;
    if warnings.zeroed_drive_bits > 0 {
        println!(
            "warning: zeroed {} unknown drive bits",
            warnings.zeroed_drive_bits
        );
    }
    if warnings.skipped_unknown_clock_edges > 0 {
        println!(
            "warning: skipped {} clock edges rising from unknown values",
            warnings.skipped_unknown_clock_edges
        );
    }
    write_output(&paths.artifact(), &serialize_artifact(&artifact))?;
    Ok(())
}

/// Re-drive the device from the artifact; write the replay report and the
/// replay-side memory dump. Fails when the report fails.
pub fn replay(cfg: &Config) -> Result<(), StageError> {
    let paths = OutPaths::new(cfg);
    let bytes = read_bytes(&paths.artifact())?;
    let artifact =
        deserialize_artifact(&bytes).map_err(|e| fail(EXIT_REPLAY, format!("replay: {e}")))?;
    let gpu = cfg.testbench.gpu_config();
    let mut tb = build_soc_testbench(artifact, &gpu, cfg.flow.replay.replay_options())
        .map_err(|e| fail(EXIT_REPLAY, format!("replay: {e}")))?;
    let status = tb.run(cfg.flow.max_cycles);
    let report = tb.replay_report().expect("replay bench carries an adapter");
    write_output(&paths.replay_report(), report.to_string().as_bytes())?;
    let (base, len) = dump_region(cfg);
    let dump = render_dump(base, &tb.memory().dump(base, len));
    write_output(&paths.replay_dump(), dump.as_bytes())?;
    if status == RunStatus::Timeout {
        return Err(fail(
            EXIT_REPLAY,
            format!(
                "replay: device did not finish within {} cycles ({} mismatches)",
                cfg.flow.max_cycles, report.mismatch_count
            ),
        ));
    }
    if !report.pass {
        let at = report
            .first_mismatch
            .as_ref()
            .map(|m| format!(", first at cycle {} on {}", m.cycle, m.signal))
            .unwrap_or_default();
        return Err(fail(
            EXIT_REPLAY,
            format!("replay: FAIL ({} mismatches{at})", report.mismatch_count),
        ));
    }
    println!(
        "replay: PASS ({}/{} cycles, 0 mismatches)",
        report.cycles_executed, report.cycle_count
    );
    Ok(())
}

/// Rebuilds the flat byte image a dump file describes. Gaps between records
/// read as zero, matching the sparse memory the dump came from.
fn flatten(dump: &GoldenDump) -> Option<(u64, Vec<u8>)> {
    let first = dump.records().first()?;
    let last = dump.records().last()?;
    let base = first.base;
    let len = (last.base - base) as usize + last.bytes.len();
    let mut bytes = vec![0u8; len];
    for rec in dump.records() {
        let off = (rec.base - base) as usize;
        bytes[off..off + rec.bytes.len()].copy_from_slice(&rec.bytes);
    }
    Some((base, bytes))
}

/// Compare the replay-side dump against the golden dump; write the report.
pub fn compare(cfg: &Config) -> Result<(), StageError> {
    let paths = OutPaths::new(cfg);
    let golden_text = read_text(&paths.golden())?;
    let golden = parse_golden(&golden_text)
        .map_err(|e| fail(EXIT_COMPARE, format!("compare: golden dump: {e}")))?;
    let sim_text = read_text(&paths.replay_dump())?;
    let sim = parse_golden(&sim_text)
        .map_err(|e| fail(EXIT_COMPARE, format!("compare: replay dump: {e}")))?;
    let (sim_base, sim_bytes) = flatten(&sim).unwrap_or((0, Vec::new()));
    let report = compare_memory(sim_base, &sim_bytes, &golden, &normalization(cfg))
        .map_err(|e| fail(EXIT_COMPARE, format!("compare: {e}")))?;
    write_output(&paths.compare_report(), report.to_string().as_bytes())?;
    if !report.pass {
        let at = report
            .first_diff
            .as_ref()
            .map(|d| format!(", first at {:#x}", d.address))
            .unwrap_or_default();
        return Err(fail(EXIT_COMPARE, format!("compare: FAIL{at}")));
    }
    println!("compare: PASS ({} words)", report.words_compared);
    Ok(())
}

/// Generate the Verilog replay module and its memory-init files.
pub fn romgen(cfg: &Config) -> Result<(), StageError> {
    let paths = OutPaths::new(cfg);
    let bytes = read_bytes(&paths.artifact())?;
    let artifact =
        deserialize_artifact(&bytes).map_err(|e| fail(EXIT_ROMGEN, format!("romgen: {e}")))?;
    let section = cfg.flow.romgen.clone().unwrap_or_default();
    let opts = section
        .romgen_options()
        .map_err(|e| fail(EXIT_CONFIG, format!("romgen: {e}")))?;
    let out = emit_hdl_module(&artifact, &opts)
        .map_err(|e| fail(EXIT_ROMGEN, format!("romgen: {e}")))?;
    write_output(&paths.hdl(&opts.module_name), out.verilog.as_bytes())?;
    write_output(&paths.data_hex(&opts.module_name), out.data_hex.as_bytes())?;
    write_output(&paths.care_hex(&opts.module_name), out.care_hex.as_bytes())?;
    Ok(())
}

/// Run every stage in order. The ROM generator runs only when configured.
pub fn flow(cfg: &Config) -> Result<(), StageError> {
    run_ip(cfg)?;
    encode(cfg)?;
    replay(cfg)?;
    compare(cfg)?;
    if cfg.flow.romgen.is_some() {
        romgen(cfg)?;
    }
    Ok(())
}

fn start_label(s: StartCondition) -> &'static str {
    match s {
        StartCondition::FirstEdge => "first edge",
        StartCondition::AfterResetDeassert => "after reset deassert",
    }
}

fn check_label(c: &CheckPolicy) -> String {
    match c {
        CheckPolicy::Strict => "strict".into(),
        CheckPolicy::Ignore => "ignore".into(),
        CheckPolicy::Masked(m) => format!("masked 0x{}", m.to_hex()),
    }
}

/// Pretty-print an artifact: header, directory, storage footprint, and an
/// optional frame range.
pub fn inspect(path: &Path, frames: Option<(u64, u64)>) -> Result<String, StageError> {
    use std::fmt::Write as _;
    let bytes = read_bytes(path)?;
    let artifact =
        deserialize_artifact(&bytes).map_err(|e| fail(EXIT_ENCODE, format!("inspect: {e}")))?;
    let mut out = String::new();
    writeln!(out, "artifact: {}", path.display()).unwrap();
    writeln!(out, "cycles: {}", artifact.cycle_count()).unwrap();
    writeln!(out, "frame width: {} bits", artifact.frame_width()).unwrap();
    writeln!(
        out,
        "clock period: {} ticks of {}",
        artifact.clock_period(),
        artifact.timescale()
    )
    .unwrap();
    writeln!(out, "start: {}", start_label(artifact.start_condition())).unwrap();
    writeln!(out, "directory:").unwrap();
    let name_w = artifact
        .directory()
        .iter()
        .map(|e| e.name.len())
        .max()
        .unwrap_or(0);
    for e in artifact.directory() {
        writeln!(
            out,
            "  {:name_w$}  {}  width {:>3}  offset {:>4}  {}",
            e.name,
            match e.direction {
                Direction::AgentDriven => "agent",
                Direction::DutDriven => "dut  ",
            },
            e.width,
            e.offset,
            check_label(&e.check),
        )
        .unwrap();
    }
    // One clock is regenerated rather than stored, so the saving is fixed
    // at two planes of one bit per cycle.
    let fp = footprint(&artifact, 1);
    writeln!(out, "footprint:").unwrap();
    writeln!(out, "  rom bits: {} (data + care)", fp.rom_bits).unwrap();
    writeln!(out, "  clock bits saved: {}", fp.clock_bits_saved).unwrap();
    if let Some((a, b)) = frames {
        print_frames(&mut out, &artifact, a, b)?;
    }
    Ok(out)
}

fn print_frames(
    out: &mut String,
    artifact: &ReplayArtifact,
    a: u64,
    b: u64,
) -> Result<(), StageError> {
    use std::fmt::Write as _;
    let n = artifact.cycle_count();
    if a > b || b > n {
        return Err(fail(
            EXIT_ENCODE,
            format!("inspect: frame range {a}..{b} outside 0..{n}"),
        ));
    }
    writeln!(out, "frames {a}..{b}:").unwrap();
    for (i, frame) in artifact.frames()[a as usize..b as usize].iter().enumerate() {
        writeln!(
            out,
            "  cycle {}: data 0x{} care 0x{}",
            a + i as u64,
            frame.data.to_hex(),
            frame.care.to_hex()
        )
        .unwrap();
    }
    Ok(())
}
