// SPDX-License-Identifier: Apache-2.0

//! Synthesizable replay ROM generation.
//!
//! Emits a plain Verilog-2001 module plus the two hex memory-init files
//! that preload it. The module steps a cycle counter after reset release,
//! fetches one frame per cycle from a `$readmemh`-initialized ROM, drives
//! every agent-side directory entry from the frame bits, and optionally
//! checks the observed device-side signals against the captured
//! expectations under the care mask, raising a combinational `mismatch`
//! and a sticky `error` flag.
//!
//! The ROM is stored as `cycle_count * words_per_frame` words of the
//! chosen word width, so the data init file is byte-identical to
//! [`emit_hex`](crate::artifact::emit_hex) output for the same artifact
//! and word width. That identity is the contract that lets the software
//! replay engine and the generated hardware consume one artifact.
//!
//! Generator-owned identifiers are namespaced with a `replay_` prefix so
//! directory names can never collide with them; `replay_*`, `clk`, and
//! `rst` are therefore reserved and rejected as directory names.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::artifact::{emit_hex, words_per_frame, ReplayArtifact, WordWidth};
use crate::ifspec::{CheckPolicy, Direction, StartCondition};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RomGenOptions {
    /// Verilog module name; also the stem of the init file names.
    pub module_name: String,
    pub word_width: WordWidth,
    /// Emit the masked expectation checker and its ports.
    pub include_checker: bool,
}

impl Default for RomGenOptions {
    fn default() -> Self {
        RomGenOptions {
            module_name: "replay_rom".into(),
            word_width: WordWidth::W32,
            include_checker: true,
        }
    }
}

/// Generated sources. `data_hex` and `care_hex` belong in files named
/// `<module>_data.hex` and `<module>_care.hex` next to the module at
/// simulation or synthesis time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RomGenOutput {
    pub verilog: String,
    pub data_hex: String,
    pub care_hex: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RomGenError {
    #[error("cannot generate a replay module from an empty artifact")]
    EmptyArtifact,
    #[error("'{0}' is not a valid Verilog identifier")]
    BadIdentifier(String),
    #[error("directory name '{0}' collides with a generator-reserved identifier")]
    ReservedName(String),
}

/// Verilog-2001 reserved words (IEEE 1364-2001 Annex B).
const KEYWORDS: &[&str] = &[
    "always", "and", "assign", "automatic", "begin", "buf", "bufif0", "bufif1", "case", "casex",
    "casez", "cell", "cmos", "config", "deassign", "default", "defparam", "design", "disable",
    "edge", "else", "end", "endcase", "endconfig", "endfunction", "endgenerate", "endmodule",
    "endprimitive", "endspecify", "endtable", "endtask", "event", "for", "force", "forever",
    "fork", "function", "generate", "genvar", "highz0", "highz1", "if", "ifnone", "incdir",
    "include", "initial", "inout", "input", "instance", "integer", "join", "large", "liblist",
    "library", "localparam", "macromodule", "medium", "module", "nand", "negedge", "nmos", "nor",
    "noshowcancelled", "not", "notif0", "notif1", "or", "output", "parameter", "pmos", "posedge",
    "primitive", "pull0", "pull1", "pulldown", "pullup", "pulsestyle_ondetect",
    "pulsestyle_onevent", "rcmos", "real", "realtime", "reg", "release", "repeat", "rnmos",
    "rpmos", "rtran", "rtranif0", "rtranif1", "scalared", "showcancelled", "signed", "small",
    "specify", "specparam", "strong0", "strong1", "supply0", "supply1", "table", "task", "time",
    "tran", "tranif0", "tranif1", "tri", "tri0", "tri1", "triand", "trior", "trireg", "unsigned",
    "use", "vectored", "wait", "wand", "weak0", "weak1", "while", "wire", "wor", "xnor", "xor",
];

fn is_valid_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
        && !KEYWORDS.contains(&s)
}

fn check_directory_name(name: &str) -> Result<(), RomGenError> {
    if !is_valid_identifier(name) {
        return Err(RomGenError::BadIdentifier(name.into()));
    }
    if name == "clk" || name == "rst" || name.starts_with("replay_") {
        return Err(RomGenError::ReservedName(name.into()));
    }
    Ok(())
}

fn range_decl(width: usize) -> String {
    if width == 1 {
        String::new()
    } else {
        format!("[{}:0] ", width - 1)
    }
}

fn frame_select(vector: &str, offset: usize, width: usize) -> String {
    if width == 1 {
        format!("{vector}[{offset}]")
    } else {
        format!("{vector}[{}:{}]", offset + width - 1, offset)
    }
}

fn check_label(check: &CheckPolicy) -> String {
    match check {
        CheckPolicy::Strict => "strict".into(),
        CheckPolicy::Ignore => "ignore".into(),
        CheckPolicy::Masked(mask) => format!("masked 0x{}", mask.to_hex()),
    }
}

/// Bits needed to represent `n` itself (the counter must reach N).
fn counter_width(n: u64) -> u32 {
    64 - n.leading_zeros()
}

/// Generate the replay module and its init images. Byte-deterministic:
/// identical inputs yield identical text.
pub fn emit_hdl_module(
    artifact: &ReplayArtifact,
    opts: &RomGenOptions,
) -> Result<RomGenOutput, RomGenError> {
    if artifact.cycle_count() == 0 {
        return Err(RomGenError::EmptyArtifact);
    }
    if !is_valid_identifier(&opts.module_name) {
        return Err(RomGenError::BadIdentifier(opts.module_name.clone()));
    }
    for entry in artifact.directory() {
        check_directory_name(&entry.name)?;
    }

    let name = &opts.module_name;
    let ww = opts.word_width;
    let n = artifact.cycle_count();
    let w = artifact.frame_width();
    let wpf = words_per_frame(w, ww);
    let cw = counter_width(n);
    let hex = emit_hex(artifact, ww);
    let mut v = String::new();

    // Header: everything an integrator needs without opening the artifact.
    writeln!(v, "// Generated replay ROM module. Do not edit.").unwrap();
    writeln!(v, "//").unwrap();
    writeln!(
        v,
        "// Drives captured agent-side stimulus one frame per rising clock edge"
    )
    .unwrap();
    writeln!(
        v,
        "// after rst release; asserts replay_done once all frames are consumed"
    )
    .unwrap();
    writeln!(v, "// and holds the final frame from then on.").unwrap();
    writeln!(v, "//").unwrap();
    writeln!(v, "// frames:          {n}").unwrap();
    writeln!(v, "// frame width:     {w} bits").unwrap();
    writeln!(v, "// word width:      {} bits", ww.bits()).unwrap();
    writeln!(v, "// words per frame: {wpf}").unwrap();
    writeln!(
        v,
        "// clock period:    {} x {}",
        artifact.clock_period(),
        artifact.timescale()
    )
    .unwrap();
    let start = match artifact.start_condition() {
        StartCondition::FirstEdge => "first clock edge (hold rst low throughout)",
        StartCondition::AfterResetDeassert => "after reset deassert (release rst to begin)",
    };
    writeln!(v, "// start:           {start}").unwrap();
    writeln!(v, "// init files:      {name}_data.hex, {name}_care.hex").unwrap();
    writeln!(v, "//").unwrap();
    writeln!(v, "// directory (name, offset, width, direction, check):").unwrap();
    let name_pad = artifact
        .directory()
        .iter()
        .map(|e| e.name.len())
        .max()
        .unwrap_or(0);
    let off_pad = artifact
        .directory()
        .iter()
        .map(|e| e.offset.max(1).ilog10() as usize + 1)
        .max()
        .unwrap_or(1);
    for entry in artifact.directory() {
        let dir = match entry.direction {
            Direction::AgentDriven => "agent",
            Direction::DutDriven => "dut",
        };
        writeln!(
            v,
            "//   {:<name_pad$}  {:>off_pad$}  {:>3}  {:<5}  {}",
            entry.name,
            entry.offset,
            entry.width,
            dir,
            check_label(&entry.check)
        )
        .unwrap();
    }
    writeln!(v).unwrap();
    writeln!(
        v,
        "`timescale {ts} / {ts}",
        ts = artifact.timescale()
    )
    .unwrap();
    writeln!(v).unwrap();

    // Port list.
    writeln!(v, "module {name} (").unwrap();
    writeln!(v, "    input  wire clk,").unwrap();
    writeln!(v, "    input  wire rst,").unwrap();
    for entry in artifact.agent_entries() {
        writeln!(
            v,
            "    output wire {}{},",
            range_decl(entry.width),
            entry.name
        )
        .unwrap();
    }
    for entry in artifact.dut_entries() {
        writeln!(
            v,
            "    input  wire {}{},",
            range_decl(entry.width),
            entry.name
        )
        .unwrap();
    }
    if opts.include_checker {
        writeln!(v, "    output wire replay_done,").unwrap();
        writeln!(v, "    output wire replay_mismatch,").unwrap();
        writeln!(v, "    output reg  replay_error").unwrap();
    } else {
        writeln!(v, "    output wire replay_done").unwrap();
    }
    writeln!(v, ");").unwrap();
    writeln!(v).unwrap();

    writeln!(v, "    localparam integer FRAME_COUNT     = {n};").unwrap();
    writeln!(v, "    localparam integer WORDS_PER_FRAME = {wpf};").unwrap();
    writeln!(v).unwrap();
    let total_words = n as u128 * wpf as u128;
    writeln!(
        v,
        "    reg [{}:0] replay_data_rom [0:{}];",
        ww.bits() - 1,
        total_words - 1
    )
    .unwrap();
    writeln!(
        v,
        "    reg [{}:0] replay_care_rom [0:{}];",
        ww.bits() - 1,
        total_words - 1
    )
    .unwrap();
    writeln!(v).unwrap();
    writeln!(v, "    initial begin").unwrap();
    writeln!(v, "        $readmemh(\"{name}_data.hex\", replay_data_rom);").unwrap();
    writeln!(v, "        $readmemh(\"{name}_care.hex\", replay_care_rom);").unwrap();
    writeln!(v, "    end").unwrap();
    writeln!(v).unwrap();

    // Frame cursor: counts 0..FRAME_COUNT then saturates; the fetch index
    // freezes on the last frame so outputs stay defined after completion.
    writeln!(v, "    reg [{}:0] replay_cycle;", cw - 1).unwrap();
    writeln!(v, "    always @(posedge clk) begin").unwrap();
    writeln!(v, "        if (rst)").unwrap();
    writeln!(v, "            replay_cycle <= 0;").unwrap();
    writeln!(v, "        else if (replay_cycle < FRAME_COUNT)").unwrap();
    writeln!(v, "            replay_cycle <= replay_cycle + 1;").unwrap();
    writeln!(v, "    end").unwrap();
    writeln!(v).unwrap();
    writeln!(
        v,
        "    assign replay_done = (replay_cycle == FRAME_COUNT);"
    )
    .unwrap();
    writeln!(
        v,
        "    wire [{}:0] replay_index = replay_done ? FRAME_COUNT - 1 : replay_cycle;",
        cw - 1
    )
    .unwrap();
    writeln!(v).unwrap();

    // Frame assembly, one ROM word per slice, low word first.
    let vec_bits = wpf * ww.bits();
    writeln!(v, "    wire [{}:0] replay_frame;", vec_bits - 1).unwrap();
    writeln!(v, "    wire [{}:0] replay_care;", vec_bits - 1).unwrap();
    for word in 0..wpf {
        let hi = (word + 1) * ww.bits() - 1;
        let lo = word * ww.bits();
        writeln!(
            v,
            "    assign replay_frame[{hi}:{lo}] = replay_data_rom[replay_index * WORDS_PER_FRAME + {word}];"
        )
        .unwrap();
    }
    for word in 0..wpf {
        let hi = (word + 1) * ww.bits() - 1;
        let lo = word * ww.bits();
        writeln!(
            v,
            "    assign replay_care[{hi}:{lo}]  = replay_care_rom[replay_index * WORDS_PER_FRAME + {word}];"
        )
        .unwrap();
    }
    writeln!(v).unwrap();

    for entry in artifact.agent_entries() {
        writeln!(
            v,
            "    assign {} = {};",
            entry.name,
            frame_select("replay_frame", entry.offset, entry.width)
        )
        .unwrap();
    }

    if opts.include_checker {
        writeln!(v).unwrap();
        writeln!(
            v,
            "    // Masked expectation check: capture care bits gate every"
        )
        .unwrap();
        writeln!(
            v,
            "    // comparison; per-signal check policies narrow them further."
        )
        .unwrap();
        let mut terms: Vec<String> = Vec::new();
        for entry in artifact.dut_entries() {
            if entry.check == CheckPolicy::Ignore {
                continue;
            }
            let mm = format!("replay_mm_{}", entry.name);
            let policy_mask = match &entry.check {
                CheckPolicy::Masked(mask) => {
                    format!(" & {}'h{}", entry.width, mask.to_hex())
                }
                _ => String::new(),
            };
            writeln!(
                v,
                "    wire {}{} = ({} ^ {}) & {}{};",
                range_decl(entry.width),
                mm,
                entry.name,
                frame_select("replay_frame", entry.offset, entry.width),
                frame_select("replay_care", entry.offset, entry.width),
                policy_mask
            )
            .unwrap();
            terms.push(format!("(|{mm})"));
        }
        if terms.is_empty() {
            writeln!(v, "    assign replay_mismatch = 1'b0;").unwrap();
        } else {
            writeln!(
                v,
                "    assign replay_mismatch = !rst && !replay_done && ({});",
                terms.join(" || ")
            )
            .unwrap();
        }
        writeln!(v).unwrap();
        writeln!(v, "    always @(posedge clk) begin").unwrap();
        writeln!(v, "        if (rst)").unwrap();
        writeln!(v, "            replay_error <= 1'b0;").unwrap();
        writeln!(v, "        else if (replay_mismatch)").unwrap();
        writeln!(v, "            replay_error <= 1'b1;").unwrap();
        writeln!(v, "    end").unwrap();
    }

    writeln!(v).unwrap();
    writeln!(v, "endmodule").unwrap();

    Ok(RomGenOutput {
        verilog: v,
        data_hex: hex.data,
        care_hex: hex.care,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::artifact::{DirectoryEntry, Frame};
    use crate::bits::Bits;
    use crate::ifspec::StartCondition;
    use crate::waveform::{Timescale, TimescaleUnit};
    use alloc::vec;

    fn ts() -> Timescale {
        Timescale::new(1, TimescaleUnit::Ns).unwrap()
    }

    fn single_bit_artifact() -> ReplayArtifact {
        ReplayArtifact::new(
            ts(),
            10,
            StartCondition::FirstEdge,
            vec![DirectoryEntry {
                name: "pm_ack".into(),
                width: 1,
                direction: Direction::AgentDriven,
                check: CheckPolicy::Strict,
                offset: 0,
            }],
            vec![Frame {
                data: Bits::from_u64(1, 1),
                care: Bits::from_u64(1, 1),
            }],
        )
        .unwrap()
    }

    fn two_port_artifact() -> ReplayArtifact {
        ReplayArtifact::new(
            ts(),
            10,
            StartCondition::AfterResetDeassert,
            vec![
                DirectoryEntry {
                    name: "drive".into(),
                    width: 8,
                    direction: Direction::AgentDriven,
                    check: CheckPolicy::Strict,
                    offset: 0,
                },
                DirectoryEntry {
                    name: "resp".into(),
                    width: 1,
                    direction: Direction::DutDriven,
                    check: CheckPolicy::Strict,
                    offset: 8,
                },
            ],
            vec![
                Frame {
                    data: Bits::from_u64(9, 0x1aa),
                    care: Bits::ones(9),
                },
                Frame {
                    data: Bits::from_u64(9, 0x055),
                    care: Bits::ones(9),
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn minimal_artifact_generates_a_port_and_one_word() {
        let out = emit_hdl_module(&single_bit_artifact(), &RomGenOptions::default()).unwrap();
        assert!(out.verilog.contains("module replay_rom ("));
        assert!(out.verilog.contains("    output wire pm_ack,"));
        assert!(out.verilog.contains("assign pm_ack = replay_frame[0];"));
        // One frame, one 32-bit word per frame.
        assert!(out.verilog.contains("replay_data_rom [0:0]"));
        assert_eq!(out.data_hex, "00000001\n");
        assert_eq!(out.care_hex, "00000001\n");
    }

    #[test]
    fn minimal_artifact_at_byte_words_pads_to_two_digits() {
        let opts = RomGenOptions {
            word_width: WordWidth::W8,
            ..RomGenOptions::default()
        };
        let out = emit_hdl_module(&single_bit_artifact(), &opts).unwrap();
        assert_eq!(out.data_hex, "01\n");
    }

    #[test]
    fn hex_files_match_the_artifact_hex_emitter() {
        let artifact = two_port_artifact();
        for ww in [WordWidth::W8, WordWidth::W16, WordWidth::W32, WordWidth::W64] {
            let opts = RomGenOptions {
                word_width: ww,
                ..RomGenOptions::default()
            };
            let out = emit_hdl_module(&artifact, &opts).unwrap();
            let image = emit_hex(&artifact, ww);
            assert_eq!(out.data_hex, image.data);
            assert_eq!(out.care_hex, image.care);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let artifact = two_port_artifact();
        let a = emit_hdl_module(&artifact, &RomGenOptions::default()).unwrap();
        let b = emit_hdl_module(&artifact, &RomGenOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn checker_emits_masked_comparison_and_sticky_error() {
        let out = emit_hdl_module(&two_port_artifact(), &RomGenOptions::default()).unwrap();
        assert!(out.verilog.contains("input  wire resp,"));
        assert!(out
            .verilog
            .contains("wire replay_mm_resp = (resp ^ replay_frame[8]) & replay_care[8];"));
        assert!(out
            .verilog
            .contains("assign replay_mismatch = !rst && !replay_done && ((|replay_mm_resp));"));
        assert!(out.verilog.contains("replay_error <= 1'b1;"));
    }

    #[test]
    fn checker_can_be_omitted() {
        let opts = RomGenOptions {
            include_checker: false,
            ..RomGenOptions::default()
        };
        let out = emit_hdl_module(&two_port_artifact(), &opts).unwrap();
        assert!(!out.verilog.contains("replay_mismatch"));
        assert!(!out.verilog.contains("replay_error"));
        assert!(out.verilog.contains("output wire replay_done\n"));
    }

    #[test]
    fn ignore_policy_entries_are_not_checked() {
        let mut artifact = two_port_artifact();
        // Rebuild with the response marked ignore.
        let mut dir = artifact.directory().to_vec();
        dir[1].check = CheckPolicy::Ignore;
        artifact = ReplayArtifact::new(
            ts(),
            10,
            StartCondition::AfterResetDeassert,
            dir,
            artifact.frames().to_vec(),
        )
        .unwrap();
        let out = emit_hdl_module(&artifact, &RomGenOptions::default()).unwrap();
        assert!(out.verilog.contains("assign replay_mismatch = 1'b0;"));
    }

    #[test]
    fn masked_policy_appends_a_constant_mask() {
        let mut dir = two_port_artifact().directory().to_vec();
        dir[1].check = CheckPolicy::Masked(Bits::from_u64(1, 1));
        let artifact = ReplayArtifact::new(
            ts(),
            10,
            StartCondition::AfterResetDeassert,
            dir,
            two_port_artifact().frames().to_vec(),
        )
        .unwrap();
        let out = emit_hdl_module(&artifact, &RomGenOptions::default()).unwrap();
        assert!(out.verilog.contains("& replay_care[8] & 1'h1;"));
    }

    #[test]
    fn empty_artifact_is_rejected() {
        let artifact = ReplayArtifact::new(
            ts(),
            10,
            StartCondition::FirstEdge,
            vec![DirectoryEntry {
                name: "a".into(),
                width: 1,
                direction: Direction::AgentDriven,
                check: CheckPolicy::Strict,
                offset: 0,
            }],
            vec![],
        )
        .unwrap();
        assert_eq!(
            emit_hdl_module(&artifact, &RomGenOptions::default()),
            Err(RomGenError::EmptyArtifact)
        );
    }

    #[test]
    fn bad_module_names_are_rejected() {
        for bad in ["", "1bad", "my-mod", "module", "a b"] {
            let opts = RomGenOptions {
                module_name: bad.into(),
                ..RomGenOptions::default()
            };
            assert_eq!(
                emit_hdl_module(&single_bit_artifact(), &opts),
                Err(RomGenError::BadIdentifier(bad.into())),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn keyword_directory_names_are_rejected() {
        let mut dir = single_bit_artifact().directory().to_vec();
        dir[0].name = "always".into();
        let artifact = ReplayArtifact::new(
            ts(),
            10,
            StartCondition::FirstEdge,
            dir,
            single_bit_artifact().frames().to_vec(),
        )
        .unwrap();
        assert_eq!(
            emit_hdl_module(&artifact, &RomGenOptions::default()),
            Err(RomGenError::BadIdentifier("always".into()))
        );
    }

    #[test]
    fn reserved_directory_names_are_rejected() {
        for reserved in ["clk", "rst", "replay_done", "replay_anything"] {
            let mut dir = single_bit_artifact().directory().to_vec();
            dir[0].name = reserved.into();
            let artifact = ReplayArtifact::new(
                ts(),
                10,
                StartCondition::FirstEdge,
                dir,
                single_bit_artifact().frames().to_vec(),
            )
            .unwrap();
            assert_eq!(
                emit_hdl_module(&artifact, &RomGenOptions::default()),
                Err(RomGenError::ReservedName(reserved.into())),
                "{reserved:?}"
            );
        }
    }

    #[test]
    fn counter_width_covers_the_terminal_count() {
        assert_eq!(counter_width(1), 1);
        assert_eq!(counter_width(2), 2);
        assert_eq!(counter_width(3), 2);
        assert_eq!(counter_width(4), 3);
        assert_eq!(counter_width(255), 8);
        assert_eq!(counter_width(256), 9);
    }

    #[test]
    fn wide_frames_unroll_one_assign_per_word() {
        let opts = RomGenOptions {
            word_width: WordWidth::W8,
            ..RomGenOptions::default()
        };
        let out = emit_hdl_module(&two_port_artifact(), &opts).unwrap();
        // 9-bit frames at 8-bit words: two words per frame.
        assert!(out.verilog.contains("localparam integer WORDS_PER_FRAME = 2;"));
        assert!(out
            .verilog
            .contains("assign replay_frame[7:0] = replay_data_rom[replay_index * WORDS_PER_FRAME + 0];"));
        assert!(out
            .verilog
            .contains("assign replay_frame[15:8] = replay_data_rom[replay_index * WORDS_PER_FRAME + 1];"));
    }
}
