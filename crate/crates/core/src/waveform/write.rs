// SPDX-License-Identifier: Apache-2.0

//! Value change dump (VCD) writer.
//!
//! Output is canonical: scope blocks follow declaration order, one-bit
//! changes use the scalar form, wider signals use full-width binary vectors,
//! and no timestamps or metadata depend on the environment, so the same
//! database always produces byte-identical text. Parsing the output yields
//! an equal database.

use alloc::string::String;
use alloc::vec::Vec;

use core::fmt::Write as _;

use super::WaveformDb;

/// Renders a waveform database as VCD text.
pub fn write_vcd(db: &WaveformDb) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "$timescale {} $end", db.timescale());

    // Declarations, opening and closing scopes as the dotted paths require.
    let mut stack: Vec<&str> = Vec::new();
    for decl in db.decls() {
        let mut parts: Vec<&str> = decl.path.split('.').collect();
        let name = parts.pop().unwrap();
        let common = stack
            .iter()
            .zip(&parts)
            .take_while(|(a, b)| **a == **b)
            .count();
        for _ in common..stack.len() {
            stack.pop();
            let _ = writeln!(out, "$upscope $end");
        }
        for scope in &parts[common..] {
            stack.push(scope);
            let _ = writeln!(out, "$scope module {scope} $end");
        }
        if decl.width == 1 {
            let _ = writeln!(out, "$var wire 1 {} {} $end", decl.idcode, name);
        } else {
            let _ = writeln!(
                out,
                "$var wire {} {} {} [{}:0] $end",
                decl.width,
                decl.idcode,
                name,
                decl.width - 1
            );
        }
    }
    for _ in 0..stack.len() {
        let _ = writeln!(out, "$upscope $end");
    }
    let _ = writeln!(out, "$enddefinitions $end");

    // Merge per-signal change lists into one time-ordered stream. The sort
    // is stable on (time, declaration index) so output is deterministic.
    let mut events: Vec<(u64, usize, usize)> = Vec::new();
    for (sig_idx, decl) in db.decls().iter().enumerate() {
        let sig = db.signal(&decl.path).unwrap();
        for (chg_idx, (t, _)) in db.changes(sig).iter().enumerate() {
            events.push((*t, sig_idx, chg_idx));
        }
    }
    events.sort_unstable_by_key(|&(t, sig_idx, _)| (t, sig_idx));

    let mut current_time: Option<u64> = None;
    for (t, sig_idx, chg_idx) in events {
        if current_time != Some(t) {
            let _ = writeln!(out, "#{t}");
            current_time = Some(t);
        }
        let decl = &db.decls()[sig_idx];
        let sig = db.signal(&decl.path).unwrap();
        let value = &db.changes(sig)[chg_idx].1;
        if decl.width == 1 {
            let _ = writeln!(out, "{}{}", value.bit(0).to_char(), decl.idcode);
        } else {
            let _ = writeln!(out, "b{} {}", value.to_text(), decl.idcode);
        }
    }
    out
}
