// SPDX-License-Identifier: Apache-2.0

//! Golden-reference memory comparison.
//!
//! A golden dump is a text file of `HEXADDR: HEXBYTES` lines describing
//! expected memory contents. Golden files are always read literally:
//! ascending addresses, bytes exactly as written, words little-endian.
//! All normalization (word order, byte order) applies to the simulation
//! side only, because the golden file is the fixed reference by
//! definition.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// One contiguous run of expected bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldenRecord {
    pub base: u64,
    pub bytes: Vec<u8>,
}

/// A parsed golden dump: sorted, non-overlapping, contiguous lines merged.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GoldenDump {
    records: Vec<GoldenRecord>,
}

impl GoldenDump {
    pub fn records(&self) -> &[GoldenRecord] {
        &self.records
    }

    /// Total byte count across records.
    pub fn byte_len(&self) -> usize {
        self.records.iter().map(|r| r.bytes.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GoldenParseError {
    #[error("line {line}: expected 'HEXADDR: HEXBYTES'")]
    MalformedLine { line: usize },
    #[error("line {line}: odd number of hex digits in byte field")]
    OddHexDigits { line: usize },
    #[error("overlapping golden records at address {address:#x}")]
    OverlappingRecords { address: u64 },
}

fn parse_hex_bytes(field: &str, line: usize) -> Result<Vec<u8>, GoldenParseError> {
    if field.is_empty() {
        return Err(GoldenParseError::MalformedLine { line });
    }
    if field.len() % 2 != 0 {
        return Err(GoldenParseError::OddHexDigits { line });
    }
    let digits = field.as_bytes();
    let mut bytes = Vec::with_capacity(digits.len() / 2);
    for pair in digits.chunks_exact(2) {
        let hi = (pair[0] as char).to_digit(16);
        let lo = (pair[1] as char).to_digit(16);
        match (hi, lo) {
            (Some(h), Some(l)) => bytes.push((h * 16 + l) as u8),
            _ => return Err(GoldenParseError::MalformedLine { line }),
        }
    }
    Ok(bytes)
}

/// Parse golden dump text. Blank lines are skipped. Records are sorted by
/// address; adjacent contiguous records merge into one; overlap is an
/// error.
pub fn parse_golden(text: &str) -> Result<GoldenDump, GoldenParseError> {
    let mut raw: Vec<GoldenRecord> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (addr_field, byte_field) = trimmed
            .split_once(':')
            .ok_or(GoldenParseError::MalformedLine { line: line_no })?;
        let addr_field = addr_field.trim();
        if addr_field.is_empty() || !addr_field.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(GoldenParseError::MalformedLine { line: line_no });
        }
        let base = u64::from_str_radix(addr_field, 16)
            .map_err(|_| GoldenParseError::MalformedLine { line: line_no })?;
        let bytes = parse_hex_bytes(byte_field.trim(), line_no)?;
        raw.push(GoldenRecord { base, bytes });
    }
    raw.sort_by_key(|r| r.base);

    let mut records: Vec<GoldenRecord> = Vec::new();
    for rec in raw {
        match records.last_mut() {
            Some(prev) => {
                // u128 end addresses: a record ending at u64::MAX must not wrap.
                let prev_end = prev.base as u128 + prev.bytes.len() as u128;
                if (rec.base as u128) < prev_end {
                    return Err(GoldenParseError::OverlappingRecords { address: rec.base });
                }
                if rec.base as u128 == prev_end {
                    prev.bytes.extend_from_slice(&rec.bytes);
                } else {
                    records.push(rec);
                }
            }
            None => records.push(rec),
        }
    }
    Ok(GoldenDump { records })
}

/// How sim words follow each other in the compared region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordOrder {
    Ascending,
    Descending,
}

/// How bytes within a sim word map to its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ByteOrder {
    Little,
    Big,
}

/// Simulation-side normalization applied before comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Normalization {
    /// Word size in bytes; must be 1, 2, 4, or 8.
    pub word_size: usize,
    pub word_order: WordOrder,
    pub byte_order: ByteOrder,
}

impl Normalization {
    /// Byte-for-byte comparison: single-byte words in file order.
    pub fn identity() -> Self {
        Normalization {
            word_size: 1,
            word_order: WordOrder::Ascending,
            byte_order: ByteOrder::Little,
        }
    }
}

impl Default for Normalization {
    fn default() -> Self {
        Self::identity()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompareError {
    #[error("word size must be 1, 2, 4, or 8 bytes, got {0}")]
    BadWordSize(usize),
    #[error("golden record at {base:#x} spans {len} bytes, not a multiple of word size {word_size}")]
    RegionNotWordMultiple {
        base: u64,
        len: usize,
        word_size: usize,
    },
    #[error("golden record at {base:#x} ({len} bytes) lies outside the sim dump range")]
    RecordOutsideSimRange { base: u64, len: usize },
}

/// First normalized word that disagreed, addressed on the golden side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WordDiff {
    pub address: u64,
    pub sim: u64,
    pub golden: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompareReport {
    pub pass: bool,
    pub words_compared: usize,
    pub first_diff: Option<WordDiff>,
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "words compared: {}", self.words_compared)?;
        if let Some(d) = &self.first_diff {
            writeln!(
                f,
                "first difference: address {:#x} sim {:#010x} golden {:#010x}",
                d.address, d.sim, d.golden
            )?;
        }
        write!(f, "result: {}", if self.pass { "PASS" } else { "FAIL" })
    }
}

/// Rewrite a region of sim bytes into golden file order. Word order
/// Descending reverses the chunk sequence; byte order Big reverses bytes
/// within each chunk. Both steps are involutions, so applying the same
/// normalization twice restores the input.
pub fn normalize_bytes(bytes: &[u8], norm: &Normalization) -> Vec<u8> {
    debug_assert_eq!(bytes.len() % norm.word_size, 0);
    let chunks: Vec<&[u8]> = bytes.chunks_exact(norm.word_size).collect();
    let mut out = Vec::with_capacity(bytes.len());
    let ordered: Vec<&[u8]> = match norm.word_order {
        WordOrder::Ascending => chunks,
        WordOrder::Descending => chunks.into_iter().rev().collect(),
    };
    for chunk in ordered {
        match norm.byte_order {
            ByteOrder::Little => out.extend_from_slice(chunk),
            ByteOrder::Big => out.extend(chunk.iter().rev()),
        }
    }
    out
}

fn word_le(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .rev()
        .fold(0u64, |acc, &b| (acc << 8) | b as u64)
}

/// Compare sim memory against a golden dump. Sim bytes are grouped into
/// words of `norm.word_size`, sequenced per `norm.word_order`, each word
/// read per `norm.byte_order`; golden bytes are read literally. Passes iff
/// every word pair matches. The first difference is reported at the lowest
/// differing golden address.
pub fn compare_memory(
    sim_base: u64,
    sim_bytes: &[u8],
    golden: &GoldenDump,
    norm: &Normalization,
) -> Result<CompareReport, CompareError> {
    if !matches!(norm.word_size, 1 | 2 | 4 | 8) {
        return Err(CompareError::BadWordSize(norm.word_size));
    }
    let ws = norm.word_size;
    let sim_end = sim_base as u128 + sim_bytes.len() as u128;
    let mut words_compared = 0usize;
    let mut first_diff: Option<WordDiff> = None;

    for rec in golden.records() {
        let len = rec.bytes.len();
        if len % ws != 0 {
            return Err(CompareError::RegionNotWordMultiple {
                base: rec.base,
                len,
                word_size: ws,
            });
        }
        let rec_end = rec.base as u128 + len as u128;
        if (rec.base as u128) < sim_base as u128 || rec_end > sim_end {
            return Err(CompareError::RecordOutsideSimRange {
                base: rec.base,
                len,
            });
        }
        let offset = (rec.base - sim_base) as usize;
        let region = &sim_bytes[offset..offset + len];
        let normalized = normalize_bytes(region, norm);
        for (k, (sim_w, gold_w)) in normalized
            .chunks_exact(ws)
            .zip(rec.bytes.chunks_exact(ws))
            .enumerate()
        {
            words_compared += 1;
            if sim_w != gold_w && first_diff.is_none() {
                first_diff = Some(WordDiff {
                    address: rec.base + (k * ws) as u64,
                    sim: word_le(sim_w),
                    golden: word_le(gold_w),
                });
            }
        }
    }
    Ok(CompareReport {
        pass: first_diff.is_none(),
        words_compared,
        first_diff,
    })
}

/// Render a memory region in golden dump format: uppercase `ADDR: HEX`
/// lines, sixteen bytes per line. `parse_golden` inverts this exactly.
pub fn render_dump(base: u64, bytes: &[u8]) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    for (i, line) in bytes.chunks(16).enumerate() {
        let addr = base + (i * 16) as u64;
        write!(out, "{addr:X}: ").unwrap();
        for b in line {
            write!(out, "{b:02X}").unwrap();
        }
        out.push('\n');
    }
    out
}
