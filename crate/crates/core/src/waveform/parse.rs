// SPDX-License-Identifier: Apache-2.0

//! Value change dump (VCD) reader.
//!
//! Accepts the subset of IEEE 1364 VCD that capture tools emit for logic
//! signals: `$timescale`, nested `$scope`/`$upscope`, `$var` of kind
//! `wire`/`reg`/`logic`, `$enddefinitions`, then timestamped scalar and
//! binary vector changes. `$dumpvars`/`$dumpon`/`$dumpall` blocks are read
//! as ordinary changes. Real-valued and string variables, and `$dumpoff`
//! blocks, are rejected rather than silently dropped.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Timescale, TimescaleUnit, WaveformDb, WaveformError};
use crate::fourstate::FourStateVector;

/// Parses VCD text into a waveform database.
pub fn parse_vcd(text: &str) -> Result<WaveformDb, VcdParseError> {
    Parser::new(text).run()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("vcd line {line}: {kind}")]
pub struct VcdParseError {
    pub line: usize,
    pub kind: VcdParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VcdParseErrorKind {
    #[error("unexpected end of file ({0})")]
    UnexpectedEof(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("bad timescale '{0}'")]
    BadTimescale(String),
    #[error("missing $timescale before $enddefinitions")]
    MissingTimescale,
    #[error("unsupported variable kind '{0}'")]
    UnsupportedVarKind(String),
    #[error("bad variable width '{0}'")]
    BadVarWidth(String),
    #[error("$upscope without matching $scope")]
    UnbalancedUpscope,
    #[error("$enddefinitions inside an open $scope")]
    UnclosedScope,
    #[error("unknown identifier code '{0}'")]
    UnknownIdcode(String),
    #[error("bad timestamp '{0}'")]
    BadTimestamp(String),
    #[error("timestamp {at} goes backwards (previous {prev})")]
    TimestampBackwards { at: u64, prev: u64 },
    #[error("unsupported value change '{0}' (only scalar and binary vectors)")]
    UnsupportedValue(String),
    #[error("bad value change '{token}': {reason}")]
    BadValue { token: String, reason: String },
    #[error("$dumpoff blocks are not supported")]
    DumpOff,
    #[error("unexpected token '{0}'")]
    UnexpectedToken(String),
    #[error(transparent)]
    Db(#[from] WaveformError),
}

struct Parser<'a> {
    tokens: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let mut tokens = Vec::new();
        for (i, line) in text.lines().enumerate() {
            for tok in line.split_whitespace() {
                tokens.push((i + 1, tok));
            }
        }
        Parser { tokens, pos: 0 }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.tokens.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let t = self.peek();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn last_line(&self) -> usize {
        self.tokens.last().map(|(l, _)| *l).unwrap_or(1)
    }

    fn err(&self, line: usize, kind: VcdParseErrorKind) -> VcdParseError {
        VcdParseError { line, kind }
    }

    fn eof(&self, what: &str) -> VcdParseError {
        self.err(
            self.last_line(),
            VcdParseErrorKind::UnexpectedEof(what.to_string()),
        )
    }

    /// Consumes tokens through the closing `$end` of the current command.
    fn skip_to_end(&mut self, what: &str) -> Result<(), VcdParseError> {
        loop {
            match self.next() {
                Some((_, "$end")) => return Ok(()),
                Some(_) => {}
                None => return Err(self.eof(what)),
            }
        }
    }

    /// Collects tokens through `$end`, returning them without the terminator.
    fn take_until_end(&mut self, what: &str) -> Result<Vec<(usize, &'a str)>, VcdParseError> {
        let mut out = Vec::new();
        loop {
            match self.next() {
                Some((_, "$end")) => return Ok(out),
                Some(t) => out.push(t),
                None => return Err(self.eof(what)),
            }
        }
    }

    fn run(mut self) -> Result<WaveformDb, VcdParseError> {
        let mut timescale: Option<Timescale> = None;
        let mut scopes: Vec<String> = Vec::new();
        // Declarations are buffered until $enddefinitions so the database is
        // created with the timescale regardless of command order.
        let mut vars: Vec<(usize, String, usize, String)> = Vec::new();

        // Header section.
        loop {
            let (line, tok) = match self.next() {
                Some(t) => t,
                None => {
                    return Err(self.eof("header without $enddefinitions"));
                }
            };
            match tok {
                "$timescale" => {
                    let body = self.take_until_end("$timescale")?;
                    let joined: String =
                        body.iter().map(|(_, t)| *t).collect::<Vec<_>>().join("");
                    timescale =
                        Some(parse_timescale(&joined).ok_or_else(|| {
                            self.err(line, VcdParseErrorKind::BadTimescale(joined.clone()))
                        })?);
                }
                "$scope" => {
                    let body = self.take_until_end("$scope")?;
                    // Expected form: <type> <name>.
                    if body.len() != 2 {
                        return Err(self.err(
                            line,
                            VcdParseErrorKind::MalformedHeader(format!(
                                "$scope expects a type and a name, got {} tokens",
                                body.len()
                            )),
                        ));
                    }
                    scopes.push(body[1].1.to_string());
                }
                "$upscope" => {
                    self.skip_to_end("$upscope")?;
                    if scopes.pop().is_none() {
                        return Err(self.err(line, VcdParseErrorKind::UnbalancedUpscope));
                    }
                }
                "$var" => {
                    let body = self.take_until_end("$var")?;
                    // Expected form: <kind> <width> <idcode> <name> [range].
                    if body.len() < 4 {
                        return Err(self.err(
                            line,
                            VcdParseErrorKind::MalformedHeader(
                                "$var expects kind, width, idcode, and name".into(),
                            ),
                        ));
                    }
                    let kind = body[0].1;
                    if !matches!(kind, "wire" | "reg" | "logic") {
                        return Err(self.err(
                            line,
                            VcdParseErrorKind::UnsupportedVarKind(kind.to_string()),
                        ));
                    }
                    let width: usize = body[1].1.parse().map_err(|_| {
                        self.err(line, VcdParseErrorKind::BadVarWidth(body[1].1.to_string()))
                    })?;
                    let idcode = body[2].1.to_string();
                    let name = body[3].1;
                    let path = if scopes.is_empty() {
                        name.to_string()
                    } else {
                        format!("{}.{}", scopes.join("."), name)
                    };
                    vars.push((line, path, width, idcode));
                }
                "$enddefinitions" => {
                    self.skip_to_end("$enddefinitions")?;
                    if !scopes.is_empty() {
                        return Err(self.err(line, VcdParseErrorKind::UnclosedScope));
                    }
                    break;
                }
                "$comment" | "$date" | "$version" => {
                    self.skip_to_end(tok)?;
                }
                t if t.starts_with('$') => {
                    // Unknown metadata command; tolerated for interop.
                    self.skip_to_end(t)?;
                }
                t => {
                    return Err(self.err(
                        line,
                        VcdParseErrorKind::MalformedHeader(format!(
                            "value change '{t}' before $enddefinitions"
                        )),
                    ));
                }
            }
        }

        let timescale = timescale
            .ok_or_else(|| self.err(self.last_line(), VcdParseErrorKind::MissingTimescale))?;
        let mut db = WaveformDb::new(timescale);
        let mut by_idcode = alloc::collections::BTreeMap::new();
        for (line, path, width, idcode) in vars {
            let sig = db
                .add_signal_with_idcode(&path, width, idcode.clone())
                .map_err(|e| self.err(line, e.into()))?;
            by_idcode.insert(idcode, sig);
        }

        // Body section. Changes before the first timestamp land at time 0.
        let mut time: u64 = 0;
        let mut seen_time = false;
        while let Some((line, tok)) = self.next() {
            let mut chars = tok.chars();
            let first = chars.next().unwrap();
            match first {
                '#' => {
                    let t: u64 = tok[1..].parse().map_err(|_| {
                        self.err(line, VcdParseErrorKind::BadTimestamp(tok.to_string()))
                    })?;
                    if seen_time && t < time {
                        return Err(self.err(
                            line,
                            VcdParseErrorKind::TimestampBackwards { at: t, prev: time },
                        ));
                    }
                    time = t;
                    seen_time = true;
                }
                '0' | '1' | 'x' | 'X' | 'z' | 'Z' => {
                    let idcode = &tok[1..];
                    if idcode.is_empty() {
                        return Err(self.err(
                            line,
                            VcdParseErrorKind::BadValue {
                                token: tok.to_string(),
                                reason: "missing identifier code".into(),
                            },
                        ));
                    }
                    self.apply_change(&mut db, &by_idcode, line, idcode, &first.to_string(), time)?;
                }
                'b' | 'B' => {
                    let value = &tok[1..];
                    let (line2, idcode) = self
                        .next()
                        .ok_or_else(|| self.eof("vector change identifier code"))?;
                    self.apply_change(&mut db, &by_idcode, line2, idcode, value, time)?;
                }
                'r' | 'R' | 's' | 'S' => {
                    return Err(self.err(line, VcdParseErrorKind::UnsupportedValue(tok.to_string())));
                }
                '$' => match tok {
                    "$dumpvars" | "$dumpon" | "$dumpall" | "$end" => {
                        // Block markers; contained changes parse as usual.
                    }
                    "$dumpoff" => {
                        return Err(self.err(line, VcdParseErrorKind::DumpOff));
                    }
                    "$comment" => {
                        self.skip_to_end("$comment")?;
                    }
                    other => {
                        return Err(
                            self.err(line, VcdParseErrorKind::UnexpectedToken(other.to_string()))
                        );
                    }
                },
                _ => {
                    return Err(self.err(line, VcdParseErrorKind::UnexpectedToken(tok.to_string())));
                }
            }
        }

        Ok(db)
    }

    fn apply_change(
        &self,
        db: &mut WaveformDb,
        by_idcode: &alloc::collections::BTreeMap<String, super::SignalId>,
        line: usize,
        idcode: &str,
        value_text: &str,
        time: u64,
    ) -> Result<(), VcdParseError> {
        let sig = *by_idcode.get(idcode).ok_or_else(|| {
            self.err(line, VcdParseErrorKind::UnknownIdcode(idcode.to_string()))
        })?;
        let width = db.decl(sig).width;
        let value = FourStateVector::parse_extend(value_text, width).map_err(|e| {
            self.err(
                line,
                VcdParseErrorKind::BadValue {
                    token: value_text.to_string(),
                    reason: e.to_string(),
                },
            )
        })?;
        db.record_change(sig, time, value)
            .map_err(|e| self.err(line, e.into()))?;
        Ok(())
    }
}

fn parse_timescale(text: &str) -> Option<Timescale> {
    let digits_end = text.find(|c: char| !c.is_ascii_digit())?;
    if digits_end == 0 {
        return None;
    }
    let magnitude: u16 = text[..digits_end].parse().ok()?;
    let unit = TimescaleUnit::from_label(&text[digits_end..])?;
    Timescale::new(magnitude, unit).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourstate::FourStateVector;

    const MINIMAL: &str = "\
$timescale 1ns $end
$scope module tb $end
$var wire 1 ! clk $end
$var wire 4 \" bus $end
$upscope $end
$enddefinitions $end
#0
0!
b0 \"
#10
1!
b10 \"
";

    #[test]
    fn parses_minimal_dump() {
        let db = parse_vcd(MINIMAL).unwrap();
        assert_eq!(db.timescale().to_string(), "1ns");
        assert_eq!(db.decls().len(), 2);
        let clk = db.signal("tb.clk").unwrap();
        let bus = db.signal("tb.bus").unwrap();
        assert_eq!(db.changes(clk).len(), 2);
        // Short vector text is zero-extended to the declared width.
        assert_eq!(
            db.changes(bus)[1].1,
            FourStateVector::parse_extend("0010", 4).unwrap()
        );
    }

    #[test]
    fn accepts_spaced_timescale_and_dumpvars_block() {
        let text = "\
$timescale 10 us $end
$var reg 1 ! a $end
$enddefinitions $end
$dumpvars
x!
$end
#5
1!
";
        let db = parse_vcd(text).unwrap();
        let a = db.signal("a").unwrap();
        assert_eq!(db.changes(a)[0].0, 0);
        assert_eq!(db.timescale().to_string(), "10us");
    }

    #[test]
    fn unknown_idcode_is_an_error() {
        let text = "$timescale 1ns $end\n$var wire 1 ! a $end\n$enddefinitions $end\n#0\n1?\n";
        let err = parse_vcd(text).unwrap_err();
        assert_eq!(err.line, 5);
        assert_eq!(err.kind, VcdParseErrorKind::UnknownIdcode("?".into()));
    }

    #[test]
    fn backwards_timestamp_is_an_error() {
        let text = "$timescale 1ns $end\n$var wire 1 ! a $end\n$enddefinitions $end\n#10\n1!\n#5\n0!\n";
        let err = parse_vcd(text).unwrap_err();
        assert_eq!(
            err.kind,
            VcdParseErrorKind::TimestampBackwards { at: 5, prev: 10 }
        );
    }

    #[test]
    fn vector_longer_than_width_is_an_error() {
        let text = "$timescale 1ns $end\n$var wire 2 ! a $end\n$enddefinitions $end\n#0\nb101 !\n";
        let err = parse_vcd(text).unwrap_err();
        assert!(matches!(err.kind, VcdParseErrorKind::BadValue { .. }));
    }

    #[test]
    fn real_variables_are_rejected() {
        let text = "$timescale 1ns $end\n$var real 64 ! a $end\n$enddefinitions $end\n";
        let err = parse_vcd(text).unwrap_err();
        assert_eq!(err.kind, VcdParseErrorKind::UnsupportedVarKind("real".into()));
    }

    #[test]
    fn missing_timescale_is_an_error() {
        let text = "$var wire 1 ! a $end\n$enddefinitions $end\n";
        let err = parse_vcd(text).unwrap_err();
        assert_eq!(err.kind, VcdParseErrorKind::MissingTimescale);
    }

    #[test]
    fn truncated_header_is_an_error() {
        let text = "$timescale 1ns $end\n$var wire 1 ! a";
        let err = parse_vcd(text).unwrap_err();
        assert!(matches!(err.kind, VcdParseErrorKind::UnexpectedEof(_)));
    }

    #[test]
    fn dumpoff_is_rejected() {
        let text = "$timescale 1ns $end\n$var wire 1 ! a $end\n$enddefinitions $end\n$dumpoff\nx!\n$end\n";
        let err = parse_vcd(text).unwrap_err();
        assert_eq!(err.kind, VcdParseErrorKind::DumpOff);
    }

    #[test]
    fn nested_scopes_build_dotted_paths() {
        let text = "\
$timescale 1ns $end
$scope module top $end
$scope module u0 $end
$var wire 1 ! req $end
$upscope $end
$upscope $end
$enddefinitions $end
";
        let db = parse_vcd(text).unwrap();
        assert!(db.signal("top.u0.req").is_ok());
    }

    #[test]
    fn duplicate_idcode_reports_line() {
        let text = "$timescale 1ns $end\n$var wire 1 ! a $end\n$var wire 1 ! b $end\n$enddefinitions $end\n";
        let err = parse_vcd(text).unwrap_err();
        assert_eq!(err.line, 3);
        assert!(matches!(err.kind, VcdParseErrorKind::Db(_)));
    }

    #[test]
    fn scalar_change_on_wide_signal_extends() {
        let text = "$timescale 1ns $end\n$var wire 4 ! a $end\n$enddefinitions $end\n#0\n1!\n";
        let db = parse_vcd(text).unwrap();
        let a = db.signal("a").unwrap();
        assert_eq!(
            db.changes(a)[0].1,
            FourStateVector::parse_extend("0001", 4).unwrap()
        );
    }
}
