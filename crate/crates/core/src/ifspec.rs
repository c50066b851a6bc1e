// SPDX-License-Identifier: Apache-2.0

//! Interface boundary description.
//!
//! An [`InterfaceSpec`] names the clock, an optional reset, and every signal
//! crossing the boundary between the device under test and its agent. It is
//! the single source of truth for frame packing: [`InterfaceSpec::frame_layout`]
//! assigns each signal a fixed bit range inside a replay frame, in listed
//! order, so that the encoder, the replay engine, and generated HDL all agree
//! on where a signal's bits live.

use alloc::string::String;
use alloc::vec::Vec;

use crate::bits::Bits;

/// Who drives a boundary signal during replay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Driven into the device by the replayed agent.
    AgentDriven,
    /// Driven by the device and checked against the capture.
    DutDriven,
}

/// Per-signal comparison policy for device-driven signals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckPolicy {
    /// Compare every captured bit.
    Strict,
    /// Never compare.
    Ignore,
    /// Compare only bits set in the mask; mask width equals signal width.
    Masked(Bits),
}

/// One boundary signal: replay name, capture path, width, direction, policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalBinding {
    pub name: String,
    pub capture_path: String,
    pub width: usize,
    pub direction: Direction,
    pub check: CheckPolicy,
}

/// Where cycle zero of a capture begins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartCondition {
    /// First rising clock edge in the capture.
    FirstEdge,
    /// First rising clock edge at which the sampled reset is inactive.
    AfterResetDeassert,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClockSpec {
    pub capture_path: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResetSpec {
    pub capture_path: String,
    /// Level at which reset is asserted.
    pub active_level: bool,
    pub start: StartCondition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterfaceSpec {
    clock: ClockSpec,
    reset: Option<ResetSpec>,
    bindings: Vec<SignalBinding>,
}

impl InterfaceSpec {
    /// Builds a validated spec. Rules: at least one binding; names and
    /// capture paths unique; widths nonzero; the clock (and reset, if any)
    /// must not also appear as a data binding; mask widths match.
    pub fn new(
        clock: ClockSpec,
        reset: Option<ResetSpec>,
        bindings: Vec<SignalBinding>,
    ) -> Result<Self, SpecError> {
        if bindings.is_empty() {
            return Err(SpecError::NoBindings);
        }
        for (i, b) in bindings.iter().enumerate() {
            if b.width == 0 {
                return Err(SpecError::ZeroWidth(b.name.clone()));
            }
            if b.name.is_empty() {
                return Err(SpecError::EmptyName(b.capture_path.clone()));
            }
            for other in &bindings[..i] {
                if other.name == b.name {
                    return Err(SpecError::DuplicateName(b.name.clone()));
                }
                if other.capture_path == b.capture_path {
                    return Err(SpecError::DuplicatePath(b.capture_path.clone()));
                }
            }
            if b.capture_path == clock.capture_path {
                return Err(SpecError::ClockBound(b.name.clone()));
            }
            if let Some(r) = &reset {
                if b.capture_path == r.capture_path {
                    return Err(SpecError::ResetBound(b.name.clone()));
                }
            }
            if let CheckPolicy::Masked(mask) = &b.check {
                if mask.width() != b.width {
                    return Err(SpecError::MaskWidthMismatch {
                        name: b.name.clone(),
                        signal: b.width,
                        mask: mask.width(),
                    });
                }
            }
        }
        Ok(InterfaceSpec {
            clock,
            reset,
            bindings,
        })
    }

    pub fn clock(&self) -> &ClockSpec {
        &self.clock
    }

    pub fn reset(&self) -> Option<&ResetSpec> {
        self.reset.as_ref()
    }

    pub fn bindings(&self) -> &[SignalBinding] {
        &self.bindings
    }

    /// Effective start condition; without a reset only the first edge works.
    pub fn start_condition(&self) -> StartCondition {
        match &self.reset {
            Some(r) => r.start,
            None => StartCondition::FirstEdge,
        }
    }

    /// Packs bindings into frame bit ranges, in listed order.
    pub fn frame_layout(&self) -> FrameLayout {
        let mut fields = Vec::with_capacity(self.bindings.len());
        let mut offset = 0usize;
        for b in &self.bindings {
            fields.push(FieldLayout {
                name: b.name.clone(),
                offset,
                width: b.width,
                direction: b.direction,
                check: b.check.clone(),
            });
            offset += b.width;
        }
        FrameLayout {
            fields,
            width: offset,
        }
    }
}

/// One signal's slot in a frame: bits `[offset, offset + width)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldLayout {
    pub name: String,
    pub offset: usize,
    pub width: usize,
    pub direction: Direction,
    pub check: CheckPolicy,
}

/// Complete frame packing; `width` is the sum of all field widths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameLayout {
    pub fields: Vec<FieldLayout>,
    pub width: usize,
}

impl FrameLayout {
    pub fn field(&self, name: &str) -> Option<&FieldLayout> {
        self.fields.iter().find(|f| f.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("interface has no signal bindings")]
    NoBindings,
    #[error("signal bound to capture path '{0}' has an empty name")]
    EmptyName(String),
    #[error("duplicate signal name '{0}'")]
    DuplicateName(String),
    #[error("duplicate capture path '{0}'")]
    DuplicatePath(String),
    #[error("signal '{0}' declared with zero width")]
    ZeroWidth(String),
    #[error("signal '{0}' uses the clock's capture path; the clock is regenerated, not replayed")]
    ClockBound(String),
    #[error("signal '{0}' uses the reset's capture path; the reset is regenerated, not replayed")]
    ResetBound(String),
    #[error("mask for '{name}' is {mask} bits but the signal is {signal} bits")]
    MaskWidthMismatch {
        name: String,
        signal: usize,
        mask: usize,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bind(name: &str, width: usize, direction: Direction) -> SignalBinding {
        SignalBinding {
            name: name.into(),
            capture_path: alloc::format!("tb.{name}"),
            width,
            direction,
            check: CheckPolicy::Strict,
        }
    }

    fn clock() -> ClockSpec {
        ClockSpec {
            capture_path: "tb.clk".into(),
        }
    }

    fn spec(bindings: Vec<SignalBinding>) -> Result<InterfaceSpec, SpecError> {
        InterfaceSpec::new(clock(), None, bindings)
    }

    #[test]
    fn minimal_spec_validates() {
        let s = spec(vec![bind("data", 32, Direction::AgentDriven)]).unwrap();
        assert_eq!(s.frame_layout().width, 32);
        assert_eq!(s.start_condition(), StartCondition::FirstEdge);
    }

    #[test]
    fn layout_offsets_are_prefix_sums() {
        let s = spec(vec![
            bind("a", 1, Direction::AgentDriven),
            bind("b", 32, Direction::DutDriven),
            bind("c", 8, Direction::AgentDriven),
        ])
        .unwrap();
        let layout = s.frame_layout();
        let offsets: Vec<usize> = layout.fields.iter().map(|f| f.offset).collect();
        assert_eq!(offsets, vec![0, 1, 33]);
        assert_eq!(layout.width, 41);
    }

    #[test]
    fn single_one_bit_signal_layout() {
        let s = spec(vec![bind("a", 1, Direction::DutDriven)]).unwrap();
        let layout = s.frame_layout();
        assert_eq!(layout.fields[0].offset, 0);
        assert_eq!(layout.width, 1);
    }

    #[test]
    fn empty_binding_list_is_rejected() {
        assert_eq!(spec(vec![]), Err(SpecError::NoBindings));
    }

    #[test]
    fn duplicate_names_and_paths_are_rejected() {
        let mut b = bind("a", 1, Direction::AgentDriven);
        b.capture_path = "tb.other".into();
        assert_eq!(
            spec(vec![bind("a", 1, Direction::AgentDriven), b]),
            Err(SpecError::DuplicateName("a".into()))
        );
        let mut c = bind("c", 1, Direction::AgentDriven);
        c.capture_path = "tb.a".into();
        assert_eq!(
            spec(vec![bind("a", 1, Direction::AgentDriven), c]),
            Err(SpecError::DuplicatePath("tb.a".into()))
        );
    }

    #[test]
    fn zero_width_is_rejected() {
        assert_eq!(
            spec(vec![bind("a", 0, Direction::AgentDriven)]),
            Err(SpecError::ZeroWidth("a".into()))
        );
    }

    #[test]
    fn clock_cannot_be_a_data_binding() {
        let mut b = bind("clk2", 1, Direction::AgentDriven);
        b.capture_path = "tb.clk".into();
        assert_eq!(spec(vec![b]), Err(SpecError::ClockBound("clk2".into())));
    }

    #[test]
    fn reset_cannot_be_a_data_binding() {
        let reset = ResetSpec {
            capture_path: "tb.rst".into(),
            active_level: true,
            start: StartCondition::AfterResetDeassert,
        };
        let mut b = bind("r", 1, Direction::AgentDriven);
        b.capture_path = "tb.rst".into();
        assert_eq!(
            InterfaceSpec::new(clock(), Some(reset), vec![b]),
            Err(SpecError::ResetBound("r".into()))
        );
    }

    #[test]
    fn mask_width_must_match_signal_width() {
        let mut b = bind("d", 8, Direction::DutDriven);
        b.check = CheckPolicy::Masked(crate::bits::Bits::ones(4));
        assert_eq!(
            spec(vec![b]),
            Err(SpecError::MaskWidthMismatch {
                name: "d".into(),
                signal: 8,
                mask: 4
            })
        );
    }

    #[test]
    fn layout_matches_independent_prefix_sum() {
        // Oracle: fold the widths independently of frame_layout's loop.
        let widths = [3usize, 1, 64, 7, 12, 1, 1, 9, 33, 2];
        let bindings: Vec<SignalBinding> = widths
            .iter()
            .enumerate()
            .map(|(i, &w)| bind(&alloc::format!("s{i}"), w, Direction::AgentDriven))
            .collect();
        let layout = spec(bindings).unwrap().frame_layout();
        let mut expected = Vec::new();
        let mut acc = 0usize;
        for &w in &widths {
            expected.push(acc);
            acc += w;
        }
        assert_eq!(
            layout.fields.iter().map(|f| f.offset).collect::<Vec<_>>(),
            expected
        );
        assert_eq!(layout.width, acc);
        // Fields tile the frame: each starts where the previous ended.
        for pair in layout.fields.windows(2) {
            assert_eq!(pair[0].offset + pair[0].width, pair[1].offset);
        }
    }
}
