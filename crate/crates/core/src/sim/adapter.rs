// SPDX-License-Identifier: Apache-2.0

//! Bridges a [`ReplayEngine`](crate::engine::ReplayEngine) into the kernel.
//!
//! The adapter is the in-simulation stand-in for the generated replay ROM:
//! at each edge it feeds the engine the sampled device outputs for checking,
//! then stages the *next* frame's agent values so they are live during the
//! following cycle, exactly when the capture had them live. Frame zero's
//! values are not staged here at all; the bench builder installs them as
//! initial net values so the device sees them from tick zero.
//!
//! Replay begins at the first edge permitted by the artifact's start
//! condition (tracked by sampling the bench's reset), and after the last
//! frame the drives freeze at their final values.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Component, NetId, NetValues, Staged};
use crate::bits::Bits;
use crate::engine::{ReplayEngine, ReplayReport, ReplayStatus};
use crate::ifspec::StartCondition;

pub struct ReplayAdapter {
    engine: ReplayEngine,
    /// Agent-driven artifact signals and the nets they drive.
    drives: Vec<(String, NetId)>,
    /// Device-driven artifact signals and the nets they are observed on.
    observes: Vec<(String, NetId)>,
    /// Reset net and its active level, for the start condition.
    reset: Option<(NetId, bool)>,
    started: bool,
    /// Values staged every cycle; updated by lookahead after each step.
    current: BTreeMap<String, Bits>,
}

impl ReplayAdapter {
    /// `drives`/`observes` must cover the engine artifact's agent and
    /// device entries; the bench builder validates that before wiring.
    pub fn new(
        engine: ReplayEngine,
        drives: Vec<(String, NetId)>,
        observes: Vec<(String, NetId)>,
        reset: Option<(NetId, bool)>,
    ) -> Self {
        // An empty artifact still needs defined drives: all zeros.
        let current = engine.drive_frame(0).unwrap_or_else(|| {
            engine
                .artifact()
                .agent_entries()
                .map(|e| (e.name.clone(), Bits::zeros(e.width)))
                .collect()
        });
        ReplayAdapter {
            engine,
            drives,
            observes,
            reset,
            started: false,
            current,
        }
    }

    /// Frame-zero drive values, for installation as initial net values.
    pub fn initial_drives(&self) -> &BTreeMap<String, Bits> {
        &self.current
    }

    pub fn report(&self) -> ReplayReport {
        self.engine.report()
    }

    fn start_now(&self, nets: &NetValues) -> bool {
        match self.engine.artifact().start_condition() {
            StartCondition::FirstEdge => true,
            StartCondition::AfterResetDeassert => match self.reset {
                Some((rst, active_level)) => nets.is_high(rst) != active_level,
                // No reset net in the bench: nothing to wait for.
                None => true,
            },
        }
    }
}

impl Component for ReplayAdapter {
    fn eval(&mut self, _cycle: u64, nets: &NetValues) -> Staged {
        if !self.started && self.start_now(nets) {
            self.started = true;
        }
        if self.started {
            if let ReplayStatus::Running { cycle } = *self.engine.status() {
                let observed: BTreeMap<String, Bits> = self
                    .observes
                    .iter()
                    .map(|(name, net)| (name.clone(), nets.get(*net).clone()))
                    .collect();
                self.engine
                    .step(&observed)
                    .expect("bench wiring matches the artifact directory");
                // Lookahead: stage the next frame now so it is live during
                // the next cycle; past the end the last values freeze.
                if let Some(next) = self.engine.drive_frame(cycle + 1) {
                    self.current = next;
                }
            }
        }
        let mut s = Staged::new();
        for (name, net) in &self.drives {
            let value = self
                .current
                .get(name)
                .expect("drive map covers agent entries")
                .clone();
            s.set(*net, value);
        }
        s
    }

    fn as_any(&self) -> &dyn core::any::Any {
        self
    }
}
