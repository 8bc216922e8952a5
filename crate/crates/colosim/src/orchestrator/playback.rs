//! Feeding scenario tap updates into the engine at run time.

use super::OrchestratorError;
use crate::channel::Engine;
use crate::scenario::{RfScenario, TapUpdate};

/// Walks a scenario's update timeline against the engine clock. Each update
/// lands at the first block boundary whose start time is at or after the
/// update's `t_ms`; updates sharing a boundary apply in file order.
pub struct ScenarioPlayer {
    updates: Vec<TapUpdate>,
    carrier_hz: f64,
    sample_rate_hz: f64,
    block_size: u64,
    next: usize,
}

impl ScenarioPlayer {
    pub fn new(scenario: &RfScenario, engine: &Engine) -> Result<Self, OrchestratorError> {
        if scenario.n_nodes != engine.config().n_nodes {
            return Err(OrchestratorError::Validation(format!(
                "scenario has {} nodes but the engine is configured for {}",
                scenario.n_nodes,
                engine.config().n_nodes
            )));
        }
        if scenario.sample_rate_hz != engine.config().sample_rate_hz {
            return Err(OrchestratorError::Validation(format!(
                "scenario sample rate {} differs from engine sample rate {}",
                scenario.sample_rate_hz,
                engine.config().sample_rate_hz
            )));
        }
        Ok(ScenarioPlayer {
            updates: scenario.updates.clone(),
            carrier_hz: scenario.carrier_hz,
            sample_rate_hz: scenario.sample_rate_hz,
            block_size: engine.config().block_size as u64,
            next: 0,
        })
    }

    /// First block boundary at or after scenario time `t_ms`.
    pub fn due_sample(&self, t_ms: u64) -> u64 {
        let t_samples = t_ms as f64 / 1000.0 * self.sample_rate_hz;
        let blocks = (t_samples / self.block_size as f64).ceil() as u64;
        blocks * self.block_size
    }

    /// Stage every update due at or before the engine's current boundary.
    /// Call once per tick before `process_block` (and after any skip).
    pub fn stage_due(&mut self, engine: &mut Engine) -> Result<usize, OrchestratorError> {
        let mut staged = 0;
        while self.next < self.updates.len() {
            let update = &self.updates[self.next];
            if self.due_sample(update.t_ms) > engine.clock() {
                break;
            }
            if let Some(c) = update.carrier_hz {
                self.carrier_hz = c;
            }
            engine.set_taps(&update.links, self.carrier_hz)?;
            self.next += 1;
            staged += 1;
        }
        Ok(staged)
    }

    /// Carrier currently in effect (after any overrides staged so far).
    pub fn carrier_hz(&self) -> f64 {
        self.carrier_hz
    }

    pub fn remaining(&self) -> usize {
        self.updates.len() - self.next
    }
}
