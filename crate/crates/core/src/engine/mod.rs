//! Discrete-event core.
//!
//! Events live in an ordered set keyed by (time, class, entity). Each
//! [`Simulation::step`] pops the minimum, advances the clock, and applies it;
//! arrivals, completions and drops may enqueue a scheduler wake-up at the
//! same tick, which runs the configured policy until it declines to map.

mod event;
mod outcome;
mod sim;
mod snapshot;

pub use event::{event_order_key, EventKind, LogEntry, OrderKey, SimEvent, StatusChange};
pub use outcome::SimOutcome;
pub use sim::{Counters, MachineState, Running, Scenario, Simulation, StepResult};
pub use snapshot::{ExecutingSnapshot, MachineSnapshot, StateSnapshot};

use crate::error::Result;
use crate::model::SimConfig;
use crate::scheduling::PolicyRegistry;

/// Builds a simulation at clock 0.
pub fn init_simulation(scenario: Scenario, config: SimConfig, registry: &PolicyRegistry) -> Result<Simulation> {
    Simulation::new(scenario, config, registry)
}

/// Convenience: build and run to the end.
pub fn run(scenario: Scenario, config: SimConfig, registry: &PolicyRegistry) -> Result<SimOutcome> {
    Simulation::new(scenario, config, registry)?.run_to_completion()
}
