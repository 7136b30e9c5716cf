use serde::Serialize;

use crate::time::Ticks;

use super::event::LogEntry;
use super::sim::{Counters, Simulation};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExecutingSnapshot {
    pub task: usize,
    pub started: Ticks,
    pub will_finish: Ticks,
    /// Fraction of the execution done, in [0, 1].
    pub progress: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MachineSnapshot {
    pub index: usize,
    pub name: String,
    pub waiting: Vec<usize>,
    pub executing: Option<ExecutingSnapshot>,
    pub busy: Ticks,
    pub idle: Ticks,
}

/// Deep copy of what a viewer needs to draw the system at one instant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateSnapshot {
    pub clock: Ticks,
    pub batch_queue: Vec<usize>,
    pub machines: Vec<MachineSnapshot>,
    pub counters: Counters,
    pub last_event: Option<LogEntry>,
    pub finished: bool,
}

impl Simulation {
    pub fn snapshot(&self) -> StateSnapshot {
        let clock = self.clock();
        StateSnapshot {
            clock,
            batch_queue: self.batch_queue().collect(),
            machines: self
                .machines()
                .iter()
                .map(|m| MachineSnapshot {
                    index: m.spec.index,
                    name: m.spec.name.clone(),
                    waiting: m.waiting.iter().copied().collect(),
                    executing: m.executing.map(|r| ExecutingSnapshot {
                        task: r.task,
                        started: r.started,
                        will_finish: r.will_finish,
                        progress: (clock - r.started).get() as f64 / (r.will_finish - r.started).get() as f64,
                    }),
                    busy: m.busy_at(clock),
                    idle: m.idle_at(clock),
                })
                .collect(),
            counters: self.counters(),
            last_event: self.event_log().last().cloned(),
            finished: self.is_finished(),
        }
    }
}
