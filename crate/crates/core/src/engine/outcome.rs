use serde::Serialize;

use crate::model::{EetMatrix, MachineSpec, SimConfig, Task, TaskStatus};
use crate::time::Ticks;

use super::event::LogEntry;

/// Record of a finished run; the input to metrics and reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOutcome {
    pub config: SimConfig,
    pub eet: EetMatrix,
    pub machines: Vec<MachineSpec>,
    /// Tasks by id, in their final state.
    pub tasks: Vec<Task>,
    /// Busy time per machine, by index.
    pub machine_busy: Vec<Ticks>,
    pub makespan: Ticks,
    pub event_log: Vec<LogEntry>,
}

impl SimOutcome {
    pub fn count(&self, status: TaskStatus) -> usize {
        self.tasks.iter().filter(|t| t.status == status).count()
    }
}
