use std::cmp::Ordering;

use serde::Serialize;

use crate::model::TaskStatus;
use crate::time::Ticks;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Completion { machine: usize, task: usize },
    DeadlineCheck { task: usize },
    Arrival { task: usize },
    SchedulerWake,
}

impl EventKind {
    /// Same-tick precedence: completions free machines before deadlines are
    /// checked, and both happen before new arrivals and scheduling.
    pub fn class_rank(&self) -> u8 {
        match self {
            EventKind::Completion { .. } => 0,
            EventKind::DeadlineCheck { .. } => 1,
            EventKind::Arrival { .. } => 2,
            EventKind::SchedulerWake => 3,
        }
    }

    pub fn entity(&self) -> usize {
        match *self {
            EventKind::Completion { machine, .. } => machine,
            EventKind::DeadlineCheck { task } | EventKind::Arrival { task } => task,
            EventKind::SchedulerWake => 0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Completion { .. } => "completion",
            EventKind::DeadlineCheck { .. } => "deadline_check",
            EventKind::Arrival { .. } => "arrival",
            EventKind::SchedulerWake => "scheduler_wake",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SimEvent {
    pub time: Ticks,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Total order over events: time, then class rank, then entity id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrderKey {
    pub time: Ticks,
    pub class: u8,
    pub entity: usize,
}

pub fn event_order_key(e: &SimEvent) -> OrderKey {
    OrderKey { time: e.time, class: e.kind.class_rank(), entity: e.kind.entity() }
}

impl Ord for SimEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        event_order_key(self).cmp(&event_order_key(other)).then_with(|| {
            // A machine has at most one pending completion, so this only
            // keeps Ord consistent with Eq.
            let task = |k: &EventKind| match *k {
                EventKind::Completion { task, .. } => task,
                _ => 0,
            };
            task(&self.kind).cmp(&task(&other.kind))
        })
    }
}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StatusChange {
    pub task: usize,
    pub from: TaskStatus,
    pub to: TaskStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub machine: Option<usize>,
}

/// One applied event and the lifecycle transitions it caused.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogEntry {
    pub seq: usize,
    pub event: SimEvent,
    pub changes: Vec<StatusChange>,
}
