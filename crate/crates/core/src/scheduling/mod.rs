//! Mapping policies.
//!
//! A policy sees the batch queue and a read-only view of the machines and
//! proposes at most one (task, machine) pair per call. The engine applies the
//! assignment, refreshes the view, and calls again until the policy returns
//! `None`. Ties break by ascending machine index, then task id, then arrival.

mod batch;
mod immediate;
mod registry;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::Error;
use crate::model::{EetMatrix, Mode, TaskTypeId};
use crate::time::Ticks;

pub use batch::{min_min_select, mmu_select, msd_select, MinMin, MinUrgency, SoonestDeadline};
pub use immediate::{fcfs_select, mect_select, meet_select, Fcfs, Mect, Meet};
pub use registry::PolicyRegistry;

/// The part of a batched task a policy may look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BatchedTask {
    pub id: usize,
    pub task_type: TaskTypeId,
    pub arrival: Ticks,
    pub deadline: Ticks,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MachineSlot {
    pub index: usize,
    /// Waiting plus executing tasks.
    pub load: usize,
    /// Remaining waiting-queue room; `None` when unbounded.
    pub free_slots: Option<usize>,
    /// Earliest moment the machine could start a newly queued task.
    pub ready_time: Ticks,
}

impl MachineSlot {
    pub fn has_room(&self) -> bool {
        self.free_slots.is_none_or(|n| n > 0)
    }
}

#[derive(Debug, Clone)]
pub struct MachinesView<'a> {
    pub clock: Ticks,
    pub eet: &'a EetMatrix,
    pub machines: Vec<MachineSlot>,
}

impl MachinesView<'_> {
    pub fn supports(&self, task_type: TaskTypeId, machine: usize) -> bool {
        self.eet.get(task_type, machine).is_supported()
    }

    /// Machines that support the type and can take another task, by index.
    pub fn candidates(&self, task_type: TaskTypeId) -> impl Iterator<Item = &MachineSlot> + '_ {
        self.machines.iter().filter(move |m| m.has_room() && self.supports(task_type, m.index))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub task: usize,
    pub machine: usize,
    pub predicted_completion: Ticks,
}

/// Ready time plus EET for each machine; `None` where the type is unsupported.
pub fn expected_completion_time(view: &MachinesView<'_>, task: &BatchedTask) -> Vec<Option<Ticks>> {
    view.machines.iter().map(|m| view.eet.get(task.task_type, m.index).finite().map(|eet| m.ready_time + eet)).collect()
}

/// The free, supporting machine with the smallest expected completion time.
pub(crate) fn min_ect_machine(view: &MachinesView<'_>, task: &BatchedTask) -> Option<(usize, Ticks)> {
    let mut best: Option<(usize, Ticks)> = None;
    for m in view.candidates(task.task_type) {
        let eet = view.eet.get(task.task_type, m.index).finite()?;
        let ect = m.ready_time + eet;
        if best.is_none_or(|(_, b)| ect < b) {
            best = Some((m.index, ect));
        }
    }
    best
}

/// A mapping heuristic.
///
/// Implementations must be pure functions of their inputs and must never
/// pick a machine that does not support the task type or has no room.
pub trait Policy: Send + Sync {
    fn mode(&self) -> Mode;

    fn select(&self, batch: &[BatchedTask], view: &MachinesView<'_>) -> Option<Assignment>;
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyId {
    Fcfs,
    Mect,
    Meet,
    Mm,
    Mmu,
    Msd,
    /// A registered policy, by lowercase name.
    Custom(String),
}

impl PolicyId {
    pub const BUILTIN: [PolicyId; 6] =
        [PolicyId::Fcfs, PolicyId::Mect, PolicyId::Meet, PolicyId::Mm, PolicyId::Mmu, PolicyId::Msd];

    /// Lowercase name as accepted on the command line.
    pub fn key(&self) -> String {
        match self {
            PolicyId::Fcfs => "fcfs".into(),
            PolicyId::Mect => "mect".into(),
            PolicyId::Meet => "meet".into(),
            PolicyId::Mm => "mm".into(),
            PolicyId::Mmu => "mmu".into(),
            PolicyId::Msd => "msd".into(),
            PolicyId::Custom(name) => name.clone(),
        }
    }
}

impl fmt::Display for PolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyId::Custom(name) => f.write_str(name),
            builtin => f.write_str(&builtin.key().to_uppercase()),
        }
    }
}

/// Case-insensitive. Unknown names parse as `Custom`; the registry decides
/// whether they exist.
impl FromStr for PolicyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let key = s.trim().to_lowercase();
        if key.is_empty() {
            return Err(Error::Usage("empty policy name".into()));
        }
        Ok(match key.as_str() {
            "fcfs" => PolicyId::Fcfs,
            "mect" => PolicyId::Mect,
            "meet" => PolicyId::Meet,
            "mm" => PolicyId::Mm,
            "mmu" => PolicyId::Mmu,
            "msd" => PolicyId::Msd,
            _ => PolicyId::Custom(key),
        })
    }
}

impl Serialize for PolicyId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
