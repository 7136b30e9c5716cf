//! Domain types shared by the engine, the policies, and the file formats.

use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scheduling::PolicyId;
use crate::time::Ticks;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TaskTypeId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaskType {
    pub id: TaskTypeId,
    pub name: String,
}

/// One cell of the EET matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EetEntry {
    Finite(Ticks),
    Unsupported,
}

impl EetEntry {
    pub fn finite(self) -> Option<Ticks> {
        match self {
            EetEntry::Finite(t) => Some(t),
            EetEntry::Unsupported => None,
        }
    }

    pub fn is_supported(self) -> bool {
        matches!(self, EetEntry::Finite(_))
    }
}

/// Expected execution time of every task type on every machine.
///
/// Rows are task types, columns are machines. Identical columns describe a
/// homogeneous system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EetMatrix {
    task_types: Vec<TaskType>,
    machine_names: Vec<String>,
    rows: Vec<Vec<EetEntry>>,
}

impl EetMatrix {
    pub fn new(type_names: Vec<String>, machine_names: Vec<String>, rows: Vec<Vec<EetEntry>>) -> Result<Self> {
        if type_names.len() != rows.len() {
            return Err(Error::Config(format!("{} task type names for {} EET rows", type_names.len(), rows.len())));
        }
        for (i, name) in type_names.iter().enumerate() {
            if type_names[..i].contains(name) {
                return Err(Error::Config(format!("duplicate task type {name}")));
            }
        }
        for (i, name) in machine_names.iter().enumerate() {
            if machine_names[..i].contains(name) {
                return Err(Error::Config(format!("duplicate machine {name}")));
            }
        }
        for (name, row) in type_names.iter().zip(&rows) {
            if row.len() != machine_names.len() {
                return Err(Error::Config(format!(
                    "task type {name}: expected {} entries, found {}",
                    machine_names.len(),
                    row.len()
                )));
            }
            if row.contains(&EetEntry::Finite(Ticks::ZERO)) {
                return Err(Error::Config(format!("task type {name}: execution times must be positive")));
            }
            if !row.iter().any(|e| e.is_supported()) {
                return Err(Error::Config(format!("task type {name} is not supported by any machine")));
            }
        }
        let task_types =
            type_names.into_iter().enumerate().map(|(i, name)| TaskType { id: TaskTypeId(i), name }).collect();
        Ok(Self { task_types, machine_names, rows })
    }

    pub fn task_types(&self) -> &[TaskType] {
        &self.task_types
    }

    pub fn machine_names(&self) -> &[String] {
        &self.machine_names
    }

    pub fn num_types(&self) -> usize {
        self.task_types.len()
    }

    pub fn num_machines(&self) -> usize {
        self.machine_names.len()
    }

    pub fn type_by_name(&self, name: &str) -> Option<TaskTypeId> {
        self.task_types.iter().find(|t| t.name == name).map(|t| t.id)
    }

    pub fn type_name(&self, t: TaskTypeId) -> &str {
        &self.task_types[t.0].name
    }

    /// Checked table read.
    pub fn lookup(&self, t: TaskTypeId, machine: usize) -> Result<EetEntry> {
        self.rows
            .get(t.0)
            .and_then(|row| row.get(machine))
            .copied()
            .ok_or_else(|| Error::Usage(format!("EET index out of range: type {}, machine {machine}", t.0)))
    }

    /// Unchecked table read; panics on out-of-range indices.
    pub fn get(&self, t: TaskTypeId, machine: usize) -> EetEntry {
        self.rows[t.0][machine]
    }

    pub fn row(&self, t: TaskTypeId) -> &[EetEntry] {
        &self.rows[t.0]
    }

    /// Mean of the finite entries of a row, in (fractional) ticks.
    pub fn mean_finite(&self, t: TaskTypeId) -> f64 {
        let finite: Vec<u64> = self.rows[t.0].iter().filter_map(|e| e.finite()).map(Ticks::get).collect();
        finite.iter().map(|&v| v as f64).sum::<f64>() / finite.len() as f64
    }

    /// Every finite entry multiplied by `k`.
    pub fn scaled(&self, k: u64) -> Self {
        assert!(k > 0, "scale factor must be positive");
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| match e {
                        EetEntry::Finite(t) => EetEntry::Finite(*t * k),
                        EetEntry::Unsupported => EetEntry::Unsupported,
                    })
                    .collect()
            })
            .collect();
        Self { task_types: self.task_types.clone(), machine_names: self.machine_names.clone(), rows }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.rows.iter().all(|row| row.windows(2).all(|w| w[0] == w[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskStatus {
    Pending,
    Batched,
    Queued,
    Executing,
    Completed,
    Canceled,
    Missed,
}

impl TaskStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskStatus::Pending => "pending",
            TaskStatus::Batched => "batched",
            TaskStatus::Queued => "queued",
            TaskStatus::Executing => "executing",
            TaskStatus::Completed => "completed",
            TaskStatus::Canceled => "canceled",
            TaskStatus::Missed => "missed",
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, TaskStatus::Completed | TaskStatus::Canceled | TaskStatus::Missed)
    }

    /// Legal lifecycle edges. A task mapped to an idle machine passes through
    /// `Queued` and starts within the same event.
    pub fn can_transition_to(self, next: TaskStatus) -> bool {
        use TaskStatus::*;
        matches!(
            (self, next),
            (Pending, Batched)
                | (Batched, Canceled)
                | (Batched, Queued)
                | (Queued, Executing)
                | (Queued, Missed)
                | (Executing, Missed)
                | (Executing, Completed)
        )
    }
}

impl fmt::Display for TaskStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One workload entry together with its lifecycle bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Task {
    pub id: usize,
    pub task_type: TaskTypeId,
    pub arrival: Ticks,
    pub deadline: Ticks,
    pub status: TaskStatus,
    pub assigned_machine: Option<usize>,
    pub assign_time: Option<Ticks>,
    pub start: Option<Ticks>,
    pub finish: Option<Ticks>,
    /// Predicted completion at mapping time.
    pub predicted_completion: Option<Ticks>,
    pub energy_j: f64,
}

impl Task {
    pub fn new(id: usize, task_type: TaskTypeId, arrival: Ticks, deadline: Ticks) -> Self {
        Self {
            id,
            task_type,
            arrival,
            deadline,
            status: TaskStatus::Pending,
            assigned_machine: None,
            assign_time: None,
            start: None,
            finish: None,
            predicted_completion: None,
            energy_j: 0.0,
        }
    }

    /// Completion time for completed tasks, the deadline for canceled and missed ones.
    pub fn end_time(&self) -> Option<Ticks> {
        match self.status {
            TaskStatus::Completed => self.finish,
            TaskStatus::Canceled | TaskStatus::Missed => Some(self.deadline),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MachineSpec {
    pub index: usize,
    pub name: String,
    pub idle_power_w: f64,
    pub busy_power_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Immediate,
    Batch,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Immediate => "immediate",
            Mode::Batch => "batch",
        })
    }
}

/// Size limit of each machine's waiting queue; the executing task is not counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueueCapacity {
    Bounded(NonZeroUsize),
    Unbounded,
}

impl QueueCapacity {
    pub fn bounded(k: usize) -> Option<Self> {
        NonZeroUsize::new(k).map(QueueCapacity::Bounded)
    }

    pub fn limit(self) -> Option<usize> {
        match self {
            QueueCapacity::Bounded(k) => Some(k.get()),
            QueueCapacity::Unbounded => None,
        }
    }
}

impl fmt::Display for QueueCapacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueueCapacity::Bounded(k) => write!(f, "{k}"),
            QueueCapacity::Unbounded => f.write_str("inf"),
        }
    }
}

impl FromStr for QueueCapacity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "inf" {
            return Ok(QueueCapacity::Unbounded);
        }
        s.parse::<usize>()
            .ok()
            .and_then(QueueCapacity::bounded)
            .ok_or_else(|| Error::Usage(format!("queue size must be a positive integer or `inf`, got {s:?}")))
    }
}

impl Serialize for QueueCapacity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            QueueCapacity::Bounded(k) => s.serialize_u64(k.get() as u64),
            QueueCapacity::Unbounded => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub policy: PolicyId,
    pub mode: Mode,
    pub machine_queue_capacity: QueueCapacity,
    pub seed: u64,
}

impl SimConfig {
    /// Checks the mode/capacity rule: immediate policies run with unbounded queues.
    pub fn check(&self) -> Result<()> {
        if self.mode == Mode::Immediate && self.machine_queue_capacity != QueueCapacity::Unbounded {
            return Err(Error::Config(format!(
                "policy {} is immediate-mode; machine queue size must be inf, got {}",
                self.policy, self.machine_queue_capacity
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// `machines`, `task <id>`, ...
    pub entity: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, entity: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation { entity: entity.into(), message: message.into() });
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::Validation(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "- {}", v.message)?;
        }
        Ok(())
    }
}

/// Cross-checks the EET, machine list, and workload.
pub fn validate_scenario(eet: &EetMatrix, machines: &[MachineSpec], workload: &[Task]) -> ValidationReport {
    let mut report = ValidationReport::default();
    if machines.len() != eet.num_machines() {
        report.push(
            "machines",
            format!(
                "machine count mismatch: {} machines listed, EET has {} columns",
                machines.len(),
                eet.num_machines()
            ),
        );
    } else {
        for (spec, col) in machines.iter().zip(eet.machine_names()) {
            if &spec.name != col {
                report.push(
                    format!("machine {}", spec.index),
                    format!("machine name mismatch at index {}: {} vs EET column {col}", spec.index, spec.name),
                );
            }
        }
    }
    for task in workload {
        if task.task_type.0 >= eet.num_types() {
            report.push(
                format!("task {}", task.id),
                format!("unknown task type index {}, task id {}", task.task_type.0, task.id),
            );
        }
        if task.deadline < task.arrival {
            report.push(format!("task {}", task.id), format!("deadline before arrival, task id {}", task.id));
        }
    }
    report
}

/// A named-type variant of the unknown-type rule, used by file parsing where
/// the type is still a string.
pub(crate) fn unknown_type_violation(type_name: &str, task_id: usize) -> Violation {
    Violation {
        entity: format!("task {task_id}"),
        message: format!("unknown task type {type_name}, task id {task_id}"),
    }
}
