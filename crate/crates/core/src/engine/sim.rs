use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{validate_scenario, EetMatrix, MachineSpec, SimConfig, Task, TaskStatus};
use crate::scheduling::{Assignment, BatchedTask, MachineSlot, MachinesView, Policy, PolicyRegistry};
use crate::time::Ticks;

use super::event::{EventKind, LogEntry, SimEvent, StatusChange};
use super::outcome::SimOutcome;

/// Everything a run is built from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub eet: EetMatrix,
    pub machines: Vec<MachineSpec>,
    pub workload: Vec<Task>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Running {
    pub task: usize,
    pub started: Ticks,
    pub will_finish: Ticks,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MachineState {
    pub spec: MachineSpec,
    pub waiting: VecDeque<usize>,
    pub executing: Option<Running>,
    /// Busy time of finished (completed or interrupted) executions.
    pub busy_ticks: Ticks,
    pub completed: usize,
    pub missed: usize,
}

impl MachineState {
    fn new(spec: MachineSpec) -> Self {
        Self { spec, waiting: VecDeque::new(), executing: None, busy_ticks: Ticks::ZERO, completed: 0, missed: 0 }
    }

    /// Busy time up to `clock`, counting the current execution so far.
    pub fn busy_at(&self, clock: Ticks) -> Ticks {
        self.busy_ticks + self.executing.map_or(Ticks::ZERO, |r| clock - r.started)
    }

    pub fn idle_at(&self, clock: Ticks) -> Ticks {
        clock - self.busy_at(clock)
    }

    pub fn load(&self) -> usize {
        self.waiting.len() + usize::from(self.executing.is_some())
    }

    pub fn ready_time(&self, clock: Ticks, eet: &EetMatrix, tasks: &[Task]) -> Ticks {
        let remaining = self.executing.map_or(Ticks::ZERO, |r| r.will_finish - clock);
        let queued: Ticks = self
            .waiting
            .iter()
            .map(|&t| eet.get(tasks[t].task_type, self.spec.index).finite().unwrap_or(Ticks::ZERO))
            .sum();
        clock + remaining + queued
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    pub total: usize,
    pub pending: usize,
    pub batched: usize,
    pub queued: usize,
    pub executing: usize,
    pub completed: usize,
    pub canceled: usize,
    pub missed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StepResult {
    Applied(LogEntry),
    Finished,
}

/// A single simulation run. Owned by one caller; cloning gives an
/// independent copy.
#[derive(Clone)]
pub struct Simulation {
    eet: EetMatrix,
    config: SimConfig,
    policy: Arc<dyn Policy>,
    tasks: Vec<Task>,
    machines: Vec<MachineState>,
    events: BTreeSet<SimEvent>,
    batch: VecDeque<usize>,
    clock: Ticks,
    last_effective: Ticks,
    log: Vec<LogEntry>,
    counters: Counters,
    finished: bool,
}

impl std::fmt::Debug for Simulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Simulation")
            .field("clock", &self.clock)
            .field("config", &self.config)
            .field("counters", &self.counters)
            .field("pending_events", &self.events.len())
            .finish()
    }
}

impl Simulation {
    /// Validates the scenario and config, then seeds one arrival and one
    /// deadline check per task.
    pub fn new(scenario: Scenario, config: SimConfig, registry: &PolicyRegistry) -> Result<Self> {
        registry.check(&config)?;
        let policy =
            registry.get(&config.policy).ok_or_else(|| Error::Config(format!("unknown policy {}", config.policy)))?;
        Self::with_policy(scenario, config, policy)
    }

    pub fn with_policy(scenario: Scenario, config: SimConfig, policy: Arc<dyn Policy>) -> Result<Self> {
        config.check()?;
        let Scenario { eet, machines, workload } = scenario;
        validate_scenario(&eet, &machines, &workload).into_result()?;

        let mut tasks = workload;
        tasks.sort_by_key(|t| t.id);
        if tasks.iter().enumerate().any(|(i, t)| t.id != i) {
            return Err(Error::Config("task ids must be unique and dense from 0".into()));
        }
        let mut events = BTreeSet::new();
        for t in &mut tasks {
            *t = Task::new(t.id, t.task_type, t.arrival, t.deadline);
            events.insert(SimEvent { time: t.arrival, kind: EventKind::Arrival { task: t.id } });
            events.insert(SimEvent { time: t.deadline, kind: EventKind::DeadlineCheck { task: t.id } });
        }
        let counters = Counters { total: tasks.len(), pending: tasks.len(), ..Counters::default() };
        Ok(Self {
            eet,
            config,
            policy,
            tasks,
            machines: machines.into_iter().map(MachineState::new).collect(),
            events,
            batch: VecDeque::new(),
            clock: Ticks::ZERO,
            last_effective: Ticks::ZERO,
            log: Vec::new(),
            counters,
            finished: false,
        })
    }

    pub fn clock(&self) -> Ticks {
        self.clock
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn eet(&self) -> &EetMatrix {
        &self.eet
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn machines(&self) -> &[MachineState] {
        &self.machines
    }

    pub fn batch_queue(&self) -> impl Iterator<Item = usize> + '_ {
        self.batch.iter().copied()
    }

    pub fn pending_events(&self) -> impl Iterator<Item = &SimEvent> {
        self.events.iter()
    }

    pub fn next_event_time(&self) -> Option<Ticks> {
        self.events.first().map(|e| e.time)
    }

    pub fn event_log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Pops and applies the earliest event.
    pub fn step(&mut self) -> Result<StepResult> {
        if self.finished {
            return Err(Error::Usage("simulation already finished".into()));
        }
        let Some(event) = self.events.pop_first() else {
            self.finished = true;
            return Ok(StepResult::Finished);
        };
        debug_assert!(event.time >= self.clock);
        self.clock = event.time;
        let mut changes = Vec::new();
        match event.kind {
            EventKind::Arrival { task } => self.on_arrival(task, &mut changes),
            EventKind::DeadlineCheck { task } => self.on_deadline(task, &mut changes),
            EventKind::Completion { machine, task } => self.on_completion(machine, task, &mut changes),
            EventKind::SchedulerWake => self.on_wake(&mut changes)?,
        }
        if !changes.is_empty() {
            self.last_effective = self.clock;
        }
        let entry = LogEntry { seq: self.log.len(), event, changes };
        self.log.push(entry.clone());
        Ok(StepResult::Applied(entry))
    }

    /// Steps until the event queue is exhausted.
    pub fn run_to_completion(mut self) -> Result<SimOutcome> {
        while !self.finished {
            self.step()?;
        }
        Ok(self.into_outcome())
    }

    /// Final records. Meaningful once `is_finished()`.
    pub fn into_outcome(self) -> SimOutcome {
        let makespan = self.last_effective;
        SimOutcome {
            config: self.config,
            eet: self.eet,
            machine_busy: self.machines.iter().map(|m| m.busy_at(makespan)).collect(),
            machines: self.machines.into_iter().map(|m| m.spec).collect(),
            tasks: self.tasks,
            makespan,
            event_log: self.log,
        }
    }

    /// Time of the last event that changed any task.
    pub fn makespan(&self) -> Ticks {
        self.last_effective
    }

    fn transition(&mut self, task: usize, to: TaskStatus, changes: &mut Vec<StatusChange>) {
        let from = self.tasks[task].status;
        assert!(from.can_transition_to(to), "illegal transition {from} -> {to} for task {task}");
        self.tasks[task].status = to;
        for (status, delta) in [(from, -1i64), (to, 1)] {
            let slot = match status {
                TaskStatus::Pending => &mut self.counters.pending,
                TaskStatus::Batched => &mut self.counters.batched,
                TaskStatus::Queued => &mut self.counters.queued,
                TaskStatus::Executing => &mut self.counters.executing,
                TaskStatus::Completed => &mut self.counters.completed,
                TaskStatus::Canceled => &mut self.counters.canceled,
                TaskStatus::Missed => &mut self.counters.missed,
            };
            *slot = (*slot as i64 + delta) as usize;
        }
        changes.push(StatusChange { task, from, to, machine: self.tasks[task].assigned_machine });
    }

    fn wake_scheduler(&mut self) {
        if !self.batch.is_empty() {
            self.events.insert(SimEvent { time: self.clock, kind: EventKind::SchedulerWake });
        }
    }

    fn on_arrival(&mut self, task: usize, changes: &mut Vec<StatusChange>) {
        self.transition(task, TaskStatus::Batched, changes);
        if self.tasks[task].deadline <= self.clock {
            // Zero slack: its deadline check already ran while it was pending.
            self.transition(task, TaskStatus::Canceled, changes);
        } else {
            self.batch.push_back(task);
            self.wake_scheduler();
        }
    }

    fn on_deadline(&mut self, task: usize, changes: &mut Vec<StatusChange>) {
        match self.tasks[task].status {
            TaskStatus::Batched => {
                self.batch.retain(|&t| t != task);
                self.transition(task, TaskStatus::Canceled, changes);
            }
            TaskStatus::Queued => {
                let m = self.tasks[task].assigned_machine.expect("queued task has a machine");
                self.machines[m].waiting.retain(|&t| t != task);
                self.machines[m].missed += 1;
                self.transition(task, TaskStatus::Missed, changes);
                self.wake_scheduler();
            }
            TaskStatus::Executing => {
                let m = self.tasks[task].assigned_machine.expect("executing task has a machine");
                let run = self.machines[m].executing.take().expect("machine is executing the task");
                self.events
                    .remove(&SimEvent { time: run.will_finish, kind: EventKind::Completion { machine: m, task } });
                self.finish_execution(m, run);
                self.machines[m].missed += 1;
                self.transition(task, TaskStatus::Missed, changes);
                self.start_next(m, changes);
                self.wake_scheduler();
            }
            // Pending only when deadline == arrival; the arrival cancels it.
            _ => {}
        }
    }

    fn on_completion(&mut self, machine: usize, task: usize, changes: &mut Vec<StatusChange>) {
        let run = self.machines[machine].executing.take().expect("completion on an idle machine");
        debug_assert_eq!(run.task, task);
        self.finish_execution(machine, run);
        self.tasks[task].finish = Some(self.clock);
        self.machines[machine].completed += 1;
        self.transition(task, TaskStatus::Completed, changes);
        self.start_next(machine, changes);
        self.wake_scheduler();
    }

    fn finish_execution(&mut self, machine: usize, run: Running) {
        let ran = self.clock - run.started;
        let m = &mut self.machines[machine];
        m.busy_ticks += ran;
        self.tasks[run.task].energy_j = m.spec.busy_power_w * ran.as_secs_f64();
    }

    fn start_next(&mut self, machine: usize, changes: &mut Vec<StatusChange>) {
        if let Some(next) = self.machines[machine].waiting.pop_front() {
            self.start(machine, next, changes);
        }
    }

    fn start(&mut self, machine: usize, task: usize, changes: &mut Vec<StatusChange>) {
        let eet = self.eet.get(self.tasks[task].task_type, machine).finite().expect("assigned to a supporting machine");
        let run = Running { task, started: self.clock, will_finish: self.clock + eet };
        self.machines[machine].executing = Some(run);
        self.tasks[task].start = Some(self.clock);
        self.transition(task, TaskStatus::Executing, changes);
        self.events.insert(SimEvent { time: run.will_finish, kind: EventKind::Completion { machine, task } });
    }

    /// Projection handed to the policy.
    pub fn machines_view(&self) -> MachinesView<'_> {
        let limit = self.config.machine_queue_capacity.limit();
        MachinesView {
            clock: self.clock,
            eet: &self.eet,
            machines: self
                .machines
                .iter()
                .map(|m| MachineSlot {
                    index: m.spec.index,
                    load: m.load(),
                    free_slots: limit.map(|k| k.saturating_sub(m.waiting.len())),
                    ready_time: m.ready_time(self.clock, &self.eet, &self.tasks),
                })
                .collect(),
        }
    }

    pub fn batched_tasks(&self) -> Vec<BatchedTask> {
        self.batch
            .iter()
            .map(|&id| {
                let t = &self.tasks[id];
                BatchedTask { id, task_type: t.task_type, arrival: t.arrival, deadline: t.deadline }
            })
            .collect()
    }

    fn on_wake(&mut self, changes: &mut Vec<StatusChange>) -> Result<()> {
        loop {
            if self.batch.is_empty() {
                return Ok(());
            }
            let batch = self.batched_tasks();
            let view = self.machines_view();
            let Some(assignment) = self.policy.select(&batch, &view) else {
                return Ok(());
            };
            self.check_assignment(&assignment, &view)?;
            self.apply(assignment, changes);
        }
    }

    fn check_assignment(&self, a: &Assignment, view: &MachinesView<'_>) -> Result<()> {
        let bad = |why: &str| {
            Err(Error::Config(format!(
                "policy {} proposed an invalid assignment of task {} to machine {}: {why}",
                self.config.policy, a.task, a.machine
            )))
        };
        if !self.batch.contains(&a.task) {
            return bad("task is not in the batch queue");
        }
        let Some(slot) = view.machines.get(a.machine) else {
            return bad("no such machine");
        };
        if !view.supports(self.tasks[a.task].task_type, a.machine) {
            return bad("machine does not support the task type");
        }
        if !slot.has_room() {
            return bad("machine queue is full");
        }
        Ok(())
    }

    fn apply(&mut self, a: Assignment, changes: &mut Vec<StatusChange>) {
        self.batch.retain(|&t| t != a.task);
        let t = &mut self.tasks[a.task];
        t.assigned_machine = Some(a.machine);
        t.assign_time = Some(self.clock);
        t.predicted_completion = Some(a.predicted_completion);
        self.transition(a.task, TaskStatus::Queued, changes);
        let m = &mut self.machines[a.machine];
        if m.executing.is_none() {
            debug_assert!(m.waiting.is_empty());
            self.start(a.machine, a.task, changes);
        } else {
            m.waiting.push_back(a.task);
        }
    }
}
