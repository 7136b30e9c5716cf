//! Per-machine and run-level statistics, including a two-level power model:
//! a machine draws its busy power while executing and its idle power
//! otherwise (queued work does not count as busy).

use serde::Serialize;

use crate::engine::SimOutcome;
use crate::model::{MachineSpec, TaskStatus};
use crate::time::Ticks;

pub fn machine_energy(busy: Ticks, idle: Ticks, spec: &MachineSpec) -> f64 {
    spec.busy_power_w * busy.as_secs_f64() + spec.idle_power_w * idle.as_secs_f64()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MachineStats {
    pub index: usize,
    pub name: String,
    pub completed: usize,
    pub missed: usize,
    pub busy: Ticks,
    pub idle: Ticks,
    pub utilization: f64,
    pub energy_j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub total_tasks: usize,
    pub completed: usize,
    pub canceled: usize,
    pub missed: usize,
    /// Percent of the workload that completed; 100 for an empty workload.
    pub completion_pct: f64,
    pub total_energy_j: f64,
    pub makespan: Ticks,
    /// Mean of assign - arrival over assigned tasks, in ticks.
    pub mean_wait: f64,
    /// Mean of finish - arrival over completed tasks, in ticks.
    pub mean_response: f64,
}

fn mean(values: impl Iterator<Item = Ticks>) -> f64 {
    let (sum, n) = values.fold((0u128, 0u64), |(s, n), v| (s + v.get() as u128, n + 1));
    if n == 0 {
        0.0
    } else {
        sum as f64 / n as f64
    }
}

pub fn machine_stats(outcome: &SimOutcome) -> Vec<MachineStats> {
    outcome
        .machines
        .iter()
        .zip(&outcome.machine_busy)
        .map(|(spec, &busy)| {
            let idle = outcome.makespan - busy;
            let on_machine = |s: TaskStatus| {
                outcome.tasks.iter().filter(|t| t.assigned_machine == Some(spec.index) && t.status == s).count()
            };
            MachineStats {
                index: spec.index,
                name: spec.name.clone(),
                completed: on_machine(TaskStatus::Completed),
                missed: on_machine(TaskStatus::Missed),
                busy,
                idle,
                utilization: if outcome.makespan == Ticks::ZERO {
                    0.0
                } else {
                    busy.get() as f64 / outcome.makespan.get() as f64
                },
                energy_j: machine_energy(busy, idle, spec),
            }
        })
        .collect()
}

pub fn summarize(outcome: &SimOutcome) -> (SummaryStats, Vec<MachineStats>) {
    let machines = machine_stats(outcome);
    let total = outcome.tasks.len();
    let completed = outcome.count(TaskStatus::Completed);
    let summary = SummaryStats {
        total_tasks: total,
        completed,
        canceled: outcome.count(TaskStatus::Canceled),
        missed: outcome.count(TaskStatus::Missed),
        completion_pct: if total == 0 { 100.0 } else { completed as f64 * 100.0 / total as f64 },
        total_energy_j: machines.iter().map(|m| m.energy_j).sum(),
        makespan: outcome.makespan,
        mean_wait: mean(outcome.tasks.iter().filter_map(|t| t.assign_time.map(|a| a - t.arrival))),
        mean_response: mean(
            outcome
                .tasks
                .iter()
                .filter(|t| t.status == TaskStatus::Completed)
                .filter_map(|t| t.finish.map(|f| f - t.arrival)),
        ),
    };
    (summary, machines)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(idle: f64, busy: f64) -> MachineSpec {
        MachineSpec { index: 0, name: "M0".into(), idle_power_w: idle, busy_power_w: busy }
    }

    #[test]
    fn two_level_energy() {
        let e = machine_energy(Ticks::from_secs(4), Ticks::from_secs(6), &spec(10.0, 50.0));
        assert_eq!(e, 260.0);
    }

    #[test]
    fn all_idle() {
        assert_eq!(machine_energy(Ticks::ZERO, Ticks::from_secs(10), &spec(10.0, 50.0)), 100.0);
    }

    #[test]
    fn flat_power_ignores_schedule() {
        let s = spec(20.0, 20.0);
        for busy in 0..=10 {
            let e = machine_energy(Ticks::from_secs(busy), Ticks::from_secs(10 - busy), &s);
            assert_eq!(e, 200.0);
        }
    }

    #[test]
    fn energy_monotone_in_busy_time() {
        let s = spec(10.0, 50.0);
        let makespan = 1_000_000u64;
        let mut prev = f64::MIN;
        for busy in (0..=makespan).step_by(12_345) {
            let e = machine_energy(Ticks(busy), Ticks(makespan - busy), &s);
            assert!(e >= prev);
            prev = e;
        }
    }
}
