//! Replays a finished run's event log and checks it against the lifecycle
//! rules, independently of the engine's own bookkeeping.

use crate::engine::SimOutcome;
use crate::model::{QueueCapacity, TaskStatus};
use crate::time::Ticks;

/// Every rule violation found, as human-readable lines. Empty means clean.
pub fn audit_outcome(outcome: &SimOutcome) -> Vec<String> {
    let mut problems = Vec::new();
    let n_machines = outcome.machines.len();
    let mut status = vec![TaskStatus::Pending; outcome.tasks.len()];
    let mut waiting = vec![0usize; n_machines];
    let mut executing = vec![0usize; n_machines];
    let limit = match outcome.config.machine_queue_capacity {
        QueueCapacity::Bounded(k) => Some(k.get()),
        QueueCapacity::Unbounded => None,
    };
    let mut clock = Ticks::ZERO;

    for entry in &outcome.event_log {
        if entry.event.time < clock {
            problems.push(format!("event {} goes back in time", entry.seq));
        }
        clock = entry.event.time;
        for c in &entry.changes {
            let current = status[c.task];
            if current != c.from {
                problems
                    .push(format!("event {}: task {} recorded as {} but was {}", entry.seq, c.task, c.from, current));
            }
            if !c.from.can_transition_to(c.to) {
                problems.push(format!(
                    "event {}: illegal transition {} -> {} for task {}",
                    entry.seq, c.from, c.to, c.task
                ));
            }
            status[c.task] = c.to;
            if let Some(m) = c.machine {
                match c.from {
                    TaskStatus::Queued => waiting[m] -= 1,
                    TaskStatus::Executing => executing[m] -= 1,
                    _ => {}
                }
                match c.to {
                    TaskStatus::Queued => waiting[m] += 1,
                    TaskStatus::Executing => executing[m] += 1,
                    _ => {}
                }
                if limit.is_some_and(|k| waiting[m] > k) {
                    problems.push(format!("event {}: machine {m} queue holds {} tasks", entry.seq, waiting[m]));
                }
                if executing[m] > 1 {
                    problems.push(format!("event {}: machine {m} runs {} tasks", entry.seq, executing[m]));
                }
            } else if matches!(c.to, TaskStatus::Queued | TaskStatus::Executing) {
                problems.push(format!("event {}: task {} mapped without a machine", entry.seq, c.task));
            }
        }
    }

    for (t, replayed) in outcome.tasks.iter().zip(&status) {
        if t.status != *replayed {
            problems.push(format!("task {}: final status {} but log replays to {}", t.id, t.status, replayed));
        }
        if !t.status.is_terminal() {
            problems.push(format!("task {} ended as {}", t.id, t.status));
        }
        match t.status {
            TaskStatus::Completed => {
                let (Some(m), Some(s), Some(f)) = (t.assigned_machine, t.start, t.finish) else {
                    problems.push(format!("task {} completed without machine/start/finish", t.id));
                    continue;
                };
                if Some(f - s) != outcome.eet.get(t.task_type, m).finite() {
                    problems.push(format!("task {} ran {} on machine {m}, not its EET", t.id, f - s));
                }
                if f > t.deadline {
                    problems.push(format!("task {} completed after its deadline", t.id));
                }
            }
            TaskStatus::Canceled => {
                if t.assigned_machine.is_some() || t.start.is_some() {
                    problems.push(format!("canceled task {} has a machine or start time", t.id));
                }
            }
            TaskStatus::Missed if t.assigned_machine.is_none() => {
                problems.push(format!("missed task {} has no machine", t.id));
            }
            _ => {}
        }
    }

    for m in 0..n_machines {
        let mut intervals: Vec<(Ticks, Ticks, usize)> = outcome
            .tasks
            .iter()
            .filter(|t| t.assigned_machine == Some(m))
            .filter_map(|t| t.start.zip(t.end_time()).map(|(s, e)| (s, e, t.id)))
            .collect();
        intervals.sort();
        for w in intervals.windows(2) {
            if w[1].0 < w[0].1 {
                problems.push(format!("machine {m}: tasks {} and {} overlap", w[0].2, w[1].2));
            }
        }
        let busy: Ticks = intervals.iter().map(|(s, e, _)| *e - *s).sum();
        if busy != outcome.machine_busy[m] {
            problems.push(format!("machine {m}: busy {} but executions sum to {busy}", outcome.machine_busy[m]));
        }
        if outcome.machine_busy[m] > outcome.makespan {
            problems.push(format!("machine {m}: busy longer than the makespan"));
        }
    }
    problems
}
