//! CSV renderings of a finished run.
//!
//! Tasks are listed by id and machines by index. Times are seconds with up to
//! six decimals, trailing zeros trimmed; percentages, utilization, and energy
//! use three decimals. The same outcome always renders to the same bytes.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::engine::{LogEntry, SimOutcome};
use crate::error::Error;
use crate::metrics::{summarize, MachineStats};
use crate::model::{Task, TaskStatus};
use crate::time::{format_secs_f64, Ticks};

pub const TASK_HEADER: &str =
    "task_id,task_type,status,arrival,deadline,assigned_machine,assign_time,start_time,end_time,wait,response";
pub const MACHINE_HEADER: &str = "machine,completed,missed_dropped,busy_s,idle_s,utilization,energy_j";
pub const FULL_EXTRA_HEADER: &str = "policy,predicted_completion,queue_wait";
pub const EVENT_LOG_HEADER: &str = "seq,time,event,entity,changes";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReportKind {
    Full,
    Task,
    Machine,
    Summary,
}

impl ReportKind {
    pub const ALL: [ReportKind; 4] = [ReportKind::Full, ReportKind::Task, ReportKind::Machine, ReportKind::Summary];

    pub fn as_str(self) -> &'static str {
        match self {
            ReportKind::Full => "full",
            ReportKind::Task => "task",
            ReportKind::Machine => "machine",
            ReportKind::Summary => "summary",
        }
    }

    /// `<kind>_report.csv`
    pub fn file_name(self) -> String {
        format!("{}_report.csv", self.as_str())
    }
}

impl fmt::Display for ReportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReportKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_lowercase().as_str() {
            "full" => Ok(ReportKind::Full),
            "task" => Ok(ReportKind::Task),
            "machine" => Ok(ReportKind::Machine),
            "summary" => Ok(ReportKind::Summary),
            other => Err(Error::Usage(format!("unknown report kind {other:?}; expected task|machine|summary|full"))),
        }
    }
}

fn opt(t: Option<Ticks>) -> String {
    t.map(|t| t.to_string()).unwrap_or_default()
}

fn task_cells(outcome: &SimOutcome, t: &Task) -> String {
    let machine = t.assigned_machine.map(|m| outcome.machines[m].name.clone()).unwrap_or_default();
    let wait = t.assign_time.map(|a| a - t.arrival);
    let response = match t.status {
        TaskStatus::Completed => t.finish.map(|f| f - t.arrival),
        _ => None,
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        t.id,
        outcome.eet.type_name(t.task_type),
        t.status,
        t.arrival,
        t.deadline,
        machine,
        opt(t.assign_time),
        opt(t.start),
        opt(t.end_time()),
        opt(wait),
        opt(response),
    )
}

fn machine_rows(out: &mut String, stats: &[MachineStats]) {
    out.push_str(MACHINE_HEADER);
    out.push('\n');
    for m in stats {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.3},{:.3}",
            m.name, m.completed, m.missed, m.busy, m.idle, m.utilization, m.energy_j
        );
    }
}

pub fn render_report(outcome: &SimOutcome, kind: ReportKind) -> String {
    let mut out = String::new();
    match kind {
        ReportKind::Task => {
            out.push_str(TASK_HEADER);
            out.push('\n');
            for t in &outcome.tasks {
                out.push_str(&task_cells(outcome, t));
                out.push('\n');
            }
        }
        ReportKind::Full => {
            let _ = writeln!(out, "{TASK_HEADER},{FULL_EXTRA_HEADER}");
            for t in &outcome.tasks {
                let queue_wait = t.start.zip(t.assign_time).map(|(s, a)| s - a);
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    task_cells(outcome, t),
                    outcome.config.policy,
                    opt(t.predicted_completion),
                    opt(queue_wait)
                );
            }
            out.push('\n');
            machine_rows(&mut out, &summarize(outcome).1);
        }
        ReportKind::Machine => machine_rows(&mut out, &summarize(outcome).1),
        ReportKind::Summary => {
            let (s, _) = summarize(outcome);
            out.push_str("metric,value\n");
            let rows: [(&str, String); 9] = [
                ("total_tasks", s.total_tasks.to_string()),
                ("completed", s.completed.to_string()),
                ("canceled", s.canceled.to_string()),
                ("missed", s.missed.to_string()),
                ("completion_pct", format!("{:.3}", s.completion_pct)),
                ("total_energy_j", format!("{:.3}", s.total_energy_j)),
                ("makespan", s.makespan.to_string()),
                ("mean_wait", format_secs_f64(s.mean_wait)),
                ("mean_response", format_secs_f64(s.mean_response)),
            ];
            for (k, v) in rows {
                let _ = writeln!(out, "{k},{v}");
            }
        }
    }
    out
}

/// One row per applied event; `changes` lists `task:from>to` transitions,
/// suffixed `@machine` once the task is mapped.
pub fn render_event_log(log: &[LogEntry]) -> String {
    let mut out = format!("{EVENT_LOG_HEADER}\n");
    for e in log {
        let changes: Vec<String> = e
            .changes
            .iter()
            .map(|c| match c.machine {
                Some(m) => format!("{}:{}>{}@{m}", c.task, c.from, c.to),
                None => format!("{}:{}>{}", c.task, c.from, c.to),
            })
            .collect();
        let entity = match e.event.kind {
            crate::engine::EventKind::SchedulerWake => String::new(),
            k => k.entity().to_string(),
        };
        let _ = writeln!(out, "{},{},{},{},{}", e.seq, e.event.time, e.event.kind.name(), entity, changes.join(";"));
    }
    out
}
