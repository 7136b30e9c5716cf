//! Whole-batch policies: MM, MSD, MMU.
//!
//! Each considers only tasks that currently have at least one free,
//! supporting machine, and maps the chosen task to its minimum expected
//! completion time machine.

use crate::model::Mode;

use super::{min_ect_machine, Assignment, BatchedTask, MachinesView, Policy};

fn feasible<'b>(
    batch: &'b [BatchedTask],
    view: &'b MachinesView<'_>,
) -> impl Iterator<Item = (&'b BatchedTask, usize, crate::time::Ticks)> + 'b {
    batch.iter().filter_map(move |t| min_ect_machine(view, t).map(|(m, ect)| (t, m, ect)))
}

/// Min-Min: the (task, machine) pair with the globally smallest expected completion time.
pub fn min_min_select(batch: &[BatchedTask], view: &MachinesView<'_>) -> Option<Assignment> {
    feasible(batch, view)
        .min_by_key(|(t, m, ect)| (*ect, *m, t.id, t.arrival))
        .map(|(t, machine, predicted_completion)| Assignment { task: t.id, machine, predicted_completion })
}

/// Soonest deadline first.
pub fn msd_select(batch: &[BatchedTask], view: &MachinesView<'_>) -> Option<Assignment> {
    feasible(batch, view)
        .min_by_key(|(t, _, _)| (t.deadline, t.arrival, t.id))
        .map(|(t, machine, predicted_completion)| Assignment { task: t.id, machine, predicted_completion })
}

/// Smallest slack (deadline minus best expected completion) first. Slack may
/// be negative.
pub fn mmu_select(batch: &[BatchedTask], view: &MachinesView<'_>) -> Option<Assignment> {
    feasible(batch, view)
        .min_by_key(|(t, _, ect)| (t.deadline.get() as i128 - ect.get() as i128, t.deadline, t.id))
        .map(|(t, machine, predicted_completion)| Assignment { task: t.id, machine, predicted_completion })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MinMin;

#[derive(Debug, Clone, Copy, Default)]
pub struct SoonestDeadline;

#[derive(Debug, Clone, Copy, Default)]
pub struct MinUrgency;

impl Policy for MinMin {
    fn mode(&self) -> Mode {
        Mode::Batch
    }

    fn select(&self, batch: &[BatchedTask], view: &MachinesView<'_>) -> Option<Assignment> {
        min_min_select(batch, view)
    }
}

impl Policy for SoonestDeadline {
    fn mode(&self) -> Mode {
        Mode::Batch
    }

    fn select(&self, batch: &[BatchedTask], view: &MachinesView<'_>) -> Option<Assignment> {
        msd_select(batch, view)
    }
}

impl Policy for MinUrgency {
    fn mode(&self) -> Mode {
        Mode::Batch
    }

    fn select(&self, batch: &[BatchedTask], view: &MachinesView<'_>) -> Option<Assignment> {
        mmu_select(batch, view)
    }
}
