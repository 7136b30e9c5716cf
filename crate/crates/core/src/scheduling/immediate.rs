//! Head-of-queue policies: FCFS, MECT, MEET.

use crate::model::Mode;

use super::{min_ect_machine, Assignment, BatchedTask, MachinesView, Policy};

/// Head task to the least-loaded supporting machine.
pub fn fcfs_select(batch: &[BatchedTask], view: &MachinesView<'_>) -> Option<Assignment> {
    let head = batch.first()?;
    let target = view.candidates(head.task_type).min_by_key(|m| (m.load, m.index))?;
    let eet = view.eet.get(head.task_type, target.index).finite()?;
    Some(Assignment { task: head.id, machine: target.index, predicted_completion: target.ready_time + eet })
}

/// Head task to the machine with the minimum expected completion time.
pub fn mect_select(batch: &[BatchedTask], view: &MachinesView<'_>) -> Option<Assignment> {
    let head = batch.first()?;
    let (machine, predicted_completion) = min_ect_machine(view, head)?;
    Some(Assignment { task: head.id, machine, predicted_completion })
}

/// Head task to the machine with the minimum expected execution time,
/// regardless of load.
pub fn meet_select(batch: &[BatchedTask], view: &MachinesView<'_>) -> Option<Assignment> {
    let head = batch.first()?;
    let (target, eet) = view
        .candidates(head.task_type)
        .filter_map(|m| view.eet.get(head.task_type, m.index).finite().map(|e| (m, e)))
        .min_by_key(|(m, e)| (*e, m.index))?;
    Some(Assignment { task: head.id, machine: target.index, predicted_completion: target.ready_time + eet })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Fcfs;

#[derive(Debug, Clone, Copy, Default)]
pub struct Mect;

#[derive(Debug, Clone, Copy, Default)]
pub struct Meet;

impl Policy for Fcfs {
    fn mode(&self) -> Mode {
        Mode::Immediate
    }

    fn select(&self, batch: &[BatchedTask], view: &MachinesView<'_>) -> Option<Assignment> {
        fcfs_select(batch, view)
    }
}

impl Policy for Mect {
    fn mode(&self) -> Mode {
        Mode::Immediate
    }

    fn select(&self, batch: &[BatchedTask], view: &MachinesView<'_>) -> Option<Assignment> {
        mect_select(batch, view)
    }
}

impl Policy for Meet {
    fn mode(&self) -> Mode {
        Mode::Immediate
    }

    fn select(&self, batch: &[BatchedTask], view: &MachinesView<'_>) -> Option<Assignment> {
        meet_select(batch, view)
    }
}
