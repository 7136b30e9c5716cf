use hcsim_core::engine::{EventKind, StepResult};
use hcsim_core::{
    load_scenario, render_event_log, summarize, Error, PolicyRegistry, QueueCapacity, Scenario, Simulation, TaskStatus,
    Ticks,
};

const EET_2X2: &str = "task_type,M0,M1\nT1,2,4\nT2,3,1\n";
const MACHINES_2: &str = "machine,idle_power_w,busy_power_w\nM0,10,50\nM1,10,30\n";

fn secs(s: u64) -> Ticks {
    Ticks::from_secs(s)
}

fn sim(eet: &str, machines: &str, workload: &str, policy: &str, cap: QueueCapacity) -> Simulation {
    let registry = PolicyRegistry::with_builtins();
    let scenario = load_scenario(eet, machines, workload).unwrap();
    Simulation::new(scenario, registry.config(policy, cap, 0).unwrap(), &registry).unwrap()
}

fn single_task() -> Simulation {
    sim(
        "task_type,M0\nT1,2\n",
        "machine,idle_power_w,busy_power_w\nM0,10,50\n",
        "task_id,task_type,arrival_time,deadline\n0,T1,1,10\n",
        "mect",
        QueueCapacity::Unbounded,
    )
}

fn applied(sim: &mut Simulation) -> Vec<(Ticks, EventKind)> {
    let mut out = Vec::new();
    while let StepResult::Applied(e) = sim.step().unwrap() {
        out.push((e.event.time, e.event.kind));
    }
    out
}

#[test]
fn single_task_hand_trace() {
    let mut s = single_task();
    assert_eq!(s.pending_events().count(), 2);
    let events = applied(&mut s);
    assert_eq!(
        events,
        vec![
            (secs(1), EventKind::Arrival { task: 0 }),
            (secs(1), EventKind::SchedulerWake),
            (secs(3), EventKind::Completion { machine: 0, task: 0 }),
            (secs(10), EventKind::DeadlineCheck { task: 0 }),
        ]
    );
    assert_eq!(s.counters().completed, 1);
    let outcome = s.into_outcome();
    let (summary, machines) = summarize(&outcome);
    assert_eq!(summary.makespan, secs(3));
    assert_eq!(machines[0].busy, secs(2));
    assert_eq!(machines[0].idle, secs(1));
    assert_eq!(outcome.tasks[0].start, Some(secs(1)));
    assert_eq!(outcome.tasks[0].finish, Some(secs(3)));
    // 2 s busy at 50 W plus 1 s idle at 10 W
    assert_eq!(summary.total_energy_j, 110.0);
}

#[test]
fn step_after_finished_is_usage_error() {
    let mut s = single_task();
    applied(&mut s);
    assert!(matches!(s.step(), Err(Error::Usage(_))));
}

#[test]
fn three_tasks_seed_six_events() {
    let s = sim(
        EET_2X2,
        MACHINES_2,
        "task_id,task_type,arrival_time,deadline\n0,T1,0,10\n1,T2,1,10\n2,T1,2,10\n",
        "mect",
        QueueCapacity::Unbounded,
    );
    assert_eq!(s.pending_events().count(), 6);
}

#[test]
fn empty_workload_terminates() {
    let outcome = sim(EET_2X2, MACHINES_2, "task_id,task_type,arrival_time,deadline\n", "mm", QueueCapacity::Unbounded)
        .run_to_completion()
        .unwrap();
    assert!(outcome.event_log.is_empty());
    assert_eq!(outcome.makespan, Ticks::ZERO);
    let (summary, _) = summarize(&outcome);
    assert_eq!((summary.completed, summary.canceled, summary.missed), (0, 0, 0));
    assert_eq!(summary.completion_pct, 100.0);
}

#[test]
fn same_tick_arrivals_by_id() {
    let mut s = sim(
        EET_2X2,
        MACHINES_2,
        "task_id,task_type,arrival_time,deadline\n1,T1,1,10\n0,T2,1,10\n",
        "mect",
        QueueCapacity::Unbounded,
    );
    let events = applied(&mut s);
    assert_eq!(events[0].1, EventKind::Arrival { task: 0 });
    assert_eq!(events[1].1, EventKind::Arrival { task: 1 });
}

#[test]
fn finishing_at_deadline_is_on_time() {
    let outcome = sim(
        "task_type,M0\nT1,2\n",
        "machine,idle_power_w,busy_power_w\nM0,0,0\n",
        "task_id,task_type,arrival_time,deadline\n0,T1,1,3\n",
        "fcfs",
        QueueCapacity::Unbounded,
    )
    .run_to_completion()
    .unwrap();
    assert_eq!(outcome.tasks[0].status, TaskStatus::Completed);
    assert_eq!(outcome.tasks[0].finish, Some(secs(3)));
}

#[test]
fn batched_task_canceled_at_deadline() {
    // One machine, queue of 1: task 0 runs, task 1 waits, task 2 stays batched.
    let outcome = sim(
        "task_type,M0\nT1,5\n",
        "machine,idle_power_w,busy_power_w\nM0,0,1\n",
        "task_id,task_type,arrival_time,deadline\n0,T1,0,100\n1,T1,0,100\n2,T1,0,4\n",
        "mm",
        QueueCapacity::bounded(1).unwrap(),
    )
    .run_to_completion()
    .unwrap();
    let t2 = &outcome.tasks[2];
    assert_eq!(t2.status, TaskStatus::Canceled);
    assert_eq!((t2.assigned_machine, t2.start), (None, None));
    assert_eq!(t2.end_time(), Some(secs(4)));
    assert_eq!(outcome.tasks[0].status, TaskStatus::Completed);
    assert_eq!(outcome.tasks[1].status, TaskStatus::Completed);
}

#[test]
fn queued_task_missed_without_start() {
    let outcome = sim(
        "task_type,M0\nT1,5\n",
        "machine,idle_power_w,busy_power_w\nM0,0,1\n",
        "task_id,task_type,arrival_time,deadline\n0,T1,0,100\n1,T1,0,4\n",
        "fcfs",
        QueueCapacity::Unbounded,
    )
    .run_to_completion()
    .unwrap();
    let t1 = &outcome.tasks[1];
    assert_eq!(t1.status, TaskStatus::Missed);
    assert_eq!(t1.assigned_machine, Some(0));
    assert_eq!(t1.start, None);
    assert_eq!(t1.end_time(), Some(secs(4)));
}

#[test]
fn executing_task_interrupted_at_deadline() {
    // Task 0 runs 0..3 then is dropped; task 1 starts at 3 and completes at 8.
    let mut s = sim(
        "task_type,M0\nT1,5\n",
        "machine,idle_power_w,busy_power_w\nM0,10,50\n",
        "task_id,task_type,arrival_time,deadline\n0,T1,0,3\n1,T1,1,20\n",
        "fcfs",
        QueueCapacity::Unbounded,
    );
    let events = applied(&mut s);
    assert!(!events.contains(&(secs(5), EventKind::Completion { machine: 0, task: 0 })));
    let outcome = s.into_outcome();
    let t0 = &outcome.tasks[0];
    assert_eq!(t0.status, TaskStatus::Missed);
    assert_eq!(t0.start, Some(Ticks::ZERO));
    assert_eq!(t0.energy_j, 150.0);
    assert_eq!(outcome.tasks[1].start, Some(secs(3)));
    assert_eq!(outcome.tasks[1].finish, Some(secs(8)));
    assert_eq!(outcome.machine_busy[0], secs(8));
    let (summary, machines) = summarize(&outcome);
    assert_eq!(machines[0].missed, 1);
    assert_eq!(summary.completed, 1);
    assert_eq!(summary.makespan, secs(8));
}

#[test]
fn zero_slack_task_canceled_on_arrival() {
    let outcome = sim(
        "task_type,M0\nT1,5\n",
        "machine,idle_power_w,busy_power_w\nM0,0,1\n",
        "task_id,task_type,arrival_time,deadline\n0,T1,2,2\n",
        "mect",
        QueueCapacity::Unbounded,
    )
    .run_to_completion()
    .unwrap();
    assert_eq!(outcome.tasks[0].status, TaskStatus::Canceled);
    assert_eq!(outcome.makespan, secs(2));
}

#[test]
fn min_min_two_task_scenario() {
    let outcome = sim(
        EET_2X2,
        MACHINES_2,
        "task_id,task_type,arrival_time,deadline\n0,T1,0,10\n1,T2,0,10\n",
        "mm",
        QueueCapacity::Unbounded,
    )
    .run_to_completion()
    .unwrap();
    let a = &outcome.tasks[0];
    let b = &outcome.tasks[1];
    assert_eq!((a.status, a.assigned_machine, a.finish), (TaskStatus::Completed, Some(0), Some(secs(2))));
    assert_eq!((b.status, b.assigned_machine, b.finish), (TaskStatus::Completed, Some(1), Some(secs(1))));
}

#[test]
fn rerun_gives_identical_log() {
    let build = || {
        sim(
            EET_2X2,
            MACHINES_2,
            "task_id,task_type,arrival_time,deadline\n0,T1,0,3\n1,T2,0,10\n2,T1,0.5,4\n3,T2,1,2\n",
            "msd",
            QueueCapacity::bounded(1).unwrap(),
        )
        .run_to_completion()
        .unwrap()
    };
    let a = build();
    let b = build();
    assert_eq!(a, b);
    assert_eq!(render_event_log(&a.event_log), render_event_log(&b.event_log));
}

#[test]
fn validation_failure_is_config_error() {
    let registry = PolicyRegistry::with_builtins();
    let mut scenario: Scenario =
        load_scenario(EET_2X2, MACHINES_2, "task_id,task_type,arrival_time,deadline\n").unwrap();
    scenario.machines.pop();
    let cfg = registry.config("mect", QueueCapacity::Unbounded, 0).unwrap();
    assert!(matches!(Simulation::new(scenario, cfg, &registry), Err(Error::Validation(_))));
}
