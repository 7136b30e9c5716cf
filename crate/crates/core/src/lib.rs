//! Discrete-event simulation of deadline-constrained tasks on heterogeneous
//! machines.
//!
//! A scenario is an EET matrix (expected execution time of every task type
//! on every machine), a machine list with power draws, and a workload of
//! typed tasks with arrival times and deadlines. Tasks arrive into a batch
//! queue; a policy maps them onto machine queues; machines execute
//! sequentially. Tasks still unmapped at their deadline are canceled; mapped
//! tasks that reach their deadline before finishing are dropped as missed.
//!
//! ```
//! use hcsim_core::{load_scenario, render_report, run, PolicyRegistry, QueueCapacity, ReportKind};
//!
//! let scenario = load_scenario(
//!     "task_type,M0,M1\nT1,2,4\nT2,3,1\n",
//!     "machine,idle_power_w,busy_power_w\nM0,10,50\nM1,10,30\n",
//!     "task_id,task_type,arrival_time,deadline\n0,T1,0,10\n1,T2,0,10\n",
//! )
//! .unwrap();
//! let registry = PolicyRegistry::with_builtins();
//! let config = registry.config("mm", QueueCapacity::Unbounded, 0).unwrap();
//! let outcome = run(scenario, config, &registry).unwrap();
//! assert!(render_report(&outcome, ReportKind::Summary).contains("completed,2"));
//! ```

pub mod audit;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod model;
pub mod report;
pub mod scheduling;
pub mod time;
pub mod workload;

pub use engine::{init_simulation, run, Scenario, SimOutcome, Simulation, StateSnapshot, StepResult};
pub use error::{Error, ParseError, Result};
pub use metrics::{machine_energy, summarize, MachineStats, SummaryStats};
pub use model::{
    validate_scenario, EetEntry, EetMatrix, MachineSpec, Mode, QueueCapacity, SimConfig, Task, TaskStatus, TaskTypeId,
    ValidationReport,
};
pub use report::{render_event_log, render_report, ReportKind};
pub use scheduling::{Assignment, BatchedTask, MachinesView, Policy, PolicyId, PolicyRegistry};
pub use time::Ticks;
pub use workload::{generate_workload, load_scenario, WorkloadGenSpec};
