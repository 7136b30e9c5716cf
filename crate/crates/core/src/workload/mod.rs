//! Scenario files and workload generation.

mod csv;
mod gen;
pub mod rng;

pub use csv::{
    format_decimal, format_eet_csv, format_machines_csv, format_workload_csv, is_valid_name, parse_eet_csv,
    parse_machines_csv, parse_workload_csv, MACHINES_HEADER, WORKLOAD_HEADER,
};
pub use gen::{generate_workload, ArrivalProcess, TypeArrivals, WorkloadGenSpec, DEFAULT_BETA};

use crate::engine::Scenario;
use crate::error::Result;

/// Parses and cross-validates the three scenario files.
pub fn load_scenario(eet_csv: &str, machines_csv: &str, workload_csv: &str) -> Result<Scenario> {
    let eet = parse_eet_csv(eet_csv)?;
    let machines = parse_machines_csv(machines_csv)?;
    let workload = parse_workload_csv(workload_csv, &eet)?;
    crate::model::validate_scenario(&eet, &machines, &workload).into_result()?;
    Ok(Scenario { eet, machines, workload })
}
