//! Fixtures shared by the benchmarks: the shipped scenario pack and a
//! synthetic large workload.

use hcsim_core::workload::{parse_eet_csv, parse_machines_csv};
use hcsim_core::{generate_workload, EetMatrix, MachineSpec, Scenario, WorkloadGenSpec};

pub const EET_HETERO: &str = include_str!("../../../scenarios/eet_hetero.csv");
pub const MACHINES: &str = include_str!("../../../scenarios/machines.csv");
pub const WORKLOAD_HIGH: &str = include_str!("../../../scenarios/workload_high.csv");
const GEN_HIGH: &str = include_str!("../../../scenarios/gen_high.json");

pub fn pack_eet() -> EetMatrix {
    parse_eet_csv(EET_HETERO).expect("pack EET parses")
}

pub fn pack_machines() -> Vec<MachineSpec> {
    parse_machines_csv(MACHINES).expect("pack machines parse")
}

pub fn high_spec() -> WorkloadGenSpec {
    serde_json::from_str(GEN_HIGH).expect("pack generation spec parses")
}

/// The high-intensity pack workload stretched over `horizon` seconds.
pub fn long_scenario(horizon: f64) -> Scenario {
    let eet = pack_eet();
    let spec = WorkloadGenSpec { horizon, ..high_spec() };
    let workload = generate_workload(&spec, &eet).expect("pack spec matches pack EET");
    Scenario { eet, machines: pack_machines(), workload }
}
