//! The EET, workload, and machine file formats.
//!
//! All three are UTF-8, comma-separated, `\n`-terminated, with a fixed header
//! and no quoting. Times are seconds with at most six decimals; `inf` marks a
//! machine that cannot run a task type.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, ParseError, Result};
use crate::model::{unknown_type_violation, EetEntry, EetMatrix, MachineSpec, Task, ValidationReport};
use crate::time::Ticks;

pub const EET_HEADER_FIRST: &str = "task_type";
pub const WORKLOAD_HEADER: &str = "task_id,task_type,arrival_time,deadline";
pub const MACHINES_HEADER: &str = "machine,idle_power_w,busy_power_w";

pub fn is_valid_name(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

/// Non-blank lines with their 1-based line numbers.
fn rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.split('\n')
        .enumerate()
        .map(|(i, line)| (i + 1, line.strip_suffix('\r').unwrap_or(line)))
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(n, line)| (n, line.split(',').map(str::trim).collect()))
}

fn name(row: usize, cell: &str, what: &str) -> Result<String, ParseError> {
    if is_valid_name(cell) {
        Ok(cell.to_string())
    } else {
        Err(ParseError::new(row, format!("invalid {what} name {cell:?}")))
    }
}

pub fn parse_eet_csv(text: &str) -> Result<EetMatrix> {
    let mut rows = rows(text);
    let (hrow, header) = rows.next().ok_or_else(|| ParseError::new(1, "missing header"))?;
    if header[0] != EET_HEADER_FIRST {
        return Err(ParseError::new(hrow, format!("header must start with {EET_HEADER_FIRST}")).into());
    }
    if header.len() < 2 {
        return Err(ParseError::new(hrow, "header lists no machines").into());
    }
    let machine_names = header[1..].iter().map(|c| name(hrow, c, "machine")).collect::<Result<Vec<_>, _>>()?;
    let mut seen = HashSet::new();
    for m in &machine_names {
        if !seen.insert(m) {
            return Err(ParseError::new(hrow, format!("duplicate machine {m}")).into());
        }
    }

    let mut type_names: Vec<String> = Vec::new();
    let mut table = Vec::new();
    for (row, cells) in rows {
        if cells.len() != machine_names.len() + 1 {
            return Err(ParseError::new(
                row,
                format!("expected {} entries, found {}", machine_names.len(), cells.len() - 1),
            )
            .into());
        }
        let type_name = name(row, cells[0], "task type")?;
        if type_names.contains(&type_name) {
            return Err(ParseError::new(row, format!("duplicate task type {type_name}")).into());
        }
        let entries = cells[1..]
            .iter()
            .map(|cell| {
                if *cell == "inf" {
                    return Ok(EetEntry::Unsupported);
                }
                let t: Ticks = cell.parse().map_err(|_| ParseError::new(row, format!("invalid duration {cell:?}")))?;
                if t == Ticks::ZERO {
                    return Err(ParseError::new(row, "durations must be positive"));
                }
                Ok(EetEntry::Finite(t))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if !entries.iter().any(|e| e.is_supported()) {
            return Err(ParseError::new(row, format!("task type {type_name} is unsupported on every machine")).into());
        }
        type_names.push(type_name);
        table.push(entries);
    }
    EetMatrix::new(type_names, machine_names, table)
}

/// Parses a workload against an already-loaded EET. Unknown task types are
/// reported together as a validation error; every other problem is a parse
/// error for the offending row.
pub fn parse_workload_csv(text: &str, eet: &EetMatrix) -> Result<Vec<Task>> {
    let mut rows = rows(text);
    let (hrow, header) = rows.next().ok_or_else(|| ParseError::new(1, "missing header"))?;
    if header.join(",") != WORKLOAD_HEADER {
        return Err(ParseError::new(hrow, format!("header must be {WORKLOAD_HEADER}")).into());
    }
    let mut tasks = Vec::new();
    let mut ids = HashSet::new();
    let mut incompatible = ValidationReport::default();
    for (row, cells) in rows {
        if cells.len() != 4 {
            return Err(ParseError::new(row, format!("expected 4 fields, found {}", cells.len())).into());
        }
        let id: usize =
            cells[0].parse().map_err(|_| ParseError::new(row, format!("invalid task id {:?}", cells[0])))?;
        if !ids.insert(id) {
            return Err(ParseError::new(row, format!("duplicate task id {id}")).into());
        }
        let time = |cell: &str, what: &str| -> Result<Ticks, ParseError> {
            cell.parse().map_err(|_| ParseError::new(row, format!("invalid {what} {cell:?}")))
        };
        let arrival = time(cells[2], "arrival_time")?;
        let deadline = time(cells[3], "deadline")?;
        if deadline < arrival {
            return Err(
                ParseError::new(row, format!("task {id}: deadline {deadline} is before arrival {arrival}")).into()
            );
        }
        match eet.type_by_name(cells[1]) {
            Some(t) => tasks.push(Task::new(id, t, arrival, deadline)),
            None => incompatible.violations.push(unknown_type_violation(cells[1], id)),
        }
    }
    incompatible.into_result()?;
    if let Some(missing) = (0..tasks.len()).find(|i| !ids.contains(i)) {
        return Err(Error::Parse(ParseError::new(
            hrow,
            format!("task ids must be dense from 0; id {missing} is missing"),
        )));
    }
    tasks.sort_by_key(|t| (t.arrival, t.id));
    Ok(tasks)
}

pub fn parse_machines_csv(text: &str) -> Result<Vec<MachineSpec>> {
    let mut rows = rows(text);
    let (hrow, header) = rows.next().ok_or_else(|| ParseError::new(1, "missing header"))?;
    if header.join(",") != MACHINES_HEADER {
        return Err(ParseError::new(hrow, format!("header must be {MACHINES_HEADER}")).into());
    }
    let mut specs: Vec<MachineSpec> = Vec::new();
    for (row, cells) in rows {
        if cells.len() != 3 {
            return Err(ParseError::new(row, format!("expected 3 fields, found {}", cells.len())).into());
        }
        let machine = name(row, cells[0], "machine")?;
        if specs.iter().any(|s| s.name == machine) {
            return Err(ParseError::new(row, format!("duplicate machine {machine}")).into());
        }
        let watts = |cell: &str, what: &str| -> Result<f64, ParseError> {
            cell.parse::<f64>()
                .ok()
                .filter(|w| w.is_finite() && *w >= 0.0 && !cell.contains(['e', 'E']))
                .ok_or_else(|| ParseError::new(row, format!("invalid {what} {cell:?}")))
        };
        let idle = watts(cells[1], "idle_power_w")?;
        let busy = watts(cells[2], "busy_power_w")?;
        if busy < idle {
            return Err(ParseError::new(
                row,
                format!("machine {machine}: busy power {busy} W is below idle power {idle} W"),
            )
            .into());
        }
        specs.push(MachineSpec { index: specs.len(), name: machine, idle_power_w: idle, busy_power_w: busy });
    }
    Ok(specs)
}

/// Six decimals with trailing zeros trimmed.
pub fn format_decimal(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

pub fn format_eet_csv(eet: &EetMatrix) -> String {
    let mut out = String::from(EET_HEADER_FIRST);
    for m in eet.machine_names() {
        out.push(',');
        out.push_str(m);
    }
    out.push('\n');
    for t in eet.task_types() {
        out.push_str(&t.name);
        for e in eet.row(t.id) {
            out.push(',');
            match e {
                EetEntry::Finite(d) => out.push_str(&d.to_string()),
                EetEntry::Unsupported => out.push_str("inf"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn format_workload_csv(workload: &[Task], eet: &EetMatrix) -> String {
    let mut sorted: Vec<&Task> = workload.iter().collect();
    sorted.sort_by_key(|t| (t.arrival, t.id));
    let mut out = format!("{WORKLOAD_HEADER}\n");
    for t in sorted {
        let _ = writeln!(out, "{},{},{},{}", t.id, eet.type_name(t.task_type), t.arrival, t.deadline);
    }
    out
}

pub fn format_machines_csv(machines: &[MachineSpec]) -> String {
    let mut out = format!("{MACHINES_HEADER}\n");
    for m in machines {
        let _ = writeln!(out, "{},{},{}", m.name, format_decimal(m.idle_power_w), format_decimal(m.busy_power_w));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TaskTypeId;
    use proptest::prelude::*;

    const EET: &str = "task_type,M0,M1\nT1,2,4\nT2,3,1\n";

    #[test]
    fn parses_eet() {
        let eet = parse_eet_csv(EET).unwrap();
        assert_eq!(eet.num_types(), 2);
        assert_eq!(eet.get(TaskTypeId(0), 1), EetEntry::Finite(Ticks::from_secs(4)));
        assert_eq!(eet.get(TaskTypeId(1), 1), EetEntry::Finite(Ticks::from_secs(1)));
        // no trailing newline
        assert_eq!(parse_eet_csv("task_type,M0,M1\nT1,2,4\nT2,3,1").unwrap(), eet);
    }

    #[test]
    fn eet_inf_sentinel() {
        let eet = parse_eet_csv("task_type,M0,M1\nT1,2,inf\n").unwrap();
        assert_eq!(eet.get(TaskTypeId(0), 1), EetEntry::Unsupported);
        assert!(parse_eet_csv("task_type,M0,M1\nT1,2,INF\n").is_err());
    }

    #[test]
    fn eet_ragged_row() {
        let err = parse_eet_csv("task_type,M0,M1\nT1,2,4\nT2,3,1\nT3,2").unwrap_err();
        assert!(err.to_string().starts_with("row 4: expected 2 entries"), "{err}");
    }

    #[test]
    fn eet_bad_cells() {
        for (text, needle) in [
            ("task_type,M0\nT1,x\n", "row 2: invalid duration"),
            ("task_type,M0\nT1,0\n", "row 2: durations must be positive"),
            ("task_type,M0\nT1,-1\n", "row 2: invalid duration"),
            ("task_type,M0\nT1,1\nT1,2\n", "row 3: duplicate task type"),
            ("task_type,M0\nT1,inf\n", "row 2: task type T1 is unsupported"),
            ("type,M0\nT1,1\n", "row 1: header"),
        ] {
            let err = parse_eet_csv(text).unwrap_err().to_string();
            assert!(err.starts_with(needle), "{text:?}: {err}");
        }
    }

    #[test]
    fn parses_workload() {
        let eet = parse_eet_csv(EET).unwrap();
        let wl = parse_workload_csv("task_id,task_type,arrival_time,deadline\n0,T1,0,10\n1,T2,0.5,4", &eet).unwrap();
        assert_eq!(wl.len(), 2);
        assert_eq!(wl[1].arrival, Ticks(500_000));
        assert_eq!(wl[1].task_type, TaskTypeId(1));
    }

    #[test]
    fn workload_unknown_type() {
        let eet = parse_eet_csv(EET).unwrap();
        let err = parse_workload_csv("task_id,task_type,arrival_time,deadline\n0,T9,0,10\n", &eet).unwrap_err();
        match err {
            Error::Validation(report) => assert!(report.violations[0].message.contains("T9, task id 0")),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn workload_resorted() {
        let eet = parse_eet_csv(EET).unwrap();
        let wl = parse_workload_csv("task_id,task_type,arrival_time,deadline\n0,T1,5,10\n1,T2,1,4\n2,T1,1,9\n", &eet)
            .unwrap();
        assert_eq!(wl.iter().map(|t| t.id).collect::<Vec<_>>(), [1, 2, 0]);
    }

    #[test]
    fn workload_errors() {
        let eet = parse_eet_csv(EET).unwrap();
        for (body, needle) in [
            ("0,T1,5,4\n", "row 2: task 0: deadline"),
            ("0,T1,1,4\n0,T1,1,4\n", "row 3: duplicate task id 0"),
            ("0,T1,1\n", "row 2: expected 4 fields"),
            ("1,T1,1,4\n", "task ids must be dense"),
        ] {
            let text = format!("{WORKLOAD_HEADER}\n{body}");
            let err = parse_workload_csv(&text, &eet).unwrap_err().to_string();
            assert!(err.contains(needle), "{body:?}: {err}");
        }
    }

    #[test]
    fn parses_machines() {
        let specs = parse_machines_csv("machine,idle_power_w,busy_power_w\nM0,10,50\nM1,10,30").unwrap();
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[1].index, 1);
        assert_eq!(specs[1].busy_power_w, 30.0);
        assert!(parse_machines_csv("machine,idle_power_w,busy_power_w\nM0,0,0\n").is_ok());
    }

    #[test]
    fn machines_errors() {
        assert!(parse_machines_csv("machine\nM0\n").is_err());
        assert!(parse_machines_csv("machine,idle_power_w,busy_power_w\nM0,10\n").is_err());
        let err = parse_machines_csv("machine,idle_power_w,busy_power_w\nM0,50,10\n").unwrap_err();
        assert!(err.to_string().contains("below idle"));
    }

    fn arb_eet() -> impl Strategy<Value = EetMatrix> {
        (1usize..5, 1usize..5).prop_flat_map(|(types, machines)| {
            proptest::collection::vec(
                proptest::collection::vec(prop_oneof![Just(0u64), 1u64..50_000_000], machines),
                types,
            )
            .prop_filter_map("row without a finite entry", move |rows| {
                let rows: Vec<Vec<EetEntry>> = rows
                    .into_iter()
                    .map(|r| {
                        r.into_iter()
                            .map(|v| if v == 0 { EetEntry::Unsupported } else { EetEntry::Finite(Ticks(v)) })
                            .collect()
                    })
                    .collect();
                EetMatrix::new(
                    (0..types).map(|i| format!("T{i}")).collect(),
                    (0..machines).map(|i| format!("m_{i}")).collect(),
                    rows,
                )
                .ok()
            })
        })
    }

    proptest! {
        #[test]
        fn eet_canonical_round_trip(eet in arb_eet()) {
            let text = format_eet_csv(&eet);
            let parsed = parse_eet_csv(&text).unwrap();
            prop_assert_eq!(&parsed, &eet);
            prop_assert_eq!(format_eet_csv(&parsed), text);
        }

        #[test]
        fn workload_canonical_round_trip(
            eet in arb_eet(),
            raw in proptest::collection::vec((0u64..100_000_000, 0u64..10_000_000, 0usize..8), 0..40),
        ) {
            let tasks: Vec<Task> = raw
                .iter()
                .enumerate()
                .map(|(id, &(a, slack, t))| Task::new(id, TaskTypeId(t % eet.num_types()), Ticks(a), Ticks(a + slack)))
                .collect();
            let text = format_workload_csv(&tasks, &eet);
            let parsed = parse_workload_csv(&text, &eet).unwrap();
            prop_assert_eq!(format_workload_csv(&parsed, &eet), text);
        }

        #[test]
        fn machines_canonical_round_trip(powers in proptest::collection::vec((0u64..1_000_000_000, 0u64..1_000_000_000), 1..6)) {
            let specs: Vec<MachineSpec> = powers
                .iter()
                .enumerate()
                .map(|(index, &(idle, extra))| MachineSpec {
                    index,
                    name: format!("M{index}"),
                    idle_power_w: idle as f64 / 1e6,
                    busy_power_w: (idle + extra) as f64 / 1e6,
                })
                .collect();
            let text = format_machines_csv(&specs);
            prop_assert_eq!(format_machines_csv(&parse_machines_csv(&text).unwrap()), text);
        }
    }
}
