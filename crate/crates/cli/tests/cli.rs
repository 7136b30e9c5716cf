use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

const EET: &str = "task_type,M0,M1\nT1,2,4\nT2,3,1\n";
const EET3: &str = "task_type,M0,M1\nT1,2,4\nT2,3,1\nT3,5,5\n";
const MACHINES: &str = "machine,idle_power_w,busy_power_w\nM0,10,50\nM1,10,30\n";
const WORKLOAD: &str = "task_id,task_type,arrival_time,deadline\n0,T1,0,10\n1,T2,0,10\n2,T1,1,3\n";

fn hcsim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcsim")).args(args).current_dir(dir).env_remove("HCSIM_SEED").output().unwrap()
}

fn fixture() -> TempDir {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("eet.csv"), EET).unwrap();
    fs::write(dir.path().join("eet3.csv"), EET3).unwrap();
    fs::write(dir.path().join("m.csv"), MACHINES).unwrap();
    fs::write(dir.path().join("wl.csv"), WORKLOAD).unwrap();
    dir
}

const RUN: [&str; 7] = ["run", "--eet", "eet.csv", "--workload", "wl.csv", "--machines", "m.csv"];

fn run_with(dir: &Path, extra: &[&str]) -> Output {
    let mut args = RUN.to_vec();
    args.extend_from_slice(extra);
    hcsim(&args, dir)
}

#[test]
fn run_writes_requested_report_and_prints_summary() {
    let dir = fixture();
    let out = run_with(dir.path(), &["--policy", "mect", "--report", "summary"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let file = fs::read_to_string(dir.path().join("summary_report.csv")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), file);
    assert!(file.starts_with("metric,value\ntotal_tasks,3\n"));
    assert!(!dir.path().join("task_report.csv").exists());
}

#[test]
fn run_writes_all_reports_by_default() {
    let dir = fixture();
    let out = run_with(dir.path(), &["--out", "reports", "--event-log", "log.csv"]);
    assert_eq!(out.status.code(), Some(0));
    for kind in ["full", "task", "machine", "summary"] {
        assert!(dir.path().join("reports").join(format!("{kind}_report.csv")).exists(), "{kind}");
    }
    assert!(fs::read_to_string(dir.path().join("log.csv")).unwrap().starts_with("seq,time,event,entity,changes\n"));
}

#[test]
fn batch_policy_accepts_any_queue_size() {
    let dir = fixture();
    assert_eq!(run_with(dir.path(), &["--policy", "mm", "--queue-size", "inf"]).status.code(), Some(0));
    assert_eq!(run_with(dir.path(), &["--policy", "MSD", "--queue-size", "1"]).status.code(), Some(0));
}

#[test]
fn immediate_policy_with_bounded_queue_is_argument_error() {
    let dir = fixture();
    let out = run_with(dir.path(), &["--policy", "fcfs", "--queue-size", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("inf"));
}

#[test]
fn argument_errors_exit_2() {
    let dir = fixture();
    assert_eq!(run_with(dir.path(), &["--policy", "elare"]).status.code(), Some(2));
    assert_eq!(run_with(dir.path(), &["--queue-size", "0"]).status.code(), Some(2));
    assert_eq!(run_with(dir.path(), &["--report", "pdf"]).status.code(), Some(2));
    assert_eq!(hcsim(&["run", "--eet", "eet.csv"], dir.path()).status.code(), Some(2));
    assert_eq!(
        hcsim(&["run", "--eet", "nope.csv", "--workload", "wl.csv", "--machines", "m.csv"], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn invalid_scenario_exits_3_with_report() {
    let dir = fixture();
    fs::write(dir.path().join("wl.csv"), "task_id,task_type,arrival_time,deadline\n0,T1,0,10\n1,T9,0,10\n").unwrap();
    let out = run_with(dir.path(), &[]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("task id 1") && err.contains("T9"), "{err}");

    fs::write(dir.path().join("m.csv"), "machine,idle_power_w,busy_power_w\nM0,10,50\n").unwrap();
    fs::write(dir.path().join("wl.csv"), WORKLOAD).unwrap();
    assert_eq!(run_with(dir.path(), &[]).status.code(), Some(3));
}

#[test]
fn misses_are_still_success() {
    let dir = fixture();
    fs::write(dir.path().join("wl.csv"), "task_id,task_type,arrival_time,deadline\n0,T1,0,1\n1,T1,0,0\n").unwrap();
    let out = run_with(dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.contains("missed,1\n") && summary.contains("canceled,1\n"), "{summary}");
}

#[test]
fn run_is_byte_reproducible() {
    let dir = fixture();
    run_with(dir.path(), &["--policy", "mmu", "--out", "a", "--event-log", "a/log"]);
    run_with(dir.path(), &["--policy", "mmu", "--out", "b", "--event-log", "b/log"]);
    for f in ["full_report.csv", "task_report.csv", "machine_report.csv", "summary_report.csv", "log"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap());
    }
}

const GEN: [&str; 13] = [
    "gen",
    "--eet",
    "eet3.csv",
    "--type",
    "T1:exp:0.5",
    "--type",
    "T2:const:2",
    "--horizon",
    "100",
    "--beta",
    "1.5",
    "--seed",
    "7",
];

#[test]
fn gen_is_deterministic_and_parseable() {
    let dir = fixture();
    let mut a = GEN.to_vec();
    a.extend(["-o", "a.csv"]);
    let mut b = GEN.to_vec();
    b.extend(["-o", "b.csv"]);
    assert_eq!(hcsim(&a, dir.path()).status.code(), Some(0));
    assert_eq!(hcsim(&b, dir.path()).status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(text, fs::read_to_string(dir.path().join("b.csv")).unwrap());
    assert!(text.starts_with("task_id,task_type,arrival_time,deadline\n"));
    // 50 constant-period T2 arrivals up to and including t=100.
    assert_eq!(text.lines().filter(|l| l.contains(",T2,")).count(), 50);
    let eet = hcsim_core::workload::parse_eet_csv(EET3).unwrap();
    assert!(hcsim_core::workload::parse_workload_csv(&text, &eet).is_ok());

    let stdout = hcsim(&GEN, dir.path()).stdout;
    assert_eq!(String::from_utf8(stdout).unwrap(), text);
}

#[test]
fn gen_seed_from_environment() {
    let dir = fixture();
    let args = ["gen", "--eet", "eet.csv", "--type", "T1:exp:1", "--horizon", "20"];
    let with_env = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_hcsim"))
            .args(args)
            .current_dir(dir.path())
            .env("HCSIM_SEED", seed)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(with_env("3"), with_env("3"));
    assert_ne!(with_env("3"), with_env("4"));
    let mut explicit = args.to_vec();
    explicit.extend(["--seed", "3"]);
    assert_eq!(hcsim(&explicit, dir.path()).stdout, with_env("3"));
}

#[test]
fn gen_unknown_type_exits_3() {
    let dir = fixture();
    let out = hcsim(&["gen", "--eet", "eet3.csv", "--type", "T9:exp:1", "--horizon", "10"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("T9"));
}

#[test]
fn gen_bad_flag_exits_2() {
    let dir = fixture();
    assert_eq!(
        hcsim(&["gen", "--eet", "eet.csv", "--type", "T1:poisson", "--horizon", "10"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(hcsim(&["gen", "--eet", "eet.csv", "--type", "T1:exp:1"], dir.path()).status.code(), Some(2));
}

#[test]
fn gen_from_spec_file_with_intensity() {
    let dir = fixture();
    fs::write(
        dir.path().join("spec.json"),
        r#"{"horizon": 10, "types": [{"task_type": "T1", "process": "constant", "period": 2}]}"#,
    )
    .unwrap();
    let base = hcsim(&["gen", "--eet", "eet.csv", "--spec", "spec.json"], dir.path());
    assert_eq!(String::from_utf8(base.stdout).unwrap().lines().count(), 1 + 5);
    let doubled = hcsim(&["gen", "--eet", "eet.csv", "--spec", "spec.json", "--intensity", "2"], dir.path());
    assert_eq!(String::from_utf8(doubled.stdout).unwrap().lines().count(), 1 + 10);
}

#[test]
fn policies_lists_builtins() {
    let out = hcsim(&["policies"], Path::new("."));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "fcfs immediate\nmect immediate\nmeet immediate\nmm batch\nmmu batch\nmsd batch\n"
    );
}

struct Server(std::process::Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn start_server(port: &str) -> (Server, String) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_hcsim"))
        .args(["serve", "--port", port])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on http://").expect(&line).to_string();
    (Server(child), addr)
}

#[test]
fn serve_port_zero_prints_reachable_address_and_second_bind_fails() {
    let (_server, addr) = start_server("0");
    let port = addr.rsplit(':').next().unwrap().to_string();
    assert_ne!(port, "0");

    let mut stream = TcpStream::connect(&addr).unwrap();
    write!(stream, "GET /policies HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut resp = String::new();
    stream.read_to_string(&mut resp).unwrap();
    assert!(resp.starts_with("HTTP/1.1 200"), "{resp}");
    assert!(resp.contains("\"msd\""));

    let second = hcsim(&["serve", "--port", &port], Path::new("."));
    assert_eq!(second.status.code(), Some(4));
}
