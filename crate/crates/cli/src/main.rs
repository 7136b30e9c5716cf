//! `hcsim`: run scenarios headlessly, generate workloads, or serve interactive
//! sessions.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 bad arguments, 3 invalid scenario
//! or generation spec, 4 listen address unavailable.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use hcsim_core::workload::{format_workload_csv, parse_eet_csv, ArrivalProcess, TypeArrivals, DEFAULT_BETA};
use hcsim_core::{
    generate_workload, load_scenario, render_event_log, render_report, run, Error, PolicyRegistry, QueueCapacity,
    ReportKind, WorkloadGenSpec,
};

#[derive(Parser)]
#[command(name = "hcsim", version, about = "Heterogeneous computing scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write CSV reports.
    Run(RunArgs),
    /// Generate a workload CSV from arrival processes.
    Gen(GenArgs),
    /// Serve the HTTP session API.
    Serve(ServeArgs),
    /// List registered policies and their modes.
    Policies,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    eet: PathBuf,
    #[arg(long)]
    workload: PathBuf,
    #[arg(long)]
    machines: PathBuf,
    #[arg(long, default_value = "mect")]
    policy: String,
    /// Machine queue capacity: a positive integer or `inf`. Immediate
    /// policies only accept `inf`.
    #[arg(long, default_value = "inf")]
    queue_size: String,
    /// Report kinds to write (`full`, `task`, `machine`, `summary`, `all`).
    #[arg(long, value_delimiter = ',', default_value = "all")]
    report: Vec<String>,
    /// Directory for `<kind>_report.csv` files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, env = "HCSIM_SEED", default_value_t = 0)]
    seed: u64,
    /// Also write the applied-event log as CSV.
    #[arg(long)]
    event_log: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    eet: PathBuf,
    /// JSON generation spec; flags given alongside override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// `TYPE:exp:RATE`, `TYPE:const:PERIOD`, or `TYPE:uniform:LO:HI`
    /// (seconds). Repeatable.
    #[arg(long = "type", value_name = "TYPE:PROCESS:PARAMS")]
    types: Vec<String>,
    /// Seconds.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, env = "HCSIM_SEED")]
    seed: Option<u64>,
    /// Multiply every arrival rate by this factor.
    #[arg(long)]
    intensity: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Seconds before an untouched session is dropped.
    #[arg(long, default_value_t = 1800)]
    idle_timeout: u64,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        Self::new(1, format!("{}: {err}", path.display()))
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::Parse(_) | Error::Validation(_) => 3,
            Error::Usage(_) | Error::Config(_) => 2,
        };
        Self::new(code, err.to_string())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn registry() -> PolicyRegistry {
    PolicyRegistry::with_builtins()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run_command(args),
        Command::Gen(args) => gen_command(args),
        Command::Serve(args) => serve_command(args),
        Command::Policies => {
            print!("{}", registry().listing());
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hcsim: {f}");
            ExitCode::from(f.code)
        }
    }
}

// Unreadable inputs are argument errors; their contents being wrong is not.
fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(2, format!("cannot read {}: {e}", path.display())))
}

fn report_kinds(names: &[String]) -> Result<Vec<ReportKind>, Failure> {
    let mut kinds = Vec::new();
    for name in names {
        let requested = if name.eq_ignore_ascii_case("all") {
            ReportKind::ALL.to_vec()
        } else {
            vec![name.parse().map_err(|e: Error| Failure::new(2, e.to_string()))?]
        };
        for kind in requested {
            if !kinds.contains(&kind) {
                kinds.push(kind);
            }
        }
    }
    Ok(kinds)
}

fn run_command(args: RunArgs) -> Result<(), Failure> {
    let registry = registry();
    let capacity: QueueCapacity = args.queue_size.parse().map_err(|e| Failure::new(2, format!("--queue-size: {e}")))?;
    let config = registry.config(&args.policy, capacity, args.seed).map_err(|e| Failure::new(2, e.to_string()))?;
    let kinds = report_kinds(&args.report)?;
    let scenario = load_scenario(&read_input(&args.eet)?, &read_input(&args.machines)?, &read_input(&args.workload)?)?;

    let outcome = run(scenario, config, &registry)?;

    fs::create_dir_all(&args.out).map_err(|e| Failure::io(&args.out, e))?;
    for kind in kinds {
        let path = args.out.join(kind.file_name());
        fs::write(&path, render_report(&outcome, kind)).map_err(|e| Failure::io(&path, e))?;
    }
    if let Some(path) = &args.event_log {
        fs::write(path, render_event_log(&outcome.event_log)).map_err(|e| Failure::io(path, e))?;
    }
    print!("{}", render_report(&outcome, ReportKind::Summary));
    Ok(())
}

fn parse_secs(s: &str, what: &str, spec: &str) -> Result<f64, Failure> {
    s.parse::<f64>().map_err(|_| Failure::new(2, format!("--type {spec}: invalid {what} {s:?}")))
}

fn parse_type_flag(spec: &str) -> Result<TypeArrivals, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let process = match parts.as_slice() {
        [_, "exp" | "exponential" | "poisson", rate] => {
            ArrivalProcess::Exponential { rate: parse_secs(rate, "rate", spec)? }
        }
        [_, "const" | "constant", period] => ArrivalProcess::Constant { period: parse_secs(period, "period", spec)? },
        [_, "uniform", lo, hi] => {
            ArrivalProcess::Uniform { lo: parse_secs(lo, "bound", spec)?, hi: parse_secs(hi, "bound", spec)? }
        }
        _ => {
            return Err(Failure::new(
                2,
                format!("--type {spec}: expected TYPE:exp:RATE, TYPE:const:PERIOD or TYPE:uniform:LO:HI"),
            ))
        }
    };
    Ok(TypeArrivals { task_type: parts[0].to_string(), process })
}

fn gen_command(args: GenArgs) -> Result<(), Failure> {
    let mut spec = match &args.spec {
        Some(path) => serde_json::from_str::<WorkloadGenSpec>(&read_input(path)?)
            .map_err(|e| Failure::new(3, format!("{}: {e}", path.display())))?,
        None => {
            let horizon = args.horizon.ok_or_else(|| Failure::new(2, "--horizon is required without --spec"))?;
            WorkloadGenSpec { types: Vec::new(), horizon, beta: DEFAULT_BETA, seed: 0 }
        }
    };
    if !args.types.is_empty() {
        spec.types = args.types.iter().map(|t| parse_type_flag(t)).collect::<Result<_, _>>()?;
    }
    if spec.types.is_empty() {
        return Err(Failure::new(2, "at least one --type is required"));
    }
    if let Some(h) = args.horizon {
        spec.horizon = h;
    }
    if let Some(b) = args.beta {
        spec.beta = b;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(k) = args.intensity {
        if !(k.is_finite() && k > 0.0) {
            return Err(Failure::new(2, format!("--intensity must be positive, got {k}")));
        }
        spec = spec.intensified(k);
    }

    let eet = parse_eet_csv(&read_input(&args.eet)?)?;
    if let Some(t) = spec.types.iter().find(|t| eet.type_by_name(&t.task_type).is_none()) {
        return Err(Failure::new(3, format!("task type {} is not defined in {}", t.task_type, args.eet.display())));
    }
    let workload = generate_workload(&spec, &eet)?;
    let csv = format_workload_csv(&workload, &eet);
    match &args.output {
        Some(path) => fs::write(path, csv).map_err(|e| Failure::io(path, e)),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn serve_command(args: ServeArgs) -> Result<(), Failure> {
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::new(1, e.to_string()))?;
    rt.block_on(async {
        let addr = format!("{}:{}", args.host, args.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| Failure::new(4, format!("cannot listen on {addr}: {e}")))?;
        let local = listener.local_addr().map_err(|e| Failure::new(4, e.to_string()))?;
        println!("listening on http://{local}");
        let server = hcsim_service::serve(listener, registry(), Duration::from_secs(args.idle_timeout));
        tokio::select! {
            res = server => res.map_err(|e| Failure::new(1, e.to_string())),
            _ = tokio::signal::ctrl_c() => Ok(()),
        }
    })
}
