use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use fairq_adversary::{run_session, AdversaryKind, Driver};
use fairq_bench::{run_and_emit, write_csv, ExperimentConfig};
use fairq_core::audit::fairness_report;
use fairq_core::{build_panel, Allocation, Bundle, Instance};
use fairq_gateway::SessionService;
use fairq_protocols::{run_protocol, ProtocolId, ProtocolOptions};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "fairq", version, about = "Fair division of indivisible goods with counted value queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a protocol on an instance file.
    Run {
        #[arg(long)]
        protocol: ProtocolId,
        #[arg(long)]
        instance: PathBuf,
        /// JSON array of good indices giving the line.
        #[arg(long)]
        line: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest value, for contiguous_identical_monotonic.
        #[arg(long)]
        max_value: Option<u64>,
        /// Three good indices, for separate_designated_goods.
        #[arg(long, value_delimiter = ',')]
        designated: Option<Vec<usize>>,
        /// Where to write the allocation; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the fairness report of an allocation.
    Check {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        allocation: PathBuf,
    },
    /// Run a query-count experiment.
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
    /// Play a driver against a lower-bound adversary.
    Adversary {
        #[arg(long)]
        kind: AdversaryKind,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// A protocol id, `random`, or `budget:<q>`.
        #[arg(long, default_value = "random")]
        driver: Driver,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Serve the session API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Event log; sessions are kept in memory only if absent.
        #[arg(long)]
        store: Option<PathBuf>,
    },
}

#[derive(Serialize, Deserialize)]
struct AllocationFile {
    bundles: Vec<Bundle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    queries: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    per_agent: Option<Vec<usize>>,
}

type Res<T> = Result<T, String>;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Res<T> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Res<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n")).map_err(|e| format!("{}: {e}", p.display())),
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(format!("stdout: {e}")),
            _ => Ok(()),
        },
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn run(cmd: Command) -> Res<()> {
    match cmd {
        Command::Run { protocol, instance, line, seed, max_value, designated, out } => {
            let inst: Instance = read_json(&instance)?;
            let line = line.map(|p| read_json::<Vec<usize>>(&p)).transpose()?;
            let designated = match designated.as_deref() {
                None => None,
                Some(&[a, b, c]) => Some([a, b, c]),
                Some(d) => return Err(format!("--designated takes three goods, got {}", d.len())),
            };
            let opts = ProtocolOptions { line, seed, max_value, designated, ..Default::default() };
            let mut panel = build_panel(&inst).map_err(|e| e.to_string())?;
            let alloc = run_protocol(protocol, &mut panel, &opts).map_err(|e| e.to_string())?;
            let file = AllocationFile {
                bundles: alloc.into_bundles(),
                queries: Some(panel.total_queries()),
                per_agent: Some(panel.per_agent()),
            };
            emit(&pretty(&file), out.as_deref())
        }
        Command::Check { instance, allocation } => {
            let inst: Instance = read_json(&instance)?;
            let file: AllocationFile = read_json(&allocation)?;
            let alloc = Allocation::with_agents(file.bundles, inst.n, inst.m).map_err(|e| e.to_string())?;
            let report = fairness_report(&inst, &alloc).map_err(|e| e.to_string())?;
            emit(&pretty(&report), None)
        }
        Command::Bench { config } => {
            let cfg: ExperimentConfig = read_json(&config)?;
            let (records, summary) = run_and_emit(&cfg).map_err(|e| e.to_string())?;
            if cfg.output.is_none() {
                write_csv(&records, std::io::stdout()).map_err(|e| e.to_string())?;
            }
            if cfg.summary.is_none() {
                eprintln!("{}", pretty(&summary));
            }
            Ok(())
        }
        Command::Adversary { kind, m, n, driver, seed } => {
            let t = run_session(kind, m, n, driver, seed).map_err(|e| e.to_string())?;
            emit(&pretty(&t), None)
        }
        Command::Serve { port, host, store } => {
            let svc = match &store {
                Some(p) => SessionService::open(p).map_err(|e| e.to_string())?,
                None => SessionService::in_memory(),
            };
            let addr = SocketAddr::new(host, port);
            let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            eprintln!("listening on http://{addr}");
            rt.block_on(fairq_gateway::http::serve(addr, Arc::new(svc))).map_err(|e| e.to_string())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
