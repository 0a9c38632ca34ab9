//! Query-count experiments.
//!
//! An [`ExperimentConfig`] names a protocol, an instance family, a schedule
//! of `m` values and a seed range. Every run is checked for EF1 before it is
//! recorded, and its query count is compared with the protocol's ceiling
//! from [`fairq_protocols::bounds::query_bound`].

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use fairq_core::audit::Profile;
use fairq_core::build_panel;
use fairq_protocols::bounds::query_bound;
use fairq_protocols::{run_protocol, ProtocolId, ProtocolOptions};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod family;
pub mod summary;

pub use family::Family;
pub use summary::{summarize, ProtocolSummary};

pub const CSV_HEADER: [&str; 8] = ["protocol", "m", "n", "seed", "queries", "bound_ratio", "ef1", "wall_ms"];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("{protocol} failed on m={m}, seed={seed}: {message}")]
    Protocol { protocol: ProtocolId, m: usize, seed: u64, message: String },
    #[error("{protocol} output is not EF1 on m={m}, n={n}, seed={seed}")]
    NotEf1 { protocol: ProtocolId, m: usize, n: usize, seed: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Seeds `from..to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedRange {
    pub from: u64,
    pub to: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub protocol: ProtocolId,
    pub family: Family,
    /// Values of `m` to run, in order.
    pub m: Vec<usize>,
    pub n: usize,
    pub seeds: SeedRange,
    /// All agents share one valuation.
    #[serde(default)]
    pub identical: bool,
    /// Seed for the line; 0 keeps the identity order.
    #[serde(default)]
    pub line_seed: u64,
    /// Where to write the CSV.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Where to write the JSON summary.
    #[serde(default)]
    pub summary: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if !self.family.admits(self.protocol, self.identical) {
            return Err(BenchError::Config(format!("{} does not accept the {} family", self.protocol, self.family)));
        }
        if self.seeds.from > self.seeds.to {
            return Err(BenchError::Config("seed range is reversed".into()));
        }
        for &m in &self.m {
            if !self.protocol.supports(self.n, m) {
                return Err(BenchError::Config(format!("{} does not support n={}, m={m}", self.protocol, self.n)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub protocol: ProtocolId,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub queries: u64,
    /// The protocol's query ceiling for this run.
    pub bound: u128,
    pub ef1: bool,
    pub wall_ms: f64,
}

impl RunRecord {
    pub fn bound_ratio(&self) -> f64 {
        self.queries as f64 / self.bound as f64
    }

    pub fn within_bound(&self) -> bool {
        self.queries as u128 <= self.bound
    }
}

fn options(config: &ExperimentConfig, m: usize, seed: u64) -> ProtocolOptions {
    let mut opts = ProtocolOptions { seed: config.line_seed, ..ProtocolOptions::default() };
    match config.protocol {
        ProtocolId::ContiguousIdenticalMonotonic => opts.max_value = config.family.max_value(),
        ProtocolId::SeparateDesignatedGoods => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_de51);
            let mut d: Vec<usize> = sample(&mut rng, m, 3).into_vec();
            d.sort_unstable();
            opts.designated = Some([d[0], d[1], d[2]]);
        }
        _ => {}
    }
    opts
}

/// Runs one `(m, seed)` cell.
pub fn run_one(config: &ExperimentConfig, m: usize, seed: u64) -> Result<RunRecord, BenchError> {
    let (id, n) = (config.protocol, config.n);
    let inst = config.family.generate(m, n, seed, config.identical)?;
    let mut panel = build_panel(&inst).map_err(|e| BenchError::Instance(e.to_string()))?.count_only();
    let opts = options(config, m, seed);
    let start = Instant::now();
    let alloc = run_protocol(id, &mut panel, &opts)
        .map_err(|e| BenchError::Protocol { protocol: id, m, seed, message: e.to_string() })?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let profile = Profile::of(&inst).map_err(|e| BenchError::Instance(e.to_string()))?;
    let ef1 = profile.is_ef1(&alloc).map_err(|e| BenchError::Instance(e.to_string()))?;
    if !ef1 {
        return Err(BenchError::NotEf1 { protocol: id, m, n, seed });
    }
    let bound = query_bound(id, n, m, config.family.distinct_values(), config.family.max_value())
        .ok_or_else(|| BenchError::Config(format!("no query ceiling for {id} on {}", config.family)))?;
    Ok(RunRecord { protocol: id, m, n, seed, queries: panel.total_queries() as u64, bound, ef1, wall_ms })
}

/// One record per `(m, seed)`, sorted by `m` then seed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>, BenchError> {
    config.validate()?;
    let cells: Vec<(usize, u64)> =
        config.m.iter().flat_map(|&m| (config.seeds.from..config.seeds.to).map(move |s| (m, s))).collect();
    let mut records = cells.par_iter().map(|&(m, s)| run_one(config, m, s)).collect::<Result<Vec<_>, _>>()?;
    records.sort_by(|a, b| (a.m, a.seed).cmp(&(b.m, b.seed)));
    Ok(records)
}

pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.protocol.to_string(),
            r.m.to_string(),
            r.n.to_string(),
            r.seed.to_string(),
            r.queries.to_string(),
            format!("{:.6}", r.bound_ratio()),
            r.ef1.to_string(),
            format!("{:.3}", r.wall_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs `config` and writes the CSV and summary where it asks.
pub fn run_and_emit(config: &ExperimentConfig) -> Result<(Vec<RunRecord>, Vec<ProtocolSummary>), BenchError> {
    let records = run_experiment(config)?;
    if let Some(path) = &config.output {
        write_csv(&records, std::fs::File::create(path)?)?;
    }
    let summary = summarize(&records);
    if let Some(path) = &config.summary {
        let json = serde_json::to_string_pretty(&summary).map_err(|e| BenchError::Config(e.to_string()))?;
        std::fs::write(path, json)?;
    }
    Ok((records, summary))
}
