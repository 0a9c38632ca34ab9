//! Protocol dispatch and resumable sessions.
//!
//! A [`ProtocolMachine`] never stores protocol internals. It keeps the
//! answers received so far and reruns the protocol over them; the first
//! query without a recorded answer becomes the pending query. Protocols are
//! deterministic, so the rerun retraces the same path.

use std::fmt;
use std::str::FromStr;

use fairq_core::{AgentId, Allocation, Bundle, GoodId, Line, ModelError, QueryError, QueryRecord, QuerySource, Value};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::probe::Probe;
use crate::{
    baseline, contiguous, envy_cycle, identical_monotonic, size_dominant, three_additive, two_agent,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolId {
    TwoAgentEf1,
    ThreeIdenticalContiguousEf1,
    SeparateDesignatedGoods,
    ThreeAdditiveEf1,
    EnvyCycleElimination,
    EnvyCycleBatched,
    SizeDominantN2,
    ContiguousIdenticalMonotonic,
    FullElicitation,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 9] = [
        ProtocolId::TwoAgentEf1,
        ProtocolId::ThreeIdenticalContiguousEf1,
        ProtocolId::SeparateDesignatedGoods,
        ProtocolId::ThreeAdditiveEf1,
        ProtocolId::EnvyCycleElimination,
        ProtocolId::EnvyCycleBatched,
        ProtocolId::SizeDominantN2,
        ProtocolId::ContiguousIdenticalMonotonic,
        ProtocolId::FullElicitation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolId::TwoAgentEf1 => "two_agent_ef1",
            ProtocolId::ThreeIdenticalContiguousEf1 => "three_identical_contiguous_ef1",
            ProtocolId::SeparateDesignatedGoods => "separate_designated_goods",
            ProtocolId::ThreeAdditiveEf1 => "three_additive_ef1",
            ProtocolId::EnvyCycleElimination => "envy_cycle_elimination",
            ProtocolId::EnvyCycleBatched => "envy_cycle_batched",
            ProtocolId::SizeDominantN2 => "size_dominant_n2",
            ProtocolId::ContiguousIdenticalMonotonic => "contiguous_identical_monotonic",
            ProtocolId::FullElicitation => "full_elicitation",
        }
    }

    /// Whether the protocol accepts `n` agents and `m` goods.
    pub fn supports(self, n: usize, m: usize) -> bool {
        match self {
            ProtocolId::TwoAgentEf1 => n == 2,
            ProtocolId::ThreeIdenticalContiguousEf1 | ProtocolId::ThreeAdditiveEf1 => n == 3,
            ProtocolId::SeparateDesignatedGoods => n == 3 && m >= 3,
            _ => n >= 1,
        }
    }

    /// The line determines the output, as opposed to only the good order.
    pub fn is_contiguous(self) -> bool {
        matches!(self, ProtocolId::ThreeIdenticalContiguousEf1 | ProtocolId::ContiguousIdenticalMonotonic)
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolId {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProtocolId::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| ProtocolError::InvalidOptions(format!("unknown protocol {s:?}")))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolOptions {
    /// Good indices in line order. Overrides `seed`.
    pub line: Option<Vec<usize>>,
    /// 0 keeps the identity line; anything else shuffles it with this seed.
    pub seed: u64,
    /// Order in which envy-cycle protocols hand out goods; defaults to the line.
    pub order: Option<Vec<usize>>,
    /// Largest possible value, for the identical monotone protocol.
    /// Defaults to the value of all goods.
    pub max_value: Option<u64>,
    /// The three goods kept apart by `separate_designated_goods`.
    pub designated: Option<[usize; 3]>,
}

impl ProtocolOptions {
    pub fn resolve_line(&self, m: usize) -> Result<Line, ProtocolError> {
        if let Some(order) = &self.line {
            return Ok(Line::permutation(order, m)?);
        }
        if self.seed == 0 {
            return Ok(Line::identity(m));
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(self.seed));
        Ok(Line::permutation(&order, m)?)
    }

    fn resolve_order(&self, m: usize) -> Result<Line, ProtocolError> {
        match &self.order {
            Some(order) => Ok(Line::permutation(order, m)?),
            None => self.resolve_line(m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("{protocol} does not support {n} agents and {m} goods")]
    Unsupported { protocol: ProtocolId, n: usize, m: usize },
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Runs `id` to completion against `src`.
pub fn run_protocol(id: ProtocolId, src: &mut dyn QuerySource, opts: &ProtocolOptions) -> Result<Allocation, ProtocolError> {
    let (n, m) = (src.agents(), src.goods());
    if !id.supports(n, m) {
        return Err(ProtocolError::Unsupported { protocol: id, n, m });
    }
    let line = opts.resolve_line(m)?;
    let alloc = match id {
        ProtocolId::TwoAgentEf1 => two_agent::two_agent_ef1(&mut Probe::new(src), &line)?,
        ProtocolId::ThreeIdenticalContiguousEf1 => {
            let b = contiguous::three_identical_contiguous_ef1(&mut Probe::new(src), 0, &line)?;
            Allocation::with_agents(b.to_vec(), 3, m)?
        }
        ProtocolId::SeparateDesignatedGoods => {
            let d = opts
                .designated
                .ok_or_else(|| ProtocolError::InvalidOptions("designated goods are required".into()))?;
            if d.iter().any(|&g| g >= m) {
                return Err(ProtocolError::InvalidOptions(format!("designated goods {d:?} out of range")));
            }
            let b = contiguous::separate_designated_goods(&mut Probe::new(src), 0, &line, d.map(GoodId::new))?;
            Allocation::with_agents(b.to_vec(), 3, m)?
        }
        ProtocolId::ThreeAdditiveEf1 => three_additive::three_additive_ef1(&mut Probe::new(src), &line)?,
        ProtocolId::EnvyCycleElimination => {
            envy_cycle::envy_cycle_elimination(&mut Probe::uncached(src), &opts.resolve_order(m)?)?
        }
        ProtocolId::EnvyCycleBatched => envy_cycle::envy_cycle_batched(&mut Probe::new(src), &opts.resolve_order(m)?)?,
        ProtocolId::SizeDominantN2 => size_dominant::size_dominant_n2(&mut Probe::new(src), &line)?,
        ProtocolId::ContiguousIdenticalMonotonic => {
            let mut p = Probe::new(src);
            let k_max = match opts.max_value {
                Some(k) => k,
                None => {
                    let total = p.value(0, &line.goods())?;
                    total
                        .to_u64()
                        .filter(|_| total.is_integer())
                        .ok_or_else(|| QueryError::Contract(format!("value {total} is not an integer")))?
                }
            };
            let lp = identical_monotonic::contiguous_identical_monotonic(&mut p, 0, n, k_max, &line)?;
            Allocation::with_agents(lp.bundles, n, m)?
        }
        ProtocolId::FullElicitation => baseline::full_elicitation(&mut Probe::new(src))?,
    };
    Ok(alloc)
}

/// Answers from a recorded history; asks for more when it runs out.
pub struct ReplaySource<'h> {
    n: usize,
    m: usize,
    history: &'h [QueryRecord],
    cursor: usize,
}

impl<'h> ReplaySource<'h> {
    pub fn new(n: usize, m: usize, history: &'h [QueryRecord]) -> Self {
        ReplaySource { n, m, history, cursor: 0 }
    }

    /// Number of recorded answers consumed so far.
    pub fn consumed(&self) -> usize {
        self.cursor
    }
}

impl QuerySource for ReplaySource<'_> {
    fn agents(&self) -> usize {
        self.n
    }

    fn goods(&self) -> usize {
        self.m
    }

    fn query(&mut self, agent: AgentId, bundle: &Bundle) -> Result<Value, QueryError> {
        if agent >= self.n {
            return Err(ModelError::AgentOutOfRange { agent, n: self.n }.into());
        }
        bundle.check_range(self.m)?;
        match self.history.get(self.cursor) {
            None => Err(QueryError::AwaitingAnswer { agent, bundle: bundle.clone() }),
            Some(r) if r.agent == agent && r.bundle == *bundle => {
                self.cursor += 1;
                Ok(r.value.clone())
            }
            Some(_) => Err(QueryError::ReplayDiverged { index: self.cursor }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum MachineStatus {
    Pending { agent: AgentId, bundle: Bundle },
    Done { allocation: Allocation },
}

/// Outcome of a finished run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolRun {
    pub protocol: ProtocolId,
    pub bundles: Vec<Bundle>,
    pub queries: usize,
    pub tie_break_seed: u64,
}

/// A protocol run that stops at every query until it is answered.
#[derive(Clone, Debug)]
pub struct ProtocolMachine {
    id: ProtocolId,
    n: usize,
    m: usize,
    opts: ProtocolOptions,
    history: Vec<QueryRecord>,
    status: MachineStatus,
}

impl ProtocolMachine {
    pub fn start(id: ProtocolId, n: usize, m: usize, opts: ProtocolOptions) -> Result<Self, ProtocolError> {
        Self::from_history(id, n, m, opts, Vec::new())
    }

    /// Rebuilds a machine from its answers. Fails if the answers do not fit
    /// the queries the protocol asks, or if the run ended before using them all.
    pub fn from_history(
        id: ProtocolId,
        n: usize,
        m: usize,
        opts: ProtocolOptions,
        history: Vec<QueryRecord>,
    ) -> Result<Self, ProtocolError> {
        if !id.supports(n, m) {
            return Err(ProtocolError::Unsupported { protocol: id, n, m });
        }
        let status = Self::step(id, n, m, &opts, &history)?;
        Ok(ProtocolMachine { id, n, m, opts, history, status })
    }

    fn step(id: ProtocolId, n: usize, m: usize, opts: &ProtocolOptions, history: &[QueryRecord]) -> Result<MachineStatus, ProtocolError> {
        let mut src = ReplaySource::new(n, m, history);
        match run_protocol(id, &mut src, opts) {
            Ok(allocation) if src.consumed() == history.len() => Ok(MachineStatus::Done { allocation }),
            Ok(_) => Err(QueryError::ReplayDiverged { index: src.consumed() }.into()),
            Err(ProtocolError::Query(QueryError::AwaitingAnswer { agent, bundle })) => Ok(MachineStatus::Pending { agent, bundle }),
            Err(e) => Err(e),
        }
    }

    pub fn protocol(&self) -> ProtocolId {
        self.id
    }

    pub fn agents(&self) -> usize {
        self.n
    }

    pub fn goods(&self) -> usize {
        self.m
    }

    pub fn options(&self) -> &ProtocolOptions {
        &self.opts
    }

    pub fn status(&self) -> &MachineStatus {
        &self.status
    }

    pub fn pending(&self) -> Option<(AgentId, &Bundle)> {
        match &self.status {
            MachineStatus::Pending { agent, bundle } => Some((*agent, bundle)),
            MachineStatus::Done { .. } => None,
        }
    }

    pub fn result(&self) -> Option<&Allocation> {
        match &self.status {
            MachineStatus::Done { allocation } => Some(allocation),
            MachineStatus::Pending { .. } => None,
        }
    }

    pub fn history(&self) -> &[QueryRecord] {
        &self.history
    }

    pub fn queries(&self) -> usize {
        self.history.len()
    }

    /// Supplies the answer to the pending query. On error the machine is
    /// left as it was.
    pub fn answer(&mut self, value: Value) -> Result<&MachineStatus, ProtocolError> {
        let (agent, bundle) = match &self.status {
            MachineStatus::Pending { agent, bundle } => (*agent, bundle.clone()),
            MachineStatus::Done { .. } => return Err(QueryError::Contract("the run has already finished".into()).into()),
        };
        self.history.push(QueryRecord { agent, bundle, value });
        match Self::step(self.id, self.n, self.m, &self.opts, &self.history) {
            Ok(status) => {
                self.status = status;
                Ok(&self.status)
            }
            Err(e) => {
                self.history.pop();
                Err(e)
            }
        }
    }

    /// Answers every query from `src` until the run finishes.
    pub fn drive(&mut self, src: &mut dyn QuerySource) -> Result<&Allocation, ProtocolError> {
        while let Some((agent, bundle)) = self.pending() {
            let bundle = bundle.clone();
            let v = src.query(agent, &bundle)?;
            self.answer(v)?;
        }
        Ok(self.result().expect("finished"))
    }

    pub fn run_summary(&self) -> Option<ProtocolRun> {
        self.result().map(|a| ProtocolRun {
            protocol: self.id,
            bundles: a.bundles().to_vec(),
            queries: self.queries(),
            tie_break_seed: self.opts.seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fairq_core::{build_panel, Instance};

    #[test]
    fn ids_round_trip() {
        for id in ProtocolId::ALL {
            assert_eq!(id.as_str().parse::<ProtocolId>().unwrap(), id);
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{id}\""));
        }
    }

    #[test]
    fn machine_matches_direct_run() {
        let inst = Instance::additive(&[vec![3, 1, 4, 1, 5], vec![9, 2, 6, 5, 3]]).unwrap();
        let mut panel = build_panel(&inst).unwrap();
        let direct = run_protocol(ProtocolId::TwoAgentEf1, &mut panel, &ProtocolOptions::default()).unwrap();
        let mut machine = ProtocolMachine::start(ProtocolId::TwoAgentEf1, 2, 5, ProtocolOptions::default()).unwrap();
        let mut fresh = build_panel(&inst).unwrap();
        assert_eq!(machine.drive(&mut fresh).unwrap(), &direct);
        assert_eq!(machine.queries(), panel.total_queries());
        assert_eq!(machine.history(), panel.log().as_slice());
    }

    #[test]
    fn bad_answer_leaves_machine_unchanged() {
        let opts = ProtocolOptions { max_value: Some(4), ..Default::default() };
        let mut machine = ProtocolMachine::start(ProtocolId::ContiguousIdenticalMonotonic, 2, 3, opts).unwrap();
        let before = machine.status().clone();
        assert!(machine.answer(Value::new(1, 2).unwrap()).is_err());
        assert_eq!(machine.status(), &before);
        assert_eq!(machine.queries(), 0);
    }

    #[test]
    fn seeded_lines_are_permutations() {
        let opts = ProtocolOptions { seed: 7, ..Default::default() };
        let line = opts.resolve_line(10).unwrap();
        assert!(line.is_permutation_of(10));
        assert_eq!(line, opts.resolve_line(10).unwrap());
        assert_ne!(line, Line::identity(10));
    }
}
