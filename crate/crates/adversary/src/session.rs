//! A whole adversary game: a driver asks, the adversary answers, and the
//! transcript records the answers, concrete valuations and verdicts.

use std::fmt;
use std::str::FromStr;

use fairq_core::audit::{brute_force_ef_exists, Profile, DEFAULT_BUDGET};
use fairq_core::{Allocation, Bundle, Instance, OraclePanel, QueryError, QueryRecord, QuerySource};
use fairq_protocols::{run_protocol, ProtocolError, ProtocolId, ProtocolOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::monotonic::binomial;
use crate::shared::{panel, AdaptiveRule, Handle};
use crate::{
    identical_instance, replay_consistency, AdditiveEfAdversary, AdversaryError, EfxAdversary, MonotonicEfAdversary,
    PairsAdversary, World,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdversaryKind {
    MonotonicEf,
    AdditiveEf,
    Efx,
    Pairs,
}

impl FromStr for AdversaryKind {
    type Err = AdversaryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "monotonic-ef" => Ok(AdversaryKind::MonotonicEf),
            "additive-ef" => Ok(AdversaryKind::AdditiveEf),
            "efx" => Ok(AdversaryKind::Efx),
            "pairs" => Ok(AdversaryKind::Pairs),
            _ => Err(AdversaryError::Unsupported(format!("unknown adversary {s:?}"))),
        }
    }
}

/// Who asks the questions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Driver {
    Protocol(ProtocolId),
    /// Random subsets up to the adversary's query threshold.
    Random,
    /// Exactly this many random subsets, or until the adversary refuses.
    Budget(usize),
}

impl FromStr for Driver {
    type Err = AdversaryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "random" {
            return Ok(Driver::Random);
        }
        if let Some(q) = s.strip_prefix("budget:") {
            return q.parse().map(Driver::Budget).map_err(|_| AdversaryError::Unsupported(format!("bad budget {q:?}")));
        }
        s.parse().map(Driver::Protocol).map_err(|e: ProtocolError| AdversaryError::Unsupported(e.to_string()))
    }
}

impl fmt::Display for Driver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Driver::Protocol(id) => write!(f, "{id}"),
            Driver::Random => f.write_str("random"),
            Driver::Budget(q) => write!(f, "budget:{q}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Materialization {
    pub label: String,
    pub instance: Instance,
    pub consistent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ef_exists: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allocation_efx: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allocation_ef1: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub queries: usize,
    /// The adversary refused a query because the game was over.
    pub exhausted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worlds_open: Option<bool>,
    /// Queries that shrank each pair's candidates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charged: Option<Vec<usize>>,
    /// Sum over pairs of `ceil(log2(m / |G_i|))`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub halving_bound: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub settled: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub kind: AdversaryKind,
    pub m: usize,
    pub n: usize,
    pub driver: String,
    pub answers: Vec<QueryRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allocation: Option<Allocation>,
    pub materializations: Vec<Materialization>,
    pub verdicts: Verdicts,
}

struct Drive {
    log: Vec<QueryRecord>,
    allocation: Option<Allocation>,
    exhausted: bool,
}

fn drive(mut panel: OraclePanel, driver: Driver, threshold: usize, seed: u64) -> Result<Drive, AdversaryError> {
    let (n, m) = (panel.agents(), panel.goods());
    let mut exhausted = false;
    let mut allocation = None;
    match driver {
        Driver::Protocol(id) => match run_protocol(id, &mut panel, &ProtocolOptions::default()) {
            Ok(a) => allocation = Some(a),
            Err(ProtocolError::Query(QueryError::Exhausted(_))) => exhausted = true,
            Err(e) => return Err(AdversaryError::Contract(e.to_string())),
        },
        Driver::Random | Driver::Budget(_) => {
            let count = if let Driver::Budget(q) = driver { q } else { threshold };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..count {
                let agent = rng.random_range(0..n);
                let goods: Vec<usize> = (0..m).filter(|_| rng.random_bool(0.5)).collect();
                match panel.query(agent, &Bundle::from_indices(&goods).expect("sorted")) {
                    Ok(_) => {}
                    Err(QueryError::Exhausted(_)) => {
                        exhausted = true;
                        break;
                    }
                    Err(e) => return Err(AdversaryError::Contract(e.to_string())),
                }
            }
        }
    }
    Ok(Drive { log: panel.log(), allocation, exhausted })
}

fn snapshot<A: AdaptiveRule>(h: &Handle<A>) -> std::sync::MutexGuard<'_, A> {
    h.lock().expect("adversary lock")
}

fn materialization(label: &str, inst: Instance, log: &[QueryRecord]) -> Materialization {
    let consistent = replay_consistency(log, &inst);
    Materialization { label: label.into(), instance: inst, consistent, ef_exists: None, allocation_efx: None, allocation_ef1: None }
}

/// Plays one game and judges it.
pub fn run_session(kind: AdversaryKind, m: usize, n: usize, driver: Driver, seed: u64) -> Result<Transcript, AdversaryError> {
    let ef = |inst: &Instance| brute_force_ef_exists(inst, DEFAULT_BUDGET).map_err(|e| AdversaryError::Internal(e.to_string()));
    let (d, materializations, mut verdicts, n) = match kind {
        AdversaryKind::MonotonicEf => {
            let adv = MonotonicEfAdversary::new(m)?;
            let threshold = binomial(m as u64, m as u64 / 2) as usize;
            let (p, h) = panel(adv, 2, m);
            let d = drive(p, driver, 4 * threshold, seed)?;
            let adv = snapshot(&h);
            let open = adv.worlds_open();
            let worlds: &[World] = if open { &[World::EnvyFree, World::NoEnvyFree] } else { &[World::NoEnvyFree] };
            let mut mats = Vec::new();
            for &w in worlds {
                let inst = identical_instance(adv.materialize(Some(w))?, m, 2)?;
                let mut mt = materialization(world_label(w), inst, &d.log);
                mt.ef_exists = Some(ef(&mt.instance)?);
                mats.push(mt);
            }
            let v = Verdicts { worlds_open: Some(open), ..Default::default() };
            (d, mats, v, 2)
        }
        AdversaryKind::AdditiveEf => {
            let adv = AdditiveEfAdversary::new(m)?;
            let (p, h) = panel(adv, 2, m);
            let d = drive(p, driver, m - 1, seed)?;
            let adv = snapshot(&h);
            let mut mats = Vec::new();
            for w in [World::EnvyFree, World::NoEnvyFree] {
                let inst = identical_instance(adv.materialize(w)?, m, 2)?;
                let mut mt = materialization(world_label(w), inst, &d.log);
                mt.ef_exists = Some(ef(&mt.instance)?);
                mats.push(mt);
            }
            let v = Verdicts { worlds_open: Some(true), ..Default::default() };
            (d, mats, v, 2)
        }
        AdversaryKind::Efx => {
            let adv = EfxAdversary::new(m)?;
            let budget = adv.budget();
            let (p, h) = panel(adv, 2, m);
            let mut d = drive(p, driver, budget, seed)?;
            let adv = snapshot(&h);
            let alloc = match d.allocation.clone() {
                Some(a) => a,
                None => {
                    let k = (m - 1) / 2;
                    let a = Allocation::new(vec![Bundle::range(0..k), Bundle::range(k..m)], m)
                        .map_err(|e| AdversaryError::Internal(e.to_string()))?;
                    d.allocation = Some(a.clone());
                    a
                }
            };
            let inst = identical_instance(adv.refute(&alloc)?, m, 2)?;
            let mut mt = materialization("refutation", inst, &d.log);
            mt.allocation_efx = Some(Profile::of(&mt.instance).map_err(internal)?.is_efx(&alloc).map_err(internal)?);
            (d, vec![mt], Verdicts::default(), 2)
        }
        AdversaryKind::Pairs => {
            let adv = PairsAdversary::new(n, m)?;
            let threshold = n * (usize::BITS - m.leading_zeros()) as usize;
            let (p, h) = panel(adv, n, m);
            let d = drive(p, driver, threshold, seed)?;
            let adv = snapshot(&h);
            let specs = adv.materialize(d.allocation.as_ref());
            let inst = Instance::from_specs(m, specs).map_err(internal)?;
            let mut mt = materialization("placed", inst, &d.log);
            if let Some(a) = &d.allocation {
                mt.allocation_ef1 = Some(Profile::of(&mt.instance).map_err(internal)?.is_ef1(a).map_err(internal)?);
            }
            let v = Verdicts {
                charged: Some(adv.pairs().iter().map(|p| p.charged).collect()),
                halving_bound: Some(halving_bound(m, adv.pairs().iter().map(|p| p.candidates.len()))),
                settled: Some(adv.settled()),
                ..Default::default()
            };
            (d, vec![mt], v, n)
        }
    };
    verdicts.queries = d.log.len();
    verdicts.exhausted = d.exhausted;
    Ok(Transcript { kind, m, n, driver: driver.to_string(), answers: d.log, allocation: d.allocation, materializations, verdicts })
}

/// `sum ceil(log2(m / s))` over final candidate sizes `s`.
pub fn halving_bound(m: usize, sizes: impl Iterator<Item = usize>) -> usize {
    sizes
        .map(|s| {
            let mut k = 0;
            while s << k < m {
                k += 1;
            }
            k
        })
        .sum()
}

fn world_label(w: World) -> &'static str {
    match w {
        World::EnvyFree => "envy_free",
        World::NoEnvyFree => "no_envy_free",
    }
}

fn internal(e: impl fmt::Display) -> AdversaryError {
    AdversaryError::Internal(e.to_string())
}
