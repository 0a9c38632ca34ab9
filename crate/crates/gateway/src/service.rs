//! Sessions: protocol runs paused at each value query until someone answers.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use fairq_core::oracle::monotone_conflict;
use fairq_core::{Allocation, Bundle, Value};
use fairq_protocols::{MachineStatus, ProtocolError, ProtocolId, ProtocolMachine, ProtocolOptions};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::store::{Event, EventStore};
use crate::GatewayError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub n: usize,
    pub m: usize,
    /// One label per good; `g1`, `g2`, ... when absent.
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    pub protocol: ProtocolId,
    #[serde(default)]
    pub options: ProtocolOptions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    AwaitingAnswer,
    Completed,
    Aborted,
}

/// A pending query as shown to people.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryView {
    pub agent: usize,
    pub goods: Vec<usize>,
    pub labels: Vec<String>,
    /// Runs of consecutive goods, `"g2..g5"` or a single label.
    pub ranges: Vec<String>,
    pub prompt: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub protocol: ProtocolId,
    pub n: usize,
    pub m: usize,
    pub labels: Vec<String>,
    pub status: SessionStatus,
    pub pending: Option<QueryView>,
    pub answers: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Created {
    #[serde(flatten)]
    pub session: SessionView,
    /// Path of each agent's view.
    pub agent_links: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerView {
    pub goods: Vec<usize>,
    pub labels: Vec<String>,
    pub value: Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentStatus {
    YourTurn,
    Waiting,
    Completed,
    Aborted,
}

/// What one agent may see: its own pending query and its own answers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentView {
    pub session: String,
    pub agent: usize,
    pub protocol: ProtocolId,
    pub labels: Vec<String>,
    pub status: AgentStatus,
    pub pending: Option<QueryView>,
    pub history: Vec<AnswerView>,
    /// Total answers so far, from all agents.
    pub progress: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<ResultView>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultView {
    pub allocation: Allocation,
    pub bundle_labels: Vec<Vec<String>>,
    pub queries: usize,
    pub per_agent: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submission {
    pub agent: usize,
    pub value: serde_json::Value,
}

struct Session {
    id: String,
    labels: Vec<String>,
    machine: ProtocolMachine,
    aborted: Option<String>,
}

impl Session {
    fn status(&self) -> SessionStatus {
        if self.aborted.is_some() {
            SessionStatus::Aborted
        } else if self.machine.result().is_some() {
            SessionStatus::Completed
        } else {
            SessionStatus::AwaitingAnswer
        }
    }

    fn labels_of(&self, b: &Bundle) -> Vec<String> {
        b.goods().map(|g| self.labels[g.index()].clone()).collect()
    }

    fn query_view(&self, agent: usize, b: &Bundle) -> QueryView {
        let labels = self.labels_of(b);
        let ranges = b
            .runs()
            .map(|r| {
                if r.len() == 1 {
                    self.labels[r.start].clone()
                } else {
                    format!("{}..{}", self.labels[r.start], self.labels[r.end - 1])
                }
            })
            .collect();
        let prompt = if labels.is_empty() {
            "What is your value for nothing at all?".to_string()
        } else {
            format!("What is your value for: {}?", labels.join(", "))
        };
        QueryView { agent, goods: b.to_indices(), labels, ranges, prompt }
    }

    fn pending_view(&self) -> Option<QueryView> {
        if self.aborted.is_some() {
            return None;
        }
        self.machine.pending().map(|(a, b)| self.query_view(a, b))
    }

    fn view(&self) -> SessionView {
        SessionView {
            id: self.id.clone(),
            protocol: self.machine.protocol(),
            n: self.machine.agents(),
            m: self.machine.goods(),
            labels: self.labels.clone(),
            status: self.status(),
            pending: self.pending_view(),
            answers: self.machine.queries(),
            error: self.aborted.clone(),
        }
    }

    fn result(&self) -> Option<ResultView> {
        let a = self.machine.result()?;
        let mut per_agent = vec![0; self.machine.agents()];
        for r in self.machine.history() {
            per_agent[r.agent] += 1;
        }
        Some(ResultView {
            allocation: a.clone(),
            bundle_labels: a.bundles().iter().map(|b| self.labels_of(b)).collect(),
            queries: self.machine.queries(),
            per_agent,
        })
    }

    fn agent_view(&self, agent: usize) -> AgentView {
        let pending = self.pending_view().filter(|q| q.agent == agent);
        let status = match self.status() {
            SessionStatus::Aborted => AgentStatus::Aborted,
            SessionStatus::Completed => AgentStatus::Completed,
            SessionStatus::AwaitingAnswer if pending.is_some() => AgentStatus::YourTurn,
            SessionStatus::AwaitingAnswer => AgentStatus::Waiting,
        };
        let history = self
            .machine
            .history()
            .iter()
            .filter(|r| r.agent == agent)
            .map(|r| AnswerView { goods: r.bundle.to_indices(), labels: self.labels_of(&r.bundle), value: r.value.clone() })
            .collect();
        AgentView {
            session: self.id.clone(),
            agent,
            protocol: self.machine.protocol(),
            labels: self.labels.clone(),
            status,
            pending,
            history,
            progress: self.machine.queries(),
            result: self.result(),
        }
    }
}

/// All sessions, rebuilt from the event store on start.
pub struct SessionService {
    store: EventStore,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

fn bad(code: &str, message: impl Into<String>) -> GatewayError {
    GatewayError::BadRequest { code: code.into(), message: message.into() }
}

fn conflict(code: &str, message: impl Into<String>) -> GatewayError {
    GatewayError::Conflict { code: code.into(), message: message.into() }
}

fn protocol_error(e: ProtocolError) -> GatewayError {
    match e {
        ProtocolError::Unsupported { .. } => bad("unsupported", e.to_string()),
        ProtocolError::InvalidOptions(_) => bad("invalid_options", e.to_string()),
        other => bad("rejected_answer", other.to_string()),
    }
}

fn default_labels(m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("g{i}")).collect()
}

impl SessionService {
    pub fn in_memory() -> Self {
        SessionService { store: EventStore::memory(), sessions: RwLock::new(HashMap::new()) }
    }

    /// Rebuilds every session in `events`. A session whose answers no
    /// longer replay is kept as aborted rather than dropped.
    pub fn from_events(store: EventStore, events: Vec<Event>) -> Result<Self, GatewayError> {
        let mut sessions: HashMap<String, Session> = HashMap::new();
        for e in events {
            match e {
                Event::Created { session, n, m, labels, protocol, options } => {
                    let machine = ProtocolMachine::start(protocol, n, m, options)
                        .map_err(|e| GatewayError::Store(format!("session {session}: {e}")))?;
                    sessions.insert(session.clone(), Session { id: session, labels, machine, aborted: None });
                }
                Event::Answered { session, agent, value } => {
                    let s = sessions
                        .get_mut(&session)
                        .ok_or_else(|| GatewayError::Store(format!("answer for unknown session {session}")))?;
                    if s.aborted.is_some() {
                        continue;
                    }
                    if s.machine.pending().map(|p| p.0) != Some(agent) {
                        s.aborted = Some(format!("stored answer from agent {agent} is out of turn"));
                        continue;
                    }
                    if let Err(e) = s.machine.answer(value) {
                        s.aborted = Some(format!("stored answers no longer replay: {e}"));
                    }
                }
            }
        }
        let sessions = sessions.into_iter().map(|(k, v)| (k, Arc::new(Mutex::new(v)))).collect();
        Ok(SessionService { store, sessions: RwLock::new(sessions) })
    }

    pub fn open(path: &std::path::Path) -> Result<Self, GatewayError> {
        let (store, events) = EventStore::open(path)?;
        Self::from_events(store, events)
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, GatewayError> {
        let map = self.sessions.read().map_err(|_| GatewayError::Store("session map poisoned".into()))?;
        map.get(id).cloned().ok_or_else(|| GatewayError::NotFound(format!("no session {id}")))
    }

    fn with<T>(&self, id: &str, f: impl FnOnce(&mut Session) -> Result<T, GatewayError>) -> Result<T, GatewayError> {
        let s = self.get(id)?;
        let mut guard = s.lock().map_err(|_| GatewayError::Store("session lock poisoned".into()))?;
        f(&mut guard)
    }

    pub fn create(&self, req: CreateSession) -> Result<Created, GatewayError> {
        let labels = match req.labels {
            Some(l) if l.len() != req.m => {
                return Err(bad("invalid_labels", format!("{} labels for {} goods", l.len(), req.m)))
            }
            Some(l) => l,
            None => default_labels(req.m),
        };
        if req.n == 0 {
            return Err(bad("unsupported", "a session needs at least one agent"));
        }
        let machine = ProtocolMachine::start(req.protocol, req.n, req.m, req.options.clone()).map_err(protocol_error)?;
        let id = Uuid::new_v4().simple().to_string();
        self.store.append(&Event::Created {
            session: id.clone(),
            n: req.n,
            m: req.m,
            labels: labels.clone(),
            protocol: req.protocol,
            options: req.options,
        })?;
        let session = Session { id: id.clone(), labels, machine, aborted: None };
        let view = session.view();
        self.sessions
            .write()
            .map_err(|_| GatewayError::Store("session map poisoned".into()))?
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        let agent_links = (0..req.n).map(|a| format!("/sessions/{id}/agents/{a}")).collect();
        Ok(Created { session: view, agent_links })
    }

    pub fn state(&self, id: &str) -> Result<SessionView, GatewayError> {
        self.with(id, |s| Ok(s.view()))
    }

    pub fn agent_view(&self, id: &str, agent: usize) -> Result<AgentView, GatewayError> {
        self.with(id, |s| {
            if agent >= s.machine.agents() {
                return Err(GatewayError::NotFound(format!("no agent {agent} in session {id}")));
            }
            Ok(s.agent_view(agent))
        })
    }

    pub fn result(&self, id: &str) -> Result<ResultView, GatewayError> {
        self.with(id, |s| s.result().ok_or_else(|| conflict("not_completed", "the session has not finished")))
    }

    /// Parses a wire value: a rational string `"p/q"` or a nonnegative integer.
    pub fn parse_value(raw: &serde_json::Value) -> Result<Value, GatewayError> {
        let parsed = match raw {
            serde_json::Value::String(s) => s.parse::<Value>().map_err(|e| e.to_string()),
            serde_json::Value::Number(n) => match n.as_u64() {
                Some(v) => Ok(Value::from_u64(v)),
                None => Err(format!("{n} is not a nonnegative integer; send fractions as \"p/q\"")),
            },
            other => Err(format!("expected a rational string, got {other}")),
        };
        parsed.map_err(|e| bad("invalid_value", e))
    }

    pub fn submit(&self, id: &str, sub: &Submission) -> Result<SessionView, GatewayError> {
        let value = Self::parse_value(&sub.value)?;
        self.with(id, |s| {
            let n = s.machine.agents();
            if sub.agent >= n {
                return Err(bad("unknown_agent", format!("agent {} does not exist; n = {n}", sub.agent)));
            }
            if let Some(reason) = &s.aborted {
                return Err(conflict("session_aborted", reason.clone()));
            }
            let (agent, bundle) = match s.machine.status() {
                MachineStatus::Done { .. } => return Err(conflict("session_completed", "the session has already finished")),
                MachineStatus::Pending { agent, bundle } => (*agent, bundle.clone()),
            };
            if agent != sub.agent {
                return Err(conflict("not_your_turn", format!("the pending query is for agent {agent}")));
            }
            if let Some(prior) = monotone_conflict(s.machine.history(), agent, &bundle, &value) {
                let relation = if prior.bundle == bundle {
                    "the same set"
                } else if prior.bundle.is_subset(&bundle) {
                    "a subset of this set"
                } else {
                    "a superset of this set"
                };
                return Err(bad(
                    "inconsistent_answer",
                    format!(
                        "you valued {{{}}}, {relation}, at {}; {value} contradicts that",
                        s.labels_of(&prior.bundle).join(", "),
                        prior.value
                    ),
                ));
            }
            let mut next = s.machine.clone();
            next.answer(value.clone()).map_err(protocol_error)?;
            self.store.append(&Event::Answered { session: s.id.clone(), agent, value })?;
            s.machine = next;
            Ok(s.view())
        })
    }

    pub fn session_ids(&self) -> Vec<String> {
        self.sessions.read().map(|m| m.keys().cloned().collect()).unwrap_or_default()
    }
}
