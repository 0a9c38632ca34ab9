use std::sync::{Arc, Mutex};

use fairq_core::{AgentId, AnswerStrategy, Bundle, OraclePanel, QueryError, Value};

/// An answer rule that sees which agent asked. Adversaries keep one state
/// for all agents, so they are shared behind a lock.
pub trait AdaptiveRule: Send + 'static {
    fn respond(&mut self, agent: AgentId, bundle: &Bundle) -> Result<Value, QueryError>;
}

pub type Handle<A> = Arc<Mutex<A>>;

/// A panel of `n` oracles all answered by `rule`, plus a handle to inspect
/// the rule afterwards.
pub fn panel<A: AdaptiveRule>(rule: A, n: usize, m: usize) -> (OraclePanel, Handle<A>) {
    let handle = Arc::new(Mutex::new(rule));
    let strategies = (0..n)
        .map(|agent| {
            let h = Arc::clone(&handle);
            Box::new(move |b: &Bundle| h.lock().expect("adversary lock").respond(agent, b)) as Box<dyn AnswerStrategy>
        })
        .collect();
    (OraclePanel::from_strategies(m, strategies), handle)
}
