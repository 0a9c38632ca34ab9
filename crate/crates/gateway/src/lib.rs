//! Sessions over HTTP and the `fairq` command line.
//!
//! A session is a protocol run that pauses at every value query. Answers
//! arrive one at a time, from people or programs; the run is rebuilt from
//! them whenever needed, so the event log is the only state.

use thiserror::Error;

pub mod http;
pub mod service;
pub mod store;

pub use http::router;
pub use service::{AgentView, CreateSession, ResultView, SessionService, SessionStatus, SessionView, Submission};
pub use store::{Event, EventStore};

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("{0}")]
    NotFound(String),
    #[error("{code}: {message}")]
    BadRequest { code: String, message: String },
    #[error("{code}: {message}")]
    Conflict { code: String, message: String },
    #[error("store: {0}")]
    Store(String),
}
