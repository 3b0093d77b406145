//! HTTP facade over the suggestion engine.
//!
//! Holds one scene per session, answers context queries against shared
//! read-only priors and models, and applies scene edits with optimistic
//! revision checks. Every event goes to an interaction log whose mutation
//! entries replay to the exact final scenes (see [`replay`]).

pub mod log;
pub mod mutation;
pub mod routes;
pub mod state;

pub use log::EventLog;
pub use mutation::{replay, ReplayedSession};
pub use routes::router;
pub use state::{AppState, Session};
