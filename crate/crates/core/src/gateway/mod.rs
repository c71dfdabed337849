//! Transports around the engine: the command line and the HTTP service.

mod cli;
mod http;

pub use cli::{format_turn, read_signal, run, Cli, Command};
pub use http::{router, serve, ApiMessage, AppState, IDLE_TIMEOUT};
