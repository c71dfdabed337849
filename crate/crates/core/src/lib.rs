//! Sentiment-aware POMDP dialogue manager for ontology-driven requirement
//! elicitation.
//!
//! Each user turn is scored for sentiment, interpreted into a dialogue
//! observation and folded into a belief over the user's intention. The belief
//! history is analysed with a Haar wavelet transform to estimate the user's
//! knowledge level, which selects a control mode; a policy picks the next
//! dialogue act, Q-learning improves it from sentiment rewards, and a fuzzy
//! rule base turns sentiment and mode into the agent's emotion.

pub mod assets;
pub mod engine;
pub mod fuzzy;
pub mod gateway;
pub mod history;
pub mod level;
pub mod ontology;
pub mod policy;
pub mod pomdp;
pub mod qlearn;
pub mod sentiment;
pub mod sim;
pub mod trend;

pub use assets::Assets;
pub use engine::{AgentTurn, EngineConfig, EngineError, Session};
