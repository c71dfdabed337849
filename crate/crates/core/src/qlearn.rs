//! Tabular Q-learning with epsilon-greedy selection.

use std::io::{self, BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::level::KnowledgeLevel;
use crate::pomdp::{discounted_return, ActionId};
use crate::sentiment::SentimentClass;

const CHECKPOINT_HEADER: &str = "# avatar-dm qtable v1";

#[derive(Debug, Error)]
pub enum QError {
    #[error("invalid q config: {0}")]
    InvalidConfig(String),
    #[error("q table dimensions must be non-zero")]
    EmptyTable,
    #[error("checkpoint line {line}: {message}")]
    Checkpoint { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon0: f64,
    pub epsilon_decay: f64,
    pub epsilon_min: f64,
    pub rng_seed: u64,
}

impl Default for QConfig {
    fn default() -> Self {
        Self {
            alpha: 0.001,
            gamma: 0.9,
            epsilon0: 1.0,
            epsilon_decay: 0.995,
            epsilon_min: 0.01,
            rng_seed: 0,
        }
    }
}

impl QConfig {
    pub fn validate(&self) -> Result<(), QError> {
        let bad = |m: &str| Err(QError::InvalidConfig(m.into()));
        // alpha = 0 is accepted as a frozen table.
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("alpha must be in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must be in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.epsilon0) {
            return bad("epsilon0 must be in [0, 1]");
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return bad("epsilon_decay must be in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.epsilon_min) || self.epsilon_min > self.epsilon0 {
            return bad("epsilon_min must be in [0, epsilon0]");
        }
        Ok(())
    }

    /// Exploration rate after `episodes` completed episodes.
    pub fn epsilon_after(&self, episodes: u32) -> f64 {
        (self.epsilon0 * self.epsilon_decay.powi(episodes as i32)).max(self.epsilon_min)
    }
}

/// Dense `Q(s, a)` table, zero-initialized.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    num_states: usize,
    num_actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn new(num_states: usize, num_actions: usize) -> Result<Self, QError> {
        if num_states == 0 || num_actions == 0 {
            return Err(QError::EmptyTable);
        }
        Ok(Self {
            num_states,
            num_actions,
            values: vec![0.0; num_states * num_actions],
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn get(&self, s: usize, a: ActionId) -> f64 {
        self.values[s * self.num_actions + a.0]
    }

    pub fn set(&mut self, s: usize, a: ActionId, v: f64) {
        assert!(v.is_finite(), "q values must be finite");
        self.values[s * self.num_actions + a.0] = v;
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s * self.num_actions..(s + 1) * self.num_actions]
    }

    pub fn max_value(&self, s: usize) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Argmax with ties to the lowest action id.
    pub fn greedy(&self, s: usize) -> ActionId {
        let row = self.row(s);
        let mut best = 0;
        for (i, v) in row.iter().enumerate() {
            if *v > row[best] {
                best = i;
            }
        }
        ActionId(best)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), QError> {
        writeln!(out, "{CHECKPOINT_HEADER}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["state_id", "action_id", "value"])
            .map_err(io::Error::from)?;
        for s in 0..self.num_states {
            for a in 0..self.num_actions {
                let v = self.get(s, ActionId(a));
                if v != 0.0 {
                    w.write_record([s.to_string(), a.to_string(), format!("{v:?}")])
                        .map_err(io::Error::from)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Loads a checkpoint into a table of the given shape; unlisted cells stay 0.
    pub fn read_csv<R: BufRead>(
        input: R,
        num_states: usize,
        num_actions: usize,
    ) -> Result<Self, QError> {
        let mut table = Self::new(num_states, num_actions)?;
        let mut header_seen = false;
        for (i, line) in input.lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            let err = |message: String| QError::Checkpoint { line: line_no, message };
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                if comment.trim() != CHECKPOINT_HEADER.trim_start_matches('#').trim() {
                    return Err(err(format!("unsupported checkpoint version `{trimmed}`")));
                }
                continue;
            }
            if !header_seen {
                if trimmed != "state_id,action_id,value" {
                    return Err(err("expected header `state_id,action_id,value`".into()));
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').collect();
            if fields.len() != 3 {
                return Err(err(format!("expected 3 fields, got {}", fields.len())));
            }
            let s: usize = fields[0].parse().map_err(|_| err("bad state_id".into()))?;
            let a: usize = fields[1].parse().map_err(|_| err("bad action_id".into()))?;
            let v: f64 = fields[2].parse().map_err(|_| err("bad value".into()))?;
            if s >= num_states || a >= num_actions {
                return Err(err(format!("cell ({s}, {a}) outside {num_states}x{num_actions}")));
            }
            if !v.is_finite() {
                return Err(err("value must be finite".into()));
            }
            table.set(s, ActionId(a), v);
        }
        Ok(table)
    }
}

/// With probability `epsilon` a uniform random action, otherwise the greedy one.
pub fn choose_action<R: Rng + ?Sized>(q: &QTable, s: usize, epsilon: f64, rng: &mut R) -> ActionId {
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        ActionId(rng.random_range(0..q.num_actions()))
    } else {
        q.greedy(s)
    }
}

/// One temporal-difference step on `(s, a)`.
pub fn update_q(q: &mut QTable, s: usize, a: ActionId, r: f64, s_next: usize, cfg: &QConfig) {
    let target = r + cfg.gamma * q.max_value(s_next);
    td_step(q, s, a, target, cfg.alpha);
}

/// Update for a transition into a terminal state (no bootstrap).
pub fn update_q_terminal(q: &mut QTable, s: usize, a: ActionId, r: f64, cfg: &QConfig) {
    td_step(q, s, a, r, cfg.alpha);
}

fn td_step(q: &mut QTable, s: usize, a: ActionId, target: f64, alpha: f64) {
    let old = q.get(s, a);
    q.set(s, a, old + alpha * (target - old));
}

pub fn episode_return(rewards: &[f64], gamma: f64) -> f64 {
    discounted_return(rewards, gamma)
}

/// Dialogue state seen by the learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct DiscreteState {
    /// Index of the ontology node under discussion; `None` once every node is decided.
    pub node: Option<usize>,
    pub level: KnowledgeLevel,
    pub sentiment: SentimentClass,
    /// Index of the last interpreted observation.
    pub observation: usize,
}

/// Bijection between [`DiscreteState`] and dense row ids for a given
/// ontology size and observation count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSpace {
    pub nodes: usize,
    pub observations: usize,
}

impl StateSpace {
    const LEVELS: usize = 4;
    const CLASSES: usize = 3;

    pub fn new(nodes: usize, observations: usize) -> Self {
        Self { nodes, observations }
    }

    /// Node slots include one terminal slot after the real nodes.
    pub fn size(&self) -> usize {
        (self.nodes + 1) * Self::LEVELS * Self::CLASSES * self.observations
    }

    pub fn encode(&self, s: &DiscreteState) -> usize {
        let node = s.node.unwrap_or(self.nodes);
        debug_assert!(node <= self.nodes && s.observation < self.observations);
        ((node * Self::LEVELS + s.level.index()) * Self::CLASSES + s.sentiment.index()) * self.observations
            + s.observation
    }

    pub fn decode(&self, id: usize) -> DiscreteState {
        let observation = id % self.observations;
        let rest = id / self.observations;
        let sentiment = SentimentClass::ALL[rest % Self::CLASSES];
        let rest = rest / Self::CLASSES;
        let level = KnowledgeLevel::ALL[rest % Self::LEVELS];
        let node = rest / Self::LEVELS;
        DiscreteState {
            node: (node < self.nodes).then_some(node),
            level,
            sentiment,
            observation,
        }
    }
}
