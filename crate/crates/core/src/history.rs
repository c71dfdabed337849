//! Append-only belief-state history with constraint validation and rollback.
//!
//! Planning reads the union of the current belief and everything committed
//! before it. A candidate belief that fails validation is never stored; the
//! turn instead re-commits the previous belief with `accepted = false`, so the
//! history always has one entry per turn.

use std::io::{self, Write};
use std::sync::Arc;

use serde::Serialize;

use crate::pomdp::{ActionId, Belief, ObservationId, PomdpError, PomdpModel};

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub turn: usize,
    pub belief: Belief,
    pub action: Option<ActionId>,
    pub observation: Option<ObservationId>,
    pub accepted: bool,
}

impl HistoryEntry {
    /// Scalar fed to trend analysis: confidence in the top hypothesis.
    pub fn scalar(&self) -> f64 {
        self.belief.max_prob()
    }
}

type Predicate = dyn Fn(&Belief, &Belief, Option<ObservationId>) -> bool + Send + Sync;

/// A domain constraint over `(previous belief, candidate belief, observation)`.
#[derive(Clone)]
pub struct ValidationRule {
    pub description: String,
    predicate: Arc<Predicate>,
}

impl ValidationRule {
    pub fn new<F>(description: impl Into<String>, predicate: F) -> Self
    where
        F: Fn(&Belief, &Belief, Option<ObservationId>) -> bool + Send + Sync + 'static,
    {
        Self {
            description: description.into(),
            predicate: Arc::new(predicate),
        }
    }

    /// Mass on `state` may never decrease from one turn to the next.
    pub fn non_decreasing(state: crate::pomdp::StateId) -> Self {
        Self::new(format!("mass on state {state} may not decrease"), move |prev, next, _| {
            next.get(state) + 1e-12 >= prev.get(state)
        })
    }

    pub fn check(&self, prev: &Belief, next: &Belief, o: Option<ObservationId>) -> bool {
        (self.predicate)(prev, next, o)
    }
}

impl std::fmt::Debug for ValidationRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ValidationRule")
            .field("description", &self.description)
            .finish()
    }
}

/// Outcome of validating a candidate belief.
#[derive(Debug, Clone, PartialEq)]
pub struct Validation {
    pub accepted: bool,
    pub belief: Belief,
    /// Description of the first failing rule, if any.
    pub reason: Option<String>,
}

/// Read-only view used by planning: the current belief plus all earlier ones.
#[derive(Debug, Clone, Copy)]
pub struct PlanningView<'a> {
    pub current: &'a Belief,
    pub prior: &'a [HistoryEntry],
}

impl PlanningView<'_> {
    pub fn prior_beliefs(&self) -> impl Iterator<Item = &Belief> {
        self.prior.iter().map(|e| &e.belief)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BeliefHistory {
    entries: Vec<HistoryEntry>,
}

impl BeliefHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// History seeded with the initial belief at turn 0.
    pub fn with_initial(belief: Belief) -> Self {
        let mut h = Self::new();
        h.append(belief, None, None);
        h
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[HistoryEntry] {
        &self.entries
    }

    pub fn last(&self) -> Option<&HistoryEntry> {
        self.entries.last()
    }

    /// Commits an accepted belief as the next turn.
    pub fn append(&mut self, belief: Belief, action: Option<ActionId>, observation: Option<ObservationId>) {
        self.push(belief, action, observation, true);
    }

    /// Commits a turn whose candidate was rejected: the previous belief is
    /// carried forward and flagged.
    pub fn append_rollback(&mut self, action: Option<ActionId>, observation: Option<ObservationId>) {
        let prev = self
            .entries
            .last()
            .expect("rollback on an empty history")
            .belief
            .clone();
        self.push(prev, action, observation, false);
    }

    /// Commits the outcome of [`validate_or_rollback`](Self::validate_or_rollback).
    pub fn commit(&mut self, v: &Validation, action: Option<ActionId>, observation: Option<ObservationId>) {
        if v.accepted {
            self.append(v.belief.clone(), action, observation);
        } else {
            self.append_rollback(action, observation);
        }
    }

    fn push(&mut self, belief: Belief, action: Option<ActionId>, observation: Option<ObservationId>, accepted: bool) {
        let turn = self.entries.len();
        self.entries.push(HistoryEntry {
            turn,
            belief,
            action,
            observation,
            accepted,
        });
    }

    /// Checks a candidate against `rules`. A failed belief update (for example
    /// a degenerate observation) counts as a failed validation. Never mutates
    /// the history.
    pub fn validate_or_rollback(
        &self,
        rules: &[ValidationRule],
        candidate: Result<Belief, PomdpError>,
        observation: Option<ObservationId>,
    ) -> Validation {
        let prev = &self
            .entries
            .last()
            .expect("validation needs a non-empty history")
            .belief;
        let rollback = |reason: String| Validation {
            accepted: false,
            belief: prev.clone(),
            reason: Some(reason),
        };
        let candidate = match candidate {
            Ok(b) => b,
            Err(e) => return rollback(e.to_string()),
        };
        match rules.iter().find(|r| !r.check(prev, &candidate, observation)) {
            Some(rule) => rollback(rule.description.clone()),
            None => Validation {
                accepted: true,
                belief: candidate,
                reason: None,
            },
        }
    }

    pub fn planning_view(&self) -> PlanningView<'_> {
        let (last, prior) = self
            .entries
            .split_last()
            .expect("planning view of an empty history");
        PlanningView {
            current: &last.belief,
            prior,
        }
    }

    /// Per-turn scalar series (max belief entry).
    pub fn scalar_series(&self) -> Vec<f64> {
        self.entries.iter().map(HistoryEntry::scalar).collect()
    }

    /// Writes one JSON object per turn.
    pub fn write_jsonl<W: Write>(&self, model: &PomdpModel, mut out: W) -> io::Result<()> {
        #[derive(Serialize)]
        struct Line<'a> {
            turn: usize,
            scalar: f64,
            belief: &'a [f64],
            action: Option<&'a str>,
            observation: Option<&'a str>,
            accepted: bool,
        }
        for e in &self.entries {
            let line = Line {
                turn: e.turn,
                scalar: e.scalar(),
                belief: e.belief.probs(),
                action: e.action.map(|a| model.actions()[a.0].as_str()),
                observation: e.observation.map(|o| model.observations()[o.0].as_str()),
                accepted: e.accepted,
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}
