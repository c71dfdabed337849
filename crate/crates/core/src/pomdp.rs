//! POMDP model, exact belief updating and discounted returns.
//!
//! A model is the usual tuple of states, actions, observations, transition
//! probabilities `T(s'|s,a)`, observation probabilities `O(o|s',a)`, rewards
//! `R(s,a,s')` and a discount factor. Tensors are stored densely because the
//! dialogue-level state spaces are tiny.
//!
//! The belief update is
//!
//! ```text
//! b'(s') = η · O(o|s',a) · Σ_s T(s'|s,a) · b(s)
//! η      = 1 / Pr(o|b,a)
//! ```

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when validating probability rows and beliefs.
pub const PROB_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum PomdpError {
    #[error("observation {observation} has zero likelihood under action {action}")]
    DegenerateObservation { action: usize, observation: usize },

    #[error("invalid belief: {0}")]
    InvalidBelief(String),

    #[error("{table} row {row} sums to {sum}, expected 1")]
    InvalidRow {
        table: &'static str,
        row: String,
        sum: f64,
    },

    #[error("{table} contains an invalid entry at {row}: {value}")]
    InvalidEntry {
        table: &'static str,
        row: String,
        value: f64,
    },

    #[error("discount must satisfy 0 <= gamma < 1, got {0}")]
    InvalidDiscount(f64),

    #[error("unknown {kind} label `{label}`")]
    UnknownLabel { kind: &'static str, label: String },

    #[error("duplicate {kind} label `{label}`")]
    DuplicateLabel { kind: &'static str, label: String },

    #[error("{0} set must not be empty")]
    EmptySet(&'static str),

    #[error("{what} has {got} entries, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("{kind} index {index} out of range (cardinality {len})")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        len: usize,
    },

    #[error("malformed model document: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, PomdpError>;

macro_rules! index_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub struct $name(pub usize);

        impl $name {
            pub fn index(self) -> usize {
                self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

index_newtype!(
    /// Index into the model's state set.
    StateId
);
index_newtype!(
    /// Index into the model's action set.
    ActionId
);
index_newtype!(
    /// Index into the model's observation set.
    ObservationId
);

/// Probability distribution over the model's states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Belief {
    probs: Vec<f64>,
}

impl Belief {
    /// Validates non-negativity and unit mass (within [`PROB_TOLERANCE`]).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(PomdpError::InvalidBelief("empty distribution".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(PomdpError::InvalidBelief(format!("entry {p} is not a probability")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOLERANCE {
            return Err(PomdpError::InvalidBelief(format!("mass {sum} != 1")));
        }
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "belief over an empty state set");
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// All mass on a single state.
    pub fn point(n: usize, state: StateId) -> Self {
        assert!(state.0 < n, "state {state} out of range for {n} states");
        let mut probs = vec![0.0; n];
        probs[state.0] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, s: StateId) -> f64 {
        self.probs[s.0]
    }

    /// Most probable state; ties go to the lowest index.
    pub fn argmax(&self) -> StateId {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = i;
            }
        }
        StateId(best)
    }

    /// Largest entry, i.e. the confidence in the top hypothesis.
    pub fn max_prob(&self) -> f64 {
        self.probs[self.argmax().0]
    }

    pub fn l1_distance(&self, other: &Belief) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

impl TryFrom<Vec<f64>> for Belief {
    type Error = PomdpError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Belief::new(v)
    }
}

impl From<Belief> for Vec<f64> {
    fn from(b: Belief) -> Self {
        b.probs
    }
}

/// A policy maps a belief to an action.
pub trait Policy {
    fn act(&self, belief: &Belief) -> ActionId;
}

impl<F> Policy for F
where
    F: Fn(&Belief) -> ActionId,
{
    fn act(&self, belief: &Belief) -> ActionId {
        self(belief)
    }
}

/// Chooses the action assigned to the most probable state.
#[derive(Debug, Clone)]
pub struct TopStatePolicy {
    pub by_state: Vec<ActionId>,
}

impl Policy for TopStatePolicy {
    fn act(&self, belief: &Belief) -> ActionId {
        self.by_state[belief.argmax().0]
    }
}

/// Immutable POMDP model with dense tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct PomdpModel {
    states: Vec<String>,
    actions: Vec<String>,
    observations: Vec<String>,
    /// `[a][s][s']`
    transition: Vec<f64>,
    /// `[a][s'][o]`
    observation: Vec<f64>,
    /// `[a][s][s']`
    reward: Vec<f64>,
    discount: f64,
}

impl PomdpModel {
    /// Builds a model from dense tensors laid out as `transition[a][s][s']`,
    /// `observation[a][s'][o]` and `reward[a][s][s']`.
    ///
    /// Rows are validated to sum to one within [`PROB_TOLERANCE`] and then
    /// renormalized exactly.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        states: Vec<String>,
        actions: Vec<String>,
        observations: Vec<String>,
        transition: Vec<f64>,
        observation: Vec<f64>,
        reward: Vec<f64>,
        discount: f64,
    ) -> Result<Self> {
        check_labels("state", &states)?;
        check_labels("action", &actions)?;
        check_labels("observation", &observations)?;
        if !(0.0..1.0).contains(&discount) {
            return Err(PomdpError::InvalidDiscount(discount));
        }
        let (ns, na, no) = (states.len(), actions.len(), observations.len());
        expect_len("transition", transition.len(), na * ns * ns)?;
        expect_len("observation", observation.len(), na * ns * no)?;
        expect_len("reward", reward.len(), na * ns * ns)?;
        if let Some((i, r)) = reward.iter().enumerate().find(|(_, r)| !r.is_finite()) {
            return Err(PomdpError::InvalidEntry {
                table: "reward",
                row: format!("flat index {i}"),
                value: *r,
            });
        }

        let mut model = Self {
            states,
            actions,
            observations,
            transition,
            observation,
            reward,
            discount,
        };
        for a in 0..na {
            for s in 0..ns {
                let label = || format!("({}, {})", model.actions[a], model.states[s]);
                let start = (a * ns + s) * ns;
                normalize_row("transition", &mut model.transition[start..start + ns], label)?;
                let start = (a * ns + s) * no;
                normalize_row("observation", &mut model.observation[start..start + no], label)?;
            }
        }
        Ok(model)
    }

    /// Parses the JSON model document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument =
            serde_json::from_str(text).map_err(|e| PomdpError::Parse(e.to_string()))?;
        doc.into_model()
    }

    pub fn to_json(&self) -> String {
        let doc = ModelDocument::from_model(self);
        serde_json::to_string_pretty(&doc).expect("model document serializes")
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn num_observations(&self) -> usize {
        self.observations.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn observations(&self) -> &[String] {
        &self.observations
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn state_id(&self, label: &str) -> Option<StateId> {
        self.states.iter().position(|l| l == label).map(StateId)
    }

    pub fn action_id(&self, label: &str) -> Option<ActionId> {
        self.actions.iter().position(|l| l == label).map(ActionId)
    }

    pub fn observation_id(&self, label: &str) -> Option<ObservationId> {
        self.observations
            .iter()
            .position(|l| l == label)
            .map(ObservationId)
    }

    /// `T(s'|s,a)`
    pub fn transition(&self, s: StateId, a: ActionId, next: StateId) -> f64 {
        let ns = self.num_states();
        self.transition[(a.0 * ns + s.0) * ns + next.0]
    }

    /// `O(o|s',a)`
    pub fn observation(&self, next: StateId, a: ActionId, o: ObservationId) -> f64 {
        let (ns, no) = (self.num_states(), self.num_observations());
        self.observation[(a.0 * ns + next.0) * no + o.0]
    }

    /// `R(s,a,s')`
    pub fn reward(&self, s: StateId, a: ActionId, next: StateId) -> f64 {
        let ns = self.num_states();
        self.reward[(a.0 * ns + s.0) * ns + next.0]
    }

    fn check_inputs(&self, b: &Belief, a: ActionId, o: ObservationId) -> Result<()> {
        if b.len() != self.num_states() {
            return Err(PomdpError::DimensionMismatch {
                what: "belief",
                got: b.len(),
                expected: self.num_states(),
            });
        }
        check_index("action", a.0, self.num_actions())?;
        check_index("observation", o.0, self.num_observations())
    }

    /// Unnormalized posterior `O(o|s',a) Σ_s T(s'|s,a) b(s)` for every `s'`.
    fn unnormalized_posterior(&self, b: &Belief, a: ActionId, o: ObservationId) -> Vec<f64> {
        let ns = self.num_states();
        let mut out = vec![0.0; ns];
        for (s, &bs) in b.probs().iter().enumerate() {
            if bs == 0.0 {
                continue;
            }
            let row = &self.transition[(a.0 * ns + s) * ns..(a.0 * ns + s + 1) * ns];
            for (acc, t) in out.iter_mut().zip(row) {
                *acc += t * bs;
            }
        }
        for (next, acc) in out.iter_mut().enumerate() {
            *acc *= self.observation(StateId(next), a, o);
        }
        out
    }

    /// `Pr(o|b,a)`, the inverse of the normalizer.
    pub fn observation_likelihood(&self, b: &Belief, a: ActionId, o: ObservationId) -> Result<f64> {
        self.check_inputs(b, a, o)?;
        Ok(self.unnormalized_posterior(b, a, o).iter().sum())
    }

    /// Exact Bayesian belief update after taking `a` and observing `o`.
    pub fn update_belief(&self, b: &Belief, a: ActionId, o: ObservationId) -> Result<Belief> {
        self.check_inputs(b, a, o)?;
        let mut post = self.unnormalized_posterior(b, a, o);
        let likelihood: f64 = post.iter().sum();
        if likelihood <= 0.0 {
            return Err(PomdpError::DegenerateObservation {
                action: a.0,
                observation: o.0,
            });
        }
        for p in &mut post {
            *p /= likelihood;
        }
        Ok(Belief { probs: post })
    }
}

/// `Σ_t γ^t · r_t` over a finite horizon.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    let mut weight = 1.0;
    let mut total = 0.0;
    for r in rewards {
        total += weight * r;
        weight *= gamma;
    }
    total
}

fn check_labels(kind: &'static str, labels: &[String]) -> Result<()> {
    if labels.is_empty() {
        return Err(PomdpError::EmptySet(kind));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(PomdpError::DuplicateLabel {
                kind,
                label: l.clone(),
            });
        }
    }
    Ok(())
}

fn check_index(kind: &'static str, index: usize, len: usize) -> Result<()> {
    if index >= len {
        return Err(PomdpError::IndexOutOfRange { kind, index, len });
    }
    Ok(())
}

fn expect_len(what: &'static str, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(PomdpError::DimensionMismatch {
            what,
            got,
            expected,
        });
    }
    Ok(())
}

fn normalize_row(table: &'static str, row: &mut [f64], label: impl Fn() -> String) -> Result<()> {
    if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(PomdpError::InvalidEntry {
            table,
            row: label(),
            value: *v,
        });
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > PROB_TOLERANCE {
        return Err(PomdpError::InvalidRow {
            table,
            row: label(),
            sum,
        });
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
    Ok(())
}

type Table = BTreeMap<String, BTreeMap<String, BTreeMap<String, f64>>>;

/// On-disk model layout. Tables are nested `action -> row -> column -> value`;
/// the action key `"*"` applies a row set to every action that has no
/// explicit entry.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    states: Vec<String>,
    actions: Vec<String>,
    observations: Vec<String>,
    discount: f64,
    transition: Table,
    observation: Table,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    reward: Table,
}

impl ModelDocument {
    fn into_model(self) -> Result<PomdpModel> {
        check_labels("state", &self.states)?;
        check_labels("action", &self.actions)?;
        check_labels("observation", &self.observations)?;
        let transition = dense(
            "transition",
            &self.transition,
            &self.actions,
            &self.states,
            &self.states,
            true,
        )?;
        let observation = dense(
            "observation",
            &self.observation,
            &self.actions,
            &self.states,
            &self.observations,
            true,
        )?;
        let reward = dense(
            "reward",
            &self.reward,
            &self.actions,
            &self.states,
            &self.states,
            false,
        )?;
        PomdpModel::new(
            self.states,
            self.actions,
            self.observations,
            transition,
            observation,
            reward,
            self.discount,
        )
    }

    fn from_model(m: &PomdpModel) -> Self {
        let mut transition = Table::new();
        let mut observation = Table::new();
        let mut reward = Table::new();
        for (a, al) in m.actions.iter().enumerate() {
            let (mut t, mut o, mut r) = (BTreeMap::new(), BTreeMap::new(), BTreeMap::new());
            for (s, sl) in m.states.iter().enumerate() {
                let mut trow = BTreeMap::new();
                let mut rrow = BTreeMap::new();
                for (n, nl) in m.states.iter().enumerate() {
                    let p = m.transition(StateId(s), ActionId(a), StateId(n));
                    if p != 0.0 {
                        trow.insert(nl.clone(), p);
                    }
                    let rv = m.reward(StateId(s), ActionId(a), StateId(n));
                    if rv != 0.0 {
                        rrow.insert(nl.clone(), rv);
                    }
                }
                let mut orow = BTreeMap::new();
                for (k, ol) in m.observations.iter().enumerate() {
                    let p = m.observation(StateId(s), ActionId(a), ObservationId(k));
                    if p != 0.0 {
                        orow.insert(ol.clone(), p);
                    }
                }
                t.insert(sl.clone(), trow);
                o.insert(sl.clone(), orow);
                if !rrow.is_empty() {
                    r.insert(sl.clone(), rrow);
                }
            }
            transition.insert(al.clone(), t);
            observation.insert(al.clone(), o);
            if !r.is_empty() {
                reward.insert(al.clone(), r);
            }
        }
        Self {
            states: m.states.clone(),
            actions: m.actions.clone(),
            observations: m.observations.clone(),
            discount: m.discount,
            transition,
            observation,
            reward,
        }
    }
}

fn dense(
    table: &'static str,
    doc: &Table,
    actions: &[String],
    rows: &[String],
    cols: &[String],
    rows_required: bool,
) -> Result<Vec<f64>> {
    for key in doc.keys() {
        if key != "*" && !actions.contains(key) {
            return Err(PomdpError::UnknownLabel {
                kind: "action",
                label: key.clone(),
            });
        }
    }
    let mut out = vec![0.0; actions.len() * rows.len() * cols.len()];
    for (a, al) in actions.iter().enumerate() {
        let by_row = doc.get(al).or_else(|| doc.get("*"));
        let Some(by_row) = by_row else {
            if rows_required {
                return Err(PomdpError::InvalidRow {
                    table,
                    row: format!("({al}, *)"),
                    sum: 0.0,
                });
            }
            continue;
        };
        for key in by_row.keys() {
            if !rows.contains(key) {
                return Err(PomdpError::UnknownLabel {
                    kind: "state",
                    label: key.clone(),
                });
            }
        }
        for (r, rl) in rows.iter().enumerate() {
            let Some(entries) = by_row.get(rl) else {
                if rows_required {
                    return Err(PomdpError::InvalidRow {
                        table,
                        row: format!("({al}, {rl})"),
                        sum: 0.0,
                    });
                }
                continue;
            };
            for (cl, v) in entries {
                let c = cols.iter().position(|x| x == cl).ok_or_else(|| {
                    PomdpError::UnknownLabel {
                        kind: if cols.len() == rows.len() && cols == rows {
                            "state"
                        } else {
                            "observation"
                        },
                        label: cl.clone(),
                    }
                })?;
                out[(a * rows.len() + r) * cols.len() + c] = *v;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    /// Two states, one action, two observations.
    fn two_state(t: [[f64; 2]; 2], o: [[f64; 2]; 2]) -> PomdpModel {
        PomdpModel::new(
            labels("s", 2),
            labels("a", 1),
            labels("o", 2),
            t.iter().flatten().copied().collect(),
            o.iter().flatten().copied().collect(),
            vec![0.0; 4],
            0.9,
        )
        .unwrap()
    }

    #[test]
    fn identity_transition_uniform_observation_keeps_belief() {
        let m = two_state([[1.0, 0.0], [0.0, 1.0]], [[0.5, 0.5], [0.5, 0.5]]);
        let b = Belief::uniform(2);
        let next = m.update_belief(&b, ActionId(0), ObservationId(0)).unwrap();
        assert_eq!(next, b);
    }

    #[test]
    fn symmetric_transition_hand_example() {
        // T(s1'|s1) = 0.7, T(s1'|s2) = 0.3; O(o|s1') = 0.9, O(o|s2') = 0.2.
        let m = two_state([[0.7, 0.3], [0.3, 0.7]], [[0.9, 0.1], [0.2, 0.8]]);
        let b = Belief::uniform(2);
        let like = m
            .observation_likelihood(&b, ActionId(0), ObservationId(0))
            .unwrap();
        assert!((like - 0.55).abs() < 1e-15);
        let next = m.update_belief(&b, ActionId(0), ObservationId(0)).unwrap();
        assert!((next.probs()[0] - 0.45 / 0.55).abs() < 1e-12);
        assert!((next.probs()[1] - 0.10 / 0.55).abs() < 1e-12);
    }

    #[test]
    fn identifying_observation_collapses_belief() {
        let m = two_state([[0.6, 0.4], [0.5, 0.5]], [[1.0, 0.0], [0.0, 1.0]]);
        let next = m
            .update_belief(&Belief::uniform(2), ActionId(0), ObservationId(0))
            .unwrap();
        assert_eq!(next.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn impossible_observation_is_degenerate() {
        let m = two_state([[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [1.0, 0.0]]);
        let err = m
            .update_belief(&Belief::uniform(2), ActionId(0), ObservationId(1))
            .unwrap_err();
        assert!(matches!(err, PomdpError::DegenerateObservation { .. }));
    }

    #[test]
    fn uniform_observation_likelihood_is_one_over_k() {
        let k = 4;
        let m = PomdpModel::new(
            labels("s", 3),
            labels("a", 1),
            labels("o", k),
            vec![1.0 / 3.0; 9],
            vec![1.0 / k as f64; 3 * k],
            vec![0.0; 9],
            0.5,
        )
        .unwrap();
        let b = Belief::new(vec![0.2, 0.3, 0.5]).unwrap();
        for o in 0..k {
            let l = m
                .observation_likelihood(&b, ActionId(0), ObservationId(o))
                .unwrap();
            assert!((l - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn discounted_return_examples() {
        assert_eq!(discounted_return(&[1.0, 1.0, 1.0], 0.5), 1.75);
        assert_eq!(discounted_return(&[2.5], 0.3), 2.5);
        assert_eq!(discounted_return(&[3.0, 9.0, 9.0], 0.0), 3.0);
        assert_eq!(discounted_return(&[], 0.9), 0.0);
    }

    #[test]
    fn rejects_discount_of_one() {
        let err = PomdpModel::new(
            labels("s", 1),
            labels("a", 1),
            labels("o", 1),
            vec![1.0],
            vec![1.0],
            vec![0.0],
            1.0,
        )
        .unwrap_err();
        assert_eq!(err, PomdpError::InvalidDiscount(1.0));
    }

    #[test]
    fn rejects_rows_off_the_simplex() {
        let err = PomdpModel::new(
            labels("s", 2),
            labels("a", 1),
            labels("o", 1),
            vec![0.5, 0.6, 0.5, 0.5],
            vec![1.0, 1.0],
            vec![0.0; 4],
            0.9,
        )
        .unwrap_err();
        assert!(matches!(err, PomdpError::InvalidRow { table: "transition", .. }));
    }

    #[test]
    fn rows_within_tolerance_are_renormalized() {
        let m = PomdpModel::new(
            labels("s", 2),
            labels("a", 1),
            labels("o", 1),
            vec![0.5 + 4e-10, 0.5, 0.5, 0.5],
            vec![1.0, 1.0],
            vec![0.0; 4],
            0.9,
        )
        .unwrap();
        let sum = m.transition(StateId(0), ActionId(0), StateId(0))
            + m.transition(StateId(0), ActionId(0), StateId(1));
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip_and_wildcard_action() {
        let doc = r#"{
            "states": ["x", "y"],
            "actions": ["go", "stay"],
            "observations": ["ping"],
            "discount": 0.95,
            "transition": {
                "*": {"x": {"x": 0.5, "y": 0.5}, "y": {"y": 1.0}},
                "stay": {"x": {"x": 1.0}, "y": {"y": 1.0}}
            },
            "observation": {"*": {"x": {"ping": 1.0}, "y": {"ping": 1.0}}},
            "reward": {"go": {"x": {"y": 2.0}}}
        }"#;
        let m = PomdpModel::from_json(doc).unwrap();
        let go = m.action_id("go").unwrap();
        let stay = m.action_id("stay").unwrap();
        let (x, y) = (StateId(0), StateId(1));
        assert_eq!(m.transition(x, go, y), 0.5);
        assert_eq!(m.transition(x, stay, y), 0.0);
        assert_eq!(m.reward(x, go, y), 2.0);
        let again = PomdpModel::from_json(&m.to_json()).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn json_rejects_unknown_labels_and_missing_rows() {
        let missing = r#"{"states":["x","y"],"actions":["a"],"observations":["o"],"discount":0.5,
            "transition":{"a":{"x":{"x":1.0}}},"observation":{"a":{"x":{"o":1.0},"y":{"o":1.0}}}}"#;
        assert!(matches!(
            PomdpModel::from_json(missing),
            Err(PomdpError::InvalidRow { .. })
        ));
        let unknown = r#"{"states":["x"],"actions":["a"],"observations":["o"],"discount":0.5,
            "transition":{"a":{"x":{"z":1.0}}},"observation":{"a":{"x":{"o":1.0}}}}"#;
        assert!(matches!(
            PomdpModel::from_json(unknown),
            Err(PomdpError::UnknownLabel { .. })
        ));
    }

    #[test]
    fn belief_validation() {
        assert!(Belief::new(vec![0.5, 0.5]).is_ok());
        assert!(Belief::new(vec![0.5, 0.6]).is_err());
        assert!(Belief::new(vec![-0.1, 1.1]).is_err());
        assert!(Belief::new(vec![]).is_err());
        assert_eq!(Belief::new(vec![0.2, 0.4, 0.4]).unwrap().argmax(), StateId(1));
    }

    #[test]
    fn top_state_policy_is_deterministic() {
        let p = TopStatePolicy {
            by_state: vec![ActionId(1), ActionId(0)],
        };
        let b = Belief::new(vec![0.3, 0.7]).unwrap();
        assert_eq!(p.act(&b), ActionId(0));
        assert_eq!(p.act(&b), p.act(&b.clone()));
        let closure = |b: &Belief| ActionId(b.argmax().0);
        assert_eq!(closure.act(&b), ActionId(1));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn row(width: usize) -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(0.01f64..1.0, width).prop_map(|r| {
                let total: f64 = r.iter().sum();
                r.into_iter().map(|x| x / total).collect()
            })
        }

        fn model_and_belief() -> impl Strategy<Value = (PomdpModel, Belief)> {
            (1usize..=6, 1usize..=4, 1usize..=4).prop_flat_map(|(ns, na, no)| {
                (
                    prop::collection::vec(row(ns), na * ns),
                    prop::collection::vec(row(no), na * ns),
                    row(ns),
                )
                    .prop_map(move |(t, o, b)| {
                        let m = PomdpModel::new(
                            labels("s", ns),
                            labels("a", na),
                            labels("o", no),
                            t.concat(),
                            o.concat(),
                            vec![0.0; na * ns * ns],
                            0.95,
                        )
                        .unwrap();
                        (m, Belief::new(b).unwrap())
                    })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn update_stays_on_the_simplex((m, b) in model_and_belief(), a in 0usize..4, o in 0usize..4) {
                let (a, o) = (ActionId(a % m.num_actions()), ObservationId(o % m.num_observations()));
                let next = m.update_belief(&b, a, o).unwrap();
                prop_assert!(next.probs().iter().all(|&p| p >= 0.0));
                prop_assert!((next.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }

            #[test]
            fn observation_likelihoods_sum_to_one((m, b) in model_and_belief(), a in 0usize..4) {
                let a = ActionId(a % m.num_actions());
                let total: f64 = (0..m.num_observations())
                    .map(|o| m.observation_likelihood(&b, a, ObservationId(o)).unwrap())
                    .sum();
                prop_assert!((total - 1.0).abs() < 1e-9);
            }
        }
    }
}
