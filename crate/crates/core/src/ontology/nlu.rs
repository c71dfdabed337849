//! Keyword-cue interpretation of user utterances.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::OntologyNode;

/// Additive smoothing per observation.
const SMOOTHING: f64 = 0.05;

const AFFIRM_WORDS: &[&str] = &[
    "yes", "yeah", "yep", "sure", "okay", "add", "prefer", "love", "include", "definitely",
    "absolutely", "accept",
];
const AFFIRM_PHRASES: &[&[&str]] = &[&["i", "want"], &["please", "add"], &["opt", "in"], &["i", "need"]];
const DENY_WORDS: &[&str] = &["no", "not", "don't", "dont", "nope", "never", "skip", "without", "decline"];
const INFO_WORDS: &[&str] = &["what", "which", "how", "explain", "mean", "means", "why", "describe"];
const INFO_PHRASES: &[&[&str]] = &[&["tell", "me"]];
const EXIT_WORDS: &[&str] = &["quit", "exit", "bye", "goodbye"];
const INTERROGATIVES: &[&str] = &["what", "which", "how", "why", "huh", "eh", "pardon"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DialogueObservation {
    Affirm,
    Deny,
    RequestInfo,
    Unknown,
    Exit,
}

impl DialogueObservation {
    pub const ALL: [DialogueObservation; 5] = [
        DialogueObservation::Affirm,
        DialogueObservation::Deny,
        DialogueObservation::RequestInfo,
        DialogueObservation::Unknown,
        DialogueObservation::Exit,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Label used in model files.
    pub fn label(self) -> &'static str {
        match self {
            DialogueObservation::Affirm => "affirm",
            DialogueObservation::Deny => "deny",
            DialogueObservation::RequestInfo => "request_info",
            DialogueObservation::Unknown => "unknown",
            DialogueObservation::Exit => "exit",
        }
    }
}

impl fmt::Display for DialogueObservation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The user's hidden intention about the feature under discussion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntentionState {
    WantsFeature,
    RejectsFeature,
    NeedsInfo,
    Confused,
}

impl IntentionState {
    pub const ALL: [IntentionState; 4] = [
        IntentionState::WantsFeature,
        IntentionState::RejectsFeature,
        IntentionState::NeedsInfo,
        IntentionState::Confused,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            IntentionState::WantsFeature => "wants_feature",
            IntentionState::RejectsFeature => "rejects_feature",
            IntentionState::NeedsInfo => "needs_info",
            IntentionState::Confused => "confused",
        }
    }

    /// The intention an observation is evidence for.
    pub fn matching(o: DialogueObservation) -> Option<IntentionState> {
        match o {
            DialogueObservation::Affirm => Some(IntentionState::WantsFeature),
            DialogueObservation::Deny => Some(IntentionState::RejectsFeature),
            DialogueObservation::RequestInfo => Some(IntentionState::NeedsInfo),
            DialogueObservation::Unknown => Some(IntentionState::Confused),
            DialogueObservation::Exit => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservationDistribution {
    pub probs: [f64; 5],
}

impl ObservationDistribution {
    /// Most likely observation; ties go to the earlier one.
    pub fn argmax(&self) -> DialogueObservation {
        let mut best = 0;
        for i in 1..5 {
            if self.probs[i] > self.probs[best] {
                best = i;
            }
        }
        DialogueObservation::ALL[best]
    }

    pub fn prob(&self, o: DialogueObservation) -> f64 {
        self.probs[o.index()]
    }

    pub fn confidence(&self) -> f64 {
        self.prob(self.argmax())
    }
}

fn words(text: &str) -> Vec<String> {
    text.split(|c: char| c.is_whitespace() || matches!(c, ',' | '.' | ';' | ':' | '!' | '?' | '(' | ')' | '"'))
        .map(|w| w.trim_matches('\'').to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

fn count_phrases(tokens: &[String], phrases: &[&[&str]]) -> usize {
    phrases
        .iter()
        .map(|p| tokens.windows(p.len()).filter(|w| w.iter().zip(p.iter()).all(|(a, b)| a == b)).count())
        .sum()
}

fn count_words(tokens: &[String], set: &[&str]) -> usize {
    tokens.iter().filter(|t| set.contains(&t.as_str())).count()
}

/// Scores cue hits per observation and smooths them into a distribution.
/// The node is accepted for future node-specific cues; the shipped cues are
/// domain-independent.
pub fn interpret(text: &str, _node: Option<&OntologyNode>) -> ObservationDistribution {
    let tokens = words(text);
    let mut raw = [0.0f64; 5];

    // A bare interrogative ("What?") signals a failed exchange, not a question
    // about the feature.
    let lone_interrogative = tokens.len() == 1 && INTERROGATIVES.contains(&tokens[0].as_str());
    if !lone_interrogative {
        raw[DialogueObservation::Affirm.index()] =
            (count_words(&tokens, AFFIRM_WORDS) + count_phrases(&tokens, AFFIRM_PHRASES)) as f64;
        raw[DialogueObservation::Deny.index()] = count_words(&tokens, DENY_WORDS) as f64;
        let info = count_words(&tokens, INFO_WORDS) + count_phrases(&tokens, INFO_PHRASES);
        raw[DialogueObservation::RequestInfo.index()] =
            (info + usize::from(info > 0 && text.contains('?'))) as f64;
        raw[DialogueObservation::Exit.index()] = count_words(&tokens, EXIT_WORDS) as f64;
    }
    if raw.iter().all(|&r| r == 0.0) {
        raw[DialogueObservation::Unknown.index()] = 1.0;
    }
    let total: f64 = raw.iter().sum::<f64>() + SMOOTHING * raw.len() as f64;
    ObservationDistribution {
        probs: raw.map(|r| (r + SMOOTHING) / total),
    }
}
