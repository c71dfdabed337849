//! Dialogue acts and the policies that choose among them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ontology::{DialogueObservation, IntentionState};
use crate::pomdp::{ActionId, Belief, PomdpModel, StateId};

/// Agent dialogue acts. Their order matches the action order of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DialogueAction {
    AdvancePrompt,
    GiveInfo,
    Confirm,
    Clarify,
}

impl DialogueAction {
    pub const ALL: [DialogueAction; 4] = [
        DialogueAction::AdvancePrompt,
        DialogueAction::GiveInfo,
        DialogueAction::Confirm,
        DialogueAction::Clarify,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn id(self) -> ActionId {
        ActionId(self.index())
    }

    pub fn from_id(a: ActionId) -> Self {
        Self::ALL[a.0]
    }

    pub fn label(self) -> &'static str {
        match self {
            DialogueAction::AdvancePrompt => "advance_prompt",
            DialogueAction::GiveInfo => "give_info",
            DialogueAction::Confirm => "confirm",
            DialogueAction::Clarify => "clarify",
        }
    }

    /// Checks that `model` lists the dialogue acts in this order.
    pub fn matches_model(model: &PomdpModel) -> bool {
        model.actions().len() == Self::ALL.len()
            && Self::ALL.iter().zip(model.actions()).all(|(a, l)| a.label() == l)
    }
}

impl fmt::Display for DialogueAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyMode {
    /// Rule-based grounding policy.
    #[default]
    HandCrafted,
    /// Epsilon-greedy over the session's Q-table.
    Learned,
    /// Uniform over the dialogue acts.
    Random,
}

impl FromStr for PolicyMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hand-crafted" | "hand_crafted" | "handcrafted" => Ok(Self::HandCrafted),
            "learned" => Ok(Self::Learned),
            "random" => Ok(Self::Random),
            other => Err(format!("unknown policy `{other}` (hand-crafted, learned, random)")),
        }
    }
}

impl fmt::Display for PolicyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::HandCrafted => "hand-crafted",
            Self::Learned => "learned",
            Self::Random => "random",
        })
    }
}

/// Grounding thresholds of the rule-based policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HandCraftedConfig {
    /// Minimum interpretation confidence to act on an answer.
    pub min_confidence: f64,
    /// Stricter minimum right after a failed exchange.
    pub min_confidence_after_clarify: f64,
    /// Minimum belief in the intention the answer expresses.
    pub min_belief: f64,
}

impl Default for HandCraftedConfig {
    fn default() -> Self {
        Self {
            min_confidence: 0.5,
            min_confidence_after_clarify: 0.9,
            min_belief: 0.5,
        }
    }
}

/// Inputs the rule-based policy looks at.
#[derive(Debug, Clone, Copy)]
pub struct PolicyContext<'a> {
    pub observation: DialogueObservation,
    pub confidence: f64,
    pub belief: &'a Belief,
    pub previous_action: Option<DialogueAction>,
    pub node_open: bool,
}

pub fn hand_crafted(ctx: &PolicyContext<'_>, cfg: &HandCraftedConfig) -> DialogueAction {
    use DialogueObservation::*;
    if !ctx.node_open {
        return match ctx.observation {
            RequestInfo => DialogueAction::GiveInfo,
            _ => DialogueAction::AdvancePrompt,
        };
    }
    match ctx.observation {
        Unknown | Exit => DialogueAction::Clarify,
        RequestInfo => DialogueAction::GiveInfo,
        Affirm | Deny => {
            let needed = if ctx.previous_action == Some(DialogueAction::Clarify) {
                cfg.min_confidence_after_clarify
            } else {
                cfg.min_confidence
            };
            let intention = IntentionState::matching(ctx.observation).expect("answers have an intention");
            let support = ctx.belief.get(StateId(intention.index()));
            if ctx.confidence >= needed && support >= cfg.min_belief {
                DialogueAction::AdvancePrompt
            } else {
                DialogueAction::Confirm
            }
        }
    }
}
