//! Per-session dialogue loop: sentiment, belief tracking, trend analysis,
//! action selection, learning and emotion for every user utterance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assets::Assets;
use crate::fuzzy::{self, Emotion, FammTable};
use crate::history::{BeliefHistory, ValidationRule};
use crate::level::{classify_level, select_mode, ControlMode, KnowledgeLevel};
use crate::ontology::{interpret, DialogueObservation, IntentionState, Walker};
use crate::policy::{hand_crafted, DialogueAction, HandCraftedConfig, PolicyContext, PolicyMode};
use crate::pomdp::{Belief, ObservationId, StateId};
use crate::qlearn::{self, DiscreteState, QConfig, QError, QTable, StateSpace};
use crate::sentiment::{self, RewardConfig, SentimentClass, SentimentError, SentimentScore};
use crate::trend;

pub const CLARIFY_TEXT: &str = "Your response cannot be recognized. Please answer with the suggested response.";
/// Action label reported on the turn that ends the session.
pub const FAREWELL_ACTION: &str = "farewell";
/// Ratio used for emotion while the history is too short for a trend.
const DEFAULT_RATIO: f64 = 0.625;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("session has ended")]
    SessionEnded,
    #[error("utterance is empty")]
    EmptyUtterance,
    #[error(transparent)]
    Config(#[from] QError),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub q: QConfig,
    pub reward: RewardConfig,
    pub policy: PolicyMode,
    pub hand_crafted: HandCraftedConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefTop {
    pub state: String,
    pub probability: f64,
}

/// Everything the agent reports for one user utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentTurn {
    pub reply: String,
    pub action: String,
    pub emotion: Emotion,
    pub crisp_x: f64,
    pub level: KnowledgeLevel,
    pub mode: ControlMode,
    pub reward: f64,
    pub sentiment: SentimentScore,
    pub belief_top: BeliefTop,
    pub ncp: usize,
    pub accepted: bool,
}

pub struct Session {
    assets: Assets,
    config: EngineConfig,
    famm: FammTable,
    rules: Vec<ValidationRule>,
    walker: Walker,
    history: BeliefHistory,
    qtable: QTable,
    space: StateSpace,
    epsilon: f64,
    turn: usize,
    goal_reached: bool,
    ended: bool,
    rng: ChaCha8Rng,
    greeting: String,
    last_action: Option<DialogueAction>,
    last_observation: Option<DialogueObservation>,
    pending: Option<(usize, DialogueAction)>,
    last_choice: Option<(usize, DialogueAction)>,
    transcript: Vec<AgentTurn>,
}

impl Session {
    pub fn new(assets: Assets, config: EngineConfig, seed: u64) -> Result<Self, EngineError> {
        config.q.validate()?;
        let space = StateSpace::new(assets.ontology.len(), DialogueObservation::ALL.len());
        let qtable = QTable::new(space.size(), DialogueAction::ALL.len())?;
        Self::with_qtable(assets, config, seed, qtable)
    }

    /// Starts a session that learns into (and acts on) an existing table.
    pub fn with_qtable(assets: Assets, config: EngineConfig, seed: u64, qtable: QTable) -> Result<Self, EngineError> {
        config.q.validate()?;
        let space = StateSpace::new(assets.ontology.len(), DialogueObservation::ALL.len());
        if qtable.num_states() != space.size() || qtable.num_actions() != DialogueAction::ALL.len() {
            return Err(EngineError::Config(QError::InvalidConfig(format!(
                "q table is {}x{}, expected {}x{}",
                qtable.num_states(),
                qtable.num_actions(),
                space.size(),
                DialogueAction::ALL.len()
            ))));
        }
        let n_states = assets.model.num_states();
        let initial = Belief::point(n_states, StateId(IntentionState::WantsFeature.index()));
        let mut walker = Walker::new(&assets.ontology);
        let first = walker.advance(&assets.ontology);
        let greeting = [assets.ontology.greeting(), first.text.as_str()]
            .iter()
            .filter(|s| !s.is_empty())
            .copied()
            .collect::<Vec<_>>()
            .join(" ");
        Ok(Self {
            epsilon: config.q.epsilon0,
            goal_reached: first.complete,
            assets,
            config,
            famm: FammTable::default(),
            rules: Vec::new(),
            walker,
            history: BeliefHistory::with_initial(initial),
            qtable,
            space,
            turn: 0,
            ended: false,
            rng: ChaCha8Rng::seed_from_u64(seed),
            greeting,
            // The greeting already asks the first question.
            last_action: None,
            last_observation: None,
            pending: None,
            last_choice: None,
            transcript: Vec::new(),
        })
    }

    pub fn greeting(&self) -> &str {
        &self.greeting
    }

    pub fn turn(&self) -> usize {
        self.turn
    }

    pub fn goal_reached(&self) -> bool {
        self.goal_reached
    }

    pub fn ended(&self) -> bool {
        self.ended
    }

    pub fn history(&self) -> &BeliefHistory {
        &self.history
    }

    pub fn walker(&self) -> &Walker {
        &self.walker
    }

    pub fn assets(&self) -> &Assets {
        &self.assets
    }

    pub fn transcript(&self) -> &[AgentTurn] {
        &self.transcript
    }

    pub fn qtable(&self) -> &QTable {
        &self.qtable
    }

    pub fn into_qtable(self) -> QTable {
        self.qtable
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn set_epsilon(&mut self, epsilon: f64) {
        self.epsilon = epsilon.clamp(0.0, 1.0);
    }

    pub fn set_validation_rules(&mut self, rules: Vec<ValidationRule>) {
        self.rules = rules;
    }

    /// Node the agent is currently asking about.
    pub fn current_node(&self) -> Option<usize> {
        self.walker.cursor()
    }

    pub fn last_action(&self) -> Option<DialogueAction> {
        self.last_action
    }

    pub fn last_observation(&self) -> Option<DialogueObservation> {
        self.last_observation
    }

    /// `Q(s, a)` of the most recent choice, after learning from it.
    pub fn last_q_value(&self) -> Option<f64> {
        self.last_choice.map(|(s, a)| self.qtable.get(s, a.id()))
    }

    pub fn state_space(&self) -> StateSpace {
        self.space
    }

    pub fn step(&mut self, utterance: &str) -> Result<AgentTurn, EngineError> {
        if self.ended {
            return Err(EngineError::SessionEnded);
        }
        let exiting = is_exit(utterance);

        let score = match sentiment::score_utterance(utterance, &self.assets.lexicon) {
            Ok(s) => s,
            Err(SentimentError::EmptyInput) => return Err(EngineError::EmptyUtterance),
            Err(e) => unreachable!("scoring only fails on empty input: {e}"),
        };
        let class = sentiment::classify(&score);

        let node = self.walker.cursor();
        let dist = interpret(utterance, node.map(|i| self.assets.ontology.node(i)));
        let observation = if exiting { DialogueObservation::Exit } else { dist.argmax() };

        let prev_action = self.last_action.unwrap_or(DialogueAction::AdvancePrompt);
        let o_id = ObservationId(observation.index());
        let current = &self.history.last().expect("history is seeded").belief;
        let candidate = self.assets.model.update_belief(current, prev_action.id(), o_id);
        let validation = self.history.validate_or_rollback(&self.rules, candidate, Some(o_id));
        self.history.commit(&validation, Some(prev_action.id()), Some(o_id));
        self.turn += 1;

        let (ncp, ratio) = self.trend();
        let level = match ratio {
            Some(r) => classify_level(r).expect("ratio lies in [0, 1]"),
            None => KnowledgeLevel::Amateur,
        };
        let mode = select_mode(level);
        let belief = validation.belief.clone();

        let (action_label, reply, reward, action) = if exiting {
            let r = sentiment::to_reward(class, false, &self.config.reward).value;
            if let (Some((s, a)), false) = (self.pending.take(), self.goal_reached) {
                qlearn::update_q_terminal(&mut self.qtable, s, a.id(), r, &self.config.q);
            }
            self.ended = true;
            (FAREWELL_ACTION.to_string(), self.assets.ontology.farewell().to_string(), r, None)
        } else {
            let state = self.space.encode(&DiscreteState {
                node,
                level,
                sentiment: class,
                observation: observation.index(),
            });
            let action = self.choose(state, observation, dist.confidence(), &belief, node.is_some());
            self.last_choice = Some((state, action));
            let was_done = self.goal_reached;
            let reply = self.respond(action, observation);
            let goal_now = self.goal_reached && !was_done;
            let r_step = sentiment::to_reward(class, false, &self.config.reward).value;
            if !was_done {
                if let Some((s, a)) = self.pending.take() {
                    qlearn::update_q(&mut self.qtable, s, a.id(), r_step, state, &self.config.q);
                }
                if goal_now {
                    let bonus = sentiment::to_reward(SentimentClass::Neutral, true, &self.config.reward).value;
                    qlearn::update_q_terminal(&mut self.qtable, state, action.id(), bonus, &self.config.q);
                } else {
                    self.pending = Some((state, action));
                }
            }
            let reward = sentiment::to_reward(class, goal_now, &self.config.reward).value;
            (action.label().to_string(), reply, reward, Some(action))
        };

        let (emotion, crisp_x) = fuzzy::infer(score.compound, ratio.unwrap_or(DEFAULT_RATIO), &self.famm)
            .expect("inputs are in range and memberships cover the domain");
        let top = belief.argmax();
        let turn = AgentTurn {
            reply,
            action: action_label,
            emotion,
            crisp_x,
            level,
            mode,
            reward,
            sentiment: score,
            belief_top: BeliefTop {
                state: self.assets.model.states()[top.0].clone(),
                probability: belief.get(top),
            },
            ncp,
            accepted: validation.accepted,
        };
        if action.is_some() {
            self.last_action = action;
        }
        self.last_observation = Some(observation);
        self.transcript.push(turn.clone());
        Ok(turn)
    }

    /// Sharp-point count and ratio of the history, or `None` for the ratio
    /// while the history is too short to show any crossing.
    fn trend(&self) -> (usize, Option<f64>) {
        let series = self.history.scalar_series();
        match trend::analyze(&series) {
            Ok(t) if t.dwt.max_crossings() > 0 => (t.ncp, Some(t.ncp_ratio)),
            Ok(t) => (t.ncp, None),
            Err(_) => (0, None),
        }
    }

    fn choose(
        &mut self,
        state: usize,
        observation: DialogueObservation,
        confidence: f64,
        belief: &Belief,
        node_open: bool,
    ) -> DialogueAction {
        match self.config.policy {
            PolicyMode::HandCrafted => hand_crafted(
                &PolicyContext {
                    observation,
                    confidence,
                    belief,
                    previous_action: self.last_action,
                    node_open,
                },
                &self.config.hand_crafted,
            ),
            PolicyMode::Learned => {
                DialogueAction::from_id(qlearn::choose_action(&self.qtable, state, self.epsilon, &mut self.rng))
            }
            PolicyMode::Random => DialogueAction::ALL[self.rng.random_range(0..DialogueAction::ALL.len())],
        }
    }

    /// Produces the reply text and moves the ontology cursor when the user's
    /// answer is acted on.
    fn respond(&mut self, action: DialogueAction, observation: DialogueObservation) -> String {
        let ontology = self.assets.ontology.clone();
        let Some(i) = self.walker.cursor() else {
            return match action {
                DialogueAction::GiveInfo => self.summary(),
                _ => ontology.completion().to_string(),
            };
        };
        let node = ontology.node(i);
        match action {
            DialogueAction::AdvancePrompt => match observation {
                DialogueObservation::Affirm | DialogueObservation::Deny => {
                    let accept = observation == DialogueObservation::Affirm;
                    self.walker.decide(&ontology, accept);
                    let next = self.walker.advance(&ontology);
                    if next.complete {
                        self.goal_reached = true;
                    }
                    let ack = if accept {
                        format!("Okay, {} has been added.", node.name)
                    } else {
                        format!("Okay, {} will not be included.", node.name)
                    };
                    format!("{ack} {}", next.text)
                }
                _ => node.prompt.clone(),
            },
            DialogueAction::GiveInfo => {
                let info = if node.info_text.is_empty() { &node.description } else { &node.info_text };
                [info.as_str(), node.prompt.as_str()]
                    .iter()
                    .filter(|s| !s.is_empty())
                    .copied()
                    .collect::<Vec<_>>()
                    .join(" ")
            }
            DialogueAction::Confirm => match observation {
                DialogueObservation::Deny => format!("Just to confirm, you do not want {}?", node.name),
                _ => format!("Just to confirm, do you want {}?", node.name),
            },
            DialogueAction::Clarify => CLARIFY_TEXT.to_string(),
        }
    }

    fn summary(&self) -> String {
        let ontology = &self.assets.ontology;
        let names: Vec<&str> = self
            .walker
            .accepted(ontology)
            .map(|id| ontology.node(ontology.index_of(id).expect("known id")).name.as_str())
            .collect();
        if names.is_empty() {
            ontology.completion().to_string()
        } else {
            format!("Your system includes: {}. {}", names.join(", "), ontology.completion())
        }
    }
}

/// `exit` or `quit`, ignoring case, surrounding whitespace and punctuation.
pub fn is_exit(utterance: &str) -> bool {
    let t = utterance
        .trim()
        .trim_matches(|c: char| c.is_ascii_punctuation())
        .to_lowercase();
    t == "exit" || t == "quit"
}
