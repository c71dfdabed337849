//! Simulated-user experiments: episode runner, profile metrics and policy
//! comparison.

mod report;
mod user;

pub use report::{write_policy_csv, write_report, write_traces};
pub use user::{sample_turn_kind, Intent, SimUser, TurnKind, Utterance};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assets::Assets;
use crate::engine::{EngineConfig, EngineError, Session};
use crate::level::KnowledgeLevel;
use crate::policy::{DialogueAction, PolicyMode};
use crate::qlearn::{self, QTable};

/// Episodes that have not reached the goal after this many user turns fail.
pub const TURN_CAP: usize = 40;
const TRAINING_SEED_OFFSET: u64 = 0x7261_696e;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("profiles: {0}")]
    Profiles(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Templates {
    pub affirm: Vec<String>,
    pub deny: Vec<String>,
    pub request_info: Vec<String>,
    pub offscript: Vec<String>,
    pub negative_affirm: Vec<String>,
    pub negative_deny: Vec<String>,
    pub negative_request_info: Vec<String>,
    pub negative_offscript: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub name: String,
    pub level_target: KnowledgeLevel,
    pub p_request_info: f64,
    pub p_offscript: f64,
    pub p_negative_sentiment: f64,
    /// Chance the user wants any given optional feature.
    #[serde(default = "default_p_accept")]
    pub p_accept: f64,
}

fn default_p_accept() -> f64 {
    0.75
}

/// Profiles plus the utterance templates they share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSet {
    pub templates: Templates,
    pub profiles: Vec<UserProfile>,
}

impl ProfileSet {
    pub fn shipped() -> Self {
        Self::from_json(crate::assets::DEFAULT_PROFILES).expect("shipped profiles are valid")
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let set: Self = serde_json::from_str(text).map_err(|e| SimError::Profiles(e.to_string()))?;
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Profiles(m));
        for p in &self.profiles {
            let ps = [p.p_request_info, p.p_offscript, p.p_negative_sentiment, p.p_accept];
            if ps.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return bad(format!("{}: probabilities must lie in [0, 1]", p.name));
            }
            if p.p_request_info + p.p_offscript + p.p_negative_sentiment > 1.0 + 1e-12 {
                return bad(format!("{}: noise probabilities sum above 1", p.name));
            }
        }
        let mut ordered = self.profiles.clone();
        ordered.sort_by_key(|p| p.level_target);
        for pair in ordered.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.p_request_info > b.p_request_info
                || a.p_offscript > b.p_offscript
                || a.p_negative_sentiment > b.p_negative_sentiment
            {
                return bad(format!("{} is noisier than {}", a.name, b.name));
            }
        }
        Ok(())
    }

    pub fn profile(&self, level: KnowledgeLevel) -> Option<&UserProfile> {
        self.profiles.iter().find(|p| p.level_target == level)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeRecord {
    pub profile: String,
    pub episode: usize,
    pub turns: usize,
    pub reached_goal: bool,
    pub episode_return: f64,
    pub neutral_positive_turns: usize,
    pub rewards: Vec<f64>,
    pub q_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileMetrics {
    pub profile: String,
    pub accuracy_pct: f64,
    pub avg_dialogue_length: f64,
    pub neutral_positive_pct: f64,
    pub mean_return: f64,
    pub episodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    /// One row per profile followed by the average row.
    pub rows: Vec<ProfileMetrics>,
    #[serde(skip)]
    pub episodes: Vec<EpisodeRecord>,
}

/// Which policy drives the agent in an episode.
#[derive(Debug, Clone)]
pub enum PolicySpec {
    HandCrafted,
    Random,
    Learned(QTable),
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::HandCrafted => "hand-crafted",
            PolicySpec::Random => "random",
            PolicySpec::Learned(_) => "learned",
        }
    }
}

/// Per-episode seeds for the engine and the simulated user.
pub fn episode_seeds(master: u64, profile: usize, episode: usize) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((profile as u64) << 32) | episode as u64);
    (rng.random(), rng.random())
}

/// Runs one episode and hands back the session's Q-table.
pub fn run_episode(
    assets: &Assets,
    config: &EngineConfig,
    set: &ProfileSet,
    profile: &UserProfile,
    qtable: Option<QTable>,
    epsilon: f64,
    seeds: (u64, u64),
) -> Result<(EpisodeRecord, QTable), SimError> {
    let mut session = match qtable {
        Some(q) => Session::with_qtable(assets.clone(), config.clone(), seeds.0, q)?,
        None => Session::new(assets.clone(), config.clone(), seeds.0)?,
    };
    session.set_epsilon(epsilon);
    let mut user = SimUser::new(profile, &set.templates, ChaCha8Rng::seed_from_u64(seeds.1));
    let mut rewards = Vec::new();
    let mut q_values = Vec::new();
    let mut neutral_positive = 0;
    let mut agent_action: Option<DialogueAction> = None;
    while !session.goal_reached() && session.turn() < TURN_CAP {
        let utterance = user.respond(session.current_node(), agent_action);
        let turn = session.step(&utterance.text)?;
        rewards.push(turn.reward);
        q_values.push(session.last_q_value().unwrap_or(0.0));
        if turn.emotion.is_neutral_or_positive() {
            neutral_positive += 1;
        }
        agent_action = session.last_action();
    }
    let record = EpisodeRecord {
        profile: profile.name.clone(),
        episode: 0,
        turns: session.turn().max(1),
        reached_goal: session.goal_reached(),
        episode_return: qlearn::episode_return(&rewards, config.q.gamma),
        neutral_positive_turns: neutral_positive,
        rewards,
        q_values,
    };
    Ok((record, session.into_qtable()))
}

fn config_for(base: &EngineConfig, spec: &PolicySpec) -> EngineConfig {
    let mut cfg = base.clone();
    cfg.policy = match spec {
        PolicySpec::HandCrafted => PolicyMode::HandCrafted,
        PolicySpec::Random => PolicyMode::Random,
        PolicySpec::Learned(_) => PolicyMode::Learned,
    };
    cfg
}

/// Runs `episodes` episodes of one profile with a frozen policy.
pub fn evaluate(
    assets: &Assets,
    base: &EngineConfig,
    set: &ProfileSet,
    profile_index: usize,
    spec: &PolicySpec,
    episodes: usize,
    seed: u64,
) -> Result<Vec<EpisodeRecord>, SimError> {
    let profile = &set.profiles[profile_index];
    let mut cfg = config_for(base, spec);
    cfg.q.alpha = 0.0;
    let mut out = Vec::with_capacity(episodes);
    for e in 0..episodes {
        let table = match spec {
            PolicySpec::Learned(q) => Some(q.clone()),
            _ => None,
        };
        let (mut rec, _) = run_episode(assets, &cfg, set, profile, table, 0.0, episode_seeds(seed, profile_index, e))?;
        rec.episode = e;
        out.push(rec);
    }
    Ok(out)
}

pub fn summarize(profile: &str, records: &[EpisodeRecord]) -> ProfileMetrics {
    let n = records.len().max(1) as f64;
    let turns: usize = records.iter().map(|r| r.turns).sum();
    let np: usize = records.iter().map(|r| r.neutral_positive_turns).sum();
    ProfileMetrics {
        profile: profile.to_string(),
        accuracy_pct: 100.0 * records.iter().filter(|r| r.reached_goal).count() as f64 / n,
        avg_dialogue_length: turns as f64 / n,
        neutral_positive_pct: if turns == 0 { 0.0 } else { 100.0 * np as f64 / turns as f64 },
        mean_return: records.iter().map(|r| r.episode_return).sum::<f64>() / n,
        episodes: records.len(),
    }
}

fn average_row(rows: &[ProfileMetrics]) -> ProfileMetrics {
    let n = rows.len().max(1) as f64;
    let mean = |f: fn(&ProfileMetrics) -> f64| rows.iter().map(f).sum::<f64>() / n;
    ProfileMetrics {
        profile: "average".to_string(),
        accuracy_pct: mean(|r| r.accuracy_pct),
        avg_dialogue_length: mean(|r| r.avg_dialogue_length),
        neutral_positive_pct: mean(|r| r.neutral_positive_pct),
        mean_return: mean(|r| r.mean_return),
        episodes: rows.iter().map(|r| r.episodes).sum(),
    }
}

/// Profiles are reported from most to least knowledgeable, then the average.
fn profile_order(set: &ProfileSet) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..set.profiles.len()).collect();
    idx.sort_by_key(|&i| set.profiles[i].level_target);
    idx
}

pub fn run_experiment(
    assets: &Assets,
    config: &EngineConfig,
    set: &ProfileSet,
    spec: &PolicySpec,
    episodes: usize,
    seed: u64,
) -> Result<ExperimentReport, SimError> {
    let mut rows = Vec::new();
    let mut all = Vec::new();
    for i in profile_order(set) {
        let records = evaluate(assets, config, set, i, spec, episodes, seed)?;
        rows.push(summarize(&set.profiles[i].name, &records));
        all.extend(records);
    }
    rows.push(average_row(&rows));
    Ok(ExperimentReport { rows, episodes: all })
}

/// Trains a Q-table on one profile with an epsilon-greedy learner.
pub fn train_policy(
    assets: &Assets,
    config: &EngineConfig,
    set: &ProfileSet,
    profile_index: usize,
    episodes: usize,
    seed: u64,
) -> Result<QTable, SimError> {
    let mut cfg = config.clone();
    cfg.policy = PolicyMode::Learned;
    let profile = &set.profiles[profile_index];
    // Training episodes must not reuse the evaluation seeds.
    let training_seed = seed.wrapping_add(TRAINING_SEED_OFFSET);
    let mut table = None;
    for e in 0..episodes {
        let epsilon = cfg.q.epsilon_after(e as u32);
        let seeds = episode_seeds(training_seed, profile_index, e);
        let (_, q) = run_episode(assets, &cfg, set, profile, table.take(), epsilon, seeds)?;
        table = Some(q);
    }
    match table {
        Some(q) => Ok(q),
        None => Ok(Session::new(assets.clone(), cfg, seed)?.into_qtable()),
    }
}


#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyStats {
    pub mean_return: f64,
    pub avg_dialogue_length: f64,
    pub accuracy_pct: f64,
}

impl From<&ProfileMetrics> for PolicyStats {
    fn from(m: &ProfileMetrics) -> Self {
        Self {
            mean_return: m.mean_return,
            avg_dialogue_length: m.avg_dialogue_length,
            accuracy_pct: m.accuracy_pct,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyComparison {
    pub profile: String,
    pub hand_crafted: PolicyStats,
    pub learned: PolicyStats,
    pub random: PolicyStats,
    /// Learned return at least matches the hand-crafted one.
    pub improved: bool,
}

/// Trains one table per profile, then evaluates hand-crafted, learned and
/// random policies on identical episode seeds.
pub fn policy_improvement_report(
    assets: &Assets,
    config: &EngineConfig,
    set: &ProfileSet,
    train_episodes: usize,
    eval_episodes: usize,
    seed: u64,
) -> Result<Vec<PolicyComparison>, SimError> {
    let mut rows = Vec::new();
    for i in profile_order(set) {
        let name = &set.profiles[i].name;
        let table = train_policy(assets, config, set, i, train_episodes, seed)?;
        let stats = |spec: &PolicySpec| -> Result<PolicyStats, SimError> {
            let recs = evaluate(assets, config, set, i, spec, eval_episodes, seed)?;
            Ok(PolicyStats::from(&summarize(name, &recs)))
        };
        let hand_crafted = stats(&PolicySpec::HandCrafted)?;
        let learned = stats(&PolicySpec::Learned(table))?;
        let random = stats(&PolicySpec::Random)?;
        rows.push(PolicyComparison {
            profile: name.clone(),
            improved: learned.mean_return >= hand_crafted.mean_return,
            hand_crafted,
            learned,
            random,
        });
    }
    let n = rows.len().max(1) as f64;
    let avg = |f: fn(&PolicyComparison) -> &PolicyStats| PolicyStats {
        mean_return: rows.iter().map(|r| f(r).mean_return).sum::<f64>() / n,
        avg_dialogue_length: rows.iter().map(|r| f(r).avg_dialogue_length).sum::<f64>() / n,
        accuracy_pct: rows.iter().map(|r| f(r).accuracy_pct).sum::<f64>() / n,
    };
    let (hc, le, ra) = (avg(|r| &r.hand_crafted), avg(|r| &r.learned), avg(|r| &r.random));
    rows.push(PolicyComparison {
        profile: "average".to_string(),
        improved: le.mean_return >= hc.mean_return,
        hand_crafted: hc,
        learned: le,
        random: ra,
    });
    Ok(rows)
}
