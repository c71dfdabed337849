//! Agenda-driven simulated user.

use std::collections::HashMap;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Templates, UserProfile};
use crate::policy::DialogueAction;

/// Chance of frustrated phrasing when the agent ignores what the user said.
const IGNORED_NEGATIVE: f64 = 0.8;
/// Chance of frustrated phrasing when asked to confirm a clear answer.
const CONFIRM_NEGATIVE: f64 = 0.3;

/// Outcome of one categorical draw for a fresh turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TurnKind {
    RequestInfo,
    Offscript,
    /// On-agenda answer with negative phrasing.
    Negative,
    OnAgenda,
}

/// What the user is trying to get across.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Intent {
    Answer { accept: bool },
    RequestInfo,
    Offscript,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Utterance {
    pub text: String,
    pub intent: Intent,
    pub negative: bool,
}

pub fn sample_turn_kind(profile: &UserProfile, rng: &mut impl Rng) -> TurnKind {
    let u: f64 = rng.random();
    let mut edge = profile.p_request_info;
    if u < edge {
        return TurnKind::RequestInfo;
    }
    edge += profile.p_offscript;
    if u < edge {
        return TurnKind::Offscript;
    }
    edge += profile.p_negative_sentiment;
    if u < edge {
        return TurnKind::Negative;
    }
    TurnKind::OnAgenda
}

pub struct SimUser<'a> {
    profile: &'a UserProfile,
    templates: &'a Templates,
    rng: ChaCha8Rng,
    agenda: HashMap<usize, bool>,
    last: Option<Intent>,
}

impl<'a> SimUser<'a> {
    pub fn new(profile: &'a UserProfile, templates: &'a Templates, rng: ChaCha8Rng) -> Self {
        Self {
            profile,
            templates,
            rng,
            agenda: HashMap::new(),
            last: None,
        }
    }

    /// The user's answer for `node`, drawn once and then remembered.
    pub fn wants(&mut self, node: usize) -> bool {
        let p = self.profile.p_accept;
        let rng = &mut self.rng;
        *self.agenda.entry(node).or_insert_with(|| rng.random::<f64>() < p)
    }

    /// Next utterance given the node under discussion and the agent's last act.
    pub fn respond(&mut self, node: Option<usize>, agent_action: Option<DialogueAction>) -> Utterance {
        use DialogueAction::*;
        let (intent, negative) = match (self.last, agent_action) {
            (None, _)
            | (Some(Intent::RequestInfo), Some(GiveInfo))
            | (Some(Intent::Offscript), Some(Clarify))
            | (Some(Intent::Answer { .. }), Some(AdvancePrompt)) => self.fresh(node),
            (Some(answer @ Intent::Answer { .. }), Some(Confirm)) => {
                (answer, self.rng.random::<f64>() < CONFIRM_NEGATIVE)
            }
            (Some(previous), _) => (previous, self.rng.random::<f64>() < IGNORED_NEGATIVE),
        };
        self.last = Some(intent);
        let pool = match (intent, negative) {
            (Intent::Answer { accept: true }, false) => &self.templates.affirm,
            (Intent::Answer { accept: false }, false) => &self.templates.deny,
            (Intent::RequestInfo, false) => &self.templates.request_info,
            (Intent::Offscript, false) => &self.templates.offscript,
            (Intent::Answer { accept: true }, true) => &self.templates.negative_affirm,
            (Intent::Answer { accept: false }, true) => &self.templates.negative_deny,
            (Intent::RequestInfo, true) => &self.templates.negative_request_info,
            (Intent::Offscript, true) => &self.templates.negative_offscript,
        };
        let text = pool.choose(&mut self.rng).cloned().unwrap_or_else(|| "Hmm.".to_string());
        Utterance { text, intent, negative }
    }

    fn fresh(&mut self, node: Option<usize>) -> (Intent, bool) {
        let kind = sample_turn_kind(self.profile, &mut self.rng);
        let accept = node.is_none_or(|n| self.wants(n));
        match kind {
            TurnKind::RequestInfo => (Intent::RequestInfo, false),
            TurnKind::Offscript => (Intent::Offscript, false),
            TurnKind::Negative => (Intent::Answer { accept }, true),
            TurnKind::OnAgenda => (Intent::Answer { accept }, false),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::level::KnowledgeLevel;
    use crate::ontology::{interpret, DialogueObservation};
    use crate::sentiment::{classify, score_utterance, Lexicon, SentimentClass};
    use crate::sim::ProfileSet;
    use rand::SeedableRng;

    fn shipped() -> ProfileSet {
        ProfileSet::from_json(crate::assets::DEFAULT_PROFILES).unwrap()
    }

    #[test]
    fn templates_are_understood_as_intended() {
        let set = shipped();
        let t = &set.templates;
        let lex = Lexicon::parse(crate::assets::DEFAULT_LEXICON).unwrap();
        let groups: [(&Vec<String>, DialogueObservation, bool); 8] = [
            (&t.affirm, DialogueObservation::Affirm, false),
            (&t.deny, DialogueObservation::Deny, false),
            (&t.request_info, DialogueObservation::RequestInfo, false),
            (&t.offscript, DialogueObservation::Unknown, false),
            (&t.negative_affirm, DialogueObservation::Affirm, true),
            (&t.negative_deny, DialogueObservation::Deny, true),
            (&t.negative_request_info, DialogueObservation::RequestInfo, true),
            (&t.negative_offscript, DialogueObservation::Unknown, true),
        ];
        for (pool, obs, negative) in groups {
            for u in pool {
                assert_eq!(interpret(u, None).argmax(), obs, "{u}");
                let class = classify(&score_utterance(u, &lex).unwrap());
                assert_eq!(class == SentimentClass::Negative, negative, "{u}: {class}");
            }
        }
    }

    #[test]
    fn noiseless_profile_always_answers() {
        let set = shipped();
        let expert = set.profile(KnowledgeLevel::Expert).unwrap();
        let mut u = SimUser::new(expert, &set.templates, ChaCha8Rng::seed_from_u64(3));
        let mut action = None;
        for node in 0..50 {
            let utt = u.respond(Some(node), action);
            assert!(matches!(utt.intent, Intent::Answer { .. }));
            assert!(!utt.negative);
            action = Some(DialogueAction::AdvancePrompt);
        }
    }

    #[test]
    fn always_offscript_profile() {
        let set = shipped();
        let profile = UserProfile {
            p_request_info: 0.0,
            p_offscript: 1.0,
            p_negative_sentiment: 0.0,
            ..set.profile(KnowledgeLevel::Novice).unwrap().clone()
        };
        let mut u = SimUser::new(&profile, &set.templates, ChaCha8Rng::seed_from_u64(3));
        let mut action = None;
        for _ in 0..50 {
            assert_eq!(u.respond(Some(1), action).intent, Intent::Offscript);
            action = Some(DialogueAction::Clarify);
        }
    }

    #[test]
    fn novice_draw_frequencies() {
        let set = shipped();
        let novice = set.profile(KnowledgeLevel::Novice).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut counts: HashMap<TurnKind, usize> = HashMap::new();
        for _ in 0..100 {
            *counts.entry(sample_turn_kind(novice, &mut rng)).or_default() += 1;
        }
        let freq = |k| *counts.get(&k).unwrap_or(&0) as f64 / 100.0;
        assert!((freq(TurnKind::RequestInfo) - 0.35).abs() <= 0.07, "{counts:?}");
        assert!((freq(TurnKind::Offscript) - 0.20).abs() <= 0.07, "{counts:?}");
        assert!((freq(TurnKind::Negative) - 0.15).abs() <= 0.07, "{counts:?}");
    }

    #[test]
    fn ignored_request_is_repeated() {
        let set = shipped();
        let profile = UserProfile {
            p_request_info: 1.0,
            p_offscript: 0.0,
            p_negative_sentiment: 0.0,
            ..set.profile(KnowledgeLevel::Novice).unwrap().clone()
        };
        let mut u = SimUser::new(&profile, &set.templates, ChaCha8Rng::seed_from_u64(5));
        assert_eq!(u.respond(Some(0), None).intent, Intent::RequestInfo);
        let again = u.respond(Some(0), Some(DialogueAction::AdvancePrompt));
        assert_eq!(again.intent, Intent::RequestInfo);
    }
}
