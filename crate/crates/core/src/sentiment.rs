//! Lexicon-based sentiment scoring and the reward signal derived from it.
//!
//! Scoring follows the familiar compound-score recipe: token valences from a
//! flat lexicon are summed (with single-token negation and an exclamation
//! boost) and squashed with `s / sqrt(s² + 15)`. The `neg`/`neu`/`pos`
//! proportions weigh each scored token by `|valence| + 1` and each unscored
//! token by 1.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Normalization constant of the compound score.
const ALPHA: f64 = 15.0;
/// Added per exclamation mark (at most [`MAX_EXCLAMATIONS`]).
const EXCLAMATION_BOOST: f64 = 0.292;
const MAX_EXCLAMATIONS: usize = 3;
/// Multiplier applied to the scored token following a negator.
const NEGATION_SCALAR: f64 = -0.74;
/// A negator reaches at most this many tokens ahead.
const NEGATION_REACH: usize = 3;

const NEGATORS: &[&str] = &[
    "no", "not", "don't", "dont", "never", "nor", "cannot", "can't", "won't", "doesn't", "isn't",
    "didn't",
];

#[derive(Debug, Error, PartialEq)]
pub enum SentimentError {
    #[error("utterance is empty")]
    EmptyInput,
    #[error("lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },
}

/// Token → valence table, valences in `[-4, 4]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    valences: HashMap<String, f64>,
}

impl Lexicon {
    /// Parses `token<TAB>valence` lines. Blank lines and `#` comments are
    /// ignored; duplicate tokens are an error.
    pub fn parse(text: &str) -> Result<Self, SentimentError> {
        let mut valences = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| SentimentError::Lexicon { line, message };
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            let (token, value) = raw
                .split_once('\t')
                .ok_or_else(|| err("expected `token<TAB>valence`".into()))?;
            let token = token.trim();
            if token.is_empty() || token.chars().any(char::is_whitespace) {
                return Err(err(format!("invalid token `{token}`")));
            }
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| err(format!("invalid valence `{}`", value.trim())))?;
            if !(-4.0..=4.0).contains(&value) {
                return Err(err(format!("valence {value} outside [-4, 4]")));
            }
            let token = token.to_lowercase();
            if valences.insert(token.clone(), value).is_some() {
                return Err(err(format!("duplicate token `{token}`")));
            }
        }
        Ok(Self { valences })
    }

    pub fn valence(&self, token: &str) -> Option<f64> {
        self.valences.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub compound: f64,
    pub neg: f64,
    pub neu: f64,
    pub pos: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentClass {
    Negative,
    Neutral,
    Positive,
}

impl SentimentClass {
    pub const ALL: [SentimentClass; 3] = [
        SentimentClass::Negative,
        SentimentClass::Neutral,
        SentimentClass::Positive,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SentimentClass::Negative => "negative",
            SentimentClass::Neutral => "neutral",
            SentimentClass::Positive => "positive",
        }
    }
}

impl fmt::Display for SentimentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

struct Token {
    text: String,
    /// The raw word ended a clause (`,` `.` `;` `:` `!` `?`).
    ends_clause: bool,
}

fn tokenize(text: &str) -> Vec<Token> {
    text.split_whitespace()
        .filter_map(|raw| {
            let ends_clause = raw.ends_with([',', '.', ';', ':', '!', '?']);
            let word = raw
                .trim_matches(|c: char| !c.is_alphanumeric() && c != '\'')
                .trim_matches('\'')
                .to_lowercase();
            // Single characters ("i", "a") carry no sentiment and would only
            // dilute the proportions.
            (word.chars().count() > 1).then_some(Token {
                text: word,
                ends_clause,
            })
        })
        .collect()
}

pub fn score_utterance(text: &str, lexicon: &Lexicon) -> Result<SentimentScore, SentimentError> {
    if text.trim().is_empty() {
        return Err(SentimentError::EmptyInput);
    }
    let tokens = tokenize(text);
    let mut valences = Vec::with_capacity(tokens.len());
    let mut negation_left = 0usize;
    for tok in &tokens {
        let is_negator = NEGATORS.contains(&tok.text.as_str());
        let mut v = lexicon.valence(&tok.text).unwrap_or(0.0);
        if negation_left > 0 && v != 0.0 && !is_negator {
            v *= NEGATION_SCALAR;
            negation_left = 0;
        } else {
            negation_left = negation_left.saturating_sub(1);
        }
        if is_negator {
            negation_left = NEGATION_REACH;
        }
        if tok.ends_clause {
            negation_left = 0;
        }
        valences.push(v);
    }

    let mut sum: f64 = valences.iter().sum();
    let bangs = text.matches('!').count().min(MAX_EXCLAMATIONS);
    let emphasis = bangs as f64 * EXCLAMATION_BOOST;
    if sum > 0.0 {
        sum += emphasis;
    } else if sum < 0.0 {
        sum -= emphasis;
    }
    let compound = (sum / (sum * sum + ALPHA).sqrt()).clamp(-1.0, 1.0);

    let mut pos_sum = 0.0;
    let mut neg_sum = 0.0;
    let mut neu_count = 0.0;
    for v in &valences {
        if *v > 0.0 {
            pos_sum += v + 1.0;
        } else if *v < 0.0 {
            neg_sum += v - 1.0;
        } else {
            neu_count += 1.0;
        }
    }
    if pos_sum > neg_sum.abs() {
        pos_sum += emphasis;
    } else if pos_sum < neg_sum.abs() {
        neg_sum -= emphasis;
    }
    let total = pos_sum + neg_sum.abs() + neu_count;
    let (neg, neu, pos) = if total > 0.0 {
        (
            round(neg_sum.abs() / total, 3),
            round(neu_count / total, 3),
            round(pos_sum / total, 3),
        )
    } else {
        (0.0, 1.0, 0.0)
    };
    Ok(SentimentScore {
        compound: round(compound, 4),
        neg,
        neu,
        pos,
    })
}

fn round(x: f64, digits: i32) -> f64 {
    let f = 10f64.powi(digits);
    (x * f).round() / f
}

/// Compound at or above `+0.05` is positive, at or below `-0.05` negative.
pub fn classify(score: &SentimentScore) -> SentimentClass {
    classify_compound(score.compound)
}

pub fn classify_compound(compound: f64) -> SentimentClass {
    if compound >= 0.05 {
        SentimentClass::Positive
    } else if compound <= -0.05 {
        SentimentClass::Negative
    } else {
        SentimentClass::Neutral
    }
}

/// Reward constants. Every non-terminal turn pays `step_penalty`; the turn
/// that reaches the goal earns `goal_bonus` instead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardConfig {
    pub positive: f64,
    pub neutral: f64,
    pub negative: f64,
    pub step_penalty: f64,
    pub goal_bonus: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            positive: 1.0,
            neutral: 0.0,
            negative: -1.0,
            step_penalty: -0.1,
            goal_bonus: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardSignal {
    pub value: f64,
    pub class: SentimentClass,
    pub turn_penalty_applied: bool,
}

pub fn to_reward(class: SentimentClass, is_terminal_goal: bool, cfg: &RewardConfig) -> RewardSignal {
    let base = match class {
        SentimentClass::Positive => cfg.positive,
        SentimentClass::Neutral => cfg.neutral,
        SentimentClass::Negative => cfg.negative,
    };
    let value = if is_terminal_goal {
        base + cfg.goal_bonus
    } else {
        base + cfg.step_penalty
    };
    RewardSignal {
        value,
        class,
        turn_penalty_applied: !is_terminal_goal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lexicon() -> Lexicon {
        Lexicon::parse(crate::assets::DEFAULT_LEXICON).unwrap()
    }

    fn score(text: &str) -> SentimentScore {
        score_utterance(text, &lexicon()).unwrap()
    }

    #[test]
    fn bare_question_is_neutral() {
        let s = score("What?");
        assert_eq!(s.compound, 0.0);
        assert_eq!(s.neu, 1.0);
    }

    #[test]
    fn positive_exclamation_of_approval() {
        let s = score("That's great.");
        assert_eq!(classify(&s), SentimentClass::Positive);
        assert!((s.compound - 0.6249).abs() <= 0.15);
    }

    #[test]
    fn polite_refusal_is_negative() {
        let s = score("No, i don't think so.");
        assert!(s.compound < 0.0);
        assert_eq!(classify(&s), SentimentClass::Negative);
    }

    #[test]
    fn proportions_sum_to_one() {
        for text in ["Yes i would love to know more.", "No.", "Terrible, awful, but great!"] {
            let s = score(text);
            assert!((s.neg + s.neu + s.pos - 1.0).abs() <= 0.01, "{text}: {s:?}");
        }
    }

    #[test]
    fn negation_flips_the_next_scored_token() {
        assert!(score("this is good").compound > 0.0);
        assert!(score("this is not good").compound < 0.0);
        // The clause boundary ends the negation scope.
        assert!(score("Not now, this is good").compound > 0.0);
    }

    #[test]
    fn exclamations_amplify_up_to_three() {
        let one = score("good!").compound;
        let none = score("good").compound;
        let three = score("good!!!").compound;
        let five = score("good!!!!!").compound;
        assert!(one > none);
        assert!(three > one);
        assert_eq!(three, five);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert_eq!(score_utterance("   ", &lexicon()), Err(SentimentError::EmptyInput));
    }

    #[test]
    fn class_cutoffs() {
        assert_eq!(classify_compound(0.6249), SentimentClass::Positive);
        assert_eq!(classify_compound(0.0), SentimentClass::Neutral);
        assert_eq!(classify_compound(-0.296), SentimentClass::Negative);
        assert_eq!(classify_compound(0.05), SentimentClass::Positive);
        assert_eq!(classify_compound(-0.05), SentimentClass::Negative);
        assert_eq!(classify_compound(0.0499), SentimentClass::Neutral);
    }

    #[test]
    fn reward_constants() {
        let cfg = RewardConfig::default();
        let r = to_reward(SentimentClass::Positive, false, &cfg);
        assert!((r.value - 0.9).abs() < 1e-12);
        assert!(r.turn_penalty_applied);
        let r = to_reward(SentimentClass::Neutral, true, &cfg);
        assert_eq!(r.value, 5.0);
        assert!(!r.turn_penalty_applied);
        let r = to_reward(SentimentClass::Negative, false, &cfg);
        assert!((r.value + 1.1).abs() < 1e-12);
        // Ten neutral turns cost one unit.
        let total: f64 = (0..10).map(|_| to_reward(SentimentClass::Neutral, false, &cfg).value).sum();
        assert!((total + 1.0).abs() < 1e-12);
    }

    #[test]
    fn lexicon_format_errors() {
        assert!(matches!(
            Lexicon::parse("good\t1.9\ngood\t2.0"),
            Err(SentimentError::Lexicon { line: 2, .. })
        ));
        assert!(matches!(
            Lexicon::parse("# comment\ngood 1.9"),
            Err(SentimentError::Lexicon { line: 2, .. })
        ));
        assert!(matches!(
            Lexicon::parse("good\t9"),
            Err(SentimentError::Lexicon { line: 1, .. })
        ));
        let lex = Lexicon::parse("# header\n\nGood\t1.9\nbad\t-2.5\n").unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.valence("good"), Some(1.9));
    }

    proptest! {
        #[test]
        fn compound_is_bounded(words in prop::collection::vec("[a-z!?,.]{1,8}", 1..20)) {
            let text = words.join(" ");
            prop_assume!(!text.trim().is_empty());
            let s = score_utterance(&text, &lexicon()).unwrap();
            prop_assert!((-1.0..=1.0).contains(&s.compound));
        }

        #[test]
        fn unknown_token_keeps_sign(
            base in prop::sample::select(vec![
                "yes please add it", "no thanks", "that is terrible", "what is this",
                "this is not good", "great", "okay sure",
            ]),
            filler in "zq[a-z]{2,6}",
            at_end in any::<bool>(),
        ) {
            let with = if at_end { format!("{base} {filler}") } else { format!("{filler} {base}") };
            let a = score(base).compound;
            let b = score(&with).compound;
            prop_assert_eq!(a.signum(), b.signum());
        }

        #[test]
        fn classify_is_monotone(a in -1.0f64..=1.0, b in -1.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(classify_compound(lo) <= classify_compound(hi));
        }
    }
}
