//! Fuzzy mapping from (sentiment, control mode) to the agent's emotion.
//!
//! Each of the 12 rule cells fires with weight `μ_sentiment · μ_mode`; the
//! crisp output is the weighted mean of the cell centroids, snapped to the
//! nearest emotion.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::level::ControlMode;
use crate::sentiment::SentimentClass;

#[derive(Debug, Error, PartialEq)]
pub enum FuzzyError {
    #[error("{what} {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("all rule weights are zero")]
    AllZeroWeights,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Disgust,
    Anger,
    Fear,
    Sad,
    Neutral,
    Surprise,
    Happy,
}

impl Emotion {
    pub const ALL: [Emotion; 7] = [
        Emotion::Disgust,
        Emotion::Anger,
        Emotion::Fear,
        Emotion::Sad,
        Emotion::Neutral,
        Emotion::Surprise,
        Emotion::Happy,
    ];

    pub fn centroid(self) -> f64 {
        match self {
            Emotion::Disgust => 0.0,
            Emotion::Anger => 1.0,
            Emotion::Fear => 2.0,
            Emotion::Sad => 3.0,
            Emotion::Neutral => 3.5,
            Emotion::Surprise => 4.0,
            Emotion::Happy => 5.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion::Disgust => "disgust",
            Emotion::Anger => "anger",
            Emotion::Fear => "fear",
            Emotion::Sad => "sad",
            Emotion::Neutral => "neutral",
            Emotion::Surprise => "surprise",
            Emotion::Happy => "happy",
        }
    }

    /// Neutral, surprise or happy.
    pub fn is_neutral_or_positive(self) -> bool {
        matches!(self, Emotion::Neutral | Emotion::Surprise | Emotion::Happy)
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sentiment rows × control-mode columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FammTable {
    cells: [[Emotion; 4]; 3],
}

impl Default for FammTable {
    fn default() -> Self {
        use Emotion::*;
        Self {
            cells: [
                // strategic, tactical, opportunistic, scrambled
                [Disgust, Anger, Neutral, Fear],
                [Fear, Sad, Surprise, Sad],
                [Happy, Neutral, Surprise, Neutral],
            ],
        }
    }
}

impl FammTable {
    pub fn cell(&self, sentiment: SentimentClass, mode: ControlMode) -> Emotion {
        self.cells[sentiment.index()][mode.index()]
    }
}

/// One weight per rule cell, row-major over (sentiment, mode).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FuzzyWeights {
    pub w: [f64; 12],
}

impl FuzzyWeights {
    pub fn get(&self, sentiment: SentimentClass, mode: ControlMode) -> f64 {
        self.w[sentiment.index() * 4 + mode.index()]
    }

    pub fn total(&self) -> f64 {
        self.w.iter().sum()
    }
}

const MODE_PEAKS: [f64; 4] = [0.125, 0.375, 0.625, 0.875];
const MODE_HALF_WIDTH: f64 = 0.25;

fn triangle(x: f64, peak: f64, half_width: f64) -> f64 {
    (1.0 - (x - peak).abs() / half_width).max(0.0)
}

pub fn sentiment_memberships(compound: f64) -> [f64; 3] {
    [
        (-compound).clamp(0.0, 1.0),
        triangle(compound, 0.0, 0.5),
        compound.clamp(0.0, 1.0),
    ]
}

/// The outer sets are shoulders: full membership beyond their peaks.
pub fn mode_memberships(ratio: f64) -> [f64; 4] {
    let mut mu = MODE_PEAKS.map(|p| triangle(ratio, p, MODE_HALF_WIDTH));
    if ratio <= MODE_PEAKS[0] {
        mu[0] = 1.0;
    }
    if ratio >= MODE_PEAKS[3] {
        mu[3] = 1.0;
    }
    mu
}

pub fn fuzzify(compound: f64, ratio: f64) -> Result<FuzzyWeights, FuzzyError> {
    if !(-1.0..=1.0).contains(&compound) {
        return Err(FuzzyError::OutOfRange { what: "compound", value: compound });
    }
    if !(0.0..=1.0).contains(&ratio) {
        return Err(FuzzyError::OutOfRange { what: "ratio", value: ratio });
    }
    let ms = sentiment_memberships(compound);
    let mm = mode_memberships(ratio);
    let mut w = [0.0; 12];
    for (r, s) in ms.iter().enumerate() {
        for (c, m) in mm.iter().enumerate() {
            w[r * 4 + c] = s * m;
        }
    }
    Ok(FuzzyWeights { w })
}

pub fn defuzzify(weights: &FuzzyWeights, famm: &FammTable) -> Result<f64, FuzzyError> {
    let total = weights.total();
    if total <= 0.0 {
        return Err(FuzzyError::AllZeroWeights);
    }
    let mut acc = 0.0;
    for s in SentimentClass::ALL {
        for m in ControlMode::ALL {
            acc += weights.get(s, m) * famm.cell(s, m).centroid();
        }
    }
    Ok(acc / total)
}

/// Nearest centroid; an exact midpoint goes to the lower emotion.
pub fn crisp_emotion(x: f64) -> Result<Emotion, FuzzyError> {
    if !(0.0..=5.0).contains(&x) {
        return Err(FuzzyError::OutOfRange { what: "crisp value", value: x });
    }
    let mut best = Emotion::ALL[0];
    for e in Emotion::ALL {
        if (x - e.centroid()).abs() < (x - best.centroid()).abs() {
            best = e;
        }
    }
    Ok(best)
}

/// Full pipeline: weights, crisp scalar and emotion.
pub fn infer(compound: f64, ratio: f64, famm: &FammTable) -> Result<(Emotion, f64), FuzzyError> {
    let w = fuzzify(compound, ratio)?;
    let x = defuzzify(&w, famm)?;
    Ok((crisp_emotion(x)?, x))
}
