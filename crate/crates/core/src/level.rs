//! User knowledge level and COCOM control mode.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("ratio {0} is outside [0, 1]")]
pub struct OutOfRange(pub f64);

/// Ordered from most to least knowledgeable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KnowledgeLevel {
    Expert,
    Professional,
    Amateur,
    Novice,
}

impl KnowledgeLevel {
    pub const ALL: [KnowledgeLevel; 4] = [
        KnowledgeLevel::Expert,
        KnowledgeLevel::Professional,
        KnowledgeLevel::Amateur,
        KnowledgeLevel::Novice,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KnowledgeLevel::Expert => "expert",
            KnowledgeLevel::Professional => "professional",
            KnowledgeLevel::Amateur => "amateur",
            KnowledgeLevel::Novice => "novice",
        }
    }
}

impl fmt::Display for KnowledgeLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ordered from most to least planful.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlMode {
    Strategic,
    Tactical,
    Opportunistic,
    Scrambled,
}

impl ControlMode {
    pub const ALL: [ControlMode; 4] = [
        ControlMode::Strategic,
        ControlMode::Tactical,
        ControlMode::Opportunistic,
        ControlMode::Scrambled,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ControlMode::Strategic => "strategic",
            ControlMode::Tactical => "tactical",
            ControlMode::Opportunistic => "opportunistic",
            ControlMode::Scrambled => "scrambled",
        }
    }
}

impl fmt::Display for ControlMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Bands over the sharp-point ratio: `[0, .25)` expert, `[.25, .5)`
/// professional, `[.5, .75)` amateur, `[.75, 1]` novice.
pub fn classify_level(ratio: f64) -> Result<KnowledgeLevel, OutOfRange> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(OutOfRange(ratio));
    }
    Ok(if ratio < 0.25 {
        KnowledgeLevel::Expert
    } else if ratio < 0.5 {
        KnowledgeLevel::Professional
    } else if ratio < 0.75 {
        KnowledgeLevel::Amateur
    } else {
        KnowledgeLevel::Novice
    })
}

pub fn select_mode(level: KnowledgeLevel) -> ControlMode {
    match level {
        KnowledgeLevel::Expert => ControlMode::Strategic,
        KnowledgeLevel::Professional => ControlMode::Tactical,
        KnowledgeLevel::Amateur => ControlMode::Opportunistic,
        KnowledgeLevel::Novice => ControlMode::Scrambled,
    }
}
