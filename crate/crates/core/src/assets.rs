//! Shipped domain files and loading of replacements from disk.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::ontology::{DialogueObservation, IntentionState, Ontology, OntologyError};
use crate::policy::DialogueAction;
use crate::pomdp::{PomdpError, PomdpModel};
use crate::sentiment::{Lexicon, SentimentError};

pub const DEFAULT_ONTOLOGY: &str = include_str!("../assets/ontology.json");
pub const DEFAULT_MODEL: &str = include_str!("../assets/model.json");
pub const DEFAULT_LEXICON: &str = include_str!("../assets/lexicon.tsv");
pub const DEFAULT_PROFILES: &str = include_str!("../assets/profiles.json");

#[derive(Debug, Error)]
pub enum AssetError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("ontology: {0}")]
    Ontology(#[from] OntologyError),
    #[error("model: {0}")]
    Model(#[from] PomdpError),
    #[error("lexicon: {0}")]
    Lexicon(#[from] SentimentError),
    #[error("model does not fit the dialogue engine: {0}")]
    Incompatible(String),
}

/// Immutable inputs shared by every session.
#[derive(Debug, Clone)]
pub struct Assets {
    pub ontology: Arc<Ontology>,
    pub model: Arc<PomdpModel>,
    pub lexicon: Arc<Lexicon>,
}

impl Assets {
    pub fn shipped() -> Self {
        Self::from_strs(DEFAULT_ONTOLOGY, DEFAULT_MODEL, DEFAULT_LEXICON).expect("shipped assets are valid")
    }

    pub fn from_strs(ontology: &str, model: &str, lexicon: &str) -> Result<Self, AssetError> {
        let model = PomdpModel::from_json(model)?;
        check_model(&model)?;
        Ok(Self {
            ontology: Arc::new(Ontology::from_json(ontology)?),
            model: Arc::new(model),
            lexicon: Arc::new(Lexicon::parse(lexicon)?),
        })
    }

    /// Loads each file that is given and falls back to the shipped one otherwise.
    pub fn load(
        ontology: Option<&Path>,
        model: Option<&Path>,
        lexicon: Option<&Path>,
    ) -> Result<Self, AssetError> {
        let ontology = read_or(ontology, DEFAULT_ONTOLOGY)?;
        let model = read_or(model, DEFAULT_MODEL)?;
        let lexicon = read_or(lexicon, DEFAULT_LEXICON)?;
        Self::from_strs(&ontology, &model, &lexicon)
    }
}

pub fn read_or(path: Option<&Path>, fallback: &str) -> Result<String, AssetError> {
    match path {
        Some(p) => fs::read_to_string(p).map_err(|source| AssetError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => Ok(fallback.to_string()),
    }
}

fn check_model(model: &PomdpModel) -> Result<(), AssetError> {
    let states: Vec<&str> = IntentionState::ALL.iter().map(|s| s.label()).collect();
    let observations: Vec<&str> = DialogueObservation::ALL.iter().map(|o| o.label()).collect();
    if model.states() != states.as_slice() {
        return Err(AssetError::Incompatible(format!("states must be {states:?}")));
    }
    if model.observations() != observations.as_slice() {
        return Err(AssetError::Incompatible(format!("observations must be {observations:?}")));
    }
    if !DialogueAction::matches_model(model) {
        let actions: Vec<&str> = DialogueAction::ALL.iter().map(|a| a.label()).collect();
        return Err(AssetError::Incompatible(format!("actions must be {actions:?}")));
    }
    Ok(())
}
