//! Requirement ontology: a tree of features the user accepts or rejects,
//! plus symmetric conflicts between quality constraints.

mod nlu;
mod walker;

pub use nlu::{interpret, DialogueObservation, IntentionState, ObservationDistribution};
pub use walker::{Decision, Prompt, Walker};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_COMPLETION: &str = "The customization process is complete. Thank you for your cooperation.";
pub const DEFAULT_FAREWELL: &str = "Thank you and see you soon.";

#[derive(Debug, Error, PartialEq)]
pub enum OntologyError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("line {line}: duplicate node id `{id}`")]
    DuplicateId { id: String, line: usize },
    #[error("line {line}: node `{id}` is part of a cycle")]
    CycleDetected { id: String, line: usize },
    #[error("line {line}: node `{from}` references missing node `{to}`")]
    DanglingReference { from: String, to: String, line: usize },
    #[error("line {line}: `{a}` conflicts with `{b}` but not the other way round")]
    AsymmetricConflict { a: String, b: String, line: usize },
    #[error("line {line}: node `{id}` has more than one parent")]
    MultipleParents { id: String, line: usize },
    #[error("ontology has {0} root nodes; exactly one is required")]
    MultipleRoots(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Required,
    Optional,
    QualityConstraint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OntologyNode {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub kind: NodeKind,
    #[serde(default)]
    pub children: Vec<String>,
    #[serde(default)]
    pub conflicts_with: Vec<String>,
    /// Question for optional nodes; notice for required ones.
    #[serde(default)]
    pub prompt: String,
    #[serde(default)]
    pub info_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OntologyDocument {
    #[serde(default)]
    pub greeting: String,
    #[serde(default = "default_completion")]
    pub completion: String,
    #[serde(default = "default_farewell")]
    pub farewell: String,
    pub nodes: Vec<OntologyNode>,
}

fn default_completion() -> String {
    DEFAULT_COMPLETION.to_string()
}

fn default_farewell() -> String {
    DEFAULT_FAREWELL.to_string()
}

/// Validated ontology with index-based links.
#[derive(Debug, Clone, PartialEq)]
pub struct Ontology {
    doc: OntologyDocument,
    index: HashMap<String, usize>,
    children: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    conflicts: Vec<Vec<usize>>,
    root: Option<usize>,
}

impl Ontology {
    pub fn from_json(text: &str) -> Result<Self, OntologyError> {
        let doc: OntologyDocument = serde_json::from_str(text).map_err(|e| OntologyError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::from_document_with_source(doc, Some(text))
    }

    pub fn from_document(doc: OntologyDocument) -> Result<Self, OntologyError> {
        Self::from_document_with_source(doc, None)
    }

    fn from_document_with_source(doc: OntologyDocument, source: Option<&str>) -> Result<Self, OntologyError> {
        let line_of = |id: &str| source.map_or(0, |s| find_line(s, id));
        let n = doc.nodes.len();

        let mut index = HashMap::with_capacity(n);
        for (i, node) in doc.nodes.iter().enumerate() {
            if index.insert(node.id.clone(), i).is_some() {
                return Err(OntologyError::DuplicateId {
                    id: node.id.clone(),
                    line: line_of(&node.id),
                });
            }
        }
        let resolve = |from: &str, to: &str| {
            index.get(to).copied().ok_or_else(|| OntologyError::DanglingReference {
                from: from.to_string(),
                to: to.to_string(),
                line: line_of(from),
            })
        };

        let mut children = vec![Vec::new(); n];
        let mut conflicts = vec![Vec::new(); n];
        let mut parent = vec![None; n];
        for (i, node) in doc.nodes.iter().enumerate() {
            for c in &node.children {
                let j = resolve(&node.id, c)?;
                if j == i {
                    return Err(OntologyError::CycleDetected {
                        id: node.id.clone(),
                        line: line_of(&node.id),
                    });
                }
                if parent[j].is_some() {
                    return Err(OntologyError::MultipleParents {
                        id: c.clone(),
                        line: line_of(c),
                    });
                }
                parent[j] = Some(i);
                children[i].push(j);
            }
            for c in &node.conflicts_with {
                conflicts[i].push(resolve(&node.id, c)?);
            }
        }
        for (i, cs) in conflicts.iter().enumerate() {
            for &j in cs {
                if !conflicts[j].contains(&i) {
                    return Err(OntologyError::AsymmetricConflict {
                        a: doc.nodes[i].id.clone(),
                        b: doc.nodes[j].id.clone(),
                        line: line_of(&doc.nodes[i].id),
                    });
                }
            }
        }

        // Every node must reach a parentless node; otherwise it sits on a cycle.
        for start in 0..n {
            let mut cur = start;
            let mut steps = 0;
            while let Some(p) = parent[cur] {
                cur = p;
                steps += 1;
                if steps > n {
                    return Err(OntologyError::CycleDetected {
                        id: doc.nodes[start].id.clone(),
                        line: line_of(&doc.nodes[start].id),
                    });
                }
            }
        }
        let roots: Vec<usize> = (0..n).filter(|&i| parent[i].is_none()).collect();
        if roots.len() > 1 {
            return Err(OntologyError::MultipleRoots(roots.len()));
        }

        Ok(Self {
            root: roots.first().copied(),
            doc,
            index,
            children,
            parent,
            conflicts,
        })
    }

    pub fn document(&self) -> &OntologyDocument {
        &self.doc
    }

    pub fn len(&self) -> usize {
        self.doc.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc.nodes.is_empty()
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn node(&self, i: usize) -> &OntologyNode {
        &self.doc.nodes[i]
    }

    pub fn nodes(&self) -> &[OntologyNode] {
        &self.doc.nodes
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn conflicts(&self, i: usize) -> &[usize] {
        &self.conflicts[i]
    }

    pub fn greeting(&self) -> &str {
        &self.doc.greeting
    }

    pub fn completion(&self) -> &str {
        &self.doc.completion
    }

    pub fn farewell(&self) -> &str {
        &self.doc.farewell
    }

    /// Preorder listing of the subtree rooted at `i`, including `i`.
    pub fn preorder(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![i];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.children[n].iter().rev());
        }
        out
    }
}

/// 1-based line of the first `"id"` occurrence in `source`, or 0.
fn find_line(source: &str, id: &str) -> usize {
    let needle = format!("\"{id}\"");
    source
        .find(&needle)
        .map_or(0, |pos| source[..pos].matches('\n').count() + 1)
}
