//! Depth-first walk over undecided ontology nodes.
//!
//! Within each top-level branch, functional nodes are asked in preorder and the
//! branch's quality constraints follow once its functional nodes are settled.
//! Required nodes are accepted without asking and announced in the next
//! prompt.

use serde::Serialize;

use super::{NodeKind, Ontology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Undecided,
    Accepted,
    Rejected,
    /// Never asked: an ancestor was rejected or a conflicting node accepted.
    Excluded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompt {
    pub text: String,
    pub node: Option<usize>,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walker {
    decisions: Vec<Decision>,
    order: Vec<usize>,
    cursor: Option<usize>,
}

impl Walker {
    pub fn new(ontology: &Ontology) -> Self {
        let mut decisions = vec![Decision::Undecided; ontology.len()];
        let mut order = Vec::with_capacity(ontology.len());
        if let Some(root) = ontology.root() {
            decisions[root] = Decision::Accepted;
            for &branch in ontology.children(root) {
                let nodes = ontology.preorder(branch);
                let deferred = |i: &usize| {
                    let mut cur = Some(*i);
                    while let Some(c) = cur {
                        if ontology.node(c).kind == NodeKind::QualityConstraint {
                            return true;
                        }
                        cur = ontology.parent(c);
                    }
                    false
                };
                order.extend(nodes.iter().filter(|i| !deferred(i)));
                order.extend(nodes.iter().filter(|i| deferred(i)));
            }
        }
        Self {
            decisions,
            order,
            cursor: None,
        }
    }

    /// Node currently awaiting a decision.
    pub fn cursor(&self) -> Option<usize> {
        self.cursor
    }

    pub fn is_complete(&self) -> bool {
        self.cursor.is_none() && self.order.iter().all(|&i| self.decisions[i] != Decision::Undecided)
    }

    pub fn decision(&self, i: usize) -> Decision {
        self.decisions[i]
    }

    pub fn decisions(&self) -> &[Decision] {
        &self.decisions
    }

    /// Ids of accepted nodes in visiting order, excluding the root.
    pub fn accepted<'a>(&'a self, ontology: &'a Ontology) -> impl Iterator<Item = &'a str> + 'a {
        self.order
            .iter()
            .filter(|&&i| self.decisions[i] == Decision::Accepted)
            .map(|&i| ontology.node(i).id.as_str())
    }

    /// Records the user's answer for the cursor node. No-op without a cursor.
    pub fn decide(&mut self, ontology: &Ontology, accept: bool) {
        let Some(i) = self.cursor.take() else {
            return;
        };
        if accept {
            self.accept(ontology, i);
        } else {
            self.decisions[i] = Decision::Rejected;
            for d in ontology.preorder(i).into_iter().skip(1) {
                if self.decisions[d] == Decision::Undecided {
                    self.decisions[d] = Decision::Excluded;
                }
            }
        }
    }

    fn accept(&mut self, ontology: &Ontology, i: usize) {
        self.decisions[i] = Decision::Accepted;
        for &c in ontology.conflicts(i) {
            if self.decisions[c] == Decision::Undecided {
                self.decisions[c] = Decision::Excluded;
            }
        }
    }

    /// Moves the cursor to the next undecided node, auto-accepting required
    /// nodes on the way. Returns the agent's next utterance.
    pub fn advance(&mut self, ontology: &Ontology) -> Prompt {
        let mut notices: Vec<String> = Vec::new();
        for pos in 0..self.order.len() {
            let i = self.order[pos];
            if self.decisions[i] != Decision::Undecided {
                continue;
            }
            let node = ontology.node(i);
            if node.kind == NodeKind::Required {
                self.accept(ontology, i);
                if !node.prompt.is_empty() {
                    notices.push(node.prompt.clone());
                }
                continue;
            }
            self.cursor = Some(i);
            notices.push(node.prompt.clone());
            return Prompt {
                text: notices.join(" "),
                node: Some(i),
                complete: false,
            };
        }
        self.cursor = None;
        notices.push(ontology.completion().to_string());
        Prompt {
            text: notices.join(" "),
            node: None,
            complete: true,
        }
    }
}
