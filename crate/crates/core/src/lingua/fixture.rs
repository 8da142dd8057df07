use std::collections::HashMap;

use super::{LinguaAdapter, LinguaError, StubAdapter};
use crate::alignment::{NodeSimilarity, ParseTree, SimMatrix};

/// Adapter backed by registered trees and an explicit similarity.
///
/// Unregistered sentences fall back to the stub parser.
pub struct FixtureAdapter {
    trees: HashMap<String, ParseTree>,
    similarity: Box<dyn NodeSimilarity + Send + Sync>,
}

impl FixtureAdapter {
    pub fn new(similarity: impl NodeSimilarity + Send + Sync + 'static) -> Self {
        Self {
            trees: HashMap::new(),
            similarity: Box::new(similarity),
        }
    }

    /// Registers `tree` under its own token sequence and under `sentence`.
    pub fn with_tree(mut self, sentence: &str, tree: ParseTree) -> Self {
        self.trees.insert(tree.sentence(), tree.clone());
        self.trees.insert(sentence.to_string(), tree);
        self
    }

    /// Registers a tree under its space-joined tokens.
    pub fn with(self, tree: ParseTree) -> Self {
        let sentence = tree.sentence();
        self.with_tree(&sentence, tree)
    }
}

impl LinguaAdapter for FixtureAdapter {
    fn parse(&self, sentence: &str) -> Result<ParseTree, LinguaError> {
        match self.trees.get(sentence) {
            Some(t) => Ok(t.clone()),
            None => StubAdapter.parse(sentence),
        }
    }

    fn similarity(&self, a: &ParseTree, b: &ParseTree) -> Result<SimMatrix, LinguaError> {
        Ok(self.similarity.matrix(a, b)?)
    }
}
