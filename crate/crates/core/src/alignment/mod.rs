//! Phrase alignment between constituency trees.
//!
//! Each node of a source tree U points at its most similar node in a target
//! tree V. Walking up from a leaf while parents keep pointing at parents
//! yields a matching path whose top node is a phrase mapping. A set of such
//! mappings that covers every non-exempt token of one side is a candidate
//! alignment; the oracle then confirms each mapped phrase pair.

mod confirm;
pub mod fixtures;
mod rho;
mod similarity;
mod tree;

pub use confirm::{
    confirm_alignment, phi, AlignConfig, Confirmation, ConfirmCache, ConfirmRecord, EntryRef, PhiMode, PhiOutcome, RefuteReason,
    VariantReport,
};
pub use rho::{
    assemble_rho, build_matching_graph, candidate_rho, leftover_phrases, matching_path, Direction, MatchingGraph,
    PhraseMapping, RhoAlignment, Side, StructuralCandidates, Variant,
};
pub use similarity::{
    cosine, mean_pool, Embedder, ExemptTags, FnSimilarity, LexicalSimilarity, NodeSimilarity, SimMatrix, SpanCosine,
    PUNCTUATION_TAGS,
};
pub use tree::{Node, ParseTree, Token, TreeDocument};

use crate::oracle::OracleError;

#[derive(Debug, thiserror::Error)]
pub enum AlignError {
    #[error("invalid parse tree: {0}")]
    InvalidTree(String),
    #[error("bracket syntax at byte {offset}: {message}")]
    Brackets { offset: usize, message: String },
    #[error("similarity matrix should be {expected:?}, got {found} entries")]
    MatrixShape { expected: (usize, usize), found: usize },
    #[error("similarity source failed: {0}")]
    Similarity(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}
