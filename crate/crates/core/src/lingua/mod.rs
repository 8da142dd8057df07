//! Constituency parses and node similarities from a language-analysis
//! service.
//!
//! The service speaks line-delimited JSON over stdio, one request per line
//! and one response per line, in request order. [`StubAdapter`] implements
//! the protocol in-process with a heuristic chunker and hashed character
//! n-gram embeddings; [`SidecarAdapter`] drives an external process named by
//! `LINGUA_ADAPTER_CMD`.

mod fixture;
mod protocol;
mod sidecar;
mod stub;

pub use fixture::FixtureAdapter;
pub use protocol::{handle_request, serve, AdapterRequest, AdapterResponse, PROTOCOL_VERSION};
pub use sidecar::{SidecarAdapter, ADAPTER_CMD_ENV};
pub use stub::{tag_token, tokenize, HashedEmbedder, StubAdapter, EMBEDDING_DIM};

use crate::alignment::{AlignError, NodeSimilarity, ParseTree, SimMatrix};

#[derive(Debug, thiserror::Error)]
pub enum LinguaError {
    #[error("cannot parse sentence: {0}")]
    ParseFailure(String),
    #[error("similarity model unavailable: {0}")]
    ModelUnavailable(String),
    #[error("protocol version {found} is not supported (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },
    #[error("malformed adapter message: {0}")]
    Protocol(String),
    #[error("adapter process: {0}")]
    Process(String),
    #[error(transparent)]
    Tree(#[from] AlignError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parsing and similarity scoring, whichever service provides them.
pub trait LinguaAdapter: Send + Sync {
    fn parse(&self, sentence: &str) -> Result<ParseTree, LinguaError>;
    fn similarity(&self, a: &ParseTree, b: &ParseTree) -> Result<SimMatrix, LinguaError>;
}

impl<A: LinguaAdapter + ?Sized> LinguaAdapter for &A {
    fn parse(&self, sentence: &str) -> Result<ParseTree, LinguaError> {
        (**self).parse(sentence)
    }

    fn similarity(&self, a: &ParseTree, b: &ParseTree) -> Result<SimMatrix, LinguaError> {
        (**self).similarity(a, b)
    }
}

impl<A: LinguaAdapter + ?Sized> LinguaAdapter for Box<A> {
    fn parse(&self, sentence: &str) -> Result<ParseTree, LinguaError> {
        (**self).parse(sentence)
    }

    fn similarity(&self, a: &ParseTree, b: &ParseTree) -> Result<SimMatrix, LinguaError> {
        (**self).similarity(a, b)
    }
}

/// Node similarity served by an adapter.
pub struct AdapterSimilarity<'a>(pub &'a dyn LinguaAdapter);

impl NodeSimilarity for AdapterSimilarity<'_> {
    fn matrix(&self, u: &ParseTree, v: &ParseTree) -> Result<SimMatrix, AlignError> {
        let m = self.0.similarity(u, v).map_err(|e| AlignError::Similarity(e.to_string()))?;
        m.check_shape(u, v)?;
        Ok(m)
    }
}
