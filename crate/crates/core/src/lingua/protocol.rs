use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{LinguaAdapter, LinguaError};
use crate::alignment::{ParseTree, TreeDocument};

pub const PROTOCOL_VERSION: u32 = 1;

/// One request line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum AdapterRequest {
    Parse { version: u32, sentence: String },
    Similarity { version: u32, tree_a: TreeDocument, tree_b: TreeDocument },
}

impl AdapterRequest {
    pub fn parse(sentence: &str) -> Self {
        AdapterRequest::Parse {
            version: PROTOCOL_VERSION,
            sentence: sentence.to_string(),
        }
    }

    pub fn similarity(a: &ParseTree, b: &ParseTree) -> Self {
        AdapterRequest::Similarity {
            version: PROTOCOL_VERSION,
            tree_a: a.to_document(),
            tree_b: b.to_document(),
        }
    }

    pub fn version(&self) -> u32 {
        match self {
            AdapterRequest::Parse { version, .. } | AdapterRequest::Similarity { version, .. } => *version,
        }
    }
}

/// One response line. Exactly one of `tree`, `matrix`, `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterResponse {
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeDocument>,
    /// Rows indexed by nodes of the first tree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl AdapterResponse {
    pub fn tree(tree: &ParseTree) -> Self {
        Self {
            ok: true,
            tree: Some(tree.to_document()),
            matrix: None,
            error: None,
        }
    }

    pub fn matrix(rows: Vec<Vec<f64>>) -> Self {
        Self {
            ok: true,
            tree: None,
            matrix: Some(rows),
            error: None,
        }
    }

    pub fn error(message: impl Into<String>) -> Self {
        Self {
            ok: false,
            tree: None,
            matrix: None,
            error: Some(message.into()),
        }
    }
}

/// Answers one request line with `adapter`. Never fails: problems become
/// error responses.
pub fn handle_request(adapter: &dyn LinguaAdapter, line: &str) -> AdapterResponse {
    let request: AdapterRequest = match serde_json::from_str(line) {
        Ok(r) => r,
        Err(e) => return AdapterResponse::error(format!("bad request: {e}")),
    };
    if request.version() != PROTOCOL_VERSION {
        return AdapterResponse::error(
            LinguaError::VersionMismatch {
                expected: PROTOCOL_VERSION,
                found: request.version(),
            }
            .to_string(),
        );
    }
    let result = match request {
        AdapterRequest::Parse { sentence, .. } => adapter.parse(&sentence).map(|t| AdapterResponse::tree(&t)),
        AdapterRequest::Similarity { tree_a, tree_b, .. } => (|| {
            let a = ParseTree::from_document(tree_a)?;
            let b = ParseTree::from_document(tree_b)?;
            Ok(AdapterResponse::matrix(adapter.similarity(&a, &b)?.to_rows()))
        })(),
    };
    result.unwrap_or_else(|e: LinguaError| AdapterResponse::error(e.to_string()))
}

/// Serves requests from `input` until end of stream. Blank lines are skipped.
pub fn serve(adapter: &dyn LinguaAdapter, input: impl BufRead, mut output: impl Write) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = handle_request(adapter, &line);
        serde_json::to_writer(&mut output, &response)?;
        output.write_all(b"\n")?;
        output.flush()?;
    }
    Ok(())
}
