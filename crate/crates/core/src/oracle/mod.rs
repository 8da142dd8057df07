//! Uniform access to the oracle.
//!
//! A [`Session`] renders a prompt template, hashes it, and fetches replies by
//! `(prompt_hash, repeat_index)`. Replies already present in the oracle's
//! [`Transcript`] are served from it; everything else goes to the configured
//! [`Backend`] and is appended before the call returns. Each session numbers
//! its repeats of a prompt from zero, so a campaign that issues queries in a
//! deterministic order can be replayed exactly from the transcript.

mod backend;
#[cfg(feature = "live")]
mod live;
mod parse;
mod prompt;
mod session;
mod transcript;
mod vote;

pub use backend::{Backend, BackendKind, OracleRequest, Pick, ReplayBackend, ScriptRule, ScriptTable, ScriptedBackend};
#[cfg(feature = "live")]
pub use live::{LiveBackend, LiveConfig};
pub use parse::{
    parse_decision, parse_entity_list, parse_for, parse_named_verdict, parse_numbered_items,
    parse_paraphrases, Answer, ExtractedEntity, NamedKind, ParseError, Parsed,
};
pub use prompt::{bindings, render_prompt, Bindings, PromptTemplate, RenderedPrompt, TemplateId};
pub use session::{prompt_hash, CallCounts, Oracle, OracleResponse, Session};
pub use transcript::{Transcript, TranscriptEntry};
pub use vote::{majority_vote, VoteResult};

use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("placeholder {{{0}}} is not bound")]
    UnboundPlaceholder(String),
    #[error("oracle backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("transcript has no entry {missing_index} for prompt {prompt_hash}")]
    ReplayMiss { prompt_hash: String, missing_index: u32 },
    #[error("no scripted response for {template} prompt {prompt_hash}")]
    NoScriptedResponse { template: TemplateId, prompt_hash: String },
    #[error("duplicate transcript entry ({prompt_hash}, {repeat_index})")]
    DuplicateEntry { prompt_hash: String, repeat_index: u32 },
    #[error("transcript line {line}: {message}")]
    TranscriptFormat { line: usize, message: String },
    #[error("script table: {0}")]
    ScriptFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Derives a 64-bit seed from a base seed and a label. Used to give every
/// campaign item, and every scripted reply, its own independent stream.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 output is 32 bytes"))
}
