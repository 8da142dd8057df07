//! Checkers for sentence-equivalence decisions.
//!
//! A "yes" is accepted only with a proof: an alignment between the two
//! parse trees whose phrase pairs the oracle itself confirms. A "no" is
//! tested by showing the oracle a paraphrase of one sentence and asking
//! whether it matches the other; agreeing completes a triangle that
//! contradicts the original answer.

mod evidence;
mod no_test;
mod yes;

pub use evidence::{verify_evidence, EvidenceError, EvidenceLink, TriangularEvidence};
pub use no_test::{
    find_indifferentiable, run_no_test, Category, Indifferentiable, NoTestConfig, NoTestRecord, NoTestRound,
    NoVerdict,
};
pub use yes::{prove_yes, Leftover, YesVerdict};

use serde::{Deserialize, Serialize};

use crate::alignment::{AlignError, EntryRef};
use crate::lingua::LinguaError;
use crate::oracle::{bindings, Answer, OracleError, OracleResponse, Parsed, Session, TemplateId};

/// Paraphrases requested per sentence.
pub const PARAPHRASE_COUNT: usize = 5;

#[derive(Debug, thiserror::Error)]
pub enum ParaphraseError {
    #[error("sentence is empty")]
    EmptySentence,
    #[error("no usable paraphrases for '{0}'")]
    NoParaphrases(String),
    #[error("a '{found}' claim cannot enter the {checker} checker")]
    WrongRoute { checker: &'static str, found: String },
    #[error("adapter failure: {0}")]
    Adapter(#[from] LinguaError),
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

pub(crate) fn entry_ref(r: &OracleResponse) -> EntryRef {
    EntryRef {
        prompt_hash: r.prompt_hash.clone(),
        repeat_index: r.repeat_index,
    }
}

/// The oracle's answer on whether two sentences are equivalent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceClaim {
    pub s1: String,
    pub s2: String,
    /// `None` when the reply held no parsable decision.
    pub answer: Option<Answer>,
    pub explanation: String,
    pub entry: EntryRef,
}

impl EquivalenceClaim {
    pub fn undecidable(&self) -> bool {
        self.answer.is_none()
    }

    pub fn answer_label(&self) -> &'static str {
        self.answer.map_or("undecidable", Answer::as_str)
    }
}

fn ask_pair(s1: &str, s2: &str, session: &mut Session<'_>) -> Result<OracleResponse, ParaphraseError> {
    if s1.trim().is_empty() || s2.trim().is_empty() {
        return Err(ParaphraseError::EmptySentence);
    }
    Ok(session.query(TemplateId::PairEquivalence, &bindings([("sentence1", s1), ("sentence2", s2)]))?)
}

fn decision(r: &OracleResponse) -> (Option<Answer>, String) {
    match &r.parsed {
        Parsed::Decision { answer, explanation } => (Some(*answer), explanation.clone()),
        _ => (None, String::new()),
    }
}

/// One Prompt 5 query on `(s1, s2)`.
pub fn decide_equivalence(s1: &str, s2: &str, session: &mut Session<'_>) -> Result<EquivalenceClaim, ParaphraseError> {
    let r = ask_pair(s1, s2, session)?;
    let (answer, explanation) = decision(&r);
    Ok(EquivalenceClaim {
        s1: s1.to_string(),
        s2: s2.to_string(),
        answer,
        explanation,
        entry: entry_ref(&r),
    })
}

/// Paraphrases of one sentence with the replies that produced them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParaphraseSet {
    pub sentence: String,
    pub items: Vec<String>,
    /// The reply the items were taken from.
    pub entry: EntryRef,
    pub queries: usize,
}

fn usable(r: &OracleResponse) -> Vec<String> {
    match &r.parsed {
        Parsed::ParaphraseList(items) => items
            .iter()
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .take(PARAPHRASE_COUNT)
            .collect(),
        _ => Vec::new(),
    }
}

/// Prompt 7. A reply with fewer than five usable entries is re-asked once;
/// the retry replaces it only if it has strictly more.
pub fn generate_paraphrases(sentence: &str, session: &mut Session<'_>) -> Result<ParaphraseSet, ParaphraseError> {
    if sentence.trim().is_empty() {
        return Err(ParaphraseError::EmptySentence);
    }
    let b = bindings([("sentence", sentence)]);
    let first = session.query(TemplateId::ParaphraseGeneration, &b)?;
    let mut best = (usable(&first), entry_ref(&first));
    let mut queries = 1;
    if best.0.len() < PARAPHRASE_COUNT {
        let retry = session.query(TemplateId::ParaphraseGeneration, &b)?;
        queries += 1;
        let items = usable(&retry);
        if items.len() > best.0.len() {
            best = (items, entry_ref(&retry));
        }
    }
    if best.0.is_empty() {
        return Err(ParaphraseError::NoParaphrases(sentence.to_string()));
    }
    Ok(ParaphraseSet {
        sentence: sentence.to_string(),
        items: best.0,
        entry: best.1,
        queries,
    })
}

/// A paraphrase checked against its own source with Prompt 5.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundtripRecord {
    pub sentence: String,
    pub paraphrase: String,
    pub answer: Option<Answer>,
    /// The oracle accepted its own paraphrase.
    pub consistent: bool,
}

/// Generates paraphrases of `sentence` and asks whether the first one is
/// equivalent to it.
pub fn roundtrip(sentence: &str, session: &mut Session<'_>) -> Result<RoundtripRecord, ParaphraseError> {
    let set = generate_paraphrases(sentence, session)?;
    let paraphrase = set.items[0].clone();
    let claim = decide_equivalence(sentence, &paraphrase, session)?;
    Ok(RoundtripRecord {
        sentence: sentence.to_string(),
        consistent: claim.answer == Some(Answer::Yes),
        answer: claim.answer,
        paraphrase,
    })
}
