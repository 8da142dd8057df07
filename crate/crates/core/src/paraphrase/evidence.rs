use serde::{Deserialize, Serialize};

use crate::alignment::{EntryRef, Side};
use crate::oracle::{
    bindings, parse_decision, parse_paraphrases, prompt_hash, Answer, Bindings, TemplateId, Transcript,
};

/// Why the oracle is on record as holding p equivalent to a sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EvidenceLink {
    /// p was returned when asked for paraphrases of `source`.
    Generated { source: String, entry: EntryRef },
    /// A Prompt 5 reply answered yes on `(sentence1, sentence2)`.
    Decided {
        sentence1: String,
        sentence2: String,
        entry: EntryRef,
    },
}

/// The oracle said s1 and s2 differ, yet holds p equivalent to both.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangularEvidence {
    pub s1: String,
    pub s2: String,
    pub p: String,
    pub p_source: Side,
    /// The original "no" on (s1, s2).
    pub claim: EntryRef,
    pub confirmation_p_s1: EvidenceLink,
    pub confirmation_p_s2: EvidenceLink,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EvidenceError {
    #[error("transcript has no entry {prompt_hash}#{repeat_index}")]
    MissingEntry { prompt_hash: String, repeat_index: u32 },
    #[error("entry {0} was not produced by the prompt it is cited for")]
    HashMismatch(String),
    #[error("entry {0} does not say what the evidence claims")]
    Contradicted(String),
}

fn lookup<'t>(
    transcript: &'t Transcript,
    entry: &EntryRef,
    template: TemplateId,
    b: &Bindings,
    temperature: Option<f64>,
) -> Result<&'t str, EvidenceError> {
    let rendered = template.template().render(b).map_err(|e| EvidenceError::HashMismatch(e.to_string()))?;
    if prompt_hash(&rendered, temperature) != entry.prompt_hash {
        return Err(EvidenceError::HashMismatch(entry.prompt_hash.clone()));
    }
    transcript
        .get(&entry.prompt_hash, entry.repeat_index)
        .map(|e| e.raw_response.as_str())
        .ok_or_else(|| EvidenceError::MissingEntry {
            prompt_hash: entry.prompt_hash.clone(),
            repeat_index: entry.repeat_index,
        })
}

fn check_decision(
    transcript: &Transcript,
    entry: &EntryRef,
    s1: &str,
    s2: &str,
    expected: Answer,
    temperature: Option<f64>,
) -> Result<(), EvidenceError> {
    let raw = lookup(
        transcript,
        entry,
        TemplateId::PairEquivalence,
        &bindings([("sentence1", s1), ("sentence2", s2)]),
        temperature,
    )?;
    match parse_decision(raw) {
        Ok((answer, _)) if answer == expected => Ok(()),
        _ => Err(EvidenceError::Contradicted(entry.prompt_hash.clone())),
    }
}

fn check_link(
    transcript: &Transcript,
    link: &EvidenceLink,
    p: &str,
    side_sentence: &str,
    temperature: Option<f64>,
) -> Result<(), EvidenceError> {
    match link {
        EvidenceLink::Generated { source, entry } => {
            if source != side_sentence {
                return Err(EvidenceError::Contradicted(entry.prompt_hash.clone()));
            }
            let raw = lookup(
                transcript,
                entry,
                TemplateId::ParaphraseGeneration,
                &bindings([("sentence", source.as_str())]),
                temperature,
            )?;
            let listed = parse_paraphrases(raw).is_ok_and(|items| items.iter().any(|i| i.trim() == p));
            if listed {
                Ok(())
            } else {
                Err(EvidenceError::Contradicted(entry.prompt_hash.clone()))
            }
        }
        EvidenceLink::Decided {
            sentence1,
            sentence2,
            entry,
        } => {
            let pair_matches = (sentence1 == p && sentence2 == side_sentence)
                || (sentence2 == p && sentence1 == side_sentence);
            if !pair_matches {
                return Err(EvidenceError::Contradicted(entry.prompt_hash.clone()));
            }
            check_decision(transcript, entry, sentence1, sentence2, Answer::Yes, temperature)
        }
    }
}

/// Replays the evidence against `transcript`: the claim entry must answer
/// no on (s1, s2), and each link must hold p equivalent to its sentence.
pub fn verify_evidence(
    evidence: &TriangularEvidence,
    transcript: &Transcript,
    temperature: Option<f64>,
) -> Result<(), EvidenceError> {
    check_decision(transcript, &evidence.claim, &evidence.s1, &evidence.s2, Answer::No, temperature)?;
    check_link(transcript, &evidence.confirmation_p_s1, &evidence.p, &evidence.s1, temperature)?;
    check_link(transcript, &evidence.confirmation_p_s2, &evidence.p, &evidence.s2, temperature)
}
