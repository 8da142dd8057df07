use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{EquivalenceClaim, ParaphraseError};
use crate::alignment::{phi, AlignConfig, ConfirmCache, PhiMode, RhoAlignment, Variant};
use crate::lingua::{AdapterSimilarity, LinguaAdapter};
use crate::oracle::{Answer, Session};

/// Unaligned phrases of each sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leftover {
    pub s1: Vec<String>,
    pub s2: Vec<String>,
}

/// Outcome of checking a "yes" claim. A proof is present exactly when the
/// claim is accepted, leftovers exactly when it is rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YesVerdict {
    pub accepted: bool,
    pub mode: PhiMode,
    pub established: BTreeSet<Variant>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub proof: Vec<RhoAlignment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leftover: Option<Leftover>,
    /// Prompt 6 queries issued for the proof attempt.
    pub oracle_queries: usize,
}

/// Tries to prove a "yes" claim by establishing φ between the two parses.
pub fn prove_yes(
    claim: &EquivalenceClaim,
    adapter: &dyn LinguaAdapter,
    session: &mut Session<'_>,
    cache: &mut ConfirmCache,
    config: &AlignConfig,
) -> Result<YesVerdict, ParaphraseError> {
    if claim.answer != Some(Answer::Yes) {
        return Err(ParaphraseError::WrongRoute {
            checker: "yes",
            found: claim.answer_label().to_string(),
        });
    }
    let t1 = adapter.parse(&claim.s1)?;
    let t2 = adapter.parse(&claim.s2)?;
    let outcome = phi(&t1, &t2, &AdapterSimilarity(adapter), session, cache, config)?;
    let leftover = (!outcome.holds).then(|| {
        let (s1, s2) = outcome.leftovers();
        Leftover { s1, s2 }
    });
    Ok(YesVerdict {
        accepted: outcome.holds,
        mode: config.mode,
        proof: if outcome.holds { outcome.proofs().cloned().collect() } else { Vec::new() },
        established: outcome.established,
        leftover,
        oracle_queries: outcome.queries,
    })
}
