use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    leftover_phrases, AlignError, Direction, ExemptTags, NodeSimilarity, ParseTree, PhraseMapping, RhoAlignment,
    Side, StructuralCandidates, Variant,
};
use crate::oracle::{bindings, majority_vote, Answer, Parsed, Session, TemplateId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PhiMode {
    #[default]
    Or,
    And,
}

impl FromStr for PhiMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "or" => Ok(PhiMode::Or),
            "and" => Ok(PhiMode::And),
            other => Err(format!("unknown mode '{other}', expected 'or' or 'and'")),
        }
    }
}

impl fmt::Display for PhiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhiMode::Or => "or",
            PhiMode::And => "and",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignConfig {
    pub exempt: ExemptTags,
    pub mode: PhiMode,
    /// Confirm every complete variant instead of stopping once the verdict
    /// is settled.
    pub exhaustive: bool,
    /// Prompt 6 replies per phrase pair; the plurality answer decides.
    pub decision_repeats: usize,
}

impl Default for AlignConfig {
    fn default() -> Self {
        Self {
            exempt: ExemptTags::default(),
            mode: PhiMode::Or,
            exhaustive: false,
            decision_repeats: 1,
        }
    }
}

/// A transcript entry backing a decision.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntryRef {
    pub prompt_hash: String,
    pub repeat_index: u32,
}

/// One phrase-pair decision as seen by a confirmation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfirmRecord {
    pub text1: String,
    pub text2: String,
    /// `None` when the winning reply could not be parsed.
    pub answer: Option<Answer>,
    pub entries: Vec<EntryRef>,
    /// Taken from the cache without querying.
    pub cached: bool,
}

/// Phrase-pair decisions shared across a campaign, keyed by the unordered pair.
#[derive(Debug, Clone, Default)]
pub struct ConfirmCache {
    decided: HashMap<(String, String), (Option<Answer>, Vec<EntryRef>)>,
}

impl ConfirmCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.decided.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decided.is_empty()
    }

    fn key(a: &str, b: &str) -> (String, String) {
        if a <= b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefuteReason {
    /// The oracle answered no.
    No,
    /// The reply carried no parsable decision.
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Confirmation {
    Confirmed,
    Refuted { mapping: PhraseMapping, reason: RefuteReason },
    /// Coverage is incomplete; nothing was asked.
    Incomplete,
}

/// Asks Prompt 6 for every mapping of a complete candidate, stopping at the
/// first answer that is not yes.
pub fn confirm_alignment(
    candidate: &RhoAlignment,
    session: &mut Session<'_>,
    cache: &mut ConfirmCache,
    decision_repeats: usize,
) -> Result<(Confirmation, Vec<ConfirmRecord>), AlignError> {
    if !candidate.is_complete() {
        return Ok((Confirmation::Incomplete, Vec::new()));
    }
    let mut records = Vec::new();
    for m in &candidate.mappings {
        let record = decide_phrases(&m.source_phrase, &m.target_phrase, session, cache, decision_repeats)?;
        let answer = record.answer;
        records.push(record);
        let reason = match answer {
            Some(Answer::Yes) => continue,
            Some(Answer::No) => RefuteReason::No,
            None => RefuteReason::Invalid,
        };
        return Ok((
            Confirmation::Refuted {
                mapping: m.clone(),
                reason,
            },
            records,
        ));
    }
    Ok((Confirmation::Confirmed, records))
}

fn decide_phrases(
    text1: &str,
    text2: &str,
    session: &mut Session<'_>,
    cache: &mut ConfirmCache,
    repeats: usize,
) -> Result<ConfirmRecord, AlignError> {
    let key = ConfirmCache::key(text1, text2);
    if let Some((answer, entries)) = cache.decided.get(&key) {
        return Ok(ConfirmRecord {
            text1: text1.to_string(),
            text2: text2.to_string(),
            answer: *answer,
            entries: entries.clone(),
            cached: true,
        });
    }
    let b = bindings([("text1", text1), ("text2", text2)]);
    let replies = session.query_repeated(TemplateId::PhraseEquivalence, &b, repeats.max(1))?;
    let ballots: Vec<Option<Answer>> = replies
        .iter()
        .map(|r| match r.parsed {
            Parsed::Decision { answer, .. } => Some(answer),
            _ => None,
        })
        .collect();
    let answer = majority_vote(&ballots).and_then(|v| v.winner);
    let entries: Vec<EntryRef> = replies
        .iter()
        .map(|r| EntryRef {
            prompt_hash: r.prompt_hash.clone(),
            repeat_index: r.repeat_index,
        })
        .collect();
    cache.decided.insert(key, (answer, entries.clone()));
    Ok(ConfirmRecord {
        text1: text1.to_string(),
        text2: text2.to_string(),
        answer,
        entries,
        cached: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub variant: Variant,
    pub alignment: RhoAlignment,
    /// `None` when the verdict was settled before this variant was tried.
    pub confirmation: Option<Confirmation>,
    pub records: Vec<ConfirmRecord>,
    /// Unaligned phrases of the coverage side.
    pub leftover: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiOutcome {
    pub mode: PhiMode,
    pub holds: bool,
    pub established: BTreeSet<Variant>,
    pub reports: Vec<VariantReport>,
    /// Prompt 6 queries issued, cache hits excluded.
    pub queries: usize,
}

impl PhiOutcome {
    pub fn report(&self, variant: Variant) -> &VariantReport {
        self.reports.iter().find(|r| r.variant == variant).expect("all variants reported")
    }

    /// Leftover phrases of s1 (from S1toS2) and s2 (from S2toS1).
    pub fn leftovers(&self) -> (Vec<String>, Vec<String>) {
        (self.report(Variant::S1toS2).leftover.clone(), self.report(Variant::S2toS1).leftover.clone())
    }

    /// Confirmed alignments, in evaluation order.
    pub fn proofs(&self) -> impl Iterator<Item = &RhoAlignment> {
        self.reports
            .iter()
            .filter(|r| r.confirmation == Some(Confirmation::Confirmed))
            .map(|r| &r.alignment)
    }

    pub fn records(&self) -> impl Iterator<Item = &ConfirmRecord> {
        self.reports.iter().flat_map(|r| &r.records)
    }
}

fn settled(mode: PhiMode, established: &BTreeSet<Variant>) -> bool {
    let has = |d: Direction| established.iter().any(|v| v.direction() == d);
    match mode {
        PhiMode::Or => !established.is_empty(),
        PhiMode::And => has(Direction::S1toS2) && has(Direction::S2toS1),
    }
}

/// Evaluates the four variants in order and decides φ for `config.mode`.
///
/// Structural candidates are built first; only complete ones are confirmed.
/// Unless `config.exhaustive`, confirmation stops as soon as the verdict is
/// known.
pub fn phi(
    s1: &ParseTree,
    s2: &ParseTree,
    sim: &impl NodeSimilarity,
    session: &mut Session<'_>,
    cache: &mut ConfirmCache,
    config: &AlignConfig,
) -> Result<PhiOutcome, AlignError> {
    let candidates = StructuralCandidates::compute(s1, s2, sim, &config.exempt)?;
    let before = session.calls().get(TemplateId::PhraseEquivalence);
    let mut established = BTreeSet::new();
    let mut reports = Vec::with_capacity(4);
    for variant in Variant::ALL {
        let alignment = candidates.get(variant).clone();
        let side = match variant.coverage_side() {
            Side::S1 => s1,
            Side::S2 => s2,
        };
        let mut report = VariantReport {
            variant,
            leftover: leftover_phrases(side, &alignment.covered_token_ids, &config.exempt),
            alignment,
            confirmation: None,
            records: Vec::new(),
        };
        let direction_done = established.iter().any(|v: &Variant| v.direction() == variant.direction());
        let hopeless = config.mode == PhiMode::And
            && variant.direction() == Direction::S2toS1
            && !established.iter().any(|v: &Variant| v.direction() == Direction::S1toS2);
        let skip = !config.exhaustive
            && (settled(config.mode, &established) || (config.mode == PhiMode::And && (direction_done || hopeless)));
        if !report.alignment.is_complete() {
            report.confirmation = Some(Confirmation::Incomplete);
        } else if !skip {
            let (confirmation, records) =
                confirm_alignment(&report.alignment, session, cache, config.decision_repeats)?;
            if let Confirmation::Refuted { mapping, .. } = &confirmation {
                report.leftover = vec![if variant.is_star() {
                    mapping.target_phrase.clone()
                } else {
                    mapping.source_phrase.clone()
                }];
            }
            if confirmation == Confirmation::Confirmed {
                established.insert(variant);
            }
            report.confirmation = Some(confirmation);
            report.records = records;
        }
        reports.push(report);
    }
    Ok(PhiOutcome {
        mode: config.mode,
        holds: settled(config.mode, &established),
        established,
        reports,
        queries: session.calls().get(TemplateId::PhraseEquivalence) - before,
    })
}
