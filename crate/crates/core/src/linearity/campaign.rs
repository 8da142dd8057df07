use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    check_replaceable, classify_named, extract_entity_set, generate_synonym, judge_trial, run_trial, ClassPool,
    DecidedBy, Entity, LinearityError, LinearityTrial, NamedStatus, SynonymPair, SynonymTable, TrialJudgement,
};
use crate::oracle::{CallCounts, Session, TemplateId};
use crate::text::normalize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearityConfig {
    /// Extractions per sentence (original and transformed).
    pub repeats: usize,
    pub trials: usize,
    /// Ballots for the named/non-named vote.
    pub named_repeats: usize,
    /// Ballots for the replacement and synonym votes.
    pub synonym_repeats: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool: Option<ClassPool>,
}

impl Default for LinearityConfig {
    fn default() -> Self {
        Self {
            repeats: 11,
            trials: 5,
            named_repeats: 11,
            synonym_repeats: 7,
            pool: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "kebab-case")]
pub enum UntestableReason {
    AllInvalid,
    NoEntities,
    NoUsableSynonym(String),
    EntityNotFound(String),
}

impl std::fmt::Display for UntestableReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UntestableReason::AllInvalid => f.write_str("all extractions invalid"),
            UntestableReason::NoEntities => f.write_str("no entities"),
            UntestableReason::NoUsableSynonym(e) => write!(f, "no usable synonym for {e:?}"),
            UntestableReason::EntityNotFound(e) => write!(f, "entity {e:?} not found in sentence"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: LinearityTrial,
    pub judgement: TrialJudgement,
}

/// Oracle calls spent on one sentence, split by purpose.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearityCalls {
    pub original_extractions: usize,
    pub trial_extractions: usize,
    pub classification: usize,
    pub synonym: usize,
}

impl LinearityCalls {
    pub fn total(&self) -> usize {
        self.original_extractions + self.trial_extractions + self.classification + self.synonym
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearityVerdict {
    pub sentence: String,
    pub m: usize,
    pub con_o: u32,
    /// Smallest vote count over all transformed sentences.
    pub con_rs: Option<u32>,
    pub a_test: usize,
    pub a_rate: f64,
    pub accepted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub untestable: Option<UntestableReason>,
    pub entities: Vec<Entity>,
    pub synonyms: SynonymTable,
    pub trials: Vec<TrialRecord>,
    pub calls: LinearityCalls,
}

impl LinearityVerdict {
    fn untestable(sentence: &str, reason: UntestableReason) -> Self {
        Self {
            sentence: sentence.to_string(),
            m: 0,
            con_o: 0,
            con_rs: None,
            a_test: 0,
            a_rate: 0.0,
            accepted: false,
            untestable: Some(reason),
            entities: Vec::new(),
            synonyms: SynonymTable::default(),
            trials: Vec::new(),
            calls: LinearityCalls::default(),
        }
    }
}

fn calls_since(before: &CallCounts, after: &CallCounts, t: TemplateId) -> usize {
    after.get(t) - before.get(t)
}

/// Runs the full test on one sentence: extraction, synonym generation, and
/// `config.trials` homomorphism trials. Oracle failures are errors; every
/// other way the sentence can fail to be tested is an untestable verdict.
pub fn run_linearity_campaign(
    sentence: &str,
    session: &mut Session<'_>,
    rng: &mut impl Rng,
    config: &LinearityConfig,
) -> Result<LinearityVerdict, LinearityError> {
    let start = session.calls().clone();
    let mut calls = LinearityCalls::default();

    let mut set = match extract_entity_set(sentence, session, config.repeats) {
        Ok(set) => set,
        Err(LinearityError::AllInvalid) => {
            let mut v = LinearityVerdict::untestable(sentence, UntestableReason::AllInvalid);
            v.calls.original_extractions = config.repeats;
            return Ok(v);
        }
        Err(e) => return Err(e),
    };
    calls.original_extractions = calls_since(&start, session.calls(), TemplateId::EntityExtraction);
    let mut verdict = LinearityVerdict::untestable(sentence, UntestableReason::NoEntities);
    verdict.m = set.m();
    verdict.con_o = set.con_o;
    if set.entities.is_empty() {
        verdict.calls = calls;
        return Ok(verdict);
    }

    let mut taken: Vec<String> = set.entities.iter().map(|e| normalize(&e.surface)).collect();
    let mut table = SynonymTable::default();
    let mut missing_synonym = None;
    for i in 0..set.entities.len() {
        let (kind, _): (_, DecidedBy) = classify_named(&set.entities[i], sentence, session, config.named_repeats)?;
        set.entities[i].named = NamedStatus::from(kind);
        let entity = &set.entities[i];
        let others: Vec<String> = taken.iter().filter(|t| **t != normalize(&entity.surface)).cloned().collect();
        match generate_synonym(entity, kind, sentence, config.pool.as_ref(), &others, session, config.synonym_repeats) {
            Ok((synonym, provenance)) => {
                taken.push(normalize(&synonym));
                table.pairs.push(SynonymPair {
                    entity: entity.surface.clone(),
                    synonym,
                    provenance,
                });
            }
            Err(LinearityError::NoUsableSynonym { entity }) => {
                missing_synonym = Some(entity);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    calls.classification = calls_since(&start, session.calls(), TemplateId::NamedClassification);
    calls.synonym = calls_since(&start, session.calls(), TemplateId::NamedReplacement)
        + calls_since(&start, session.calls(), TemplateId::SynonymList);
    verdict.entities = set.entities.clone();
    verdict.synonyms = table.clone();
    verdict.calls = calls;
    if let Some(entity) = missing_synonym {
        verdict.untestable = Some(UntestableReason::NoUsableSynonym(entity));
        return Ok(verdict);
    }
    if let Err(LinearityError::EntityNotFound(i)) = check_replaceable(&set, &table) {
        verdict.untestable = Some(UntestableReason::EntityNotFound(set.entities[i].surface.clone()));
        return Ok(verdict);
    }
    verdict.untestable = None;

    let before_trials = session.calls().get(TemplateId::EntityExtraction);
    for _ in 0..config.trials {
        let trial = run_trial(&set, &table, session, rng, config.repeats)?;
        let judgement = judge_trial(&trial);
        verdict.trials.push(TrialRecord { trial, judgement });
    }
    verdict.calls.trial_extractions = session.calls().get(TemplateId::EntityExtraction) - before_trials;
    debug_assert_eq!(verdict.calls.trial_extractions, config.trials * 3 * config.repeats);

    verdict.a_test = verdict.trials.iter().filter(|t| t.judgement.passed).count();
    verdict.a_rate = if verdict.trials.is_empty() {
        0.0
    } else {
        verdict.trials.iter().map(|t| t.judgement.pass_rate).sum::<f64>() / verdict.trials.len() as f64
    };
    verdict.con_rs = verdict.trials.iter().map(|t| t.trial.min_con_r()).min();
    verdict.accepted = verdict.a_test == config.trials;
    Ok(verdict)
}

/// Lower bound on the probability that `n` independent trials reject a
/// function at distance `epsilon` from every homomorphism.
pub fn rejection_bound(epsilon: f64, n: u32) -> Result<f64, LinearityError> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(LinearityError::Domain(epsilon));
    }
    let q = if epsilon <= 0.25 {
        3.0 * epsilon - 6.0 * epsilon * epsilon
    } else {
        2.0 / 9.0
    };
    Ok(1.0 - (1.0 - q).powi(n as i32))
}
