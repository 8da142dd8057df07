//! Dataset ingestion, campaign orchestration and report bundles.
//!
//! A campaign runs one checker over every item of a dataset. Each item gets
//! its own oracle session and an RNG derived from the campaign seed and the
//! item index, so results do not depend on scheduling. Per-item failures
//! become records; only configuration errors abort a campaign.

mod ingest;
mod report;
mod stats;

pub use ingest::{
    detokenize, ingest_docred, ingest_msrp, parse_docred, parse_msrp, DocredRecord, Ingested, LabeledEntity,
    MsrpRecord, SkippedRow, MSRP_HEADER,
};
pub use report::{
    Aggregates, CategoryRow, DatasetSummary, DecisionSplit, DecisionTable, ItemRecord, ItemState, LinearitySummary,
    NoSummary, Overlap, Rate, ReportBundle, RoundtripSummary, RunSummary, YesSummary, BUNDLE_FILE, BUNDLE_FORMAT,
    CORRELATED, MARKDOWN_FILE,
};
pub use stats::{average_ranks, spearman, CorrelationMatrix, SpearmanError};

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alignment::{AlignConfig, ConfirmCache};
use crate::linearity::{run_linearity_campaign, LinearityConfig};
use crate::lingua::LinguaAdapter;
use crate::oracle::{derive_seed, Answer, Oracle};
use crate::paraphrase::{
    decide_equivalence, prove_yes, roundtrip, run_no_test, NoTestConfig, NoVerdict, ParaphraseError,
};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("format error at row {row}: {message}")]
    Format { row: usize, message: String },
    #[error("configuration: {0}")]
    Config(String),
    #[error("report bundle is inconsistent: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Linearity,
    ProveYes,
    CheckNo,
    Roundtrip,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Linearity => "linearity",
            Mode::ProveYes => "prove-yes",
            Mode::CheckNo => "check-no",
            Mode::Roundtrip => "roundtrip",
        }
    }

    pub fn needs_pairs(self) -> bool {
        matches!(self, Mode::ProveYes | Mode::CheckNo)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Mode::Linearity, Mode::ProveYes, Mode::CheckNo, Mode::Roundtrip]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown mode '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub mode: Mode,
    pub seed: u64,
    /// Work-pool width; 0 picks the number of cores.
    pub jobs: usize,
    pub linearity: LinearityConfig,
    pub align: AlignConfig,
    pub no_test: NoTestConfig,
}

impl CampaignConfig {
    pub fn new(mode: Mode, seed: u64) -> Self {
        Self {
            mode,
            seed,
            jobs: 0,
            linearity: LinearityConfig::default(),
            align: AlignConfig::default(),
            no_test: NoTestConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let l = &self.linearity;
        if l.repeats == 0 || l.trials == 0 || l.named_repeats == 0 || l.synonym_repeats == 0 {
            return Err(HarnessError::Config("repeat and trial counts must be positive".into()));
        }
        if self.no_test.n_tests == 0 {
            return Err(HarnessError::Config("--n-tests must be positive".into()));
        }
        if self.align.decision_repeats == 0 {
            return Err(HarnessError::Config("decision repeats must be positive".into()));
        }
        Ok(())
    }

    fn summary(&self) -> RunSummary {
        RunSummary {
            mode: self.mode,
            seed: self.seed,
            phi: self.align.mode,
            repeats: self.linearity.repeats,
            trials: self.linearity.trials,
            n_tests: self.no_test.n_tests,
            decision_repeats: self.align.decision_repeats,
        }
    }
}

/// Campaign input: single sentences or labeled sentence pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Dataset {
    Sentences(Ingested<DocredRecord>),
    Pairs(Ingested<MsrpRecord>),
}

impl Dataset {
    /// Sentences without labels, e.g. synthetic ones.
    pub fn from_sentences<S: AsRef<str>>(sentences: &[S]) -> Self {
        let records: Vec<DocredRecord> = sentences
            .iter()
            .enumerate()
            .map(|(i, s)| DocredRecord {
                sentence_id: i.to_string(),
                sentence: s.as_ref().to_string(),
                labeled_entities: Vec::new(),
            })
            .collect();
        let bytes = serde_json::to_vec(&records).expect("records serialize");
        parse_docred(&bytes).map(Dataset::Sentences).expect("records round-trip")
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Dataset::Sentences(_) => "sentences",
            Dataset::Pairs(_) => "pairs",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Dataset::Sentences(d) => d.records.len(),
            Dataset::Pairs(d) => d.records.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn summary(&self) -> DatasetSummary {
        let (sha256, skipped) = match self {
            Dataset::Sentences(d) => (d.sha256.clone(), d.skipped.clone()),
            Dataset::Pairs(d) => (d.sha256.clone(), d.skipped.clone()),
        };
        DatasetSummary {
            kind: self.kind().to_string(),
            sha256,
            items: self.len(),
            skipped,
        }
    }
}

enum Item<'a> {
    Sentence(&'a DocredRecord),
    Pair(&'a MsrpRecord),
}

impl Item<'_> {
    fn id(&self) -> &str {
        match self {
            Item::Sentence(r) => &r.sentence_id,
            Item::Pair(r) => &r.pair_id,
        }
    }

    /// The sentence single-sentence checkers run on; the first of a pair.
    fn sentence(&self) -> &str {
        match self {
            Item::Sentence(r) => &r.sentence,
            Item::Pair(r) => &r.s1,
        }
    }
}

fn failed(record: ItemRecord, err: impl fmt::Display) -> ItemRecord {
    ItemRecord {
        state: ItemState::Failed,
        detail: Some(err.to_string()),
        ..record
    }
}

fn run_item(
    index: usize,
    item: &Item<'_>,
    config: &CampaignConfig,
    oracle: &Oracle,
    adapter: &dyn LinguaAdapter,
) -> ItemRecord {
    let mut session = oracle.session();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &format!("item/{index}")));
    let mut record = ItemRecord::new(index, item.id(), ItemState::Completed);
    if let Item::Pair(p) = item {
        record.label = Some(p.label);
    }
    match config.mode {
        Mode::Linearity => match run_linearity_campaign(item.sentence(), &mut session, &mut rng, &config.linearity) {
            Ok(v) => {
                if let Some(reason) = &v.untestable {
                    record.state = ItemState::Untestable;
                    record.detail = Some(reason.to_string());
                }
                if let Item::Sentence(r) = item {
                    let extracted = v.entities.iter().map(|e| e.surface.as_str());
                    let labeled = r.labeled_entities.iter().map(|e| e.surface.as_str());
                    if !r.labeled_entities.is_empty() && v.m > 0 {
                        record.overlap = Some(Overlap::between(extracted, labeled));
                    }
                }
                record.linearity = Some(v);
                record
            }
            Err(e) => failed(record, e),
        },
        Mode::Roundtrip => match roundtrip(item.sentence(), &mut session) {
            Ok(r) => {
                if r.answer.is_none() {
                    record.state = ItemState::Undecidable;
                }
                record.roundtrip = Some(r);
                record
            }
            Err(ParaphraseError::NoParaphrases(s)) => ItemRecord {
                state: ItemState::Untestable,
                detail: Some(format!("no usable paraphrases for '{s}'")),
                ..record
            },
            Err(e) => failed(record, e),
        },
        Mode::ProveYes | Mode::CheckNo => {
            let Item::Pair(pair) = item else {
                return failed(record, "pair checkers need sentence pairs");
            };
            let claim = match decide_equivalence(&pair.s1, &pair.s2, &mut session) {
                Ok(c) => c,
                Err(e) => return failed(record, e),
            };
            let wanted = if config.mode == Mode::ProveYes { Answer::Yes } else { Answer::No };
            record.state = match claim.answer {
                None => ItemState::Undecidable,
                Some(a) if a != wanted => ItemState::Routed,
                Some(_) => ItemState::Completed,
            };
            let enter = record.state == ItemState::Completed;
            record.claim = Some(claim);
            if !enter {
                return record;
            }
            let claim = record.claim.as_ref().expect("set above");
            let mut cache = ConfirmCache::new();
            if config.mode == Mode::ProveYes {
                match prove_yes(claim, adapter, &mut session, &mut cache, &config.align) {
                    Ok(v) => record.yes = Some(v),
                    Err(e) => return failed(record, e),
                }
            } else {
                match run_no_test(claim, adapter, &mut session, &mut rng, &mut cache, &config.align, &config.no_test) {
                    Ok(r) => {
                        if r.verdict == NoVerdict::Untestable {
                            record.state = ItemState::Untestable;
                            record.detail = r.untestable_reason.clone();
                        }
                        record.no = Some(r);
                    }
                    Err(e) => return failed(record, e),
                }
            }
            record
        }
    }
}

fn run_items(
    items: &[Item<'_>],
    config: &CampaignConfig,
    oracle: &Oracle,
    adapter: &dyn LinguaAdapter,
) -> Result<Vec<ItemRecord>, HarnessError> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| HarnessError::Config(format!("work pool: {e}")))?;
        Ok(pool.install(|| {
            items
                .par_iter()
                .enumerate()
                .map(|(i, item)| run_item(i, item, config, oracle, adapter))
                .collect()
        }))
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(items
            .iter()
            .enumerate()
            .map(|(i, item)| run_item(i, item, config, oracle, adapter))
            .collect())
    }
}

/// Runs the configured checker over every item and assembles the bundle.
pub fn run_campaign(
    config: &CampaignConfig,
    dataset: &Dataset,
    oracle: &Oracle,
    adapter: &dyn LinguaAdapter,
) -> Result<ReportBundle, HarnessError> {
    config.validate()?;
    let items: Vec<Item<'_>> = match dataset {
        Dataset::Pairs(d) => d.records.iter().map(Item::Pair).collect(),
        Dataset::Sentences(_) if config.mode.needs_pairs() => {
            return Err(HarnessError::Config(format!("{} needs a sentence-pair dataset", config.mode)))
        }
        Dataset::Sentences(d) => d.records.iter().map(Item::Sentence).collect(),
    };
    let records = run_items(&items, config, oracle, adapter)?;
    let bundle = ReportBundle::new(config.summary(), dataset.summary(), records);
    bundle.check()?;
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lingua::StubAdapter;
    use crate::oracle::{ReplayBackend, ScriptRule, ScriptedBackend, TemplateId};

    fn pairs(rows: &[(&str, &str, Answer)]) -> Dataset {
        let mut tsv = MSRP_HEADER.join("\t");
        for (i, (a, b, l)) in rows.iter().enumerate() {
            let q = if *l == Answer::Yes { 1 } else { 0 };
            tsv.push_str(&format!("\n{q}\t{i}\t{}\t{a}\t{b}", i + 100));
        }
        Dataset::Pairs(parse_msrp(tsv.as_bytes()).unwrap())
    }

    fn random_oracle(seed: u64) -> Oracle {
        Oracle::new(
            ScriptedBackend::new(seed)
                .with_rule(ScriptRule::new(
                    Some(TemplateId::ParaphraseGeneration),
                    &[],
                    &[r#"{"paraphrases": ["Birds fly south.", "Cats nap often.", "Rain falls down.", "Dogs eat bones.", "Fish swim upstream."]}"#],
                ))
                .with_rule(
                    ScriptRule::new(
                        None,
                        &[],
                        &[r#"{"answer": "yes", "explanation": "a"}"#, r#"{"answer": "no", "explanation": "b"}"#],
                    )
                    .seeded(),
                ),
        )
    }

    fn claims() -> Dataset {
        let rows: Vec<(String, String, Answer)> = (0..10)
            .map(|i| (format!("Ships sail east {i}."), format!("Planes fly west {i}."), Answer::No))
            .collect();
        let borrowed: Vec<(&str, &str, Answer)> = rows.iter().map(|(a, b, l)| (a.as_str(), b.as_str(), *l)).collect();
        pairs(&borrowed)
    }

    #[test]
    fn modes_parse() {
        for m in [Mode::Linearity, Mode::ProveYes, Mode::CheckNo, Mode::Roundtrip] {
            assert_eq!(m.name().parse::<Mode>().unwrap(), m);
        }
        assert!("lint".parse::<Mode>().is_err());
    }

    #[test]
    fn check_no_is_deterministic_and_replayable() {
        let data = claims();
        let config = CampaignConfig::new(Mode::CheckNo, 42);
        let oracle = random_oracle(3);
        let a = run_campaign(&config, &data, &oracle, &StubAdapter).unwrap();
        let b = run_campaign(&config, &data, &random_oracle(3), &StubAdapter).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.records.len(), 10);

        let replay = Oracle::new(ReplayBackend::new(&oracle.transcript()));
        let c = run_campaign(&config, &data, &replay, &StubAdapter).unwrap();
        assert_eq!(a.to_json().unwrap(), c.to_json().unwrap());
    }

    #[test]
    fn every_item_yields_one_record() {
        let data = claims();
        // replay of an empty transcript fails every item without aborting
        let replay = Oracle::new(ReplayBackend::default());
        let b = run_campaign(&CampaignConfig::new(Mode::ProveYes, 0), &data, &replay, &StubAdapter).unwrap();
        assert_eq!(b.records.len(), data.len());
        assert!(b.records.iter().all(|r| r.state == ItemState::Failed));
        assert_eq!(b.aggregates.states[&ItemState::Failed], 10);
    }

    #[test]
    fn pair_modes_reject_sentence_data() {
        let data = Dataset::from_sentences(&["One.", "Two."]);
        let err = run_campaign(&CampaignConfig::new(Mode::CheckNo, 0), &data, &random_oracle(0), &StubAdapter);
        assert!(matches!(err, Err(HarnessError::Config(_))));
        let mut bad = CampaignConfig::new(Mode::Roundtrip, 0);
        bad.no_test.n_tests = 0;
        assert!(matches!(
            run_campaign(&bad, &data, &random_oracle(0), &StubAdapter),
            Err(HarnessError::Config(_))
        ));
    }

    #[test]
    fn claims_route_by_answer() {
        let data = pairs(&[("A cat sat.", "A cat sat.", Answer::Yes), ("Dogs eat bones.", "Fish swim.", Answer::No)]);
        let oracle = Oracle::new(
            ScriptedBackend::new(0)
                .with_rule(ScriptRule::new(
                    Some(TemplateId::PairEquivalence),
                    &["'Fish swim.'"],
                    &[r#"{"answer": "no", "explanation": "x"}"#],
                ))
                .with_rule(ScriptRule::new(None, &[], &[r#"{"answer": "yes", "explanation": "x"}"#])),
        );
        let b = run_campaign(&CampaignConfig::new(Mode::ProveYes, 0), &data, &oracle, &StubAdapter).unwrap();
        assert_eq!(b.records[0].state, ItemState::Completed);
        assert!(b.records[0].yes.as_ref().unwrap().accepted);
        assert_eq!(b.records[1].state, ItemState::Routed);
        let d = b.aggregates.decisions.as_ref().unwrap();
        assert_eq!((d.labeled_yes.yes, d.labeled_no.no, d.agreement.rate), (1, 1, Some(1.0)));
        assert_eq!(b.aggregates.yes.as_ref().unwrap().labeled_yes.rate, Some(1.0));
    }
}
