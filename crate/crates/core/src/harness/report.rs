use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorrelationMatrix, HarnessError, Mode, SkippedRow};
use crate::alignment::PhiMode;
use crate::linearity::LinearityVerdict;
use crate::oracle::Answer;
use crate::paraphrase::{Category, EquivalenceClaim, NoTestRecord, NoVerdict, RoundtripRecord, YesVerdict};
use crate::text::normalize;

pub const BUNDLE_FORMAT: u32 = 1;
pub const BUNDLE_FILE: &str = "bundle.json";
pub const MARKDOWN_FILE: &str = "report.md";

/// Quantities correlated over tested linearity records.
pub const CORRELATED: [&str; 5] = ["A_test", "A_rate", "Con_o", "Con_rs", "#E"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ItemState {
    /// The checker ran to a verdict.
    Completed,
    /// The item could not be tested (no entities, no paraphrases, ...).
    Untestable,
    /// The oracle's decision sends the claim to the other checker.
    Routed,
    /// The oracle's decision could not be parsed.
    Undecidable,
    /// An error stopped the item; see `detail`.
    Failed,
}

impl ItemState {
    pub fn as_str(self) -> &'static str {
        match self {
            ItemState::Completed => "completed",
            ItemState::Untestable => "untestable",
            ItemState::Routed => "routed",
            ItemState::Undecidable => "undecidable",
            ItemState::Failed => "failed",
        }
    }
}

/// Extracted versus labeled entities, matched on normalized surface.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overlap {
    pub both: usize,
    pub extracted_only: usize,
    pub labeled_only: usize,
}

impl Overlap {
    pub fn between<'a>(
        extracted: impl IntoIterator<Item = &'a str>,
        labeled: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        let e: BTreeSet<String> = extracted.into_iter().map(normalize).collect();
        let l: BTreeSet<String> = labeled.into_iter().map(normalize).collect();
        let both = e.intersection(&l).count();
        Self {
            both,
            extracted_only: e.len() - both,
            labeled_only: l.len() - both,
        }
    }

    fn add(&mut self, o: &Overlap) {
        self.both += o.both;
        self.extracted_only += o.extracted_only;
        self.labeled_only += o.labeled_only;
    }
}

/// Result for one input item. Exactly one checker payload is present for
/// completed items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemRecord {
    pub index: usize,
    pub id: String,
    pub state: ItemState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Answer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim: Option<EquivalenceClaim>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linearity: Option<LinearityVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap: Option<Overlap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yes: Option<YesVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no: Option<NoTestRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roundtrip: Option<RoundtripRecord>,
}

impl ItemRecord {
    pub fn new(index: usize, id: impl Into<String>, state: ItemState) -> Self {
        Self {
            index,
            id: id.into(),
            state,
            detail: None,
            label: None,
            claim: None,
            linearity: None,
            overlap: None,
            yes: None,
            no: None,
            roundtrip: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// `hits` out of `total`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub hits: usize,
    pub total: usize,
    /// `None` when `total` is zero.
    pub rate: Option<f64>,
}

impl Rate {
    pub fn new(hits: usize, total: usize) -> Self {
        Self {
            hits,
            total,
            rate: (total > 0).then(|| hits as f64 / total as f64),
        }
    }

    fn count<T>(items: &[T], pred: impl Fn(&T) -> bool) -> Self {
        Self::new(items.iter().filter(|i| pred(i)).count(), items.len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearitySummary {
    /// Sentences that reached the trials.
    pub acceptance: Rate,
    pub mean_a_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap: Option<Overlap>,
    pub correlations: CorrelationMatrix,
}

/// Oracle decisions against dataset labels.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecisionSplit {
    pub yes: usize,
    pub no: usize,
    pub undecidable: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTable {
    pub labeled_yes: DecisionSplit,
    pub labeled_no: DecisionSplit,
    /// Decided pairs whose decision equals the label.
    pub agreement: Rate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YesSummary {
    pub mode: PhiMode,
    /// Over every pair the oracle answered yes on.
    pub accepted: Rate,
    pub labeled_yes: Rate,
    pub labeled_no: Rate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub category: Category,
    pub accepted: Rate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoSummary {
    /// In priority order; acceptance within each category.
    pub categories: Vec<CategoryRow>,
    /// Over every tested "no" claim.
    pub accepted: Rate,
    pub untestable: usize,
    pub with_evidence: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundtripSummary {
    /// Paraphrases the oracle rejected, over decided roundtrips.
    pub inconsistent: Rate,
    pub undecidable: usize,
}

/// Tables recomputed from the records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub items: usize,
    pub states: BTreeMap<ItemState, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linearity: Option<LinearitySummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decisions: Option<DecisionTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yes: Option<YesSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no: Option<NoSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roundtrip: Option<RoundtripSummary>,
}

fn linearity_summary(records: &[ItemRecord]) -> LinearitySummary {
    let tested: Vec<&LinearityVerdict> = records
        .iter()
        .filter(|r| r.state == ItemState::Completed)
        .filter_map(|r| r.linearity.as_ref())
        .collect();
    let acceptance = Rate::count(&tested, |v| v.accepted);
    let mean_a_rate =
        (!tested.is_empty()).then(|| tested.iter().map(|v| v.a_rate).sum::<f64>() / tested.len() as f64);
    let mut overlap: Option<Overlap> = None;
    for o in records.iter().filter_map(|r| r.overlap.as_ref()) {
        overlap.get_or_insert_with(Overlap::default).add(o);
    }
    let columns: Vec<Vec<f64>> = vec![
        tested.iter().map(|v| v.a_test as f64).collect(),
        tested.iter().map(|v| v.a_rate).collect(),
        tested.iter().map(|v| f64::from(v.con_o)).collect(),
        tested.iter().map(|v| f64::from(v.con_rs.unwrap_or(0))).collect(),
        tested.iter().map(|v| v.m as f64).collect(),
    ];
    LinearitySummary {
        acceptance,
        mean_a_rate,
        overlap,
        correlations: CorrelationMatrix::compute(&CORRELATED, &columns),
    }
}

fn decision_table(records: &[ItemRecord]) -> DecisionTable {
    let mut labeled_yes = DecisionSplit::default();
    let mut labeled_no = DecisionSplit::default();
    let (mut agree, mut decided) = (0, 0);
    for r in records {
        let (Some(label), Some(claim)) = (r.label, r.claim.as_ref()) else {
            continue;
        };
        let split = match label {
            Answer::Yes => &mut labeled_yes,
            Answer::No => &mut labeled_no,
        };
        match claim.answer {
            Some(Answer::Yes) => split.yes += 1,
            Some(Answer::No) => split.no += 1,
            None => split.undecidable += 1,
        }
        if let Some(a) = claim.answer {
            decided += 1;
            agree += usize::from(a == label);
        }
    }
    DecisionTable {
        labeled_yes,
        labeled_no,
        agreement: Rate::new(agree, decided),
    }
}

fn yes_summary(records: &[ItemRecord], mode: PhiMode) -> YesSummary {
    let proved: Vec<(Option<Answer>, bool)> = records
        .iter()
        .filter_map(|r| r.yes.as_ref().map(|v| (r.label, v.accepted)))
        .collect();
    let by_label = |l: Answer| {
        let subset: Vec<_> = proved.iter().filter(|p| p.0 == Some(l)).collect();
        Rate::count(&subset, |p| p.1)
    };
    YesSummary {
        mode,
        accepted: Rate::count(&proved, |p| p.1),
        labeled_yes: by_label(Answer::Yes),
        labeled_no: by_label(Answer::No),
    }
}

fn no_summary(records: &[ItemRecord]) -> NoSummary {
    let tests: Vec<&NoTestRecord> = records.iter().filter_map(|r| r.no.as_ref()).collect();
    let tested: Vec<&&NoTestRecord> = tests.iter().filter(|t| t.verdict != NoVerdict::Untestable).collect();
    let categories = Category::ALL
        .iter()
        .map(|&c| {
            let subset: Vec<_> = tested.iter().filter(|t| t.category == Some(c)).collect();
            CategoryRow {
                category: c,
                accepted: Rate::count(&subset, |t| t.verdict == NoVerdict::Accept),
            }
        })
        .collect();
    NoSummary {
        categories,
        accepted: Rate::count(&tested, |t| t.verdict == NoVerdict::Accept),
        untestable: tests.len() - tested.len(),
        with_evidence: tests.iter().filter(|t| t.evidence.is_some()).count(),
    }
}

fn roundtrip_summary(records: &[ItemRecord]) -> RoundtripSummary {
    let all: Vec<&RoundtripRecord> = records.iter().filter_map(|r| r.roundtrip.as_ref()).collect();
    let decided: Vec<_> = all.iter().filter(|r| r.answer.is_some()).collect();
    RoundtripSummary {
        inconsistent: Rate::count(&decided, |r| !r.consistent),
        undecidable: all.len() - decided.len(),
    }
}

impl Aggregates {
    pub fn compute(mode: Mode, phi: PhiMode, records: &[ItemRecord]) -> Self {
        let mut states = BTreeMap::new();
        for r in records {
            *states.entry(r.state).or_insert(0) += 1;
        }
        let pairs = matches!(mode, Mode::ProveYes | Mode::CheckNo);
        Self {
            items: records.len(),
            states,
            linearity: (mode == Mode::Linearity).then(|| linearity_summary(records)),
            decisions: pairs.then(|| decision_table(records)),
            yes: (mode == Mode::ProveYes).then(|| yes_summary(records, phi)),
            no: (mode == Mode::CheckNo).then(|| no_summary(records)),
            roundtrip: (mode == Mode::Roundtrip).then(|| roundtrip_summary(records)),
        }
    }
}

/// Parameters that determine the records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mode: Mode,
    pub seed: u64,
    pub phi: PhiMode,
    pub repeats: usize,
    pub trials: usize,
    pub n_tests: usize,
    pub decision_repeats: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub kind: String,
    pub sha256: String,
    pub items: usize,
    pub skipped: Vec<SkippedRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub format: u32,
    pub run: RunSummary,
    pub dataset: DatasetSummary,
    pub records: Vec<ItemRecord>,
    pub aggregates: Aggregates,
}

impl ReportBundle {
    pub fn new(run: RunSummary, dataset: DatasetSummary, records: Vec<ItemRecord>) -> Self {
        let aggregates = Aggregates::compute(run.mode, run.phi, &records);
        Self {
            format: BUNDLE_FORMAT,
            run,
            dataset,
            records,
            aggregates,
        }
    }

    /// Record conservation and aggregate/record consistency.
    pub fn check(&self) -> Result<(), HarnessError> {
        if self.records.len() != self.dataset.items {
            return Err(HarnessError::Inconsistent(format!(
                "{} records for {} items",
                self.records.len(),
                self.dataset.items
            )));
        }
        if self.records.iter().enumerate().any(|(i, r)| r.index != i) {
            return Err(HarnessError::Inconsistent("record indices out of order".into()));
        }
        if Aggregates::compute(self.run.mode, self.run.phi, &self.records) != self.aggregates {
            return Err(HarnessError::Inconsistent("aggregates differ from the records".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        self.check()?;
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let bundle: Self = serde_json::from_str(text)?;
        bundle.check()?;
        Ok(bundle)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Writes `bundle.json` and `report.md` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<(), HarnessError> {
        let dir = dir.as_ref();
        let io = |source| HarnessError::Io {
            path: dir.display().to_string(),
            source,
        };
        fs::create_dir_all(dir).map_err(io)?;
        fs::write(dir.join(BUNDLE_FILE), self.to_json()?).map_err(io)?;
        fs::write(dir.join(MARKDOWN_FILE), self.to_markdown()).map_err(io)?;
        Ok(())
    }

    pub fn to_markdown(&self) -> String {
        let mut md = String::new();
        let a = &self.aggregates;
        let _ = writeln!(md, "# {} campaign\n", self.run.mode);
        let _ = writeln!(
            md,
            "seed {} · φ {} · repeats {} · trials {} · n-tests {}\n",
            self.run.seed, self.run.phi, self.run.repeats, self.run.trials, self.run.n_tests
        );
        let _ = writeln!(
            md,
            "dataset `{}` ({}, {} items, {} rows skipped)\n",
            &self.dataset.sha256[..self.dataset.sha256.len().min(12)],
            self.dataset.kind,
            self.dataset.items,
            self.dataset.skipped.len()
        );
        table(
            &mut md,
            &["state", "items"],
            a.states.iter().map(|(s, n)| vec![s.as_str().to_string(), n.to_string()]),
        );
        if let Some(l) = &a.linearity {
            let _ = writeln!(md, "## Linearity\n");
            table(
                &mut md,
                &["tested", "accepted", "rate", "mean A_rate"],
                [vec![
                    l.acceptance.total.to_string(),
                    l.acceptance.hits.to_string(),
                    pct(l.acceptance.rate),
                    num(l.mean_a_rate),
                ]],
            );
            if let Some(o) = &l.overlap {
                table(
                    &mut md,
                    &["both", "extracted only", "labeled only"],
                    [vec![o.both.to_string(), o.extracted_only.to_string(), o.labeled_only.to_string()]],
                );
            }
            let _ = writeln!(md, "Spearman correlations over {} sentences:\n", l.correlations.n);
            let mut header = vec![""];
            header.extend(l.correlations.quantities.iter().map(String::as_str));
            table(
                &mut md,
                &header,
                l.correlations.quantities.iter().zip(&l.correlations.values).map(|(q, row)| {
                    let mut cells = vec![q.clone()];
                    cells.extend(row.iter().map(|v| num(*v)));
                    cells
                }),
            );
        }
        if let Some(d) = &a.decisions {
            let _ = writeln!(md, "## Decisions against labels\n");
            table(
                &mut md,
                &["label", "yes", "no", "undecidable"],
                [("yes", &d.labeled_yes), ("no", &d.labeled_no)].into_iter().map(|(l, s)| {
                    vec![l.to_string(), s.yes.to_string(), s.no.to_string(), s.undecidable.to_string()]
                }),
            );
            let _ = writeln!(md, "agreement {}\n", pct(d.agreement.rate));
        }
        if let Some(y) = &a.yes {
            let _ = writeln!(md, "## Yes checker (φ {})\n", y.mode);
            table(
                &mut md,
                &["subset", "accepted", "total", "rate"],
                [("all", &y.accepted), ("labeled yes", &y.labeled_yes), ("labeled no", &y.labeled_no)]
                    .into_iter()
                    .map(rate_row),
            );
        }
        if let Some(n) = &a.no {
            let _ = writeln!(md, "## No checker\n");
            let names: Vec<String> = n.categories.iter().map(|c| c.category.to_string()).collect();
            let mut rows: Vec<(&str, &Rate)> =
                names.iter().map(String::as_str).zip(n.categories.iter().map(|c| &c.accepted)).collect();
            rows.push(("all", &n.accepted));
            table(&mut md, &["category", "accepted", "total", "rate"], rows.into_iter().map(rate_row));
            let _ = writeln!(md, "untestable {} · rejected with evidence {}\n", n.untestable, n.with_evidence);
        }
        if let Some(r) = &a.roundtrip {
            let _ = writeln!(md, "## Roundtrip\n");
            table(
                &mut md,
                &["inconsistent", "decided", "rate", "undecidable"],
                [vec![
                    r.inconsistent.hits.to_string(),
                    r.inconsistent.total.to_string(),
                    pct(r.inconsistent.rate),
                    r.undecidable.to_string(),
                ]],
            );
        }
        md
    }
}

fn rate_row((name, r): (&str, &Rate)) -> Vec<String> {
    vec![name.to_string(), r.hits.to_string(), r.total.to_string(), pct(r.rate)]
}

fn pct(r: Option<f64>) -> String {
    r.map_or("n/a".into(), |r| format!("{:.2}%", 100.0 * r))
}

fn num(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |v| format!("{v:.3}"))
}

fn table(md: &mut String, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) {
    let _ = writeln!(md, "| {} |", header.join(" | "));
    let _ = writeln!(md, "|{}", "---|".repeat(header.len()));
    for row in rows {
        let _ = writeln!(md, "| {} |", row.join(" | "));
    }
    md.push('\n');
}
