use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::evidence::{EvidenceLink, TriangularEvidence};
use super::{
    ask_pair, decision, entry_ref, generate_paraphrases, EquivalenceClaim, ParaphraseError, ParaphraseSet,
};
use crate::alignment::{phi, AlignConfig, ConfirmCache, EntryRef, ParseTree, Side};
use crate::lingua::{AdapterSimilarity, LinguaAdapter};
use crate::oracle::{Answer, Session};

/// Which of the two structural facts hold for a claim: A when the two
/// sentences align, I when an indifferentiable paraphrase exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "AI")]
    AI,
    #[serde(rename = "ĀI")]
    NotAI,
    #[serde(rename = "AĪ")]
    ANotI,
    #[serde(rename = "ĀĪ")]
    NotANotI,
}

impl Category {
    /// Priority order.
    pub const ALL: [Category; 4] = [Category::AI, Category::NotAI, Category::ANotI, Category::NotANotI];

    pub fn from_flags(aligned: bool, indifferentiable: bool) -> Self {
        // first applicable in priority order
        *Self::ALL
            .iter()
            .find(|c| c.aligned() == aligned && c.indifferentiable() == indifferentiable)
            .expect("the four categories cover every flag pair")
    }

    pub fn aligned(self) -> bool {
        matches!(self, Category::AI | Category::ANotI)
    }

    pub fn indifferentiable(self) -> bool {
        matches!(self, Category::AI | Category::NotAI)
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::AI => "AI",
            Category::NotAI => "ĀI",
            Category::ANotI => "AĪ",
            Category::NotANotI => "ĀĪ",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoVerdict {
    /// Every test answer stayed consistent with "no".
    Accept,
    /// The oracle contradicted its "no".
    Reject,
    /// Paraphrases could not be obtained.
    Untestable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoTestConfig {
    pub n_tests: usize,
}

impl Default for NoTestConfig {
    fn default() -> Self {
        Self { n_tests: 1 }
    }
}

/// A paraphrase of one side that aligns with the other side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Indifferentiable {
    pub p: String,
    pub source: Side,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoTestRound {
    pub coin: Side,
    pub p: String,
    pub p_source: Side,
    pub indifferentiable: bool,
    /// `None` for an unparsable reply, which counts as not yes.
    pub answer: Option<Answer>,
    pub entry: EntryRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoTestRecord {
    pub category: Option<Category>,
    pub verdict: NoVerdict,
    pub tests_run: usize,
    pub rounds: Vec<NoTestRound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen_p: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_source: Option<Side>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coin: Option<Side>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indifferentiable: Option<Indifferentiable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<TriangularEvidence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub untestable_reason: Option<String>,
}

impl NoTestRecord {
    fn untestable(reason: String) -> Self {
        Self {
            category: None,
            verdict: NoVerdict::Untestable,
            tests_run: 0,
            rounds: Vec::new(),
            chosen_p: None,
            p_source: None,
            coin: None,
            indifferentiable: None,
            evidence: None,
            untestable_reason: Some(reason),
        }
    }
}

/// Per-claim state shared by the scans and the tests.
struct Sides<'a> {
    sentences: [&'a str; 2],
    trees: [ParseTree; 2],
    paras: [&'a [String]; 2],
}

fn idx(side: Side) -> usize {
    match side {
        Side::S1 => 0,
        Side::S2 => 1,
    }
}

fn scan_side(
    side: Side,
    sides: &Sides<'_>,
    adapter: &dyn LinguaAdapter,
    session: &mut Session<'_>,
    cache: &mut ConfirmCache,
    config: &AlignConfig,
) -> Result<Option<Indifferentiable>, ParaphraseError> {
    let other = &sides.trees[idx(side.other())];
    for (index, p) in sides.paras[idx(side)].iter().enumerate() {
        let tree = adapter.parse(p)?;
        let outcome = phi(&tree, other, &AdapterSimilarity(adapter), session, cache, config)?;
        if outcome.holds {
            return Ok(Some(Indifferentiable {
                p: p.clone(),
                source: side,
                index,
            }));
        }
    }
    Ok(None)
}

/// First paraphrase of s1 that φ-aligns with s2, else the first of s2 that
/// aligns with s1.
#[allow(clippy::too_many_arguments)]
pub fn find_indifferentiable(
    s1: &str,
    s2: &str,
    paras1: &[String],
    paras2: &[String],
    adapter: &dyn LinguaAdapter,
    session: &mut Session<'_>,
    cache: &mut ConfirmCache,
    config: &AlignConfig,
) -> Result<Option<Indifferentiable>, ParaphraseError> {
    let sides = Sides {
        sentences: [s1, s2],
        trees: [adapter.parse(s1)?, adapter.parse(s2)?],
        paras: [paras1, paras2],
    };
    for side in [Side::S1, Side::S2] {
        if let Some(hit) = scan_side(side, &sides, adapter, session, cache, config)? {
            return Ok(Some(hit));
        }
    }
    Ok(None)
}

/// Tests a "no" claim.
///
/// Each of the `n_tests` rounds tosses a coin for a side, takes an
/// indifferentiable paraphrase from that side (or the other side's when
/// that side has none), or failing any, a uniform pick from all ten
/// paraphrases. The oracle is asked whether p is equivalent to the sentence
/// opposite p's origin; a yes closes the triangle and rejects the claim.
pub fn run_no_test(
    claim: &EquivalenceClaim,
    adapter: &dyn LinguaAdapter,
    session: &mut Session<'_>,
    rng: &mut impl Rng,
    cache: &mut ConfirmCache,
    align: &AlignConfig,
    config: &NoTestConfig,
) -> Result<NoTestRecord, ParaphraseError> {
    if claim.answer != Some(Answer::No) {
        return Err(ParaphraseError::WrongRoute {
            checker: "no",
            found: claim.answer_label().to_string(),
        });
    }
    let mut sets: Vec<ParaphraseSet> = Vec::with_capacity(2);
    for s in [&claim.s1, &claim.s2] {
        match generate_paraphrases(s, session) {
            Ok(set) => sets.push(set),
            Err(ParaphraseError::NoParaphrases(s)) => {
                return Ok(NoTestRecord::untestable(format!("no usable paraphrases for '{s}'")))
            }
            Err(e) => return Err(e),
        }
    }
    let sides = Sides {
        sentences: [&claim.s1, &claim.s2],
        trees: [adapter.parse(&claim.s1)?, adapter.parse(&claim.s2)?],
        paras: [&sets[0].items, &sets[1].items],
    };
    let aligned = phi(&sides.trees[0], &sides.trees[1], &AdapterSimilarity(adapter), session, cache, align)?.holds;

    // hits[side]: None = not scanned yet
    let mut hits: [Option<Option<Indifferentiable>>; 2] = [None, None];
    hits[0] = Some(scan_side(Side::S1, &sides, adapter, session, cache, align)?);
    if hits[0].as_ref().is_some_and(Option::is_none) {
        hits[1] = Some(scan_side(Side::S2, &sides, adapter, session, cache, align)?);
    }
    let first_hit = hits.iter().flatten().flatten().next().cloned();
    let category = Category::from_flags(aligned, first_hit.is_some());

    let pool: Vec<(Side, &String)> =
        [Side::S1, Side::S2].iter().flat_map(|&s| sides.paras[idx(s)].iter().map(move |p| (s, p))).collect();
    let mut rounds = Vec::with_capacity(config.n_tests);
    let mut evidence = None;
    for _ in 0..config.n_tests {
        let coin = if rng.random_bool(0.5) { Side::S1 } else { Side::S2 };
        let (p, p_source, indiff) = if first_hit.is_some() {
            if hits[idx(coin)].is_none() {
                hits[idx(coin)] = Some(scan_side(coin, &sides, adapter, session, cache, align)?);
            }
            let hit = hits[idx(coin)]
                .clone()
                .flatten()
                .or_else(|| hits[idx(coin.other())].clone().flatten())
                .expect("some side has an indifferentiable paraphrase");
            (hit.p, hit.source, true)
        } else {
            let (s, p) = pool[rng.random_range(0..pool.len())];
            (p.clone(), s, false)
        };
        let opposite = sides.sentences[idx(p_source.other())];
        let reply = ask_pair(&p, opposite, session)?;
        let (answer, _) = decision(&reply);
        let round = NoTestRound {
            coin,
            p: p.clone(),
            p_source,
            indifferentiable: indiff,
            answer,
            entry: entry_ref(&reply),
        };
        rounds.push(round);
        if answer == Some(Answer::Yes) {
            let generated = EvidenceLink::Generated {
                source: sides.sentences[idx(p_source)].to_string(),
                entry: sets[idx(p_source)].entry.clone(),
            };
            let decided = EvidenceLink::Decided {
                sentence1: p.clone(),
                sentence2: opposite.to_string(),
                entry: entry_ref(&reply),
            };
            let (c1, c2) = match p_source {
                Side::S1 => (generated, decided),
                Side::S2 => (decided, generated),
            };
            evidence = Some(TriangularEvidence {
                s1: claim.s1.clone(),
                s2: claim.s2.clone(),
                p,
                p_source,
                claim: claim.entry.clone(),
                confirmation_p_s1: c1,
                confirmation_p_s2: c2,
            });
            break;
        }
    }
    let last = rounds.last();
    Ok(NoTestRecord {
        category: Some(category),
        verdict: if evidence.is_some() { NoVerdict::Reject } else { NoVerdict::Accept },
        tests_run: rounds.len(),
        chosen_p: last.map(|r| r.p.clone()),
        p_source: last.map(|r| r.p_source),
        coin: last.map(|r| r.coin),
        rounds,
        indifferentiable: first_hit,
        evidence,
        untestable_reason: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::{ExemptTags, LexicalSimilarity};
    use crate::lingua::FixtureAdapter;
    use crate::oracle::{Oracle, ScriptRule, ScriptedBackend, TemplateId};
    use crate::paraphrase::{decide_equivalence, verify_evidence};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const YES: &str = r#"{"answer": "yes", "explanation": "same"}"#;
    const NO: &str = r#"{"answer": "no", "explanation": "differs"}"#;

    const CATS: &str = "Cats chase mice.";
    const FELINES: &str = "Felines chase mice.";
    const DOGS: &str = "Dogs eat bones.";

    fn adapter() -> FixtureAdapter {
        FixtureAdapter::new(LexicalSimilarity::new(ExemptTags::default()).alias("felines", "cats"))
    }

    fn paraphrases(list: &[&str]) -> String {
        serde_json::json!({ "paraphrases": list }).to_string()
    }

    /// Oracle that lists `p1`/`p2` as paraphrases of `s1`/`s2`, confirms
    /// every phrase pair, and answers Prompt 5 with `decision`.
    fn oracle(s1: &str, p1: &[&str], s2: &str, p2: &[&str], decision: &str) -> Oracle {
        Oracle::new(
            ScriptedBackend::new(0)
                .with_rule(ScriptRule::new(
                    Some(TemplateId::ParaphraseGeneration),
                    &[&format!("'{s1}'")],
                    &[&paraphrases(p1)],
                ))
                .with_rule(ScriptRule::new(
                    Some(TemplateId::ParaphraseGeneration),
                    &[&format!("'{s2}'")],
                    &[&paraphrases(p2)],
                ))
                .with_rule(ScriptRule::new(Some(TemplateId::PhraseEquivalence), &[], &[YES]))
                .with_rule(ScriptRule::new(Some(TemplateId::PairEquivalence), &[], &[decision])),
        )
    }

    const FILLER: [&str; 4] = ["Zebras graze slowly.", "Owls hoot nightly.", "Frogs croak often.", "Bees hum softly."];

    fn no_claim(s1: &str, s2: &str) -> EquivalenceClaim {
        EquivalenceClaim {
            s1: s1.into(),
            s2: s2.into(),
            answer: Some(Answer::No),
            explanation: String::new(),
            entry: EntryRef {
                prompt_hash: String::new(),
                repeat_index: 0,
            },
        }
    }

    const P2: [&str; 5] = ["Moths flutter.", "Crows caw.", "Seals bask.", "Wolves howl.", "Deer leap."];

    fn run(s1: &str, s2: &str, extra1: Option<&str>, n: usize, decision: &str, seed: u64) -> NoTestRecord {
        let mut p1: Vec<&str> = FILLER.to_vec();
        p1.push(extra1.unwrap_or("Ants march quietly."));
        let oracle = oracle(s1, &p1, s2, &P2, decision);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        run_no_test(
            &no_claim(s1, s2),
            &adapter(),
            &mut oracle.session(),
            &mut rng,
            &mut ConfirmCache::new(),
            &AlignConfig::default(),
            &NoTestConfig { n_tests: n },
        )
        .unwrap()
    }

    #[test]
    fn categories_in_priority_order() {
        let cases = [
            (CATS, FELINES, Some(FELINES), Category::AI),
            (CATS, DOGS, Some(DOGS), Category::NotAI),
            (CATS, FELINES, None, Category::ANotI),
            (CATS, DOGS, None, Category::NotANotI),
        ];
        for (s1, s2, extra, expected) in cases {
            let r = run(s1, s2, extra, 1, NO, 1);
            assert_eq!(r.category, Some(expected), "{s1} / {s2}");
            assert_eq!(r.indifferentiable.is_some(), expected.indifferentiable());
        }
        assert_eq!(Category::from_flags(true, true), Category::AI);
        assert_eq!(Category::from_flags(false, false), Category::NotANotI);
    }

    #[test]
    fn indifferentiable_paraphrase_is_used() {
        for seed in 0..8 {
            let r = run(CATS, DOGS, Some(DOGS), 3, NO, seed);
            for round in &r.rounds {
                assert!(round.indifferentiable);
                assert_eq!((round.p.as_str(), round.p_source), (DOGS, Side::S1));
            }
        }
    }

    #[test]
    fn consistent_oracle_is_accepted() {
        for seed in 0..20 {
            let r = run(CATS, DOGS, None, 5, NO, seed);
            assert_eq!(r.verdict, NoVerdict::Accept);
            assert_eq!(r.tests_run, 5);
            assert!(r.evidence.is_none());
        }
    }

    #[test]
    fn agreeing_with_both_sides_is_rejected_with_evidence() {
        let o = Oracle::new(
            ScriptedBackend::new(0)
                .with_rule(ScriptRule::new(
                    Some(TemplateId::ParaphraseGeneration),
                    &[],
                    &[&paraphrases(&FILLER)],
                ))
                .with_rule(ScriptRule::new(
                    Some(TemplateId::PairEquivalence),
                    &[&format!("'{CATS}'"), &format!("'{DOGS}'")],
                    &[NO],
                ))
                .with_rule(ScriptRule::new(None, &[], &[YES])),
        );
        let mut session = o.session();
        let claim = decide_equivalence(CATS, DOGS, &mut session).unwrap();
        assert_eq!(claim.answer, Some(Answer::No));
        let r = run_no_test(
            &claim,
            &adapter(),
            &mut session,
            &mut ChaCha8Rng::seed_from_u64(2),
            &mut ConfirmCache::new(),
            &AlignConfig::default(),
            &NoTestConfig::default(),
        )
        .unwrap();
        assert_eq!(r.verdict, NoVerdict::Reject);
        let ev = r.evidence.unwrap();
        assert_eq!((ev.s1.as_str(), ev.s2.as_str()), (CATS, DOGS));
        let transcript = o.transcript();
        verify_evidence(&ev, &transcript, None).unwrap();
        let mut forged = ev.clone();
        forged.p = "Birds sing.".into();
        assert!(verify_evidence(&forged, &transcript, None).is_err());
    }

    #[test]
    fn missing_paraphrases_make_record_untestable() {
        let o = Oracle::new(
            ScriptedBackend::new(0)
                .with_rule(ScriptRule::new(Some(TemplateId::ParaphraseGeneration), &[], &["I cannot."]))
                .with_rule(ScriptRule::new(None, &[], &[NO])),
        );
        let r = run_no_test(
            &no_claim(CATS, DOGS),
            &adapter(),
            &mut o.session(),
            &mut ChaCha8Rng::seed_from_u64(0),
            &mut ConfirmCache::new(),
            &AlignConfig::default(),
            &NoTestConfig::default(),
        )
        .unwrap();
        assert_eq!(r.verdict, NoVerdict::Untestable);
        assert!(r.category.is_none());
    }

    #[test]
    fn yes_claims_never_enter() {
        let o = oracle(CATS, &FILLER, DOGS, &FILLER, NO);
        let mut claim = no_claim(CATS, DOGS);
        claim.answer = Some(Answer::Yes);
        let r = run_no_test(
            &claim,
            &adapter(),
            &mut o.session(),
            &mut ChaCha8Rng::seed_from_u64(0),
            &mut ConfirmCache::new(),
            &AlignConfig::default(),
            &NoTestConfig::default(),
        );
        assert!(matches!(r, Err(ParaphraseError::WrongRoute { .. })));
        assert_eq!(o.transcript().len(), 0);
    }

    #[test]
    fn find_indifferentiable_scans_s1_first() {
        let o = oracle(CATS, &FILLER, DOGS, &FILLER, NO);
        let a = adapter();
        let mut s = o.session();
        let paras1 = vec!["Owls hoot.".to_string(), DOGS.to_string()];
        let paras2 = vec![CATS.to_string()];
        let hit = find_indifferentiable(CATS, DOGS, &paras1, &paras2, &a, &mut s, &mut ConfirmCache::new(), &AlignConfig::default())
            .unwrap()
            .unwrap();
        assert_eq!((hit.p.as_str(), hit.source, hit.index), (DOGS, Side::S1, 1));
        let none = find_indifferentiable(CATS, DOGS, &paras1[..1], &[], &a, &mut s, &mut ConfirmCache::new(), &AlignConfig::default())
            .unwrap();
        assert!(none.is_none());
    }
}
