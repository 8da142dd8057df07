use rand::Rng;
use serde::{Deserialize, Serialize};

use super::entity::entity_ballot;
use super::{CharVector, EntitySet, LinearityError, SynonymTable};
use crate::oracle::{bindings, majority_vote, ExtractedEntity, Parsed, Session, TemplateId};
use crate::text::{find_free, normalize};

/// R(v): replaces the first occurrence of every entity whose bit is 1 by its
/// synonym. Occurrences are located in the original sentence left to right
/// without overlapping one another, then spliced in a single pass.
pub fn apply_replacement(sentence: &str, v: &CharVector, table: &SynonymTable) -> Result<String, LinearityError> {
    if v.len() != table.len() {
        return Err(LinearityError::LengthMismatch {
            left: v.len(),
            right: table.len(),
        });
    }
    let mut taken: Vec<(usize, usize)> = Vec::new();
    let mut splices: Vec<(usize, usize, &str)> = Vec::new();
    for (i, pair) in table.pairs.iter().enumerate() {
        if !v.get(i) {
            continue;
        }
        let (s, e) = find_free(sentence, pair.entity.trim(), &taken).ok_or(LinearityError::EntityNotFound(i))?;
        taken.push((s, e));
        splices.push((s, e, pair.synonym.as_str()));
    }
    splices.sort_by_key(|&(s, _, _)| s);
    let mut out = String::with_capacity(sentence.len());
    let mut at = 0;
    for (s, e, syn) in splices {
        out.push_str(&sentence[at..s]);
        out.push_str(syn);
        at = e;
    }
    out.push_str(&sentence[at..]);
    Ok(out)
}

/// Maps one extraction of R(v) back to a characteristic vector.
///
/// Bit i is 1 when the original e_i was extracted without its synonym and 0
/// when the synonym e'_i was extracted without the original, so an ideal
/// extractor on R(v) yields the complement of v. Anything else (both or
/// neither present) makes the observation unmappable (`None`).
pub fn observe_vector(extracted: &[ExtractedEntity], table: &SynonymTable) -> Option<CharVector> {
    let present: Vec<String> = extracted.iter().map(|e| normalize(&e.surface)).collect();
    let has = |s: &str| present.iter().any(|p| *p == normalize(s));
    table
        .pairs
        .iter()
        .map(|pair| match (has(&pair.entity), has(&pair.synonym)) {
            (true, false) => Some(true),
            (false, true) => Some(false),
            _ => None,
        })
        .collect::<Option<Vec<bool>>>()
        .map(CharVector::new)
}

/// Observation of a parsed reply; invalid replies are unmappable.
pub fn observe_parsed(parsed: &Parsed, table: &SynonymTable) -> Option<CharVector> {
    match parsed {
        Parsed::EntityList(list) => observe_vector(list, table),
        _ => None,
    }
}

/// The repeated extractions of one transformed sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extractions {
    pub vector: CharVector,
    pub sentence: String,
    /// One entry per repeat; `None` is unmappable.
    pub observed: Vec<Option<CharVector>>,
    /// Vote count of the most frequent extraction.
    pub con_r: u32,
    /// Every repeat was an invalid reply.
    pub all_invalid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearityTrial {
    pub x: Extractions,
    pub y: Extractions,
    pub xy: Extractions,
}

impl LinearityTrial {
    /// A trial whose transformed sentences could not be extracted at all.
    pub fn untestable(&self) -> bool {
        self.x.all_invalid || self.y.all_invalid || self.xy.all_invalid
    }

    pub fn min_con_r(&self) -> u32 {
        self.x.con_r.min(self.y.con_r).min(self.xy.con_r)
    }
}

fn extract(
    vector: CharVector,
    entity_set: &EntitySet,
    table: &SynonymTable,
    session: &mut Session<'_>,
    repeats: usize,
) -> Result<Extractions, LinearityError> {
    let sentence = apply_replacement(&entity_set.sentence, &vector, table)?;
    let replies = session.query_repeated(TemplateId::EntityExtraction, &bindings([("text", sentence.as_str())]), repeats)?;
    let ballots: Vec<_> = replies.iter().map(|r| entity_ballot(&r.parsed)).collect();
    let con_r = majority_vote(&ballots).map_or(0, |v| v.count as u32);
    Ok(Extractions {
        vector,
        sentence,
        observed: replies.iter().map(|r| observe_parsed(&r.parsed, table)).collect(),
        con_r,
        all_invalid: replies.iter().all(|r| r.parsed.is_invalid()),
    })
}

/// Samples x, y uniformly (with replacement) and extracts R(x), R(y) and
/// R(x ⊕ y) `repeats` times each.
pub fn run_trial(
    entity_set: &EntitySet,
    table: &SynonymTable,
    session: &mut Session<'_>,
    rng: &mut impl Rng,
    repeats: usize,
) -> Result<LinearityTrial, LinearityError> {
    let m = entity_set.m();
    if m == 0 {
        return Err(LinearityError::NoEntities);
    }
    let x = CharVector::random(m, rng);
    let y = CharVector::random(m, rng);
    let xy = x.xor(&y)?;
    Ok(LinearityTrial {
        x: extract(x, entity_set, table, session, repeats)?,
        y: extract(y, entity_set, table, session, repeats)?,
        xy: extract(xy, entity_set, table, session, repeats)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialJudgement {
    pub passed: bool,
    pub passing: u64,
    pub combinations: u64,
    pub pass_rate: f64,
}

/// Checks f(x ⊕ y) = f(x) ⊙ f(y) over every combination of repeats.
pub fn judge_trial(trial: &LinearityTrial) -> TrialJudgement {
    let combinations = (trial.x.observed.len() * trial.y.observed.len() * trial.xy.observed.len()) as u64;
    let mut passing = 0u64;
    for ox in trial.x.observed.iter().flatten() {
        for oy in trial.y.observed.iter().flatten() {
            let Ok(expected) = ox.xnor(oy) else { continue };
            passing += trial
                .xy
                .observed
                .iter()
                .flatten()
                .filter(|oxy| **oxy == expected)
                .count() as u64;
        }
    }
    TrialJudgement {
        passed: passing > 0,
        passing,
        combinations,
        pass_rate: if combinations == 0 {
            0.0
        } else {
            passing as f64 / combinations as f64
        },
    }
}

/// Checks that every entity can be located in the sentence at once, which
/// is what R needs for any vector.
pub fn check_replaceable(entity_set: &EntitySet, table: &SynonymTable) -> Result<(), LinearityError> {
    apply_replacement(&entity_set.sentence, &CharVector::ones(table.len()), table).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearity::{sim, Provenance};
    use crate::oracle::Oracle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn wallonia() -> SynonymTable {
        SynonymTable::from_pairs(
            [("Crupet", "Charleroi"), ("Wallonia", "Liege, Belgium"), ("Belgium", "France")],
            Provenance::OracleReplacement,
        )
        .unwrap()
    }

    #[test]
    fn replacement_examples() {
        let s = "Crupet is a village in Wallonia, Belgium.";
        let t = wallonia();
        assert_eq!(apply_replacement(s, &"000".parse().unwrap(), &t).unwrap(), s);
        assert_eq!(
            apply_replacement(s, &"011".parse().unwrap(), &t).unwrap(),
            "Crupet is a village in Liege, Belgium, France."
        );
        assert_eq!(
            apply_replacement(s, &"111".parse().unwrap(), &t).unwrap(),
            "Charleroi is a village in Liege, Belgium, France."
        );
        assert!(matches!(
            apply_replacement("Crupet is a village.", &"010".parse().unwrap(), &t),
            Err(LinearityError::EntityNotFound(1))
        ));
    }

    /// Independent splice: cut the sentence at the entities' known offsets.
    #[test]
    fn replacement_matches_offset_splice() {
        let s = "Crupet is a village in Wallonia, Belgium.";
        let t = wallonia();
        let offsets = [(0, 6), (23, 31), (33, 40)];
        for i in 0..8u64 {
            let v = CharVector::from_index(i, 3);
            let mut expected = String::new();
            let mut at = 0;
            for (k, &(a, b)) in offsets.iter().enumerate() {
                expected.push_str(&s[at..a]);
                expected.push_str(if v.get(k) { &t.pairs[k].synonym } else { &s[a..b] });
                at = b;
            }
            expected.push_str(&s[at..]);
            assert_eq!(apply_replacement(s, &v, &t).unwrap(), expected, "v={v}");
        }
    }

    fn ents(names: &[&str]) -> Vec<ExtractedEntity> {
        names
            .iter()
            .map(|n| ExtractedEntity {
                class: "x".into(),
                surface: n.to_string(),
            })
            .collect()
    }

    #[test]
    fn observation_rules() {
        let t = wallonia();
        assert_eq!(
            observe_vector(&ents(&["Crupet", "Wallonia", "Belgium"]), &t),
            Some(CharVector::ones(3))
        );
        assert_eq!(observe_vector(&ents(&["Crupet", "Charleroi", "Wallonia", "Belgium"]), &t), None);
        assert_eq!(observe_vector(&ents(&["Wallonia", "Belgium"]), &t), None);
        assert_eq!(
            observe_vector(&ents(&["Charleroi", "liege,  belgium", "Belgium"]), &t),
            Some("001".parse().unwrap())
        );
    }

    #[test]
    fn ideal_extractor_observes_complement_exhaustively() {
        let (set, table) = sim::synthetic_sentence(4, &mut ChaCha8Rng::seed_from_u64(1));
        let oracle = Oracle::new(sim::ideal_extractor(&table));
        for i in 0..16 {
            let v = CharVector::from_index(i, 4);
            let text = apply_replacement(&set.sentence, &v, &table).unwrap();
            let mut s = oracle.session();
            let r = s.query(TemplateId::EntityExtraction, &bindings([("text", text.as_str())])).unwrap();
            assert_eq!(observe_parsed(&r.parsed, &table), Some(v.complement()));
        }
    }

    #[test]
    fn ideal_trials_pass_with_rate_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for m in 1..=10 {
            let (set, table) = sim::synthetic_sentence(m, &mut rng);
            let oracle = Oracle::new(sim::ideal_extractor(&table));
            for _ in 0..5 {
                let trial = run_trial(&set, &table, &mut oracle.session(), &mut rng, 11).unwrap();
                assert_eq!(trial.x.observed.len(), 11);
                assert_eq!(trial.xy.vector, trial.x.vector.xor(&trial.y.vector).unwrap());
                let j = judge_trial(&trial);
                assert!(j.passed && j.pass_rate == 1.0 && j.combinations == 1331);
            }
        }
    }

    #[test]
    fn all_unmappable_fails() {
        let v = CharVector::zeros(2);
        let ex = Extractions {
            vector: v.clone(),
            sentence: String::new(),
            observed: vec![None; 11],
            con_r: 11,
            all_invalid: true,
        };
        let trial = LinearityTrial {
            x: ex.clone(),
            y: ex.clone(),
            xy: ex,
        };
        let j = judge_trial(&trial);
        assert!(!j.passed);
        assert_eq!(j.pass_rate, 0.0);
        assert!(trial.untestable());
    }

    /// Each of the three observation lists is right on 6 of 11 repeats and
    /// unmappable otherwise; the pass rate must equal the enumerated count.
    #[test]
    fn six_of_eleven_rate_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = CharVector::random(5, &mut rng);
        let y = CharVector::random(5, &mut rng);
        let xy = x.xor(&y).unwrap();
        let mk = |v: &CharVector, wrong: &CharVector, rng: &mut ChaCha8Rng| {
            let mut obs: Vec<Option<CharVector>> = vec![Some(v.complement()); 6];
            obs.extend((0..5).map(|k| if k % 2 == 0 { None } else { Some(wrong.clone()) }));
            use rand::seq::SliceRandom;
            obs.shuffle(rng);
            Extractions {
                vector: v.clone(),
                sentence: String::new(),
                observed: obs,
                con_r: 6,
                all_invalid: false,
            }
        };
        // wrong answers that can never complete a passing triple
        let w = CharVector::from_index(0b10101, 5);
        let trial = LinearityTrial {
            x: mk(&x, &w, &mut rng),
            y: mk(&y, &w.complement(), &mut rng),
            xy: mk(&xy, &xy, &mut rng),
        };
        let mut count = 0u64;
        for a in 0..11 {
            for b in 0..11 {
                for c in 0..11 {
                    let (Some(oa), Some(ob), Some(oc)) =
                        (&trial.x.observed[a], &trial.y.observed[b], &trial.xy.observed[c])
                    else {
                        continue;
                    };
                    if oc.bits().iter().zip(oa.bits().iter().zip(ob.bits())).all(|(&z, (&p, &q))| z == (p == q)) {
                        count += 1;
                    }
                }
            }
        }
        let j = judge_trial(&trial);
        assert_eq!(j.passing, count);
        assert_eq!(j.combinations, 1331);
        assert!((j.pass_rate - count as f64 / 1331.0).abs() < 1e-15);
        // when the wrong answers never line up the count is exactly 6³
        let only_right = (0..11).filter(|&i| trial.x.observed[i] == Some(x.complement())).count()
            * (0..11).filter(|&i| trial.y.observed[i] == Some(y.complement())).count()
            * (0..11).filter(|&i| trial.xy.observed[i] == Some(xy.complement())).count();
        assert_eq!(only_right, 216);
        assert!(count >= 216);
    }
}
