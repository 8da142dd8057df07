//! Synthetic sentences and scripted extractors for exercising the test.
//!
//! Surfaces are fixed-length random words, so no surface is a substring of
//! another and a responder can tell which entities a prompt mentions by
//! plain substring search.

use rand::seq::index::sample;
use rand::Rng;

use super::{CharVector, Entity, EntitySet, Provenance, SynonymTable};
use crate::oracle::{OracleRequest, ScriptedBackend, TemplateId};

const WORD_LEN: usize = 7;
const FILLERS: &[&str] = &["met", "and", "near", "with", "after", "beside", "saw"];

fn word(rng: &mut impl Rng) -> String {
    let mut w = String::with_capacity(WORD_LEN);
    w.push(rng.random_range(b'A'..=b'Z') as char);
    for _ in 1..WORD_LEN {
        w.push(rng.random_range(b'a'..=b'z') as char);
    }
    w
}

fn distinct_words(n: usize, rng: &mut impl Rng) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(n);
    while out.len() < n {
        let w = word(rng);
        if !out.contains(&w) {
            out.push(w);
        }
    }
    out
}

/// A sentence mentioning m person entities once each, with a synonym table.
pub fn synthetic_sentence(m: usize, rng: &mut impl Rng) -> (EntitySet, SynonymTable) {
    let words = distinct_words(2 * m, rng);
    let (names, synonyms) = words.split_at(m);
    let mut sentence = String::new();
    for (i, n) in names.iter().enumerate() {
        if i > 0 {
            sentence.push(' ');
            sentence.push_str(FILLERS[rng.random_range(0..FILLERS.len())]);
            sentence.push(' ');
        }
        sentence.push_str(n);
    }
    sentence.push('.');
    let set = EntitySet {
        sentence,
        entities: names.iter().map(|n| Entity::new(n.clone(), "person")).collect(),
        con_o: 0,
    };
    let table = SynonymTable::from_pairs(
        names.iter().map(String::as_str).zip(synonyms.iter().map(String::as_str)),
        Provenance::OracleReplacement,
    )
    .expect("synthetic synonyms differ from their entities");
    (set, table)
}

/// The v that produced a prompt: bit i is set when e'_i occurs in it.
pub fn decode_vector(prompt: &str, table: &SynonymTable) -> CharVector {
    CharVector::new(table.pairs.iter().map(|p| prompt.contains(p.synonym.as_str())).collect())
}

fn entity_list(items: impl Iterator<Item = String>) -> String {
    items
        .enumerate()
        .map(|(i, s)| format!("{}. person: {s}", i + 1))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Lists `e_i` where `u_i = 1` and `e'_i` otherwise.
pub fn render_image(u: &CharVector, table: &SynonymTable) -> String {
    entity_list(table.pairs.iter().enumerate().map(|(i, p)| {
        if u.get(i) {
            p.entity.clone()
        } else {
            p.synonym.clone()
        }
    }))
}

/// Answers the synonym pipeline prompts from `table`: classification says
/// named, replacement and synonym prompts list e'_i first.
fn pipeline_reply(request: &OracleRequest<'_>, table: &SynonymTable) -> Option<String> {
    let text = &request.prompt.human;
    match request.prompt.template {
        TemplateId::NamedClassification => Some("A specific name. [[named entity]]".into()),
        TemplateId::NamedReplacement | TemplateId::SynonymList => table
            .pairs
            .iter()
            .find(|p| text.contains(&format!("\"{}\" in the sentence", p.entity)))
            .map(|p| format!("1. {}\n2. {}", p.synonym, p.entity)),
        _ => None,
    }
}

/// Extracts exactly the table surfaces that occur in the sentence: the
/// homomorphism the test expects, f(v) = complement(v).
pub fn ideal_extractor(table: &SynonymTable) -> ScriptedBackend {
    let table = table.clone();
    ScriptedBackend::new(0).with_responder(move |r| ideal_reply(r, &table))
}

/// The reply [`ideal_extractor`] gives to `request`.
pub fn ideal_reply(request: &OracleRequest<'_>, table: &SynonymTable) -> Option<String> {
    match request.prompt.template {
        TemplateId::EntityExtraction => {
            let u = decode_vector(&request.prompt.human, table).complement();
            Some(render_image(&u, table))
        }
        _ => pipeline_reply(request, table),
    }
}

/// Ideal extractor over several synthetic sentences: each prompt is
/// answered from the table whose entities or synonyms it mentions.
pub fn ideal_extractor_for(tables: Vec<SynonymTable>) -> ScriptedBackend {
    ScriptedBackend::new(0).with_responder(move |r| {
        let text = &r.prompt.human;
        let table = tables.iter().find(|t| {
            t.pairs
                .iter()
                .any(|p| text.contains(p.entity.as_str()) || text.contains(p.synonym.as_str()))
        })?;
        ideal_reply(r, table)
    })
}

/// Extractor defined by a lookup table over {0,1}^m: on R(v) it answers
/// `render_image(f[v])`.
pub fn table_extractor(table: &SynonymTable, f: Vec<CharVector>) -> ScriptedBackend {
    let table = table.clone();
    ScriptedBackend::new(0).with_responder(move |r| match r.prompt.template {
        TemplateId::EntityExtraction => {
            let v = decode_vector(&r.prompt.human, &table);
            Some(render_image(&f[v.to_index() as usize], &table))
        }
        _ => pipeline_reply(r, &table),
    })
}

/// The ideal image table complement(v), with exactly ⌈ε·2^m⌉ inputs moved to
/// a different, uniformly drawn output.
pub fn corrupted_table(m: usize, epsilon: f64, rng: &mut impl Rng) -> Vec<CharVector> {
    assert!(m < 24, "table over 2^{m} inputs is too large");
    let n = 1usize << m;
    let mut f: Vec<CharVector> = (0..n as u64).map(|i| CharVector::from_index(i, m).complement()).collect();
    let k = ((epsilon * n as f64).ceil() as usize).min(n);
    for i in sample(rng, n, k) {
        let current = f[i].to_index();
        let mut next = current;
        while next == current {
            next = rng.random_range(0..n as u64);
        }
        f[i] = CharVector::from_index(next, m);
    }
    f
}

/// Fraction of inputs on which `f` and `g` disagree.
pub fn distance(f: &[CharVector], g: &[CharVector]) -> f64 {
    let diff = f.iter().zip(g).filter(|(a, b)| a != b).count();
    diff as f64 / f.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn surfaces_do_not_nest() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (set, table) = synthetic_sentence(8, &mut rng);
        for a in &table.pairs {
            for b in &table.pairs {
                for (x, y) in [(&a.entity, &b.synonym), (&a.synonym, &b.entity)] {
                    assert!(!x.contains(y.as_str()));
                }
            }
            assert_eq!(set.sentence.matches(a.entity.as_str()).count(), 1);
        }
    }

    #[test]
    fn corruption_count_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ideal: Vec<CharVector> = (0..64).map(|i| CharVector::from_index(i, 6).complement()).collect();
        for (eps, k) in [(0.10, 7), (0.25, 16), (1.0, 64)] {
            let f = corrupted_table(6, eps, &mut rng);
            assert_eq!(f.iter().zip(&ideal).filter(|(a, b)| a != b).count(), k);
        }
    }
}
