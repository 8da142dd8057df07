use sha2::{Digest, Sha256};

use super::{LinguaAdapter, LinguaError};
use crate::alignment::{Embedder, Node, NodeSimilarity, ParseTree, SimMatrix, SpanCosine, Token, TreeDocument};

pub const EMBEDDING_DIM: usize = 32;

const PUNCT: &[char] = &[',', '.', ';', ':', '!', '?', '"', '(', ')', '\''];

/// Whitespace split, then leading and trailing punctuation peeled into
/// tokens of their own. Interior periods (`U.S.`) stay attached.
pub fn tokenize(sentence: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in sentence.split_whitespace() {
        let mut w = word;
        let mut lead = Vec::new();
        while let Some(c) = w.chars().next().filter(|c| PUNCT.contains(c)) {
            if w.len() == c.len_utf8() {
                break;
            }
            lead.push(c.to_string());
            w = &w[c.len_utf8()..];
        }
        let mut trail = Vec::new();
        while let Some(c) = w.chars().last().filter(|c| PUNCT.contains(c)) {
            if w.len() == c.len_utf8() {
                break;
            }
            let rest = &w[..w.len() - c.len_utf8()];
            // abbreviation: keep the final period of "U.S."
            if c == '.' && rest.contains('.') {
                break;
            }
            trail.push(c.to_string());
            w = rest;
        }
        out.extend(lead);
        out.push(w.to_string());
        out.extend(trail.into_iter().rev());
    }
    out
}

const LEXICON: &[(&str, &[&str])] = &[
    ("DT", &["the", "a", "an", "this", "these", "those", "every", "each", "some", "any", "no", "another", "all", "both"]),
    (
        "IN",
        &[
            "in", "on", "at", "of", "for", "with", "by", "from", "about", "into", "over", "after", "before", "around",
            "under", "between", "through", "during", "without", "within", "than", "as", "that", "since", "because",
            "if", "while", "against", "across", "toward", "towards", "upon", "near",
        ],
    ),
    ("TO", &["to"]),
    ("CC", &["and", "or", "but", "nor", "yet"]),
    ("PRP", &["i", "you", "he", "she", "it", "we", "they", "him", "her", "them", "us", "me"]),
    ("PRP$", &["his", "their", "its", "our", "my", "your"]),
    ("MD", &["will", "would", "can", "could", "may", "might", "shall", "should", "must"]),
    ("VBZ", &["is", "has", "does", "says"]),
    ("VBD", &["was", "were", "had", "did", "said", "made", "took", "got", "went", "saw", "found", "gave", "told"]),
    ("VBP", &["are", "have", "do", "am"]),
    ("VB", &["be"]),
    ("VBN", &["been"]),
    ("WDT", &["which", "whichever"]),
    ("WP", &["who", "whom", "what"]),
    ("RB", &["not", "very", "also", "quite", "never", "often", "just", "still", "already", "too", "n't", "soon"]),
    ("EX", &["there"]),
    (
        "JJ",
        &["old", "new", "good", "big", "small", "long", "first", "last", "high", "large", "young", "great", "other"],
    ),
];

/// Part-of-speech tag from a closed-class lexicon, then shape and suffix
/// rules.
pub fn tag_token(token: &str, sentence_initial: bool) -> String {
    let lower = token.to_lowercase();
    if let Some((tag, _)) = LEXICON.iter().find(|(_, words)| words.contains(&lower.as_str())) {
        return tag.to_string();
    }
    let tag = match token {
        "." | "!" | "?" => ".",
        "," => ",",
        ";" | ":" => ":",
        "\"" | "'" => "''",
        "(" => "-LRB-",
        ")" => "-RRB-",
        _ if token.chars().all(|c| c.is_ascii_digit() || c == ',' || c == '.') => "CD",
        _ if token.chars().next().is_some_and(char::is_uppercase) && !sentence_initial => {
            if lower.ends_with('s') && lower.len() > 3 && !lower.ends_with("ss") {
                "NNPS"
            } else {
                "NNP"
            }
        }
        _ if lower.ends_with("ly") => "RB",
        _ if lower.ends_with("ing") && lower.len() > 4 => "VBG",
        _ if lower.ends_with("ed") && lower.len() > 3 => "VBD",
        _ if ["ous", "ful", "ive", "able", "ible", "al", "ic", "less"].iter().any(|s| lower.ends_with(s)) => "JJ",
        _ if lower.ends_with('s') && lower.len() > 3 && !lower.ends_with("ss") => "NNS",
        _ => "NN",
    };
    tag.to_string()
}

fn is_nominal(tag: &str) -> bool {
    matches!(tag, "DT" | "PRP$" | "JJ" | "CD" | "NN" | "NNS" | "NNP" | "NNPS" | "PRP" | "EX")
}

fn is_verbal(tag: &str) -> bool {
    tag.starts_with("VB") || tag == "MD"
}

fn is_boundary(tag: &str) -> bool {
    matches!(tag, "." | "," | ":" | "''" | "-LRB-" | "-RRB-" | "CC")
}

/// A phrase under construction: label and token range, with children.
struct Phrase {
    label: &'static str,
    start: usize,
    end: usize,
    children: Vec<Phrase>,
}

impl Phrase {
    fn leaf(i: usize) -> Self {
        Phrase {
            label: "",
            start: i,
            end: i + 1,
            children: Vec::new(),
        }
    }

    fn group(label: &'static str, children: Vec<Phrase>) -> Self {
        Phrase {
            label,
            start: children[0].start,
            end: children.last().expect("nonempty group").end,
            children,
        }
    }
}

/// Shallow chunk parse: noun and adverb chunks, PPs, verb phrases that take
/// the following chunks up to a boundary, all under one S.
fn chunk(tags: &[String]) -> Phrase {
    let n = tags.len();
    // base chunks
    let mut chunks: Vec<Phrase> = Vec::new();
    let mut i = 0;
    while i < n {
        let t = tags[i].as_str();
        let run = |pred: fn(&str) -> bool| (i..n).take_while(|&j| pred(&tags[j])).count();
        let (label, len) = if is_nominal(t) {
            ("NP", run(is_nominal))
        } else if t == "RB" {
            ("ADVP", run(|t| t == "RB"))
        } else {
            ("", 1)
        };
        if label.is_empty() {
            chunks.push(Phrase::leaf(i));
        } else {
            chunks.push(Phrase::group(label, (i..i + len).map(Phrase::leaf).collect()));
        }
        i += len;
    }
    // prepositional phrases
    let mut with_pp: Vec<Phrase> = Vec::new();
    let mut it = chunks.into_iter().peekable();
    while let Some(c) = it.next() {
        let prep = c.children.is_empty() && matches!(tags[c.start].as_str(), "IN" | "TO");
        if prep && it.peek().is_some_and(|next| next.label == "NP") {
            let np = it.next().expect("peeked");
            with_pp.push(Phrase::group("PP", vec![c, np]));
        } else {
            with_pp.push(c);
        }
    }
    // verb phrases: a verb run plus everything up to the next boundary
    let mut top: Vec<Phrase> = Vec::new();
    let mut it = with_pp.into_iter().peekable();
    while let Some(c) = it.next() {
        if c.children.is_empty() && is_verbal(&tags[c.start]) {
            let mut parts = vec![c];
            while let Some(next) = it.peek() {
                let boundary = next.children.is_empty() && is_boundary(&tags[next.start]);
                if boundary {
                    break;
                }
                parts.push(it.next().expect("peeked"));
            }
            top.push(if parts.len() == 1 {
                parts.pop().expect("one part")
            } else {
                Phrase::group("VP", parts)
            });
        } else {
            top.push(c);
        }
    }
    Phrase::group("S", top)
}

fn emit(p: &Phrase, parent: Option<usize>, tags: &[String], nodes: &mut Vec<Node>) -> usize {
    let id = nodes.len();
    let label = if p.children.is_empty() { tags[p.start].clone() } else { p.label.to_string() };
    nodes.push(Node {
        id,
        label,
        start: p.start,
        end: p.end,
        parent,
        children: Vec::new(),
    });
    for c in &p.children {
        let child = emit(c, Some(id), tags, nodes);
        nodes[id].children.push(child);
    }
    id
}

/// Deterministic embeddings from hashed character trigrams, so words that
/// share spelling land near each other.
#[derive(Debug, Clone, Copy, Default)]
pub struct HashedEmbedder;

impl Embedder for HashedEmbedder {
    fn embed(&self, token: &str) -> Vec<f64> {
        let padded: Vec<char> = format!("#{}#", token.to_lowercase()).chars().collect();
        let mut v = vec![0.0; EMBEDDING_DIM];
        for gram in padded.windows(3.min(padded.len())) {
            let digest = Sha256::digest(gram.iter().collect::<String>().as_bytes());
            for (k, byte) in digest.iter().take(EMBEDDING_DIM).enumerate() {
                v[k] += *byte as f64 / 127.5 - 1.0;
            }
        }
        v
    }
}

/// In-process adapter: heuristic tagger and chunker, hashed embeddings.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubAdapter;

impl StubAdapter {
    pub fn new() -> Self {
        Self
    }
}

impl LinguaAdapter for StubAdapter {
    fn parse(&self, sentence: &str) -> Result<ParseTree, LinguaError> {
        let words = tokenize(sentence);
        if words.is_empty() {
            return Err(LinguaError::ParseFailure("empty sentence".into()));
        }
        let tags: Vec<String> = words.iter().enumerate().map(|(i, w)| tag_token(w, i == 0)).collect();
        let root = chunk(&tags);
        let mut nodes = Vec::new();
        emit(&root, None, &tags, &mut nodes);
        let tokens = words
            .into_iter()
            .zip(tags)
            .map(|(text, pos)| Token { text, pos })
            .collect();
        Ok(ParseTree::from_document(TreeDocument { tokens, nodes })?)
    }

    fn similarity(&self, a: &ParseTree, b: &ParseTree) -> Result<SimMatrix, LinguaError> {
        Ok(SpanCosine(HashedEmbedder).matrix(a, b)?)
    }
}
