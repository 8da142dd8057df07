//! Hand-built tree pairs and random tree generators.
//!
//! The named fixtures pair two bracketings with a [`LexicalSimilarity`] whose
//! aliases stand in for embedding similarity between content words.

use rand::seq::IndexedRandom;
use rand::Rng;

use super::{ExemptTags, LexicalSimilarity, Node, ParseTree, Token, TreeDocument};

fn tree(brackets: &str) -> ParseTree {
    ParseTree::from_brackets(brackets).expect("fixture brackets are well formed")
}

/// "The old man read a long book very recently." against "Quite lately, the
/// elderly gentleman perused a lengthy book." The S1toS2 alignment maps the
/// subject NP, the inner VP and the ADVP.
pub fn elderly_gentleman() -> (ParseTree, ParseTree, LexicalSimilarity) {
    let u = tree(
        "(S (NP (DT The) (JJ old) (NN man)) \
           (VP (VP (VBD read) (NP (DT a) (JJ long) (NN book))) (ADVP (RB very) (RB recently))) \
           (. .))",
    );
    let v = tree(
        "(S (ADVP (RB Quite) (RB lately)) (, ,) \
           (NP (DT the) (JJ elderly) (NN gentleman)) \
           (VP (VBD perused) (NP (DT a) (JJ lengthy) (NN book))) \
           (. .))",
    );
    let sim = LexicalSimilarity::new(ExemptTags::default())
        .alias("old", "elderly")
        .alias("man", "gentleman")
        .alias("read", "perused")
        .alias("long", "lengthy")
        .alias("very", "quite")
        .alias("recently", "lately");
    (u, v, sim)
}

const GROUP_PERFORMANCE: &str = "(S (NP (NN group) (NN performance)) \
     (VP (MD would) (VP (VB improve) (PP (IN in) (NP (NP (DT the) (JJ second) (NN half)) \
     (PP (IN of) (NP (NP (DT the) (NN year)) (CC and) (ADVP (RB beyond)))))))))";

/// A reported-speech pair whose speakers differ: "But he added ..." against
/// "De Sole said in the results statement that ...".
pub fn de_sole() -> (ParseTree, ParseTree, LexicalSimilarity) {
    let s1 = tree(&format!(
        "(S (CC But) (NP (PRP he)) (VP (VBD added) (SBAR {GROUP_PERFORMANCE})) (. .))"
    ));
    let s2 = tree(&format!(
        "(S (NP (NNP De) (NNP Sole)) \
           (VP (VBD said) (PP (IN in) (NP (DT the) (NNS results) (NN statement))) \
               (SBAR (IN that) {GROUP_PERFORMANCE})) \
           (. .))"
    ));
    let sim = LexicalSimilarity::new(ExemptTags::default()).alias("added", "said");
    (s1, s2, sim)
}

/// Two reports of a drug approval whose relative clauses differ in who is
/// affected.
pub fn around_the_world() -> (ParseTree, ParseTree, LexicalSimilarity) {
    let head = "(NP (NP (DT The) (JJ first) (NN biotechnology) (NN treatment)) (PP (IN for) (NP (NN asthma))))";
    let constriction = |millions: &str| {
        format!(
            "(NP (NP (DT the) (NN constriction)) (PP (IN of) (NP (NP (DT the) (NNS airways)) \
             (SBAR (IN that) (VP (VBZ affects) {millions})))))"
        )
    };
    let s1 = tree(&format!(
        "(S (NP (NP {head} (, ,) {}) (PP (IN around) (NP (DT the) (NN world))) (, ,)) \
           (VP (VBD received) (NP (NN approval)) \
               (PP (IN from) (NP (DT the) (NNP US) (NNP Food) (CC and) (NNP Drug) (NNP Administration))) \
               (NP (NN yesterday))) \
           (. .))",
        constriction("(NP (NNS millions))")
    ));
    let s2 = tree(&format!(
        "(S (NP (NP {head} (, ,) {}) (NP (NNPS Americans)) (, ,)) \
           (VP (VBD received) (NP (NN approval)) \
               (PP (IN from) (NP (DT the) (NNP U.S.) (NNP Food) (CC and) (NNP Drug) (NNP Administration))) \
               (PP (IN on) (NP (NNP Friday)))) \
           (. .))",
        constriction("(NP (NNS millions) (IN of))")
    ));
    let sim = LexicalSimilarity::new(ExemptTags::default())
        .alias("us", "u.s.")
        .alias("yesterday", "friday");
    (s1, s2, sim)
}

const WORDS: &[(&str, &str)] = &[
    ("the", "DT"),
    ("a", "DT"),
    ("of", "IN"),
    ("in", "IN"),
    ("to", "TO"),
    ("and", "CC"),
    ("cat", "NN"),
    ("dog", "NN"),
    ("river", "NN"),
    ("city", "NN"),
    ("ran", "VBD"),
    ("saw", "VBD"),
    ("found", "VBD"),
    ("quick", "JJ"),
    ("old", "JJ"),
    ("quietly", "RB"),
    (",", ","),
];

const LABELS: &[&str] = &["NP", "VP", "PP", "S", "ADJP", "SBAR"];

/// A random well-formed tree over `tokens`.
pub fn random_tree(tokens: &[Token], rng: &mut impl Rng) -> ParseTree {
    assert!(!tokens.is_empty());
    let mut nodes: Vec<Node> = Vec::new();
    build(tokens, 0, tokens.len(), None, "S", rng, &mut nodes);
    ParseTree::from_document(TreeDocument {
        tokens: tokens.to_vec(),
        nodes,
    })
    .expect("generated trees are valid")
}

fn build(
    tokens: &[Token],
    start: usize,
    end: usize,
    parent: Option<usize>,
    label: &str,
    rng: &mut impl Rng,
    nodes: &mut Vec<Node>,
) -> usize {
    let id = nodes.len();
    nodes.push(Node {
        id,
        label: label.to_string(),
        start,
        end,
        parent,
        children: Vec::new(),
    });
    if end - start == 1 {
        let pos = tokens[start].pos.clone();
        if parent.is_some() && rng.random_bool(0.75) {
            nodes[id].label = pos;
        } else {
            // unary phrase over a preterminal
            nodes.push(Node {
                id: id + 1,
                label: pos,
                start,
                end,
                parent: Some(id),
                children: Vec::new(),
            });
            nodes[id].children.push(id + 1);
        }
        return id;
    }
    let parts = rng.random_range(2..=(end - start).min(4));
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, end - start - 1, parts - 1)
        .into_iter()
        .map(|c| start + c + 1)
        .collect();
    cuts.sort_unstable();
    let mut bounds = vec![start];
    bounds.extend(cuts);
    bounds.push(end);
    for w in bounds.windows(2) {
        let label = LABELS.choose(rng).expect("nonempty");
        let child = build(tokens, w[0], w[1], Some(id), label, rng, nodes);
        nodes[id].children.push(child);
    }
    id
}

pub fn random_tokens(n: usize, rng: &mut impl Rng) -> Vec<Token> {
    (0..n)
        .map(|_| {
            let (text, pos) = WORDS.choose(rng).expect("nonempty");
            Token {
                text: text.to_string(),
                pos: pos.to_string(),
            }
        })
        .collect()
}

/// Two random trees: either one token sequence bracketed twice, a lightly
/// edited copy, or two unrelated sentences.
pub fn random_pair(rng: &mut impl Rng) -> (ParseTree, ParseTree) {
    let n = rng.random_range(2..=9);
    let tokens = random_tokens(n, rng);
    let s1 = random_tree(&tokens, rng);
    let other = match rng.random_range(0..3) {
        0 => tokens,
        1 => {
            let mut t = tokens;
            let i = rng.random_range(0..t.len());
            t[i] = random_tokens(1, rng).remove(0);
            t
        }
        _ => random_tokens(rng.random_range(2..=9), rng),
    };
    let s2 = if rng.random_bool(0.3) { s1.clone() } else { random_tree(&other, rng) };
    (s1, s2)
}

/// Similarity used with [`random_pair`].
pub fn random_similarity() -> LexicalSimilarity {
    LexicalSimilarity::new(ExemptTags::default())
}

/// A pair with disjoint vocabularies, so no node pair scores above zero
/// and no matching path leaves its leaf.
pub fn unalignable_pair(rng: &mut impl Rng) -> (ParseTree, ParseTree) {
    let s1 = disjoint_tree('x', rng);
    let s2 = disjoint_tree('y', rng);
    (s1, s2)
}

fn disjoint_tree(prefix: char, rng: &mut impl Rng) -> ParseTree {
    let n = rng.random_range(2..=9);
    let tokens: Vec<Token> = (0..n)
        .map(|i| Token {
            text: format!("{prefix}{i}"),
            pos: "NN".into(),
        })
        .collect();
    random_tree(&tokens, rng)
}
