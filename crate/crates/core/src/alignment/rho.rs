use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{AlignError, ExemptTags, NodeSimilarity, ParseTree, SimMatrix};

/// For every U node, its most similar V node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingGraph {
    pub edges: Vec<usize>,
}

impl MatchingGraph {
    pub fn target(&self, u: usize) -> usize {
        self.edges[u]
    }
}

/// Row-wise argmax; ties go to the smallest V id.
pub fn build_matching_graph(u: &ParseTree, v: &ParseTree, sim: &SimMatrix) -> Result<MatchingGraph, AlignError> {
    sim.check_shape(u, v)?;
    let edges = (0..u.len())
        .map(|i| {
            let mut best = 0;
            for j in 1..v.len() {
                if sim.get(i, j) > sim.get(i, best) {
                    best = j;
                }
            }
            best
        })
        .collect();
    Ok(MatchingGraph { edges })
}

/// A source sub-tree mapped onto a target sub-tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PhraseMapping {
    pub source_root: usize,
    pub target_root: usize,
    pub source_phrase: String,
    pub target_phrase: String,
    /// From the starting leaf up to `source_root`.
    pub path_nodes: Vec<usize>,
}

/// Whether `id` may head a mapping: not the root and not spanning the whole
/// sentence (unary wrappers under the root).
fn below_top(t: &ParseTree, id: usize) -> bool {
    id != t.root() && t.span_len(id) < t.tokens().len()
}

/// Climbs from `leaf` while the parent's edge lands on the parent of the
/// current node's target and the current node has a sibling.
pub fn matching_path(u: &ParseTree, v: &ParseTree, graph: &MatchingGraph, leaf: usize) -> Option<PhraseMapping> {
    debug_assert!(u.is_leaf(leaf));
    let mut path = vec![leaf];
    let mut mu = leaf;
    while let Some(p) = u.parent(mu) {
        if !below_top(u, p) || !u.has_sibling(mu) || v.parent(graph.target(mu)) != Some(graph.target(p)) {
            break;
        }
        path.push(p);
        mu = p;
    }
    if path.len() < 2 || u.span_len(mu) < 2 {
        return None;
    }
    let target = graph.target(mu);
    Some(PhraseMapping {
        source_root: mu,
        target_root: target,
        source_phrase: u.phrase(mu),
        target_phrase: v.phrase(target),
        path_nodes: path,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    S1toS2,
    S2toS1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    S1,
    S2,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::S1 => Side::S2,
            Side::S2 => Side::S1,
        }
    }
}

/// The four alignment kinds: direction of the mapping and which side must
/// be covered (the source, or the target for starred variants).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "S1toS2")]
    S1toS2,
    #[serde(rename = "S1toS2*")]
    S1toS2Star,
    #[serde(rename = "S2toS1")]
    S2toS1,
    #[serde(rename = "S2toS1*")]
    S2toS1Star,
}

impl Variant {
    /// Evaluation order.
    pub const ALL: [Variant; 4] = [Variant::S1toS2, Variant::S1toS2Star, Variant::S2toS1, Variant::S2toS1Star];

    pub fn direction(self) -> Direction {
        match self {
            Variant::S1toS2 | Variant::S1toS2Star => Direction::S1toS2,
            Variant::S2toS1 | Variant::S2toS1Star => Direction::S2toS1,
        }
    }

    pub fn is_star(self) -> bool {
        matches!(self, Variant::S1toS2Star | Variant::S2toS1Star)
    }

    /// The sentence whose tokens must be covered.
    pub fn coverage_side(self) -> Side {
        match self {
            Variant::S1toS2 | Variant::S2toS1Star => Side::S1,
            Variant::S2toS1 | Variant::S1toS2Star => Side::S2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::S1toS2 => "S1toS2",
            Variant::S1toS2Star => "S1toS2*",
            Variant::S2toS1 => "S2toS1",
            Variant::S2toS1Star => "S2toS1*",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Mappings plus a token partition of the coverage side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhoAlignment {
    pub variant: Variant,
    /// Sorted by source root.
    pub mappings: Vec<PhraseMapping>,
    pub covered_token_ids: Vec<usize>,
    pub uncovered_token_ids: Vec<usize>,
    pub exempt_token_ids: Vec<usize>,
}

impl RhoAlignment {
    /// No non-exempt token of the coverage side is left uncovered.
    pub fn is_complete(&self) -> bool {
        self.uncovered_token_ids.is_empty()
    }
}

/// Builds S_U from every leaf of `source` and partitions the coverage side.
///
/// `sim` scores `source` nodes against `target` nodes. The result is
/// returned even when coverage is incomplete so callers can report leftovers.
pub fn assemble_rho(
    source: &ParseTree,
    target: &ParseTree,
    sim: &SimMatrix,
    variant: Variant,
    exempt: &ExemptTags,
) -> Result<RhoAlignment, AlignError> {
    let graph = build_matching_graph(source, target, sim)?;
    let mut by_root: BTreeMap<usize, PhraseMapping> = BTreeMap::new();
    for leaf in source.leaves() {
        if let Some(m) = matching_path(source, target, &graph, leaf) {
            by_root.entry(m.source_root).or_insert(m);
        }
    }
    let mappings: Vec<PhraseMapping> = by_root.into_values().collect();

    let (side_tree, spans): (&ParseTree, Vec<(usize, usize)>) = if variant.is_star() {
        (target, mappings.iter().map(|m| span(target, m.target_root)).collect())
    } else {
        (source, mappings.iter().map(|m| span(source, m.source_root)).collect())
    };
    let mut rho = RhoAlignment {
        variant,
        mappings,
        covered_token_ids: Vec::new(),
        uncovered_token_ids: Vec::new(),
        exempt_token_ids: Vec::new(),
    };
    for (i, tok) in side_tree.tokens().iter().enumerate() {
        if spans.iter().any(|&(s, e)| s <= i && i < e) {
            rho.covered_token_ids.push(i);
        } else if exempt.is_exempt(&tok.pos) {
            rho.exempt_token_ids.push(i);
        } else {
            rho.uncovered_token_ids.push(i);
        }
    }
    Ok(rho)
}

fn span(t: &ParseTree, id: usize) -> (usize, usize) {
    let n = t.node(id);
    (n.start, n.end)
}

/// The alignment of `variant` between `s1` and `s2`, if its coverage side
/// is fully covered.
pub fn candidate_rho(
    s1: &ParseTree,
    s2: &ParseTree,
    sim: &impl NodeSimilarity,
    variant: Variant,
    exempt: &ExemptTags,
) -> Result<Option<RhoAlignment>, AlignError> {
    let (u, v) = match variant.direction() {
        Direction::S1toS2 => (s1, s2),
        Direction::S2toS1 => (s2, s1),
    };
    let rho = assemble_rho(u, v, &sim.matrix(u, v)?, variant, exempt)?;
    Ok(rho.is_complete().then_some(rho))
}

/// All four assembled alignments, computed without any oracle traffic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralCandidates {
    pub alignments: Vec<RhoAlignment>,
}

impl StructuralCandidates {
    pub fn compute(
        s1: &ParseTree,
        s2: &ParseTree,
        sim: &impl NodeSimilarity,
        exempt: &ExemptTags,
    ) -> Result<Self, AlignError> {
        let forward = sim.matrix(s1, s2)?;
        let backward = sim.matrix(s2, s1)?;
        let alignments = Variant::ALL
            .iter()
            .map(|&variant| match variant.direction() {
                Direction::S1toS2 => assemble_rho(s1, s2, &forward, variant, exempt),
                Direction::S2toS1 => assemble_rho(s2, s1, &backward, variant, exempt),
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { alignments })
    }

    pub fn get(&self, variant: Variant) -> &RhoAlignment {
        &self.alignments[Variant::ALL.iter().position(|&v| v == variant).expect("all variants present")]
    }
}

/// Maximal constituents of `tree` that contain no covered token and at
/// least one non-exempt token, in sentence order.
pub fn leftover_phrases(tree: &ParseTree, covered: &[usize], exempt: &ExemptTags) -> Vec<String> {
    let mut is_covered = vec![false; tree.tokens().len()];
    for &i in covered {
        is_covered[i] = true;
    }
    let mut out = Vec::new();
    let mut stack = vec![tree.root()];
    while let Some(id) = stack.pop() {
        let n = tree.node(id);
        let range = n.start..n.end;
        if range.clone().any(|i| is_covered[i]) {
            stack.extend(n.children.iter().rev());
        } else if tree.tokens()[range].iter().any(|t| !exempt.is_exempt(&t.pos)) {
            out.push(tree.phrase(id));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::{fixtures, FnSimilarity, LexicalSimilarity};
    use proptest::prelude::*;

    fn t(s: &str) -> ParseTree {
        ParseTree::from_brackets(s).unwrap()
    }

    fn identity(u: &ParseTree, v: &ParseTree) -> SimMatrix {
        SimMatrix::from_fn(u.len(), v.len(), |i, j| if i == j { 1.0 } else { 0.0 })
    }

    const SENTENCE: &str = "(S (NP (DT The) (NN cat)) (VP (VBD sat) (PP (IN on) (NP (DT the) (NN mat)))) (. .))";

    #[test]
    fn identity_graph_is_identity() {
        let u = t(SENTENCE);
        let g = build_matching_graph(&u, &u, &identity(&u, &u)).unwrap();
        assert_eq!(g.edges, (0..u.len()).collect::<Vec<_>>());
    }

    #[test]
    fn ties_go_to_smallest_id() {
        let u = t("(X (A a) (B b))");
        let v = t("(Y (C c) (D d))");
        let g = build_matching_graph(&u, &v, &SimMatrix::from_fn(3, 3, |_, _| 0.5)).unwrap();
        assert_eq!(g.edges, vec![0, 0, 0]);
        let g = build_matching_graph(&u, &v, &SimMatrix::from_fn(3, 3, |_, j| if j == 0 { 0.1 } else { 0.7 })).unwrap();
        assert_eq!(g.edges, vec![1, 1, 1]);
    }

    #[test]
    fn shape_is_checked() {
        let u = t(SENTENCE);
        assert!(matches!(
            build_matching_graph(&u, &u, &SimMatrix::from_fn(2, 2, |_, _| 0.0)),
            Err(AlignError::MatrixShape { .. })
        ));
    }

    #[test]
    fn chain_tree_has_no_paths() {
        let u = t("(A (B (C (D (E x)))))");
        let g = build_matching_graph(&u, &u, &identity(&u, &u)).unwrap();
        for leaf in u.leaves() {
            assert!(matching_path(&u, &u, &g, leaf).is_none());
        }
        let u = t("(A (B (C (D (E x) (F y)))))");
        // the only sibling pair sits under D, whose span is the whole sentence
        let g = build_matching_graph(&u, &u, &identity(&u, &u)).unwrap();
        for leaf in u.leaves() {
            assert!(matching_path(&u, &u, &g, leaf).is_none());
        }
    }

    #[test]
    fn leaf_under_root_has_no_path() {
        let u = t("(S (A a) (B (C b) (D c)))");
        let g = build_matching_graph(&u, &u, &identity(&u, &u)).unwrap();
        assert!(matching_path(&u, &u, &g, 1).is_none());
        let m = matching_path(&u, &u, &g, 3).unwrap();
        assert_eq!((m.source_root, m.target_root, m.path_nodes.clone()), (2, 2, vec![3, 2]));
        assert_eq!(m.source_phrase, "b c");
    }

    #[test]
    fn only_child_stops_the_climb() {
        // A has no sibling under X
        let u = t("(S (X (A a)) (Y (B b) (C c)))");
        let g = build_matching_graph(&u, &u, &identity(&u, &u)).unwrap();
        assert!(matching_path(&u, &u, &g, 2).is_none());
    }

    #[test]
    fn self_alignment_is_complete() {
        let u = t(SENTENCE);
        let sim = FnSimilarity(|_: &ParseTree, i: usize, _: &ParseTree, j: usize| if i == j { 1.0 } else { 0.0 });
        for variant in Variant::ALL {
            let rho = candidate_rho(&u, &u, &sim, variant, &ExemptTags::default()).unwrap().unwrap();
            assert_eq!(rho.uncovered_token_ids, Vec::<usize>::new());
            // The cat | sat on the mat
            assert_eq!(rho.mappings.iter().map(|m| m.source_root).collect::<Vec<_>>(), vec![1, 4]);
        }
    }

    /// Every ancestor chain from a leaf, checked against the path rule
    /// directly, to cross-check `matching_path`.
    fn brute_force_top(u: &ParseTree, v: &ParseTree, g: &MatchingGraph, leaf: usize) -> Option<usize> {
        let mut chain = vec![leaf];
        while let Some(p) = u.parent(*chain.last().unwrap()) {
            chain.push(p);
        }
        let mut best = None;
        for k in 2..=chain.len() {
            let prefix = &chain[..k];
            let ok = prefix.windows(2).all(|w| {
                let (mu, p) = (w[0], w[1]);
                p != u.root()
                    && u.span_len(p) < u.tokens().len()
                    && u.node(u.parent(mu).unwrap()).children.len() > 1
                    && v.parent(g.edges[mu]) == Some(g.edges[p])
            });
            if ok && u.span_len(prefix[k - 1]) >= 2 {
                best = Some(prefix[k - 1]);
            }
            if !ok {
                break;
            }
        }
        best
    }

    #[test]
    fn fixture_paths_match_brute_force() {
        let (u, v, sim) = fixtures::elderly_gentleman();
        let g = build_matching_graph(&u, &v, &sim.matrix(&u, &v).unwrap()).unwrap();
        for leaf in u.leaves() {
            let got = matching_path(&u, &v, &g, leaf).map(|m| m.source_root);
            assert_eq!(got, brute_force_top(&u, &v, &g, leaf), "leaf {leaf}");
        }
    }

    #[test]
    fn fixture_alignment() {
        let (u, v, sim) = fixtures::elderly_gentleman();
        let rho = candidate_rho(&u, &v, &sim, Variant::S1toS2, &sim.exempt).unwrap().unwrap();
        let pairs: Vec<(String, String)> =
            rho.mappings.iter().map(|m| (m.source_phrase.clone(), m.target_phrase.clone())).collect();
        assert_eq!(
            pairs,
            [
                ("The old man", "the elderly gentleman"),
                ("read a long book", "perused a lengthy book"),
                ("very recently", "Quite lately"),
            ]
            .map(|(a, b)| (a.to_string(), b.to_string()))
        );
        let labels: Vec<(&str, &str)> = rho
            .mappings
            .iter()
            .map(|m| (u.node(m.source_root).label.as_str(), v.node(m.target_root).label.as_str()))
            .collect();
        assert_eq!(labels, vec![("NP", "NP"), ("VP", "VP"), ("ADVP", "ADVP")]);
        // the leaf under the inner VP reaches it
        let read = u.leaves().find(|&l| u.phrase(l) == "read").unwrap();
        let g = build_matching_graph(&u, &v, &sim.matrix(&u, &v).unwrap()).unwrap();
        let m = matching_path(&u, &v, &g, read).unwrap();
        assert_eq!(v.phrase(m.target_root), "perused a lengthy book");
    }

    #[test]
    fn but_he_leftovers() {
        let (s1, s2, sim) = fixtures::de_sole();
        let ex = &sim.exempt;
        assert!(candidate_rho(&s1, &s2, &sim, Variant::S1toS2, ex).unwrap().is_none());
        let c = StructuralCandidates::compute(&s1, &s2, &sim, ex).unwrap();
        let fwd = c.get(Variant::S1toS2);
        assert_eq!(fwd.uncovered_token_ids, vec![0, 1]);
        assert_eq!(leftover_phrases(&s1, &fwd.covered_token_ids, ex), vec!["But", "he"]);
        let back = c.get(Variant::S2toS1);
        assert_eq!(leftover_phrases(&s2, &back.covered_token_ids, ex), vec!["De Sole"]);
    }

    #[test]
    fn around_the_world_leftovers() {
        let (s1, s2, sim) = fixtures::around_the_world();
        let ex = &sim.exempt;
        let c = StructuralCandidates::compute(&s1, &s2, &sim, ex).unwrap();
        let fwd = c.get(Variant::S1toS2);
        assert_eq!(leftover_phrases(&s1, &fwd.covered_token_ids, ex), vec!["around the world"]);
        let back = c.get(Variant::S2toS1);
        assert_eq!(leftover_phrases(&s2, &back.covered_token_ids, ex), vec!["Americans"]);
    }

    #[test]
    fn permuting_v_ids_keeps_graph() {
        let (u, v, sim) = fixtures::elderly_gentleman();
        let mut doc = v.to_document();
        // reverse the stored node order and relabel ids
        let n = doc.nodes.len();
        for node in &mut doc.nodes {
            node.id = n - 1 - node.id;
            node.parent = node.parent.map(|p| n - 1 - p);
            for c in &mut node.children {
                *c = n - 1 - *c;
            }
        }
        doc.nodes.reverse();
        let v2 = ParseTree::from_document(doc).unwrap();
        let g1 = build_matching_graph(&u, &v, &sim.matrix(&u, &v).unwrap()).unwrap();
        let g2 = build_matching_graph(&u, &v2, &sim.matrix(&u, &v2).unwrap()).unwrap();
        assert_eq!(g1, g2);
    }

    #[test]
    fn exempt_only_gaps_do_not_block() {
        let u = t("(S (NP (NN cats) (NN purr)) (. .))");
        let sim = LexicalSimilarity::new(ExemptTags::default());
        let rho = candidate_rho(&u, &u, &sim, Variant::S1toS2, &sim.exempt).unwrap().unwrap();
        assert_eq!(rho.exempt_token_ids, vec![2]);
        let none = ExemptTags::none();
        assert!(candidate_rho(&u, &u, &sim, Variant::S1toS2, &none).unwrap().is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn coverage_partitions_tokens(seed in any::<u64>(), variant in 0usize..4) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (s1, s2) = fixtures::random_pair(&mut rng);
            let sim = fixtures::random_similarity();
            let variant = Variant::ALL[variant];
            let c = StructuralCandidates::compute(&s1, &s2, &sim, &sim.exempt).unwrap();
            let rho = c.get(variant);
            let side = match variant.coverage_side() { Side::S1 => &s1, Side::S2 => &s2 };
            let mut all: Vec<usize> = rho.covered_token_ids.iter()
                .chain(&rho.uncovered_token_ids)
                .chain(&rho.exempt_token_ids)
                .copied()
                .collect();
            all.sort();
            prop_assert_eq!(all, (0..side.tokens().len()).collect::<Vec<_>>());
            let (u, v) = match variant.direction() {
                Direction::S1toS2 => (&s1, &s2),
                Direction::S2toS1 => (&s2, &s1),
            };
            for m in &rho.mappings {
                prop_assert!(u.span_len(m.source_root) >= 2);
                prop_assert!(m.source_root != u.root());
                prop_assert!(m.path_nodes.len() >= 2);
                prop_assert!(m.target_root < v.len());
            }
        }
    }
}
