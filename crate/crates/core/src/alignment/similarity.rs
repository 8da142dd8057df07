use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{AlignError, ParseTree};

/// Row-major |U| × |V| score matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMatrix {
    pub rows: usize,
    pub cols: usize,
    values: Vec<f64>,
}

impl SimMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self, AlignError> {
        if values.len() != rows * cols {
            return Err(AlignError::MatrixShape {
                expected: (rows, cols),
                found: values.len(),
            });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let values = (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).map(|(i, j)| f(i, j)).collect();
        Self { rows, cols, values }
    }

    /// From nested rows, as carried on the adapter wire.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, AlignError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(AlignError::MatrixShape {
                expected: (r, c),
                found: rows.iter().map(Vec::len).sum(),
            });
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.cols.max(1)).take(self.rows).map(<[f64]>::to_vec).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn check_shape(&self, u: &ParseTree, v: &ParseTree) -> Result<(), AlignError> {
        if (self.rows, self.cols) != (u.len(), v.len()) {
            return Err(AlignError::MatrixShape {
                expected: (u.len(), v.len()),
                found: self.rows * self.cols,
            });
        }
        Ok(())
    }
}

/// Node-to-node similarity between two trees; higher is more similar.
pub trait NodeSimilarity {
    fn matrix(&self, u: &ParseTree, v: &ParseTree) -> Result<SimMatrix, AlignError>;
}

impl<S: NodeSimilarity + ?Sized> NodeSimilarity for &S {
    fn matrix(&self, u: &ParseTree, v: &ParseTree) -> Result<SimMatrix, AlignError> {
        (**self).matrix(u, v)
    }
}

/// Similarity given by a closure over node ids.
pub struct FnSimilarity<F>(pub F);

impl<F: Fn(&ParseTree, usize, &ParseTree, usize) -> f64> NodeSimilarity for FnSimilarity<F> {
    fn matrix(&self, u: &ParseTree, v: &ParseTree) -> Result<SimMatrix, AlignError> {
        Ok(SimMatrix::from_fn(u.len(), v.len(), |i, j| (self.0)(u, i, v, j)))
    }
}

/// Closed-class POS tags whose tokens need not be covered by an alignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExemptTags(pub BTreeSet<String>);

/// Penn punctuation tags.
pub const PUNCTUATION_TAGS: &[&str] = &[".", ",", ":", "``", "''", "-LRB-", "-RRB-", "#", "$", "HYPH", "NFP", "PUNCT"];

impl Default for ExemptTags {
    /// Prepositions, `to`, determiners and punctuation. Coordinating
    /// conjunctions are not exempt.
    fn default() -> Self {
        Self::from_tags(["IN", "TO", "DT"].into_iter().chain(PUNCTUATION_TAGS.iter().copied()))
    }
}

impl ExemptTags {
    pub fn from_tags<'a>(tags: impl IntoIterator<Item = &'a str>) -> Self {
        Self(tags.into_iter().map(str::to_string).collect())
    }

    pub fn none() -> Self {
        Self(BTreeSet::new())
    }

    pub fn is_exempt(&self, pos: &str) -> bool {
        self.0.contains(pos)
    }
}

/// Word-overlap similarity for fixtures.
///
/// A node's content is the multiset of its non-exempt tokens, lower-cased
/// and mapped through `aliases`. The score is the Dice coefficient of the two
/// contents, plus `label_bonus` when the overlap is nonzero and the node
/// labels agree. Nodes with no overlap score 0.
#[derive(Debug, Clone, Default)]
pub struct LexicalSimilarity {
    pub aliases: HashMap<String, String>,
    pub exempt: ExemptTags,
    pub label_bonus: f64,
}

impl LexicalSimilarity {
    pub fn new(exempt: ExemptTags) -> Self {
        Self {
            aliases: HashMap::new(),
            exempt,
            label_bonus: 0.1,
        }
    }

    /// Treats `a` as the word `b`.
    pub fn alias(mut self, a: &str, b: &str) -> Self {
        self.aliases.insert(a.to_lowercase(), b.to_lowercase());
        self
    }

    fn content(&self, t: &ParseTree, id: usize) -> Vec<String> {
        let n = t.node(id);
        let mut words: Vec<String> = t.tokens()[n.start..n.end]
            .iter()
            .filter(|tok| !self.exempt.is_exempt(&tok.pos))
            .map(|tok| {
                let w = tok.text.to_lowercase();
                self.aliases.get(&w).cloned().unwrap_or(w)
            })
            .collect();
        words.sort();
        words
    }

    pub fn score(&self, u: &ParseTree, i: usize, v: &ParseTree, j: usize) -> f64 {
        let (a, b) = (self.content(u, i), self.content(v, j));
        if a.is_empty() || b.is_empty() {
            return 0.0;
        }
        // sorted multiset intersection
        let (mut x, mut y, mut common) = (0, 0, 0);
        while x < a.len() && y < b.len() {
            match a[x].cmp(&b[y]) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    common += 1;
                    x += 1;
                    y += 1;
                }
            }
        }
        if common == 0 {
            return 0.0;
        }
        let dice = 2.0 * common as f64 / (a.len() + b.len()) as f64;
        let bonus = if u.node(i).label == v.node(j).label { self.label_bonus } else { 0.0 };
        dice + bonus
    }
}

impl NodeSimilarity for LexicalSimilarity {
    fn matrix(&self, u: &ParseTree, v: &ParseTree) -> Result<SimMatrix, AlignError> {
        Ok(SimMatrix::from_fn(u.len(), v.len(), |i, j| self.score(u, i, v, j)))
    }
}

/// A source of token embeddings.
pub trait Embedder {
    fn embed(&self, token: &str) -> Vec<f64>;
}

/// Cosine similarity of mean-pooled token embeddings over node spans.
pub struct SpanCosine<E>(pub E);

pub fn mean_pool(vectors: &[Vec<f64>]) -> Vec<f64> {
    let dim = vectors.first().map_or(0, Vec::len);
    let mut out = vec![0.0; dim];
    for v in vectors {
        for (o, x) in out.iter_mut().zip(v) {
            *o += x;
        }
    }
    if !vectors.is_empty() {
        for o in &mut out {
            *o /= vectors.len() as f64;
        }
    }
    out
}

/// Cosine clamped to [-1, 1]; zero vectors score 0.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

impl<E: Embedder> SpanCosine<E> {
    pub fn span_vectors(&self, t: &ParseTree) -> Vec<Vec<f64>> {
        let tokens: Vec<Vec<f64>> = t.tokens().iter().map(|tok| self.0.embed(&tok.text)).collect();
        t.nodes().iter().map(|n| mean_pool(&tokens[n.start..n.end])).collect()
    }
}

impl<E: Embedder> NodeSimilarity for SpanCosine<E> {
    fn matrix(&self, u: &ParseTree, v: &ParseTree) -> Result<SimMatrix, AlignError> {
        let (a, b) = (self.span_vectors(u), self.span_vectors(v));
        Ok(SimMatrix::from_fn(u.len(), v.len(), |i, j| cosine(&a[i], &b[j])))
    }
}
