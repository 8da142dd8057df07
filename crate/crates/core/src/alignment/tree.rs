use serde::{Deserialize, Serialize};

use super::AlignError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub pos: String,
}

/// One constituent. `start..end` is its token span.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub label: String,
    pub start: usize,
    pub end: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Interchange form of a tree, as exchanged with the language adapter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDocument {
    pub tokens: Vec<Token>,
    pub nodes: Vec<Node>,
}

/// A validated constituency tree whose node ids are the preorder positions
/// (root = 0, children left to right). Leaves span exactly one token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TreeDocument", into = "TreeDocument")]
pub struct ParseTree {
    tokens: Vec<Token>,
    nodes: Vec<Node>,
}

fn bad(msg: impl Into<String>) -> AlignError {
    AlignError::InvalidTree(msg.into())
}

impl ParseTree {
    /// Validates a document and renumbers its nodes in preorder.
    pub fn from_document(doc: TreeDocument) -> Result<Self, AlignError> {
        let TreeDocument { tokens, nodes } = doc;
        if tokens.is_empty() {
            return Err(bad("tree has no tokens"));
        }
        let n = nodes.len();
        let mut slot = std::collections::HashMap::with_capacity(n);
        for (i, node) in nodes.iter().enumerate() {
            if slot.insert(node.id, i).is_some() {
                return Err(bad(format!("duplicate node id {}", node.id)));
            }
        }
        let index = |id: usize| slot.get(&id).copied().ok_or_else(|| bad(format!("unknown node id {id}")));
        let roots: Vec<usize> = (0..n).filter(|&i| nodes[i].parent.is_none()).collect();
        let [root] = roots[..] else {
            return Err(bad(format!("expected one root, found {}", roots.len())));
        };
        for node in &nodes {
            if node.end <= node.start {
                return Err(bad(format!("node {} has empty span", node.id)));
            }
            if node.children.is_empty() && node.end - node.start != 1 {
                return Err(bad(format!("leaf {} spans {} tokens", node.id, node.end - node.start)));
            }
            let mut at = node.start;
            for &c in &node.children {
                let child = &nodes[index(c)?];
                if child.parent != Some(node.id) {
                    return Err(bad(format!("node {c} does not point back to parent {}", node.id)));
                }
                if child.start != at {
                    return Err(bad(format!("children of {} do not partition its span", node.id)));
                }
                at = child.end;
            }
            if !node.children.is_empty() && at != node.end {
                return Err(bad(format!("children of {} do not partition its span", node.id)));
            }
            if let Some(p) = node.parent {
                if !nodes[index(p)?].children.contains(&node.id) {
                    return Err(bad(format!("parent {p} does not list child {}", node.id)));
                }
            }
        }
        if nodes[root].start != 0 || nodes[root].end != tokens.len() {
            return Err(bad("root does not span every token"));
        }

        // preorder renumbering; the walk also rejects cycles and orphans
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            if order.len() == n {
                return Err(bad("node graph is not a tree"));
            }
            order.push(i);
            for &c in nodes[i].children.iter().rev() {
                stack.push(index(c)?);
            }
        }
        if order.len() != n {
            return Err(bad("some nodes are unreachable from the root"));
        }
        let mut new_id = vec![0; n];
        for (k, &i) in order.iter().enumerate() {
            new_id[i] = k;
        }
        let renumbered = order
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let old = &nodes[i];
                Node {
                    id: k,
                    label: old.label.clone(),
                    start: old.start,
                    end: old.end,
                    parent: old.parent.map(|p| new_id[slot[&p]]),
                    children: old.children.iter().map(|c| new_id[slot[c]]).collect(),
                }
            })
            .collect();
        Ok(Self {
            tokens,
            nodes: renumbered,
        })
    }

    pub fn to_document(&self) -> TreeDocument {
        TreeDocument {
            tokens: self.tokens.clone(),
            nodes: self.nodes.clone(),
        }
    }

    /// Parses Penn-style brackets, e.g. `(S (NP (DT The) (NN cat)) (VP (VBD sat)))`.
    /// A `(TAG word)` pair becomes a leaf and the token's POS tag.
    pub fn from_brackets(text: &str) -> Result<Self, AlignError> {
        let mut p = Brackets {
            src: text,
            pos: 0,
            tokens: Vec::new(),
            nodes: Vec::new(),
        };
        let root = p.node(None)?;
        p.skip_ws();
        if p.pos != text.len() {
            return Err(AlignError::Brackets {
                offset: p.pos,
                message: "trailing input".into(),
            });
        }
        debug_assert_eq!(root, 0);
        Self::from_document(TreeDocument {
            tokens: p.tokens,
            nodes: p.nodes,
        })
    }

    /// Inverse of [`ParseTree::from_brackets`].
    pub fn to_brackets(&self) -> String {
        fn go(t: &ParseTree, id: usize, out: &mut String) {
            let n = &t.nodes[id];
            out.push('(');
            out.push_str(&n.label);
            if n.children.is_empty() {
                out.push(' ');
                out.push_str(&t.tokens[n.start].text);
            }
            for &c in &n.children {
                out.push(' ');
                go(t, c, out);
            }
            out.push(')');
        }
        let mut out = String::new();
        go(self, 0, &mut out);
        out
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn parent(&self, id: usize) -> Option<usize> {
        self.nodes[id].parent
    }

    pub fn is_leaf(&self, id: usize) -> bool {
        self.nodes[id].children.is_empty()
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.is_leaf(i))
    }

    pub fn span_len(&self, id: usize) -> usize {
        self.nodes[id].end - self.nodes[id].start
    }

    pub fn has_sibling(&self, id: usize) -> bool {
        self.parent(id).is_some_and(|p| self.nodes[p].children.len() >= 2)
    }

    /// Tokens of the node's span joined by single spaces.
    pub fn phrase(&self, id: usize) -> String {
        let n = &self.nodes[id];
        self.span_text(n.start, n.end)
    }

    pub fn span_text(&self, start: usize, end: usize) -> String {
        self.tokens[start..end]
            .iter()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn sentence(&self) -> String {
        self.span_text(0, self.tokens.len())
    }
}

impl TryFrom<TreeDocument> for ParseTree {
    type Error = AlignError;

    fn try_from(doc: TreeDocument) -> Result<Self, AlignError> {
        Self::from_document(doc)
    }
}

impl From<ParseTree> for TreeDocument {
    fn from(t: ParseTree) -> Self {
        TreeDocument {
            tokens: t.tokens,
            nodes: t.nodes,
        }
    }
}

struct Brackets<'a> {
    src: &'a str,
    pos: usize,
    tokens: Vec<Token>,
    nodes: Vec<Node>,
}

impl Brackets<'_> {
    fn err(&self, message: &str) -> AlignError {
        AlignError::Brackets {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn atom(&mut self) -> Result<String, AlignError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.err("expected a label or word"));
        }
        self.pos += len;
        Ok(rest[..len].to_string())
    }

    fn node(&mut self, parent: Option<usize>) -> Result<usize, AlignError> {
        self.skip_ws();
        if self.peek() != Some('(') {
            return Err(self.err("expected '('"));
        }
        self.pos += 1;
        let label = self.atom()?;
        let id = self.nodes.len();
        let start = self.tokens.len();
        self.nodes.push(Node {
            id,
            label: label.clone(),
            start,
            end: start,
            parent,
            children: Vec::new(),
        });
        self.skip_ws();
        if self.peek() == Some('(') {
            while self.peek() == Some('(') {
                let c = self.node(Some(id))?;
                self.nodes[id].children.push(c);
                self.skip_ws();
            }
        } else {
            let word = self.atom()?;
            self.tokens.push(Token { text: word, pos: label });
        }
        self.skip_ws();
        if self.peek() != Some(')') {
            return Err(self.err("expected ')'"));
        }
        self.pos += 1;
        self.nodes[id].end = self.tokens.len();
        Ok(id)
    }
}
