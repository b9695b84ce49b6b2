//! Pregroup trees.
//!
//! A tree is read off a pregroup diagram by walking depth-first from the
//! tokens that own free wires. Each token becomes a node whose children are
//! the tokens its remaining wires contract with. When a token is reached a
//! second time the diagram contains a loop; the longer of the two competing
//! links (in token distance) is dropped and reported. Tokens owning free
//! wires are always roots, so a link into one from any other token is
//! dropped and reported the same way.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pregroup::{validate_diagram, Cup, PregroupDiagram, PregroupType};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PregroupTreeNode {
    pub word: String,
    pub token_index: usize,
    pub out_type: PregroupType,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<PregroupTreeNode>,
}

impl PregroupTreeNode {
    pub fn leaf(word: impl Into<String>, token_index: usize, out_type: PregroupType) -> Self {
        PregroupTreeNode {
            word: word.into(),
            token_index,
            out_type,
            children: Vec::new(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Number of nodes in the subtree.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Self::size).sum::<usize>()
    }

    /// Pre-order traversal.
    pub fn iter(&self) -> impl Iterator<Item = &PregroupTreeNode> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }

    pub fn find(&self, token_index: usize) -> Option<&PregroupTreeNode> {
        self.iter().find(|n| n.token_index == token_index)
    }

    pub fn left_children(&self) -> impl Iterator<Item = &PregroupTreeNode> {
        self.children.iter().filter(move |c| c.token_index < self.token_index)
    }

    pub fn right_children(&self) -> impl Iterator<Item = &PregroupTreeNode> {
        self.children.iter().filter(move |c| c.token_index > self.token_index)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeBuildReport {
    pub forest: Vec<PregroupTreeNode>,
    #[serde(default)]
    pub removed_cups: Vec<Cup>,
}

impl TreeBuildReport {
    pub fn nodes(&self) -> impl Iterator<Item = &PregroupTreeNode> {
        self.forest.iter().flat_map(|t| t.iter())
    }
}

/// Tokens owning at least one free wire, in sentence order.
pub fn find_heads(d: &PregroupDiagram) -> Vec<usize> {
    let owners = d.wire_owners();
    let mut heads: Vec<usize> = d.free_offsets().into_iter().map(|w| owners[w]).collect();
    heads.dedup();
    heads
}

/// The full type of a node: its output type extended by the adjoints of its
/// children's output types.
pub fn compound_type(node: &PregroupTreeNode) -> PregroupType {
    let left = node
        .left_children()
        .fold(PregroupType::unit(), |acc, c| acc.concat(&c.out_type));
    let right = node
        .right_children()
        .fold(PregroupType::unit(), |acc, c| acc.concat(&c.out_type));
    left.r().concat(&node.out_type).concat(&right.l())
}

struct Link {
    parent: usize,
    cups: Vec<Cup>,
}

impl Link {
    fn leftmost(&self) -> usize {
        self.cups.iter().map(|c| c.0).min().unwrap_or(usize::MAX)
    }
}

struct Builder<'a> {
    d: &'a PregroupDiagram,
    owners: Vec<usize>,
    partners: Vec<Option<usize>>,
    ranges: Vec<std::ops::Range<usize>>,
    visited: Vec<bool>,
    head: Vec<bool>,
    parent: Vec<Option<Link>>,
    handled: HashSet<(usize, usize)>,
    removed: Vec<Cup>,
}

impl<'a> Builder<'a> {
    fn is_ancestor(&self, a: usize, mut t: usize) -> bool {
        while let Some(link) = &self.parent[t] {
            t = link.parent;
            if t == a {
                return true;
            }
        }
        false
    }

    /// Links from `t` to other tokens, ordered by first partner offset.
    fn links(&self, t: usize) -> Vec<(usize, Vec<Cup>)> {
        let mut groups: BTreeMap<usize, (usize, Vec<Cup>)> = BTreeMap::new();
        for w in self.ranges[t].clone() {
            let Some(p) = self.partners[w] else { continue };
            let u = self.owners[p];
            if u == t {
                continue;
            }
            let cup = Cup::new(w, p);
            let entry = groups.entry(u).or_insert((p, Vec::new()));
            entry.0 = entry.0.min(p);
            entry.1.push(cup);
        }
        let mut v: Vec<(usize, usize, Vec<Cup>)> =
            groups.into_iter().map(|(u, (first, cups))| (first, u, cups)).collect();
        v.sort_by_key(|x| x.0);
        v.into_iter().map(|(_, u, cups)| (u, cups)).collect()
    }

    fn visit(&mut self, t: usize) {
        self.visited[t] = true;
        for (u, cups) in self.links(t) {
            let pair = (t.min(u), t.max(u));
            if !self.handled.insert(pair) {
                continue;
            }
            if self.head[u] {
                self.removed.extend(cups);
                continue;
            }
            if !self.visited[u] {
                self.parent[u] = Some(Link { parent: t, cups });
                self.visit(u);
                continue;
            }
            // Second parent: either t gains u as a parent (u is above t) or
            // u gains t.
            let (child, new_parent) = if self.is_ancestor(u, t) { (t, u) } else { (u, t) };
            let new_link = Link {
                parent: new_parent,
                cups,
            };
            let keep_new = match &self.parent[child] {
                None => false,
                Some(old) => {
                    let old_span = child.abs_diff(old.parent);
                    let new_span = child.abs_diff(new_parent);
                    if old_span != new_span {
                        old_span > new_span
                    } else {
                        old.leftmost() < new_link.leftmost()
                    }
                }
            };
            if keep_new {
                let old = self.parent[child].replace(new_link).expect("checked above");
                self.removed.extend(old.cups);
            } else {
                self.removed.extend(new_link.cups);
            }
        }
    }

    fn out_type(&self, t: usize) -> PregroupType {
        let linked: HashSet<usize> = self.parent[t]
            .iter()
            .flat_map(|l| l.cups.iter().flat_map(|c| [c.0, c.1]))
            .collect();
        self.ranges[t]
            .clone()
            .filter(|&w| self.partners[w].is_none() || linked.contains(&w))
            .map(|w| self.d.tokens[t].ctype.0[w - self.ranges[t].start])
            .collect()
    }

    fn materialize(&self, t: usize, children: &[Vec<usize>]) -> PregroupTreeNode {
        PregroupTreeNode {
            word: self.d.tokens[t].word.clone(),
            token_index: t,
            out_type: self.out_type(t),
            children: children[t]
                .iter()
                .map(|&c| self.materialize(c, children))
                .collect(),
        }
    }
}

pub fn build_trees(d: &PregroupDiagram) -> Result<TreeBuildReport> {
    let report = validate_diagram(d);
    if !report.is_valid() {
        return Err(Error::InvalidDiagram {
            sentence: 0,
            report,
        });
    }
    let n = d.tokens.len();
    let heads = find_heads(d);
    let mut head = vec![false; n];
    for &h in &heads {
        head[h] = true;
    }
    let mut b = Builder {
        d,
        owners: d.wire_owners(),
        partners: d.partners(),
        ranges: d.token_ranges(),
        visited: vec![false; n],
        head,
        parent: (0..n).map(|_| None).collect(),
        handled: HashSet::new(),
        removed: Vec::new(),
    };
    for c in &d.cups {
        if b.owners[c.0] == b.owners[c.1] {
            b.removed.push(*c);
        }
    }
    let mut starts = Vec::new();
    for t in heads.into_iter().chain(0..n) {
        if !b.visited[t] {
            starts.push(t);
            b.visit(t);
        }
    }
    let mut children = vec![Vec::new(); n];
    for t in 0..n {
        if let Some(link) = &b.parent[t] {
            children[link.parent].push(t);
        }
    }
    let roots: Vec<usize> = {
        // Re-parenting can turn a start token into a child, never the reverse
        // for a token that was not a start.
        let mut r: Vec<usize> = starts.iter().copied().filter(|&t| b.parent[t].is_none()).collect();
        r.extend((0..n).filter(|t| b.parent[*t].is_none() && !starts.contains(t)));
        r
    };
    Ok(TreeBuildReport {
        forest: roots.iter().map(|&r| b.materialize(r, &children)).collect(),
        removed_cups: b.removed,
    })
}

/// Indented dump, one node per line as `index:word [type]`.
pub fn tree_to_text(root: &PregroupTreeNode) -> String {
    fn go(n: &PregroupTreeNode, depth: usize, out: &mut String) {
        let _ = writeln!(
            out,
            "{}{}:{} [{}]",
            "  ".repeat(depth),
            n.token_index,
            n.word,
            n.out_type
        );
        for c in &n.children {
            go(c, depth + 1, out);
        }
    }
    let mut s = String::new();
    go(root, 0, &mut s);
    s
}

pub fn forest_to_dot(forest: &[PregroupTreeNode], name: &str) -> String {
    let mut s = format!("digraph \"{}\" {{\n  node [shape=box];\n", escape(name));
    for root in forest {
        for n in root.iter() {
            let _ = writeln!(
                s,
                "  t{} [label=\"{}:{}\\n{}\"];",
                n.token_index,
                n.token_index,
                escape(&n.word),
                n.out_type
            );
            for c in &n.children {
                let _ = writeln!(s, "  t{} -> t{};", n.token_index, c.token_index);
            }
        }
    }
    s.push_str("}\n");
    s
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pregroup::tests::{alice_reads_books, ty};
    use crate::pregroup::{Base::*, Token};

    fn sentence(tokens: &[(&str, PregroupType)], cups: &[(usize, usize)]) -> PregroupDiagram {
        PregroupDiagram::new(
            tokens.iter().map(|(w, t)| Token::new(*w, t.clone())).collect(),
            cups.iter().map(|&(a, b)| Cup(a, b)).collect(),
        )
    }

    #[test]
    fn alice_reads_books_tree() {
        let r = build_trees(&alice_reads_books()).unwrap();
        assert!(r.removed_cups.is_empty());
        assert_eq!(r.forest.len(), 1);
        let root = &r.forest[0];
        assert_eq!((root.word.as_str(), root.token_index), ("reads", 1));
        assert_eq!(root.out_type, PregroupType::s());
        let kids: Vec<_> = root.children.iter().map(|c| c.word.as_str()).collect();
        assert_eq!(kids, ["Alice", "books"]);
        assert_eq!(compound_type(root), ty(&[(N, 1), (S, 0), (N, -1)]));
        assert_eq!(tree_to_text(root), "1:reads [s]\n  0:Alice [n]\n  2:books [n]\n");
    }

    #[test]
    fn determiner_recovers_its_type() {
        let d = sentence(
            &[
                ("a", ty(&[(N, 0), (N, -1)])),
                ("dog", ty(&[(N, 0)])),
                ("barks", ty(&[(N, 1), (S, 0)])),
            ],
            &[(1, 2), (0, 3)],
        );
        let r = build_trees(&d).unwrap();
        let root = &r.forest[0];
        assert_eq!(root.word, "barks");
        let a = &root.children[0];
        assert_eq!(a.word, "a");
        assert_eq!(a.out_type, PregroupType::n());
        assert_eq!(compound_type(a), ty(&[(N, 0), (N, -1)]));
        assert_eq!(a.children[0].word, "dog");
    }

    #[test]
    fn leaf_compound_is_its_output() {
        let leaf = PregroupTreeNode::leaf("Alice", 0, PregroupType::n());
        assert_eq!(compound_type(&leaf), PregroupType::n());
    }

    #[test]
    fn heads() {
        assert_eq!(find_heads(&alice_reads_books()), vec![1]);
        let single = sentence(&[("Alice", PregroupType::n())], &[]);
        assert_eq!(find_heads(&single), vec![0]);
        let two = sentence(&[("Alice", PregroupType::n()), ("Bob", PregroupType::n())], &[]);
        assert_eq!(find_heads(&two), vec![0, 1]);
        assert_eq!(build_trees(&two).unwrap().forest.len(), 2);
    }

    #[test]
    fn loop_drops_the_longer_link() {
        let d = sentence(
            &[
                ("books", ty(&[(N, 0)])),
                ("are", ty(&[(N, 1), (S, 0), (N, -1)])),
                ("hard", ty(&[(N, 0), (N, -1), (S, -1)])),
                ("to", ty(&[(S, 0), (S, -1)])),
                ("read", ty(&[(S, 0), (N, 0)])),
            ],
            &[(0, 1), (3, 4), (6, 7), (8, 9), (5, 10)],
        );
        let r = build_trees(&d).unwrap();
        assert_eq!(r.removed_cups, vec![Cup(5, 10)]);
        let hard = r.forest[0].find(2).unwrap();
        assert_eq!(compound_type(hard), ty(&[(N, 0), (S, -1)]));
    }

    #[test]
    fn preposition_children_are_ordered() {
        let d = sentence(
            &[
                ("It", ty(&[(N, 0)])),
                ("led", ty(&[(N, 1), (S, 0)])),
                ("to", ty(&[(S, 1), (N, 2), (N, 1), (S, 0), (N, -1)])),
                ("treasure", ty(&[(N, 0)])),
            ],
            &[(2, 3), (1, 4), (0, 5), (7, 8)],
        );
        let r = build_trees(&d).unwrap();
        let root = &r.forest[0];
        assert_eq!(root.word, "to");
        let kids: Vec<_> = root.children.iter().map(|c| c.word.as_str()).collect();
        assert_eq!(kids, ["It", "led", "treasure"]);
        assert_eq!(compound_type(root), d.tokens[2].ctype);
    }

    #[test]
    fn dot_mentions_every_node() {
        let r = build_trees(&alice_reads_books()).unwrap();
        let dot = forest_to_dot(&r.forest, "s0");
        assert!(dot.contains("t1 -> t0;") && dot.contains("t1 -> t2;"));
    }
}
