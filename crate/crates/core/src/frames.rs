//! Tree to frame lowering with optional noun removal.

use std::collections::{BTreeMap, BTreeSet};

use log::warn;

use crate::diagram::{DiagramElement, NounState, SentenceDiagram, Wire};
use crate::error::{Error, Result};
use crate::ingest::{CorefMap, Mention};
use crate::pregroup::PregroupType;
use crate::tree::PregroupTreeNode;

/// Noun mentions of one sentence with their wires.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrameContext {
    pub sentence: usize,
    wires: BTreeMap<usize, Wire>,
}

impl FrameContext {
    /// Every coreference mention in `sentence` is a noun. Repeated mentions
    /// of one chain get increasing copy indices in token order.
    pub fn from_corefs(sentence: usize, corefs: &CorefMap) -> Self {
        let mut tokens: Vec<(usize, usize)> = corefs
            .chains
            .iter()
            .enumerate()
            .flat_map(|(c, ms)| {
                ms.iter()
                    .filter(|m| m.sentence == sentence)
                    .map(move |m| (m.token, c))
            })
            .collect();
        tokens.sort();
        let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
        let wires = tokens
            .into_iter()
            .map(|(t, c)| {
                let copy = seen.entry(c).or_insert(0);
                let w = Wire::new(c, *copy);
                *copy += 1;
                (t, w)
            })
            .collect();
        FrameContext { sentence, wires }
    }

    pub fn wire(&self, token: usize) -> Option<Wire> {
        self.wires.get(&token).copied()
    }

    fn is_noun_leaf(&self, node: &PregroupTreeNode) -> bool {
        node.is_leaf() && node.out_type == PregroupType::n() && self.wires.contains_key(&node.token_index)
    }
}

enum Part {
    Elem(DiagramElement),
    /// A non-noun leaf: a box over whatever nouns its parent ends up with.
    Pending(String),
}

fn noun_state(node: &PregroupTreeNode, ctx: &FrameContext) -> NounState {
    NounState {
        word: node.word.clone(),
        sentence_index: ctx.sentence,
        token_index: node.token_index,
        chain_id: ctx.wires[&node.token_index].chain,
    }
}

fn wire_of(n: &NounState, ctx: &FrameContext) -> Wire {
    ctx.wires[&n.token_index]
}

fn lower(
    node: &PregroupTreeNode,
    remove: &BTreeSet<usize>,
    ctx: &FrameContext,
) -> (Part, Vec<NounState>) {
    if node.is_leaf() {
        if ctx.is_noun_leaf(node) {
            if remove.contains(&node.token_index) {
                return (Part::Elem(DiagramElement::Empty), Vec::new());
            }
            let state = noun_state(node, ctx);
            return (
                Part::Elem(DiagramElement::Identity {
                    wires: vec![wire_of(&state, ctx)],
                }),
                vec![state],
            );
        }
        return (Part::Pending(node.word.clone()), Vec::new());
    }
    let mut parts = Vec::with_capacity(node.children.len());
    let mut nouns = Vec::new();
    for c in &node.children {
        let (p, ns) = lower(c, remove, ctx);
        parts.push(p);
        nouns.extend(ns);
    }
    nouns.sort_by_key(|n| n.token_index);
    if nouns.is_empty() {
        for p in &parts {
            if let Part::Pending(w) = p {
                warn!("dropping box {w:?}: no noun wires below {:?}", node.word);
            }
        }
        return (Part::Elem(DiagramElement::Empty), nouns);
    }
    let wires: Vec<Wire> = nouns.iter().map(|n| wire_of(n, ctx)).collect();
    let components: Vec<DiagramElement> = parts
        .into_iter()
        .filter_map(|p| match p {
            Part::Elem(e) if e.is_trivial() => None,
            Part::Elem(e) => Some(e),
            Part::Pending(w) => Some(DiagramElement::boxed(w, wires.clone())),
        })
        .collect();
    let elem = if components.is_empty() {
        DiagramElement::boxed(node.word.clone(), wires)
    } else {
        DiagramElement::Frame {
            name: node.word.clone(),
            wires,
            components,
        }
    };
    (Part::Elem(elem), nouns)
}

/// Lowers one tree. Nouns come back separately, ordered by token.
pub fn tree_to_frame(
    node: &PregroupTreeNode,
    remove: &BTreeSet<usize>,
    ctx: &FrameContext,
) -> (DiagramElement, Vec<NounState>) {
    match lower(node, remove, ctx) {
        (Part::Elem(e), nouns) => (e, nouns),
        (Part::Pending(w), nouns) => {
            warn!("dropping box {w:?}: it touches no noun wire");
            (DiagramElement::Empty, nouns)
        }
    }
}

/// Lowers a forest, tensoring the trees in order.
pub fn sentence_diagram(
    forest: &[PregroupTreeNode],
    remove: &BTreeSet<usize>,
    ctx: &FrameContext,
) -> Result<SentenceDiagram> {
    let mut nouns = Vec::new();
    let mut bodies = Vec::new();
    for tree in forest {
        let (body, ns) = tree_to_frame(tree, remove, ctx);
        nouns.extend(ns);
        if !body.is_trivial() {
            bodies.push(body);
        }
    }
    if nouns.is_empty() {
        return Err(Error::EmptySentence {
            sentence: ctx.sentence,
        });
    }
    nouns.sort_by_key(|n| n.token_index);
    let body = match bodies.len() {
        0 => DiagramElement::Identity {
            wires: nouns.iter().map(|n| wire_of(n, ctx)).collect(),
        },
        1 => bodies.pop().expect("one body"),
        _ => DiagramElement::Par { elements: bodies },
    };
    Ok(SentenceDiagram { nouns, body })
}

/// Every mention of every chain mentioned fewer than `k` times.
pub fn min_frequency_filter(coref: &CorefMap, k: usize) -> BTreeSet<Mention> {
    coref
        .chains
        .iter()
        .filter(|c| c.len() < k)
        .flatten()
        .copied()
        .collect()
}

/// Drops boxes living only on removed wires and shrinks the rest. A frame
/// left without components becomes a box. Returns Empty when nothing is left.
pub fn prune_boxes(body: &DiagramElement, removed: &BTreeSet<Wire>) -> DiagramElement {
    let keep = |ws: &[Wire]| -> Vec<Wire> { ws.iter().filter(|w| !removed.contains(w)).copied().collect() };
    match body {
        DiagramElement::Box { name, wires } => {
            let wires = keep(wires);
            if wires.is_empty() {
                DiagramElement::Empty
            } else {
                DiagramElement::boxed(name.clone(), wires)
            }
        }
        DiagramElement::Identity { wires } => {
            let wires = keep(wires);
            if wires.is_empty() {
                DiagramElement::Empty
            } else {
                DiagramElement::Identity { wires }
            }
        }
        DiagramElement::Frame {
            name,
            wires,
            components,
        } => {
            let wires = keep(wires);
            if wires.is_empty() {
                return DiagramElement::Empty;
            }
            let components: Vec<DiagramElement> = components
                .iter()
                .map(|c| prune_boxes(c, removed))
                .filter(|c| !c.is_trivial())
                .collect();
            if components.is_empty() {
                DiagramElement::boxed(name.clone(), wires)
            } else {
                DiagramElement::Frame {
                    name: name.clone(),
                    wires,
                    components,
                }
            }
        }
        DiagramElement::Seq { elements } | DiagramElement::Par { elements } => {
            let mut kept: Vec<DiagramElement> = elements
                .iter()
                .map(|e| prune_boxes(e, removed))
                .filter(|e| *e != DiagramElement::Empty)
                .collect();
            match kept.len() {
                0 => DiagramElement::Empty,
                1 if matches!(body, DiagramElement::Par { .. }) => kept.pop().expect("one"),
                _ if matches!(body, DiagramElement::Par { .. }) => DiagramElement::Par { elements: kept },
                _ => DiagramElement::Seq { elements: kept },
            }
        }
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{lexicon_parse, Lexicon};
    use crate::tree::build_trees;

    fn single(words: &[&str], nouns: &[usize]) -> (Vec<PregroupTreeNode>, FrameContext) {
        let d = lexicon_parse(words, &Lexicon::builtin()).unwrap();
        let corefs = CorefMap::new(nouns.iter().map(|&t| vec![Mention::new(0, t)]).collect());
        (
            build_trees(&d).unwrap().forest,
            FrameContext::from_corefs(0, &corefs),
        )
    }

    #[test]
    fn loves_frame_holds_fast_box() {
        let (forest, ctx) = single(&["Alice", "loves", "fast", "bikes"], &[0, 3]);
        let (body, nouns) = tree_to_frame(&forest[0], &BTreeSet::new(), &ctx);
        let alice = Wire::chain(0);
        let bikes = Wire::chain(1);
        assert_eq!(
            body,
            DiagramElement::Frame {
                name: "loves".into(),
                wires: vec![alice, bikes],
                components: vec![DiagramElement::boxed("fast", vec![bikes])],
            }
        );
        let words: Vec<_> = nouns.iter().map(|n| n.word.as_str()).collect();
        assert_eq!(words, ["Alice", "bikes"]);
    }

    #[test]
    fn lone_noun_is_identity() {
        let leaf = PregroupTreeNode::leaf("Alice", 0, PregroupType::n());
        let ctx = FrameContext::from_corefs(0, &CorefMap::new(vec![vec![Mention::new(0, 0)]]));
        let (body, nouns) = tree_to_frame(&leaf, &BTreeSet::new(), &ctx);
        assert_eq!(
            body,
            DiagramElement::Identity {
                wires: vec![Wire::chain(0)]
            }
        );
        assert_eq!(nouns.len(), 1);
    }

    #[test]
    fn removing_every_noun_empties_the_sentence() {
        let (forest, ctx) = single(&["Alice", "reads", "books"], &[0, 2]);
        let err = sentence_diagram(&forest, &[0, 2].into(), &ctx).unwrap_err();
        assert!(matches!(err, Error::EmptySentence { sentence: 0 }));
    }

    #[test]
    fn frequency_filter() {
        let c = CorefMap::new(vec![
            vec![Mention::new(0, 0), Mention::new(1, 0)],
            vec![Mention::new(0, 2)],
        ]);
        assert!(min_frequency_filter(&c, 1).is_empty());
        assert_eq!(min_frequency_filter(&c, 2), [Mention::new(0, 2)].into());
        assert_eq!(min_frequency_filter(&c, 3).len(), 3);
    }

    #[test]
    fn pruning_rules() {
        let a = Wire::chain(0);
        let b = Wire::chain(1);
        let gone: BTreeSet<Wire> = [b].into();
        assert_eq!(prune_boxes(&DiagramElement::boxed("x", vec![b]), &gone), DiagramElement::Empty);
        let frame = DiagramElement::Frame {
            name: "f".into(),
            wires: vec![a, b],
            components: vec![
                DiagramElement::boxed("g", vec![a]),
                DiagramElement::boxed("h", vec![b]),
            ],
        };
        assert_eq!(
            prune_boxes(&frame, &gone),
            DiagramElement::Frame {
                name: "f".into(),
                wires: vec![a],
                components: vec![DiagramElement::boxed("g", vec![a])],
            }
        );
        let only_b = DiagramElement::Frame {
            name: "f".into(),
            wires: vec![a, b],
            components: vec![DiagramElement::boxed("h", vec![b])],
        };
        assert_eq!(prune_boxes(&only_b, &gone), DiagramElement::boxed("f", vec![a]));
    }

    #[test]
    fn reflexive_mentions_get_copies() {
        let corefs = CorefMap::new(vec![vec![Mention::new(0, 0), Mention::new(0, 2)]]);
        let ctx = FrameContext::from_corefs(0, &corefs);
        assert_eq!(ctx.wire(0), Some(Wire::new(0, 0)));
        assert_eq!(ctx.wire(2), Some(Wire::new(0, 1)));
    }
}
