//! Frame elimination by sandwiching.
//!
//! A frame `F` over wires `W` with components `c1 .. cm` becomes, for each
//! component in order: a `F_bot` box on `W`, swaps that bring the
//! component's wires to the front of `W`'s slots, the expanded component,
//! the inverse swaps, and a `F_top` box on `W`. Shared mode reuses one box
//! pair for every component; foliated mode numbers them.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::diagram::{apply_layer, sort_swaps, transposition, DiagramElement, TextDiagram, Wire};
use crate::error::Result;
use crate::frames::FrameContext;
use crate::pregroup::{Base, Cup, PregroupDiagram, PregroupType};
use crate::tree::PregroupTreeNode;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SandwichMode {
    #[default]
    Shared,
    Foliated,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SandwichConfig {
    pub mode: SandwichMode,
}

impl SandwichConfig {
    pub fn foliated() -> Self {
        SandwichConfig {
            mode: SandwichMode::Foliated,
        }
    }

    fn names(&self, frame: &str, component: usize) -> (String, String) {
        match self.mode {
            SandwichMode::Shared => (format!("{frame}_bot"), format!("{frame}_top")),
            SandwichMode::Foliated => (
                format!("{frame}_bot_{}", component + 1),
                format!("{frame}_top_{}", component + 1),
            ),
        }
    }
}

/// Pads `e` with an identity on every other live wire.
fn full_width(e: DiagramElement, current: &[Wire]) -> DiagramElement {
    let used = e.wires();
    let rest: Vec<Wire> = current.iter().filter(|w| !used.contains(w)).copied().collect();
    if rest.is_empty() {
        e
    } else {
        DiagramElement::Par {
            elements: vec![e, DiagramElement::Identity { wires: rest }],
        }
    }
}

/// Slots of `frame_wires` in `current`, refilled with `front` first and the
/// remaining frame wires after, both in current order.
fn routed(current: &[Wire], frame_wires: &[Wire], front: &[Wire]) -> Vec<Wire> {
    let slots: Vec<usize> = (0..current.len())
        .filter(|&i| frame_wires.contains(&current[i]))
        .collect();
    let in_order: Vec<Wire> = slots.iter().map(|&i| current[i]).collect();
    let fill: Vec<Wire> = in_order
        .iter()
        .filter(|w| front.contains(w))
        .chain(in_order.iter().filter(|w| !front.contains(w)))
        .copied()
        .collect();
    let mut target = current.to_vec();
    for (slot, w) in slots.into_iter().zip(fill) {
        target[slot] = w;
    }
    target
}

fn expand(e: &DiagramElement, cfg: &SandwichConfig, current: &mut Vec<Wire>, out: &mut Vec<DiagramElement>) {
    match e {
        DiagramElement::Box { .. } | DiagramElement::Merge { .. } => {
            out.push(full_width(e.clone(), current));
            if matches!(e, DiagramElement::Merge { .. }) {
                *current = apply_layer(current, e).expect("merge over live wires");
            }
        }
        DiagramElement::Frame {
            name,
            wires,
            components,
        } => {
            for (i, c) in components.iter().enumerate() {
                let (bot, top) = cfg.names(name, i);
                out.push(full_width(DiagramElement::boxed(bot, wires.clone()), current));
                let front = c.wires();
                let target = routed(current, wires, &front);
                let swaps = sort_swaps(current, &target);
                out.extend(swaps.iter().map(|&k| transposition(current.len(), k)));
                *current = target;
                expand(c, cfg, current, out);
                for &k in swaps.iter().rev() {
                    out.push(transposition(current.len(), k));
                    current.swap(k, k + 1);
                }
                out.push(full_width(DiagramElement::boxed(top, wires.clone()), current));
            }
        }
        DiagramElement::Seq { elements } | DiagramElement::Par { elements } => {
            for x in elements {
                expand(x, cfg, current, out);
            }
        }
        DiagramElement::Identity { .. } | DiagramElement::Empty => {}
        DiagramElement::Perm { .. } | DiagramElement::Spider { .. } => {
            *current = apply_layer(current, e).expect("layer over live wires");
            out.push(e.clone());
        }
    }
}

/// Replaces every frame, innermost first, by sandwich layers.
pub fn expand_frames(d: &TextDiagram, cfg: &SandwichConfig) -> Result<TextDiagram> {
    let trace = d.wire_trace()?;
    let mut layers = Vec::new();
    let mut boundaries = Vec::new();
    for (i, layer) in d.layers.iter().enumerate() {
        if d.boundaries.contains(&i) {
            boundaries.push(layers.len());
        }
        let mut current = trace[i].clone();
        expand(layer, cfg, &mut current, &mut layers);
        debug_assert_eq!(current, trace[i + 1]);
    }
    Ok(TextDiagram {
        states: d.states.clone(),
        layers,
        boundaries,
    })
}

/// Wiring of one frame recovered from the sentence's pregroup diagram.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameIO {
    pub inputs: Vec<Wire>,
    pub outputs: Vec<Wire>,
    pub component_wires: Vec<Vec<Wire>>,
    /// Factors whose path ended at a removed cup; their wire was guessed.
    pub untraced: Vec<usize>,
}

enum Trace {
    Noun(usize),
    Untraced,
    Dead,
}

struct Tracer<'a> {
    d: &'a PregroupDiagram,
    owners: Vec<usize>,
    partners: Vec<Option<usize>>,
    ranges: Vec<std::ops::Range<usize>>,
    removed: HashSet<usize>,
    ctx: &'a FrameContext,
}

impl Tracer<'_> {
    /// Follows the cup at wire `w`, passing through tokens along wires of the
    /// same base until a noun is reached.
    fn follow(&self, w: usize, seen: &mut HashSet<usize>) -> Trace {
        if !seen.insert(w) {
            return Trace::Dead;
        }
        let Some(p) = self.partners[w] else {
            return if self.removed.contains(&w) {
                Trace::Untraced
            } else {
                Trace::Dead
            };
        };
        let u = self.owners[p];
        if self.ctx.wire(u).is_some() && self.d.tokens[u].ctype == PregroupType::n() {
            return Trace::Noun(u);
        }
        seen.insert(p);
        let base = self.d.wires()[p].base;
        let mut result = Trace::Dead;
        for w2 in self.ranges[u].clone() {
            if w2 == p || self.d.tokens[u].ctype.0[w2 - self.ranges[u].start].base != base {
                continue;
            }
            match self.follow(w2, seen) {
                Trace::Noun(n) => return Trace::Noun(n),
                Trace::Untraced => result = Trace::Untraced,
                Trace::Dead => {}
            }
        }
        result
    }
}

fn subtree_wires(node: &PregroupTreeNode, ctx: &FrameContext) -> Vec<Wire> {
    let mut nouns: Vec<(usize, Wire)> = node
        .iter()
        .filter(|n| n.is_leaf() && n.out_type == PregroupType::n())
        .filter_map(|n| ctx.wire(n.token_index).map(|w| (n.token_index, w)))
        .collect();
    nouns.sort();
    nouns.into_iter().map(|(_, w)| w).collect()
}

/// Traces each noun factor of the frame token's type through the cups to a
/// source noun. Pass-through factors that lead to an argument slot of some
/// other word are skipped; factors cut by a removed loop cup fall back to
/// the noun nearest in token distance and are listed in `untraced`.
pub fn frame_io_wires(
    frame_node: &PregroupTreeNode,
    d: &PregroupDiagram,
    removed_cups: &[Cup],
    ctx: &FrameContext,
) -> FrameIO {
    let mut partners = d.partners();
    let mut removed = HashSet::new();
    for c in removed_cups {
        partners[c.0] = None;
        partners[c.1] = None;
        removed.insert(c.0);
        removed.insert(c.1);
    }
    let tracer = Tracer {
        d,
        owners: d.wire_owners(),
        partners,
        ranges: d.token_ranges(),
        removed,
        ctx,
    };
    let t = frame_node.token_index;
    let subtree: Vec<usize> = frame_node.iter().map(|n| n.token_index).collect();
    let mut io = FrameIO::default();
    let mut found: Vec<(usize, Wire)> = Vec::new();
    for (k, w) in tracer.ranges[t].clone().enumerate() {
        if d.tokens[t].ctype.0[k].base != Base::N {
            continue;
        }
        let noun = match tracer.follow(w, &mut HashSet::new()) {
            Trace::Noun(u) => Some(u),
            Trace::Dead => None,
            Trace::Untraced => {
                io.untraced.push(k);
                subtree
                    .iter()
                    .copied()
                    .filter(|&u| ctx.wire(u).is_some())
                    .min_by_key(|&u| (u.abs_diff(t), u))
            }
        };
        if let Some(u) = noun {
            let wire = ctx.wire(u).expect("noun tokens have wires");
            if !found.iter().any(|(_, x)| *x == wire) {
                found.push((u, wire));
            }
        }
    }
    // Nouns below the frame reached through its children rather than its
    // own factors (modifier chains) belong to it as well.
    for wire in subtree_wires(frame_node, ctx) {
        if !found.iter().any(|(_, x)| *x == wire) {
            found.push((usize::MAX, wire));
        }
    }
    let order: BTreeSet<(usize, Wire)> = frame_node
        .iter()
        .filter_map(|n| ctx.wire(n.token_index).map(|w| (n.token_index, w)))
        .collect();
    io.inputs = order
        .iter()
        .filter(|(_, w)| found.iter().any(|(_, x)| x == w))
        .map(|(_, w)| *w)
        .collect();
    io.outputs = io.inputs.clone();
    for c in &frame_node.children {
        if c.is_leaf() && c.out_type == PregroupType::n() && ctx.wire(c.token_index).is_some() {
            continue;
        }
        let ws = if c.is_leaf() {
            io.inputs.clone()
        } else {
            subtree_wires(c, ctx)
        };
        if !ws.is_empty() {
            io.component_wires.push(ws);
        }
    }
    io
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::compose_document;
    use crate::frames::sentence_diagram;
    use crate::ingest::{lexicon_parse, CorefMap, Lexicon, Mention};
    use crate::tree::build_trees;

    fn two_component() -> TextDiagram {
        let a = Wire::chain(0);
        let b = Wire::chain(1);
        let c = Wire::chain(2);
        let states = (0..3)
            .map(|i| crate::diagram::NounState {
                word: format!("n{i}"),
                sentence_index: 0,
                token_index: i,
                chain_id: i,
            })
            .collect();
        TextDiagram {
            states,
            layers: vec![DiagramElement::Frame {
                name: "F".into(),
                wires: vec![a, b, c],
                components: vec![
                    DiagramElement::boxed("g", vec![c]),
                    DiagramElement::boxed("h", vec![a, b]),
                ],
            }],
            boundaries: vec![0],
        }
    }

    fn box_names(d: &TextDiagram) -> Vec<String> {
        let mut names = Vec::new();
        for l in &d.layers {
            for s in &d.states {
                l.names_on(s.chain_id, &mut names);
            }
        }
        names.sort();
        names.dedup();
        names
    }

    #[test]
    fn shared_and_foliated_counts() {
        let d = two_component();
        let shared = expand_frames(&d, &SandwichConfig::default()).unwrap();
        assert_eq!(shared.frame_count(), 0);
        let names = box_names(&shared);
        assert!(names.contains(&"F_bot".to_string()) && names.contains(&"F_top".to_string()));
        let fol = expand_frames(&d, &SandwichConfig::foliated()).unwrap();
        let fnames: Vec<_> = box_names(&fol).into_iter().filter(|n| n.starts_with("F_")).collect();
        assert_eq!(fnames, ["F_bot_1", "F_bot_2", "F_top_1", "F_top_2"]);
        assert_eq!(fol.output_wires(), d.output_wires());
    }

    #[test]
    fn component_wires_are_routed_to_the_front() {
        let d = two_component();
        let out = expand_frames(&d, &SandwichConfig::default()).unwrap();
        let trace = out.wire_trace().unwrap();
        let g = out
            .layers
            .iter()
            .position(|l| l.wires().contains(&Wire::chain(2)) && format!("{l:?}").contains("\"g\""))
            .unwrap();
        assert_eq!(trace[g][0], Wire::chain(2));
        assert_eq!(trace.last().unwrap(), &d.input_wires());
    }

    #[test]
    fn single_full_component_needs_no_swaps() {
        let a = Wire::chain(0);
        let mut d = two_component();
        d.states.truncate(1);
        d.layers = vec![DiagramElement::Frame {
            name: "F".into(),
            wires: vec![a],
            components: vec![DiagramElement::boxed("g", vec![a])],
        }];
        let out = expand_frames(&d, &SandwichConfig::default()).unwrap();
        let kinds: Vec<_> = out.layers.iter().map(|l| l.kind()).collect();
        assert_eq!(kinds, ["box", "box", "box"]);
    }

    #[test]
    fn loves_frame_io() {
        let d = lexicon_parse(&["Alice", "loves", "fast", "bikes"], &Lexicon::builtin()).unwrap();
        let report = build_trees(&d).unwrap();
        let corefs = CorefMap::new(vec![vec![Mention::new(0, 0)], vec![Mention::new(0, 3)]]);
        let ctx = FrameContext::from_corefs(0, &corefs);
        let io = frame_io_wires(&report.forest[0], &d, &report.removed_cups, &ctx);
        assert_eq!(io.inputs, vec![Wire::chain(0), Wire::chain(1)]);
        assert_eq!(io.outputs, io.inputs);
        assert_eq!(io.component_wires, vec![vec![Wire::chain(1)]]);
        assert!(io.untraced.is_empty());
        let s = sentence_diagram(&report.forest, &BTreeSet::new(), &ctx).unwrap();
        let text = compose_document(&[s], &corefs).unwrap();
        assert_eq!(expand_frames(&text, &SandwichConfig::default()).unwrap().frame_count(), 0);
    }
}
