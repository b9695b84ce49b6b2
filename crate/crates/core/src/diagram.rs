//! Sentence and text diagrams.
//!
//! Wires are named by coreference chain. Within one sentence the same chain
//! can be mentioned more than once (reflexives, coordination); each extra
//! mention gets its own copy index and is split off the chain's wire by a
//! spider before the sentence body and merged back afterwards.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::escape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct Wire {
    pub chain: usize,
    pub copy: usize,
}

impl Wire {
    pub fn new(chain: usize, copy: usize) -> Self {
        Wire { chain, copy }
    }

    pub fn chain(chain: usize) -> Self {
        Wire { chain, copy: 0 }
    }
}

impl From<(usize, usize)> for Wire {
    fn from((chain, copy): (usize, usize)) -> Self {
        Wire { chain, copy }
    }
}

impl From<Wire> for (usize, usize) {
    fn from(w: Wire) -> Self {
        (w.chain, w.copy)
    }
}

impl fmt::Display for Wire {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.copy == 0 {
            write!(f, "w{}", self.chain)
        } else {
            write!(f, "w{}.{}", self.chain, self.copy)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounState {
    pub word: String,
    pub sentence_index: usize,
    pub token_index: usize,
    pub chain_id: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiagramElement {
    Box {
        name: String,
        wires: Vec<Wire>,
    },
    Frame {
        name: String,
        wires: Vec<Wire>,
        components: Vec<DiagramElement>,
    },
    Identity {
        wires: Vec<Wire>,
    },
    Empty,
    Seq {
        elements: Vec<DiagramElement>,
    },
    Par {
        elements: Vec<DiagramElement>,
    },
    /// Output position `i` carries input position `mapping[i]`.
    Perm {
        mapping: Vec<usize>,
    },
    /// Copies when `in_wires` is shorter than `out_wires`, merges otherwise.
    /// Outputs take the position of the first input.
    Spider {
        in_wires: Vec<Wire>,
        out_wires: Vec<Wire>,
    },
    /// Unitary over every wire that keeps only the last one.
    Merge {
        name: String,
        wires: Vec<Wire>,
    },
}

impl DiagramElement {
    pub fn boxed(name: impl Into<String>, wires: Vec<Wire>) -> Self {
        DiagramElement::Box {
            name: name.into(),
            wires,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            DiagramElement::Box { .. } => "box",
            DiagramElement::Frame { .. } => "frame",
            DiagramElement::Identity { .. } => "identity",
            DiagramElement::Empty => "empty",
            DiagramElement::Seq { .. } => "seq",
            DiagramElement::Par { .. } => "par",
            DiagramElement::Perm { .. } => "perm",
            DiagramElement::Spider { .. } => "spider",
            DiagramElement::Merge { .. } => "merge",
        }
    }

    /// Identity and Empty carry no content.
    pub fn is_trivial(&self) -> bool {
        matches!(self, DiagramElement::Identity { .. } | DiagramElement::Empty)
    }

    /// Wires touched, in first-reference order. Perms touch none by name.
    pub fn wires(&self) -> Vec<Wire> {
        let mut out = Vec::new();
        self.collect_wires(&mut out);
        out
    }

    fn collect_wires(&self, out: &mut Vec<Wire>) {
        let mut push = |ws: &[Wire]| {
            for w in ws {
                if !out.contains(w) {
                    out.push(*w);
                }
            }
        };
        match self {
            DiagramElement::Box { wires, .. }
            | DiagramElement::Identity { wires }
            | DiagramElement::Merge { wires, .. } => push(wires),
            DiagramElement::Frame {
                wires, components, ..
            } => {
                push(wires);
                for c in components {
                    c.collect_wires(out);
                }
            }
            DiagramElement::Seq { elements } | DiagramElement::Par { elements } => {
                for e in elements {
                    e.collect_wires(out);
                }
            }
            DiagramElement::Spider {
                in_wires,
                out_wires,
            } => {
                push(in_wires);
                push(out_wires);
            }
            DiagramElement::Perm { .. } | DiagramElement::Empty => {}
        }
    }

    /// Number of Frame elements at any depth.
    pub fn frame_count(&self) -> usize {
        match self {
            DiagramElement::Frame { components, .. } => {
                1 + components.iter().map(Self::frame_count).sum::<usize>()
            }
            DiagramElement::Seq { elements } | DiagramElement::Par { elements } => {
                elements.iter().map(Self::frame_count).sum()
            }
            _ => 0,
        }
    }

    /// Box, Frame and Merge names touching `chain`, frames before their
    /// components.
    pub fn names_on(&self, chain: usize, out: &mut Vec<String>) {
        let on = |ws: &[Wire]| ws.iter().any(|w| w.chain == chain);
        match self {
            DiagramElement::Box { name, wires } | DiagramElement::Merge { name, wires } => {
                if on(wires) {
                    out.push(name.clone());
                }
            }
            DiagramElement::Frame {
                name,
                wires,
                components,
            } => {
                if on(wires) {
                    out.push(name.clone());
                    for c in components {
                        c.names_on(chain, out);
                    }
                }
            }
            DiagramElement::Seq { elements } | DiagramElement::Par { elements } => {
                for e in elements {
                    e.names_on(chain, out);
                }
            }
            _ => {}
        }
    }

    fn write_text(&self, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        let list = |ws: &[Wire]| ws.iter().map(Wire::to_string).collect::<Vec<_>>().join(",");
        match self {
            DiagramElement::Box { name, wires } => {
                let _ = writeln!(out, "{pad}box {name} [{}]", list(wires));
            }
            DiagramElement::Merge { name, wires } => {
                let _ = writeln!(out, "{pad}merge {name} [{}]", list(wires));
            }
            DiagramElement::Frame {
                name,
                wires,
                components,
            } => {
                let _ = writeln!(out, "{pad}frame {name} [{}]", list(wires));
                for c in components {
                    c.write_text(depth + 1, out);
                }
            }
            DiagramElement::Identity { wires } => {
                let _ = writeln!(out, "{pad}id [{}]", list(wires));
            }
            DiagramElement::Empty => {
                let _ = writeln!(out, "{pad}empty");
            }
            DiagramElement::Seq { elements } | DiagramElement::Par { elements } => {
                let _ = writeln!(out, "{pad}{}", self.kind());
                for e in elements {
                    e.write_text(depth + 1, out);
                }
            }
            DiagramElement::Perm { mapping } => {
                let m: Vec<String> = mapping.iter().map(usize::to_string).collect();
                let _ = writeln!(out, "{pad}perm [{}]", m.join(","));
            }
            DiagramElement::Spider {
                in_wires,
                out_wires,
            } => {
                let _ = writeln!(out, "{pad}spider [{}] -> [{}]", list(in_wires), list(out_wires));
            }
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        self.write_text(0, &mut s);
        s
    }
}

/// Adjacent transposition of positions `k` and `k + 1` on `width` wires.
pub fn transposition(width: usize, k: usize) -> DiagramElement {
    let mut mapping: Vec<usize> = (0..width).collect();
    mapping.swap(k, k + 1);
    DiagramElement::Perm { mapping }
}

/// Adjacent transpositions turning `from` into `to` (bubble sort).
pub fn sort_swaps<T: PartialEq + Copy>(from: &[T], to: &[T]) -> Vec<usize> {
    let rank: Vec<usize> = from
        .iter()
        .map(|x| to.iter().position(|y| y == x).expect("same elements"))
        .collect();
    let mut rank = rank;
    let mut swaps = Vec::new();
    let n = rank.len();
    for pass in 0..n {
        let mut moved = false;
        for k in 0..n.saturating_sub(1 + pass) {
            if rank[k] > rank[k + 1] {
                rank.swap(k, k + 1);
                swaps.push(k);
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    swaps
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceDiagram {
    pub nouns: Vec<NounState>,
    pub body: DiagramElement,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextDiagram {
    pub states: Vec<NounState>,
    pub layers: Vec<DiagramElement>,
    /// Index into `layers` where each composed sentence starts.
    #[serde(default)]
    pub boundaries: Vec<usize>,
}

impl TextDiagram {
    pub fn input_wires(&self) -> Vec<Wire> {
        self.states.iter().map(|s| Wire::chain(s.chain_id)).collect()
    }

    /// Chain id to output position.
    pub fn chain_order(&self) -> BTreeMap<usize, usize> {
        self.output_wires()
            .iter()
            .enumerate()
            .map(|(i, w)| (w.chain, i))
            .collect()
    }

    pub fn output_wires(&self) -> Vec<Wire> {
        self.wire_trace()
            .map(|mut t| t.pop().unwrap_or_default())
            .unwrap_or_default()
    }

    /// Wire list before each layer plus the final output list. Fails on
    /// layers that reference absent wires or have the wrong width.
    pub fn wire_trace(&self) -> Result<Vec<Vec<Wire>>> {
        let mut current = self.input_wires();
        let mut trace = vec![current.clone()];
        for (i, layer) in self.layers.iter().enumerate() {
            current = apply_layer(&current, layer).map_err(|m| Error::format(format!("layers[{i}]"), m))?;
            trace.push(current.clone());
        }
        Ok(trace)
    }

    pub fn frame_count(&self) -> usize {
        self.layers.iter().map(DiagramElement::frame_count).sum()
    }

    /// Per state, in state order: the names of boxes and frames touching
    /// its chain, in layer order.
    pub fn box_sequences(&self) -> Vec<(String, Vec<String>)> {
        self.states
            .iter()
            .map(|s| {
                let mut names = Vec::new();
                for l in &self.layers {
                    l.names_on(s.chain_id, &mut names);
                }
                (s.word.clone(), names)
            })
            .collect()
    }

    /// Sequential composition along shared chains: `other`'s wires are
    /// routed to the end of the wire list, its layers run there, and the
    /// routing is undone.
    pub fn then(&self, other: &TextDiagram) -> TextDiagram {
        let mut states = self.states.clone();
        for s in &other.states {
            if !states.iter().any(|t| t.chain_id == s.chain_id) {
                states.push(s.clone());
            }
        }
        let extra = states.len() - self.states.len();
        let mut layers: Vec<DiagramElement> = self.layers.iter().map(|l| pad_perms(l, extra)).collect();
        let mut boundaries = self.boundaries.clone();
        let all: Vec<Wire> = self
            .output_wires()
            .into_iter()
            .chain(
                states[self.states.len()..]
                    .iter()
                    .map(|s| Wire::chain(s.chain_id)),
            )
            .collect();
        let theirs = other.input_wires();
        let offset = all.len() - theirs.len();
        let routed: Vec<Wire> = all
            .iter()
            .filter(|w| !theirs.contains(w))
            .chain(theirs.iter())
            .copied()
            .collect();
        let swaps = sort_swaps(&all, &routed);
        let start = layers.len();
        layers.extend(swaps.iter().map(|&k| transposition(all.len(), k)));
        let body = layers.len();
        if other.boundaries.is_empty() {
            boundaries.push(start);
        }
        boundaries.extend(
            other
                .boundaries
                .iter()
                .map(|&b| if b == 0 { start } else { body + b }),
        );
        layers.extend(other.layers.iter().map(|l| shift_perms(l, offset)));
        layers.extend(swaps.iter().rev().map(|&k| transposition(all.len(), k)));
        TextDiagram {
            states,
            layers,
            boundaries,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "states");
        for st in &self.states {
            let _ = writeln!(s, "  {} {}", Wire::chain(st.chain_id), st.word);
        }
        for (i, l) in self.layers.iter().enumerate() {
            if let Some(k) = self.boundaries.iter().position(|&b| b == i) {
                let _ = writeln!(s, "-- sentence {k}");
            }
            l.write_text(0, &mut s);
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("diagrams always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: TextDiagram = serde_json::from_str(text).map_err(|e| {
            Error::format(format!("line {} column {}", e.line(), e.column()), e.to_string())
        })?;
        d.wire_trace()?;
        Ok(d)
    }

    /// One column per wire; boxes are nodes linked along each wire.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph text {\n  rankdir=TB;\n  node [shape=box];\n");
        let mut last: BTreeMap<Wire, String> = BTreeMap::new();
        for st in &self.states {
            let id = format!("s{}", st.chain_id);
            let _ = writeln!(s, "  {id} [label=\"{}\", shape=triangle];", escape(&st.word));
            last.insert(Wire::chain(st.chain_id), id);
        }
        let mut counter = 0usize;
        let mut node = |s: &mut String, label: &str, wires: &[Wire], last: &mut BTreeMap<Wire, String>| {
            let id = format!("n{counter}");
            counter += 1;
            let _ = writeln!(s, "  {id} [label=\"{}\"];", escape(label));
            for w in wires {
                if let Some(prev) = last.get(w) {
                    let _ = writeln!(s, "  {prev} -> {id} [label=\"{w}\"];");
                }
                last.insert(*w, id.clone());
            }
        };
        fn walk(
            e: &DiagramElement,
            s: &mut String,
            last: &mut BTreeMap<Wire, String>,
            node: &mut dyn FnMut(&mut String, &str, &[Wire], &mut BTreeMap<Wire, String>),
        ) {
            match e {
                DiagramElement::Box { name, wires } | DiagramElement::Merge { name, wires } => {
                    node(s, name, wires, last)
                }
                DiagramElement::Frame {
                    name,
                    wires,
                    components,
                } => {
                    node(s, &format!("{name} ["), wires, last);
                    for c in components {
                        walk(c, s, last, node);
                    }
                    node(s, &format!("] {name}"), wires, last);
                }
                DiagramElement::Seq { elements } | DiagramElement::Par { elements } => {
                    for c in elements {
                        walk(c, s, last, node);
                    }
                }
                DiagramElement::Spider {
                    in_wires,
                    out_wires,
                } => {
                    let mut ws = in_wires.clone();
                    ws.extend(out_wires.iter().filter(|w| !in_wires.contains(w)));
                    node(s, "spider", &ws, last)
                }
                _ => {}
            }
        }
        for l in &self.layers {
            walk(l, &mut s, &mut last, &mut node);
        }
        s.push_str("}\n");
        s
    }
}

fn shift_perms(e: &DiagramElement, offset: usize) -> DiagramElement {
    match e {
        DiagramElement::Perm { mapping } => DiagramElement::Perm {
            mapping: (0..offset)
                .chain(mapping.iter().map(|&m| m + offset))
                .collect(),
        },
        DiagramElement::Seq { elements } => DiagramElement::Seq {
            elements: elements.iter().map(|x| shift_perms(x, offset)).collect(),
        },
        DiagramElement::Par { elements } => DiagramElement::Par {
            elements: elements.iter().map(|x| shift_perms(x, offset)).collect(),
        },
        other => other.clone(),
    }
}

/// Extends permutations with fixed points for `extra` trailing wires.
fn pad_perms(e: &DiagramElement, extra: usize) -> DiagramElement {
    match e {
        DiagramElement::Perm { mapping } => DiagramElement::Perm {
            mapping: (0..mapping.len() + extra)
                .map(|i| mapping.get(i).copied().unwrap_or(i))
                .collect(),
        },
        DiagramElement::Seq { elements } => DiagramElement::Seq {
            elements: elements.iter().map(|x| pad_perms(x, extra)).collect(),
        },
        DiagramElement::Par { elements } => DiagramElement::Par {
            elements: elements.iter().map(|x| pad_perms(x, extra)).collect(),
        },
        other => other.clone(),
    }
}

/// Wire list after `layer`, or a description of why it does not fit.
pub fn apply_layer(current: &[Wire], layer: &DiagramElement) -> std::result::Result<Vec<Wire>, String> {
    let need = |ws: &[Wire]| -> std::result::Result<(), String> {
        match ws.iter().find(|w| !current.contains(w)) {
            Some(w) => Err(format!("wire {w} is not live")),
            None => Ok(()),
        }
    };
    match layer {
        DiagramElement::Perm { mapping } => {
            if mapping.len() != current.len() {
                return Err(format!(
                    "permutation of width {} on {} wires",
                    mapping.len(),
                    current.len()
                ));
            }
            let mut seen = vec![false; mapping.len()];
            for &m in mapping {
                if m >= seen.len() || std::mem::replace(&mut seen[m], true) {
                    return Err("mapping is not a bijection".into());
                }
            }
            Ok(mapping.iter().map(|&m| current[m]).collect())
        }
        DiagramElement::Spider {
            in_wires,
            out_wires,
        } => {
            need(in_wires)?;
            if in_wires.is_empty() {
                return Err("spider without inputs".into());
            }
            let at = current
                .iter()
                .position(|w| *w == in_wires[0])
                .expect("checked live");
            let mut next: Vec<Wire> = current[..at]
                .iter()
                .filter(|w| !in_wires.contains(w))
                .copied()
                .collect();
            next.extend_from_slice(out_wires);
            next.extend(current[at..].iter().filter(|w| !in_wires.contains(w)));
            Ok(next)
        }
        DiagramElement::Merge { wires, .. } => {
            need(wires)?;
            let keep = *wires.last().ok_or("merge without wires")?;
            Ok(current
                .iter()
                .filter(|w| **w == keep || !wires.contains(w))
                .copied()
                .collect())
        }
        DiagramElement::Seq { elements } => {
            let mut cur = current.to_vec();
            for e in elements {
                cur = apply_layer(&cur, e)?;
            }
            Ok(cur)
        }
        other => {
            need(&other.wires())?;
            Ok(current.to_vec())
        }
    }
}
