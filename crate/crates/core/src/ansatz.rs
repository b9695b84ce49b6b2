//! Lowering frame-free text diagrams to circuits.
//!
//! Every wire gets `q` qubits. Noun states and boxes become ansatz blocks,
//! permutations become SWAP networks, a copy spider fans a wire out with CX
//! gates onto fresh qubits and its dagger undoes the CX and postselects the
//! copy on zero.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::diagram::{apply_layer, sort_swaps, DiagramElement, TextDiagram, Wire};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_QUBITS: usize = 14;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzKind {
    Iqp,
    #[default]
    Sim4,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnsatzConfig {
    pub kind: AnsatzKind,
    pub qubits_per_wire: usize,
    pub layers: usize,
    pub share_parameters: bool,
    pub seed: u64,
    pub max_qubits: usize,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        AnsatzConfig {
            kind: AnsatzKind::Sim4,
            qubits_per_wire: 1,
            layers: 1,
            share_parameters: true,
            seed: 0,
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

impl AnsatzConfig {
    pub fn validate(&self) -> Result<()> {
        if self.qubits_per_wire == 0 {
            return Err(Error::InvalidConfig("qubits per wire must be at least 1".into()));
        }
        if self.layers == 0 {
            return Err(Error::InvalidConfig("layers must be at least 1".into()));
        }
        Ok(())
    }
}

/// Placeholder symbol for local parameter `idx` of a block.
fn local(idx: usize) -> String {
    idx.to_string()
}

/// `layers` rounds of Hadamards followed by a CRz ladder on qubits `0..n`.
/// Parameters are numbered locally from `"0"`.
pub fn iqp_block(n: usize, layers: usize) -> Vec<Gate> {
    let mut gates = Vec::new();
    let mut p = 0;
    for _ in 0..layers {
        gates.extend((0..n).map(|q| Gate::fixed(GateKind::H, vec![q])));
        for q in 0..n.saturating_sub(1) {
            gates.push(Gate::symbolic(GateKind::CRz, vec![q, q + 1], local(p)));
            p += 1;
        }
    }
    gates
}

/// `layers` rounds of Rx and Rz on every qubit followed by a CRx ladder.
pub fn sim4_block(n: usize, layers: usize) -> Vec<Gate> {
    let mut gates = Vec::new();
    let mut p = 0;
    for _ in 0..layers {
        for kind in [GateKind::Rx, GateKind::Rz] {
            for q in 0..n {
                gates.push(Gate::symbolic(kind, vec![q], local(p)));
                p += 1;
            }
        }
        for q in 0..n.saturating_sub(1) {
            gates.push(Gate::symbolic(GateKind::CRx, vec![q, q + 1], local(p)));
            p += 1;
        }
    }
    gates
}

/// Rx·Rz·Rx per layer; stands in for the IQP block on one qubit, which has
/// no entangling gates and hence no parameters.
fn euler_block(layers: usize) -> Vec<Gate> {
    let mut gates = Vec::new();
    for l in 0..layers {
        for (k, kind) in [GateKind::Rx, GateKind::Rz, GateKind::Rx].into_iter().enumerate() {
            gates.push(Gate::symbolic(kind, vec![0], local(3 * l + k)));
        }
    }
    gates
}

/// Appends the text-level merge over every output wire.
pub fn append_merge_box(d: &TextDiagram) -> TextDiagram {
    let wires = d.output_wires();
    let mut out = d.clone();
    if !wires.is_empty() {
        out.layers.push(DiagramElement::Merge {
            name: format!("merge_{}", wires.len()),
            wires,
        });
    }
    out
}

struct Compiler<'a> {
    cfg: &'a AnsatzConfig,
    circuit: Circuit,
    rng: ChaCha8Rng,
    occurrences: HashMap<(String, usize), usize>,
    next_block: usize,
}

impl Compiler<'_> {
    fn qubits(&self, block: usize) -> Vec<usize> {
        let q = self.cfg.qubits_per_wire;
        (block * q..(block + 1) * q).collect()
    }

    fn block(&mut self, name: &str, arity: usize, qubits: &[usize]) {
        let template = match self.cfg.kind {
            AnsatzKind::Iqp if qubits.len() == 1 => euler_block(self.cfg.layers),
            AnsatzKind::Iqp => iqp_block(qubits.len(), self.cfg.layers),
            AnsatzKind::Sim4 => sim4_block(qubits.len(), self.cfg.layers),
        };
        let stem = if self.cfg.share_parameters {
            name.to_string()
        } else {
            let n = self.occurrences.entry((name.to_string(), arity)).or_insert(0);
            *n += 1;
            format!("{name}#{}", *n - 1)
        };
        for mut g in template {
            g.qubits = g.qubits.iter().map(|&q| qubits[q]).collect();
            if let Some(idx) = g.symbol() {
                let sym = format!("{stem}__{arity}__{idx}");
                if !self.circuit.symbols.contains_key(&sym) {
                    let v = self.rng.gen_range(0.0..TAU);
                    self.circuit.symbols.insert(sym.clone(), v);
                }
                g.param = Some(crate::circuit::Param::Symbol(sym));
            }
            self.circuit.gates.push(g);
        }
    }

    fn swap_blocks(&mut self, a: usize, b: usize) {
        for (x, y) in self.qubits(a).into_iter().zip(self.qubits(b)) {
            self.circuit.gates.push(Gate::fixed(GateKind::Swap, vec![x, y]));
        }
    }

    fn cx_blocks(&mut self, a: usize, b: usize) {
        for (x, y) in self.qubits(a).into_iter().zip(self.qubits(b)) {
            self.circuit.gates.push(Gate::fixed(GateKind::CX, vec![x, y]));
        }
    }

    /// `wires[i]` lives in block `blocks[i]`.
    fn layer(&mut self, e: &DiagramElement, wires: &mut Vec<Wire>, blocks: &mut Vec<usize>) -> Result<()> {
        let block_of = |ws: &[Wire], bs: &[usize], w: &Wire| bs[ws.iter().position(|x| x == w).expect("live wire")];
        match e {
            DiagramElement::Frame { name, .. } => {
                return Err(Error::UnexpandedFrame { name: name.clone() });
            }
            DiagramElement::Box { name, wires: on } => {
                let qs: Vec<usize> = on
                    .iter()
                    .flat_map(|w| self.qubits(block_of(wires, blocks, w)))
                    .collect();
                self.block(name, on.len(), &qs);
            }
            DiagramElement::Merge { name, wires: on } => {
                let bs: Vec<usize> = on.iter().map(|w| block_of(wires, blocks, w)).collect();
                let qs: Vec<usize> = bs.iter().flat_map(|&b| self.qubits(b)).collect();
                self.block(name, on.len(), &qs);
                for &b in &bs[..bs.len() - 1] {
                    for q in self.qubits(b) {
                        self.circuit.postselect.push((q, 0));
                    }
                }
                let next = apply_layer(wires, e).map_err(|m| Error::format("merge", m))?;
                *blocks = next.iter().map(|w| block_of(wires, blocks, w)).collect();
                *wires = next;
            }
            DiagramElement::Identity { .. } | DiagramElement::Empty => {}
            DiagramElement::Seq { elements } | DiagramElement::Par { elements } => {
                for x in elements {
                    self.layer(x, wires, blocks)?;
                }
            }
            DiagramElement::Perm { mapping } => {
                let target: Vec<usize> = mapping.clone();
                let identity: Vec<usize> = (0..mapping.len()).collect();
                for k in sort_swaps(&identity, &target) {
                    self.swap_blocks(blocks[k], blocks[k + 1]);
                }
                *wires = apply_layer(wires, e).map_err(|m| Error::format("perm", m))?;
            }
            DiagramElement::Spider {
                in_wires,
                out_wires,
            } => {
                let mut owner: BTreeMap<Wire, usize> =
                    wires.iter().copied().zip(blocks.iter().copied()).collect();
                if in_wires.len() == 1 {
                    let src = owner[&in_wires[0]];
                    for w in out_wires.iter().filter(|w| **w != in_wires[0]) {
                        let fresh = self.next_block;
                        self.next_block += 1;
                        self.cx_blocks(src, fresh);
                        owner.insert(*w, fresh);
                    }
                } else {
                    let keep = in_wires[0];
                    let dst = owner[&keep];
                    owner.insert(out_wires[0], dst);
                    for w in in_wires.iter().filter(|w| **w != keep) {
                        let b = owner[w];
                        self.cx_blocks(dst, b);
                        for q in self.qubits(b) {
                            self.circuit.postselect.push((q, 0));
                        }
                    }
                }
                let next = apply_layer(wires, e).map_err(|m| Error::format("spider", m))?;
                *blocks = next.iter().map(|w| owner[w]).collect();
                *wires = next;
            }
        }
        Ok(())
    }
}

fn extra_copies(e: &DiagramElement) -> usize {
    match e {
        DiagramElement::Spider {
            in_wires,
            out_wires,
        } => out_wires.len().saturating_sub(in_wires.len()),
        DiagramElement::Seq { elements } | DiagramElement::Par { elements } => {
            elements.iter().map(extra_copies).sum()
        }
        _ => 0,
    }
}

pub fn compile(d: &TextDiagram, cfg: &AnsatzConfig) -> Result<Circuit> {
    cfg.validate()?;
    if let Some(name) = d.layers.iter().find_map(first_frame) {
        return Err(Error::UnexpandedFrame { name });
    }
    d.wire_trace()?;
    let blocks_needed = d.states.len() + d.layers.iter().map(extra_copies).sum::<usize>();
    let needed = blocks_needed * cfg.qubits_per_wire;
    if needed > cfg.max_qubits {
        return Err(Error::CapExceeded {
            needed,
            cap: cfg.max_qubits,
        });
    }
    let mut c = Compiler {
        cfg,
        circuit: Circuit {
            n_qubits: needed,
            ..Default::default()
        },
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        occurrences: HashMap::new(),
        next_block: d.states.len(),
    };
    let mut wires = d.input_wires();
    let mut blocks: Vec<usize> = (0..wires.len()).collect();
    for (i, s) in d.states.iter().enumerate() {
        let qs = c.qubits(i);
        c.block(&s.word, 0, &qs);
    }
    for layer in &d.layers {
        c.layer(layer, &mut wires, &mut blocks)?;
    }
    c.circuit.outputs = blocks.iter().flat_map(|&b| c.qubits(b)).collect();
    c.circuit.postselect.sort();
    c.circuit.validate()?;
    Ok(c.circuit)
}

fn first_frame(e: &DiagramElement) -> Option<String> {
    match e {
        DiagramElement::Frame { name, .. } => Some(name.clone()),
        DiagramElement::Seq { elements } | DiagramElement::Par { elements } => {
            elements.iter().find_map(first_frame)
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::NounState;

    fn params(gates: &[Gate]) -> usize {
        let mut s: Vec<&str> = gates.iter().filter_map(Gate::symbol).collect();
        s.sort();
        s.dedup();
        s.len()
    }

    fn count(gates: &[Gate], k: GateKind) -> usize {
        gates.iter().filter(|g| g.name == k).count()
    }

    #[test]
    fn iqp_shapes() {
        let b = iqp_block(4, 1);
        assert_eq!((count(&b, GateKind::H), count(&b, GateKind::CRz)), (4, 3));
        let b = iqp_block(2, 3);
        assert_eq!((count(&b, GateKind::H), count(&b, GateKind::CRz), params(&b)), (6, 3, 3));
    }

    #[test]
    fn sim4_shapes() {
        assert_eq!(params(&sim4_block(1, 1)), 2);
        let b = sim4_block(3, 2);
        assert_eq!((b.len(), params(&b)), (16, 16));
        assert_eq!(params(&sim4_block(2, 1)), 5);
    }

    fn one_noun() -> TextDiagram {
        TextDiagram {
            states: vec![NounState {
                word: "Alice".into(),
                sentence_index: 0,
                token_index: 0,
                chain_id: 0,
            }],
            layers: vec![],
            boundaries: vec![],
        }
    }

    #[test]
    fn single_noun_iqp() {
        let cfg = AnsatzConfig {
            kind: AnsatzKind::Iqp,
            ..Default::default()
        };
        let c = compile(&one_noun(), &cfg).unwrap();
        assert_eq!(c.n_qubits, 1);
        assert_eq!(c.outputs, vec![0]);
        assert_eq!(c.symbols.len(), 3);
        assert!(c.symbols.values().all(|v| (0.0..TAU).contains(v)));
    }

    #[test]
    fn two_wire_box_sim4() {
        let mut d = one_noun();
        d.states.push(NounState {
            word: "Bob".into(),
            sentence_index: 0,
            token_index: 2,
            chain_id: 1,
        });
        d.layers.push(DiagramElement::boxed("likes", vec![Wire::chain(0), Wire::chain(1)]));
        let c = compile(&d, &AnsatzConfig::default()).unwrap();
        let likes: Vec<&Gate> = c
            .gates
            .iter()
            .filter(|g| g.symbol().is_some_and(|s| s.starts_with("likes__2__")))
            .collect();
        assert_eq!(likes.len(), 5);
        let g: Vec<Gate> = likes.into_iter().cloned().collect();
        assert_eq!((count(&g, GateKind::Rx), count(&g, GateKind::Rz), count(&g, GateKind::CRx)), (2, 2, 1));
    }

    #[test]
    fn merge_box_postselects_all_but_last() {
        let mut d = one_noun();
        for i in 1..4 {
            d.states.push(NounState {
                word: format!("n{i}"),
                sentence_index: 0,
                token_index: i,
                chain_id: i,
            });
        }
        let m = append_merge_box(&d);
        let c = compile(&m, &AnsatzConfig::default()).unwrap();
        assert_eq!(c.postselect, vec![(0, 0), (1, 0), (2, 0)]);
        assert_eq!(c.outputs, vec![3]);
        assert!(c.symbols.keys().any(|k| k.starts_with("merge_4__4__")));
        let single = compile(&append_merge_box(&one_noun()), &AnsatzConfig::default()).unwrap();
        assert!(single.postselect.is_empty());
    }

    #[test]
    fn frames_and_caps_are_rejected() {
        let mut d = one_noun();
        d.layers.push(DiagramElement::Frame {
            name: "F".into(),
            wires: vec![Wire::chain(0)],
            components: vec![DiagramElement::boxed("g", vec![Wire::chain(0)])],
        });
        assert!(matches!(
            compile(&d, &AnsatzConfig::default()),
            Err(Error::UnexpandedFrame { .. })
        ));
        let cfg = AnsatzConfig {
            qubits_per_wire: 20,
            ..Default::default()
        };
        assert!(matches!(compile(&one_noun(), &cfg), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn sharing_counts_name_arity_pairs() {
        let mut d = one_noun();
        d.layers.push(DiagramElement::boxed("runs", vec![Wire::chain(0)]));
        d.layers.push(DiagramElement::boxed("runs", vec![Wire::chain(0)]));
        let shared = compile(&d, &AnsatzConfig::default()).unwrap();
        assert_eq!(shared.symbols.len(), 4);
        let separate = compile(
            &d,
            &AnsatzConfig {
                share_parameters: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(separate.symbols.len(), 6);
        assert_eq!(compile(&d, &AnsatzConfig::default()).unwrap(), shared);
    }
}
