//! Document composition along coreference chains.

use serde::{Deserialize, Serialize};

use crate::diagram::{sort_swaps, transposition, DiagramElement, NounState, SentenceDiagram, TextDiagram, Wire};
use crate::error::{Error, Result};
use crate::ingest::{CorefMap, Mention};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermSpec {
    /// Output position `i` carries input position `mapping[i]`.
    pub mapping: Vec<usize>,
    /// `(chain, multiplicity)`, multiplicity at least 2.
    pub spiders: Vec<(usize, usize)>,
}

fn copy_spider(chain: usize, multiplicity: usize) -> DiagramElement {
    DiagramElement::Spider {
        in_wires: vec![Wire::chain(chain)],
        out_wires: (0..multiplicity).map(|k| Wire::new(chain, k)).collect(),
    }
}

fn merge_spider(chain: usize, multiplicity: usize) -> DiagramElement {
    DiagramElement::Spider {
        in_wires: (0..multiplicity).map(|k| Wire::new(chain, k)).collect(),
        out_wires: vec![Wire::chain(chain)],
    }
}

/// Adjacent transpositions in bubble-sort order, then the copy spiders.
pub fn permutation_to_layers(p: &PermSpec) -> Vec<DiagramElement> {
    let identity: Vec<usize> = (0..p.mapping.len()).collect();
    let mut layers: Vec<DiagramElement> = sort_swaps(&identity, &p.mapping)
        .into_iter()
        .map(|k| transposition(p.mapping.len(), k))
        .collect();
    layers.extend(p.spiders.iter().map(|&(c, m)| copy_spider(c, m)));
    layers
}

/// A one-sentence text: its distinct chains as states, then copy spiders,
/// the body, and the merging spiders.
pub fn sentence_text(s: &SentenceDiagram) -> TextDiagram {
    let mut states: Vec<NounState> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for n in &s.nouns {
        match states.iter().position(|t| t.chain_id == n.chain_id) {
            Some(i) => counts[i] += 1,
            None => {
                states.push(n.clone());
                counts.push(1);
            }
        }
    }
    let spiders: Vec<(usize, usize)> = states
        .iter()
        .zip(&counts)
        .filter(|(_, &m)| m > 1)
        .map(|(st, &m)| (st.chain_id, m))
        .collect();
    let mut layers = permutation_to_layers(&PermSpec {
        mapping: (0..states.len()).collect(),
        spiders: spiders.clone(),
    });
    if !s.body.is_trivial() {
        layers.push(s.body.clone());
    }
    layers.extend(spiders.iter().rev().map(|&(c, m)| merge_spider(c, m)));
    TextDiagram {
        states,
        layers,
        boundaries: vec![0],
    }
}

fn check_chains(index: usize, s: &SentenceDiagram, coref: &CorefMap) -> Result<()> {
    for n in &s.nouns {
        let m = Mention::new(n.sentence_index, n.token_index);
        let ok = coref
            .chains
            .get(n.chain_id)
            .is_some_and(|c| c.contains(&m));
        if !ok {
            log::debug!("sentence {index}: {m:?} not in chain {}", n.chain_id);
            return Err(Error::ChainMismatch {
                sentence: n.sentence_index,
                token: n.token_index,
            });
        }
    }
    Ok(())
}

/// Folds sentences left to right. Each sentence's wires are routed to the
/// end of the running wire list, the sentence runs there, and the routing
/// is undone so the output order is chain first-appearance order.
pub fn compose_document(sentences: &[SentenceDiagram], coref: &CorefMap) -> Result<TextDiagram> {
    let mut text = TextDiagram::default();
    for (i, s) in sentences.iter().enumerate() {
        check_chains(i, s, coref)?;
        text = text.then(&sentence_text(s));
    }
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noun(word: &str, sentence: usize, token: usize, chain: usize) -> NounState {
        NounState {
            word: word.into(),
            sentence_index: sentence,
            token_index: token,
            chain_id: chain,
        }
    }

    #[test]
    fn identity_mapping_has_no_layers() {
        let p = PermSpec {
            mapping: vec![0, 1, 2, 3],
            spiders: vec![],
        };
        assert!(permutation_to_layers(&p).is_empty());
    }

    #[test]
    fn swap_outer_wires() {
        let p = PermSpec {
            mapping: vec![2, 1, 0],
            spiders: vec![(4, 2)],
        };
        let layers = permutation_to_layers(&p);
        assert_eq!(
            layers[..3],
            [transposition(3, 0), transposition(3, 1), transposition(3, 0)]
        );
        assert_eq!(layers[3].kind(), "spider");
    }

    #[test]
    fn disjoint_sentences_tensor() {
        let s1 = SentenceDiagram {
            nouns: vec![noun("Alice", 0, 0, 0)],
            body: DiagramElement::boxed("runs", vec![Wire::chain(0)]),
        };
        let s2 = SentenceDiagram {
            nouns: vec![noun("Bob", 1, 0, 1)],
            body: DiagramElement::boxed("sleeps", vec![Wire::chain(1)]),
        };
        let coref = CorefMap::new(vec![vec![Mention::new(0, 0)], vec![Mention::new(1, 0)]]);
        let t = compose_document(&[s1, s2], &coref).unwrap();
        assert_eq!(t.states.len(), 2);
        assert!(t.layers.iter().all(|l| l.kind() == "box"));
        assert_eq!(t.boundaries, vec![0, 1]);
    }

    #[test]
    fn reflexive_gets_one_spider_pair() {
        let s = SentenceDiagram {
            nouns: vec![noun("Alice", 0, 0, 0), noun("herself", 0, 2, 0)],
            body: DiagramElement::boxed("saw", vec![Wire::new(0, 0), Wire::new(0, 1)]),
        };
        let coref = CorefMap::new(vec![vec![Mention::new(0, 0), Mention::new(0, 2)]]);
        let t = compose_document(&[s], &coref).unwrap();
        let kinds: Vec<_> = t.layers.iter().map(|l| l.kind()).collect();
        assert_eq!(kinds, ["spider", "box", "spider"]);
        assert_eq!(t.output_wires(), vec![Wire::chain(0)]);
    }

    #[test]
    fn late_states_widen_earlier_permutations() {
        let s = |i: usize, a: usize, b: usize| SentenceDiagram {
            nouns: vec![noun("x", i, 0, a), noun("y", i, 2, b)],
            body: DiagramElement::boxed("v", vec![Wire::chain(a), Wire::chain(b)]),
        };
        let coref = CorefMap::new(vec![
            vec![Mention::new(0, 0), Mention::new(1, 0), Mention::new(2, 0)],
            vec![Mention::new(0, 2)],
            vec![Mention::new(1, 2)],
            vec![Mention::new(2, 2)],
        ]);
        let t = compose_document(&[s(0, 0, 1), s(1, 0, 2), s(2, 0, 3)], &coref).unwrap();
        assert_eq!(t.states.len(), 4);
        let trace = t.wire_trace().unwrap();
        assert!(trace.iter().all(|w| w.len() == 4));
        assert_eq!(t.output_wires(), (0..4).map(Wire::chain).collect::<Vec<_>>());
    }

    #[test]
    fn unknown_chain_is_a_mismatch() {
        let s = SentenceDiagram {
            nouns: vec![noun("Alice", 0, 0, 3)],
            body: DiagramElement::Identity {
                wires: vec![Wire::chain(3)],
            },
        };
        let err = compose_document(&[s], &CorefMap::default()).unwrap_err();
        assert!(matches!(err, Error::ChainMismatch { sentence: 0, token: 0 }));
    }
}
