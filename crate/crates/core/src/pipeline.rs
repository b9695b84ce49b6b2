//! End-to-end text to circuit pipeline.

use std::collections::BTreeSet;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::ansatz::{append_merge_box, compile, AnsatzConfig};
use crate::circuit::Circuit;
use crate::compose::compose_document;
use crate::diagram::{SentenceDiagram, TextDiagram};
use crate::error::{Error, Result};
use crate::frames::{min_frequency_filter, sentence_diagram, FrameContext};
use crate::ingest::{lexicon_parse, resolve_pronouns, Document, Lexicon, Mention};
use crate::pregroup::PregroupType;
use crate::rewrite::{coordinate_document, rewrite_all, RewriteRule};
use crate::sandwich::{expand_frames, SandwichConfig};
use crate::tree::{build_trees, TreeBuildReport};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub rules: Vec<RewriteRule>,
    pub min_noun_frequency: Option<usize>,
    /// Lowercased words whose mentions are dropped.
    pub remove_nouns: Vec<String>,
    pub coordinate: bool,
    pub sandwich: SandwichConfig,
    pub ansatz: AnsatzConfig,
    /// Close the circuit with a merge box so it has one output wire.
    pub merge: bool,
}

/// Tokens typed exactly `n` that the lexicon does not mark as non-nouns.
pub fn noun_mentions(doc: &Document, lex: Option<&Lexicon>) -> Vec<Mention> {
    let n = PregroupType::n();
    let mut out = Vec::new();
    for (s, d) in doc.sentences.iter().enumerate() {
        for (t, tok) in d.tokens.iter().enumerate() {
            let tagged = lex.and_then(|l| l.noun_tag(&tok.word)).unwrap_or(true);
            if tok.ctype == n && tagged {
                out.push(Mention::new(s, t));
            }
        }
    }
    out
}

/// Parses pre-split sentences and resolves pronouns.
pub fn parse_sentences<S: AsRef<str>>(sentences: &[Vec<S>], lex: &Lexicon) -> Result<Document> {
    let diagrams = sentences
        .iter()
        .map(|s| lexicon_parse(s, lex))
        .collect::<Result<Vec<_>>>()?;
    let res = resolve_pronouns(&diagrams, lex);
    for w in &res.warnings {
        warn!("unresolved pronoun {:?} at {:?}", w.word, w.mention);
    }
    Ok(Document::new(diagrams, res.corefs))
}

/// Splits plain text into sentences on `.`, `!`, `?` and into tokens on
/// whitespace. Commas become their own tokens.
pub fn split_text(text: &str) -> Vec<Vec<String>> {
    text.split(['.', '!', '?'])
        .map(|s| {
            s.replace(',', " , ")
                .split_whitespace()
                .map(str::to_string)
                .collect::<Vec<_>>()
        })
        .filter(|s| !s.is_empty())
        .collect()
}

/// Completes chains with noun singletons and optionally splits coordinations.
pub fn prepare(doc: &Document, lex: Option<&Lexicon>, cfg: &PipelineConfig) -> Document {
    let mut d = doc.clone();
    d.corefs.complete(noun_mentions(&d, lex));
    if cfg.coordinate {
        d = coordinate_document(&d);
    }
    d
}

/// Trees per sentence after rewriting.
pub fn sentence_trees(doc: &Document, rules: &[RewriteRule]) -> Result<Vec<TreeBuildReport>> {
    doc.sentences
        .iter()
        .map(|s| {
            let mut r = build_trees(s)?;
            for t in &mut r.forest {
                *t = rewrite_all(t, rules).tree;
            }
            Ok(r)
        })
        .collect()
}

fn removed_mentions(doc: &Document, cfg: &PipelineConfig) -> BTreeSet<Mention> {
    let mut out = cfg
        .min_noun_frequency
        .map(|k| min_frequency_filter(&doc.corefs, k))
        .unwrap_or_default();
    if !cfg.remove_nouns.is_empty() {
        for chain in &doc.corefs.chains {
            let hit = chain.iter().any(|m| {
                doc.token(*m)
                    .is_some_and(|t| cfg.remove_nouns.contains(&t.word.to_lowercase()))
            });
            if hit {
                out.extend(chain.iter().copied());
            }
        }
    }
    out
}

/// A prepared document with its rewritten trees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeArtifact {
    pub document: Document,
    pub trees: Vec<TreeBuildReport>,
}

pub fn tree_artifact(doc: &Document, lex: Option<&Lexicon>, cfg: &PipelineConfig) -> Result<TreeArtifact> {
    let document = prepare(doc, lex, cfg);
    let trees = sentence_trees(&document, &cfg.rules)?;
    Ok(TreeArtifact { document, trees })
}

/// Sentence diagrams of a prepared document. Sentences left without nouns
/// are skipped.
pub fn sentence_diagrams(doc: &Document, cfg: &PipelineConfig) -> Result<Vec<SentenceDiagram>> {
    let trees = sentence_trees(doc, &cfg.rules)?;
    diagrams_from_trees(doc, &trees, cfg)
}

pub fn diagrams_from_trees(
    doc: &Document,
    trees: &[TreeBuildReport],
    cfg: &PipelineConfig,
) -> Result<Vec<SentenceDiagram>> {
    let removed = removed_mentions(doc, cfg);
    let mut out = Vec::new();
    for (i, r) in trees.iter().enumerate() {
        let ctx = FrameContext::from_corefs(i, &doc.corefs);
        let remove: BTreeSet<usize> = removed.iter().filter(|m| m.sentence == i).map(|m| m.token).collect();
        match sentence_diagram(&r.forest, &remove, &ctx) {
            Ok(s) => out.push(s),
            Err(Error::EmptySentence { sentence }) => warn!("sentence {sentence} has no nouns left; skipped"),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Composed text diagram with frames left in place.
pub fn text_diagram(doc: &Document, lex: Option<&Lexicon>, cfg: &PipelineConfig) -> Result<TextDiagram> {
    diagram_from_trees(&tree_artifact(doc, lex, cfg)?, cfg)
}

pub fn diagram_from_trees(t: &TreeArtifact, cfg: &PipelineConfig) -> Result<TextDiagram> {
    let sentences = diagrams_from_trees(&t.document, &t.trees, cfg)?;
    let text = compose_document(&sentences, &t.document.corefs)?;
    info!(
        "{} sentences, {} chains, {} frames",
        t.document.sentences.len(),
        text.states.len(),
        text.frame_count()
    );
    Ok(text)
}

pub fn expanded_diagram(doc: &Document, lex: Option<&Lexicon>, cfg: &PipelineConfig) -> Result<TextDiagram> {
    expand_frames(&text_diagram(doc, lex, cfg)?, &cfg.sandwich)
}

pub fn circuit_from_diagram(text: &TextDiagram, cfg: &PipelineConfig) -> Result<Circuit> {
    let flat = if text.frame_count() > 0 {
        expand_frames(text, &cfg.sandwich)?
    } else {
        text.clone()
    };
    let flat = if cfg.merge { append_merge_box(&flat) } else { flat };
    compile(&flat, &cfg.ansatz)
}

pub fn document_circuit(doc: &Document, lex: Option<&Lexicon>, cfg: &PipelineConfig) -> Result<Circuit> {
    circuit_from_diagram(&text_diagram(doc, lex, cfg)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::builtin_rules;

    fn doc(text: &str) -> Document {
        parse_sentences(&split_text(text), &Lexicon::builtin()).unwrap()
    }

    #[test]
    fn splitting() {
        assert_eq!(
            split_text("Alice reads books. She, too!"),
            vec![vec!["Alice", "reads", "books"], vec!["She", ",", "too"]]
        );
    }

    #[test]
    fn alice_reads_books_circuit() {
        let d = doc("Alice reads books.");
        let cfg = PipelineConfig::default();
        let t = text_diagram(&d, None, &cfg).unwrap();
        assert_eq!(t.states.len(), 2);
        let c = document_circuit(&d, None, &cfg).unwrap();
        assert_eq!(c.n_qubits, 2);
        assert_eq!(c.outputs.len(), 2);
        let merged = document_circuit(
            &d,
            None,
            &PipelineConfig {
                merge: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(merged.outputs.len(), 1);
    }

    #[test]
    fn pronouns_share_a_wire() {
        let d = doc("Alice found a map. She followed the clues.");
        let cfg = PipelineConfig {
            rules: builtin_rules(),
            ..Default::default()
        };
        let t = text_diagram(&d, Some(&Lexicon::builtin()), &cfg).unwrap();
        let words: Vec<&str> = t.states.iter().map(|s| s.word.as_str()).collect();
        assert_eq!(words, ["Alice", "map", "clues"]);
        t.wire_trace().unwrap();
    }

    #[test]
    fn tree_artifact_round_trips() {
        let d = doc("Alice found a map. She followed the clues.");
        let cfg = PipelineConfig::default();
        let t = tree_artifact(&d, None, &cfg).unwrap();
        let back: TreeArtifact = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
        assert_eq!(diagram_from_trees(&back, &cfg).unwrap(), text_diagram(&d, None, &cfg).unwrap());
    }

    #[test]
    fn removing_a_noun_drops_its_state() {
        let d = doc("Alice found a map.");
        let cfg = PipelineConfig {
            remove_nouns: vec!["map".into()],
            ..Default::default()
        };
        let t = text_diagram(&d, None, &cfg).unwrap();
        assert_eq!(t.states.len(), 1);
    }
}
