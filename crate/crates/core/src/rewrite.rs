//! Tree rewrites and the coordination split.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{reductions, CorefMap, Document, Mention};
use crate::pregroup::{Base, PregroupDiagram, PregroupType, SimpleType};
use crate::tree::{compound_type, PregroupTreeNode};

/// Matches every word.
pub const WILDCARD: &str = "*";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WordMerger {
    /// `"node child"`.
    Merge,
    First,
    Last,
}

impl WordMerger {
    fn apply(self, node: &str, child: &str) -> String {
        match self {
            WordMerger::Merge => format!("{node} {child}"),
            WordMerger::First => node.to_string(),
            WordMerger::Last => child.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteRule {
    pub name: String,
    pub match_words: Vec<String>,
    pub match_types: Vec<PregroupType>,
    pub word_merger: WordMerger,
    #[serde(default = "unbounded")]
    pub max_depth: usize,
}

fn unbounded() -> usize {
    usize::MAX
}

impl RewriteRule {
    fn word_matches(&self, word: &str) -> bool {
        let lower = word.to_lowercase();
        self.match_words
            .iter()
            .any(|w| w == WILDCARD || *w == lower || w == word)
    }

    fn type_matches(&self, node: &PregroupTreeNode) -> bool {
        self.match_types.contains(&node.out_type) || self.match_types.contains(&compound_type(node))
    }

    pub fn validate(&self) -> Result<()> {
        if self.match_types.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "rule {:?} has no match types",
                self.name
            )));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidConfig(format!(
                "rule {:?} needs max_depth >= 1",
                self.name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteReport {
    pub tree: PregroupTreeNode,
    pub merges: usize,
}

fn words(ws: &[&str]) -> Vec<String> {
    ws.iter().map(|w| w.to_string()).collect()
}

fn nr_s() -> PregroupType {
    PregroupType(vec![SimpleType::new(Base::N, 1), SimpleType::s()])
}

pub fn determiner_rule() -> RewriteRule {
    RewriteRule {
        name: "determiner".into(),
        match_words: words(&["a", "an", "the"]),
        match_types: vec![PregroupType::n()],
        word_merger: WordMerger::Last,
        max_depth: unbounded(),
    }
}

pub fn auxiliary_rule() -> RewriteRule {
    RewriteRule {
        name: "auxiliary".into(),
        match_words: words(&[
            "has", "have", "had", "does", "do", "did", "is", "are", "was", "were", "will",
        ]),
        match_types: vec![PregroupType::s(), nr_s()],
        word_merger: WordMerger::Last,
        max_depth: unbounded(),
    }
}

pub fn noun_modification(max_depth: usize) -> RewriteRule {
    RewriteRule {
        name: "noun_modification".into(),
        match_words: words(&[WILDCARD]),
        match_types: vec![PregroupType::n()],
        word_merger: WordMerger::Merge,
        max_depth,
    }
}

pub fn builtin_rules() -> Vec<RewriteRule> {
    vec![determiner_rule(), auxiliary_rule(), noun_modification(2)]
}

pub fn builtin_rule(name: &str) -> Option<RewriteRule> {
    match name {
        "determiner" | "determiner_rule" => Some(determiner_rule()),
        "auxiliary" | "auxiliary_rule" => Some(auxiliary_rule()),
        "noun_modification" => Some(noun_modification(2)),
        _ => None,
    }
}

/// Resolves a comma-separated list of builtin names and rule file paths.
/// A rule file holds one rule object or an array of them.
pub fn load_rules(spec: &str) -> Result<Vec<RewriteRule>> {
    let mut rules = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if item == "builtin" {
            rules.extend(builtin_rules());
            continue;
        }
        if let Some(rule) = builtin_rule(item) {
            rules.push(rule);
            continue;
        }
        if !Path::new(item).exists() {
            return Err(Error::InvalidConfig(format!(
                "{item:?} is neither a builtin rule nor a readable file"
            )));
        }
        let text = fs::read_to_string(item)?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
            Error::format(format!("{item} line {} column {}", e.line(), e.column()), e.to_string())
        })?;
        let parsed: Vec<RewriteRule> = if value.is_array() {
            serde_json::from_value(value)
        } else {
            serde_json::from_value(value).map(|r| vec![r])
        }
        .map_err(|e| Error::format(item, e.to_string()))?;
        for r in &parsed {
            r.validate()?;
        }
        rules.extend(parsed);
    }
    Ok(rules)
}

/// Post-order branch contraction. A node merges into its only child when both
/// share an output type, the node's word and type match the rule, and the
/// chain of merges ending at the child is shorter than `max_depth`.
pub fn rewrite_tree(root: &PregroupTreeNode, rule: &RewriteRule) -> RewriteReport {
    fn go(node: &PregroupTreeNode, rule: &RewriteRule, total: &mut usize) -> (PregroupTreeNode, usize) {
        let mut chains = Vec::with_capacity(node.children.len());
        let mut children = Vec::with_capacity(node.children.len());
        for c in &node.children {
            let (c, depth) = go(c, rule, total);
            children.push(c);
            chains.push(depth);
        }
        let rebuilt = PregroupTreeNode {
            children,
            ..node.clone()
        };
        if rebuilt.children.len() == 1
            && rebuilt.children[0].out_type == rebuilt.out_type
            && rule.type_matches(&rebuilt)
            && rule.word_matches(&rebuilt.word)
            && chains[0] < rule.max_depth
        {
            let child = rebuilt.children.into_iter().next().expect("one child");
            *total += 1;
            let merged = PregroupTreeNode {
                word: rule.word_merger.apply(&rebuilt.word, &child.word),
                ..child
            };
            return (merged, chains[0] + 1);
        }
        (rebuilt, 0)
    }
    let mut merges = 0;
    let (tree, _) = go(root, rule, &mut merges);
    RewriteReport { tree, merges }
}

/// Applies `rules` in order.
pub fn rewrite_all(root: &PregroupTreeNode, rules: &[RewriteRule]) -> RewriteReport {
    let mut report = RewriteReport {
        tree: root.clone(),
        merges: 0,
    };
    for rule in rules {
        let next = rewrite_tree(&report.tree, rule);
        report.tree = next.tree;
        report.merges += next.merges;
    }
    report
}

const CONJUNCTIONS: &[&str] = &["and", "or", "but"];

/// `Some(x)` when `t` has the shape `xʳ · x · xˡ`.
fn conjunction_factor(t: &PregroupType) -> Option<PregroupType> {
    if !t.len().is_multiple_of(3) || t.is_empty() {
        return None;
    }
    let k = t.len() / 3;
    let x = PregroupType(t.0[k..2 * k].to_vec());
    (x.r().concat(&x).concat(&x.l()) == *t).then_some(x)
}

fn sub_diagram(d: &PregroupDiagram, tokens: &[usize]) -> Result<PregroupDiagram> {
    let types: Vec<PregroupType> = tokens.iter().map(|&t| d.tokens[t].ctype.clone()).collect();
    let cups = reductions(&types).ok_or(Error::NotACoordination)?;
    Ok(PregroupDiagram::new(
        tokens.iter().map(|&t| d.tokens[t].clone()).collect(),
        cups,
    ))
}

/// Splits a shared-subject binary coordination into one sentence per
/// conjunct. `sentence` is the index of `d` inside the document described by
/// `coref`; the returned chains are re-indexed for the document in which `d`
/// is replaced by the returned sentences, with the subject copies co-chained.
pub fn coordination_rewrite(
    d: &PregroupDiagram,
    sentence: usize,
    coref: &CorefMap,
) -> Result<(Vec<PregroupDiagram>, CorefMap)> {
    if d.tokens.iter().any(|t| t.word == ",") {
        return Err(Error::NotACoordination);
    }
    let conj: Vec<(usize, PregroupType)> = d
        .tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| CONJUNCTIONS.contains(&t.word.to_lowercase().as_str()))
        .filter_map(|(i, t)| conjunction_factor(&t.ctype).map(|x| (i, x)))
        .collect();
    let [(c, x)] = conj.as_slice() else {
        return Err(Error::NotACoordination);
    };
    let (c, k) = (*c, x.len());
    let ranges = d.token_ranges();
    let owners = d.wire_owners();
    let partners = d.partners();
    let middle = ranges[c].start + k..ranges[c].start + 2 * k;
    let subject_end = middle
        .filter_map(|w| partners[w])
        .filter(|&p| owners[p] < c)
        .map(|p| owners[p] + 1)
        .max()
        .unwrap_or(0);
    if subject_end >= c || c + 1 >= d.tokens.len() {
        return Err(Error::NotACoordination);
    }
    let subject: Vec<usize> = (0..subject_end).collect();
    let left: Vec<usize> = subject.iter().copied().chain(subject_end..c).collect();
    let right: Vec<usize> = subject
        .iter()
        .copied()
        .chain(c + 1..d.tokens.len())
        .collect();
    let first = sub_diagram(d, &left)?;
    let second = sub_diagram(d, &right)?;

    let remap = |m: Mention| -> Vec<Mention> {
        if m.sentence < sentence {
            return vec![m];
        }
        if m.sentence > sentence {
            return vec![Mention::new(m.sentence + 1, m.token)];
        }
        let t = m.token;
        if t < subject_end {
            vec![Mention::new(sentence, t), Mention::new(sentence + 1, t)]
        } else if t < c {
            vec![Mention::new(sentence, t)]
        } else if t == c {
            vec![]
        } else {
            vec![Mention::new(sentence + 1, t - c - 1 + subject_end)]
        }
    };
    let mut chains: Vec<Vec<Mention>> = coref
        .chains
        .iter()
        .map(|ch| ch.iter().flat_map(|&m| remap(m)).collect())
        .collect();
    let covered: BTreeMap<Mention, ()> = coref.chains.iter().flatten().map(|m| (*m, ())).collect();
    for &t in &subject {
        if d.tokens[t].ctype == PregroupType::n() && !covered.contains_key(&Mention::new(sentence, t)) {
            chains.push(vec![Mention::new(sentence, t), Mention::new(sentence + 1, t)]);
        }
    }
    let mut out = CorefMap::new(chains);
    out.normalize();
    Ok((vec![first, second], out))
}

/// Applies [`coordination_rewrite`] to every sentence it fits.
pub fn coordinate_document(doc: &Document) -> Document {
    let mut out = doc.clone();
    for i in (0..doc.sentences.len()).rev() {
        if let Ok((parts, corefs)) = coordination_rewrite(&out.sentences[i], i, &out.corefs) {
            out.sentences.splice(i..=i, parts);
            out.corefs = corefs;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{lexicon_parse, Lexicon};
    use crate::pregroup::{reduce, validate_diagram};
    use crate::tree::build_trees;

    fn tree(words: &[&str]) -> PregroupTreeNode {
        let d = lexicon_parse(words, &Lexicon::builtin()).unwrap();
        build_trees(&d).unwrap().forest.remove(0)
    }

    fn words_of(t: &PregroupTreeNode) -> Vec<String> {
        t.iter().map(|n| n.word.clone()).collect()
    }

    #[test]
    fn determiner_is_absorbed() {
        let t = tree(&["Alice", "bought", "a", "bike"]);
        let r = rewrite_tree(&t, &determiner_rule());
        assert_eq!(r.merges, 1);
        let bike = r.tree.find(3).unwrap();
        assert_eq!(bike.word, "bike");
        assert!(!words_of(&r.tree).contains(&"a".to_string()));
    }

    #[test]
    fn empty_word_set_changes_nothing() {
        let t = tree(&["Alice", "bought", "a", "bike"]);
        let rule = RewriteRule {
            match_words: vec![],
            ..determiner_rule()
        };
        let r = rewrite_tree(&t, &rule);
        assert_eq!(r.merges, 0);
        assert_eq!(r.tree, t);
    }

    #[test]
    fn adjective_chain_merges_up_to_depth() {
        let t = tree(&["Alice", "bought", "beautiful", "blue", "bike"]);
        let r = rewrite_tree(&t, &noun_modification(2));
        assert_eq!(r.merges, 2);
        assert_eq!(r.tree.find(4).unwrap().word, "beautiful blue bike");
        let r1 = rewrite_tree(&t, &noun_modification(1));
        assert_eq!(r1.merges, 1);
        assert_eq!(r1.tree.find(2).unwrap().word, "beautiful");
        assert_eq!(r1.tree.find(4).unwrap().word, "blue bike");
    }

    #[test]
    fn auxiliary_over_verb_phrase() {
        let vp = PregroupTreeNode {
            children: vec![PregroupTreeNode::leaf("piano", 3, PregroupType::n())],
            ..PregroupTreeNode::leaf("play", 2, nr_s())
        };
        let aux = PregroupTreeNode {
            children: vec![vp],
            ..PregroupTreeNode::leaf("does", 1, nr_s())
        };
        let r = rewrite_tree(&aux, &auxiliary_rule());
        assert_eq!(r.merges, 1);
        assert_eq!((r.tree.word.as_str(), r.tree.token_index), ("play", 2));
    }

    #[test]
    fn builtin_word_lists() {
        assert!(determiner_rule().match_words.contains(&"the".to_string()));
        let aux = auxiliary_rule().match_words;
        assert!(aux.contains(&"has".to_string()) && aux.contains(&"does".to_string()));
        assert_eq!(builtin_rules().len(), 3);
    }

    #[test]
    fn rule_files_and_names() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        fs::write(
            &path,
            r#"{"name":"drop_very","match_words":["very"],"match_types":[[["n",0]]],"word_merger":"last","max_depth":1}"#,
        )
        .unwrap();
        let rules = load_rules(&format!("determiner, {}", path.display())).unwrap();
        assert_eq!(rules.len(), 2);
        assert_eq!(rules[1].name, "drop_very");
        assert!(load_rules("nonsense").is_err());
    }

    fn coordination() -> PregroupDiagram {
        lexicon_parse(
            &["Alice", "loves", "music", "and", "plays", "piano"],
            &Lexicon::builtin(),
        )
        .unwrap()
    }

    #[test]
    fn coordination_splits_and_cochains_subject() {
        let d = coordination();
        let coref = CorefMap::new(vec![
            vec![Mention::new(0, 0)],
            vec![Mention::new(0, 2)],
            vec![Mention::new(0, 5)],
        ]);
        let (parts, c) = coordination_rewrite(&d, 0, &coref).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].words(), ["Alice", "loves", "music"]);
        assert_eq!(parts[1].words(), ["Alice", "plays", "piano"]);
        for p in &parts {
            assert!(validate_diagram(p).is_valid());
            assert_eq!(reduce(p).unwrap(), PregroupType::s());
        }
        assert_eq!(
            c.chains,
            vec![
                vec![Mention::new(0, 0), Mention::new(1, 0)],
                vec![Mention::new(0, 2)],
                vec![Mention::new(1, 2)],
            ]
        );
    }

    #[test]
    fn no_conjunction_is_not_a_coordination() {
        let d = lexicon_parse(&["Alice", "reads", "books"], &Lexicon::builtin()).unwrap();
        assert!(matches!(
            coordination_rewrite(&d, 0, &CorefMap::default()),
            Err(Error::NotACoordination)
        ));
    }

    #[test]
    fn document_level_split_shifts_later_sentences() {
        let lex = Lexicon::builtin();
        let d2 = lexicon_parse(&["She", "reads", "books"], &lex).unwrap();
        let doc = Document::new(
            vec![coordination(), d2],
            CorefMap::new(vec![vec![Mention::new(0, 0), Mention::new(1, 0)]]),
        );
        let out = coordinate_document(&doc);
        assert_eq!(out.sentences.len(), 3);
        assert_eq!(
            out.corefs.chains[0],
            vec![Mention::new(0, 0), Mention::new(1, 0), Mention::new(2, 0)]
        );
    }
}
