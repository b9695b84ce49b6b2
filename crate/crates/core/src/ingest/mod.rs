//! Document ingestion.
//!
//! The interchange file is the primary path: a JSON document carrying one
//! pregroup derivation per sentence plus coreference chains. The lexicon
//! parser and the pronoun resolver exist so that plain token lists can be
//! turned into the same [`Document`] without external tools.

mod coref;
mod lexicon;
mod parser;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use coref::{resolve_pronouns, Resolution, UnresolvedPronoun};
pub use lexicon::{Features, Gender, Lexicon, LexiconEntry, Number};
pub use parser::{
    lexicon_parse, lexicon_parse_all, reductions, MAX_PARSER_TOKENS,
};

use crate::error::{Error, Result};
use crate::pregroup::{validate_diagram, Cup, PregroupDiagram, PregroupType, Token};

/// A token position inside a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct Mention {
    pub sentence: usize,
    pub token: usize,
}

impl Mention {
    pub fn new(sentence: usize, token: usize) -> Self {
        Mention { sentence, token }
    }
}

impl From<(usize, usize)> for Mention {
    fn from((sentence, token): (usize, usize)) -> Self {
        Mention { sentence, token }
    }
}

impl From<Mention> for (usize, usize) {
    fn from(m: Mention) -> Self {
        (m.sentence, m.token)
    }
}

/// Coreference chains. A chain's id is its index in `chains`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CorefMap {
    pub chains: Vec<Vec<Mention>>,
}

impl CorefMap {
    pub fn new(chains: Vec<Vec<Mention>>) -> Self {
        CorefMap { chains }
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    pub fn chain_of(&self, m: Mention) -> Option<usize> {
        self.chains.iter().position(|c| c.contains(&m))
    }

    /// Mention to chain id lookup table.
    pub fn index(&self) -> BTreeMap<Mention, usize> {
        self.chains
            .iter()
            .enumerate()
            .flat_map(|(id, c)| c.iter().map(move |m| (*m, id)))
            .collect()
    }

    pub fn mention_count(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    /// Sort mentions inside chains and chains by first mention.
    pub fn normalize(&mut self) {
        for c in &mut self.chains {
            c.sort();
            c.dedup();
        }
        self.chains.retain(|c| !c.is_empty());
        self.chains.sort_by_key(|c| c[0]);
    }

    /// Adds a singleton chain for every mention in `mentions` not yet covered,
    /// then normalizes.
    pub fn complete(&mut self, mentions: impl IntoIterator<Item = Mention>) {
        let covered: HashSet<Mention> = self.chains.iter().flatten().copied().collect();
        for m in mentions {
            if !covered.contains(&m) {
                self.chains.push(vec![m]);
            }
        }
        self.normalize();
    }

    pub(crate) fn check(&self, sentence_lengths: &[usize]) -> Result<()> {
        let mut seen = HashSet::new();
        for (ci, chain) in self.chains.iter().enumerate() {
            for (mi, m) in chain.iter().enumerate() {
                let loc = format!("corefs[{ci}][{mi}]");
                let Some(&len) = sentence_lengths.get(m.sentence) else {
                    return Err(Error::format(loc, "sentence index out of range"));
                };
                if m.token >= len {
                    return Err(Error::format(loc, "token index out of range"));
                }
                if !seen.insert(*m) {
                    return Err(Error::format(loc, "mention appears in more than one chain"));
                }
                if mi > 0 && chain[mi - 1] >= *m {
                    return Err(Error::format(loc, "mentions must be strictly increasing"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "RawDocument", try_from = "RawDocument")]
pub struct Document {
    pub sentences: Vec<PregroupDiagram>,
    pub corefs: CorefMap,
    pub source_text: Option<String>,
}

impl Document {
    pub fn new(sentences: Vec<PregroupDiagram>, corefs: CorefMap) -> Self {
        Document {
            sentences,
            corefs,
            source_text: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawDocument = serde_json::from_str(text).map_err(|e| {
            Error::format(format!("line {} column {}", e.line(), e.column()), e.to_string())
        })?;
        raw.into_document()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&RawDocument::from(self))
            .expect("documents always serialize");
        s.push('\n');
        s
    }

    pub fn token(&self, m: Mention) -> Option<&Token> {
        self.sentences.get(m.sentence)?.tokens.get(m.token)
    }
}

pub fn load_document(path: impl AsRef<Path>) -> Result<Document> {
    Document::from_json(&fs::read_to_string(path)?)
}

pub fn save_document(doc: &Document, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, doc.to_json())?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSentence {
    tokens: Vec<String>,
    types: Vec<PregroupType>,
    #[serde(default)]
    cups: Vec<Cup>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    sentences: Vec<RawSentence>,
    #[serde(default)]
    corefs: CorefMap,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
}

impl From<&Document> for RawDocument {
    fn from(doc: &Document) -> Self {
        RawDocument {
            sentences: doc
                .sentences
                .iter()
                .map(|d| RawSentence {
                    tokens: d.tokens.iter().map(|t| t.word.clone()).collect(),
                    types: d.tokens.iter().map(|t| t.ctype.clone()).collect(),
                    cups: d.cups.clone(),
                })
                .collect(),
            corefs: doc.corefs.clone(),
            text: doc.source_text.clone(),
        }
    }
}

impl From<Document> for RawDocument {
    fn from(doc: Document) -> Self {
        RawDocument::from(&doc)
    }
}

impl TryFrom<RawDocument> for Document {
    type Error = Error;

    fn try_from(raw: RawDocument) -> Result<Self> {
        raw.into_document()
    }
}

impl RawDocument {
    fn into_document(self) -> Result<Document> {
        let mut sentences = Vec::with_capacity(self.sentences.len());
        for (i, raw) in self.sentences.into_iter().enumerate() {
            if raw.tokens.len() != raw.types.len() {
                return Err(Error::format(
                    format!("sentences[{i}].types"),
                    format!("{} tokens but {} types", raw.tokens.len(), raw.types.len()),
                ));
            }
            let tokens = raw
                .tokens
                .into_iter()
                .zip(raw.types)
                .map(|(w, t)| Token::new(w, t))
                .collect();
            let d = PregroupDiagram::new(tokens, raw.cups);
            let report = validate_diagram(&d);
            if !report.is_valid() {
                return Err(Error::InvalidDiagram {
                    sentence: i,
                    report,
                });
            }
            sentences.push(d);
        }
        let lengths: Vec<usize> = sentences.iter().map(|d| d.tokens.len()).collect();
        self.corefs.check(&lengths)?;
        Ok(Document {
            sentences,
            corefs: self.corefs,
            source_text: self.text,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pregroup::Base;

    const FIG4: &str = r#"{
      "sentences": [ { "tokens": ["Alice","reads","books"],
                       "types":  [ [["n",0]], [["n",1],["s",0],["n",-1]], [["n",0]] ],
                       "cups":   [ [0,1], [3,4] ] } ],
      "corefs": [],
      "text": "Alice reads books"
    }"#;

    #[test]
    fn loads_fig4() {
        let doc = Document::from_json(FIG4).unwrap();
        assert_eq!(doc.sentences.len(), 1);
        assert!(doc.corefs.is_empty());
        assert_eq!(
            crate::pregroup::reduce(&doc.sentences[0]).unwrap(),
            PregroupType::s()
        );
        assert_eq!(doc.sentences[0].tokens[1].ctype.0[0].base, Base::N);
    }

    #[test]
    fn empty_document() {
        let doc = Document::from_json(r#"{"sentences": []}"#).unwrap();
        assert!(doc.sentences.is_empty());
        assert!(doc.corefs.is_empty());
    }

    #[test]
    fn syntax_errors_carry_line() {
        let err = Document::from_json("{\n \"sentences\": [ }").unwrap_err();
        match err {
            Error::Format { location, .. } => assert!(location.starts_with("line 2"), "{location}"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn mismatched_types_name_the_field() {
        let err = Document::from_json(
            r#"{"sentences": [{"tokens": ["a", "b"], "types": [[["n",0]]], "cups": []}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Format { ref location, .. } if location == "sentences[0].types"));
    }

    #[test]
    fn unknown_base_is_a_format_error() {
        let err = Document::from_json(
            r#"{"sentences": [{"tokens": ["a"], "types": [[["q",0]]], "cups": []}]}"#,
        )
        .unwrap_err();
        assert_eq!(err.kind(), "FormatError");
    }

    #[test]
    fn cup_faults_are_reported_per_sentence() {
        let err = Document::from_json(
            r#"{"sentences": [
                {"tokens": ["Alice"], "types": [[["n",0]]]},
                {"tokens": ["a", "b"], "types": [[["n",0]], [["n",0]]], "cups": [[0,1]]}
            ]}"#,
        )
        .unwrap_err();
        match err {
            Error::InvalidDiagram { sentence, report } => {
                assert_eq!(sentence, 1);
                assert_eq!(report.illegal_cups, vec![Cup(0, 1)]);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn coref_mentions_must_exist() {
        let err = Document::from_json(
            r#"{"sentences": [{"tokens": ["Alice"], "types": [[["n",0]]]}],
                "corefs": [[[0,0],[0,3]]]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Format { ref location, .. } if location == "corefs[0][1]"));
    }

    #[test]
    fn chains_must_be_disjoint() {
        let err = Document::from_json(
            r#"{"sentences": [{"tokens": ["Alice"], "types": [[["n",0]]]}],
                "corefs": [[[0,0]],[[0,0]]]}"#,
        )
        .unwrap_err();
        assert_eq!(err.kind(), "FormatError");
    }

    #[test]
    fn save_then_load_is_identity() {
        let doc = Document::from_json(FIG4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("doc.json");
        save_document(&doc, &path).unwrap();
        assert_eq!(load_document(&path).unwrap(), doc);
    }

    #[test]
    fn complete_adds_singletons_in_order() {
        let mut c = CorefMap::new(vec![vec![Mention::new(1, 0), Mention::new(2, 0)]]);
        c.complete([Mention::new(0, 2), Mention::new(1, 0), Mention::new(1, 3)]);
        assert_eq!(
            c.chains,
            vec![
                vec![Mention::new(0, 2)],
                vec![Mention::new(1, 0), Mention::new(2, 0)],
                vec![Mention::new(1, 3)],
            ]
        );
    }
}
