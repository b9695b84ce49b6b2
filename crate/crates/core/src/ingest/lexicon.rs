use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pregroup::PregroupType;

const BUILTIN: &str = include_str!("../../lexicon/default.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Fem,
    Masc,
    Neut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Number {
    Sg,
    Pl,
}

/// Agreement features. A missing feature agrees with anything.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Features {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<Gender>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub number: Option<Number>,
}

impl Features {
    pub fn agrees(&self, other: &Features) -> bool {
        fn ok<T: PartialEq>(a: Option<T>, b: Option<T>) -> bool {
            match (a, b) {
                (Some(a), Some(b)) => a == b,
                _ => true,
            }
        }
        ok(self.gender, other.gender) && ok(self.number, other.number)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub types: Vec<PregroupType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Features>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_noun: Option<bool>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub pronoun: bool,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Types(Vec<PregroupType>),
    Full(LexiconEntry),
}

/// Word to type assignments, agreement features, and noun tags.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, LexiconEntry>,
}

impl Lexicon {
    pub fn builtin() -> Self {
        Lexicon::from_json(BUILTIN).expect("builtin lexicon is well formed")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Lexicon::from_json(&fs::read_to_string(path)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, RawEntry> = serde_json::from_str(text).map_err(|e| {
            Error::format(format!("line {} column {}", e.line(), e.column()), e.to_string())
        })?;
        let mut lex = Lexicon::default();
        for (word, entry) in raw {
            let entry = match entry {
                RawEntry::Types(types) => LexiconEntry {
                    types,
                    ..Default::default()
                },
                RawEntry::Full(e) => e,
            };
            if entry.types.is_empty() || entry.types.iter().any(|t| t.is_empty()) {
                return Err(Error::format(word, "lexicon entries need at least one non-empty type"));
            }
            lex.entries.insert(word, entry);
        }
        Ok(lex)
    }

    pub fn insert(&mut self, word: impl Into<String>, entry: LexiconEntry) {
        self.entries.insert(word.into(), entry);
    }

    /// Exact match first, then the lowercased word.
    pub fn get(&self, word: &str) -> Option<&LexiconEntry> {
        self.entries
            .get(word)
            .or_else(|| self.entries.get(&word.to_lowercase()))
    }

    pub fn types(&self, word: &str) -> Option<&[PregroupType]> {
        self.get(word).map(|e| e.types.as_slice())
    }

    pub fn is_pronoun(&self, word: &str) -> bool {
        self.get(word).is_some_and(|e| e.pronoun)
    }

    /// `Some(tag)` when the lexicon says anything about noun-ness.
    pub fn noun_tag(&self, word: &str) -> Option<bool> {
        let e = self.get(word)?;
        e.is_noun.or(e.pronoun.then_some(true))
    }

    pub fn features(&self, word: &str) -> Features {
        self.get(word).and_then(|e| e.features).unwrap_or_default()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}
