//! Lexicon-driven pregroup parsing.
//!
//! For every combination of lexicon types (first token varying slowest) we
//! look for a planar matching of contractible wires that leaves exactly one
//! free `s` wire, not enclosed by any cup. Within one type assignment the
//! leftmost unmatched wire tries partners in order of increasing span, so the
//! first solution found is the one with the shortest cups.

use crate::error::{Error, Result};
use crate::pregroup::{can_contract, Cup, PregroupDiagram, PregroupType, SimpleType, Token};

use super::Lexicon;

/// The exhaustive search is exponential in sentence length.
pub const MAX_PARSER_TOKENS: usize = 12;

/// Upper bound on solutions collected by the all-parses enumeration.
const MAX_ALL_PARSES: usize = 4096;

struct Search<'a> {
    wires: &'a [SimpleType],
    owners: &'a [usize],
    memo: Vec<Option<bool>>,
}

impl<'a> Search<'a> {
    fn new(wires: &'a [SimpleType], owners: &'a [usize]) -> Self {
        let m = wires.len() + 1;
        Search {
            wires,
            owners,
            memo: vec![None; m * m],
        }
    }

    fn pairable(&self, i: usize, k: usize) -> bool {
        self.owners[i] != self.owners[k] && can_contract(self.wires[i], self.wires[k])
    }

    /// Whether `[i, j)` admits a perfect planar matching.
    fn perfect(&mut self, i: usize, j: usize) -> bool {
        if i == j {
            return true;
        }
        if (j - i) % 2 == 1 {
            return false;
        }
        let key = i * (self.wires.len() + 1) + j;
        if let Some(v) = self.memo[key] {
            return v;
        }
        let mut ok = false;
        let mut k = i + 1;
        while k < j {
            if self.pairable(i, k) && self.perfect(i + 1, k) && self.perfect(k + 1, j) {
                ok = true;
                break;
            }
            k += 2;
        }
        self.memo[key] = Some(ok);
        ok
    }

    fn build_perfect(&mut self, i: usize, j: usize, out: &mut Vec<Cup>) {
        if i == j {
            return;
        }
        let mut k = i + 1;
        while k < j {
            if self.pairable(i, k) && self.perfect(i + 1, k) && self.perfect(k + 1, j) {
                out.push(Cup(i, k));
                self.build_perfect(i + 1, k, out);
                self.build_perfect(k + 1, j, out);
                return;
            }
            k += 2;
        }
        unreachable!("build_perfect called on an unmatchable interval");
    }

    /// Top level of `[i, end)`: all wires matched except one free `s`.
    fn top(&mut self, i: usize, free_used: bool, out: &mut Vec<Cup>) -> bool {
        let end = self.wires.len();
        if i == end {
            return free_used;
        }
        let mut k = i + 1;
        while k < end {
            if self.pairable(i, k) && self.perfect(i + 1, k) {
                let mark = out.len();
                out.push(Cup(i, k));
                self.build_perfect(i + 1, k, out);
                if self.top(k + 1, free_used, out) {
                    return true;
                }
                out.truncate(mark);
            }
            k += 2;
        }
        if !free_used && self.wires[i] == SimpleType::s() {
            return self.perfect(i + 1, end) && {
                self.build_perfect(i + 1, end, out);
                true
            };
        }
        false
    }

    fn all_perfect(&mut self, i: usize, j: usize) -> Vec<Vec<Cup>> {
        if i == j {
            return vec![Vec::new()];
        }
        let mut found = Vec::new();
        let mut k = i + 1;
        while k < j {
            if self.pairable(i, k) && self.perfect(i + 1, k) && self.perfect(k + 1, j) {
                let inner = self.all_perfect(i + 1, k);
                let rest = self.all_perfect(k + 1, j);
                for a in &inner {
                    for b in &rest {
                        let mut v = vec![Cup(i, k)];
                        v.extend_from_slice(a);
                        v.extend_from_slice(b);
                        found.push(v);
                        if found.len() >= MAX_ALL_PARSES {
                            return found;
                        }
                    }
                }
            }
            k += 2;
        }
        found
    }

    fn all_top(&mut self, i: usize, free_used: bool) -> Vec<Vec<Cup>> {
        let end = self.wires.len();
        if i == end {
            return if free_used { vec![Vec::new()] } else { Vec::new() };
        }
        let mut found = Vec::new();
        let mut k = i + 1;
        while k < end {
            if self.pairable(i, k) && self.perfect(i + 1, k) {
                let rest = self.all_top(k + 1, free_used);
                if !rest.is_empty() {
                    for inner in self.all_perfect(i + 1, k) {
                        for r in &rest {
                            let mut v = vec![Cup(i, k)];
                            v.extend_from_slice(&inner);
                            v.extend_from_slice(r);
                            found.push(v);
                        }
                    }
                }
            }
            k += 2;
        }
        if !free_used && self.wires[i] == SimpleType::s() && self.perfect(i + 1, end) {
            found.extend(self.all_perfect(i + 1, end));
        }
        found.truncate(MAX_ALL_PARSES);
        found
    }
}

fn layout(types: &[PregroupType]) -> (Vec<SimpleType>, Vec<usize>) {
    let mut wires = Vec::new();
    let mut owners = Vec::new();
    for (i, t) in types.iter().enumerate() {
        wires.extend(t.iter().copied());
        owners.extend(std::iter::repeat_n(i, t.len()));
    }
    (wires, owners)
}

/// First planar reduction of `types` to a single `s`, if any.
pub fn reductions(types: &[PregroupType]) -> Option<Vec<Cup>> {
    let (wires, owners) = layout(types);
    let mut search = Search::new(&wires, &owners);
    let mut cups = Vec::new();
    search.top(0, false, &mut cups).then(|| {
        cups.sort();
        cups
    })
}

fn all_reductions(types: &[PregroupType]) -> Vec<Vec<Cup>> {
    let (wires, owners) = layout(types);
    let mut search = Search::new(&wires, &owners);
    let mut all = search.all_top(0, false);
    for cups in &mut all {
        cups.sort();
    }
    all
}

fn candidates<'l, S: AsRef<str>>(tokens: &[S], lex: &'l Lexicon) -> Result<Vec<&'l [PregroupType]>> {
    if tokens.len() > MAX_PARSER_TOKENS {
        return Err(Error::SentenceTooLong {
            len: tokens.len(),
            max: MAX_PARSER_TOKENS,
        });
    }
    tokens
        .iter()
        .map(|w| {
            lex.types(w.as_ref()).ok_or_else(|| Error::UnknownWord {
                word: w.as_ref().to_string(),
            })
        })
        .collect()
}

/// Odometer over per-token type choices, last token fastest.
fn assignments<'c, 'l>(cands: &'c [&'l [PregroupType]]) -> impl Iterator<Item = Vec<&'l PregroupType>> + 'c {
    let mut idx = vec![0usize; cands.len()];
    let mut done = cands.iter().any(|c| c.is_empty());
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let current = idx.iter().zip(cands).map(|(&i, c)| &c[i]).collect();
        done = true;
        for pos in (0..idx.len()).rev() {
            idx[pos] += 1;
            if idx[pos] < cands[pos].len() {
                done = false;
                break;
            }
            idx[pos] = 0;
        }
        Some(current)
    })
}

fn diagram<S: AsRef<str>>(tokens: &[S], types: &[&PregroupType], cups: Vec<Cup>) -> PregroupDiagram {
    PregroupDiagram::new(
        tokens
            .iter()
            .zip(types)
            .map(|(w, t)| Token::new(w.as_ref(), (*t).clone()))
            .collect(),
        cups,
    )
}

pub fn lexicon_parse<S: AsRef<str>>(tokens: &[S], lex: &Lexicon) -> Result<PregroupDiagram> {
    let cands = candidates(tokens, lex)?;
    for types in assignments(&cands) {
        let owned: Vec<PregroupType> = types.iter().map(|t| (*t).clone()).collect();
        if let Some(cups) = reductions(&owned) {
            return Ok(diagram(tokens, &types, cups));
        }
    }
    Err(Error::NoParse {
        sentence: tokens.iter().map(|w| w.as_ref().to_string()).collect(),
    })
}

/// Every parse, in the order [`lexicon_parse`] would consider them.
pub fn lexicon_parse_all<S: AsRef<str>>(tokens: &[S], lex: &Lexicon) -> Result<Vec<PregroupDiagram>> {
    let cands = candidates(tokens, lex)?;
    let mut out = Vec::new();
    for types in assignments(&cands) {
        let owned: Vec<PregroupType> = types.iter().map(|t| (*t).clone()).collect();
        for cups in all_reductions(&owned) {
            out.push(diagram(tokens, &types, cups));
            if out.len() >= MAX_ALL_PARSES {
                return Ok(out);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::NoParse {
            sentence: tokens.iter().map(|w| w.as_ref().to_string()).collect(),
        });
    }
    Ok(out)
}
