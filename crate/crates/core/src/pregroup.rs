//! Pregroup types and sentence diagrams.
//!
//! A simple type is a generator (`n`, `s`, or the text wire `t`) together with
//! an integer adjoint order: `-1` is the left adjoint, `+1` the right adjoint,
//! and larger magnitudes are iterated adjoints. A compound type is a sequence
//! of simple types, the empty sequence being the monoid unit.
//!
//! A [`PregroupDiagram`] lays out the tokens of a sentence with their compound
//! types and records the contractions (cups) between wires. Cups index wires
//! by their global offset in the concatenation of all token types, which turns
//! planarity into a single scan.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Base {
    #[serde(rename = "n")]
    N,
    #[serde(rename = "s")]
    S,
    /// Text wire produced by the merge box.
    #[serde(rename = "t")]
    T,
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Base::N => "n",
            Base::S => "s",
            Base::T => "t",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Left,
    Right,
}

/// A generator with an adjoint order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(Base, i32)", into = "(Base, i32)")]
pub struct SimpleType {
    pub base: Base,
    pub z: i32,
}

impl From<(Base, i32)> for SimpleType {
    fn from((base, z): (Base, i32)) -> Self {
        SimpleType { base, z }
    }
}

impl From<SimpleType> for (Base, i32) {
    fn from(t: SimpleType) -> Self {
        (t.base, t.z)
    }
}

impl SimpleType {
    pub const fn new(base: Base, z: i32) -> Self {
        SimpleType { base, z }
    }

    pub const fn n() -> Self {
        SimpleType::new(Base::N, 0)
    }

    pub const fn s() -> Self {
        SimpleType::new(Base::S, 0)
    }

    pub fn adjoint(self, direction: Direction) -> Self {
        match direction {
            Direction::Left => self.l(),
            Direction::Right => self.r(),
        }
    }

    pub fn l(self) -> Self {
        SimpleType::new(self.base, self.z - 1)
    }

    pub fn r(self) -> Self {
        SimpleType::new(self.base, self.z + 1)
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        let mark = if self.z < 0 { "ˡ" } else { "ʳ" };
        for _ in 0..self.z.unsigned_abs() {
            f.write_str(mark)?;
        }
        Ok(())
    }
}

pub fn adjoint(t: SimpleType, direction: Direction) -> SimpleType {
    t.adjoint(direction)
}

/// `a` immediately followed by `b` contracts to the unit: `x·xʳ` or `xˡ·x`.
pub fn can_contract(a: SimpleType, b: SimpleType) -> bool {
    a.base == b.base && b.z == a.z + 1
}

/// A compound type: an ordered product of simple types.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PregroupType(pub Vec<SimpleType>);

impl PregroupType {
    pub fn unit() -> Self {
        PregroupType(Vec::new())
    }

    pub fn n() -> Self {
        PregroupType(vec![SimpleType::n()])
    }

    pub fn s() -> Self {
        PregroupType(vec![SimpleType::s()])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SimpleType> {
        self.0.iter()
    }

    /// Right adjoint of a product: `(xy)ʳ = yʳxʳ`.
    pub fn r(&self) -> Self {
        PregroupType(self.0.iter().rev().map(|t| t.r()).collect())
    }

    /// Left adjoint of a product: `(xy)ˡ = yˡxˡ`.
    pub fn l(&self) -> Self {
        PregroupType(self.0.iter().rev().map(|t| t.l()).collect())
    }

    pub fn concat(mut self, other: &PregroupType) -> Self {
        self.0.extend_from_slice(&other.0);
        self
    }
}

impl From<Vec<SimpleType>> for PregroupType {
    fn from(v: Vec<SimpleType>) -> Self {
        PregroupType(v)
    }
}

impl FromIterator<SimpleType> for PregroupType {
    fn from_iter<I: IntoIterator<Item = SimpleType>>(iter: I) -> Self {
        PregroupType(iter.into_iter().collect())
    }
}

impl fmt::Display for PregroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("·")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub word: String,
    pub ctype: PregroupType,
}

impl Token {
    pub fn new(word: impl Into<String>, ctype: PregroupType) -> Self {
        Token {
            word: word.into(),
            ctype,
        }
    }
}

/// A wire contraction between global offsets `.0 < .1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cup(pub usize, pub usize);

impl Cup {
    pub fn new(a: usize, b: usize) -> Self {
        Cup(a.min(b), a.max(b))
    }

    pub fn left(self) -> usize {
        self.0
    }

    pub fn right(self) -> usize {
        self.1
    }

    /// `self` and `other` interleave as `i < k < j < l` (either way round).
    pub fn crosses(self, other: Cup) -> bool {
        let (a, b) = if self.0 < other.0 { (self, other) } else { (other, self) };
        a.0 < b.0 && b.0 < a.1 && a.1 < b.1
    }
}

impl fmt::Display for Cup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PregroupDiagram {
    pub tokens: Vec<Token>,
    pub cups: Vec<Cup>,
}

impl PregroupDiagram {
    pub fn new(tokens: Vec<Token>, cups: Vec<Cup>) -> Self {
        PregroupDiagram { tokens, cups }
    }

    pub fn wire_count(&self) -> usize {
        self.tokens.iter().map(|t| t.ctype.len()).sum()
    }

    /// Types of every wire, in global offset order.
    pub fn wires(&self) -> Vec<SimpleType> {
        self.tokens
            .iter()
            .flat_map(|t| t.ctype.iter().copied())
            .collect()
    }

    /// Global offset range occupied by each token.
    pub fn token_ranges(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.tokens
            .iter()
            .map(|t| {
                let r = start..start + t.ctype.len();
                start = r.end;
                r
            })
            .collect()
    }

    /// Owning token of every wire.
    pub fn wire_owners(&self) -> Vec<usize> {
        self.tokens
            .iter()
            .enumerate()
            .flat_map(|(i, t)| std::iter::repeat_n(i, t.ctype.len()))
            .collect()
    }

    /// Cup partner of every wire, `None` for free wires.
    pub fn partners(&self) -> Vec<Option<usize>> {
        let mut p = vec![None; self.wire_count()];
        for c in &self.cups {
            if c.1 < p.len() {
                p[c.0] = Some(c.1);
                p[c.1] = Some(c.0);
            }
        }
        p
    }

    pub fn free_offsets(&self) -> Vec<usize> {
        self.partners()
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.is_none().then_some(i))
            .collect()
    }

    pub fn words(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.word.as_str()).collect()
    }
}

/// A cup that cannot be interpreted at all: out-of-range, reversed, or reusing
/// an offset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MalformedCup {
    pub cup: Cup,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub malformed: Vec<MalformedCup>,
    pub illegal_cups: Vec<Cup>,
    pub crossings: Vec<(Cup, Cup)>,
    pub free_wires: PregroupType,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.malformed.is_empty() && self.illegal_cups.is_empty() && self.crossings.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for m in &self.malformed {
            parts.push(format!("malformed cup {}: {}", m.cup, m.reason));
        }
        for c in &self.illegal_cups {
            parts.push(format!("illegal cup {c}"));
        }
        for (a, b) in &self.crossings {
            parts.push(format!("cups {a} and {b} cross"));
        }
        if parts.is_empty() {
            write!(f, "valid, free wires {}", self.free_wires)
        } else {
            f.write_str(&parts.join("; "))
        }
    }
}

pub fn validate_diagram(d: &PregroupDiagram) -> ValidationReport {
    let wires = d.wires();
    let mut report = ValidationReport::default();
    let mut used = vec![false; wires.len()];
    let mut good = Vec::with_capacity(d.cups.len());

    for &cup in &d.cups {
        let Cup(i, j) = cup;
        let reason = if i >= j {
            Some("left offset must be smaller than right offset")
        } else if j >= wires.len() {
            Some("offset out of range")
        } else if used[i] || used[j] {
            Some("offset already used by another cup")
        } else {
            None
        };
        if let Some(reason) = reason {
            report.malformed.push(MalformedCup {
                cup,
                reason: reason.to_string(),
            });
            continue;
        }
        used[i] = true;
        used[j] = true;
        if !can_contract(wires[i], wires[j]) {
            report.illegal_cups.push(cup);
        }
        good.push(cup);
    }

    // Sorting by left endpoint makes the interleaving check a stack scan, but
    // we want every crossing pair reported, so enumerate pairs.
    good.sort();
    for (a_idx, &a) in good.iter().enumerate() {
        for &b in &good[a_idx + 1..] {
            if b.0 > a.1 {
                break;
            }
            if a.crosses(b) {
                report.crossings.push((a, b));
            }
        }
    }

    report.free_wires = wires
        .iter()
        .zip(&used)
        .filter_map(|(t, u)| (!u).then_some(*t))
        .collect();
    report
}

/// Free-wire type of a valid diagram; a sentence is grammatical iff this is `s`.
pub fn reduce(d: &PregroupDiagram) -> Result<PregroupType> {
    let report = validate_diagram(d);
    if report.is_valid() {
        Ok(report.free_wires)
    } else {
        Err(Error::InvalidDiagram {
            sentence: 0,
            report,
        })
    }
}
