//! Gate-level circuits.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    Rx,
    Ry,
    Rz,
    CRz,
    CRx,
    CX,
    #[serde(rename = "SWAP")]
    Swap,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            _ => 2,
        }
    }

    pub fn is_parameterised(self) -> bool {
        matches!(
            self,
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::CRz | GateKind::CRx
        )
    }

    pub fn is_controlled_rotation(self) -> bool {
        matches!(self, GateKind::CRz | GateKind::CRx)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GateKind::H => "H",
            GateKind::Rx => "Rx",
            GateKind::Ry => "Ry",
            GateKind::Rz => "Rz",
            GateKind::CRz => "CRz",
            GateKind::CRx => "CRx",
            GateKind::CX => "CX",
            GateKind::Swap => "SWAP",
        };
        f.write_str(s)
    }
}

/// A symbolic parameter name or a literal angle in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Symbol(String),
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: GateKind,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<Param>,
}

impl Gate {
    pub fn fixed(name: GateKind, qubits: Vec<usize>) -> Self {
        Gate {
            name,
            qubits,
            param: None,
        }
    }

    pub fn symbolic(name: GateKind, qubits: Vec<usize>, symbol: impl Into<String>) -> Self {
        Gate {
            name,
            qubits,
            param: Some(Param::Symbol(symbol.into())),
        }
    }

    pub fn symbol(&self) -> Option<&str> {
        match &self.param {
            Some(Param::Symbol(s)) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    /// `(qubit, required bit)`.
    #[serde(default)]
    pub postselect: Vec<(usize, u8)>,
    /// Symbol to initial value.
    #[serde(default)]
    pub symbols: BTreeMap<String, f64>,
    pub outputs: Vec<usize>,
}

impl Circuit {
    pub fn validate(&self) -> Result<()> {
        for (i, g) in self.gates.iter().enumerate() {
            let loc = || format!("gates[{i}]");
            if g.qubits.len() != g.name.arity() {
                return Err(Error::format(loc(), format!("{} takes {} qubits", g.name, g.name.arity())));
            }
            if g.qubits.iter().any(|&q| q >= self.n_qubits) {
                return Err(Error::format(loc(), "qubit index out of range"));
            }
            if g.qubits.len() == 2 && g.qubits[0] == g.qubits[1] {
                return Err(Error::format(loc(), "repeated qubit"));
            }
            match (&g.param, g.name.is_parameterised()) {
                (None, true) => return Err(Error::format(loc(), "missing parameter")),
                (Some(_), false) => return Err(Error::format(loc(), "unexpected parameter")),
                (Some(Param::Symbol(s)), _) if !self.symbols.contains_key(s) => {
                    return Err(Error::UnboundSymbol(s.clone()))
                }
                _ => {}
            }
        }
        for (i, (q, b)) in self.postselect.iter().enumerate() {
            if *q >= self.n_qubits || *b > 1 {
                return Err(Error::format(format!("postselect[{i}]"), "bad qubit or bit"));
            }
            if self.outputs.contains(q) {
                return Err(Error::format(format!("postselect[{i}]"), "qubit is also an output"));
            }
        }
        if self.outputs.iter().any(|&q| q >= self.n_qubits) {
            return Err(Error::format("outputs", "qubit index out of range"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Circuit = serde_json::from_str(text).map_err(|e| {
            Error::format(format!("line {} column {}", e.line(), e.column()), e.to_string())
        })?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("circuits always serialize");
        s.push('\n');
        s
    }

    /// One gate per line: `name qubits... [param]`.
    pub fn to_text(&self) -> String {
        let mut s = format!("qubits {}\n", self.n_qubits);
        for g in &self.gates {
            let qs: Vec<String> = g.qubits.iter().map(usize::to_string).collect();
            let _ = write!(s, "{} {}", g.name, qs.join(" "));
            match &g.param {
                Some(Param::Symbol(p)) => {
                    let _ = write!(s, " {p}");
                }
                Some(Param::Value(v)) => {
                    let _ = write!(s, " {v}");
                }
                None => {}
            }
            s.push('\n');
        }
        for (q, b) in &self.postselect {
            let _ = writeln!(s, "postselect {q} {b}");
        }
        let outs: Vec<String> = self.outputs.iter().map(usize::to_string).collect();
        let _ = writeln!(s, "outputs {}", outs.join(" "));
        s
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph circuit {\n  rankdir=LR;\n  node [shape=box];\n");
        let mut last: Vec<String> = (0..self.n_qubits)
            .map(|q| {
                let _ = writeln!(s, "  q{q} [label=\"q{q}\", shape=plaintext];");
                format!("q{q}")
            })
            .collect();
        for (i, g) in self.gates.iter().enumerate() {
            let label = match &g.param {
                Some(Param::Symbol(p)) => format!("{}({})", g.name, crate::tree::escape(p)),
                Some(Param::Value(v)) => format!("{}({v})", g.name),
                None => g.name.to_string(),
            };
            let _ = writeln!(s, "  g{i} [label=\"{label}\"];");
            for &q in &g.qubits {
                let _ = writeln!(s, "  {} -> g{i};", last[q]);
                last[q] = format!("g{i}");
            }
        }
        s.push_str("}\n");
        s
    }

    /// Number of distinct symbols referenced by gates.
    pub fn parameter_count(&self) -> usize {
        let mut seen: Vec<&str> = self.gates.iter().filter_map(Gate::symbol).collect();
        seen.sort();
        seen.dedup();
        seen.len()
    }
}
