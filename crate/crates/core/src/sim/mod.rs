//! Dense statevector simulation with postselection.
//!
//! Qubit `k` is bit `k` of the basis index. For two-qubit gates the local
//! basis is `2·b(q0) + b(q1)`, so `q0` is the control of controlled gates.
//! Output distributions are indexed with `outputs[0]` as the most
//! significant bit.

pub mod gradient;
pub mod train;

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::circuit::{Circuit, GateKind, Param};
use crate::error::{Error, Result};

pub use gradient::{gradient, loss_and_gradient, GradientMethod, Loss};
pub use train::{load_dataset, train, Example, History, TrainConfig, Trained};

pub const DEFAULT_SIM_QUBITS: usize = 14;
pub const ZERO_NORM: f64 = 1e-30;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Row-major 2×2 or 4×4 matrix of a gate.
pub fn gate_matrix(kind: GateKind, theta: f64) -> Vec<Complex64> {
    let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let o = c(0.0);
    let l = c(1.0);
    let rx = [c(co), -I * si, -I * si, c(co)];
    let rz = [Complex64::from_polar(1.0, -theta / 2.0), o, o, Complex64::from_polar(1.0, theta / 2.0)];
    let controlled = |u: [Complex64; 4]| {
        vec![
            l, o, o, o, //
            o, l, o, o, //
            o, o, u[0], u[1], //
            o, o, u[2], u[3],
        ]
    };
    match kind {
        GateKind::H => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            vec![c(h), c(h), c(h), c(-h)]
        }
        GateKind::Rx => rx.to_vec(),
        GateKind::Ry => vec![c(co), c(-si), c(si), c(co)],
        GateKind::Rz => rz.to_vec(),
        GateKind::CRx => controlled(rx),
        GateKind::CRz => controlled(rz),
        GateKind::CX => controlled([o, l, l, o]),
        GateKind::Swap => vec![
            l, o, o, o, //
            o, o, l, o, //
            o, l, o, o, //
            o, o, o, l,
        ],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub n: usize,
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Self {
        let mut amplitudes = vec![c(0.0); 1 << n];
        amplitudes[0] = c(1.0);
        StateVector { n, amplitudes }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply(&mut self, kind: GateKind, qubits: &[usize], theta: f64) {
        let m = gate_matrix(kind, theta);
        match qubits {
            [q] => self.apply_1q(*q, &m),
            [q0, q1] => self.apply_2q(*q0, *q1, &m),
            _ => unreachable!("gates act on one or two qubits"),
        }
    }

    fn apply_1q(&mut self, q: usize, m: &[Complex64]) {
        let bit = 1 << q;
        for i in 0..self.amplitudes.len() {
            if i & bit != 0 {
                continue;
            }
            let (a, b) = (self.amplitudes[i], self.amplitudes[i | bit]);
            self.amplitudes[i] = m[0] * a + m[1] * b;
            self.amplitudes[i | bit] = m[2] * a + m[3] * b;
        }
    }

    fn apply_2q(&mut self, q0: usize, q1: usize, m: &[Complex64]) {
        let (b0, b1) = (1 << q0, 1 << q1);
        for i in 0..self.amplitudes.len() {
            if i & (b0 | b1) != 0 {
                continue;
            }
            let idx = [i, i | b1, i | b0, i | b0 | b1];
            let v = idx.map(|k| self.amplitudes[k]);
            for (r, &k) in idx.iter().enumerate() {
                self.amplitudes[k] = (0..4).map(|j| m[4 * r + j] * v[j]).sum();
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Angle {
    None,
    Fixed(f64),
    Symbol(usize),
}

/// A circuit with symbols resolved to slots of a parameter vector.
#[derive(Debug, Clone)]
pub(crate) struct Program {
    pub n: usize,
    pub ops: Vec<(GateKind, Vec<usize>, Angle)>,
    pub postselect: Vec<(usize, u8)>,
    pub outputs: Vec<usize>,
}

impl Program {
    pub fn new(c: &Circuit, index: &BTreeMap<String, usize>, cap: usize) -> Result<Self> {
        if c.n_qubits > cap {
            return Err(Error::CapExceeded {
                needed: c.n_qubits,
                cap,
            });
        }
        let ops = c
            .gates
            .iter()
            .map(|g| {
                let angle = match &g.param {
                    None => Angle::None,
                    Some(Param::Value(v)) => Angle::Fixed(*v),
                    Some(Param::Symbol(s)) => {
                        Angle::Symbol(*index.get(s).ok_or_else(|| Error::UnboundSymbol(s.clone()))?)
                    }
                };
                Ok((g.name, g.qubits.clone(), angle))
            })
            .collect::<Result<_>>()?;
        Ok(Program {
            n: c.n_qubits,
            ops,
            postselect: c.postselect.clone(),
            outputs: c.outputs.clone(),
        })
    }

    fn angle(&self, op: usize, values: &[f64], shift: Option<(usize, f64)>) -> f64 {
        let base = match self.ops[op].2 {
            Angle::None => 0.0,
            Angle::Fixed(v) => v,
            Angle::Symbol(k) => values[k],
        };
        match shift {
            Some((o, d)) if o == op => base + d,
            _ => base,
        }
    }

    pub fn state(&self, values: &[f64], shift: Option<(usize, f64)>) -> StateVector {
        let mut psi = StateVector::zero(self.n);
        for (i, (kind, qs, _)) in self.ops.iter().enumerate() {
            psi.apply(*kind, qs, self.angle(i, values, shift));
        }
        psi
    }

    /// Unnormalised probabilities of each output string jointly with the
    /// postselection succeeding.
    pub fn raw(&self, values: &[f64], shift: Option<(usize, f64)>) -> Vec<f64> {
        let psi = self.state(values, shift);
        let m = self.outputs.len();
        let mut out = vec![0.0; 1 << m];
        for (i, a) in psi.amplitudes.iter().enumerate() {
            if self.postselect.iter().any(|&(q, b)| (i >> q) & 1 != b as usize) {
                continue;
            }
            let o = self
                .outputs
                .iter()
                .fold(0, |acc, &q| (acc << 1) | ((i >> q) & 1));
            out[o] += a.norm_sqr();
        }
        out
    }
}

pub(crate) fn normalise(raw: &[f64]) -> Result<(Vec<f64>, f64)> {
    let success: f64 = raw.iter().sum();
    if success < ZERO_NORM {
        return Err(Error::ZeroNorm {
            probability: success,
        });
    }
    Ok((raw.iter().map(|r| r / success).collect(), success))
}

/// Symbol table for a circuit: `params` first, the circuit's own initial
/// values for anything `params` leaves out.
pub(crate) fn bind(c: &Circuit, params: &BTreeMap<String, f64>) -> (BTreeMap<String, usize>, Vec<f64>) {
    let mut merged = c.symbols.clone();
    merged.extend(params.iter().map(|(k, v)| (k.clone(), *v)));
    let index = merged.keys().enumerate().map(|(i, k)| (k.clone(), i)).collect();
    (index, merged.into_values().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub distribution: Vec<f64>,
    pub success_probability: f64,
}

pub fn simulate(c: &Circuit, params: &BTreeMap<String, f64>) -> Result<Simulation> {
    simulate_capped(c, params, DEFAULT_SIM_QUBITS)
}

pub fn simulate_capped(c: &Circuit, params: &BTreeMap<String, f64>, cap: usize) -> Result<Simulation> {
    let (index, values) = bind(c, params);
    let p = Program::new(c, &index, cap)?;
    let (distribution, success_probability) = normalise(&p.raw(&values, None))?;
    Ok(Simulation {
        distribution,
        success_probability,
    })
}

/// Dense unitary of the gate list, built entry by entry from the gate
/// matrices. Independent of the in-place kernels above; used as an oracle.
pub fn unitary(c: &Circuit, params: &BTreeMap<String, f64>) -> Result<Vec<Vec<Complex64>>> {
    let (index, values) = bind(c, params);
    let p = Program::new(c, &index, DEFAULT_SIM_QUBITS)?;
    let dim = 1usize << p.n;
    let mut u: Vec<Vec<Complex64>> = (0..dim)
        .map(|r| (0..dim).map(|k| c_eq(r == k)).collect())
        .collect();
    for (i, (kind, qs, _)) in p.ops.iter().enumerate() {
        let g = embed(*kind, qs, p.angle(i, &values, None), p.n);
        u = matmul(&g, &u);
    }
    Ok(u)
}

fn c_eq(b: bool) -> Complex64 {
    if b {
        c(1.0)
    } else {
        c(0.0)
    }
}

/// Full `2^n` matrix of one gate.
pub fn embed(kind: GateKind, qubits: &[usize], theta: f64, n: usize) -> Vec<Vec<Complex64>> {
    let m = gate_matrix(kind, theta);
    let k = qubits.len();
    let local = |i: usize| qubits.iter().fold(0, |acc, &q| (acc << 1) | ((i >> q) & 1));
    let mask: usize = qubits.iter().map(|q| 1 << q).sum();
    let dim = 1usize << n;
    (0..dim)
        .map(|r| {
            (0..dim)
                .map(|col| {
                    if r & !mask != col & !mask {
                        c(0.0)
                    } else {
                        m[(1 << k) * local(r) + local(col)]
                    }
                })
                .collect()
        })
        .collect()
}

pub fn matmul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// `max |(U†U − I)_ij|`.
pub fn unitarity_defect(u: &[Vec<Complex64>]) -> f64 {
    let n = u.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s: Complex64 = (0..n).map(|k| u[k][i].conj() * u[k][j]).sum();
            worst = worst.max((s - c_eq(i == j)).norm());
        }
    }
    worst
}
