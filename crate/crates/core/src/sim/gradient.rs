//! Loss gradients by parameter shift or central differences.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, SQRT_2};

use serde::{Deserialize, Serialize};

use super::{bind, normalise, Angle, Program, DEFAULT_SIM_QUBITS};
use crate::circuit::Circuit;
use crate::error::Result;

pub const FINITE_DIFF_STEP: f64 = 1e-6;
const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    FiniteDiff,
    #[default]
    ParameterShift,
}

/// A loss on the renormalised output distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    /// `−ln p(label)`.
    Bce { label: usize },
    /// `p(outcome)`.
    Probability { outcome: usize },
}

impl Loss {
    pub fn value(&self, p: &[f64]) -> f64 {
        match *self {
            Loss::Bce { label } => -p[label].max(LOG_FLOOR).ln(),
            Loss::Probability { outcome } => p[outcome],
        }
    }

    fn derivative(&self, p: &[f64]) -> Vec<f64> {
        let mut d = vec![0.0; p.len()];
        match *self {
            Loss::Bce { label } if p[label] > LOG_FLOOR => d[label] = -1.0 / p[label],
            Loss::Bce { .. } => {}
            Loss::Probability { outcome } => d[outcome] = 1.0,
        }
        d
    }
}

fn loss_at(prog: &Program, values: &[f64], loss: Loss) -> Result<f64> {
    let (p, _) = normalise(&prog.raw(values, None))?;
    Ok(loss.value(&p))
}

/// Derivative of the raw output probabilities with respect to the angle of
/// gate `op`. Single-qubit rotations use the two-term rule; controlled
/// rotations have generator spectrum {0, ±1/2} and need four terms.
fn shifted(prog: &Program, values: &[f64], op: usize) -> Vec<f64> {
    let diff = |s: f64| -> Vec<f64> {
        let plus = prog.raw(values, Some((op, s)));
        let minus = prog.raw(values, Some((op, -s)));
        plus.iter().zip(&minus).map(|(a, b)| a - b).collect()
    };
    let near = diff(FRAC_PI_2);
    if !prog.ops[op].0.is_controlled_rotation() {
        return near.iter().map(|d| d / 2.0).collect();
    }
    let far = diff(3.0 * FRAC_PI_2);
    let cp = (SQRT_2 + 1.0) / (4.0 * SQRT_2);
    let cm = (SQRT_2 - 1.0) / (4.0 * SQRT_2);
    near.iter().zip(&far).map(|(n, f)| cp * n - cm * f).collect()
}

/// Loss, output distribution and the gradient over the program's parameter
/// vector.
pub(crate) fn program_gradient(
    prog: &Program,
    values: &[f64],
    loss: Loss,
    method: GradientMethod,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let raw = prog.raw(values, None);
    let (p, success) = normalise(&raw)?;
    let value = loss.value(&p);
    let mut grad = vec![0.0; values.len()];
    match method {
        GradientMethod::ParameterShift => {
            let dl = loss.derivative(&p);
            let mean: f64 = dl.iter().zip(&p).map(|(a, b)| a * b).sum();
            let dl_draw: Vec<f64> = dl.iter().map(|d| (d - mean) / success).collect();
            for (op, (_, _, angle)) in prog.ops.iter().enumerate() {
                if let Angle::Symbol(k) = *angle {
                    let dr = shifted(prog, values, op);
                    grad[k] += dr.iter().zip(&dl_draw).map(|(a, b)| a * b).sum::<f64>();
                }
            }
        }
        GradientMethod::FiniteDiff => {
            let mut used = vec![false; values.len()];
            for (_, _, angle) in &prog.ops {
                if let Angle::Symbol(k) = *angle {
                    used[k] = true;
                }
            }
            let mut v = values.to_vec();
            for k in (0..values.len()).filter(|&k| used[k]) {
                v[k] = values[k] + FINITE_DIFF_STEP;
                let up = loss_at(prog, &v, loss)?;
                v[k] = values[k] - FINITE_DIFF_STEP;
                let down = loss_at(prog, &v, loss)?;
                v[k] = values[k];
                grad[k] = (up - down) / (2.0 * FINITE_DIFF_STEP);
            }
        }
    }
    Ok((value, p, grad))
}

/// Loss value and gradient for every symbol the circuit's gates use.
pub fn loss_and_gradient(
    c: &Circuit,
    params: &BTreeMap<String, f64>,
    loss: Loss,
    method: GradientMethod,
) -> Result<(f64, BTreeMap<String, f64>)> {
    let (index, values) = bind(c, params);
    let prog = Program::new(c, &index, DEFAULT_SIM_QUBITS)?;
    let (value, _, grad) = program_gradient(&prog, &values, loss, method)?;
    let out = c
        .gates
        .iter()
        .filter_map(|g| g.symbol())
        .map(|s| (s.to_string(), grad[index[s]]))
        .collect();
    Ok((value, out))
}

pub fn gradient(
    c: &Circuit,
    params: &BTreeMap<String, f64>,
    loss: Loss,
    method: GradientMethod,
) -> Result<BTreeMap<String, f64>> {
    loss_and_gradient(c, params, loss, method).map(|(_, g)| g)
}
