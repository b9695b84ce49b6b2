//! Minibatch Adam on binary cross entropy.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gradient::{program_gradient, GradientMethod, Loss};
use super::{normalise, Program, DEFAULT_SIM_QUBITS};
use crate::circuit::Circuit;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    #[default]
    Adam,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    #[default]
    Bce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub loss: LossKind,
    pub gradient: GradientMethod,
    pub seed: u64,
    /// Fraction held out for testing. Zero trains on everything.
    pub test_fraction: f64,
    pub max_qubits: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 60,
            batch_size: 10,
            learning_rate: 0.01,
            optimizer: Optimizer::Adam,
            loss: LossKind::Bce,
            gradient: GradientMethod::ParameterShift,
            seed: 0,
            test_fraction: 0.2,
            max_qubits: DEFAULT_SIM_QUBITS,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidConfig("epochs and batch size must be at least 1".into()));
        }
        if self.learning_rate.is_nan() || self.learning_rate < 0.0 || !(0.0..1.0).contains(&self.test_fraction) {
            return Err(Error::InvalidConfig("bad learning rate or test fraction".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub text_id: String,
    pub label: u8,
    pub circuit: Circuit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub test_acc: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
}

impl History {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,train_loss,train_acc,test_acc\n");
        for r in &self.epochs {
            let test = r.test_acc.map(|a| a.to_string()).unwrap_or_default();
            s.push_str(&format!("{},{},{},{}\n", r.epoch, r.train_loss, r.train_acc, test));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trained {
    pub params: BTreeMap<String, f64>,
    pub history: History,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
}

impl Trained {
    pub fn final_test_accuracy(&self) -> Option<f64> {
        self.history.epochs.last().and_then(|r| r.test_acc)
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = Self::B1 * self.m[i] + (1.0 - Self::B1) * grad[i];
            self.v[i] = Self::B2 * self.v[i] + (1.0 - Self::B2) * grad[i] * grad[i];
            params[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + Self::EPS);
        }
    }
}

fn predict(p: &[f64]) -> usize {
    usize::from(p.len() > 1 && p[1] > p[0])
}

fn wrap(id: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::Training(format!("{id}: {e}"))
}

/// Trains one shared parameter vector over every circuit. Initial values
/// come from the first circuit that declares each symbol.
pub fn train(data: &[Example], cfg: &TrainConfig) -> Result<Trained> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Training("empty dataset".into()));
    }
    let mut init: BTreeMap<String, f64> = BTreeMap::new();
    for ex in data {
        if ex.label > 1 || ex.circuit.outputs.len() != 1 {
            return Err(Error::Training(format!(
                "{}: need a 0/1 label and a single output qubit",
                ex.text_id
            )));
        }
        for (k, v) in &ex.circuit.symbols {
            init.entry(k.clone()).or_insert(*v);
        }
    }
    let index: BTreeMap<String, usize> = init.keys().enumerate().map(|(i, k)| (k.clone(), i)).collect();
    let programs: Vec<Program> = data
        .iter()
        .map(|ex| Program::new(&ex.circuit, &index, cfg.max_qubits).map_err(wrap(&ex.text_id)))
        .collect::<Result<_>>()?;
    let mut params: Vec<f64> = init.values().copied().collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut rng);
    let n_test = (data.len() as f64 * cfg.test_fraction).floor() as usize;
    let (test, train_set) = order.split_at(n_test);
    let mut train_set = train_set.to_vec();
    let test = test.to_vec();

    let mut adam = Adam::new(params.len());
    let mut history = History::default();
    for epoch in 1..=cfg.epochs {
        train_set.shuffle(&mut rng);
        let (mut loss_sum, mut correct) = (0.0, 0usize);
        for batch in train_set.chunks(cfg.batch_size) {
            let results: Vec<Result<(f64, Vec<f64>, Vec<f64>)>> = batch
                .par_iter()
                .map(|&i| {
                    let loss = Loss::Bce {
                        label: data[i].label as usize,
                    };
                    program_gradient(&programs[i], &params, loss, cfg.gradient).map_err(wrap(&data[i].text_id))
                })
                .collect();
            let mut grad = vec![0.0; params.len()];
            for (r, &i) in results.into_iter().zip(batch) {
                let (l, p, g) = r?;
                loss_sum += l;
                correct += usize::from(predict(&p) == data[i].label as usize);
                for (a, b) in grad.iter_mut().zip(&g) {
                    *a += b / batch.len() as f64;
                }
            }
            adam.step(&mut params, &grad, cfg.learning_rate);
        }
        let test_acc = if test.is_empty() {
            None
        } else {
            let hits: Vec<Result<bool>> = test
                .par_iter()
                .map(|&i| {
                    let (p, _) = normalise(&programs[i].raw(&params, None)).map_err(wrap(&data[i].text_id))?;
                    Ok(predict(&p) == data[i].label as usize)
                })
                .collect();
            let mut n = 0;
            for h in hits {
                n += usize::from(h?);
            }
            Some(n as f64 / test.len() as f64)
        };
        let rec = EpochRecord {
            epoch,
            train_loss: loss_sum / train_set.len() as f64,
            train_acc: correct as f64 / train_set.len() as f64,
            test_acc,
        };
        log::info!(
            "epoch {epoch}: loss {:.4} train acc {:.3} test acc {:?}",
            rec.train_loss,
            rec.train_acc,
            rec.test_acc
        );
        history.epochs.push(rec);
    }
    let ids = |v: &[usize]| v.iter().map(|&i| data[i].text_id.clone()).collect();
    train_set.sort();
    Ok(Trained {
        params: index.into_iter().map(|(k, i)| (k, params[i])).collect(),
        history,
        train_ids: ids(&train_set),
        test_ids: ids(&test),
    })
}

#[derive(Deserialize)]
struct Line {
    text_id: String,
    label: u8,
    #[serde(default)]
    circuit_path: Option<String>,
    #[serde(default)]
    circuit: Option<Circuit>,
}

/// JSON lines of `{"text_id", "label", "circuit_path" | "circuit"}`.
/// Relative paths resolve against the dataset file's directory.
pub fn load_dataset(path: &Path) -> Result<Vec<Example>> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let loc = || format!("{}:{}", path.display(), n + 1);
        let l: Line = serde_json::from_str(line).map_err(|e| Error::format(loc(), e.to_string()))?;
        let circuit = match (l.circuit, l.circuit_path) {
            (Some(c), _) => {
                c.validate()?;
                c
            }
            (None, Some(p)) => Circuit::from_json(&std::fs::read_to_string(base.join(p))?)?,
            (None, None) => return Err(Error::format(loc(), "needs circuit or circuit_path")),
        };
        out.push(Example {
            text_id: l.text_id,
            label: l.label,
            circuit,
        });
    }
    Ok(out)
}

pub fn write_history(path: &Path, h: &History) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(h.to_csv().as_bytes())?;
    Ok(())
}
