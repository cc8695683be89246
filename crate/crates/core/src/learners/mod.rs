//! Linear and neural classifiers over composed representations.

mod grid;
mod logreg;
mod metrics;
mod mlp;
mod persist;
mod sgd;

pub use grid::{
    grid_search, logreg_grid, mlp_grid, sgd_grid, train_spec, write_trials_tsv, GridResult,
    TrialRecord, LNN_NS, LOGREG_LAMBDAS, MLP_DROPOUTS, MLP_LEARNING_RATES, SGD_ALPHAS,
    SGD_L1_RATIOS, SGD_POWER_TS, SNN_WIDTHS,
};
pub use logreg::train_logreg;
pub use metrics::{confusion_matrix, metrics, Averaging, MetricsRecord};
pub use mlp::{init_layers, mlp_loss_and_grad, selu, train_mlp};
pub use persist::MODEL_MAGIC;
pub use sgd::train_sgd;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Logreg,
    Sgd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    Log,
    Hinge,
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" | "log_loss" => Ok(Loss::Log),
            "hinge" => Ok(Loss::Hinge),
            other => Err(Error::Parameter(format!("unknown loss `{other}`"))),
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Loss::Log => "log",
            Loss::Hinge => "hinge",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModelSpec {
    pub family: Family,
    pub loss: Loss,
    pub l2_lambda: f64,
    pub alpha: f64,
    pub l1_ratio: f64,
    pub power_t: f64,
    pub eta0: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl LinearModelSpec {
    pub fn logreg(l2_lambda: f64) -> Self {
        Self {
            family: Family::Logreg,
            loss: Loss::Log,
            l2_lambda,
            alpha: 1e-4,
            l1_ratio: 0.15,
            power_t: 0.5,
            eta0: 0.01,
            max_epochs: 1000,
            seed: 0,
        }
    }

    pub fn sgd(loss: Loss, alpha: f64, l1_ratio: f64, power_t: f64) -> Self {
        Self {
            family: Family::Sgd,
            loss,
            l2_lambda: 0.0,
            alpha,
            l1_ratio,
            power_t,
            eta0: 0.01,
            max_epochs: 50,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        match self.family {
            Family::Logreg if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) => bad(
                format!("l2_lambda must be finite and ≥ 0, got {}", self.l2_lambda),
            ),
            Family::Sgd if !(self.alpha > 0.0 && self.alpha.is_finite()) => {
                bad(format!("alpha must be > 0, got {}", self.alpha))
            }
            Family::Sgd if !(0.0..=1.0).contains(&self.l1_ratio) => bad(format!(
                "l1_ratio must lie in [0, 1], got {}",
                self.l1_ratio
            )),
            Family::Sgd if !(self.eta0 > 0.0 && self.power_t >= 0.0) => bad(format!(
                "bad learning-rate schedule eta0={} power_t={}",
                self.eta0, self.power_t
            )),
            _ if self.max_epochs == 0 => bad("max_epochs must be positive".into()),
            _ => Ok(()),
        }
    }

    /// SGD step size at update `t` (1-based).
    pub fn learning_rate(&self, t: u64) -> f64 {
        self.eta0 / (t as f64).powf(self.power_t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arch {
    #[serde(rename = "snn")]
    Snn,
    #[serde(rename = "5net")]
    FiveNet,
    #[serde(rename = "lnn")]
    Lnn,
}

impl FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "snn" => Ok(Arch::Snn),
            "5net" | "fivenet" => Ok(Arch::FiveNet),
            "lnn" => Ok(Arch::Lnn),
            other => Err(Error::Parameter(format!("unknown architecture `{other}`"))),
        }
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arch::Snn => "snn",
            Arch::FiveNet => "5net",
            Arch::Lnn => "lnn",
        })
    }
}

pub const FIVENET_WIDTHS: [usize; 5] = [1024, 512, 256, 128, 64];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub arch: Arch,
    pub snn_width: usize,
    pub lnn_n: u32,
    pub fivenet_widths: Vec<usize>,
    pub lr: f64,
    /// Drop probability after each hidden layer; 0 disables dropout.
    pub dropout: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

impl Default for MlpSpec {
    fn default() -> Self {
        Self {
            arch: Arch::Snn,
            snn_width: 128,
            lnn_n: 6,
            fivenet_widths: FIVENET_WIDTHS.to_vec(),
            lr: 0.001,
            dropout: 0.2,
            batch_size: 32,
            max_epochs: 1000,
            patience: 10,
            seed: 0,
        }
    }
}

impl MlpSpec {
    pub fn snn(width: usize) -> Self {
        Self {
            arch: Arch::Snn,
            snn_width: width,
            ..Self::default()
        }
    }

    pub fn five_net() -> Self {
        Self {
            arch: Arch::FiveNet,
            ..Self::default()
        }
    }

    pub fn lnn(n: u32) -> Self {
        Self {
            arch: Arch::Lnn,
            lnn_n: n,
            ..Self::default()
        }
    }

    pub fn hidden_sizes(&self) -> Result<Vec<usize>> {
        match self.arch {
            Arch::Snn if self.snn_width == 0 => {
                Err(Error::Parameter("snn_width must be positive".into()))
            }
            Arch::Snn => Ok(vec![self.snn_width]),
            Arch::FiveNet if self.fivenet_widths.contains(&0) || self.fivenet_widths.is_empty() => {
                Err(Error::Parameter("5Net widths must be positive".into()))
            }
            Arch::FiveNet => Ok(self.fivenet_widths.clone()),
            Arch::Lnn => lnn_layer_sizes(self.lnn_n),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hidden_sizes()?;
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Parameter(format!(
                "dropout must lie in [0, 1), got {}",
                self.dropout
            )));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::Parameter(format!(
                "learning rate must be finite and ≥ 0, got {}",
                self.lr
            )));
        }
        if self.batch_size == 0 || self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::Parameter(
                "batch_size, max_epochs and patience must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Hidden layer widths `[2^n, 2^(n-1), …, 2]`.
pub fn lnn_layer_sizes(n: u32) -> Result<Vec<usize>> {
    if !(2..=40).contains(&n) {
        return Err(Error::Parameter(format!(
            "LNN exponent must lie in 2..=40, got {n}"
        )));
    }
    Ok((1..=n).rev().map(|k| 1usize << k).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "lowercase")]
pub enum ModelSpec {
    Linear(LinearModelSpec),
    Mlp(MlpSpec),
}

impl ModelSpec {
    pub fn seed(&self) -> u64 {
        match self {
            ModelSpec::Linear(s) => s.seed,
            ModelSpec::Mlp(s) => s.seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        match &mut self {
            ModelSpec::Linear(s) => s.seed = seed,
            ModelSpec::Mlp(s) => s.seed = seed,
        }
        self
    }

    /// Compact `key=value` description of the tuned hyperparameters.
    pub fn params(&self) -> String {
        match self {
            ModelSpec::Linear(s) if s.family == Family::Logreg => {
                format!("logreg l2_lambda={}", s.l2_lambda)
            }
            ModelSpec::Linear(s) => format!(
                "sgd loss={} alpha={} l1_ratio={} power_t={} eta0={}",
                s.loss, s.alpha, s.l1_ratio, s.power_t, s.eta0
            ),
            ModelSpec::Mlp(s) => {
                let arch = match s.arch {
                    Arch::Snn => format!("snn width={}", s.snn_width),
                    Arch::FiveNet => format!(
                        "5net widths={}",
                        s.fivenet_widths
                            .iter()
                            .map(|w| w.to_string())
                            .collect::<Vec<_>>()
                            .join(",")
                    ),
                    Arch::Lnn => format!("lnn n={}", s.lnn_n),
                };
                format!("{arch} lr={} dropout={}", s.lr, s.dropout)
            }
        }
    }
}

/// Dense affine map `x W + b`, `W` stored `inputs × outputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            w: Array2::zeros((inputs, outputs)),
            b: Array1::zeros(outputs),
        }
    }

    pub fn n_params(&self) -> usize {
        self.w.len() + self.b.len()
    }

    pub(crate) fn apply(&self, x: &Array2<f64>) -> Array2<f64> {
        x.dot(&self.w) + &self.b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub labels: Vec<String>,
    pub layers: Vec<Layer>,
    /// Per-epoch monitor values: validation F1 for networks, training loss
    /// for linear models.
    pub history: Vec<f64>,
    /// 1-based epoch whose weights were kept.
    pub best_epoch: usize,
    pub epochs: usize,
}

impl TrainedModel {
    pub fn n_inputs(&self) -> usize {
        self.layers.first().map_or(0, |l| l.w.nrows())
    }

    pub fn n_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(Layer::n_params).sum()
    }

    /// Raw output scores (logits or one-vs-rest margins).
    pub fn scores(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.n_inputs() {
            return Err(Error::Evaluation(format!(
                "model expects {} features, got {}",
                self.n_inputs(),
                x.ncols()
            )));
        }
        Ok(forward(&self.layers, x))
    }

    pub fn predict(&self, x: &Array2<f64>) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.scores(x)?))
    }

    pub fn predict_proba(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        let mut s = self.scores(x)?;
        softmax_rows(&mut s);
        Ok(s)
    }
}

pub(crate) fn forward(layers: &[Layer], x: &Array2<f64>) -> Array2<f64> {
    let mut h = x.clone();
    for (i, layer) in layers.iter().enumerate() {
        h = layer.apply(&h);
        if i + 1 < layers.len() {
            h.mapv_inplace(selu);
        }
    }
    h
}

pub(crate) fn argmax_rows(s: &Array2<f64>) -> Vec<usize> {
    s.rows()
        .into_iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (j, &v)| {
                    if v > best.1 {
                        (j, v)
                    } else {
                        best
                    }
                })
                .0
        })
        .collect()
}

/// Row-wise stable softmax in place.
pub(crate) fn softmax_rows(s: &mut Array2<f64>) {
    for mut row in s.axis_iter_mut(Axis(0)) {
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - m).exp());
        let z = row.sum();
        row.mapv_inplace(|v| v / z);
    }
}

/// Shared input checks for every learner.
pub(crate) fn check_training_data(x: &Array2<f64>, y: &[usize], labels: &[String]) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::Training(format!(
            "{} rows but {} labels",
            x.nrows(),
            y.len()
        )));
    }
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::Training("empty training matrix".into()));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= labels.len()) {
        return Err(Error::Training(format!(
            "class id {bad} outside the label set"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Training(
            "training matrix contains non-finite values".into(),
        ));
    }
    let first = y[0];
    if y.iter().all(|&c| c == first) {
        return Err(Error::Training(
            "training labels contain a single class".into(),
        ));
    }
    Ok(())
}

pub fn evaluate(
    model: &TrainedModel,
    x: &Array2<f64>,
    y: &[usize],
    averaging: Averaging,
) -> Result<MetricsRecord> {
    let pred = model.predict(x)?;
    metrics(y, &pred, model.n_classes(), averaging)
}
