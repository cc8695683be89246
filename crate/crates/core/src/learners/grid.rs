use std::cmp::Ordering;
use std::io::Write;
use std::sync::Mutex;

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    evaluate, train_logreg, train_mlp, train_sgd, Averaging, Family, LinearModelSpec, Loss,
    MetricsRecord, MlpSpec, ModelSpec, TrainedModel,
};
use crate::error::{Error, Result};
use crate::seed;

pub const LOGREG_LAMBDAS: [f64; 3] = [0.1, 0.01, 0.001];
pub const SGD_L1_RATIOS: [f64; 6] = [0.05, 0.25, 0.3, 0.6, 0.8, 0.95];
pub const SGD_POWER_TS: [f64; 3] = [0.1, 0.5, 0.9];
pub const SGD_ALPHAS: [f64; 4] = [0.01, 0.001, 0.0001, 0.0005];
/// The published list repeats 0.005; duplicates are dropped.
pub const MLP_LEARNING_RATES: [f64; 6] = [0.0001, 0.005, 0.001, 0.01, 0.05, 0.1];
pub const MLP_DROPOUTS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
pub const SNN_WIDTHS: [usize; 10] = [32, 64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384];
pub const LNN_NS: [u32; 11] = [6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16];

pub fn logreg_grid(lambdas: &[f64], max_epochs: usize) -> Vec<ModelSpec> {
    lambdas
        .iter()
        .map(|&l| {
            ModelSpec::Linear(LinearModelSpec {
                max_epochs,
                ..LinearModelSpec::logreg(l)
            })
        })
        .collect()
}

/// Cartesian product in loss, l1_ratio, power_t, alpha order.
pub fn sgd_grid(
    losses: &[Loss],
    l1_ratios: &[f64],
    power_ts: &[f64],
    alphas: &[f64],
    eta0: f64,
    max_epochs: usize,
) -> Vec<ModelSpec> {
    let mut out =
        Vec::with_capacity(losses.len() * l1_ratios.len() * power_ts.len() * alphas.len());
    for &loss in losses {
        for &l1 in l1_ratios {
            for &pt in power_ts {
                for &a in alphas {
                    out.push(ModelSpec::Linear(LinearModelSpec {
                        eta0,
                        max_epochs,
                        ..LinearModelSpec::sgd(loss, a, l1, pt)
                    }));
                }
            }
        }
    }
    out
}

/// Every architecture template crossed with every learning rate and dropout.
pub fn mlp_grid(templates: &[MlpSpec], lrs: &[f64], dropouts: &[f64]) -> Vec<ModelSpec> {
    let mut out = Vec::with_capacity(templates.len() * lrs.len() * dropouts.len());
    for t in templates {
        for &lr in lrs {
            for &dropout in dropouts {
                out.push(ModelSpec::Mlp(MlpSpec {
                    lr,
                    dropout,
                    ..t.clone()
                }));
            }
        }
    }
    out
}

pub fn train_spec(
    spec: &ModelSpec,
    x: &Array2<f64>,
    y: &[usize],
    labels: &[String],
    validation: (&Array2<f64>, &[usize]),
) -> Result<TrainedModel> {
    match spec {
        ModelSpec::Linear(s) if s.family == Family::Logreg => train_logreg(x, y, labels, s),
        ModelSpec::Linear(s) => train_sgd(x, y, labels, s),
        ModelSpec::Mlp(s) => train_mlp(x, y, labels, s, validation),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub params: String,
    pub validation: Option<MetricsRecord>,
    pub epochs: usize,
    pub n_params: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub best: TrainedModel,
    pub best_trial: usize,
    pub trials: Vec<TrialRecord>,
}

/// Higher F1 first, then fewer parameters, then earlier trial.
fn better(a: (f64, usize, usize), b: (f64, usize, usize)) -> bool {
    match a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => (a.1, a.2) < (b.1, b.2),
    }
}

/// Trains every spec (in parallel) with a per-trial seed derived from `seed`
/// and keeps the one with the best validation F1.
pub fn grid_search(
    specs: &[ModelSpec],
    train: (&Array2<f64>, &[usize]),
    validation: (&Array2<f64>, &[usize]),
    labels: &[String],
    averaging: Averaging,
    seed: u64,
) -> Result<GridResult> {
    if specs.is_empty() {
        return Err(Error::Parameter("empty hyperparameter grid".into()));
    }
    let best: Mutex<Option<((f64, usize, usize), TrainedModel)>> = Mutex::new(None);
    let trials: Vec<TrialRecord> = specs
        .par_iter()
        .enumerate()
        .map(|(id, spec)| {
            let spec = spec
                .clone()
                .with_seed(seed::derive(seed, "trial", id as u64));
            let params = spec.params();
            let outcome = train_spec(&spec, train.0, train.1, labels, validation)
                .and_then(|m| evaluate(&m, validation.0, validation.1, averaging).map(|r| (m, r)));
            match outcome {
                Ok((model, record)) => {
                    let key = (record.f1, model.n_params(), id);
                    let rec = TrialRecord {
                        trial: id,
                        params,
                        validation: Some(record),
                        epochs: model.epochs,
                        n_params: model.n_params(),
                        error: None,
                    };
                    let mut guard = best.lock().expect("grid search lock poisoned");
                    if guard.as_ref().is_none_or(|(k, _)| better(key, *k)) {
                        *guard = Some((key, model));
                    }
                    rec
                }
                Err(e) => {
                    log::warn!("trial {id} ({params}) failed: {e}");
                    TrialRecord {
                        trial: id,
                        params,
                        validation: None,
                        epochs: 0,
                        n_params: 0,
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();
    let best = best.into_inner().expect("grid search lock poisoned");
    match best {
        Some(((_, _, id), model)) => Ok(GridResult {
            best: model,
            best_trial: id,
            trials,
        }),
        None => Err(Error::Training(format!(
            "all {} trials failed; first error: {}",
            trials.len(),
            trials[0].error.as_deref().unwrap_or("unknown")
        ))),
    }
}

/// Tab-separated trial table with a header row, in trial order.
pub fn write_trials_tsv<W: Write>(trials: &[TrialRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "trial\tparams\taccuracy\tf1\tprecision\trecall\tepochs")?;
    for t in trials {
        match &t.validation {
            Some(m) => writeln!(
                w,
                "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}",
                t.trial, t.params, m.accuracy, m.f1, m.precision, m.recall, t.epochs
            )?,
            None => writeln!(w, "{}\t{}\tNA\tNA\tNA\tNA\t{}", t.trial, t.params, t.epochs)?,
        }
    }
    Ok(())
}
