use ndarray::{Array1, Array2, Axis};

use super::{
    check_training_data, softmax_rows, Family, Layer, LinearModelSpec, ModelSpec, TrainedModel,
};
use crate::error::{Error, Result};

const GRAD_TOL: f64 = 1e-6;
const ARMIJO_C: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

struct Eval {
    loss: f64,
    gw: Array2<f64>,
    gb: Array1<f64>,
}

/// Mean cross-entropy plus `λ‖W‖²/2`; the intercept is not penalized.
fn objective(x: &Array2<f64>, y: &[usize], layer: &Layer, lambda: f64) -> Eval {
    let n = x.nrows() as f64;
    let logits = layer.apply(x);
    let mut p = logits.clone();
    softmax_rows(&mut p);
    let mut ce = 0.0;
    for (i, row) in logits.rows().into_iter().enumerate() {
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        ce += lse - row[y[i]];
        p[[i, y[i]]] -= 1.0;
    }
    p /= n;
    let gw = x.t().dot(&p) + &(&layer.w * lambda);
    let gb = p.sum_axis(Axis(0));
    let loss = ce / n + 0.5 * lambda * layer.w.iter().map(|w| w * w).sum::<f64>();
    Eval { loss, gw, gb }
}

fn sq_norm(e: &Eval) -> f64 {
    e.gw.iter().chain(e.gb.iter()).map(|g| g * g).sum()
}

fn inf_norm(e: &Eval) -> f64 {
    e.gw.iter()
        .chain(e.gb.iter())
        .fold(0.0, |m, g| m.max(g.abs()))
}

/// Multinomial logistic regression by full-batch gradient descent.
///
/// Steps start from the Barzilai-Borwein estimate and are halved until the
/// Armijo condition holds, so the recorded loss never increases.
pub fn train_logreg(
    x: &Array2<f64>,
    y: &[usize],
    labels: &[String],
    spec: &LinearModelSpec,
) -> Result<TrainedModel> {
    if spec.family != Family::Logreg {
        return Err(Error::Parameter("train_logreg needs a logreg spec".into()));
    }
    spec.validate()?;
    check_training_data(x, y, labels)?;
    let lambda = spec.l2_lambda;

    let mut layer = Layer::zeros(x.ncols(), labels.len());
    let mut cur = objective(x, y, &layer, lambda);
    let mut history = vec![cur.loss];
    let mut step = 1.0;
    let mut epochs = 0;

    while epochs < spec.max_epochs && inf_norm(&cur) >= GRAD_TOL {
        let g2 = sq_norm(&cur);
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let cand = Layer {
                w: &layer.w - &(&cur.gw * step),
                b: &layer.b - &(&cur.gb * step),
            };
            let e = objective(x, y, &cand, lambda);
            if e.loss.is_finite() && e.loss <= cur.loss - ARMIJO_C * step * g2 {
                accepted = Some((cand, e));
                break;
            }
            step *= 0.5;
        }
        let Some((next, e)) = accepted else {
            log::debug!("line search stalled after {epochs} epochs");
            break;
        };
        // Barzilai-Borwein step for the next iteration.
        let s: f64 = (&next.w - &layer.w)
            .iter()
            .chain((&next.b - &layer.b).iter())
            .map(|v| v * v)
            .sum();
        let sy: f64 = (&next.w - &layer.w)
            .iter()
            .zip((&e.gw - &cur.gw).iter())
            .chain((&next.b - &layer.b).iter().zip((&e.gb - &cur.gb).iter()))
            .map(|(a, b)| a * b)
            .sum();
        step = if sy > 0.0 {
            (s / sy).clamp(1e-10, 1e10)
        } else {
            step * 2.0
        };
        layer = next;
        cur = e;
        epochs += 1;
        history.push(cur.loss);
    }

    if layer.w.iter().chain(layer.b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Training("logistic regression diverged".into()));
    }
    Ok(TrainedModel {
        spec: ModelSpec::Linear(spec.clone()),
        labels: labels.to_vec(),
        layers: vec![layer],
        history,
        best_epoch: epochs,
        epochs,
    })
}
