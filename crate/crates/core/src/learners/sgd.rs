use ndarray::Array2;
use rand::seq::SliceRandom;

use super::{check_training_data, Family, Layer, LinearModelSpec, Loss, ModelSpec, TrainedModel};
use crate::error::{Error, Result};
use crate::seed;

/// d loss / d margin-score for target `t ∈ {-1, +1}`.
fn loss_grad(loss: Loss, t: f64, z: f64) -> f64 {
    match loss {
        Loss::Log => -t / (1.0 + (t * z).exp()),
        Loss::Hinge if t * z < 1.0 => -t,
        Loss::Hinge => 0.0,
    }
}

fn loss_value(loss: Loss, t: f64, z: f64) -> f64 {
    match loss {
        Loss::Log => {
            let m = -t * z;
            if m > 0.0 {
                m + (-m).exp().ln_1p()
            } else {
                m.exp().ln_1p()
            }
        }
        Loss::Hinge => (1.0 - t * z).max(0.0),
    }
}

/// One-vs-rest linear classifiers trained by per-sample SGD with an
/// elastic-net penalty. The L2 part shrinks weights each step; the L1 part is
/// applied as a soft threshold, which yields exact zeros.
pub fn train_sgd(
    x: &Array2<f64>,
    y: &[usize],
    labels: &[String],
    spec: &LinearModelSpec,
) -> Result<TrainedModel> {
    if spec.family != Family::Sgd {
        return Err(Error::Parameter("train_sgd needs an sgd spec".into()));
    }
    spec.validate()?;
    check_training_data(x, y, labels)?;
    let (n, d) = x.dim();
    let k = labels.len();
    let mut layer = Layer::zeros(d, k);
    let l2 = spec.alpha * (1.0 - spec.l1_ratio);
    let l1 = spec.alpha * spec.l1_ratio;
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(spec.max_epochs);
    let mut t: u64 = 0;

    for epoch in 0..spec.max_epochs {
        order.shuffle(&mut seed::rng(spec.seed, "sgd-shuffle", epoch as u64));
        let mut epoch_loss = 0.0;
        for &i in &order {
            t += 1;
            let eta = spec.learning_rate(t);
            let xi = x.row(i);
            for c in 0..k {
                let target = if y[i] == c { 1.0 } else { -1.0 };
                let mut w = layer.w.column_mut(c);
                let z = xi.dot(&w) + layer.b[c];
                epoch_loss += loss_value(spec.loss, target, z);
                let g = loss_grad(spec.loss, target, z);
                let shrink = 1.0 - eta * l2;
                let thresh = eta * l1;
                for (wj, &xj) in w.iter_mut().zip(xi.iter()) {
                    let v = *wj * shrink - eta * g * xj;
                    *wj = v.signum() * (v.abs() - thresh).max(0.0);
                }
                layer.b[c] -= eta * g;
            }
        }
        let mean = epoch_loss / (n * k) as f64;
        if !mean.is_finite() {
            return Err(Error::Training(format!(
                "non-finite SGD loss at epoch {}",
                epoch + 1
            )));
        }
        history.push(mean);
    }

    let epochs = history.len();
    Ok(TrainedModel {
        spec: ModelSpec::Linear(spec.clone()),
        labels: labels.to_vec(),
        layers: vec![layer],
        history,
        best_epoch: epochs,
        epochs,
    })
}
