use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;

use super::{
    argmax_rows, check_training_data, forward, metrics, softmax_rows, Averaging, Layer, MlpSpec,
    ModelSpec, TrainedModel,
};
use crate::error::{Error, Result};
use crate::linalg::standard_normal;
use crate::seed;

const SELU_LAMBDA: f64 = 1.050_700_987_355_480_5;
const SELU_ALPHA: f64 = 1.673_263_242_354_377_3;
const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

pub fn selu(x: f64) -> f64 {
    if x > 0.0 {
        SELU_LAMBDA * x
    } else {
        SELU_LAMBDA * SELU_ALPHA * x.exp_m1()
    }
}

fn selu_grad(x: f64) -> f64 {
    if x > 0.0 {
        SELU_LAMBDA
    } else {
        SELU_LAMBDA * SELU_ALPHA * x.exp()
    }
}

/// LeCun-normal weights and zero biases for input → hidden… → classes.
pub fn init_layers(spec: &MlpSpec, n_inputs: usize, n_classes: usize) -> Result<Vec<Layer>> {
    let mut sizes = vec![n_inputs];
    sizes.extend(spec.hidden_sizes()?);
    sizes.push(n_classes);
    let mut rng = seed::rng(spec.seed, "mlp-init", 0);
    Ok(sizes
        .windows(2)
        .map(|w| {
            let scale = (1.0 / w[0] as f64).sqrt();
            Layer {
                w: Array2::from_shape_simple_fn((w[0], w[1]), || standard_normal(&mut rng) * scale),
                b: Array1::zeros(w[1]),
            }
        })
        .collect())
}

/// Mean softmax cross-entropy and its gradient for every layer.
/// `masks` holds one scaled dropout mask per hidden layer.
fn loss_and_grad(
    layers: &[Layer],
    x: &Array2<f64>,
    y: &[usize],
    masks: Option<&[Array2<f64>]>,
) -> (f64, Vec<Layer>) {
    let n = x.nrows() as f64;
    let mut acts = vec![x.clone()];
    let mut pre = Vec::with_capacity(layers.len());
    let last = layers.len() - 1;
    for (l, layer) in layers.iter().enumerate() {
        let z = layer.apply(&acts[l]);
        if l < last {
            let mut a = z.mapv(selu);
            if let Some(m) = masks {
                a *= &m[l];
            }
            pre.push(z);
            acts.push(a);
        } else {
            pre.push(z);
        }
    }
    let logits = &pre[last];
    let mut p = logits.clone();
    softmax_rows(&mut p);
    let mut loss = 0.0;
    for (i, row) in logits.rows().into_iter().enumerate() {
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        loss += lse - row[y[i]];
        p[[i, y[i]]] -= 1.0;
    }
    p /= n;

    let mut grads = Vec::with_capacity(layers.len());
    let mut dz = p;
    for l in (0..layers.len()).rev() {
        grads.push(Layer {
            w: acts[l].t().dot(&dz),
            b: dz.sum_axis(Axis(0)),
        });
        if l > 0 {
            let mut da = dz.dot(&layers[l].w.t());
            if let Some(m) = masks {
                da *= &m[l - 1];
            }
            da.zip_mut_with(&pre[l - 1], |g, &z| *g *= selu_grad(z));
            dz = da;
        }
    }
    grads.reverse();
    (loss / n, grads)
}

/// Loss and analytic gradients with dropout disabled.
pub fn mlp_loss_and_grad(layers: &[Layer], x: &Array2<f64>, y: &[usize]) -> (f64, Vec<Layer>) {
    loss_and_grad(layers, x, y, None)
}

struct Adam {
    m: Vec<Layer>,
    v: Vec<Layer>,
    t: i32,
}

impl Adam {
    fn new(layers: &[Layer]) -> Self {
        let zeros = || {
            layers
                .iter()
                .map(|l| Layer::zeros(l.w.nrows(), l.w.ncols()))
                .collect()
        };
        Self {
            m: zeros(),
            v: zeros(),
            t: 0,
        }
    }

    fn step(&mut self, layers: &mut [Layer], grads: &[Layer], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - BETA1.powi(self.t);
        let c2 = 1.0 - BETA2.powi(self.t);
        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            *m = BETA1 * *m + (1.0 - BETA1) * g;
            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
        };
        for (((layer, g), m), v) in layers
            .iter_mut()
            .zip(grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            ndarray::Zip::from(&mut layer.w)
                .and(&mut m.w)
                .and(&mut v.w)
                .and(&g.w)
                .for_each(|p, m, v, &g| update(p, m, v, g));
            ndarray::Zip::from(&mut layer.b)
                .and(&mut m.b)
                .and(&mut v.b)
                .and(&g.b)
                .for_each(|p, m, v, &g| update(p, m, v, g));
        }
    }
}

fn dropout_masks<R: Rng>(rng: &mut R, rows: usize, widths: &[usize], p: f64) -> Vec<Array2<f64>> {
    let keep = 1.0 - p;
    widths
        .iter()
        .map(|&w| {
            Array2::from_shape_simple_fn((rows, w), || {
                if rng.gen::<f64>() < keep {
                    1.0 / keep
                } else {
                    0.0
                }
            })
        })
        .collect()
}

/// Minibatch Adam with early stopping on weighted validation F1.
///
/// Training stops once `patience` epochs pass without a strict improvement,
/// and the weights of the best epoch are restored.
pub fn train_mlp(
    x: &Array2<f64>,
    y: &[usize],
    labels: &[String],
    spec: &MlpSpec,
    validation: (&Array2<f64>, &[usize]),
) -> Result<TrainedModel> {
    spec.validate()?;
    check_training_data(x, y, labels)?;
    let (xv, yv) = validation;
    if xv.nrows() == 0 || xv.nrows() != yv.len() {
        return Err(Error::Training(
            "validation set is empty or misaligned".into(),
        ));
    }
    if xv.ncols() != x.ncols() {
        return Err(Error::Training(
            "validation and training widths differ".into(),
        ));
    }
    let hidden = spec.hidden_sizes()?;
    let mut layers = init_layers(spec, x.ncols(), labels.len())?;
    let mut adam = Adam::new(&layers);
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    let mut history = Vec::new();
    let mut best = (f64::NEG_INFINITY, 0usize, layers.clone());
    let mut epochs = 0;

    for epoch in 1..=spec.max_epochs {
        epochs = epoch;
        order.shuffle(&mut seed::rng(spec.seed, "mlp-shuffle", epoch as u64));
        let mut drop_rng = seed::rng(spec.seed, "mlp-dropout", epoch as u64);
        for (bi, batch) in order.chunks(spec.batch_size).enumerate() {
            let xb = x.select(Axis(0), batch);
            let yb: Vec<usize> = batch.iter().map(|&i| y[i]).collect();
            let masks = (spec.dropout > 0.0)
                .then(|| dropout_masks(&mut drop_rng, batch.len(), &hidden, spec.dropout));
            let (loss, grads) = loss_and_grad(&layers, &xb, &yb, masks.as_deref());
            if !loss.is_finite() {
                return Err(Error::Training(format!(
                    "non-finite loss at epoch {epoch}, batch {bi}"
                )));
            }
            adam.step(&mut layers, &grads, spec.lr);
        }
        let pred = argmax_rows(&forward(&layers, xv));
        let f1 = metrics(yv, &pred, labels.len(), Averaging::Weighted)?.f1;
        history.push(f1);
        if f1 > best.0 {
            best = (f1, epoch, layers.clone());
        } else if epoch - best.1 >= spec.patience {
            break;
        }
    }

    let (_, best_epoch, best_layers) = best;
    if best_layers
        .iter()
        .any(|l| l.w.iter().chain(l.b.iter()).any(|v| !v.is_finite()))
    {
        return Err(Error::Training("network weights became non-finite".into()));
    }
    Ok(TrainedModel {
        spec: ModelSpec::Mlp(spec.clone()),
        labels: labels.to_vec(),
        layers: best_layers,
        history,
        best_epoch,
        epochs,
    })
}
