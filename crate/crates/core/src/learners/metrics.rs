use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How per-class precision, recall and F1 are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum Averaging {
    /// Scores of the positive class only.
    Binary {
        positive: usize,
    },
    Macro,
    /// Per-class scores weighted by true-class support.
    Weighted,
}

impl Averaging {
    pub fn name(self) -> &'static str {
        match self {
            Averaging::Binary { .. } => "binary",
            Averaging::Macro => "macro",
            Averaging::Weighted => "weighted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub accuracy: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub averaging: Averaging,
    /// Some per-class ratio had a zero denominator and was set to 0.
    pub degenerate: bool,
}

/// Confusion counts indexed `[true][predicted]`.
pub fn confusion_matrix(
    y_true: &[usize],
    y_pred: &[usize],
    n_classes: usize,
) -> Result<Vec<Vec<u64>>> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Evaluation(format!(
            "{} true labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mut m = vec![vec![0u64; n_classes]; n_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= n_classes || p >= n_classes {
            return Err(Error::Evaluation(format!(
                "class id {} outside the {n_classes}-class label set",
                t.max(p)
            )));
        }
        m[t][p] += 1;
    }
    Ok(m)
}

fn ratio(num: u64, den: u64, degenerate: &mut bool) -> f64 {
    if den == 0 {
        *degenerate = true;
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn metrics(
    y_true: &[usize],
    y_pred: &[usize],
    n_classes: usize,
    averaging: Averaging,
) -> Result<MetricsRecord> {
    if y_true.is_empty() {
        return Err(Error::Evaluation("no samples to evaluate".into()));
    }
    let cm = confusion_matrix(y_true, y_pred, n_classes)?;
    let n = y_true.len() as f64;
    let correct: u64 = (0..n_classes).map(|c| cm[c][c]).sum();
    let mut degenerate = false;

    let mut per_class = Vec::with_capacity(n_classes);
    for c in 0..n_classes {
        let tp = cm[c][c];
        let support: u64 = cm[c].iter().sum();
        let predicted: u64 = (0..n_classes).map(|t| cm[t][c]).sum();
        let mut flag = false;
        let p = ratio(tp, predicted, &mut flag);
        let r = ratio(tp, support, &mut flag);
        let f = if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        };
        per_class.push((p, r, f, support, predicted, flag));
    }

    let (precision, recall, f1) = match averaging {
        Averaging::Binary { positive } => {
            let Some(&(p, r, f, _, _, flag)) = per_class.get(positive) else {
                return Err(Error::Evaluation(format!(
                    "positive class {positive} out of range"
                )));
            };
            degenerate |= flag;
            (p, r, f)
        }
        Averaging::Macro => {
            let present: Vec<_> = per_class.iter().filter(|c| c.3 > 0 || c.4 > 0).collect();
            degenerate |= present.iter().any(|c| c.5);
            let k = present.len() as f64;
            (
                present.iter().map(|c| c.0).sum::<f64>() / k,
                present.iter().map(|c| c.1).sum::<f64>() / k,
                present.iter().map(|c| c.2).sum::<f64>() / k,
            )
        }
        Averaging::Weighted => {
            degenerate |= per_class.iter().any(|c| c.3 > 0 && c.5);
            let w = |c: &(f64, f64, f64, u64, u64, bool)| c.3 as f64 / n;
            (
                per_class.iter().map(|c| w(c) * c.0).sum(),
                per_class.iter().map(|c| w(c) * c.1).sum(),
                per_class.iter().map(|c| w(c) * c.2).sum(),
            )
        }
    };
    Ok(MetricsRecord {
        accuracy: correct as f64 / n,
        f1,
        precision,
        recall,
        averaging,
        degenerate,
    })
}
