use std::io::Write;

use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::stratified_indices;
use crate::error::{Error, Result};
use crate::learners::{evaluate, train_logreg, Averaging, LinearModelSpec, MetricsRecord};
use crate::seed;
use crate::stacking::{
    apply_standardizer, compose, fit_standardizer, to_f64, BlockRegistry, RepresentationBlock,
};

/// Largest block count accepted by the exhaustive enumeration.
pub const MAX_ABLATION_BLOCKS: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AblationConfig {
    pub sample_fraction: f64,
    /// Training splits smaller than this are used whole.
    pub min_rows_for_sampling: usize,
    /// Inverse regularization strengths; each maps to `λ = 1/(C·n)`.
    pub c_grid: Vec<f64>,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self {
            sample_fraction: 0.1,
            min_rows_for_sampling: 1000,
            c_grid: vec![1.0, 0.1, 0.01, 0.001],
            max_epochs: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRecord {
    /// Bit `i` set when the `i`-th registered block is in the subset.
    pub bitmask: u64,
    pub blocks: Vec<String>,
    pub dimension: usize,
    pub metrics: Option<MetricsRecord>,
    pub best_c: Option<f64>,
    pub error: Option<String>,
}

/// All non-empty subset masks of `n` blocks, ascending.
pub fn enumerate_subsets(n: usize) -> Result<Vec<u64>> {
    if n == 0 || n > MAX_ABLATION_BLOCKS {
        return Err(Error::Parameter(format!(
            "ablation needs 1..={MAX_ABLATION_BLOCKS} blocks, got {n}"
        )));
    }
    Ok((1..(1u64 << n)).collect())
}

pub fn subset_names(mask: u64, names: &[&str]) -> Vec<String> {
    names
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, n)| n.to_string())
        .collect()
}

fn select_rows(registry: &BlockRegistry, rows: &[usize]) -> Result<BlockRegistry> {
    let mut out = BlockRegistry::new();
    for b in registry.blocks() {
        let mut s =
            RepresentationBlock::new(b.name.clone(), b.kind, b.matrix.select(Axis(0), rows))?;
        if let Some(ids) = &b.ids {
            s = s.with_ids(rows.iter().map(|&i| ids[i].clone()).collect())?;
        }
        out.register(s)?;
    }
    Ok(out)
}

struct Fixture<'a> {
    train: &'a BlockRegistry,
    validation: &'a BlockRegistry,
    y_train: &'a [usize],
    y_val: &'a [usize],
    labels: &'a [String],
    averaging: Averaging,
    cfg: &'a AblationConfig,
}

fn run_subset(f: &Fixture, names: &[String]) -> Result<(usize, MetricsRecord, f64)> {
    let tr = compose(names, f.train)?;
    let va = compose(names, f.validation)?;
    let dimension = tr.matrix.ncols();
    let xt: Array2<f64> = to_f64(&tr.matrix);
    let st = fit_standardizer(&xt)?;
    let xt = apply_standardizer(&st, &xt)?;
    let xv = apply_standardizer(&st, &to_f64(&va.matrix))?;
    let n = xt.nrows() as f64;
    let mut best: Option<(MetricsRecord, f64)> = None;
    for &c in &f.cfg.c_grid {
        let spec = LinearModelSpec {
            max_epochs: f.cfg.max_epochs,
            ..LinearModelSpec::logreg(1.0 / (c * n))
        };
        let model = train_logreg(&xt, f.y_train, f.labels, &spec)?;
        let m = evaluate(&model, &xv, f.y_val, f.averaging)?;
        if best.as_ref().is_none_or(|(b, _)| m.f1 > b.f1) {
            best = Some((m, c));
        }
    }
    let (m, c) = best.ok_or_else(|| Error::Parameter("empty C grid".into()))?;
    Ok((dimension, m, c))
}

/// Trains a logistic regression on every non-empty block subset and scores
/// it on validation. Records come back in bitmask order; failed subsets are
/// kept with their error.
pub fn ablate(
    train: &BlockRegistry,
    validation: &BlockRegistry,
    y_train: &[usize],
    y_val: &[usize],
    labels: &[String],
    averaging: Averaging,
    cfg: &AblationConfig,
) -> Result<Vec<AblationRecord>> {
    if train.names() != validation.names() {
        return Err(Error::Composition(
            "train and validation registries declare different blocks".into(),
        ));
    }
    if train.rows() != y_train.len() || validation.rows() != y_val.len() {
        return Err(Error::Alignment(
            "block rows and label counts differ".into(),
        ));
    }
    if cfg.c_grid.is_empty() || cfg.c_grid.iter().any(|c| !c.is_finite() || *c <= 0.0) {
        return Err(Error::Parameter(
            "C grid must be non-empty and positive".into(),
        ));
    }
    let masks = enumerate_subsets(train.len())?;

    let sampled;
    let (train, y_train_owned) =
        if cfg.sample_fraction < 1.0 && train.rows() >= cfg.min_rows_for_sampling {
            let idx = stratified_indices(
                y_train,
                cfg.sample_fraction,
                seed::derive(cfg.seed, "ablation-sample", 0),
            )?;
            sampled = select_rows(train, &idx)?;
            (
                &sampled,
                idx.iter().map(|&i| y_train[i]).collect::<Vec<_>>(),
            )
        } else {
            (train, y_train.to_vec())
        };
    let fixture = Fixture {
        train,
        validation,
        y_train: &y_train_owned,
        y_val,
        labels,
        averaging,
        cfg,
    };
    let names = train.names();
    let dims: Vec<usize> = train.blocks().iter().map(|b| b.dim()).collect();

    Ok(masks
        .par_iter()
        .map(|&mask| {
            let blocks = subset_names(mask, &names);
            let dimension = (0..dims.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| dims[i])
                .sum();
            match run_subset(&fixture, &blocks) {
                Ok((dim, m, c)) => {
                    debug_assert_eq!(dim, dimension);
                    AblationRecord {
                        bitmask: mask,
                        blocks,
                        dimension,
                        metrics: Some(m),
                        best_c: Some(c),
                        error: None,
                    }
                }
                Err(e) => {
                    log::warn!("ablation subset {mask} ({}) failed: {e}", blocks.join("+"));
                    AblationRecord {
                        bitmask: mask,
                        blocks,
                        dimension,
                        metrics: None,
                        best_c: None,
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect())
}

/// Successful records by F1, then accuracy (both descending), then bitmask.
pub fn rank_records(records: &[AblationRecord]) -> Vec<&AblationRecord> {
    let mut ok: Vec<&AblationRecord> = records.iter().filter(|r| r.metrics.is_some()).collect();
    ok.sort_by(|a, b| {
        let (ma, mb) = (a.metrics.unwrap(), b.metrics.unwrap());
        mb.f1
            .total_cmp(&ma.f1)
            .then(mb.accuracy.total_cmp(&ma.accuracy))
            .then(a.bitmask.cmp(&b.bitmask))
    });
    ok
}

/// The `n` best records (best first) and the `n` worst (worst first).
pub fn best_and_worst(
    records: &[AblationRecord],
    n: usize,
) -> (Vec<&AblationRecord>, Vec<&AblationRecord>) {
    let ranked = rank_records(records);
    let best = ranked.iter().take(n).copied().collect();
    let worst = ranked.iter().rev().take(n).copied().collect();
    (best, worst)
}

fn write_row<W: Write>(w: &mut W, r: &AblationRecord) -> std::io::Result<()> {
    write!(w, "{}\t{}\t{}", r.bitmask, r.blocks.join("+"), r.dimension)?;
    match r.metrics {
        Some(m) => writeln!(
            w,
            "\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
            m.accuracy, m.f1, m.precision, m.recall
        ),
        None => writeln!(w, "\tNA\tNA\tNA\tNA"),
    }
}

/// Writes `records` in the given order.
pub fn write_ablation_tsv<'a, W: Write>(
    records: impl IntoIterator<Item = &'a AblationRecord>,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(
        w,
        "bitmask\tblocks\tdimension\taccuracy\tf1\tprecision\trecall"
    )?;
    for r in records {
        write_row(&mut w, r)?;
    }
    Ok(())
}

/// Full table: ranked records, then failed ones in bitmask order.
pub fn write_ablation_report<W: Write>(records: &[AblationRecord], w: W) -> std::io::Result<()> {
    let failed = records.iter().filter(|r| r.metrics.is_none());
    write_ablation_tsv(rank_records(records).into_iter().chain(failed), w)
}

pub fn write_scatter_csv<W: Write>(records: &[AblationRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "dimension,f1")?;
    for r in records {
        if let Some(m) = r.metrics {
            writeln!(w, "{},{:.6}", r.dimension, m.f1)?;
        }
    }
    Ok(())
}
