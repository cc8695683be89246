use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::SparseRows;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassWords {
    pub class: String,
    pub words: Vec<(String, f64)>,
    /// The class had fewer than two documents, so every variance is 0.
    pub flagged: bool,
}

/// Per-class population variance of each word's TF-IDF value.
///
/// Returns one `vocabulary.len()`-long vector per class; rows of classes with
/// fewer than two documents are all zero.
pub fn class_word_variance(
    tfidf: &SparseRows,
    labels: &[usize],
    n_classes: usize,
) -> Result<Vec<Vec<f64>>> {
    if tfidf.n_rows() != labels.len() {
        return Err(Error::Parameter(format!(
            "{} TF-IDF rows but {} labels",
            tfidf.n_rows(),
            labels.len()
        )));
    }
    let v = tfidf.n_cols;
    let mut counts = vec![0usize; n_classes];
    let mut sums = vec![vec![0.0; v]; n_classes];
    for (row, &c) in tfidf.rows.iter().zip(labels) {
        if c >= n_classes {
            return Err(Error::Parameter(format!(
                "class id {c} outside the label set"
            )));
        }
        counts[c] += 1;
        for &(j, x) in row {
            sums[c][j as usize] += x;
        }
    }
    let means: Vec<Vec<f64>> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &n)| {
            s.iter()
                .map(|x| if n > 0 { x / n as f64 } else { 0.0 })
                .collect()
        })
        .collect();
    // Second pass: squared deviations of stored entries; implicit zeros are
    // added as (n - nnz)·mean².
    let mut sq = vec![vec![0.0; v]; n_classes];
    let mut nnz = vec![vec![0usize; v]; n_classes];
    for (row, &c) in tfidf.rows.iter().zip(labels) {
        for &(j, x) in row {
            let j = j as usize;
            sq[c][j] += (x - means[c][j]).powi(2);
            nnz[c][j] += 1;
        }
    }
    Ok((0..n_classes)
        .map(|c| {
            let n = counts[c];
            if n < 2 {
                return vec![0.0; v];
            }
            (0..v)
                .map(|j| (sq[c][j] + (n - nnz[c][j]) as f64 * means[c][j].powi(2)) / n as f64)
                .collect()
        })
        .collect())
}

/// Top `top_k` words per class by descending variance (ties lexicographic).
/// Zero-variance words are never reported.
pub fn class_variance_words(
    tfidf: &SparseRows,
    vocabulary: &[String],
    labels: &[usize],
    class_names: &[String],
    top_k: usize,
) -> Result<Vec<ClassWords>> {
    if vocabulary.is_empty() {
        return Err(Error::Parameter("empty vocabulary".into()));
    }
    if vocabulary.len() != tfidf.n_cols {
        return Err(Error::Parameter(format!(
            "vocabulary has {} words, matrix has {} columns",
            vocabulary.len(),
            tfidf.n_cols
        )));
    }
    let variances = class_word_variance(tfidf, labels, class_names.len())?;
    let mut out = Vec::with_capacity(class_names.len());
    for (c, name) in class_names.iter().enumerate() {
        let n = labels.iter().filter(|&&l| l == c).count();
        if n == 0 {
            return Err(Error::Parameter(format!("class `{name}` has no documents")));
        }
        let flagged = n < 2;
        if flagged {
            log::warn!("class `{name}` has a single document; its word variances are 0");
        }
        let mut words: Vec<(String, f64)> = vocabulary
            .iter()
            .zip(&variances[c])
            .filter(|(_, &var)| var > 0.0)
            .map(|(w, &var)| (w.clone(), var))
            .collect();
        words.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        words.truncate(top_k);
        out.push(ClassWords {
            class: name.clone(),
            words,
            flagged,
        });
    }
    Ok(out)
}

pub fn write_variance_words_tsv<W: Write>(classes: &[ClassWords], mut w: W) -> std::io::Result<()> {
    writeln!(w, "class\tword\tvariance")?;
    for c in classes {
        for (word, var) in &c.words {
            writeln!(w, "{}\t{}\t{:.10e}", c.class, word, var)?;
        }
    }
    Ok(())
}
