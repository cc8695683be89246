use std::io::Write;

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stacking::ColumnRange;

pub const DEFAULT_BINS: usize = 16;

/// Equal-frequency bin of every value. Rank `r` of `n` goes to
/// `⌊r·bins/n⌋`; tied values all take the bin of their first rank.
pub fn equal_frequency_bins(column: &[f64], bins: usize) -> Vec<usize> {
    let n = column.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| column[a].total_cmp(&column[b]).then(a.cmp(&b)));
    let mut out = vec![0; n];
    let mut group_bin = 0;
    for (rank, &i) in order.iter().enumerate() {
        if rank == 0 || column[i] != column[order[rank - 1]] {
            group_bin = rank * bins / n;
        }
        out[i] = group_bin;
    }
    out
}

/// Plug-in mutual information (nats) between two discrete sequences.
pub fn discrete_mutual_information(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut joint = vec![0u64; ka * kb];
    let mut pa = vec![0u64; ka];
    let mut pb = vec![0u64; kb];
    for (&x, &y) in a.iter().zip(b) {
        joint[x * kb + y] += 1;
        pa[x] += 1;
        pb[y] += 1;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for x in 0..ka {
        for y in 0..kb {
            let c = joint[x * kb + y];
            if c > 0 {
                let c = c as f64;
                mi += c / nf * (c * nf / (pa[x] as f64 * pb[y] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

/// MI between a real column (equal-frequency binned) and class ids.
pub fn mutual_information(column: &[f64], labels: &[usize], bins: usize) -> Result<f64> {
    if column.len() != labels.len() {
        return Err(Error::Parameter(format!(
            "column has {} values but there are {} labels",
            column.len(),
            labels.len()
        )));
    }
    if column.len() < 2 {
        return Err(Error::Parameter(
            "mutual information needs at least 2 rows".into(),
        ));
    }
    if bins < 2 {
        return Err(Error::Parameter(format!(
            "need at least 2 bins, got {bins}"
        )));
    }
    if column.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("column contains non-finite values".into()));
    }
    Ok(discrete_mutual_information(
        &equal_frequency_bins(column, bins),
        labels,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureRanking {
    /// MI score of every column, in column order.
    pub scores: Vec<f64>,
    /// Columns by descending score, ties by column index.
    pub order: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubspaceCount {
    pub block: String,
    pub count: usize,
}

pub fn rank_features(
    matrix: &Array2<f64>,
    labels: &[usize],
    bins: usize,
) -> Result<FeatureRanking> {
    let scores = (0..matrix.ncols())
        .into_par_iter()
        .map(|j| mutual_information(&matrix.column(j).to_vec(), labels, bins))
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok(FeatureRanking { scores, order })
}

/// Ranks all columns and counts how many of the top `k` fall in each block.
/// `k` larger than the column count is clamped.
pub fn rank_and_attribute(
    matrix: &Array2<f64>,
    attribution: &[ColumnRange],
    labels: &[usize],
    k: usize,
    bins: usize,
) -> Result<(FeatureRanking, Vec<SubspaceCount>)> {
    let mut next = 0;
    for r in attribution {
        if r.start != next || r.end <= r.start {
            return Err(Error::Composition(format!(
                "attribution range of `{}` is not contiguous",
                r.block
            )));
        }
        next = r.end;
    }
    if next != matrix.ncols() {
        return Err(Error::Composition(format!(
            "attribution covers {next} columns, matrix has {}",
            matrix.ncols()
        )));
    }
    let k = if k > matrix.ncols() {
        log::warn!("top-k of {k} exceeds {} columns; clamped", matrix.ncols());
        matrix.ncols()
    } else {
        k
    };
    let ranking = rank_features(matrix, labels, bins)?;
    let counts = attribution
        .iter()
        .map(|r| SubspaceCount {
            block: r.block.clone(),
            count: ranking.order[..k]
                .iter()
                .filter(|&&c| r.start <= c && c < r.end)
                .count(),
        })
        .collect();
    Ok((ranking, counts))
}

pub fn write_radial_csv<W: Write>(counts: &[SubspaceCount], mut w: W) -> std::io::Result<()> {
    writeln!(w, "block,count")?;
    for c in counts {
        writeln!(w, "{},{}", c.block, c.count)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn label_copy_gives_ln2() {
        let y: Vec<usize> = (0..1000).map(|i| i % 2).collect();
        let col: Vec<f64> = y.iter().map(|&c| c as f64).collect();
        let mi = mutual_information(&col, &y, DEFAULT_BINS).unwrap();
        assert!((mi - std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn independent_column_near_zero() {
        let mut rng = seed::rng(1, "mi-indep", 0);
        let y: Vec<usize> = (0..10_000).map(|_| rng.gen_range(0..2)).collect();
        let col: Vec<f64> = (0..10_000).map(|_| rng.gen::<f64>()).collect();
        assert!(mutual_information(&col, &y, DEFAULT_BINS).unwrap() < 0.005);
    }

    #[test]
    fn constant_column_and_bad_input() {
        assert_eq!(
            mutual_information(&[3.0; 8], &[0, 1, 0, 1, 0, 1, 0, 1], 16).unwrap(),
            0.0
        );
        assert!(mutual_information(&[1.0], &[0], 16).is_err());
        assert!(mutual_information(&[1.0, 2.0], &[0, 1], 1).is_err());
        assert!(mutual_information(&[1.0, 2.0], &[0], 4).is_err());
    }

    #[test]
    fn ties_share_first_rank_bin() {
        assert_eq!(
            equal_frequency_bins(&[5.0, 1.0, 5.0, 5.0], 4),
            vec![1, 0, 1, 1]
        );
        assert_eq!(
            equal_frequency_bins(&[4.0, 3.0, 2.0, 1.0], 2),
            vec![1, 1, 0, 0]
        );
    }

    fn two_block_case() -> (Array2<f64>, Vec<ColumnRange>, Vec<usize>) {
        let n = 200;
        let y: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let mut rng = seed::rng(4, "mi-blocks", 0);
        let m = Array2::from_shape_fn((n, 20), |(i, j)| {
            if j < 10 {
                y[i] as f64
            } else {
                rng.gen::<f64>()
            }
        });
        let attr = vec![
            ColumnRange {
                block: "A".into(),
                start: 0,
                end: 10,
            },
            ColumnRange {
                block: "B".into(),
                start: 10,
                end: 20,
            },
        ];
        (m, attr, y)
    }

    #[test]
    fn attribution_of_label_copies() {
        let (m, attr, y) = two_block_case();
        let (_, counts) = rank_and_attribute(&m, &attr, &y, 10, DEFAULT_BINS).unwrap();
        assert_eq!(
            counts,
            vec![
                SubspaceCount {
                    block: "A".into(),
                    count: 10
                },
                SubspaceCount {
                    block: "B".into(),
                    count: 0
                },
            ]
        );
        let (_, all) = rank_and_attribute(&m, &attr, &y, 500, DEFAULT_BINS).unwrap();
        assert_eq!(
            all.iter().map(|c| c.count).collect::<Vec<_>>(),
            vec![10, 10]
        );
        let (_, none) = rank_and_attribute(&m, &attr, &y, 0, DEFAULT_BINS).unwrap();
        assert!(none.iter().all(|c| c.count == 0));
        let mut out = Vec::new();
        write_radial_csv(&counts, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "block,count\nA,10\nB,0\n");
    }

    #[test]
    fn gapped_attribution_rejected() {
        let (m, mut attr, y) = two_block_case();
        attr[1].start = 11;
        assert!(rank_and_attribute(&m, &attr, &y, 5, DEFAULT_BINS).is_err());
    }

    proptest! {
        #[test]
        fn mi_is_symmetric(pairs in proptest::collection::vec((0usize..4, 0usize..3), 2..60)) {
            let (a, b): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
            let ab = discrete_mutual_information(&a, &b);
            let ba = discrete_mutual_information(&b, &a);
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!(ab >= 0.0);
        }

        #[test]
        fn self_mi_is_bin_entropy(col in proptest::collection::vec(-5.0f64..5.0, 2..80)) {
            let bins = equal_frequency_bins(&col, 8);
            let n = bins.len() as f64;
            let mut counts = std::collections::HashMap::new();
            for &b in &bins { *counts.entry(b).or_insert(0usize) += 1; }
            let h: f64 = counts.values().map(|&c| { let p = c as f64 / n; -p * p.ln() }).sum();
            prop_assert!((discrete_mutual_information(&bins, &bins) - h).abs() < 1e-12);
        }
    }
}
