//! Truncated SVD for tall/wide TF-IDF matrices.
//!
//! Two routes share one core: a one-sided (Hestenes) Jacobi SVD. The exact
//! route applies it to the whole matrix; the randomized route first projects
//! onto a power-iterated Gaussian range sketch and applies it to the small
//! projected factor.

use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seed;

/// Row-compressed sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows {
    pub n_cols: usize,
    pub rows: Vec<Vec<(u32, f64)>>,
}

impl SparseRows {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut d = Array2::zeros((self.n_rows(), self.n_cols));
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                d[[i, j as usize]] = v;
            }
        }
        d
    }

    fn transpose(&self) -> SparseRows {
        let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); self.n_cols];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                cols[j as usize].push((i as u32, v));
            }
        }
        SparseRows {
            n_cols: self.n_rows(),
            rows: cols,
        }
    }

    /// `self · cols`, where `cols` holds the columns of a dense `n_cols × l` matrix.
    fn mul_columns(&self, cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let l = cols.len();
        // Row-major product, then split into columns.
        let rows: Vec<Vec<f64>> = self
            .rows
            .par_iter()
            .map(|row| {
                let mut out = vec![0.0; l];
                for &(j, v) in row {
                    for (o, c) in out.iter_mut().zip(cols) {
                        *o += v * c[j as usize];
                    }
                }
                out
            })
            .collect();
        (0..l)
            .map(|c| rows.iter().map(|r| r[c]).collect())
            .collect()
    }
}

/// How [`truncated_svd`] factorizes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SvdMethod {
    /// Exact for small matrices, randomized otherwise.
    #[default]
    Auto,
    Exact,
    Randomized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvdConfig {
    pub method: SvdMethod,
    pub power_iterations: usize,
    pub oversampling: usize,
    pub seed: u64,
}

impl Default for SvdConfig {
    fn default() -> Self {
        Self {
            method: SvdMethod::Auto,
            power_iterations: 10,
            oversampling: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSvd {
    /// Non-increasing, strictly positive.
    pub singular_values: Vec<f64>,
    /// `n_cols × rank` right singular vectors (orthonormal columns).
    pub components: Array2<f64>,
    /// Number of components requested; `singular_values.len()` is lower when
    /// the matrix rank is.
    pub requested: usize,
}

const JACOBI_TOL: f64 = 1e-15;
const JACOBI_MAX_SWEEPS: usize = 80;
const RANK_TOL: f64 = 1e-10;

/// Top-`k` right singular vectors and singular values of `a`.
pub fn truncated_svd(a: &SparseRows, k: usize, cfg: &SvdConfig) -> TruncatedSvd {
    let (m, n) = (a.n_rows(), a.n_cols);
    let small = m.min(n);
    let sketch = (k + cfg.oversampling).min(small);
    let exact = match cfg.method {
        SvdMethod::Exact => true,
        SvdMethod::Randomized => false,
        SvdMethod::Auto => small <= 2 * sketch || m * n <= 250_000,
    };
    let (sigma, vectors) = if small == 0 || k == 0 {
        (Vec::new(), Vec::new())
    } else if exact {
        exact_svd(a)
    } else {
        randomized_svd(a, sketch, cfg)
    };

    let top = sigma.first().copied().unwrap_or(0.0);
    let keep = sigma
        .iter()
        .take(k)
        .take_while(|&&s| s > 0.0 && s > top * RANK_TOL)
        .count();
    let mut components = Array2::zeros((n, keep));
    for (c, v) in vectors.iter().take(keep).enumerate() {
        for (r, &x) in v.iter().enumerate() {
            components[[r, c]] = x;
        }
    }
    TruncatedSvd {
        singular_values: sigma[..keep].to_vec(),
        components,
        requested: k,
    }
}

/// Dense variant, mainly for tests and small inputs.
pub fn truncated_svd_dense(a: &Array2<f64>, k: usize, cfg: &SvdConfig) -> TruncatedSvd {
    let sparse = SparseRows {
        n_cols: a.ncols(),
        rows: a
            .rows()
            .into_iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(j, &v)| (j as u32, v))
                    .collect()
            })
            .collect(),
    };
    truncated_svd(&sparse, k, cfg)
}

/// Returns (σ descending, right singular vectors) for all of `a`.
fn exact_svd(a: &SparseRows) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (m, n) = (a.n_rows(), a.n_cols);
    if n <= m {
        // A·J = W with orthogonal columns, so A = U Σ Jᵀ and V = J.
        let mut cols = vec![vec![0.0; m]; n];
        for (i, row) in a.rows.iter().enumerate() {
            for &(j, v) in row {
                cols[j as usize][i] = v;
            }
        }
        let mut rot: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        jacobi(&mut cols, Some(&mut rot));
        let sigma: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
        sorted_pairs(sigma, rot)
    } else {
        // Aᵀ·J = W = V Σ.
        let mut cols: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let mut c = vec![0.0; n];
                for &(j, v) in &a.rows[i] {
                    c[j as usize] = v;
                }
                c
            })
            .collect();
        jacobi(&mut cols, None);
        normalized_pairs(cols)
    }
}

fn randomized_svd(a: &SparseRows, sketch: usize, cfg: &SvdConfig) -> (Vec<f64>, Vec<Vec<f64>>) {
    let at = a.transpose();
    let mut rng = seed::rng(cfg.seed, "randomized_svd", 0);
    let omega: Vec<Vec<f64>> = (0..sketch)
        .map(|_| (0..a.n_cols).map(|_| standard_normal(&mut rng)).collect())
        .collect();
    let mut q = a.mul_columns(&omega);
    orthonormalize(&mut q);
    for _ in 0..cfg.power_iterations {
        let mut z = at.mul_columns(&q);
        orthonormalize(&mut z);
        q = a.mul_columns(&z);
        orthonormalize(&mut q);
    }
    // Bᵀ = Aᵀ Q; its Jacobi-orthogonalized columns are V Σ.
    let mut bt = at.mul_columns(&q);
    jacobi(&mut bt, None);
    normalized_pairs(bt)
}

pub(crate) fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; u1 in (0, 1] keeps the log finite.
    let u1: f64 = 1.0 - rng.gen_range(0.0..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Modified Gram-Schmidt, applied twice. Columns that vanish are zeroed.
pub fn orthonormalize(cols: &mut [Vec<f64>]) {
    for _ in 0..2 {
        for j in 0..cols.len() {
            let (head, tail) = cols.split_at_mut(j + 1);
            let qj = &mut head[j];
            let nrm = norm(qj);
            if nrm > 1e-300 {
                qj.iter_mut().for_each(|x| *x /= nrm);
            } else {
                qj.iter_mut().for_each(|x| *x = 0.0);
                continue;
            }
            let qj = &*qj;
            tail.par_iter_mut().for_each(|c| {
                let p = dot(qj, c);
                c.iter_mut().zip(qj).for_each(|(x, q)| *x -= p * q);
            });
        }
    }
}

/// One-sided Jacobi: rotates column pairs until all are mutually orthogonal.
/// When `rot` is given, the same rotations are accumulated into it.
fn jacobi(cols: &mut Vec<Vec<f64>>, mut rot: Option<&mut Vec<Vec<f64>>>) {
    let n = cols.len();
    if n < 2 {
        return;
    }
    // Round-robin schedule over an even number of slots; slot `n` is a bye.
    let slots = n + n % 2;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for round in 0..slots - 1 {
            let pairs: Vec<(usize, usize)> = (0..slots / 2)
                .map(|p| round_robin_pair(slots, round, p))
                .filter(|&(i, j)| i < n && j < n)
                .collect();

            let mut work: Vec<(
                usize,
                usize,
                Vec<f64>,
                Vec<f64>,
                Option<(Vec<f64>, Vec<f64>)>,
            )> = pairs
                .iter()
                .map(|&(i, j)| {
                    let ci = std::mem::take(&mut cols[i]);
                    let cj = std::mem::take(&mut cols[j]);
                    let r = rot
                        .as_deref_mut()
                        .map(|r| (std::mem::take(&mut r[i]), std::mem::take(&mut r[j])));
                    (i, j, ci, cj, r)
                })
                .collect();
            let any = work
                .par_iter_mut()
                .map(|(_, _, ci, cj, r)| rotate_pair(ci, cj, r.as_mut()))
                .reduce(|| false, |a, b| a || b);
            rotated |= any;
            for (i, j, ci, cj, r) in work {
                cols[i] = ci;
                cols[j] = cj;
                if let (Some(rot), Some((ri, rj))) = (rot.as_deref_mut(), r) {
                    rot[i] = ri;
                    rot[j] = rj;
                }
            }
        }
        if !rotated {
            return;
        }
    }
    log::warn!("jacobi svd did not converge in {JACOBI_MAX_SWEEPS} sweeps");
}

fn round_robin_pair(slots: usize, round: usize, p: usize) -> (usize, usize) {
    // Circle method: slot 0 fixed, the others rotate.
    let m = slots - 1;
    let pos = |k: usize| if k == 0 { 0 } else { 1 + (k - 1 + round) % m };
    let (a, b) = (pos(p), pos(slots - 1 - p));
    (a.min(b), a.max(b))
}

fn rotate_pair(a: &mut [f64], b: &mut [f64], rot: Option<&mut (Vec<f64>, Vec<f64>)>) -> bool {
    let alpha = dot(a, a);
    let beta = dot(b, b);
    let gamma = dot(a, b);
    if gamma == 0.0 || gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
        return false;
    }
    let zeta = (beta - alpha) / (2.0 * gamma);
    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = c * t;
    let apply = |x: &mut [f64], y: &mut [f64]| {
        for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
            let (u, v) = (*xi, *yi);
            *xi = c * u - s * v;
            *yi = s * u + c * v;
        }
    };
    apply(a, b);
    if let Some((ra, rb)) = rot {
        apply(ra, rb);
    }
    true
}

fn sorted_pairs(sigma: Vec<f64>, vectors: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));
    let s = order.iter().map(|&i| sigma[i]).collect();
    let v = order
        .iter()
        .map(|&i| canonical_sign(vectors[i].clone()))
        .collect();
    (s, v)
}

fn normalized_pairs(cols: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let sigma: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
    let vectors = cols
        .into_iter()
        .zip(&sigma)
        .map(|(c, &s)| {
            if s > 0.0 {
                c.into_iter().map(|x| x / s).collect()
            } else {
                c
            }
        })
        .collect();
    sorted_pairs(sigma, vectors)
}

/// Flips `v` so its largest-magnitude entry is positive.
fn canonical_sign(mut v: Vec<f64>) -> Vec<f64> {
    let pivot = v.iter().copied().fold(
        0.0f64,
        |best, x| if x.abs() > best.abs() { x } else { best },
    );
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn random_matrix(m: usize, n: usize, seed: u64) -> Array2<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((m, n), |_| rng.gen_range(-1.0..1.0))
    }

    fn orthonormality_error(v: &Array2<f64>) -> f64 {
        let g = v.t().dot(v);
        let mut worst: f64 = 0.0;
        for ((i, j), &x) in g.indexed_iter() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((x - target).abs());
        }
        worst
    }

    #[test]
    fn diagonal_matrix_singular_values() {
        let mut d = Array2::zeros((4, 4));
        for (i, v) in [2.0, -5.0, 0.5, 3.0].into_iter().enumerate() {
            d[[i, i]] = v;
        }
        let svd = truncated_svd_dense(&d, 4, &SvdConfig::default());
        assert_eq!(svd.singular_values, vec![5.0, 3.0, 2.0, 0.5]);
    }

    #[test]
    fn round_robin_covers_every_pair_once() {
        for slots in [2usize, 4, 6, 10] {
            let mut seen = std::collections::HashSet::new();
            for round in 0..slots - 1 {
                let mut used = std::collections::HashSet::new();
                for p in 0..slots / 2 {
                    let (a, b) = round_robin_pair(slots, round, p);
                    assert!(a < b);
                    assert!(used.insert(a) && used.insert(b));
                    assert!(seen.insert((a, b)));
                }
            }
            assert_eq!(seen.len(), slots * (slots - 1) / 2);
        }
    }

    #[test]
    fn exact_routes_agree_on_tall_and_wide() {
        let a = random_matrix(12, 7, 1);
        let tall = truncated_svd_dense(
            &a,
            7,
            &SvdConfig {
                method: SvdMethod::Exact,
                ..Default::default()
            },
        );
        let wide = truncated_svd_dense(
            &a.t().to_owned(),
            7,
            &SvdConfig {
                method: SvdMethod::Exact,
                ..Default::default()
            },
        );
        for (x, y) in tall.singular_values.iter().zip(&wide.singular_values) {
            assert!((x - y).abs() < 1e-12 * x);
        }
        assert!(orthonormality_error(&tall.components) < 1e-12);
        assert!(orthonormality_error(&wide.components) < 1e-12);
    }

    #[test]
    fn randomized_matches_exact_on_decaying_spectrum() {
        // Low-rank signal plus small noise: the randomized route must recover it.
        let u = random_matrix(200, 10, 2);
        let w = random_matrix(10, 120, 3);
        let mut a = u.dot(&w);
        for (k, mut col) in a.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|x| x * 0.9f64.powi(k as i32 / 12));
        }
        a = a + random_matrix(200, 120, 4) * 1e-3;
        let exact = truncated_svd_dense(
            &a,
            8,
            &SvdConfig {
                method: SvdMethod::Exact,
                ..Default::default()
            },
        );
        let rand = truncated_svd_dense(
            &a,
            8,
            &SvdConfig {
                method: SvdMethod::Randomized,
                ..Default::default()
            },
        );
        for (x, y) in exact.singular_values.iter().zip(&rand.singular_values) {
            assert!((x - y).abs() < 1e-8 * x, "{x} vs {y}");
        }
        assert!(orthonormality_error(&rand.components) < 1e-10);
    }

    #[test]
    fn rank_deficient_input_reduces_dimension() {
        let u = random_matrix(9, 2, 5);
        let w = random_matrix(2, 6, 6);
        let svd = truncated_svd_dense(&u.dot(&w), 5, &SvdConfig::default());
        assert_eq!(svd.singular_values.len(), 2);
        assert_eq!(svd.components.ncols(), 2);
        assert_eq!(svd.requested, 5);
    }

    #[test]
    fn orthonormalize_produces_orthonormal_columns() {
        let a = random_matrix(30, 6, 7);
        let mut cols: Vec<Vec<f64>> = a.columns().into_iter().map(|c| c.to_vec()).collect();
        orthonormalize(&mut cols);
        let q = Array2::from_shape_fn((30, 6), |(i, j)| cols[j][i]);
        assert!(orthonormality_error(&q) < 1e-14);
    }
}
