//! TF-IDF over word and character n-grams, reduced by truncated SVD.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binio;
use crate::error::{Error, Result};
use crate::linalg::{self, SparseRows, SvdConfig, SvdMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NgramKind {
    Word,
    Char,
}

/// Word n-grams joined by a single space.
pub fn word_ngrams(tokens: &[String], (lo, hi): (usize, usize)) -> Vec<String> {
    let mut out = Vec::new();
    for n in lo.max(1)..=hi {
        out.extend(tokens.windows(n).map(|w| w.join(" ")));
    }
    out
}

/// Character n-grams of the space-joined token sequence.
pub fn char_ngrams(tokens: &[String], (lo, hi): (usize, usize)) -> Vec<String> {
    let chars: Vec<char> = tokens.join(" ").chars().collect();
    let mut out = Vec::new();
    for n in lo.max(1)..=hi {
        out.extend(chars.windows(n).map(|w| w.iter().collect::<String>()));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LsaConfig {
    pub word_ngram_range: (usize, usize),
    pub char_ngram_range: (usize, usize),
    pub n_word_features: usize,
    pub n_char_features: usize,
    pub svd_dim: usize,
    pub seed: u64,
    pub svd_method: SvdMethod,
    pub power_iterations: usize,
    pub oversampling: usize,
}

impl Default for LsaConfig {
    fn default() -> Self {
        Self {
            word_ngram_range: (1, 2),
            char_ngram_range: (1, 3),
            n_word_features: 2500,
            n_char_features: 2500,
            svd_dim: 512,
            seed: 0,
            svd_method: SvdMethod::Auto,
            power_iterations: 10,
            oversampling: 10,
        }
    }
}

impl LsaConfig {
    pub fn validate(&self) -> Result<()> {
        let ranges_ok = |(lo, hi): (usize, usize)| lo >= 1 && lo <= hi;
        if !ranges_ok(self.word_ngram_range) || !ranges_ok(self.char_ngram_range) {
            return Err(Error::Parameter(
                "n-gram ranges must satisfy 1 <= lo <= hi".into(),
            ));
        }
        if self.n_word_features + self.n_char_features == 0 || self.svd_dim == 0 {
            return Err(Error::Parameter(
                "feature counts and svd_dim must be positive".into(),
            ));
        }
        if self.svd_dim > self.n_word_features + self.n_char_features {
            return Err(Error::Parameter(format!(
                "svd_dim {} exceeds feature count {}",
                self.svd_dim,
                self.n_word_features + self.n_char_features
            )));
        }
        Ok(())
    }
}

/// A fitted n-gram vocabulary with smoothed IDF weights.
///
/// Weight of n-gram `g` in a document: `tf(g) · (ln((1+N)/(1+df(g))) + 1)`,
/// then each row is scaled to unit L2 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfVectorizer {
    pub word_ngram_range: (usize, usize),
    pub char_ngram_range: (usize, usize),
    /// Word n-grams first, then character n-grams.
    pub vocabulary: Vec<(NgramKind, String)>,
    pub idf: Vec<f64>,
    index: HashMap<(NgramKind, String), u32>,
}

impl TfidfVectorizer {
    /// Keeps the `n_word` word n-grams and `n_char` character n-grams with the
    /// highest document frequency (ties lexicographic).
    pub fn fit(
        corpus: &[Vec<String>],
        word_ngram_range: (usize, usize),
        char_ngram_range: (usize, usize),
        n_word: usize,
        n_char: usize,
    ) -> Result<Self> {
        if corpus.iter().all(|d| d.is_empty()) {
            return Err(Error::Parameter("corpus has no non-empty document".into()));
        }
        let df = corpus
            .par_iter()
            .fold(
                HashMap::<(NgramKind, String), usize>::new,
                |mut acc, doc| {
                    let mut grams = Vec::new();
                    if n_word > 0 {
                        grams.extend(
                            word_ngrams(doc, word_ngram_range)
                                .into_iter()
                                .map(|g| (NgramKind::Word, g)),
                        );
                    }
                    if n_char > 0 {
                        grams.extend(
                            char_ngrams(doc, char_ngram_range)
                                .into_iter()
                                .map(|g| (NgramKind::Char, g)),
                        );
                    }
                    grams.sort_unstable();
                    grams.dedup();
                    for g in grams {
                        *acc.entry(g).or_default() += 1;
                    }
                    acc
                },
            )
            .reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_default() += v;
                }
                a
            });

        let select = |kind: NgramKind, limit: usize| {
            let mut cands: Vec<(&String, usize)> = df
                .iter()
                .filter(|((k, _), _)| *k == kind)
                .map(|((_, g), &c)| (g, c))
                .collect();
            cands.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            cands.truncate(limit);
            cands
        };
        let n_docs = corpus.len() as f64;
        let mut vocabulary = Vec::new();
        let mut idf = Vec::new();
        for (kind, limit) in [(NgramKind::Word, n_word), (NgramKind::Char, n_char)] {
            for (g, c) in select(kind, limit) {
                vocabulary.push((kind, g.clone()));
                idf.push(((1.0 + n_docs) / (1.0 + c as f64)).ln() + 1.0);
            }
        }
        Ok(Self::from_parts(
            word_ngram_range,
            char_ngram_range,
            vocabulary,
            idf,
        ))
    }

    pub fn from_parts(
        word_ngram_range: (usize, usize),
        char_ngram_range: (usize, usize),
        vocabulary: Vec<(NgramKind, String)>,
        idf: Vec<f64>,
    ) -> Self {
        let index = vocabulary
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i as u32))
            .collect();
        Self {
            word_ngram_range,
            char_ngram_range,
            vocabulary,
            idf,
            index,
        }
    }

    pub fn n_features(&self) -> usize {
        self.vocabulary.len()
    }

    fn has_kind(&self, kind: NgramKind) -> bool {
        self.vocabulary.iter().any(|(k, _)| *k == kind)
    }

    /// Sparse, L2-normalized TF-IDF row of `doc`; unknown n-grams are ignored.
    pub fn transform(&self, doc: &[String]) -> Vec<(u32, f64)> {
        let mut tf: HashMap<u32, f64> = HashMap::new();
        let mut count = |kind: NgramKind, grams: Vec<String>| {
            for g in grams {
                if let Some(&i) = self.index.get(&(kind, g)) {
                    *tf.entry(i).or_default() += 1.0;
                }
            }
        };
        if self.has_kind(NgramKind::Word) {
            count(NgramKind::Word, word_ngrams(doc, self.word_ngram_range));
        }
        if self.has_kind(NgramKind::Char) {
            count(NgramKind::Char, char_ngrams(doc, self.char_ngram_range));
        }
        let mut row: Vec<(u32, f64)> = tf
            .into_iter()
            .map(|(i, c)| (i, c * self.idf[i as usize]))
            .collect();
        row.sort_unstable_by_key(|&(i, _)| i);
        let norm = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|(_, v)| *v /= norm);
        }
        row
    }

    pub fn transform_many(&self, docs: &[Vec<String>]) -> SparseRows {
        SparseRows {
            n_cols: self.n_features(),
            rows: docs.par_iter().map(|d| self.transform(d)).collect(),
        }
    }
}

/// Fitted TF-IDF vocabulary plus SVD projection.
#[derive(Debug, Clone, PartialEq)]
pub struct LsaModel {
    pub tfidf: TfidfVectorizer,
    /// `n_features × dim`, orthonormal columns.
    pub projection: Array2<f64>,
    /// Non-increasing, length `dim`.
    pub singular_values: Vec<f64>,
    /// Conditions met during fitting, such as a rank-reduced output dimension.
    pub warnings: Vec<String>,
}

pub fn fit_lsa(corpus: &[Vec<String>], cfg: &LsaConfig) -> Result<LsaModel> {
    cfg.validate()?;
    let tfidf = TfidfVectorizer::fit(
        corpus,
        cfg.word_ngram_range,
        cfg.char_ngram_range,
        cfg.n_word_features,
        cfg.n_char_features,
    )?;
    let matrix = tfidf.transform_many(corpus);
    let svd = linalg::truncated_svd(
        &matrix,
        cfg.svd_dim,
        &SvdConfig {
            method: cfg.svd_method,
            power_iterations: cfg.power_iterations,
            oversampling: cfg.oversampling,
            seed: cfg.seed,
        },
    );
    let mut warnings = Vec::new();
    if svd.singular_values.len() < cfg.svd_dim {
        let msg = format!(
            "TF-IDF matrix has rank {}, below requested svd_dim {}; output dimension reduced",
            svd.singular_values.len(),
            cfg.svd_dim
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Ok(LsaModel {
        tfidf,
        projection: svd.components,
        singular_values: svd.singular_values,
        warnings,
    })
}

pub fn transform_lsa(model: &LsaModel, doc: &[String]) -> Vec<f64> {
    model.transform(doc)
}

const LSA_MAGIC: &[u8; 4] = b"LSA1";

impl LsaModel {
    pub fn dim(&self) -> usize {
        self.projection.ncols()
    }

    pub fn transform(&self, doc: &[String]) -> Vec<f64> {
        let row = self.tfidf.transform(doc);
        let mut out = vec![0.0; self.dim()];
        for (i, v) in row {
            for (o, p) in out.iter_mut().zip(self.projection.row(i as usize)) {
                *o += v * p;
            }
        }
        out
    }

    pub fn transform_many(&self, docs: &[Vec<String>]) -> Array2<f64> {
        let rows: Vec<Vec<f64>> = docs.par_iter().map(|d| self.transform(d)).collect();
        let mut out = Array2::zeros((docs.len(), self.dim()));
        for (i, r) in rows.into_iter().enumerate() {
            out.row_mut(i).assign(&ndarray::Array1::from(r));
        }
        out
    }

    /// Layout: `LSA1`, then u64 word lo/hi, char lo/hi, n_word, n_char; each
    /// n-gram as u64 byte length + UTF-8; f64 idf per n-gram; u64 dim; f64
    /// singular values; f64 projection row-major. All little-endian.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let t = &self.tfidf;
        binio::write_magic(w, LSA_MAGIC)?;
        for v in [
            t.word_ngram_range.0,
            t.word_ngram_range.1,
            t.char_ngram_range.0,
            t.char_ngram_range.1,
        ] {
            binio::write_u64(w, v as u64)?;
        }
        let n_word = t
            .vocabulary
            .iter()
            .filter(|(k, _)| *k == NgramKind::Word)
            .count();
        binio::write_u64(w, n_word as u64)?;
        binio::write_u64(w, (t.vocabulary.len() - n_word) as u64)?;
        for (_, g) in &t.vocabulary {
            binio::write_str(w, g)?;
        }
        binio::write_f64s(w, &t.idf)?;
        binio::write_u64(w, self.dim() as u64)?;
        binio::write_f64s(w, &self.singular_values)?;
        binio::write_f64s(w, &self.projection.iter().copied().collect::<Vec<_>>())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let model = Self::read_from(&mut r)?;
        binio::expect_eof(&mut r, "LSA model")?;
        Ok(model)
    }

    fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        binio::read_magic(r, LSA_MAGIC, "LSA model")?;
        let mut dims = [0usize; 6];
        for d in &mut dims {
            *d = binio::read_len(r)?;
        }
        let [wlo, whi, clo, chi, n_word, n_char] = dims;
        let n = n_word + n_char;
        let mut vocabulary = Vec::with_capacity(n);
        for i in 0..n {
            let kind = if i < n_word {
                NgramKind::Word
            } else {
                NgramKind::Char
            };
            vocabulary.push((kind, binio::read_str(r)?));
        }
        let idf = binio::read_f64s(r, n)?;
        let dim = binio::read_len(r)?;
        let singular_values = binio::read_f64s(r, dim)?;
        let projection = Array2::from_shape_vec((n, dim), binio::read_f64s(r, n * dim)?)
            .map_err(|e| Error::Format(e.to_string()))?;
        Ok(Self {
            tfidf: TfidfVectorizer::from_parts((wlo, whi), (clo, chi), vocabulary, idf),
            projection,
            singular_values,
            warnings: Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textrep::preprocess;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    fn corpus() -> Vec<Vec<String>> {
        [
            "vaccine trial shows strong immune response",
            "new covid cases reported in state hospitals",
            "vaccine causes autism claims viral post",
            "hospitals report shortage of ventilators",
            "drinking bleach cures covid says post",
            "state reports new vaccine doses administered",
            "viral video claims masks cause harm",
            "trial data published in medical journal",
        ]
        .iter()
        .map(|s| preprocess(s))
        .collect()
    }

    fn small_cfg() -> LsaConfig {
        LsaConfig {
            n_word_features: 30,
            n_char_features: 60,
            svd_dim: 5,
            ..Default::default()
        }
    }

    #[test]
    fn ngram_extraction() {
        let t = toks("ab cd");
        assert_eq!(word_ngrams(&t, (1, 2)), ["ab", "cd", "ab cd"]);
        assert_eq!(
            char_ngrams(&t, (2, 3)),
            ["ab", "b ", " c", "cd", "ab ", "b c", " cd"]
        );
        assert!(char_ngrams(&[], (1, 3)).is_empty());
    }

    #[test]
    fn selection_by_document_frequency() {
        let docs = vec![toks("aa ab"), toks("aa")];
        let v = TfidfVectorizer::fit(&docs, (1, 1), (1, 1), 1, 0).unwrap();
        assert_eq!(v.vocabulary, vec![(NgramKind::Word, "aa".to_owned())]);
        let v = TfidfVectorizer::fit(&docs, (1, 1), (1, 1), 5, 0).unwrap();
        assert_eq!(v.vocabulary[1].1, "ab");
        // idf = ln(3/3)+1 and ln(3/2)+1
        assert!((v.idf[0] - 1.0).abs() < 1e-15);
        assert!((v.idf[1] - (1.5f64.ln() + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn ties_break_lexicographically_regardless_of_order() {
        let docs = vec![toks("zeta alpha"), toks("mid")];
        let v1 = TfidfVectorizer::fit(&docs, (1, 1), (1, 1), 2, 0).unwrap();
        let rev: Vec<_> = docs.iter().rev().cloned().collect();
        let v2 = TfidfVectorizer::fit(&rev, (1, 1), (1, 1), 2, 0).unwrap();
        assert_eq!(v1.vocabulary, v2.vocabulary);
        assert_eq!(v1.vocabulary[0].1, "alpha");
        assert_eq!(v1.vocabulary[1].1, "mid");
    }

    #[test]
    fn tfidf_rows_are_unit_norm() {
        let c = corpus();
        let v = TfidfVectorizer::fit(&c, (1, 2), (1, 3), 30, 60).unwrap();
        for d in &c {
            let n: f64 = v.transform(d).iter().map(|(_, x)| x * x).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
        assert!(v.transform(&toks("qqqq")).is_empty());
    }

    #[test]
    fn fit_transform_consistency() {
        let c = corpus();
        let model = fit_lsa(&c, &small_cfg()).unwrap();
        let train = model.transform_many(&c);
        assert_eq!(model.dim(), 5);
        for (i, d) in c.iter().enumerate() {
            let row = transform_lsa(&model, d);
            for (a, b) in row.iter().zip(train.row(i)) {
                assert!((a - b).abs() < 1e-9);
            }
        }
        assert!(model.singular_values.windows(2).all(|w| w[0] >= w[1]));
        let gram = model.projection.t().dot(&model.projection);
        for ((i, j), &x) in gram.indexed_iter() {
            assert!((x - if i == j { 1.0 } else { 0.0 }).abs() < 1e-8);
        }
    }

    #[test]
    fn empty_and_oov_documents_map_to_zero() {
        let model = fit_lsa(&corpus(), &small_cfg()).unwrap();
        assert!(model.transform(&[]).iter().all(|&x| x == 0.0));
        assert!(model.transform(&toks("zzzzqqqq")).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rank_shortfall_is_reported() {
        let docs = vec![toks("aa"), toks("bb")];
        let cfg = LsaConfig {
            n_word_features: 10,
            n_char_features: 0,
            svd_dim: 5,
            ..Default::default()
        };
        let model = fit_lsa(&docs, &cfg).unwrap();
        assert_eq!(model.dim(), 2);
        assert_eq!(model.warnings.len(), 1);
    }

    #[test]
    fn rejects_invalid_input() {
        assert!(fit_lsa(&[vec![]], &small_cfg()).is_err());
        let bad = LsaConfig {
            svd_dim: 100,
            n_word_features: 10,
            n_char_features: 10,
            ..Default::default()
        };
        assert!(matches!(fit_lsa(&corpus(), &bad), Err(Error::Parameter(_))));
    }

    #[test]
    fn save_load_round_trip() {
        let model = fit_lsa(&corpus(), &small_cfg()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.lsa");
        model.save(&path).unwrap();
        let back = LsaModel::load(&path).unwrap();
        assert_eq!(back.tfidf, model.tfidf);
        assert_eq!(back.projection, model.projection);
        assert_eq!(back.singular_values, model.singular_values);
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"LSA1");
        std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(LsaModel::load(&path).is_err());
    }
}
