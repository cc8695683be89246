//! Dataset ingestion, label bookkeeping and stratified subsampling.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// One classified text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: String,
    /// Metadata fields in schema order. Values may be empty strings.
    pub metadata: IndexMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Validation,
    Test,
}

impl SplitName {
    pub const ALL: [SplitName; 3] = [SplitName::Train, SplitName::Validation, SplitName::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Validation => "validation",
            SplitName::Test => "test",
        }
    }
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitName::Train),
            "validation" | "valid" | "dev" => Ok(SplitName::Validation),
            "test" => Ok(SplitName::Test),
            other => Err(Error::Parameter(format!("unknown split `{other}`"))),
        }
    }
}

/// An ordered list of documents. Order is ingestion order and is never changed
/// by any operation in this crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub name: SplitName,
    pub documents: Vec<Document>,
}

impl DatasetSplit {
    pub fn new(name: SplitName, documents: Vec<Document>) -> Self {
        Self { name, documents }
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.documents.iter().map(|d| d.id.as_str())
    }

    /// Class ids of every document, in document order.
    pub fn class_ids(&self, labels: &LabelSet) -> Result<Vec<usize>> {
        self.documents
            .iter()
            .map(|d| {
                labels.index_of(&d.label).ok_or_else(|| {
                    Error::Evaluation(format!(
                        "label `{}` of `{}` not in label set",
                        d.label, d.id
                    ))
                })
            })
            .collect()
    }
}

/// Ordered set of class labels; indices are `0..len` in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    labels: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl LabelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_labels<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = Self::new();
        for l in labels {
            set.register(&l.into());
        }
        set
    }

    /// Returns the class id of `label`, adding it if unseen.
    pub fn register(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), i);
        i
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels.get(index).map(String::as_str)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Rebuilds the lookup index after deserialization.
    pub fn reindexed(mut self) -> Self {
        self.index = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    Tsv,
    Csv,
    Jsonl,
}

impl FromStr for FileFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tsv" => Ok(FileFormat::Tsv),
            "csv" => Ok(FileFormat::Csv),
            "jsonl" | "json-lines" | "ndjson" => Ok(FileFormat::Jsonl),
            other => Err(Error::Parameter(format!("unknown file format `{other}`"))),
        }
    }
}

/// Maps the columns of a dataset file onto document fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schema {
    pub id: String,
    pub text: String,
    pub label: String,
    #[serde(default)]
    pub metadata: Vec<String>,
    /// Rows sharing an id are concatenated into one document (author-level
    /// datasets such as tweet collections) instead of raising a duplicate error.
    #[serde(default)]
    pub concat_by_id: bool,
    /// When set, labels outside this list are rejected.
    #[serde(default)]
    pub labels: Option<Vec<String>>,
}

impl Schema {
    pub fn new(id: &str, text: &str, label: &str) -> Self {
        Self {
            id: id.to_owned(),
            text: text.to_owned(),
            label: label.to_owned(),
            metadata: Vec::new(),
            concat_by_id: false,
            labels: None,
        }
    }

    pub fn with_metadata<I, S>(mut self, fields: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.metadata = fields.into_iter().map(Into::into).collect();
        self
    }
}

/// Joiner used when rows are concatenated by id.
pub const CONCAT_JOINER: &str = " ";

struct RawRow {
    line: u64,
    id: String,
    text: String,
    label: String,
    metadata: IndexMap<String, String>,
}

/// Loads one split file. Labels are registered into `labels` in first-seen order.
pub fn load_dataset(
    path: &Path,
    format: FileFormat,
    schema: &Schema,
    name: SplitName,
    labels: &mut LabelSet,
) -> Result<DatasetSplit> {
    let rows = match format {
        FileFormat::Tsv => read_delimited(path, schema, b'\t', false)?,
        FileFormat::Csv => read_delimited(path, schema, b',', true)?,
        FileFormat::Jsonl => read_jsonl(path, schema)?,
    };

    let declared: Option<HashSet<&str>> = schema
        .labels
        .as_ref()
        .map(|ls| ls.iter().map(String::as_str).collect());
    if let Some(ls) = &schema.labels {
        for l in ls {
            labels.register(l);
        }
    }

    let mut documents: Vec<Document> = Vec::with_capacity(rows.len());
    let mut position: HashMap<String, usize> = HashMap::new();
    for row in rows {
        if let Some(declared) = &declared {
            if !declared.contains(row.label.as_str()) {
                return Err(Error::MalformedRow {
                    line: row.line,
                    message: format!("label `{}` not in declared label set", row.label),
                });
            }
        }
        labels.register(&row.label);
        match position.get(&row.id) {
            Some(&at) if schema.concat_by_id => {
                let doc = &mut documents[at];
                if doc.label != row.label {
                    return Err(Error::MalformedRow {
                        line: row.line,
                        message: format!(
                            "id `{}` carries conflicting labels `{}` and `{}`",
                            row.id, doc.label, row.label
                        ),
                    });
                }
                doc.text.push_str(CONCAT_JOINER);
                doc.text.push_str(&row.text);
            }
            Some(_) => return Err(Error::DuplicateId(row.id)),
            None => {
                position.insert(row.id.clone(), documents.len());
                documents.push(Document {
                    id: row.id,
                    text: row.text,
                    label: row.label,
                    metadata: row.metadata,
                });
            }
        }
    }
    Ok(DatasetSplit::new(name, documents))
}

fn column_index(headers: &csv::StringRecord, column: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::Schema(format!("missing column `{column}`")))
}

fn read_delimited(
    path: &Path,
    schema: &Schema,
    delimiter: u8,
    quoting: bool,
) -> Result<Vec<RawRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .quoting(quoting)
        .has_headers(true)
        .flexible(false)
        .from_reader(file);
    let headers = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(csv_error(e, path)),
    };
    if headers.is_empty() || (headers.len() == 1 && headers.get(0) == Some("")) {
        return Err(Error::Schema(format!(
            "{} has no header row",
            path.display()
        )));
    }
    let id_col = column_index(&headers, &schema.id)?;
    let text_col = column_index(&headers, &schema.text)?;
    let label_col = column_index(&headers, &schema.label)?;
    let meta_cols = schema
        .metadata
        .iter()
        .map(|m| column_index(&headers, m).map(|i| (m.clone(), i)))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(e, path))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or_default().to_owned();
        rows.push(RawRow {
            line,
            id: field(id_col),
            text: field(text_col),
            label: field(label_col),
            metadata: meta_cols
                .iter()
                .map(|(m, i)| (m.clone(), field(*i)))
                .collect(),
        });
    }
    Ok(rows)
}

fn csv_error(e: csv::Error, path: &Path) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::MalformedRow {
            line,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        csv::ErrorKind::Utf8 { err, .. } => Error::MalformedRow {
            line,
            message: format!("invalid UTF-8: {err}"),
        },
        other => Error::MalformedRow {
            line,
            message: format!("{other:?}"),
        },
    }
}

fn json_field(
    obj: &serde_json::Map<String, serde_json::Value>,
    key: &str,
    line: u64,
) -> Result<String> {
    match obj.get(key) {
        Some(serde_json::Value::String(s)) => Ok(s.clone()),
        Some(serde_json::Value::Null) => Ok(String::new()),
        Some(v @ (serde_json::Value::Number(_) | serde_json::Value::Bool(_))) => Ok(v.to_string()),
        Some(_) => Err(Error::MalformedRow {
            line,
            message: format!("field `{key}` is not a scalar"),
        }),
        None => Err(Error::Schema(format!(
            "missing column `{key}` (line {line})"
        ))),
    }
}

fn read_jsonl(path: &Path, schema: &Schema) -> Result<Vec<RawRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRow {
                line: line_no,
                message: e.to_string(),
            })?;
        let obj = value.as_object().ok_or_else(|| Error::MalformedRow {
            line: line_no,
            message: "row is not a JSON object".into(),
        })?;
        rows.push(RawRow {
            line: line_no,
            id: json_field(obj, &schema.id, line_no)?,
            text: json_field(obj, &schema.text, line_no)?,
            label: json_field(obj, &schema.label, line_no)?,
            metadata: schema
                .metadata
                .iter()
                .map(|m| Ok((m.clone(), json_field(obj, m, line_no)?)))
                .collect::<Result<_>>()?,
        });
    }
    Ok(rows)
}

/// Train/validation/test splits of one dataset sharing a label set.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub labels: LabelSet,
    pub splits: BTreeMap<SplitName, DatasetSplit>,
}

/// Location and layout of one dataset's split files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSource {
    pub format: FileFormat,
    pub schema: Schema,
    pub train: PathBuf,
    #[serde(default)]
    pub validation: Option<PathBuf>,
    #[serde(default)]
    pub test: Option<PathBuf>,
}

impl Dataset {
    /// Loads every declared split, train first so label ids follow train order.
    pub fn load(source: &DatasetSource) -> Result<Self> {
        let mut labels = LabelSet::new();
        let mut splits = BTreeMap::new();
        let files = [
            (SplitName::Train, Some(&source.train)),
            (SplitName::Validation, source.validation.as_ref()),
            (SplitName::Test, source.test.as_ref()),
        ];
        for (name, path) in files {
            if let Some(path) = path {
                let split = load_dataset(path, source.format, &source.schema, name, &mut labels)?;
                splits.insert(name, split);
            }
        }
        let dataset = Self { labels, splits };
        dataset.check_disjoint()?;
        Ok(dataset)
    }

    pub fn split(&self, name: SplitName) -> Option<&DatasetSplit> {
        self.splits.get(&name)
    }

    pub fn total_documents(&self) -> usize {
        self.splits.values().map(DatasetSplit::len).sum()
    }

    /// No document id may appear in two splits.
    pub fn check_disjoint(&self) -> Result<()> {
        let mut seen: HashSet<&str> = HashSet::new();
        for split in self.splits.values() {
            for id in split.ids() {
                if !seen.insert(id) {
                    return Err(Error::DuplicateId(id.to_owned()));
                }
            }
        }
        Ok(())
    }
}

/// Draws `fraction` of every class, with per-class quotas apportioned by
/// largest remainder. The sample keeps the input's relative order.
pub fn stratified_sample(split: &DatasetSplit, fraction: f64, seed: u64) -> Result<DatasetSplit> {
    let indices = stratified_indices(
        &split
            .documents
            .iter()
            .map(|d| d.label.as_str())
            .collect::<Vec<_>>(),
        fraction,
        seed,
    )?;
    Ok(DatasetSplit::new(
        split.name,
        indices
            .into_iter()
            .map(|i| split.documents[i].clone())
            .collect(),
    ))
}

/// Index form of [`stratified_sample`]; works on any per-row class key.
pub fn stratified_indices<K>(keys: &[K], fraction: f64, seed: u64) -> Result<Vec<usize>>
where
    K: Eq + std::hash::Hash + Clone,
{
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Parameter(format!(
            "sample fraction must lie in (0, 1], got {fraction}"
        )));
    }
    // Classes in first-seen order.
    let mut classes: IndexMap<K, Vec<usize>> = IndexMap::new();
    for (i, k) in keys.iter().enumerate() {
        classes.entry(k.clone()).or_default().push(i);
    }

    let exact: Vec<f64> = classes
        .values()
        .map(|m| fraction * m.len() as f64)
        .collect();
    let mut quota: Vec<usize> = exact.iter().map(|q| q.floor() as usize).collect();
    let target = (fraction * keys.len() as f64).round() as usize;
    let assigned: usize = quota.iter().sum();
    let mut order: Vec<usize> = (0..quota.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &c in order.iter().take(target.saturating_sub(assigned)) {
        quota[c] += 1;
    }

    let mut chosen = Vec::with_capacity(target);
    for (c, members) in classes.values().enumerate() {
        let mut members = members.clone();
        let mut rng = seed::rng(seed, "stratified_sample", c as u64);
        members.shuffle(&mut rng);
        chosen.extend_from_slice(&members[..quota[c].min(members.len())]);
    }
    chosen.sort_unstable();
    Ok(chosen)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelCount {
    pub count: usize,
    pub proportion: f64,
}

/// Per-label counts and proportions, in first-seen order within the split.
pub fn label_distribution(split: &DatasetSplit) -> IndexMap<String, LabelCount> {
    let mut counts: IndexMap<String, usize> = IndexMap::new();
    for d in &split.documents {
        *counts.entry(d.label.clone()).or_default() += 1;
    }
    let n = split.len() as f64;
    counts
        .into_iter()
        .map(|(l, c)| {
            (
                l,
                LabelCount {
                    count: c,
                    proportion: c as f64 / n,
                },
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn doc(id: usize, label: &str) -> Document {
        Document {
            id: format!("d{id}"),
            text: String::new(),
            label: label.into(),
            metadata: IndexMap::new(),
        }
    }

    fn split_with(counts: &[(&str, usize)]) -> DatasetSplit {
        let mut docs = Vec::new();
        for (label, n) in counts {
            for _ in 0..*n {
                docs.push(doc(docs.len(), label));
            }
        }
        DatasetSplit::new(SplitName::Train, docs)
    }

    fn write(contents: &str, suffix: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn largest_remainder_rounds_up_bigger_remainder() {
        let split = split_with(&[("real", 52), ("fake", 48)]);
        let sample = stratified_sample(&split, 0.1, 3).unwrap();
        let dist = label_distribution(&sample);
        assert_eq!(sample.len(), 10);
        assert_eq!(dist["real"].count, 5);
        assert_eq!(dist["fake"].count, 5);
    }

    #[test]
    fn full_fraction_is_identity() {
        let split = split_with(&[("a", 7), ("b", 3)]);
        assert_eq!(stratified_sample(&split, 1.0, 11).unwrap(), split);
    }

    #[test]
    fn six_classes_half() {
        let split = split_with(&[
            ("a", 10),
            ("b", 10),
            ("c", 10),
            ("d", 10),
            ("e", 10),
            ("f", 10),
        ]);
        let sample = stratified_sample(&split, 0.5, 0).unwrap();
        for (_, c) in label_distribution(&sample) {
            assert_eq!(c.count, 5);
        }
    }

    #[test]
    fn sample_preserves_order_and_is_reproducible() {
        let split = split_with(&[("a", 40), ("b", 25)]);
        let s1 = stratified_sample(&split, 0.3, 9).unwrap();
        let s2 = stratified_sample(&split, 0.3, 9).unwrap();
        assert_eq!(s1, s2);
        let pos: Vec<usize> = s1.ids().map(|id| id[1..].parse().unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_bad_fraction() {
        let split = split_with(&[("a", 2)]);
        assert!(matches!(
            stratified_sample(&split, 0.0, 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            stratified_sample(&split, 1.5, 0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn distribution_of_single_document() {
        let split = split_with(&[("true", 1)]);
        let d = label_distribution(&split);
        assert_eq!(
            d["true"],
            LabelCount {
                count: 1,
                proportion: 1.0
            }
        );
    }

    #[test]
    fn distribution_matches_liar_train_counts() {
        let split = split_with(&[
            ("barely-true", 1654),
            ("false", 1995),
            ("half-true", 2114),
            ("mostly-true", 1962),
            ("pants-fire", 839),
            ("true", 1676),
        ]);
        let d = label_distribution(&split);
        assert_eq!(split.len(), 10240);
        assert_eq!(d["barely-true"].count, 1654);
        assert!((d["barely-true"].proportion * 100.0 - 16.15).abs() < 0.005);
        let total: f64 = d.values().map(|c| c.proportion).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loads_tsv_with_metadata() {
        let f = write(
            "id\tstatement\tlabel\tspeaker\n1\tSays taxes rose.\tfalse\tdwayne-bohac\n2\tCrime fell.\ttrue\tbarack-obama\n3\tJobs!\thalf-true\t\n",
            ".tsv",
        );
        let schema = Schema::new("id", "statement", "label").with_metadata(["speaker"]);
        let mut labels = LabelSet::new();
        let split = load_dataset(
            f.path(),
            FileFormat::Tsv,
            &schema,
            SplitName::Train,
            &mut labels,
        )
        .unwrap();
        assert_eq!(split.len(), 3);
        assert_eq!(split.documents[0].metadata["speaker"], "dwayne-bohac");
        assert_eq!(split.documents[1].metadata["speaker"], "barack-obama");
        assert_eq!(split.documents[2].metadata["speaker"], "");
        assert_eq!(labels.labels(), ["false", "true", "half-true"]);
    }

    #[test]
    fn empty_file_with_header() {
        let f = write("id,text,label\n", ".csv");
        let mut labels = LabelSet::new();
        let split = load_dataset(
            f.path(),
            FileFormat::Csv,
            &Schema::new("id", "text", "label"),
            SplitName::Test,
            &mut labels,
        )
        .unwrap();
        assert!(split.is_empty());
    }

    #[test]
    fn csv_quoting_and_jsonl() {
        let f = write("id,text,label\n1,\"a, \"\"quoted\"\" text\",fake\n", ".csv");
        let mut labels = LabelSet::new();
        let schema = Schema::new("id", "text", "label");
        let split = load_dataset(
            f.path(),
            FileFormat::Csv,
            &schema,
            SplitName::Train,
            &mut labels,
        )
        .unwrap();
        assert_eq!(split.documents[0].text, "a, \"quoted\" text");

        let j = write("{\"id\": 7, \"text\": \"hi\", \"label\": \"real\"}\n\n{\"id\": 8, \"text\": \"yo\", \"label\": \"fake\"}\n", ".jsonl");
        let split = load_dataset(
            j.path(),
            FileFormat::Jsonl,
            &schema,
            SplitName::Train,
            &mut labels,
        )
        .unwrap();
        assert_eq!(split.ids().collect::<Vec<_>>(), ["7", "8"]);
    }

    #[test]
    fn schema_and_row_errors() {
        let schema = Schema::new("id", "text", "label");
        let mut labels = LabelSet::new();
        let f = write("id\ttext\n1\tx\n", ".tsv");
        let err = load_dataset(
            f.path(),
            FileFormat::Tsv,
            &schema,
            SplitName::Train,
            &mut labels,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Schema(ref m) if m.contains("label")));

        let f = write("id\ttext\tlabel\n1\tx\treal\n1\ty\tfake\n", ".tsv");
        let err = load_dataset(
            f.path(),
            FileFormat::Tsv,
            &schema,
            SplitName::Train,
            &mut labels,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateId(ref id) if id == "1"));

        let f = write("id\ttext\tlabel\n1\tx\treal\n2\ty\n", ".tsv");
        let err = load_dataset(
            f.path(),
            FileFormat::Tsv,
            &schema,
            SplitName::Train,
            &mut labels,
        )
        .unwrap_err();
        assert!(matches!(err, Error::MalformedRow { line: 3, .. }), "{err}");

        let j = write(
            "{\"id\": \"1\", \"text\": \"a\", \"label\": \"x\"}\nnot json\n",
            ".jsonl",
        );
        let err = load_dataset(
            j.path(),
            FileFormat::Jsonl,
            &schema,
            SplitName::Train,
            &mut labels,
        )
        .unwrap_err();
        assert!(matches!(err, Error::MalformedRow { line: 2, .. }));
    }

    #[test]
    fn concatenates_rows_by_id() {
        let f = write(
            "author\ttweet\tlabel\nu1\tfirst\t1\nu2\tother\t0\nu1\tsecond\t1\n",
            ".tsv",
        );
        let mut schema = Schema::new("author", "tweet", "label");
        schema.concat_by_id = true;
        let mut labels = LabelSet::new();
        let split = load_dataset(
            f.path(),
            FileFormat::Tsv,
            &schema,
            SplitName::Train,
            &mut labels,
        )
        .unwrap();
        assert_eq!(split.len(), 2);
        assert_eq!(split.documents[0].text, "first second");
    }

    #[test]
    fn declared_labels_are_enforced() {
        let f = write("id\ttext\tlabel\n1\tx\tmaybe\n", ".tsv");
        let mut schema = Schema::new("id", "text", "label");
        schema.labels = Some(vec!["real".into(), "fake".into()]);
        let mut labels = LabelSet::new();
        assert!(load_dataset(
            f.path(),
            FileFormat::Tsv,
            &schema,
            SplitName::Train,
            &mut labels
        )
        .is_err());
    }

    proptest::proptest! {
        #[test]
        fn per_class_counts_within_one(sizes in proptest::collection::vec(1usize..60, 1..6), fraction in 0.01f64..=1.0, seed in 0u64..1000) {
            let counts: Vec<(String, usize)> = sizes.iter().enumerate().map(|(i, &n)| (format!("c{i}"), n)).collect();
            let refs: Vec<(&str, usize)> = counts.iter().map(|(l, n)| (l.as_str(), *n)).collect();
            let split = split_with(&refs);
            let sample = stratified_sample(&split, fraction, seed).unwrap();
            let dist = label_distribution(&sample);
            for (label, n) in &counts {
                let got = dist.get(label).map_or(0, |c| c.count) as f64;
                proptest::prop_assert!((got - fraction * *n as f64).abs() < 1.0);
            }
        }
    }
}
