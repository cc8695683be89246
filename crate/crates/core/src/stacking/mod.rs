//! Representation blocks, scenario composition and feature standardization.

mod drm;

pub use drm::{ids_path, read_drm, read_drm_header, read_ids, write_drm, DrmHeader, DRM_MAGIC};

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array1, Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::kgrep::{entity_matrix, kg_matrix, AliasDictionary, EntityEmbeddingStore, KgOptions};
use crate::textrep::{preprocess, stylometric, LsaModel, StyloProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockKind {
    Text,
    Kg,
    KgEntity,
}

impl BlockKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BlockKind::Text => "text",
            BlockKind::Kg => "kg",
            BlockKind::KgEntity => "kg-entity",
        }
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BlockKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(BlockKind::Text),
            "kg" => Ok(BlockKind::Kg),
            "kg-entity" | "kg_entity" => Ok(BlockKind::KgEntity),
            other => Err(Error::Parameter(format!("unknown block kind `{other}`"))),
        }
    }
}

/// A named `N × D` feature matrix, row `i` describing document `i` of a split.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationBlock {
    pub name: String,
    pub kind: BlockKind,
    pub matrix: Array2<f32>,
    pub ids: Option<Vec<String>>,
}

impl RepresentationBlock {
    pub fn new(name: impl Into<String>, kind: BlockKind, matrix: Array2<f32>) -> Result<Self> {
        let name = name.into();
        if matrix.ncols() == 0 {
            return Err(Error::Format(format!("block `{name}` has zero columns")));
        }
        if let Some((idx, _)) = matrix.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Format(format!(
                "block `{name}` has a non-finite value at {idx:?}"
            )));
        }
        Ok(Self {
            name,
            kind,
            matrix,
            ids: None,
        })
    }

    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.rows() {
            return Err(Error::Alignment(format!(
                "block `{}`: {} ids for {} rows",
                self.name,
                ids.len(),
                self.rows()
            )));
        }
        self.ids = Some(ids);
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_drm(path, &self.matrix, self.ids.as_deref())
    }
}

/// Loads a DRM block and checks it against the dataset's document order.
pub fn load_matrix(
    path: &Path,
    name: &str,
    kind: BlockKind,
    expected_ids: Option<&[String]>,
) -> Result<RepresentationBlock> {
    let matrix = read_drm(path)?;
    let ids = read_ids(path)?;
    let mut block = RepresentationBlock::new(name, kind, matrix)?;
    if let Some(ids) = ids {
        block = block.with_ids(ids)?;
    }
    if let Some(expected) = expected_ids {
        check_alignment(&block, expected)?;
    }
    Ok(block)
}

fn check_alignment(block: &RepresentationBlock, expected: &[String]) -> Result<()> {
    if block.rows() != expected.len() {
        return Err(Error::Alignment(format!(
            "block `{}` has {} rows, dataset split has {} documents",
            block.name,
            block.rows(),
            expected.len()
        )));
    }
    if let Some(ids) = &block.ids {
        if let Some((i, (got, want))) = ids
            .iter()
            .zip(expected)
            .enumerate()
            .find(|(_, (a, b))| a != b)
        {
            return Err(Error::Alignment(format!(
                "block `{}` row {i}: id `{got}` where the dataset has `{want}`",
                block.name
            )));
        }
    }
    Ok(())
}

/// Blocks of one split, in registration order.
#[derive(Debug, Clone, Default)]
pub struct BlockRegistry {
    blocks: Vec<RepresentationBlock>,
}

impl BlockRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, block: RepresentationBlock) -> Result<()> {
        if self.get(&block.name).is_some() {
            return Err(Error::Composition(format!(
                "block `{}` registered twice",
                block.name
            )));
        }
        if let Some(first) = self.blocks.first() {
            if first.rows() != block.rows() {
                return Err(Error::Composition(format!(
                    "block `{}` has {} rows but `{}` has {}",
                    block.name,
                    block.rows(),
                    first.name,
                    first.rows()
                )));
            }
            if let (Some(a), Some(b)) = (&first.ids, &block.ids) {
                if a != b {
                    check_alignment(&block, a)?;
                }
            }
        }
        self.blocks.push(block);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&RepresentationBlock> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn blocks(&self) -> &[RepresentationBlock] {
        &self.blocks
    }

    pub fn names(&self) -> Vec<&str> {
        self.blocks.iter().map(|b| b.name.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.blocks.first().map_or(0, RepresentationBlock::rows)
    }
}

/// A named selection of blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scenario {
    /// All text blocks.
    Lm,
    /// All knowledge-graph blocks built from document bodies.
    Kg,
    LmKg,
    /// Everything, including metadata entity blocks.
    LmKgEntity,
    Custom(Vec<String>),
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LM" => Ok(Scenario::Lm),
            "KG" => Ok(Scenario::Kg),
            "LM+KG" => Ok(Scenario::LmKg),
            "LM+KG+KG-ENTITY" => Ok(Scenario::LmKgEntity),
            _ => match s.strip_prefix("custom:") {
                Some(list) if !list.is_empty() => Ok(Scenario::Custom(
                    list.split(',').map(|n| n.trim().to_owned()).collect(),
                )),
                _ => Err(Error::Parameter(format!("unknown scenario `{s}`"))),
            },
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::Lm => f.write_str("LM"),
            Scenario::Kg => f.write_str("KG"),
            Scenario::LmKg => f.write_str("LM+KG"),
            Scenario::LmKgEntity => f.write_str("LM+KG+KG-ENTITY"),
            Scenario::Custom(names) => write!(f, "custom:{}", names.join(",")),
        }
    }
}

impl Scenario {
    /// Block names in canonical (registration) order.
    pub fn resolve(&self, registry: &BlockRegistry) -> Result<Vec<String>> {
        let kinds: &[BlockKind] = match self {
            Scenario::Lm => &[BlockKind::Text],
            Scenario::Kg => &[BlockKind::Kg],
            Scenario::LmKg => &[BlockKind::Text, BlockKind::Kg],
            Scenario::LmKgEntity => &[BlockKind::Text, BlockKind::Kg, BlockKind::KgEntity],
            Scenario::Custom(names) => {
                if let Some(missing) = names.iter().find(|n| registry.get(n).is_none()) {
                    return Err(Error::Composition(format!(
                        "scenario block `{missing}` is not registered"
                    )));
                }
                return Ok(registry
                    .blocks()
                    .iter()
                    .filter(|b| names.contains(&b.name))
                    .map(|b| b.name.clone())
                    .collect());
            }
        };
        let names: Vec<String> = registry
            .blocks()
            .iter()
            .filter(|b| kinds.contains(&b.kind))
            .map(|b| b.name.clone())
            .collect();
        if names.is_empty() {
            return Err(Error::Composition(format!(
                "scenario {self} selects no registered block"
            )));
        }
        Ok(names)
    }
}

/// Half-open column range `[start, end)` of one block in a composed matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub block: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Composed {
    pub matrix: Array2<f32>,
    pub attribution: Vec<ColumnRange>,
}

impl Composed {
    /// Block owning column `col`.
    pub fn block_of(&self, col: usize) -> Option<&str> {
        self.attribution
            .iter()
            .find(|r| r.start <= col && col < r.end)
            .map(|r| r.block.as_str())
    }
}

/// Concatenates the named blocks column-wise, in the given order.
pub fn compose(names: &[String], registry: &BlockRegistry) -> Result<Composed> {
    let blocks = names
        .iter()
        .map(|n| {
            registry
                .get(n)
                .ok_or_else(|| Error::Composition(format!("block `{n}` is not registered")))
        })
        .collect::<Result<Vec<_>>>()?;
    let Some(first) = blocks.first() else {
        return Err(Error::Composition("no blocks to compose".into()));
    };
    if let Some(bad) = blocks.iter().find(|b| b.rows() != first.rows()) {
        return Err(Error::Composition(format!(
            "blocks `{}` ({} rows) and `{}` ({} rows) differ in length",
            first.name,
            first.rows(),
            bad.name,
            bad.rows()
        )));
    }
    let views: Vec<_> = blocks.iter().map(|b| b.matrix.view()).collect();
    let matrix =
        ndarray::concatenate(Axis(1), &views).map_err(|e| Error::Composition(e.to_string()))?;
    let mut attribution = Vec::with_capacity(blocks.len());
    let mut start = 0;
    for b in &blocks {
        attribution.push(ColumnRange {
            block: b.name.clone(),
            start,
            end: start + b.dim(),
        });
        start += b.dim();
    }
    Ok(Composed {
        matrix,
        attribution,
    })
}

pub fn compose_scenario(scenario: &Scenario, registry: &BlockRegistry) -> Result<Composed> {
    compose(&scenario.resolve(registry)?, registry)
}

/// Per-column z-scoring with statistics of the training rows.
///
/// Columns that are constant on the training rows get mean 0 and scale 1, so
/// they pass through unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub fn fit_standardizer(train: &Array2<f64>) -> Result<Standardizer> {
    if train.nrows() == 0 {
        return Err(Error::Parameter(
            "cannot fit a standardizer on zero rows".into(),
        ));
    }
    let n = train.nrows() as f64;
    let mut mean = Vec::with_capacity(train.ncols());
    let mut std = Vec::with_capacity(train.ncols());
    for col in train.columns() {
        let mu = col.sum() / n;
        let var = col.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / n;
        if var > 0.0 && var.sqrt() > mu.abs() * 1e-12 {
            mean.push(mu);
            std.push(var.sqrt());
        } else {
            mean.push(0.0);
            std.push(1.0);
        }
    }
    Ok(Standardizer { mean, std })
}

pub fn apply_standardizer(s: &Standardizer, matrix: &Array2<f64>) -> Result<Array2<f64>> {
    if matrix.ncols() != s.mean.len() {
        return Err(Error::Parameter(format!(
            "standardizer fitted on {} columns, got {}",
            s.mean.len(),
            matrix.ncols()
        )));
    }
    let mean = Array1::from(s.mean.clone());
    let std = Array1::from(s.std.clone());
    Ok((matrix - &mean) / &std)
}

impl Standardizer {
    pub fn inverse(&self, z: &Array2<f64>) -> Array2<f64> {
        z * &Array1::from(self.std.clone()) + &Array1::from(self.mean.clone())
    }
}

pub fn to_f64(m: &Array2<f32>) -> Array2<f64> {
    m.mapv(f64::from)
}

fn ids_of(docs: &[Document]) -> Vec<String> {
    docs.iter().map(|d| d.id.clone()).collect()
}

fn to_f32(m: &Array2<f64>) -> Array2<f32> {
    m.mapv(|v| v as f32)
}

/// Stylometric statistics of the raw document text.
pub fn stylometric_block(
    name: &str,
    docs: &[Document],
    profile: StyloProfile,
) -> Result<RepresentationBlock> {
    let rows: Vec<Vec<f64>> = docs
        .par_iter()
        .map(|d| stylometric(&d.text).features(profile))
        .collect();
    let mut m = Array2::zeros((docs.len(), profile.dim()));
    for (i, r) in rows.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            m[[i, j]] = v as f32;
        }
    }
    RepresentationBlock::new(name, BlockKind::Text, m)?.with_ids(ids_of(docs))
}

/// LSA projection of the preprocessed documents.
pub fn lsa_block(name: &str, model: &LsaModel, docs: &[Document]) -> Result<RepresentationBlock> {
    let tokens: Vec<Vec<String>> = docs.par_iter().map(|d| preprocess(&d.text)).collect();
    RepresentationBlock::new(
        name,
        BlockKind::Text,
        to_f32(&model.transform_many(&tokens)),
    )?
    .with_ids(ids_of(docs))
}

/// Averaged concept embeddings of document bodies.
pub fn kg_block(
    name: &str,
    docs: &[Document],
    dict: &AliasDictionary,
    store: &EntityEmbeddingStore,
    opts: KgOptions,
) -> Result<RepresentationBlock> {
    RepresentationBlock::new(name, BlockKind::Kg, kg_matrix(docs, dict, store, opts)?)?
        .with_ids(ids_of(docs))
}

/// Averaged entity embeddings of document metadata.
pub fn entity_block(
    name: &str,
    docs: &[Document],
    dict: &AliasDictionary,
    store: &EntityEmbeddingStore,
    opts: KgOptions,
) -> Result<RepresentationBlock> {
    RepresentationBlock::new(
        name,
        BlockKind::KgEntity,
        entity_matrix(docs, dict, store, opts)?,
    )?
    .with_ids(ids_of(docs))
}
