//! TOML experiment configuration.
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use heterorep::analysis::{AblationConfig, DEFAULT_BINS};
use heterorep::corpus::{DatasetSource, FileFormat, Schema, SplitName};
use heterorep::kgrep::{Aggregation, KgMethod, KgOptions, MatchMode};
use heterorep::learners::{
    Arch, Loss, MlpSpec, FIVENET_WIDTHS, LOGREG_LAMBDAS, MLP_DROPOUTS, MLP_LEARNING_RATES,
    SGD_ALPHAS, SGD_L1_RATIOS, SGD_POWER_TS,
};
use heterorep::stacking::{BlockKind, Scenario};
use heterorep::textrep::{LsaConfig, StyloProfile};
use serde::Deserialize;

use crate::error::{usage, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub scenario: Option<String>,
    pub dataset: Option<DatasetConfig>,
    #[serde(default)]
    pub featurize: FeaturizeConfig,
    #[serde(default)]
    pub blocks: Vec<BlockDecl>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub format: FileFormat,
    pub schema: Schema,
    pub train: PathBuf,
    pub validation: Option<PathBuf>,
    pub test: Option<PathBuf>,
    /// Report binary metrics for this label instead of weighted averages.
    pub positive_label: Option<String>,
}

impl DatasetConfig {
    pub fn source(&self) -> DatasetSource {
        DatasetSource {
            format: self.format,
            schema: self.schema.clone(),
            train: self.train.clone(),
            validation: self.validation.clone(),
            test: self.test.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturizeConfig {
    pub stylometric: bool,
    pub stylo_profile: StyloProfile,
    pub lsa: bool,
    #[serde(rename = "lsa_config")]
    pub lsa_config: LsaConfig,
    pub match_mode: MatchMode,
    pub aggregation: Aggregation,
    /// Concept blocks built from document bodies.
    pub kg: Vec<EntitySource>,
    /// Entity blocks built from document metadata.
    pub entity: Vec<EntitySource>,
}

impl FeaturizeConfig {
    pub fn kg_options(&self) -> KgOptions {
        KgOptions {
            mode: self.match_mode,
            aggregation: self.aggregation,
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.stylometric && !self.lsa && self.kg.is_empty() && self.entity.is_empty()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntitySource {
    pub name: String,
    pub path: PathBuf,
    pub method: Option<String>,
}

impl EntitySource {
    pub fn method_hint(&self) -> CliResult<Option<KgMethod>> {
        self.method
            .as_deref()
            .map(|m| {
                m.parse().map_err(|e: heterorep::Error| {
                    usage(format!("entity source `{}`: {e}", self.name))
                })
            })
            .transpose()
    }
}

/// A precomputed block. `path` may contain `{split}`; otherwise the split
/// name is inserted before the `.drm` extension.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockDecl {
    pub name: String,
    pub path: PathBuf,
    pub kind: BlockKind,
}

impl BlockDecl {
    /// Parses `name=path:kind`.
    pub fn parse_flag(s: &str) -> CliResult<Self> {
        let (name, rest) = s
            .split_once('=')
            .ok_or_else(|| usage(format!("--block `{s}`: expected name=path:kind")))?;
        let (path, kind) = rest
            .rsplit_once(':')
            .ok_or_else(|| usage(format!("--block `{s}`: expected name=path:kind")))?;
        if name.is_empty() || path.is_empty() {
            return Err(usage(format!("--block `{s}`: empty name or path")));
        }
        let kind = kind
            .parse()
            .map_err(|e: heterorep::Error| usage(format!("--block `{s}`: {e}")))?;
        Ok(Self {
            name: name.to_owned(),
            path: PathBuf::from(path),
            kind,
        })
    }

    pub fn split_path(&self, split: SplitName) -> PathBuf {
        split_path(&self.path, split)
    }
}

pub fn split_path(template: &Path, split: SplitName) -> PathBuf {
    let s = template.to_string_lossy();
    if s.contains("{split}") {
        return PathBuf::from(s.replace("{split}", split.as_str()));
    }
    let stem = s.strip_suffix(".drm").unwrap_or(&s);
    PathBuf::from(format!("{stem}.{}.drm", split.as_str()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Logreg,
    Sgd,
    Mlp,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learner: LearnerKind,
    pub lambdas: Vec<f64>,
    pub max_epochs: usize,
    pub sgd: SgdGridConfig,
    pub mlp: MlpGridConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learner: LearnerKind::Logreg,
            lambdas: LOGREG_LAMBDAS.to_vec(),
            max_epochs: 1000,
            sgd: SgdGridConfig::default(),
            mlp: MlpGridConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgdGridConfig {
    pub losses: Vec<Loss>,
    pub l1_ratios: Vec<f64>,
    pub power_ts: Vec<f64>,
    pub alphas: Vec<f64>,
    pub eta0: f64,
    pub max_epochs: usize,
}

impl Default for SgdGridConfig {
    fn default() -> Self {
        Self {
            losses: vec![Loss::Log, Loss::Hinge],
            l1_ratios: SGD_L1_RATIOS.to_vec(),
            power_ts: SGD_POWER_TS.to_vec(),
            alphas: SGD_ALPHAS.to_vec(),
            eta0: 0.01,
            max_epochs: 50,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpGridConfig {
    pub archs: Vec<Arch>,
    pub snn_widths: Vec<usize>,
    pub lnn_ns: Vec<u32>,
    pub fivenet_widths: Vec<usize>,
    pub lrs: Vec<f64>,
    pub dropouts: Vec<f64>,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
}

impl Default for MlpGridConfig {
    fn default() -> Self {
        Self {
            archs: vec![Arch::Snn],
            snn_widths: vec![128],
            lnn_ns: vec![6],
            fivenet_widths: FIVENET_WIDTHS.to_vec(),
            lrs: MLP_LEARNING_RATES.to_vec(),
            dropouts: MLP_DROPOUTS.to_vec(),
            batch_size: 32,
            max_epochs: 1000,
            patience: 10,
        }
    }
}

impl MlpGridConfig {
    /// One template per architecture setting.
    pub fn templates(&self) -> Vec<MlpSpec> {
        let base = MlpSpec {
            fivenet_widths: self.fivenet_widths.clone(),
            batch_size: self.batch_size,
            max_epochs: self.max_epochs,
            patience: self.patience,
            ..MlpSpec::default()
        };
        let mut out = Vec::new();
        for arch in &self.archs {
            match arch {
                Arch::Snn => out.extend(self.snn_widths.iter().map(|&w| MlpSpec {
                    arch: Arch::Snn,
                    snn_width: w,
                    ..base.clone()
                })),
                Arch::FiveNet => out.push(MlpSpec {
                    arch: Arch::FiveNet,
                    ..base.clone()
                }),
                Arch::Lnn => out.extend(self.lnn_ns.iter().map(|&n| MlpSpec {
                    arch: Arch::Lnn,
                    lnn_n: n,
                    ..base.clone()
                })),
            }
        }
        out
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub k: usize,
    pub bins: usize,
    pub top_k_words: usize,
    pub word_vocabulary: usize,
    pub table_size: usize,
    pub top_concepts: usize,
    pub ablation: AblationConfig,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            k: 200,
            bins: DEFAULT_BINS,
            top_k_words: 10,
            word_vocabulary: 2500,
            table_size: 10,
            top_concepts: 20,
            ablation: AblationConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: Self = toml::from_str(&text)
            .map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.resolve_paths(&base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(out) = self.out.as_mut() {
            fix(out);
        }
        if let Some(d) = self.dataset.as_mut() {
            fix(&mut d.train);
            d.validation.as_mut().map(fix);
            d.test.as_mut().map(fix);
        }
        for s in self
            .featurize
            .kg
            .iter_mut()
            .chain(self.featurize.entity.iter_mut())
        {
            fix(&mut s.path);
        }
        for b in &mut self.blocks {
            fix(&mut b.path);
        }
    }

    pub fn dataset(&self) -> CliResult<&DatasetConfig> {
        self.dataset
            .as_ref()
            .ok_or_else(|| usage("config declares no [dataset]"))
    }

    pub fn scenario(&self, flag: Option<&str>) -> CliResult<Scenario> {
        let name = flag.or(self.scenario.as_deref()).ok_or_else(|| {
            usage("no scenario given (use --scenario or `scenario` in the config)")
        })?;
        name.parse()
            .map_err(|e: heterorep::Error| usage(e.to_string()))
    }

    /// Structural checks that do not touch data files beyond existence.
    pub fn validate(&self) -> CliResult<()> {
        if let Some(d) = &self.dataset {
            for p in std::iter::once(&d.train)
                .chain(d.validation.iter())
                .chain(d.test.iter())
            {
                if !p.exists() {
                    return Err(usage(format!(
                        "dataset file {} does not exist",
                        p.display()
                    )));
                }
            }
        }
        for s in self.featurize.kg.iter().chain(&self.featurize.entity) {
            if !s.path.exists() {
                return Err(usage(format!(
                    "entity file {} of `{}` does not exist",
                    s.path.display(),
                    s.name
                )));
            }
            s.method_hint()?;
        }
        self.featurize
            .lsa_config
            .validate()
            .map_err(|e| usage(format!("[featurize.lsa_config]: {e}")))?;
        let a = &self.analysis;
        if a.bins < 2 {
            return Err(usage("analysis.bins must be at least 2"));
        }
        if !(a.ablation.sample_fraction > 0.0 && a.ablation.sample_fraction <= 1.0) {
            return Err(usage(
                "analysis.ablation.sample_fraction must lie in (0, 1]",
            ));
        }
        Ok(())
    }
}
