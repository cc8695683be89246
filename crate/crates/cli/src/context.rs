//! Resolved run settings plus dataset and block loading shared by commands.

use std::fs;
use std::path::{Path, PathBuf};

use heterorep::corpus::{Dataset, DatasetSplit, SplitName};
use heterorep::learners::Averaging;
use heterorep::stacking::{load_matrix, BlockKind, BlockRegistry};
use serde::{Deserialize, Serialize};

use crate::config::{BlockDecl, ExperimentConfig};
use crate::error::{usage, CliError, CliResult};
use crate::Cli;

pub const MANIFEST: &str = "manifest.json";

/// One featurized block as recorded by `featurize`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub kind: BlockKind,
    pub dim: usize,
}

pub struct Context {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub out: PathBuf,
    pub scenario_flag: Option<String>,
    pub extra_blocks: Vec<BlockDecl>,
}

impl Context {
    pub fn from_cli(cli: &Cli) -> CliResult<Self> {
        let path = cli
            .config
            .as_deref()
            .ok_or_else(|| usage("--config is required for this command"))?;
        let config = ExperimentConfig::load(path)?;
        config.validate()?;
        let seed = cli
            .seed
            .or(config.seed)
            .ok_or_else(|| usage("no seed given (use --seed or `seed` in the config)"))?;
        let out = cli
            .out
            .clone()
            .or_else(|| config.out.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        let extra_blocks = cli
            .blocks
            .iter()
            .map(|b| BlockDecl::parse_flag(b))
            .collect::<CliResult<_>>()?;
        let ctx = Self {
            config,
            seed,
            out,
            scenario_flag: cli.scenario.clone(),
            extra_blocks,
        };
        if let Some(s) = &ctx.scenario_flag {
            s.parse::<heterorep::stacking::Scenario>()
                .map_err(|e| usage(e.to_string()))?;
        }
        Ok(ctx)
    }

    pub fn blocks_dir(&self) -> PathBuf {
        self.out.join("blocks")
    }

    pub fn ensure_out(&self, sub: Option<&str>) -> CliResult<PathBuf> {
        let dir = match sub {
            Some(s) => self.out.join(s),
            None => self.out.clone(),
        };
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(dir)
    }

    pub fn load_dataset(&self) -> CliResult<Dataset> {
        Ok(Dataset::load(&self.config.dataset()?.source())?)
    }

    /// Featurized blocks, then config blocks, then `--block` flags.
    pub fn block_decls(&self) -> CliResult<Vec<BlockDecl>> {
        let mut decls = Vec::new();
        let manifest = self.blocks_dir().join(MANIFEST);
        if manifest.exists() {
            let text = fs::read_to_string(&manifest).map_err(|e| CliError::io(&manifest, e))?;
            let entries: Vec<ManifestEntry> = serde_json::from_str(&text)
                .map_err(|e| heterorep::Error::Format(format!("{}: {e}", manifest.display())))?;
            decls.extend(entries.into_iter().map(|e| BlockDecl {
                path: self.blocks_dir().join(format!("{}.{{split}}.drm", e.name)),
                name: e.name,
                kind: e.kind,
            }));
        }
        decls.extend(self.config.blocks.iter().cloned());
        decls.extend(self.extra_blocks.iter().cloned());
        for (i, d) in decls.iter().enumerate() {
            if decls[..i].iter().any(|o| o.name == d.name) {
                return Err(usage(format!("block `{}` declared twice", d.name)));
            }
        }
        Ok(decls)
    }

    pub fn load_registry(
        &self,
        decls: &[BlockDecl],
        split: &DatasetSplit,
    ) -> CliResult<BlockRegistry> {
        let ids: Vec<String> = split.ids().map(str::to_owned).collect();
        let mut reg = BlockRegistry::new();
        for d in decls {
            let path = d.split_path(split.name);
            if !path.exists() {
                return Err(heterorep::Error::Composition(format!(
                    "block `{}` has no {} matrix at {}",
                    d.name,
                    split.name.as_str(),
                    path.display()
                ))
                .into());
            }
            reg.register(load_matrix(&path, &d.name, d.kind, Some(&ids))?)?;
        }
        Ok(reg)
    }

    pub fn averaging(&self, dataset: &Dataset) -> CliResult<Averaging> {
        match self.config.dataset()?.positive_label.as_deref() {
            None => Ok(Averaging::Weighted),
            Some(l) => dataset
                .labels
                .index_of(l)
                .map(|positive| Averaging::Binary { positive })
                .ok_or_else(|| {
                    usage(format!(
                        "positive label `{l}` does not occur in the dataset"
                    ))
                }),
        }
    }
}

pub fn require_split(dataset: &Dataset, name: SplitName) -> CliResult<&DatasetSplit> {
    dataset.split(name).ok_or_else(|| {
        usage(format!(
            "this command needs a {} split in [dataset]",
            name.as_str()
        ))
    })
}

pub fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// File-system friendly form of a scenario name.
pub fn slug(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
