use std::fs;
use std::path::PathBuf;

use heterorep::corpus::Dataset;
use heterorep::kgrep::{AliasDictionary, EntityEmbeddingStore};
use heterorep::seed;
use heterorep::stacking::{
    entity_block, kg_block, lsa_block, stylometric_block, BlockKind, RepresentationBlock,
};
use heterorep::textrep::{fit_lsa, preprocess, LsaConfig};

use crate::context::{write_file, Context, ManifestEntry, MANIFEST};
use crate::error::{usage, CliError, CliResult};

fn check_name(name: &str) -> CliResult<()> {
    if name.is_empty() || name.contains(['/', '\\']) || name.chars().any(char::is_whitespace) {
        return Err(usage(format!(
            "block name `{name}` cannot be used as a file name"
        )));
    }
    Ok(())
}

struct Writer<'a> {
    ctx: &'a Context,
    written: Vec<PathBuf>,
    manifest: Vec<ManifestEntry>,
}

impl Writer<'_> {
    fn save(&mut self, block: &RepresentationBlock, split: &str) -> CliResult<()> {
        let path = self
            .ctx
            .blocks_dir()
            .join(format!("{}.{split}.drm", block.name));
        self.written.push(path.clone());
        self.written.push(heterorep::stacking::ids_path(&path));
        block.save(&path)?;
        println!("{}\t{split}\t{}\t{}", block.name, block.rows(), block.dim());
        Ok(())
    }

    fn record(&mut self, name: &str, kind: BlockKind, dim: usize) {
        self.manifest.push(ManifestEntry {
            name: name.to_owned(),
            kind,
            dim,
        });
    }

    fn build_all(&mut self, dataset: &Dataset) -> CliResult<()> {
        let ctx = self.ctx;
        let f = &ctx.config.featurize;
        if f.stylometric {
            let mut dim = 0;
            for split in dataset.splits.values() {
                let b = stylometric_block("stylometric", &split.documents, f.stylo_profile)?;
                dim = b.dim();
                self.save(&b, split.name.as_str())?;
            }
            self.record("stylometric", BlockKind::Text, dim);
        }
        if f.lsa {
            let train = &dataset
                .splits
                .values()
                .next()
                .expect("train split is always loaded")
                .documents;
            let tokens: Vec<Vec<String>> = train.iter().map(|d| preprocess(&d.text)).collect();
            let cfg = LsaConfig {
                seed: seed::derive(ctx.seed, "lsa", 0),
                ..f.lsa_config.clone()
            };
            let model = fit_lsa(&tokens, &cfg)?;
            let model_path = ctx.blocks_dir().join("LSA.model");
            self.written.push(model_path.clone());
            model.save(&model_path)?;
            for split in dataset.splits.values() {
                self.save(
                    &lsa_block("LSA", &model, &split.documents)?,
                    split.name.as_str(),
                )?;
            }
            self.record("LSA", BlockKind::Text, model.dim());
        }
        for (sources, kind) in [(&f.kg, BlockKind::Kg), (&f.entity, BlockKind::KgEntity)] {
            for src in sources {
                check_name(&src.name)?;
                let store = EntityEmbeddingStore::load(&src.path, src.method_hint()?)?;
                let dict = AliasDictionary::from_store(&store);
                for split in dataset.splits.values() {
                    let b = match kind {
                        BlockKind::Kg => {
                            kg_block(&src.name, &split.documents, &dict, &store, f.kg_options())?
                        }
                        _ => entity_block(
                            &src.name,
                            &split.documents,
                            &dict,
                            &store,
                            f.kg_options(),
                        )?,
                    };
                    self.save(&b, split.name.as_str())?;
                }
                self.record(&src.name, kind, store.dim());
            }
        }
        let manifest = ctx.blocks_dir().join(MANIFEST);
        self.written.push(manifest.clone());
        let json = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        write_file(&manifest, format!("{json}\n").as_bytes())
    }
}

pub fn featurize(ctx: &Context) -> CliResult<()> {
    if ctx.config.featurize.is_empty() {
        log::warn!("no blocks enabled in [featurize]; nothing to do");
        return Ok(());
    }
    let dataset = ctx.load_dataset()?;
    let dir = ctx.blocks_dir();
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut w = Writer {
        ctx,
        written: Vec::new(),
        manifest: Vec::new(),
    };
    let result = w.build_all(&dataset);
    if result.is_err() {
        for p in &w.written {
            let _ = fs::remove_file(p);
        }
    }
    result
}
