use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use heterorep::analysis::{
    ablate as run_ablation, best_and_worst, class_variance_words, rank_and_attribute,
    write_ablation_report, write_ablation_tsv, write_radial_csv, write_scatter_csv,
    write_variance_words_tsv, AblationConfig,
};
use heterorep::corpus::SplitName;
use heterorep::seed;
use heterorep::stacking::{compose, to_f64};
use heterorep::textrep::{preprocess, TfidfVectorizer};

use crate::context::{require_split, Context};
use crate::error::{usage, CliError, CliResult};

fn write_with<F>(path: &Path, f: F) -> CliResult<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w)
        .and_then(|()| w.flush())
        .map_err(|e| CliError::io(path, e))
}

pub fn ablate(ctx: &Context) -> CliResult<()> {
    let dataset = ctx.load_dataset()?;
    let train = require_split(&dataset, SplitName::Train)?;
    let val = require_split(&dataset, SplitName::Validation)?;
    let mut decls = ctx.block_decls()?;
    if decls.is_empty() {
        return Err(usage("no blocks declared; run featurize or add [[blocks]]"));
    }
    let reg_train = ctx.load_registry(&decls, train)?;
    if ctx.scenario_flag.is_some() || ctx.config.scenario.is_some() {
        let names = ctx
            .config
            .scenario(ctx.scenario_flag.as_deref())?
            .resolve(&reg_train)?;
        decls.retain(|d| names.contains(&d.name));
    }
    let reg_train = ctx.load_registry(&decls, train)?;
    let reg_val = ctx.load_registry(&decls, val)?;
    let cfg = AblationConfig {
        seed: seed::derive(ctx.seed, "ablation", 0),
        ..ctx.config.analysis.ablation.clone()
    };
    let records = run_ablation(
        &reg_train,
        &reg_val,
        &train.class_ids(&dataset.labels)?,
        &val.class_ids(&dataset.labels)?,
        dataset.labels.labels(),
        ctx.averaging(&dataset)?,
        &cfg,
    )?;

    let dir = ctx.ensure_out(None)?;
    let n = ctx.config.analysis.table_size;
    let (best, worst) = best_and_worst(&records, n);
    write_with(&dir.join("ablation.tsv"), |w| {
        write_ablation_report(&records, w)
    })?;
    write_with(&dir.join("ablation_best.tsv"), |w| {
        write_ablation_tsv(best.iter().copied(), w)
    })?;
    write_with(&dir.join("ablation_worst.tsv"), |w| {
        write_ablation_tsv(worst.iter().copied(), w)
    })?;
    write_with(&dir.join("ablation_scatter.csv"), |w| {
        write_scatter_csv(&records, w)
    })?;

    let failed = records.iter().filter(|r| r.error.is_some()).count();
    println!("subsets\t{}\nfailed\t{failed}", records.len());
    if let Some(top) = best.first() {
        println!(
            "best\t{}\t{:.6}",
            top.blocks.join("+"),
            top.metrics.map_or(0.0, |m| m.f1)
        );
    }
    if failed > 0 {
        return Err(CliError::Partial(format!(
            "{failed} of {} ablation subsets failed",
            records.len()
        )));
    }
    Ok(())
}

pub fn rank(ctx: &Context, k: Option<usize>) -> CliResult<()> {
    let scenario = ctx.config.scenario(ctx.scenario_flag.as_deref())?;
    let dataset = ctx.load_dataset()?;
    let train = require_split(&dataset, SplitName::Train)?;
    let decls = ctx.block_decls()?;
    let reg = ctx.load_registry(&decls, train)?;
    let names = scenario.resolve(&reg)?;
    let composed = compose(&names, &reg)?;
    let k = k.unwrap_or(ctx.config.analysis.k);
    let (ranking, counts) = rank_and_attribute(
        &to_f64(&composed.matrix),
        &composed.attribution,
        &train.class_ids(&dataset.labels)?,
        k,
        ctx.config.analysis.bins,
    )?;

    let dir = ctx.ensure_out(None)?;
    write_with(&dir.join("ranking_radial.csv"), |w| {
        write_radial_csv(&counts, w)
    })?;
    let top = k.min(ranking.order.len());
    write_with(&dir.join("ranking_top.tsv"), |w| {
        writeln!(w, "rank\tcolumn\tblock\tmi")?;
        for (r, &c) in ranking.order[..top].iter().enumerate() {
            writeln!(
                w,
                "{}\t{c}\t{}\t{:.10}",
                r + 1,
                composed.block_of(c).unwrap_or("?"),
                ranking.scores[c]
            )?;
        }
        Ok(())
    })?;
    for c in &counts {
        println!("{}\t{}", c.block, c.count);
    }
    Ok(())
}

pub fn words(ctx: &Context, top_k: Option<usize>) -> CliResult<()> {
    let dataset = ctx.load_dataset()?;
    let train = require_split(&dataset, SplitName::Train)?;
    let tokens: Vec<Vec<String>> = train
        .documents
        .iter()
        .map(|d| preprocess(&d.text))
        .collect();
    let tfidf = TfidfVectorizer::fit(
        &tokens,
        (1, 1),
        (1, 1),
        ctx.config.analysis.word_vocabulary,
        0,
    )?;
    let matrix = tfidf.transform_many(&tokens);
    let vocab: Vec<String> = tfidf.vocabulary.iter().map(|(_, w)| w.clone()).collect();

    // Only classes present in train take part.
    let ids = train.class_ids(&dataset.labels)?;
    let mut present: Vec<usize> = ids.clone();
    present.sort_unstable();
    present.dedup();
    let local: Vec<usize> = ids
        .iter()
        .map(|c| present.binary_search(c).expect("present"))
        .collect();
    let names: Vec<String> = present
        .iter()
        .map(|&c| dataset.labels.label(c).expect("known class").to_owned())
        .collect();

    let top_k = top_k.unwrap_or(ctx.config.analysis.top_k_words);
    let classes = class_variance_words(&matrix, &vocab, &local, &names, top_k)?;
    let dir = ctx.ensure_out(None)?;
    write_with(&dir.join("variance_words.tsv"), |w| {
        write_variance_words_tsv(&classes, w)
    })?;
    for c in &classes {
        let words: Vec<&str> = c.words.iter().map(|(w, _)| w.as_str()).collect();
        println!("{}\t{}", c.class, words.join(" "));
    }
    Ok(())
}
