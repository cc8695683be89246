use std::collections::BTreeMap;

use heterorep::corpus::label_distribution;
use heterorep::kgrep::{
    concept_stats, document_concepts, metadata_concepts, AliasDictionary, ConceptSet, ConceptStats,
    EntityEmbeddingStore,
};
use heterorep::lexicon::Lexicon;
use serde::Serialize;

use crate::context::{write_file, Context};
use crate::error::CliResult;

#[derive(Serialize)]
struct SplitSummary {
    documents: usize,
    labels: BTreeMap<String, usize>,
}

#[derive(Serialize)]
struct SourceStats {
    source: String,
    field: &'static str,
    split: String,
    stats: ConceptStats,
}

#[derive(Serialize)]
struct StatsReport {
    splits: BTreeMap<String, SplitSummary>,
    concepts: Vec<SourceStats>,
}

pub fn stats(ctx: &Context) -> CliResult<()> {
    let dataset = ctx.load_dataset()?;
    let f = &ctx.config.featurize;
    let mut report = StatsReport {
        splits: BTreeMap::new(),
        concepts: Vec::new(),
    };
    println!("split\tdocuments");
    for split in dataset.splits.values() {
        println!("{}\t{}", split.name.as_str(), split.len());
        report.splits.insert(
            split.name.as_str().to_owned(),
            SplitSummary {
                documents: split.len(),
                labels: label_distribution(split)
                    .into_iter()
                    .map(|(l, c)| (l, c.count))
                    .collect(),
            },
        );
    }

    let sources =
        f.kg.iter()
            .map(|s| (s, "text"))
            .chain(f.entity.iter().map(|s| (s, "metadata")));
    let mut printed_header = false;
    for (src, field) in sources {
        let store = EntityEmbeddingStore::load(&src.path, src.method_hint()?)?;
        let dict = AliasDictionary::from_store(&store);
        for split in dataset.splits.values() {
            let sets: Vec<ConceptSet> = if field == "text" {
                document_concepts(&split.documents, &dict, f.kg_options())
            } else {
                split
                    .documents
                    .iter()
                    .map(|d| metadata_concepts(&d.metadata, &dict, Lexicon::english()))
                    .collect()
            };
            let st = concept_stats(&sets, Some(&store), ctx.config.analysis.top_concepts);
            if !printed_header {
                println!("source\tfield\tsplit\tcoverage\tzero_concept_rate");
                printed_header = true;
            }
            println!(
                "{}\t{field}\t{}\t{:.6}\t{:.6}",
                src.name,
                split.name.as_str(),
                st.coverage,
                st.zero_concept_rate()
            );
            report.concepts.push(SourceStats {
                source: src.name.clone(),
                field,
                split: split.name.as_str().to_owned(),
                stats: st,
            });
        }
    }
    let dir = ctx.ensure_out(None)?;
    let json = serde_json::to_string_pretty(&report).expect("stats serialize");
    write_file(&dir.join("stats.json"), format!("{json}\n").as_bytes())
}
