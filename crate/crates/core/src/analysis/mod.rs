//! Mutual-information feature ranking, exhaustive block ablation and
//! per-class TF-IDF variance words.

mod ablation;
mod mi;
mod words;

pub use ablation::{
    ablate, best_and_worst, enumerate_subsets, rank_records, subset_names, write_ablation_report,
    write_ablation_tsv, write_scatter_csv, AblationConfig, AblationRecord, MAX_ABLATION_BLOCKS,
};
pub use mi::{
    discrete_mutual_information, equal_frequency_bins, mutual_information, rank_and_attribute,
    rank_features, write_radial_csv, FeatureRanking, SubspaceCount, DEFAULT_BINS,
};
pub use words::{class_variance_words, class_word_variance, write_variance_words_tsv, ClassWords};
