//! Verification statistics from comparison scores or embeddings: empirical
//! FMR/FNMR, thresholds at fixed FMR, EER and boxplot summaries.

mod rates;
mod report;

pub use rates::{
    boxplot, eer, eer_point, error_rates, euclidean_distance, operating_threshold, threshold_at_fmr, BoxplotStats, EerPoint, ScoreSet,
};
pub use report::{
    evaluate_embeddings, evaluate_scores_file, read_embeddings, read_pairs, read_scores, scores_from_embeddings,
    BiometricReport, ConditionReport, Embedding, MissingPair, OperatingPoint, PairEntry, FMR_TARGETS, TABLE_COLUMNS,
};
