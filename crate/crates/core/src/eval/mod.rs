//! Face-verification metrics over externally computed embeddings.

mod data;
mod metrics;

use std::path::PathBuf;

pub use data::{load_templates, parse_templates, EmbeddingSet, Pair, PairList, Template};
pub use metrics::{
    best_threshold, compute_roc, cosine_similarity, cross_validated_accuracy,
    cross_validated_accuracy_from_scores, fold_assignment, pair_scores, split_by_label, tar_at_far,
    template_similarity, CrossValidation, FoldResult, RocCurve, RocPoint, DEFAULT_BETA,
    DEFAULT_FOLDS,
};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("unknown id {0:?}")]
    UnknownId(String),
    #[error("zero-norm embedding")]
    ZeroNorm,
    #[error("fold {0} has no pairs")]
    EmptyFold(usize),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}
