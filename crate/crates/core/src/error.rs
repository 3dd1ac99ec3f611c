use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid split plan: {0}")]
    InvalidPlan(String),
    #[error("class {class} is too small for the split plan")]
    ClassTooSmall { class: usize },
    #[error("invalid classifier spec: {0}")]
    InvalidSpec(String),
    #[error("only class {class} is present; use a constant classifier")]
    SingleClass { class: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("column mismatch: model expects {expected} features, got {got}")]
    ColumnMismatch { expected: usize, got: usize },
    #[error("zero-norm centroid for class {class} under cosine distance")]
    ZeroNorm { class: usize },
    #[error("confusion matrix row {row} is empty")]
    EmptyRow { row: usize },
    #[error("no evidence for class pair ({0}, {1})")]
    NoEvidence(usize, usize),
    #[error("invalid dissimilarity matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid hierarchy: {0}")]
    InvalidHierarchy(String),
    #[error("newick parse error at offset {offset}: {message}")]
    Newick { offset: usize, message: String },
    #[error("class {class} is missing from the training data")]
    MissingClass { class: usize },
    #[error("empty input: {0}")]
    Empty(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
