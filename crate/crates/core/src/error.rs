use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("duplicate entity id `{0}`")]
    KeyCollision(String),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unknown attribute `{attribute}` in table `{table}`")]
    UnknownAttribute { table: String, attribute: String },
    #[error("table `{table}` has {count} row(s) whose entity id is not in the decision table (first: `{first}`)")]
    ReferentialIntegrity {
        table: String,
        first: String,
        count: usize,
    },
    #[error("attribute `{0}` has no training rows")]
    EmptyVocabulary(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("solver failed after {iterations} iteration(s): {reason}")]
    Solver { iterations: usize, reason: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("split error: {0}")]
    Split(String),
    #[error("fold error: {0}")]
    Fold(String),
    #[error("metric undefined: {0}")]
    MetricUndefined(String),
    #[error("fold {fold}: {source}")]
    InFold { fold: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn in_fold(self, fold: usize) -> Self {
        Error::InFold {
            fold,
            source: Box::new(self),
        }
    }
}
