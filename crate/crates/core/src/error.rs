use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("ambiguous situation: {0}")]
    AmbiguousSituation(String),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: conflicting condition: {dimension}")]
    ConflictingCondition { line: u64, dimension: String },

    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown algorithm `{name}`; valid names: {valid}")]
    UnknownAlgorithm { name: String, valid: String },

    #[error("invalid hyperparameter {name}: {reason}")]
    InvalidHyperParameter { name: &'static str, reason: String },

    #[error("unknown condition: {0}")]
    UnknownCondition(String),

    #[error("training diverged at iteration {0}")]
    Diverged(usize),

    #[error("ranking-only recommender: {0} does not support rating prediction")]
    RankingOnly(String),

    #[error("unsupported test view: {0}")]
    UnsupportedTestView(String),

    #[error("{0} cannot be used as the traditional recommender of a splitting approach")]
    NotTwoDimensional(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("recommender not set")]
    RecommenderNotSet,

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("no data path configured (set dataset.ratings.lins or dataset.ratings.wins)")]
    NoDataPath,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        match self {
            e @ Error::InFile { .. } => e,
            e => Error::InFile {
                path: path.into(),
                source: Box::new(e),
            },
        }
    }
}
