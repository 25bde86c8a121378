use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("scheme table is empty")]
    EmptyScheme,
    #[error("duplicate code {0} in scheme table")]
    DuplicateCode(u32),
    #[error("code {0} is flagged miscellaneous but also listed as a regular category")]
    MiscAlsoRegular(u32),
    #[error("area {0} has more than one miscellaneous code")]
    DuplicateMisc(u32),
    #[error("more than one multidisciplinary code ({0} and {1})")]
    DuplicateMultidisciplinary(u32, u32),
    #[error("miscellaneous code {code} belongs to area {area}, which has no regular categories")]
    EmptyMiscArea { code: u32, area: u32 },
    #[error("unknown scheme kind `{0}` (expected regular, misc or multidisciplinary)")]
    UnknownKind(String),

    #[error("journal `{journal}` uses unknown category code {code}")]
    UnknownCode { journal: String, code: u32 },
    #[error("journal `{0}` has no assignments with positive degree")]
    ZeroDegrees(String),
    #[error("journal `{journal}` has invalid degree {degree}")]
    InvalidDegree { journal: String, degree: f64 },
    #[error("paper `{paper}` references unknown journal `{journal}`")]
    UnknownJournal { paper: String, journal: String },
    #[error("paper `{0}` listed more than once")]
    DuplicatePaper(String),
    #[error("reference row for unknown paper `{0}`")]
    UnknownPaper(String),
    #[error("corpus has no papers")]
    EmptyCorpus,

    #[error("cannot prune an empty weight vector")]
    EmptyVector,
    #[error("invalid prune configuration: {0}")]
    InvalidPrune(String),
    #[error("invalid engine configuration: {0}")]
    InvalidConfig(String),
    #[error("paper sets differ: `{0}` is missing from one side")]
    MismatchedPapers(String),
    #[error("classification `{0}` has no papers")]
    EmptyClassification(String),

    #[error("{path}:{line}: {message}")]
    Malformed {
        path: String,
        line: u64,
        message: String,
    },
    #[error("csv error in {path}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
