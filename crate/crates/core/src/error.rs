use std::path::PathBuf;

/// Errors raised anywhere in the scoring pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid ISO 639-3 code {code:?}{}", row_suffix(*.row))]
    InvalidIso { code: String, row: Option<usize> },

    #[error("duplicate ISO 639-3 code {0}")]
    DuplicateIso(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: invalid UTF-8 at byte offset {offset}", path.display())]
    Encoding { path: PathBuf, offset: usize },

    #[error("{}: empty corpus", .0.display())]
    EmptyCorpus(PathBuf),

    #[error("no lexical tokens")]
    NoLexicalTokens,

    #[error("{source_name}: {message}")]
    Parse {
        source_name: String,
        message: String,
    },

    #[error("missing values (use --drop-incomplete to skip these rows): {}", format_cells(.0))]
    MissingValues(Vec<(String, String)>),

    #[error("value {value} for language {iso}, feature {feature} is outside [{min}, {max}]")]
    OutOfRange {
        iso: String,
        feature: String,
        value: i64,
        min: i64,
        max: i64,
    },

    #[error("chapter {chapter}: unknown raw category {code}")]
    UnknownCategory { chapter: String, code: i64 },

    #[error("chapter {0}: no raw value mapping configured")]
    NoValueMap(String),

    #[error("missing chapters{}: {}", iso_suffix(.iso), .chapters.join(", "))]
    MissingChapters {
        iso: Option<String>,
        chapters: Vec<String>,
    },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite measurement {0}")]
    NonFinite(f64),

    #[error("bin width must be a positive finite number, got {0}")]
    InvalidWidth(f64),

    #[error("set sizes must be positive")]
    ZeroSize,

    #[error("bin layouts differ (width {left_width} anchor {left_anchor} vs width {right_width} anchor {right_anchor})")]
    BinMismatch {
        left_width: f64,
        left_anchor: f64,
        right_width: f64,
        right_anchor: f64,
    },

    #[error("weight vector labels differ")]
    LabelMismatch,

    #[error("both weight vectors are all zero")]
    AllZero,

    #[error("feature lists differ: first mismatched column {column:?}")]
    FeatureMismatch { column: String },

    #[error("need at least {needed} languages, got {got}")]
    TooFewLanguages { needed: usize, got: usize },

    #[error("probability {0} is outside [0, 1]")]
    Probability(f64),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least 3 pairs, got {0}")]
    TooFewPairs(usize),

    #[error("zero rank variance")]
    ZeroVariance,

    #[error("no overlapping languages")]
    NoOverlap,

    #[error("unsupported format {0:?}")]
    UnsupportedFormat(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Per-language failures collected while the rest of a batch continues.
pub type Failures = Vec<(crate::model::Iso, Error)>;

impl Error {
    pub(crate) fn parse(source_name: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn row_suffix(row: Option<usize>) -> String {
    match row {
        Some(r) => format!(" in row {r}"),
        None => String::new(),
    }
}

fn iso_suffix(iso: &Option<String>) -> String {
    match iso {
        Some(code) => format!(" for {code}"),
        None => String::new(),
    }
}

fn format_cells(cells: &[(String, String)]) -> String {
    cells
        .iter()
        .map(|(lang, feature)| format!("({lang}, {feature})"))
        .collect::<Vec<_>>()
        .join(", ")
}
