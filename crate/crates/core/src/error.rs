use thiserror::Error;

use crate::pregroup::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("format error at {location}: {message}")]
    Format { location: String, message: String },

    #[error("invalid diagram in sentence {sentence}: {report}")]
    InvalidDiagram {
        sentence: usize,
        report: ValidationReport,
    },

    #[error("no parse for sentence {sentence:?}")]
    NoParse { sentence: Vec<String> },

    #[error("word {word:?} has no lexicon entry")]
    UnknownWord { word: String },

    #[error("sentence has {len} tokens; the lexicon parser accepts at most {max}")]
    SentenceTooLong { len: usize, max: usize },

    #[error("sentence is not a binary shared-subject coordination")]
    NotACoordination,

    #[error("sentence {sentence} has no body left after noun filtering")]
    EmptySentence { sentence: usize },

    #[error("mention ({sentence}, {token}) is not covered by any coreference chain")]
    ChainMismatch { sentence: usize, token: usize },

    #[error("circuit needs {needed} qubits, cap is {cap}")]
    CapExceeded { needed: usize, cap: usize },

    #[error("frame {name:?} must be expanded before compiling")]
    UnexpandedFrame { name: String },

    #[error("postselection probability {probability:e} is numerically zero")]
    ZeroNorm { probability: f64 },

    #[error("symbol {0:?} has no bound value")]
    UnboundSymbol(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn format(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            location: location.into(),
            message: message.into(),
        }
    }

    /// Short stable name, used by the CLI and the C ABI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Format { .. } => "FormatError",
            Error::InvalidDiagram { .. } => "InvalidDiagram",
            Error::NoParse { .. } => "NoParse",
            Error::UnknownWord { .. } => "UnknownWord",
            Error::SentenceTooLong { .. } => "SentenceTooLong",
            Error::NotACoordination => "NotACoordination",
            Error::EmptySentence { .. } => "EmptySentence",
            Error::ChainMismatch { .. } => "ChainMismatch",
            Error::CapExceeded { .. } => "CapExceeded",
            Error::UnexpandedFrame { .. } => "UnexpandedFrame",
            Error::ZeroNorm { .. } => "ZeroNorm",
            Error::UnboundSymbol(_) => "UnboundSymbol",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Training(_) => "TrainingFailure",
            Error::Io(_) => "IoError",
        }
    }

    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Format { .. } | Error::InvalidDiagram { .. } => 2,
            Error::NoParse { .. } | Error::UnknownWord { .. } | Error::SentenceTooLong { .. } => 3,
            Error::CapExceeded { .. } => 4,
            Error::Training(_) => 5,
            _ => 1,
        }
    }
}
