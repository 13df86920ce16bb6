use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),

    #[error("parent relation has a cycle through {0}")]
    CyclicGraph(String),
    #[error("bad distribution for `{variable}`: {reason}")]
    BadDistribution { variable: String, reason: String },
    #[error("concepts `{first}` and `{second}` of `{variable}` overlap without nesting")]
    NonLaminarConcepts { variable: String, first: String, second: String },
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("variable `{variable}` names unknown parent `{parent}`")]
    UnknownParent { variable: String, parent: String },
    #[error("bad variable declaration `{variable}`: {reason}")]
    BadVariable { variable: String, reason: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown value `{value}` for variable `{variable}`")]
    UnknownValue { variable: String, value: String },
    #[error("assignment does not cover `{0}`")]
    SpanMismatch(String),
    #[error("empty intersection at `{0}`")]
    EmptyMeet(String),
    #[error("enumeration of {size} configurations exceeds the cap of {cap}")]
    TooLarge { size: u128, cap: u128 },
    #[error("conditioning event has probability zero")]
    UndefinedConditional,
    #[error("GIB condition fails at `{0}`")]
    NotGib(String),
    #[error("delta-GIB condition fails at `{0}`")]
    NotDeltaGib(String),
    #[error("hypercube based on `{base}` assigns `{variable}` outside its span")]
    BadSpan { base: String, variable: String },
    #[error("value set for `{0}` is not a permissible disjunction")]
    ImpermissibleSet(String),
    #[error("`{requested}` is not the node selected for expansion")]
    NotSelected { requested: String },
    #[error("agenda exhausted without an explanation of positive probability")]
    AgendaExhausted,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable variant name, used in CLI diagnostics and by the C ABI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
            Error::CyclicGraph(_) => "CyclicGraph",
            Error::BadDistribution { .. } => "BadDistribution",
            Error::NonLaminarConcepts { .. } => "NonLaminarConcepts",
            Error::DuplicateName(_) => "DuplicateName",
            Error::UnknownParent { .. } => "UnknownParent",
            Error::BadVariable { .. } => "BadVariable",
            Error::UnknownVariable(_) => "UnknownVariable",
            Error::UnknownValue { .. } => "UnknownValue",
            Error::SpanMismatch(_) => "SpanMismatch",
            Error::EmptyMeet(_) => "EmptyMeet",
            Error::TooLarge { .. } => "TooLarge",
            Error::UndefinedConditional => "UndefinedConditional",
            Error::NotGib(_) => "NotGib",
            Error::NotDeltaGib(_) => "NotDeltaGib",
            Error::BadSpan { .. } => "BadSpan",
            Error::ImpermissibleSet(_) => "ImpermissibleSet",
            Error::NotSelected { .. } => "NotSelected",
            Error::AgendaExhausted => "AgendaExhausted",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
