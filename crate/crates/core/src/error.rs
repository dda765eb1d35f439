use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("interface mismatch in rule {rule}: {message}")]
    InterfaceMismatch { rule: String, message: String },
    #[error("unknown vertex type {0}")]
    UnknownVertexType(String),
    #[error("duplicate rule id {0}")]
    DuplicateRule(String),
    #[error("ruleset incomplete: {0}")]
    RulesetIncomplete(String),
    #[error("no smoothing rule covers crossing {crossing} ({class} class)")]
    UncoveredCrossing { crossing: usize, class: String },
    #[error("signature violation: {0}")]
    SignatureViolation(String),
    #[error("invalid trigraph: {0}")]
    InvalidTrigraph(String),
    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),
    #[error("coefficient of rule {rule} is not invertible for backward application")]
    NonInvertible { rule: String },
    #[error("gluing failed: {0}")]
    Gluing(String),
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    #[error("invalid site: {0}")]
    InvalidSite(String),
    #[error("unknown key or rule in trace step: {0}")]
    BadStep(String),
}

impl Error {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
