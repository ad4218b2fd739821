use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{span}: syntax error: {message} (expected {expected})")]
    Syntax { span: SourceSpan, message: String, expected: String },
    #[error("{span}: predicate {pred} used with arity {found}, previously {expected}")]
    ArityClash { span: SourceSpan, pred: String, expected: usize, found: usize },
    #[error("{span}: unsafe variable {var} in rule `{rule}`")]
    Unsafe { span: SourceSpan, var: String, rule: String },
    #[error("{span}: query literal `{lit}` is not ground")]
    NonGroundQuery { span: SourceSpan, lit: String },
    #[error("non-ground input: {0}")]
    NonGround(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("unknown external &{0}")]
    UnknownExternal(String),
    #[error("external &{name}: expected {expected} {what}, found {found}")]
    ExternalArity { name: String, what: &'static str, expected: usize, found: usize },
    #[error("resource bound `{name}` exceeded (limit {limit})")]
    Bound { name: &'static str, limit: usize },
    #[error("domain atom {0} occurs in a rule head")]
    DomainInHeads(String),
    #[error("conditional literal over {0} has no supplied extension")]
    MissingExtension(String),
    #[error("evaluation chain is not acyclic: {0}")]
    Cyclic(String),
    #[error("not an inconsistency reason: {0}")]
    NotAnIr(String),
    #[error("{0}")]
    Invalid(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("json error in {path}: {source}")]
    Json { path: String, source: serde_json::Error },
}

impl Error {
    /// True for errors that stem from a configured size/time limit.
    pub fn is_bound(&self) -> bool {
        matches!(self, Error::Bound { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
