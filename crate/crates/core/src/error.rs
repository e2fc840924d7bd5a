use std::fmt;

use thiserror::Error;

use crate::syntax::{DefinitionError, LexError, ParseError, SyntaxError};
use crate::typing::TypeError;

/// Side conditions under which a B term denotes a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WdKind {
    DivisionByZero,
    ModuloDomain,
    NegativeExponent,
    ExponentTooLarge,
    ApplicationOutsideDomain,
    NotAFunction,
    NotASequence,
    EmptySequence,
    EmptyMinMax,
}

impl fmt::Display for WdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WdKind::DivisionByZero => "division by zero",
            WdKind::ModuloDomain => "modulo outside its domain",
            WdKind::NegativeExponent => "negative exponent",
            WdKind::ExponentTooLarge => "exponent too large",
            WdKind::ApplicationOutsideDomain => "function applied outside its domain",
            WdKind::NotAFunction => "relation applied as a function",
            WdKind::NotASequence => "not a sequence",
            WdKind::EmptySequence => "empty sequence",
            WdKind::EmptyMinMax => "min or max of the empty set",
        };
        f.write_str(s)
    }
}

/// Failures while evaluating expressions, predicates and substitutions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("WELL-DEFINEDNESS ERROR: {kind}: {detail}")]
    WellDefinedness { kind: WdKind, detail: String },
    #[error("ENUMERATION ERROR: cannot enumerate {0}")]
    Enumeration(String),
    #[error("ENUMERATION ERROR: budget of {0} candidates exceeded")]
    BudgetExceeded(usize),
    #[error("SIZE CAP EXCEEDED: set of {size} elements exceeds the cap of {cap}")]
    SizeCapExceeded { size: String, cap: usize },
    #[error("UNKNOWN IDENTIFIER: {0}")]
    UnknownIdentifier(String),
    #[error("MISSING BINDING: {0} is unbound")]
    MissingBinding(String),
    #[error("DOUBLE WRITE: {0} is assigned twice in a parallel substitution")]
    DoubleWrite(String),
    #[error("AT ROOT STATE: cannot backtrack further")]
    AtRootState,
    #[error("NO CONSTANTS FOUND: PROPERTIES unsatisfiable within the configured bounds")]
    NoConstantsFound,
    #[error("UNINITIALISED VARIABLE: {0}")]
    UninitialisedVariable(String),
    #[error("UNKNOWN OPERATION: {0}")]
    UnknownOperation(String),
    #[error("TYPE CONFUSION: expected {expected}, found {found}")]
    TypeConfusion { expected: String, found: String },
    #[error("UNSUPPORTED: {0}")]
    Unsupported(String),
}

impl EvalError {
    pub fn wd(kind: WdKind, detail: impl Into<String>) -> Self {
        EvalError::WellDefinedness {
            kind,
            detail: detail.into(),
        }
    }

    pub fn confusion(expected: &str, found: impl fmt::Display) -> Self {
        EvalError::TypeConfusion {
            expected: expected.to_owned(),
            found: found.to_string(),
        }
    }
}

pub type EvalResult<T> = Result<T, EvalError>;

/// Problems with a state or trace file that are not plain syntax errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateFileError {
    #[error("STATE FILE ERROR {span}: expected `Identifier = Expression`, found {found}")]
    NotAnEquality { span: crate::syntax::SourceSpan, found: String },
    #[error("STATE FILE ERROR: missing value for {0}")]
    MissingIdentifier(String),
    #[error("STATE FILE ERROR: {0} is not a constant or variable of the machine")]
    UnknownIdentifier(String),
    #[error("STATE FILE ERROR: {0} is bound more than once")]
    DuplicateIdentifier(String),
    #[error("STATE FILE ERROR: in `{equation}`: {source}")]
    Type { equation: String, source: TypeError },
    #[error("STATE FILE ERROR: in `{equation}`: {source}")]
    Eval { equation: String, source: EvalError },
    #[error("STATE FILE ERROR: in `{equation}`: value is not finite")]
    NotReifiable { equation: String },
    #[error("TRACE ERROR line {line}: {message}")]
    Trace { line: usize, message: String },
}

/// Every failure the library reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Definition(#[from] DefinitionError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    StateFile(#[from] StateFileError),
    #[error("IO ERROR {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl From<SyntaxError> for Error {
    fn from(e: SyntaxError) -> Self {
        match e {
            SyntaxError::Lex(e) => Error::Lex(e),
            SyntaxError::Parse(e) => Error::Parse(e),
        }
    }
}

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Violation = 1,
    InputError = 2,
    EvaluationError = 3,
}

impl Error {
    /// Input problems map to 2, evaluation failures to 3.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Error::Lex(_)
            | Error::Parse(_)
            | Error::Definition(_)
            | Error::Type(_)
            | Error::Io { .. } => ExitCode::InputError,
            Error::StateFile(StateFileError::Eval { .. }) => ExitCode::EvaluationError,
            Error::StateFile(_) => ExitCode::InputError,
            Error::Eval(_) => ExitCode::EvaluationError,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
