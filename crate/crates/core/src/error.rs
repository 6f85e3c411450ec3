use thiserror::Error;

use crate::ast::Location;

/// Failure to read a `.bpn` source. Parsing stops at the first one.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{loc}: expected {}, found {found}", expected_list(.expected))]
    Syntax {
        loc: Location,
        found: String,
        expected: Vec<String>,
    },
    #[error("{loc}: `{name}` is already declared at {first}")]
    DuplicateName {
        name: String,
        loc: Location,
        first: Location,
    },
}

impl ParseError {
    pub fn location(&self) -> Location {
        match self {
            ParseError::Syntax { loc, .. } | ParseError::DuplicateName { loc, .. } => *loc,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "SYNTAX",
            ParseError::DuplicateName { .. } => "DUPLICATE_NAME",
        }
    }

    /// Message without the location prefix, for diagnostic rendering.
    pub fn message(&self) -> String {
        match self {
            ParseError::Syntax {
                found, expected, ..
            } => format!("expected {}, found {found}", expected_list(expected)),
            ParseError::DuplicateName { name, first, .. } => {
                format!("`{name}` is already declared at {first}")
            }
        }
    }
}

fn expected_list(expected: &[String]) -> String {
    match expected {
        [] => "nothing".to_string(),
        [one] => one.clone(),
        _ => format!("one of {}", expected.join(", ")),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("atom `{atom}` is one-hot over `{over}`, but is not placed on an association containing that plate")]
    OnehotWithoutIntersection { atom: String, over: String },
    #[error("association `{association}` keeps no identifying link after constraint adjustment")]
    NoIdentifyingLink { association: String },
    #[error("atom `{atom}` references unknown plate `{plate}`")]
    UnknownPlate { atom: String, plate: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("hint names relationships with differing endpoints or cardinalities: {}", .names.join(", "))]
    HintMismatch { names: Vec<String> },
    #[error("hint names unknown relationship `{name}`")]
    UnknownRelationship { name: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HintsError {
    #[error("line {line}: {message}")]
    Syntax { line: u32, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("DDL requires a fully reduced model, got stage `{stage}`")]
    NotReduced { stage: String },
    #[error("format `{format}` is not available for stage `{stage}`")]
    Unsupported { format: String, stage: String },
    #[error("relationship `{name}` is many-to-many on both sides and cannot become a foreign key")]
    ManyToManyDirect { name: String },
}

#[derive(Debug, Error)]
pub enum JsonError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("unexpected schema `{found}`, expected `{expected}`")]
    Schema { found: String, expected: String },
}
