use std::fmt;

use serde::Serialize;

use crate::syntax::SourceSpan;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Lex,
    Parse,
    Scope,
    Type,
}

/// Error category, stable across releases; the negative suite keys on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Category {
    IllegalCharacter,
    UnterminatedComment,
    ParseError,
    UnboundIdentifier,
    DuplicateName,
    ArityError,
    NotInferable,
    UnboundGlobal,
    UniverseViolation,
    TypeMismatch,
    Internal,
}

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::IllegalCharacter => "IllegalCharacter",
            Category::UnterminatedComment => "UnterminatedComment",
            Category::ParseError => "ParseError",
            Category::UnboundIdentifier => "UnboundIdentifier",
            Category::DuplicateName => "DuplicateName",
            Category::ArityError => "ArityError",
            Category::NotInferable => "NotInferable",
            Category::UnboundGlobal => "UnboundGlobal",
            Category::UniverseViolation => "UniverseViolation",
            Category::TypeMismatch => "TypeMismatch",
            Category::Internal => "Internal",
        }
    }

    pub fn parse(name: &str) -> Option<Category> {
        use Category::*;
        [
            IllegalCharacter,
            UnterminatedComment,
            ParseError,
            UnboundIdentifier,
            DuplicateName,
            ArityError,
            NotInferable,
            UnboundGlobal,
            UniverseViolation,
            TypeMismatch,
            Internal,
        ]
        .into_iter()
        .find(|c| c.name() == name)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A positioned error report. Only errors exist; there are no warnings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub phase: Phase,
    pub category: Category,
    pub message: String,
    pub span: SourceSpan,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub actual: Option<String>,
}

impl Diagnostic {
    pub fn new(phase: Phase, category: Category, message: impl Into<String>, span: SourceSpan) -> Diagnostic {
        Diagnostic {
            phase,
            category,
            message: message.into(),
            span,
            expected: None,
            actual: None,
        }
    }
}

impl fmt::Display for Diagnostic {
    /// `file:line:col: error: message`, followed by indented expected/actual
    /// lines when present.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: error: [{}] {}", self.span, self.category, self.message)?;
        if let Some(e) = &self.expected {
            write!(f, "\n    expected: {e}")?;
        }
        if let Some(a) = &self.actual {
            write!(f, "\n    actual:   {a}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostic {}
