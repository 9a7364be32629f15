//! Circuit file formats and the seeded benchmark generator.

mod aiger;
mod blif;
mod generate;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use aiger::{parse_aiger, write_aiger};
pub use blif::parse_blif;
pub use generate::{gen_random, GenSpec, GenSpecError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

/// One parser message, tied to a 1-based line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub message: String,
    pub severity: Severity,
}

impl ParseDiagnostic {
    pub fn error(line: usize, message: impl Into<String>) -> ParseDiagnostic {
        ParseDiagnostic {
            line,
            message: message.into(),
            severity: Severity::Error,
        }
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "line {}: {sev}: {}", self.line, self.message)
    }
}

/// Diagnostics of a failed parse; always holds at least one error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseErrors(pub Vec<ParseDiagnostic>);

impl ParseErrors {
    pub fn single(line: usize, message: impl Into<String>) -> ParseErrors {
        ParseErrors(vec![ParseDiagnostic::error(line, message)])
    }

    pub fn diagnostics(&self) -> &[ParseDiagnostic] {
        &self.0
    }

    pub fn first_error(&self) -> Option<&ParseDiagnostic> {
        self.0.iter().find(|d| d.severity == Severity::Error)
    }
}

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseErrors {}
