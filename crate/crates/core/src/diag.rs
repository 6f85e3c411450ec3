//! Structured diagnostics shared by validation, well-formedness checking and
//! reduction.

use std::fmt;

use crate::ast::Location;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Short upper-case code, e.g. `UNDECLARED_INDEX`.
    pub code: &'static str,
    pub message: String,
    /// `None` for diagnostics about derived models that have no source text.
    pub location: Option<Location>,
}

impl Diagnostic {
    pub fn error(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            code,
            message: message.into(),
            location: None,
        }
    }

    pub fn warning(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            code,
            message: message.into(),
            location: None,
        }
    }

    pub fn at(mut self, loc: Location) -> Self {
        self.location = Some(loc);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// Renders as `file:line:col: severity CODE message`.
    pub fn render(&self, file: &str, color: bool) -> String {
        let loc = self.location.unwrap_or_default();
        let severity = if color {
            match self.severity {
                Severity::Error => "\x1b[1;31merror\x1b[0m",
                Severity::Warning => "\x1b[1;33mwarning\x1b[0m",
            }
        } else {
            self.severity.as_str()
        };
        format!(
            "{file}:{}:{}: {severity} {} {}",
            loc.line, loc.col, self.code, self.message
        )
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.location {
            Some(loc) => write!(f, "{loc}: {} {} {}", self.severity, self.code, self.message),
            None => write!(f, "{} {} {}", self.severity, self.code, self.message),
        }
    }
}

/// Ordered list of diagnostics. A model passes iff it holds no errors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, diagnostic: Diagnostic) {
        self.diagnostics.push(diagnostic);
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.diagnostics.extend(other.diagnostics);
    }

    pub fn is_empty(&self) -> bool {
        self.diagnostics.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_error)
    }

    pub fn passes(&self) -> bool {
        !self.has_errors()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }

    pub fn codes(&self) -> Vec<&'static str> {
        self.diagnostics.iter().map(|d| d.code).collect()
    }

    pub fn contains_code(&self, code: &str) -> bool {
        self.diagnostics.iter().any(|d| d.code == code)
    }

    pub fn render(&self, file: &str, color: bool) -> String {
        let mut out = String::new();
        for d in &self.diagnostics {
            out.push_str(&d.render(file, color));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_format() {
        let d = Diagnostic::error("UNDECLARED_INDEX", "index set `Q` is not declared")
            .at(Location::new(3, 14));
        assert_eq!(
            d.render("m.bpn", false),
            "m.bpn:3:14: error UNDECLARED_INDEX index set `Q` is not declared"
        );
        assert!(d.render("m.bpn", true).contains("\x1b["));
    }

    #[test]
    fn warnings_do_not_fail() {
        let mut r = ValidationReport::new();
        r.push(Diagnostic::warning("W", "w"));
        assert!(r.passes());
        r.push(Diagnostic::error("E", "e"));
        assert!(!r.passes());
        assert_eq!(r.codes(), vec!["W", "E"]);
    }
}
