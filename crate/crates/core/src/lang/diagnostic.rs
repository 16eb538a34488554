use std::fmt;

use serde::{Deserialize, Serialize};

/// 1-based source position plus token length in characters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    pub len: u32,
}

impl Span {
    pub fn new(line: u32, col: u32, len: u32) -> Self {
        Span { line, col, len }
    }

    /// Start of `self` through the end of `end`. Spans are single-line, so a
    /// multi-line range keeps the start token only.
    pub fn to(self, end: Span) -> Span {
        if end.line == self.line && end.col >= self.col {
            Span { len: end.col + end.len - self.col, ..self }
        } else {
            self
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    pub file: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn error(file: &str, span: Span, code: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code: code.into(),
            message: message.into(),
            file: file.to_string(),
            span,
        }
    }

    pub fn warning(file: &str, span: Span, code: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code: code.into(),
            message: message.into(),
            file: file.to_string(),
            span,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}: {}[{}]: {}",
            self.file, self.span.line, self.span.col, self.severity, self.code, self.message
        )
    }
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}

/// One `file:line:col: severity[code]: message` line per diagnostic, sorted
/// by file and then position. Errors and warnings interleave by position.
pub fn format_diagnostics(diagnostics: &[Diagnostic]) -> String {
    let mut sorted: Vec<&Diagnostic> = diagnostics.iter().collect();
    sorted.sort_by(|a, b| (&a.file, a.span.line, a.span.col).cmp(&(&b.file, b.span.line, b.span.col)));
    let mut out = String::new();
    for d in sorted {
        out.push_str(&d.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_error_line() {
        let d =
            Diagnostic::error("trafficlight.xfo", Span::new(4, 9, 3), "dangling-reference", "`colour` is not declared");
        let text = format_diagnostics(&[d]);
        assert!(text.starts_with("trafficlight.xfo:4:9: error"), "{text}");
        assert_eq!(text.lines().count(), 1);
    }

    #[test]
    fn empty_list_is_empty_string() {
        assert_eq!(format_diagnostics(&[]), "");
    }

    #[test]
    fn mixed_severities_interleave_by_span() {
        let diags = vec![
            Diagnostic::warning("m.xfo", Span::new(9, 1, 1), "w", "late warning"),
            Diagnostic::error("m.xfo", Span::new(2, 5, 1), "e", "early error"),
            Diagnostic::warning("m.xfo", Span::new(2, 1, 1), "w", "earliest warning"),
            Diagnostic::error("m.xfo", Span::new(5, 3, 1), "e", "middle error"),
            Diagnostic::error("a.xfo", Span::new(7, 1, 1), "e", "other file"),
        ];
        // Sort oracle: order by (file, line, col) computed independently.
        let mut keys: Vec<(String, u32, u32)> =
            diags.iter().map(|d| (d.file.clone(), d.span.line, d.span.col)).collect();
        keys.sort();
        let expected: Vec<String> = keys.iter().map(|(f, l, c)| format!("{f}:{l}:{c}:")).collect();
        let text = format_diagnostics(&diags);
        let got: Vec<String> =
            text.lines().map(|l| l.splitn(4, ':').take(3).collect::<Vec<_>>().join(":") + ":").collect();
        assert_eq!(got, expected);
        let severities: Vec<bool> = text.lines().map(|l| l.contains(": error[")).collect();
        assert_eq!(severities, vec![true, false, true, true, false]);
    }
}
