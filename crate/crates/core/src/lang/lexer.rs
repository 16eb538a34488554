use super::diagnostic::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// `?name`
    Var(String),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Colon,
    Eq,
    Dot,
    /// A character no token starts with, or an unterminated string.
    Bad(String),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Var(v) => format!("`?{v}`"),
            Tok::Str(_) => "string".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Bad(s) => format!("`{s}`"),
            Tok::Eof => "end of file".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits source into tokens. Never fails: unknown characters become
/// `Tok::Bad` and are reported by the parser. Comments run from `#` or `//`
/// to end of line.
pub fn tokenize(src: &str) -> Vec<Token> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start_col = col;
        let single = |t: Tok| Token { tok: t, span: Span::new(line, start_col, 1) };
        let punct = match c {
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            '=' => Some(Tok::Eq),
            '.' => Some(Tok::Dot),
            _ => None,
        };
        if let Some(t) = punct {
            out.push(single(t));
            i += 1;
            col += 1;
            continue;
        }
        if c == '"' {
            let mut text = String::new();
            let mut j = i + 1;
            let mut closed = false;
            while j < chars.len() && chars[j] != '\n' {
                match chars[j] {
                    '"' => {
                        closed = true;
                        j += 1;
                        break;
                    }
                    '\\' if j + 1 < chars.len() => {
                        text.push(match chars[j + 1] {
                            'n' => '\n',
                            't' => '\t',
                            other => other,
                        });
                        j += 2;
                    }
                    other => {
                        text.push(other);
                        j += 1;
                    }
                }
            }
            let len = (j - i) as u32;
            let tok = if closed { Tok::Str(text) } else { Tok::Bad("unterminated string".into()) };
            out.push(Token { tok, span: Span::new(line, start_col, len) });
            col += len;
            i = j;
            continue;
        }
        if c == '?' || is_ident_start(c) {
            let body_start = if c == '?' { i + 1 } else { i };
            let mut j = body_start;
            while j < chars.len() && is_ident_char(chars[j]) {
                j += 1;
            }
            let text: String = chars[body_start..j].iter().collect();
            let len = (j - i) as u32;
            let tok = if c == '?' {
                if text.is_empty() {
                    Tok::Bad("?".into())
                } else {
                    Tok::Var(text)
                }
            } else {
                Tok::Ident(text)
            };
            out.push(Token { tok, span: Span::new(line, start_col, len) });
            col += len;
            i = j;
            continue;
        }
        out.push(single(Tok::Bad(c.to_string())));
        i += 1;
        col += 1;
    }
    out.push(Token { tok: Tok::Eof, span: Span::new(line, col, 0) });
    out
}
