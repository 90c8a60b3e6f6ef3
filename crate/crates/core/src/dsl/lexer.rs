use super::ast::SourceSpan;
use super::DslError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    VarSigil(String),
    Int(i64),
    Dice(u32, u32),
    Str(String),
    Char(char),
    /// Raw rows between `MAP` and `ENDMAP`.
    MapRows(Vec<String>),
    Colon,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Pipe,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    Newline,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::VarSigil(s) => format!("`${s}`"),
            Tok::Int(v) => format!("integer {v}"),
            Tok::Dice(n, m) => format!("dice {n}d{m}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Char(c) => format!("char '{c}'"),
            Tok::MapRows(_) => "map rows".into(),
            Tok::Newline => "end of line".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Assign => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::Pipe => "|",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            _ => "?",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

/// Splits source text into tokens. Comment lines vanish; a line holding only
/// `MAP` switches to raw row capture until a line holding only `ENDMAP`.
pub fn tokenize(source: &str) -> Result<Vec<Token>, DslError> {
    let lines: Vec<&str> = source.split('\n').collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let line = lines[i].strip_suffix('\r').unwrap_or(lines[i]);
        let lineno = (i + 1) as u32;
        let trimmed = line.trim();
        let has_newline = i + 1 < lines.len();
        if trimmed.starts_with('#') {
            i += 1;
            continue;
        }
        if trimmed == "MAP" {
            let col = (line.len() - line.trim_start().len()) as u32 + 1;
            out.push(Token {
                tok: Tok::Ident("MAP".into()),
                span: SourceSpan::new(lineno, col, 3),
            });
            let mut rows = Vec::new();
            let mut j = i + 1;
            let mut closed = None;
            while j < lines.len() {
                let row = lines[j].strip_suffix('\r').unwrap_or(lines[j]);
                if row.trim() == "ENDMAP" {
                    closed = Some((j, row));
                    break;
                }
                rows.push(row.to_string());
                j += 1;
            }
            if closed.is_none() && j == lines.len() && rows.last().is_some_and(|r| r.is_empty()) {
                rows.pop();
            }
            let width = rows.iter().map(|r| r.chars().count()).max().unwrap_or(0) as u32;
            out.push(Token {
                tok: Tok::MapRows(rows),
                span: SourceSpan::new(lineno + 1, 1, width),
            });
            match closed {
                Some((j, row)) => {
                    let col = (row.len() - row.trim_start().len()) as u32 + 1;
                    out.push(Token {
                        tok: Tok::Ident("ENDMAP".into()),
                        span: SourceSpan::new(j as u32 + 1, col, 6),
                    });
                    if j + 1 < lines.len() {
                        out.push(Token {
                            tok: Tok::Newline,
                            span: SourceSpan::new(j as u32 + 1, row.chars().count() as u32 + 1, 1),
                        });
                    }
                    i = j + 1;
                }
                None => return Ok(out),
            }
            continue;
        }
        lex_line(line, lineno, &mut out)?;
        if has_newline {
            out.push(Token {
                tok: Tok::Newline,
                span: SourceSpan::new(lineno, line.chars().count() as u32 + 1, 1),
            });
        }
        i += 1;
    }
    Ok(out)
}

fn lex_line(line: &str, lineno: u32, out: &mut Vec<Token>) -> Result<(), DslError> {
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    let span = |start: usize, end: usize| SourceSpan::new(lineno, start as u32 + 1, (end - start) as u32);
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c == '$' {
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            if i == start + 1 {
                return Err(DslError::IllegalCharacter {
                    span: span(start, start + 1),
                    ch: '$',
                });
            }
            Tok::VarSigil(chars[start + 1..i].iter().collect())
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let n: String = chars[start..i].iter().collect();
            if i + 1 < chars.len() && chars[i] == 'd' && chars[i + 1].is_ascii_digit() {
                let mstart = i + 1;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let m: String = chars[mstart..i].iter().collect();
                match (n.parse(), m.parse()) {
                    (Ok(n), Ok(m)) => Tok::Dice(n, m),
                    _ => {
                        return Err(DslError::IllegalCharacter {
                            span: span(start, i),
                            ch: c,
                        })
                    }
                }
            } else {
                match n.parse() {
                    Ok(v) => Tok::Int(v),
                    Err(_) => {
                        return Err(DslError::IllegalCharacter {
                            span: span(start, i),
                            ch: c,
                        })
                    }
                }
            }
        } else if c == '"' {
            i += 1;
            while i < chars.len() && chars[i] != '"' {
                i += 1;
            }
            if i == chars.len() {
                return Err(DslError::IllegalCharacter {
                    span: span(start, i),
                    ch: '"',
                });
            }
            i += 1;
            Tok::Str(chars[start + 1..i - 1].iter().collect())
        } else if c == '\'' {
            // 'x' is a char; a longer quoted run such as 'fire' is a string.
            if i + 2 < chars.len() && chars[i + 2] == '\'' {
                i += 3;
                Tok::Char(chars[start + 1])
            } else {
                i += 1;
                while i < chars.len() && chars[i] != '\'' {
                    i += 1;
                }
                if i == chars.len() || i == start + 1 {
                    return Err(DslError::IllegalCharacter {
                        span: span(start, start + 1),
                        ch: '\'',
                    });
                }
                i += 1;
                Tok::Str(chars[start + 1..i - 1].iter().collect())
            }
        } else {
            let next = chars.get(i + 1).copied();
            let (tok, len) = match (c, next) {
                ('<', Some('=')) => (Tok::Le, 2),
                ('>', Some('=')) => (Tok::Ge, 2),
                ('=', Some('=')) => (Tok::EqEq, 2),
                ('!', Some('=')) => (Tok::Ne, 2),
                (':', _) => (Tok::Colon, 1),
                (',', _) => (Tok::Comma, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                ('[', _) => (Tok::LBracket, 1),
                (']', _) => (Tok::RBracket, 1),
                ('=', _) => (Tok::Assign, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('*', _) => (Tok::Star, 1),
                ('/', _) => (Tok::Slash, 1),
                ('%', _) => (Tok::Percent, 1),
                ('|', _) => (Tok::Pipe, 1),
                ('<', _) => (Tok::Lt, 1),
                ('>', _) => (Tok::Gt, 1),
                _ => {
                    return Err(DslError::IllegalCharacter {
                        span: span(start, start + 1),
                        ch: c,
                    })
                }
            };
            i += len;
            tok
        };
        out.push(Token {
            tok,
            span: span(start, i),
        });
    }
    Ok(())
}
