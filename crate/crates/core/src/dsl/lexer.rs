use super::SourceSpan;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Number(f64),
    Tilde,
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Eol,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(v) => format!("number `{v}`"),
            Tok::Eol => "end of line".into(),
            Tok::Tilde => "`~`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Ne => "`!=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

/// Lexical error: offending text and its span.
#[derive(Debug, Clone)]
pub(crate) struct LexError {
    pub found: String,
    pub expected: &'static str,
    pub span: SourceSpan,
}

/// Tokenize one line (without its terminator). Comments run from `#` to the
/// end of the line. The result always ends with `Tok::Eol`.
pub(crate) fn lex_line(line: &str, line_no: usize) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = line.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let span = |start: usize, len: usize| SourceSpan {
        line: line_no,
        column: start + 1,
        length: len,
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        let start = i;
        let single = match c {
            '~' => Some(Tok::Tilde),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' | '×' => Some(Tok::Star),
            '/' | '÷' => Some(Tok::Slash),
            '=' => Some(Tok::Eq),
            '≠' => Some(Tok::Ne),
            '≤' => Some(Tok::Le),
            '≥' => Some(Tok::Ge),
            _ => None,
        };
        if let Some(tok) = single {
            toks.push(Token {
                tok,
                span: span(start, 1),
            });
            i += 1;
            continue;
        }
        let next = chars.get(i + 1).copied();
        let pair = match (c, next) {
            ('!', Some('=')) => Some(Tok::Ne),
            ('<', Some('=')) => Some(Tok::Le),
            ('>', Some('=')) => Some(Tok::Ge),
            _ => None,
        };
        if let Some(tok) = pair {
            toks.push(Token {
                tok,
                span: span(start, 2),
            });
            i += 2;
            continue;
        }
        match c {
            '<' => {
                toks.push(Token {
                    tok: Tok::Lt,
                    span: span(start, 1),
                });
                i += 1;
            }
            '>' => {
                toks.push(Token {
                    tok: Tok::Gt,
                    span: span(start, 1),
                });
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                toks.push(Token {
                    tok: Tok::Ident(text),
                    span: span(start, i - start),
                });
            }
            c if c.is_ascii_digit() || c == '.' => {
                let end = scan_number(&chars, i);
                let text: String = chars[start..end].iter().collect();
                match text.parse::<f64>() {
                    Ok(v) if v.is_finite() => {
                        toks.push(Token {
                            tok: Tok::Number(v),
                            span: span(start, end - start),
                        });
                    }
                    _ => {
                        return Err(LexError {
                            found: text,
                            expected: "a finite decimal number",
                            span: span(start, end - start),
                        })
                    }
                }
                i = end;
            }
            other => {
                return Err(LexError {
                    found: other.to_string(),
                    expected: "a token",
                    span: span(start, 1),
                })
            }
        }
    }
    toks.push(Token {
        tok: Tok::Eol,
        span: span(chars.len(), 0),
    });
    Ok(toks)
}

/// End of a decimal literal `digits [. digits] [(e|E) [+-] digits]` starting
/// at `i`.
fn scan_number(chars: &[char], mut i: usize) -> usize {
    let digits = |i: &mut usize| {
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            *i += 1;
        }
    };
    digits(&mut i);
    if i < chars.len() && chars[i] == '.' {
        i += 1;
        digits(&mut i);
    }
    if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
        let mut j = i + 1;
        if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
            j += 1;
        }
        if j < chars.len() && chars[j].is_ascii_digit() {
            i = j;
            digits(&mut i);
        }
    }
    i
}
