use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Var(String),
    Anon,
    Int(i64),
    Str(String),
    Not,
    If,
    Dot,
    Comma,
    Semi,
    Colon,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eq,
    EqEq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    Plus,
    Minus,
    /// Operators and punctuation the fragment does not support, kept verbatim.
    Other(String),
    /// `#directive`
    Directive(String),
    Eof,
}

impl Tok {
    pub(crate) fn text(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) | Tok::Other(s) => s.clone(),
            Tok::Directive(s) => format!("#{s}"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Int(i) => i.to_string(),
            Tok::Anon => "_".into(),
            Tok::Not => "not".into(),
            Tok::If => ":-".into(),
            Tok::Dot => ".".into(),
            Tok::Comma => ",".into(),
            Tok::Semi => ";".into(),
            Tok::Colon => ":".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::LBrace => "{".into(),
            Tok::RBrace => "}".into(),
            Tok::Eq => "=".into(),
            Tok::EqEq => "==".into(),
            Tok::Ne => "!=".into(),
            Tok::Lt => "<".into(),
            Tok::Gt => ">".into(),
            Tok::Le => "<=".into(),
            Tok::Ge => ">=".into(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
    /// Byte offset of the token start.
    pub offset: usize,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! advance {
        () => {{
            if chars[i].1 == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let (offset, c) = chars[i];
        let peek = chars.get(i + 1).map(|&(_, c)| c);
        let (tl, tc) = (line, col);
        let push = |out: &mut Vec<Token>, tok: Tok| out.push(Token { tok, line: tl, column: tc, offset });

        if c.is_whitespace() {
            advance!();
            continue;
        }
        if c == '%' {
            if peek == Some('*') {
                return Err(ParseError::Unsupported { line, column: col, construct: "block comment".into() });
            }
            while i < chars.len() && chars[i].1 != '\n' {
                advance!();
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                advance!();
            }
            let text: String = chars[start..i].iter().map(|&(_, c)| c).collect();
            let value = text.parse::<i64>().map_err(|_| ParseError::Syntax {
                line: tl,
                column: tc,
                token: text.clone(),
                message: "integer literal out of range".into(),
            })?;
            push(&mut out, Tok::Int(value));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_' || chars[i].1 == '\'') {
                advance!();
            }
            let text: String = chars[start..i].iter().map(|&(_, c)| c).collect();
            let tok = if text == "_" {
                Tok::Anon
            } else if text == "not" {
                Tok::Not
            } else if text.starts_with(|c: char| c.is_uppercase() || c == '_') {
                Tok::Var(text)
            } else {
                Tok::Ident(text)
            };
            push(&mut out, tok);
            continue;
        }
        if c == '"' {
            advance!();
            let mut s = String::new();
            loop {
                if i >= chars.len() {
                    return Err(ParseError::Syntax { line: tl, column: tc, token: "\"".into(), message: "unterminated string".into() });
                }
                let ch = chars[i].1;
                if ch == '\\' && i + 1 < chars.len() {
                    advance!();
                    s.push(chars[i].1);
                    advance!();
                    continue;
                }
                advance!();
                if ch == '"' {
                    break;
                }
                s.push(ch);
            }
            push(&mut out, Tok::Str(s));
            continue;
        }
        if c == '#' {
            advance!();
            let start = i;
            while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                advance!();
            }
            let name: String = chars[start..i].iter().map(|&(_, c)| c).collect();
            push(&mut out, Tok::Directive(name));
            continue;
        }

        let two: Option<(&str, Tok)> = match (c, peek) {
            (':', Some('-')) => Some((":-", Tok::If)),
            ('=', Some('=')) => Some(("==", Tok::EqEq)),
            ('!', Some('=')) => Some(("!=", Tok::Ne)),
            ('<', Some('=')) => Some(("<=", Tok::Le)),
            ('>', Some('=')) => Some((">=", Tok::Ge)),
            ('<', Some('>')) => Some(("<>", Tok::Ne)),
            ('.', Some('.')) => Some(("..", Tok::Other("..".into()))),
            ('*', Some('*')) => Some(("**", Tok::Other("**".into()))),
            (':', Some('~')) => Some((":~", Tok::Other(":~".into()))),
            _ => None,
        };
        if let Some((_, tok)) = two {
            push(&mut out, tok);
            advance!();
            advance!();
            continue;
        }
        let tok = match c {
            '.' => Tok::Dot,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            ':' => Tok::Colon,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '=' => Tok::Eq,
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            other => Tok::Other(other.to_string()),
        };
        push(&mut out, tok);
        advance!();
    }
    out.push(Token { tok: Tok::Eof, line, column: col, offset: src.len() });
    Ok(out)
}
