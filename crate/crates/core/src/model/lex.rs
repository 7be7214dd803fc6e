//! Tokenizer for the `.pta` model format.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(String),
    LBrace,
    RBrace,
    Semi,
    Comma,
    Colon,
    Assign,
    AndAnd,
    Bang,
    Plus,
    Minus,
    Star,
    Lt,
    Le,
    EqRel,
    Ge,
    Gt,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Number(s) => write!(f, "number `{s}`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Assign => write!(f, "`:=`"),
            Tok::AndAnd => write!(f, "`&&`"),
            Tok::Bang => write!(f, "`!`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Lt => write!(f, "`<`"),
            Tok::Le => write!(f, "`<=`"),
            Tok::EqRel => write!(f, "`=`"),
            Tok::Ge => write!(f, "`>=`"),
            Tok::Gt => write!(f, "`>`"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// A parse problem with its source position, 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for Diagnostic {}

pub fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut tokens = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();

    macro_rules! push {
        ($tok:expr, $len:expr) => {{
            tokens.push(Token {
                tok: $tok,
                line,
                col,
            });
            col += $len;
        }};
    }

    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '{' => {
                chars.next();
                push!(Tok::LBrace, 1);
            }
            '}' => {
                chars.next();
                push!(Tok::RBrace, 1);
            }
            ';' => {
                chars.next();
                push!(Tok::Semi, 1);
            }
            ',' => {
                chars.next();
                push!(Tok::Comma, 1);
            }
            '+' => {
                chars.next();
                push!(Tok::Plus, 1);
            }
            '-' => {
                chars.next();
                push!(Tok::Minus, 1);
            }
            '*' => {
                chars.next();
                push!(Tok::Star, 1);
            }
            '!' => {
                chars.next();
                push!(Tok::Bang, 1);
            }
            '=' => {
                chars.next();
                push!(Tok::EqRel, 1);
            }
            ':' => {
                chars.next();
                if chars.peek() == Some(&'=') {
                    chars.next();
                    push!(Tok::Assign, 2);
                } else {
                    push!(Tok::Colon, 1);
                }
            }
            '<' => {
                chars.next();
                if chars.peek() == Some(&'=') {
                    chars.next();
                    push!(Tok::Le, 2);
                } else {
                    push!(Tok::Lt, 1);
                }
            }
            '>' => {
                chars.next();
                if chars.peek() == Some(&'=') {
                    chars.next();
                    push!(Tok::Ge, 2);
                } else {
                    push!(Tok::Gt, 1);
                }
            }
            '&' => {
                chars.next();
                if chars.peek() == Some(&'&') {
                    chars.next();
                    push!(Tok::AndAnd, 2);
                } else {
                    return Err(Diagnostic {
                        line,
                        col,
                        message: "expected `&&`".to_string(),
                    });
                }
            }
            c if c.is_ascii_digit() => {
                let mut text = String::new();
                let mut len = 0usize;
                let mut seen_sep = false;
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() || ((c == '.' || c == '/') && !seen_sep) {
                        if c == '.' || c == '/' {
                            seen_sep = true;
                        }
                        text.push(c);
                        chars.next();
                        len += 1;
                    } else {
                        break;
                    }
                }
                push!(Tok::Number(text), len);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut text = String::new();
                let mut len = 0usize;
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        text.push(c);
                        chars.next();
                        len += 1;
                    } else {
                        break;
                    }
                }
                push!(Tok::Ident(text), len);
            }
            other => {
                return Err(Diagnostic {
                    line,
                    col,
                    message: format!("unexpected character {other:?}"),
                });
            }
        }
    }
    Ok(tokens)
}
