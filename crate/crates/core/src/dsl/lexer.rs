use std::fmt;

use num_bigint::BigInt;

use super::{DslError, Pos};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Token {
    Ident(String),
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Semi,
    Eq,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => write!(f, "identifier `{s}`"),
            Token::Int(n) => write!(f, "number `{n}`"),
            Token::Plus => f.write_str("`+`"),
            Token::Minus => f.write_str("`-`"),
            Token::Star => f.write_str("`*`"),
            Token::Slash => f.write_str("`/`"),
            Token::Caret => f.write_str("`^`"),
            Token::LParen => f.write_str("`(`"),
            Token::RParen => f.write_str("`)`"),
            Token::Comma => f.write_str("`,`"),
            Token::Semi => f.write_str("`;`"),
            Token::Eq => f.write_str("`=`"),
        }
    }
}

/// Splits the input into tokens with 1-based positions. `#` starts a line
/// comment; identifiers may contain `-` between letters so task names like
/// `check-integrability` lex as one word.
pub fn tokenize(text: &str) -> Result<Vec<(Token, Pos)>, DslError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
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
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            col += i - start;
            tokens.push((Token::Int(digits.parse().expect("ascii digits")), pos));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() {
                let ch = chars[i];
                let joins_words = ch == '-'
                    && i + 1 < chars.len()
                    && chars[i + 1].is_alphabetic()
                    && chars[i - 1].is_alphabetic()
                    && is_task_prefix(&chars[start..i]);
                if ch.is_alphanumeric() || ch == '_' || joins_words {
                    i += 1;
                } else {
                    break;
                }
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            tokens.push((Token::Ident(word), pos));
            continue;
        }
        let token = match c {
            '+' => Token::Plus,
            '-' => Token::Minus,
            '*' => Token::Star,
            '/' => Token::Slash,
            '^' => Token::Caret,
            '(' => Token::LParen,
            ')' => Token::RParen,
            ',' => Token::Comma,
            ';' => Token::Semi,
            '=' => Token::Eq,
            other => {
                return Err(DslError::at(pos, format!("unexpected character `{other}`")));
            }
        };
        tokens.push((token, pos));
        i += 1;
        col += 1;
    }
    Ok(tokens)
}

/// Hyphenated words are only the task names, so `x-y` stays a subtraction.
fn is_task_prefix(word: &[char]) -> bool {
    let word: String = word.iter().collect();
    ["check", "decompose", "embed", "analyze"]
        .iter()
        .any(|p| *p == word)
}
