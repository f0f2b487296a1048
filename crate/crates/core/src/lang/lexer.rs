use crate::error::{Error, Result};
use crate::lang::ast::Pos;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Int(i64),
    Ident(String),
    /// Reserved word, lowercase or the upper-case gain operators.
    Kw(&'static str),
    /// Punctuation or operator, ASCII spelling.
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

const KEYWORDS: &[&str] = &[
    "hidden", "visible", "const", "bool", "int", "skip", "if", "then", "else", "fi", "while", "do",
    "od", "invariant", "print", "true", "false", "and", "or", "not", "div", "mod", "max", "min",
    "in", "notin", "MAX", "PLUS", "AND",
];

// Longest first so that `:=` wins over `:`.
const SYMBOLS: &[&str] = &[
    ":=", "..", "!=", "<=", ">=", "@post", ";", ",", ":", "(", ")", "[", "]", "{", "}", "+", "-",
    "*", "/", "&", "=", "<", ">", "|",
];

fn unicode_alias(c: char) -> Option<Tok> {
    Some(match c {
        '∧' => Tok::Kw("and"),
        '∨' => Tok::Kw("or"),
        '¬' => Tok::Kw("not"),
        '≠' => Tok::Sym("!="),
        '≤' => Tok::Sym("<="),
        '≥' => Tok::Sym(">="),
        '×' | '·' => Tok::Sym("*"),
        '∈' => Tok::Kw("in"),
        '∉' => Tok::Kw("notin"),
        _ => return None,
    })
}

pub fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
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
            let radix = if c == '0' && matches!(chars.get(i + 1), Some('b') | Some('B')) {
                i += 2;
                2
            } else {
                10
            };
            let digits_start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[digits_start..i].iter().filter(|&&c| c != '_').collect();
            let n = i64::from_str_radix(&text, radix)
                .map_err(|_| Error::parse(line, col, format!("bad integer literal `{}`", chars[start..i].iter().collect::<String>())))?;
            col += i - start;
            out.push(Token { tok: Tok::Int(n), pos });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match KEYWORDS.iter().find(|&&k| k == word) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(word),
            };
            out.push(Token { tok, pos });
            continue;
        }
        if let Some(tok) = unicode_alias(c) {
            i += 1;
            col += 1;
            out.push(Token { tok, pos });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 5)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(*s)) {
            Some(s) => {
                i += s.chars().count();
                col += s.chars().count();
                out.push(Token { tok: Tok::Sym(s), pos });
            }
            None => return Err(Error::parse(line, col, format!("unexpected character `{c}`"))),
        }
    }
    out.push(Token { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}
