use std::sync::Arc;

use crate::diagnostic::{Category, Diagnostic, Phase};
use crate::syntax::SourceSpan;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Def,
    Postulate,
    Fun,
    Universe(u8),
    Nat,
    Zero,
    Bool,
    True,
    False,
    Empty,
    Unit,
    Star,
    Colon,
    Assign,
    Semi,
    FatArrow,
    Arrow,
    Times,
    LParen,
    RParen,
    Comma,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Eof => "end of file".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    pub fn text(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::Def => "def".into(),
            Tok::Postulate => "postulate".into(),
            Tok::Fun => "fun".into(),
            Tok::Universe(i) => format!("U{i}"),
            Tok::Nat => "Nat".into(),
            Tok::Zero => "zero".into(),
            Tok::Bool => "Bool".into(),
            Tok::True => "true".into(),
            Tok::False => "false".into(),
            Tok::Empty => "Empty".into(),
            Tok::Unit => "Unit".into(),
            Tok::Star => "star".into(),
            Tok::Colon => ":".into(),
            Tok::Assign => ":=".into(),
            Tok::Semi => ";".into(),
            Tok::FatArrow => "=>".into(),
            Tok::Arrow => "->".into(),
            Tok::Times => "*".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Comma => ",".into(),
            Tok::Eof => "".into(),
        }
    }
}

/// Reserved words of the surface language.
pub const KEYWORDS: &[&str] = &[
    "def", "postulate", "fun", "U0", "U1", "U2", "Nat", "zero", "Bool", "true", "false", "Empty", "Unit", "star",
];

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "def" => Tok::Def,
        "postulate" => Tok::Postulate,
        "fun" => Tok::Fun,
        "U0" => Tok::Universe(0),
        "U1" => Tok::Universe(1),
        "U2" => Tok::Universe(2),
        "Nat" => Tok::Nat,
        "zero" => Tok::Zero,
        "Bool" => Tok::Bool,
        "true" => Tok::True,
        "false" => Tok::False,
        "Empty" => Tok::Empty,
        "Unit" => Tok::Unit,
        "star" => Tok::Star,
        _ => return None,
    })
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> (u32, u32) {
        (self.line, self.col)
    }
}

/// Split `source` into tokens, ending with `Eof`.
pub fn lex(source: &str, file: &Arc<str>) -> Result<Vec<Token>, Diagnostic> {
    let mut cur = Cursor {
        chars: source.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    let span = |start: (u32, u32), end: (u32, u32)| SourceSpan::new(file.clone(), start, end);
    loop {
        let start = cur.pos();
        let Some(c) = cur.peek() else {
            out.push(Token {
                tok: Tok::Eof,
                span: span(start, start),
            });
            return Ok(out);
        };
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '-' && cur.peek2() == Some('-') {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if c == '{' && cur.peek2() == Some('-') {
            cur.bump();
            cur.bump();
            let mut depth = 1usize;
            while depth > 0 {
                match cur.bump() {
                    None => {
                        return Err(Diagnostic::new(
                            Phase::Lex,
                            Category::UnterminatedComment,
                            "unterminated block comment",
                            span(start, (start.0, start.1 + 1)),
                        ))
                    }
                    Some('{') if cur.peek() == Some('-') => {
                        cur.bump();
                        depth += 1;
                    }
                    Some('-') if cur.peek() == Some('}') => {
                        cur.bump();
                        depth -= 1;
                    }
                    Some(_) => {}
                }
            }
            continue;
        }
        if is_ident_start(c) {
            let mut word = String::new();
            while let Some(c) = cur.peek().filter(|c| is_ident_continue(*c)) {
                word.push(c);
                cur.bump();
            }
            let tok = keyword(&word).unwrap_or(Tok::Ident(word));
            out.push(Token {
                tok,
                span: span(start, end_of(&cur)),
            });
            continue;
        }
        let two = (c, cur.peek2());
        let tok = match two {
            (':', Some('=')) => Some((Tok::Assign, 2)),
            ('=', Some('>')) => Some((Tok::FatArrow, 2)),
            ('-', Some('>')) => Some((Tok::Arrow, 2)),
            (':', _) => Some((Tok::Colon, 1)),
            (';', _) => Some((Tok::Semi, 1)),
            ('*', _) => Some((Tok::Times, 1)),
            ('(', _) => Some((Tok::LParen, 1)),
            (')', _) => Some((Tok::RParen, 1)),
            (',', _) => Some((Tok::Comma, 1)),
            _ => None,
        };
        match tok {
            Some((tok, width)) => {
                for _ in 0..width {
                    cur.bump();
                }
                out.push(Token {
                    tok,
                    span: span(start, end_of(&cur)),
                });
            }
            None => {
                return Err(Diagnostic::new(
                    Phase::Lex,
                    Category::IllegalCharacter,
                    format!("illegal character {c:?}"),
                    span(start, (start.0, start.1 + 1)),
                ))
            }
        }
    }
}

/// Position of the last consumed character (inclusive end).
fn end_of(cur: &Cursor<'_>) -> (u32, u32) {
    (cur.line, cur.col.saturating_sub(1).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        lex(src, &Arc::from("t.hct")).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn keywords_and_symbols() {
        assert_eq!(
            toks("def x : U0 := fun a => a;"),
            vec![
                Tok::Def,
                Tok::Ident("x".into()),
                Tok::Colon,
                Tok::Universe(0),
                Tok::Assign,
                Tok::Fun,
                Tok::Ident("a".into()),
                Tok::FatArrow,
                Tok::Ident("a".into()),
                Tok::Semi,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(toks("-- hi\n{- block {- nested -} -} star"), vec![Tok::Star, Tok::Eof]);
    }

    #[test]
    fn primes_and_digits_in_identifiers() {
        assert_eq!(toks("LEM1' U3"), vec![Tok::Ident("LEM1'".into()), Tok::Ident("U3".into()), Tok::Eof]);
    }

    #[test]
    fn lex_errors() {
        let f: Arc<str> = Arc::from("t.hct");
        let e = lex("def x\n  @", &f).unwrap_err();
        assert_eq!(e.category, Category::IllegalCharacter);
        assert_eq!(e.span.start(), (2, 3));
        let e = lex("{- open", &f).unwrap_err();
        assert_eq!(e.category, Category::UnterminatedComment);
    }

    #[test]
    fn spans_are_one_based() {
        let ts = lex("a\n  bc", &Arc::from("f")).unwrap();
        assert_eq!(ts[0].span.start(), (1, 1));
        assert_eq!(ts[1].span.start(), (2, 3));
        assert_eq!(ts[1].span.end(), (2, 4));
    }
}
