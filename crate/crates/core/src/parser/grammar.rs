//! Recursive-descent parser for the surface grammar:
//!
//! ```text
//! module  := { decl } ;
//! decl    := "def" IDENT ":" term ":=" term ";" | "postulate" IDENT ":" term ";" ;
//! term    := binder | arrow ;
//! binder  := "fun" IDENT "=>" term ;
//! arrow   := sigma [ "->" term ] | "(" IDENT ":" term ")" "->" term ;
//! sigma   := app [ "*" sigma ] | "(" IDENT ":" term ")" "*" sigma ;
//! app     := atom { atom } ;
//! atom    := IDENT | "U0" | "U1" | "U2" | "Nat" | "zero" | "Bool" | "true" | "false"
//!          | "Empty" | "Unit" | "star" | "(" term ")" | "(" term "," term ")" ;
//! ```

use std::sync::Arc;

use crate::diagnostic::{Category, Diagnostic, Phase};
use crate::parser::lexer::{lex, Tok, Token};
use crate::syntax::SourceSpan;

/// Nesting bound that keeps adversarial input from exhausting the stack.
const MAX_DEPTH: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Ident(String),
    Universe(u8),
    Nat,
    Zero,
    Bool,
    True,
    False,
    Empty,
    Unit,
    Star,
    Lam(String, Box<Expr>),
    Pi(String, Box<Expr>, Box<Expr>),
    Arrow(Box<Expr>, Box<Expr>),
    Sigma(String, Box<Expr>, Box<Expr>),
    Product(Box<Expr>, Box<Expr>),
    App(Box<Expr>, Box<Expr>),
    Pair(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: SourceSpan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeclKind {
    Definition,
    Postulate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceDecl {
    pub kind: DeclKind,
    pub name: String,
    pub ty: Expr,
    pub body: Option<Expr>,
    pub span: SourceSpan,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span.clone()
    }

    fn prev_span(&self) -> SourceSpan {
        self.tokens[self.pos.saturating_sub(1)].span.clone()
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, what: &str) -> Diagnostic {
        Diagnostic::new(
            Phase::Parse,
            Category::ParseError,
            format!("expected {what}, found {}", self.peek().describe()),
            self.span(),
        )
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(self.error(&format!("`{}`", tok.text())))
        }
    }

    fn ident(&mut self) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().span;
                Ok((name, span))
            }
            _ => Err(self.error("an identifier")),
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(Diagnostic::new(
                Phase::Parse,
                Category::ParseError,
                format!("expression nested more than {MAX_DEPTH} levels deep"),
                self.span(),
            ));
        }
        Ok(())
    }

    fn module(&mut self) -> PResult<Vec<SurfaceDecl>> {
        let mut decls = Vec::new();
        while *self.peek() != Tok::Eof {
            decls.push(self.decl()?);
        }
        Ok(decls)
    }

    fn decl(&mut self) -> PResult<SurfaceDecl> {
        let start = self.span();
        let kind = match self.peek() {
            Tok::Def => DeclKind::Definition,
            Tok::Postulate => DeclKind::Postulate,
            _ => return Err(self.error("`def` or `postulate`")),
        };
        self.bump();
        let (name, _) = self.ident()?;
        self.expect(Tok::Colon)?;
        let ty = self.term()?;
        let body = match kind {
            DeclKind::Definition => {
                self.expect(Tok::Assign)?;
                Some(self.term()?)
            }
            DeclKind::Postulate => None,
        };
        let end = self.expect(Tok::Semi)?.span;
        Ok(SurfaceDecl {
            kind,
            name,
            ty,
            body,
            span: start.join(&end),
        })
    }

    fn term(&mut self) -> PResult<Expr> {
        self.enter()?;
        let out = if *self.peek() == Tok::Fun {
            let start = self.bump().span;
            let (name, _) = self.ident()?;
            self.expect(Tok::FatArrow)?;
            let body = self.term()?;
            Expr {
                span: start.join(&body.span),
                kind: ExprKind::Lam(name, Box::new(body)),
            }
        } else {
            self.arrow()?
        };
        self.depth -= 1;
        Ok(out)
    }

    fn at_binder_group(&self) -> bool {
        *self.peek() == Tok::LParen && matches!(self.peek_at(1), Tok::Ident(_)) && *self.peek_at(2) == Tok::Colon
    }

    /// `"(" IDENT ":" term ")"`
    fn binder_group(&mut self) -> PResult<(String, Expr, SourceSpan)> {
        let start = self.bump().span;
        let (name, _) = self.ident()?;
        self.expect(Tok::Colon)?;
        let dom = self.term()?;
        self.expect(Tok::RParen)?;
        Ok((name, dom, start))
    }

    fn arrow(&mut self) -> PResult<Expr> {
        let left = if self.at_binder_group() {
            let (name, dom, start) = self.binder_group()?;
            match self.peek() {
                Tok::Arrow => {
                    self.bump();
                    let cod = self.term()?;
                    return Ok(Expr {
                        span: start.join(&cod.span),
                        kind: ExprKind::Pi(name, Box::new(dom), Box::new(cod)),
                    });
                }
                Tok::Times => {
                    self.bump();
                    let rest = self.sigma()?;
                    Expr {
                        span: start.join(&rest.span),
                        kind: ExprKind::Sigma(name, Box::new(dom), Box::new(rest)),
                    }
                }
                _ => return Err(self.error("`->` or `*` after a binder")),
            }
        } else {
            self.sigma()?
        };
        if *self.peek() == Tok::Arrow {
            self.bump();
            let cod = self.term()?;
            return Ok(Expr {
                span: left.span.join(&cod.span),
                kind: ExprKind::Arrow(Box::new(left), Box::new(cod)),
            });
        }
        Ok(left)
    }

    fn sigma(&mut self) -> PResult<Expr> {
        self.enter()?;
        let out = if self.at_binder_group() {
            let (name, dom, start) = self.binder_group()?;
            self.expect(Tok::Times)?;
            let rest = self.sigma()?;
            Expr {
                span: start.join(&rest.span),
                kind: ExprKind::Sigma(name, Box::new(dom), Box::new(rest)),
            }
        } else {
            let left = self.app()?;
            if *self.peek() == Tok::Times {
                self.bump();
                let rest = self.sigma()?;
                Expr {
                    span: left.span.join(&rest.span),
                    kind: ExprKind::Product(Box::new(left), Box::new(rest)),
                }
            } else {
                left
            }
        };
        self.depth -= 1;
        Ok(out)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_)
                | Tok::Universe(_)
                | Tok::Nat
                | Tok::Zero
                | Tok::Bool
                | Tok::True
                | Tok::False
                | Tok::Empty
                | Tok::Unit
                | Tok::Star
                | Tok::LParen
        )
    }

    fn app(&mut self) -> PResult<Expr> {
        let mut head = self.atom()?;
        while self.starts_atom() {
            let arg = self.atom()?;
            head = Expr {
                span: head.span.join(&arg.span),
                kind: ExprKind::App(Box::new(head), Box::new(arg)),
            };
        }
        Ok(head)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Ident(name) => ExprKind::Ident(name),
            Tok::Universe(i) => ExprKind::Universe(i),
            Tok::Nat => ExprKind::Nat,
            Tok::Zero => ExprKind::Zero,
            Tok::Bool => ExprKind::Bool,
            Tok::True => ExprKind::True,
            Tok::False => ExprKind::False,
            Tok::Empty => ExprKind::Empty,
            Tok::Unit => ExprKind::Unit,
            Tok::Star => ExprKind::Star,
            Tok::LParen => {
                self.enter()?;
                self.bump();
                let first = self.term()?;
                let out = match self.peek() {
                    Tok::RParen => {
                        self.bump();
                        Expr {
                            kind: first.kind,
                            span: span.join(&self.prev_span()),
                        }
                    }
                    Tok::Comma => {
                        self.bump();
                        let second = self.term()?;
                        self.expect(Tok::RParen)?;
                        Expr {
                            kind: ExprKind::Pair(Box::new(first), Box::new(second)),
                            span: span.join(&self.prev_span()),
                        }
                    }
                    _ => return Err(self.error("`)` or `,`")),
                };
                self.depth -= 1;
                return Ok(out);
            }
            _ => return Err(self.error("an expression")),
        };
        self.bump();
        Ok(Expr { kind, span })
    }
}

fn parser_for(source: &str, file: &str) -> PResult<Parser> {
    let file: Arc<str> = Arc::from(file);
    Ok(Parser {
        tokens: lex(source, &file)?,
        pos: 0,
        depth: 0,
    })
}

/// Parse a whole file. Duplicate declaration names are reported here.
pub fn parse_module(source: &str, file: &str) -> Result<Vec<SurfaceDecl>, Diagnostic> {
    let decls = parser_for(source, file)?.module()?;
    let mut seen = std::collections::HashSet::new();
    for d in &decls {
        if !seen.insert(d.name.as_str()) {
            return Err(Diagnostic::new(
                Phase::Scope,
                Category::DuplicateName,
                format!("`{}` is declared more than once in this file", d.name),
                d.span.clone(),
            ));
        }
    }
    Ok(decls)
}

/// Parse a single expression occupying the whole input.
pub fn parse_expr(source: &str, file: &str) -> Result<Expr, Diagnostic> {
    let mut p = parser_for(source, file)?;
    let e = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error("end of input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kind(src: &str) -> ExprKind {
        parse_expr(src, "t").unwrap().kind
    }

    #[test]
    fn identity_declaration() {
        let ds = parse_module("def id : (A : U0) -> A -> A := fun A => fun x => x;", "t").unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds[0].kind, DeclKind::Definition);
        match &ds[0].body.as_ref().unwrap().kind {
            ExprKind::Lam(a, inner) => {
                assert_eq!(a, "A");
                assert!(matches!(inner.kind, ExprKind::Lam(..)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_body_reports_semicolon() {
        let e = parse_module("def x : U0 := ;", "t").unwrap_err();
        assert_eq!(e.category, Category::ParseError);
        assert_eq!(e.span.start(), (1, 15));
    }

    #[test]
    fn arrows_are_right_associative_and_sigma_binds_tighter() {
        match kind("A -> B -> C") {
            ExprKind::Arrow(_, r) => assert!(matches!(r.kind, ExprKind::Arrow(..))),
            other => panic!("{other:?}"),
        }
        match kind("A * B -> C") {
            ExprKind::Arrow(l, _) => assert!(matches!(l.kind, ExprKind::Product(..))),
            other => panic!("{other:?}"),
        }
        match kind("A * B * C") {
            ExprKind::Product(_, r) => assert!(matches!(r.kind, ExprKind::Product(..))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dependent_sigma_then_arrow() {
        match kind("(x : A) * B x -> C") {
            ExprKind::Arrow(l, _) => assert!(matches!(l.kind, ExprKind::Sigma(..))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn application_is_left_associative() {
        match kind("f a b") {
            ExprKind::App(l, _) => assert!(matches!(l.kind, ExprKind::App(..))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pairs_and_parens() {
        assert!(matches!(kind("(a, b)"), ExprKind::Pair(..)));
        assert!(matches!(kind("(a)"), ExprKind::Ident(_)));
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let src = "(".repeat(10_000);
        assert_eq!(parse_expr(&src, "t").unwrap_err().category, Category::ParseError);
    }

    #[test]
    fn duplicates_are_scope_errors() {
        let e = parse_module("def a : Unit := star; def a : Unit := star;", "t").unwrap_err();
        assert_eq!(e.category, Category::DuplicateName);
        assert_eq!(e.phase, Phase::Scope);
    }
}
