//! Scope resolution: surface expressions to nameless core terms.

use crate::diagnostic::{Category, Diagnostic, Phase};
use crate::kernel::ResolvedDecl;
use crate::parser::grammar::{Expr, ExprKind, SurfaceDecl};
use crate::parser::lexer::KEYWORDS;
use crate::syntax::{tm, Level, Name, SourceSpan, Term};

/// Primitive heads and the number of arguments each must receive.
pub const PRIMITIVES: &[(&str, usize)] = &[
    ("suc", 1),
    ("natrec", 4),
    ("boolrec", 4),
    ("sumrec", 4),
    ("unitrec", 3),
    ("exfalso", 2),
    ("fst", 1),
    ("snd", 1),
    ("pair", 2),
    ("Id", 3),
    ("refl", 2),
    ("J", 6),
    ("Sum", 2),
    ("inl", 1),
    ("inr", 1),
    ("Trunc", 1),
    ("squash", 1),
    ("truncprop", 3),
    ("truncrec", 5),
];

pub fn primitive_arity(name: &str) -> Option<usize> {
    PRIMITIVES.iter().find(|(n, _)| *n == name).map(|(_, a)| *a)
}

/// Whether `name` can never be used for a binder or declaration.
pub fn is_reserved(name: &str) -> bool {
    KEYWORDS.contains(&name) || primitive_arity(name).is_some()
}

fn scope_error(category: Category, message: String, span: &SourceSpan) -> Diagnostic {
    Diagnostic::new(Phase::Scope, category, message, span.clone())
}

/// Resolver state: the local binders in scope, innermost last.
pub struct Resolver<'a> {
    locals: Vec<String>,
    is_global: &'a dyn Fn(&str) -> bool,
}

impl<'a> Resolver<'a> {
    pub fn new(is_global: &'a dyn Fn(&str) -> bool) -> Resolver<'a> {
        Resolver {
            locals: Vec::new(),
            is_global,
        }
    }

    /// Start with `locals` in scope, outermost first.
    pub fn with_locals(is_global: &'a dyn Fn(&str) -> bool, locals: Vec<String>) -> Resolver<'a> {
        Resolver { locals, is_global }
    }

    fn local_index(&self, name: &str) -> Option<usize> {
        if name == "_" {
            return None;
        }
        self.locals.iter().rev().position(|n| n == name)
    }

    fn check_binder(&self, name: &str, span: &SourceSpan) -> Result<(), Diagnostic> {
        if is_reserved(name) {
            return Err(scope_error(
                Category::ParseError,
                format!("`{name}` is reserved and cannot be bound"),
                span,
            ));
        }
        Ok(())
    }

    fn under<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        self.locals.push(name.to_string());
        let out = f(self);
        self.locals.pop();
        out
    }

    pub fn expr(&mut self, e: &Expr) -> Result<Term, Diagnostic> {
        Ok(match &e.kind {
            ExprKind::Universe(i) => Term::Universe(Level::new(*i).expect("lexer only produces U0..U2")),
            ExprKind::Nat => Term::Nat,
            ExprKind::Zero => Term::Zero,
            ExprKind::Bool => Term::Bool,
            ExprKind::True => Term::True,
            ExprKind::False => Term::False,
            ExprKind::Empty => Term::Empty,
            ExprKind::Unit => Term::Unit,
            ExprKind::Star => Term::Star,
            ExprKind::Lam(x, body) => {
                self.check_binder(x, &e.span)?;
                let body = self.under(x, |r| r.expr(body))?;
                Term::Lambda(x.as_str().into(), tm(body))
            }
            ExprKind::Pi(x, dom, cod) | ExprKind::Sigma(x, dom, cod) => {
                self.check_binder(x, &e.span)?;
                let dom = self.expr(dom)?;
                let cod = self.under(x, |r| r.expr(cod))?;
                if matches!(e.kind, ExprKind::Pi(..)) {
                    Term::Pi(x.as_str().into(), tm(dom), tm(cod))
                } else {
                    Term::Sigma(x.as_str().into(), tm(dom), tm(cod))
                }
            }
            ExprKind::Arrow(dom, cod) | ExprKind::Product(dom, cod) => {
                let dom = self.expr(dom)?;
                let cod = self.under("_", |r| r.expr(cod))?;
                if matches!(e.kind, ExprKind::Arrow(..)) {
                    Term::Pi("_".into(), tm(dom), tm(cod))
                } else {
                    Term::Sigma("_".into(), tm(dom), tm(cod))
                }
            }
            ExprKind::Pair(a, b) => Term::Pair(tm(self.expr(a)?), tm(self.expr(b)?)),
            ExprKind::Ident(_) | ExprKind::App(..) => self.spine(e)?,
        })
    }

    fn spine(&mut self, e: &Expr) -> Result<Term, Diagnostic> {
        let mut args = Vec::new();
        let mut head = e;
        while let ExprKind::App(f, a) = &head.kind {
            args.push(a.as_ref());
            head = f;
        }
        args.reverse();
        let ExprKind::Ident(name) = &head.kind else {
            let f = self.expr(head)?;
            return self.apply_rest(f, &args);
        };
        if let Some(i) = self.local_index(name) {
            return self.apply_rest(Term::Var(i), &args);
        }
        if name == "_" {
            return Err(scope_error(
                Category::UnboundIdentifier,
                "`_` cannot be referenced".to_string(),
                &head.span,
            ));
        }
        if let Some(arity) = primitive_arity(name) {
            if args.len() < arity {
                return Err(scope_error(
                    Category::ArityError,
                    format!("`{name}` expects {arity} arguments, found {}", args.len()),
                    &e.span,
                ));
            }
            let mut xs = Vec::with_capacity(arity);
            for a in &args[..arity] {
                xs.push(tm(self.expr(a)?));
            }
            let t = build_primitive(name, xs);
            return self.apply_rest(t, &args[arity..]);
        }
        if (self.is_global)(name) {
            return self.apply_rest(Term::Def(name.as_str().into()), &args);
        }
        Err(scope_error(
            Category::UnboundIdentifier,
            format!("unbound identifier `{name}`"),
            &head.span,
        ))
    }

    fn apply_rest(&mut self, mut f: Term, args: &[&Expr]) -> Result<Term, Diagnostic> {
        for a in args {
            f = Term::App(tm(f), tm(self.expr(a)?));
        }
        Ok(f)
    }
}

fn build_primitive(name: &str, a: Vec<crate::syntax::Tm>) -> Term {
    let mut it = a.into_iter();
    let mut n = || it.next().expect("arity checked by caller");
    match name {
        "suc" => Term::Suc(n()),
        "natrec" => Term::NatElim(n(), n(), n(), n()),
        "boolrec" => Term::BoolElim(n(), n(), n(), n()),
        "sumrec" => Term::SumElim(n(), n(), n(), n()),
        "unitrec" => Term::UnitElim(n(), n(), n()),
        "exfalso" => Term::ExFalso(n(), n()),
        "fst" => Term::Fst(n()),
        "snd" => Term::Snd(n()),
        "pair" => Term::Pair(n(), n()),
        "Id" => Term::Id(n(), n(), n()),
        "refl" => Term::Refl(n(), n()),
        "J" => Term::J(n(), n(), n(), n(), n(), n()),
        "Sum" => Term::Sum(n(), n()),
        "inl" => Term::Inl(n()),
        "inr" => Term::Inr(n()),
        "Trunc" => Term::Trunc(n()),
        "squash" => Term::Squash(n()),
        "truncprop" => Term::TruncProp(n(), n(), n()),
        "truncrec" => Term::TruncElim(n(), n(), n(), n(), n()),
        other => unreachable!("not a primitive: {other}"),
    }
}

/// Resolve one declaration against the globals visible before it.
pub fn resolve_decl(decl: &SurfaceDecl, is_global: &dyn Fn(&str) -> bool) -> Result<ResolvedDecl, Diagnostic> {
    if is_reserved(&decl.name) || decl.name == "_" {
        return Err(scope_error(
            Category::ParseError,
            format!("`{}` is reserved and cannot be declared", decl.name),
            &decl.span,
        ));
    }
    let mut r = Resolver::new(is_global);
    let ty = r.expr(&decl.ty)?;
    let body = decl.body.as_ref().map(|b| r.expr(b)).transpose()?;
    Ok(ResolvedDecl {
        name: Name::from(decl.name.as_str()),
        ty,
        body,
        span: decl.span.clone(),
    })
}

/// Resolve every declaration in order, each seeing the ones before it.
pub fn resolve_all(
    decls: &[SurfaceDecl],
    ambient: &dyn Fn(&str) -> bool,
) -> Result<Vec<ResolvedDecl>, Diagnostic> {
    let mut seen: Vec<&str> = Vec::new();
    let mut out = Vec::with_capacity(decls.len());
    for d in decls {
        let visible = |n: &str| ambient(n) || seen.contains(&n);
        out.push(resolve_decl(d, &visible)?);
        seen.push(&d.name);
    }
    Ok(out)
}
