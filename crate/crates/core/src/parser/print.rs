//! Pretty-printer producing surface syntax that reparses to the same term.

use crate::kernel::{CheckedModule, ResolvedDecl};
use crate::parser::resolve::is_reserved;
use crate::syntax::{Name, Term, Tm};

// Precedence levels, loosest first.
const TERM: u8 = 0;
const SIGMA: u8 = 1;
const APP: u8 = 2;
const ATOM: u8 = 3;

pub struct Printer<'a> {
    is_global: Box<dyn Fn(&str) -> bool + 'a>,
}

impl<'a> Printer<'a> {
    /// Printer that avoids binder names clashing with the globals of `module`.
    pub fn new(module: &'a CheckedModule) -> Printer<'a> {
        Printer {
            is_global: Box::new(move |n| module.contains(n)),
        }
    }

    pub fn with_globals(is_global: impl Fn(&str) -> bool + 'a) -> Printer<'a> {
        Printer {
            is_global: Box::new(is_global),
        }
    }

    /// Print `term` under local names `names`, outermost first.
    pub fn term(&self, term: &Term, names: &[Name]) -> String {
        let mut scope: Vec<String> = names.iter().map(|n| n.to_string()).collect();
        let mut out = String::new();
        self.go(term, &mut scope, TERM, &mut out);
        out
    }

    pub fn decl(&self, decl: &ResolvedDecl) -> String {
        let ty = self.term(&decl.ty, &[]);
        match &decl.body {
            Some(b) => format!("def {} : {} := {};", decl.name, ty, self.term(b, &[])),
            None => format!("postulate {} : {};", decl.name, ty),
        }
    }

    pub fn module(&self, decls: &[ResolvedDecl]) -> String {
        let mut out = String::new();
        for d in decls {
            out.push_str(&self.decl(d));
            out.push('\n');
        }
        out
    }

    fn fresh(&self, hint: &str, used: bool, scope: &[String]) -> String {
        if hint == "_" && !used {
            return "_".to_string();
        }
        let base = if hint == "_" { "x" } else { hint };
        let taken = |n: &str| scope.iter().any(|s| s == n) || (self.is_global)(n) || is_reserved(n);
        if !taken(base) {
            return base.to_string();
        }
        (1..)
            .map(|i| format!("{base}{i}"))
            .find(|n| !taken(n))
            .expect("unbounded search")
    }

    fn go(&self, t: &Term, scope: &mut Vec<String>, prec: u8, out: &mut String) {
        let own = precedence(t);
        let paren = own < prec;
        if paren {
            out.push('(');
        }
        self.body(t, scope, out);
        if paren {
            out.push(')');
        }
    }

    fn bind(&self, hint: &str, body: &Term, scope: &[String]) -> String {
        self.fresh(hint, body.mentions(0), scope)
    }

    fn body(&self, t: &Term, scope: &mut Vec<String>, out: &mut String) {
        use Term as T;
        match t {
            T::Var(i) => match scope.len().checked_sub(i + 1) {
                Some(lvl) => out.push_str(&scope[lvl]),
                None => out.push_str(&format!("#{i}")),
            },
            T::Universe(l) => out.push_str(&l.to_string()),
            T::Def(n) => out.push_str(n),
            T::Empty => out.push_str("Empty"),
            T::Unit => out.push_str("Unit"),
            T::Star => out.push_str("star"),
            T::Bool => out.push_str("Bool"),
            T::True => out.push_str("true"),
            T::False => out.push_str("false"),
            T::Nat => out.push_str("Nat"),
            T::Zero => out.push_str("zero"),
            T::Lambda(h, b) => {
                let x = self.bind(h, b, scope);
                out.push_str(&format!("fun {x} => "));
                scope.push(x);
                self.go(b, scope, TERM, out);
                scope.pop();
            }
            T::Pi(h, a, b) | T::Sigma(h, a, b) => {
                let is_pi = matches!(t, T::Pi(..));
                let op = if is_pi { " -> " } else { " * " };
                let rest = if is_pi { TERM } else { SIGMA };
                if b.mentions(0) {
                    let x = self.bind(h, b, scope);
                    out.push_str(&format!("({x} : "));
                    self.go(a, scope, TERM, out);
                    out.push(')');
                    out.push_str(op);
                    scope.push(x);
                } else {
                    self.go(a, scope, if is_pi { SIGMA } else { APP }, out);
                    out.push_str(op);
                    scope.push("_".to_string());
                }
                self.go(b, scope, rest, out);
                scope.pop();
            }
            T::Pair(a, b) => {
                out.push('(');
                self.go(a, scope, TERM, out);
                out.push_str(", ");
                self.go(b, scope, TERM, out);
                out.push(')');
            }
            T::App(f, a) => {
                self.go(f, scope, APP, out);
                out.push(' ');
                self.go(a, scope, ATOM, out);
            }
            _ => {
                let (head, args) = primitive_parts(t);
                out.push_str(head);
                for a in args {
                    out.push(' ');
                    self.go(a, scope, ATOM, out);
                }
            }
        }
    }
}

fn precedence(t: &Term) -> u8 {
    match t {
        Term::Lambda(..) | Term::Pi(..) => TERM,
        Term::Sigma(..) => SIGMA,
        Term::App(..)
        | Term::Fst(_)
        | Term::Snd(_)
        | Term::Id(..)
        | Term::Refl(..)
        | Term::J(..)
        | Term::ExFalso(..)
        | Term::UnitElim(..)
        | Term::BoolElim(..)
        | Term::Sum(..)
        | Term::Inl(_)
        | Term::Inr(_)
        | Term::SumElim(..)
        | Term::Suc(_)
        | Term::NatElim(..)
        | Term::Trunc(_)
        | Term::Squash(_)
        | Term::TruncProp(..)
        | Term::TruncElim(..) => APP,
        _ => ATOM,
    }
}

fn primitive_parts(t: &Term) -> (&'static str, Vec<&Tm>) {
    use Term as T;
    match t {
        T::Fst(a) => ("fst", vec![a]),
        T::Snd(a) => ("snd", vec![a]),
        T::Id(a, x, y) => ("Id", vec![a, x, y]),
        T::Refl(a, x) => ("refl", vec![a, x]),
        T::J(a, x, c, d, y, p) => ("J", vec![a, x, c, d, y, p]),
        T::ExFalso(c, e) => ("exfalso", vec![c, e]),
        T::UnitElim(c, s, u) => ("unitrec", vec![c, s, u]),
        T::BoolElim(c, x, y, b) => ("boolrec", vec![c, x, y, b]),
        T::Sum(a, b) => ("Sum", vec![a, b]),
        T::Inl(a) => ("inl", vec![a]),
        T::Inr(a) => ("inr", vec![a]),
        T::SumElim(c, l, r, s) => ("sumrec", vec![c, l, r, s]),
        T::Suc(n) => ("suc", vec![n]),
        T::NatElim(c, z, s, n) => ("natrec", vec![c, z, s, n]),
        T::Trunc(a) => ("Trunc", vec![a]),
        T::Squash(a) => ("squash", vec![a]),
        T::TruncProp(a, x, y) => ("truncprop", vec![a, x, y]),
        T::TruncElim(a, b, p, f, s) => ("truncrec", vec![a, b, p, f, s]),
        other => unreachable!("not a primitive form: {other:?}"),
    }
}
