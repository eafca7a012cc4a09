//! Core terms of the calculus.
//!
//! Terms are nameless: a variable is the number of binders between its
//! occurrence and the binder that introduced it. Binder forms keep a name
//! hint for the printer, but the hint never takes part in equality, so the
//! derived notion of equality on [`Term`] *is* alpha-equivalence.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Global and binder names.
pub type Name = Arc<str>;

/// Shared, immutable subterm.
pub type Tm = Arc<Term>;

/// A universe level. The tower is `U0 : U1 : U2`, and `U2` has no type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Level(u8);

impl Level {
    pub const MAX: u8 = 2;

    pub fn new(index: u8) -> Option<Level> {
        (index <= Self::MAX).then_some(Level(index))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    /// The level of the universe that classifies `U{self}`, if there is one.
    pub fn succ(self) -> Option<Level> {
        Level::new(self.0 + 1)
    }

    pub fn max(self, other: Level) -> Level {
        Level(self.0.max(other.0))
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "U{}", self.0)
    }
}

/// Source position range, 1-based lines and columns.
#[derive(Clone, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub start_line: u32,
    pub start_column: u32,
    pub end_line: u32,
    pub end_column: u32,
}

impl SourceSpan {
    pub fn new(file: Arc<str>, start: (u32, u32), end: (u32, u32)) -> SourceSpan {
        SourceSpan {
            file,
            start_line: start.0,
            start_column: start.1,
            end_line: end.0,
            end_column: end.1,
        }
    }

    pub fn point(file: Arc<str>, line: u32, column: u32) -> SourceSpan {
        SourceSpan::new(file, (line, column), (line, column))
    }

    pub fn start(&self) -> (u32, u32) {
        (self.start_line, self.start_column)
    }

    pub fn end(&self) -> (u32, u32) {
        (self.end_line, self.end_column)
    }

    /// Smallest span covering both.
    pub fn join(&self, other: &SourceSpan) -> SourceSpan {
        SourceSpan::new(
            self.file.clone(),
            self.start().min(other.start()),
            self.end().max(other.end()),
        )
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_column)
    }
}

/// Core syntax. Every eliminator is a fully applied primitive that carries
/// its motive explicitly.
#[derive(Clone, Debug)]
pub enum Term {
    Var(usize),
    Universe(Level),
    Pi(Name, Tm, Tm),
    Lambda(Name, Tm),
    App(Tm, Tm),
    Sigma(Name, Tm, Tm),
    Pair(Tm, Tm),
    Fst(Tm),
    Snd(Tm),
    /// `Id A a b`
    Id(Tm, Tm, Tm),
    /// `refl A a`
    Refl(Tm, Tm),
    /// `J A a C c b p`
    J(Tm, Tm, Tm, Tm, Tm, Tm),
    Empty,
    /// `exfalso C e`
    ExFalso(Tm, Tm),
    Unit,
    Star,
    /// `unitrec C c u`
    UnitElim(Tm, Tm, Tm),
    Bool,
    True,
    False,
    /// `boolrec C t f b`
    BoolElim(Tm, Tm, Tm, Tm),
    Sum(Tm, Tm),
    Inl(Tm),
    Inr(Tm),
    /// `sumrec C l r s`
    SumElim(Tm, Tm, Tm, Tm),
    Nat,
    Zero,
    Suc(Tm),
    /// `natrec C z s n`
    NatElim(Tm, Tm, Tm, Tm),
    Trunc(Tm),
    Squash(Tm),
    /// `truncprop A x y : Id (Trunc A) x y`
    TruncProp(Tm, Tm, Tm),
    /// `truncrec A B prf f t`
    TruncElim(Tm, Tm, Tm, Tm, Tm),
    Def(Name),
}

/// Raised when index arithmetic goes below zero: a checker defect, never a
/// user error.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("internal error: de Bruijn index {index} underflows when shifted by {amount}")]
pub struct ScopeDefect {
    pub index: usize,
    pub amount: isize,
}

pub fn tm(term: Term) -> Tm {
    Arc::new(term)
}

impl Term {
    pub fn app(f: Term, a: Term) -> Term {
        Term::App(tm(f), tm(a))
    }

    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn lam(hint: &str, body: Term) -> Term {
        Term::Lambda(hint.into(), tm(body))
    }

    pub fn pi(hint: &str, dom: Term, cod: Term) -> Term {
        Term::Pi(hint.into(), tm(dom), tm(cod))
    }

    /// Non-dependent function type; `cod` is shifted past the unused binder.
    pub fn arrow(dom: Term, cod: Term) -> Term {
        Term::Pi("_".into(), tm(dom), tm(cod.shifted(0, 1)))
    }

    pub fn sigma(hint: &str, first: Term, second: Term) -> Term {
        Term::Sigma(hint.into(), tm(first), tm(second))
    }

    pub fn universe(index: u8) -> Term {
        Term::Universe(Level::new(index).expect("universe level out of range"))
    }

    pub fn nat_literal(n: usize) -> Term {
        (0..n).fold(Term::Zero, |acc, _| Term::Suc(tm(acc)))
    }

    /// `Some(n)` when the term is `suc^n zero`.
    pub fn as_nat_literal(&self) -> Option<usize> {
        let mut n = 0;
        let mut cur = self;
        loop {
            match cur {
                Term::Zero => return Some(n),
                Term::Suc(inner) => {
                    n += 1;
                    cur = inner;
                }
                _ => return None,
            }
        }
    }

    /// Immediate subterms, each paired with the number of binders it sits under.
    pub fn children(&self) -> Vec<(usize, &Tm)> {
        use Term::*;
        match self {
            Var(_) | Universe(_) | Empty | Unit | Star | Bool | True | False | Nat | Zero | Def(_) => {
                vec![]
            }
            Pi(_, a, b) | Sigma(_, a, b) => vec![(0, a), (1, b)],
            Lambda(_, b) => vec![(1, b)],
            App(a, b) | Pair(a, b) | Refl(a, b) | ExFalso(a, b) | Sum(a, b) => vec![(0, a), (0, b)],
            Fst(a) | Snd(a) | Inl(a) | Inr(a) | Suc(a) | Trunc(a) | Squash(a) => vec![(0, a)],
            Id(a, b, c) | TruncProp(a, b, c) | UnitElim(a, b, c) => vec![(0, a), (0, b), (0, c)],
            J(a, b, c, d, e, f) => vec![(0, a), (0, b), (0, c), (0, d), (0, e), (0, f)],
            BoolElim(a, b, c, d) | SumElim(a, b, c, d) | NatElim(a, b, c, d) => {
                vec![(0, a), (0, b), (0, c), (0, d)]
            }
            TruncElim(a, b, c, d, e) => vec![(0, a), (0, b), (0, c), (0, d), (0, e)],
        }
    }

    /// Rebuild this node with each child transformed by `f(binders, child)`.
    pub fn map_children<E>(
        &self,
        mut f: impl FnMut(usize, &Tm) -> Result<Term, E>,
    ) -> Result<Term, E> {
        use Term::*;
        let mut g = |k: usize, t: &Tm| f(k, t).map(tm);
        Ok(match self {
            Var(_) | Universe(_) | Empty | Unit | Star | Bool | True | False | Nat | Zero | Def(_) => {
                self.clone()
            }
            Pi(h, a, b) => Pi(h.clone(), g(0, a)?, g(1, b)?),
            Sigma(h, a, b) => Sigma(h.clone(), g(0, a)?, g(1, b)?),
            Lambda(h, b) => Lambda(h.clone(), g(1, b)?),
            App(a, b) => App(g(0, a)?, g(0, b)?),
            Pair(a, b) => Pair(g(0, a)?, g(0, b)?),
            Refl(a, b) => Refl(g(0, a)?, g(0, b)?),
            ExFalso(a, b) => ExFalso(g(0, a)?, g(0, b)?),
            Sum(a, b) => Sum(g(0, a)?, g(0, b)?),
            Fst(a) => Fst(g(0, a)?),
            Snd(a) => Snd(g(0, a)?),
            Inl(a) => Inl(g(0, a)?),
            Inr(a) => Inr(g(0, a)?),
            Suc(a) => Suc(g(0, a)?),
            Trunc(a) => Trunc(g(0, a)?),
            Squash(a) => Squash(g(0, a)?),
            Id(a, b, c) => Id(g(0, a)?, g(0, b)?, g(0, c)?),
            TruncProp(a, b, c) => TruncProp(g(0, a)?, g(0, b)?, g(0, c)?),
            UnitElim(a, b, c) => UnitElim(g(0, a)?, g(0, b)?, g(0, c)?),
            J(a, b, c, d, e, h) => J(g(0, a)?, g(0, b)?, g(0, c)?, g(0, d)?, g(0, e)?, g(0, h)?),
            BoolElim(a, b, c, d) => BoolElim(g(0, a)?, g(0, b)?, g(0, c)?, g(0, d)?),
            SumElim(a, b, c, d) => SumElim(g(0, a)?, g(0, b)?, g(0, c)?, g(0, d)?),
            NatElim(a, b, c, d) => NatElim(g(0, a)?, g(0, b)?, g(0, c)?, g(0, d)?),
            TruncElim(a, b, c, d, e) => {
                TruncElim(g(0, a)?, g(0, b)?, g(0, c)?, g(0, d)?, g(0, e)?)
            }
        })
    }

    /// Displace free indices `>= cutoff` by `amount`.
    pub fn shift(&self, cutoff: usize, amount: isize) -> Result<Term, ScopeDefect> {
        if amount == 0 {
            return Ok(self.clone());
        }
        match self {
            Term::Var(i) if *i >= cutoff => {
                let shifted = *i as isize + amount;
                if shifted < cutoff as isize {
                    Err(ScopeDefect { index: *i, amount })
                } else {
                    Ok(Term::Var(shifted as usize))
                }
            }
            Term::Var(_) => Ok(self.clone()),
            _ => self.map_children(|k, child| child.shift(cutoff + k, amount)),
        }
    }

    /// Shift by a non-negative amount, which cannot fail.
    pub fn shifted(&self, cutoff: usize, amount: usize) -> Term {
        self.shift(cutoff, amount as isize)
            .expect("non-negative shift cannot underflow")
    }

    /// Replace free index `index` by `replacement`; free indices above it
    /// move down by one.
    pub fn substitute(&self, index: usize, replacement: &Term) -> Result<Term, ScopeDefect> {
        self.subst_at(index, replacement, 0)
    }

    fn subst_at(&self, index: usize, replacement: &Term, depth: usize) -> Result<Term, ScopeDefect> {
        match self {
            Term::Var(i) if *i == index + depth => Ok(replacement.shifted(0, depth)),
            Term::Var(i) if *i > index + depth => Ok(Term::Var(i - 1)),
            Term::Var(_) => Ok(self.clone()),
            _ => self.map_children(|k, child| child.subst_at(index, replacement, depth + k)),
        }
    }

    /// Whether every free index is below `depth`.
    pub fn is_closed_under(&self, depth: usize) -> bool {
        match self {
            Term::Var(i) => *i < depth,
            _ => self
                .children()
                .into_iter()
                .all(|(k, child)| child.is_closed_under(depth + k)),
        }
    }

    /// Whether free index `index` occurs.
    pub fn mentions(&self, index: usize) -> bool {
        match self {
            Term::Var(i) => *i == index,
            _ => self
                .children()
                .into_iter()
                .any(|(k, child)| child.mentions(index + k)),
        }
    }

    /// Names of every global referenced, in first-occurrence order.
    pub fn globals(&self) -> Vec<Name> {
        fn go(t: &Term, out: &mut Vec<Name>) {
            if let Term::Def(n) = t {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
            for (_, c) in t.children() {
                go(c, out);
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    /// Node count.
    pub fn size(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(|(_, c)| c.size())
            .sum::<usize>()
    }
}

/// Structural comparison; binder hints are ignored.
pub fn alpha_equal(a: &Term, b: &Term) -> bool {
    use Term::*;
    if let (Var(i), Var(j)) = (a, b) {
        return i == j;
    }
    let same_node = match (a, b) {
        (Universe(i), Universe(j)) => i == j,
        (Def(x), Def(y)) => x == y,
        _ => std::mem::discriminant(a) == std::mem::discriminant(b),
    };
    if !same_node {
        return false;
    }
    let (ca, cb) = (a.children(), b.children());
    ca.len() == cb.len()
        && ca
            .iter()
            .zip(cb.iter())
            .all(|((_, x), (_, y))| Arc::ptr_eq(x, y) || alpha_equal(x, y))
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        alpha_equal(self, other)
    }
}

impl Eq for Term {}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(i: usize) -> Term {
        Term::Var(i)
    }

    #[test]
    fn shift_free_variable() {
        assert_eq!(var(0).shift(0, 1).unwrap(), var(1));
    }

    #[test]
    fn shift_leaves_bound_variable() {
        let t = Term::lam("x", var(0));
        assert_eq!(t.shift(0, 5).unwrap(), t);
    }

    #[test]
    fn shift_under_binder() {
        let t = Term::lam("x", var(3));
        assert_eq!(t.shift(0, 2).unwrap(), Term::lam("x", var(5)));
    }

    #[test]
    fn negative_shift_underflow_is_reported() {
        let err = var(0).shift(0, -1).unwrap_err();
        assert_eq!(err, ScopeDefect { index: 0, amount: -1 });
        assert_eq!(var(3).shift(2, -1).unwrap(), var(2));
        assert!(var(2).shift(2, -1).is_err());
    }

    #[test]
    fn substitute_variable() {
        assert_eq!(var(0).substitute(0, &Term::Nat).unwrap(), Term::Nat);
    }

    #[test]
    fn substitute_under_binder() {
        let t = Term::lam("y", Term::app(var(1), var(0)));
        let expected = Term::lam("y", Term::app(Term::Bool, var(0)));
        assert_eq!(t.substitute(0, &Term::Bool).unwrap(), expected);
    }

    #[test]
    fn substitute_shifts_replacement_under_binders() {
        // (fun y => x0) [x0 := x5]  =  fun y => x6
        let t = Term::lam("y", var(1));
        assert_eq!(t.substitute(0, &var(5)).unwrap(), Term::lam("y", var(6)));
    }

    #[test]
    fn substitute_decrements_higher_indices() {
        let t = Term::app(var(0), var(2));
        assert_eq!(t.substitute(0, &Term::Star).unwrap(), Term::app(Term::Star, var(1)));
    }

    #[test]
    fn alpha_equality_ignores_hints() {
        assert!(alpha_equal(&Term::lam("x", var(0)), &Term::lam("y", var(0))));
        assert!(!alpha_equal(&Term::universe(0), &Term::universe(1)));
        assert!(!alpha_equal(&Term::Def("a".into()), &Term::Def("b".into())));
        assert!(!alpha_equal(&Term::Inl(tm(Term::Star)), &Term::Inr(tm(Term::Star))));
    }

    #[test]
    fn level_bounds() {
        assert!(Level::new(3).is_none());
        assert_eq!(Level::new(1).unwrap().succ(), Level::new(2));
        assert_eq!(Level::new(2).unwrap().succ(), None);
    }

    #[test]
    fn nat_literals() {
        assert_eq!(Term::nat_literal(3).as_nat_literal(), Some(3));
        assert_eq!(Term::Star.as_nat_literal(), None);
    }

    #[test]
    fn closedness() {
        assert!(Term::lam("x", var(0)).is_closed_under(0));
        assert!(!Term::lam("x", var(1)).is_closed_under(0));
        assert!(Term::lam("x", var(1)).is_closed_under(1));
    }
}
