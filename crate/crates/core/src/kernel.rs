//! Bidirectional type checking.
//!
//! `infer` synthesizes a type for variables, universes, type formers,
//! applications, projections and every fully applied eliminator. Lambdas,
//! pairs, injections and `squash` only check against a known type.
//! Everything else checks by inferring and converting.

use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::diagnostic::{Category, Diagnostic, Phase};
use crate::nbe::{arrow_value, case_type, is_prop_type, nat_step_type, CaseTag, Env, Globals, Nbe, Value};
use crate::parser::print::Printer;
use crate::syntax::{Level, Name, SourceSpan, Term};

/// Longest rendering of a type placed in a mismatch message.
const MAX_RENDERED: usize = 4000;

/// A checked top-level declaration.
#[derive(Clone, Debug)]
pub struct Entry {
    pub name: Name,
    pub ty_term: Term,
    pub ty: Value,
    pub body_term: Option<Term>,
    pub body: Option<Value>,
    pub span: SourceSpan,
}

impl Entry {
    pub fn is_postulate(&self) -> bool {
        self.body.is_none()
    }
}

/// Ordered global scope. A module may sit on top of a frozen parent, which
/// lets several files be checked against one shared prefix.
#[derive(Clone, Debug, Default)]
pub struct CheckedModule {
    parent: Option<Arc<CheckedModule>>,
    entries: IndexMap<Name, Arc<Entry>>,
}

impl CheckedModule {
    pub fn new() -> CheckedModule {
        CheckedModule::default()
    }

    /// An empty layer over `parent`.
    pub fn layered(parent: Arc<CheckedModule>) -> CheckedModule {
        CheckedModule {
            parent: Some(parent),
            entries: IndexMap::new(),
        }
    }

    pub fn get(&self, name: &str) -> Option<&Arc<Entry>> {
        self.entries
            .get(name)
            .or_else(|| self.parent.as_ref().and_then(|p| p.get(name)))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    /// Entries of this layer only, in insertion order.
    pub fn local_entries(&self) -> impl Iterator<Item = &Arc<Entry>> {
        self.entries.values()
    }

    /// All entries, parents first.
    pub fn entries(&self) -> Vec<Arc<Entry>> {
        let mut out = self.parent.as_ref().map(|p| p.entries()).unwrap_or_default();
        out.extend(self.entries.values().cloned());
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len() + self.parent.as_ref().map_or(0, |p| p.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn postulate_count(&self) -> usize {
        self.entries().iter().filter(|e| e.is_postulate()).count()
    }

    pub fn local_postulate_count(&self) -> usize {
        self.entries.values().filter(|e| e.is_postulate()).count()
    }

    /// Absorb the entries of a layer built over this module.
    pub fn absorb(&mut self, layer: CheckedModule) {
        self.entries.extend(layer.entries);
    }

    /// This layer's entries without the parent.
    pub fn detach(self) -> CheckedModule {
        CheckedModule {
            parent: None,
            entries: self.entries,
        }
    }

    pub fn insert(&mut self, entry: Entry) {
        self.entries.insert(entry.name.clone(), Arc::new(entry));
    }

    pub fn nbe(&self) -> Nbe<'_> {
        Nbe::new(self)
    }

    /// Normal form of a closed `term : ty`.
    pub fn normalize(&self, term: &Term, ty: &Term) -> Term {
        let nbe = self.nbe();
        let v = nbe.eval_closed(term);
        let t = nbe.eval_closed(ty);
        nbe.normal_form(&v, &t)
    }

    /// Normal form of a closed type.
    pub fn normalize_type(&self, ty: &Term) -> Term {
        let nbe = self.nbe();
        nbe.readback_type(&mut Vec::new(), &nbe.eval_closed(ty))
    }
}

impl Globals for CheckedModule {
    fn global_value(&self, name: &str) -> Option<Option<Value>> {
        self.get(name).map(|e| e.body.clone())
    }

    fn global_type(&self, name: &str) -> Option<Value> {
        self.get(name).map(|e| e.ty.clone())
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{message}")]
pub struct TypeError {
    pub category: Category,
    pub message: String,
    pub expected: Option<String>,
    pub actual: Option<String>,
}

impl TypeError {
    fn new(category: Category, message: impl Into<String>) -> TypeError {
        TypeError {
            category,
            message: message.into(),
            expected: None,
            actual: None,
        }
    }

    pub fn into_diagnostic(self, span: SourceSpan) -> Diagnostic {
        Diagnostic {
            phase: Phase::Type,
            category: self.category,
            message: self.message,
            span,
            expected: self.expected,
            actual: self.actual,
        }
    }
}

pub type TcResult<T> = Result<T, TypeError>;

/// Typing context paired with the evaluation environment that maps each
/// variable to itself.
#[derive(Clone, Debug, Default)]
pub struct Context {
    names: Vec<Name>,
    types: Vec<Value>,
    env: Env,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn env(&self) -> &Env {
        &self.env
    }

    pub fn names(&self) -> &[Name] {
        &self.names
    }

    pub fn types(&self) -> &[Value] {
        &self.types
    }

    /// Extend with a fresh variable of type `ty`, returning the variable.
    pub fn bind(&self, name: Name, ty: Value) -> (Context, Value) {
        let var = Value::var(self.len());
        let mut names = self.names.clone();
        let mut types = self.types.clone();
        names.push(name);
        types.push(ty);
        let ctx = Context {
            names,
            types,
            env: self.env.extend(var.clone()),
        };
        (ctx, var)
    }

    fn lookup(&self, index: usize) -> Option<&Value> {
        self.types.len().checked_sub(index + 1).map(|lvl| &self.types[lvl])
    }
}

/// Domain of one binder in a family, computed from the values bound before it.
type DomainFn = dyn Fn(&[Value]) -> Value;

/// Type checker over a fixed global scope.
pub struct Checker<'m> {
    module: &'m CheckedModule,
}

impl<'m> Checker<'m> {
    pub fn new(module: &'m CheckedModule) -> Checker<'m> {
        Checker { module }
    }

    fn nbe(&self) -> Nbe<'m> {
        Nbe::new(self.module)
    }

    pub fn eval(&self, ctx: &Context, term: &Term) -> Value {
        self.nbe().eval(ctx.env(), term)
    }

    fn printer(&self) -> Printer<'_> {
        Printer::new(self.module)
    }

    fn render_type(&self, ctx: &Context, ty: &Value) -> String {
        let term = self.nbe().readback_type(&mut ctx.types.clone(), ty);
        let mut s = self.printer().term(&term, &ctx.names);
        if s.len() > MAX_RENDERED {
            let cut = (0..=MAX_RENDERED).rev().find(|i| s.is_char_boundary(*i)).unwrap_or(0);
            s.truncate(cut);
            s.push_str(" ...");
        }
        s
    }

    fn render_term(&self, ctx: &Context, term: &Term) -> String {
        let mut s = self.printer().term(term, &ctx.names);
        if s.len() > 300 {
            let cut = (0..=300).rev().find(|i| s.is_char_boundary(*i)).unwrap_or(0);
            s.truncate(cut);
            s.push_str(" ...");
        }
        s
    }

    fn mismatch(&self, ctx: &Context, term: &Term, what: &str, expected: &Value, actual: &Value) -> TypeError {
        let category = match (expected, actual) {
            (Value::Universe(_), Value::Universe(_)) => Category::UniverseViolation,
            _ => Category::TypeMismatch,
        };
        TypeError {
            category,
            message: format!("{what} `{}`", self.render_term(ctx, term)),
            expected: Some(self.render_type(ctx, expected)),
            actual: Some(self.render_type(ctx, actual)),
        }
    }

    fn shape_error(&self, ctx: &Context, term: &Term, expected: &str, actual: &Value) -> TypeError {
        TypeError {
            category: Category::TypeMismatch,
            message: format!("`{}` should have {expected}", self.render_term(ctx, term)),
            expected: Some(expected.to_string()),
            actual: Some(self.render_type(ctx, actual)),
        }
    }

    pub fn convert_types(&self, ctx: &Context, a: &Value, b: &Value) -> bool {
        self.nbe().convert_types(&mut ctx.types.clone(), a, b)
    }

    pub fn convert(&self, ctx: &Context, a: &Value, b: &Value, ty: &Value) -> bool {
        self.nbe().convert(&mut ctx.types.clone(), a, b, ty)
    }

    /// Check that `term` is a type, returning its level. A bare universe is
    /// accepted at any level, including the top one.
    pub fn check_sort(&self, ctx: &Context, term: &Term) -> TcResult<Option<Level>> {
        match term {
            Term::Universe(l) => Ok(l.succ()),
            _ => self.check_type(ctx, term).map(Some),
        }
    }

    /// Infer the universe that `term` inhabits.
    pub fn check_type(&self, ctx: &Context, term: &Term) -> TcResult<Level> {
        let ty = self.infer(ctx, term)?;
        match ty {
            Value::Universe(l) => Ok(l),
            other => Err(self.shape_error(ctx, term, "a universe as its type", &other)),
        }
    }

    pub fn infer(&self, ctx: &Context, term: &Term) -> TcResult<Value> {
        use Term as T;
        match term {
            T::Var(i) => ctx
                .lookup(*i)
                .cloned()
                .ok_or_else(|| TypeError::new(Category::Internal, format!("unbound de Bruijn index {i}"))),
            T::Def(name) => self
                .module
                .get(name)
                .map(|e| e.ty.clone())
                .ok_or_else(|| TypeError::new(Category::UnboundGlobal, format!("unknown global `{name}`"))),
            T::Universe(l) => match l.succ() {
                Some(up) => Ok(Value::Universe(up)),
                None => Err(TypeError::new(
                    Category::UniverseViolation,
                    format!("{l} is the top universe and has no type"),
                )),
            },
            T::Pi(h, a, b) | T::Sigma(h, a, b) => {
                let la = self.check_type(ctx, a)?;
                let (inner, _) = ctx.bind(h.clone(), self.eval(ctx, a));
                let lb = self.check_type(&inner, b)?;
                Ok(Value::Universe(la.max(lb)))
            }
            T::Sum(a, b) => {
                let la = self.check_type(ctx, a)?;
                let lb = self.check_type(ctx, b)?;
                Ok(Value::Universe(la.max(lb)))
            }
            T::Empty | T::Unit | T::Bool | T::Nat => Ok(Value::Universe(Level::new(0).unwrap())),
            T::Star => Ok(Value::Unit),
            T::True | T::False => Ok(Value::Bool),
            T::Zero => Ok(Value::Nat),
            T::Suc(n) => {
                self.check(ctx, n, &Value::Nat)?;
                Ok(Value::Nat)
            }
            T::Trunc(a) => Ok(Value::Universe(self.check_type(ctx, a)?)),
            T::App(f, a) => {
                let fty = self.infer(ctx, f)?;
                match fty {
                    Value::Pi(_, dom, cod) => {
                        self.check(ctx, a, &dom)?;
                        Ok(self.nbe().instantiate(&cod, self.eval(ctx, a)))
                    }
                    other => Err(self.shape_error(ctx, f, "a function type", &other)),
                }
            }
            T::Fst(p) => match self.infer(ctx, p)? {
                Value::Sigma(_, a, _) => Ok((*a).clone()),
                other => Err(self.shape_error(ctx, p, "a Sigma type", &other)),
            },
            T::Snd(p) => match self.infer(ctx, p)? {
                Value::Sigma(_, _, b) => {
                    let first = self.nbe().fst(&self.eval(ctx, p));
                    Ok(self.nbe().instantiate(&b, first))
                }
                other => Err(self.shape_error(ctx, p, "a Sigma type", &other)),
            },
            T::Id(a, x, y) => {
                let l = self.check_type(ctx, a)?;
                let av = self.eval(ctx, a);
                self.check(ctx, x, &av)?;
                self.check(ctx, y, &av)?;
                Ok(Value::Universe(l))
            }
            T::Refl(a, x) => {
                self.check_type(ctx, a)?;
                let av = self.eval(ctx, a);
                self.check(ctx, x, &av)?;
                let xv = Arc::new(self.eval(ctx, x));
                Ok(Value::Id(Arc::new(av), xv.clone(), xv))
            }
            T::J(a, x, c, d, y, p) => {
                self.check_type(ctx, a)?;
                let av = self.eval(ctx, a);
                self.check(ctx, x, &av)?;
                let xv = self.eval(ctx, x);
                {
                    let (av, xv) = (av.clone(), xv.clone());
                    let first = move |_: &[Value]| av.clone();
                    let ty_for_second = self.eval(ctx, a);
                    let second = move |bound: &[Value]| {
                        Value::Id(
                            Arc::new(ty_for_second.clone()),
                            Arc::new(xv.clone()),
                            Arc::new(bound[0].clone()),
                        )
                    };
                    self.check_family(ctx, c, &[&first, &second], Vec::new())?;
                }
                let cv = self.eval(ctx, c);
                let nbe = self.nbe();
                let refl = Value::Refl(Arc::new(av.clone()), Arc::new(xv.clone()));
                let refl_ty = nbe.apply(&nbe.apply(&cv, xv.clone()), refl);
                self.check(ctx, d, &refl_ty)?;
                self.check(ctx, y, &av)?;
                let yv = self.eval(ctx, y);
                let path_ty = Value::Id(Arc::new(av), Arc::new(xv), Arc::new(yv.clone()));
                self.check(ctx, p, &path_ty)?;
                let pv = self.eval(ctx, p);
                Ok(nbe.apply(&nbe.apply(&cv, yv), pv))
            }
            T::ExFalso(c, e) => {
                self.check_type(ctx, c)?;
                self.check(ctx, e, &Value::Empty)?;
                Ok(self.eval(ctx, c))
            }
            T::UnitElim(c, s, u) => {
                self.check_motive(ctx, c, Value::Unit)?;
                let cv = self.eval(ctx, c);
                self.check(ctx, s, &self.nbe().apply(&cv, Value::Star))?;
                self.check(ctx, u, &Value::Unit)?;
                Ok(self.nbe().apply(&cv, self.eval(ctx, u)))
            }
            T::BoolElim(c, t, f, b) => {
                self.check_motive(ctx, c, Value::Bool)?;
                let cv = self.eval(ctx, c);
                self.check(ctx, t, &self.nbe().apply(&cv, Value::True))?;
                self.check(ctx, f, &self.nbe().apply(&cv, Value::False))?;
                self.check(ctx, b, &Value::Bool)?;
                Ok(self.nbe().apply(&cv, self.eval(ctx, b)))
            }
            T::SumElim(c, l, r, s) => {
                let sty = match self.infer(ctx, s) {
                    Ok(ty) => ty,
                    Err(e) if e.category == Category::NotInferable => {
                        return Err(TypeError::new(
                            Category::NotInferable,
                            format!(
                                "the scrutinee of `sumrec` must be inferable: `{}`",
                                self.render_term(ctx, s)
                            ),
                        ))
                    }
                    Err(e) => return Err(e),
                };
                let (a, b) = match &sty {
                    Value::Sum(a, b) => (a.clone(), b.clone()),
                    other => return Err(self.shape_error(ctx, s, "a Sum type", other)),
                };
                self.check_motive(ctx, c, sty.clone())?;
                let cv = Arc::new(self.eval(ctx, c));
                self.check(ctx, l, &case_type(&cv, a, CaseTag::Inl))?;
                self.check(ctx, r, &case_type(&cv, b, CaseTag::Inr))?;
                Ok(self.nbe().apply(&cv, self.eval(ctx, s)))
            }
            T::NatElim(c, z, s, n) => {
                self.check_motive(ctx, c, Value::Nat)?;
                let cv = Arc::new(self.eval(ctx, c));
                self.check(ctx, z, &self.nbe().apply(&cv, Value::Zero))?;
                self.check(ctx, s, &nat_step_type(&cv))?;
                self.check(ctx, n, &Value::Nat)?;
                Ok(self.nbe().apply(&cv, self.eval(ctx, n)))
            }
            T::TruncProp(a, x, y) => {
                self.check_type(ctx, a)?;
                let trunc = Value::Trunc(Arc::new(self.eval(ctx, a)));
                self.check(ctx, x, &trunc)?;
                self.check(ctx, y, &trunc)?;
                Ok(Value::Id(
                    Arc::new(trunc),
                    Arc::new(self.eval(ctx, x)),
                    Arc::new(self.eval(ctx, y)),
                ))
            }
            T::TruncElim(a, b, prf, f, t) => {
                self.check_type(ctx, a)?;
                self.check_type(ctx, b)?;
                let av = Arc::new(self.eval(ctx, a));
                let bv = Arc::new(self.eval(ctx, b));
                self.check(ctx, prf, &is_prop_type(&bv))?;
                self.check(ctx, f, &arrow_value(av.clone(), bv.clone()))?;
                self.check(ctx, t, &Value::Trunc(av))?;
                Ok((*bv).clone())
            }
            T::Lambda(..) | T::Pair(..) | T::Inl(_) | T::Inr(_) | T::Squash(_) => Err(TypeError::new(
                Category::NotInferable,
                format!(
                    "cannot infer a type for `{}`; it needs a known expected type",
                    self.render_term(ctx, term)
                ),
            )),
        }
    }

    pub fn check(&self, ctx: &Context, term: &Term, expected: &Value) -> TcResult<()> {
        match (term, expected) {
            (Term::Lambda(h, body), Value::Pi(_, dom, cod)) => {
                let (inner, x) = ctx.bind(h.clone(), (**dom).clone());
                let body_ty = self.nbe().instantiate(cod, x);
                self.check(&inner, body, &body_ty)
            }
            (Term::Pair(a, b), Value::Sigma(_, dom, cod)) => {
                self.check(ctx, a, dom)?;
                let second = self.nbe().instantiate(cod, self.eval(ctx, a));
                self.check(ctx, b, &second)
            }
            (Term::Inl(a), Value::Sum(l, _)) => self.check(ctx, a, l),
            (Term::Inr(b), Value::Sum(_, r)) => self.check(ctx, b, r),
            (Term::Squash(a), Value::Trunc(inner)) => self.check(ctx, a, inner),
            (Term::Lambda(..), _) => Err(self.shape_error(ctx, term, "a function type", expected)),
            (Term::Pair(..), _) => Err(self.shape_error(ctx, term, "a Sigma type", expected)),
            (Term::Inl(_) | Term::Inr(_), _) => Err(self.shape_error(ctx, term, "a Sum type", expected)),
            (Term::Squash(_), _) => Err(self.shape_error(ctx, term, "a truncation type", expected)),
            _ => {
                let actual = self.infer(ctx, term)?;
                if self.convert_types(ctx, &actual, expected) {
                    Ok(())
                } else {
                    Err(self.mismatch(ctx, term, "type mismatch in", expected, &actual))
                }
            }
        }
    }

    /// Check a one-argument motive `C : (x : dom) -> U_j` for some `j`.
    fn check_motive(&self, ctx: &Context, motive: &Term, dom: Value) -> TcResult<()> {
        let first = move |_: &[Value]| dom.clone();
        self.check_family(ctx, motive, &[&first], Vec::new())
    }

    /// Check that `term` is a type family over the telescope `doms`, each
    /// domain computed from the variables bound before it.
    fn check_family(
        &self,
        ctx: &Context,
        term: &Term,
        doms: &[&DomainFn],
        mut bound: Vec<Value>,
    ) -> TcResult<()> {
        match (doms.split_first(), term) {
            (None, _) => self.check_type(ctx, term).map(|_| ()),
            (Some((dom, rest)), Term::Lambda(h, body)) => {
                let (inner, x) = ctx.bind(h.clone(), dom(&bound));
                bound.push(x);
                self.check_family(&inner, body, rest, bound)
            }
            (Some(_), _) => {
                let ty = self.infer(ctx, term)?;
                self.check_pi_family(ctx, term, ty, doms, bound)
            }
        }
    }

    fn check_pi_family(
        &self,
        ctx: &Context,
        term: &Term,
        ty: Value,
        doms: &[&DomainFn],
        mut bound: Vec<Value>,
    ) -> TcResult<()> {
        match doms.split_first() {
            None => match ty {
                Value::Universe(_) => Ok(()),
                other => Err(self.shape_error(ctx, term, "a type family as its type", &other)),
            },
            Some((dom, rest)) => match ty {
                Value::Pi(h, d, cod) => {
                    let want = dom(&bound);
                    if !self.convert_types(ctx, &d, &want) {
                        return Err(self.mismatch(ctx, term, "motive has the wrong domain:", &want, &d));
                    }
                    let (inner, x) = ctx.bind(h, (*d).clone());
                    let next = self.nbe().instantiate(&cod, x.clone());
                    bound.push(x);
                    self.check_pi_family(&inner, term, next, rest, bound)
                }
                other => Err(self.shape_error(ctx, term, "a type family as its type", &other)),
            },
        }
    }
}

/// A resolved declaration ready for checking.
#[derive(Clone, Debug)]
pub struct ResolvedDecl {
    pub name: Name,
    pub ty: Term,
    pub body: Option<Term>,
    pub span: SourceSpan,
}

/// Check one declaration and add it to `module`.
pub fn check_declaration(module: &mut CheckedModule, decl: &ResolvedDecl) -> Result<(), Diagnostic> {
    if module.contains(&decl.name) {
        return Err(Diagnostic::new(
            Phase::Scope,
            Category::DuplicateName,
            format!("`{}` is already defined", decl.name),
            decl.span.clone(),
        ));
    }
    let (ty, body) = {
        let checker = Checker::new(module);
        let ctx = Context::new();
        checker
            .check_sort(&ctx, &decl.ty)
            .map_err(|e| e.into_diagnostic(decl.span.clone()))?;
        let ty = checker.eval(&ctx, &decl.ty);
        let body = match &decl.body {
            Some(b) => {
                checker
                    .check(&ctx, b, &ty)
                    .map_err(|e| e.into_diagnostic(decl.span.clone()))?;
                Some(checker.eval(&ctx, b))
            }
            None => None,
        };
        (ty, body)
    };
    module.insert(Entry {
        name: decl.name.clone(),
        ty_term: decl.ty.clone(),
        ty,
        body_term: decl.body.clone(),
        body,
        span: decl.span.clone(),
    });
    Ok(())
}

/// Infer the type of a closed term and return it as a normal type term.
pub fn infer_closed(module: &CheckedModule, term: &Term) -> TcResult<Term> {
    let checker = Checker::new(module);
    let ty = checker.infer(&Context::new(), term)?;
    Ok(module.nbe().readback_type(&mut Vec::new(), &ty))
}

/// Check a closed term against a closed type term.
pub fn check_closed(module: &CheckedModule, term: &Term, ty: &Term) -> TcResult<()> {
    let checker = Checker::new(module);
    let ctx = Context::new();
    checker.check_sort(&ctx, ty)?;
    let tyv = checker.eval(&ctx, ty);
    checker.check(&ctx, term, &tyv)
}
