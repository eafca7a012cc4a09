//! Normalization by evaluation.
//!
//! Terms evaluate into [`Value`]s, where every redex has already fired and
//! binders are closures over an [`Env`]. Values are read back into
//! beta-normal, eta-long terms by a type-directed [`Nbe::readback`]:
//! anything at a Pi type comes back as a lambda and anything at a Sigma
//! type as a pair. Conversion checking is readback of both sides followed by
//! alpha-comparison.

use std::sync::Arc;

use crate::syntax::{tm, Level, Name, Term, Tm};

/// Access to checked top-level definitions.
pub trait Globals {
    /// `Some(Some(v))` for a definition with value `v`, `Some(None)` for a
    /// postulate, `None` when the name is unknown.
    fn global_value(&self, name: &str) -> Option<Option<Value>>;
    fn global_type(&self, name: &str) -> Option<Value>;
}

pub type Val = Arc<Value>;

#[derive(Clone, Debug)]
pub enum Value {
    Universe(Level),
    Pi(Name, Val, Closure),
    Lam(Name, Closure),
    Sigma(Name, Val, Closure),
    Pair(Val, Val),
    Id(Val, Val, Val),
    Refl(Val, Val),
    Empty,
    Unit,
    Star,
    Bool,
    True,
    False,
    Sum(Val, Val),
    Inl(Val),
    Inr(Val),
    Nat,
    Zero,
    Suc(Val),
    Trunc(Val),
    Squash(Val),
    Neutral(Arc<Neutral>),
}

/// A computation blocked on a variable, a postulate, or a truncation path.
#[derive(Clone, Debug)]
pub enum Neutral {
    /// De Bruijn *level* of a bound variable.
    Var(usize),
    Postulate(Name),
    /// The path constructor of the truncation, `truncprop A x y`.
    TruncProp(Val, Val, Val),
    App(Arc<Neutral>, Val),
    Fst(Arc<Neutral>),
    Snd(Arc<Neutral>),
    J {
        ty: Val,
        base: Val,
        motive: Val,
        refl_case: Val,
        endpoint: Val,
        path: Arc<Neutral>,
    },
    ExFalso(Val, Arc<Neutral>),
    UnitElim(Val, Val, Arc<Neutral>),
    BoolElim(Val, Val, Val, Arc<Neutral>),
    SumElim(Val, Val, Val, Arc<Neutral>),
    NatElim(Val, Val, Val, Arc<Neutral>),
    TruncElim {
        source: Val,
        target: Val,
        is_prop: Val,
        func: Val,
        scrutinee: Arc<Neutral>,
    },
}

/// Evaluation environment, innermost binding first.
#[derive(Clone, Debug, Default)]
pub struct Env {
    head: Option<Arc<EnvNode>>,
    len: usize,
}

#[derive(Debug)]
struct EnvNode {
    value: Value,
    next: Option<Arc<EnvNode>>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn extend(&self, value: Value) -> Env {
        Env {
            head: Some(Arc::new(EnvNode {
                value,
                next: self.head.clone(),
            })),
            len: self.len + 1,
        }
    }

    /// Value bound to de Bruijn index `index`.
    pub fn get(&self, index: usize) -> Option<&Value> {
        let mut node = self.head.as_deref()?;
        for _ in 0..index {
            node = node.next.as_deref()?;
        }
        Some(&node.value)
    }

    /// Environment of `n` fresh variables at levels `0..n`.
    pub fn identity(n: usize) -> Env {
        (0..n).fold(Env::new(), |env, level| env.extend(Value::var(level)))
    }
}

/// An open term together with the environment for its free variables,
/// waiting for one more value.
#[derive(Clone, Debug)]
pub struct Closure {
    pub env: Env,
    pub body: Tm,
}

impl Closure {
    pub fn new(env: Env, body: Tm) -> Closure {
        Closure { env, body }
    }
}

impl Value {
    pub fn var(level: usize) -> Value {
        Value::Neutral(Arc::new(Neutral::Var(level)))
    }

    pub fn neutral(ne: Neutral) -> Value {
        Value::Neutral(Arc::new(ne))
    }

    pub fn as_universe(&self) -> Option<Level> {
        match self {
            Value::Universe(l) => Some(*l),
            _ => None,
        }
    }
}

fn val(v: Value) -> Val {
    Arc::new(v)
}

/// Evaluation and readback against a fixed set of globals.
#[derive(Clone, Copy)]
pub struct Nbe<'g> {
    pub globals: &'g dyn Globals,
}

fn clash(what: &str, v: &Value) -> ! {
    panic!("internal error: {what} applied to non-canonical value {v:?}")
}

impl<'g> Nbe<'g> {
    pub fn new(globals: &'g dyn Globals) -> Nbe<'g> {
        Nbe { globals }
    }

    pub fn eval(&self, env: &Env, term: &Term) -> Value {
        use Term as T;
        let ev = |t: &Tm| val(self.eval(env, t));
        match term {
            T::Var(i) => env
                .get(*i)
                .cloned()
                .unwrap_or_else(|| panic!("internal error: unbound index {i}")),
            T::Universe(l) => Value::Universe(*l),
            T::Pi(h, a, b) => Value::Pi(h.clone(), ev(a), Closure::new(env.clone(), b.clone())),
            T::Lambda(h, b) => Value::Lam(h.clone(), Closure::new(env.clone(), b.clone())),
            T::App(f, a) => self.apply(&self.eval(env, f), self.eval(env, a)),
            T::Sigma(h, a, b) => {
                Value::Sigma(h.clone(), ev(a), Closure::new(env.clone(), b.clone()))
            }
            T::Pair(a, b) => Value::Pair(ev(a), ev(b)),
            T::Fst(p) => self.fst(&self.eval(env, p)),
            T::Snd(p) => self.snd(&self.eval(env, p)),
            T::Id(a, x, y) => Value::Id(ev(a), ev(x), ev(y)),
            T::Refl(a, x) => Value::Refl(ev(a), ev(x)),
            T::J(a, x, c, d, y, p) => {
                self.j(ev(a), ev(x), ev(c), ev(d), ev(y), self.eval(env, p))
            }
            T::Empty => Value::Empty,
            T::ExFalso(c, e) => self.exfalso(ev(c), self.eval(env, e)),
            T::Unit => Value::Unit,
            T::Star => Value::Star,
            T::UnitElim(c, s, u) => self.unit_elim(ev(c), ev(s), self.eval(env, u)),
            T::Bool => Value::Bool,
            T::True => Value::True,
            T::False => Value::False,
            T::BoolElim(c, t, f, b) => self.bool_elim(ev(c), ev(t), ev(f), self.eval(env, b)),
            T::Sum(a, b) => Value::Sum(ev(a), ev(b)),
            T::Inl(a) => Value::Inl(ev(a)),
            T::Inr(a) => Value::Inr(ev(a)),
            T::SumElim(c, l, r, s) => self.sum_elim(ev(c), ev(l), ev(r), self.eval(env, s)),
            T::Nat => Value::Nat,
            T::Zero => Value::Zero,
            T::Suc(n) => Value::Suc(ev(n)),
            T::NatElim(c, z, s, n) => self.nat_elim(ev(c), ev(z), ev(s), self.eval(env, n)),
            T::Trunc(a) => Value::Trunc(ev(a)),
            T::Squash(a) => Value::Squash(ev(a)),
            T::TruncProp(a, x, y) => Value::neutral(Neutral::TruncProp(ev(a), ev(x), ev(y))),
            T::TruncElim(a, b, prf, f, t) => {
                self.trunc_elim(ev(a), ev(b), ev(prf), ev(f), self.eval(env, t))
            }
            T::Def(name) => match self.globals.global_value(name) {
                Some(Some(v)) => v,
                Some(None) => Value::neutral(Neutral::Postulate(name.clone())),
                None => panic!("internal error: unknown global `{name}`"),
            },
        }
    }

    pub fn eval_closed(&self, term: &Term) -> Value {
        self.eval(&Env::new(), term)
    }

    pub fn instantiate(&self, closure: &Closure, arg: Value) -> Value {
        self.eval(&closure.env.extend(arg), &closure.body)
    }

    pub fn apply(&self, f: &Value, arg: Value) -> Value {
        match f {
            Value::Lam(_, cl) => self.instantiate(cl, arg),
            Value::Neutral(ne) => Value::neutral(Neutral::App(ne.clone(), val(arg))),
            _ => clash("application", f),
        }
    }

    pub fn fst(&self, p: &Value) -> Value {
        match p {
            Value::Pair(a, _) => (**a).clone(),
            Value::Neutral(ne) => Value::neutral(Neutral::Fst(ne.clone())),
            _ => clash("fst", p),
        }
    }

    pub fn snd(&self, p: &Value) -> Value {
        match p {
            Value::Pair(_, b) => (**b).clone(),
            Value::Neutral(ne) => Value::neutral(Neutral::Snd(ne.clone())),
            _ => clash("snd", p),
        }
    }

    pub fn j(&self, ty: Val, base: Val, motive: Val, refl_case: Val, endpoint: Val, path: Value) -> Value {
        match path {
            Value::Refl(..) => (*refl_case).clone(),
            Value::Neutral(ne) => Value::neutral(Neutral::J {
                ty,
                base,
                motive,
                refl_case,
                endpoint,
                path: ne,
            }),
            other => clash("J", &other),
        }
    }

    pub fn exfalso(&self, motive: Val, e: Value) -> Value {
        match e {
            Value::Neutral(ne) => Value::neutral(Neutral::ExFalso(motive, ne)),
            other => clash("exfalso", &other),
        }
    }

    pub fn unit_elim(&self, motive: Val, star_case: Val, u: Value) -> Value {
        match u {
            Value::Star => (*star_case).clone(),
            Value::Neutral(ne) => Value::neutral(Neutral::UnitElim(motive, star_case, ne)),
            other => clash("unitrec", &other),
        }
    }

    pub fn bool_elim(&self, motive: Val, t: Val, f: Val, b: Value) -> Value {
        match b {
            Value::True => (*t).clone(),
            Value::False => (*f).clone(),
            Value::Neutral(ne) => Value::neutral(Neutral::BoolElim(motive, t, f, ne)),
            other => clash("boolrec", &other),
        }
    }

    pub fn sum_elim(&self, motive: Val, l: Val, r: Val, s: Value) -> Value {
        match s {
            Value::Inl(a) => self.apply(&l, (*a).clone()),
            Value::Inr(b) => self.apply(&r, (*b).clone()),
            Value::Neutral(ne) => Value::neutral(Neutral::SumElim(motive, l, r, ne)),
            other => clash("sumrec", &other),
        }
    }

    pub fn nat_elim(&self, motive: Val, z: Val, s: Val, n: Value) -> Value {
        match n {
            Value::Zero => (*z).clone(),
            Value::Suc(m) => {
                let rec = self.nat_elim(motive, z, s.clone(), (*m).clone());
                let step = self.apply(&s, (*m).clone());
                self.apply(&step, rec)
            }
            Value::Neutral(ne) => Value::neutral(Neutral::NatElim(motive, z, s, ne)),
            other => clash("natrec", &other),
        }
    }

    pub fn trunc_elim(&self, source: Val, target: Val, is_prop: Val, func: Val, t: Value) -> Value {
        match t {
            Value::Squash(a) => self.apply(&func, (*a).clone()),
            Value::Neutral(ne) => Value::neutral(Neutral::TruncElim {
                source,
                target,
                is_prop,
                func,
                scrutinee: ne,
            }),
            other => clash("truncrec", &other),
        }
    }

    /// Read `value : ty` back into a normal term. `types` lists the types of
    /// the variables in scope, by level.
    pub fn readback(&self, types: &mut Vec<Value>, value: &Value, ty: &Value) -> Term {
        match ty {
            Value::Pi(h, dom, cod) => {
                let level = types.len();
                let x = Value::var(level);
                let hint = match value {
                    Value::Lam(lh, _) => lh.clone(),
                    _ => h.clone(),
                };
                let body_ty = self.instantiate(cod, x.clone());
                let body = self.apply(value, x);
                types.push((**dom).clone());
                let body = self.readback(types, &body, &body_ty);
                types.pop();
                Term::Lambda(hint, tm(body))
            }
            Value::Sigma(_, a, b) => {
                let first = self.fst(value);
                let second = self.snd(value);
                let second_ty = self.instantiate(b, first.clone());
                Term::Pair(
                    tm(self.readback(types, &first, a)),
                    tm(self.readback(types, &second, &second_ty)),
                )
            }
            Value::Universe(_) => self.readback_type(types, value),
            _ => match value {
                Value::Neutral(ne) => self.readback_neutral(types, ne).0,
                Value::Refl(a, x) => Term::Refl(tm(self.readback_type(types, a)), tm(self.readback(types, x, a))),
                Value::Star => Term::Star,
                Value::True => Term::True,
                Value::False => Term::False,
                Value::Zero => Term::Zero,
                Value::Suc(n) => Term::Suc(tm(self.readback(types, n, &Value::Nat))),
                Value::Inl(x) => match ty {
                    Value::Sum(a, _) => Term::Inl(tm(self.readback(types, x, a))),
                    _ => clash("readback of inl", ty),
                },
                Value::Inr(x) => match ty {
                    Value::Sum(_, b) => Term::Inr(tm(self.readback(types, x, b))),
                    _ => clash("readback of inr", ty),
                },
                Value::Squash(x) => match ty {
                    Value::Trunc(a) => Term::Squash(tm(self.readback(types, x, a))),
                    _ => clash("readback of squash", ty),
                },
                other => panic!("internal error: cannot read back {other:?} at type {ty:?}"),
            },
        }
    }

    /// Read back a value that is itself a type.
    pub fn readback_type(&self, types: &mut Vec<Value>, value: &Value) -> Term {
        match value {
            Value::Universe(l) => Term::Universe(*l),
            Value::Pi(h, a, b) | Value::Sigma(h, a, b) => {
                let dom = self.readback_type(types, a);
                let level = types.len();
                let cod_val = self.instantiate(b, Value::var(level));
                types.push((**a).clone());
                let cod = self.readback_type(types, &cod_val);
                types.pop();
                match value {
                    Value::Pi(..) => Term::Pi(h.clone(), tm(dom), tm(cod)),
                    _ => Term::Sigma(h.clone(), tm(dom), tm(cod)),
                }
            }
            Value::Id(a, x, y) => Term::Id(
                tm(self.readback_type(types, a)),
                tm(self.readback(types, x, a)),
                tm(self.readback(types, y, a)),
            ),
            Value::Empty => Term::Empty,
            Value::Unit => Term::Unit,
            Value::Bool => Term::Bool,
            Value::Nat => Term::Nat,
            Value::Sum(a, b) => Term::Sum(tm(self.readback_type(types, a)), tm(self.readback_type(types, b))),
            Value::Trunc(a) => Term::Trunc(tm(self.readback_type(types, a))),
            Value::Neutral(ne) => self.readback_neutral(types, ne).0,
            other => panic!("internal error: {other:?} is not a type"),
        }
    }

    /// Read back a neutral, returning it together with its type.
    pub fn readback_neutral(&self, types: &mut Vec<Value>, ne: &Arc<Neutral>) -> (Term, Value) {
        match &**ne {
            Neutral::Var(level) => {
                let depth = types.len();
                let ty = types
                    .get(*level)
                    .cloned()
                    .unwrap_or_else(|| panic!("internal error: level {level} out of scope"));
                (Term::Var(depth - 1 - level), ty)
            }
            Neutral::Postulate(name) => {
                let ty = self
                    .globals
                    .global_type(name)
                    .unwrap_or_else(|| panic!("internal error: unknown postulate `{name}`"));
                (Term::Def(name.clone()), ty)
            }
            Neutral::TruncProp(a, x, y) => {
                let trunc = Value::Trunc(a.clone());
                let term = Term::TruncProp(
                    tm(self.readback_type(types, a)),
                    tm(self.readback(types, x, &trunc)),
                    tm(self.readback(types, y, &trunc)),
                );
                (term, Value::Id(val(trunc), x.clone(), y.clone()))
            }
            Neutral::App(f, arg) => {
                let (ft, fty) = self.readback_neutral(types, f);
                match fty {
                    Value::Pi(_, dom, cod) => {
                        let at = self.readback(types, arg, &dom);
                        let ty = self.instantiate(&cod, (**arg).clone());
                        (Term::App(tm(ft), tm(at)), ty)
                    }
                    other => clash("readback of application", &other),
                }
            }
            Neutral::Fst(p) => {
                let (pt, pty) = self.readback_neutral(types, p);
                match pty {
                    Value::Sigma(_, a, _) => (Term::Fst(tm(pt)), (*a).clone()),
                    other => clash("readback of fst", &other),
                }
            }
            Neutral::Snd(p) => {
                let (pt, pty) = self.readback_neutral(types, p);
                match pty {
                    Value::Sigma(_, _, b) => {
                        let first = Value::neutral(Neutral::Fst(p.clone()));
                        (Term::Snd(tm(pt)), self.instantiate(&b, first))
                    }
                    other => clash("readback of snd", &other),
                }
            }
            Neutral::J {
                ty,
                base,
                motive,
                refl_case,
                endpoint,
                path,
            } => {
                let (pt, _) = self.readback_neutral(types, path);
                let motive_ty = j_motive_type(ty, base);
                let refl_ty = self.apply(
                    &self.apply(motive, (**base).clone()),
                    Value::Refl(ty.clone(), base.clone()),
                );
                let term = Term::J(
                    tm(self.readback_type(types, ty)),
                    tm(self.readback(types, base, ty)),
                    tm(self.readback(types, motive, &motive_ty)),
                    tm(self.readback(types, refl_case, &refl_ty)),
                    tm(self.readback(types, endpoint, ty)),
                    tm(pt),
                );
                let result = self.apply(&self.apply(motive, (**endpoint).clone()), me_path(path));
                (term, result)
            }
            Neutral::ExFalso(c, e) => {
                let (et, _) = self.readback_neutral(types, e);
                (Term::ExFalso(tm(self.readback_type(types, c)), tm(et)), (**c).clone())
            }
            Neutral::UnitElim(c, s, u) => {
                let (ut, _) = self.readback_neutral(types, u);
                let motive_ty = family_over(Value::Unit);
                let star_ty = self.apply(c, Value::Star);
                let term = Term::UnitElim(
                    tm(self.readback(types, c, &motive_ty)),
                    tm(self.readback(types, s, &star_ty)),
                    tm(ut),
                );
                (term, self.apply(c, me_path(u)))
            }
            Neutral::BoolElim(c, t, f, b) => {
                let (bt, _) = self.readback_neutral(types, b);
                let motive_ty = family_over(Value::Bool);
                let term = Term::BoolElim(
                    tm(self.readback(types, c, &motive_ty)),
                    tm(self.readback(types, t, &self.apply(c, Value::True))),
                    tm(self.readback(types, f, &self.apply(c, Value::False))),
                    tm(bt),
                );
                (term, self.apply(c, me_path(b)))
            }
            Neutral::SumElim(c, l, r, s) => {
                let (st, sty) = self.readback_neutral(types, s);
                let (a, b) = match &sty {
                    Value::Sum(a, b) => (a.clone(), b.clone()),
                    other => clash("readback of sumrec", other),
                };
                let motive_ty = family_over(sty.clone());
                let term = Term::SumElim(
                    tm(self.readback(types, c, &motive_ty)),
                    tm(self.readback(types, l, &case_type(c, a, CaseTag::Inl))),
                    tm(self.readback(types, r, &case_type(c, b, CaseTag::Inr))),
                    tm(st),
                );
                (term, self.apply(c, me_path(s)))
            }
            Neutral::NatElim(c, z, s, n) => {
                let (nt, _) = self.readback_neutral(types, n);
                let motive_ty = family_over(Value::Nat);
                let term = Term::NatElim(
                    tm(self.readback(types, c, &motive_ty)),
                    tm(self.readback(types, z, &self.apply(c, Value::Zero))),
                    tm(self.readback(types, s, &nat_step_type(c))),
                    tm(nt),
                );
                (term, self.apply(c, me_path(n)))
            }
            Neutral::TruncElim {
                source,
                target,
                is_prop,
                func,
                scrutinee,
            } => {
                let (st, _) = self.readback_neutral(types, scrutinee);
                let term = Term::TruncElim(
                    tm(self.readback_type(types, source)),
                    tm(self.readback_type(types, target)),
                    tm(self.readback(types, is_prop, &is_prop_type(target))),
                    tm(self.readback(types, func, &arrow_value(source.clone(), target.clone()))),
                    tm(st),
                );
                (term, (**target).clone())
            }
        }
    }

    /// Normal form of `value : ty` in the empty context.
    pub fn normal_form(&self, value: &Value, ty: &Value) -> Term {
        self.readback(&mut Vec::new(), value, ty)
    }

    /// Judgmental equality of two values of type `ty`.
    pub fn convert(&self, types: &mut Vec<Value>, a: &Value, b: &Value, ty: &Value) -> bool {
        let ta = self.readback(types, a, ty);
        let tb = self.readback(types, b, ty);
        ta == tb
    }

    /// Judgmental equality of two types.
    pub fn convert_types(&self, types: &mut Vec<Value>, a: &Value, b: &Value) -> bool {
        self.readback_type(types, a) == self.readback_type(types, b)
    }
}

fn me_path(ne: &Arc<Neutral>) -> Value {
    Value::Neutral(ne.clone())
}

// Types of eliminator components, built as closures over small synthetic
// terms. Universe levels inside motive types are placeholders: readback at
// any universe reads back a type, so the level is never observed.

fn placeholder_universe() -> Tm {
    tm(Term::universe(0))
}

/// `(x : dom) -> U`
pub fn family_over(dom: Value) -> Value {
    Value::Pi("x".into(), val(dom), Closure::new(Env::new(), placeholder_universe()))
}

/// `(b : A) -> Id A a b -> U`
pub fn j_motive_type(ty: &Val, base: &Val) -> Value {
    let env = Env::new().extend((**ty).clone()).extend((**base).clone());
    // env: a = Var 0, A = Var 1; under b: b = 0, a = 1, A = 2
    let body = Term::Pi(
        "p".into(),
        tm(Term::Id(tm(Term::Var(2)), tm(Term::Var(1)), tm(Term::Var(0)))),
        placeholder_universe(),
    );
    Value::Pi("b".into(), ty.clone(), Closure::new(env, tm(body)))
}

pub enum CaseTag {
    Inl,
    Inr,
}

/// `(x : A) -> C (inl x)` or its `inr` twin.
pub fn case_type(motive: &Val, dom: Val, tag: CaseTag) -> Value {
    let env = Env::new().extend((**motive).clone());
    let inj = match tag {
        CaseTag::Inl => Term::Inl(tm(Term::Var(0))),
        CaseTag::Inr => Term::Inr(tm(Term::Var(0))),
    };
    let body = Term::App(tm(Term::Var(1)), tm(inj));
    Value::Pi("x".into(), dom, Closure::new(env, tm(body)))
}

/// `(n : Nat) -> C n -> C (suc n)`
pub fn nat_step_type(motive: &Val) -> Value {
    let env = Env::new().extend((**motive).clone());
    // under n: n = 0, C = 1; under ih: ih = 0, n = 1, C = 2
    let body = Term::Pi(
        "ih".into(),
        tm(Term::App(tm(Term::Var(1)), tm(Term::Var(0)))),
        tm(Term::App(tm(Term::Var(2)), tm(Term::Suc(tm(Term::Var(1)))))),
    );
    Value::Pi("n".into(), val(Value::Nat), Closure::new(env, tm(body)))
}

/// `(x : B) -> (y : B) -> Id B x y`
pub fn is_prop_type(target: &Val) -> Value {
    let env = Env::new().extend((**target).clone());
    // under x: x = 0, B = 1; under y: y = 0, x = 1, B = 2
    let body = Term::Pi(
        "y".into(),
        tm(Term::Var(1)),
        tm(Term::Id(tm(Term::Var(2)), tm(Term::Var(1)), tm(Term::Var(0)))),
    );
    Value::Pi("x".into(), target.clone(), Closure::new(env, tm(body)))
}

/// `A -> B` for closed values `A`, `B`.
pub fn arrow_value(dom: Val, cod: Val) -> Value {
    let env = Env::new().extend((*cod).clone());
    Value::Pi("x".into(), dom, Closure::new(env, tm(Term::Var(1))))
}
