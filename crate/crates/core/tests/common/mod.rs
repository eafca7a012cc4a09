//! Shared fixtures: repository paths, the checked corpus, and an independent
//! typed program generator with a substitution-based interpreter.

#![allow(dead_code)]

use std::path::PathBuf;
use std::rc::Rc;

use hct::corpus::{check_files, Manifest};
use hct::kernel::CheckedModule;
use hct::prelude::{Prelude, PreludeSource};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn manifest() -> Manifest {
    Manifest::read(&repo_root().join("corpus/MANIFEST.tsv")).expect("manifest")
}

pub fn prelude() -> Prelude {
    let p = Prelude::check(&PreludeSource::Dir(repo_root().join("prelude"))).expect("prelude");
    assert!(p.passed());
    p
}

/// Every shipped `.hct` file: prelude files in order, corpus files in
/// manifest order, then the negative suite.
pub fn shipped_files() -> Vec<PathBuf> {
    let root = repo_root();
    let mut out: Vec<PathBuf> = ["paths", "logic", "equiv", "hedberg", "axioms"]
        .iter()
        .map(|f| root.join(format!("prelude/{f}.hct")))
        .collect();
    out.extend(manifest().files().iter().map(|f| root.join("corpus").join(f)));
    let mut neg: Vec<PathBuf> = std::fs::read_dir(root.join("corpus/neg"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    neg.sort();
    out.extend(neg);
    out
}

/// Prelude plus every corpus file, checked.
pub fn full_module() -> CheckedModule {
    let m = manifest();
    let sources: Vec<(String, String)> = m
        .files()
        .iter()
        .map(|f| {
            let p = m.corpus_dir.join(f);
            (p.display().to_string(), std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    let base = (*prelude().module).clone();
    let (records, _, module) = check_files(base, &sources, 1).unwrap();
    assert!(records.iter().all(|r| r.passed()));
    module
}

/// Every name declared in a shipped file.
pub fn shipped_names() -> Vec<String> {
    let mut names = Vec::new();
    for f in shipped_files() {
        let text = std::fs::read_to_string(&f).unwrap();
        let decls = hct::parser::parse_module(&text, "x").unwrap();
        names.extend(decls.into_iter().map(|d| d.name));
    }
    names
}

/// Check that print, parse, print is a fixpoint on `path` and that parsing
/// the printed text gives alpha-equal terms.
/// `known` names globals declared elsewhere.
pub fn round_trip(path: &std::path::Path, known: &[String]) -> Result<(), String> {
    use hct::parser::{parse_module, resolve_all, Printer};
    use hct::syntax::alpha_equal;
    let text = std::fs::read_to_string(path).unwrap();
    let file = path.display().to_string();
    let decls = parse_module(&text, &file).map_err(|e| e.to_string())?;
    let resolved = resolve_all(&decls, &|_| true).map_err(|e| e.to_string())?;
    let own: Vec<&str> = decls.iter().map(|d| d.name.as_str()).collect();
    let printer = Printer::with_globals(|n| known.iter().any(|k| k == n) || own.contains(&n));
    let first = printer.module(&resolved);
    let reparsed = resolve_all(&parse_module(&first, &file).map_err(|e| format!("{e}\n{first}"))?, &|_| true)
        .map_err(|e| e.to_string())?;
    if resolved.len() != reparsed.len() {
        return Err("declaration count changed".into());
    }
    for (a, b) in resolved.iter().zip(&reparsed) {
        if !alpha_equal(&a.ty, &b.ty) || a.body.is_some() != b.body.is_some() {
            return Err(format!("{}: type changed", a.name));
        }
        if let (Some(x), Some(y)) = (&a.body, &b.body) {
            if !alpha_equal(x, y) {
                return Err(format!("{}: body changed", a.name));
            }
        }
    }
    let second = printer.module(&reparsed);
    if first != second {
        return Err("printing is not a fixpoint".into());
    }
    Ok(())
}

// ---------------------------------------------------------------------
// Typed programs over Nat and Bool.

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ty {
    Nat,
    Bool,
    Arr(Rc<Ty>, Rc<Ty>),
}

impl Ty {
    fn arr(a: Ty, b: Ty) -> Ty {
        Ty::Arr(Rc::new(a), Rc::new(b))
    }

    pub fn surface(&self) -> String {
        match self {
            Ty::Nat => "Nat".into(),
            Ty::Bool => "Bool".into(),
            Ty::Arr(a, b) => format!("({} -> {})", a.surface(), b.surface()),
        }
    }
}

/// Named terms; binder names are unique within a generated program.
#[derive(Clone, Debug)]
pub enum E {
    Zero,
    Suc(Rc<E>),
    Tt,
    Ff,
    Var(String),
    Lam(String, Rc<E>),
    App(Rc<E>, Rc<E>),
    BoolRec(Ty, Rc<E>, Rc<E>, Rc<E>),
    /// Motive result, zero case, step `fun n => fun acc => body`, scrutinee.
    NatRec(Ty, Rc<E>, String, String, Rc<E>, Rc<E>),
}

impl E {
    pub fn surface(&self) -> String {
        match self {
            E::Zero => "zero".into(),
            E::Suc(e) => format!("(suc {})", e.surface()),
            E::Tt => "true".into(),
            E::Ff => "false".into(),
            E::Var(x) => x.clone(),
            E::Lam(x, b) => format!("(fun {x} => {})", b.surface()),
            E::App(f, a) => format!("({} {})", f.surface(), a.surface()),
            E::BoolRec(t, a, b, s) => format!(
                "(boolrec (fun _ => {}) {} {} {})",
                t.surface(),
                a.surface(),
                b.surface(),
                s.surface()
            ),
            E::NatRec(t, z, n, acc, s, m) => format!(
                "(natrec (fun _ => {}) {} (fun {n} => fun {acc} => {}) {})",
                t.surface(),
                z.surface(),
                s.surface(),
                m.surface()
            ),
        }
    }
}

/// Generator of closed well-typed programs. Only checkable positions hold
/// lambdas, so every program elaborates bidirectionally without annotations.
pub struct Gen<'r> {
    rng: &'r mut ChaCha8Rng,
    fresh: usize,
}

impl<'r> Gen<'r> {
    pub fn new(rng: &'r mut ChaCha8Rng) -> Gen<'r> {
        Gen { rng, fresh: 0 }
    }

    fn name(&mut self) -> String {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }

    fn small_ty(&mut self) -> Ty {
        match self.rng.gen_range(0..5) {
            0 | 1 => Ty::Nat,
            2 => Ty::Bool,
            3 => Ty::arr(Ty::Nat, Ty::Nat),
            _ => Ty::arr(Ty::Bool, Ty::Nat),
        }
    }

    /// A program of type `ty` in checking position.
    pub fn check(&mut self, ty: &Ty, ctx: &[(String, Ty)], depth: usize) -> E {
        if depth > 0 && self.rng.gen_bool(if depth > 2 { 0.85 } else { 0.4 }) {
            if let Some(e) = self.infer(ty, ctx, depth) {
                return e;
            }
        }
        match ty {
            Ty::Arr(a, b) => {
                let x = self.name();
                let mut inner = ctx.to_vec();
                inner.push((x.clone(), (**a).clone()));
                E::Lam(x, Rc::new(self.check(b, &inner, depth.saturating_sub(1))))
            }
            Ty::Nat => {
                if depth > 0 && self.rng.gen_bool(0.3) {
                    E::Suc(Rc::new(self.check(ty, ctx, depth - 1)))
                } else {
                    self.leaf(ty, ctx)
                }
            }
            Ty::Bool => self.leaf(ty, ctx),
        }
    }

    fn leaf(&mut self, ty: &Ty, ctx: &[(String, Ty)]) -> E {
        let vars: Vec<&String> = ctx.iter().filter(|(_, t)| t == ty).map(|(x, _)| x).collect();
        if !vars.is_empty() && self.rng.gen_bool(0.5) {
            return E::Var(vars[self.rng.gen_range(0..vars.len())].clone());
        }
        match ty {
            Ty::Nat => (0..self.rng.gen_range(0..3)).fold(E::Zero, |e, _| E::Suc(Rc::new(e))),
            Ty::Bool => {
                if self.rng.gen_bool(0.5) {
                    E::Tt
                } else {
                    E::Ff
                }
            }
            Ty::Arr(..) => unreachable!("arrow leaves are lambdas"),
        }
    }

    /// An inferable program of type `ty`, if one is found.
    fn infer(&mut self, ty: &Ty, ctx: &[(String, Ty)], depth: usize) -> Option<E> {
        let d = depth - 1;
        match self.rng.gen_range(0..4) {
            0 => {
                let vars: Vec<&String> = ctx.iter().filter(|(_, t)| t == ty).map(|(x, _)| x).collect();
                (!vars.is_empty()).then(|| E::Var(vars[self.rng.gen_range(0..vars.len())].clone()))
            }
            1 if d > 0 => {
                let a = self.small_ty();
                let f = self.infer(&Ty::arr(a.clone(), ty.clone()), ctx, d)?;
                Some(E::App(Rc::new(f), Rc::new(self.check(&a, ctx, d))))
            }
            1 | 2 => Some(E::BoolRec(
                ty.clone(),
                Rc::new(self.check(ty, ctx, d)),
                Rc::new(self.check(ty, ctx, d)),
                Rc::new(self.check(&Ty::Bool, ctx, d)),
            )),
            _ => {
                let n = self.name();
                let acc = self.name();
                let mut inner = ctx.to_vec();
                inner.push((n.clone(), Ty::Nat));
                inner.push((acc.clone(), ty.clone()));
                Some(E::NatRec(
                    ty.clone(),
                    Rc::new(self.check(ty, ctx, d)),
                    n,
                    acc,
                    Rc::new(self.check(ty, &inner, d)),
                    Rc::new(self.check(&Ty::Nat, ctx, d.min(2))),
                ))
            }
        }
    }
}

/// Substitution-based interpreter: weak head reduction of closed programs
/// by call-by-name with a step budget.
pub struct Interp {
    pub steps: usize,
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Answer {
    Nat(usize),
    Bool(bool),
}

impl Interp {
    pub fn new(budget: usize) -> Interp {
        Interp { steps: 0, budget }
    }

    /// Replace `x` by the closed program `v`.
    fn subst(e: &E, x: &str, v: &E) -> E {
        let r = |e: &Rc<E>| Rc::new(Self::subst(e, x, v));
        match e {
            E::Var(y) if y == x => v.clone(),
            E::Zero | E::Tt | E::Ff | E::Var(_) => e.clone(),
            E::Suc(a) => E::Suc(r(a)),
            E::Lam(y, b) if y == x => E::Lam(y.clone(), b.clone()),
            E::Lam(y, b) => E::Lam(y.clone(), r(b)),
            E::App(f, a) => E::App(r(f), r(a)),
            E::BoolRec(t, a, b, s) => E::BoolRec(t.clone(), r(a), r(b), r(s)),
            E::NatRec(t, z, n, acc, s, m) => {
                let s = if n == x || acc == x { s.clone() } else { r(s) };
                E::NatRec(t.clone(), r(z), n.clone(), acc.clone(), s, r(m))
            }
        }
    }

    fn tick(&mut self) -> Option<()> {
        self.steps += 1;
        (self.steps <= self.budget).then_some(())
    }

    pub fn whnf(&mut self, e: &E) -> Option<E> {
        let mut e = e.clone();
        loop {
            self.tick()?;
            e = match &e {
                E::App(f, a) => match self.whnf(f)? {
                    E::Lam(x, b) => Self::subst(&b, &x, a),
                    other => panic!("stuck application of {other:?}"),
                },
                E::BoolRec(_, t, f, b) => match self.whnf(b)? {
                    E::Tt => (**t).clone(),
                    E::Ff => (**f).clone(),
                    other => panic!("stuck boolrec on {other:?}"),
                },
                E::NatRec(t, z, n, acc, s, m) => match self.whnf(m)? {
                    E::Zero => (**z).clone(),
                    E::Suc(k) => {
                        let rec = E::NatRec(t.clone(), z.clone(), n.clone(), acc.clone(), s.clone(), k.clone());
                        let s1 = Self::subst(s, n, &k);
                        Self::subst(&s1, acc, &rec)
                    }
                    other => panic!("stuck natrec on {other:?}"),
                },
                _ => return Some(e),
            };
        }
    }

    pub fn eval(&mut self, e: &E, ty: &Ty) -> Option<Answer> {
        match ty {
            Ty::Nat => {
                let mut n = 0;
                let mut cur = e.clone();
                loop {
                    match self.whnf(&cur)? {
                        E::Zero => return Some(Answer::Nat(n)),
                        E::Suc(k) => {
                            n += 1;
                            cur = (*k).clone();
                        }
                        other => panic!("non-numeral {other:?}"),
                    }
                }
            }
            Ty::Bool => match self.whnf(e)? {
                E::Tt => Some(Answer::Bool(true)),
                E::Ff => Some(Answer::Bool(false)),
                other => panic!("non-boolean {other:?}"),
            },
            Ty::Arr(..) => None,
        }
    }
}

/// Read a normal form back as an answer.
pub fn answer_of(term: &hct::syntax::Term) -> Option<Answer> {
    use hct::syntax::Term;
    match term {
        Term::True => Some(Answer::Bool(true)),
        Term::False => Some(Answer::Bool(false)),
        t => t.as_nat_literal().map(Answer::Nat),
    }
}

/// Normalize `def t : ty := e;` with the checker and read back the answer.
pub fn nbe_answer(e: &E, ty: &Ty) -> Result<Option<Answer>, String> {
    let mut m = CheckedModule::new();
    let src = format!("def t : {} := {};", ty.surface(), e.surface());
    let out = hct::session::check_source(&mut m, &src, "gen.hct");
    if let Some(d) = out.error {
        return Err(format!("{d}\n{src}"));
    }
    let entry = m.get("t").unwrap();
    let nf = m.normalize(entry.body_term.as_ref().unwrap(), &entry.ty_term);
    Ok(answer_of(&nf))
}

/// Outcome of comparing the checker against the interpreter on `count`
/// programs drawn from `seed`.
#[derive(Debug, Default)]
pub struct OracleRun {
    pub agreed: usize,
    pub disagreed: Vec<String>,
    /// Programs skipped because the interpreter ran out of budget.
    pub skipped: usize,
}

pub fn oracle_run(seed: u64, count: usize, ty: &Ty, max_depth: usize) -> OracleRun {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut run = OracleRun::default();
    while run.agreed + run.disagreed.len() < count {
        let depth = rng.gen_range(1..=max_depth);
        let e = Gen::new(&mut rng).check(ty, &[], depth);
        let mut interp = Interp::new(20_000);
        let Some(expected) = interp.eval(&e, ty) else {
            run.skipped += 1;
            continue;
        };
        match nbe_answer(&e, ty) {
            Ok(Some(got)) if got == expected => run.agreed += 1,
            Ok(got) => run
                .disagreed
                .push(format!("{}: interpreter {expected:?}, checker {got:?}", e.surface())),
            Err(msg) => run.disagreed.push(msg),
        }
    }
    run
}
