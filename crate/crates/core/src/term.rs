//! Terms with explicit substitutions and the partial constant ⊥.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::position::{Edge, Position};

pub type Name = String;

/// `Es(t, x, u)` is the closure `t[x\u]`; it binds `x` in `t` only.
///
/// The derived `PartialEq` is syntactic. Use [`Term::alpha_eq`] for the
/// equality the calculi work up to.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Name),
    Abs(Name, Box<Term>),
    App(Box<Term>, Box<Term>),
    Es(Box<Term>, Name, Box<Term>),
    Bot,
}

/// Nameless image of a term: bound variables become de Bruijn indices.
/// Two terms are alpha-equivalent iff their canonical forms are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Canon {
    Free(Name),
    Bound(u32),
    Abs(Box<Canon>),
    App(Box<Canon>, Box<Canon>),
    /// body (under the binder), argument
    Es(Box<Canon>, Box<Canon>),
    Bot,
}

impl Term {
    pub fn var(x: &str) -> Term {
        Term::Var(x.to_string())
    }

    pub fn abs(x: &str, body: Term) -> Term {
        Term::Abs(x.to_string(), Box::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn es(body: Term, x: &str, arg: Term) -> Term {
        Term::Es(Box::new(body), x.to_string(), Box::new(arg))
    }

    /// `λx.x`
    pub fn id() -> Term {
        Term::abs("x", Term::var("x"))
    }

    /// `λx.xx`
    pub fn delta() -> Term {
        Term::abs("x", Term::app(Term::var("x"), Term::var("x")))
    }

    /// `ΔΔ`
    pub fn omega() -> Term {
        Term::app(Term::delta(), Term::delta())
    }

    pub fn is_value(&self) -> bool {
        matches!(self, Term::Var(_) | Term::Abs(..))
    }

    /// No explicit substitution and no ⊥.
    pub fn is_pure(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Abs(_, b) => b.is_pure(),
            Term::App(f, a) => f.is_pure() && a.is_pure(),
            Term::Es(..) | Term::Bot => false,
        }
    }

    pub fn contains_bot(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Bot => true,
            Term::Abs(_, b) => b.contains_bot(),
            Term::App(f, a) => f.contains_bot() || a.contains_bot(),
            Term::Es(b, _, a) => b.contains_bot() || a.contains_bot(),
        }
    }

    /// Number of constructors.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Bot => 1,
            Term::Abs(_, b) => 1 + b.size(),
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::Es(b, _, a) => 1 + b.size() + a.size(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }

    pub fn has_free(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => y == x,
            Term::Bot => false,
            Term::Abs(y, b) => y != x && b.has_free(x),
            Term::App(f, a) => f.has_free(x) || a.has_free(x),
            Term::Es(b, y, a) => a.has_free(x) || (y != x && b.has_free(x)),
        }
    }

    /// Every name occurring in the term, bound or free.
    pub fn all_names(&self) -> BTreeSet<Name> {
        fn go(t: &Term, out: &mut BTreeSet<Name>) {
            match t {
                Term::Var(x) => {
                    out.insert(x.clone());
                }
                Term::Bot => {}
                Term::Abs(x, b) => {
                    out.insert(x.clone());
                    go(b, out);
                }
                Term::App(f, a) => {
                    go(f, out);
                    go(a, out);
                }
                Term::Es(b, x, a) => {
                    out.insert(x.clone());
                    go(b, out);
                    go(a, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut out);
        out
    }

    /// Capture-avoiding `t{x:=u}`.
    pub fn subst(&self, x: &str, u: &Term) -> Term {
        let fu = u.free_vars();
        self.subst_with(x, u, &fu)
    }

    fn subst_with(&self, x: &str, u: &Term, fu: &BTreeSet<Name>) -> Term {
        match self {
            Term::Var(y) if y == x => u.clone(),
            Term::Var(_) | Term::Bot => self.clone(),
            Term::App(f, a) => Term::App(
                Box::new(f.subst_with(x, u, fu)),
                Box::new(a.subst_with(x, u, fu)),
            ),
            Term::Abs(y, b) => {
                let (y, b) = subst_under(y, b, x, u, fu);
                Term::Abs(y, Box::new(b))
            }
            Term::Es(b, y, a) => {
                let a = a.subst_with(x, u, fu);
                let (y, b) = subst_under(y, b, x, u, fu);
                Term::Es(Box::new(b), y, Box::new(a))
            }
        }
    }

    /// Renames the free occurrences of `from` to `to`. `to` must not be
    /// captured, which holds whenever it is fresh for the term.
    pub fn rename_free(&self, from: &str, to: &str) -> Term {
        self.subst(from, &Term::var(to))
    }

    pub fn alpha_eq(&self, other: &Term) -> bool {
        let mut sc = Scopes::default();
        alpha(self, other, &mut sc)
    }

    pub fn canon(&self) -> Canon {
        fn go(t: &Term, env: &mut Vec<Name>) -> Canon {
            match t {
                Term::Var(x) => match env.iter().rev().position(|y| y == x) {
                    Some(i) => Canon::Bound(i as u32),
                    None => Canon::Free(x.clone()),
                },
                Term::Bot => Canon::Bot,
                Term::Abs(x, b) => {
                    env.push(x.clone());
                    let b = go(b, env);
                    env.pop();
                    Canon::Abs(Box::new(b))
                }
                Term::App(f, a) => Canon::App(Box::new(go(f, env)), Box::new(go(a, env))),
                Term::Es(b, x, a) => {
                    let a = go(a, env);
                    env.push(x.clone());
                    let b = go(b, env);
                    env.pop();
                    Canon::Es(Box::new(b), Box::new(a))
                }
            }
        }
        go(self, &mut Vec::new())
    }

    /// `self ⊑ other`: `other` refines some occurrences of ⊥ in `self`.
    pub fn partial_leq(&self, other: &Term) -> bool {
        fn go<'a>(t: &'a Term, u: &'a Term, sc: &mut Scopes<'a>) -> bool {
            match (t, u) {
                (Term::Bot, _) => true,
                (Term::Var(x), Term::Var(y)) => sc.same_var(x, y),
                (Term::Abs(x, b), Term::Abs(y, c)) => sc.under(x, y, |sc| go(b, c, sc)),
                (Term::App(f, a), Term::App(g, b)) => go(f, g, sc) && go(a, b, sc),
                (Term::Es(b1, x, a1), Term::Es(b2, y, a2)) => {
                    go(a1, a2, sc) && sc.under(x, y, |sc| go(b1, b2, sc))
                }
                _ => false,
            }
        }
        go(self, other, &mut Scopes::default())
    }

    pub fn subterm(&self, p: &Position) -> Option<&Term> {
        let mut t = self;
        for e in p.edges() {
            t = t.child(*e)?;
        }
        Some(t)
    }

    pub fn child(&self, e: Edge) -> Option<&Term> {
        match (self, e) {
            (Term::Abs(_, b), Edge::AbsBody) => Some(b),
            (Term::App(f, _), Edge::AppFun) => Some(f),
            (Term::App(_, a), Edge::AppArg) => Some(a),
            (Term::Es(b, _, _), Edge::EsBody) => Some(b),
            (Term::Es(_, _, a), Edge::EsArg) => Some(a),
            _ => None,
        }
    }

    fn child_mut(&mut self, e: Edge) -> Option<&mut Term> {
        match (self, e) {
            (Term::Abs(_, b), Edge::AbsBody) => Some(b),
            (Term::App(f, _), Edge::AppFun) => Some(f),
            (Term::App(_, a), Edge::AppArg) => Some(a),
            (Term::Es(b, _, _), Edge::EsBody) => Some(b),
            (Term::Es(_, _, a), Edge::EsArg) => Some(a),
            _ => None,
        }
    }

    /// Plugs `new` at `p` without renaming: binders above `p` may capture
    /// its free variables, as in context plugging.
    pub fn replace_at(&self, p: &Position, new: Term) -> Option<Term> {
        let mut out = self.clone();
        let mut slot = &mut out;
        for e in p.edges() {
            slot = slot.child_mut(*e)?;
        }
        *slot = new;
        Some(out)
    }

    /// Positions of the free occurrences of `x`, in leftmost order.
    pub fn free_positions(&self, x: &str) -> Vec<Position> {
        fn go(t: &Term, x: &str, path: &mut Vec<Edge>, out: &mut Vec<Position>) {
            match t {
                Term::Var(y) => {
                    if y == x {
                        out.push(Position(path.clone()));
                    }
                }
                Term::Bot => {}
                Term::Abs(y, b) => {
                    if y != x {
                        path.push(Edge::AbsBody);
                        go(b, x, path, out);
                        path.pop();
                    }
                }
                Term::App(f, a) => {
                    path.push(Edge::AppFun);
                    go(f, x, path, out);
                    path.pop();
                    path.push(Edge::AppArg);
                    go(a, x, path, out);
                    path.pop();
                }
                Term::Es(b, y, a) => {
                    if y != x {
                        path.push(Edge::EsBody);
                        go(b, x, path, out);
                        path.pop();
                    }
                    path.push(Edge::EsArg);
                    go(a, x, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, x, &mut Vec::new(), &mut out);
        out
    }

    /// Alpha-variant in which every binder has a distinct name that is also
    /// distinct from every free variable.
    pub fn uniquify(&self) -> Term {
        fn go(t: &Term, env: &mut Vec<(Name, Name)>, avoid: &mut BTreeSet<Name>) -> Term {
            match t {
                Term::Var(x) => match env.iter().rev().find(|(o, _)| o == x) {
                    Some((_, n)) => Term::Var(n.clone()),
                    None => t.clone(),
                },
                Term::Bot => Term::Bot,
                Term::Abs(x, b) => {
                    let n = fresh_name(x, avoid);
                    avoid.insert(n.clone());
                    env.push((x.clone(), n.clone()));
                    let b = go(b, env, avoid);
                    env.pop();
                    Term::Abs(n, Box::new(b))
                }
                Term::App(f, a) => {
                    let f = go(f, env, avoid);
                    Term::App(Box::new(f), Box::new(go(a, env, avoid)))
                }
                Term::Es(b, x, a) => {
                    let a = go(a, env, avoid);
                    let n = fresh_name(x, avoid);
                    avoid.insert(n.clone());
                    env.push((x.clone(), n.clone()));
                    let b = go(b, env, avoid);
                    env.pop();
                    Term::Es(Box::new(b), n, Box::new(a))
                }
            }
        }
        let mut avoid = self.all_names();
        go(self, &mut Vec::new(), &mut avoid)
    }
}

fn collect_free(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Term::Bot => {}
        Term::Abs(x, b) => {
            bound.push(x.clone());
            collect_free(b, bound, out);
            bound.pop();
        }
        Term::App(f, a) => {
            collect_free(f, bound, out);
            collect_free(a, bound, out);
        }
        Term::Es(b, x, a) => {
            collect_free(a, bound, out);
            bound.push(x.clone());
            collect_free(b, bound, out);
            bound.pop();
        }
    }
}

/// Substitution below a binder `y` with body `b`.
fn subst_under(y: &Name, b: &Term, x: &str, u: &Term, fu: &BTreeSet<Name>) -> (Name, Term) {
    if y == x || !b.has_free(x) {
        return (y.clone(), b.clone());
    }
    if fu.contains(y) {
        let mut avoid = fu.clone();
        avoid.extend(b.all_names());
        avoid.insert(x.to_string());
        let z = fresh_name(y, &avoid);
        let b = b.rename_free(y, &z);
        let b = b.subst_with(x, u, fu);
        (z, b)
    } else {
        (y.clone(), b.subst_with(x, u, fu))
    }
}

/// A name built from `base` (trailing digits stripped) that is not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Name>) -> Name {
    if !avoid.contains(base) {
        return base.to_string();
    }
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "v" } else { stem };
    (1..)
        .map(|i| format!("{stem}{i}"))
        .find(|n| !avoid.contains(n))
        .expect("unbounded supply of names")
}

/// Parallel binder stacks for comparing two terms up to renaming.
#[derive(Default)]
pub(crate) struct Scopes<'a> {
    left: Vec<&'a str>,
    right: Vec<&'a str>,
}

impl<'a> Scopes<'a> {
    pub(crate) fn same_var(&self, x: &str, y: &str) -> bool {
        let i = self.left.iter().rev().position(|n| *n == x);
        let j = self.right.iter().rev().position(|n| *n == y);
        match (i, j) {
            (None, None) => x == y,
            (Some(i), Some(j)) => i == j,
            _ => false,
        }
    }

    pub(crate) fn under<R>(&mut self, x: &'a str, y: &'a str, f: impl FnOnce(&mut Self) -> R) -> R {
        self.left.push(x);
        self.right.push(y);
        let r = f(self);
        self.left.pop();
        self.right.pop();
        r
    }
}

fn alpha<'a>(t: &'a Term, u: &'a Term, sc: &mut Scopes<'a>) -> bool {
    match (t, u) {
        (Term::Bot, Term::Bot) => true,
        (Term::Var(x), Term::Var(y)) => sc.same_var(x, y),
        (Term::Abs(x, b), Term::Abs(y, c)) => sc.under(x, y, |sc| alpha(b, c, sc)),
        (Term::App(f, a), Term::App(g, b)) => alpha(f, g, sc) && alpha(a, b, sc),
        (Term::Es(b1, x, a1), Term::Es(b2, y, a2)) => {
            alpha(a1, a2, sc) && sc.under(x, y, |sc| alpha(b1, b2, sc))
        }
        _ => false,
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print(self))
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&crate::syntax::print_named(self))
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        crate::syntax::parse(&s).map_err(serde::de::Error::custom)
    }
}
