//! Non-idempotent intersection type systems V (by value) and N (by name).

mod check;
mod synth;
mod transport;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::position::Calculus;
use crate::term::{Name, Term};

pub use check::{check_derivation, Violation};
pub use synth::synth_nf_derivation;
pub use transport::{expand_derivation, reduce_derivation, typable, typed_genericity};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum System {
    V,
    N,
}

impl System {
    pub fn of(c: Calculus) -> System {
        match c {
            Calculus::Cbv => System::V,
            Calculus::Cbn => System::N,
        }
    }

    pub fn calculus(self) -> Calculus {
        match self {
            System::V => Calculus::Cbv,
            System::N => Calculus::Cbn,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ty {
    Var(Name),
    Mult(Mult),
    Arrow(Mult, Box<Ty>),
}

/// A finite multiset, kept sorted so that equality is multiset equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mult(Vec<Ty>);

impl Mult {
    pub fn empty() -> Self {
        Mult(Vec::new())
    }

    pub fn new(mut items: Vec<Ty>) -> Self {
        items.sort();
        Mult(items)
    }

    pub fn single(t: Ty) -> Self {
        Mult(vec![t])
    }

    pub fn items(&self) -> &[Ty] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self, other: &Mult) -> Mult {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Mult::new(v)
    }
}

impl FromIterator<Ty> for Mult {
    fn from_iter<I: IntoIterator<Item = Ty>>(iter: I) -> Self {
        Mult::new(iter.into_iter().collect())
    }
}

impl Ty {
    pub fn var(a: &str) -> Ty {
        Ty::Var(a.to_string())
    }

    pub fn arrow(m: Mult, t: Ty) -> Ty {
        Ty::Arrow(m, Box::new(t))
    }

    pub fn empty() -> Ty {
        Ty::Mult(Mult::empty())
    }

    /// Whether the type belongs to the grammar of the system.
    pub fn well_formed(&self, sys: System) -> bool {
        match (self, sys) {
            (Ty::Var(_), _) => true,
            (Ty::Mult(m), System::V) => m.items().iter().all(|t| t.well_formed(sys)),
            (Ty::Mult(_), System::N) => false,
            (Ty::Arrow(m, t), _) => m.items().iter().all(|s| s.well_formed(sys)) && t.well_formed(sys),
        }
    }
}

impl fmt::Display for Mult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Var(a) => f.write_str(a),
            Ty::Mult(m) => write!(f, "{m}"),
            Ty::Arrow(m, t) => write!(f, "{m} -> {t}"),
        }
    }
}

/// `ty := ident | mult ('->' ty)? | '(' ty ')'` and `mult := '[' (ty (',' ty)*)? ']'`
impl FromStr for Ty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Ty> {
        let mut p = TyParser { src: s.as_bytes(), pos: 0 };
        let t = p.ty()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("trailing input"));
        }
        Ok(t)
    }
}

struct TyParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl TyParser<'_> {
    fn err(&self, m: &str) -> Error {
        Error::Syntax { offset: self.pos, message: format!("type: {m}") }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn ty(&mut self) -> Result<Ty> {
        self.skip_ws();
        if self.eat("(") {
            let t = self.ty()?;
            if !self.eat(")") {
                return Err(self.err("expected `)`"));
            }
            return Ok(t);
        }
        if self.eat("[") {
            let mut items = Vec::new();
            if !self.eat("]") {
                loop {
                    items.push(self.ty()?);
                    if self.eat("]") {
                        break;
                    }
                    if !self.eat(",") {
                        return Err(self.err("expected `,` or `]`"));
                    }
                }
            }
            let m = Mult::new(items);
            return Ok(if self.eat("->") { Ty::arrow(m, self.ty()?) } else { Ty::Mult(m) });
        }
        let start = self.pos;
        while self.pos < self.src.len() && {
            let b = self.src[self.pos];
            b.is_ascii_alphanumeric() || b == b'_' || b == b'\''
        } {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a type"));
        }
        Ok(Ty::Var(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()))
    }
}

impl Serialize for Ty {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Ty {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Variable assumptions; absent means the empty multiset.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypingCtx(BTreeMap<Name, Mult>);

impl TypingCtx {
    pub fn empty() -> Self {
        TypingCtx::default()
    }

    pub fn single(x: &str, m: Mult) -> Self {
        let mut c = TypingCtx::empty();
        c.add(x, &m);
        c
    }

    pub fn get(&self, x: &str) -> Mult {
        self.0.get(x).cloned().unwrap_or_default()
    }

    pub fn add(&mut self, x: &str, m: &Mult) {
        if m.is_empty() {
            return;
        }
        let cur = self.get(x);
        self.0.insert(x.to_string(), cur.sum(m));
    }

    pub fn sum(&self, other: &TypingCtx) -> TypingCtx {
        let mut c = self.clone();
        for (x, m) in &other.0 {
            c.add(x, m);
        }
        c
    }

    pub fn without(&self, x: &str) -> TypingCtx {
        let mut c = self.clone();
        c.0.remove(x);
        c
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Mult)> {
        self.0.iter()
    }
}

impl fmt::Display for TypingCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, m)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}:{m}")?;
        }
        Ok(())
    }
}

impl Serialize for TypingCtx {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m: BTreeMap<&Name, &[Ty]> = self.0.iter().map(|(x, m)| (x, m.items())).collect();
        m.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TypingCtx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = BTreeMap::<Name, Vec<Ty>>::deserialize(d)?;
        let mut c = TypingCtx::empty();
        for (x, ts) in m {
            c.add(&x, &Mult::new(ts));
        }
        Ok(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeRule {
    Var,
    Abs,
    App,
    Es,
}

/// A typing derivation. Premise layout: `abs` has one premise per element
/// of its type in V and exactly one in N; `app` and `es` put the function
/// or body first, followed by the argument derivations (exactly one in V,
/// any number in N).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Derivation {
    pub rule: TypeRule,
    #[serde(rename = "context")]
    pub ctx: TypingCtx,
    pub term: Term,
    #[serde(rename = "type")]
    pub ty: Ty,
    #[serde(default)]
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn var(sys: System, x: &str, ty: Ty) -> Derivation {
        let ctx = match (&ty, sys) {
            (Ty::Mult(m), System::V) => TypingCtx::single(x, m.clone()),
            _ => TypingCtx::single(x, Mult::single(ty.clone())),
        };
        Derivation { rule: TypeRule::Var, ctx, term: Term::var(x), ty, premises: Vec::new() }
    }

    /// An abstraction node; the type is computed from the premises.
    pub fn abs(sys: System, x: &str, body: &Term, premises: Vec<Derivation>) -> Derivation {
        let arrow = |p: &Derivation| Ty::arrow(p.ctx.get(x), p.ty.clone());
        let ty = match sys {
            System::V => Ty::Mult(premises.iter().map(arrow).collect()),
            System::N => arrow(&premises[0]),
        };
        let mut d = Derivation { rule: TypeRule::Abs, ctx: TypingCtx::empty(), term: Term::abs(x, body.clone()), ty, premises };
        d.recompute_ctx();
        d
    }

    pub fn app(arg: &Term, ty: Ty, premises: Vec<Derivation>) -> Derivation {
        let term = Term::app(premises[0].term.clone(), arg.clone());
        let mut d = Derivation { rule: TypeRule::App, ctx: TypingCtx::empty(), term, ty, premises };
        d.recompute_ctx();
        d
    }

    pub fn es(x: &str, arg: &Term, premises: Vec<Derivation>) -> Derivation {
        let ty = premises[0].ty.clone();
        let term = Term::es(premises[0].term.clone(), x, arg.clone());
        let mut d = Derivation { rule: TypeRule::Es, ctx: TypingCtx::empty(), term, ty, premises };
        d.recompute_ctx();
        d
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    /// Recomputes this node's context from its premises (not recursively).
    pub(crate) fn recompute_ctx(&mut self) {
        self.ctx = match (&self.term, self.rule) {
            (Term::Var(x), TypeRule::Var) => match &self.ty {
                Ty::Mult(m) => TypingCtx::single(x, m.clone()),
                t => TypingCtx::single(x, Mult::single(t.clone())),
            },
            (Term::Abs(x, _), TypeRule::Abs) => {
                self.premises.iter().fold(TypingCtx::empty(), |c, p| c.sum(&p.ctx.without(x)))
            }
            (Term::Es(_, x, _), TypeRule::Es) => {
                let body = self.premises.first().map(|p| p.ctx.without(x)).unwrap_or_default();
                self.premises[1..].iter().fold(body, |c, p| c.sum(&p.ctx))
            }
            _ => self.premises.iter().fold(TypingCtx::empty(), |c, p| c.sum(&p.ctx)),
        };
    }

    /// Recomputes every context bottom-up. Var-node contexts are derived from
    /// their term and type in V (where the type is the multiset itself) and
    /// from the singleton type in N.
    pub(crate) fn recompute_all(&mut self, sys: System) {
        for p in &mut self.premises {
            p.recompute_all(sys);
        }
        if let (TypeRule::Var, Term::Var(x), System::N) = (self.rule, &self.term, sys) {
            self.ctx = TypingCtx::single(x, Mult::single(self.ty.clone()));
        } else {
            self.recompute_ctx();
        }
    }

    /// Overwrites the terms of the whole tree with those of `target`,
    /// following the premise layout. Binder names may differ.
    pub(crate) fn set_terms(&mut self, target: &Term) -> Result<()> {
        let mismatch = || Error::Derivation(format!("rule does not fit the term {target}"));
        match (self.rule, target) {
            (TypeRule::Var, Term::Var(_)) if self.premises.is_empty() => {}
            (TypeRule::Abs, Term::Abs(_, b)) => {
                for p in &mut self.premises {
                    p.set_terms(b)?;
                }
            }
            (TypeRule::App, Term::App(f, a)) | (TypeRule::Es, Term::Es(f, _, a)) if !self.premises.is_empty() => {
                self.premises[0].set_terms(f)?;
                for p in &mut self.premises[1..] {
                    p.set_terms(a)?;
                }
            }
            _ => return Err(mismatch()),
        }
        self.term = target.clone();
        Ok(())
    }

    /// Moves the derivation onto an alpha-variant of its term, renaming
    /// context entries accordingly.
    pub fn relabel(&self, target: &Term, sys: System) -> Result<Derivation> {
        if !self.term.alpha_eq(target) {
            return Err(Error::Derivation(format!("{target} is not an alpha-variant of {}", self.term)));
        }
        let mut d = self.clone();
        d.set_terms(target)?;
        d.recompute_all(sys);
        Ok(d)
    }

    pub(crate) fn node(&self, path: &[usize]) -> Option<&Derivation> {
        match path.split_first() {
            None => Some(self),
            Some((i, rest)) => self.premises.get(*i)?.node(rest),
        }
    }

    pub(crate) fn node_mut(&mut self, path: &[usize]) -> Option<&mut Derivation> {
        match path.split_first() {
            None => Some(self),
            Some((i, rest)) => self.premises.get_mut(*i)?.node_mut(rest),
        }
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(d: &Derivation, indent: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let term = crate::syntax::print_named(&d.term);
            writeln!(f, "{:indent$}({:?}) {} ⊢ {term} : {}", "", d.rule, d.ctx, d.ty, indent = indent)?;
            for p in &d.premises {
                go(p, indent + 2, f)?;
            }
            Ok(())
        }
        go(self, 0, f)
    }
}
