//! One-hole contexts. Plugging captures: `(λx.⟨⟩)⟨x⟩ = λx.x`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::position::{Edge, Position};
use crate::syntax::{self, HOLE};
use crate::term::Term;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context {
    /// The context with ⊥ standing in the hole.
    skeleton: Term,
    hole: Position,
}

impl Context {
    pub fn hole() -> Self {
        Context { skeleton: Term::Bot, hole: Position::root() }
    }

    /// Parses a term containing exactly one `@`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = syntax::parse_with_hole(text)?;
        let holes = t.free_positions(HOLE);
        match holes.as_slice() {
            [p] => Ok(Context { skeleton: t.replace_at(p, Term::Bot).expect("hole position"), hole: p.clone() }),
            [] => Err(Error::Syntax { offset: text.len(), message: "context has no hole `@`".into() }),
            _ => Err(Error::Syntax { offset: 0, message: "context has more than one hole `@`".into() }),
        }
    }

    pub fn from_parts(term: Term, hole: Position) -> Result<Self> {
        let skeleton = term.replace_at(&hole, Term::Bot).ok_or_else(|| Error::InvalidPosition(hole.clone()))?;
        Ok(Context { skeleton, hole })
    }

    pub fn hole_position(&self) -> &Position {
        &self.hole
    }

    pub fn plug(&self, t: &Term) -> Term {
        self.skeleton.replace_at(&self.hole, t.clone()).expect("hole position is valid")
    }

    /// `C⟨⟩ u`
    pub fn app_left(&self, u: Term) -> Self {
        self.wrap(Edge::AppFun, |h| Term::app(h, u))
    }

    /// `u C⟨⟩`
    pub fn app_right(&self, u: Term) -> Self {
        self.wrap(Edge::AppArg, |h| Term::app(u, h))
    }

    /// `λx.C⟨⟩`
    pub fn under_abs(&self, x: &str) -> Self {
        self.wrap(Edge::AbsBody, |h| Term::abs(x, h))
    }

    /// `C⟨⟩[x\u]`
    pub fn closure(&self, x: &str, u: Term) -> Self {
        self.wrap(Edge::EsBody, |h| Term::es(h, x, u))
    }

    fn wrap(&self, e: Edge, build: impl FnOnce(Term) -> Term) -> Self {
        let mut path = vec![e];
        path.extend_from_slice(self.hole.edges());
        Context { skeleton: build(self.skeleton.clone()), hole: Position(path) }
    }

    pub fn size(&self) -> usize {
        self.skeleton.size()
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&syntax::print_named(&self.plug(&Term::var(HOLE))))
    }
}

impl Serialize for Context {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Context {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Context::parse(&s).map_err(serde::de::Error::custom)
    }
}
