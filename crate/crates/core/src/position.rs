//! Paths into terms, levels, and the two calculi.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::term::Term;

/// One step down the syntax tree. The derived order puts the left child
/// before the right one, which makes position order leftmost-outermost.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Edge {
    AbsBody,
    AppFun,
    AppArg,
    EsBody,
    EsArg,
}

impl Edge {
    pub fn label(self) -> char {
        match self {
            Edge::AbsBody => 'b',
            Edge::AppFun => 'l',
            Edge::AppArg => 'r',
            Edge::EsBody => 's',
            Edge::EsArg => 'e',
        }
    }

    pub fn from_label(c: char) -> Option<Edge> {
        Some(match c {
            'b' => Edge::AbsBody,
            'l' => Edge::AppFun,
            'r' => Edge::AppArg,
            's' => Edge::EsBody,
            'e' => Edge::EsArg,
            _ => return None,
        })
    }

    /// Whether crossing this edge raises the stratification depth.
    pub fn deepens(self, c: Calculus) -> bool {
        match c {
            Calculus::Cbv => self == Edge::AbsBody,
            Calculus::Cbn => matches!(self, Edge::AppArg | Edge::EsArg),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(pub Vec<Edge>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn edges(&self) -> &[Edge] {
        &self.0
    }

    pub fn child(&self, e: Edge) -> Position {
        let mut v = self.0.clone();
        v.push(e);
        Position(v)
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Depth of the position for the given calculus: λ-crossings in CbV,
    /// argument crossings in CbN.
    pub fn depth(&self, c: Calculus) -> u32 {
        self.0.iter().filter(|e| e.deepens(c)).count() as u32
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{}", e.label())?;
        }
        Ok(())
    }
}

impl FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Position::root());
        }
        s.split('.')
            .map(|part| {
                let mut chars = part.chars();
                match (chars.next().and_then(Edge::from_label), chars.next()) {
                    (Some(e), None) => Ok(e),
                    _ => Err(Error::Document(format!("bad position label `{part}`"))),
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Position)
    }
}

impl Serialize for Position {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Position {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A stratification index: a natural number or ω. `Fin(i) < Omega`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Fin(u32),
    Omega,
}

impl Level {
    pub const ZERO: Level = Level::Fin(0);

    /// Whether a hole at `depth` is admissible at this level.
    pub fn admits(self, depth: u32) -> bool {
        match self {
            Level::Fin(k) => depth <= k,
            Level::Omega => true,
        }
    }

    /// The level one stratum down, `None` at 0.
    pub fn pred(self) -> Option<Level> {
        match self {
            Level::Fin(0) => None,
            Level::Fin(k) => Some(Level::Fin(k - 1)),
            Level::Omega => Some(Level::Omega),
        }
    }

    pub fn succ(self) -> Level {
        match self {
            Level::Fin(k) => Level::Fin(k + 1),
            Level::Omega => Level::Omega,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Fin(k) => write!(f, "{k}"),
            Level::Omega => f.write_str("omega"),
        }
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("omega") || s == "ω" {
            return Ok(Level::Omega);
        }
        s.parse::<u32>()
            .map(Level::Fin)
            .map_err(|_| Error::Document(format!("bad level `{s}`: expected a natural or `omega`")))
    }
}

impl Serialize for Level {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Level::Fin(k) => s.serialize_u32(*k),
            Level::Omega => s.serialize_str("omega"),
        }
    }
}

impl<'de> Deserialize<'de> for Level {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u32),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(k) => Ok(Level::Fin(k)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Calculus {
    Cbv,
    Cbn,
}

impl fmt::Display for Calculus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Calculus::Cbv => "cbv",
            Calculus::Cbn => "cbn",
        })
    }
}

impl FromStr for Calculus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cbv" => Ok(Calculus::Cbv),
            "cbn" => Ok(Calculus::Cbn),
            other => Err(Error::Document(format!("unknown calculus `{other}`"))),
        }
    }
}

/// Stratification depth of position `p` in `t`: the hole of the induced
/// one-hole context is admissible at level k iff this is at most k.
pub fn level_of(t: &Term, p: &Position, c: Calculus) -> Result<u32> {
    t.subterm(p).ok_or_else(|| Error::InvalidPosition(p.clone()))?;
    Ok(p.depth(c))
}
