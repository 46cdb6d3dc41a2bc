//! Redex discovery, contraction at a distance, and fuel-bounded
//! normalization with cycle detection.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::position::{Calculus, Edge, Level, Position};
use crate::term::{fresh_name, Name, Term};

pub const DEFAULT_FUEL: usize = 10_000;

/// Normalization gives up (as if out of fuel) once a term grows past this.
pub const MAX_TERM_SIZE: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    #[serde(rename = "dB")]
    Db,
    #[serde(rename = "sv")]
    Sv,
    #[serde(rename = "sN")]
    Sn,
    #[serde(rename = "betaV")]
    BetaV,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Db => "dB",
            Rule::Sv => "sv",
            Rule::Sn => "sN",
            Rule::BetaV => "betaV",
        })
    }
}

/// A list context `⟨⟩[x1\u1]…[xn\un]`, innermost closure first.
pub type ListCtx = Vec<(Name, Term)>;

pub fn plug_list(list: &ListCtx, t: Term) -> Term {
    list.iter().fold(t, |acc, (x, u)| Term::Es(Box::new(acc), x.clone(), Box::new(u.clone())))
}

/// Splits `t` as `L⟨core⟩` with the longest list context.
pub fn peel_list(t: &Term) -> (ListCtx, &Term) {
    let mut outer_first = Vec::new();
    let mut cur = t;
    while let Term::Es(b, x, u) = cur {
        outer_first.push((x.clone(), (**u).clone()));
        cur = b;
    }
    outer_first.reverse();
    (outer_first, cur)
}

/// Renames the closures of the list spine of `t` whose binder is in `avoid`.
fn freshen_list(t: &Term, avoid: &BTreeSet<Name>) -> Term {
    match t {
        Term::Es(b, y, u) if avoid.contains(y) => {
            let mut taken = avoid.clone();
            taken.extend(t.all_names());
            let z = fresh_name(y, &taken);
            let b = b.rename_free(y, &z);
            Term::Es(Box::new(freshen_list(&b, avoid)), z, u.clone())
        }
        Term::Es(b, y, u) => Term::Es(Box::new(freshen_list(b, avoid)), y.clone(), u.clone()),
        _ => t.clone(),
    }
}

/// The matched shape of a redex.
#[derive(Clone, Debug, PartialEq)]
pub enum Redex {
    /// `L⟨λx.s⟩ t`
    Db { list: ListCtx, binder: Name, body: Term, arg: Term },
    /// `t[x\L⟨v⟩]`
    Sv { body: Term, binder: Name, list: ListCtx, value: Term },
    /// `t[x\u]`
    Sn { body: Term, binder: Name, arg: Term },
    /// `(λx.t) v`, pure
    BetaV { binder: Name, body: Term, arg: Term },
}

impl Redex {
    pub fn rule(&self) -> Rule {
        match self {
            Redex::Db { .. } => Rule::Db,
            Redex::Sv { .. } => Rule::Sv,
            Redex::Sn { .. } => Rule::Sn,
            Redex::BetaV { .. } => Rule::BetaV,
        }
    }

    /// Length of the list context the pattern matched through.
    pub fn list_len(&self) -> usize {
        match self {
            Redex::Db { list, .. } | Redex::Sv { list, .. } => list.len(),
            _ => 0,
        }
    }

    /// Reassembles the redex.
    pub fn plug(&self) -> Term {
        match self {
            Redex::Db { list, binder, body, arg } => {
                Term::app(plug_list(list, Term::Abs(binder.clone(), Box::new(body.clone()))), arg.clone())
            }
            Redex::Sv { body, binder, list, value } => {
                Term::Es(Box::new(body.clone()), binder.clone(), Box::new(plug_list(list, value.clone())))
            }
            Redex::Sn { body, binder, arg } => Term::Es(Box::new(body.clone()), binder.clone(), Box::new(arg.clone())),
            Redex::BetaV { binder, body, arg } => {
                Term::app(Term::Abs(binder.clone(), Box::new(body.clone())), arg.clone())
            }
        }
    }

    /// The right-hand side. List binders that would capture are renamed first.
    pub fn contract(&self) -> Term {
        match self {
            Redex::Db { list, binder, body, arg } => {
                let fun = freshen_list(&plug_list(list, Term::Abs(binder.clone(), Box::new(body.clone()))), &arg.free_vars());
                let (list, core) = peel_list(&fun);
                let Term::Abs(x, s) = core else { unreachable!("list spine ends in the abstraction") };
                plug_list(&list, Term::Es(s.clone(), x.clone(), Box::new(arg.clone())))
            }
            Redex::Sv { body, binder, list, value } => {
                let mut avoid = body.free_vars();
                avoid.remove(binder);
                let arg = freshen_list(&plug_list(list, value.clone()), &avoid);
                let (list, v) = peel_list(&arg);
                plug_list(&list, body.subst(binder, v))
            }
            Redex::Sn { body, binder, arg } | Redex::BetaV { binder, body, arg } => body.subst(binder, arg),
        }
    }
}

/// Matches a root redex of the given calculus.
pub fn decompose(t: &Term, c: Calculus) -> Option<Redex> {
    match t {
        Term::App(f, a) => {
            let (list, core) = peel_list(f);
            match core {
                Term::Abs(x, s) => Some(Redex::Db { list, binder: x.clone(), body: (**s).clone(), arg: (**a).clone() }),
                _ => None,
            }
        }
        Term::Es(b, x, a) => match c {
            Calculus::Cbn => Some(Redex::Sn { body: (**b).clone(), binder: x.clone(), arg: (**a).clone() }),
            Calculus::Cbv => {
                let (list, core) = peel_list(a);
                core.is_value().then(|| Redex::Sv {
                    body: (**b).clone(),
                    binder: x.clone(),
                    list,
                    value: core.clone(),
                })
            }
        },
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RedexOccurrence {
    pub position: Position,
    pub redex: Redex,
    /// Stratification depth of `position`.
    pub level: u32,
}

impl RedexOccurrence {
    pub fn rule(&self) -> Rule {
        self.redex.rule()
    }
}

/// All redexes admissible at level `k`, leftmost-outermost first.
pub fn find_redexes(t: &Term, c: Calculus, k: Level) -> Vec<RedexOccurrence> {
    fn go(t: &Term, c: Calculus, k: Level, path: &mut Vec<Edge>, depth: u32, out: &mut Vec<RedexOccurrence>) {
        if !k.admits(depth) {
            return;
        }
        if let Some(redex) = decompose(t, c) {
            out.push(RedexOccurrence { position: Position(path.clone()), redex, level: depth });
        }
        let mut visit = |e: Edge, child: &Term| {
            path.push(e);
            go(child, c, k, path, depth + e.deepens(c) as u32, out);
            path.pop();
        };
        match t {
            Term::Var(_) | Term::Bot => {}
            Term::Abs(_, b) => visit(Edge::AbsBody, b),
            Term::App(f, a) => {
                visit(Edge::AppFun, f);
                visit(Edge::AppArg, a);
            }
            Term::Es(b, _, a) => {
                visit(Edge::EsBody, b);
                visit(Edge::EsArg, a);
            }
        }
    }
    let mut out = Vec::new();
    go(t, c, k, &mut Vec::new(), 0, &mut out);
    out
}

/// The redex of calculus `c` rooted at `p`, if any.
pub fn redex_at(t: &Term, p: &Position, c: Calculus) -> Option<RedexOccurrence> {
    let sub = t.subterm(p)?;
    decompose(sub, c).map(|redex| RedexOccurrence { position: p.clone(), redex, level: p.depth(c) })
}

pub fn apply_step(t: &Term, o: &RedexOccurrence) -> Result<Term> {
    let sub = t.subterm(&o.position).ok_or_else(|| Error::StaleOccurrence(o.position.clone()))?;
    if !sub.alpha_eq(&o.redex.plug()) {
        return Err(Error::StaleOccurrence(o.position.clone()));
    }
    Ok(t.replace_at(&o.position, o.redex.contract()).expect("position checked above"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub before: Term,
    pub after: Term,
    pub occurrence: RedexOccurrence,
    pub level_required: u32,
}

impl Step {
    pub fn new(before: &Term, occurrence: RedexOccurrence) -> Result<Step> {
        let after = apply_step(before, &occurrence)?;
        let level_required = occurrence.level;
        Ok(Step { before: before.clone(), after, occurrence, level_required })
    }

    pub fn rule(&self) -> Rule {
        self.occurrence.rule()
    }

    pub fn position(&self) -> &Position {
        &self.occurrence.position
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[default]
    LeftmostOutermost,
    LeftmostInnermost,
    RightmostInnermost,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "leftmost-outermost" | "lo" => Ok(Strategy::LeftmostOutermost),
            "leftmost-innermost" | "li" => Ok(Strategy::LeftmostInnermost),
            "rightmost-innermost" | "ri" => Ok(Strategy::RightmostInnermost),
            other => Err(Error::Document(format!("unknown strategy `{other}`"))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::LeftmostOutermost => "leftmost-outermost",
            Strategy::LeftmostInnermost => "leftmost-innermost",
            Strategy::RightmostInnermost => "rightmost-innermost",
        })
    }
}

impl Strategy {
    /// Picks from a leftmost-outermost ordered list.
    pub fn select(self, mut redexes: Vec<RedexOccurrence>) -> Option<RedexOccurrence> {
        let innermost = |rs: &[RedexOccurrence], i: usize| {
            !rs.iter().enumerate().any(|(j, r)| j != i && rs[i].position.is_prefix_of(&r.position))
        };
        match self {
            Strategy::LeftmostOutermost => (!redexes.is_empty()).then(|| redexes.swap_remove(0)),
            Strategy::LeftmostInnermost => {
                let i = (0..redexes.len()).find(|&i| innermost(&redexes, i))?;
                Some(redexes.swap_remove(i))
            }
            Strategy::RightmostInnermost => {
                let i = (0..redexes.len()).rev().find(|&i| innermost(&redexes, i))?;
                Some(redexes.swap_remove(i))
            }
        }
    }
}

pub fn reduce_once(t: &Term, c: Calculus, k: Level, strategy: Strategy) -> Option<Step> {
    let o = strategy.select(find_redexes(t, c, k))?;
    Some(Step::new(t, o).expect("fresh occurrence applies"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    NormalForm,
    /// The final term is alpha-equal to the before-term of this step.
    Cycle { at: usize },
    FuelExhausted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub initial: Term,
    pub calculus: Calculus,
    pub level: Level,
    pub strategy: Strategy,
    pub steps: Vec<Step>,
    pub outcome: Outcome,
}

impl Trace {
    pub fn last(&self) -> &Term {
        self.steps.last().map_or(&self.initial, |s| &s.after)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The normal form, when the trace reached one.
    pub fn normal_form(&self) -> Option<&Term> {
        (self.outcome == Outcome::NormalForm).then(|| self.last())
    }

    /// Replays every step and the outcome claim.
    pub fn verify(&self) -> Result<()> {
        verify_steps(&self.initial, &self.steps, self.calculus, self.level)?;
        let last = self.last();
        match self.outcome {
            Outcome::NormalForm => {
                if !find_redexes(last, self.calculus, self.level).is_empty() {
                    return Err(Error::Document("claimed normal form still has a redex".into()));
                }
            }
            Outcome::Cycle { at } => {
                let before = if at == 0 { Some(&self.initial) } else { self.steps.get(at).map(|s| &s.before) };
                match before {
                    Some(b) if b.alpha_eq(last) && at < self.steps.len() => {}
                    _ => return Err(Error::Document(format!("claimed cycle at step {at} does not close"))),
                }
            }
            Outcome::FuelExhausted => {}
        }
        Ok(())
    }
}

/// Checks that `steps` is a chain of genuine level-`k` steps from `start`.
pub fn verify_steps(start: &Term, steps: &[Step], c: Calculus, k: Level) -> Result<()> {
    let mut cur = start;
    for (i, s) in steps.iter().enumerate() {
        if !s.before.alpha_eq(cur) {
            return Err(Error::Document(format!("step {i} does not start where the previous one ended")));
        }
        let o = redex_at(&s.before, s.position(), c)
            .filter(|o| o.rule() == s.rule())
            .ok_or_else(|| Error::Document(format!("step {i}: no {} redex at `{}`", s.rule(), s.position())))?;
        if !k.admits(o.level) {
            return Err(Error::Document(format!("step {i} is deeper than level {k}")));
        }
        if !apply_step(&s.before, &o)?.alpha_eq(&s.after) {
            return Err(Error::Document(format!("step {i}: contractum does not match")));
        }
        cur = &s.after;
    }
    Ok(())
}

pub fn normalize(t: &Term, c: Calculus, k: Level, fuel: usize) -> Trace {
    normalize_with(t, c, k, fuel, Strategy::default())
}

pub fn normalize_with(t: &Term, c: Calculus, k: Level, fuel: usize, strategy: Strategy) -> Trace {
    let mut seen = HashMap::new();
    seen.insert(t.canon(), 0usize);
    let mut steps: Vec<Step> = Vec::new();
    let outcome = loop {
        let cur = steps.last().map_or(t, |s| &s.after);
        if cur.size() > MAX_TERM_SIZE {
            break Outcome::FuelExhausted;
        }
        let Some(o) = strategy.select(find_redexes(cur, c, k)) else {
            break Outcome::NormalForm;
        };
        if steps.len() >= fuel {
            break Outcome::FuelExhausted;
        }
        let step = Step::new(cur, o).expect("fresh occurrence applies");
        let key = step.after.canon();
        steps.push(step);
        if let Some(&at) = seen.get(&key) {
            break Outcome::Cycle { at };
        }
        seen.insert(key, steps.len());
    };
    Trace { initial: t.clone(), calculus: c, level: k, strategy, steps, outcome }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepDoc {
    pub rule: Rule,
    pub position: Position,
    pub before: Term,
    pub after: Term,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceDoc {
    pub initial: Term,
    pub calculus: Calculus,
    pub level: Level,
    pub strategy: Strategy,
    pub steps: Vec<StepDoc>,
    pub outcome: Outcome,
}

impl StepDoc {
    pub fn of(s: &Step) -> Self {
        StepDoc { rule: s.rule(), position: s.position().clone(), before: s.before.clone(), after: s.after.clone() }
    }

    /// Rebuilds the step, checking that it is genuine.
    pub fn to_step(&self, c: Calculus) -> Result<Step> {
        let o = redex_at(&self.before, &self.position, c)
            .filter(|o| o.rule() == self.rule)
            .ok_or_else(|| Error::Document(format!("no {} redex at `{}`", self.rule, self.position)))?;
        let step = Step::new(&self.before, o)?;
        if !step.after.alpha_eq(&self.after) {
            return Err(Error::Document(format!("step at `{}` does not produce the recorded term", self.position)));
        }
        Ok(step)
    }
}

impl Trace {
    pub fn to_doc(&self) -> TraceDoc {
        TraceDoc {
            initial: self.initial.clone(),
            calculus: self.calculus,
            level: self.level,
            strategy: self.strategy,
            steps: self.steps.iter().map(StepDoc::of).collect(),
            outcome: self.outcome,
        }
    }

    pub fn from_doc(doc: &TraceDoc) -> Result<Trace> {
        let steps = doc.steps.iter().map(|s| s.to_step(doc.calculus)).collect::<Result<Vec<_>>>()?;
        let trace = Trace {
            initial: doc.initial.clone(),
            calculus: doc.calculus,
            level: doc.level,
            strategy: doc.strategy,
            steps,
            outcome: doc.outcome,
        };
        trace.verify()?;
        Ok(trace)
    }
}

impl Serialize for Trace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_doc().serialize(s)
    }
}

impl Serialize for Step {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StepDoc::of(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Trace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = TraceDoc::deserialize(d)?;
        Trace::from_doc(&doc).map_err(serde::de::Error::custom)
    }
}
