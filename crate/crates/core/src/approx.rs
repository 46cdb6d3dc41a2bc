//! The meaningfulness oracle, meaningful approximants, and the dynamic
//! approximation and lifting constructions.

use std::collections::{HashMap, HashSet};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::position::{Calculus, Edge, Level, Position};
use crate::reduction::{normalize, redex_at, Outcome, Step, Trace, DEFAULT_FUEL};
use crate::term::{Canon, Name, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Meaningful,
    Meaningless,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Witness {
    /// A level-0 trace that closes a cycle.
    Cycle(Trace),
    /// Listed in a user annotation file.
    Asserted { term: Term },
}

/// One entry of an annotation file: `{"term": "...", "status": "meaningless"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub term: Term,
    pub status: AnnotatedStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnotatedStatus {
    Meaningless,
}

/// Reads a JSON list of annotations and returns the asserted terms.
pub fn parse_annotations(text: &str) -> Result<Vec<Term>> {
    let entries: Vec<Annotation> = serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
    entries
        .into_iter()
        .map(|a| if a.term.contains_bot() { Err(Error::PartialTerm(a.term.to_string())) } else { Ok(a.term) })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum MeaningStatus {
    Meaningful(Trace),
    Meaningless(Witness),
    Unknown { fuel_spent: usize },
}

impl MeaningStatus {
    pub fn decision(&self) -> Decision {
        match self {
            MeaningStatus::Meaningful(_) => Decision::Meaningful,
            MeaningStatus::Meaningless(_) => Decision::Meaningless,
            MeaningStatus::Unknown { .. } => Decision::Unknown,
        }
    }

    /// Re-checks the evidence. Asserted witnesses are taken on trust.
    pub fn verify(&self) -> Result<()> {
        match self {
            MeaningStatus::Meaningful(tr) => {
                tr.verify()?;
                if tr.level != Level::ZERO || tr.outcome != Outcome::NormalForm {
                    return Err(Error::Document("meaningful status needs a level-0 normal form trace".into()));
                }
                Ok(())
            }
            MeaningStatus::Meaningless(Witness::Cycle(tr)) => {
                tr.verify()?;
                if tr.level != Level::ZERO || !matches!(tr.outcome, Outcome::Cycle { .. }) {
                    return Err(Error::Document("meaningless status needs a level-0 cycle".into()));
                }
                Ok(())
            }
            MeaningStatus::Meaningless(Witness::Asserted { .. }) | MeaningStatus::Unknown { .. } => Ok(()),
        }
    }
}

/// Three-valued meaningfulness, decided by level-0 normalization, with a
/// per-run memo keyed by canonical form. Shareable across threads.
pub struct Oracle {
    calculus: Calculus,
    fuel: usize,
    memo: RwLock<HashMap<Canon, Decision>>,
    asserted: HashSet<Canon>,
}

impl Oracle {
    pub fn new(calculus: Calculus, fuel: usize) -> Self {
        Oracle { calculus, fuel, memo: RwLock::new(HashMap::new()), asserted: HashSet::new() }
    }

    pub fn with_default_fuel(calculus: Calculus) -> Self {
        Oracle::new(calculus, DEFAULT_FUEL)
    }

    /// Terms to treat as meaningless when normalization runs out of fuel.
    pub fn with_assertions(mut self, terms: impl IntoIterator<Item = Term>) -> Self {
        self.asserted.extend(terms.into_iter().map(|t| t.canon()));
        self
    }

    pub fn calculus(&self) -> Calculus {
        self.calculus
    }

    pub fn fuel(&self) -> usize {
        self.fuel
    }

    pub fn status(&self, t: &Term) -> Result<MeaningStatus> {
        if t.contains_bot() {
            return Err(Error::PartialTerm(t.to_string()));
        }
        let tr = normalize(t, self.calculus, Level::ZERO, self.fuel);
        let status = match tr.outcome {
            Outcome::NormalForm => MeaningStatus::Meaningful(tr),
            Outcome::Cycle { .. } => MeaningStatus::Meaningless(Witness::Cycle(tr)),
            Outcome::FuelExhausted if self.asserted.contains(&t.canon()) => {
                MeaningStatus::Meaningless(Witness::Asserted { term: t.clone() })
            }
            Outcome::FuelExhausted => MeaningStatus::Unknown { fuel_spent: tr.len() },
        };
        self.memo.write().expect("memo lock").insert(t.canon(), status.decision());
        Ok(status)
    }

    pub fn decide(&self, t: &Term) -> Result<Decision> {
        let key = t.canon();
        if let Some(d) = self.memo.read().expect("memo lock").get(&key) {
            return Ok(*d);
        }
        self.status(t).map(|s| s.decision())
    }

    /// `A(t)`: meaningless subterms replaced by ⊥. Fails with
    /// [`Error::Undetermined`] at the first subterm the oracle cannot decide.
    pub fn approximant(&self, t: &Term) -> Result<Term> {
        if t.contains_bot() {
            return Err(Error::PartialTerm(t.to_string()));
        }
        self.approx_at(t, &mut Vec::new())
    }

    fn approx_at(&self, t: &Term, path: &mut Vec<Edge>) -> Result<Term> {
        match self.decide(t)? {
            Decision::Meaningless => return Ok(Term::Bot),
            Decision::Unknown => return Err(Error::Undetermined(Position(path.clone()))),
            Decision::Meaningful => {}
        }
        let mut sub = |e: Edge, u: &Term| -> Result<Box<Term>> {
            path.push(e);
            let r = self.approx_at(u, path);
            path.pop();
            r.map(Box::new)
        };
        Ok(match t {
            Term::Var(_) | Term::Bot => t.clone(),
            Term::Abs(x, b) => Term::Abs(x.clone(), sub(Edge::AbsBody, b)?),
            Term::App(f, a) => {
                let f = sub(Edge::AppFun, f)?;
                Term::App(f, sub(Edge::AppArg, a)?)
            }
            Term::Es(b, x, a) => {
                let b = sub(Edge::EsBody, b)?;
                Term::Es(b, x.clone(), sub(Edge::EsArg, a)?)
            }
        })
    }
}

pub fn meaning_status(t: &Term, c: Calculus, fuel: usize) -> Result<MeaningStatus> {
    Oracle::new(c, fuel).status(t)
}

pub fn meaningful_approximant(t: &Term, c: Calculus, fuel: usize) -> Result<Term> {
    Oracle::new(c, fuel).approximant(t)
}

/// The image of a step under `A`.
#[derive(Clone, Debug, PartialEq)]
pub enum ApproxStep {
    /// The redex lies in a meaningless zone: `A(after) ⊑ A(before)`.
    Collapsed { approximant: Term },
    /// `A(before) → over` at the same position, with `A(after) ⊑ over`.
    Mapped { step: Step, over: Term },
}

impl ApproxStep {
    pub fn is_mapped(&self) -> bool {
        matches!(self, ApproxStep::Mapped { .. })
    }
}

pub fn approximate_step(s: &Step, oracle: &Oracle) -> Result<ApproxStep> {
    let c = oracle.calculus();
    let a_before = oracle.approximant(&s.before)?;
    let a_after = oracle.approximant(&s.after)?;
    let pos = s.position();
    let collapsed = (0..=pos.len()).any(|i| {
        let prefix = Position(pos.edges()[..i].to_vec());
        matches!(a_before.subterm(&prefix), None | Some(Term::Bot))
    });
    if collapsed {
        if !a_after.partial_leq(&a_before) {
            return Err(Error::Assumption(format!(
                "collapsed step but A(after) = {a_after} is not below A(before) = {a_before}"
            )));
        }
        return Ok(ApproxStep::Collapsed { approximant: a_before });
    }
    let o = redex_at(&a_before, pos, c).filter(|o| o.rule() == s.rule()).ok_or_else(|| {
        Error::Assumption(format!("no {} redex at `{pos}` in the approximant {a_before}", s.rule()))
    })?;
    let step = Step::new(&a_before, o)?;
    if !a_after.partial_leq(&step.after) {
        return Err(Error::Assumption(format!(
            "A(after) = {a_after} is not below the mapped reduct {}",
            step.after
        )));
    }
    let over = step.after.clone();
    Ok(ApproxStep::Mapped { step, over })
}

/// Replays a step on partial terms over a term above its source.
pub fn lift_step(partial: &Step, bigger: &Term, c: Calculus) -> Result<Step> {
    if !partial.before.partial_leq(bigger) {
        return Err(Error::Precondition(format!("{} is not below {bigger}", partial.before)));
    }
    let o = redex_at(bigger, partial.position(), c)
        .filter(|o| o.rule() == partial.rule())
        .ok_or_else(|| Error::Assumption(format!("no {} redex at `{}` in {bigger}", partial.rule(), partial.position())))?;
    let step = Step::new(bigger, o)?;
    if !partial.after.partial_leq(&step.after) {
        return Err(Error::Assumption(format!("lifted reduct {} is not above {}", step.after, partial.after)));
    }
    Ok(step)
}

/// `T ::= ⟨⟩ | T u | (λx.T) u`
#[derive(Clone, Debug, PartialEq)]
pub enum TestingContext {
    Hole,
    App(Box<TestingContext>, Term),
    Redex(Name, Box<TestingContext>, Term),
}

impl TestingContext {
    pub fn plug(&self, t: &Term) -> Term {
        match self {
            TestingContext::Hole => t.clone(),
            TestingContext::App(c, u) => Term::app(c.plug(t), u.clone()),
            TestingContext::Redex(x, c, u) => Term::app(Term::Abs(x.clone(), Box::new(c.plug(t))), u.clone()),
        }
    }

    /// Whether `T⟨t⟩` reaches an observable by surface reduction: a value in
    /// CbV, the identity in CbN. `None` when fuel runs out or it cycles.
    pub fn observes(&self, t: &Term, c: Calculus, fuel: usize) -> Option<bool> {
        let tr = normalize(&self.plug(t), c, Level::ZERO, fuel);
        let nf = tr.normal_form()?;
        Some(match c {
            Calculus::Cbv => nf.is_value(),
            Calculus::Cbn => nf.alpha_eq(&Term::id()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::{find_redexes, reduce_once, Rule, Strategy};
    use crate::syntax::parse;

    fn p(s: &str) -> Term {
        parse(s).unwrap()
    }

    const V: Calculus = Calculus::Cbv;
    const N: Calculus = Calculus::Cbn;

    #[test]
    fn annotation_files() {
        let ts = parse_annotations(r#"[{"term": "(\\a.a a)(\\a.a a)", "status": "meaningless"}]"#).unwrap();
        assert!(ts[0].alpha_eq(&Term::omega()));
        assert!(parse_annotations(r#"[{"term": "x", "status": "meaningful"}]"#).is_err());
        assert!(parse_annotations(r#"[{"term": "bot", "status": "meaningless"}]"#).is_err());
    }

    #[test]
    fn surface_statuses() {
        let o = Oracle::with_default_fuel(V);
        assert_eq!(o.decide(&Term::omega()).unwrap(), Decision::Meaningless);
        assert_eq!(o.decide(&Term::abs("x", Term::omega())).unwrap(), Decision::Meaningful);
        assert_eq!(o.decide(&Term::app(Term::var("x"), Term::omega())).unwrap(), Decision::Meaningless);
        let n = Oracle::with_default_fuel(N);
        assert_eq!(n.decide(&Term::abs("x", Term::omega())).unwrap(), Decision::Meaningless);
        assert_eq!(n.decide(&Term::app(Term::var("x"), Term::omega())).unwrap(), Decision::Meaningful);
    }

    #[test]
    fn statuses_carry_checkable_evidence() {
        let s = meaning_status(&Term::omega(), V, 50).unwrap();
        s.verify().unwrap();
        assert!(matches!(s, MeaningStatus::Meaningless(Witness::Cycle(_))));
        let s = meaning_status(&Term::app(Term::id(), Term::id()), V, 50).unwrap();
        s.verify().unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let back: MeaningStatus = serde_json::from_str(&json).unwrap();
        assert_eq!(back.decision(), Decision::Meaningful);
    }

    #[test]
    fn fuel_exhaustion_is_unknown_unless_asserted() {
        // grows forever without repeating
        let t = p(r"(\x.x x x)(\x.x x x)");
        let o = Oracle::new(V, 200);
        assert_eq!(o.decide(&t).unwrap(), Decision::Unknown);
        assert!(matches!(o.approximant(&t), Err(Error::Undetermined(p)) if p == Position::root()));
        let o = Oracle::new(V, 200).with_assertions([t.clone()]);
        assert!(matches!(o.status(&t).unwrap(), MeaningStatus::Meaningless(Witness::Asserted { .. })));
        assert_eq!(o.approximant(&t).unwrap(), Term::Bot);
    }

    #[test]
    fn approximants() {
        let o = Oracle::with_default_fuel(V);
        assert_eq!(o.approximant(&Term::omega()).unwrap(), Term::Bot);
        let t = p(r"\x.(x (\y.(\a.a) (\a.a)) (\z.(\a.a) ((\b.b b) (\b.b b))))");
        let a = o.approximant(&t).unwrap();
        assert!(a.alpha_eq(&p(r"\x.(x (\y.(\a.a) (\a.a)) (\z.bot))")));
        assert!(a.partial_leq(&t));
    }

    #[test]
    fn undetermined_names_the_first_unknown_subterm() {
        let grow = p(r"(\x.x x x)(\x.x x x)");
        let t = Term::abs("y", grow);
        let o = Oracle::new(V, 100);
        match o.approximant(&t) {
            Err(Error::Undetermined(pos)) => assert_eq!(pos, Position(vec![Edge::AbsBody])),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn omega_step_collapses() {
        let o = Oracle::with_default_fuel(V);
        let s = reduce_once(&Term::omega(), V, Level::ZERO, Strategy::default()).unwrap();
        assert!(matches!(approximate_step(&s, &o).unwrap(), ApproxStep::Collapsed { approximant: Term::Bot }));
    }

    #[test]
    fn value_substitution_may_over_approximate() {
        let o = Oracle::with_default_fuel(V);
        let t = p(r"(x (\y.z (\d.d d)))[z\(\d.d d)]");
        let s = reduce_once(&t, V, Level::ZERO, Strategy::default()).unwrap();
        assert_eq!(s.rule(), Rule::Sv);
        match approximate_step(&s, &o).unwrap() {
            ApproxStep::Mapped { over, .. } => {
                assert!(over.alpha_eq(&p(r"x (\y.(\d.d d) (\d.d d))")));
                assert!(o.approximant(&s.after).unwrap().alpha_eq(&p(r"x (\y.bot)")));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn homomorphic_when_everything_is_meaningful() {
        let o = Oracle::with_default_fuel(V);
        let s = reduce_once(&Term::app(Term::id(), Term::id()), V, Level::ZERO, Strategy::default()).unwrap();
        match approximate_step(&s, &o).unwrap() {
            ApproxStep::Mapped { over, .. } => assert!(over.alpha_eq(&s.after)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lifting_over_refinements() {
        let src = p(r"(\y.(bot w))[w\(\z.bot)]");
        let o = find_redexes(&src, V, Level::Omega).into_iter().find(|o| o.rule() == Rule::Sv).unwrap();
        let partial = Step::new(&src, o).unwrap();
        assert!(partial.after.alpha_eq(&p(r"\y.(bot (\z.bot))")));
        let bigger = p(r"(\y.((\a.a) w))[w\(\z.\x.bot)]");
        let lifted = lift_step(&partial, &bigger, V).unwrap();
        assert!(lifted.after.alpha_eq(&p(r"\y.((\a.a) (\z.\x.bot))")));
        let same = lift_step(&partial, &src, V).unwrap();
        assert!(same.after.alpha_eq(&partial.after));
        assert!(lift_step(&partial, &p("x"), V).is_err());
    }

    #[test]
    fn testing_contexts_observe_values() {
        let t = TestingContext::App(Box::new(TestingContext::Hole), Term::id());
        assert_eq!(t.observes(&Term::id(), V, 100), Some(true));
        assert_eq!(t.observes(&Term::omega(), V, 100), None);
        let r = TestingContext::Redex("x".into(), Box::new(TestingContext::Hole), Term::id());
        assert_eq!(r.observes(&Term::var("x"), N, 100), Some(true));
    }
}
