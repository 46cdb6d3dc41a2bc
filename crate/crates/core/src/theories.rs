//! A sound but partial judge for the theories λ ⊆ H ⊆ H*, and a falsifier
//! for H* that searches small contexts.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{Decision, MeaningStatus, Oracle};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::position::{Calculus, Level};
use crate::reduction::{find_redexes, normalize, verify_steps, Outcome, Step, StepDoc, Trace};
use crate::term::{Canon, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theory {
    Lambda,
    H,
    Hstar,
}

impl Theory {
    pub const ALL: [Theory; 3] = [Theory::Lambda, Theory::H, Theory::Hstar];
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theory::Lambda => "lambda",
            Theory::H => "h",
            Theory::Hstar => "hstar",
        })
    }
}

impl FromStr for Theory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Theory> {
        match s.to_ascii_lowercase().as_str() {
            "lambda" => Ok(Theory::Lambda),
            "h" => Ok(Theory::H),
            "hstar" | "h*" => Ok(Theory::Hstar),
            _ => Err(Error::Syntax { offset: 0, message: format!("unknown theory `{s}`") }),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Budgets {
    /// Number of context layers the falsifier wraps around the hole.
    pub contexts: usize,
    /// Terms explored on each side by the joinability search.
    pub join_nodes: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { contexts: 2, join_nodes: 200 }
    }
}

/// Machine-checkable evidence for a verdict.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Justification {
    /// Level-ω reductions from both sides meeting in alpha-equal terms.
    Joinable { left: Vec<StepDoc>, right: Vec<StepDoc> },
    BothMeaningless { left: MeaningStatus, right: MeaningStatus },
    /// Two different level-ω normal forms.
    DistinctNormalForms { left: Trace, right: Trace },
    /// One side meaningful, the other meaningless: the empty context tells
    /// them apart.
    MeaningDiffers { left: MeaningStatus, right: MeaningStatus },
    /// A context sending one side to a meaningful term and the other to a
    /// meaningless one.
    Distinguished { context: Context, left: MeaningStatus, right: MeaningStatus },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Equal { justification: Justification },
    NotEqual { justification: Justification },
    Unknown { reason: String },
}

impl Verdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::Equal { .. })
    }

    pub fn is_not_equal(&self) -> bool {
        matches!(self, Verdict::NotEqual { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown { .. })
    }

    /// Re-checks the certificate against `t` and `u`.
    pub fn verify(&self, c: Calculus, t: &Term, u: &Term) -> Result<()> {
        match self {
            Verdict::Equal { justification } | Verdict::NotEqual { justification } => justification.verify(c, t, u),
            Verdict::Unknown { .. } => Ok(()),
        }
    }
}

fn status_of(s: &MeaningStatus, term: &Term) -> Result<Decision> {
    s.verify()?;
    let initial = match s {
        MeaningStatus::Meaningful(tr) => Some(&tr.initial),
        MeaningStatus::Meaningless(crate::approx::Witness::Cycle(tr)) => Some(&tr.initial),
        MeaningStatus::Meaningless(crate::approx::Witness::Asserted { term }) => Some(term),
        MeaningStatus::Unknown { .. } => None,
    };
    match initial {
        Some(i) if i.alpha_eq(term) => Ok(s.decision()),
        Some(i) => Err(Error::Document(format!("status is about {i}, not {term}"))),
        None => Err(Error::Document("undecided status".into())),
    }
}

impl Justification {
    pub fn verify(&self, c: Calculus, t: &Term, u: &Term) -> Result<()> {
        match self {
            Justification::Joinable { left, right } => {
                let l = left.iter().map(|s| s.to_step(c)).collect::<Result<Vec<_>>>()?;
                let r = right.iter().map(|s| s.to_step(c)).collect::<Result<Vec<_>>>()?;
                verify_steps(t, &l, c, Level::Omega)?;
                verify_steps(u, &r, c, Level::Omega)?;
                let end_l = l.last().map_or(t, |s| &s.after);
                let end_r = r.last().map_or(u, |s| &s.after);
                if !end_l.alpha_eq(end_r) {
                    return Err(Error::Document("reductions do not meet".into()));
                }
                Ok(())
            }
            Justification::BothMeaningless { left, right } => {
                if status_of(left, t)? != Decision::Meaningless || status_of(right, u)? != Decision::Meaningless {
                    return Err(Error::Document("both sides must be meaningless".into()));
                }
                Ok(())
            }
            Justification::DistinctNormalForms { left, right } => {
                for (tr, term) in [(left, t), (right, u)] {
                    tr.verify()?;
                    if !tr.initial.alpha_eq(term) || tr.level != Level::Omega || tr.outcome != Outcome::NormalForm {
                        return Err(Error::Document("expected a level-ω normalization of each side".into()));
                    }
                }
                if left.last().alpha_eq(right.last()) {
                    return Err(Error::Document("normal forms coincide".into()));
                }
                Ok(())
            }
            Justification::MeaningDiffers { left, right } => {
                let (a, b) = (status_of(left, t)?, status_of(right, u)?);
                if a == b {
                    return Err(Error::Document("statuses agree".into()));
                }
                Ok(())
            }
            Justification::Distinguished { context, left, right } => {
                let (a, b) = (status_of(left, &context.plug(t))?, status_of(right, &context.plug(u))?);
                if a == b {
                    return Err(Error::Document("statuses agree".into()));
                }
                Ok(())
            }
        }
    }
}

/// Reductions at level ω from `t` and `u` that meet, found by comparing the
/// default-strategy traces and then by bounded breadth-first search.
pub fn join(t: &Term, u: &Term, c: Calculus, fuel: usize, nodes: usize) -> Option<(Vec<Step>, Vec<Step>)> {
    let lt = normalize(t, c, Level::Omega, fuel);
    let ut = normalize(u, c, Level::Omega, fuel);
    let index = |tr: &Trace| {
        let mut m: HashMap<Canon, usize> = HashMap::new();
        m.entry(tr.initial.canon()).or_insert(0);
        for (i, s) in tr.steps.iter().enumerate() {
            m.entry(s.after.canon()).or_insert(i + 1);
        }
        m
    };
    let li = index(&lt);
    let mut ui: Vec<(Canon, usize)> = index(&ut).into_iter().collect();
    ui.sort_by_key(|(_, i)| *i);
    if let Some((j, i)) = ui.iter().find_map(|(k, j)| li.get(k).map(|i| (*j, *i))) {
        return Some((lt.steps[..i].to_vec(), ut.steps[..j].to_vec()));
    }
    let lb = explore(t, c, nodes);
    let ub = explore(u, c, nodes);
    let meet = ub.order.iter().find(|k| lb.paths.contains_key(*k))?;
    Some((lb.path_to(meet), ub.path_to(meet)))
}

struct Explored {
    /// Canonical form to (parent, step into it).
    paths: HashMap<Canon, Option<(Canon, Step)>>,
    order: Vec<Canon>,
}

impl Explored {
    fn path_to(&self, k: &Canon) -> Vec<Step> {
        let mut out = Vec::new();
        let mut cur = k.clone();
        while let Some(Some((parent, step))) = self.paths.get(&cur) {
            out.push(step.clone());
            cur = parent.clone();
        }
        out.reverse();
        out
    }
}

fn explore(t: &Term, c: Calculus, nodes: usize) -> Explored {
    let mut paths = HashMap::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    paths.insert(t.canon(), None);
    order.push(t.canon());
    queue.push_back(t.clone());
    while let Some(cur) = queue.pop_front() {
        if order.len() >= nodes {
            break;
        }
        for o in find_redexes(&cur, c, Level::Omega) {
            let Ok(s) = Step::new(&cur, o) else { continue };
            let k = s.after.canon();
            if paths.contains_key(&k) {
                continue;
            }
            paths.insert(k.clone(), Some((cur.canon(), s.clone())));
            order.push(k);
            queue.push_back(s.after);
        }
    }
    Explored { paths, order }
}

/// Probe arguments for context search.
fn probe_terms() -> Vec<Term> {
    vec![
        Term::id(),
        Term::omega(),
        Term::abs("a", Term::abs("b", Term::var("a"))),
        Term::abs("a", Term::abs("b", Term::var("b"))),
        Term::var("x"),
        Term::var("y"),
    ]
}

fn wrappings(c: &Context) -> Vec<Context> {
    let mut out = Vec::new();
    let probes = probe_terms();
    for p in &probes {
        out.push(c.app_left(p.clone()));
    }
    for p in &probes {
        out.push(c.app_right(p.clone()));
    }
    for x in ["x", "y"] {
        out.push(c.under_abs(x));
    }
    for x in ["x", "y"] {
        for p in &probes {
            out.push(c.closure(x, p.clone()));
        }
    }
    for x in ["x", "y"] {
        for p in &probes {
            out.push(c.under_abs(x).app_left(p.clone()));
        }
    }
    out
}

/// Contexts with at most `layers` wrappings around the hole, smallest first.
pub fn candidate_contexts(layers: usize) -> Vec<Context> {
    let mut all = vec![Context::hole()];
    let mut frontier = vec![Context::hole()];
    for _ in 0..layers {
        let next: Vec<Context> = frontier.iter().flat_map(wrappings).collect();
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all
}

/// The first context, in size order, where both plugged terms have decided
/// and different statuses.
pub fn falsify_observational(t: &Term, u: &Term, oracle: &Oracle, layers: usize) -> Result<Option<Justification>> {
    if t.contains_bot() || u.contains_bot() {
        return Err(Error::PartialTerm(format!("{t} / {u}")));
    }
    let found = candidate_contexts(layers).into_par_iter().find_map_first(|c| {
        let (ct, cu) = (c.plug(t), c.plug(u));
        let a = oracle.decide(&ct).ok()?;
        let b = oracle.decide(&cu).ok()?;
        (a != Decision::Unknown && b != Decision::Unknown && a != b).then_some(c)
    });
    match found {
        None => Ok(None),
        Some(context) => {
            let left = oracle.status(&context.plug(t))?;
            let right = oracle.status(&context.plug(u))?;
            Ok(Some(Justification::Distinguished { context, left, right }))
        }
    }
}

pub fn judge(theory: Theory, t: &Term, u: &Term, oracle: &Oracle, budgets: &Budgets) -> Result<Verdict> {
    if t.contains_bot() || u.contains_bot() {
        return Err(Error::PartialTerm(format!("{t} / {u}")));
    }
    let c = oracle.calculus();
    let fuel = oracle.fuel();
    let lt = normalize(t, c, Level::Omega, fuel);
    let ut = normalize(u, c, Level::Omega, fuel);

    // (a) joinable, in particular equal normal forms
    if let Some((left, right)) = join(t, u, c, fuel, budgets.join_nodes) {
        let justification = Justification::Joinable {
            left: left.iter().map(StepDoc::of).collect(),
            right: right.iter().map(StepDoc::of).collect(),
        };
        return Ok(Verdict::Equal { justification });
    }

    // (c) distinct normal forms
    if lt.outcome == Outcome::NormalForm && ut.outcome == Outcome::NormalForm {
        let justification = Justification::DistinctNormalForms { left: lt, right: ut };
        return Ok(match theory {
            Theory::Lambda | Theory::H => Verdict::NotEqual { justification },
            Theory::Hstar => falsified(t, u, oracle, budgets, "distinct normal forms, but no context separates them")?,
        });
    }

    let (st, su) = (oracle.status(t)?, oracle.status(u)?);
    match (st.decision(), su.decision()) {
        // (b) sensibility
        (Decision::Meaningless, Decision::Meaningless) => Ok(match theory {
            Theory::Lambda => Verdict::Unknown { reason: "both meaningless but not joinable within budget".into() },
            _ => Verdict::Equal { justification: Justification::BothMeaningless { left: st, right: su } },
        }),
        // (d) the empty context separates them
        (Decision::Meaningless, Decision::Meaningful) | (Decision::Meaningful, Decision::Meaningless) => {
            Ok(match theory {
                Theory::Lambda => Verdict::Unknown { reason: "statuses differ but no normal forms were reached".into() },
                _ => Verdict::NotEqual { justification: Justification::MeaningDiffers { left: st, right: su } },
            })
        }
        // (e)
        _ => match theory {
            Theory::Hstar => falsified(t, u, oracle, budgets, "no rule applies and no context separates them"),
            _ => Ok(Verdict::Unknown { reason: "no rule applies within budget".into() }),
        },
    }
}

fn falsified(t: &Term, u: &Term, oracle: &Oracle, budgets: &Budgets, reason: &str) -> Result<Verdict> {
    Ok(match falsify_observational(t, u, oracle, budgets.contexts)? {
        Some(justification) => Verdict::NotEqual { justification },
        None => Verdict::Unknown { reason: format!("{reason} (context budget {})", budgets.contexts) },
    })
}
