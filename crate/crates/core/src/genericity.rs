//! Executable genericity: the qualitative surface statement and the
//! quantitative stratified pipeline, which builds the reduction of every
//! `C⟨u⟩` by lifting approximated steps rather than by re-normalizing.

use serde::Serialize;

use crate::approx::{approximate_step, lift_step, ApproxStep, Decision, Oracle};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::normal::{classify_nf, is_bno, strat_eq};
use crate::position::{Calculus, Level, Position};
use crate::reduction::{normalize, Outcome, Step, Trace};
use crate::term::Term;

#[derive(Clone, Debug, Serialize)]
pub struct SurfaceProbe {
    pub probe: Term,
    pub status: Decision,
}

#[derive(Clone, Debug, Serialize)]
pub struct SurfaceReport {
    pub calculus: Calculus,
    pub context: Context,
    pub hole_term: Term,
    /// Status of `C⟨t⟩`.
    pub status: Decision,
    pub probes: Vec<SurfaceProbe>,
    /// Probes `u` with `C⟨t⟩` meaningful but `C⟨u⟩` meaningless.
    pub violations: Vec<Term>,
}

impl SurfaceReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

fn require_meaningless(t: &Term, oracle: &Oracle, hole: &Position) -> Result<()> {
    match oracle.decide(t)? {
        Decision::Meaningless => Ok(()),
        Decision::Unknown => Err(Error::Undetermined(hole.clone())),
        Decision::Meaningful => Err(Error::Precondition(format!("{t} is meaningful"))),
    }
}

fn decided(t: &Term, oracle: &Oracle) -> Result<Decision> {
    match oracle.decide(t)? {
        Decision::Unknown => Err(Error::Undetermined(Position::root())),
        d => Ok(d),
    }
}

pub fn surface_genericity_check(c: &Context, t: &Term, us: &[Term], oracle: &Oracle) -> Result<SurfaceReport> {
    require_meaningless(t, oracle, c.hole_position())?;
    let status = decided(&c.plug(t), oracle)?;
    let mut probes = Vec::new();
    let mut violations = Vec::new();
    for u in us {
        let s = decided(&c.plug(u), oracle)?;
        if status == Decision::Meaningful && s == Decision::Meaningless {
            violations.push(u.clone());
        }
        probes.push(SurfaceProbe { probe: u.clone(), status: s });
    }
    Ok(SurfaceReport { calculus: oracle.calculus(), context: c.clone(), hole_term: t.clone(), status, probes, violations })
}

#[derive(Clone, Debug, Serialize)]
pub struct LiftedProbe {
    pub probe: Term,
    pub steps: Vec<Step>,
    pub normal_form: Term,
    /// `u′ ∈ no_k`
    pub normal: bool,
    /// `t′ ≡_k u′`
    pub equal: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GenericityReport {
    pub calculus: Calculus,
    pub level: Level,
    pub context: Context,
    pub hole_term: Term,
    /// `A(C⟨t⟩)`
    pub approximant: Term,
    /// The default-strategy reduction of `C⟨t⟩`.
    pub trace: Trace,
    /// The partial reduction `A(C⟨t⟩) →^i ŝ`.
    pub partial_steps: Vec<Step>,
    pub skeleton: Term,
    pub skeleton_in_bno: bool,
    pub steps: usize,
    /// The lifted reduction of `C⟨t⟩`.
    pub lifted: LiftedProbe,
    pub probes: Vec<LiftedProbe>,
    pub skeleton_equal: bool,
    pub violations: Vec<String>,
}

impl GenericityReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Replays the partial reduction over a term above its source.
fn lift_chain(partial: &[Step], start: &Term, c: Calculus) -> Result<Vec<Step>> {
    let mut cur = start.clone();
    let mut out = Vec::with_capacity(partial.len());
    for ps in partial {
        let s = lift_step(ps, &cur, c)?;
        cur = s.after.clone();
        out.push(s);
    }
    Ok(out)
}

pub fn stratified_genericity_check(
    c: &Context,
    t: &Term,
    us: &[Term],
    k: Level,
    oracle: &Oracle,
) -> Result<GenericityReport> {
    let calc = oracle.calculus();
    require_meaningless(t, oracle, c.hole_position())?;
    let ct = c.plug(t);
    let approximant = oracle.approximant(&ct)?;
    let trace = normalize(&ct, calc, k, oracle.fuel());
    if trace.outcome != Outcome::NormalForm {
        return Err(Error::Precondition(format!("{ct} does not reach an S_{k}-normal form within fuel")));
    }

    let mut cur = approximant.clone();
    let mut partial_steps = Vec::new();
    for s in &trace.steps {
        if let ApproxStep::Mapped { step, .. } = approximate_step(s, oracle)? {
            let step = if step.before.alpha_eq(&cur) { step } else { lift_step(&step, &cur, calc)? };
            cur = step.after.clone();
            partial_steps.push(step);
        }
    }
    let skeleton = cur;
    let skeleton_in_bno = is_bno(&skeleton, calc, k);
    let mut violations = Vec::new();
    if !skeleton_in_bno {
        violations.push(format!("skeleton {skeleton} is not in bno_{k}"));
    }

    let run = |u: &Term, violations: &mut Vec<String>, reference: Option<&Term>| -> Result<LiftedProbe> {
        let cu = c.plug(u);
        if !approximant.partial_leq(&cu) {
            violations.push(format!("approximant is not below {cu}"));
        }
        let steps = lift_chain(&partial_steps, &cu, calc)?;
        let nf = steps.last().map_or(cu, |s| s.after.clone());
        let normal = !nf.contains_bot() && classify_nf(&nf, calc, k)?.is_normal();
        if !normal {
            violations.push(format!("lifted reduct {nf} of probe {u} is not S_{k}-normal"));
        }
        let equal = reference.map_or(true, |r| strat_eq(r, &nf, calc, k));
        if !equal {
            violations.push(format!("lifted reduct {nf} of probe {u} is not ≡_{k}-equal to the reference"));
        }
        Ok(LiftedProbe { probe: u.clone(), steps, normal_form: nf, normal, equal })
    };
    let lifted = run(t, &mut violations, None)?;
    let skeleton_equal = strat_eq(&lifted.normal_form, &skeleton, calc, k);
    if !skeleton_equal {
        violations.push(format!("t′ = {} is not ≡_{k}-equal to the skeleton", lifted.normal_form));
    }
    let mut probes = Vec::new();
    for u in us {
        probes.push(run(u, &mut violations, Some(&lifted.normal_form))?);
    }
    Ok(GenericityReport {
        calculus: calc,
        level: k,
        context: c.clone(),
        hole_term: t.clone(),
        approximant,
        steps: partial_steps.len(),
        trace,
        partial_steps,
        skeleton,
        skeleton_in_bno,
        lifted,
        probes,
        skeleton_equal,
        violations,
    })
}
