//! Subject reduction and expansion along surface steps, typability through
//! expansion of a synthesized normal-form derivation, and the typed
//! genericity transformer.
//!
//! Every transformation works on a uniquified copy of the source term so
//! that no renaming happens during contraction, rewrites the single
//! derivation node at the redex position, then re-targets terms and
//! recomputes contexts bottom-up before re-checking.

use super::{check_derivation, synth_nf_derivation, Derivation, Mult, System, Ty, TypeRule};
use crate::approx::{Decision, Oracle};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::position::{level_of, Edge, Level, Position};
use crate::reduction::{normalize, redex_at, Outcome, Redex, Rule, Step};
use crate::term::Term;

fn placeholder(rule: TypeRule, ty: Ty, premises: Vec<Derivation>) -> Derivation {
    Derivation { rule, ctx: Default::default(), term: Term::Bot, ty, premises }
}

fn not_typed_here(p: &Position) -> Error {
    Error::Derivation(format!("position `{p}` is not typed exactly once"))
}

/// Premise indices of the node typing position `p`, when unique.
fn unique_path(d: &Derivation, p: &Position) -> Result<Vec<usize>> {
    let mut cur = d;
    let mut out = Vec::new();
    for e in p.edges() {
        let i = match e {
            Edge::AbsBody if cur.premises.len() == 1 => 0,
            Edge::AppFun | Edge::EsBody if !cur.premises.is_empty() => 0,
            Edge::AppArg | Edge::EsArg if cur.premises.len() == 2 => 1,
            _ => return Err(not_typed_here(p)),
        };
        cur = &cur.premises[i];
        out.push(i);
    }
    Ok(out)
}

/// Premise index paths of every node typing the subterm at `edges`.
fn fan(d: &Derivation, edges: &[Edge]) -> Vec<Vec<usize>> {
    let Some((e, rest)) = edges.split_first() else {
        return vec![vec![]];
    };
    let range = match e {
        Edge::AbsBody => 0..d.premises.len(),
        Edge::AppFun | Edge::EsBody => 0..d.premises.len().min(1),
        Edge::AppArg | Edge::EsArg => 1.min(d.premises.len())..d.premises.len(),
    };
    let mut out = Vec::new();
    for i in range {
        for mut tail in fan(&d.premises[i], rest) {
            tail.insert(0, i);
            out.push(tail);
        }
    }
    out
}

fn var_nodes(d: &Derivation, x: &str, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if d.rule == TypeRule::Var && matches!(&d.term, Term::Var(y) if y == x) {
        out.push(path.clone());
    }
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        var_nodes(p, x, path, out);
        path.pop();
    }
}

/// Splits off `n` closure nodes along the body premises.
fn peel_chain(mut d: Derivation, n: usize) -> Result<(Vec<Derivation>, Derivation)> {
    let mut chain = Vec::new();
    for _ in 0..n {
        if d.rule != TypeRule::Es || d.premises.is_empty() {
            return Err(Error::Derivation("expected a closure node".into()));
        }
        let body = std::mem::replace(&mut d.premises[0], placeholder(TypeRule::Var, Ty::empty(), vec![]));
        chain.push(d);
        d = body;
    }
    Ok((chain, d))
}

fn rebuild_chain(chain: Vec<Derivation>, core: Derivation, ty: &Ty) -> Derivation {
    chain.into_iter().rev().fold(core, |acc, mut node| {
        node.premises[0] = acc;
        node.ty = ty.clone();
        node
    })
}

fn prepare(d: &Derivation, s: &Step, sys: System, src: &Term) -> Result<()> {
    if let Err(v) = check_derivation(d, sys) {
        return Err(Error::Derivation(format!("input derivation does not check: {}", v[0])));
    }
    if !d.term.alpha_eq(src) {
        return Err(Error::Derivation(format!("derivation types {} but the step starts from {src}", d.term)));
    }
    let allowed = match sys {
        System::V => matches!(s.rule(), Rule::Db | Rule::Sv),
        System::N => matches!(s.rule(), Rule::Db | Rule::Sn),
    };
    if !allowed {
        return Err(Error::Derivation(format!("rule {} is not a rule of system {sys:?}", s.rule())));
    }
    if level_of(&s.before, s.position(), sys.calculus())? != 0 {
        return Err(Error::Precondition("only surface steps are supported".into()));
    }
    Ok(())
}

fn finish(mut d: Derivation, shape: &Term, target: &Term, original: &Derivation, sys: System) -> Result<Derivation> {
    d.set_terms(shape)?;
    d.recompute_all(sys);
    let d = d.relabel(target, sys)?;
    if let Err(v) = check_derivation(&d, sys) {
        return Err(Error::Derivation(format!("transported derivation does not check: {}", v[0])));
    }
    if d.ctx != original.ctx || d.ty != original.ty {
        return Err(Error::Derivation("transported derivation changed its conclusion".into()));
    }
    Ok(d)
}

fn redex_of(b: &Term, s: &Step, sys: System) -> Result<Redex> {
    redex_at(b, s.position(), sys.calculus())
        .filter(|o| o.rule() == s.rule())
        .map(|o| o.redex)
        .ok_or_else(|| Error::StaleOccurrence(s.position().clone()))
}

/// From a derivation of `s.before`, a derivation of `s.after` with the same
/// context and type.
pub fn reduce_derivation(d: &Derivation, s: &Step, sys: System) -> Result<Derivation> {
    prepare(d, s, sys, &s.before)?;
    let b = s.before.uniquify();
    let mut work = d.relabel(&b, sys)?;
    let redex = redex_of(&b, s, sys)?;
    let path = unique_path(&work, s.position())?;
    let node = work.node(&path).expect("path").clone();
    let new = match &redex {
        Redex::Db { list, .. } => {
            let mut premises = node.premises.into_iter();
            let fun = premises.next().ok_or_else(|| not_typed_here(s.position()))?;
            let (chain, abs) = peel_chain(fun, list.len())?;
            if abs.rule != TypeRule::Abs || abs.premises.len() != 1 {
                return Err(Error::Derivation("abstraction of a typed redex must be typed once".into()));
            }
            let body = abs.premises.into_iter().next().expect("one premise");
            let mut es = vec![body];
            es.extend(premises);
            rebuild_chain(chain, placeholder(TypeRule::Es, node.ty.clone(), es), &node.ty)
        }
        Redex::Sv { binder, list, value, .. } => {
            let mut premises = node.premises.into_iter();
            let mut body = premises.next().ok_or_else(|| not_typed_here(s.position()))?;
            let arg = premises.next().ok_or_else(|| not_typed_here(s.position()))?;
            let (chain, vnode) = peel_chain(arg, list.len())?;
            let mut occurrences = Vec::new();
            var_nodes(&body, binder, &mut Vec::new(), &mut occurrences);
            let mut pool: Vec<Option<Derivation>> = vnode.premises.into_iter().map(Some).collect();
            for occ in occurrences {
                let slot = body.node_mut(&occ).expect("occurrence path");
                let Ty::Mult(m) = &slot.ty else {
                    return Err(Error::Derivation("variable typed without a multiset".into()));
                };
                *slot = match value {
                    Term::Var(y) => Derivation::var(System::V, y, slot.ty.clone()),
                    Term::Abs(y, vb) => {
                        let mut picked = Vec::new();
                        for want in m.items() {
                            let i = pool
                                .iter()
                                .position(|p| {
                                    p.as_ref().is_some_and(|p| Ty::arrow(p.ctx.get(y), p.ty.clone()) == *want)
                                })
                                .ok_or_else(|| Error::Derivation(format!("no value premise of type {want}")))?;
                            picked.push(pool[i].take().expect("unused"));
                        }
                        Derivation::abs(System::V, y, vb, picked)
                    }
                    _ => return Err(Error::Derivation("substituted term is not a value".into())),
                };
            }
            if pool.iter().any(Option::is_some) {
                return Err(Error::Derivation("value premises left unused".into()));
            }
            rebuild_chain(chain, body, &node.ty)
        }
        Redex::Sn { binder, .. } => {
            let mut premises = node.premises.into_iter();
            let mut body = premises.next().ok_or_else(|| not_typed_here(s.position()))?;
            let mut pool: Vec<Option<Derivation>> = premises.map(Some).collect();
            let mut occurrences = Vec::new();
            var_nodes(&body, binder, &mut Vec::new(), &mut occurrences);
            for occ in occurrences {
                let slot = body.node_mut(&occ).expect("occurrence path");
                let i = pool
                    .iter()
                    .position(|p| p.as_ref().is_some_and(|p| p.ty == slot.ty))
                    .ok_or_else(|| Error::Derivation(format!("no argument premise of type {}", slot.ty)))?;
                *slot = pool[i].take().expect("unused");
            }
            if pool.iter().any(Option::is_some) {
                return Err(Error::Derivation("argument premises left unused".into()));
            }
            body
        }
        Redex::BetaV { .. } => unreachable!("rejected by prepare"),
    };
    *work.node_mut(&path).expect("path") = new;
    let shape = b.replace_at(s.position(), redex.contract()).ok_or_else(|| Error::InvalidPosition(s.position().clone()))?;
    finish(work, &shape, &s.after, d, sys)
}

/// From a derivation of `s.after`, a derivation of `s.before` with the same
/// context and type.
pub fn expand_derivation(d: &Derivation, s: &Step, sys: System) -> Result<Derivation> {
    prepare(d, s, sys, &s.after)?;
    let b = s.before.uniquify();
    let redex = redex_of(&b, s, sys)?;
    let shape_after =
        b.replace_at(s.position(), redex.contract()).ok_or_else(|| Error::InvalidPosition(s.position().clone()))?;
    let mut work = d.relabel(&shape_after, sys)?;
    let path = unique_path(&work, s.position())?;
    let node = work.node(&path).expect("path").clone();
    let new = match &redex {
        Redex::Db { list, binder, body, .. } => {
            let sigma = node.ty.clone();
            let (chain, es) = peel_chain(node, list.len())?;
            if es.rule != TypeRule::Es || es.premises.is_empty() {
                return Err(Error::Derivation("expected the closure created by the step".into()));
            }
            let mut premises = es.premises.into_iter();
            let sub = premises.next().expect("body premise");
            let abs = Derivation::abs(sys, binder, body, vec![sub]);
            let aty = abs.ty.clone();
            let mut app = vec![rebuild_chain(chain, abs, &aty)];
            app.extend(premises);
            placeholder(TypeRule::App, sigma, app)
        }
        Redex::Sv { body: t, binder, list, value } => {
            let sigma = node.ty.clone();
            let (chain, mut core) = peel_chain(node, list.len())?;
            let mut copies = Vec::new();
            for q in t.free_positions(binder) {
                copies.extend(fan(&core, q.edges()));
            }
            let mut total = Mult::empty();
            let mut premises = Vec::new();
            for c in copies {
                let slot = core.node_mut(&c).expect("copy path");
                let Ty::Mult(m) = &slot.ty else {
                    return Err(Error::Derivation("value typed without a multiset".into()));
                };
                total = total.sum(m);
                let old = std::mem::replace(slot, Derivation::var(System::V, binder, slot.ty.clone()));
                premises.extend(old.premises);
            }
            let merged = match value {
                Term::Var(y) => Derivation::var(System::V, y, Ty::Mult(total.clone())),
                Term::Abs(y, vb) => Derivation::abs(System::V, y, vb, premises),
                _ => return Err(Error::Derivation("substituted term is not a value".into())),
            };
            let arg = rebuild_chain(chain, merged, &Ty::Mult(total));
            placeholder(TypeRule::Es, sigma, vec![core, arg])
        }
        Redex::Sn { body: t, binder, .. } => {
            let sigma = node.ty.clone();
            let mut core = node;
            let mut copies = Vec::new();
            for q in t.free_positions(binder) {
                copies.extend(fan(&core, q.edges()));
            }
            let mut es = vec![];
            for c in copies {
                let slot = core.node_mut(&c).expect("copy path");
                let var = Derivation::var(System::N, binder, slot.ty.clone());
                es.push(std::mem::replace(slot, var));
            }
            es.insert(0, core);
            placeholder(TypeRule::Es, sigma, es)
        }
        Redex::BetaV { .. } => unreachable!("rejected by prepare"),
    };
    *work.node_mut(&path).expect("path") = new;
    finish(work, &b, &s.before, d, sys)
}

/// A derivation for `t` when it is meaningful, none when it is decided
/// meaningless, [`Error::Undetermined`] when fuel runs out.
pub fn typable(t: &Term, sys: System, fuel: usize) -> Result<Option<Derivation>> {
    if t.contains_bot() {
        return Err(Error::PartialTerm(t.to_string()));
    }
    let tr = normalize(t, sys.calculus(), Level::ZERO, fuel);
    match tr.outcome {
        Outcome::NormalForm => {
            let mut d = synth_nf_derivation(tr.last(), sys)?;
            for s in tr.steps.iter().rev() {
                d = expand_derivation(&d, s, sys)?;
            }
            Ok(Some(d))
        }
        Outcome::Cycle { .. } => Ok(None),
        Outcome::FuelExhausted => Err(Error::Undetermined(Position::root())),
    }
}

/// Moves a derivation of `C⟨t⟩` to `C⟨u⟩` for a meaningless `t`. Reaching
/// the hole with a typed node would make `t` typable, contradicting its
/// meaninglessness; that case is reported as an error.
pub fn typed_genericity(d: &Derivation, c: &Context, t: &Term, u: &Term, oracle: &Oracle) -> Result<Derivation> {
    let sys = System::of(oracle.calculus());
    if let Err(v) = check_derivation(d, sys) {
        return Err(Error::Derivation(format!("input derivation does not check: {}", v[0])));
    }
    if !d.term.alpha_eq(&c.plug(t)) {
        return Err(Error::Derivation(format!("derivation types {} instead of {}", d.term, c.plug(t))));
    }
    match oracle.decide(t)? {
        Decision::Meaningless => {}
        Decision::Unknown => return Err(Error::Undetermined(c.hole_position().clone())),
        Decision::Meaningful => return Err(Error::Precondition(format!("{t} is meaningful"))),
    }
    if !fan(d, c.hole_position().edges()).is_empty() {
        return Err(Error::Assumption(format!(
            "the derivation types the hole, so {t} would be typable and hence meaningful"
        )));
    }
    let mut out = d.clone();
    out.set_terms(&c.plug(u))?;
    out.recompute_all(sys);
    if let Err(v) = check_derivation(&out, sys) {
        return Err(Error::Derivation(format!("transported derivation does not check: {}", v[0])));
    }
    if out.ctx != d.ctx || out.ty != d.ty {
        return Err(Error::Derivation("transported derivation changed its conclusion".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::position::Calculus;
    use crate::reduction::{reduce_once, Strategy};
    use crate::syntax::parse;

    fn p(s: &str) -> Term {
        parse(s).unwrap()
    }

    fn surface_step(t: &Term, c: Calculus) -> Step {
        reduce_once(t, c, Level::ZERO, Strategy::default()).unwrap()
    }

    #[test]
    fn identity_applied_to_identity() {
        let t = Term::app(Term::id(), Term::id());
        let d = typable(&t, System::V, 100).unwrap().unwrap();
        check_derivation(&d, System::V).unwrap();
        let s = surface_step(&t, Calculus::Cbv);
        assert_eq!(s.rule(), Rule::Db);
        let r = reduce_derivation(&d, &s, System::V).unwrap();
        assert!(r.term.alpha_eq(&s.after));
        assert_eq!((&r.ctx, &r.ty), (&d.ctx, &d.ty));
        let back = expand_derivation(&r, &s, System::V).unwrap();
        assert_eq!((&back.ctx, &back.ty), (&d.ctx, &d.ty));
        check_derivation(&back, System::V).unwrap();
    }

    #[test]
    fn value_substitution_round_trip() {
        let t = p(r"(x x)[x\(\y.y)]");
        let d = typable(&t, System::V, 100).unwrap().unwrap();
        let s = surface_step(&t, Calculus::Cbv);
        assert_eq!(s.rule(), Rule::Sv);
        let r = reduce_derivation(&d, &s, System::V).unwrap();
        check_derivation(&r, System::V).unwrap();
        let e = expand_derivation(&r, &s, System::V).unwrap();
        check_derivation(&e, System::V).unwrap();
        assert_eq!((&e.ctx, &e.ty), (&d.ctx, &d.ty));
    }

    #[test]
    fn by_name_substitution_duplicates_argument_derivations() {
        let t = p(r"(x x)[x\(\y.y)]");
        let d = typable(&t, System::N, 100).unwrap().unwrap();
        check_derivation(&d, System::N).unwrap();
        let s = surface_step(&t, Calculus::Cbn);
        let r = reduce_derivation(&d, &s, System::N).unwrap();
        check_derivation(&r, System::N).unwrap();
    }

    #[test]
    fn meaningless_terms_are_untypable() {
        assert!(typable(&Term::omega(), System::V, 100).unwrap().is_none());
        assert!(typable(&Term::abs("x", Term::omega()), System::N, 100).unwrap().is_none());
        assert!(typable(&Term::abs("x", Term::omega()), System::V, 100).unwrap().is_some());
    }

    #[test]
    fn cbv_step_through_a_list_context() {
        let t = p(r"(x x)[x\(\a.a)[y\z w]]");
        let d = typable(&t, System::V, 100).unwrap().unwrap();
        check_derivation(&d, System::V).unwrap();
    }

    #[test]
    fn genericity_replaces_untyped_subterms() {
        let oracle = Oracle::with_default_fuel(Calculus::Cbv);
        let c = Context::parse(r"\x.y (\z.@)").unwrap();
        let d = crate::types::check::tests_support::worked();
        for u in ["y", r"\a.a", "x x"] {
            let e = typed_genericity(&d, &c, &Term::omega(), &p(u), &oracle).unwrap();
            assert_eq!((&e.ctx, &e.ty), (&d.ctx, &d.ty));
            assert!(e.term.alpha_eq(&c.plug(&p(u))));
        }
    }

    #[test]
    fn cbn_genericity_under_an_untyped_argument() {
        let oracle = Oracle::with_default_fuel(Calculus::Cbn);
        let c = Context::parse(r"\x.x @").unwrap();
        let d = typable(&c.plug(&Term::omega()), System::N, 100).unwrap().unwrap();
        let e = typed_genericity(&d, &c, &Term::omega(), &p("z"), &oracle).unwrap();
        assert_eq!((&e.ctx, &e.ty), (&d.ctx, &d.ty));
    }

    #[test]
    fn the_hole_case_is_refused() {
        // with too little fuel and a false assertion, a typable term poses as meaningless
        let t = Term::app(Term::id(), Term::id());
        let oracle = Oracle::new(Calculus::Cbv, 1).with_assertions([t.clone()]);
        let d = typable(&t, System::V, 100).unwrap().unwrap();
        let r = typed_genericity(&d, &Context::hole(), &t, &p("z"), &oracle);
        assert!(matches!(r, Err(Error::Assumption(_))), "{r:?}");
    }
}
