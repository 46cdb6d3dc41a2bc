//! Plotkin's call-by-value βv on pure terms, for adequacy comparisons.

use crate::error::{Error, Result};
use crate::position::{Edge, Position};
use crate::reduction::{apply_step, Redex, RedexOccurrence};
use crate::term::Term;

/// `(λx.t) v` redexes with `v` a pure value. `weak` skips abstraction bodies.
pub fn plotkin_find_redexes(t: &Term, weak: bool) -> Result<Vec<RedexOccurrence>> {
    if !t.is_pure() {
        return Err(Error::ImpureTerm(t.to_string()));
    }
    fn go(t: &Term, weak: bool, path: &mut Vec<Edge>, depth: u32, out: &mut Vec<RedexOccurrence>) {
        match t {
            Term::App(f, a) => {
                if let (Term::Abs(x, b), true) = (&**f, a.is_value()) {
                    out.push(RedexOccurrence {
                        position: Position(path.clone()),
                        redex: Redex::BetaV { binder: x.clone(), body: (**b).clone(), arg: (**a).clone() },
                        level: depth,
                    });
                }
                path.push(Edge::AppFun);
                go(f, weak, path, depth, out);
                path.pop();
                path.push(Edge::AppArg);
                go(a, weak, path, depth, out);
                path.pop();
            }
            Term::Abs(_, b) if !weak => {
                path.push(Edge::AbsBody);
                go(b, weak, path, depth + 1, out);
                path.pop();
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    go(t, weak, &mut Vec::new(), 0, &mut out);
    Ok(out)
}

pub fn plotkin_step(t: &Term, o: &RedexOccurrence) -> Result<Term> {
    if !t.is_pure() {
        return Err(Error::ImpureTerm(t.to_string()));
    }
    if o.redex.rule() != crate::reduction::Rule::BetaV {
        return Err(Error::StaleOccurrence(o.position.clone()));
    }
    apply_step(t, o)
}
