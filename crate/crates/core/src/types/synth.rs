//! Derivations for surface normal forms, built against a demanded type.
//!
//! In V every value and every argument is typed with the empty multiset, a
//! head variable receives `[[M] -> demand]` and the root demand is `[]`.
//! In N abstractions are synthesized bottom-up, neutral spines leave their
//! arguments untyped and the root demand is the type variable `a`.

use super::{Derivation, Mult, System, Ty};
use crate::error::{Error, Result};
use crate::normal::classify_nf;
use crate::position::Level;
use crate::term::Term;

pub fn synth_nf_derivation(t: &Term, sys: System) -> Result<Derivation> {
    if !classify_nf(t, sys.calculus(), Level::ZERO)?.is_normal() {
        return Err(Error::Precondition(format!("{t} is not surface normal")));
    }
    match sys {
        System::V => v(t, &Ty::empty()),
        System::N => n_no(t),
    }
}

fn v(t: &Term, demand: &Ty) -> Result<Derivation> {
    let unsupported = || Error::Precondition(format!("cannot type {t} at {demand}"));
    match t {
        Term::Var(x) => match demand {
            Ty::Mult(_) => Ok(Derivation::var(System::V, x, demand.clone())),
            _ => Err(unsupported()),
        },
        Term::Abs(x, b) if *demand == Ty::empty() => Ok(Derivation::abs(System::V, x, b, vec![])),
        Term::App(f, a) => {
            let arg = v(a, &Ty::empty())?;
            let fun = v(f, &Ty::Mult(Mult::single(Ty::arrow(Mult::empty(), demand.clone()))))?;
            Ok(Derivation::app(a, demand.clone(), vec![fun, arg]))
        }
        Term::Es(b, x, a) => {
            let body = v(b, demand)?;
            let arg = v(a, &Ty::Mult(body.ctx.get(x)))?;
            Ok(Derivation::es(x, a, vec![body, arg]))
        }
        _ => Err(unsupported()),
    }
}

fn n_no(t: &Term) -> Result<Derivation> {
    match t {
        Term::Abs(x, b) => Ok(Derivation::abs(System::N, x, b, vec![n_no(b)?])),
        _ => n_ne(t, &Ty::var("a")),
    }
}

fn n_ne(t: &Term, demand: &Ty) -> Result<Derivation> {
    match t {
        Term::Var(x) => Ok(Derivation::var(System::N, x, demand.clone())),
        Term::App(f, a) => {
            let fun = n_ne(f, &Ty::arrow(Mult::empty(), demand.clone()))?;
            Ok(Derivation::app(a, demand.clone(), vec![fun]))
        }
        _ => Err(Error::Precondition(format!("{t} is not a neutral term"))),
    }
}
