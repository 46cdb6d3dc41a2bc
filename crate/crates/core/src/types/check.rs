use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Derivation, Mult, System, Ty, TypeRule, TypingCtx};
use crate::term::Term;

/// A rule instance that does not hold. `path` lists premise indices from
/// the root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub path: Vec<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
        write!(f, "at [{}]: {}", p.join("."), self.message)
    }
}

pub fn check_derivation(d: &Derivation, sys: System) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    check_node(d, sys, &mut Vec::new(), &mut out);
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

fn check_node(d: &Derivation, sys: System, path: &mut Vec<usize>, out: &mut Vec<Violation>) {
    let mut bad = |m: String| out.push(Violation { path: path.clone(), message: m });
    if !d.ty.well_formed(sys) {
        bad(format!("type {} is not in the grammar of system {sys:?}", d.ty));
    }
    let subterm_check = |p: &Derivation, expected: &Term| p.term.alpha_eq(expected);
    match (d.rule, &d.term) {
        (TypeRule::Var, Term::Var(x)) => {
            if !d.premises.is_empty() {
                bad("var rule has premises".into());
            }
            let expected = match (sys, &d.ty) {
                (System::V, Ty::Mult(m)) => TypingCtx::single(x, m.clone()),
                (System::V, t) => {
                    bad(format!("var rule concludes non-multiset type {t}"));
                    TypingCtx::single(x, Mult::single(t.clone()))
                }
                (System::N, t) => TypingCtx::single(x, Mult::single(t.clone())),
            };
            if d.ctx != expected {
                bad(format!("var rule needs context {expected}, found {}", d.ctx));
            }
        }
        (TypeRule::Abs, Term::Abs(x, b)) => {
            for (i, p) in d.premises.iter().enumerate() {
                if !subterm_check(p, b) {
                    bad(format!("premise {i} types {} instead of the body {b}", p.term));
                }
            }
            let arrows: Mult = d.premises.iter().map(|p| Ty::arrow(p.ctx.get(x), p.ty.clone())).collect();
            match sys {
                System::V => {
                    if d.ty != Ty::Mult(arrows.clone()) {
                        bad(format!("abs rule yields {}, found {}", Ty::Mult(arrows), d.ty));
                    }
                }
                System::N => {
                    if d.premises.len() != 1 {
                        bad(format!("abs rule needs one premise, found {}", d.premises.len()));
                    } else if d.ty != arrows.items()[0] {
                        bad(format!("abs rule yields {}, found {}", arrows.items()[0], d.ty));
                    }
                }
            }
            let ctx = d.premises.iter().fold(TypingCtx::empty(), |c, p| c.sum(&p.ctx.without(x)));
            if d.ctx != ctx {
                bad(format!("abs rule needs context {ctx}, found {}", d.ctx));
            }
        }
        (TypeRule::App, Term::App(f, a)) => {
            if let Some(fun) = d.premises.first() {
                if !subterm_check(fun, f) {
                    bad(format!("function premise types {} instead of {f}", fun.term));
                }
                for (i, p) in d.premises.iter().enumerate().skip(1) {
                    if !subterm_check(p, a) {
                        bad(format!("premise {i} types {} instead of the argument {a}", p.term));
                    }
                }
                let args = &d.premises[1..];
                match (sys, &fun.ty) {
                    (System::V, Ty::Mult(m)) if m.len() == 1 && matches!(m.items()[0], Ty::Arrow(..)) => {
                        let Ty::Arrow(dom, cod) = &m.items()[0] else { unreachable!() };
                        if **cod != d.ty {
                            bad(format!("app rule yields {cod}, found {}", d.ty));
                        }
                        if args.len() != 1 {
                            bad(format!("app rule needs one argument premise, found {}", args.len()));
                        } else if args[0].ty != Ty::Mult(dom.clone()) {
                            bad(format!("argument has type {}, expected {dom}", args[0].ty));
                        }
                    }
                    (System::N, Ty::Arrow(dom, cod)) => {
                        if **cod != d.ty {
                            bad(format!("app rule yields {cod}, found {}", d.ty));
                        }
                        let got: Mult = args.iter().map(|p| p.ty.clone()).collect();
                        if &got != dom {
                            bad(format!("argument premises have types {got}, expected {dom}"));
                        }
                    }
                    (_, t) => bad(format!("function premise has type {t}, not an arrow of the right shape")),
                }
            } else {
                bad("app rule without premises".into());
            }
            let ctx = d.premises.iter().fold(TypingCtx::empty(), |c, p| c.sum(&p.ctx));
            if d.ctx != ctx {
                bad(format!("app rule needs context {ctx}, found {}", d.ctx));
            }
        }
        (TypeRule::Es, Term::Es(b, x, a)) => {
            if let Some(body) = d.premises.first() {
                if !subterm_check(body, b) {
                    bad(format!("body premise types {} instead of {b}", body.term));
                }
                for (i, p) in d.premises.iter().enumerate().skip(1) {
                    if !subterm_check(p, a) {
                        bad(format!("premise {i} types {} instead of the argument {a}", p.term));
                    }
                }
                if body.ty != d.ty {
                    bad(format!("es rule yields {}, found {}", body.ty, d.ty));
                }
                let m = body.ctx.get(x);
                let args = &d.premises[1..];
                match sys {
                    System::V => {
                        if args.len() != 1 {
                            bad(format!("es rule needs one argument premise, found {}", args.len()));
                        } else if args[0].ty != Ty::Mult(m.clone()) {
                            bad(format!("argument has type {}, expected {m}", args[0].ty));
                        }
                    }
                    System::N => {
                        let got: Mult = args.iter().map(|p| p.ty.clone()).collect();
                        if got != m {
                            bad(format!("argument premises have types {got}, expected {m}"));
                        }
                    }
                }
                let ctx = d.premises[1..].iter().fold(body.ctx.without(x), |c, p| c.sum(&p.ctx));
                if d.ctx != ctx {
                    bad(format!("es rule needs context {ctx}, found {}", d.ctx));
                }
            } else {
                bad("es rule without premises".into());
            }
        }
        (r, t) => bad(format!("rule {r:?} does not apply to {t}")),
    }
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        check_node(p, sys, path, out);
        path.pop();
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    #[test]
    fn worked_example_checks() {
        let d = tests_support::worked();
        assert!(d.term.alpha_eq(&parse(r"\x.y (\z.(\w.w w) (\w.w w))").unwrap()));
        assert_eq!(d.ty.to_string(), "[[] -> a]");
        assert_eq!(d.ctx.to_string(), "y:[[] -> a]");
        check_derivation(&d, System::V).unwrap();
    }

    #[test]
    fn axioms() {
        let d = Derivation::var(System::N, "x", Ty::var("a"));
        assert_eq!(d.ctx.to_string(), "x:[a]");
        check_derivation(&d, System::N).unwrap();
        let mut bad = d.clone();
        bad.ty = Ty::var("b");
        assert!(check_derivation(&bad, System::N).is_err());
        // V types variables with multisets only
        assert!(check_derivation(&d, System::V).is_err());
    }

    #[test]
    fn wrong_context_sums_are_reported_with_paths() {
        let mut d = tests_support::worked();
        d.premises[0].ctx = TypingCtx::empty();
        let errs = check_derivation(&d, System::V).unwrap_err();
        assert!(errs.iter().any(|v| v.path == vec![0]));
        assert!(errs.iter().any(|v| v.path.is_empty()));
    }

    #[test]
    fn split_multisets_must_match() {
        let a = Ty::var("a");
        // x:[a] ⊢ (λy.y) x : a in N needs the argument typed once with a
        let yv = Derivation::var(System::N, "y", a.clone());
        let id = Derivation::abs(System::N, "y", &Term::var("y"), vec![yv]);
        let xa = Derivation::var(System::N, "x", a.clone());
        let ok = Derivation::app(&Term::var("x"), a.clone(), vec![id.clone(), xa.clone()]);
        check_derivation(&ok, System::N).unwrap();
        let twice = Derivation::app(&Term::var("x"), a.clone(), vec![id, xa.clone(), xa]);
        assert!(check_derivation(&twice, System::N).is_err());
    }

    #[test]
    fn json_round_trip() {
        let d = tests_support::worked();
        let s = serde_json::to_string(&d).unwrap();
        let back: Derivation = serde_json::from_str(&s).unwrap();
        check_derivation(&back, System::V).unwrap();
        assert_eq!(back.ty, d.ty);
        assert_eq!(back.ctx, d.ctx);
    }
}
