//! Normal-form grammars and stratified equality.
//!
//! The ⊥-aware grammars coincide with the plain ones once ⊥ is rejected at
//! every head position, because the base clause for abstractions at level
//! 0 (CbV) and for arguments of neutral spines at level 0 (CbN) never looks
//! inside its subterm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::position::{Calculus, Level};
use crate::term::{Scopes, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NfClass {
    /// Variable under closures (CbV only).
    Vr,
    Ne,
    No,
    NotNf,
}

impl NfClass {
    pub fn is_normal(self) -> bool {
        self != NfClass::NotNf
    }
}

pub fn classify_nf(t: &Term, c: Calculus, k: Level) -> Result<NfClass> {
    if t.contains_bot() {
        return Err(Error::PartialTerm(t.to_string()));
    }
    Ok(match c {
        Calculus::Cbv if cbv::vr(t, k) => NfClass::Vr,
        Calculus::Cbv if cbv::ne(t, k) => NfClass::Ne,
        Calculus::Cbv if cbv::no(t, k) => NfClass::No,
        Calculus::Cbn if cbn::ne(t, k) => NfClass::Ne,
        Calculus::Cbn if cbn::no(t, k) => NfClass::No,
        _ => NfClass::NotNf,
    })
}

/// Membership in `bno_k`: S_k-normal with every ⊥ strictly deeper than k.
pub fn is_bno(t: &Term, c: Calculus, k: Level) -> bool {
    match c {
        Calculus::Cbv => cbv::no(t, k),
        Calculus::Cbn => cbn::no(t, k),
    }
}

pub(crate) mod cbv {
    use super::*;

    pub(crate) fn vr(t: &Term, k: Level) -> bool {
        match t {
            Term::Var(_) => true,
            Term::Es(b, _, a) => vr(b, k) && ne(a, k),
            _ => false,
        }
    }

    pub(crate) fn ne(t: &Term, k: Level) -> bool {
        match t {
            Term::App(f, a) => (vr(f, k) || ne(f, k)) && no(a, k),
            Term::Es(b, _, a) => ne(b, k) && ne(a, k),
            _ => false,
        }
    }

    pub(crate) fn no(t: &Term, k: Level) -> bool {
        match t {
            Term::Abs(_, b) => match k.pred() {
                None => true,
                Some(j) => no(b, j),
            },
            Term::Var(_) => true,
            Term::App(..) => ne(t, k),
            Term::Es(b, _, a) => no(b, k) && ne(a, k),
            Term::Bot => false,
        }
    }
}

pub(crate) mod cbn {
    use super::*;

    pub(crate) fn ne(t: &Term, k: Level) -> bool {
        match t {
            Term::Var(_) => true,
            Term::App(f, a) => {
                ne(f, k)
                    && match k.pred() {
                        None => true,
                        Some(j) => no(a, j),
                    }
            }
            _ => false,
        }
    }

    pub(crate) fn no(t: &Term, k: Level) -> bool {
        match t {
            Term::Abs(_, b) => no(b, k),
            _ => ne(t, k),
        }
    }
}

/// `t ≡_k u`. Defined on partial terms too: ⊥ is equal to ⊥ only.
pub fn strat_eq(t: &Term, u: &Term, c: Calculus, k: Level) -> bool {
    fn go<'a>(t: &'a Term, u: &'a Term, c: Calculus, k: Level, sc: &mut Scopes<'a>) -> bool {
        // level at which arguments are compared (CbN), None: not compared
        let arg_level = || match c {
            Calculus::Cbv => Some(k),
            Calculus::Cbn => k.pred(),
        };
        match (t, u) {
            (Term::Bot, Term::Bot) => true,
            (Term::Var(x), Term::Var(y)) => sc.same_var(x, y),
            (Term::Abs(x, b), Term::Abs(y, d)) => {
                let inner = match c {
                    Calculus::Cbv => k.pred(),
                    Calculus::Cbn => Some(k),
                };
                match inner {
                    None => true,
                    Some(j) => sc.under(x, y, |sc| go(b, d, c, j, sc)),
                }
            }
            (Term::App(f, a), Term::App(g, b)) => {
                go(f, g, c, k, sc) && arg_level().map_or(true, |j| go(a, b, c, j, sc))
            }
            (Term::Es(b1, x, a1), Term::Es(b2, y, a2)) => {
                arg_level().map_or(true, |j| go(a1, a2, c, j, sc)) && sc.under(x, y, |sc| go(b1, b2, c, k, sc))
            }
            _ => false,
        }
    }
    go(t, u, c, k, &mut Scopes::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn p(s: &str) -> Term {
        parse(s).unwrap()
    }

    const V: Calculus = Calculus::Cbv;
    const N: Calculus = Calculus::Cbn;

    #[test]
    fn normal_approximant_example_levels() {
        let t = p(r"\x.(x (\y.(\a.a) (\a.a)) (\z.(\a.a) ((\b.b b) (\b.b b))))");
        assert_eq!(classify_nf(&t, V, Level::Fin(1)).unwrap(), NfClass::No);
        assert_eq!(classify_nf(&t, V, Level::Fin(2)).unwrap(), NfClass::NotNf);
    }

    #[test]
    fn variables_are_the_base_case() {
        for k in [Level::ZERO, Level::Fin(3), Level::Omega] {
            assert_eq!(classify_nf(&p("x"), V, k).unwrap(), NfClass::Vr);
            assert_eq!(classify_nf(&p("x"), N, k).unwrap(), NfClass::Ne);
        }
    }

    #[test]
    fn closures_with_neutral_arguments() {
        assert_eq!(classify_nf(&p(r"x[y\z w]"), V, Level::Omega).unwrap(), NfClass::Vr);
        assert_eq!(classify_nf(&p(r"(x x)[y\z w]"), V, Level::Omega).unwrap(), NfClass::Ne);
        assert_eq!(classify_nf(&p(r"(\a.a)[y\z w]"), V, Level::Omega).unwrap(), NfClass::No);
        // a value argument is an sv redex
        assert_eq!(classify_nf(&p(r"x[y\z]"), V, Level::Omega).unwrap(), NfClass::NotNf);
        // every closure is a redex by name
        assert_eq!(classify_nf(&p(r"x[y\z w]"), N, Level::Omega).unwrap(), NfClass::NotNf);
    }

    #[test]
    fn partial_inputs_are_refused() {
        assert!(classify_nf(&Term::Bot, V, Level::ZERO).is_err());
    }

    #[test]
    fn bno_examples() {
        assert!(is_bno(&p(r"\x.(x (\y.(\a.a) (\a.a)) (\z.bot))"), V, Level::Fin(1)));
        for c in [V, N] {
            assert!(!is_bno(&Term::Bot, c, Level::ZERO));
        }
        assert!(is_bno(&p(r"\y.(bot (\z.bot))"), V, Level::ZERO));
        assert!(!is_bno(&p(r"\y.(bot (\z.bot))"), V, Level::Fin(1)));
        // CbN: arguments at level 0 are not inspected
        assert!(is_bno(&p("x bot"), N, Level::ZERO));
        assert!(!is_bno(&p("x bot"), N, Level::Fin(1)));
    }

    #[test]
    fn cbv_stratified_equality_example() {
        let t0 = p(r"(\x.x (\y.x)) z");
        let t1 = p(r"(\x.x (\z.z)) z");
        assert!(strat_eq(&t0, &t1, V, Level::Fin(0)));
        assert!(strat_eq(&t0, &t1, V, Level::Fin(1)));
        assert!(!strat_eq(&t0, &t1, V, Level::Fin(2)));
        assert!(!strat_eq(&t0, &t1, V, Level::Omega));
    }

    #[test]
    fn cbn_stratified_equality_example() {
        let om = "((\\b.b b) (\\b.b b))";
        let t0 = p(&format!(r"(x (\a.a))[x\(y {om})]"));
        let t1 = p(r"(x (\a.a))[x\(y (\a.a))]");
        assert!(strat_eq(&t0, &t1, N, Level::Fin(0)));
        assert!(strat_eq(&t0, &t1, N, Level::Fin(1)));
        assert!(!strat_eq(&t0, &t1, N, Level::Fin(2)));
    }

    #[test]
    fn abstractions_at_zero_are_all_equal_in_cbv() {
        assert!(strat_eq(&p(r"\x.x"), &p(r"\y.bot"), V, Level::ZERO));
        assert!(!strat_eq(&p(r"\x.x"), &p("y"), V, Level::ZERO));
        assert!(!strat_eq(&p(r"\x.x"), &p(r"\y.bot"), N, Level::ZERO));
    }

    #[test]
    fn bot_equals_only_bot() {
        for k in [Level::ZERO, Level::Fin(2), Level::Omega] {
            assert!(strat_eq(&Term::Bot, &Term::Bot, V, k));
            assert!(!strat_eq(&Term::Bot, &p("x"), V, k));
            assert!(!strat_eq(&p("x"), &Term::Bot, N, k));
        }
    }
}
