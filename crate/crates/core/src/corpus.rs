//! Term corpora: exhaustive enumeration, seeded random generation, partial
//! refinements and probe pools.

use rand::Rng;

use crate::term::Term;

/// Every ⊥-free term of size at most `max` whose variables and binders are
/// drawn from `names`, ordered by size.
pub fn enumerate(max: usize, names: &[&str]) -> Vec<Term> {
    let mut by_size: Vec<Vec<Term>> = vec![Vec::new(); max + 1];
    for n in 1..=max {
        let mut out = Vec::new();
        if n == 1 {
            out.extend(names.iter().map(|x| Term::var(x)));
        } else {
            for x in names {
                out.extend(by_size[n - 1].iter().map(|b| Term::abs(x, b.clone())));
            }
            for i in 1..n - 1 {
                let j = n - 1 - i;
                for l in &by_size[i] {
                    for r in &by_size[j] {
                        out.push(Term::app(l.clone(), r.clone()));
                        for x in names {
                            out.push(Term::es(l.clone(), x, r.clone()));
                        }
                    }
                }
            }
        }
        by_size[n] = out;
    }
    by_size.into_iter().flatten().collect()
}

/// A random ⊥-free term. `fuel` bounds the number of constructors; closed
/// combinators occasionally stand in for leaves so that redexes and
/// divergence are common.
pub fn random_term<R: Rng + ?Sized>(rng: &mut R, fuel: usize, names: &[&str]) -> Term {
    if fuel <= 1 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..10) {
            0 => Term::id(),
            1 => Term::delta(),
            2 => Term::omega(),
            _ => Term::var(names[rng.gen_range(0..names.len())]),
        };
    }
    let x = names[rng.gen_range(0..names.len())];
    let rest = fuel - 1;
    match rng.gen_range(0..10) {
        0..=2 => Term::abs(x, random_term(rng, rest, names)),
        3..=6 => {
            let left = rng.gen_range(1..=rest.max(1));
            Term::app(random_term(rng, left, names), random_term(rng, rest.saturating_sub(left).max(1), names))
        }
        _ => {
            let left = rng.gen_range(1..=rest.max(1));
            Term::es(random_term(rng, left, names), x, random_term(rng, rest.saturating_sub(left).max(1), names))
        }
    }
}

/// Replaces random subterms by ⊥, giving a term below `t`.
pub fn coarsen<R: Rng + ?Sized>(rng: &mut R, t: &Term, p: f64) -> Term {
    if rng.gen_bool(p) {
        return Term::Bot;
    }
    match t {
        Term::Var(_) | Term::Bot => t.clone(),
        Term::Abs(x, b) => Term::Abs(x.clone(), Box::new(coarsen(rng, b, p))),
        Term::App(f, a) => Term::app(coarsen(rng, f, p), coarsen(rng, a, p)),
        Term::Es(b, x, a) => Term::Es(Box::new(coarsen(rng, b, p)), x.clone(), Box::new(coarsen(rng, a, p))),
    }
}

/// Replaces every ⊥ by a random term, giving a term above `t`.
pub fn refine<R: Rng + ?Sized>(rng: &mut R, t: &Term, fuel: usize, names: &[&str]) -> Term {
    match t {
        Term::Bot => random_term(rng, fuel, names),
        Term::Var(_) => t.clone(),
        Term::Abs(x, b) => Term::Abs(x.clone(), Box::new(refine(rng, b, fuel, names))),
        Term::App(f, a) => Term::app(refine(rng, f, fuel, names), refine(rng, a, fuel, names)),
        Term::Es(b, x, a) => {
            Term::Es(Box::new(refine(rng, b, fuel, names)), x.clone(), Box::new(refine(rng, a, fuel, names)))
        }
    }
}

/// `x`, `I`, `Δ`, `λx.Ω` and `y z`.
pub fn default_probes() -> Vec<Term> {
    vec![
        Term::var("x"),
        Term::id(),
        Term::delta(),
        Term::abs("x", Term::omega()),
        Term::app(Term::var("y"), Term::var("z")),
    ]
}

/// A wider fixed pool of probes mixing values, neutral terms, redexes,
/// closures and meaningless terms.
pub fn probe_pool() -> Vec<Term> {
    let mut v = default_probes();
    let k = Term::abs("a", Term::abs("b", Term::var("a")));
    let f = Term::abs("a", Term::abs("b", Term::var("b")));
    v.extend([
        Term::omega(),
        Term::app(Term::var("x"), Term::omega()),
        k.clone(),
        f.clone(),
        Term::app(Term::id(), Term::id()),
        Term::app(k.clone(), Term::var("z")),
        Term::es(Term::var("x"), "x", Term::id()),
        Term::es(Term::app(Term::var("x"), Term::var("x")), "x", Term::delta()),
        Term::es(Term::var("y"), "w", Term::app(Term::var("z"), Term::var("z"))),
        Term::app(Term::var("x"), Term::var("x")),
        Term::abs("y", Term::app(Term::var("y"), Term::var("z"))),
        Term::app(Term::app(Term::var("z"), Term::id()), Term::delta()),
        Term::app(Term::delta(), Term::var("z")),
        Term::abs("a", Term::app(Term::var("a"), Term::abs("b", Term::omega()))),
        Term::app(f, Term::omega()),
        Term::es(Term::abs("c", Term::var("d")), "d", Term::app(Term::var("y"), Term::var("y"))),
        Term::app(Term::app(Term::abs("a", Term::delta()), Term::app(Term::var("y"), Term::var("y"))), Term::delta()),
        Term::app(Term::var("y"), Term::abs("z", Term::omega())),
    ]);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_enumerations_by_hand() {
        // x, y; λx.x λx.y λy.x λy.y, and 4 applications
        let ts = enumerate(3, &["x", "y"]);
        assert_eq!(ts.iter().filter(|t| t.size() == 1).count(), 2);
        assert_eq!(ts.iter().filter(|t| t.size() == 2).count(), 4);
        // size 3: 2*4 abstractions, 4 applications, 2*4 closures
        assert_eq!(ts.iter().filter(|t| t.size() == 3).count(), 20);
    }

    #[test]
    fn enumeration_counts_follow_the_recurrence() {
        // a(n) = 2 a(n-1) + 3 Σ a(i) a(n-1-i), a(1) = 2
        let mut a = vec![0u64, 2];
        for n in 2..=7 {
            let mut s = 2 * a[n - 1];
            for i in 1..n - 1 {
                s += 3 * a[i] * a[n - 1 - i];
            }
            a.push(s);
        }
        let total: u64 = a.iter().sum();
        assert_eq!(enumerate(7, &["x", "y"]).len() as u64, total);
    }

    #[test]
    fn coarsening_and_refining_stay_ordered() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let t = random_term(&mut rng, 8, &["x", "y"]);
            let lo = coarsen(&mut rng, &t, 0.2);
            assert!(lo.partial_leq(&t));
            let hi = refine(&mut rng, &lo, 3, &["x", "y"]);
            assert!(lo.partial_leq(&hi));
            assert!(!hi.contains_bot());
        }
    }

    #[test]
    fn probe_pool_is_large_and_bot_free() {
        let p = probe_pool();
        assert!(p.len() >= 20);
        assert!(p.iter().all(|t| !t.contains_bot()));
    }
}
