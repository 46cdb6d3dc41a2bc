use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use strata::corpus::{coarsen, default_probes, enumerate, random_term, refine};
use strata::reduction::{plug_list, verify_steps};
use strata::{
    check_derivation, classify_nf, expand_derivation, find_redexes, is_bno, judge, normalize, normalize_with, parse,
    print, print_named, reduce_derivation, reduce_once, strat_eq, stratified_genericity_check, surface_genericity_check,
    synth_nf_derivation, typable, typed_genericity, Budgets, Calculus, Context, Decision, Derivation, Edge, Error, Level,
    MeaningStatus, NfClass, Oracle, Outcome, Position, Step, Strategy as RedStrategy, System, Term, Theory, Trace, Verdict,
};

const NAMES: [&str; 3] = ["x", "y", "z"];
const FUEL: usize = 300;
const STRATEGIES: [RedStrategy; 3] =
    [RedStrategy::LeftmostOutermost, RedStrategy::LeftmostInnermost, RedStrategy::RightmostInnermost];

fn name() -> impl Strategy<Value = &'static str> {
    prop::sample::select(&NAMES[..])
}

fn tree(leaf: BoxedStrategy<Term>) -> impl Strategy<Value = Term> {
    leaf.prop_recursive(5, 28, 2, |inner| {
        prop_oneof![
            1 => (name(), inner.clone()).prop_map(|(x, b)| Term::abs(x, b)),
            2 => (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::app(f, a)),
            1 => (inner.clone(), name(), inner).prop_map(|(b, x, a)| Term::es(b, x, a)),
        ]
    })
}

fn term() -> impl Strategy<Value = Term> {
    tree(
        prop_oneof![
            4 => name().prop_map(Term::var),
            1 => Just(Term::id()),
            1 => Just(Term::delta()),
            1 => Just(Term::omega()),
        ]
        .boxed(),
    )
}

fn partial() -> impl Strategy<Value = Term> {
    tree(prop_oneof![4 => name().prop_map(Term::var), 1 => Just(Term::Bot), 1 => Just(Term::id())].boxed())
}

fn calculus() -> impl Strategy<Value = Calculus> {
    prop_oneof![Just(Calculus::Cbv), Just(Calculus::Cbn)]
}

fn level() -> impl Strategy<Value = Level> {
    prop_oneof![(0u32..4).prop_map(Level::Fin), Just(Level::Omega)]
}

#[derive(Clone, Debug)]
enum Wrap {
    Left(Term),
    Right(Term),
    Abs(&'static str),
    Closure(&'static str, Term),
    ClosureArg(Term, &'static str),
}

fn context() -> impl Strategy<Value = Context> {
    let wrap = prop_oneof![
        term().prop_map(Wrap::Left),
        term().prop_map(Wrap::Right),
        name().prop_map(Wrap::Abs),
        (name(), term()).prop_map(|(x, u)| Wrap::Closure(x, u)),
        (term(), name()).prop_map(|(b, x)| Wrap::ClosureArg(b, x)),
    ];
    prop::collection::vec(wrap, 1..4).prop_map(|ws| {
        ws.into_iter().fold(Context::hole(), |c, w| match w {
            Wrap::Left(u) => c.app_left(u),
            Wrap::Right(u) => c.app_right(u),
            Wrap::Abs(x) => c.under_abs(x),
            Wrap::Closure(x, u) => c.closure(x, u),
            Wrap::ClosureArg(b, x) => {
                let mut edges = vec![Edge::EsArg];
                edges.extend_from_slice(c.hole_position().edges());
                Context::from_parts(Term::es(b, x, c.plug(&Term::Bot)), Position(edges)).unwrap()
            }
        })
    })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 192, ..ProptestConfig::default() })]

    #[test]
    fn printing_round_trips(t in partial()) {
        prop_assert!(parse(&print(&t)).unwrap().alpha_eq(&t));
        prop_assert_eq!(parse(&print_named(&t)).unwrap(), t);
    }

    #[test]
    fn partial_order_is_a_preorder_antisymmetric_up_to_alpha(t in term(), seed: u64) {
        let mut r = rng(seed);
        prop_assert!(t.partial_leq(&t));
        let a = coarsen(&mut r, &t, 0.2);
        let b = coarsen(&mut r, &a, 0.2);
        prop_assert!(b.partial_leq(&a) && a.partial_leq(&t) && b.partial_leq(&t));
        if a.partial_leq(&b) {
            prop_assert!(a.alpha_eq(&b));
        }
        prop_assert!(t.uniquify().partial_leq(&t) && t.partial_leq(&t.uniquify()));
    }

    #[test]
    fn substitution_is_monotone(t2 in term(), u2 in term(), x in name(), seed: u64) {
        let mut r = rng(seed);
        let t1 = coarsen(&mut r, &t2, 0.2);
        let u1 = coarsen(&mut r, &u2, 0.3);
        prop_assert!(t1.subst(x, &u1).partial_leq(&t2.subst(x, &u2)));
    }

    #[test]
    fn free_variables_of_a_substitution(t in term(), u in term(), x in name()) {
        let fv = t.subst(x, &u).free_vars();
        let mut bound = t.free_vars();
        bound.remove(x);
        bound.extend(u.free_vars());
        prop_assert!(fv.is_subset(&bound));
    }

    #[test]
    fn alpha_equivalence_is_a_congruence(t in term(), u in term(), x in name()) {
        let (t2, u2) = (t.uniquify(), u.uniquify());
        prop_assert!(t.alpha_eq(&t) && t.alpha_eq(&t2) && t2.alpha_eq(&t));
        prop_assert!(Term::abs(x, t.clone()).alpha_eq(&Term::abs(x, t2.clone())));
        prop_assert!(Term::app(t.clone(), u.clone()).alpha_eq(&Term::app(t2.clone(), u2.clone())));
        prop_assert!(Term::es(t.clone(), x, u.clone()).alpha_eq(&Term::es(t2, x, u2)));
        prop_assert_eq!(t.alpha_eq(&u), t.canon() == u.canon());
    }

    #[test]
    fn strata_are_monotone(t in term(), c in calculus()) {
        let mut previous = Vec::new();
        for k in [Level::Fin(0), Level::Fin(1), Level::Fin(2), Level::Fin(3), Level::Omega] {
            let now = find_redexes(&t, c, k);
            for o in &previous {
                prop_assert!(now.contains(o), "{} at {} lost at {}", t, o.position, k);
            }
            previous = now;
        }
    }

    #[test]
    fn surface_peaks_close_in_one_step(t in term(), c in calculus()) {
        let next: Vec<Term> = find_redexes(&t, c, Level::ZERO).into_iter().map(|o| Step::new(&t, o).unwrap().after).collect();
        let succ = |s: &Term| -> Vec<Term> {
            find_redexes(s, c, Level::ZERO).into_iter().map(|o| Step::new(s, o).unwrap().after).collect()
        };
        for (i, a) in next.iter().enumerate() {
            for b in &next[i + 1..] {
                if a.alpha_eq(b) { continue; }
                let (na, nb) = (succ(a), succ(b));
                prop_assert!(
                    na.iter().any(|x| x.alpha_eq(b))
                        || nb.iter().any(|y| y.alpha_eq(a))
                        || na.iter().any(|x| nb.iter().any(|y| x.alpha_eq(y))),
                    "{} <- {} -> {}", a, t, b
                );
            }
        }
    }

    #[test]
    fn normal_forms_do_not_depend_on_the_strategy(t in term(), c in calculus(), k in level()) {
        let traces: Vec<Trace> = STRATEGIES.iter().map(|s| normalize_with(&t, c, k, 200, *s)).collect();
        let nfs: Vec<&Term> = traces.iter().filter_map(|tr| tr.normal_form()).collect();
        for w in nfs.windows(2) {
            prop_assert!(w[0].alpha_eq(w[1]), "{} vs {}", w[0], w[1]);
        }
        for tr in &traces {
            tr.verify().unwrap();
        }
        if k == Level::Omega && nfs.is_empty() {
            // two bounded reductions from t are still joinable
            let (a, b) = (normalize_with(&t, c, k, 3, STRATEGIES[0]), normalize_with(&t, c, k, 3, STRATEGIES[2]));
            if let Some((l, r)) = strata::theories::join(a.last(), b.last(), c, 60, 400) {
                verify_steps(a.last(), &l, c, Level::Omega).unwrap();
                verify_steps(b.last(), &r, c, Level::Omega).unwrap();
            }
        }
    }

    #[test]
    fn cycles_at_the_surface_are_divergence(t in term(), c in calculus()) {
        let tr = normalize(&t, c, Level::ZERO, 200);
        if matches!(tr.outcome, Outcome::Cycle { .. }) {
            for s in STRATEGIES {
                prop_assert!(normalize_with(&t, c, Level::ZERO, 200, s).outcome != Outcome::NormalForm);
            }
        }
    }

    #[test]
    fn reduction_preserves_meaningfulness(t in term(), c in calculus(), k in level()) {
        let o = Oracle::new(c, FUEL);
        let a = o.decide(&t).unwrap();
        for occ in find_redexes(&t, c, k).into_iter().take(4) {
            let b = o.decide(&Step::new(&t, occ).unwrap().after).unwrap();
            if a != Decision::Unknown && b != Decision::Unknown {
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn normality_goes_down_the_strata(t in term(), c in calculus(), i in 0u32..4) {
        if classify_nf(&t, c, Level::Fin(i + 1)).unwrap().is_normal() {
            prop_assert!(classify_nf(&t, c, Level::Fin(i)).unwrap().is_normal());
        }
        if classify_nf(&t, c, Level::Omega).unwrap().is_normal() {
            prop_assert!(classify_nf(&t, c, Level::Fin(i)).unwrap().is_normal());
        }
    }

    #[test]
    fn stratified_equality_is_a_graded_equivalence(t in partial(), c in calculus(), i in 0u32..4, seed: u64) {
        let mut r = rng(seed);
        let u = coarsen(&mut r, &t, 0.1);
        let v = coarsen(&mut r, &t.uniquify(), 0.1);
        let k = Level::Fin(i);
        prop_assert!(strat_eq(&t, &t, c, k));
        prop_assert_eq!(strat_eq(&t, &u, c, k), strat_eq(&u, &t, c, k));
        if strat_eq(&t, &u, c, k) && strat_eq(&u, &v, c, k) {
            prop_assert!(strat_eq(&t, &v, c, k));
        }
        if strat_eq(&t, &u, c, Level::Fin(i + 1)) {
            prop_assert!(strat_eq(&t, &u, c, k));
        }
        if strat_eq(&t, &u, c, Level::Omega) {
            prop_assert!(strat_eq(&t, &u, c, k));
        }
    }

    #[test]
    fn approximants_are_below_and_observe(t in term(), c in calculus(), k in level(), seed: u64) {
        let o = Oracle::new(c, FUEL);
        let Ok(a) = o.approximant(&t) else { return Ok(()) };
        prop_assert!(a.partial_leq(&t));
        if classify_nf(&t, c, k).unwrap() == NfClass::No {
            prop_assert!(is_bno(&a, c, k), "A({}) = {} not in bno_{}", t, a, k);
        }
        if is_bno(&a, c, k) {
            let u = refine(&mut rng(seed), &a, 4, &NAMES);
            prop_assert!(is_bno(&u, c, k) && strat_eq(&a, &u, c, k), "{} ⊑ {}", a, u);
        }
    }

    #[test]
    fn approximants_ignore_meaningless_plugs(ctx in context(), u in term(), c in calculus()) {
        let o = Oracle::new(c, FUEL);
        let (Ok(a), Ok(b)) = (o.approximant(&ctx.plug(&Term::omega())), o.approximant(&ctx.plug(&u))) else {
            return Ok(());
        };
        prop_assert!(a.partial_leq(&b), "{} vs {}", a, b);
    }

    #[test]
    fn approximants_commute_with_list_contexts(t in term(), list in prop::collection::vec((name(), term()), 1..3), c in calculus()) {
        let o = Oracle::new(c, FUEL);
        let list: Vec<(String, Term)> = list.into_iter().map(|(x, u)| (x.to_string(), u)).collect();
        let whole = plug_list(&list, t.clone());
        if o.decide(&whole).unwrap() != Decision::Meaningful { return Ok(()); }
        let Ok(a) = o.approximant(&whole) else { return Ok(()) };
        let parts: Option<Vec<(String, Term)>> = list.iter().map(|(x, u)| o.approximant(u).ok().map(|a| (x.clone(), a))).collect();
        let (Some(parts), Ok(at)) = (parts, o.approximant(&t)) else { return Ok(()) };
        prop_assert!(a.alpha_eq(&plug_list(&parts, at)));
    }

    #[test]
    fn approximating_a_value_substitution(t in term(), x in name(), body in term(), y in name()) {
        let o = Oracle::new(Calculus::Cbv, FUEL);
        let v = Term::abs(y, body);
        let (Ok(lhs), Ok(at), Ok(av)) = (o.approximant(&t.subst(x, &v)), o.approximant(&t), o.approximant(&v)) else {
            return Ok(());
        };
        prop_assert!(lhs.partial_leq(&at.subst(x, &av)));
    }

    #[test]
    fn meaningful_compounds_have_meaningful_parts(t in term(), u in term(), x in name(), c in calculus()) {
        let o = Oracle::new(c, FUEL);
        for whole in [Term::app(t.clone(), u.clone()), Term::es(t.clone(), x, u.clone())] {
            if o.decide(&whole).unwrap() != Decision::Meaningful { continue; }
            prop_assert!(o.decide(&t).unwrap() != Decision::Meaningless);
            if c == Calculus::Cbv {
                prop_assert!(o.decide(&u).unwrap() != Decision::Meaningless);
            }
        }
    }

    #[test]
    fn typability_matches_meaningfulness(t in term(), c in calculus()) {
        let sys = System::of(c);
        let d = Oracle::new(c, FUEL).decide(&t).unwrap();
        match typable(&t, sys, FUEL) {
            Ok(Some(der)) => {
                prop_assert_eq!(d, Decision::Meaningful);
                prop_assert!(check_derivation(&der, sys).is_ok());
            }
            Ok(None) => prop_assert_eq!(d, Decision::Meaningless),
            Err(Error::Undetermined(_)) => prop_assert_eq!(d, Decision::Unknown),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn subject_reduction_and_expansion(t in term(), c in calculus()) {
        let sys = System::of(c);
        let Ok(Some(d)) = typable(&t, sys, FUEL) else { return Ok(()) };
        let Some(s) = reduce_once(&t, c, Level::ZERO, RedStrategy::default()) else { return Ok(()) };
        let r = reduce_derivation(&d, &s, sys).unwrap();
        prop_assert!(check_derivation(&r, sys).is_ok());
        prop_assert_eq!((&r.ctx, &r.ty), (&d.ctx, &d.ty));
        let e = expand_derivation(&r, &s, sys).unwrap();
        prop_assert!(check_derivation(&e, sys).is_ok());
        prop_assert_eq!((&e.ctx, &e.ty), (&d.ctx, &d.ty));
    }

    #[test]
    fn typed_genericity_keeps_the_judgement(ctx in context(), u in term(), c in calculus()) {
        let sys = System::of(c);
        let o = Oracle::new(c, FUEL);
        let Ok(Some(d)) = typable(&ctx.plug(&Term::omega()), sys, FUEL) else { return Ok(()) };
        let e = typed_genericity(&d, &ctx, &Term::omega(), &u, &o).unwrap();
        prop_assert!(check_derivation(&e, sys).is_ok());
        prop_assert_eq!((&e.ctx, &e.ty), (&d.ctx, &d.ty));
    }

    #[test]
    fn genericity_is_quantitative(ctx in context(), c in calculus(), k in level()) {
        let o = Oracle::new(c, FUEL);
        match stratified_genericity_check(&ctx, &Term::omega(), &default_probes(), k, &o) {
            Ok(r) => {
                prop_assert!(r.holds(), "{:?}", r.violations);
                prop_assert!(r.skeleton_in_bno && r.skeleton_equal);
                prop_assert_eq!(r.lifted.steps.len(), r.steps);
                for pr in &r.probes {
                    prop_assert_eq!(pr.steps.len(), r.steps);
                    verify_steps(&ctx.plug(&pr.probe), &pr.steps, c, k).unwrap();
                }
                serde_json::to_string(&r).unwrap();
            }
            Err(Error::Precondition(_) | Error::Undetermined(_)) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn surface_genericity_has_no_discrepancy(ctx in context(), c in calculus()) {
        let o = Oracle::new(c, FUEL);
        match surface_genericity_check(&ctx, &Term::omega(), &default_probes(), &o) {
            Ok(r) => prop_assert!(r.holds(), "{:?}", r.violations),
            Err(Error::Undetermined(_)) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn judge_is_sound_and_consistent(t in term(), u in term(), c in calculus(), same: bool) {
        // half of the pairs are related by reduction so that Equal verdicts occur
        let u = if same { normalize(&t, c, Level::Omega, 4).last().clone() } else { u };
        let o = Oracle::new(c, FUEL);
        let budgets = Budgets { contexts: 1, join_nodes: 50 };
        let vs: Vec<Verdict> = Theory::ALL.iter().map(|th| judge(*th, &t, &u, &o, &budgets).unwrap()).collect();
        for v in &vs {
            v.verify(c, &t, &u).unwrap();
        }
        for i in 0..3 {
            for j in i..3 {
                // λ ⊆ H ⊆ H*: equal below is never unequal above
                prop_assert!(!(vs[i].is_equal() && vs[j].is_not_equal()), "{:?} / {:?}", vs[i], vs[j]);
            }
        }
        if same {
            prop_assert!(vs[0].is_equal());
        }
        let back: Verdict = serde_json::from_str(&serde_json::to_string(&vs[2]).unwrap()).unwrap();
        back.verify(c, &t, &u).unwrap();
    }

    #[test]
    fn documents_round_trip(t in term(), c in calculus(), k in level()) {
        let tr = normalize(&t, c, k, 50);
        let back: Trace = serde_json::from_str(&serde_json::to_string(&tr).unwrap()).unwrap();
        back.verify().unwrap();
        prop_assert_eq!(back.len(), tr.len());
        let st = Oracle::new(c, FUEL).status(&t).unwrap();
        let back: MeaningStatus = serde_json::from_str(&serde_json::to_string(&st).unwrap()).unwrap();
        back.verify().unwrap();
        prop_assert_eq!(back.decision(), st.decision());
        if let Ok(Some(d)) = typable(&t, System::of(c), FUEL) {
            let back: Derivation = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
            prop_assert!(check_derivation(&back, System::of(c)).is_ok());
        }
    }
}

#[test]
fn synthesized_derivations_check_on_small_normal_forms() {
    let terms = enumerate(6, &["x", "y"]);
    let mut n = 0;
    for c in [Calculus::Cbv, Calculus::Cbn] {
        let sys = System::of(c);
        for t in &terms {
            if classify_nf(t, c, Level::ZERO).unwrap().is_normal() {
                let d = synth_nf_derivation(t, sys).unwrap();
                assert!(check_derivation(&d, sys).is_ok(), "{t}");
                assert!(d.term.alpha_eq(t));
                n += 1;
            }
        }
    }
    assert!(n > 1000);
}

#[test]
fn random_corpus_terms_reduce_consistently() {
    let mut r = rng(3);
    for _ in 0..300 {
        let t = random_term(&mut r, 10, &NAMES);
        for c in [Calculus::Cbv, Calculus::Cbn] {
            let tr = normalize(&t, c, Level::Omega, 100);
            tr.verify().unwrap();
            if let Some(nf) = tr.normal_form() {
                assert!(classify_nf(nf, c, Level::Omega).unwrap().is_normal());
            }
        }
    }
}
