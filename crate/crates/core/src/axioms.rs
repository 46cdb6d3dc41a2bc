//! Property campaigns for the four abstract assumptions behind stratified
//! genericity: dynamic approximation (A1), dynamic partial lifting (A2),
//! observability of normal-form approximants (A3) and stability of
//! meaningful observables (A4). Violations carry replayable certificates.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{approximate_step, lift_step, Oracle};
use crate::corpus::{coarsen, refine};
use crate::error::{Error, Result};
use crate::normal::{classify_nf, is_bno, strat_eq};
use crate::position::{Calculus, Level};
use crate::reduction::{find_redexes, Step, StepDoc};
use crate::term::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axiom {
    A1,
    A2,
    A3,
    A4,
}

impl Axiom {
    pub const ALL: [Axiom; 4] = [Axiom::A1, Axiom::A2, Axiom::A3, Axiom::A4];

    pub fn title(self) -> &'static str {
        match self {
            Axiom::A1 => "dynamic approximation",
            Axiom::A2 => "dynamic partial lifting",
            Axiom::A3 => "observability of normal form approximants",
            Axiom::A4 => "stability of meaningful observables",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// One instance of an assumption, enough to re-run it.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "axiom")]
pub enum Certificate {
    A1 { calculus: Calculus, level: Level, fuel: usize, step: StepDoc },
    A2 { calculus: Calculus, level: Level, step: StepDoc, bigger: Term },
    A3 { calculus: Calculus, level: Level, fuel: usize, term: Term },
    A4 { calculus: Calculus, level: Level, partial: Term, bigger: Term },
}

/// Outcome of one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Violated(String),
    /// The oracle could not decide a status the instance depends on.
    Skipped,
}

impl Certificate {
    pub fn axiom(&self) -> Axiom {
        match self {
            Certificate::A1 { .. } => Axiom::A1,
            Certificate::A2 { .. } => Axiom::A2,
            Certificate::A3 { .. } => Axiom::A3,
            Certificate::A4 { .. } => Axiom::A4,
        }
    }

    /// Re-runs the instance from scratch.
    pub fn replay(&self) -> Result<Verdict> {
        let undecided = |e: Error| match e {
            Error::Undetermined(_) => Ok(Verdict::Skipped),
            Error::Assumption(m) => Ok(Verdict::Violated(m)),
            other => Err(other),
        };
        match self {
            Certificate::A1 { calculus, level, fuel, step } => {
                let s = step.to_step(*calculus)?;
                if !level.admits(s.level_required) {
                    return Err(Error::Document(format!("step is deeper than level {level}")));
                }
                let oracle = Oracle::new(*calculus, *fuel);
                match approximate_step(&s, &oracle) {
                    Ok(_) => Ok(Verdict::Pass),
                    Err(e) => undecided(e),
                }
            }
            Certificate::A2 { calculus, level, step, bigger } => {
                let s = step.to_step(*calculus)?;
                if !level.admits(s.level_required) {
                    return Err(Error::Document(format!("step is deeper than level {level}")));
                }
                match lift_step(&s, bigger, *calculus) {
                    Ok(l) if level.admits(l.level_required) => Ok(Verdict::Pass),
                    Ok(l) => Ok(Verdict::Violated(format!("lifted step needs level {}", l.level_required))),
                    Err(e) => undecided(e),
                }
            }
            Certificate::A3 { calculus, level, fuel, term } => {
                if !classify_nf(term, *calculus, *level)?.is_normal() {
                    return Err(Error::Document(format!("{term} is not S_{level}-normal")));
                }
                match Oracle::new(*calculus, *fuel).approximant(term) {
                    Ok(a) if is_bno(&a, *calculus, *level) => Ok(Verdict::Pass),
                    Ok(a) => Ok(Verdict::Violated(format!("A({term}) = {a} is not in bno_{level}"))),
                    Err(e) => undecided(e),
                }
            }
            Certificate::A4 { calculus, level, partial, bigger } => {
                if !is_bno(partial, *calculus, *level) || !partial.partial_leq(bigger) {
                    return Err(Error::Document("instance does not meet the hypotheses".into()));
                }
                if !is_bno(bigger, *calculus, *level) {
                    Ok(Verdict::Violated(format!("{bigger} is not in bno_{level}")))
                } else if !strat_eq(partial, bigger, *calculus, *level) {
                    Ok(Verdict::Violated(format!("{partial} and {bigger} differ at level {level}")))
                } else {
                    Ok(Verdict::Pass)
                }
            }
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct Tally {
    pub checked: usize,
    pub passed: usize,
    pub violated: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Violation {
    pub message: String,
    pub certificate: Certificate,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxiomReport {
    pub calculus: Calculus,
    pub tallies: Vec<(Axiom, Tally)>,
    pub violations: Vec<Violation>,
}

impl AxiomReport {
    pub fn tally(&self, a: Axiom) -> &Tally {
        &self.tallies.iter().find(|(x, _)| *x == a).expect("every axiom is tallied").1
    }

    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    /// Instances that were actually decided.
    pub fn decided(&self) -> usize {
        self.tallies.iter().map(|(_, t)| t.passed + t.violated).sum()
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub levels: Vec<Level>,
    pub fuel: usize,
    pub seed: u64,
    /// Redex occurrences tried per term and level.
    pub redexes_per_term: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            levels: vec![Level::Fin(0), Level::Fin(1), Level::Fin(2), Level::Omega],
            fuel: 500,
            seed: 0x5eed,
            redexes_per_term: 3,
        }
    }
}

fn instances(t: &Term, c: Calculus, cfg: &SuiteConfig, rng: &mut ChaCha8Rng, oracle: &Oracle) -> Vec<Certificate> {
    let names = ["x", "y"];
    let mut out = Vec::new();
    let approximant = oracle.approximant(t).ok();
    for &k in &cfg.levels {
        for o in find_redexes(t, c, k).into_iter().take(cfg.redexes_per_term) {
            if let Ok(s) = Step::new(t, o) {
                out.push(Certificate::A1 { calculus: c, level: k, fuel: cfg.fuel, step: StepDoc::of(&s) });
            }
        }
        let partial = coarsen(rng, t, 0.15);
        for o in find_redexes(&partial, c, k).into_iter().take(cfg.redexes_per_term) {
            if let Ok(s) = Step::new(&partial, o) {
                let full = refine(rng, &partial, 4, &names);
                let bigger = coarsen(rng, &full, 0.05);
                let bigger = if partial.partial_leq(&bigger) { bigger } else { full };
                out.push(Certificate::A2 { calculus: c, level: k, step: StepDoc::of(&s), bigger });
            }
        }
        if classify_nf(t, c, k).is_ok_and(|n| n.is_normal()) {
            out.push(Certificate::A3 { calculus: c, level: k, fuel: cfg.fuel, term: t.clone() });
        }
        if let Some(a) = approximant.as_ref().filter(|a| is_bno(a, c, k)) {
            out.push(Certificate::A4 { calculus: c, level: k, partial: a.clone(), bigger: t.clone() });
            let more = refine(rng, a, 4, &names);
            out.push(Certificate::A4 { calculus: c, level: k, partial: a.clone(), bigger: more });
        }
    }
    out
}

fn run_instance(cert: &Certificate, oracle: &Oracle) -> Result<Verdict> {
    // A1 and A3 share the campaign oracle so its memo is reused.
    match cert {
        Certificate::A1 { calculus, step, .. } => {
            let s = step.to_step(*calculus)?;
            match approximate_step(&s, oracle) {
                Ok(_) => Ok(Verdict::Pass),
                Err(Error::Undetermined(_)) => Ok(Verdict::Skipped),
                Err(Error::Assumption(m)) => Ok(Verdict::Violated(m)),
                Err(e) => Err(e),
            }
        }
        Certificate::A3 { calculus, level, term, .. } => match oracle.approximant(term) {
            Ok(a) if is_bno(&a, *calculus, *level) => Ok(Verdict::Pass),
            Ok(a) => Ok(Verdict::Violated(format!("A({term}) = {a} is not in bno_{level}"))),
            Err(Error::Undetermined(_)) => Ok(Verdict::Skipped),
            Err(e) => Err(e),
        },
        _ => cert.replay(),
    }
}

/// Instantiates every assumption on the corpus. Each term draws its
/// randomness from its own stream, so results do not depend on scheduling.
pub fn axiom_suite(c: Calculus, corpus: &[Term], cfg: &SuiteConfig) -> Result<AxiomReport> {
    let oracle = Oracle::new(c, cfg.fuel);
    let results: Vec<(Certificate, Verdict)> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            instances(t, c, cfg, &mut rng, &oracle)
                .into_iter()
                .map(|cert| run_instance(&cert, &oracle).map(|v| (cert, v)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut tallies: Vec<(Axiom, Tally)> = Axiom::ALL.iter().map(|a| (*a, Tally::default())).collect();
    let mut violations = Vec::new();
    for (cert, v) in results {
        let t = &mut tallies.iter_mut().find(|(a, _)| *a == cert.axiom()).expect("tallied").1;
        t.checked += 1;
        match v {
            Verdict::Pass => t.passed += 1,
            Verdict::Skipped => t.skipped += 1,
            Verdict::Violated(message) => {
                t.violated += 1;
                violations.push(Violation { message, certificate: cert });
            }
        }
    }
    Ok(AxiomReport { calculus: c, tallies, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::random_term;
    use crate::reduction::reduce_once;
    use crate::syntax::parse;

    #[test]
    fn observability_on_the_worked_normal_form() {
        let t = parse(r"\x.(x (\y.(\a.a) (\a.a)) (\z.(\a.a) ((\b.b b) (\b.b b))))").unwrap();
        let cert = Certificate::A3 { calculus: Calculus::Cbv, level: Level::Fin(1), fuel: 1000, term: t };
        assert_eq!(cert.replay().unwrap(), Verdict::Pass);
    }

    #[test]
    fn stability_on_an_approximant_pair() {
        let t = parse(r"\x.(x (\y.(\a.a) (\a.a)) (\z.(\a.a) ((\b.b b) (\b.b b))))").unwrap();
        let a = Oracle::with_default_fuel(Calculus::Cbv).approximant(&t).unwrap();
        let cert = Certificate::A4 { calculus: Calculus::Cbv, level: Level::Fin(1), partial: a, bigger: t };
        assert_eq!(cert.replay().unwrap(), Verdict::Pass);
    }

    #[test]
    fn approximation_of_the_omega_loop() {
        let s = reduce_once(&Term::omega(), Calculus::Cbv, Level::ZERO, Default::default()).unwrap();
        let cert = Certificate::A1 { calculus: Calculus::Cbv, level: Level::ZERO, fuel: 100, step: StepDoc::of(&s) };
        assert_eq!(cert.replay().unwrap(), Verdict::Pass);
    }

    #[test]
    fn certificates_survive_serialization() {
        let s = reduce_once(&Term::omega(), Calculus::Cbv, Level::ZERO, Default::default()).unwrap();
        let cert = Certificate::A2 { calculus: Calculus::Cbv, level: Level::ZERO, step: StepDoc::of(&s), bigger: Term::omega() };
        let json = serde_json::to_string(&cert).unwrap();
        let back: Certificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back.axiom(), Axiom::A2);
        assert_eq!(back.replay().unwrap(), Verdict::Pass);
    }

    #[test]
    fn tampered_certificates_are_rejected() {
        let cert = Certificate::A4 { calculus: Calculus::Cbv, level: Level::ZERO, partial: Term::Bot, bigger: Term::id() };
        assert!(cert.replay().is_err());
    }

    #[test]
    fn small_campaign_is_clean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let corpus: Vec<Term> = (0..60).map(|_| random_term(&mut rng, 8, &["x", "y"])).collect();
        for c in [Calculus::Cbv, Calculus::Cbn] {
            let r = axiom_suite(c, &corpus, &SuiteConfig::default()).unwrap();
            assert!(r.holds(), "{:?}", r.violations.first());
            assert!(r.decided() > 0);
        }
    }
}
