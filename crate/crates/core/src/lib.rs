//! Stratified reduction, meaningfulness and genericity for the call-by-value
//! (value substitution) and call-by-name (distance) λ-calculi with explicit
//! substitutions.

pub mod approx;
pub mod axioms;
pub mod context;
pub mod corpus;
pub mod error;
pub mod genericity;
pub mod normal;
pub mod plotkin;
pub mod position;
pub mod reduction;
pub mod syntax;
pub mod term;
pub mod theories;
pub mod types;

pub use approx::{
    approximate_step, lift_step, meaning_status, meaningful_approximant, parse_annotations, Annotation, ApproxStep, Decision,
    MeaningStatus, Oracle,
    TestingContext, Witness,
};
pub use axioms::{axiom_suite, Axiom, AxiomReport, Certificate, SuiteConfig, Tally};
pub use context::Context;
pub use genericity::{
    stratified_genericity_check, surface_genericity_check, GenericityReport, LiftedProbe, SurfaceProbe, SurfaceReport,
};
pub use error::{Error, Result};
pub use normal::{classify_nf, is_bno, strat_eq, NfClass};
pub use plotkin::{plotkin_find_redexes, plotkin_step};
pub use position::{level_of, Calculus, Edge, Level, Position};
pub use reduction::{
    apply_step, find_redexes, normalize, normalize_with, redex_at, reduce_once, Outcome, Redex, RedexOccurrence,
    Rule, Step, Strategy, Trace, DEFAULT_FUEL,
};
pub use syntax::{parse, print, print_named};
pub use term::{Name, Term};
pub use theories::{falsify_observational, judge, Budgets, Justification, Theory, Verdict};
pub use types::{
    check_derivation, expand_derivation, reduce_derivation, synth_nf_derivation, typable, typed_genericity, Derivation,
    Mult, System, Ty, TypeRule, TypingCtx, Violation,
};
