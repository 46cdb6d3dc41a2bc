use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use strata::corpus::{probe_pool, random_term};
use strata::{
    axiom_suite, check_derivation, classify_nf, judge, normalize_with, parse, parse_annotations, stratified_genericity_check,
    surface_genericity_check, strat_eq, typable, Budgets, Calculus, Context, Decision, Derivation, Error, Level, Oracle,
    Outcome, Strategy, SuiteConfig, System, Term, Theory, Verdict, DEFAULT_FUEL,
};

const OK: u8 = 0;
const VIOLATION: u8 = 1;
const UNKNOWN: u8 = 2;
const USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "strata", version, about = "Stratified reduction, meaningfulness and genericity for λ-calculi with explicit substitutions")]
struct Cli {
    /// cbv or cbn
    #[arg(long, global = true, default_value = "cbv")]
    calculus: Calculus,
    /// A natural number or `omega`
    #[arg(long, global = true, default_value = "omega")]
    level: Level,
    /// leftmost-outermost, leftmost-innermost or rightmost-innermost
    #[arg(long, global = true, default_value = "leftmost-outermost")]
    strategy: Strategy,
    #[arg(long, global = true, env = "STRATA_FUEL", default_value_t = DEFAULT_FUEL)]
    fuel: usize,
    /// Print structured JSON instead of text
    #[arg(long, global = true)]
    json: bool,
    /// JSON list of `{"term": ..., "status": "meaningless"}` assertions
    #[arg(long, global = true)]
    annotations: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and pretty-print a term
    Parse { term: String },
    /// Reduce with the chosen strategy until normal, cyclic or out of fuel
    Reduce { term: String },
    /// Classify a term against the normal-form grammar at the level
    NfCheck { term: String },
    /// Stratified equality at the level
    Eq { left: String, right: String },
    /// Meaningfulness status with its evidence
    Meaning { term: String },
    /// Meaningful approximant
    Approximant { term: String },
    /// Check a derivation document
    TypeCheck { file: PathBuf },
    /// Build a derivation for a meaningful term
    TypeInfer { term: String },
    /// Run the genericity harness on `C⟨t⟩` against probes
    Genericity {
        /// Context with one `@` hole
        #[arg(long)]
        context: String,
        /// The meaningless term placed in the hole
        #[arg(long, alias = "hole")]
        hole_term: String,
        /// File with one probe term per line; defaults to the built-in pool
        #[arg(long)]
        probes: Option<PathBuf>,
        /// Only compare meaningfulness of the plugged terms
        #[arg(long)]
        surface: bool,
    },
    /// Decide an equation in a theory, with a certificate when decided
    Judge {
        left: String,
        right: String,
        #[arg(long, default_value = "h")]
        theory: Theory,
        /// Layers of context tried by the observational falsifier
        #[arg(long, default_value_t = 2)]
        context_budget: usize,
    },
    /// Random campaign over the four approximation axioms
    Axioms {
        #[arg(long, default_value_t = 500)]
        terms: usize,
        #[arg(long, default_value_t = 8)]
        size: usize,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        /// Oracle fuel for the campaign
        #[arg(long, default_value_t = 500)]
        campaign_fuel: usize,
    },
}

struct Report {
    code: u8,
    text: String,
    doc: Value,
}

fn done(code: u8, text: impl Into<String>, doc: Value) -> Report {
    Report { code, text: text.into(), doc }
}

fn code_of(e: &Error) -> u8 {
    match e {
        Error::Undetermined(_) => UNKNOWN,
        Error::Assumption(_) | Error::Derivation(_) => VIOLATION,
        _ => USAGE,
    }
}

fn term(s: &str) -> Result<Term, Error> {
    parse(s)
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn read(path: &PathBuf) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Document(format!("{}: {e}", path.display())))
}

fn oracle(cli: &Cli) -> Result<Oracle, Error> {
    let o = Oracle::new(cli.calculus, cli.fuel);
    Ok(match &cli.annotations {
        Some(p) => o.with_assertions(parse_annotations(&read(p)?)?),
        None => o,
    })
}

fn decision_code(d: Decision) -> u8 {
    if d == Decision::Unknown {
        UNKNOWN
    } else {
        OK
    }
}

fn run(cli: &Cli) -> Result<Report, Error> {
    let (c, k) = (cli.calculus, cli.level);
    Ok(match &cli.command {
        Command::Parse { term: s } => {
            let t = term(s)?;
            done(OK, t.to_string(), json!({ "term": t, "size": t.size(), "free_vars": t.free_vars() }))
        }
        Command::Reduce { term: s } => {
            let tr = normalize_with(&term(s)?, c, k, cli.fuel, cli.strategy);
            let mut text: Vec<String> = tr.steps.iter().map(|s| format!("-{}-> {}   at {}", s.rule(), s.after, s.position())).collect();
            text.insert(0, tr.initial.to_string());
            let outcome = match tr.outcome {
                Outcome::NormalForm => "normal form".to_string(),
                Outcome::Cycle { at } => format!("cycle back to step {at}"),
                Outcome::FuelExhausted => "fuel exhausted".to_string(),
            };
            text.push(format!("{outcome} after {} steps", tr.len()));
            let code = if tr.outcome == Outcome::FuelExhausted { UNKNOWN } else { OK };
            done(code, text.join("\n"), to_value(&tr))
        }
        Command::NfCheck { term: s } => {
            let class = classify_nf(&term(s)?, c, k)?;
            let code = if class.is_normal() { OK } else { VIOLATION };
            let text = if class.is_normal() { format!("normal ({class:?})").to_lowercase() } else { "not normal".into() };
            done(code, text, json!({ "class": class, "normal": class.is_normal() }))
        }
        Command::Eq { left, right } => {
            let eq = strat_eq(&term(left)?, &term(right)?, c, k);
            done(if eq { OK } else { VIOLATION }, eq.to_string(), json!({ "level": k, "equal": eq }))
        }
        Command::Meaning { term: s } => {
            let st = oracle(cli)?.status(&term(s)?)?;
            let d = st.decision();
            done(decision_code(d), format!("{d:?}").to_lowercase(), to_value(&st))
        }
        Command::Approximant { term: s } => {
            let a = oracle(cli)?.approximant(&term(s)?)?;
            done(OK, a.to_string(), json!({ "approximant": a }))
        }
        Command::TypeCheck { file } => {
            let d: Derivation = serde_json::from_str(&read(file)?).map_err(|e| Error::Document(e.to_string()))?;
            match check_derivation(&d, System::of(c)) {
                Ok(()) => done(OK, format!("ok: {} ⊢ {} : {}", d.ctx, d.term, d.ty), json!({ "valid": true })),
                Err(vs) => {
                    let text = vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n");
                    done(VIOLATION, text, json!({ "valid": false, "violations": vs.iter().map(|v| v.to_string()).collect::<Vec<_>>() }))
                }
            }
        }
        Command::TypeInfer { term: s } => match typable(&term(s)?, System::of(c), cli.fuel)? {
            Some(d) => {
                let doc = to_value(&d);
                done(OK, d.to_string().trim_end(), doc)
            }
            None => done(VIOLATION, "untypable: the term is meaningless", json!({ "typable": false })),
        },
        Command::Genericity { context, hole_term, probes, surface } => {
            let ctx = Context::parse(context)?;
            let t = term(hole_term)?;
            let us = match probes {
                Some(p) => read(p)?
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                    .map(term)
                    .collect::<Result<Vec<_>, _>>()?,
                None => probe_pool(),
            };
            let o = oracle(cli)?;
            if *surface {
                let r = surface_genericity_check(&ctx, &t, &us, &o)?;
                let text = format!(
                    "C<t> is {:?}; {} probes, {} violations",
                    r.status,
                    r.probes.len(),
                    r.violations.len()
                )
                .to_lowercase();
                done(if r.holds() { OK } else { VIOLATION }, text, to_value(&r))
            } else {
                let r = stratified_genericity_check(&ctx, &t, &us, k, &o)?;
                let mut text = vec![
                    format!("approximant: {}", r.approximant),
                    format!("i = {}", r.steps),
                    format!("normal form: {}", r.lifted.normal_form),
                    format!("probes: {}, all lifted in {} steps", r.probes.len(), r.steps),
                ];
                text.extend(r.violations.iter().map(|v| format!("violation: {v}")));
                done(if r.holds() { OK } else { VIOLATION }, text.join("\n"), to_value(&r))
            }
        }
        Command::Judge { left, right, theory, context_budget } => {
            let (t, u) = (term(left)?, term(right)?);
            let budgets = Budgets { contexts: *context_budget, ..Budgets::default() };
            let v = judge(*theory, &t, &u, &oracle(cli)?, &budgets)?;
            let (code, text) = match &v {
                Verdict::Equal { .. } => (OK, format!("{theory} ⊢ {t} = {u}")),
                Verdict::NotEqual { .. } => (VIOLATION, format!("{theory} ⊬ {t} = {u}")),
                Verdict::Unknown { reason } => (UNKNOWN, format!("unknown: {reason}")),
            };
            done(code, text, to_value(&v))
        }
        Command::Axioms { terms, size, seed, campaign_fuel } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let corpus: Vec<Term> = (0..*terms).map(|_| random_term(&mut rng, *size, &["x", "y", "z"])).collect();
            let cfg = SuiteConfig { fuel: *campaign_fuel, seed: *seed, ..SuiteConfig::default() };
            let r = axiom_suite(c, &corpus, &cfg)?;
            let mut text: Vec<String> = r
                .tallies
                .iter()
                .map(|(a, t)| {
                    format!("{a:?} {}: {} checked, {} passed, {} violated, {} skipped", a.title(), t.checked, t.passed, t.violated, t.skipped)
                })
                .collect();
            text.extend(r.violations.iter().map(|v| format!("violation: {}", v.message)));
            done(if r.holds() { OK } else { VIOLATION }, text.join("\n"), to_value(&r))
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { OK });
        }
    };
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&out.doc).expect("json"));
            } else {
                println!("{}", out.text);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            if cli.json {
                println!("{}", json!({ "error": e.to_string() }));
            }
            eprintln!("error: {e}");
            ExitCode::from(code_of(&e))
        }
    }
}
