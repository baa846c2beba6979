//! Command-line front end. Structured output is JSON; summaries go to stdout.
//!
//! Exit codes: 0 true (or success), 1 false, 2 timeout or undetermined
//! within bounds, 3 usage or input error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::decider::{decide_mc, decide_succ_nonuniform, DecisionTrace, Verdict, DEFAULT_COMMIT};
use crate::diagonalizer::{case_search, run_construction, verify_defeat, ConstructionRun, DefeatEvidence};
use crate::functional::{as_functional, functionals, registry as functional_registry};
use crate::parser::parse;
use crate::presentation::{Presentation, FAMILIES};
use crate::sigma1::{eval_sigma1_form, sigma1_form, Sigma1Verdict, DEFAULT_MAX_NODES};
use crate::syntax::{free_var, Formula};
use crate::theory::{registry as theory_registry, verify_qe, TheoryId};

pub const EXIT_TRUE: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_UNDETERMINED: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "modelcomp", version, about = "Decide elementary diagrams from atomic diagrams")]
pub struct Cli {
    /// Seed for sampling; recorded in every JSON output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON result here.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Suppress the human-readable summary.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide a sentence in a presentation from its atomic diagram.
    Decide(DecideArgs),
    /// Extract the Σ₁ approximation of a formula from the uniform decider.
    Sigma1(Sigma1Args),
    /// Run the diagonalization construction against registered functionals.
    Diagonalize(DiagonalizeArgs),
    /// List registered identifiers.
    List {
        #[arg(value_enum)]
        kind: ListKind,
    },
    /// Check a theory's quantifier elimination against ground truth.
    VerifyQe(VerifyQeArgs),
}

#[derive(Args, Debug)]
pub struct DecideArgs {
    #[arg(long)]
    pub theory: String,
    #[arg(long)]
    pub presentation: String,
    #[arg(long)]
    pub sentence: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_steps: u64,
    /// Write the decision trace here (same content as `--out`).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Sigma1Args {
    #[arg(long)]
    pub theory: String,
    /// Formula in the free variables x0, x1, ….
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub stage: usize,
    /// `<presentation>:<i,j,…>`: evaluate the approximation at this tuple.
    #[arg(long)]
    pub eval: Option<String>,
    #[arg(long, default_value_t = 50)]
    pub witness_bound: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
    pub max_nodes: usize,
}

#[derive(Args, Debug)]
pub struct DiagonalizeArgs {
    #[arg(long)]
    pub base: String,
    /// Comma-separated functional names; `Φ_e` is the e-th.
    #[arg(long, value_delimiter = ',')]
    pub functionals: Vec<String>,
    #[arg(long)]
    pub stages: usize,
    /// Step cap on each functional run during disagreement searches.
    #[arg(long, default_value_t = 10_000)]
    pub run_cap: u64,
    /// Extensions and sentence codes inspected by the standalone
    /// disagreement search below the empty condition (0 to skip).
    #[arg(long, default_value_t = 400)]
    pub probe_budget: usize,
}

#[derive(Args, Debug)]
pub struct VerifyQeArgs {
    #[arg(long)]
    pub theory: String,
    #[arg(long)]
    pub formula: String,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ListKind {
    Theories,
    Presentations,
    Functionals,
}

#[derive(Serialize)]
struct Output<'a, T: Serialize> {
    command: &'a str,
    seed: u64,
    #[serde(flatten)]
    body: T,
}

#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure(e.to_string())
    }
}

/// Parse `argv` and run; returns the exit code.
pub fn main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_TRUE };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32, Failure> {
    match &cli.command {
        Command::Decide(args) => decide(cli, args),
        Command::Sigma1(args) => sigma1(cli, args),
        Command::Diagonalize(args) => diagonalize(cli, args),
        Command::List { kind } => list(cli, *kind),
        Command::VerifyQe(args) => verify(cli, args),
    }
}

fn theory(name: &str) -> Result<TheoryId, Failure> {
    TheoryId::from_name(name).ok_or_else(|| Failure(format!("unknown theory {name}")))
}

fn positive(name: &str, v: u64) -> Result<(), Failure> {
    if v == 0 {
        return Err(Failure(format!("--{name} must be positive")));
    }
    Ok(())
}

fn emit<T: Serialize>(cli: &Cli, command: &str, body: &T, extra: Option<&Path>) -> Result<(), Failure> {
    let out = Output { command, seed: cli.seed, body };
    let text = serde_json::to_string(&out)? + "\n";
    for path in cli.out.as_deref().into_iter().chain(extra) {
        std::fs::write(path, &text).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn say(cli: &Cli, line: impl AsRef<str>) {
    if !cli.quiet {
        println!("{}", line.as_ref());
    }
}

fn decide(cli: &Cli, args: &DecideArgs) -> Result<i32, Failure> {
    positive("max-steps", args.max_steps)?;
    let th = theory(&args.theory)?;
    let mut p = Presentation::from_spec(&args.presentation)?;
    let sentence = parse(&args.sentence)?;
    let trace: DecisionTrace = if th.is_model_complete() {
        decide_mc(th, &mut p, &sentence, args.max_steps)?
    } else if th == TheoryId::Succ {
        decide_succ_nonuniform(&mut p, &sentence, args.max_steps, DEFAULT_COMMIT)?
    } else {
        return Err(Failure(format!("no decision procedure for {}", th.name())));
    };
    emit(cli, "decide", &trace, args.trace.as_deref())?;
    say(cli, format!("{:?} ({} steps, {} queries)", trace.verdict, trace.steps, trace.queries.len()));
    Ok(match trace.verdict {
        Verdict::True => EXIT_TRUE,
        Verdict::False => EXIT_FALSE,
        Verdict::Timeout => EXIT_UNDETERMINED,
    })
}

/// Number of free variables, which must be exactly `x0..x(n-1)`.
fn arity(alpha: &Formula) -> Result<usize, Failure> {
    let free = alpha.free_vars();
    let n = free.len();
    if (0..n).any(|i| !free.contains(&free_var(i))) {
        return Err(Failure(format!("free variables must be x0..x{}", n.saturating_sub(1))));
    }
    Ok(n)
}

fn parse_eval(spec: &str) -> Result<(Presentation, Vec<usize>), Failure> {
    let (pres, tuple) = spec.rsplit_once(':').ok_or_else(|| Failure("--eval expects <presentation>:<tuple>".into()))?;
    let tuple = tuple
        .split(',')
        .filter(|t| !t.is_empty())
        .map(|t| t.trim().parse::<usize>().map_err(|_| Failure(format!("bad tuple entry {t}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((Presentation::from_spec(pres)?, tuple))
}

#[derive(Serialize)]
struct Sigma1Out {
    theory: &'static str,
    alpha: String,
    stage: usize,
    patterns: Vec<PatternOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eval: Option<EvalOut>,
}

#[derive(Serialize)]
struct PatternOut {
    pattern: Vec<usize>,
    display: String,
    disjuncts: Vec<crate::sigma1::Disjunct>,
}

#[derive(Serialize)]
struct EvalOut {
    presentation: String,
    tuple: Vec<usize>,
    witness_bound: usize,
    verdict: Sigma1Verdict,
}

fn sigma1(cli: &Cli, args: &Sigma1Args) -> Result<i32, Failure> {
    positive("stage", args.stage as u64)?;
    positive("witness-bound", args.witness_bound as u64)?;
    let th = theory(&args.theory)?;
    let gamma = as_functional(th)?;
    let alpha = parse(&args.alpha)?;
    let n = arity(&alpha)?;
    let form = sigma1_form(&gamma, &th.signature(), &alpha, n, args.stage, args.max_nodes);
    let eval = match &args.eval {
        None => None,
        Some(spec) => {
            let (p, tuple) = parse_eval(spec)?;
            if !th.accepts(&p) {
                return Err(Failure(format!("{} is not a presentation of a model of {}", p.spec(), th.name())));
            }
            let verdict = eval_sigma1_form(&p, &form, &tuple, args.witness_bound)?;
            Some(EvalOut { presentation: p.spec(), tuple, witness_bound: args.witness_bound, verdict })
        }
    };
    let out = Sigma1Out {
        theory: th.name(),
        alpha: alpha.to_string(),
        stage: args.stage,
        patterns: form
            .iter()
            .map(|pa| PatternOut {
                pattern: pa.pattern.clone(),
                display: pa.display.clone(),
                disjuncts: pa.approx.disjuncts.clone(),
            })
            .collect(),
        eval,
    };
    emit(cli, "sigma1", &out, None)?;
    let total: usize = out.patterns.iter().map(|p| p.disjuncts.len()).sum();
    say(cli, format!("{} patterns, {total} disjuncts at stage {}", out.patterns.len(), args.stage));
    Ok(match &out.eval {
        None => EXIT_TRUE,
        Some(e) => {
            say(cli, format!("eval: {:?}", e.verdict));
            match e.verdict {
                Sigma1Verdict::True { .. } => EXIT_TRUE,
                Sigma1Verdict::Unknown => EXIT_UNDETERMINED,
            }
        }
    })
}

#[derive(Serialize)]
struct DiagonalizeOut {
    #[serde(flatten)]
    run: ConstructionRun,
    /// `verify_defeat` on each entry of `evidence`.
    verified: Vec<bool>,
    /// Standalone disagreement searches below the empty condition, one per
    /// functional, with their verification.
    probes: Vec<Probe>,
}

#[derive(Serialize)]
struct Probe {
    evidence: DefeatEvidence,
    verified: bool,
}

fn diagonalize(cli: &Cli, args: &DiagonalizeArgs) -> Result<i32, Failure> {
    positive("stages", args.stages as u64)?;
    positive("run-cap", args.run_cap)?;
    let a = Presentation::from_spec(&args.base)?;
    let names: Vec<&str> = args.functionals.iter().map(String::as_str).collect();
    let fs = functionals(&names).map_err(Failure)?;
    let run = run_construction(&a, &fs, args.stages, args.run_cap)?;
    let f = run.f_prefix();
    let verified =
        fs.iter().zip(&run.evidence).map(|(phi, ev)| verify_defeat(&a, &f, phi, ev)).collect::<Result<Vec<_>, _>>()?;
    let mut probes = Vec::new();
    if args.probe_budget > 0 {
        for phi in &fs {
            let evidence = case_search(&a, &[], phi, args.probe_budget, args.run_cap)?;
            let prefix = match &evidence {
                DefeatEvidence::Disagreement { q, .. } | DefeatEvidence::Case3Candidate { q, .. } => q.clone(),
                DefeatEvidence::Unresolved { .. } => Vec::new(),
            };
            let verified = verify_defeat(&a, &prefix, phi, &evidence)?;
            probes.push(Probe { evidence, verified });
        }
    }
    for (ev, ok) in run.evidence.iter().zip(&verified) {
        say(cli, format!("R_{}: {} (verified: {ok})", ev.e(), ev.kind()));
    }
    for p in &probes {
        say(cli, format!("probe Φ_{}: {} (verified: {})", p.evidence.e(), p.evidence.kind(), p.verified));
    }
    say(cli, format!("|p| = {}, injuries = {}", run.p_final.len(), run.injuries.len()));
    emit(cli, "diagonalize", &DiagonalizeOut { run, verified, probes }, None)?;
    Ok(EXIT_TRUE)
}

#[derive(Serialize)]
struct Entry {
    name: String,
    docs: String,
}

#[derive(Serialize)]
struct Listing {
    kind: ListKind,
    entries: Vec<Entry>,
}

fn list(cli: &Cli, kind: ListKind) -> Result<i32, Failure> {
    let entries: Vec<Entry> = match kind {
        ListKind::Theories => {
            theory_registry().into_iter().map(|t| Entry { name: t.name.into(), docs: t.docs.into() }).collect()
        }
        ListKind::Presentations => {
            FAMILIES.iter().map(|(n, d)| Entry { name: n.to_string(), docs: d.to_string() }).collect()
        }
        ListKind::Functionals => {
            functional_registry().into_iter().map(|f| Entry { name: f.name.into(), docs: f.docs.into() }).collect()
        }
    };
    for e in &entries {
        say(cli, format!("{:<16} {}", e.name, e.docs));
    }
    emit(cli, "list", &Listing { kind, entries }, None)?;
    Ok(EXIT_TRUE)
}

fn verify(cli: &Cli, args: &VerifyQeArgs) -> Result<i32, Failure> {
    positive("samples", args.samples as u64)?;
    let th = theory(&args.theory)?;
    let phi = parse(&args.formula)?;
    let report = verify_qe(th, &phi, args.samples, cli.seed)?;
    say(cli, format!("ψ = {}\nα = {}\nβ = {}", report.eliminated, report.alpha, report.beta));
    say(cli, format!("{} samples, {} mismatches", report.samples, report.mismatches.len()));
    let code = if report.mismatches.is_empty() { EXIT_TRUE } else { EXIT_FALSE };
    emit(cli, "verify-qe", &report, None)?;
    Ok(code)
}
