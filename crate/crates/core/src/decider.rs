//! Deciding the elementary diagram of a presentation from its atomic diagram.
//!
//! A model-complete theory gives, for each sentence `φ(a⃗)`, a pair of
//! quantifier-free matrices with `φ ⟺ ∀y⃗ α` and `¬φ ⟺ ∀y⃗ β`. Exactly one
//! of the two universal sentences is false, so a search through tuples `b⃗`
//! for a counterexample to either matrix terminates and decides `φ`.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::coding::{Code, Coding, GroundAtom};
use crate::functional::{Functional, Outcome};
use crate::presentation::{
    Condition, ExpandedOracle, LoggingOracle, Oracle, OracleError, PrefixOracle, Presentation, PresentationError,
};
use crate::qe::{QeError, UniversalPair};
use crate::syntax::{Formula, Term};
use crate::theory::{qe_universal_pair, TheoryId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    True,
    False,
    Timeout,
}

impl Verdict {
    pub fn bit(self) -> Option<bool> {
        match self {
            Verdict::True => Some(true),
            Verdict::False => Some(false),
            Verdict::Timeout => None,
        }
    }
}

/// The matrix whose universal closure was refuted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Matrix {
    Alpha,
    Beta,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QeSummary {
    pub alpha: String,
    pub beta: String,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecisionTrace {
    pub verdict: Verdict,
    pub qe: QeSummary,
    /// Values of the universally quantified variables refuting `refuted`.
    pub witness: Vec<usize>,
    pub refuted: Option<Matrix>,
    /// Distinct oracle codes queried, in order of first query.
    pub queries: Vec<Code>,
    pub steps: u64,
    /// The element taken as the non-successor, for the nonuniform procedure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero: Option<usize>,
}

#[derive(Debug, Error)]
pub enum DecideError {
    #[error("theory {0} is not model complete")]
    NotModelComplete(&'static str),
    #[error("oracle signature {found} does not match theory {theory}")]
    SignatureMismatch { theory: &'static str, found: String },
    #[error("not a sentence: free variables {0:?}")]
    NotASentence(Vec<String>),
    #[error("neither matrix has a counterexample")]
    NoDichotomy,
    #[error("malformed matrix: {0}")]
    Malformed(String),
    #[error("invalid search parameters: {0}")]
    Invalid(String),
    #[error(transparent)]
    Qe(#[from] QeError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
}

enum Halt {
    Budget,
    Oracle(OracleError),
    Malformed(String),
}

struct Search<'a, O: Oracle + ?Sized> {
    oracle: &'a mut O,
    coding: Coding,
    cache: HashMap<Code, bool>,
    log: Vec<Code>,
    steps: u64,
    max_steps: u64,
}

impl<'a, O: Oracle + ?Sized> Search<'a, O> {
    fn new(oracle: &'a mut O, max_steps: u64) -> Search<'a, O> {
        let coding = Coding::new(oracle.signature());
        Search { oracle, coding, cache: HashMap::new(), log: Vec::new(), steps: 0, max_steps }
    }

    fn tick(&mut self) -> Result<(), Halt> {
        if self.steps >= self.max_steps {
            return Err(Halt::Budget);
        }
        self.steps += 1;
        Ok(())
    }

    fn query(&mut self, atom: &GroundAtom) -> Result<bool, Halt> {
        let code = self.coding.encode(atom).map_err(|e| Halt::Malformed(e.to_string()))?;
        if let Some(&b) = self.cache.get(&code) {
            return Ok(b);
        }
        self.tick()?;
        let b = self.oracle.query(code).map_err(Halt::Oracle)?;
        self.cache.insert(code, b);
        self.log.push(code);
        Ok(b)
    }

    fn value(t: &Term, vars: &[String], vals: &[usize]) -> Result<Option<usize>, Halt> {
        match t {
            Term::Dom(i) => Ok(Some(*i)),
            Term::Var(v) => match vars.iter().position(|w| w == v) {
                Some(k) => Ok(vals.get(k).copied()),
                None => Err(Halt::Malformed(format!("unbound variable {v}"))),
            },
            other => Err(Halt::Malformed(format!("non-relational term {other}"))),
        }
    }

    /// Kleene evaluation under a partial assignment of a prefix of `vars`.
    fn eval(&mut self, f: &Formula, vars: &[String], vals: &[usize]) -> Result<Option<bool>, Halt> {
        Ok(match f {
            Formula::True => Some(true),
            Formula::False => Some(false),
            Formula::Eq(a, b) => match (Self::value(a, vars, vals)?, Self::value(b, vars, vals)?) {
                (Some(x), Some(y)) => Some(x == y),
                _ => None,
            },
            Formula::Rel(name, args) => {
                let idx = self
                    .oracle
                    .signature()
                    .diagram_index(name)
                    .ok_or_else(|| Halt::Malformed(format!("unknown relation {name}")))?;
                let mut xs = Vec::with_capacity(args.len());
                for a in args {
                    match Self::value(a, vars, vals)? {
                        Some(x) => xs.push(x),
                        None => return Ok(None),
                    }
                }
                Some(self.query(&GroundAtom::Rel(idx, xs))?)
            }
            Formula::Not(a) => self.eval(a, vars, vals)?.map(|b| !b),
            Formula::And(a, b) => {
                let x = self.eval(a, vars, vals)?;
                if x == Some(false) {
                    return Ok(x);
                }
                match (x, self.eval(b, vars, vals)?) {
                    (_, Some(false)) => Some(false),
                    (Some(true), Some(true)) => Some(true),
                    _ => None,
                }
            }
            Formula::Or(a, b) => {
                let x = self.eval(a, vars, vals)?;
                if x == Some(true) {
                    return Ok(x);
                }
                match (x, self.eval(b, vars, vals)?) {
                    (_, Some(true)) => Some(true),
                    (Some(false), Some(false)) => Some(false),
                    _ => None,
                }
            }
            Formula::Implies(a, b) => {
                let x = self.eval(a, vars, vals)?.map(|v| !v);
                if x == Some(true) {
                    return Ok(x);
                }
                match (x, self.eval(b, vars, vals)?) {
                    (_, Some(true)) => Some(true),
                    (Some(false), Some(false)) => Some(false),
                    _ => None,
                }
            }
            Formula::Exists(..) | Formula::Forall(..) => {
                return Err(Halt::Malformed(format!("quantifier in matrix: {f}")));
            }
        })
    }

    /// Tuples extending `vals` whose relevant entries have maximum exactly
    /// `bound`, in lexicographic order, checking both matrices at every node.
    /// Variables occurring in neither matrix stay 0.
    fn dfs(
        &mut self,
        pair: &UniversalPair,
        relevant: &[bool],
        vals: &mut Vec<usize>,
        bound: usize,
        hit: bool,
        live: (bool, bool),
    ) -> Result<Option<(Matrix, Vec<usize>)>, Halt> {
        self.tick()?;
        let a = if live.0 { self.eval(&pair.alpha, &pair.vars, vals)? } else { Some(true) };
        let b = if live.1 { self.eval(&pair.beta, &pair.vars, vals)? } else { Some(true) };
        // A matrix already false under a partial assignment is false under
        // every completion; pad with zeros.
        let complete = |vals: &Vec<usize>| {
            let mut w = vals.clone();
            w.resize(pair.m, 0);
            w
        };
        if a == Some(false) {
            return Ok(Some((Matrix::Alpha, complete(vals))));
        }
        if b == Some(false) {
            return Ok(Some((Matrix::Beta, complete(vals))));
        }
        let live = (a.is_none(), b.is_none());
        if vals.len() == pair.m || !(live.0 || live.1) {
            return Ok(None);
        }
        let k = vals.len();
        if !relevant[k] {
            vals.push(0);
            let r = self.dfs(pair, relevant, vals, bound, hit, live);
            vals.pop();
            return r;
        }
        let last = !relevant[k + 1..].contains(&true);
        for v in 0..=bound {
            if last && !hit && v != bound {
                continue;
            }
            vals.push(v);
            let r = self.dfs(pair, relevant, vals, bound, hit || v == bound, live);
            vals.pop();
            if let Some(found) = r? {
                return Ok(Some(found));
            }
        }
        Ok(None)
    }

    fn run(&mut self, pair: &UniversalPair) -> Result<Option<(Matrix, Vec<usize>)>, Halt> {
        let (in_alpha, in_beta) = (pair.alpha.all_vars(), pair.beta.all_vars());
        let relevant: Vec<bool> = pair.vars.iter().map(|v| in_alpha.contains(v) || in_beta.contains(v)).collect();
        if !relevant.contains(&true) {
            return self.dfs(pair, &relevant, &mut Vec::new(), 0, true, (true, true));
        }
        for bound in 0.. {
            if let Some(found) = self.dfs(pair, &relevant, &mut Vec::new(), bound, false, (true, true))? {
                return Ok(Some(found));
            }
        }
        unreachable!()
    }
}

fn summary(pair: &UniversalPair) -> QeSummary {
    QeSummary { alpha: pair.alpha.to_string(), beta: pair.beta.to_string(), m: pair.m }
}

/// Search for a counterexample to one of the pair's matrices, querying
/// atomic facts through `oracle`.
pub fn search_pair<O: Oracle + ?Sized>(
    pair: &UniversalPair,
    oracle: &mut O,
    max_steps: u64,
) -> Result<DecisionTrace, DecideError> {
    let mut search = Search::new(oracle, max_steps);
    let outcome = search.run(pair);
    let mut trace = DecisionTrace {
        verdict: Verdict::Timeout,
        qe: summary(pair),
        witness: Vec::new(),
        refuted: None,
        queries: std::mem::take(&mut search.log),
        steps: search.steps,
        zero: None,
    };
    match outcome {
        Ok(Some((matrix, witness))) => {
            trace.verdict = if matrix == Matrix::Alpha { Verdict::False } else { Verdict::True };
            trace.refuted = Some(matrix);
            trace.witness = witness;
            Ok(trace)
        }
        Ok(None) => Err(DecideError::NoDichotomy),
        Err(Halt::Budget) => Ok(trace),
        Err(Halt::Oracle(e)) => Err(e.into()),
        Err(Halt::Malformed(m)) => Err(DecideError::Malformed(m)),
    }
}

thread_local! {
    static PAIRS: std::cell::RefCell<HashMap<(TheoryId, Formula), UniversalPair>> = Default::default();
}

/// The universal pair of `sentence`, memoized per thread: elimination is a
/// pure function of its input and functionals rerun it on every call.
fn cached_pair(th: TheoryId, sentence: &Formula) -> Result<UniversalPair, QeError> {
    let key = (th, sentence.clone());
    if let Some(pair) = PAIRS.with(|m| m.borrow().get(&key).cloned()) {
        return Ok(pair);
    }
    let pair = qe_universal_pair(th, sentence)?;
    PAIRS.with(|m| m.borrow_mut().insert(key, pair.clone()));
    Ok(pair)
}

fn check_sentence(sentence: &Formula) -> Result<(), DecideError> {
    let free = sentence.free_vars();
    if free.is_empty() {
        Ok(())
    } else {
        Err(DecideError::NotASentence(free.into_iter().collect()))
    }
}

/// Decide `sentence` in the structure whose atomic diagram `oracle` answers.
pub fn decide_mc<O: Oracle + ?Sized>(
    th: TheoryId,
    oracle: &mut O,
    sentence: &Formula,
    max_steps: u64,
) -> Result<DecisionTrace, DecideError> {
    if !th.is_model_complete() {
        return Err(DecideError::NotModelComplete(th.name()));
    }
    if oracle.signature() != &th.signature() {
        return Err(DecideError::SignatureMismatch { theory: th.name(), found: oracle.signature().to_string() });
    }
    check_sentence(sentence)?;
    let pair = cached_pair(th, sentence)?;
    search_pair(&pair, oracle, max_steps)
}

pub const DEFAULT_COMMIT: usize = 3;

/// Windowed search for the element without a predecessor.
struct Locator {
    window: usize,
    has_pred: Vec<bool>,
    candidate: Option<usize>,
    streak: usize,
    steps: u64,
}

impl Locator {
    fn new() -> Locator {
        Locator { window: 0, has_pred: Vec::new(), candidate: None, streak: 0, steps: 0 }
    }

    /// Double the window and recompute the unique predecessor-free element.
    fn advance<O: Oracle + ?Sized>(
        &mut self,
        oracle: &mut O,
        s: usize,
        coding: &Coding,
        max_steps: u64,
    ) -> Result<(), Halt> {
        let old = self.window;
        let w = (old * 2).max(2);
        self.has_pred.resize(w, false);
        for e in 0..w {
            if self.has_pred[e] {
                continue;
            }
            for d in 0..w {
                if d < old && e < old {
                    continue;
                }
                if self.steps >= max_steps {
                    return Err(Halt::Budget);
                }
                self.steps += 1;
                let code =
                    coding.encode(&GroundAtom::Rel(s, vec![d, e])).map_err(|e| Halt::Malformed(e.to_string()))?;
                if oracle.query(code).map_err(Halt::Oracle)? {
                    self.has_pred[e] = true;
                    break;
                }
            }
        }
        self.window = w;
        let free: Vec<usize> = (0..w).filter(|&e| !self.has_pred[e]).collect();
        match free.as_slice() {
            [c] if self.candidate == Some(*c) => self.streak += 1,
            [c] => {
                self.candidate = Some(*c);
                self.streak = 1;
            }
            _ => {
                self.candidate = None;
                self.streak = 0;
            }
        }
        Ok(())
    }
}

fn mentions(f: &Formula, name: &str) -> bool {
    let mut found = false;
    f.visit(&mut |g| {
        if matches!(g, Formula::Rel(r, _) if r == name) {
            found = true;
        }
    });
    found
}

fn dedup(log: &[Code]) -> Vec<Code> {
    let mut seen = BTreeSet::new();
    log.iter().copied().filter(|c| seen.insert(*c)).collect()
}

/// Decide `sentence` in a copy of `(ω, S)` by naming its non-successor.
///
/// The candidate is committed once it has been the unique predecessor-free
/// element for `commit_after` consecutive window doublings. After a verdict
/// the window is doubled once more; if the candidate changes, the decision
/// is rerun with the new one.
pub fn decide_succ_nonuniform<O: Oracle + ?Sized>(
    oracle: &mut O,
    sentence: &Formula,
    max_steps: u64,
    commit_after: usize,
) -> Result<DecisionTrace, DecideError> {
    let theory = TheoryId::Succ;
    if oracle.signature() != &theory.signature() {
        return Err(DecideError::SignatureMismatch { theory: theory.name(), found: oracle.signature().to_string() });
    }
    check_sentence(sentence)?;
    let pair = cached_pair(TheoryId::Succ0, sentence)?;
    let needs_zero = mentions(&pair.alpha, "c0") || mentions(&pair.beta, "c0");
    let coding = Coding::new(oracle.signature());
    let s = oracle.signature().diagram_index("S").expect("successor signature");
    let mut logging = LoggingOracle::new(oracle);
    let mut locator = Locator::new();
    let mut search_steps = 0;
    let timeout = |locator: &Locator, search_steps: u64, log: &[Code]| DecisionTrace {
        verdict: Verdict::Timeout,
        qe: summary(&pair),
        witness: Vec::new(),
        refuted: None,
        queries: dedup(log),
        steps: locator.steps + search_steps,
        zero: locator.candidate,
    };
    let locate = |locator: &mut Locator, logging: &mut LoggingOracle<O>, budget: u64| -> Result<(), Halt> {
        while locator.streak < commit_after.max(1) {
            locator.advance(logging, s, &coding, budget)?;
        }
        Ok(())
    };
    loop {
        let zero = if needs_zero {
            match locate(&mut locator, &mut logging, max_steps.saturating_sub(search_steps)) {
                Ok(()) => locator.candidate,
                Err(Halt::Budget) => return Ok(timeout(&locator, search_steps, &logging.log)),
                Err(Halt::Oracle(e)) => return Err(e.into()),
                Err(Halt::Malformed(m)) => return Err(DecideError::Malformed(m)),
            }
        } else {
            None
        };
        let mut expanded = ExpandedOracle::new(&mut logging, "c0", zero.unwrap_or(0))?;
        let remaining = max_steps.saturating_sub(locator.steps + search_steps);
        let mut trace = search_pair(&pair, &mut expanded, remaining)?;
        search_steps += trace.steps;
        if trace.verdict == Verdict::Timeout {
            return Ok(timeout(&locator, search_steps, &logging.log));
        }
        if let Some(z) = zero {
            match locator.advance(&mut logging, s, &coding, max_steps.saturating_sub(search_steps)) {
                Ok(()) if locator.candidate == Some(z) => {}
                Ok(()) => continue,
                Err(Halt::Budget) => return Ok(timeout(&locator, search_steps, &logging.log)),
                Err(Halt::Oracle(e)) => return Err(e.into()),
                Err(Halt::Malformed(m)) => return Err(DecideError::Malformed(m)),
            }
        }
        trace.queries = dedup(&logging.log);
        trace.steps = locator.steps + search_steps;
        trace.zero = zero;
        return Ok(trace);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalEvidence {
    pub n: usize,
    /// The diagram string `σ ∈ 2^{l_n}` as a bitstring.
    pub sigma: String,
    /// The tuple `b⃗`, with `ρ(i) = b_i`.
    pub b: Vec<usize>,
    pub bit: bool,
    #[serde(rename = "use")]
    pub use_: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalSearch {
    pub evidence: Option<LocalEvidence>,
    pub tuples: u64,
    pub steps: u64,
}

/// Search for `n`, a tuple `b⃗` of distinct elements fixing `c⃗` and the
/// domain `0..|p|-1` of `p`, and the string `σ` that `ρ: i ↦ b_i` sends to
/// `Δ(C)↾b⃗`, such that `Φ_e^σ` converges on `sentence`.
///
/// Every admissible `σ` is determined by its `b⃗`, so only tuples are
/// enumerated: by `n + max(b⃗)` and then lexicographically.
pub fn local_search_decide(
    phi_e: &Functional,
    c: &Presentation,
    p: &Condition,
    sentence: &Formula,
    cs: &[usize],
    max_steps: u64,
    run_steps: u64,
) -> Result<LocalSearch, DecideError> {
    if let Some(&x) = cs.iter().find(|&&x| x < p.len()) {
        return Err(DecideError::Invalid(format!("element {x} lies in the domain of the condition")));
    }
    let fixed: BTreeSet<usize> = cs.iter().copied().chain(0..p.len()).collect();
    if let Some(d) = sentence.domain_constants().into_iter().find(|d| !fixed.contains(d)) {
        return Err(DecideError::Invalid(format!("#{d} is neither in c nor in the domain of p")));
    }
    check_sentence(sentence)?;
    let n0 = fixed.iter().next_back().copied().unwrap_or(0);
    let mut state = LocalState { phi_e, c, sentence, fixed: &fixed, max_steps, run_steps, steps: 0, tuples: 0 };
    for t in 0.. {
        for n in n0..=n0 + t {
            let bound = n + (t - (n - n0));
            let mut b = Vec::with_capacity(n + 1);
            match state.tuples_with_max(n, bound, false, &mut b) {
                Ok(Some(evidence)) => return Ok(state.finish(Some(evidence))),
                Ok(None) => {}
                Err(Halt::Budget) => return Ok(state.finish(None)),
                Err(Halt::Oracle(e)) => return Err(e.into()),
                Err(Halt::Malformed(m)) => return Err(DecideError::Malformed(m)),
            }
        }
    }
    unreachable!()
}

struct LocalState<'a> {
    phi_e: &'a Functional,
    c: &'a Presentation,
    sentence: &'a Formula,
    fixed: &'a BTreeSet<usize>,
    max_steps: u64,
    run_steps: u64,
    steps: u64,
    tuples: u64,
}

impl LocalState<'_> {
    fn finish(&self, evidence: Option<LocalEvidence>) -> LocalSearch {
        LocalSearch { evidence, tuples: self.tuples, steps: self.steps }
    }

    fn tuples_with_max(
        &mut self,
        n: usize,
        bound: usize,
        hit: bool,
        b: &mut Vec<usize>,
    ) -> Result<Option<LocalEvidence>, Halt> {
        let i = b.len();
        if i == n + 1 {
            return if hit { self.try_tuple(n, b) } else { Ok(None) };
        }
        if self.fixed.contains(&i) {
            b.push(i);
            let r = self.tuples_with_max(n, bound, hit || i == bound, b);
            b.pop();
            return r;
        }
        for v in 0..=bound {
            if self.fixed.contains(&v) || b.contains(&v) {
                continue;
            }
            b.push(v);
            let r = self.tuples_with_max(n, bound, hit || v == bound, b);
            b.pop();
            if let Some(e) = r? {
                return Ok(Some(e));
            }
        }
        Ok(None)
    }

    fn try_tuple(&mut self, n: usize, b: &[usize]) -> Result<Option<LocalEvidence>, Halt> {
        self.tuples += 1;
        let coding = self.c.coding();
        let len = coding.block_length(n);
        if self.steps + len >= self.max_steps {
            return Err(Halt::Budget);
        }
        self.steps += len;
        let sigma = (0..len)
            .map(|code| self.c.holds(&coding.decode(code).map(|i| b[i])))
            .collect::<Result<Vec<bool>, _>>()
            .map_err(Halt::Oracle)?;
        let mut oracle = PrefixOracle::new(self.c.signature().clone(), sigma.clone());
        let budget = self.run_steps.min(self.max_steps - self.steps);
        let run = self.phi_e.program.run(&mut oracle, self.sentence, budget);
        self.steps += run.steps;
        Ok(match run.outcome {
            Outcome::Converge { bit, use_ } => Some(LocalEvidence {
                n,
                sigma: sigma.iter().map(|&x| if x { '1' } else { '0' }).collect(),
                b: b.to_vec(),
                bit,
                use_,
            }),
            Outcome::Diverge { .. } => None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::Program;
    use crate::parser::parse;
    use crate::presentation::Permutation;

    fn decide(th: TheoryId, spec: &str, s: &str) -> DecisionTrace {
        let mut p = Presentation::from_spec(spec).unwrap();
        decide_mc(th, &mut p, &parse(s).unwrap(), 1_000_000).unwrap()
    }

    #[test]
    fn density() {
        assert_eq!(decide(TheoryId::DloPP, "dlo01", "exists x. (lo < x & x < hi)").verdict, Verdict::True);
        assert_eq!(decide(TheoryId::DloPP, "dlo01", "exists x. x < lo").verdict, Verdict::False);
    }

    #[test]
    fn successor_witness() {
        let t = decide(TheoryId::Succ0, "succ0", "exists y. S(y) = #3");
        assert_eq!(t.verdict, Verdict::True);
        assert_eq!(t.refuted, Some(Matrix::Beta));
        assert_eq!(t.witness, vec![2]);
        let t = decide(TheoryId::Succ0, "succ0", "exists y. S(y) = #0");
        assert_eq!(t.verdict, Verdict::False);
    }

    #[test]
    fn pullback_agrees() {
        let base = Presentation::from_spec("succ0").unwrap();
        let mut pulled = Presentation::pullback(&base, Permutation::finite([(0, 5), (5, 0)]).unwrap());
        // #3 is fixed by the swap; #5 in the pullback is the base's #0.
        for (s, want) in [("exists y. S(y) = #3", true), ("exists y. S(y) = #5", false), ("exists y. S(y) = #0", true)]
        {
            let t = decide_mc(TheoryId::Succ0, &mut pulled, &parse(s).unwrap(), 100_000).unwrap();
            assert_eq!(t.verdict.bit(), Some(want), "{s}");
        }
    }

    #[test]
    fn timeout_is_not_a_bit() {
        let mut p = Presentation::from_spec("succ0").unwrap();
        let t = decide_mc(TheoryId::Succ0, &mut p, &parse("exists y. S(y) = #30").unwrap(), 5).unwrap();
        assert_eq!(t.verdict, Verdict::Timeout);
        assert!(t.steps <= 5);
    }

    #[test]
    fn refusals() {
        let mut p = Presentation::from_spec("succ:shift=0").unwrap();
        let s = parse("exists y. S(y) = #1").unwrap();
        assert!(matches!(decide_mc(TheoryId::Succ, &mut p, &s, 100), Err(DecideError::NotModelComplete(_))));
        assert!(matches!(decide_mc(TheoryId::Succ0, &mut p, &s, 100), Err(DecideError::SignatureMismatch { .. })));
        let mut q = Presentation::from_spec("succ0").unwrap();
        assert!(matches!(
            decide_mc(TheoryId::Succ0, &mut q, &parse("S(x0) = #1").unwrap(), 100),
            Err(DecideError::NotASentence(_))
        ));
    }

    fn nonuniform(spec: &str, s: &str) -> DecisionTrace {
        let mut p = Presentation::from_spec(spec).unwrap();
        decide_succ_nonuniform(&mut p, &parse(s).unwrap(), 1_000_000, DEFAULT_COMMIT).unwrap()
    }

    #[test]
    fn nonuniform_successor() {
        let t = nonuniform("succ:shift=0", "exists x. S(x) = #1");
        assert_eq!(t.verdict, Verdict::True);
        let t = nonuniform("succ:shift=0", "exists x. S(x) = #0");
        assert_eq!((t.verdict, t.zero), (Verdict::False, Some(0)));
        // In the shifted copy the element #0 is 1, which has no predecessor.
        let t = nonuniform("succ:shift=1", "exists x. S(x) = #0");
        assert_eq!(t.verdict, Verdict::False);
        let t = nonuniform("succ:shift=1", "exists x. S(x) = #1");
        assert_eq!(t.verdict, Verdict::True);
    }

    #[test]
    fn nonuniform_locates_moved_zero() {
        let t = nonuniform("pullback:succ:shift=0:0>7,7>0", "exists x. S(x) = #7");
        assert_eq!((t.verdict, t.zero), (Verdict::False, Some(7)));
        let t = nonuniform("pullback:succ:shift=0:0>7,7>0", "exists x. S(x) = #0");
        assert_eq!(t.verdict, Verdict::True);
    }

    #[test]
    fn nonuniform_skips_location_when_not_needed() {
        let t = nonuniform("succ:shift=0", "forall x. exists y. S(x, y)");
        assert_eq!((t.verdict, t.zero), (Verdict::True, None));
    }

    #[test]
    fn local_search_uniform() {
        let c = Presentation::from_spec("succ0").unwrap();
        let phi_e = Functional { id: 0, name: "uniform:succ0".into(), program: Program::Uniform(TheoryId::Succ0) };
        let p = Condition::new(vec![]).unwrap();
        for (k, want) in [(3, true), (0, false)] {
            let s = parse(&format!("exists y. S(y) = #{k}")).unwrap();
            let r = local_search_decide(&phi_e, &c, &p, &s, &[k], 100_000, 10_000).unwrap();
            let e = r.evidence.unwrap();
            assert_eq!(e.bit, want);
            assert_eq!(e.b[k], k);
        }
    }

    #[test]
    fn local_search_identity_first() {
        let c = Presentation::from_spec("succ0").unwrap();
        let phi_e = Functional { id: 0, name: "uniform:succ0".into(), program: Program::Uniform(TheoryId::Succ0) };
        let p = Condition::new(vec![]).unwrap();
        let s = parse("c0 = c0").unwrap();
        let e = local_search_decide(&phi_e, &c, &p, &s, &[], 100_000, 10_000).unwrap().evidence.unwrap();
        assert_eq!((e.n, e.b.clone(), e.bit), (0, vec![0], true));
        assert_eq!(e.sigma, c.initial_segment(0).unwrap().to_string());
    }

    #[test]
    fn local_search_diverging() {
        let c = Presentation::from_spec("succ0").unwrap();
        let phi_e = Functional { id: 0, name: "always-diverge".into(), program: Program::AlwaysDiverge };
        let p = Condition::new(vec![]).unwrap();
        let r = local_search_decide(&phi_e, &c, &p, &parse("c0 = c0").unwrap(), &[], 5_000, 100).unwrap();
        assert!(r.evidence.is_none());
        assert!(r.tuples > 0);
    }
}
