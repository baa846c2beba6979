//! Computable infinitary Σ₁ equivalents extracted from a uniform decider.
//!
//! `H_α` is the set of diagram strings `σ` on which `Γ^σ(⌜α(c_0..c_n)⌝)`
//! converges to 1. Since `Γ` is deterministic, its runs on all strings form
//! a tree that branches only at queried codes; every converging leaf is a
//! cylinder of strings all in `H_α`, and the disjunction of `γ_σ` over the
//! strings of a cylinder (at its least block length) is the conjunction of
//! the queried literals with pairwise distinctness. The enumeration records
//! those cylinders.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::coding::{Code, Coding, GroundAtom, Literal};
use crate::functional::{Outcome, Program};
use crate::presentation::{aligning_permutation, Oracle, OracleError, Presentation, PresentationError};
use crate::semantics::{truth, SemanticsError};
use crate::signature::Signature;
use crate::syntax::{free_var, Formula, Term};
use crate::transform::expand_equality_cases;

/// Upper bound on computation-tree nodes explored per enumeration.
pub const DEFAULT_MAX_NODES: usize = 20_000;

/// Upper bound on witness-search nodes per disjunct; exhausting it leaves the
/// disjunct unconfirmed, which is sound because evaluation never reports
/// falsity.
pub const WITNESS_NODES: usize = 50_000;

/// Answers queries from a partial assignment of codes.
struct PartialOracle {
    signature: Signature,
    coding: Coding,
    assigned: BTreeMap<Code, bool>,
    prune_equality: bool,
    /// The first query the assignment could not answer.
    missing: Option<Code>,
}

impl Oracle for PartialOracle {
    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn query(&mut self, code: Code) -> Result<bool, OracleError> {
        if let Some(&b) = self.assigned.get(&code) {
            return Ok(b);
        }
        if self.prune_equality {
            if let GroundAtom::Eq(i, j) = self.coding.decode(code) {
                return Ok(i == j);
            }
        }
        self.missing.get_or_insert(code);
        Err(OracleError::Unassigned { code })
    }
}

/// A cylinder of `H_α`: every string of length at least `l_(m_sigma)` that
/// agrees with `assigned` makes `Γ` converge to 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Found {
    #[serde(skip)]
    pub assigned: BTreeMap<Code, bool>,
    /// The least such string with unqueried bits shown as `*`.
    pub sigma_bits: String,
    pub m_sigma: usize,
    #[serde(rename = "use")]
    pub use_: u64,
}

impl Found {
    /// Literals fixed by the cylinder, over elements `0..=m_sigma`.
    pub fn literals(&self, coding: &Coding) -> Vec<(GroundAtom, bool)> {
        self.assigned.iter().map(|(&c, &b)| (coding.decode(c), b)).collect()
    }

    /// `γ_σ(c_0..c_m)` with the constants as domain constants `#i`.
    pub fn gamma(&self, sig: &Signature) -> Formula {
        let coding = Coding::new(sig);
        let mut lits: Vec<Formula> = self
            .literals(&coding)
            .into_iter()
            .filter(|(a, _)| !matches!(a, GroundAtom::Eq(..)))
            .map(|(a, b)| Literal::new(a, b, sig).to_formula(sig))
            .collect();
        for j in 0..=self.m_sigma {
            for i in 0..j {
                lits.push(Formula::neq(Term::Dom(i), Term::Dom(j)));
            }
        }
        Formula::conj(lits)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HAlphaEnumerator {
    pub program: Program,
    pub alpha: String,
    /// Number of free variables `x0..x(arity-1)`.
    pub arity: usize,
    pub stage: usize,
    pub found: Vec<Found>,
    pub nodes: usize,
    /// Whether the node bound cut the exploration short.
    pub truncated: bool,
    #[serde(skip)]
    signature: Signature,
}

/// The sentence `α(#0..#(arity-1))`.
pub fn instantiate(alpha: &Formula, arity: usize) -> Formula {
    (0..arity).fold(alpha.clone(), |f, i| f.subst(&free_var(i), &Term::Dom(i)))
}

/// Collect the cylinders of `H_α` reachable with `stage` steps per run and
/// queries below `l_stage`.
pub fn enumerate_h_alpha(
    gamma: &Program,
    sig: &Signature,
    alpha: &Formula,
    arity: usize,
    stage: usize,
    prune_equality: bool,
    max_nodes: usize,
) -> HAlphaEnumerator {
    let coding = Coding::new(sig);
    let limit = coding.block_length(stage);
    let input = instantiate(alpha, arity);
    let mut out = HAlphaEnumerator {
        program: gamma.clone(),
        alpha: alpha.to_string(),
        arity,
        stage,
        found: Vec::new(),
        nodes: 0,
        truncated: false,
        signature: sig.clone(),
    };
    // Breadth first, so under the node cap shallow cylinders (few queried
    // bits, few elements) are found before deep ones.
    let mut queue = VecDeque::from([BTreeMap::new()]);
    while let Some(assigned) = queue.pop_front() {
        if out.nodes >= max_nodes {
            out.truncated = true;
            break;
        }
        out.nodes += 1;
        let mut oracle =
            PartialOracle { signature: sig.clone(), coding: coding.clone(), assigned, prune_equality, missing: None };
        let run = gamma.run(&mut oracle, &input, stage as u64);
        let assigned = oracle.assigned;
        match run.outcome {
            Outcome::Converge { bit: true, use_ } => {
                let m_sigma = coding.covering_block(use_.max(1)).max(arity.saturating_sub(1));
                let sigma_bits = sigma_bits(&coding, &assigned, m_sigma, prune_equality);
                out.found.push(Found { assigned, sigma_bits, m_sigma, use_ });
            }
            Outcome::Converge { bit: false, .. } => {}
            Outcome::Diverge { .. } => {
                // Branch on the unassigned query that stopped the run, if it
                // lies within the stage's strings.
                if let Some(code) = oracle.missing.filter(|&c| c < limit) {
                    for bit in [true, false] {
                        let mut next = assigned.clone();
                        next.insert(code, bit);
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    out
}

/// The least string of block length `l_m` agreeing with `assigned`, with
/// equality bits fixed to 0 under pruning and every other bit shown as `*`.
fn sigma_bits(coding: &Coding, assigned: &BTreeMap<Code, bool>, m: usize, prune_equality: bool) -> String {
    let mut bits = vec![b'*'; coding.block_length(m) as usize];
    if prune_equality {
        // Equality atoms open each block.
        let mut start = 0;
        for b in 0..=m {
            let end = coding.block_length(b);
            let mut c = start;
            while c < end && matches!(coding.decode(c), GroundAtom::Eq(..)) {
                bits[c as usize] = b'0';
                c += 1;
            }
            start = end;
        }
    }
    for (&c, &b) in assigned.range(..bits.len() as Code) {
        bits[c as usize] = if b { b'1' } else { b'0' };
    }
    String::from_utf8(bits).expect("ascii")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Disjunct {
    /// `∃y_(n+1)..y_m γ_σ(x⃗, y⃗)`.
    pub formula: String,
    pub sigma_bits: String,
    pub m_sigma: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sigma1Approx {
    pub arity: usize,
    pub stage: usize,
    pub disjuncts: Vec<Disjunct>,
    #[serde(skip)]
    literals: Vec<Vec<(GroundAtom, bool)>>,
}

fn var_for(i: usize, arity: usize) -> Term {
    if i < arity {
        Term::Var(free_var(i))
    } else {
        Term::Var(format!("y{i}"))
    }
}

/// One disjunct per found cylinder, constants `c_i` renamed to `x_i` for
/// `i < arity` and to existentially quantified `y_i` above.
///
/// The text is assembled directly rather than through `Formula`: the
/// distinctness part has quadratically many literals, and a left-nested
/// conjunction that size is slow to build and deep to drop.
pub fn beta_alpha(h: &HAlphaEnumerator) -> Sigma1Approx {
    let coding = Coding::new(&h.signature);
    let sig = &h.signature;
    let arity = h.arity;
    let max_m = h.found.iter().map(|f| f.m_sigma).max().unwrap_or(0);
    // `distinct[..ends[m]]` lists `~v_i = v_j` for all `i < j <= m`.
    let mut distinct = String::new();
    let mut ends = vec![0];
    for j in 1..=max_m {
        for i in 0..j {
            if !distinct.is_empty() {
                distinct.push_str(" & ");
            }
            distinct.push_str(&Formula::neq(var_for(i, arity), var_for(j, arity)).to_string());
        }
        ends.push(distinct.len());
    }
    let literals: Vec<Vec<(GroundAtom, bool)>> = h.found.iter().map(|f| f.literals(&coding)).collect();
    let disjuncts = h
        .found
        .iter()
        .zip(&literals)
        .map(|(f, lits)| {
            let mut parts: Vec<String> = lits
                .iter()
                .filter(|(a, _)| !matches!(a, GroundAtom::Eq(..)))
                .map(|(a, b)| {
                    let lit = Literal::new(a.clone(), *b, sig).to_formula(sig).map_doms(&|i| var_for(i, arity));
                    match lit {
                        Formula::Not(..) | Formula::Rel(..) | Formula::Eq(..) | Formula::True | Formula::False => {
                            lit.to_string()
                        }
                        other => format!("({other})"),
                    }
                })
                .collect();
            if ends[f.m_sigma] > 0 {
                parts.push(distinct[..ends[f.m_sigma]].to_string());
            }
            let mut formula: String = (arity..=f.m_sigma).map(|i| format!("exists y{i}. ")).collect();
            if parts.is_empty() {
                formula.push_str("true");
            } else {
                formula.push_str(&parts.join(" & "));
            }
            Disjunct { formula, sigma_bits: f.sigma_bits.clone(), m_sigma: f.m_sigma }
        })
        .collect();
    Sigma1Approx { arity, stage: h.stage, disjuncts, literals }
}

impl Sigma1Approx {
    /// The disjunction as a formula (empty disjunction is `false`).
    pub fn formula(&self) -> Result<Formula, crate::parser::ParseError> {
        let parts = self.disjuncts.iter().map(|d| crate::parser::parse(&d.formula)).collect::<Result<Vec<_>, _>>()?;
        Ok(Formula::disj(parts))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum Sigma1Verdict {
    True { disjunct: usize, witness: Vec<usize> },
    Unknown,
}

/// Search for a disjunct and witnesses below `witness_bound` satisfying its
/// matrix at `a⃗` in `p`. Never reports falsity.
pub fn eval_sigma1_bounded(
    p: &Presentation,
    approx: &Sigma1Approx,
    a: &[usize],
    witness_bound: usize,
) -> Result<Sigma1Verdict, PresentationError> {
    if a.len() != approx.arity {
        return Err(PresentationError::LengthMismatch { expected: approx.arity, got: a.len() });
    }
    for (k, (lits, d)) in approx.literals.iter().zip(&approx.disjuncts).enumerate() {
        if let Some(vals) = witnesses(p, lits, d.m_sigma, a, witness_bound)? {
            return Ok(Sigma1Verdict::True { disjunct: k, witness: vals[approx.arity..].to_vec() });
        }
    }
    Ok(Sigma1Verdict::Unknown)
}

fn distinct(v: &[usize]) -> bool {
    v.iter().enumerate().all(|(i, x)| !v[..i].contains(x))
}

/// Distinct values below `bound` for elements `0..=m`, extending `a`, that
/// satisfy the non-equality literals. Elements no literal mentions only need
/// distinctness, so the search assigns the mentioned ones and then fills the
/// rest with the least unused values.
fn witnesses(
    p: &Presentation,
    lits: &[(GroundAtom, bool)],
    m: usize,
    a: &[usize],
    bound: usize,
) -> Result<Option<Vec<usize>>, PresentationError> {
    let free = bound - a.iter().filter(|&&x| x < bound).count();
    if !distinct(a) || (m + 1).saturating_sub(a.len()) > free {
        return Ok(None);
    }
    let lits: Vec<&(GroundAtom, bool)> = lits.iter().filter(|(atom, _)| !matches!(atom, GroundAtom::Eq(..))).collect();
    let mut order: Vec<usize> =
        lits.iter().flat_map(|(atom, _)| atom.elements()).filter(|&i| i >= a.len() && i <= m).collect();
    order.sort_unstable();
    order.dedup();
    // Literals grouped by the search depth at which they become checkable.
    let rank = |i: usize| order.iter().position(|&j| j == i).map_or(0, |r| r + 1);
    let mut checks: Vec<Vec<&(GroundAtom, bool)>> = vec![Vec::new(); order.len() + 1];
    for lit in lits {
        checks[lit.0.elements().into_iter().map(rank).max().unwrap_or(0)].push(lit);
    }
    let mut vals: Vec<Option<usize>> = (0..=m.max(a.len().saturating_sub(1))).map(|i| a.get(i).copied()).collect();
    let mut budget = WITNESS_NODES;
    if !search(p, &checks, &order, 0, &mut vals, bound, &mut budget)? {
        return Ok(None);
    }
    let mut next = 0;
    for i in 0..vals.len() {
        if vals[i].is_none() {
            while vals.contains(&Some(next)) {
                next += 1;
            }
            vals[i] = Some(next);
        }
    }
    Ok(Some(vals.into_iter().map(|v| v.expect("filled")).collect()))
}

fn holds_all(
    p: &Presentation,
    lits: &[&(GroundAtom, bool)],
    vals: &[Option<usize>],
) -> Result<bool, PresentationError> {
    for (atom, bit) in lits {
        if p.holds(&atom.map(|i| vals[i].expect("assigned")))? != *bit {
            return Ok(false);
        }
    }
    Ok(true)
}

fn search(
    p: &Presentation,
    checks: &[Vec<&(GroundAtom, bool)>],
    order: &[usize],
    depth: usize,
    vals: &mut Vec<Option<usize>>,
    bound: usize,
    budget: &mut usize,
) -> Result<bool, PresentationError> {
    if *budget == 0 {
        return Ok(false);
    }
    *budget -= 1;
    if !holds_all(p, &checks[depth], vals)? {
        return Ok(false);
    }
    let Some(&i) = order.get(depth) else {
        return Ok(true);
    };
    for v in 0..bound {
        if vals.contains(&Some(v)) {
            continue;
        }
        vals[i] = Some(v);
        if search(p, checks, order, depth + 1, vals, bound, budget)? {
            return Ok(true);
        }
    }
    vals[i] = None;
    Ok(false)
}

#[derive(Debug, Clone, Serialize)]
pub struct PatternApprox {
    pub pattern: Vec<usize>,
    pub display: String,
    pub approx: Sigma1Approx,
    #[serde(skip)]
    reps: Vec<usize>,
}

/// The Σ₁ form of an arbitrary `α(x0..x(arity-1))`: one approximation per
/// equality pattern of the variables.
pub fn sigma1_form(
    gamma: &Program,
    sig: &Signature,
    alpha: &Formula,
    arity: usize,
    stage: usize,
    max_nodes: usize,
) -> Vec<PatternApprox> {
    expand_equality_cases(alpha, arity)
        .into_iter()
        .map(|case| {
            let blocks = case.blocks();
            let h = enumerate_h_alpha(gamma, sig, &case.display, blocks, stage, true, max_nodes);
            PatternApprox {
                pattern: case.pattern.clone(),
                display: case.display.to_string(),
                approx: beta_alpha(&h),
                reps: case.reps.clone(),
            }
        })
        .collect()
}

/// Evaluate the pattern disjunction at `a⃗`: only the pattern realized by
/// `a⃗` can hold, evaluated at the block representatives.
pub fn eval_sigma1_form(
    p: &Presentation,
    form: &[PatternApprox],
    a: &[usize],
    witness_bound: usize,
) -> Result<Sigma1Verdict, PresentationError> {
    for pa in form {
        let fits = (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (pa.pattern[i] == pa.pattern[j])));
        if fits {
            let reps: Vec<usize> = pa.reps.iter().map(|&r| a[r]).collect();
            return eval_sigma1_bounded(p, &pa.approx, &reps, witness_bound);
        }
    }
    Ok(Sigma1Verdict::Unknown)
}

/// Realize a cylinder inside `a`: find distinct `b⃗` below `bound` satisfying
/// its literals, pull `a` back so that `#i` is `b_i`, and return that copy
/// (whose diagram then extends the cylinder) with the truth of `α(#0..)`.
pub fn realize(
    a: &Presentation,
    found: &Found,
    alpha: &Formula,
    arity: usize,
    bound: usize,
) -> Result<Option<(Presentation, bool)>, RealizeError> {
    let lits = found.literals(a.coding());
    let Some(vals) = witnesses(a, &lits, found.m_sigma, &[], bound)? else {
        return Ok(None);
    };
    let copy = Presentation::pullback(a, aligning_permutation(&vals)?);
    let holds = truth(&copy, &instantiate(alpha, arity))?;
    Ok(Some((copy, holds)))
}

#[derive(Debug, thiserror::Error)]
pub enum RealizeError {
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::theory::TheoryId;

    fn succ0() -> (Program, Signature) {
        (Program::Uniform(TheoryId::Succ0), TheoryId::Succ0.signature())
    }

    #[test]
    fn diverging_functional_finds_nothing() {
        let sig = TheoryId::Succ0.signature();
        let h = enumerate_h_alpha(&Program::AlwaysDiverge, &sig, &parse("x0 = x0").unwrap(), 1, 20, true, 1000);
        assert!(h.found.is_empty());
        let approx = beta_alpha(&h);
        assert!(approx.disjuncts.is_empty());
        let p = Presentation::from_spec("succ0").unwrap();
        assert_eq!(eval_sigma1_bounded(&p, &approx, &[0], 10).unwrap(), Sigma1Verdict::Unknown);
    }

    #[test]
    fn non_successor_predicate() {
        let (g, sig) = succ0();
        let alpha = parse("~exists y. S(y, x0)").unwrap();
        let h = enumerate_h_alpha(&g, &sig, &alpha, 1, 30, true, DEFAULT_MAX_NODES);
        assert!(!h.found.is_empty());
        let approx = beta_alpha(&h);
        for spec in ["succ0", "succ0:shift=1"] {
            let p = Presentation::from_spec(spec).unwrap();
            assert!(matches!(eval_sigma1_bounded(&p, &approx, &[0], 10).unwrap(), Sigma1Verdict::True { .. }));
            assert_eq!(eval_sigma1_bounded(&p, &approx, &[3], 10).unwrap(), Sigma1Verdict::Unknown);
        }
        let a = Presentation::from_spec("succ0").unwrap();
        for f in &h.found {
            if let Some((_, holds)) = realize(&a, f, &alpha, 1, 8).unwrap() {
                assert!(holds);
            }
        }
    }

    #[test]
    fn monotone_in_stage() {
        let (g, sig) = succ0();
        let alpha = parse("exists y. S(y, x0) & ~x0 = x1").unwrap();
        let mut prev: Vec<String> = Vec::new();
        for stage in [2, 4, 6, 10, 20, 40] {
            let h = enumerate_h_alpha(&g, &sig, &alpha, 2, stage, true, DEFAULT_MAX_NODES);
            let now: Vec<String> = h.found.iter().map(|f| f.sigma_bits.clone()).collect();
            assert!(prev.iter().all(|s| now.contains(s)), "stage {stage}");
            prev = now;
        }
    }

    #[test]
    fn renaming_adds_quantifiers() {
        let (g, sig) = succ0();
        let alpha = parse("exists y. S(x0, y)").unwrap();
        let h = enumerate_h_alpha(&g, &sig, &alpha, 1, 30, true, DEFAULT_MAX_NODES);
        let approx = beta_alpha(&h);
        for (d, f) in approx.disjuncts.iter().zip(&h.found) {
            let k = f.m_sigma;
            let prefix: String = (1..=k).map(|i| format!("exists y{i}. ")).collect();
            assert!(d.formula.starts_with(&prefix), "{}", d.formula);
            assert!(!d.formula.contains('#'));
            let matrix = f.gamma(&sig).map_doms(&|i| var_for(i, 1));
            let expected = (1..=k).rev().fold(matrix, |b, i| Formula::exists(&format!("y{i}"), b));
            assert_eq!(parse(&d.formula).unwrap(), expected);
        }
    }

    #[test]
    fn pattern_form_matches_truth() {
        let (g, sig) = succ0();
        let alpha = parse("S(x0, x1) | x0 = x1").unwrap();
        let form = sigma1_form(&g, &sig, &alpha, 2, 20, DEFAULT_MAX_NODES);
        assert_eq!(form.len(), 2);
        let p = Presentation::from_spec("succ0").unwrap();
        for a in [[1, 2], [2, 2], [2, 1], [0, 5]] {
            let want = truth(&p, &instantiate(&alpha, 2).map_doms(&|i| Term::Dom(a[i]))).unwrap();
            let got = matches!(eval_sigma1_form(&p, &form, &a, 10).unwrap(), Sigma1Verdict::True { .. });
            assert_eq!(got, want, "{a:?}");
        }
    }
}
