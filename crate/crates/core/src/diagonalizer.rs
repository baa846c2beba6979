//! A finite-injury construction of a copy `B = f⁻¹(A)` that defeats a finite
//! list of candidate deciders `Φ_e`, together with the disagreement search
//! the construction is built from.
//!
//! Conditions are finite injective strings `p` with `p(i)` the element of `A`
//! that `f` assigns to `i`. Requirements, in priority order
//! `L_0, S_0, R_0, L_1, …`:
//! - `L_e` extends `p` to the `≺`-least of the first `s` extensions on which
//!   `Φ_e` converges on input `e` within `s` steps;
//! - `S_y` puts `y` into the range of `p`;
//! - `R_e` looks for an extension `q` and a sentence `α(b⃗)` on which
//!   `Φ_e^{Δ(q⁻¹(A))}` converges to the wrong truth value, and otherwise
//!   moves `p` away from every extension where `Φ_e` converged.

use std::collections::HashMap;

use serde::Serialize;

use crate::coding::{Code, Coding};
use crate::functional::Functional;
use crate::presentation::{Condition, Oracle, OracleError, Permutation, Presentation};
use crate::semantics::truth;
use crate::sentence_code::{SentenceCode, SentenceCoding};
use crate::signature::Signature;
use crate::syntax::{Formula, Term};

/// Sort key of `≺`: weight `max(len, 1 + max entry)`, then length, then
/// lexicographic. Each weight class is finite, so `≺` has order type ω.
pub fn order_key(q: &[usize]) -> (usize, usize, Vec<usize>) {
    (weight(q), q.len(), q.to_vec())
}

fn weight(q: &[usize]) -> usize {
    q.iter().map(|&x| x + 1).max().unwrap_or(0).max(q.len())
}

/// The first `count` injective strings extending `p` (including `p`), in
/// `≺` order.
pub fn extensions(p: &[usize], count: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if count == 0 {
        return out;
    }
    for w in weight(p).. {
        let mut taken = vec![false; w];
        for &x in p {
            taken[x] = true;
        }
        let free = taken.iter().filter(|t| !**t).count();
        for len in p.len()..=(p.len() + free) {
            let mut q = p.to_vec();
            let top = p.len() == w || (w > 0 && taken[w - 1]);
            tails(&mut q, len, w, &mut taken, top, count, &mut out);
            if out.len() >= count {
                return out;
            }
        }
    }
    unreachable!()
}

/// Injective tails of `q` up to length `len` over values below `w`, lex;
/// the result has weight exactly `w` (length `w` or containing `w - 1`).
#[allow(clippy::too_many_arguments)]
fn tails(
    q: &mut Vec<usize>,
    len: usize,
    w: usize,
    taken: &mut [bool],
    top: bool,
    count: usize,
    out: &mut Vec<Vec<usize>>,
) {
    if out.len() >= count {
        return;
    }
    if q.len() == len {
        if top || len == w {
            out.push(q.clone());
        }
        return;
    }
    if q.len() + 1 == len && !top && len != w {
        if w > 0 && !taken[w - 1] {
            q.push(w - 1);
            out.push(q.clone());
            q.pop();
        }
        return;
    }
    for v in 0..w {
        if taken[v] {
            continue;
        }
        taken[v] = true;
        q.push(v);
        tails(q, len, w, taken, top || v + 1 == w, count, out);
        q.pop();
        taken[v] = false;
        if out.len() >= count {
            return;
        }
    }
}

/// `Δ(q⁻¹(A))`: the atomic diagram of the finite structure on `0..|q|-1`
/// pulled back from `A` along `q`, computed on demand. Records each query
/// with its answer, `None` for a refusal.
pub struct PulledBack<'a> {
    a: &'a Presentation,
    q: &'a [usize],
    coding: &'a Coding,
    len: u64,
    events: Vec<(Code, Option<bool>)>,
}

impl<'a> PulledBack<'a> {
    pub fn new(a: &'a Presentation, q: &'a [usize]) -> PulledBack<'a> {
        let coding = a.coding();
        let len = if q.is_empty() { 0 } else { coding.block_length(q.len() - 1) };
        PulledBack { a, q, coding, len, events: Vec::new() }
    }
}

impl Oracle for PulledBack<'_> {
    fn signature(&self) -> &Signature {
        self.a.signature()
    }

    fn query(&mut self, code: Code) -> Result<bool, OracleError> {
        if code >= self.len {
            self.events.push((code, None));
            return Err(OracleError::BeyondPrefix { code, len: self.len });
        }
        let b = self.a.holds(&self.coding.decode(code).map(|i| self.q[i]))?;
        self.events.push((code, Some(b)));
        Ok(b)
    }
}

/// Replays of deterministic runs, as one decision trie per `(e, input)`:
/// each node is the next code the run queries, branching on the answer
/// (or refusal); leaves are outputs. A run on `q` is replayed for any `q'`
/// that answers along the same path.
struct Memo {
    roots: HashMap<(usize, SentenceCode), usize>,
    nodes: Vec<Node>,
}

enum Node {
    Query { code: Code, kids: [Option<usize>; 3] },
    Leaf(Option<bool>),
}

fn slot(answer: Option<bool>) -> usize {
    match answer {
        Some(false) => 0,
        Some(true) => 1,
        None => 2,
    }
}

impl Memo {
    /// The run's output on `q`, and whether the run stayed below code
    /// `bound` (so any string agreeing with `q` there gives the same output).
    #[allow(clippy::too_many_arguments)]
    fn run(
        &mut self,
        a: &Presentation,
        phi_e: &Functional,
        q: &[usize],
        code: SentenceCode,
        input: &Formula,
        cap: u64,
        bound: Code,
    ) -> Result<(Option<bool>, bool), OracleError> {
        let coding = a.coding();
        let len = if q.is_empty() { 0 } else { coding.block_length(q.len() - 1) };
        let mut local = true;
        let mut at = self.roots.get(&(phi_e.id, code)).copied();
        while let Some(n) = at {
            match &self.nodes[n] {
                Node::Leaf(bit) => return Ok((*bit, local)),
                Node::Query { code: c, kids } => {
                    let answer = if *c < len { Some(a.holds(&coding.decode(*c).map(|i| q[i]))?) } else { None };
                    local &= *c < bound;
                    at = kids[slot(answer)];
                }
            }
        }
        let mut oracle = PulledBack::new(a, q);
        let bit = phi_e.program.run(&mut oracle, input, cap).bit();
        self.insert((phi_e.id, code), &oracle.events, bit);
        let local = oracle.events.iter().all(|&(c, _)| c < bound);
        Ok((bit, local))
    }

    fn insert(&mut self, key: (usize, SentenceCode), events: &[(Code, Option<bool>)], bit: Option<bool>) {
        let mut parent = None;
        let mut at = self.roots.get(&key).copied();
        for &(c, answer) in events {
            let n = match at {
                Some(n) => n,
                None => self.push(key, parent, Node::Query { code: c, kids: [None; 3] }),
            };
            parent = Some((n, slot(answer)));
            at = match &self.nodes[n] {
                Node::Query { kids, .. } => kids[slot(answer)],
                Node::Leaf(_) => return,
            };
        }
        if at.is_none() {
            self.push(key, parent, Node::Leaf(bit));
        }
    }

    fn push(&mut self, key: (usize, SentenceCode), parent: Option<(usize, usize)>, node: Node) -> usize {
        self.nodes.push(node);
        let n = self.nodes.len() - 1;
        match parent {
            None => {
                self.roots.insert(key, n);
            }
            Some((p, s)) => {
                if let Node::Query { kids, .. } = &mut self.nodes[p] {
                    kids[s] = Some(n);
                }
            }
        }
        n
    }
}

/// A finite list of sentence codes with their decoded sentences.
struct Sentences {
    coding: SentenceCoding,
    list: Vec<(Formula, Option<usize>)>,
}

impl Sentences {
    fn new(sig: &Signature) -> Sentences {
        Sentences { coding: SentenceCoding::new(sig), list: Vec::new() }
    }

    /// Sentence `c`, and the largest domain constant it mentions.
    fn get(&mut self, c: usize) -> &(Formula, Option<usize>) {
        while self.list.len() <= c {
            let f = self.coding.decode(self.list.len() as SentenceCode);
            let top = f.domain_constants().into_iter().next_back();
            self.list.push((f, top));
        }
        &self.list[c]
    }

    fn fits(&mut self, c: usize, q: &[usize]) -> bool {
        self.get(c).1.is_none_or(|d| d < q.len())
    }
}

fn translate(f: &Formula, q: &[usize]) -> Formula {
    f.map_doms(&|i| Term::Dom(q[i]))
}

fn cantor(i: usize, j: usize) -> usize {
    (i + j) * (i + j + 1) / 2 + j
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type")]
pub enum DefeatEvidence {
    /// `Φ_e^{Δ(q⁻¹(A))}(⌜α(b⃗)⌝)↓ = output` while `A ⊨ α(q(b⃗))` has value `truth`.
    Disagreement {
        e: usize,
        q: Vec<usize>,
        code: SentenceCode,
        sentence: String,
        output: bool,
        truth: bool,
        found_at: usize,
    },
    /// No inspected extension of `q` makes `Φ_e` converge on `input` within
    /// `budget` steps; relative to that budget.
    Case3Candidate {
        e: usize,
        q: Vec<usize>,
        input: SentenceCode,
        sentence: String,
        budget: u64,
        extensions: usize,
    },
    Unresolved {
        e: usize,
        budget: u64,
        stages: usize,
    },
}

impl DefeatEvidence {
    pub fn e(&self) -> usize {
        match self {
            DefeatEvidence::Disagreement { e, .. }
            | DefeatEvidence::Case3Candidate { e, .. }
            | DefeatEvidence::Unresolved { e, .. } => *e,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            DefeatEvidence::Disagreement { .. } => "disagreement",
            DefeatEvidence::Case3Candidate { .. } => "case3",
            DefeatEvidence::Unresolved { .. } => "unresolved",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DiagonalizeError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Semantics(#[from] crate::semantics::SemanticsError),
}

struct Searcher<'a> {
    a: &'a Presentation,
    run_cap: u64,
    memo: Memo,
    sentences: Sentences,
    truths: HashMap<Formula, bool>,
}

enum ROutcome {
    Disagreement { q: Vec<usize>, code: usize, output: bool, truth: bool },
    Silent { convergent: Vec<Vec<usize>> },
}

impl<'a> Searcher<'a> {
    fn new(a: &'a Presentation, run_cap: u64) -> Searcher<'a> {
        Searcher {
            a,
            run_cap,
            memo: Memo { roots: HashMap::new(), nodes: Vec::new() },
            sentences: Sentences::new(a.signature()),
            truths: HashMap::new(),
        }
    }

    fn truth(&mut self, code: usize, q: &[usize]) -> Result<bool, DiagonalizeError> {
        let f = translate(&self.sentences.get(code).0, q);
        if let Some(&t) = self.truths.get(&f) {
            return Ok(t);
        }
        let t = truth(self.a, &f)?;
        self.truths.insert(f, t);
        Ok(t)
    }

    fn output(&mut self, phi_e: &Functional, q: &[usize], code: usize) -> Result<Option<bool>, DiagonalizeError> {
        Ok(self.output_within(phi_e, q, code, 0)?.0)
    }

    fn output_within(
        &mut self,
        phi_e: &Functional,
        q: &[usize],
        code: usize,
        bound: Code,
    ) -> Result<(Option<bool>, bool), DiagonalizeError> {
        let input = self.sentences.get(code).0.clone();
        Ok(self.memo.run(self.a, phi_e, q, code as SentenceCode, &input, self.run_cap, bound)?)
    }

    /// Inspect the first `count` extensions of `p` and sentence codes up to
    /// `max_code` for the least disagreement pair.
    fn search(
        &mut self,
        phi_e: &Functional,
        p: &[usize],
        count: usize,
        max_code: usize,
    ) -> Result<ROutcome, DiagonalizeError> {
        let exts = extensions(p, count);
        let bound = if p.is_empty() { 0 } else { self.a.coding().block_length(p.len() - 1) };
        let mut best: Option<(usize, usize, usize, bool, bool)> = None;
        let mut converged = vec![false; exts.len()];
        for c in 0..=max_code {
            // Every extension agrees with p below `bound`, so a run on p that
            // stays there decides all of them at once, with the same truth.
            let mut shared = None;
            if !exts.is_empty() && self.sentences.fits(c, p) {
                let (bit, local) = self.output_within(phi_e, p, c, bound)?;
                if local {
                    let t = match bit {
                        Some(b) => Some((b, self.truth(c, p)?)),
                        None => None,
                    };
                    shared = Some(t);
                }
            }
            for (qi, q) in exts.iter().enumerate() {
                if !self.sentences.fits(c, q) {
                    continue;
                }
                let (bit, t) = match shared {
                    Some(None) => continue,
                    Some(Some((b, t))) => (b, Some(t)),
                    None => match self.output(phi_e, q, c)? {
                        Some(b) => (b, None),
                        None => continue,
                    },
                };
                converged[qi] = true;
                if best.is_some_and(|b| b.0 <= cantor(qi, c)) {
                    continue;
                }
                let t = match t {
                    Some(t) => t,
                    None => self.truth(c, q)?,
                };
                if bit != t {
                    best = Some((cantor(qi, c), qi, c, bit, t));
                }
            }
        }
        Ok(match best {
            Some((_, qi, code, output, truth)) => ROutcome::Disagreement { q: exts[qi].clone(), code, output, truth },
            None => ROutcome::Silent {
                convergent: exts.into_iter().zip(converged).filter(|(_, c)| *c).map(|(q, _)| q).collect(),
            },
        })
    }
}

/// The `≺`-least extension of `p` that no string in `avoid` extends.
fn escape(p: &[usize], avoid: &[Vec<usize>]) -> Vec<usize> {
    let mut n = avoid.len() + 1;
    loop {
        if let Some(x) = extensions(p, n).into_iter().find(|x| !avoid.iter().any(|q| q.starts_with(x))) {
            return x;
        }
        n *= 2;
    }
}

/// The disagreement search below `p`, inspecting `budget` extensions and
/// sentence codes up to `budget`; failing that, a Case-3 candidate: the
/// `≺`-least inspected `q` and least input none of whose inspected
/// extensions converge.
pub fn case_search(
    a: &Presentation,
    p: &[usize],
    phi_e: &Functional,
    budget: usize,
    run_cap: u64,
) -> Result<DefeatEvidence, DiagonalizeError> {
    let mut searcher = Searcher::new(a, run_cap);
    match searcher.search(phi_e, p, budget, budget)? {
        ROutcome::Disagreement { q, code, output, truth } => Ok(DefeatEvidence::Disagreement {
            e: phi_e.id,
            sentence: searcher.sentences.get(code).0.to_string(),
            q,
            code: code as SentenceCode,
            output,
            truth,
            found_at: 0,
        }),
        ROutcome::Silent { .. } => {
            let exts = extensions(p, budget);
            for q in &exts {
                for c in 0..=budget {
                    if !searcher.sentences.fits(c, q) {
                        continue;
                    }
                    let mut any = false;
                    for x in exts.iter().filter(|x| x.starts_with(q)) {
                        if searcher.output(phi_e, x, c)?.is_some() {
                            any = true;
                            break;
                        }
                    }
                    if !any {
                        return Ok(DefeatEvidence::Case3Candidate {
                            e: phi_e.id,
                            q: q.clone(),
                            input: c as SentenceCode,
                            sentence: searcher.sentences.get(c).0.to_string(),
                            budget: run_cap,
                            extensions: budget,
                        });
                    }
                }
            }
            Ok(DefeatEvidence::Unresolved { e: phi_e.id, budget: run_cap, stages: 0 })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Kind {
    L,
    S,
    R,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RequirementRecord {
    pub kind: Kind,
    pub e: usize,
    pub status: String,
    /// Length of the string chosen at the last stage, a prefix of `p_final`.
    pub length: usize,
    /// The last stage at which the chosen string changed.
    pub stabilized_at: usize,
    pub actions: usize,
    pub injuries: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Injury {
    pub stage: usize,
    pub kind: Kind,
    pub e: usize,
    /// The highest-priority requirement whose string changed this stage.
    pub cause: (Kind, usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstructionRun {
    pub base: String,
    pub stages: usize,
    /// Step cap on each run of a functional during `R_e` searches.
    pub run_cap: u64,
    pub functionals: Vec<Functional>,
    /// `p_S` as `(i, p(i))` pairs.
    pub p_final: Vec<(usize, usize)>,
    /// Atomic diagram of `B` on its first `b_elements` elements.
    pub b_prefix: String,
    pub b_elements: usize,
    pub requirements: Vec<RequirementRecord>,
    pub evidence: Vec<DefeatEvidence>,
    pub injuries: Vec<Injury>,
    /// `y ∈ range(p_s)` and `|p_s| ≥ s` at every stage `s > y`.
    pub surjectivity: bool,
    /// Every `L_e` that converged at one stage still converged at the next
    /// stage unless injured.
    pub lowness_preserved: bool,
    /// Each requirement's string extends the next-higher one's at every stage.
    pub priority_chain: bool,
}

impl ConstructionRun {
    pub fn f_prefix(&self) -> Vec<usize> {
        self.p_final.iter().map(|&(_, v)| v).collect()
    }
}

#[derive(Clone)]
struct ReqState {
    kind: Kind,
    e: usize,
    string: Option<Vec<usize>>,
    input: Option<Vec<usize>>,
    stabilized_at: usize,
    actions: usize,
    injuries: usize,
    status: String,
    converged: bool,
}

fn requirement_order(stage_s: usize, functionals: usize) -> Vec<(Kind, usize)> {
    let mut out = Vec::new();
    for i in 0..=stage_s {
        if i < functionals {
            out.push((Kind::L, i));
        }
        out.push((Kind::S, i));
        if i < functionals {
            out.push((Kind::R, i));
        }
    }
    out
}

const B_ELEMENTS: usize = 8;

/// Run `stages` stages of the construction against `functionals`, numbered
/// by position.
pub fn run_construction(
    a: &Presentation,
    functionals: &[Functional],
    stages: usize,
    run_cap: u64,
) -> Result<ConstructionRun, DiagonalizeError> {
    let mut searcher = Searcher::new(a, run_cap);
    let mut states: Vec<ReqState> = Vec::new();
    let mut injuries = Vec::new();
    let mut surjectivity = true;
    let mut lowness_preserved = true;
    let mut priority_chain = true;
    let mut r_outcomes: HashMap<usize, (DefeatEvidence, Vec<usize>)> = HashMap::new();
    let mut p_final = Vec::new();
    for s in 0..stages {
        let stage = s + 1;
        let mut p: Vec<usize> = Vec::new();
        let mut first_change: Option<(Kind, usize)> = None;
        for (k, (kind, e)) in requirement_order(s, functionals.len()).into_iter().enumerate() {
            if states.len() <= k {
                states.push(ReqState {
                    kind,
                    e,
                    string: None,
                    input: None,
                    stabilized_at: stage,
                    actions: 0,
                    injuries: 0,
                    status: String::new(),
                    converged: false,
                });
            }
            let injured = states[k].input.as_ref().is_some_and(|i| *i != p);
            let input = p.clone();
            match kind {
                Kind::L => {
                    let phi_e = &functionals[e];
                    let sentence = searcher.sentences.get(e).0.clone();
                    let mut converged = false;
                    for q in extensions(&p, s) {
                        let mut oracle = PulledBack::new(a, &q);
                        if phi_e.program.run(&mut oracle, &sentence, s as u64).bit().is_some() {
                            p = q;
                            converged = true;
                            break;
                        }
                    }
                    if states[k].converged && !converged && !injured {
                        lowness_preserved = false;
                    }
                    states[k].converged = converged;
                    states[k].status = if converged { "converged" } else { "waiting" }.into();
                }
                Kind::S => {
                    if !p.contains(&e) {
                        p.push(e);
                    }
                    states[k].status = "satisfied".into();
                }
                Kind::R => {
                    let phi_e = &functionals[e];
                    match searcher.search(phi_e, &p, s, s)? {
                        ROutcome::Disagreement { q, code, output, truth } => {
                            let found_at = match r_outcomes.get(&e) {
                                Some((DefeatEvidence::Disagreement { q: q0, code: c0, found_at, .. }, _))
                                    if *q0 == q && *c0 == code as SentenceCode =>
                                {
                                    *found_at
                                }
                                _ => stage,
                            };
                            let ev = DefeatEvidence::Disagreement {
                                e,
                                q: q.clone(),
                                code: code as SentenceCode,
                                sentence: searcher.sentences.get(code).0.to_string(),
                                output,
                                truth,
                                found_at,
                            };
                            r_outcomes.insert(e, (ev, q.clone()));
                            p = q;
                            states[k].status = "disagreement".into();
                        }
                        ROutcome::Silent { convergent } if convergent.is_empty() => {
                            let input_code = (0..=s).find(|&c| searcher.sentences.fits(c, &p)).unwrap_or(0);
                            let ev = DefeatEvidence::Case3Candidate {
                                e,
                                q: p.clone(),
                                input: input_code as SentenceCode,
                                sentence: searcher.sentences.get(input_code).0.to_string(),
                                budget: run_cap,
                                extensions: s,
                            };
                            r_outcomes.insert(e, (ev, p.clone()));
                            states[k].status = "case3".into();
                        }
                        ROutcome::Silent { convergent } => {
                            p = escape(&p, &convergent);
                            r_outcomes
                                .insert(e, (DefeatEvidence::Unresolved { e, budget: run_cap, stages }, p.clone()));
                            states[k].status = "unresolved".into();
                        }
                    }
                }
            }
            if !p.starts_with(&input) {
                priority_chain = false;
            }
            let st = &mut states[k];
            if st.string.as_ref() != Some(&p) {
                if st.string.is_some() {
                    if injured {
                        st.injuries += 1;
                        injuries.push(Injury { stage, kind, e, cause: first_change.unwrap_or((kind, e)) });
                    } else {
                        st.actions += 1;
                    }
                    first_change.get_or_insert((kind, e));
                }
                st.string = Some(p.clone());
                st.stabilized_at = stage;
            }
            st.input = Some(input);
        }
        if p.len() < stage || (0..stage).any(|y| !p.contains(&y)) {
            surjectivity = false;
        }
        p_final = p;
    }
    let b_elements = p_final.len().min(B_ELEMENTS);
    let b_prefix = if b_elements == 0 {
        String::new()
    } else {
        let q = &p_final[..b_elements];
        let mut oracle = PulledBack::new(a, q);
        let len = a.coding().block_length(b_elements - 1);
        (0..len).map(|c| oracle.query(c).map(|b| if b { '1' } else { '0' })).collect::<Result<String, _>>()?
    };
    let mut evidence = Vec::new();
    for f in functionals {
        let ev = match r_outcomes.remove(&f.id) {
            Some((ev, _)) => ev,
            None => DefeatEvidence::Unresolved { e: f.id, budget: run_cap, stages },
        };
        evidence.push(ev);
    }
    let requirements = states
        .into_iter()
        .map(|st| RequirementRecord {
            kind: st.kind,
            e: st.e,
            status: st.status,
            length: st.string.map_or(0, |s| s.len()),
            stabilized_at: st.stabilized_at,
            actions: st.actions,
            injuries: st.injuries,
        })
        .collect();
    Ok(ConstructionRun {
        base: a.spec(),
        stages,
        run_cap,
        functionals: functionals.to_vec(),
        p_final: p_final.iter().copied().enumerate().collect(),
        b_prefix,
        b_elements,
        requirements,
        evidence,
        injuries,
        surjectivity,
        lowness_preserved,
        priority_chain,
    })
}

/// Replay evidence against `A` and the `f`-prefix of the constructed copy.
/// Case-3 certificates are rechecked at twice their step budget.
pub fn verify_defeat(
    a: &Presentation,
    f_prefix: &[usize],
    phi_e: &Functional,
    evidence: &DefeatEvidence,
) -> Result<bool, DiagonalizeError> {
    if evidence.e() != phi_e.id {
        return Ok(false);
    }
    let coding = SentenceCoding::new(a.signature());
    match evidence {
        DefeatEvidence::Disagreement { q, code, output, truth: t, .. } => {
            if !f_prefix.starts_with(q) || Condition::new(q.clone()).is_err() {
                return Ok(false);
            }
            let sentence = coding.decode(*code);
            if sentence.domain_constants().into_iter().any(|d| d >= q.len()) {
                return Ok(false);
            }
            let mut oracle = PulledBack::new(a, q);
            let replay = phi_e.program.run(&mut oracle, &sentence, u64::MAX).bit();
            let in_a = truth(a, &translate(&sentence, q))?;
            let b = Presentation::pullback(a, Permutation::Staged(Condition(f_prefix.to_vec())));
            let in_b = truth(&b, &sentence)?;
            Ok(replay == Some(*output) && in_a == *t && in_b == *t && output != t)
        }
        DefeatEvidence::Case3Candidate { q, input, budget, extensions: count, .. } => {
            if !f_prefix.starts_with(q) && !q.starts_with(f_prefix) {
                return Ok(false);
            }
            let sentence = coding.decode(*input);
            for x in extensions(q, *count) {
                let mut oracle = PulledBack::new(a, &x);
                if phi_e.program.run(&mut oracle, &sentence, budget.saturating_mul(2)).bit().is_some() {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        DefeatEvidence::Unresolved { .. } => Ok(true),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::{functionals, Program};

    #[test]
    fn order_has_finite_classes() {
        let exts = extensions(&[], 10);
        assert_eq!(exts[0], Vec::<usize>::new());
        assert_eq!(exts[1], vec![0]);
        assert_eq!(exts[2], vec![1]);
        assert_eq!(exts[3], vec![0, 1]);
        assert_eq!(exts[4], vec![1, 0]);
        for w in exts.windows(2) {
            assert!(order_key(&w[0]) < order_key(&w[1]));
        }
        let exts = extensions(&[2, 0], 20);
        assert!(exts.iter().all(|q| q.starts_with(&[2, 0])));
        assert_eq!(exts[0], vec![2, 0]);
    }

    #[test]
    fn pulled_back_matches_staged_pullback() {
        let a = Presentation::from_spec("succ:shift=0").unwrap();
        let q = vec![3, 4, 0];
        let mut o = PulledBack::new(&a, &q);
        let staged = crate::presentation::PrefixOracle::pulled_back(&a, &Condition(q.clone())).unwrap();
        let mut staged = staged;
        let len = a.coding().block_length(2);
        for c in 0..len {
            assert_eq!(o.query(c).unwrap(), staged.query(c).unwrap());
        }
        assert!(o.query(len).is_err());
    }

    #[test]
    fn zero_anchored_defeated_below_empty_condition() {
        let a = Presentation::from_spec("succ:shift=0").unwrap();
        let fs = functionals(&["zero-anchored"]).unwrap();
        let ev = case_search(&a, &[], &fs[0], 400, 10_000).unwrap();
        let DefeatEvidence::Disagreement { ref q, .. } = ev else { panic!("{ev:?}") };
        assert_ne!(q[0], 0);
        assert!(verify_defeat(&a, q, &fs[0], &ev).unwrap());
        let mut tampered = ev.clone();
        if let DefeatEvidence::Disagreement { output, .. } = &mut tampered {
            *output = !*output;
        }
        assert!(!verify_defeat(&a, q, &fs[0], &tampered).unwrap());
    }

    #[test]
    fn diverging_functional_gives_case3() {
        let a = Presentation::from_spec("succ:shift=0").unwrap();
        let f = Functional { id: 0, name: "always-diverge".into(), program: Program::AlwaysDiverge };
        let ev = case_search(&a, &[], &f, 30, 1_000).unwrap();
        assert!(matches!(ev, DefeatEvidence::Case3Candidate { ref q, input: 0, .. } if q.is_empty()), "{ev:?}");
        assert!(verify_defeat(&a, &[], &f, &ev).unwrap());
    }

    #[test]
    fn construction_without_functionals() {
        let a = Presentation::from_spec("succ:shift=0").unwrap();
        let run = run_construction(&a, &[], 40, 1_000).unwrap();
        assert!(run.surjectivity && run.priority_chain);
        assert!(run.p_final.len() >= 40);
        assert!(run.injuries.is_empty());
    }

    #[test]
    fn construction_small() {
        let a = Presentation::from_spec("succ:shift=0").unwrap();
        let fs = functionals(&["zero-anchored", "always-diverge", "nonuniform-succ"]).unwrap();
        let run = run_construction(&a, &fs, 40, 5_000).unwrap();
        assert!(run.surjectivity && run.priority_chain && run.lowness_preserved);
        let f = run.f_prefix();
        for (phi, ev) in fs.iter().zip(&run.evidence) {
            assert!(verify_defeat(&a, &f, phi, ev).unwrap(), "{ev:?}");
        }
        assert_eq!(run.evidence[1].kind(), "case3");
    }
}
