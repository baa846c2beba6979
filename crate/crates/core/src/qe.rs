//! Quantifier elimination for the registered model-complete theories and the
//! universal pairs built from it.
//!
//! `eliminate` returns a quantifier-free formula that may still use function
//! terms and named constants (successor), or an auxiliary predicate `$left`
//! marking the lower half of an adjacent pair (adjacency). `universal_pair`
//! then replaces those by universally quantified variables pinned down by
//! graph relations, giving matrices over the diagram signature.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::syntax::{Formula, Term, LT};
use crate::theory::TheoryId;
use crate::transform::{dnf, nnf, rename_apart, to_prenex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QeError {
    #[error("theory {0} is not model complete")]
    NotModelComplete(String),
    #[error("unsupported construct for {theory}: {what}")]
    Unsupported { theory: String, what: String },
}

const LEFT: &str = "$left";
const PLT: &str = "$plt";
const PEQ: &str = "$peq";
const ADJ: &str = "Adj";

/// Matrices with `φ ↔ ∀y⃗ α` and `¬φ ↔ ∀y⃗ β` in every model of the theory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniversalPair {
    pub alpha: Formula,
    pub beta: Formula,
    pub m: usize,
    /// The universally quantified variables, in search order.
    pub vars: Vec<String>,
}

impl UniversalPair {
    /// `∀y⃗ α`, or `∀y⃗ β` when `dual`.
    pub fn closure(&self, dual: bool) -> Formula {
        let body = if dual { self.beta.clone() } else { self.alpha.clone() };
        self.vars.iter().rev().fold(body, |b, v| Formula::forall(v, b))
    }
}

fn unsupported(th: TheoryId, what: impl Into<String>) -> QeError {
    QeError::Unsupported { theory: th.name().to_string(), what: what.into() }
}

// ---------------------------------------------------------------------------
// Simplifying constructors.

pub fn not_s(f: Formula) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Not(a) => *a,
        other => Formula::not(other),
    }
}

pub fn and_s(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::False, _) | (_, Formula::False) => Formula::False,
        (Formula::True, x) | (x, Formula::True) => x,
        (x, y) if x == y => x,
        (x, y) => Formula::and(x, y),
    }
}

pub fn or_s(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::True, _) | (_, Formula::True) => Formula::True,
        (Formula::False, x) | (x, Formula::False) => x,
        (x, y) if x == y => x,
        (x, y) => Formula::or(x, y),
    }
}

fn conj_s(items: impl IntoIterator<Item = Formula>) -> Formula {
    items.into_iter().fold(Formula::True, and_s)
}

fn disj_s(items: impl IntoIterator<Item = Formula>) -> Formula {
    items.into_iter().fold(Formula::False, or_s)
}

fn lt(a: Term, b: Term) -> Formula {
    Formula::lt(a, b)
}

fn rel2(name: &str, a: Term, b: Term) -> Formula {
    Formula::Rel(name.to_string(), vec![a, b])
}

fn ordered_eq(a: Term, b: Term) -> Formula {
    if a <= b {
        Formula::Eq(a, b)
    } else {
        Formula::Eq(b, a)
    }
}

fn contains(f: &Formula, x: &str) -> bool {
    f.free_vars().contains(x)
}

// ---------------------------------------------------------------------------
// Successor terms.

fn split_succ(t: &Term) -> (Term, usize) {
    match t {
        Term::App(f, args) if f == "S" && args.len() == 1 => {
            let (b, k) = split_succ(&args[0]);
            (b, k + 1)
        }
        other => (other.clone(), 0),
    }
}

fn succ_pow(base: Term, k: usize) -> Term {
    (0..k).fold(base, |t, _| Term::App("S".to_string(), vec![t]))
}

fn c0() -> Term {
    Term::Const("c0".to_string())
}

// ---------------------------------------------------------------------------
// Normalization and atom simplification.

fn normalize(th: TheoryId, f: &Formula) -> Result<Formula, QeError> {
    let sig = th.signature();
    sig.check(f).map_err(|e| unsupported(th, e.to_string()))?;
    let mut err = None;
    let out = f.map_atoms(&mut |a| match a {
        Formula::Rel(r, args) if sig.function_arity(r) == Some(1) && args.len() == 2 => {
            Formula::Eq(Term::App(r.clone(), vec![args[0].clone()]), args[1].clone())
        }
        Formula::Rel(r, args) if sig.has_constant(r) && args.len() == 1 => {
            Formula::Eq(args[0].clone(), Term::Const(r.clone()))
        }
        Formula::Rel(r, _) if r.starts_with('$') => {
            err = Some(unsupported(th, format!("reserved symbol {r}")));
            a.clone()
        }
        other => other.clone(),
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

fn distinct_doms(a: &Term, b: &Term) -> bool {
    matches!((a, b), (Term::Dom(i), Term::Dom(j)) if i != j)
}

fn simplify_atom(th: TheoryId, f: &Formula) -> Formula {
    match (th, f) {
        (TheoryId::Succ0 | TheoryId::Succ, Formula::Eq(a, b)) => {
            let ((ba, ka), (bb, kb)) = (split_succ(a), split_succ(b));
            let k = ka.min(kb);
            let (ka, kb) = (ka - k, kb - k);
            if ba == bb {
                return if ka == kb { Formula::True } else { Formula::False };
            }
            if th == TheoryId::Succ0 && ((ba == c0() && ka == 0 && kb > 0) || (bb == c0() && kb == 0 && ka > 0)) {
                return Formula::False;
            }
            if ka == kb && distinct_doms(&ba, &bb) {
                return Formula::False;
            }
            ordered_eq(succ_pow(ba, ka), succ_pow(bb, kb))
        }
        (_, Formula::Eq(a, b)) => {
            if a == b {
                Formula::True
            } else if distinct_doms(a, b) || (th == TheoryId::DloPP && is_lo_hi(a, b)) {
                Formula::False
            } else {
                ordered_eq(a.clone(), b.clone())
            }
        }
        (_, Formula::Rel(r, args)) if args.len() == 2 && (r == LT || r == ADJ || r == PLT) => {
            let (a, b) = (&args[0], &args[1]);
            if a == b {
                return Formula::False;
            }
            if th == TheoryId::DloPP && r == LT {
                if *b == Term::cst("lo") || *a == Term::cst("hi") {
                    return Formula::False;
                }
                if *a == Term::cst("lo") && *b == Term::cst("hi") {
                    return Formula::True;
                }
            }
            f.clone()
        }
        (_, Formula::Rel(r, args)) if r == PEQ => {
            if args[0] == args[1] {
                Formula::True
            } else {
                let (a, b) = (args[0].clone(), args[1].clone());
                if a <= b {
                    rel2(PEQ, a, b)
                } else {
                    rel2(PEQ, b, a)
                }
            }
        }
        _ => f.clone(),
    }
}

fn is_lo_hi(a: &Term, b: &Term) -> bool {
    let (lo, hi) = (Term::cst("lo"), Term::cst("hi"));
    (*a == lo && *b == hi) || (*a == hi && *b == lo)
}

fn simplify(th: TheoryId, f: &Formula) -> Formula {
    match f {
        Formula::Rel(..) | Formula::Eq(..) => simplify_atom(th, f),
        Formula::True | Formula::False => f.clone(),
        Formula::Not(a) => not_s(simplify(th, a)),
        Formula::And(a, b) => and_s(simplify(th, a), simplify(th, b)),
        Formula::Or(a, b) => or_s(simplify(th, a), simplify(th, b)),
        Formula::Implies(a, b) => or_s(not_s(simplify(th, a)), simplify(th, b)),
        Formula::Forall(v, a) => Formula::forall(v, simplify(th, a)),
        Formula::Exists(v, a) => Formula::exists(v, simplify(th, a)),
    }
}

// ---------------------------------------------------------------------------
// Elimination.

/// Quantifier-free equivalent of `f` modulo the theory.
pub fn eliminate(th: TheoryId, f: &Formula) -> Result<Formula, QeError> {
    if !th.is_model_complete() {
        return Err(QeError::NotModelComplete(th.name().to_string()));
    }
    let f = rename_apart(&normalize(th, f)?);
    Ok(elim(th, &f))
}

fn elim(th: TheoryId, f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Rel(..) | Formula::Eq(..) => simplify_atom(th, f),
        Formula::Not(a) => not_s(elim(th, a)),
        Formula::And(a, b) => and_s(elim(th, a), elim(th, b)),
        Formula::Or(a, b) => or_s(elim(th, a), elim(th, b)),
        Formula::Implies(a, b) => or_s(not_s(elim(th, a)), elim(th, b)),
        Formula::Exists(x, a) => exists(th, x, &elim(th, a)),
        Formula::Forall(x, a) => not_s(exists(th, x, &not_s(elim(th, a)))),
    }
}

// Rewrite negated order-type atoms into positive disjunctions, using that the
// order (or the order of pair projections) is linear.
fn expand_negations(f: &Formula, order: &str, equal: Option<&str>) -> Formula {
    let eq = |a: &Term, b: &Term| match equal {
        Some(r) => rel2(r, a.clone(), b.clone()),
        None => Formula::Eq(a.clone(), b.clone()),
    };
    match f {
        Formula::Not(a) => match a.as_ref() {
            Formula::Rel(r, args) if r == order => {
                Formula::or(rel2(order, args[1].clone(), args[0].clone()), eq(&args[0], &args[1]))
            }
            Formula::Rel(r, args) if Some(r.as_str()) == equal => Formula::or(
                rel2(order, args[0].clone(), args[1].clone()),
                rel2(order, args[1].clone(), args[0].clone()),
            ),
            Formula::Eq(x, y) if equal.is_none() => {
                Formula::or(rel2(order, x.clone(), y.clone()), rel2(order, y.clone(), x.clone()))
            }
            _ => f.clone(),
        },
        Formula::And(a, b) => Formula::and(expand_negations(a, order, equal), expand_negations(b, order, equal)),
        Formula::Or(a, b) => Formula::or(expand_negations(a, order, equal), expand_negations(b, order, equal)),
        other => other.clone(),
    }
}

/// DNF with literals deduplicated, contradictory conjunctions dropped and
/// repeated conjunctions merged.
fn clean_dnf(th: TheoryId, f: &Formula) -> Vec<Vec<Formula>> {
    let mut out: BTreeSet<BTreeSet<Formula>> = BTreeSet::new();
    'conj: for c in dnf(f) {
        let mut lits = BTreeSet::new();
        for l in c {
            match simplify(th, &l) {
                Formula::True => {}
                Formula::False => continue 'conj,
                s => {
                    if lits.contains(&not_s(s.clone())) {
                        continue 'conj;
                    }
                    lits.insert(s);
                }
            }
        }
        out.insert(lits);
    }
    if out.iter().any(|c| c.is_empty()) {
        return vec![Vec::new()];
    }
    out.into_iter().map(|c| c.into_iter().collect()).collect()
}

fn exists(th: TheoryId, x: &str, body: &Formula) -> Formula {
    if !contains(body, x) {
        return body.clone();
    }
    let prepared = match th {
        TheoryId::DloPP => expand_negations(&nnf(body), LT, None),
        _ => nnf(body),
    };
    let mut out = Vec::new();
    for conj in clean_dnf(th, &prepared) {
        let (with_x, without): (Vec<Formula>, Vec<Formula>) = conj.into_iter().partition(|l| contains(l, x));
        let eliminated = match th {
            TheoryId::Succ0 | TheoryId::Succ => succ_elim(x, &with_x),
            TheoryId::DloPP => dense_elim(th, x, &with_x, LT, None, true),
            TheoryId::Adj => adj_elim(x, &with_x),
        };
        out.push(and_s(conj_s(without), eliminated));
    }
    simplify(th, &disj_s(out))
}

/// `∃x` of a conjunction of (dis)equations between successor terms.
fn succ_elim(x: &str, lits: &[Formula]) -> Formula {
    // Each literal as S^i(x) ~ u with u free of x.
    let mut parts = Vec::new();
    for l in lits {
        let (positive, atom) = match l {
            Formula::Not(a) => (false, a.as_ref()),
            a => (true, a),
        };
        let Formula::Eq(a, b) = atom else { unreachable!("successor literals are equations: {l}") };
        let ((ba, ka), (bb, kb)) = (split_succ(a), split_succ(b));
        let (i, u) = if ba == Term::var(x) { (ka, succ_pow(bb, kb)) } else { (kb, succ_pow(ba, ka)) };
        parts.push((i, u, positive));
    }
    let Some(&(i, ref u, _)) = parts.iter().find(|p| p.2) else {
        // Only disequations: all but finitely many x qualify.
        return Formula::True;
    };
    let mut out: Vec<Formula> =
        (0..i).map(|m| not_s(simplify_atom(TheoryId::Succ0, &Formula::Eq(u.clone(), succ_pow(c0(), m))))).collect();
    for (k, w, positive) in &parts {
        let atom = simplify_atom(TheoryId::Succ0, &Formula::Eq(succ_pow(u.clone(), *k), succ_pow(w.clone(), i)));
        out.push(if *positive { atom } else { not_s(atom) });
    }
    conj_s(out)
}

/// `∃x` of a conjunction of positive order atoms `order` and equalities (or
/// the relation `equal`), in a dense order; `endpoints` adds `lo`/`hi`.
fn dense_elim(th: TheoryId, x: &str, lits: &[Formula], order: &str, equal: Option<&str>, endpoints: bool) -> Formula {
    let xv = Term::var(x);
    let other = |a: &Term, b: &Term| if *a == xv { b.clone() } else { a.clone() };
    for l in lits {
        let is_eq = match (l, equal) {
            (Formula::Eq(..), None) => true,
            (Formula::Rel(r, _), Some(e)) => r == e,
            _ => false,
        };
        if is_eq {
            let (a, b) = match l {
                Formula::Eq(a, b) => (a, b),
                Formula::Rel(_, args) => (&args[0], &args[1]),
                _ => unreachable!(),
            };
            let t = other(a, b);
            return conj_s(lits.iter().map(|m| simplify(th, &m.subst(x, &t))));
        }
    }
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for l in lits {
        match l {
            Formula::Rel(r, args) if r == order => {
                if args[0] == xv {
                    upper.push(args[1].clone());
                } else {
                    lower.push(args[0].clone());
                }
            }
            _ => unreachable!("unexpected literal {l} in dense elimination"),
        }
    }
    let mut out = Vec::new();
    for l in &lower {
        for u in &upper {
            out.push(simplify_atom(th, &rel2(order, l.clone(), u.clone())));
        }
    }
    // With bounds on both sides, l < u <= hi already gives l < hi.
    if endpoints && upper.is_empty() {
        out.extend(lower.iter().map(|l| simplify_atom(th, &rel2(order, l.clone(), Term::cst("hi")))));
    }
    if endpoints && lower.is_empty() {
        out.extend(upper.iter().map(|u| simplify_atom(th, &rel2(order, Term::cst("lo"), u.clone()))));
    }
    conj_s(out)
}

/// `∃x` for ℚ × {0,1} with adjacency: split on the half `x` lies in, reduce to
/// the dense order of pair projections, eliminate there, and translate back.
fn adj_elim(x: &str, lits: &[Formula]) -> Formula {
    let xv = Term::var(x);
    let left = |t: &Term| Formula::Rel(LEFT.to_string(), vec![t.clone()]);
    let plt = |a: &Term, b: &Term| rel2(PLT, a.clone(), b.clone());
    let peq = |a: &Term, b: &Term| rel2(PEQ, a.clone(), b.clone());
    let mut out = Vec::new();
    for low in [true, false] {
        let bit = |on_low: bool| if on_low == low { Formula::True } else { Formula::False };
        let translate = |atom: &Formula| -> Formula {
            match atom {
                Formula::Rel(r, _) if r == LEFT => bit(true),
                Formula::Eq(a, b) => {
                    let t = if *a == xv { b } else { a };
                    and_s(peq(&xv, t), if low { left(t) } else { not_s(left(t)) })
                }
                Formula::Rel(r, args) if r == LT => {
                    if args[0] == xv {
                        let t = &args[1];
                        or_s(plt(&xv, t), conj_s([peq(&xv, t), bit(true), not_s(left(t))]))
                    } else {
                        let t = &args[0];
                        or_s(plt(t, &xv), conj_s([peq(&xv, t), left(t), bit(false)]))
                    }
                }
                Formula::Rel(r, args) if r == ADJ => {
                    if args[0] == xv {
                        conj_s([bit(true), peq(&xv, &args[1]), not_s(left(&args[1]))])
                    } else {
                        conj_s([bit(false), peq(&xv, &args[0]), left(&args[0])])
                    }
                }
                other => unreachable!("unexpected atom {other} in adjacency elimination"),
            }
        };
        let translated = conj_s(lits.iter().map(|l| match l {
            Formula::Not(a) => not_s(translate(a)),
            a => translate(a),
        }));
        let prepared = expand_negations(&nnf(&translated), PLT, Some(PEQ));
        for conj in clean_dnf(TheoryId::Adj, &prepared) {
            let (with_x, without): (Vec<Formula>, Vec<Formula>) = conj.into_iter().partition(|l| contains(l, x));
            let projected = dense_elim(TheoryId::Adj, x, &with_x, PLT, Some(PEQ), false);
            out.push(and_s(conj_s(without), project_back(&projected)));
        }
    }
    simplify(TheoryId::Adj, &disj_s(out))
}

// Replace projection atoms by their definitions in the order with adjacency.
fn project_back(f: &Formula) -> Formula {
    let adj = |a: &Term, b: &Term| rel2(ADJ, a.clone(), b.clone());
    let g = f.map_atoms(&mut |a| match a {
        Formula::Rel(r, args) if r == PLT => {
            and_s(lt(args[0].clone(), args[1].clone()), not_s(adj(&args[0], &args[1])))
        }
        Formula::Rel(r, args) if r == PEQ => {
            disj_s([Formula::Eq(args[0].clone(), args[1].clone()), adj(&args[0], &args[1]), adj(&args[1], &args[0])])
        }
        other => other.clone(),
    });
    simplify(TheoryId::Adj, &g)
}

/// The eliminator's output with the auxiliary predicate `$left(t)` spelled
/// out as `∃z Adj(t, z)`, for evaluation in a structure.
pub fn interpretable(psi: &Formula) -> Formula {
    let z = crate::syntax::fresh_name("z", &psi.all_vars());
    psi.map_atoms(&mut |a| match a {
        Formula::Rel(r, args) if r == LEFT => {
            Formula::exists(&z, Formula::Rel(ADJ.into(), vec![args[0].clone(), Term::var(&z)]))
        }
        other => other.clone(),
    })
}

// ---------------------------------------------------------------------------
// Universal pairs.

/// Quantifier-eliminate `phi` and express the result and its negation as
/// universal formulas over the diagram signature.
///
/// When `phi` is already existential (universal) in prenex form, its own
/// matrix gives the universal form of `¬φ` (of `φ`), so that refuting it
/// exhibits a witness for the quantifiers of `phi`.
pub fn universal_pair(th: TheoryId, phi: &Formula) -> Result<UniversalPair, QeError> {
    let psi = eliminate(th, phi)?;
    let prenex = to_prenex(&normalize(th, phi)?);
    let mut taken = phi.all_vars();
    taken.extend(psi.all_vars());
    taken.extend(prenex.all_vars());
    let mut next = 0;
    let mut fresh = move || loop {
        let name = format!("y{next}");
        next += 1;
        if !taken.contains(&name) {
            return name;
        }
    };
    let guard = |h: &[Formula], m: Formula| {
        if h.is_empty() {
            m
        } else {
            Formula::implies(Formula::conj(h.to_vec()), m)
        }
    };
    let (hyps, qe_vars, matrix) = diagram_form(th, &psi, &mut fresh);
    let mut alpha = guard(&hyps, matrix.clone());
    let mut beta = guard(&hyps, not_s(matrix));
    let mut vars = qe_vars;
    let (prefix, body) = quantifier_prefix(&prenex);
    let existential = prefix.iter().all(|(universal, _)| !universal);
    let universal = prefix.iter().all(|(universal, _)| *universal);
    if !prefix.is_empty() && (existential || universal) {
        let (dh, dvars, dm) = diagram_form(th, body, &mut fresh);
        let mut direct: Vec<String> = prefix.into_iter().map(|(_, v)| v).collect();
        direct.extend(dvars);
        direct.extend(vars);
        vars = direct;
        if existential {
            beta = guard(&dh, not_s(dm));
        } else {
            alpha = guard(&dh, dm);
        }
    }
    Ok(UniversalPair { alpha, beta, m: vars.len(), vars })
}

fn quantifier_prefix(f: &Formula) -> (Vec<(bool, String)>, &Formula) {
    let mut prefix = Vec::new();
    let mut g = f;
    while let Formula::Forall(v, b) | Formula::Exists(v, b) = g {
        prefix.push((matches!(g, Formula::Forall(..)), v.clone()));
        g = b;
    }
    (prefix, g)
}

/// A quantifier-free formula over the surface signature as `H → θ'` with
/// `θ'` over the diagram signature and `H` naming function values and
/// constants by fresh variables.
fn diagram_form(th: TheoryId, f: &Formula, fresh: &mut impl FnMut() -> String) -> (Vec<Formula>, Vec<String>, Formula) {
    let mut hyps: Vec<Formula> = Vec::new();
    let mut vars: Vec<String> = Vec::new();
    let matrix = match th {
        TheoryId::Succ0 | TheoryId::Succ => {
            // Atoms S(b) = u and u = c0 on bare terms become graph atoms.
            let direct = f.map_atoms(&mut |a| match a {
                Formula::Eq(l, r) => {
                    let ((bl, kl), (br, kr)) = (split_succ(l), split_succ(r));
                    if bl != c0() && br != c0() {
                        match (kl, kr) {
                            (1, 0) => return Formula::Rel("S".into(), vec![bl, br]),
                            (0, 1) => return Formula::Rel("S".into(), vec![br, bl]),
                            _ => {}
                        }
                    }
                    match (kl, kr) {
                        (0, 0) if br == c0() && bl != c0() => Formula::Rel("c0".into(), vec![bl]),
                        (0, 0) if bl == c0() && br != c0() => Formula::Rel("c0".into(), vec![br]),
                        _ => a.clone(),
                    }
                }
                other => other.clone(),
            });
            let mut chains: BTreeMap<Term, usize> = BTreeMap::new();
            direct.visit_terms(&mut |t| {
                let (b, k) = split_succ(t);
                let e = chains.entry(b).or_insert(0);
                *e = (*e).max(k);
            });
            let mut names: BTreeMap<(Term, usize), Term> = BTreeMap::new();
            if chains.contains_key(&c0()) {
                let y = fresh();
                hyps.push(Formula::Rel("c0".into(), vec![Term::var(&y)]));
                vars.push(y.clone());
                names.insert((c0(), 0), Term::var(&y));
            }
            for (b, &k) in &chains {
                let base = names.get(&(b.clone(), 0)).cloned().unwrap_or_else(|| b.clone());
                names.insert((b.clone(), 0), base.clone());
                let mut prev = base;
                for j in 1..=k {
                    let y = fresh();
                    hyps.push(Formula::Rel("S".into(), vec![prev, Term::var(&y)]));
                    vars.push(y.clone());
                    prev = Term::var(&y);
                    names.insert((b.clone(), j), prev.clone());
                }
            }
            direct.map_terms(&|t| names.get(&split_succ(t)).cloned().unwrap_or_else(|| t.clone()))
        }
        TheoryId::DloPP => {
            let direct = f.map_atoms(&mut |a| match a {
                Formula::Eq(l, r) if *r == Term::cst("lo") || *r == Term::cst("hi") => {
                    let Term::Const(c) = r else { unreachable!() };
                    Formula::Rel(c.clone(), vec![l.clone()])
                }
                Formula::Eq(l, r) if *l == Term::cst("lo") || *l == Term::cst("hi") => {
                    let Term::Const(c) = l else { unreachable!() };
                    Formula::Rel(c.clone(), vec![r.clone()])
                }
                other => other.clone(),
            });
            let used = direct.named_constants();
            let mut names: BTreeMap<String, Term> = BTreeMap::new();
            for c in ["lo", "hi"] {
                if used.contains(c) {
                    let y = fresh();
                    hyps.push(Formula::Rel(c.into(), vec![Term::var(&y)]));
                    vars.push(y.clone());
                    names.insert(c.to_string(), Term::var(&y));
                }
            }
            direct.map_terms(&|t| match t {
                Term::Const(c) => names[c].clone(),
                other => other.clone(),
            })
        }
        TheoryId::Adj => {
            let mut lefts: BTreeSet<Term> = BTreeSet::new();
            f.visit(&mut |g| {
                if let Formula::Rel(r, args) = g {
                    if r == LEFT {
                        lefts.insert(args[0].clone());
                    }
                }
            });
            let mut partner: BTreeMap<Term, Term> = BTreeMap::new();
            for t in lefts {
                let z = Term::var(&fresh());
                hyps.push(Formula::or(
                    Formula::Rel(ADJ.into(), vec![t.clone(), z.clone()]),
                    Formula::Rel(ADJ.into(), vec![z.clone(), t.clone()]),
                ));
                let Term::Var(name) = &z else { unreachable!() };
                vars.push(name.clone());
                partner.insert(t, z);
            }
            f.map_atoms(&mut |a| match a {
                Formula::Rel(r, args) if r == LEFT => {
                    Formula::Rel(ADJ.into(), vec![args[0].clone(), partner[&args[0]].clone()])
                }
                other => other.clone(),
            })
        }
    };
    (hyps, vars, matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn qe(th: TheoryId, s: &str) -> String {
        eliminate(th, &parse(s).unwrap()).unwrap().to_string()
    }

    #[test]
    fn successor_elimination() {
        assert_eq!(qe(TheoryId::Succ0, "exists y. S(y) = x0"), "~x0 = c0");
        assert_eq!(qe(TheoryId::Succ0, "exists y. S(S(y)) = x0 & ~y = x1"), "~x0 = c0 & ~x0 = S(c0) & ~x0 = S(S(x1))");
        assert_eq!(qe(TheoryId::Succ0, "forall y. ~y = x0"), "false");
        assert_eq!(qe(TheoryId::Succ0, "exists y. S(y, #3)"), "~#3 = c0");
    }

    #[test]
    fn dense_elimination() {
        assert_eq!(qe(TheoryId::DloPP, "exists x. x0 < x & x < x1"), "x0 < x1");
        assert_eq!(qe(TheoryId::DloPP, "exists x. lo < x & x < hi"), "true");
        assert_eq!(qe(TheoryId::DloPP, "exists x. x < lo"), "false");
    }

    #[test]
    fn atomic_pairs_are_trivial() {
        let p = universal_pair(TheoryId::Succ0, &parse("S(x0, x1)").unwrap()).unwrap();
        assert_eq!((p.alpha.to_string(), p.beta.to_string(), p.m), ("S(x0, x1)".into(), "~S(x0, x1)".into(), 0));
        let p = universal_pair(TheoryId::Succ0, &parse("exists y. S(y) = x0").unwrap()).unwrap();
        assert_eq!((p.alpha.to_string(), p.beta.to_string(), p.m), ("~c0(x0)".into(), "~S(y, x0)".into(), 1));
    }

    #[test]
    fn adjacency_elimination_uses_partners() {
        let p = universal_pair(TheoryId::Adj, &parse("exists y. Adj(x0, y)").unwrap()).unwrap();
        assert_eq!(p.m, 2);
        assert_eq!(p.beta.to_string(), "~Adj(x0, y)");
        assert!(p.alpha.is_quantifier_free());
    }

    #[test]
    fn refuses_plain_successor() {
        assert!(matches!(eliminate(TheoryId::Succ, &parse("S(x0) = x1").unwrap()), Err(QeError::NotModelComplete(_))));
    }
}
