//! Syntactic transformations: prenex form, negation and disjunctive normal
//! forms, and expansion of a formula into its equality cases.

use std::collections::{BTreeSet, HashMap};

use crate::syntax::{free_var, fresh_name, Formula, Term};

/// Rename bound variables so that no two binders share a name and no binder
/// reuses a free variable. The first binder of each name keeps it.
pub fn rename_apart(f: &Formula) -> Formula {
    let mut used = f.free_vars();
    rename(f, &mut HashMap::new(), &mut used)
}

fn rename(f: &Formula, env: &mut HashMap<String, Vec<String>>, used: &mut BTreeSet<String>) -> Formula {
    let term = |t: &Term, env: &HashMap<String, Vec<String>>| {
        t.map_vars(&|v| env.get(v).and_then(|s| s.last()).cloned().unwrap_or_else(|| v.to_string()))
    };
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Rel(r, args) => Formula::Rel(r.clone(), args.iter().map(|a| term(a, env)).collect()),
        Formula::Eq(a, b) => Formula::Eq(term(a, env), term(b, env)),
        Formula::Not(a) => Formula::not(rename(a, env, used)),
        Formula::And(a, b) => Formula::and(rename(a, env, used), rename(b, env, used)),
        Formula::Or(a, b) => Formula::or(rename(a, env, used), rename(b, env, used)),
        Formula::Implies(a, b) => Formula::implies(rename(a, env, used), rename(b, env, used)),
        Formula::Forall(v, a) | Formula::Exists(v, a) => {
            let name = if used.contains(v) { fresh_name(v, used) } else { v.clone() };
            used.insert(name.clone());
            env.entry(v.clone()).or_default().push(name.clone());
            let body = rename(a, env, used);
            env.get_mut(v).expect("pushed above").pop();
            if matches!(f, Formula::Forall(..)) {
                Formula::forall(&name, body)
            } else {
                Formula::exists(&name, body)
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Quant {
    Forall,
    Exists,
}

impl Quant {
    fn flip(self) -> Quant {
        match self {
            Quant::Forall => Quant::Exists,
            Quant::Exists => Quant::Forall,
        }
    }
}

fn pull(f: &Formula) -> (Vec<(Quant, String)>, Formula) {
    let flip = |p: Vec<(Quant, String)>| p.into_iter().map(|(q, v)| (q.flip(), v)).collect::<Vec<_>>();
    match f {
        Formula::Not(a) => {
            let (p, m) = pull(a);
            (flip(p), Formula::not(m))
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            let (pa, ma) = pull(a);
            let (pb, mb) = pull(b);
            let (mut prefix, matrix) = match f {
                Formula::And(..) => (pa, Formula::and(ma, mb)),
                Formula::Or(..) => (pa, Formula::or(ma, mb)),
                _ => (flip(pa), Formula::implies(ma, mb)),
            };
            prefix.extend(pb);
            (prefix, matrix)
        }
        Formula::Forall(v, a) | Formula::Exists(v, a) => {
            let q = if matches!(f, Formula::Forall(..)) { Quant::Forall } else { Quant::Exists };
            let (mut p, m) = pull(a);
            p.insert(0, (q, v.clone()));
            (p, m)
        }
        _ => (Vec::new(), f.clone()),
    }
}

/// Equivalent prenex formula with a quantifier-free matrix.
pub fn to_prenex(f: &Formula) -> Formula {
    let (prefix, matrix) = pull(&rename_apart(f));
    prefix.into_iter().rev().fold(matrix, |body, (q, v)| match q {
        Quant::Forall => Formula::forall(&v, body),
        Quant::Exists => Formula::exists(&v, body),
    })
}

pub fn is_prenex(f: &Formula) -> bool {
    match f {
        Formula::Forall(_, a) | Formula::Exists(_, a) => is_prenex(a),
        other => other.is_quantifier_free(),
    }
}

/// Negation normal form: no implications, negation only on atoms.
pub fn nnf(f: &Formula) -> Formula {
    match f {
        Formula::Not(a) => nnf_neg(a),
        Formula::And(a, b) => Formula::and(nnf(a), nnf(b)),
        Formula::Or(a, b) => Formula::or(nnf(a), nnf(b)),
        Formula::Implies(a, b) => Formula::or(nnf_neg(a), nnf(b)),
        Formula::Forall(v, a) => Formula::forall(v, nnf(a)),
        Formula::Exists(v, a) => Formula::exists(v, nnf(a)),
        _ => f.clone(),
    }
}

fn nnf_neg(f: &Formula) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Not(a) => nnf(a),
        Formula::And(a, b) => Formula::or(nnf_neg(a), nnf_neg(b)),
        Formula::Or(a, b) => Formula::and(nnf_neg(a), nnf_neg(b)),
        Formula::Implies(a, b) => Formula::and(nnf(a), nnf_neg(b)),
        Formula::Forall(v, a) => Formula::exists(v, nnf_neg(a)),
        Formula::Exists(v, a) => Formula::forall(v, nnf_neg(a)),
        _ => Formula::not(f.clone()),
    }
}

/// Disjunctive normal form of a quantifier-free formula as a list of
/// conjunctions of literals. `true` is `[[]]`, `false` is `[]`.
pub fn dnf(f: &Formula) -> Vec<Vec<Formula>> {
    fn go(f: &Formula) -> Vec<Vec<Formula>> {
        match f {
            Formula::True => vec![Vec::new()],
            Formula::False => Vec::new(),
            Formula::Or(a, b) => {
                let mut out = go(a);
                out.extend(go(b));
                out
            }
            Formula::And(a, b) => {
                let (da, db) = (go(a), go(b));
                let mut out = Vec::with_capacity(da.len() * db.len());
                for x in &da {
                    for y in &db {
                        let mut c = x.clone();
                        c.extend(y.iter().cloned());
                        out.push(c);
                    }
                }
                out
            }
            lit => vec![vec![lit.clone()]],
        }
    }
    assert!(f.is_quantifier_free(), "dnf of a quantified formula");
    go(&nnf(f))
}

/// All partitions of `{0..n-1}` as restricted growth strings: entry `i` is the
/// block of `i`, blocks numbered by first occurrence.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, blocks: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for b in 0..=blocks {
            prefix.push(b);
            go(prefix, blocks.max(b + 1), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), 0, n, &mut out);
    out
}

/// One way the free variables `x0..xn` can coincide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqualityCase {
    /// Block of each variable, blocks numbered by first occurrence.
    pub pattern: Vec<usize>,
    /// Least variable index of each block.
    pub reps: Vec<usize>,
    /// Variables renamed to their block numbers, with the block variables
    /// `x0..x(k-1)` pairwise distinct.
    pub display: Formula,
    /// Over the original variables: block representatives substituted, every
    /// variable equated to its representative, representatives distinct.
    pub guarded: Formula,
}

impl EqualityCase {
    pub fn blocks(&self) -> usize {
        self.reps.len()
    }
}

fn distinct(vars: impl IntoIterator<Item = usize>) -> Vec<Formula> {
    let vs: Vec<usize> = vars.into_iter().collect();
    let mut lits = Vec::new();
    for (a, &i) in vs.iter().enumerate() {
        for &j in &vs[a + 1..] {
            lits.push(Formula::neq(Term::Var(free_var(i)), Term::Var(free_var(j))));
        }
    }
    lits
}

/// Split `alpha`, with free variables among `x0..x(arity-1)`, into its
/// equality cases. The disjunction of the guarded forms is equivalent to
/// `alpha`. Cases are ordered by number of blocks, then by pattern in
/// decreasing lexicographic order.
pub fn expand_equality_cases(alpha: &Formula, arity: usize) -> Vec<EqualityCase> {
    let mut patterns = set_partitions(arity);
    patterns.sort_by(|a, b| {
        let ka = a.iter().max().map_or(0, |m| m + 1);
        let kb = b.iter().max().map_or(0, |m| m + 1);
        ka.cmp(&kb).then_with(|| b.cmp(a))
    });
    patterns
        .into_iter()
        .map(|pattern| {
            let k = pattern.iter().max().map_or(0, |m| m + 1);
            let reps: Vec<usize> =
                (0..k).map(|b| pattern.iter().position(|&p| p == b).expect("block occurs")).collect();
            // Each variable maps to an index no larger than itself, so
            // substituting in increasing order is simultaneous.
            let mut display = alpha.clone();
            let mut body = alpha.clone();
            for (i, &b) in pattern.iter().enumerate() {
                if b != i {
                    display = display.subst(&free_var(i), &Term::Var(free_var(b)));
                }
                if reps[b] != i {
                    body = body.subst(&free_var(i), &Term::Var(free_var(reps[b])));
                }
            }
            let display = Formula::conj(std::iter::once(display).chain(distinct(0..k)));
            let links = pattern
                .iter()
                .enumerate()
                .filter(|&(i, &b)| reps[b] != i)
                .map(|(i, &b)| Formula::eq(Term::Var(free_var(i)), Term::Var(free_var(reps[b]))));
            let guarded = Formula::conj(std::iter::once(body).chain(links).chain(distinct(reps.clone())));
            EqualityCase { pattern, reps, display, guarded }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    #[test]
    fn prenex_examples() {
        let f = parse("forall x. R(x, x)").unwrap();
        assert_eq!(to_prenex(&f), f);
        assert_eq!(to_prenex(&parse("~exists x. R(x, #0)").unwrap()), parse("forall x. ~R(x, #0)").unwrap());
        assert_eq!(
            to_prenex(&parse("(exists x. A(x)) & (exists x. B(x))").unwrap()),
            parse("exists x. exists x'. A(x) & B(x')").unwrap()
        );
    }

    #[test]
    fn prenex_avoids_free_variables() {
        let f = parse("R(x0) & exists x0. S(x0)").unwrap();
        let p = to_prenex(&f);
        assert!(is_prenex(&p));
        assert_eq!(p, parse("exists x0'. R(x0) & S(x0')").unwrap());
    }

    #[test]
    fn bell_numbers() {
        let x = parse("R(x0, x1, x2, x3)").unwrap();
        assert_eq!(expand_equality_cases(&x, 1).len(), 1);
        assert_eq!(expand_equality_cases(&x, 3).len(), 5);
        assert_eq!(expand_equality_cases(&x, 4).len(), 15);
        assert_eq!(set_partitions(5).len(), 52);
    }

    #[test]
    fn three_variable_display() {
        let a = parse("A(x0, x1, x2)").unwrap();
        let shown: Vec<String> = expand_equality_cases(&a, 3).iter().map(|c| c.display.to_string()).collect();
        assert_eq!(
            shown,
            vec![
                "A(x0, x0, x0)",
                "A(x0, x1, x1) & ~x0 = x1",
                "A(x0, x1, x0) & ~x0 = x1",
                "A(x0, x0, x1) & ~x0 = x1",
                "A(x0, x1, x2) & ~x0 = x1 & ~x0 = x2 & ~x1 = x2",
            ]
        );
    }

    #[test]
    fn dnf_shapes() {
        assert_eq!(dnf(&Formula::True), vec![Vec::<Formula>::new()]);
        assert!(dnf(&Formula::False).is_empty());
        let f = parse("(P(#0) | Q(#0)) & ~(R(#0) -> P(#1))").unwrap();
        assert_eq!(dnf(&f).len(), 2);
    }
}
