//! First-order terms and formulas over a finite signature with equality.
//!
//! Domain constants `#n` name the element `n` of a structure on ω. Named
//! constants (`lo`, `c0`, ...) and function applications (`S(x)`) are surface
//! syntax; the diagram level works with their graph relations instead.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use serde::{Serialize, Serializer};

/// Name of the binary order relation written infix as `a < b`.
pub const LT: &str = "<";

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    /// Domain constant `#n`.
    Dom(usize),
    /// Named constant symbol.
    Const(String),
    App(String, Vec<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Rel(String, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn cst(name: &str) -> Term {
        Term::Const(name.to_string())
    }

    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::App(f.to_string(), args)
    }

    pub fn contains_var(&self, v: &str) -> bool {
        match self {
            Term::Var(x) => x == v,
            Term::Dom(_) | Term::Const(_) => false,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(v)),
        }
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Dom(_) | Term::Const(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    fn collect_doms(&self, out: &mut BTreeSet<usize>) {
        match self {
            Term::Dom(n) => {
                out.insert(*n);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_doms(out)),
            _ => {}
        }
    }

    pub fn subst_var(&self, v: &str, t: &Term) -> Term {
        match self {
            Term::Var(x) if x == v => t.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.subst_var(v, t)).collect()),
            other => other.clone(),
        }
    }

    pub fn map_vars(&self, f: &impl Fn(&str) -> String) -> Term {
        match self {
            Term::Var(v) => Term::Var(f(v)),
            Term::App(g, args) => Term::App(g.clone(), args.iter().map(|a| a.map_vars(f)).collect()),
            other => other.clone(),
        }
    }

    pub fn map_doms(&self, f: &impl Fn(usize) -> Term) -> Term {
        match self {
            Term::Dom(n) => f(*n),
            Term::App(g, args) => Term::App(g.clone(), args.iter().map(|a| a.map_doms(f)).collect()),
            other => other.clone(),
        }
    }

    /// Nesting depth of function applications.
    pub fn depth(&self) -> usize {
        match self {
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            _ => 0,
        }
    }
}

impl Formula {
    pub fn rel(name: &str, args: Vec<Term>) -> Formula {
        Formula::Rel(name.to_string(), args)
    }

    pub fn lt(a: Term, b: Term) -> Formula {
        Formula::Rel(LT.to_string(), vec![a, b])
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn neq(a: Term, b: Term) -> Formula {
        Formula::not(Formula::Eq(a, b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(v: &str, body: Formula) -> Formula {
        Formula::Forall(v.to_string(), Box::new(body))
    }

    pub fn exists(v: &str, body: Formula) -> Formula {
        Formula::Exists(v.to_string(), Box::new(body))
    }

    /// Left-nested conjunction; `True` when empty.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::and).unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `False` when empty.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::or).unwrap_or(Formula::False)
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Rel(..) | Formula::Eq(..))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Rel(..) | Formula::Eq(..) => true,
            Formula::Not(a) => a.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Forall(..) | Formula::Exists(..) => false,
        }
    }

    /// Maximum quantifier nesting.
    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Rel(..) | Formula::Eq(..) => 0,
            Formula::Not(a) => a.quantifier_rank(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.quantifier_rank().max(b.quantifier_rank())
            }
            Formula::Forall(_, a) | Formula::Exists(_, a) => 1 + a.quantifier_rank(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Rel(_, args) => {
                let mut vs = BTreeSet::new();
                args.iter().for_each(|a| a.collect_vars(&mut vs));
                out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
            }
            Formula::Eq(a, b) => {
                let mut vs = BTreeSet::new();
                a.collect_vars(&mut vs);
                b.collect_vars(&mut vs);
                out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
            }
            Formula::Not(a) => a.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Forall(v, a) | Formula::Exists(v, a) => {
                bound.push(v.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| t.collect_vars(&mut out));
        self.visit(&mut |f| {
            if let Formula::Forall(v, _) | Formula::Exists(v, _) = f {
                out.insert(v.clone());
            }
        });
        out
    }

    pub fn domain_constants(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| t.collect_doms(&mut out));
        out
    }

    pub fn named_constants(&self) -> BTreeSet<String> {
        fn go(t: &Term, out: &mut BTreeSet<String>) {
            match t {
                Term::Const(c) => {
                    out.insert(c.clone());
                }
                Term::App(_, args) => args.iter().for_each(|a| go(a, out)),
                _ => {}
            }
        }
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| go(t, &mut out));
        out
    }

    /// Largest function-nesting depth of any term.
    pub fn term_depth(&self) -> usize {
        let mut d = 0;
        self.visit_terms(&mut |t| d = d.max(t.depth()));
        d
    }

    /// Pre-order walk over every subformula.
    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => a.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// Walk over the top-level terms of every atom.
    pub fn visit_terms(&self, f: &mut impl FnMut(&Term)) {
        self.visit(&mut |g| match g {
            Formula::Rel(_, args) => args.iter().for_each(&mut *f),
            Formula::Eq(a, b) => {
                f(a);
                f(b);
            }
            _ => {}
        });
    }

    /// Rewrite every atom, leaving the connective structure in place.
    pub fn map_atoms(&self, f: &mut impl FnMut(&Formula) -> Formula) -> Formula {
        match self {
            Formula::Rel(..) | Formula::Eq(..) => f(self),
            Formula::True | Formula::False => self.clone(),
            Formula::Not(a) => Formula::not(a.map_atoms(f)),
            Formula::And(a, b) => Formula::and(a.map_atoms(f), b.map_atoms(f)),
            Formula::Or(a, b) => Formula::or(a.map_atoms(f), b.map_atoms(f)),
            Formula::Implies(a, b) => Formula::implies(a.map_atoms(f), b.map_atoms(f)),
            Formula::Forall(v, a) => Formula::forall(v, a.map_atoms(f)),
            Formula::Exists(v, a) => Formula::exists(v, a.map_atoms(f)),
        }
    }

    pub fn map_terms(&self, f: &impl Fn(&Term) -> Term) -> Formula {
        self.map_atoms(&mut |a| match a {
            Formula::Rel(r, args) => Formula::Rel(r.clone(), args.iter().map(f).collect()),
            Formula::Eq(x, y) => Formula::Eq(f(x), f(y)),
            _ => unreachable!(),
        })
    }

    /// Replace domain constants. The replacement terms must not contain variables
    /// that are bound in `self`.
    pub fn map_doms(&self, g: &impl Fn(usize) -> Term) -> Formula {
        self.map_terms(&|t| t.map_doms(g))
    }

    /// Capture-avoiding substitution of `t` for free occurrences of `v`.
    pub fn subst(&self, v: &str, t: &Term) -> Formula {
        let mut tv = BTreeSet::new();
        t.collect_vars(&mut tv);
        self.subst_inner(v, t, &tv)
    }

    fn subst_inner(&self, v: &str, t: &Term, tvars: &BTreeSet<String>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Rel(r, args) => Formula::Rel(r.clone(), args.iter().map(|a| a.subst_var(v, t)).collect()),
            Formula::Eq(a, b) => Formula::Eq(a.subst_var(v, t), b.subst_var(v, t)),
            Formula::Not(a) => Formula::not(a.subst_inner(v, t, tvars)),
            Formula::And(a, b) => Formula::and(a.subst_inner(v, t, tvars), b.subst_inner(v, t, tvars)),
            Formula::Or(a, b) => Formula::or(a.subst_inner(v, t, tvars), b.subst_inner(v, t, tvars)),
            Formula::Implies(a, b) => Formula::implies(a.subst_inner(v, t, tvars), b.subst_inner(v, t, tvars)),
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                let is_forall = matches!(self, Formula::Forall(..));
                let rebuild = |x: &str, body: Formula| {
                    if is_forall {
                        Formula::forall(x, body)
                    } else {
                        Formula::exists(x, body)
                    }
                };
                if x == v {
                    return self.clone();
                }
                if tvars.contains(x) && a.free_vars().contains(v) {
                    let mut avoid = a.all_vars();
                    avoid.extend(tvars.iter().cloned());
                    avoid.insert(v.to_string());
                    let fresh = fresh_name(x, &avoid);
                    let renamed = a.subst(x, &Term::Var(fresh.clone()));
                    return rebuild(&fresh, renamed.subst_inner(v, t, tvars));
                }
                rebuild(x, a.subst_inner(v, t, tvars))
            }
        }
    }

    /// Number of atom occurrences.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |f| {
            if f.is_atomic() {
                n += 1
            }
        });
        n
    }
}

/// `base` with primes appended until it avoids `taken`.
pub fn fresh_name(base: &str, taken: &BTreeSet<String>) -> String {
    let mut name = format!("{base}'");
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

/// Canonical name of the i-th free variable of an open formula.
pub fn free_var(i: usize) -> String {
    format!("x{i}")
}

/// True for names of the form `x<digits>`, which parse as free variables.
pub fn is_free_var_name(name: &str) -> bool {
    name.len() > 1 && name.starts_with('x') && name[1..].chars().all(|c| c.is_ascii_digit())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => write!(f, "{v}"),
            Term::Dom(n) => write!(f, "#{n}"),
            Term::App(g, args) => write!(f, "{g}({})", args.iter().join(", ")),
        }
    }
}

// Binding strength used by the printer: quantifiers and `->` = 0, `|` = 1,
// `&` = 2, `~` = 3, atoms = 4.
fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Forall(..) | Formula::Exists(..) | Formula::Implies(..) => 0,
        Formula::Or(..) => 1,
        Formula::And(..) => 2,
        Formula::Not(..) => 3,
        _ => 4,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, g: &Formula, min: u8) -> fmt::Result {
    if prec(g) < min {
        write!(f, "({g})")
    } else {
        write!(f, "{g}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Rel(r, args) if r == LT && args.len() == 2 => write!(f, "{} < {}", args[0], args[1]),
            Formula::Rel(r, args) => write!(f, "{r}({})", args.iter().join(", ")),
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Not(a) => {
                write!(f, "~")?;
                write_at(f, a, 3)
            }
            Formula::And(a, b) => {
                write_at(f, a, 2)?;
                write!(f, " & ")?;
                write_at(f, b, 3)
            }
            Formula::Or(a, b) => {
                write_at(f, a, 1)?;
                write!(f, " | ")?;
                write_at(f, b, 2)
            }
            Formula::Implies(a, b) => {
                write_at(f, a, 1)?;
                write!(f, " -> ")?;
                write_at(f, b, 0)
            }
            Formula::Forall(v, a) => write!(f, "forall {v}. {a}"),
            Formula::Exists(v, a) => write!(f, "exists {v}. {a}"),
        }
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printer_parenthesizes_by_precedence() {
        let p = Formula::rel("P", vec![Term::var("x")]);
        let q = Formula::rel("Q", vec![Term::var("x")]);
        let f = Formula::and(Formula::or(p.clone(), q.clone()), Formula::not(p.clone()));
        assert_eq!(f.to_string(), "(P(x) | Q(x)) & ~P(x)");
        let g = Formula::implies(Formula::implies(p.clone(), q.clone()), p.clone());
        assert_eq!(g.to_string(), "(P(x) -> Q(x)) -> P(x)");
        let h = Formula::not(Formula::exists("x", p));
        assert_eq!(h.to_string(), "~(exists x. P(x))");
    }

    #[test]
    fn substitution_avoids_capture() {
        // forall y. R(x, y) with x := y must rename the binder
        let f = Formula::forall("y", Formula::rel("R", vec![Term::var("x"), Term::var("y")]));
        let g = f.subst("x", &Term::var("y"));
        match &g {
            Formula::Forall(v, body) => {
                assert_ne!(v, "y");
                assert_eq!(**body, Formula::rel("R", vec![Term::var("y"), Term::var(v)]));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn free_variables_and_rank() {
        let f = Formula::exists(
            "y",
            Formula::and(
                Formula::eq(Term::app("S", vec![Term::var("y")]), Term::var("x0")),
                Formula::forall("z", Formula::lt(Term::var("z"), Term::Dom(3))),
            ),
        );
        assert_eq!(f.free_vars().into_iter().collect::<Vec<_>>(), vec!["x0".to_string()]);
        assert_eq!(f.quantifier_rank(), 2);
        assert_eq!(f.domain_constants().into_iter().collect::<Vec<_>>(), vec![3]);
        assert_eq!(f.term_depth(), 1);
    }
}
