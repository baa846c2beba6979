//! Bijective numbering of relational sentences with domain constants.
//!
//! Sentences are listed by weight, then by shape. A bound variable whose
//! binder sits at nesting depth `j` weighs `j + 1`, a domain constant `#n`
//! weighs `n + 1`, and every connective, quantifier or atom adds one. There
//! are finitely many sentences of each weight, so the listing has order type
//! ω. Binders are canonically renamed `v0, v1, ...` by depth, so alphabetic
//! variants share a code.

use std::cell::RefCell;
use std::collections::HashMap;

use thiserror::Error;

use crate::signature::Signature;
use crate::syntax::{Formula, Term};

pub type SentenceCode = u128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SentenceCodeError {
    #[error("free variable {0} in a sentence")]
    FreeVariable(String),
    #[error("term {0} is not a variable or domain constant; relationalize first")]
    NotRelational(String),
    #[error("relation {0} is not in the diagram signature")]
    UnknownRelation(String),
    #[error("sentence too heavy to number")]
    Overflow,
}

#[derive(Clone, Copy)]
enum Kind {
    True,
    False,
    Eq,
    Rel(usize),
    Not,
    And,
    Or,
    Implies,
    Exists,
    Forall,
}

pub struct SentenceCoding {
    relations: Vec<(String, usize)>,
    formulas: RefCell<HashMap<(usize, usize), u128>>,
    tuples: RefCell<HashMap<(usize, usize, usize), u128>>,
}

fn binder(depth: usize) -> String {
    format!("v{depth}")
}

impl SentenceCoding {
    pub fn new(sig: &Signature) -> SentenceCoding {
        SentenceCoding {
            relations: sig.diagram_relations().iter().map(|r| (r.name.clone(), r.arity)).collect(),
            formulas: RefCell::new(HashMap::new()),
            tuples: RefCell::new(HashMap::new()),
        }
    }

    fn kinds(&self) -> Vec<Kind> {
        let mut k = vec![Kind::True, Kind::False, Kind::Eq];
        k.extend((0..self.relations.len()).map(Kind::Rel));
        k.extend([Kind::Not, Kind::And, Kind::Or, Kind::Implies, Kind::Exists, Kind::Forall]);
        k
    }

    fn terms(w: usize, d: usize) -> u128 {
        if w == 0 {
            0
        } else {
            1 + u128::from(w - 1 < d)
        }
    }

    fn tuple_count(&self, arity: usize, w: usize, d: usize) -> u128 {
        if arity == 0 {
            return u128::from(w == 0);
        }
        if w < arity {
            return 0;
        }
        if let Some(&c) = self.tuples.borrow().get(&(arity, w, d)) {
            return c;
        }
        let c = (1..=w - (arity - 1))
            .map(|w1| Self::terms(w1, d).saturating_mul(self.tuple_count(arity - 1, w - w1, d)))
            .fold(0u128, u128::saturating_add);
        self.tuples.borrow_mut().insert((arity, w, d), c);
        c
    }

    fn pair_count(&self, w: usize, d: usize) -> u128 {
        (1..w).map(|w1| self.count(w1, d).saturating_mul(self.count(w - w1, d))).fold(0u128, u128::saturating_add)
    }

    fn kind_count(&self, k: Kind, w: usize, d: usize) -> u128 {
        if w == 0 {
            return 0;
        }
        match k {
            Kind::True | Kind::False => u128::from(w == 1),
            Kind::Eq => self.tuple_count(2, w - 1, d),
            Kind::Rel(r) => self.tuple_count(self.relations[r].1, w - 1, d),
            Kind::Not => self.count(w - 1, d),
            Kind::And | Kind::Or | Kind::Implies => self.pair_count(w - 1, d),
            Kind::Exists | Kind::Forall => self.count(w - 1, d + 1),
        }
    }

    /// Number of formulas of weight `w` whose variables refer to `d` enclosing binders.
    fn count(&self, w: usize, d: usize) -> u128 {
        if w == 0 {
            return 0;
        }
        if let Some(&c) = self.formulas.borrow().get(&(w, d)) {
            return c;
        }
        let c = self.kinds().into_iter().map(|k| self.kind_count(k, w, d)).fold(0u128, u128::saturating_add);
        self.formulas.borrow_mut().insert((w, d), c);
        c
    }

    /// The sentence numbered `code`.
    pub fn decode(&self, code: SentenceCode) -> Formula {
        let mut r = code;
        let mut w = 1;
        loop {
            let c = self.count(w, 0);
            if r < c {
                return self.unrank(w, 0, r);
            }
            r -= c;
            w += 1;
        }
    }

    pub fn encode(&self, f: &Formula) -> Result<SentenceCode, SentenceCodeError> {
        let w = self.weight(f, &mut Vec::new())?;
        let mut offset: u128 = 0;
        for v in 1..w {
            offset = offset.checked_add(self.count(v, 0)).ok_or(SentenceCodeError::Overflow)?;
        }
        if self.count(w, 0) == u128::MAX {
            return Err(SentenceCodeError::Overflow);
        }
        let r = self.rank(f, w, &mut Vec::new())?;
        offset.checked_add(r).ok_or(SentenceCodeError::Overflow)
    }

    fn term_weight(&self, t: &Term, env: &[String]) -> Result<usize, SentenceCodeError> {
        match t {
            Term::Var(v) => env
                .iter()
                .rposition(|b| b == v)
                .map(|j| j + 1)
                .ok_or_else(|| SentenceCodeError::FreeVariable(v.clone())),
            Term::Dom(n) => Ok(n + 1),
            other => Err(SentenceCodeError::NotRelational(other.to_string())),
        }
    }

    fn weight(&self, f: &Formula, env: &mut Vec<String>) -> Result<usize, SentenceCodeError> {
        Ok(match f {
            Formula::True | Formula::False => 1,
            Formula::Eq(a, b) => 1 + self.term_weight(a, env)? + self.term_weight(b, env)?,
            Formula::Rel(name, args) => {
                if !self.relations.iter().any(|(n, a)| n == name && *a == args.len()) {
                    return Err(SentenceCodeError::UnknownRelation(name.clone()));
                }
                1 + args.iter().map(|a| self.term_weight(a, env)).sum::<Result<usize, _>>()?
            }
            Formula::Not(a) => 1 + self.weight(a, env)?,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                1 + self.weight(a, env)? + self.weight(b, env)?
            }
            Formula::Exists(v, a) | Formula::Forall(v, a) => {
                env.push(v.clone());
                let w = self.weight(a, env);
                env.pop();
                1 + w?
            }
        })
    }

    fn kind_of(&self, f: &Formula) -> Kind {
        match f {
            Formula::True => Kind::True,
            Formula::False => Kind::False,
            Formula::Eq(..) => Kind::Eq,
            Formula::Rel(name, args) => Kind::Rel(
                self.relations.iter().position(|(n, a)| n == name && *a == args.len()).expect("checked by weight"),
            ),
            Formula::Not(_) => Kind::Not,
            Formula::And(..) => Kind::And,
            Formula::Or(..) => Kind::Or,
            Formula::Implies(..) => Kind::Implies,
            Formula::Exists(..) => Kind::Exists,
            Formula::Forall(..) => Kind::Forall,
        }
    }

    fn rank(&self, f: &Formula, w: usize, env: &mut Vec<String>) -> Result<u128, SentenceCodeError> {
        let d = env.len();
        let kind = self.kind_of(f);
        let mut r: u128 = 0;
        for k in self.kinds() {
            if std::mem::discriminant(&k) == std::mem::discriminant(&kind)
                && !matches!((k, kind), (Kind::Rel(a), Kind::Rel(b)) if a != b)
            {
                break;
            }
            r += self.kind_count(k, w, d);
        }
        let inner = match f {
            Formula::True | Formula::False => 0,
            Formula::Eq(a, b) => self.rank_tuple(&[a.clone(), b.clone()], w - 1, env)?,
            Formula::Rel(_, args) => self.rank_tuple(args, w - 1, env)?,
            Formula::Not(a) => self.rank(a, w - 1, env)?,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                let wa = self.weight(a, env)?;
                let wb = w - 1 - wa;
                let before: u128 = (1..wa).map(|w1| self.count(w1, d) * self.count(w - 1 - w1, d)).sum();
                before + self.rank(a, wa, env)? * self.count(wb, d) + self.rank(b, wb, env)?
            }
            Formula::Exists(v, a) | Formula::Forall(v, a) => {
                env.push(v.clone());
                let r = self.rank(a, w - 1, env);
                env.pop();
                r?
            }
        };
        Ok(r + inner)
    }

    fn rank_tuple(&self, ts: &[Term], w: usize, env: &[String]) -> Result<u128, SentenceCodeError> {
        let d = env.len();
        if ts.is_empty() {
            return Ok(0);
        }
        let w1 = self.term_weight(&ts[0], env)?;
        let rest = ts.len() - 1;
        let before: u128 = (1..w1).map(|v| Self::terms(v, d) * self.tuple_count(rest, w - v, d)).sum();
        let term_rank = match &ts[0] {
            Term::Var(_) => 0,
            _ => u128::from(w1 - 1 < d),
        };
        Ok(before + term_rank * self.tuple_count(rest, w - w1, d) + self.rank_tuple(&ts[1..], w - w1, env)?)
    }

    fn unrank(&self, w: usize, d: usize, mut r: u128) -> Formula {
        for k in self.kinds() {
            let c = self.kind_count(k, w, d);
            if r >= c {
                r -= c;
                continue;
            }
            return match k {
                Kind::True => Formula::True,
                Kind::False => Formula::False,
                Kind::Eq => {
                    let t = self.unrank_tuple(2, w - 1, d, r);
                    Formula::Eq(t[0].clone(), t[1].clone())
                }
                Kind::Rel(i) => {
                    let (name, arity) = &self.relations[i];
                    Formula::Rel(name.clone(), self.unrank_tuple(*arity, w - 1, d, r))
                }
                Kind::Not => Formula::not(self.unrank(w - 1, d, r)),
                Kind::And | Kind::Or | Kind::Implies => {
                    let (a, b) = self.unrank_pair(w - 1, d, r);
                    match k {
                        Kind::And => Formula::and(a, b),
                        Kind::Or => Formula::or(a, b),
                        _ => Formula::implies(a, b),
                    }
                }
                Kind::Exists => Formula::exists(&binder(d), self.unrank(w - 1, d + 1, r)),
                Kind::Forall => Formula::forall(&binder(d), self.unrank(w - 1, d + 1, r)),
            };
        }
        unreachable!("rank {r} outside weight {w}")
    }

    fn unrank_pair(&self, w: usize, d: usize, mut r: u128) -> (Formula, Formula) {
        for w1 in 1..w {
            let right = self.count(w - w1, d);
            let block = self.count(w1, d) * right;
            if r < block {
                return (self.unrank(w1, d, r / right), self.unrank(w - w1, d, r % right));
            }
            r -= block;
        }
        unreachable!()
    }

    fn unrank_tuple(&self, arity: usize, w: usize, d: usize, mut r: u128) -> Vec<Term> {
        if arity == 0 {
            return Vec::new();
        }
        for w1 in 1..=w {
            let rest = self.tuple_count(arity - 1, w - w1, d);
            let block = Self::terms(w1, d) * rest;
            if r < block {
                let (i, j) = (r / rest, r % rest);
                let term = if w1 - 1 < d && i == 0 { Term::Var(binder(w1 - 1)) } else { Term::Dom(w1 - 1) };
                let mut out = vec![term];
                out.extend(self.unrank_tuple(arity - 1, w - w1, d, j));
                return out;
            }
            r -= block;
        }
        unreachable!()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    #[test]
    fn small_codes_and_round_trip() {
        let sig = Signature::new(&[], &[("S", 1)], &[]).unwrap();
        let c = SentenceCoding::new(&sig);
        assert_eq!(c.decode(0), Formula::True);
        assert_eq!(c.decode(1), Formula::False);
        for code in 0..3000u128 {
            let f = c.decode(code);
            assert!(f.is_sentence(), "{f}");
            assert_eq!(c.encode(&f).unwrap(), code, "{f}");
        }
    }

    #[test]
    fn alphabetic_variants_share_a_code() {
        let sig = Signature::new(&[], &[("S", 1)], &[]).unwrap();
        let c = SentenceCoding::new(&sig);
        let a = c.encode(&parse("exists x. S(x, #0)").unwrap()).unwrap();
        let b = c.encode(&parse("exists y. S(y, #0)").unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(a < 500, "light sentences get small codes, got {a}");
    }

    #[test]
    fn rejects_non_sentences() {
        let sig = Signature::new(&[], &[("S", 1)], &["c0"]).unwrap();
        let c = SentenceCoding::new(&sig);
        assert!(matches!(c.encode(&parse("S(x0, #1)").unwrap()), Err(SentenceCodeError::FreeVariable(_))));
        assert!(matches!(c.encode(&parse("S(#0) = #1").unwrap()), Err(SentenceCodeError::NotRelational(_))));
    }
}
