//! Direct evaluation of first-order sentences in the built-in structures.
//!
//! Quantifiers range over a finite set of candidate elements that meets every
//! orbit of the structure's automorphisms fixing the current parameters (dense
//! orders), or every class of the back-and-forth game of the relevant rank
//! (successor). This is independent of the quantifier-elimination code and is
//! used as ground truth.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::presentation::{Elem, Family, OracleError, Presentation};
use crate::rationals::Q;
use crate::signature::Signature;
use crate::syntax::{Formula, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("free variable {0}")]
    FreeVariable(String),
    #[error("symbol {0} is not interpreted in {1}")]
    Uninterpreted(String, String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

type Env = Vec<(String, Elem)>;

struct Evaluator<'a> {
    family: &'a Family,
    presentation: Option<&'a Presentation>,
    signature: Signature,
    constants: Vec<Elem>,
}

impl Evaluator<'_> {
    fn uninterpreted(&self, name: &str) -> SemanticsError {
        SemanticsError::Uninterpreted(name.to_string(), self.family.spec())
    }

    fn term(&self, t: &Term, env: &Env) -> Result<Elem, SemanticsError> {
        match t {
            Term::Var(v) => env
                .iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|(_, e)| e.clone())
                .ok_or_else(|| SemanticsError::FreeVariable(v.clone())),
            Term::Dom(i) => match self.presentation {
                Some(p) => Ok(p.element(*i)?),
                None => Ok(self.family.element(*i)),
            },
            Term::Const(c) => self.family.constant(c).ok_or_else(|| self.uninterpreted(c)),
            Term::App(f, args) => match args.as_slice() {
                [a] => {
                    let x = self.term(a, env)?;
                    self.family.apply(f, &x).ok_or_else(|| self.uninterpreted(f))
                }
                _ => Err(self.uninterpreted(f)),
            },
        }
    }

    fn atom(&self, name: &str, args: &[Elem]) -> Result<bool, SemanticsError> {
        let sig = &self.signature;
        if let Some(k) = sig.function_arity(name) {
            return match (k, args) {
                (1, [x, y]) => Ok(self.family.apply(name, x).as_ref() == Some(y)),
                _ => Err(self.uninterpreted(name)),
            };
        }
        if sig.has_constant(name) {
            return match args {
                [x] => Ok(self.family.constant(name).as_ref() == Some(x)),
                _ => Err(self.uninterpreted(name)),
            };
        }
        if sig.relations().iter().any(|(n, a)| n == name && *a == args.len()) {
            return Ok(self.family.relation(name, args));
        }
        Err(self.uninterpreted(name))
    }

    fn eval(&self, f: &Formula, env: &mut Env) -> Result<bool, SemanticsError> {
        Ok(match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Eq(a, b) => self.term(a, env)? == self.term(b, env)?,
            Formula::Rel(r, args) => {
                let xs = args.iter().map(|a| self.term(a, env)).collect::<Result<Vec<_>, _>>()?;
                self.atom(r, &xs)?
            }
            Formula::Not(a) => !self.eval(a, env)?,
            Formula::And(a, b) => self.eval(a, env)? && self.eval(b, env)?,
            Formula::Or(a, b) => self.eval(a, env)? || self.eval(b, env)?,
            Formula::Implies(a, b) => !self.eval(a, env)? || self.eval(b, env)?,
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let universal = matches!(f, Formula::Forall(..));
                let candidates = self.candidates(f, env)?;
                for c in candidates {
                    env.push((v.clone(), c));
                    let r = self.eval(body, env);
                    env.pop();
                    if r? != universal {
                        return Ok(!universal);
                    }
                }
                universal
            }
        })
    }

    /// Elements of the structure named by the environment, the formula's
    /// domain constants and the signature's constants.
    fn parameters(&self, f: &Formula, env: &Env) -> Result<BTreeSet<Elem>, SemanticsError> {
        let mut out: BTreeSet<Elem> = env.iter().map(|(_, e)| e.clone()).collect();
        out.extend(self.constants.iter().cloned());
        for d in f.domain_constants() {
            out.insert(self.term(&Term::Dom(d), env)?);
        }
        Ok(out)
    }

    fn candidates(&self, f: &Formula, env: &Env) -> Result<Vec<Elem>, SemanticsError> {
        let params = self.parameters(f, env)?;
        Ok(match self.family {
            Family::Successor { shift, .. } => {
                let top = params
                    .iter()
                    .filter_map(|e| if let Elem::Nat(n) = e { Some(*n) } else { None })
                    .chain([*shift])
                    .max()
                    .unwrap_or(*shift);
                let rank = f.quantifier_rank() as u32;
                let depth = f.term_depth() as u64;
                let reach = (depth + 2) << (rank + 1);
                (*shift..=top + reach + 1).map(Elem::Nat).collect()
            }
            Family::Dlo01 | Family::Intervals { .. } => {
                let points: Vec<Q> =
                    params.iter().filter_map(|e| if let Elem::Rat(q) = e { Some(*q) } else { None }).collect();
                let mut out: Vec<Elem> = points.iter().map(|q| Elem::Rat(*q)).collect();
                for w in points.windows(2) {
                    let mid = Elem::Rat((w[0] + w[1]) / Q::from_integer(2));
                    if self.family.contains(&mid) {
                        out.push(mid);
                    }
                }
                out
            }
            Family::Shuffle | Family::ShuffleAdj => {
                let qs: BTreeSet<Q> =
                    params.iter().filter_map(|e| if let Elem::Pair(q, _) = e { Some(*q) } else { None }).collect();
                let qs: Vec<Q> = qs.into_iter().collect();
                let mut cells: Vec<Q> = qs.clone();
                for w in qs.windows(2) {
                    cells.push((w[0] + w[1]) / Q::from_integer(2));
                }
                match (qs.first(), qs.last()) {
                    (Some(lo), Some(hi)) => {
                        cells.push(lo - Q::from_integer(1));
                        cells.push(hi + Q::from_integer(1));
                    }
                    _ => cells.push(Q::from_integer(0)),
                }
                cells.into_iter().flat_map(|q| [Elem::Pair(q, false), Elem::Pair(q, true)]).collect()
            }
        })
    }
}

/// Truth of a sentence in the structure presented by `p`; domain constants
/// `#i` denote the elements `p` assigns to `i`.
pub fn truth(p: &Presentation, sentence: &Formula) -> Result<bool, SemanticsError> {
    truth_with(p.family(), Some(p), sentence, &Vec::new())
}

/// Truth in a family's standard enumeration under an assignment of abstract
/// elements to free variables.
pub fn truth_in_family(family: &Family, f: &Formula, assignment: &[(String, Elem)]) -> Result<bool, SemanticsError> {
    truth_with(family, None, f, assignment)
}

fn truth_with(
    family: &Family,
    presentation: Option<&Presentation>,
    f: &Formula,
    assignment: &[(String, Elem)],
) -> Result<bool, SemanticsError> {
    let signature = family.signature();
    let constants = signature.constants().iter().filter_map(|c| family.constant(c)).collect();
    let ev = Evaluator { family, presentation, signature, constants };
    let mut env: Env = assignment.to_vec();
    ev.eval(f, &mut env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::presentation::Permutation;

    fn holds(spec: &str, s: &str) -> bool {
        truth(&Presentation::from_spec(spec).unwrap(), &parse(s).unwrap()).unwrap()
    }

    #[test]
    fn successor_facts() {
        assert!(holds("succ0", "forall x. ~S(x) = c0"));
        assert!(holds("succ:shift=0", "exists y. S(y) = #3"));
        assert!(!holds("succ:shift=0", "exists y. S(y) = #0"));
        assert!(!holds("succ:shift=1", "exists x. S(x) = #0"));
        assert!(holds("succ:shift=1", "exists x. S(x) = #1"));
        assert!(holds("succ:shift=0", "forall x. exists y. S(x, y)"));
        assert!(holds("succ:shift=0", "exists x. forall y. ~S(y) = x"));
        assert!(!holds("succ:shift=0", "exists x. exists y. ~x = y & S(x) = S(y)"));
    }

    #[test]
    fn dense_order_facts() {
        assert!(holds("dlo01", "exists x. lo < x & x < hi"));
        assert!(holds("dlo01", "forall x. forall y. x < y -> exists z. x < z & z < y"));
        assert!(!holds("dlo01", "exists x. x < lo"));
        assert!(holds("a_n:n=1", "~exists x. e1 < x & x < e2"));
        assert!(holds("a_n:n=1", "exists x. e2 < x & x < e3"));
    }

    #[test]
    fn adjacency_facts() {
        assert!(holds("shuffle+adj", "forall x. exists y. Adj(x, y) | Adj(y, x)"));
        assert!(holds("shuffle+adj", "forall x. forall y. Adj(x, y) -> ~exists z. x < z & z < y"));
        assert!(holds(
            "shuffle",
            "forall x. exists y. (x < y & ~(exists z. x < z & z < y)) | (y < x & ~(exists z. y < z & z < x))"
        ));
    }

    #[test]
    fn pullbacks_translate() {
        let p = Presentation::from_spec("succ:shift=0").unwrap();
        let b = Presentation::pullback(&p, Permutation::finite([(0, 5), (5, 0)]).unwrap());
        assert!(truth(&b, &parse("~exists y. S(y) = #5").unwrap()).unwrap());
        assert!(truth(&b, &parse("exists y. S(y) = #0").unwrap()).unwrap());
    }
}
