//! Gödel coding of atomic sentences over the domain constants `#0, #1, ...`.
//!
//! Codes come in blocks. Block `n` holds every atom whose largest constant is
//! `#n`: first the equalities `#i = #n` for `i < n` (increasing `i`), then, for
//! each diagram relation in declaration order, all argument tuples over
//! `{0..n}` whose maximum is `n`, in lexicographic order. Trivial equalities
//! `#i = #i` get no code. Hence the first `l_n` codes are exactly the atoms
//! about `{0..n}`, with `l_n = n(n+1)/2 + Σ_R (n+1)^arity(R)`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::signature::Signature;
use crate::syntax::{Formula, Term};

pub type Code = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodingError {
    #[error("not an atomic formula: {0}")]
    NotAtomic(String),
    #[error("argument {0} is not a domain constant")]
    NonConstantTerm(String),
    #[error("trivial equality #{0} = #{0} has no code")]
    TrivialEquality(usize),
    #[error("relation {0} is not in the diagram signature")]
    UnknownRelation(String),
    #[error("relation {name} expects {expected} arguments, got {got}")]
    Arity { name: String, expected: usize, got: usize },
}

/// Atomic sentence about domain elements. Equalities are stored with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroundAtom {
    Eq(usize, usize),
    /// Index into [`Signature::diagram_relations`] and the argument tuple.
    Rel(usize, Vec<usize>),
}

impl GroundAtom {
    pub fn eq(i: usize, j: usize) -> Result<GroundAtom, CodingError> {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => Ok(GroundAtom::Eq(i, j)),
            std::cmp::Ordering::Greater => Ok(GroundAtom::Eq(j, i)),
            std::cmp::Ordering::Equal => Err(CodingError::TrivialEquality(i)),
        }
    }

    pub fn max_element(&self) -> usize {
        match self {
            GroundAtom::Eq(_, j) => *j,
            GroundAtom::Rel(_, args) => args.iter().copied().max().unwrap_or(0),
        }
    }

    pub fn elements(&self) -> Vec<usize> {
        match self {
            GroundAtom::Eq(i, j) => vec![*i, *j],
            GroundAtom::Rel(_, args) => args.clone(),
        }
    }

    /// Rename elements through an injective map.
    pub fn map(&self, f: impl Fn(usize) -> usize) -> GroundAtom {
        match self {
            GroundAtom::Eq(i, j) => GroundAtom::eq(f(*i), f(*j)).expect("renaming must be injective"),
            GroundAtom::Rel(r, args) => GroundAtom::Rel(*r, args.iter().map(|&a| f(a)).collect()),
        }
    }

    pub fn to_formula(&self, sig: &Signature) -> Formula {
        match self {
            GroundAtom::Eq(i, j) => Formula::Eq(Term::Dom(*i), Term::Dom(*j)),
            GroundAtom::Rel(r, args) => {
                Formula::Rel(sig.diagram_relations()[*r].name.clone(), args.iter().map(|&a| Term::Dom(a)).collect())
            }
        }
    }

    pub fn from_formula(f: &Formula, sig: &Signature) -> Result<GroundAtom, CodingError> {
        let dom = |t: &Term| match t {
            Term::Dom(n) => Ok(*n),
            other => Err(CodingError::NonConstantTerm(other.to_string())),
        };
        match f {
            Formula::Eq(a, b) => GroundAtom::eq(dom(a)?, dom(b)?),
            Formula::Rel(name, args) => {
                let r = sig.diagram_index(name).ok_or_else(|| CodingError::UnknownRelation(name.clone()))?;
                let expected = sig.diagram_relations()[r].arity;
                if expected != args.len() {
                    return Err(CodingError::Arity { name: name.clone(), expected, got: args.len() });
                }
                Ok(GroundAtom::Rel(r, args.iter().map(dom).collect::<Result<_, _>>()?))
            }
            other => Err(CodingError::NotAtomic(other.to_string())),
        }
    }
}

/// Atom with a sign: a member of the atomic diagram or of its complement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Literal {
    #[serde(skip)]
    pub atom: GroundAtom,
    pub positive: bool,
    pub text: String,
}

impl Literal {
    pub fn new(atom: GroundAtom, positive: bool, sig: &Signature) -> Literal {
        let f = atom.to_formula(sig);
        let text = if positive { f.to_string() } else { Formula::not(f).to_string() };
        Literal { atom, positive, text }
    }

    pub fn to_formula(&self, sig: &Signature) -> Formula {
        let f = self.atom.to_formula(sig);
        if self.positive {
            f
        } else {
            Formula::not(f)
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Block coding for one signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coding {
    arities: Vec<u32>,
}

fn pow(base: u64, exp: u32) -> u64 {
    base.checked_pow(exp).expect("atom code overflow")
}

impl Coding {
    pub fn new(sig: &Signature) -> Coding {
        Coding { arities: sig.diagram_relations().iter().map(|r| r.arity as u32).collect() }
    }

    /// Number of atoms in block `n`.
    pub fn block_size(&self, n: usize) -> u64 {
        let n = n as u64;
        n + self.arities.iter().map(|&a| pow(n + 1, a) - pow(n, a)).sum::<u64>()
    }

    /// `l_n`: how many codes mention only constants `#0..#n`.
    pub fn block_length(&self, n: usize) -> u64 {
        let m = n as u64;
        m * (m + 1) / 2 + self.arities.iter().map(|&a| pow(m + 1, a)).sum::<u64>()
    }

    fn block_start(&self, n: usize) -> u64 {
        if n == 0 {
            0
        } else {
            self.block_length(n - 1)
        }
    }

    /// Block containing `code`, i.e. the least `n` with `code < l_n`.
    pub fn block_of(&self, code: Code) -> usize {
        let mut hi = 1usize;
        while self.block_length(hi) <= code {
            hi *= 2;
        }
        let mut lo = 0usize;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.block_length(mid) > code {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    /// Smallest `n` with `l_n >= len`.
    pub fn covering_block(&self, len: u64) -> usize {
        if len == 0 {
            return 0;
        }
        self.block_of(len - 1)
    }

    /// If `len` is some `l_n`, that `n`.
    pub fn block_for_length(&self, len: u64) -> Option<usize> {
        let n = self.covering_block(len);
        (self.block_length(n) == len).then_some(n)
    }

    pub fn encode(&self, atom: &GroundAtom) -> Result<Code, CodingError> {
        match atom {
            GroundAtom::Eq(i, j) => {
                if i == j {
                    return Err(CodingError::TrivialEquality(*i));
                }
                let (i, n) = if i < j { (*i, *j) } else { (*j, *i) };
                Ok(self.block_start(n) + i as u64)
            }
            GroundAtom::Rel(r, args) => {
                let arity = *self.arities.get(*r).ok_or_else(|| CodingError::UnknownRelation(format!("#{r}")))?;
                if args.len() != arity as usize {
                    return Err(CodingError::Arity {
                        name: format!("#{r}"),
                        expected: arity as usize,
                        got: args.len(),
                    });
                }
                let n = args.iter().copied().max().unwrap_or(0);
                let mut code = self.block_start(n) + n as u64;
                code += self.arities[..*r].iter().map(|&a| pow(n as u64 + 1, a) - pow(n as u64, a)).sum::<u64>();
                Ok(code + rank_tuple(args, n))
            }
        }
    }

    pub fn decode(&self, code: Code) -> GroundAtom {
        let n = self.block_of(code);
        let mut r = code - self.block_start(n);
        if r < n as u64 {
            return GroundAtom::Eq(r as usize, n);
        }
        r -= n as u64;
        for (idx, &a) in self.arities.iter().enumerate() {
            let size = pow(n as u64 + 1, a) - pow(n as u64, a);
            if r < size {
                return GroundAtom::Rel(idx, unrank_tuple(r, n, a as usize));
            }
            r -= size;
        }
        unreachable!("code {code} outside block {n}")
    }
}

// Number of completions of `rem` free positions over {0..n}: all of them if `n`
// already occurs, otherwise only those that contain `n`.
fn completions(n: u64, rem: u32, has_max: bool) -> u64 {
    if has_max {
        pow(n + 1, rem)
    } else {
        pow(n + 1, rem) - pow(n, rem)
    }
}

fn rank_tuple(t: &[usize], n: usize) -> u64 {
    let mut rank = 0;
    let mut has_max = false;
    for (k, &tk) in t.iter().enumerate() {
        let rem = (t.len() - k - 1) as u32;
        for v in 0..tk {
            rank += completions(n as u64, rem, has_max || v == n);
        }
        has_max |= tk == n;
    }
    rank
}

fn unrank_tuple(mut r: u64, n: usize, arity: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(arity);
    let mut has_max = false;
    for k in 0..arity {
        let rem = (arity - k - 1) as u32;
        for v in 0..=n {
            let c = completions(n as u64, rem, has_max || v == n);
            if r < c {
                out.push(v);
                has_max |= v == n;
                break;
            }
            r -= c;
        }
    }
    out
}

/// Code of an atomic sentence whose arguments are domain constants.
pub fn encode_atomic(f: &Formula, sig: &Signature) -> Result<Code, CodingError> {
    Coding::new(sig).encode(&GroundAtom::from_formula(f, sig)?)
}

pub fn decode_atomic(code: Code, sig: &Signature) -> Formula {
    Coding::new(sig).decode(code).to_formula(sig)
}

pub fn block_length(n: usize, sig: &Signature) -> u64 {
    Coding::new(sig).block_length(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn binary_r() -> Signature {
        Signature::relational(&[("R", 2)])
    }

    #[test]
    fn first_codes_for_one_binary_relation() {
        let sig = binary_r();
        assert_eq!(encode_atomic(&parse("R(#0, #0)").unwrap(), &sig).unwrap(), 0);
        assert_eq!(encode_atomic(&parse("#0 = #1").unwrap(), &sig).unwrap(), 1);
        assert_eq!(encode_atomic(&parse("#1 = #0").unwrap(), &sig).unwrap(), 1);
        assert_eq!(decode_atomic(0, &sig), parse("R(#0, #0)").unwrap());
        assert_eq!(decode_atomic(block_length(1, &sig) - 1, &sig), parse("R(#1, #1)").unwrap());
    }

    #[test]
    fn block_lengths_for_one_binary_relation() {
        let sig = binary_r();
        assert_eq!((0..3).map(|n| block_length(n, &sig)).collect::<Vec<_>>(), vec![1, 5, 12]);
    }

    #[test]
    fn coding_errors() {
        let sig = binary_r();
        assert_eq!(encode_atomic(&parse("#2 = #2").unwrap(), &sig), Err(CodingError::TrivialEquality(2)));
        assert!(matches!(encode_atomic(&parse("R(x0, #1)").unwrap(), &sig), Err(CodingError::NonConstantTerm(_))));
        assert!(matches!(encode_atomic(&parse("~R(#0, #1)").unwrap(), &sig), Err(CodingError::NotAtomic(_))));
        assert!(matches!(encode_atomic(&parse("Q(#0)").unwrap(), &sig), Err(CodingError::UnknownRelation(_))));
    }

    #[test]
    fn empty_relational_signature_still_codes_equalities() {
        let sig = Signature::relational(&[]);
        let c = Coding::new(&sig);
        assert_eq!(c.block_length(0), 0);
        assert_eq!(c.decode(0), GroundAtom::Eq(0, 1));
        assert_eq!(c.decode(2), GroundAtom::Eq(1, 2));
    }

    #[test]
    fn block_for_length_recognizes_boundaries() {
        let c = Coding::new(&binary_r());
        assert_eq!(c.block_for_length(12), Some(2));
        assert_eq!(c.block_for_length(11), None);
        assert_eq!(c.covering_block(6), 2);
        assert_eq!(c.covering_block(0), 0);
    }
}
