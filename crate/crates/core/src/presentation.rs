//! Structures with domain ω, presented through their atomic diagrams.
//!
//! Each built-in family fixes a bijection between ω and an abstract domain
//! (naturals, rationals, or rationals with a bit). Pullbacks along a
//! permutation of ω give further presentations of the same structure.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::coding::{Code, Coding, GroundAtom, Literal};
use crate::rationals::{interior, rational, Q};
use crate::signature::{Origin, Signature};
use crate::syntax::{Formula, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("query {code} lies beyond the available prefix of length {len}")]
    BeyondPrefix { code: Code, len: u64 },
    #[error("permutation queried at {element}, beyond its {stages} constructed stages")]
    InsufficientStages { element: usize, stages: usize },
    #[error("query {code} is not determined by the partial diagram")]
    Unassigned { code: Code },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("invalid presentation: {0}")]
    Invalid(String),
    #[error("not a permutation: {0}")]
    BadPermutation(String),
    #[error("element {0} repeated in tuple")]
    Repeated(usize),
    #[error("expected {expected} elements, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("bitstring length {0} is not a block length")]
    NotBlockBoundary(usize),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Access to an atomic diagram, one code at a time.
pub trait Oracle {
    fn signature(&self) -> &Signature;
    fn query(&mut self, code: Code) -> Result<bool, OracleError>;
}

/// An element of a family's abstract domain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Elem {
    Nat(u64),
    Rat(Q),
    /// A point of ℚ × {0, 1}, ordered lexicographically.
    Pair(Q, bool),
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Nat(n) => write!(f, "{n}"),
            Elem::Rat(q) => write!(f, "{q}"),
            Elem::Pair(q, b) => write!(f, "({q},{})", u8::from(*b)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    /// Naturals from `shift` on with successor; with `zero`, the least
    /// element is named `c0`.
    Successor { shift: u64, zero: bool },
    /// Rationals in [0, 1] with endpoints `lo`, `hi`.
    Dlo01,
    /// Rationals in [0,1] ∪ [2,3] ∪ ... ∪ [2n, 2n+1], endpoints `e0..e(2n+1)`.
    Intervals { n: usize },
    /// ℚ × {0, 1} in lexicographic order.
    Shuffle,
    /// The same with `Adj` holding between (q, 0) and (q, 1).
    ShuffleAdj,
}

fn q(n: i128) -> Q {
    Q::from_integer(n)
}

impl Family {
    pub fn signature(&self) -> Signature {
        match self {
            Family::Successor { zero: false, .. } => Signature::new(&[], &[("S", 1)], &[]),
            Family::Successor { zero: true, .. } => Signature::new(&[], &[("S", 1)], &["c0"]),
            Family::Dlo01 => Signature::new(&[("<", 2)], &[], &["lo", "hi"]),
            Family::Intervals { n } => {
                let names: Vec<String> = (0..2 * n + 2).map(|k| format!("e{k}")).collect();
                let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                Signature::new(&[("<", 2)], &[], &refs)
            }
            Family::Shuffle => Signature::new(&[("<", 2)], &[], &[]),
            Family::ShuffleAdj => Signature::new(&[("<", 2), ("Adj", 2)], &[], &[]),
        }
        .expect("built-in signatures are valid")
    }

    /// The abstract element presented by domain index `i`.
    pub fn element(&self, i: usize) -> Elem {
        let i = i as u64;
        match self {
            Family::Successor { shift, .. } => Elem::Nat(shift + i),
            Family::Dlo01 => match i {
                0 | 1 => Elem::Rat(q(i as i128)),
                _ => Elem::Rat(interior(i - 1)),
            },
            Family::Intervals { n } => {
                let ends = 2 * *n as u64 + 2;
                if i < ends {
                    Elem::Rat(q(i as i128))
                } else {
                    let t = i - ends;
                    let per = *n as u64 + 1;
                    Elem::Rat(q(2 * (t % per) as i128) + interior(t / per + 1))
                }
            }
            Family::Shuffle | Family::ShuffleAdj => Elem::Pair(rational(i / 2), i % 2 == 1),
        }
    }

    /// Value of a named constant.
    pub fn constant(&self, name: &str) -> Option<Elem> {
        match (self, name) {
            (Family::Successor { shift, zero: true }, "c0") => Some(Elem::Nat(*shift)),
            (Family::Dlo01, "lo") => Some(Elem::Rat(q(0))),
            (Family::Dlo01, "hi") => Some(Elem::Rat(q(1))),
            (Family::Intervals { n }, e) => {
                let k: usize = e.strip_prefix('e')?.parse().ok()?;
                (k < 2 * n + 2).then(|| Elem::Rat(q(k as i128)))
            }
            _ => None,
        }
    }

    /// Value of a unary function symbol.
    pub fn apply(&self, name: &str, x: &Elem) -> Option<Elem> {
        match (self, name, x) {
            (Family::Successor { .. }, "S", Elem::Nat(n)) => Some(Elem::Nat(n + 1)),
            _ => None,
        }
    }

    /// Whether `x` belongs to the abstract domain.
    pub fn contains(&self, x: &Elem) -> bool {
        match (self, x) {
            (Family::Successor { shift, .. }, Elem::Nat(n)) => n >= shift,
            (Family::Dlo01, Elem::Rat(r)) => *r >= q(0) && *r <= q(1),
            (Family::Intervals { n }, Elem::Rat(r)) => {
                let i = r.floor().to_integer();
                *r >= q(0) && i <= 2 * *n as i128 + 1 && (i % 2 == 0 || *r == q(i))
            }
            (Family::Shuffle | Family::ShuffleAdj, Elem::Pair(..)) => true,
            _ => false,
        }
    }

    /// Truth of a surface relation symbol (not a graph or constant relation).
    pub fn relation(&self, name: &str, args: &[Elem]) -> bool {
        match (name, args) {
            ("<", [a, b]) => a < b,
            ("Adj", [Elem::Pair(p, false), Elem::Pair(r, true)]) => matches!(self, Family::ShuffleAdj) && p == r,
            _ => false,
        }
    }

    /// Truth of a diagram relation (by index in the diagram signature).
    pub fn holds(&self, sig: &Signature, rel: usize, args: &[Elem]) -> bool {
        let r = &sig.diagram_relations()[rel];
        match r.origin {
            Origin::Relation => self.relation(&r.name, args),
            Origin::FunctionGraph => {
                let (last, ins) = args.split_last().expect("graph relations have arity >= 2");
                match ins {
                    [x] => self.apply(&r.name, x).as_ref() == Some(last),
                    _ => false,
                }
            }
            Origin::Constant => self.constant(&r.name).as_ref() == Some(&args[0]),
        }
    }

    pub fn spec(&self) -> String {
        match self {
            Family::Successor { shift, zero: false } => format!("succ:shift={shift}"),
            Family::Successor { shift: 0, zero: true } => "succ0".to_string(),
            Family::Successor { shift, zero: true } => format!("succ0:shift={shift}"),
            Family::Dlo01 => "dlo01".to_string(),
            Family::Intervals { n } => format!("a_n:n={n}"),
            Family::Shuffle => "shuffle".to_string(),
            Family::ShuffleAdj => "shuffle+adj".to_string(),
        }
    }
}

/// A finite injective map on an initial segment `{0..k-1}` of ω.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Condition(pub Vec<usize>);

impl Condition {
    pub fn new(values: Vec<usize>) -> Result<Condition, PresentationError> {
        let mut seen = BTreeSet::new();
        for &v in &values {
            if !seen.insert(v) {
                return Err(PresentationError::Repeated(v));
            }
        }
        Ok(Condition(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whether `self` extends `other` (as a graph, `self ⊇ other`).
    pub fn extends(&self, other: &Condition) -> bool {
        self.0.starts_with(&other.0)
    }

    pub fn contains_value(&self, v: usize) -> bool {
        self.0.contains(&v)
    }

    pub fn get(&self, i: usize) -> Option<usize> {
        self.0.get(i).copied()
    }

    pub fn max_value(&self) -> Option<usize> {
        self.0.iter().copied().max()
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
    }
}

/// A bijection of ω.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Permutation {
    /// Explicit pairs, identity elsewhere.
    Finite(BTreeMap<usize, usize>),
    /// Known only on the domain of a condition.
    Staged(Condition),
}

impl Permutation {
    pub fn identity() -> Permutation {
        Permutation::Finite(BTreeMap::new())
    }

    pub fn finite(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Permutation, PresentationError> {
        let map: BTreeMap<usize, usize> = pairs.into_iter().filter(|(a, b)| a != b).collect();
        let support: BTreeSet<usize> = map.keys().copied().collect();
        let image: BTreeSet<usize> = map.values().copied().collect();
        if support != image || image.len() != map.len() {
            return Err(PresentationError::BadPermutation(format!("pairs {map:?} do not permute their support")));
        }
        Ok(Permutation::Finite(map))
    }

    pub fn apply(&self, i: usize) -> Result<usize, OracleError> {
        match self {
            Permutation::Finite(m) => Ok(m.get(&i).copied().unwrap_or(i)),
            Permutation::Staged(c) => c.get(i).ok_or(OracleError::InsufficientStages { element: i, stages: c.len() }),
        }
    }

    pub fn inverse(&self) -> Option<Permutation> {
        match self {
            Permutation::Finite(m) => Some(Permutation::Finite(m.iter().map(|(a, b)| (*b, *a)).collect())),
            Permutation::Staged(_) => None,
        }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Permutation::Finite(m) => {
                write!(f, "{}", m.iter().map(|(a, b)| format!("{a}>{b}")).collect::<Vec<_>>().join(","))
            }
            Permutation::Staged(c) => write!(f, "staged{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Kind {
    Builtin(Family),
    Pullback { base: Box<Presentation>, perm: Permutation },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    signature: Signature,
    coding: Coding,
    kind: Kind,
}

/// Presentation families addressable by name, with their parameters.
pub const FAMILIES: [(&str, &str); 7] = [
    ("succ", "succ:shift=N, the naturals from N on with successor S"),
    ("succ0", "succ0:shift=N, as succ with c0 naming the least element"),
    ("dlo01", "the rationals in [0,1] with endpoints lo and hi"),
    ("a_n", "a_n:n=N, the rationals in [0,1] ∪ [2,3] ∪ … ∪ [2N,2N+1] with all endpoints named"),
    ("shuffle", "ℚ × {0,1} ordered lexicographically"),
    ("shuffle+adj", "shuffle with the adjacency relation Adj"),
    ("pullback", "pullback:<base>:a>b,…, the base relabeled along a finitely supported permutation"),
];

impl Presentation {
    pub fn builtin(family: Family) -> Presentation {
        let signature = family.signature();
        Presentation { coding: Coding::new(&signature), signature, kind: Kind::Builtin(family) }
    }

    /// `B` with `B ⊨ ψ(b⃗)` iff `base ⊨ ψ(f(b⃗))`.
    pub fn pullback(base: &Presentation, perm: Permutation) -> Presentation {
        Presentation {
            signature: base.signature.clone(),
            coding: base.coding.clone(),
            kind: Kind::Pullback { base: Box::new(base.clone()), perm },
        }
    }

    /// Parse a presentation name such as `succ:shift=1` or `pullback:dlo01:0>2,2>0`.
    pub fn from_spec(spec: &str) -> Result<Presentation, PresentationError> {
        let invalid = |msg: &str| PresentationError::Invalid(format!("{spec}: {msg}"));
        if let Some(rest) = spec.strip_prefix("pullback:") {
            let (base, pairs) = rest.rsplit_once(':').ok_or_else(|| invalid("expected pullback:<base>:<pairs>"))?;
            let base = Presentation::from_spec(base)?;
            let mut map = Vec::new();
            for pair in pairs.split(',').filter(|p| !p.is_empty()) {
                let (a, b) = pair.split_once('>').ok_or_else(|| invalid("pairs are written a>b"))?;
                let a = a.trim().parse::<usize>().map_err(|_| invalid("bad element"))?;
                let b = b.trim().parse::<usize>().map_err(|_| invalid("bad element"))?;
                map.push((a, b));
            }
            return Ok(Presentation::pullback(&base, Permutation::finite(map)?));
        }
        let (name, params) = match spec.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (spec, None),
        };
        let param = |key: &str| -> Result<Option<u64>, PresentationError> {
            match params {
                None => Ok(None),
                Some(p) => {
                    let (k, v) = p.split_once('=').ok_or_else(|| invalid("parameters are written key=value"))?;
                    if k != key {
                        return Err(invalid(&format!("unknown parameter {k}")));
                    }
                    v.parse().map(Some).map_err(|_| invalid("parameter must be a natural number"))
                }
            }
        };
        let no_params = || if params.is_some() { Err(invalid("takes no parameters")) } else { Ok(()) };
        let family = match name {
            "succ" => Family::Successor { shift: param("shift")?.unwrap_or(0), zero: false },
            "succ0" => Family::Successor { shift: param("shift")?.unwrap_or(0), zero: true },
            "dlo01" => no_params().map(|_| Family::Dlo01)?,
            "a_n" => {
                let n = param("n")?.ok_or_else(|| invalid("a_n needs n=<N>"))?;
                Family::Intervals { n: n as usize }
            }
            "shuffle" => no_params().map(|_| Family::Shuffle)?,
            "shuffle+adj" => no_params().map(|_| Family::ShuffleAdj)?,
            _ => return Err(invalid("unknown family")),
        };
        Ok(Presentation::builtin(family))
    }

    pub fn spec(&self) -> String {
        match &self.kind {
            Kind::Builtin(f) => f.spec(),
            Kind::Pullback { base, perm } => format!("pullback:{}:{perm}", base.spec()),
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn coding(&self) -> &Coding {
        &self.coding
    }

    /// The family this presentation is ultimately a copy of.
    pub fn family(&self) -> &Family {
        match &self.kind {
            Kind::Builtin(f) => f,
            Kind::Pullback { base, .. } => base.family(),
        }
    }

    /// Abstract element presented by domain index `i`.
    pub fn element(&self, i: usize) -> Result<Elem, OracleError> {
        match &self.kind {
            Kind::Builtin(f) => Ok(f.element(i)),
            Kind::Pullback { base, perm } => base.element(perm.apply(i)?),
        }
    }

    pub fn holds(&self, atom: &GroundAtom) -> Result<bool, OracleError> {
        match atom {
            GroundAtom::Eq(i, j) => Ok(i == j),
            GroundAtom::Rel(r, args) => {
                let elems = args.iter().map(|&a| self.element(a)).collect::<Result<Vec<_>, _>>()?;
                Ok(self.family().holds(&self.signature, *r, &elems))
            }
        }
    }

    pub fn query_code(&self, code: Code) -> Result<bool, OracleError> {
        self.holds(&self.coding.decode(code))
    }

    /// Bits for all codes below `l_n`.
    pub fn initial_segment(&self, n: usize) -> Result<FiniteDiagram, OracleError> {
        let bits = (0..self.coding.block_length(n)).map(|c| self.query_code(c)).collect::<Result<_, _>>()?;
        Ok(FiniteDiagram { bits, n })
    }

    /// All literals true in the presentation about exactly the given elements.
    pub fn delta_restrict(&self, tuple: &[usize]) -> Result<BTreeSet<Literal>, PresentationError> {
        let mut seen = BTreeSet::new();
        for &t in tuple {
            if !seen.insert(t) {
                return Err(PresentationError::Repeated(t));
            }
        }
        let mut out = BTreeSet::new();
        for (a, &i) in tuple.iter().enumerate() {
            for &j in &tuple[a + 1..] {
                let atom = GroundAtom::Eq(i.min(j), i.max(j));
                out.insert(Literal::new(atom, false, &self.signature));
            }
        }
        for (r, rel) in self.signature.diagram_relations().iter().enumerate() {
            for args in itertools::Itertools::multi_cartesian_product((0..rel.arity).map(|_| tuple.iter().copied())) {
                let atom = GroundAtom::Rel(r, args);
                let positive = self.holds(&atom)?;
                out.insert(Literal::new(atom, positive, &self.signature));
            }
        }
        Ok(out)
    }

    /// Permute an initial segment of `self` so that domain index `i` of the
    /// result plays the role of `e[i]` for `i < |p|`.
    pub fn canonicalize(&self, e: &[usize], p: &Condition) -> Result<Presentation, PresentationError> {
        if e.len() != p.len() {
            return Err(PresentationError::LengthMismatch { expected: p.len(), got: e.len() });
        }
        Ok(Presentation::pullback(self, aligning_permutation(e)?))
    }
}

/// A finitely supported permutation sending `i` to `e[i]`. Leftover points of
/// `{0..k-1} ∪ e⃗` are matched in increasing order; everything else is fixed.
pub fn aligning_permutation(e: &[usize]) -> Result<Permutation, PresentationError> {
    let targets: BTreeSet<usize> = e.iter().copied().collect();
    if targets.len() != e.len() {
        let dup = e.iter().find(|v| e.iter().filter(|w| w == v).count() > 1).expect("has duplicate");
        return Err(PresentationError::Repeated(*dup));
    }
    let k = e.len();
    let domain: BTreeSet<usize> = (0..k).chain(e.iter().copied()).collect();
    let free_sources = domain.iter().filter(|&&d| d >= k);
    let free_targets = domain.iter().filter(|d| !targets.contains(d));
    let pairs = e.iter().copied().enumerate().chain(free_sources.copied().zip(free_targets.copied()));
    Permutation::finite(pairs)
}

impl Oracle for Presentation {
    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn query(&mut self, code: Code) -> Result<bool, OracleError> {
        self.query_code(code)
    }
}

/// A finite piece of an atomic diagram: the bits of all codes below `l_n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FiniteDiagram {
    bits: Vec<bool>,
    n: usize,
}

impl FiniteDiagram {
    pub fn new(bits: Vec<bool>, coding: &Coding) -> Result<FiniteDiagram, PresentationError> {
        let n = coding.block_for_length(bits.len() as u64).filter(|_| !bits.is_empty());
        match n {
            Some(n) => Ok(FiniteDiagram { bits, n }),
            None => Err(PresentationError::NotBlockBoundary(bits.len())),
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// The largest domain constant the diagram talks about.
    pub fn m(&self) -> usize {
        self.n
    }
}

impl fmt::Display for FiniteDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.bits.iter().try_for_each(|&b| write!(f, "{}", u8::from(b)))
    }
}

/// The conjunction of the literals recorded by `sigma` together with the
/// pairwise distinctness of `#0..#m`.
pub fn gamma_sigma(sigma: &FiniteDiagram, sig: &Signature) -> Formula {
    let coding = Coding::new(sig);
    let mut lits = Vec::new();
    for (code, &bit) in sigma.bits.iter().enumerate() {
        let atom = coding.decode(code as Code);
        if let GroundAtom::Eq(..) = atom {
            continue;
        }
        lits.push(Literal::new(atom, bit, sig).to_formula(sig));
    }
    for j in 0..=sigma.n {
        for i in 0..j {
            lits.push(Formula::neq(Term::Dom(i), Term::Dom(j)));
        }
    }
    Formula::conj(lits)
}

/// The prefix of an atomic diagram, as seen through a condition: answers codes
/// below `l_(|bits| block)` and refuses anything else.
#[derive(Debug, Clone)]
pub struct PrefixOracle {
    signature: Signature,
    bits: Vec<bool>,
}

impl PrefixOracle {
    pub fn new(signature: Signature, bits: Vec<bool>) -> PrefixOracle {
        PrefixOracle { signature, bits }
    }

    /// `Δ(q⁻¹(A))` restricted to the constants `0..|q|-1`.
    pub fn pulled_back(p: &Presentation, q: &Condition) -> Result<PrefixOracle, OracleError> {
        let staged = Presentation::pullback(p, Permutation::Staged(q.clone()));
        let len = if q.is_empty() { 0 } else { p.coding.block_length(q.len() - 1) };
        let bits = (0..len).map(|c| staged.query_code(c)).collect::<Result<_, _>>()?;
        Ok(PrefixOracle { signature: p.signature.clone(), bits })
    }

    pub fn len(&self) -> u64 {
        self.bits.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

impl Oracle for PrefixOracle {
    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn query(&mut self, code: Code) -> Result<bool, OracleError> {
        self.bits.get(code as usize).copied().ok_or(OracleError::BeyondPrefix { code, len: self.len() })
    }
}

/// An oracle expanded by one named constant denoting a fixed element.
pub struct ExpandedOracle<'a, O: Oracle + ?Sized> {
    inner: &'a mut O,
    signature: Signature,
    inner_coding: Coding,
    coding: Coding,
    constant: usize,
    element: usize,
}

impl<'a, O: Oracle + ?Sized> ExpandedOracle<'a, O> {
    pub fn new(inner: &'a mut O, name: &str, element: usize) -> Result<ExpandedOracle<'a, O>, PresentationError> {
        let signature = inner.signature().with_constant(name).map_err(|e| PresentationError::Invalid(e.to_string()))?;
        let constant = signature.diagram_relations().len() - 1;
        Ok(ExpandedOracle {
            inner_coding: Coding::new(inner.signature()),
            coding: Coding::new(&signature),
            signature,
            inner,
            constant,
            element,
        })
    }
}

impl<O: Oracle + ?Sized> Oracle for ExpandedOracle<'_, O> {
    fn signature(&self) -> &Signature {
        &self.signature
    }

    fn query(&mut self, code: Code) -> Result<bool, OracleError> {
        match self.coding.decode(code) {
            GroundAtom::Eq(i, j) => Ok(i == j),
            GroundAtom::Rel(r, args) if r == self.constant => Ok(args[0] == self.element),
            atom => {
                // Relations other than the new constant keep their index.
                let inner_code = self.inner_coding.encode(&atom).expect("same relation layout");
                self.inner.query(inner_code)
            }
        }
    }
}

/// Records every query passed to the wrapped oracle.
pub struct LoggingOracle<'a, O: Oracle + ?Sized> {
    inner: &'a mut O,
    pub log: Vec<Code>,
}

impl<'a, O: Oracle + ?Sized> LoggingOracle<'a, O> {
    pub fn new(inner: &'a mut O) -> LoggingOracle<'a, O> {
        LoggingOracle { inner, log: Vec::new() }
    }
}

impl<O: Oracle + ?Sized> Oracle for LoggingOracle<'_, O> {
    fn signature(&self) -> &Signature {
        self.inner.signature()
    }

    fn query(&mut self, code: Code) -> Result<bool, OracleError> {
        self.log.push(code);
        self.inner.query(code)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::encode_atomic;
    use crate::parser::parse;

    fn code(p: &Presentation, s: &str) -> Code {
        encode_atomic(&parse(s).unwrap(), p.signature()).unwrap()
    }

    #[test]
    fn successor_edges() {
        let p = Presentation::from_spec("succ:shift=0").unwrap();
        assert!(p.query_code(code(&p, "S(#0, #1)")).unwrap());
        assert!(!p.query_code(code(&p, "S(#1, #0)")).unwrap());
        let bits = p.initial_segment(1).unwrap();
        assert_eq!(bits.to_string(), "00100");
    }

    #[test]
    fn dense_order_enumeration() {
        let p = Presentation::from_spec("dlo01").unwrap();
        assert!(p.query_code(code(&p, "#0 < #1")).unwrap());
        assert_eq!(p.element(2).unwrap(), Elem::Rat(Q::new(1, 2)));
        assert!(p.query_code(code(&p, "#2 < #1")).unwrap());
        assert!(p.query_code(code(&p, "lo(#0)")).unwrap());
    }

    #[test]
    fn interval_family() {
        let f = Family::Intervals { n: 1 };
        let elems: Vec<Elem> = (0..8).map(|i| f.element(i)).collect();
        assert_eq!(elems[4], Elem::Rat(Q::new(1, 2)));
        assert_eq!(elems[5], Elem::Rat(Q::new(5, 2)));
        assert!(elems.iter().all(|e| f.contains(e)));
        assert!(!f.contains(&Elem::Rat(Q::new(3, 2))));
    }

    #[test]
    fn adjacency_pairs() {
        let p = Presentation::from_spec("shuffle+adj").unwrap();
        assert!(p.query_code(code(&p, "Adj(#0, #1)")).unwrap());
        assert!(!p.query_code(code(&p, "Adj(#1, #0)")).unwrap());
        assert!(!p.query_code(code(&p, "Adj(#0, #3)")).unwrap());
        assert!(p.query_code(code(&p, "#4 < #5")).unwrap());
    }

    #[test]
    fn pullback_swap() {
        let p = Presentation::from_spec("succ:shift=0").unwrap();
        let b = Presentation::pullback(&p, Permutation::finite([(0, 5), (5, 0)]).unwrap());
        assert!(b.query_code(code(&b, "S(#5, #1)")).unwrap());
        let back = Presentation::pullback(&b, Permutation::finite([(0, 5), (5, 0)]).unwrap());
        for c in 0..p.coding().block_length(10) {
            assert_eq!(back.query_code(c), p.query_code(c));
        }
        assert_eq!(Presentation::from_spec(&b.spec()).unwrap(), b);
    }

    #[test]
    fn staged_permutation_refuses_unknown_points() {
        let p = Presentation::from_spec("succ:shift=0").unwrap();
        let b = Presentation::pullback(&p, Permutation::Staged(Condition::new(vec![3, 1]).unwrap()));
        assert!(b.query_code(code(&b, "S(#0, #1)")).is_ok());
        assert!(matches!(b.query_code(code(&b, "S(#2, #0)")), Err(OracleError::InsufficientStages { .. })));
    }

    #[test]
    fn restricted_diagram() {
        let p = Presentation::from_spec("succ:shift=0").unwrap();
        assert!(p.delta_restrict(&[]).unwrap().is_empty());
        let lits: BTreeSet<String> = p.delta_restrict(&[0, 1]).unwrap().iter().map(|l| l.text.clone()).collect();
        let expected: BTreeSet<String> =
            ["S(#0, #1)", "~S(#1, #0)", "~S(#0, #0)", "~S(#1, #1)", "~#0 = #1"].iter().map(|s| s.to_string()).collect();
        assert_eq!(lits, expected);
        assert!(matches!(p.delta_restrict(&[2, 2]), Err(PresentationError::Repeated(2))));
    }

    #[test]
    fn gamma_of_single_bit() {
        let sig = Signature::relational(&[("R", 2)]);
        let coding = Coding::new(&sig);
        let sigma = FiniteDiagram::new(vec![false], &coding).unwrap();
        assert_eq!(gamma_sigma(&sigma, &sig).to_string(), "~R(#0, #0)");
        assert!(FiniteDiagram::new(vec![false; 3], &coding).is_err());
    }

    #[test]
    fn canonicalize_aligns_prefix() {
        let e = Presentation::from_spec("succ:shift=0").unwrap();
        let c = e.canonicalize(&[3], &Condition::new(vec![3]).unwrap()).unwrap();
        assert_eq!(c.element(0).unwrap(), Elem::Nat(3));
        let same = e.canonicalize(&[], &Condition::default()).unwrap();
        for code in 0..e.coding().block_length(10) {
            assert_eq!(same.query_code(code), e.query_code(code));
        }
        assert!(e.canonicalize(&[1, 2], &Condition::new(vec![0]).unwrap()).is_err());
    }

    #[test]
    fn expanded_oracle_names_an_element() {
        let mut p = Presentation::from_spec("succ:shift=0").unwrap();
        let mut x = ExpandedOracle::new(&mut p, "c0", 2).unwrap();
        let sig = x.signature().clone();
        let c = |s: &str| encode_atomic(&parse(s).unwrap(), &sig).unwrap();
        assert!(x.query(c("c0(#2)")).unwrap());
        assert!(!x.query(c("c0(#0)")).unwrap());
        assert!(x.query(c("S(#2, #3)")).unwrap());
    }
}
