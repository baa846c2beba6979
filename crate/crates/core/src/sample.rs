//! Seeded random formulas over the registered signatures, for testing.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::syntax::{free_var, Formula, Term, LT};
use crate::theory::TheoryId;

pub struct FormulaSampler {
    theory: TheoryId,
    /// Domain constants drawn from `#0..#(doms-1)`.
    pub doms: usize,
    /// Free variables `x0..x(free-1)` that may occur.
    pub free: usize,
    pub max_rank: usize,
    /// Upper bound on connective nesting below the quantifiers.
    pub max_depth: usize,
}

impl FormulaSampler {
    pub fn new(theory: TheoryId, doms: usize, free: usize, max_rank: usize) -> FormulaSampler {
        FormulaSampler { theory, doms, free, max_rank, max_depth: 3 }
    }

    fn term<R: Rng>(&self, rng: &mut R, bound: &[String], allow_app: bool) -> Term {
        let mut bases: Vec<Term> = bound.iter().map(|v| Term::var(v)).collect();
        bases.extend((0..self.free).map(|i| Term::Var(free_var(i))));
        bases.extend((0..self.doms).map(Term::Dom));
        match self.theory {
            TheoryId::Succ0 => bases.push(Term::cst("c0")),
            TheoryId::DloPP if rng.gen_bool(0.2) => {
                bases.push(Term::cst(if rng.gen_bool(0.5) { "lo" } else { "hi" }));
            }
            _ => {}
        }
        let base = bases.choose(rng).cloned().unwrap_or(Term::cst("c0"));
        if allow_app && matches!(self.theory, TheoryId::Succ0 | TheoryId::Succ) {
            let k = [0, 0, 1, 1, 2][rng.gen_range(0..5)];
            (0..k).fold(base, |t, _| Term::app("S", vec![t]))
        } else {
            base
        }
    }

    fn atom<R: Rng>(&self, rng: &mut R, bound: &[String]) -> Formula {
        let pick = rng.gen_range(0..10);
        match self.theory {
            TheoryId::Succ0 | TheoryId::Succ => {
                if pick < 2 {
                    Formula::rel("S", vec![self.term(rng, bound, false), self.term(rng, bound, false)])
                } else {
                    Formula::eq(self.term(rng, bound, true), self.term(rng, bound, true))
                }
            }
            TheoryId::DloPP => {
                if pick < 3 {
                    Formula::eq(self.term(rng, bound, false), self.term(rng, bound, false))
                } else {
                    Formula::lt(self.term(rng, bound, false), self.term(rng, bound, false))
                }
            }
            TheoryId::Adj => {
                let (a, b) = (self.term(rng, bound, false), self.term(rng, bound, false));
                match pick {
                    0..=1 => Formula::eq(a, b),
                    2..=5 => Formula::rel(LT, vec![a, b]),
                    _ => Formula::rel("Adj", vec![a, b]),
                }
            }
        }
    }

    fn formula<R: Rng>(&self, rng: &mut R, rank: usize, depth: usize, bound: &mut Vec<String>) -> Formula {
        let quantify = rank > 0 && rng.gen_bool(if bound.is_empty() { 0.8 } else { 0.45 });
        if quantify {
            let v = format!("v{}", bound.len());
            bound.push(v.clone());
            let body = self.formula(rng, rank - 1, depth, bound);
            bound.pop();
            return if rng.gen_bool(0.5) { Formula::exists(&v, body) } else { Formula::forall(&v, body) };
        }
        if depth == 0 || rng.gen_bool(0.35) {
            return self.atom(rng, bound);
        }
        match rng.gen_range(0..5) {
            0 => Formula::not(self.formula(rng, rank, depth - 1, bound)),
            1 | 2 => Formula::and(self.formula(rng, rank, depth - 1, bound), self.formula(rng, rank, depth - 1, bound)),
            3 => Formula::or(self.formula(rng, rank, depth - 1, bound), self.formula(rng, rank, depth - 1, bound)),
            _ => Formula::implies(self.formula(rng, rank, depth - 1, bound), self.formula(rng, rank, depth - 1, bound)),
        }
    }

    /// A formula of quantifier rank at most `max_rank`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Formula {
        self.formula(rng, self.max_rank, self.max_depth, &mut Vec::new())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for th in [TheoryId::Succ0, TheoryId::DloPP, TheoryId::Adj] {
            let s = FormulaSampler::new(th, 3, 0, 2);
            for _ in 0..50 {
                let f = s.sample(&mut rng);
                assert!(f.is_sentence(), "{f}");
                assert!(f.quantifier_rank() <= 2);
                assert!(f.domain_constants().iter().all(|&d| d < 3));
                th.signature().check(&f).unwrap();
            }
        }
    }
}
