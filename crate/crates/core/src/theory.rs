//! The registered theories: signatures, canonical models, ground-truth
//! evaluation and checks of the quantifier-elimination output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::presentation::{Family, Presentation};
use crate::qe::{eliminate, interpretable, universal_pair, QeError, UniversalPair};
use crate::semantics::{truth, SemanticsError};
use crate::signature::Signature;
use crate::syntax::{Formula, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum TheoryId {
    /// Successor with a constant for its least element.
    Succ0,
    /// Successor alone; not model complete.
    Succ,
    /// Dense linear order with named endpoints.
    DloPP,
    /// ℚ × {0,1} ordered lexicographically, with adjacency.
    Adj,
}

pub const ALL_THEORIES: [TheoryId; 4] = [TheoryId::Succ0, TheoryId::Succ, TheoryId::DloPP, TheoryId::Adj];

impl TheoryId {
    pub fn name(self) -> &'static str {
        match self {
            TheoryId::Succ0 => "succ0",
            TheoryId::Succ => "succ",
            TheoryId::DloPP => "dlo++",
            TheoryId::Adj => "adj",
        }
    }

    pub fn from_name(name: &str) -> Option<TheoryId> {
        ALL_THEORIES.into_iter().find(|t| t.name() == name)
    }

    pub fn canonical_family(self) -> Family {
        match self {
            TheoryId::Succ0 => Family::Successor { shift: 0, zero: true },
            TheoryId::Succ => Family::Successor { shift: 0, zero: false },
            TheoryId::DloPP => Family::Dlo01,
            TheoryId::Adj => Family::ShuffleAdj,
        }
    }

    pub fn canonical(self) -> Presentation {
        Presentation::builtin(self.canonical_family())
    }

    pub fn signature(self) -> Signature {
        self.canonical_family().signature()
    }

    pub fn is_model_complete(self) -> bool {
        self != TheoryId::Succ
    }

    /// Model completeness is established only by testing the eliminator.
    pub fn test_validated(self) -> bool {
        self == TheoryId::Adj
    }

    pub fn docs(self) -> &'static str {
        match self {
            TheoryId::Succ0 => "Th(ω, S, 0): successor with its least element named c0; admits elimination down to equations between S-terms",
            TheoryId::Succ => "Th(ω, S): successor alone; (ω−{0}, S) is a substructure and elementary equivalent that is not an elementary substructure",
            TheoryId::DloPP => "dense linear order with endpoints lo < hi; canonical model ℚ ∩ [0,1]",
            TheoryId::Adj => "ℚ × {0,1} in lexicographic order with Adj on each pair (q,0),(q,1); model completeness validated by tests",
        }
    }

    /// Whether a presentation's structure is a model of this theory.
    pub fn accepts(self, p: &Presentation) -> bool {
        matches!(
            (self, p.family()),
            (TheoryId::Succ0, Family::Successor { zero: true, .. })
                | (TheoryId::Succ, Family::Successor { zero: false, .. })
                | (TheoryId::DloPP, Family::Dlo01)
                | (TheoryId::Adj, Family::ShuffleAdj)
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoryDescriptor {
    pub id: TheoryId,
    pub name: &'static str,
    pub signature: String,
    pub canonical: String,
    pub model_complete: bool,
    pub test_validated: bool,
    pub docs: &'static str,
}

pub fn registry() -> Vec<TheoryDescriptor> {
    ALL_THEORIES
        .into_iter()
        .map(|id| TheoryDescriptor {
            id,
            name: id.name(),
            signature: id.signature().to_string(),
            canonical: id.canonical().spec(),
            model_complete: id.is_model_complete(),
            test_validated: id.test_validated(),
            docs: id.docs(),
        })
        .collect()
}

/// Truth of a sentence in the theory's canonical model.
pub fn classical_truth(th: TheoryId, sentence: &Formula) -> Result<bool, SemanticsError> {
    truth(&th.canonical(), sentence)
}

pub fn qe_universal_pair(th: TheoryId, phi: &Formula) -> Result<UniversalPair, QeError> {
    universal_pair(th, phi)
}

#[derive(Debug, Clone, Serialize)]
pub struct Mismatch {
    pub parameters: Vec<usize>,
    pub phi: bool,
    /// Truth of the quantifier-free equivalent, when it was evaluated.
    pub eliminated: Option<bool>,
    /// Truth of `∀y⃗ α` and `∀y⃗ β`, when they were evaluated.
    pub forall_alpha: Option<bool>,
    pub forall_beta: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct QeReport {
    pub theory: &'static str,
    pub formula: String,
    pub eliminated: String,
    pub alpha: String,
    pub beta: String,
    pub m: usize,
    pub samples: usize,
    pub closures_checked: bool,
    pub mismatches: Vec<Mismatch>,
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Qe(#[from] QeError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

// Evaluating the universal closures directly costs a nested search per
// universally quantified variable; beyond this many the check is skipped and
// the quantifier-free equivalent is compared instead.
const MAX_CLOSURE_VARS: usize = 3;

/// Sample parameter tuples in the canonical model and compare `φ` with its
/// quantifier-free equivalent and with the universal closures of the pair.
pub fn verify_qe(th: TheoryId, phi: &Formula, samples: usize, seed: u64) -> Result<QeReport, VerifyError> {
    let psi = eliminate(th, phi)?;
    let pair = qe_universal_pair(th, phi)?;
    let check_closures = pair.m <= MAX_CLOSURE_VARS;
    let mut report = check(th, phi, Some(&interpretable(&psi)), &pair, check_closures, samples, seed)?;
    report.eliminated = psi.to_string();
    Ok(report)
}

/// Compare `φ` with the universal closures of a given pair.
pub fn verify_pair(
    th: TheoryId,
    phi: &Formula,
    pair: &UniversalPair,
    samples: usize,
    seed: u64,
) -> Result<QeReport, SemanticsError> {
    check(th, phi, None, pair, true, samples, seed)
}

fn check(
    th: TheoryId,
    phi: &Formula,
    psi: Option<&Formula>,
    pair: &UniversalPair,
    closures: bool,
    samples: usize,
    seed: u64,
) -> Result<QeReport, SemanticsError> {
    let canonical = th.canonical();
    let vars: Vec<String> = phi.free_vars().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = Vec::new();
    for _ in 0..samples {
        let params: Vec<usize> = vars.iter().map(|_| rng.gen_range(0..12)).collect();
        let bind = |f: &Formula| vars.iter().zip(&params).fold(f.clone(), |g, (v, &a)| g.subst(v, &Term::Dom(a)));
        let want = truth(&canonical, &bind(phi))?;
        let eliminated = psi.map(|p| truth(&canonical, &bind(p))).transpose()?;
        let (a, b) = if closures {
            (
                Some(truth(&canonical, &bind(&pair.closure(false)))?),
                Some(truth(&canonical, &bind(&pair.closure(true)))?),
            )
        } else {
            (None, None)
        };
        if eliminated.is_some_and(|e| e != want) || a.is_some_and(|a| a != want) || b.is_some_and(|b| b == want) {
            mismatches.push(Mismatch { parameters: params, phi: want, eliminated, forall_alpha: a, forall_beta: b });
        }
    }
    Ok(QeReport {
        theory: th.name(),
        formula: phi.to_string(),
        eliminated: String::new(),
        alpha: pair.alpha.to_string(),
        beta: pair.beta.to_string(),
        m: pair.m,
        samples,
        closures_checked: closures,
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    #[test]
    fn registry_shape() {
        let r = registry();
        assert_eq!(r.len(), 4);
        assert!(!TheoryId::Succ.is_model_complete());
        assert!(TheoryId::DloPP.is_model_complete());
    }

    #[test]
    fn ground_truth_examples() {
        assert!(classical_truth(TheoryId::DloPP, &parse("exists x. (lo < x & x < hi)").unwrap()).unwrap());
        assert!(classical_truth(TheoryId::Succ0, &parse("forall x. ~S(x) = c0").unwrap()).unwrap());
        assert!(classical_truth(TheoryId::Adj, &parse("forall x. exists y. (Adj(x, y) | Adj(y, x))").unwrap()).unwrap());
    }

    #[test]
    fn qe_agrees_with_ground_truth() {
        for (th, s) in [
            (TheoryId::Succ0, "exists y. S(y) = x0"),
            (TheoryId::Succ0, "S(x0) = x1"),
            (TheoryId::DloPP, "exists x. x0 < x & x < x1"),
            (TheoryId::Adj, "exists y. Adj(x0, y)"),
            (TheoryId::Adj, "exists y. x0 < y & y < x1"),
            (TheoryId::Adj, "forall y. x0 < y -> exists z. x0 < z & z < y"),
        ] {
            let report = verify_qe(th, &parse(s).unwrap(), 100, 7).unwrap();
            assert!(report.mismatches.is_empty(), "{s}: {:?}", report);
        }
    }

    #[test]
    fn corrupted_pair_is_caught() {
        let phi = parse("exists y. S(y) = x0").unwrap();
        let mut pair = qe_universal_pair(TheoryId::Succ0, &phi).unwrap();
        std::mem::swap(&mut pair.alpha, &mut pair.beta);
        let report = verify_pair(TheoryId::Succ0, &phi, &pair, 100, 1).unwrap();
        assert!(!report.mismatches.is_empty());
    }
}
