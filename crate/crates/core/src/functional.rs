//! Turing functionals: deterministic procedures that answer a sentence code
//! using oracle access to an atomic diagram.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::coding::Code;
use crate::decider::{decide_mc, decide_succ_nonuniform, DecideError, DEFAULT_COMMIT};
use crate::presentation::{ExpandedOracle, LoggingOracle, Oracle};
use crate::sentence_code::{SentenceCode, SentenceCoding};
use crate::syntax::Formula;
use crate::theory::TheoryId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Program {
    /// The uniform decider of a model-complete theory.
    Uniform(TheoryId),
    /// The successor decider with the constant `c0` fixed to element 0.
    ZeroAnchored,
    /// The successor decider with `c0` located by search.
    NonuniformSucc {
        commit_after: usize,
    },
    AlwaysDiverge,
    Constant(bool),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Functional {
    /// The index `e` of `Φ_e`.
    pub id: usize,
    pub name: String,
    pub program: Program,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Outcome {
    Converge {
        bit: bool,
        #[serde(rename = "use")]
        use_: u64,
    },
    Diverge {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Run {
    pub outcome: Outcome,
    /// Distinct codes queried, in order of first query.
    pub query_log: Vec<Code>,
    pub steps: u64,
}

impl Run {
    pub fn bit(&self) -> Option<bool> {
        match self.outcome {
            Outcome::Converge { bit, .. } => Some(bit),
            Outcome::Diverge { .. } => None,
        }
    }

    pub fn use_(&self) -> Option<u64> {
        match self.outcome {
            Outcome::Converge { use_, .. } => Some(use_),
            Outcome::Diverge { .. } => None,
        }
    }
}

impl Program {
    /// The program text; independent of any oracle.
    pub fn text(&self) -> String {
        format!("{self:?}")
    }

    /// Run on `input` with at most `max_steps` steps. Any oracle refusal,
    /// such as a query beyond a finite prefix, is divergence.
    pub fn run(&self, oracle: &mut dyn Oracle, input: &Formula, max_steps: u64) -> Run {
        let mut logging = LoggingOracle::new(oracle);
        let result = match self {
            Program::Uniform(th) => decide_mc(*th, &mut logging, input, max_steps),
            Program::ZeroAnchored => ExpandedOracle::new(&mut logging, "c0", 0)
                .map_err(DecideError::from)
                .and_then(|mut e| decide_mc(TheoryId::Succ0, &mut e, input, max_steps)),
            Program::NonuniformSucc { commit_after } => {
                decide_succ_nonuniform(&mut logging, input, max_steps, *commit_after)
            }
            Program::AlwaysDiverge => {
                return Run {
                    outcome: Outcome::Diverge { reason: "never halts".into() },
                    query_log: Vec::new(),
                    steps: max_steps,
                };
            }
            Program::Constant(bit) => {
                return Run { outcome: Outcome::Converge { bit: *bit, use_: 0 }, query_log: Vec::new(), steps: 1 };
            }
        };
        let mut seen = BTreeSet::new();
        let query_log: Vec<Code> = logging.log.iter().copied().filter(|c| seen.insert(*c)).collect();
        match result {
            Ok(trace) => {
                let outcome = match trace.verdict.bit() {
                    Some(bit) => Outcome::Converge { bit, use_: query_log.iter().max().map_or(0, |m| m + 1) },
                    None => Outcome::Diverge { reason: "step budget exhausted".into() },
                };
                Run { outcome, query_log, steps: trace.steps }
            }
            Err(e) => {
                let steps = query_log.len() as u64;
                Run { outcome: Outcome::Diverge { reason: e.to_string() }, query_log, steps }
            }
        }
    }

    /// Run on the sentence with the given code over the oracle's signature.
    pub fn run_code(&self, oracle: &mut dyn Oracle, code: SentenceCode, max_steps: u64) -> Run {
        let input = SentenceCoding::new(oracle.signature()).decode(code);
        self.run(oracle, &input, max_steps)
    }
}

/// The uniform decider of a model-complete theory as a functional.
pub fn as_functional(th: TheoryId) -> Result<Program, DecideError> {
    if th.is_model_complete() {
        Ok(Program::Uniform(th))
    } else {
        Err(DecideError::NotModelComplete(th.name()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionalDescriptor {
    pub name: &'static str,
    pub docs: &'static str,
    pub program: Program,
}

pub fn registry() -> Vec<FunctionalDescriptor> {
    let d = |name, docs, program| FunctionalDescriptor { name, docs, program };
    vec![
        d("uniform:succ0", "uniform decider for succ0 over its diagram signature", Program::Uniform(TheoryId::Succ0)),
        d("uniform:dlo++", "uniform decider for dlo++", Program::Uniform(TheoryId::DloPP)),
        d("uniform:adj", "uniform decider for adj", Program::Uniform(TheoryId::Adj)),
        d("zero-anchored", "succ decider that takes element 0 as the non-successor", Program::ZeroAnchored),
        d(
            "nonuniform-succ",
            "succ decider that first locates the non-successor",
            Program::NonuniformSucc { commit_after: DEFAULT_COMMIT },
        ),
        d("always-diverge", "never halts", Program::AlwaysDiverge),
        d("constant:0", "answers 0 without queries", Program::Constant(false)),
        d("constant:1", "answers 1 without queries", Program::Constant(true)),
    ]
}

/// Look up registered functionals by name, numbering them in order.
pub fn functionals(names: &[&str]) -> Result<Vec<Functional>, String> {
    let reg = registry();
    names
        .iter()
        .enumerate()
        .map(|(id, name)| {
            reg.iter()
                .find(|d| d.name == *name)
                .map(|d| Functional { id, name: d.name.to_string(), program: d.program.clone() })
                .ok_or_else(|| format!("unknown functional {name}"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::presentation::{PrefixOracle, Presentation};

    #[test]
    fn uniform_converges_within_use() {
        let gamma = as_functional(TheoryId::Succ0).unwrap();
        let mut p = Presentation::from_spec("succ0").unwrap();
        let run = gamma.run(&mut p, &parse("exists y. S(y) = #1").unwrap(), 100_000);
        assert_eq!(run.bit(), Some(true));
        let u = run.use_().unwrap();
        assert!(run.query_log.iter().all(|&c| c < u));
    }

    #[test]
    fn short_prefix_diverges() {
        let gamma = as_functional(TheoryId::Succ0).unwrap();
        let mut p = Presentation::from_spec("succ0").unwrap();
        let s = parse("exists y. S(y) = #1").unwrap();
        let u = gamma.run(&mut p, &s, 100_000).use_().unwrap();
        let bits = p.initial_segment(3).unwrap().bits().to_vec();
        let mut short = PrefixOracle::new(p.signature().clone(), bits[..u as usize - 1].to_vec());
        assert!(gamma.run(&mut short, &s, 100_000).bit().is_none());
        let mut exact = PrefixOracle::new(p.signature().clone(), bits[..u as usize].to_vec());
        assert_eq!(gamma.run(&mut exact, &s, 100_000).bit(), Some(true));
    }

    #[test]
    fn refuses_non_model_complete() {
        assert!(as_functional(TheoryId::Succ).is_err());
    }

    #[test]
    fn zero_anchored_is_wrong_off_the_standard_copy() {
        let s = parse("exists x. S(x) = #0").unwrap();
        let mut std = Presentation::from_spec("succ:shift=0").unwrap();
        assert_eq!(Program::ZeroAnchored.run(&mut std, &s, 100_000).bit(), Some(false));
        let mut moved = Presentation::from_spec("pullback:succ:shift=0:0>1,1>0").unwrap();
        assert_eq!(Program::ZeroAnchored.run(&mut moved, &s, 100_000).bit(), Some(false));
        assert_eq!(Program::NonuniformSucc { commit_after: 3 }.run(&mut moved, &s, 100_000).bit(), Some(true));
    }

    #[test]
    fn run_by_code() {
        let mut p = Presentation::from_spec("succ0").unwrap();
        let coding = SentenceCoding::new(p.signature());
        let s = parse("exists v0. S(v0, #1)").unwrap();
        let code = coding.encode(&s).unwrap();
        assert_eq!(Program::Uniform(TheoryId::Succ0).run_code(&mut p, code, 10_000).bit(), Some(true));
    }

    #[test]
    fn registry_lookup() {
        let fs = functionals(&["zero-anchored", "always-diverge", "nonuniform-succ"]).unwrap();
        assert_eq!(fs.iter().map(|f| f.id).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(functionals(&["nope"]).is_err());
    }
}
