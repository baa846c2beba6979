use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::syntax::{Formula, Term, LT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("duplicate symbol {0}")]
    Duplicate(String),
    #[error("relation {0} must have arity at least 1")]
    ZeroArity(String),
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("symbol {name} used with {used} arguments, declared with {declared}")]
    Arity { name: String, used: usize, declared: usize },
}

/// Where a diagram-level relation comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Relation,
    /// Graph of a k-ary function symbol, arity k+1.
    FunctionGraph,
    /// Unary relation holding exactly at a named constant.
    Constant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagramRelation {
    pub name: String,
    pub arity: usize,
    pub origin: Origin,
}

/// A finite signature with equality. Function symbols and named constants are
/// admitted in surface syntax; the atomic diagram sees them as graph relations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Signature {
    relations: Vec<(String, usize)>,
    functions: Vec<(String, usize)>,
    constants: Vec<String>,
    #[serde(skip)]
    diagram: Vec<DiagramRelation>,
}

impl Signature {
    pub fn new(
        relations: &[(&str, usize)],
        functions: &[(&str, usize)],
        constants: &[&str],
    ) -> Result<Signature, SignatureError> {
        let mut seen = BTreeSet::new();
        let names =
            relations.iter().map(|(n, _)| *n).chain(functions.iter().map(|(n, _)| *n)).chain(constants.iter().copied());
        for n in names {
            if !seen.insert(n) {
                return Err(SignatureError::Duplicate(n.to_string()));
            }
        }
        for (n, a) in relations.iter().chain(functions.iter()) {
            if *a == 0 {
                return Err(SignatureError::ZeroArity(n.to_string()));
            }
        }
        let mut diagram: Vec<DiagramRelation> = relations
            .iter()
            .map(|(n, a)| DiagramRelation { name: n.to_string(), arity: *a, origin: Origin::Relation })
            .collect();
        diagram.extend(functions.iter().map(|(n, a)| DiagramRelation {
            name: n.to_string(),
            arity: a + 1,
            origin: Origin::FunctionGraph,
        }));
        diagram.extend(constants.iter().map(|n| DiagramRelation {
            name: n.to_string(),
            arity: 1,
            origin: Origin::Constant,
        }));
        Ok(Signature {
            relations: relations.iter().map(|(n, a)| (n.to_string(), *a)).collect(),
            functions: functions.iter().map(|(n, a)| (n.to_string(), *a)).collect(),
            constants: constants.iter().map(|c| c.to_string()).collect(),
            diagram,
        })
    }

    /// Purely relational signature.
    pub fn relational(relations: &[(&str, usize)]) -> Signature {
        Signature::new(relations, &[], &[]).expect("invalid relational signature")
    }

    pub fn relations(&self) -> &[(String, usize)] {
        &self.relations
    }

    pub fn functions(&self) -> &[(String, usize)] {
        &self.functions
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    /// The relational signature the atomic diagram is coded over, in coding order.
    pub fn diagram_relations(&self) -> &[DiagramRelation] {
        &self.diagram
    }

    pub fn diagram_index(&self, name: &str) -> Option<usize> {
        self.diagram.iter().position(|r| r.name == name)
    }

    pub fn function_arity(&self, name: &str) -> Option<usize> {
        self.functions.iter().find(|(n, _)| n == name).map(|(_, a)| *a)
    }

    pub fn has_constant(&self, name: &str) -> bool {
        self.constants.iter().any(|c| c == name)
    }

    /// Signature with one more named constant.
    pub fn with_constant(&self, name: &str) -> Result<Signature, SignatureError> {
        let rels: Vec<(&str, usize)> = self.relations.iter().map(|(n, a)| (n.as_str(), *a)).collect();
        let funs: Vec<(&str, usize)> = self.functions.iter().map(|(n, a)| (n.as_str(), *a)).collect();
        let mut consts: Vec<&str> = self.constants.iter().map(String::as_str).collect();
        consts.push(name);
        Signature::new(&rels, &funs, &consts)
    }

    /// Check that every symbol of `f` is declared with the right arity. Both the
    /// surface forms (`S(x) = y`, `c0`) and the diagram forms (`S(x, y)`,
    /// `c0(y)`) are accepted.
    pub fn check(&self, f: &Formula) -> Result<(), SignatureError> {
        let mut result = Ok(());
        f.visit(&mut |g| {
            if result.is_err() {
                return;
            }
            if let Formula::Rel(name, args) = g {
                result = match self.diagram.iter().find(|r| &r.name == name) {
                    None => Err(SignatureError::UnknownSymbol(name.clone())),
                    Some(r) if r.arity != args.len() => {
                        Err(SignatureError::Arity { name: name.clone(), used: args.len(), declared: r.arity })
                    }
                    Some(_) => Ok(()),
                };
            }
        });
        result?;
        let mut terms = Vec::new();
        f.visit_terms(&mut |t| terms.push(t.clone()));
        terms.iter().try_for_each(|t| self.check_term(t))
    }

    fn check_term(&self, t: &Term) -> Result<(), SignatureError> {
        match t {
            Term::Var(_) | Term::Dom(_) => Ok(()),
            Term::Const(c) if self.has_constant(c) => Ok(()),
            Term::Const(c) => Err(SignatureError::UnknownSymbol(c.clone())),
            Term::App(fname, args) => match self.function_arity(fname) {
                None => Err(SignatureError::UnknownSymbol(fname.clone())),
                Some(a) if a != args.len() => {
                    Err(SignatureError::Arity { name: fname.clone(), used: args.len(), declared: a })
                }
                Some(_) => args.iter().try_for_each(|a| self.check_term(a)),
            },
        }
    }

    pub fn has_order(&self) -> bool {
        self.relations.iter().any(|(n, a)| n == LT && *a == 2)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .relations
            .iter()
            .map(|(n, a)| format!("{n}/{a}"))
            .chain(self.functions.iter().map(|(n, a)| format!("{n}()/{a}")))
            .chain(self.constants.iter().cloned())
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}
