//! Text syntax for formulas.
//!
//! ```text
//! formula := "forall" var "." formula | "exists" var "." formula
//!          | f "->" f | f "|" f | f "&" f | "~" f | "(" f ")" | atom
//! atom    := Rel "(" terms ")" | term "=" term | term "<" term
//! term    := var | "#" nat | name | Fn "(" terms ")"
//! ```
//!
//! Precedence is `~` > `&` > `|` > `->`; `->` associates to the right and a
//! quantifier body extends as far right as possible. An identifier is a
//! variable when an enclosing quantifier binds it or when it has the form
//! `x<digits>`; any other identifier is a named constant.

use thiserror::Error;

use crate::syntax::{is_free_var_name, Formula, Term, LT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Dom(usize),
    LParen,
    RParen,
    Comma,
    Dot,
    Eq,
    Neq,
    Lt,
    Not,
    And,
    Or,
    Arrow,
    Forall,
    Exists,
    True,
    False,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(pos, c)) = it.peek() {
        let err = |msg: String| ParseError { pos, msg };
        if c.is_whitespace() {
            it.next();
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&(_, d)) = it.peek() {
                if d.is_ascii_alphanumeric() || d == '_' || d == '\'' {
                    s.push(d);
                    it.next();
                } else {
                    break;
                }
            }
            let tok = match s.as_str() {
                "forall" => Tok::Forall,
                "exists" => Tok::Exists,
                "true" => Tok::True,
                "false" => Tok::False,
                _ => Tok::Ident(s),
            };
            out.push((pos, tok));
            continue;
        }
        it.next();
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '=' => Tok::Eq,
            '<' => Tok::Lt,
            '~' | '¬' => Tok::Not,
            '&' | '∧' => Tok::And,
            '|' | '∨' => Tok::Or,
            '→' => Tok::Arrow,
            '∀' => Tok::Forall,
            '∃' => Tok::Exists,
            '≠' => Tok::Neq,
            '!' => match it.next() {
                Some((_, '=')) => Tok::Neq,
                _ => return Err(err("expected '=' after '!'".into())),
            },
            '-' => match it.next() {
                Some((_, '>')) => Tok::Arrow,
                _ => return Err(err("expected '>' after '-'".into())),
            },
            '#' => {
                let mut digits = String::new();
                while let Some(&(_, d)) = it.peek() {
                    if d.is_ascii_digit() {
                        digits.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                let n = digits.parse::<usize>().map_err(|_| err("expected a natural number after '#'".into()))?;
                Tok::Dom(n)
            }
            other => return Err(err(format!("unexpected character {other:?}"))),
        };
        out.push((pos, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    bound: Vec<String>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos: self.pos(), msg: msg.into() })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            match self.peek() {
                None => self.error(format!("expected {what}, found end of input")),
                Some(other) => self.error(format!("expected {what}, found {other:?}")),
            }
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.conjunction()?;
        while self.eat(&Tok::Or) {
            f = Formula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while self.eat(&Tok::And) {
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.at += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Forall) | Some(Tok::Exists) => {
                let universal = self.peek() == Some(&Tok::Forall);
                self.at += 1;
                let v = match self.peek() {
                    Some(Tok::Ident(v)) => v.clone(),
                    _ => return self.error("expected a variable after quantifier"),
                };
                self.at += 1;
                self.expect(&Tok::Dot, "'.' after quantified variable")?;
                if self.peek().is_none() {
                    return self.error("missing quantifier body");
                }
                self.bound.push(v.clone());
                let body = self.formula();
                self.bound.pop();
                let body = body?;
                Ok(if universal { Formula::forall(&v, body) } else { Formula::exists(&v, body) })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            None => self.error("unexpected end of input"),
            Some(Tok::LParen) => {
                self.at += 1;
                let f = self.formula()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(f)
            }
            Some(Tok::True) => {
                self.at += 1;
                Ok(Formula::True)
            }
            Some(Tok::False) => {
                self.at += 1;
                Ok(Formula::False)
            }
            Some(Tok::Ident(name)) if self.toks.get(self.at + 1).map(|(_, t)| t) == Some(&Tok::LParen) => {
                let name = name.clone();
                self.at += 2;
                let args = self.terms()?;
                match self.peek() {
                    Some(Tok::Eq) | Some(Tok::Lt) | Some(Tok::Neq) => self.comparison(Term::App(name, args)),
                    _ => Ok(Formula::Rel(name, args)),
                }
            }
            Some(_) => {
                let lhs = self.term()?;
                self.comparison(lhs)
            }
        }
    }

    fn comparison(&mut self, lhs: Term) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Eq) => {
                self.at += 1;
                Ok(Formula::Eq(lhs, self.term()?))
            }
            Some(Tok::Neq) => {
                self.at += 1;
                Ok(Formula::neq(lhs, self.term()?))
            }
            Some(Tok::Lt) => {
                self.at += 1;
                Ok(Formula::Rel(LT.to_string(), vec![lhs, self.term()?]))
            }
            _ => self.error("expected '=' or '<' after term"),
        }
    }

    // Argument list after an opening parenthesis, consuming the closing one.
    fn terms(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut args = vec![self.term()?];
        while self.eat(&Tok::Comma) {
            args.push(self.term()?);
        }
        self.expect(&Tok::RParen, "')' or ','")?;
        Ok(args)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Dom(n)) => {
                self.at += 1;
                Ok(Term::Dom(n))
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                if self.eat(&Tok::LParen) {
                    let args = self.terms()?;
                    return Ok(Term::App(name, args));
                }
                if self.bound.contains(&name) || is_free_var_name(&name) {
                    Ok(Term::Var(name))
                } else {
                    Ok(Term::Const(name))
                }
            }
            None => self.error("expected a term, found end of input"),
            Some(other) => self.error(format!("expected a term, found {other:?}")),
        }
    }
}

pub fn parse(src: &str) -> Result<Formula, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0, end: src.len(), bound: Vec::new() };
    let f = p.formula()?;
    if p.at != p.toks.len() {
        return p.error("trailing input");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bounded_existential() {
        let f = parse("exists x. (lo < x & x < hi)").unwrap();
        let expected = Formula::exists(
            "x",
            Formula::and(Formula::lt(Term::cst("lo"), Term::var("x")), Formula::lt(Term::var("x"), Term::cst("hi"))),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn negation_binds_to_the_equation() {
        let f = parse("forall x. ~S(x) = #0").unwrap();
        let expected =
            Formula::forall("x", Formula::not(Formula::eq(Term::app("S", vec![Term::var("x")]), Term::Dom(0))));
        assert_eq!(f, expected);
    }

    #[test]
    fn missing_body_is_an_error() {
        let err = parse("exists x").unwrap_err();
        assert_eq!(err.pos, 8);
        assert!(parse("exists x.").is_err());
        assert!(parse("P(x) &").is_err());
        assert!(parse("x = ").is_err());
        assert!(parse("#a = #1").is_err());
    }

    #[test]
    fn connective_precedence() {
        let f = parse("P(#0) | Q(#0) & R(#0) -> T(#0) -> U(#0)").unwrap();
        let atom = |r: &str| Formula::rel(r, vec![Term::Dom(0)]);
        let expected = Formula::implies(
            Formula::or(atom("P"), Formula::and(atom("Q"), atom("R"))),
            Formula::implies(atom("T"), atom("U")),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn relation_vs_function_application() {
        assert_eq!(parse("S(#0, #1)").unwrap(), Formula::rel("S", vec![Term::Dom(0), Term::Dom(1)]));
        assert_eq!(
            parse("S(S(x0)) = c0").unwrap(),
            Formula::eq(Term::app("S", vec![Term::app("S", vec![Term::var("x0")])]), Term::cst("c0"))
        );
    }

    #[test]
    fn unicode_aliases() {
        assert_eq!(parse("∀y. ¬(y = #1) ∨ y = #1").unwrap(), parse("forall y. ~y = #1 | y = #1").unwrap());
        assert_eq!(parse("#0 != #1").unwrap(), Formula::neq(Term::Dom(0), Term::Dom(1)));
    }
}
