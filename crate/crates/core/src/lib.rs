//! Decision procedures and diagonalization for computably presented
//! model-complete structures.

pub mod cli;
pub mod coding;
pub mod decider;
pub mod diagonalizer;
pub mod functional;
pub mod parser;
pub mod presentation;
pub mod qe;
pub mod rationals;
pub mod sample;
pub mod semantics;
pub mod sentence_code;
pub mod sigma1;
pub mod signature;
pub mod syntax;
pub mod theory;
pub mod transform;
