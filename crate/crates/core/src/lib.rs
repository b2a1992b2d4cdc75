//! Neuro-symbolic validity judgments for categorical syllogisms: an exact
//! finite-model solver, a rule-based structure parser, classifier ensembles
//! fused with the solver on close votes, and the evaluation harness.

pub mod classify;
pub mod config;
pub mod dataset;
pub mod extraction;
pub mod fusion;
pub mod harness;
pub mod logic;
pub mod metrics;
pub mod par;
pub mod parser;
