//! Core library for the heads-up no-limit hold'em benchmark platform.
//!
//! Everything deterministic and transport-free lives here: the rules engine,
//! scripted and solver-backed agents, CFR training for the house opponent,
//! the variance-reduced match evaluator, hand records, the session protocol
//! types, and range visualization.

pub mod agents;
pub mod aivat;
pub mod cards;
pub mod engine;
pub mod error;
pub mod protocol;
pub mod rangeviz;
pub mod record;
pub mod solver;
