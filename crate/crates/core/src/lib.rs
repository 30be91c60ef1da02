//! Finite-memory scouts on `ℤ` and `ℤ²`.
//!
//! A protocol is a set of scouts, each a probabilistic automaton whose next
//! state and move depend on the set of states sharing its cell. The crate
//! simulates such protocols from counter-based seeds, analyzes a single
//! scout's automaton exactly, and checks the random-walk estimates behind
//! hitting-time and meeting-time behaviour.
//!
//! - [`protocol`]: text format, validation, builtins.
//! - [`sim`]: traces, hitting times, survival curves.
//! - [`automaton`]: classes, exact drift, degeneracy, thick rays.
//! - [`walks`]: look-around walks, exact oracle, estimate checks.
//! - [`renewal`]: meeting renewals, homogeneity, traps, tail verdicts.
//! - [`cli`]: the `scouts` command.

pub mod automaton;
pub mod cli;
pub mod protocol;
pub mod renewal;
pub mod scalar;
pub mod sim;
pub mod stats;
pub mod stream;
pub mod walks;
