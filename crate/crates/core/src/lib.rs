//! Simulation of quantum local search for k-SAT.
//!
//! Assignments are bit strings with variable `V_i` in bit `i - 1`. A search
//! state is a real amplitude per assignment; each step flips the sign of
//! selected amplitudes according to a phase policy and then applies a
//! mixing matrix whose entries depend only on Hamming distance.

pub mod combinatorics;
pub mod compact;
pub mod dimacs;
pub mod engine;
pub mod error;
pub mod fwht;
pub mod gen;
pub mod mixer;
pub mod oracle;
pub mod phase;
pub mod sat;
pub mod solver;

pub use compact::{compact_histogram, compact_run, CompactOperators, CompactProblem, CompactState};
pub use engine::{run_trial, AmplitudeVector, RunResult, TrialOptions};
pub use error::{Error, Result};
pub use gen::{generate, EnsembleKind, EnsembleSpec, GenOptions, GeneratedInstance};
pub use mixer::{Mixer, MixerSpec};
pub use phase::{PolicyKind, PolicySpec, Rational};
pub use sat::{Assignment, ConflictPattern, SatProblem};
pub use solver::{backtrack_solve, SolveMode, SolveOutcome};
