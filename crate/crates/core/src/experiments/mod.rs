//! Crack sequences, stability studies and quasi-static evolution.

mod convergence;
mod evolution;
mod sequence;

pub use convergence::{
    convergence_against, convergence_experiment, gradient_error, gradient_norm, reference_solution,
    ConvergenceOptions, ConvergenceRow, ConvergenceTable, ReferenceSummary,
};
pub use evolution::{
    quasistatic_evolve, unilateral_gap, Candidate, Dictionary, EvolutionOptions, EvolutionState, EvolutionStep,
    GapReport, LoadProgram, UNILATERAL_TOL,
};
pub use sequence::{make_sequence, CrackSequence, SequenceKind, SequenceMember, SequenceParams};
