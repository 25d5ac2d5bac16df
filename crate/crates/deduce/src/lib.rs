//! Decision procedure for ground message deducibility: given a set of
//! messages known to an intruder and a target message, decides whether the
//! target can be derived using pairing, encryption, signing, blinding and the
//! equations of the declared AC-convergent theories, and emits a checkable
//! sequent proof when it can.

pub mod engine;
pub mod oracle;
pub mod problem;
pub mod solve;
pub mod term;
pub mod theory;

pub use engine::{check_proof, decide, Decision, Proof, Rule, Sequent};
pub use problem::{parse_problem, Problem};
pub use term::{saturate, TermBank, TermId, TheoryId};
pub use theory::{normalize, Catalog, TheoryDef, TheoryKind};
