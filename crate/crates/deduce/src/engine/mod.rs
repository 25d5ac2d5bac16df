//! The decision engine: goal-directed right proof search, saturation-driven
//! left rule application, proof assembly, and the independent proof checker.

pub mod check;
pub mod proof;
pub mod search;

pub use check::{check_proof, CheckError, CheckReason};
pub use proof::{
    proof_from_json, proof_to_json, render_proof, Proof, Rule, Witness,
};
pub use search::{
    applicable, decide, linear_search, right_prove, Decision, EngineError,
    LeftRule, SearchStats,
};

use crate::term::TermId;
use std::sync::Arc;

/// Hypotheses and goal.  The hypothesis list is sorted and deduplicated, so
/// sequents compare structurally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequent {
    pub gamma: Arc<[TermId]>,
    pub goal: TermId,
}

impl Sequent {
    pub fn new(mut gamma: Vec<TermId>, goal: TermId) -> Self {
        gamma.sort_unstable();
        gamma.dedup();
        Sequent {
            gamma: gamma.into(),
            goal,
        }
    }

    pub fn contains(&self, t: TermId) -> bool {
        self.gamma.binary_search(&t).is_ok()
    }

    /// The sequent with extra hypotheses added and the same goal.
    pub fn extended(&self, added: &[TermId]) -> Sequent {
        let mut gamma = self.gamma.to_vec();
        gamma.extend_from_slice(added);
        Sequent::new(gamma, self.goal)
    }

    /// The sequent over the same hypotheses with another goal.
    pub fn with_goal(&self, goal: TermId) -> Sequent {
        Sequent {
            gamma: self.gamma.clone(),
            goal,
        }
    }
}
