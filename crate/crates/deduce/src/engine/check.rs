//! Independent proof checking.  Walks a proof tree and re-validates every
//! node from scratch: the rule's shape constraints, its side conditions, and
//! the exact premise sequents it must have.  Shares no state with the
//! search; recipes are re-verified by applying and normalizing them.

use crate::engine::proof::{Proof, Rule, Witness};
use crate::engine::Sequent;
use crate::solve::verify_recipe;
use crate::term::{Head, TermBank, TermId};
use crate::theory::Catalog;
use std::collections::HashSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CheckReason {
    #[error("conclusion differs from the sequent being proved")]
    ConclusionMismatch,
    #[error("rule takes {want} premises, proof has {got}")]
    PremiseCount { want: usize, got: usize },
    #[error("premise {index} does not match the required sequent")]
    PremiseMismatch { index: usize },
    #[error("rule carries the wrong witness kind")]
    WitnessKind,
    #[error("recipe theory differs from the rule's theory")]
    RecipeTheoryMismatch,
    #[error("recipe fails verification")]
    RecipeRejected,
    #[error("principal hypothesis is not in the sequent")]
    PrincipalMissing,
    #[error("principal hypothesis has the wrong shape for the rule")]
    PrincipalShape,
    #[error("goal has the wrong head for the rule")]
    GoalShape,
    #[error("no matching public key among the hypotheses")]
    MissingPublicKey,
    #[error("witness is not a guarded subterm of the sequent")]
    NotGuardedSubterm,
    #[error("witness is not a cross-theory subterm of the sequent")]
    NotCrossTheorySubterm,
}

/// A rejection, with the premise-index path from the root to the bad node.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("at {}: {reason}", path_string(.path))]
pub struct CheckError {
    pub path: Vec<usize>,
    pub reason: CheckReason,
}

fn path_string(path: &[usize]) -> String {
    if path.is_empty() {
        return "root".to_string();
    }
    let mut s = "root".to_string();
    for i in path {
        s.push('.');
        s.push_str(&i.to_string());
    }
    s
}

/// Accepts exactly the proofs of `expected` in which every node is a valid
/// rule instance with its side conditions re-established here.
pub fn check_proof(
    bank: &mut TermBank,
    cat: &Catalog,
    p: &Proof,
    expected: &Sequent,
) -> Result<(), CheckError> {
    if &p.conclusion != expected {
        return Err(CheckError {
            path: Vec::new(),
            reason: CheckReason::ConclusionMismatch,
        });
    }
    let mut path = Vec::new();
    check_node(bank, cat, p, &mut path)
}

fn fail(path: &[usize], reason: CheckReason) -> Result<(), CheckError> {
    Err(CheckError {
        path: path.to_vec(),
        reason,
    })
}

fn check_node(
    bank: &mut TermBank,
    cat: &Catalog,
    p: &Proof,
    path: &mut Vec<usize>,
) -> Result<(), CheckError> {
    let conc = &p.conclusion;
    // (premise sequents in rule order) once the node-local conditions hold
    let premise_shapes: Vec<Sequent> = match p.rule {
        Rule::Id(th) => {
            let Witness::Recipe(r) = &p.witness else {
                return fail(path, CheckReason::WitnessKind);
            };
            if r.theory != th {
                return fail(path, CheckReason::RecipeTheoryMismatch);
            }
            if !verify_recipe(bank, cat, r, &conc.gamma, conc.goal) {
                return fail(path, CheckReason::RecipeRejected);
            }
            Vec::new()
        }
        Rule::PairRight | Rule::EncRight | Rule::SignRight | Rule::BlindRight => {
            let want = match p.rule {
                Rule::PairRight => Head::Pair,
                Rule::EncRight => Head::Enc,
                Rule::SignRight => Head::Sign,
                _ => Head::Blind,
            };
            if bank.head(conc.goal) != want {
                return fail(path, CheckReason::GoalShape);
            }
            bank.args(conc.goal)
                .iter()
                .map(|&a| conc.with_goal(a))
                .collect()
        }
        Rule::PairLeft => {
            let pr = principal(p, path)?;
            if !conc.contains(pr) {
                return fail(path, CheckReason::PrincipalMissing);
            }
            if bank.head(pr) != Head::Pair {
                return fail(path, CheckReason::PrincipalShape);
            }
            let args = bank.args(pr).to_vec();
            vec![conc.extended(&args)]
        }
        Rule::EncLeft => {
            let pr = principal(p, path)?;
            if !conc.contains(pr) {
                return fail(path, CheckReason::PrincipalMissing);
            }
            if bank.head(pr) != Head::Enc {
                return fail(path, CheckReason::PrincipalShape);
            }
            let args = bank.args(pr).to_vec();
            vec![conc.with_goal(args[1]), conc.extended(&args)]
        }
        Rule::SignLeft => {
            let pr = principal(p, path)?;
            if !conc.contains(pr) {
                return fail(path, CheckReason::PrincipalMissing);
            }
            if bank.head(pr) != Head::Sign {
                return fail(path, CheckReason::PrincipalShape);
            }
            let args = bank.args(pr).to_vec();
            let pk = bank.find(Head::PubKey, &args[1..2]);
            if !pk.is_some_and(|pk| conc.contains(pk)) {
                return fail(path, CheckReason::MissingPublicKey);
            }
            vec![conc.extended(&args[0..1])]
        }
        Rule::BlindLeft1 => {
            let pr = principal(p, path)?;
            if !conc.contains(pr) {
                return fail(path, CheckReason::PrincipalMissing);
            }
            if bank.head(pr) != Head::Blind {
                return fail(path, CheckReason::PrincipalShape);
            }
            let args = bank.args(pr).to_vec();
            vec![conc.with_goal(args[1]), conc.extended(&args)]
        }
        Rule::BlindLeft2 => {
            let pr = principal(p, path)?;
            if !conc.contains(pr) {
                return fail(path, CheckReason::PrincipalMissing);
            }
            if bank.head(pr) != Head::Sign {
                return fail(path, CheckReason::PrincipalShape);
            }
            let args = bank.args(pr).to_vec();
            if bank.head(args[0]) != Head::Blind {
                return fail(path, CheckReason::PrincipalShape);
            }
            let inner = bank.args(args[0]).to_vec();
            let unblinded = bank.sign(inner[0], args[1]);
            vec![
                conc.with_goal(inner[1]),
                conc.extended(&[unblinded, inner[1]]),
            ]
        }
        Rule::GuardedSub => {
            let w = principal(p, path)?;
            if !bank.is_guarded(w) || !sequent_subterm(bank, conc, w) {
                return fail(path, CheckReason::NotGuardedSubterm);
            }
            vec![conc.with_goal(w), conc.extended(&[w])]
        }
        Rule::CrossSub => {
            let w = principal(p, path)?;
            if !sequent_cross_subterm(bank, conc, w) {
                return fail(path, CheckReason::NotCrossTheorySubterm);
            }
            vec![conc.with_goal(w), conc.extended(&[w])]
        }
    };

    if p.premises.len() != premise_shapes.len() {
        return fail(
            path,
            CheckReason::PremiseCount {
                want: premise_shapes.len(),
                got: p.premises.len(),
            },
        );
    }
    for (i, (q, want)) in p.premises.iter().zip(&premise_shapes).enumerate() {
        if &q.conclusion != want {
            return fail(path, CheckReason::PremiseMismatch { index: i });
        }
        path.push(i);
        check_node(bank, cat, q, path)?;
        path.pop();
    }
    Ok(())
}

fn principal(p: &Proof, path: &[usize]) -> Result<TermId, CheckError> {
    match p.witness {
        Witness::Term(t) => Ok(t),
        _ => Err(CheckError {
            path: path.to_vec(),
            reason: CheckReason::WitnessKind,
        }),
    }
}

fn sequent_subterm(bank: &TermBank, s: &Sequent, t: TermId) -> bool {
    let mut subs = HashSet::new();
    for &g in s.gamma.iter() {
        bank.subterms_into(g, &mut subs);
    }
    bank.subterms_into(s.goal, &mut subs);
    subs.contains(&t)
}

fn sequent_cross_subterm(bank: &TermBank, s: &Sequent, t: TermId) -> bool {
    let mut cross = HashSet::new();
    for &g in s.gamma.iter() {
        bank.cross_theory_into(g, &mut cross);
    }
    bank.cross_theory_into(s.goal, &mut cross);
    cross.contains(&t)
}
