//! Proof search.  Right search proves a goal over a fixed hypothesis set by
//! elementary deduction and right introduction rules only.  The full search
//! alternates right search with sweeps of left rule applications drawn from
//! the saturated set; every application strictly grows the hypothesis set,
//! which stays inside the saturated set, so the number of sweeps is bounded
//! by its size and the whole procedure is a decision procedure.

use crate::engine::proof::{Proof, Rule, Witness};
use crate::engine::{check_proof, CheckError, Sequent};
use crate::solve::{elem_deduce, verify_recipe};
use crate::term::{saturate, Head, SaturatedSet, TermBank, TermId};
use crate::theory::{normalize, Catalog};
use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

/// Left rules in their pinned sweep order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeftRule {
    Pair,
    Enc,
    Sign,
    Blind1,
    Blind2,
    /// Guarded subterm introduction.
    Sub,
    /// Cross-theory subterm introduction.
    CrossSub,
}

pub const LEFT_RULES: [LeftRule; 7] = [
    LeftRule::Pair,
    LeftRule::Enc,
    LeftRule::Sign,
    LeftRule::Blind1,
    LeftRule::Blind2,
    LeftRule::Sub,
    LeftRule::CrossSub,
];

#[derive(Debug, Clone, Default)]
pub struct SearchStats {
    /// Completed left sweeps.
    pub sweeps: usize,
    pub st_size: usize,
    /// Elementary solver invocations.
    pub elem_calls: usize,
    /// Left rule applications recorded.
    pub l_steps: usize,
    /// Largest recipe emitted by the elementary solvers.
    pub max_recipe_size: usize,
    pub wall: Duration,
    /// Hypothesis set when the search stopped; every intermediate set is a
    /// subset of it.
    pub final_delta: Vec<TermId>,
}

#[derive(Debug, Clone)]
pub struct Decision {
    pub provable: bool,
    pub proof: Option<Proof>,
    pub stats: SearchStats,
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("search produced a proof the checker rejects: {0}")]
    ProofRejected(#[from] CheckError),
}

struct SearchCtx<'a> {
    bank: &'a mut TermBank,
    cat: &'a Catalog,
    /// Right-search memo for the current hypothesis set; cleared whenever
    /// the set grows.
    memo: HashMap<TermId, Option<Proof>>,
    elem_calls: usize,
    max_recipe_size: usize,
}

impl<'a> SearchCtx<'a> {
    fn new(bank: &'a mut TermBank, cat: &'a Catalog) -> Self {
        SearchCtx {
            bank,
            cat,
            memo: HashMap::new(),
            elem_calls: 0,
            max_recipe_size: 0,
        }
    }
}

/// Hypothesis set plus the derived candidate sets the left rules consult.
struct SweepState {
    delta: BTreeSet<TermId>,
    gamma: Arc<[TermId]>,
    /// Subterms of the hypotheses and goal.
    subs: HashSet<TermId>,
    /// Cross-theory subterms of the hypotheses and goal.
    cross: HashSet<TermId>,
    goal: TermId,
}

impl SweepState {
    fn init(bank: &mut TermBank, s: &Sequent) -> Self {
        let mut subs = HashSet::new();
        let mut cross = HashSet::new();
        for &g in s.gamma.iter() {
            bank.subterms_into(g, &mut subs);
            bank.cross_theory_into(g, &mut cross);
        }
        bank.subterms_into(s.goal, &mut subs);
        bank.cross_theory_into(s.goal, &mut cross);
        SweepState {
            delta: s.gamma.iter().copied().collect(),
            gamma: s.gamma.clone(),
            subs,
            cross,
            goal: s.goal,
        }
    }

    fn add(&mut self, bank: &mut TermBank, t: TermId) {
        self.delta.insert(t);
        bank.subterms_into(t, &mut self.subs);
        bank.cross_theory_into(t, &mut self.cross);
        self.gamma = self.delta.iter().copied().collect::<Vec<_>>().into();
    }
}

/// One recorded left application.
struct Step {
    rule: LeftRule,
    principal: TermId,
    added: Vec<TermId>,
    side: Option<Proof>,
    gamma_before: Arc<[TermId]>,
}

/// Right search: elementary deduction in each theory, then right
/// introduction on the goal's head.  Memoized per hypothesis generation, so
/// each distinct goal costs at most one elementary check per theory.
fn prove_right(ctx: &mut SearchCtx, gamma: &Arc<[TermId]>, goal: TermId) -> Option<Proof> {
    if let Some(hit) = ctx.memo.get(&goal) {
        return hit.clone();
    }
    let result = prove_right_uncached(ctx, gamma, goal);
    ctx.memo.insert(goal, result.clone());
    result
}

fn prove_right_uncached(
    ctx: &mut SearchCtx,
    gamma: &Arc<[TermId]>,
    goal: TermId,
) -> Option<Proof> {
    for th in ctx.cat.ids() {
        ctx.elem_calls += 1;
        if let Some(recipe) = elem_deduce(ctx.bank, ctx.cat, gamma, goal, th) {
            debug_assert!(verify_recipe(ctx.bank, ctx.cat, &recipe, gamma, goal));
            ctx.max_recipe_size = ctx.max_recipe_size.max(recipe.size());
            return Some(Proof {
                rule: Rule::Id(th),
                conclusion: Sequent {
                    gamma: gamma.clone(),
                    goal,
                },
                witness: Witness::Recipe(recipe),
                premises: Vec::new(),
            });
        }
    }
    let (rule, args) = match ctx.bank.head(goal) {
        Head::Pair => (Rule::PairRight, ctx.bank.args(goal).to_vec()),
        Head::Enc => (Rule::EncRight, ctx.bank.args(goal).to_vec()),
        Head::Sign => (Rule::SignRight, ctx.bank.args(goal).to_vec()),
        Head::Blind => (Rule::BlindRight, ctx.bank.args(goal).to_vec()),
        _ => return None,
    };
    let mut premises = Vec::with_capacity(args.len());
    for a in args {
        premises.push(prove_right(ctx, gamma, a)?);
    }
    Some(Proof {
        rule,
        conclusion: Sequent {
            gamma: gamma.clone(),
            goal,
        },
        witness: Witness::None,
        premises,
    })
}

/// Attempts one left rule on one principal.  Succeeds only when the side
/// conditions hold and the application strictly grows the hypothesis set;
/// the premise is then unique.
fn try_rule(
    ctx: &mut SearchCtx,
    state: &SweepState,
    principal: TermId,
    rule: LeftRule,
) -> Option<Step> {
    let in_delta = state.delta.contains(&principal);
    let fresh = |added: Vec<TermId>| -> Option<Vec<TermId>> {
        let new: Vec<TermId> = added
            .into_iter()
            .filter(|t| !state.delta.contains(t))
            .collect();
        if new.is_empty() {
            None
        } else {
            Some(new)
        }
    };
    let step = |added, side| {
        Some(Step {
            rule,
            principal,
            added,
            side,
            gamma_before: state.gamma.clone(),
        })
    };
    match rule {
        LeftRule::Pair => {
            if !in_delta || ctx.bank.head(principal) != Head::Pair {
                return None;
            }
            let added = fresh(ctx.bank.args(principal).to_vec())?;
            step(added, None)
        }
        LeftRule::Enc => {
            if !in_delta || ctx.bank.head(principal) != Head::Enc {
                return None;
            }
            let args = ctx.bank.args(principal).to_vec();
            let added = fresh(args.clone())?;
            let side = prove_right(ctx, &state.gamma, args[1])?;
            step(added, Some(side))
        }
        LeftRule::Sign => {
            if !in_delta || ctx.bank.head(principal) != Head::Sign {
                return None;
            }
            let args = ctx.bank.args(principal).to_vec();
            let pk = ctx.bank.find(Head::PubKey, &args[1..2])?;
            if !state.delta.contains(&pk) {
                return None;
            }
            let added = fresh(vec![args[0]])?;
            step(added, None)
        }
        LeftRule::Blind1 => {
            if !in_delta || ctx.bank.head(principal) != Head::Blind {
                return None;
            }
            let args = ctx.bank.args(principal).to_vec();
            let added = fresh(args.clone())?;
            let side = prove_right(ctx, &state.gamma, args[1])?;
            step(added, Some(side))
        }
        LeftRule::Blind2 => {
            if !in_delta || ctx.bank.head(principal) != Head::Sign {
                return None;
            }
            let args = ctx.bank.args(principal).to_vec();
            if ctx.bank.head(args[0]) != Head::Blind {
                return None;
            }
            let inner = ctx.bank.args(args[0]).to_vec();
            let unblinded = ctx.bank.sign(inner[0], args[1]);
            let added = fresh(vec![unblinded, inner[1]])?;
            let side = prove_right(ctx, &state.gamma, inner[1])?;
            step(added, Some(side))
        }
        LeftRule::Sub => {
            if state.delta.contains(&principal)
                || !ctx.bank.is_guarded(principal)
                || !state.subs.contains(&principal)
            {
                return None;
            }
            let side = prove_right(ctx, &state.gamma, principal)?;
            step(vec![principal], Some(side))
        }
        LeftRule::CrossSub => {
            if ctx.cat.len() < 2
                || state.delta.contains(&principal)
                || !state.cross.contains(&principal)
            {
                return None;
            }
            let side = prove_right(ctx, &state.gamma, principal)?;
            step(vec![principal], Some(side))
        }
    }
}

/// Expands the recorded left steps and the closing right proof into a
/// sequent proof tree, innermost first.
fn assemble(goal: TermId, steps: Vec<Step>, closing: Proof) -> Proof {
    let mut node = closing;
    for s in steps.into_iter().rev() {
        let conclusion = Sequent {
            gamma: s.gamma_before,
            goal,
        };
        let witness = Witness::Term(s.principal);
        let (rule, premises) = match (s.rule, s.side) {
            (LeftRule::Pair, None) => (Rule::PairLeft, vec![node]),
            (LeftRule::Enc, Some(side)) => (Rule::EncLeft, vec![side, node]),
            (LeftRule::Sign, None) => (Rule::SignLeft, vec![node]),
            (LeftRule::Blind1, Some(side)) => {
                (Rule::BlindLeft1, vec![side, node])
            }
            (LeftRule::Blind2, Some(side)) => {
                (Rule::BlindLeft2, vec![side, node])
            }
            (LeftRule::Sub, Some(side)) => (Rule::GuardedSub, vec![side, node]),
            (LeftRule::CrossSub, Some(side)) => {
                (Rule::CrossSub, vec![side, node])
            }
            _ => unreachable!("side proof presence is fixed per rule"),
        };
        node = Proof {
            rule,
            conclusion,
            witness,
            premises,
        };
    }
    node
}

/// Full proof search for one sequent over its saturated set.
pub fn linear_search(
    bank: &mut TermBank,
    cat: &Catalog,
    s: &Sequent,
    st: &SaturatedSet,
) -> Decision {
    let start = Instant::now();
    let mut ctx = SearchCtx::new(bank, cat);
    let mut state = SweepState::init(ctx.bank, s);
    let mut steps: Vec<Step> = Vec::new();
    let mut sweeps = 0usize;

    let closing = loop {
        if let Some(p) = prove_right(&mut ctx, &state.gamma, state.goal) {
            break Some(p);
        }
        if sweeps == st.len() {
            break None;
        }
        // Left rules only ever fire on a hypothesis or on a subterm the
        // subterm rules could introduce, so the sweep visits those instead
        // of the full saturated set; the implicit signature layer enters
        // the hypothesis set through the unblinding rule on demand.
        let mut candidates: Vec<TermId> = state
            .delta
            .iter()
            .chain(state.subs.iter())
            .chain(state.cross.iter())
            .copied()
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        let mut grew = false;
        for candidate in candidates {
            for rule in LEFT_RULES {
                if let Some(step) = try_rule(&mut ctx, &state, candidate, rule) {
                    for &a in &step.added {
                        state.add(ctx.bank, a);
                    }
                    ctx.memo.clear();
                    steps.push(step);
                    grew = true;
                }
            }
        }
        sweeps += 1;
        if !grew {
            break None;
        }
    };

    let stats = SearchStats {
        sweeps,
        st_size: st.len(),
        elem_calls: ctx.elem_calls,
        l_steps: steps.len(),
        max_recipe_size: ctx.max_recipe_size,
        wall: start.elapsed(),
        final_delta: state.gamma.to_vec(),
    };
    match closing {
        Some(p) => Decision {
            provable: true,
            proof: Some(assemble(state.goal, steps, p)),
            stats,
        },
        None => Decision {
            provable: false,
            proof: None,
            stats,
        },
    }
}

/// Decides deducibility of `goal` from `gamma`: normalizes, saturates,
/// searches, and re-checks any proof found with the independent checker.
pub fn decide(
    bank: &mut TermBank,
    cat: &Catalog,
    gamma: &[TermId],
    goal: TermId,
) -> Result<Decision, EngineError> {
    let ngamma: Vec<TermId> =
        gamma.iter().map(|&g| normalize(bank, cat, g)).collect();
    let ngoal = normalize(bank, cat, goal);
    let sequent = Sequent::new(ngamma, ngoal);
    let st = saturate(bank, &sequent.gamma, sequent.goal);
    let decision = linear_search(bank, cat, &sequent, &st);
    if let Some(proof) = &decision.proof {
        check_proof(bank, cat, proof, &sequent)?;
    }
    Ok(decision)
}

/// Right search alone, as a standalone query.
pub fn right_prove(
    bank: &mut TermBank,
    cat: &Catalog,
    s: &Sequent,
) -> Option<Proof> {
    let mut ctx = SearchCtx::new(bank, cat);
    prove_right(&mut ctx, &s.gamma, s.goal)
}

/// Checks one (principal, rule) pair against a sequent and returns the
/// unique goal-carrying premise if the rule applies.
pub fn applicable(
    bank: &mut TermBank,
    cat: &Catalog,
    principal: TermId,
    rule: LeftRule,
    s: &Sequent,
) -> Option<Sequent> {
    let mut ctx = SearchCtx::new(bank, cat);
    let state = SweepState::init(ctx.bank, s);
    let step = try_rule(&mut ctx, &state, principal, rule)?;
    Some(s.extended(&step.added))
}
