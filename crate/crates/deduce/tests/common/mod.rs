//! Shared fixtures for the integration suites: standard catalogs and a
//! seeded random instance generator.

// each test binary uses a different subset of these helpers
#![allow(dead_code)]

use deduce::engine::Proof;
use deduce::{Catalog, TermBank, TermId, TheoryDef, TheoryId, TheoryKind};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One theory with the default symbols.
pub fn single(kind: TheoryKind) -> Catalog {
    Catalog::new(vec![TheoryDef::new("t", kind)]).unwrap()
}

/// Exclusive-or plus an abelian group, disjoint symbols.
pub fn xor_ag() -> Catalog {
    let xor = TheoryDef::new("x", TheoryKind::Xor);
    let mut ag = TheoryDef::new("g", TheoryKind::AbelianGroup);
    ag.op = Some("*".into());
    ag.zero = Some("e".into());
    Catalog::new(vec![xor, ag]).unwrap()
}

pub const XOR_TH: TheoryId = TheoryId(0);
pub const AG_TH: TheoryId = TheoryId(1);

pub struct Gen {
    pub atoms: Vec<TermId>,
}

impl Gen {
    pub fn new(bank: &mut TermBank, names: &[&str]) -> Self {
        let atoms = names.iter().map(|n| bank.name(n)).collect();
        Gen { atoms }
    }

    pub fn atom(&self, rng: &mut ChaCha8Rng) -> TermId {
        *self.atoms.choose(rng).unwrap()
    }

    /// A random term over the catalog, `depth` constructor layers deep.
    pub fn term(
        &self,
        bank: &mut TermBank,
        cat: &Catalog,
        rng: &mut ChaCha8Rng,
        depth: u32,
    ) -> TermId {
        if depth == 0 || rng.gen_bool(0.3) {
            return self.atom(rng);
        }
        let th = TheoryId(rng.gen_range(0..cat.len()) as u32);
        let kind = cat.kind(th);
        match rng.gen_range(0..8) {
            0 => {
                let a = self.term(bank, cat, rng, depth - 1);
                let b = self.term(bank, cat, rng, depth - 1);
                bank.pair(a, b)
            }
            1 => {
                let a = self.term(bank, cat, rng, depth - 1);
                let k = self.atom(rng);
                bank.enc(a, k)
            }
            2 => {
                let a = self.term(bank, cat, rng, depth - 1);
                let k = self.atom(rng);
                bank.sign(a, k)
            }
            3 => {
                let a = self.term(bank, cat, rng, depth - 1);
                let r = self.atom(rng);
                bank.blind(a, r)
            }
            4 => {
                let k = self.atom(rng);
                bank.pub_key(k)
            }
            _ if kind.has_op() => {
                let n = rng.gen_range(2..=3);
                let args = (0..n)
                    .map(|_| self.term(bank, cat, rng, depth - 1))
                    .collect();
                let t = bank.ac_combine(th, args);
                if kind.has_inv() && rng.gen_bool(0.3) {
                    bank.inv(th, t)
                } else {
                    t
                }
            }
            _ => self.atom(rng),
        }
    }

    /// A random sequent with a mixed chance of being derivable: the goal is
    /// either an arbitrary term, a subterm of a hypothesis, or a combination
    /// of hypotheses.
    pub fn instance(
        &self,
        bank: &mut TermBank,
        cat: &Catalog,
        rng: &mut ChaCha8Rng,
        n_gamma: usize,
    ) -> (Vec<TermId>, TermId) {
        let gamma: Vec<TermId> = (0..n_gamma)
            .map(|_| self.term(bank, cat, rng, 3))
            .collect();
        let goal = match rng.gen_range(0..10) {
            0..=3 => self.term(bank, cat, rng, 2),
            4..=6 => {
                let g = *gamma.choose(rng).unwrap();
                let subs = bank.subterms(g);
                *subs.choose(rng).unwrap()
            }
            _ => {
                let a = *gamma.choose(rng).unwrap();
                let b = *gamma.choose(rng).unwrap();
                match rng.gen_range(0..3) {
                    0 => bank.pair(a, b),
                    1 => bank.enc(a, self.atom(rng)),
                    _ => {
                        let th = TheoryId(rng.gen_range(0..cat.len()) as u32);
                        if cat.kind(th).has_op() {
                            bank.ac_combine(th, vec![a, b])
                        } else {
                            bank.pair(a, b)
                        }
                    }
                }
            }
        };
        (gamma, goal)
    }
}

/// Visits every node of a proof tree.
pub fn walk<'p>(p: &'p Proof, f: &mut impl FnMut(&'p Proof)) {
    f(p);
    for q in &p.premises {
        walk(q, f);
    }
}

/// An instance that is derivable by construction: hypotheses hide a few
/// payloads behind pairs, encryptions and blindings whose keys are also
/// given, and the goal combines recoverable material under the theory
/// operators.
pub fn derivable_instance(
    bank: &mut TermBank,
    rng: &mut ChaCha8Rng,
) -> (Vec<TermId>, TermId) {
    let pool: Vec<TermId> = ["a", "b", "c", "d", "k1", "k2", "r1"]
        .iter()
        .map(|n| bank.name(n))
        .collect();
    let mut gamma = Vec::new();
    let mut reachable = Vec::new();

    for i in 0..3 {
        let x = pool[i];
        let aux = pool[3 + rng.gen_range(0..4)];
        match rng.gen_range(0..4) {
            0 => {
                gamma.push(bank.pair(x, aux));
            }
            1 => {
                gamma.push(bank.enc(x, aux));
                gamma.push(aux);
            }
            2 => {
                gamma.push(bank.blind(x, aux));
                gamma.push(aux);
            }
            _ => {
                let blinded = bank.blind(x, aux);
                let signed = bank.sign(blinded, pool[5]);
                gamma.push(signed);
                gamma.push(aux);
                // the unblinded signature is recoverable, not x itself
                reachable.push(bank.sign(x, pool[5]));
                gamma.push(x);
            }
        }
        reachable.push(x);
    }
    reachable.extend(gamma.iter().copied());

    // combine a few reachable pieces under the theory operators
    let parts: Vec<TermId> = (0..rng.gen_range(2..=3))
        .map(|_| *reachable.choose(rng).unwrap())
        .collect();
    let goal = match rng.gen_range(0..4) {
        0 => bank.ac_combine(XOR_TH, parts),
        1 => {
            let t = bank.ac_combine(AG_TH, parts);
            bank.inv(AG_TH, t)
        }
        2 => {
            let s = bank.ac_combine(XOR_TH, parts.clone());
            let p = bank.ac_combine(AG_TH, parts);
            bank.ac_combine(AG_TH, vec![s, p])
        }
        _ => {
            let a = parts[0];
            let b = parts[1];
            let p = bank.pair(a, b);
            bank.ac_combine(XOR_TH, vec![p, a])
        }
    };
    (gamma, goal)
}

/// Damages a goal so it usually stops being derivable: folds in a name the
/// hypotheses never mention.
pub fn perturb(
    bank: &mut TermBank,
    rng: &mut ChaCha8Rng,
    goal: TermId,
) -> TermId {
    let alien = bank.name("zz_unknown");
    match rng.gen_range(0..3) {
        0 => bank.ac_combine(XOR_TH, vec![goal, alien]),
        1 => bank.ac_combine(AG_TH, vec![goal, alien]),
        _ => bank.enc(goal, alien),
    }
}
