//! Elementary deducibility: can the target be written as a context over one
//! theory's signature applied to hypotheses?  Hypotheses and target are first
//! variable-abstracted for the theory, turning the question into pure
//! equational solving: multiset covering for a bare AC operator, linear
//! algebra over GF(2) for exclusive-or, and integer linear equations for
//! Abelian groups.  A successful answer is a [`Recipe`], which can be
//! re-verified from scratch independently of how it was found.

use crate::term::{
    apply_context, Context, Head, Skeleton, TermBank, TermId, TheoryId,
};
use crate::theory::{abstract_term, normalize, Catalog, TheoryKind};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Deducibility witness: applying the context to the hole arguments yields a
/// term equal to the target modulo the theories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recipe {
    pub theory: TheoryId,
    pub context: Context,
    /// One term per hole index, all drawn from the hypotheses.
    pub hole_args: Vec<TermId>,
}

impl Recipe {
    /// Size of the witness: skeleton nodes plus hole count.
    pub fn size(&self) -> usize {
        fn sk(s: &Skeleton) -> usize {
            match s {
                Skeleton::Hole(_) | Skeleton::Leaf(_) | Skeleton::Zero => 1,
                Skeleton::Inv(inner) => 1 + sk(inner),
                Skeleton::Op(parts) => 1 + parts.iter().map(sk).sum::<usize>(),
            }
        }
        sk(&self.context.skeleton) + self.hole_args.len()
    }
}

/// Searches for a recipe deriving `m` from `gamma` within one theory.
/// Hypotheses and target are taken modulo the whole rewrite system (callers
/// pass normal forms).  Deterministic: a fixed solving order makes the same
/// inputs yield the same recipe.
pub fn elem_deduce(
    bank: &mut TermBank,
    cat: &Catalog,
    gamma: &[TermId],
    m: TermId,
    th: TheoryId,
) -> Option<Recipe> {
    match cat.kind(th) {
        TheoryKind::Empty => {
            let j = gamma.iter().position(|&g| g == m)?;
            Some(Recipe {
                theory: th,
                context: Context {
                    theory: th,
                    skeleton: Skeleton::Hole(1),
                },
                hole_args: vec![gamma[j]],
            })
        }
        TheoryKind::AcOnly => {
            let msets: Vec<BTreeMap<TermId, u32>> = gamma
                .iter()
                .map(|&g| {
                    let a = abstract_term(bank, cat, g, th);
                    atom_multiset(bank, th, a)
                })
                .collect();
            let am = abstract_term(bank, cat, m, th);
            let target = atom_multiset(bank, th, am);
            let counts = solve_multiset(&msets, &target)?;
            Some(multiset_recipe(th, gamma, &counts))
        }
        TheoryKind::Xor => {
            let vecs: Vec<BTreeMap<TermId, u32>> = gamma
                .iter()
                .map(|&g| {
                    let a = abstract_term(bank, cat, g, th);
                    mod2_multiset(bank, th, a)
                })
                .collect();
            let am = abstract_term(bank, cat, m, th);
            let tvec = mod2_multiset(bank, th, am);
            let atoms = atom_index(&vecs, &tvec);
            let cols: Vec<Vec<bool>> = vecs
                .iter()
                .map(|v| atoms.iter().map(|a| v.contains_key(a)).collect())
                .collect();
            let target: Vec<bool> =
                atoms.iter().map(|a| tvec.contains_key(a)).collect();
            let x = solve_gf2(&cols, &target)?;
            let counts: Vec<i64> =
                x.iter().map(|&b| if b { 1 } else { 0 }).collect();
            Some(signed_recipe(th, gamma, &counts))
        }
        TheoryKind::AbelianGroup => {
            let vecs: Vec<BTreeMap<TermId, i64>> = gamma
                .iter()
                .map(|&g| {
                    let a = abstract_term(bank, cat, g, th);
                    crate::theory::exponent_map(bank, th, a)
                })
                .collect();
            let am = abstract_term(bank, cat, m, th);
            let tvec = crate::theory::exponent_map(bank, th, am);
            let atoms = atom_index(&vecs, &tvec);
            let cols: Vec<Vec<BigInt>> = vecs
                .iter()
                .map(|v| {
                    atoms
                        .iter()
                        .map(|a| BigInt::from(*v.get(a).unwrap_or(&0)))
                        .collect()
                })
                .collect();
            let target: Vec<BigInt> = atoms
                .iter()
                .map(|a| BigInt::from(*tvec.get(a).unwrap_or(&0)))
                .collect();
            let x = solve_integer(&cols, &target)?;
            let counts: Vec<i64> =
                x.iter().map(|c| c.to_i64()).collect::<Option<Vec<i64>>>()?;
            Some(signed_recipe(th, gamma, &counts))
        }
    }
}

/// Re-checks a recipe from scratch: the context must use only holes and the
/// theory's symbols, its holes must be filled from `gamma`, and the applied
/// context must normalize to the target.
pub fn verify_recipe(
    bank: &mut TermBank,
    cat: &Catalog,
    r: &Recipe,
    gamma: &[TermId],
    m: TermId,
) -> bool {
    if r.theory.0 as usize >= cat.len() || r.context.theory != r.theory {
        return false;
    }
    if !skeleton_symbols_ok(&r.context.skeleton, cat.kind(r.theory)) {
        return false;
    }
    let k = match r.context.hole_count() {
        Ok(k) => k,
        Err(_) => return false,
    };
    if k != r.hole_args.len() {
        return false;
    }
    if !r.hole_args.iter().all(|a| gamma.contains(a)) {
        return false;
    }
    let applied = match apply_context(bank, &r.context, &r.hole_args) {
        Ok(t) => t,
        Err(_) => return false,
    };
    normalize(bank, cat, applied) == m
}

fn skeleton_symbols_ok(s: &Skeleton, kind: TheoryKind) -> bool {
    match s {
        Skeleton::Hole(_) => true,
        Skeleton::Leaf(_) => false,
        Skeleton::Zero => kind.has_zero(),
        Skeleton::Inv(inner) => kind.has_inv() && skeleton_symbols_ok(inner, kind),
        Skeleton::Op(parts) => {
            kind.has_op()
                && parts.len() >= 2
                && parts.iter().all(|p| skeleton_symbols_ok(p, kind))
        }
    }
}

/// Atom occurrence counts of a pure AC term: an operator node contributes
/// each child once per occurrence, anything else is a single atom.
fn atom_multiset(
    bank: &TermBank,
    th: TheoryId,
    t: TermId,
) -> BTreeMap<TermId, u32> {
    let mut out = BTreeMap::new();
    match bank.head(t) {
        Head::Ac(u) if u == th => {
            for &c in bank.args(t) {
                *out.entry(c).or_insert(0) += 1;
            }
        }
        _ => {
            out.insert(t, 1);
        }
    }
    out
}

/// Atom counts reduced mod 2, dropping the unit.
fn mod2_multiset(
    bank: &TermBank,
    th: TheoryId,
    t: TermId,
) -> BTreeMap<TermId, u32> {
    let mut counts = BTreeMap::new();
    match bank.head(t) {
        Head::Zero(u) if u == th => {}
        Head::Ac(u) if u == th => {
            for &c in bank.args(t) {
                *counts.entry(c).or_insert(0u32) += 1;
            }
        }
        _ => {
            counts.insert(t, 1);
        }
    }
    counts.retain(|_, n| *n % 2 == 1);
    counts
}

/// Sorted union of the atoms mentioned by any column or the target.
fn atom_index<N>(
    cols: &[BTreeMap<TermId, N>],
    target: &BTreeMap<TermId, N>,
) -> Vec<TermId> {
    let mut atoms: Vec<TermId> = Vec::new();
    for m in cols.iter().chain(std::iter::once(target)) {
        for &a in m.keys() {
            if !atoms.contains(&a) {
                atoms.push(a);
            }
        }
    }
    atoms.sort_unstable();
    atoms
}

/// Multiset cover: how many copies of each member sum to the target.  Tries
/// high multiplicities first and backtracks; at least one copy total.
fn solve_multiset(
    members: &[BTreeMap<TermId, u32>],
    target: &BTreeMap<TermId, u32>,
) -> Option<Vec<u32>> {
    if target.is_empty() {
        return None;
    }
    let mut remaining = target.clone();
    let mut counts = vec![0u32; members.len()];
    if cover(members, 0, &mut remaining, &mut counts) {
        Some(counts)
    } else {
        None
    }
}

fn cover(
    members: &[BTreeMap<TermId, u32>],
    j: usize,
    remaining: &mut BTreeMap<TermId, u32>,
    counts: &mut Vec<u32>,
) -> bool {
    if j == members.len() {
        return remaining.values().all(|&n| n == 0)
            && counts.iter().any(|&c| c > 0);
    }
    let mset = &members[j];
    debug_assert!(!mset.is_empty());
    let cap = mset
        .iter()
        .map(|(a, &n)| remaining.get(a).copied().unwrap_or(0) / n)
        .min()
        .unwrap_or(0);
    for c in (0..=cap).rev() {
        for (a, &n) in mset {
            *remaining.entry(*a).or_insert(0) -= n * c;
        }
        counts[j] = c;
        let ok = cover(members, j + 1, remaining, counts);
        for (a, &n) in mset {
            *remaining.entry(*a).or_insert(0) += n * c;
        }
        if ok {
            return true;
        }
        counts[j] = 0;
    }
    false
}

/// Recipe for a multiset cover: member `j` appears `counts[j]` times, holes
/// numbered in member order.
fn multiset_recipe(th: TheoryId, gamma: &[TermId], counts: &[u32]) -> Recipe {
    let mut parts = Vec::new();
    let mut hole_args = Vec::new();
    for (j, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        hole_args.push(gamma[j]);
        let idx = hole_args.len();
        for _ in 0..c {
            parts.push(Skeleton::Hole(idx));
        }
    }
    debug_assert!(!parts.is_empty());
    let skeleton = if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        Skeleton::Op(parts)
    };
    Recipe {
        theory: th,
        context: Context {
            theory: th,
            skeleton,
        },
        hole_args,
    }
}

/// Recipe for signed coefficients: positive coefficients repeat the hole,
/// negative ones wrap the repetitions in the inverse.
pub(crate) fn signed_recipe(
    th: TheoryId,
    gamma: &[TermId],
    counts: &[i64],
) -> Recipe {
    let mut parts = Vec::new();
    let mut hole_args = Vec::new();
    for (j, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        hole_args.push(gamma[j]);
        let idx = hole_args.len();
        if c > 0 {
            for _ in 0..c {
                parts.push(Skeleton::Hole(idx));
            }
        } else {
            let n = (-c) as usize;
            let inner = if n == 1 {
                Skeleton::Hole(idx)
            } else {
                Skeleton::Op(vec![Skeleton::Hole(idx); n])
            };
            parts.push(Skeleton::Inv(Box::new(inner)));
        }
    }
    let skeleton = match parts.len() {
        0 => Skeleton::Zero,
        1 => parts.pop().unwrap(),
        _ => Skeleton::Op(parts),
    };
    Recipe {
        theory: th,
        context: Context {
            theory: th,
            skeleton,
        },
        hole_args,
    }
}

/// Solves `sum of chosen columns = target` over GF(2) by Gaussian
/// elimination; free variables are left unset, so the answer is unique for a
/// fixed column order.
fn solve_gf2(cols: &[Vec<bool>], target: &[bool]) -> Option<Vec<bool>> {
    let k = cols.len();
    let rows = target.len();
    debug_assert!(cols.iter().all(|c| c.len() == rows));
    // row-major augmented matrix [A | b]
    let mut mat: Vec<Vec<bool>> = (0..rows)
        .map(|r| {
            let mut row: Vec<bool> = cols.iter().map(|c| c[r]).collect();
            row.push(target[r]);
            row
        })
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut rank = 0;
    for c in 0..k {
        let Some(p) = (rank..rows).find(|&r| mat[r][c]) else {
            continue;
        };
        mat.swap(rank, p);
        for r in 0..rows {
            if r != rank && mat[r][c] {
                let (head, tail) = mat.split_at_mut(rank.max(r));
                let (src, dst) = if r < rank {
                    (&tail[0], &mut head[r])
                } else {
                    (&head[rank], &mut tail[0])
                };
                for i in 0..=k {
                    dst[i] ^= src[i];
                }
            }
        }
        pivots.push((rank, c));
        rank += 1;
    }
    if mat[rank..].iter().any(|row| row[k]) {
        return None;
    }
    let mut x = vec![false; k];
    for &(r, c) in &pivots {
        x[c] = mat[r][k];
    }
    Some(x)
}

/// Solves `A x = b` over the integers, columns given explicitly.  Reduces A
/// to column echelon form by unimodular column operations, then solves by
/// forward substitution with divisibility checks.
fn solve_integer(cols: &[Vec<BigInt>], target: &[BigInt]) -> Option<Vec<BigInt>> {
    let k = cols.len();
    let rows = target.len();
    let mut w: Vec<Vec<BigInt>> = cols.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..k)
        .map(|j| {
            (0..k)
                .map(|i| if i == j { BigInt::from(1) } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let mut fixed = 0;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for row in 0..rows {
        loop {
            let nz: Vec<usize> = (fixed..k)
                .filter(|&j| !w[j][row].is_zero())
                .collect();
            match nz.len() {
                0 => break,
                1 => {
                    let j = nz[0];
                    w.swap(fixed, j);
                    u.swap(fixed, j);
                    if w[fixed][row].is_negative() {
                        for v in w[fixed].iter_mut() {
                            *v = -&*v;
                        }
                        for v in u[fixed].iter_mut() {
                            *v = -&*v;
                        }
                    }
                    pivots.push((row, fixed));
                    fixed += 1;
                    break;
                }
                _ => {
                    let &jm = nz
                        .iter()
                        .min_by_key(|&&j| w[j][row].abs())
                        .unwrap();
                    for &j in &nz {
                        if j == jm {
                            continue;
                        }
                        // jm holds the minimal nonzero magnitude, so the
                        // quotient is nonzero and the remainder shrinks.
                        let q = &w[j][row] / &w[jm][row];
                        debug_assert!(!q.is_zero());
                        for i in 0..rows {
                            let d = &q * &w[jm][i];
                            w[j][i] -= d;
                        }
                        for i in 0..k {
                            let d = &q * &u[jm][i];
                            u[j][i] -= d;
                        }
                    }
                }
            }
        }
    }
    // Forward substitution over the echelon columns.
    let mut residual: Vec<BigInt> = target.to_vec();
    let mut y: Vec<BigInt> = vec![BigInt::zero(); k];
    for &(row, col) in &pivots {
        let head = &w[col][row];
        let (q, r) = (&residual[row] / head, &residual[row] % head);
        if !r.is_zero() {
            return None;
        }
        if !q.is_zero() {
            for i in 0..rows {
                let d = &q * &w[col][i];
                residual[i] -= d;
            }
        }
        y[col] = q;
    }
    if residual.iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut x = vec![BigInt::zero(); k];
    for (col, yc) in y.iter().enumerate() {
        if yc.is_zero() {
            continue;
        }
        for i in 0..k {
            let d = yc * &u[col][i];
            x[i] += d;
        }
    }
    debug_assert!({
        let mut check = vec![BigInt::zero(); rows];
        for (j, c) in cols.iter().enumerate() {
            for i in 0..rows {
                check[i] += &x[j] * &c[i];
            }
        }
        check == target
    });
    Some(x)
}
