//! Hash-consed ground terms over the cryptographic constructors (pairing,
//! encryption, signing, blinding, public keys) plus the operators of the
//! declared equational theories (an AC operator, optionally a unit and an
//! inverse per theory).
//!
//! AC operator applications are canonicalized at interning time: spines of
//! the same operator are flattened into a single n-ary node and the children
//! are sorted by interner id.  Two terms are therefore equal modulo AC if and
//! only if they have the same [`TermId`].

use std::collections::{HashMap, HashSet};
use std::fmt;

/// Index of a declared theory in the [`Catalog`](crate::theory::Catalog).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TheoryId(pub u32);

/// Interned name (free constant).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NameId(pub u32);

/// Interned term.  Ids are assigned in interning order, so terms built while
/// parsing a problem file get ids in parse order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub u32);

/// Head symbol of a term node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Head {
    /// Free constant.
    Name(NameId),
    /// Abstraction variable; only created by variable abstraction, never by
    /// the parser.
    Var(u32),
    /// Public-key constructor `pub(k)`.
    PubKey,
    /// `sign(m, k)`.
    Sign,
    /// `blind(m, r)`.
    Blind,
    /// `pair(m, n)`.
    Pair,
    /// `enc(m, k)`.
    Enc,
    /// Unit element of a theory.
    Zero(TheoryId),
    /// Inverse operator of a theory.
    Inv(TheoryId),
    /// AC operator of a theory, n-ary with n >= 2 after flattening.
    Ac(TheoryId),
}

impl Head {
    /// Theory owning this head symbol, if it is a theory symbol.
    pub fn theory(self) -> Option<TheoryId> {
        match self {
            Head::Zero(t) | Head::Inv(t) | Head::Ac(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_constructor(self) -> bool {
        matches!(
            self,
            Head::PubKey | Head::Sign | Head::Blind | Head::Pair | Head::Enc
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Node {
    head: Head,
    args: Box<[TermId]>,
}

/// Term store.  One bank holds one problem's terms; normalization and
/// abstraction caches live here too, so a bank must only ever be used with a
/// single catalog.
#[derive(Debug, Default)]
pub struct TermBank {
    nodes: Vec<Node>,
    node_ids: HashMap<Node, TermId>,
    sizes: Vec<u32>,
    names: Vec<String>,
    name_ids: HashMap<String, NameId>,
    next_var: u32,
    /// normalize() memo: term -> its normal form.
    pub(crate) norm_memo: HashMap<TermId, TermId>,
    /// Variable abstraction classes: normal form -> abstraction variable.
    pub(crate) var_classes: HashMap<TermId, TermId>,
}

impl TermBank {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn head(&self, t: TermId) -> Head {
        self.nodes[t.0 as usize].head
    }

    pub fn args(&self, t: TermId) -> &[TermId] {
        &self.nodes[t.0 as usize].args
    }

    /// Term size: leaves count 1, an n-ary AC node counts n - 1, every other
    /// node counts 1, summed over the tree.
    pub fn size(&self, t: TermId) -> u32 {
        self.sizes[t.0 as usize]
    }

    pub fn name_str(&self, n: NameId) -> &str {
        &self.names[n.0 as usize]
    }

    fn intern(&mut self, head: Head, args: Vec<TermId>) -> TermId {
        let node = Node {
            head,
            args: args.into_boxed_slice(),
        };
        if let Some(&id) = self.node_ids.get(&node) {
            return id;
        }
        let id = TermId(self.nodes.len() as u32);
        let size = match node.head {
            Head::Name(_) | Head::Var(_) | Head::Zero(_) => 1,
            Head::Ac(_) => {
                (node.args.len() as u32 - 1)
                    + node.args.iter().map(|&a| self.size(a)).sum::<u32>()
            }
            _ => 1 + node.args.iter().map(|&a| self.size(a)).sum::<u32>(),
        };
        self.nodes.push(node.clone());
        self.node_ids.insert(node, id);
        self.sizes.push(size);
        id
    }

    /// Membership probe: the id this node would intern to, without inserting.
    pub fn find(&self, head: Head, args: &[TermId]) -> Option<TermId> {
        let node = Node {
            head,
            args: args.into(),
        };
        self.node_ids.get(&node).copied()
    }

    pub fn name(&mut self, s: &str) -> TermId {
        let nid = match self.name_ids.get(s) {
            Some(&n) => n,
            None => {
                let n = NameId(self.names.len() as u32);
                self.names.push(s.to_string());
                self.name_ids.insert(s.to_string(), n);
                n
            }
        };
        self.intern(Head::Name(nid), Vec::new())
    }

    /// Fresh abstraction variable, distinct from every existing term.
    pub fn fresh_var(&mut self) -> TermId {
        let v = self.next_var;
        self.next_var += 1;
        self.intern(Head::Var(v), Vec::new())
    }

    pub fn pub_key(&mut self, k: TermId) -> TermId {
        self.intern(Head::PubKey, vec![k])
    }

    pub fn sign(&mut self, m: TermId, k: TermId) -> TermId {
        self.intern(Head::Sign, vec![m, k])
    }

    pub fn blind(&mut self, m: TermId, r: TermId) -> TermId {
        self.intern(Head::Blind, vec![m, r])
    }

    pub fn pair(&mut self, m: TermId, n: TermId) -> TermId {
        self.intern(Head::Pair, vec![m, n])
    }

    pub fn enc(&mut self, m: TermId, k: TermId) -> TermId {
        self.intern(Head::Enc, vec![m, k])
    }

    pub fn zero(&mut self, th: TheoryId) -> TermId {
        self.intern(Head::Zero(th), Vec::new())
    }

    pub fn inv(&mut self, th: TheoryId, m: TermId) -> TermId {
        self.intern(Head::Inv(th), vec![m])
    }

    /// AC operator application.  Children that are applications of the same
    /// operator are flattened in, then the whole child list is sorted by id.
    /// Requires at least two arguments before flattening.
    pub fn ac(&mut self, th: TheoryId, args: Vec<TermId>) -> TermId {
        assert!(args.len() >= 2, "AC node needs at least two children");
        let mut flat = Vec::with_capacity(args.len());
        for a in args {
            if self.head(a) == Head::Ac(th) {
                flat.extend_from_slice(self.args(a));
            } else {
                flat.push(a);
            }
        }
        flat.sort_unstable();
        self.intern(Head::Ac(th), flat)
    }

    /// AC combination of any number of parts: empty becomes the theory unit,
    /// a single part is returned as is.
    pub fn ac_combine(&mut self, th: TheoryId, parts: Vec<TermId>) -> TermId {
        match parts.len() {
            0 => self.zero(th),
            1 => parts[0],
            _ => self.ac(th, parts),
        }
    }

    /// Equality modulo AC.  Canonicalization at interning time makes this id
    /// equality.
    pub fn ac_equal(&self, s: TermId, t: TermId) -> bool {
        s == t
    }

    /// A term is guarded when it is a name or constructor-headed, i.e. not
    /// headed by a theory symbol.  Abstraction variables are not guarded.
    pub fn is_guarded(&self, t: TermId) -> bool {
        matches!(self.head(t), Head::Name(_)) || self.head(t).is_constructor()
    }

    /// Theory of the head symbol, if any.
    pub fn head_theory(&self, t: TermId) -> Option<TheoryId> {
        self.head(t).theory()
    }

    /// A term is pure for a theory when it contains only that theory's
    /// symbols, names and variables.
    pub fn is_pure(&self, t: TermId, th: TheoryId) -> bool {
        match self.head(t) {
            Head::Name(_) | Head::Var(_) => true,
            h if h.theory() == Some(th) => {
                self.args(t).iter().all(|&a| self.is_pure(a, th))
            }
            _ => false,
        }
    }

    /// A term is alien to a theory when its head is a symbol outside that
    /// theory's signature; names and variables are alien to none.
    pub fn is_alien(&self, t: TermId, th: TheoryId) -> bool {
        match self.head(t) {
            Head::Name(_) | Head::Var(_) => false,
            h => h.theory() != Some(th),
        }
    }

    /// All distinct subterms of `t`, including `t` itself.
    pub fn subterms(&self, t: TermId) -> Vec<TermId> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        self.collect_subterms(t, &mut seen, &mut out);
        out
    }

    fn collect_subterms(
        &self,
        t: TermId,
        seen: &mut HashSet<TermId>,
        out: &mut Vec<TermId>,
    ) {
        if !seen.insert(t) {
            return;
        }
        out.push(t);
        for &a in &self.nodes[t.0 as usize].args {
            self.collect_subterms(a, seen, out);
        }
    }

    /// Extend `set` with all subterms of `t`, including `t`.
    pub fn subterms_into(&self, t: TermId, set: &mut HashSet<TermId>) {
        if !set.insert(t) {
            return;
        }
        for i in 0..self.nodes[t.0 as usize].args.len() {
            let a = self.nodes[t.0 as usize].args[i];
            self.subterms_into(a, set);
        }
    }

    /// Subterms headed in one theory that sit immediately under a subterm
    /// headed in a different theory.  Deduplicated, id order.
    pub fn cross_theory_subterms(&self, t: TermId) -> Vec<TermId> {
        let mut set = HashSet::new();
        self.cross_theory_into(t, &mut set);
        let mut out: Vec<TermId> = set.into_iter().collect();
        out.sort_unstable();
        out
    }

    /// Extend `set` with the cross-theory subterms of `t`.
    pub fn cross_theory_into(&self, t: TermId, set: &mut HashSet<TermId>) {
        let mut seen = HashSet::new();
        let mut stack = vec![t];
        while let Some(s) = stack.pop() {
            if !seen.insert(s) {
                continue;
            }
            let parent = self.head_theory(s);
            for &c in self.args(s) {
                if let (Some(i), Some(j)) = (self.head_theory(c), parent) {
                    if i != j {
                        set.insert(c);
                    }
                }
                stack.push(c);
            }
        }
    }

    /// Checks the bank-wide canonical-form invariant: every AC node has at
    /// least two children, none headed by the same operator, sorted by id.
    pub fn audit_canonical(&self) {
        for (i, node) in self.nodes.iter().enumerate() {
            if let Head::Ac(th) = node.head {
                assert!(
                    node.args.len() >= 2,
                    "AC node {i} has fewer than two children"
                );
                assert!(
                    node.args.windows(2).all(|w| w[0] <= w[1]),
                    "AC node {i} has unsorted children"
                );
                assert!(
                    node.args.iter().all(|&a| self.head(a) != Head::Ac(th)),
                    "AC node {i} has an unflattened child"
                );
            }
        }
    }
}

/// Saturated deduction universe for a sequent: the hypotheses and goal, all
/// their subterms, and every signature `sign(x, y)` over pairs of proper
/// subterms.  Left proof search only ever introduces members of this set.
///
/// The signature layer is quadratic in the subterm count, so it is kept
/// implicit: membership inspects the head instead of materializing every
/// pair.
#[derive(Debug)]
pub struct SaturatedSet {
    /// The subterm closure, sorted by id.
    pub members: Vec<TermId>,
    member_set: HashSet<TermId>,
    /// Proper subterms; `sign` over any pair of these is a member too.
    proper: HashSet<TermId>,
    /// Signature pairs not already counted by `members`.
    extra_signatures: usize,
}

impl SaturatedSet {
    pub fn contains(&self, bank: &TermBank, t: TermId) -> bool {
        if self.member_set.contains(&t) {
            return true;
        }
        matches!(bank.head(t), Head::Sign)
            && bank
                .args(t)
                .iter()
                .all(|a| self.proper.contains(a))
    }

    pub fn len(&self) -> usize {
        self.members.len() + self.extra_signatures
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Builds the saturated set for hypotheses `gamma` and goal `m`.
pub fn saturate(bank: &mut TermBank, gamma: &[TermId], m: TermId) -> SaturatedSet {
    let mut all = HashSet::new();
    for &g in gamma {
        bank.subterms_into(g, &mut all);
    }
    bank.subterms_into(m, &mut all);

    // Proper subterms: subterms strictly below some hypothesis or the goal.
    let mut proper = HashSet::new();
    for &g in gamma.iter().chain(std::iter::once(&m)) {
        for &a in bank.args(g).to_vec().iter() {
            bank.subterms_into(a, &mut proper);
        }
    }

    // Signatures already present in the closure are not counted twice.
    let overlap = all
        .iter()
        .filter(|&&t| {
            matches!(bank.head(t), Head::Sign)
                && bank.args(t).iter().all(|a| proper.contains(a))
        })
        .count();
    let extra_signatures = proper.len() * proper.len() - overlap;

    let mut members: Vec<TermId> = all.iter().copied().collect();
    members.sort_unstable();
    SaturatedSet {
        members,
        member_set: all,
        proper,
        extra_signatures,
    }
}

/// Linear context over one theory's signature: a term skeleton whose leaves
/// are numbered holes, names, or the theory unit.  Hole indices are 1-based
/// and may repeat; reading the skeleton left to right yields the hole order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    pub theory: TheoryId,
    pub skeleton: Skeleton,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Skeleton {
    Hole(usize),
    /// A name leaf.  Structurally allowed, but a context used as a
    /// deducibility witness must be hole-and-symbol only.
    Leaf(TermId),
    Zero,
    Inv(Box<Skeleton>),
    /// AC operator application, n >= 2 children.
    Op(Vec<Skeleton>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContextError {
    #[error("hole index 0 is invalid; holes are numbered from 1")]
    ZeroIndex,
    #[error("hole indices do not cover 1..={max} (index {missing} missing)")]
    Gap { max: usize, missing: usize },
    #[error("operator node with fewer than two children")]
    BadOpArity,
    #[error("expected {expected} fill terms, got {got}")]
    FillCount { expected: usize, got: usize },
}

impl Context {
    /// Number of distinct holes.  Indices must cover 1..=k with no gaps.
    pub fn hole_count(&self) -> Result<usize, ContextError> {
        let mut seen = Vec::new();
        self.skeleton.visit_holes(&mut seen)?;
        let max = seen.iter().copied().max().unwrap_or(0);
        for i in 1..=max {
            if !seen.contains(&i) {
                return Err(ContextError::Gap { max, missing: i });
            }
        }
        Ok(max)
    }

    /// True when every leaf is a hole or theory symbol (no names).
    pub fn is_symbol_pure(&self) -> bool {
        self.skeleton.is_symbol_pure()
    }
}

impl Skeleton {
    fn visit_holes(&self, seen: &mut Vec<usize>) -> Result<(), ContextError> {
        match self {
            Skeleton::Hole(0) => Err(ContextError::ZeroIndex),
            Skeleton::Hole(i) => {
                if !seen.contains(i) {
                    seen.push(*i);
                }
                Ok(())
            }
            Skeleton::Leaf(_) | Skeleton::Zero => Ok(()),
            Skeleton::Inv(s) => s.visit_holes(seen),
            Skeleton::Op(parts) => {
                if parts.len() < 2 {
                    return Err(ContextError::BadOpArity);
                }
                for p in parts {
                    p.visit_holes(seen)?;
                }
                Ok(())
            }
        }
    }

    fn is_symbol_pure(&self) -> bool {
        match self {
            Skeleton::Leaf(_) => false,
            Skeleton::Hole(_) | Skeleton::Zero => true,
            Skeleton::Inv(s) => s.is_symbol_pure(),
            Skeleton::Op(parts) => parts.iter().all(|p| p.is_symbol_pure()),
        }
    }
}

/// Instantiates a context: hole `[i]` is replaced by `fills[i - 1]`.  The
/// result is interned, so AC spines collapse to canonical form; it is not
/// otherwise normalized.
pub fn apply_context(
    bank: &mut TermBank,
    c: &Context,
    fills: &[TermId],
) -> Result<TermId, ContextError> {
    let k = c.hole_count()?;
    if fills.len() != k {
        return Err(ContextError::FillCount {
            expected: k,
            got: fills.len(),
        });
    }
    Ok(apply_skeleton(bank, c.theory, &c.skeleton, fills))
}

fn apply_skeleton(
    bank: &mut TermBank,
    th: TheoryId,
    s: &Skeleton,
    fills: &[TermId],
) -> TermId {
    match s {
        Skeleton::Hole(i) => fills[*i - 1],
        Skeleton::Leaf(t) => *t,
        Skeleton::Zero => bank.zero(th),
        Skeleton::Inv(inner) => {
            let x = apply_skeleton(bank, th, inner, fills);
            bank.inv(th, x)
        }
        Skeleton::Op(parts) => {
            let xs: Vec<TermId> = parts
                .iter()
                .map(|p| apply_skeleton(bank, th, p, fills))
                .collect();
            bank.ac(th, xs)
        }
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}
