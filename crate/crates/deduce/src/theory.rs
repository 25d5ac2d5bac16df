//! Equational theories and the operations tied to them: the theory catalog,
//! normalization modulo each theory's convergent rewrite system, and variable
//! abstraction, which replaces alien subterms by variables indexed by their
//! normal form.
//!
//! Supported theory kinds, each with a single AC operator:
//! - `empty`: no equational symbols at all;
//! - `ac`: the operator alone, no unit;
//! - `xor`: unit `0`, with `x + x -> 0` and `x + 0 -> x`;
//! - `ag`: Abelian groups, adding an inverse with `x + I(x) -> 0`,
//!   `I(x + y) -> I(x) + I(y)`, `I(I(x)) -> x`, `I(0) -> 0`.

use crate::term::{Head, TermBank, TermId, TheoryId};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoryKind {
    Empty,
    AcOnly,
    Xor,
    AbelianGroup,
}

impl TheoryKind {
    pub fn has_op(self) -> bool {
        !matches!(self, TheoryKind::Empty)
    }

    pub fn has_zero(self) -> bool {
        matches!(self, TheoryKind::Xor | TheoryKind::AbelianGroup)
    }

    pub fn has_inv(self) -> bool {
        matches!(self, TheoryKind::AbelianGroup)
    }

    pub fn label(self) -> &'static str {
        match self {
            TheoryKind::Empty => "empty",
            TheoryKind::AcOnly => "ac",
            TheoryKind::Xor => "xor",
            TheoryKind::AbelianGroup => "ag",
        }
    }
}

/// One declared theory: a kind plus the concrete symbol spellings used in
/// problem files and printed output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoryDef {
    pub name: String,
    pub kind: TheoryKind,
    /// AC operator spelling; a single punctuation character is used infix,
    /// an identifier is used prefix.
    pub op: Option<String>,
    pub zero: Option<String>,
    pub inv: Option<String>,
}

impl TheoryDef {
    pub fn new(name: &str, kind: TheoryKind) -> Self {
        let op = kind.has_op().then(|| "+".to_string());
        let zero = kind.has_zero().then(|| "0".to_string());
        let inv = kind.has_inv().then(|| "I".to_string());
        TheoryDef {
            name: name.to_string(),
            kind,
            op,
            zero,
            inv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("duplicate theory name `{0}`")]
    DuplicateTheory(String),
    #[error("symbol `{0}` is declared by more than one theory")]
    DuplicateSymbol(String),
    #[error("symbol `{0}` collides with a built-in constructor")]
    ReservedSymbol(String),
    #[error("theory `{name}` ({kind}) must not declare `{sym}`")]
    ExtraSymbol {
        name: String,
        kind: &'static str,
        sym: String,
    },
}

const CONSTRUCTORS: [&str; 5] = ["pair", "enc", "sign", "blind", "pub"];

/// The declared theories of one problem, with pairwise disjoint signatures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    defs: Vec<TheoryDef>,
}

impl Catalog {
    pub fn new(defs: Vec<TheoryDef>) -> Result<Self, CatalogError> {
        let mut names: Vec<&str> = Vec::new();
        let mut syms: Vec<&str> = Vec::new();
        for d in &defs {
            if names.contains(&d.name.as_str()) {
                return Err(CatalogError::DuplicateTheory(d.name.clone()));
            }
            names.push(&d.name);
            for (present, sym) in [
                (d.kind.has_op(), &d.op),
                (d.kind.has_zero(), &d.zero),
                (d.kind.has_inv(), &d.inv),
            ] {
                match (present, sym) {
                    (false, Some(s)) => {
                        return Err(CatalogError::ExtraSymbol {
                            name: d.name.clone(),
                            kind: d.kind.label(),
                            sym: s.clone(),
                        })
                    }
                    (true, Some(s)) => {
                        if CONSTRUCTORS.contains(&s.as_str()) {
                            return Err(CatalogError::ReservedSymbol(s.clone()));
                        }
                        if syms.contains(&s.as_str()) {
                            return Err(CatalogError::DuplicateSymbol(s.clone()));
                        }
                        syms.push(s);
                    }
                    _ => {}
                }
            }
        }
        Ok(Catalog { defs })
    }

    /// Catalog with a single symbol-free theory; used when a problem declares
    /// no theories at all.
    pub fn empty() -> Self {
        Catalog {
            defs: vec![TheoryDef::new("empty", TheoryKind::Empty)],
        }
    }

    pub fn defs(&self) -> &[TheoryDef] {
        &self.defs
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = TheoryId> {
        (0..self.defs.len() as u32).map(TheoryId)
    }

    pub fn def(&self, th: TheoryId) -> &TheoryDef {
        &self.defs[th.0 as usize]
    }

    pub fn kind(&self, th: TheoryId) -> TheoryKind {
        self.defs[th.0 as usize].kind
    }

    pub fn by_name(&self, name: &str) -> Option<TheoryId> {
        self.defs
            .iter()
            .position(|d| d.name == name)
            .map(|i| TheoryId(i as u32))
    }
}

/// Rewrites `t` to its normal form.  Memoized in the bank; congruent and
/// idempotent by construction.
pub fn normalize(bank: &mut TermBank, cat: &Catalog, t: TermId) -> TermId {
    if let Some(&n) = bank.norm_memo.get(&t) {
        return n;
    }
    let nf = match bank.head(t) {
        Head::Name(_) | Head::Var(_) | Head::Zero(_) => t,
        h @ (Head::PubKey | Head::Sign | Head::Blind | Head::Pair | Head::Enc) => {
            let args: Vec<TermId> = bank.args(t).to_vec();
            let nargs: Vec<TermId> =
                args.iter().map(|&a| normalize(bank, cat, a)).collect();
            rebuild_constructor(bank, h, &nargs)
        }
        Head::Inv(th) => {
            let a = bank.args(t)[0];
            let na = normalize(bank, cat, a);
            debug_assert_eq!(cat.kind(th), TheoryKind::AbelianGroup);
            ag_normal(bank, th, &[(na, -1)])
        }
        Head::Ac(th) => {
            let args: Vec<TermId> = bank.args(t).to_vec();
            let nargs: Vec<TermId> =
                args.iter().map(|&a| normalize(bank, cat, a)).collect();
            match cat.kind(th) {
                TheoryKind::AcOnly => bank.ac(th, nargs),
                TheoryKind::Xor => xor_normal(bank, th, &nargs),
                TheoryKind::AbelianGroup => {
                    let signed: Vec<(TermId, i64)> =
                        nargs.iter().map(|&a| (a, 1)).collect();
                    ag_normal(bank, th, &signed)
                }
                TheoryKind::Empty => unreachable!("empty theory has no operator"),
            }
        }
    };
    bank.norm_memo.insert(t, nf);
    bank.norm_memo.insert(nf, nf);
    nf
}

fn rebuild_constructor(bank: &mut TermBank, head: Head, args: &[TermId]) -> TermId {
    match head {
        Head::PubKey => bank.pub_key(args[0]),
        Head::Sign => bank.sign(args[0], args[1]),
        Head::Blind => bank.blind(args[0], args[1]),
        Head::Pair => bank.pair(args[0], args[1]),
        Head::Enc => bank.enc(args[0], args[1]),
        _ => unreachable!(),
    }
}

/// Sum of normalized children under the mod-2 multiset law: atoms occurring
/// an even number of times vanish, the empty sum is the unit.
fn xor_normal(bank: &mut TermBank, th: TheoryId, children: &[TermId]) -> TermId {
    let mut count: BTreeMap<TermId, u32> = BTreeMap::new();
    for &c in children {
        match bank.head(c) {
            Head::Ac(t) if t == th => {
                for &a in bank.args(c).to_vec().iter() {
                    *count.entry(a).or_insert(0) += 1;
                }
            }
            Head::Zero(t) if t == th => {}
            _ => *count.entry(c).or_insert(0) += 1,
        }
    }
    let parts: Vec<TermId> = count
        .into_iter()
        .filter(|&(_, n)| n % 2 == 1)
        .map(|(a, _)| a)
        .collect();
    bank.ac_combine(th, parts)
}

/// Sum of signed normalized terms under the group laws: per-atom integer
/// exponents, negative exponents rendered through the inverse on atoms.
fn ag_normal(bank: &mut TermBank, th: TheoryId, signed: &[(TermId, i64)]) -> TermId {
    let mut exp: BTreeMap<TermId, i64> = BTreeMap::new();
    for &(c, s) in signed {
        collect_exponents(bank, th, c, s, &mut exp);
    }
    let mut parts: Vec<TermId> = Vec::new();
    for (atom, n) in exp {
        if n > 0 {
            for _ in 0..n {
                parts.push(atom);
            }
        } else if n < 0 {
            let ia = bank.inv(th, atom);
            for _ in 0..(-n) {
                parts.push(ia);
            }
        }
    }
    bank.ac_combine(th, parts)
}

/// Per-atom signed exponents of a pure group term.
pub(crate) fn exponent_map(
    bank: &TermBank,
    th: TheoryId,
    t: TermId,
) -> BTreeMap<TermId, i64> {
    let mut exp = BTreeMap::new();
    collect_exponents(bank, th, t, 1, &mut exp);
    exp.retain(|_, n| *n != 0);
    exp
}

fn collect_exponents(
    bank: &TermBank,
    th: TheoryId,
    t: TermId,
    sign: i64,
    exp: &mut BTreeMap<TermId, i64>,
) {
    match bank.head(t) {
        Head::Zero(u) if u == th => {}
        Head::Inv(u) if u == th => {
            collect_exponents(bank, th, bank.args(t)[0], -sign, exp)
        }
        Head::Ac(u) if u == th => {
            for &c in bank.args(t) {
                collect_exponents(bank, th, c, sign, exp);
            }
        }
        _ => *exp.entry(t).or_insert(0) += sign,
    }
}

pub fn is_normal(bank: &mut TermBank, cat: &Catalog, t: TermId) -> bool {
    normalize(bank, cat, t) == t
}

/// Variable abstraction for one theory: names and that theory's symbols are
/// kept, every alien subterm is replaced by the variable of its normal-form
/// class.  Two aliens map to the same variable exactly when they are equal
/// modulo the whole rewrite system.
pub fn abstract_term(
    bank: &mut TermBank,
    cat: &Catalog,
    t: TermId,
    th: TheoryId,
) -> TermId {
    match bank.head(t) {
        Head::Name(_) | Head::Var(_) => t,
        Head::Zero(u) if u == th => t,
        Head::Inv(u) if u == th => {
            let arg = bank.args(t)[0];
            let a = abstract_term(bank, cat, arg, th);
            bank.inv(th, a)
        }
        Head::Ac(u) if u == th => {
            let args: Vec<TermId> = bank.args(t).to_vec();
            let abs: Vec<TermId> = args
                .iter()
                .map(|&a| abstract_term(bank, cat, a, th))
                .collect();
            bank.ac(th, abs)
        }
        _ => class_var(bank, cat, t, th),
    }
}

/// The abstraction variable for a term's equivalence class, shared across
/// theories and calls through the bank-resident class map.  Rewriting can
/// strip an alien head entirely, say a doubled group inverse around a name,
/// so the normal form is re-dispatched before a variable is coined.
fn class_var(bank: &mut TermBank, cat: &Catalog, t: TermId, th: TheoryId) -> TermId {
    let nf = normalize(bank, cat, t);
    if nf != t && !bank.is_alien(nf, th) {
        return abstract_term(bank, cat, nf, th);
    }
    if let Some(&v) = bank.var_classes.get(&nf) {
        return v;
    }
    let v = bank.fresh_var();
    bank.var_classes.insert(nf, v);
    v
}

/// Renders a term using the catalog's symbol spellings.  Single-character
/// operators print infix with the children parenthesized as needed; named
/// operators print prefix.  The output re-parses to the same term.
pub fn term_string(bank: &TermBank, cat: &Catalog, t: TermId) -> String {
    let mut s = String::new();
    write_term(bank, cat, t, &mut s);
    s
}

pub(crate) fn op_is_infix(op: &str) -> bool {
    op.len() == 1 && !op.chars().next().unwrap().is_alphanumeric() && op != "_"
}

fn write_term(bank: &TermBank, cat: &Catalog, t: TermId, out: &mut String) {
    match bank.head(t) {
        Head::Name(n) => out.push_str(bank.name_str(n)),
        Head::Var(v) => {
            out.push_str("?v");
            out.push_str(&v.to_string());
        }
        Head::PubKey => write_call(bank, cat, "pub", bank.args(t), out),
        Head::Sign => write_call(bank, cat, "sign", bank.args(t), out),
        Head::Blind => write_call(bank, cat, "blind", bank.args(t), out),
        Head::Pair => write_call(bank, cat, "pair", bank.args(t), out),
        Head::Enc => write_call(bank, cat, "enc", bank.args(t), out),
        Head::Zero(th) => out.push_str(cat.def(th).zero.as_deref().unwrap_or("0")),
        Head::Inv(th) => {
            write_call(
                bank,
                cat,
                cat.def(th).inv.as_deref().unwrap_or("I"),
                bank.args(t),
                out,
            );
        }
        Head::Ac(th) => {
            let op = cat.def(th).op.as_deref().unwrap_or("+");
            if op_is_infix(op) {
                for (i, &a) in bank.args(t).iter().enumerate() {
                    if i > 0 {
                        out.push_str(op);
                    }
                    let nested = matches!(bank.head(a), Head::Ac(_));
                    if nested {
                        out.push('(');
                    }
                    write_term(bank, cat, a, out);
                    if nested {
                        out.push(')');
                    }
                }
            } else {
                write_call(bank, cat, op, bank.args(t), out);
            }
        }
    }
}

fn write_call(
    bank: &TermBank,
    cat: &Catalog,
    f: &str,
    args: &[TermId],
    out: &mut String,
) {
    out.push_str(f);
    out.push('(');
    for (i, &a) in args.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write_term(bank, cat, a, out);
    }
    out.push(')');
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor_cat() -> Catalog {
        Catalog::new(vec![TheoryDef::new("x", TheoryKind::Xor)]).unwrap()
    }

    fn ag_cat() -> Catalog {
        Catalog::new(vec![TheoryDef::new("g", TheoryKind::AbelianGroup)]).unwrap()
    }

    fn two_cat() -> Catalog {
        let mut ag = TheoryDef::new("g", TheoryKind::AbelianGroup);
        ag.op = Some("*".to_string());
        ag.zero = Some("e".to_string());
        Catalog::new(vec![TheoryDef::new("x", TheoryKind::Xor), ag]).unwrap()
    }

    const TX: TheoryId = TheoryId(0);
    const TG: TheoryId = TheoryId(0);

    #[test]
    fn catalog_rejects_symbol_clashes() {
        let mut a = TheoryDef::new("a", TheoryKind::Xor);
        let mut b = TheoryDef::new("b", TheoryKind::AcOnly);
        b.op = Some("+".to_string());
        assert_eq!(
            Catalog::new(vec![a.clone(), b]),
            Err(CatalogError::DuplicateSymbol("+".into()))
        );
        a.zero = Some("pair".to_string());
        assert!(matches!(
            Catalog::new(vec![a]),
            Err(CatalogError::ReservedSymbol(_))
        ));
        let mut c = TheoryDef::new("c", TheoryKind::AcOnly);
        c.inv = Some("I".to_string());
        assert!(matches!(
            Catalog::new(vec![c]),
            Err(CatalogError::ExtraSymbol { .. })
        ));
        assert!(matches!(
            Catalog::new(vec![
                TheoryDef::new("d", TheoryKind::Empty),
                TheoryDef::new("d", TheoryKind::Empty),
            ]),
            Err(CatalogError::DuplicateTheory(_))
        ));
    }

    #[test]
    fn xor_cancels_pairs_of_occurrences() {
        let cat = xor_cat();
        let mut b = TermBank::new();
        let a = b.name("a");
        let c = b.name("c");
        let aa = b.ac(TX, vec![a, a]);
        assert_eq!(normalize(&mut b, &cat, aa), b.zero(TX));
        let aac = b.ac(TX, vec![a, a, c]);
        assert_eq!(normalize(&mut b, &cat, aac), c);
        let aaa = b.ac(TX, vec![a, a, a]);
        assert_eq!(normalize(&mut b, &cat, aaa), a);
        let z = b.zero(TX);
        let az = b.ac(TX, vec![a, z]);
        assert_eq!(normalize(&mut b, &cat, az), a);
    }

    #[test]
    fn xor_normalizes_under_constructors() {
        let cat = xor_cat();
        let mut b = TermBank::new();
        let a = b.name("a");
        let k = b.name("k");
        let aa = b.ac(TX, vec![a, a]);
        let e = b.enc(aa, k);
        let z = b.zero(TX);
        let ez = b.enc(z, k);
        assert_eq!(normalize(&mut b, &cat, e), ez);
    }

    #[test]
    fn xor_cancellation_across_nested_sums() {
        let cat = xor_cat();
        let mut b = TermBank::new();
        let a = b.name("a");
        let c = b.name("c");
        let d = b.name("d");
        // (a + c) + (c + d) -> a + d; flattening alone would give the wrong
        // multiset, normalization must re-cancel.
        let l = b.ac(TX, vec![a, c]);
        let r = b.ac(TX, vec![c, d]);
        let both = b.ac(TX, vec![l, r]);
        let want = b.ac(TX, vec![a, d]);
        assert_eq!(normalize(&mut b, &cat, both), want);
    }

    #[test]
    fn ag_inverse_laws() {
        let cat = ag_cat();
        let mut b = TermBank::new();
        let a = b.name("a");
        let c = b.name("c");
        let ia = b.inv(TG, a);
        let aia = b.ac(TG, vec![a, ia]);
        assert_eq!(normalize(&mut b, &cat, aia), b.zero(TG));
        let iia = b.inv(TG, ia);
        assert_eq!(normalize(&mut b, &cat, iia), a);
        let z = b.zero(TG);
        let iz = b.inv(TG, z);
        assert_eq!(normalize(&mut b, &cat, iz), z);
        // I(a + c) -> I(a) + I(c), atoms in id order.
        let s = b.ac(TG, vec![a, c]);
        let is = b.inv(TG, s);
        let ic = b.inv(TG, c);
        let want = b.ac(TG, vec![ia, ic]);
        assert_eq!(normalize(&mut b, &cat, is), want);
    }

    #[test]
    fn ag_exponents_accumulate() {
        let cat = ag_cat();
        let mut b = TermBank::new();
        let a = b.name("a");
        let c = b.name("c");
        // a + a + c + I(c) + I(c) -> a + a + I(c).
        let ic = b.inv(TG, c);
        let t = b.ac(TG, vec![a, a, c, ic, ic]);
        let want = b.ac(TG, vec![a, a, ic]);
        assert_eq!(normalize(&mut b, &cat, t), want);
        // Double inverses inside a sum cancel fully.
        let ia = b.inv(TG, a);
        let iia = b.inv(TG, ia);
        let u = b.ac(TG, vec![iia, ia]);
        assert_eq!(normalize(&mut b, &cat, u), b.zero(TG));
    }

    #[test]
    fn normalize_is_idempotent_and_memoized() {
        let cat = two_cat();
        let mut b = TermBank::new();
        let a = b.name("a");
        let c = b.name("c");
        let tg = TheoryId(1);
        let prod = b.ac(tg, vec![a, c, c]);
        let ip = b.inv(tg, prod);
        let sum = b.ac(TheoryId(0), vec![a, ip, a]);
        let n1 = normalize(&mut b, &cat, sum);
        let n2 = normalize(&mut b, &cat, n1);
        assert_eq!(n1, n2);
        assert!(is_normal(&mut b, &cat, n1));
    }

    #[test]
    fn alien_subterms_normalize_in_place() {
        // enc(a + a, k) under the sum: the alien child reduces, then the sum
        // collapses the duplicate.
        let cat = xor_cat();
        let mut b = TermBank::new();
        let a = b.name("a");
        let k = b.name("k");
        let aa = b.ac(TX, vec![a, a]);
        let e1 = b.enc(aa, k);
        let z = b.zero(TX);
        let e2 = b.enc(z, k);
        let s = b.ac(TX, vec![e1, e2]);
        assert_eq!(normalize(&mut b, &cat, s), z);
    }

    #[test]
    fn abstraction_keeps_own_symbols_and_names() {
        let cat = xor_cat();
        let mut b = TermBank::new();
        let a = b.name("a");
        let k = b.name("k");
        let e = b.enc(a, k);
        let t = b.ac(TX, vec![a, e]);
        let abs = abstract_term(&mut b, &cat, t, TX);
        let args = b.args(abs).to_vec();
        assert_eq!(args.len(), 2);
        assert!(args.contains(&a));
        let other = args.into_iter().find(|&x| x != a).unwrap();
        assert!(matches!(b.head(other), Head::Var(_)));
    }

    #[test]
    fn abstraction_identifies_equal_aliens() {
        let cat = two_cat();
        let mut b = TermBank::new();
        let tx = TheoryId(0);
        let tg = TheoryId(1);
        let a = b.name("a");
        let c = b.name("c");
        // c * I(I(a)) and a * c are the same class; their variables agree.
        let iia0 = b.inv(tg, a);
        let iia = b.inv(tg, iia0);
        let p1 = b.ac(tg, vec![c, iia]);
        let p2 = b.ac(tg, vec![a, c]);
        let s1 = b.ac(tx, vec![a, p1]);
        let s2 = b.ac(tx, vec![a, p2]);
        assert_eq!(
            abstract_term(&mut b, &cat, s1, tx),
            abstract_term(&mut b, &cat, s2, tx)
        );
        // Distinct classes get distinct variables.
        let p3 = b.ac(tg, vec![c, c]);
        let s3 = b.ac(tx, vec![a, p3]);
        assert_ne!(
            abstract_term(&mut b, &cat, s2, tx),
            abstract_term(&mut b, &cat, s3, tx)
        );
    }

    #[test]
    fn abstraction_commutes_with_normalization() {
        // On terms whose aliens are already normal, normalizing then
        // abstracting equals abstracting then normalizing.
        let cat = two_cat();
        let mut b = TermBank::new();
        let tx = TheoryId(0);
        let tg = TheoryId(1);
        let a = b.name("a");
        let c = b.name("c");
        let prod = b.ac(tg, vec![a, c]);
        let t = b.ac(tx, vec![a, prod, a, prod]);
        let n = normalize(&mut b, &cat, t);
        let abs_n = abstract_term(&mut b, &cat, n, tx);
        let abs = abstract_term(&mut b, &cat, t, tx);
        let n_abs = normalize(&mut b, &cat, abs);
        assert_eq!(abs_n, n_abs);
    }

    #[test]
    fn rendering_round_trips_symbol_choices() {
        let cat = two_cat();
        let mut b = TermBank::new();
        let tx = TheoryId(0);
        let tg = TheoryId(1);
        let a = b.name("a");
        let c = b.name("c");
        let prod = b.ac(tg, vec![a, c]);
        let sum = b.ac(tx, vec![a, prod]);
        assert_eq!(term_string(&b, &cat, sum), "a+(a*c)");
        let z = b.zero(tg);
        let iz = b.inv(tg, a);
        let p = b.pair(z, iz);
        assert_eq!(term_string(&b, &cat, p), "pair(e,I(a))");
    }
}
