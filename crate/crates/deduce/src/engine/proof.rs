//! Proof trees: every node records its full conclusion sequent, its rule, a
//! witness where the rule needs one (the principal hypothesis for left
//! rules, the introduced subterm for the subterm rules, a deduction recipe
//! for leaves), and its premises in rule order.  Text rendering is for
//! people; the JSON form round-trips through the parser so an emitted proof
//! can be re-read and re-checked from scratch.

use crate::engine::Sequent;
use crate::problem::{parse_context_str, parse_term_str};
use crate::solve::Recipe;
use crate::term::{Context, Skeleton, TermBank, TermId, TheoryId};
use crate::theory::{op_is_infix, term_string, Catalog};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// Elementary deduction in one theory, witnessed by a recipe.
    Id(TheoryId),
    PairLeft,
    PairRight,
    EncLeft,
    EncRight,
    SignLeft,
    SignRight,
    BlindLeft1,
    BlindLeft2,
    BlindRight,
    /// Introduces a guarded subterm of the sequent as a hypothesis.
    GuardedSub,
    /// Introduces a cross-theory subterm of the sequent as a hypothesis.
    CrossSub,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Id(_) => "id",
            Rule::PairLeft => "p_l",
            Rule::PairRight => "p_r",
            Rule::EncLeft => "e_l",
            Rule::EncRight => "e_r",
            Rule::SignLeft => "sign_l",
            Rule::SignRight => "sign_r",
            Rule::BlindLeft1 => "blind_l1",
            Rule::BlindLeft2 => "blind_l2",
            Rule::BlindRight => "blind_r",
            Rule::GuardedSub => "gs",
            Rule::CrossSub => "cs",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    None,
    Term(TermId),
    Recipe(Recipe),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub rule: Rule,
    pub conclusion: Sequent,
    pub witness: Witness,
    pub premises: Vec<Proof>,
}

impl Proof {
    pub fn node_count(&self) -> usize {
        1 + self.premises.iter().map(Proof::node_count).sum::<usize>()
    }
}

/// Renders a context skeleton in the theory's spelling, holes as `[k]`.
pub fn context_string(bank: &TermBank, cat: &Catalog, c: &Context) -> String {
    let mut out = String::new();
    write_skeleton(bank, cat, c.theory, &c.skeleton, &mut out);
    out
}

fn write_skeleton(
    bank: &TermBank,
    cat: &Catalog,
    th: TheoryId,
    s: &Skeleton,
    out: &mut String,
) {
    let def = cat.def(th);
    match s {
        Skeleton::Hole(i) => {
            out.push('[');
            out.push_str(&i.to_string());
            out.push(']');
        }
        Skeleton::Leaf(t) => out.push_str(&term_string(bank, cat, *t)),
        Skeleton::Zero => out.push_str(def.zero.as_deref().unwrap_or("0")),
        Skeleton::Inv(inner) => {
            out.push_str(def.inv.as_deref().unwrap_or("I"));
            out.push('(');
            write_skeleton(bank, cat, th, inner, out);
            out.push(')');
        }
        Skeleton::Op(parts) => {
            let op = def.op.as_deref().unwrap_or("+");
            if op_is_infix(op) {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        out.push_str(op);
                    }
                    let nested = matches!(p, Skeleton::Op(_));
                    if nested {
                        out.push('(');
                    }
                    write_skeleton(bank, cat, th, p, out);
                    if nested {
                        out.push(')');
                    }
                }
            } else {
                out.push_str(op);
                out.push('(');
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write_skeleton(bank, cat, th, p, out);
                }
                out.push(')');
            }
        }
    }
}

pub fn sequent_string(bank: &TermBank, cat: &Catalog, s: &Sequent) -> String {
    let mut out = String::new();
    for (i, &g) in s.gamma.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&term_string(bank, cat, g));
    }
    if !s.gamma.is_empty() {
        out.push(' ');
    }
    out.push_str("|- ");
    out.push_str(&term_string(bank, cat, s.goal));
    out
}

/// Indented text rendering, conclusion first, premises below.
pub fn render_proof(bank: &TermBank, cat: &Catalog, p: &Proof) -> String {
    let mut out = String::new();
    render_node(bank, cat, p, 0, &mut out);
    out
}

fn render_node(
    bank: &TermBank,
    cat: &Catalog,
    p: &Proof,
    depth: usize,
    out: &mut String,
) {
    for _ in 0..depth {
        out.push_str("  ");
    }
    match (&p.rule, &p.witness) {
        (Rule::Id(th), Witness::Recipe(r)) => {
            out.push_str("id");
            if cat.len() > 1 {
                out.push('_');
                out.push_str(&cat.def(*th).name);
            }
            out.push(' ');
            out.push_str(&context_string(bank, cat, &r.context));
            out.push_str(" over {");
            for (i, &a) in r.hole_args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&term_string(bank, cat, a));
            }
            out.push('}');
        }
        (rule, Witness::Term(t)) => {
            out.push_str(rule.name());
            out.push(' ');
            out.push_str(&term_string(bank, cat, *t));
        }
        (rule, _) => out.push_str(rule.name()),
    }
    out.push_str(" : ");
    out.push_str(&sequent_string(bank, cat, &p.conclusion));
    out.push('\n');
    for q in &p.premises {
        render_node(bank, cat, q, depth + 1, out);
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ProofDoc {
    rule: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    theory: Option<String>,
    gamma: Vec<String>,
    goal: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    recipe: Option<RecipeDoc>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    premises: Vec<ProofDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RecipeDoc {
    context: String,
    args: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ProofDecodeError {
    #[error("malformed proof JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("unknown theory `{0}`")]
    UnknownTheory(String),
    #[error("rule `{rule}` needs field `{field}`")]
    MissingField { rule: &'static str, field: &'static str },
    #[error("bad term `{term}`: {msg}")]
    Term { term: String, msg: String },
    #[error("bad context `{ctx}`: {msg}")]
    Context { ctx: String, msg: String },
}

/// Serializes a proof; terms and contexts are rendered in the problem-file
/// grammar so the document re-parses against the same theory declarations.
pub fn proof_to_json(bank: &TermBank, cat: &Catalog, p: &Proof) -> String {
    let doc = encode(bank, cat, p);
    serde_json::to_string_pretty(&doc).expect("proof serialization cannot fail")
}

fn encode(bank: &TermBank, cat: &Catalog, p: &Proof) -> ProofDoc {
    let (theory, witness, recipe) = match (&p.rule, &p.witness) {
        (Rule::Id(th), Witness::Recipe(r)) => (
            Some(cat.def(*th).name.clone()),
            None,
            Some(RecipeDoc {
                context: context_string(bank, cat, &r.context),
                args: r
                    .hole_args
                    .iter()
                    .map(|&a| term_string(bank, cat, a))
                    .collect(),
            }),
        ),
        (_, Witness::Term(t)) => (None, Some(term_string(bank, cat, *t)), None),
        _ => (None, None, None),
    };
    ProofDoc {
        rule: p.rule.name().to_string(),
        theory,
        gamma: p
            .conclusion
            .gamma
            .iter()
            .map(|&g| term_string(bank, cat, g))
            .collect(),
        goal: term_string(bank, cat, p.conclusion.goal),
        witness,
        recipe,
        premises: p.premises.iter().map(|q| encode(bank, cat, q)).collect(),
    }
}

/// Parses a proof document back into a tree over `bank`, resolving terms
/// through the problem grammar.  Structure only; validity is the checker's
/// business.
pub fn proof_from_json(
    bank: &mut TermBank,
    cat: &Catalog,
    src: &str,
) -> Result<Proof, ProofDecodeError> {
    let doc: ProofDoc = serde_json::from_str(src)?;
    decode(bank, cat, &doc)
}

fn decode(
    bank: &mut TermBank,
    cat: &Catalog,
    doc: &ProofDoc,
) -> Result<Proof, ProofDecodeError> {
    let term = |bank: &mut TermBank, s: &String| {
        parse_term_str(bank, cat, s).map_err(|e| ProofDecodeError::Term {
            term: s.clone(),
            msg: e.to_string(),
        })
    };
    let mut gamma = Vec::with_capacity(doc.gamma.len());
    for g in &doc.gamma {
        gamma.push(term(bank, g)?);
    }
    let goal = term(bank, &doc.goal)?;
    let conclusion = Sequent::new(gamma, goal);

    let rule = match doc.rule.as_str() {
        "id" => {
            let name = doc.theory.as_deref().ok_or(
                ProofDecodeError::MissingField {
                    rule: "id",
                    field: "theory",
                },
            )?;
            let th = cat
                .by_name(name)
                .ok_or_else(|| ProofDecodeError::UnknownTheory(name.into()))?;
            Rule::Id(th)
        }
        "p_l" => Rule::PairLeft,
        "p_r" => Rule::PairRight,
        "e_l" => Rule::EncLeft,
        "e_r" => Rule::EncRight,
        "sign_l" => Rule::SignLeft,
        "sign_r" => Rule::SignRight,
        "blind_l1" => Rule::BlindLeft1,
        "blind_l2" => Rule::BlindLeft2,
        "blind_r" => Rule::BlindRight,
        "gs" => Rule::GuardedSub,
        "cs" => Rule::CrossSub,
        other => return Err(ProofDecodeError::UnknownRule(other.into())),
    };

    let witness = match rule {
        Rule::Id(th) => {
            let rd = doc.recipe.as_ref().ok_or(ProofDecodeError::MissingField {
                rule: "id",
                field: "recipe",
            })?;
            let context = parse_context_str(bank, cat, th, &rd.context)
                .map_err(|e| ProofDecodeError::Context {
                    ctx: rd.context.clone(),
                    msg: e.to_string(),
                })?;
            let mut hole_args = Vec::with_capacity(rd.args.len());
            for a in &rd.args {
                hole_args.push(term(bank, a)?);
            }
            Witness::Recipe(Recipe {
                theory: th,
                context,
                hole_args,
            })
        }
        Rule::PairLeft
        | Rule::EncLeft
        | Rule::SignLeft
        | Rule::BlindLeft1
        | Rule::BlindLeft2
        | Rule::GuardedSub
        | Rule::CrossSub => {
            let w = doc.witness.as_ref().ok_or(ProofDecodeError::MissingField {
                rule: "left rule",
                field: "witness",
            })?;
            Witness::Term(term(bank, w)?)
        }
        _ => Witness::None,
    };

    let mut premises = Vec::with_capacity(doc.premises.len());
    for q in &doc.premises {
        premises.push(decode(bank, cat, q)?);
    }
    Ok(Proof {
        rule,
        conclusion,
        witness,
        premises,
    })
}
