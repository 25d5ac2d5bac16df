//! Problem files and the term grammar.
//!
//! A problem is a line-based file:
//!
//! ```text
//! # comment
//! theory x : xor          # kinds: empty | ac | xor | ag
//! theory g : ag * e inv   # optional symbol spellings: op [unit [inverse]]
//! assume enc(a+b, k)
//! assume k
//! goal a+b
//! ```
//!
//! Theory lines come first; `assume` may repeat; exactly one `goal`.  Terms
//! use the constructors `pair`, `enc`, `sign`, `blind` (binary) and `pub`
//! (unary), plus each declared theory's symbols.  A single-character
//! operator is written infix (`a+b+c`); an identifier operator is written
//! prefix (`xor(a,b,c)`).  Mixing different infix operators needs
//! parentheses.  Names start with a lowercase letter.  All terms are ground;
//! there is no variable syntax.

use crate::term::{Context, Skeleton, TermBank, TermId, TheoryId};
use crate::theory::{Catalog, TheoryDef, TheoryKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

fn perr<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        col,
        msg: msg.into(),
    })
}

#[derive(Debug)]
pub struct Problem {
    pub catalog: Catalog,
    pub assumptions: Vec<TermId>,
    pub goal: TermId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TokKind {
    Word(String),
    Op(char),
    LPar,
    RPar,
    Comma,
    Colon,
    LBrack,
    RBrack,
}

#[derive(Debug, Clone)]
struct Tok {
    kind: TokKind,
    col: usize,
}

fn lex(line: &str, lineno: usize) -> Result<Vec<Tok>, ParseError> {
    let mut toks = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        let col = i + 1;
        match c {
            '#' => break,
            c if c.is_whitespace() => {
                chars.next();
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut w = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        w.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push(Tok {
                    kind: TokKind::Word(w),
                    col,
                });
            }
            '(' | ')' | ',' | ':' | '[' | ']' => {
                let kind = match c {
                    '(' => TokKind::LPar,
                    ')' => TokKind::RPar,
                    ',' => TokKind::Comma,
                    ':' => TokKind::Colon,
                    '[' => TokKind::LBrack,
                    _ => TokKind::RBrack,
                };
                toks.push(Tok { kind, col });
                chars.next();
            }
            c if c.is_ascii_graphic() => {
                toks.push(Tok {
                    kind: TokKind::Op(c),
                    col,
                });
                chars.next();
            }
            _ => return perr(lineno, col, format!("unexpected character `{c}`")),
        }
    }
    Ok(toks)
}

/// Parse tree shared by terms and contexts.
#[derive(Debug)]
enum PTerm {
    Word(String, usize),
    Call(String, Vec<PTerm>, usize),
    Infix(char, Vec<PTerm>, usize),
    Hole(usize, usize),
}

struct Cursor<'a> {
    toks: &'a [Tok],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&TokKind> {
        self.toks.get(self.pos).map(|t| &t.kind)
    }

    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|t| t.col)
            .or_else(|| self.toks.last().map(|t| t.col + 1))
            .unwrap_or(1)
    }

    fn next(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, kind: &TokKind, what: &str) -> Result<(), ParseError> {
        let (line, col) = (self.line, self.col());
        match self.next() {
            Some(t) if &t.kind == kind => Ok(()),
            _ => perr(line, col, format!("expected {what}")),
        }
    }

    fn parse_expr(&mut self) -> Result<PTerm, ParseError> {
        let first = self.parse_atom()?;
        let Some(&TokKind::Op(op)) = self.peek() else {
            return Ok(first);
        };
        let col = self.col();
        let mut parts = vec![first];
        while let Some(&TokKind::Op(c)) = self.peek() {
            if c != op {
                return perr(
                    self.line,
                    self.col(),
                    format!("mixing `{op}` and `{c}` needs parentheses"),
                );
            }
            self.next();
            parts.push(self.parse_atom()?);
        }
        Ok(PTerm::Infix(op, parts, col))
    }

    fn parse_atom(&mut self) -> Result<PTerm, ParseError> {
        let (line, col) = (self.line, self.col());
        match self.next().map(|t| t.kind.clone()) {
            Some(TokKind::Word(w)) => {
                if self.peek() == Some(&TokKind::LPar) {
                    self.next();
                    let mut args = vec![self.parse_expr()?];
                    while self.peek() == Some(&TokKind::Comma) {
                        self.next();
                        args.push(self.parse_expr()?);
                    }
                    self.expect(&TokKind::RPar, "`)`")?;
                    Ok(PTerm::Call(w, args, col))
                } else {
                    Ok(PTerm::Word(w, col))
                }
            }
            Some(TokKind::LPar) => {
                let inner = self.parse_expr()?;
                self.expect(&TokKind::RPar, "`)`")?;
                Ok(inner)
            }
            Some(TokKind::LBrack) => {
                let icol = self.col();
                let Some(TokKind::Word(w)) = self.next().map(|t| t.kind.clone())
                else {
                    return perr(line, icol, "expected a hole index after `[`");
                };
                let Ok(i) = w.parse::<usize>() else {
                    return perr(line, icol, format!("bad hole index `{w}`"));
                };
                if i == 0 {
                    return perr(line, icol, "hole indices start at 1");
                }
                self.expect(&TokKind::RBrack, "`]`")?;
                Ok(PTerm::Hole(i, col))
            }
            _ => perr(line, col, "expected a term"),
        }
    }
}

fn is_name(w: &str) -> bool {
    let mut cs = w.chars();
    cs.next().is_some_and(|c| c.is_ascii_lowercase())
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

const CONSTRUCTORS: [(&str, usize); 5] = [
    ("pair", 2),
    ("enc", 2),
    ("sign", 2),
    ("blind", 2),
    ("pub", 1),
];

fn resolve_term(
    bank: &mut TermBank,
    cat: &Catalog,
    p: &PTerm,
    line: usize,
) -> Result<TermId, ParseError> {
    match p {
        PTerm::Hole(_, col) => {
            perr(line, *col, "holes are only meaningful in contexts")
        }
        PTerm::Word(w, col) => {
            for th in cat.ids() {
                let d = cat.def(th);
                if d.zero.as_deref() == Some(w) {
                    return Ok(bank.zero(th));
                }
                if d.op.as_deref() == Some(w) || d.inv.as_deref() == Some(w) {
                    return perr(line, *col, format!("symbol `{w}` needs arguments"));
                }
            }
            if CONSTRUCTORS.iter().any(|&(c, _)| c == w) {
                return perr(line, *col, format!("constructor `{w}` needs arguments"));
            }
            if !is_name(w) {
                return perr(
                    line,
                    *col,
                    format!("`{w}` is not a name (names start with a lowercase letter)"),
                );
            }
            Ok(bank.name(w))
        }
        PTerm::Call(f, args, col) => {
            let mut resolved = Vec::with_capacity(args.len());
            for a in args {
                resolved.push(resolve_term(bank, cat, a, line)?);
            }
            if let Some(&(_, arity)) =
                CONSTRUCTORS.iter().find(|&&(c, _)| c == f)
            {
                if resolved.len() != arity {
                    return perr(
                        line,
                        *col,
                        format!(
                            "`{f}` takes {arity} argument{}, got {}",
                            if arity == 1 { "" } else { "s" },
                            resolved.len()
                        ),
                    );
                }
                return Ok(match f.as_str() {
                    "pair" => bank.pair(resolved[0], resolved[1]),
                    "enc" => bank.enc(resolved[0], resolved[1]),
                    "sign" => bank.sign(resolved[0], resolved[1]),
                    "blind" => bank.blind(resolved[0], resolved[1]),
                    _ => bank.pub_key(resolved[0]),
                });
            }
            for th in cat.ids() {
                let d = cat.def(th);
                if d.inv.as_deref() == Some(f) {
                    if resolved.len() != 1 {
                        return perr(
                            line,
                            *col,
                            format!("`{f}` takes 1 argument, got {}", resolved.len()),
                        );
                    }
                    return Ok(bank.inv(th, resolved[0]));
                }
                if d.op.as_deref() == Some(f) {
                    if resolved.len() < 2 {
                        return perr(
                            line,
                            *col,
                            format!("`{f}` takes at least 2 arguments"),
                        );
                    }
                    return Ok(bank.ac(th, resolved));
                }
            }
            perr(line, *col, format!("unknown function `{f}`"))
        }
        PTerm::Infix(op, parts, col) => {
            let mut resolved = Vec::with_capacity(parts.len());
            for a in parts {
                resolved.push(resolve_term(bank, cat, a, line)?);
            }
            let s = op.to_string();
            for th in cat.ids() {
                if cat.def(th).op.as_deref() == Some(&s) {
                    return Ok(bank.ac(th, resolved));
                }
            }
            perr(line, *col, format!("operator `{op}` is not declared"))
        }
    }
}

fn resolve_skeleton(
    bank: &mut TermBank,
    cat: &Catalog,
    th: TheoryId,
    p: &PTerm,
    line: usize,
) -> Result<Skeleton, ParseError> {
    let def = cat.def(th);
    match p {
        PTerm::Hole(i, _) => Ok(Skeleton::Hole(*i)),
        PTerm::Word(w, col) => {
            if def.zero.as_deref() == Some(w) {
                return Ok(Skeleton::Zero);
            }
            if !is_name(w) {
                return perr(line, *col, format!("`{w}` is not usable in a context"));
            }
            Ok(Skeleton::Leaf(bank.name(w)))
        }
        PTerm::Call(f, args, col) => {
            if def.inv.as_deref() == Some(f) {
                if args.len() != 1 {
                    return perr(line, *col, format!("`{f}` takes 1 argument"));
                }
                let inner = resolve_skeleton(bank, cat, th, &args[0], line)?;
                return Ok(Skeleton::Inv(Box::new(inner)));
            }
            if def.op.as_deref() == Some(f) {
                if args.len() < 2 {
                    return perr(line, *col, format!("`{f}` takes at least 2 arguments"));
                }
                let mut parts = Vec::with_capacity(args.len());
                for a in args {
                    parts.push(resolve_skeleton(bank, cat, th, a, line)?);
                }
                return Ok(Skeleton::Op(parts));
            }
            perr(
                line,
                *col,
                format!("`{f}` is not a symbol of this context's theory"),
            )
        }
        PTerm::Infix(op, parts, col) => {
            if def.op.as_deref() != Some(&op.to_string()) {
                return perr(
                    line,
                    *col,
                    format!("operator `{op}` is not this context's operator"),
                );
            }
            let mut out = Vec::with_capacity(parts.len());
            for a in parts {
                out.push(resolve_skeleton(bank, cat, th, a, line)?);
            }
            Ok(Skeleton::Op(out))
        }
    }
}

fn parse_line_expr(
    bank: &mut TermBank,
    cat: &Catalog,
    toks: &[Tok],
    line: usize,
) -> Result<TermId, ParseError> {
    let mut cur = Cursor {
        toks,
        pos: 0,
        line,
    };
    let p = cur.parse_expr()?;
    if cur.peek().is_some() {
        return perr(line, cur.col(), "unexpected trailing input");
    }
    resolve_term(bank, cat, &p, line)
}

/// Parses one term in the problem grammar.
pub fn parse_term_str(
    bank: &mut TermBank,
    cat: &Catalog,
    src: &str,
) -> Result<TermId, ParseError> {
    let toks = lex(src, 1)?;
    parse_line_expr(bank, cat, &toks, 1)
}

/// Parses one context over the given theory; holes are written `[k]`.
pub fn parse_context_str(
    bank: &mut TermBank,
    cat: &Catalog,
    th: TheoryId,
    src: &str,
) -> Result<Context, ParseError> {
    let toks = lex(src, 1)?;
    let mut cur = Cursor {
        toks: &toks,
        pos: 0,
        line: 1,
    };
    let p = cur.parse_expr()?;
    if cur.peek().is_some() {
        return perr(1, cur.col(), "unexpected trailing input");
    }
    let skeleton = resolve_skeleton(bank, cat, th, &p, 1)?;
    Ok(Context {
        theory: th,
        skeleton,
    })
}

fn sym_string(t: &Tok, line: usize) -> Result<String, ParseError> {
    match &t.kind {
        TokKind::Word(w) => Ok(w.clone()),
        TokKind::Op(c) => Ok(c.to_string()),
        _ => perr(line, t.col, "expected a symbol"),
    }
}

/// Parses a whole problem file.
pub fn parse_problem(bank: &mut TermBank, src: &str) -> Result<Problem, ParseError> {
    let mut defs: Vec<TheoryDef> = Vec::new();
    let mut catalog: Option<Catalog> = None;
    let mut assumptions: Vec<TermId> = Vec::new();
    let mut goal: Option<TermId> = None;
    let mut last_line = 0;

    for (i, raw) in src.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let toks = lex(raw, lineno)?;
        let Some(first) = toks.first() else {
            continue;
        };
        let TokKind::Word(head) = &first.kind else {
            return perr(lineno, first.col, "expected `theory`, `assume` or `goal`");
        };
        match head.as_str() {
            "theory" => {
                if catalog.is_some() {
                    return perr(
                        lineno,
                        first.col,
                        "theory declarations must precede `assume` and `goal`",
                    );
                }
                let def = parse_theory_line(&toks, lineno)?;
                defs.push(def);
                // validate incrementally so the error blames this line
                Catalog::new(defs.clone()).map_err(|e| ParseError {
                    line: lineno,
                    col: first.col,
                    msg: e.to_string(),
                })?;
            }
            "assume" | "goal" => {
                let cat = catalog.get_or_insert_with(|| {
                    if defs.is_empty() {
                        Catalog::empty()
                    } else {
                        Catalog::new(std::mem::take(&mut defs))
                            .expect("validated per line")
                    }
                });
                let t = parse_line_expr(bank, cat, &toks[1..], lineno)?;
                if head == "assume" {
                    assumptions.push(t);
                } else if goal.replace(t).is_some() {
                    return perr(lineno, first.col, "a problem has exactly one goal");
                }
            }
            other => {
                return perr(
                    lineno,
                    first.col,
                    format!("expected `theory`, `assume` or `goal`, found `{other}`"),
                )
            }
        }
    }

    let Some(goal) = goal else {
        return perr(last_line + 1, 1, "missing `goal` line");
    };
    let catalog = catalog.expect("catalog exists once a goal was parsed");
    Ok(Problem {
        catalog,
        assumptions,
        goal,
    })
}

fn parse_theory_line(toks: &[Tok], line: usize) -> Result<TheoryDef, ParseError> {
    let mut cur = Cursor {
        toks,
        pos: 1,
        line,
    };
    let (ncol, name) = match cur.next() {
        Some(Tok {
            kind: TokKind::Word(w),
            col,
        }) => (*col, w.clone()),
        t => {
            let col = t.map(|t| t.col).unwrap_or(1);
            return perr(line, col, "expected a theory name");
        }
    };
    if !is_name(&name) {
        return perr(line, ncol, "theory names start with a lowercase letter");
    }
    cur.expect(&TokKind::Colon, "`:`")?;
    let (kcol, kind_word) = match cur.next() {
        Some(Tok {
            kind: TokKind::Word(w),
            col,
        }) => (*col, w.clone()),
        t => {
            let col = t.map(|t| t.col).unwrap_or(1);
            return perr(line, col, "expected a theory kind");
        }
    };
    let kind = match kind_word.as_str() {
        "empty" => TheoryKind::Empty,
        "ac" => TheoryKind::AcOnly,
        "xor" => TheoryKind::Xor,
        "ag" => TheoryKind::AbelianGroup,
        other => {
            return perr(
                line,
                kcol,
                format!("unknown theory kind `{other}` (empty, ac, xor, ag)"),
            )
        }
    };
    let mut syms = Vec::new();
    while let Some(t) = cur.next() {
        syms.push(sym_string(t, line)?);
    }
    let mut def = TheoryDef::new(&name, kind);
    if !syms.is_empty() {
        let want = [kind.has_op(), kind.has_zero(), kind.has_inv()]
            .iter()
            .filter(|&&b| b)
            .count();
        if syms.len() != want {
            return perr(
                line,
                kcol,
                format!("kind `{kind_word}` takes exactly {want} symbol(s) when overridden"),
            );
        }
        let mut it = syms.into_iter();
        if kind.has_op() {
            def.op = it.next();
        }
        if kind.has_zero() {
            def.zero = it.next();
        }
        if kind.has_inv() {
            def.inv = it.next();
        }
    }
    Ok(def)
}
