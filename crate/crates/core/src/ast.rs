//! Terms, atoms, literals, rules and programs.
//!
//! Identifiers beginning with `__` are reserved for auxiliary atoms introduced
//! by rewritings; they are excluded from answer-set projection.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type Symbol = Arc<str>;

pub fn sym(s: &str) -> Symbol {
    Arc::from(s)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Const(Symbol),
    Var(Symbol),
    Func(Symbol, Vec<Term>),
}

impl Term {
    pub fn c(name: &str) -> Term {
        Term::Const(sym(name))
    }

    pub fn v(name: &str) -> Term {
        Term::Var(sym(name))
    }

    pub fn int(n: i64) -> Term {
        Term::Const(sym(&n.to_string()))
    }

    pub fn func(f: &str, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::c(f)
        } else {
            Term::Func(sym(f), args)
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Const(_) => true,
            Term::Var(_) => false,
            Term::Func(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Nesting depth: constants and variables have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Func(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn vars_into(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Func(_, args) => args.iter().for_each(|t| t.vars_into(out)),
            Term::Const(_) => {}
        }
    }

    pub fn consts_into(&self, out: &mut BTreeSet<Term>) {
        match self {
            Term::Const(_) => {
                out.insert(self.clone());
            }
            Term::Func(_, args) => args.iter().for_each(|t| t.consts_into(out)),
            Term::Var(_) => {}
        }
    }

    pub fn apply(&self, s: &Subst) -> Term {
        match self {
            Term::Var(v) => s.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Func(f, args) => Term::Func(f.clone(), args.iter().map(|t| t.apply(s)).collect()),
            Term::Const(_) => self.clone(),
        }
    }

    /// Reads a ground term as an atom (atoms-as-terms).
    pub fn as_atom(&self) -> Option<Atom> {
        match self {
            Term::Const(c) => Some(Atom { pred: c.clone(), args: vec![] }),
            Term::Func(f, args) => Some(Atom { pred: f.clone(), args: args.clone() }),
            Term::Var(_) => None,
        }
    }

    fn numeric(&self) -> Option<i64> {
        match self {
            Term::Const(c) => c.parse::<i64>().ok(),
            _ => None,
        }
    }

    fn class(&self) -> u8 {
        match self {
            Term::Const(_) if self.numeric().is_some() => 0,
            Term::Const(_) | Term::Func(..) => 1,
            Term::Var(_) => 2,
        }
    }
}

/// Total order on terms: numerals first (numerically), then everything else by
/// rendered text, variables last.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        let (ca, cb) = (self.class(), other.class());
        if ca != cb {
            return ca.cmp(&cb);
        }
        match (self, other) {
            (Term::Const(a), Term::Const(b)) => match (self.numeric(), other.numeric()) {
                (Some(x), Some(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
                _ => a.cmp(b),
            },
            (Term::Var(a), Term::Var(b)) => a.cmp(b),
            _ => self.to_string().cmp(&other.to_string()).then_with(|| {
                // equal text but structurally different (e.g. quoted constants)
                format!("{self:?}").cmp(&format!("{other:?}"))
            }),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) | Term::Var(c) => write!(f, "{c}"),
            Term::Func(name, args) => {
                write!(f, "{name}(")?;
                write_list(f, args)?;
                write!(f, ")")
            }
        }
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, t) in items.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{t}")?;
    }
    Ok(())
}

pub type Subst = BTreeMap<Symbol, Term>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub pred: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Atom {
        Atom { pred: sym(pred), args }
    }

    pub fn prop(pred: &str) -> Atom {
        Atom::new(pred, vec![])
    }

    /// Builds an atom with all-constant arguments, e.g. `Atom::consts("edge", &["a","b"])`.
    pub fn consts(pred: &str, args: &[&str]) -> Atom {
        Atom::new(pred, args.iter().map(|a| Term::c(a)).collect())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn is_aux(&self) -> bool {
        self.pred.starts_with("__")
    }

    pub fn apply(&self, s: &Subst) -> Atom {
        Atom { pred: self.pred.clone(), args: self.args.iter().map(|t| t.apply(s)).collect() }
    }

    pub fn vars_into(&self, out: &mut BTreeSet<Symbol>) {
        self.args.iter().for_each(|t| t.vars_into(out));
    }

    pub fn vars(&self) -> BTreeSet<Symbol> {
        let mut s = BTreeSet::new();
        self.vars_into(&mut s);
        s
    }

    /// The atom viewed as a function term.
    pub fn to_term(&self) -> Term {
        if self.args.is_empty() {
            Term::Const(self.pred.clone())
        } else {
            Term::Func(self.pred.clone(), self.args.clone())
        }
    }

    /// Matches `self` (possibly non-ground) against a ground atom, extending `s`.
    pub fn unify_ground(&self, ground: &Atom, s: &mut Subst) -> bool {
        if self.pred != ground.pred || self.args.len() != ground.args.len() {
            return false;
        }
        self.args.iter().zip(&ground.args).all(|(p, g)| match_term(p, g, s))
    }
}

/// One-sided matching of a pattern term against a ground term.
pub fn match_term(pat: &Term, g: &Term, s: &mut Subst) -> bool {
    match pat {
        Term::Var(v) => match s.get(v) {
            Some(bound) => bound == g,
            None => {
                s.insert(v.clone(), g.clone());
                true
            }
        },
        Term::Const(_) => pat == g,
        Term::Func(f, args) => match g {
            Term::Func(gf, gargs) if gf == f && gargs.len() == args.len() => {
                args.iter().zip(gargs).all(|(p, t)| match_term(p, t, s))
            }
            _ => false,
        },
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        self.pred.cmp(&other.pred).then_with(|| self.args.cmp(&other.args))
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            write_list(f, &self.args)?;
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Pos,
    Neg,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Pos => Polarity::Neg,
            Polarity::Neg => Polarity::Pos,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn eval(self, a: &Term, b: &Term) -> bool {
        let o = a.cmp(b);
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => o == Ordering::Less,
            CmpOp::Le => o != Ordering::Greater,
            CmpOp::Gt => o == Ordering::Greater,
            CmpOp::Ge => o != Ordering::Less,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExternalAtom {
    pub name: Symbol,
    pub inputs: Vec<Symbol>,
    pub outputs: Vec<Term>,
}

impl ExternalAtom {
    pub fn new(name: &str, inputs: &[&str], outputs: Vec<Term>) -> ExternalAtom {
        ExternalAtom { name: sym(name), inputs: inputs.iter().map(|s| sym(s)).collect(), outputs }
    }

    pub fn is_ground(&self) -> bool {
        self.outputs.iter().all(Term::is_ground)
    }

    pub fn apply(&self, s: &Subst) -> ExternalAtom {
        ExternalAtom {
            name: self.name.clone(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.iter().map(|t| t.apply(s)).collect(),
        }
    }
}

impl fmt::Display for ExternalAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "&{}[", self.name)?;
        write_list(f, &self.inputs)?;
        write!(f, "](")?;
        write_list(f, &self.outputs)?;
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QueryMode {
    Brave,
    Cautious,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QueryAtomRef {
    pub mode: QueryMode,
    /// Subprogram reference (a file path at parse time).
    pub subprogram: String,
    pub inputs: Vec<Symbol>,
    pub query: Vec<(Polarity, Atom)>,
}

impl fmt::Display for QueryAtomRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = match self.mode {
            QueryMode::Brave => "b",
            QueryMode::Cautious => "c",
        };
        write!(f, "&query_{m}[{:?}", self.subprogram)?;
        if !self.inputs.is_empty() {
            write!(f, "; ")?;
            write_list(f, &self.inputs)?;
        }
        write!(f, "](")?;
        for (i, (pol, a)) in self.query.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if *pol == Polarity::Neg {
                write!(f, "not ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// `COND(lit : cond)`: holds iff `lit` holds for every instance of `cond`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CondLit {
    pub polarity: Polarity,
    pub lit: Atom,
    pub cond: Atom,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LitKind {
    Ordinary(Atom),
    External(ExternalAtom),
    Builtin(Term, CmpOp, Term),
    Conditional(CondLit),
    Query(QueryAtomRef),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BodyLiteral {
    pub polarity: Polarity,
    pub kind: LitKind,
}

impl BodyLiteral {
    pub fn pos(a: Atom) -> BodyLiteral {
        BodyLiteral { polarity: Polarity::Pos, kind: LitKind::Ordinary(a) }
    }

    pub fn neg(a: Atom) -> BodyLiteral {
        BodyLiteral { polarity: Polarity::Neg, kind: LitKind::Ordinary(a) }
    }

    pub fn ext(polarity: Polarity, e: ExternalAtom) -> BodyLiteral {
        BodyLiteral { polarity, kind: LitKind::External(e) }
    }

    pub fn builtin(l: Term, op: CmpOp, r: Term) -> BodyLiteral {
        BodyLiteral { polarity: Polarity::Pos, kind: LitKind::Builtin(l, op, r) }
    }

    pub fn cond(lit: Atom, cond: Atom) -> BodyLiteral {
        BodyLiteral {
            polarity: Polarity::Pos,
            kind: LitKind::Conditional(CondLit { polarity: Polarity::Pos, lit, cond }),
        }
    }

    pub fn ordinary(&self) -> Option<&Atom> {
        match &self.kind {
            LitKind::Ordinary(a) => Some(a),
            _ => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        match &self.kind {
            LitKind::Ordinary(a) => a.is_ground(),
            LitKind::External(e) => e.is_ground(),
            LitKind::Builtin(l, _, r) => l.is_ground() && r.is_ground(),
            LitKind::Conditional(c) => c.lit.is_ground() && c.cond.is_ground(),
            LitKind::Query(_) => true,
        }
    }

    pub fn vars_into(&self, out: &mut BTreeSet<Symbol>) {
        match &self.kind {
            LitKind::Ordinary(a) => a.vars_into(out),
            LitKind::External(e) => e.outputs.iter().for_each(|t| t.vars_into(out)),
            LitKind::Builtin(l, _, r) => {
                l.vars_into(out);
                r.vars_into(out);
            }
            LitKind::Conditional(c) => {
                c.lit.vars_into(out);
                c.cond.vars_into(out);
            }
            LitKind::Query(_) => {}
        }
    }

    pub fn apply(&self, s: &Subst) -> BodyLiteral {
        let kind = match &self.kind {
            LitKind::Ordinary(a) => LitKind::Ordinary(a.apply(s)),
            LitKind::External(e) => LitKind::External(e.apply(s)),
            LitKind::Builtin(l, op, r) => LitKind::Builtin(l.apply(s), *op, r.apply(s)),
            LitKind::Conditional(c) => {
                LitKind::Conditional(CondLit { polarity: c.polarity, lit: c.lit.apply(s), cond: c.cond.apply(s) })
            }
            LitKind::Query(q) => LitKind::Query(q.clone()),
        };
        BodyLiteral { polarity: self.polarity, kind }
    }
}

impl fmt::Display for BodyLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.polarity == Polarity::Neg {
            write!(f, "not ")?;
        }
        match &self.kind {
            LitKind::Ordinary(a) => write!(f, "{a}"),
            LitKind::External(e) => write!(f, "{e}"),
            LitKind::Builtin(l, op, r) => write!(f, "{l} {} {r}", op.as_str()),
            LitKind::Conditional(c) => {
                let n = if c.polarity == Polarity::Neg { "not " } else { "" };
                write!(f, "COND({n}{} : {})", c.lit, c.cond)
            }
            LitKind::Query(q) => write!(f, "{q}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub head: Vec<Atom>,
    pub body: Vec<BodyLiteral>,
}

impl Rule {
    pub fn new(head: Vec<Atom>, body: Vec<BodyLiteral>) -> Rule {
        Rule { head, body }
    }

    pub fn fact(a: Atom) -> Rule {
        Rule { head: vec![a], body: vec![] }
    }

    pub fn constraint(body: Vec<BodyLiteral>) -> Rule {
        Rule { head: vec![], body }
    }

    /// Normal rule with ordinary body: `h :- pos..., not neg...`.
    pub fn normal(h: Atom, pos: Vec<Atom>, neg: Vec<Atom>) -> Rule {
        let mut body: Vec<BodyLiteral> = pos.into_iter().map(BodyLiteral::pos).collect();
        body.extend(neg.into_iter().map(BodyLiteral::neg));
        Rule { head: vec![h], body }
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_empty()
    }

    pub fn is_fact(&self) -> bool {
        self.head.len() == 1 && self.body.is_empty()
    }

    pub fn is_disjunctive(&self) -> bool {
        self.head.len() > 1
    }

    pub fn is_ground(&self) -> bool {
        self.head.iter().all(Atom::is_ground) && self.body.iter().all(BodyLiteral::is_ground)
    }

    pub fn pos_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().filter(|l| l.polarity == Polarity::Pos).filter_map(BodyLiteral::ordinary)
    }

    pub fn neg_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().filter(|l| l.polarity == Polarity::Neg).filter_map(BodyLiteral::ordinary)
    }

    pub fn has_externals(&self) -> bool {
        self.body.iter().any(|l| matches!(l.kind, LitKind::External(_)))
    }

    pub fn has_queries(&self) -> bool {
        self.body.iter().any(|l| matches!(l.kind, LitKind::Query(_)))
    }

    /// Only ordinary body literals.
    pub fn is_ordinary(&self) -> bool {
        self.body.iter().all(|l| matches!(l.kind, LitKind::Ordinary(_)))
    }

    /// Variables in order of first appearance (head first, then body).
    pub fn vars_ordered(&self) -> Vec<Symbol> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut push = |t: &Term| {
            let mut vs = Vec::new();
            collect_vars_ordered(t, &mut vs);
            for v in vs {
                if seen.insert(v.clone()) {
                    out.push(v);
                }
            }
        };
        for a in &self.head {
            a.args.iter().for_each(&mut push);
        }
        for l in &self.body {
            match &l.kind {
                LitKind::Ordinary(a) => a.args.iter().for_each(&mut push),
                LitKind::External(e) => e.outputs.iter().for_each(&mut push),
                LitKind::Builtin(a, _, b) => {
                    push(a);
                    push(b);
                }
                LitKind::Conditional(c) => {
                    c.lit.args.iter().for_each(&mut push);
                    c.cond.args.iter().for_each(&mut push);
                }
                LitKind::Query(_) => {}
            }
        }
        out
    }

    pub fn apply(&self, s: &Subst) -> Rule {
        Rule {
            head: self.head.iter().map(|a| a.apply(s)).collect(),
            body: self.body.iter().map(|l| l.apply(s)).collect(),
        }
    }
}

fn collect_vars_ordered(t: &Term, out: &mut Vec<Symbol>) {
    match t {
        Term::Var(v) => out.push(v.clone()),
        Term::Func(_, args) => args.iter().for_each(|a| collect_vars_ordered(a, out)),
        Term::Const(_) => {}
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, h) in self.head.iter().enumerate() {
            if i > 0 {
                write!(f, " v ")?;
            }
            write!(f, "{h}")?;
        }
        if !self.body.is_empty() {
            if self.head.is_empty() {
                write!(f, ":- ")?;
            } else {
                write!(f, " :- ")?;
            }
            for (i, l) in self.body.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{l}")?;
            }
        } else if self.head.is_empty() {
            write!(f, ":-")?;
        }
        write!(f, ".")
    }
}

/// `#external name/in/out [monotone] "file".`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExternalDecl {
    pub name: Symbol,
    pub input_arity: usize,
    pub output_arity: usize,
    pub monotone: bool,
    pub file: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub external_decls: Vec<ExternalDecl>,
    pub query_decls: Vec<QueryAtomRef>,
    /// Rule indices at which a new unit starts.
    pub unit_markers: Vec<usize>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Program {
        let mut p = Program { rules, ..Default::default() };
        p.collect_queries();
        p
    }

    pub fn collect_queries(&mut self) {
        let mut qs: Vec<QueryAtomRef> = Vec::new();
        for r in &self.rules {
            for l in &r.body {
                if let LitKind::Query(q) = &l.kind {
                    if !qs.contains(q) {
                        qs.push(q.clone());
                    }
                }
            }
        }
        self.query_decls = qs;
    }

    pub fn is_ground(&self) -> bool {
        self.rules.iter().all(Rule::is_ground)
    }

    pub fn is_normal(&self) -> bool {
        self.rules.iter().all(|r| r.head.len() <= 1)
    }

    pub fn is_ordinary(&self) -> bool {
        self.rules.iter().all(Rule::is_ordinary)
    }

    pub fn has_constraints(&self) -> bool {
        self.rules.iter().any(Rule::is_constraint)
    }

    pub fn with_facts<'a>(&self, facts: impl IntoIterator<Item = &'a Atom>) -> Program {
        let mut p = self.clone();
        for a in facts {
            p.rules.push(Rule::fact(a.clone()));
        }
        p
    }

    pub fn extend(&mut self, rules: impl IntoIterator<Item = Rule>) {
        self.rules.extend(rules);
    }

    /// H(P): atoms occurring in rule heads.
    pub fn heads(&self) -> BTreeSet<Atom> {
        self.rules.iter().flat_map(|r| r.head.iter().cloned()).collect()
    }

    pub fn head_predicates(&self) -> BTreeSet<(Symbol, usize)> {
        self.rules.iter().flat_map(|r| r.head.iter().map(|a| (a.pred.clone(), a.arity()))).collect()
    }

    /// All ordinary atoms in heads, bodies and conditional literals (no grounding check).
    pub fn ordinary_atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        for r in &self.rules {
            out.extend(r.head.iter().cloned());
            for l in &r.body {
                match &l.kind {
                    LitKind::Ordinary(a) => {
                        out.insert(a.clone());
                    }
                    LitKind::Conditional(c) => {
                        out.insert(c.lit.clone());
                        out.insert(c.cond.clone());
                    }
                    _ => {}
                }
            }
        }
        out
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::parser::render_program(self))
    }
}

/// Replaces every constraint `:- B` by `__c<k> :- B, not __c<k>`.
pub fn normalize_constraints(p: &Program) -> Program {
    let taken: BTreeSet<Symbol> = p.ordinary_atoms().into_iter().map(|a| a.pred).collect();
    let mut k = 0usize;
    let mut fresh = || loop {
        k += 1;
        let name = format!("__c{k}");
        if !taken.contains(name.as_str()) {
            return Atom::prop(&name);
        }
    };
    let mut out = p.clone();
    for r in out.rules.iter_mut() {
        if r.is_constraint() {
            let f = fresh();
            r.head.push(f.clone());
            r.body.push(BodyLiteral::neg(f));
        }
    }
    out
}

/// A(P) for a ground program.
pub fn atoms_of(p: &Program) -> Result<BTreeSet<Atom>> {
    if !p.is_ground() {
        return Err(Error::NonGround("atoms_of requires a ground program".into()));
    }
    Ok(p.ordinary_atoms())
}

/// A(P) restricted to non-auxiliary atoms.
pub fn atoms_of_nonaux(p: &Program) -> Result<BTreeSet<Atom>> {
    Ok(atoms_of(p)?.into_iter().filter(|a| !a.is_aux()).collect())
}

/// HU(P): constants occurring anywhere in `p` (including inside function terms).
pub fn herbrand_universe(p: &Program) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    let atom = |a: &Atom, out: &mut BTreeSet<Term>| a.args.iter().for_each(|t| t.consts_into(out));
    for r in &p.rules {
        r.head.iter().for_each(|a| atom(a, &mut out));
        for l in &r.body {
            match &l.kind {
                LitKind::Ordinary(a) => atom(a, &mut out),
                LitKind::External(e) => e.outputs.iter().for_each(|t| t.consts_into(&mut out)),
                LitKind::Builtin(x, _, y) => {
                    x.consts_into(&mut out);
                    y.consts_into(&mut out);
                }
                LitKind::Conditional(c) => {
                    atom(&c.lit, &mut out);
                    atom(&c.cond, &mut out);
                }
                LitKind::Query(q) => q.query.iter().for_each(|(_, a)| atom(a, &mut out)),
            }
        }
    }
    out
}

/// Drops auxiliary atoms.
pub fn project(i: &BTreeSet<Atom>) -> BTreeSet<Atom> {
    i.iter().filter(|a| !a.is_aux()).cloned().collect()
}

pub fn render_set<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> String {
    let mut v: Vec<String> = atoms.into_iter().map(|a| a.to_string()).collect();
    v.sort();
    format!("{{{}}}", v.join(", "))
}
