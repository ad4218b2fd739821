//! Saturation meta-programs.
//!
//! [`build_m`] is the static program that decides (in)consistency of a normal
//! program given as `head/2`, `bodyP/2`, `bodyN/2` facts ([`encode_ground`]) or
//! rules ([`encode_nonground`]). `M ∪ M^P` has a single answer set containing
//! `noAS` iff `P` is inconsistent; otherwise its answer sets mirror those of `P`
//! through `true/1`. Query atoms are compiled away with [`rewrite_queries`], and
//! [`tau`] extends the encoding so that its answer sets are the inconsistency
//! reasons of `P` for a domain.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::*;
use crate::cdnl::{solve_disjunctive, SolverOptions};
use crate::error::{Error, Result};
use crate::externals::Registry;
use crate::grounder::{ground, GroundOptions};
use crate::increason::InconsistencyReason;
use crate::parser::parse_program;
use crate::refsem::RefSem;

const M_TEXT: &str = "
atom(X) :- head(R,X).
atom(X) :- bodyP(R,X).
atom(X) :- bodyN(R,X).
rule(R) :- head(R,X).
rule(R) :- bodyP(R,X).
rule(R) :- bodyN(R,X).

true(X) v false(X) :- atom(X).

inReduct(R) :- rule(R), COND(false(X) : bodyN(R,X)).
outReduct(R) :- rule(R), bodyN(R,X), true(X).
derivationSeq(X,Y) v derivationSeq(Y,X) :- true(X), true(Y), X != Y.
derivationSeq(X,Z) :- derivationSeq(X,Y), derivationSeq(Y,Z).
derivationSeq(X1,X2) :- head(R,X1), COND(derivationSeq(Y,X1) : bodyP(R,Y)), atom(X2), COND(derivationSeq(Y,X2) : bodyP(R,Y)), X2 > X1, inReduct(R), true(X1), true(X2).
notApp(R) :- outReduct(R).
notApp(R) :- inReduct(R), bodyP(R,X), false(X).
notApp(R) :- head(R,X1), bodyP(R,X2), derivationSeq(X1,X2).
notApp(R) :- head(R,X), bodyP(R,X).
noAS :- true(X), COND(notApp(R) : head(R,X)).
noAS :- inReduct(R), head(R,X), false(X), COND(true(Y) : bodyP(R,Y)).

true(X) :- atom(X), noAS.
false(X) :- atom(X), noAS.
derivationSeq(X,Y) :- atom(X), atom(Y), noAS.
inReduct(R) :- rule(R), noAS.
outReduct(R) :- rule(R), noAS.
";

/// The static meta-program `M`.
///
/// Two rules go beyond the textbook form. The ordering rule that prefers the
/// smaller of two simultaneously derivable atoms only fires for rules in the
/// reduct and for true atoms; otherwise it would order atoms by rules that
/// cannot fire. `notApp(R) :- head(R,X), bodyP(R,X)` rejects self-supporting
/// rules such as `a :- a`, which the strict derivation order alone cannot see.
pub fn build_m() -> Program {
    parse_program(M_TEXT).expect("static meta-program parses")
}

pub fn no_as() -> Atom {
    Atom::prop("noAS")
}

fn rule_id(k: usize, vars: &[Symbol]) -> Term {
    Term::func(&format!("r{k}"), vars.iter().map(|v| Term::Var(v.clone())).collect())
}

fn fact2(pred: &str, a: Term, b: Term) -> Atom {
    Atom::new(pred, vec![a, b])
}

fn ensure_normal(p: &Program) -> Result<Program> {
    if p.rules.iter().any(|r| r.has_queries()) {
        return Err(Error::Unsupported("query atoms must be rewritten before meta-encoding".into()));
    }
    if p.rules.iter().any(|r| r.has_externals()) {
        return Err(Error::Unsupported("meta-encoding requires an ordinary program".into()));
    }
    if p.rules.iter().any(|r| r.head.len() > 1) {
        return Err(Error::Unsupported("meta-encoding requires a normal (non-disjunctive) program".into()));
    }
    Ok(normalize_constraints(p))
}

/// `M^P` for a ground normal program: facts over `head/2`, `bodyP/2`, `bodyN/2`,
/// the k-th rule (textual order, 1-based) named `rk`. Constraints are normalized first.
pub fn encode_ground(p: &Program) -> Result<Program> {
    if !p.is_ground() {
        return Err(Error::NonGround("encode_ground requires a ground program".into()));
    }
    let p = ensure_normal(p)?;
    let mut out = Vec::new();
    for (k, r) in p.rules.iter().enumerate() {
        let id = rule_id(k + 1, &[]);
        for l in &r.body {
            if let LitKind::Builtin(..) = l.kind {
                return Err(Error::Unsupported(format!("builtin in ground rule `{r}`")));
            }
        }
        for h in &r.head {
            out.push(Rule::fact(fact2("head", id.clone(), h.to_term())));
        }
        for b in r.pos_atoms() {
            out.push(Rule::fact(fact2("bodyP", id.clone(), b.to_term())));
        }
        for b in r.neg_atoms() {
            out.push(Rule::fact(fact2("bodyN", id.clone(), b.to_term())));
        }
    }
    Ok(Program::new(out))
}

fn fresh_var(taken: &BTreeSet<Symbol>, k: usize) -> Term {
    let mut name = format!("R{k}");
    while taken.contains(name.as_str()) {
        name.push('_');
    }
    Term::v(&name)
}

/// `M^P` for a safe normal program: per rule, `head(rk(V), h)`, `bodyP(rk(V), b)` and
/// `bodyN(rk(V), b)` are derived whenever every positive body atom `d` is the head of
/// some rule instance (`head(R_d, d)`). Builtins of the rule are kept as guards.
pub fn encode_nonground(p: &Program) -> Result<Program> {
    let p = ensure_normal(p)?;
    let mut out = Vec::new();
    for (k, r) in p.rules.iter().enumerate() {
        let vars = r.vars_ordered();
        let taken: BTreeSet<Symbol> = vars.iter().cloned().collect();
        let id = rule_id(k + 1, &vars);
        let mut guard = Vec::new();
        for (j, d) in r.pos_atoms().enumerate() {
            guard.push(BodyLiteral::pos(fact2("head", fresh_var(&taken, j + 1), d.to_term())));
        }
        for l in &r.body {
            if let LitKind::Builtin(..) = l.kind {
                guard.push(l.clone());
            }
        }
        let mut emit =
            |pred: &str, a: &Atom| out.push(Rule::new(vec![fact2(pred, id.clone(), a.to_term())], guard.clone()));
        for h in &r.head {
            emit("head", h);
        }
        for b in r.pos_atoms() {
            emit("bodyP", b);
        }
        for b in r.neg_atoms() {
            emit("bodyN", b);
        }
    }
    Ok(Program::new(out))
}

/// Which program encoding to pair with `M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Encoding {
    Ground,
    NonGround,
}

/// `M ∪ M^P`, not yet grounded.
pub fn meta_program(p: &Program, enc: Encoding) -> Result<Program> {
    let mut m = build_m();
    let mp = match enc {
        Encoding::Ground => encode_ground(p)?,
        Encoding::NonGround => encode_nonground(p)?,
    };
    m.extend(mp.rules);
    Ok(m)
}

fn ground_opts(opts: &SolverOptions) -> GroundOptions {
    GroundOptions { limits: opts.limits.clone(), ..GroundOptions::default() }
}

/// Answer sets of `M ∪ M^P` (grounded, solved; auxiliary atoms dropped).
pub fn meta_answer_sets(p: &Program, enc: Encoding, opts: &SolverOptions) -> Result<BTreeSet<BTreeSet<Atom>>> {
    let m = meta_program(p, enc)?;
    let reg = Registry::new();
    let g = ground(&m, &BTreeSet::new(), &reg, &ground_opts(opts))?;
    solve_disjunctive(&g.program, &reg, opts)
}

/// The interpretation of `P` encoded by a non-saturated meta answer set
/// (`None` for the saturated one). Auxiliary atoms of `P` are dropped.
pub fn decode_true(i: &BTreeSet<Atom>) -> Option<BTreeSet<Atom>> {
    if i.contains(&no_as()) {
        return None;
    }
    Some(
        i.iter()
            .filter(|a| a.pred.as_ref() == "true" && a.args.len() == 1)
            .filter_map(|a| a.args[0].as_atom())
            .filter(|a| !a.is_aux())
            .collect(),
    )
}

/// Decides inconsistency of a normal program through `M ∪ M^P`; ground programs
/// use the fact encoding, others the rule encoding.
pub fn check_inconsistency_meta(p: &Program, opts: &SolverOptions) -> Result<bool> {
    let enc = if p.is_ground() { Encoding::Ground } else { Encoding::NonGround };
    Ok(meta_answer_sets(p, enc, opts)?.iter().any(|i| i.contains(&no_as())))
}

// ---------------------------------------------------------------------------
// Query atoms

fn rename_atom(a: &Atom, prefix: &str) -> Atom {
    Atom { pred: sym(&format!("{prefix}{}", a.pred)), args: a.args.clone() }
}

/// Prefixes every predicate of `p` (terms are untouched).
pub fn namespace(p: &Program, prefix: &str) -> Program {
    let rules = p
        .rules
        .iter()
        .map(|r| Rule {
            head: r.head.iter().map(|h| rename_atom(h, prefix)).collect(),
            body: r
                .body
                .iter()
                .map(|l| match &l.kind {
                    LitKind::Ordinary(a) => {
                        BodyLiteral { polarity: l.polarity, kind: LitKind::Ordinary(rename_atom(a, prefix)) }
                    }
                    LitKind::Conditional(c) => BodyLiteral {
                        polarity: l.polarity,
                        kind: LitKind::Conditional(CondLit {
                            polarity: c.polarity,
                            lit: rename_atom(&c.lit, prefix),
                            cond: rename_atom(&c.cond, prefix),
                        }),
                    },
                    _ => l.clone(),
                })
                .collect(),
        })
        .collect();
    Program::new(rules)
}

/// Replaces head-cycle-free disjunctive rules by their shifted normal rules.
pub fn shift_hcf(p: &Program) -> Result<Program> {
    if p.rules.iter().all(|r| r.head.len() <= 1) {
        return Ok(p.clone());
    }
    // positive predicate dependency graph; head-cycle freeness checked per predicate (conservative)
    let mut edges: BTreeMap<Symbol, BTreeSet<Symbol>> = BTreeMap::new();
    for r in &p.rules {
        for h in &r.head {
            for b in r.pos_atoms() {
                edges.entry(b.pred.clone()).or_default().insert(h.pred.clone());
            }
        }
    }
    let reaches = |from: &Symbol, to: &Symbol| {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from.clone()];
        while let Some(x) = stack.pop() {
            if &x == to {
                return true;
            }
            if seen.insert(x.clone()) {
                stack.extend(edges.get(&x).into_iter().flatten().cloned());
            }
        }
        false
    };
    let mut out = Vec::new();
    for r in &p.rules {
        if r.head.len() <= 1 {
            out.push(r.clone());
            continue;
        }
        for (i, h) in r.head.iter().enumerate() {
            for (j, o) in r.head.iter().enumerate() {
                if i != j && reaches(&h.pred, &o.pred) && reaches(&o.pred, &h.pred) {
                    return Err(Error::Unsupported(format!("disjunctive rule `{r}` is not head-cycle-free")));
                }
            }
            let mut body = r.body.clone();
            body.extend(r.head.iter().filter(|o| *o != h).map(|o| BodyLiteral::neg(o.clone())));
            out.push(Rule::new(vec![h.clone()], body));
        }
    }
    let mut q = Program::new(out);
    q.external_decls = p.external_decls.clone();
    Ok(q)
}

/// `S ∪ {← q}` (cautious) or `S ∪ {← l̄ | l ∈ q}` (brave).
pub fn query_program(s: &Program, mode: QueryMode, q: &[(Polarity, Atom)]) -> Program {
    let mut out = s.clone();
    let lit = |p: Polarity, a: &Atom| BodyLiteral { polarity: p, kind: LitKind::Ordinary(a.clone()) };
    match mode {
        QueryMode::Cautious => out.rules.push(Rule::constraint(q.iter().map(|(p, a)| lit(*p, a)).collect())),
        QueryMode::Brave => {
            for (p, a) in q {
                out.rules.push(Rule::constraint(vec![lit(p.flip(), a)]));
            }
        }
    }
    out
}

fn predicate_arities(p: &Program) -> BTreeMap<Symbol, usize> {
    p.ordinary_atoms().into_iter().map(|a| (a.pred.clone(), a.arity())).collect()
}

/// Compiles query atoms away. Each distinct query atom `i` (in order of first
/// occurrence) gets a copy of `M ∪ M^{S'}` with every predicate prefixed by
/// `__q<i>_`; the query atom becomes `__q<i>_noAS` (cautious) or
/// `not __q<i>_noAS` (brave), double negation cancelled. For each input
/// predicate `p`, `__q<i>_head(r_p(X..), p(X..)) :- p(X..)` passes the caller's
/// atoms to the subprogram as facts. `load` resolves subprogram references.
pub fn rewrite_queries(p: &Program, load: &dyn Fn(&str) -> Result<Program>) -> Result<Program> {
    let mut index: BTreeMap<QueryAtomRef, usize> = BTreeMap::new();
    let mut order: Vec<QueryAtomRef> = Vec::new();
    let mut rules = Vec::with_capacity(p.rules.len());
    for r in &p.rules {
        let mut body = Vec::with_capacity(r.body.len());
        for l in &r.body {
            match &l.kind {
                LitKind::Query(q) => {
                    let i = *index.entry(q.clone()).or_insert_with(|| {
                        order.push(q.clone());
                        order.len()
                    });
                    let noas = Atom::prop(&format!("__q{i}_noAS"));
                    let pol = match q.mode {
                        QueryMode::Cautious => l.polarity,
                        QueryMode::Brave => l.polarity.flip(),
                    };
                    body.push(BodyLiteral { polarity: pol, kind: LitKind::Ordinary(noas) });
                }
                _ => body.push(l.clone()),
            }
        }
        rules.push(Rule::new(r.head.clone(), body));
    }
    let arities = predicate_arities(p);
    for (i0, q) in order.iter().enumerate() {
        let prefix = format!("__q{}_", i0 + 1);
        let s = load(&q.subprogram)?;
        if s.rules.iter().any(|r| r.has_queries()) {
            return Err(Error::Unsupported(format!("nested query atoms in subprogram `{}`", q.subprogram)));
        }
        let s = shift_hcf(&s)?;
        let sq = query_program(&s, q.mode, &q.query);
        let copy = namespace(&meta_program(&sq, Encoding::NonGround)?, &prefix);
        rules.extend(copy.rules);
        let sub_arities = predicate_arities(&s);
        for input in &q.inputs {
            let n = match arities.get(input).or_else(|| sub_arities.get(input)) {
                Some(&n) => n,
                None => continue,
            };
            let xs: Vec<Term> = (1..=n).map(|k| Term::v(&format!("X{k}"))).collect();
            let pa = Atom { pred: input.clone(), args: xs.clone() };
            let id = Term::func(&format!("r_{input}"), xs);
            let h = Atom::new(&format!("{prefix}head"), vec![id, pa.to_term()]);
            rules.push(Rule::new(vec![h], vec![BodyLiteral::pos(pa)]));
        }
    }
    let mut out = Program::new(rules);
    out.external_decls = p.external_decls.clone();
    out.unit_markers = p.unit_markers.clone();
    Ok(out)
}

/// Loads subprograms as files relative to `base`.
pub fn file_loader(base: &std::path::Path) -> impl Fn(&str) -> Result<Program> {
    let base = base.to_path_buf();
    move |name: &str| {
        let path = base.join(name);
        let text =
            std::fs::read_to_string(&path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        crate::parser::parse_program_named(&text, &path.display().to_string())
    }
}

/// Answer sets of `[P]` projected to non-auxiliary atoms.
pub fn solve_with_queries(
    p: &Program,
    load: &dyn Fn(&str) -> Result<Program>,
    opts: &SolverOptions,
) -> Result<BTreeSet<BTreeSet<Atom>>> {
    let rp = rewrite_queries(p, load)?;
    let reg = Registry::new();
    let g = ground(&rp, &BTreeSet::new(), &reg, &ground_opts(opts))?;
    solve_disjunctive(&g.program, &reg, opts)
}

/// Direct query semantics by brute force: `s ∪ facts ⊨_mode q`.
pub fn query_entails(
    s: &Program,
    mode: QueryMode,
    facts: &BTreeSet<Atom>,
    q: &[(Polarity, Atom)],
    oracle: &RefSem,
) -> Result<bool> {
    let sq = query_program(s, mode, q);
    let g = if sq.is_ground() { sq } else { ground(&sq, facts, &oracle.reg, &GroundOptions::default())?.program };
    let consistent = oracle.is_consistent(&g, facts)?;
    Ok(match mode {
        QueryMode::Brave => consistent,
        QueryMode::Cautious => !consistent,
    })
}

/// Reference answer sets of a program with query atoms: every assignment of
/// truth values to the query atoms is tried, and an answer set of the resulting
/// ordinary program is kept iff each query atom's value agrees with
/// [`query_entails`] on the inputs it reads. Exact when inputs do not depend on
/// the query atoms themselves.
pub fn answer_sets_with_queries_oracle(
    p: &Program,
    load: &dyn Fn(&str) -> Result<Program>,
    oracle: &RefSem,
) -> Result<BTreeSet<BTreeSet<Atom>>> {
    let mut qs: Vec<QueryAtomRef> = Vec::new();
    for r in &p.rules {
        for l in &r.body {
            if let LitKind::Query(q) = &l.kind {
                if !qs.contains(q) {
                    qs.push(q.clone());
                }
            }
        }
    }
    let subs: Vec<Program> =
        qs.iter().map(|q| load(&q.subprogram).and_then(|s| shift_hcf(&s))).collect::<Result<_>>()?;
    let mut out = BTreeSet::new();
    for mask in 0u64..(1u64 << qs.len()) {
        let val = |q: &QueryAtomRef| mask >> qs.iter().position(|x| x == q).unwrap() & 1 == 1;
        let mut rules = Vec::new();
        'rules: for r in &p.rules {
            let mut body = Vec::new();
            for l in &r.body {
                match &l.kind {
                    LitKind::Query(q) => {
                        if val(q) != (l.polarity == Polarity::Pos) {
                            continue 'rules;
                        }
                    }
                    _ => body.push(l.clone()),
                }
            }
            rules.push(Rule::new(r.head.clone(), body));
        }
        let fixed = Program::new(rules);
        let g = ground(&fixed, &BTreeSet::new(), &oracle.reg, &GroundOptions::default())?.program;
        for i in oracle.answer_sets(&g)? {
            let mut ok = true;
            for (k, q) in qs.iter().enumerate() {
                let facts: BTreeSet<Atom> = i.iter().filter(|a| q.inputs.contains(&a.pred)).cloned().collect();
                if query_entails(&subs[k], q.mode, &facts, &q.query, oracle)? != (mask >> k & 1 == 1) {
                    ok = false;
                    break;
                }
            }
            if ok {
                out.insert(project(&i));
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Inconsistency reasons

pub const IR_PLUS: &str = "irPlus";
pub const IR_MINUS: &str = "irMinus";
pub const IR_FREE: &str = "irFree";

/// `τ(D, P)`: `M ∪ M^P` plus, for each `a ∈ D`,
///
/// ```text
/// irPlus(a) v irMinus(a) v irFree(a).
/// head(rf(a), a) :- irPlus(a).                         % a is a fact
/// head(rf(a), a) :- irFree(a).  bodyN(rf(a), __nf(a)) :- irFree(a).
/// head(rn(a), __nf(a)) :- irFree(a).  bodyN(rn(a), a) :- irFree(a).
/// :- not noAS.
/// ```
///
/// For `irMinus(a)` nothing derives `a`. For `irFree(a)` the encoded program gets
/// the even loop `a :- not __nf(a). __nf(a) :- not a.`, so the saturation check
/// ranges over both choices and `noAS` holds iff every admissible fact set is
/// inconsistent.
pub fn tau(d: &BTreeSet<Atom>, p: &Program) -> Result<Program> {
    let heads = p.heads();
    if let Some(a) = d.iter().find(|a| heads.contains(*a)) {
        return Err(Error::Invalid(format!("domain atom {a} occurs in a rule head")));
    }
    let mut out = meta_program(p, Encoding::Ground)?;
    for a in d {
        let t = a.to_term();
        let nf = Term::func("__nf", vec![t.clone()]);
        let un = |pred: &str| Atom::new(pred, vec![t.clone()]);
        let rf = Term::func("rf", vec![t.clone()]);
        let rn = Term::func("rn", vec![t.clone()]);
        out.rules.push(Rule::new(vec![un(IR_PLUS), un(IR_MINUS), un(IR_FREE)], vec![]));
        out.rules.push(Rule::new(vec![fact2("head", rf.clone(), t.clone())], vec![BodyLiteral::pos(un(IR_PLUS))]));
        let free = vec![BodyLiteral::pos(un(IR_FREE))];
        out.rules.push(Rule::new(vec![fact2("head", rf.clone(), t.clone())], free.clone()));
        out.rules.push(Rule::new(vec![fact2("bodyN", rf, nf.clone())], free.clone()));
        out.rules.push(Rule::new(vec![fact2("head", rn.clone(), nf)], free.clone()));
        out.rules.push(Rule::new(vec![fact2("bodyN", rn, t.clone())], free));
    }
    out.rules.push(Rule::constraint(vec![BodyLiteral::neg(no_as())]));
    Ok(out)
}

/// Decodes `irPlus/irMinus` atoms of a τ answer set.
pub fn decode_ir(i: &BTreeSet<Atom>) -> InconsistencyReason {
    let pick = |pred: &str| -> BTreeSet<Atom> {
        i.iter().filter(|a| a.pred.as_ref() == pred && a.args.len() == 1).filter_map(|a| a.args[0].as_atom()).collect()
    };
    InconsistencyReason::new(pick(IR_PLUS), pick(IR_MINUS))
}

/// All IRs of a ground normal program for `d`, via the answer sets of `τ(d, p)`.
pub fn enumerate_irs_tau(
    p: &Program,
    d: &BTreeSet<Atom>,
    opts: &SolverOptions,
) -> Result<BTreeSet<InconsistencyReason>> {
    let t = tau(d, p)?;
    let reg = Registry::new();
    let g = ground(&t, &BTreeSet::new(), &reg, &ground_opts(opts))?;
    Ok(solve_disjunctive(&g.program, &reg, opts)?.iter().map(decode_ir).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refsem::{answer_sets_bruteforce, irs_bruteforce};

    fn p(s: &str) -> Program {
        parse_program(s).unwrap()
    }

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    fn has_rule(prog: &Program, text: &str) -> bool {
        let r = &p(text).rules[0];
        prog.rules.contains(r)
    }

    #[test]
    fn m_contains_textbook_rules() {
        let m = build_m();
        assert!(has_rule(&m, "true(X) v false(X) :- atom(X)."));
        assert!(has_rule(&m, "noAS :- true(X), COND(notApp(R) : head(R,X))."));
        assert!(has_rule(&m, "true(X) :- atom(X), noAS."));
        assert!(has_rule(&m, "inReduct(R) :- rule(R), COND(false(X) : bodyN(R,X))."));
    }

    #[test]
    fn encode_ground_examples() {
        assert_eq!(encode_ground(&p("q :- d, not p.")).unwrap(), p("head(r1,q). bodyP(r1,d). bodyN(r1,p)."));
        assert_eq!(encode_ground(&p("d.")).unwrap(), p("head(r1,d)."));
        assert_eq!(encode_ground(&p(":- a.")).unwrap(), p("head(r1,__c1). bodyP(r1,a). bodyN(r1,__c1)."));
        assert!(encode_ground(&p("a v b.")).is_err());
        assert!(encode_ground(&p("q(X) :- d(X).")).is_err());
    }

    #[test]
    fn encode_nonground_even_loop() {
        let e = encode_nonground(&p("d(a). q(X) :- d(X), not p(X). p(X) :- d(X), not q(X).")).unwrap();
        let want = p("head(r1, d(a)).
             head(r2(X), q(X)) :- head(R1, d(X)).
             bodyP(r2(X), d(X)) :- head(R1, d(X)).
             bodyN(r2(X), p(X)) :- head(R1, d(X)).
             head(r3(X), p(X)) :- head(R1, d(X)).
             bodyP(r3(X), d(X)) :- head(R1, d(X)).
             bodyN(r3(X), q(X)) :- head(R1, d(X)).");
        assert_eq!(e, want);
    }

    #[test]
    fn encode_nonground_ground_input() {
        let e = encode_nonground(&p("a :- b, not c. b.")).unwrap();
        assert_eq!(e, p("head(r1,a) :- head(R1,b). bodyP(r1,b) :- head(R1,b). bodyN(r1,c) :- head(R1,b). head(r2,b)."));
    }

    #[test]
    fn meta_check_small() {
        assert!(check_inconsistency_meta(&p("a :- not a."), &opts()).unwrap());
        assert!(!check_inconsistency_meta(&p("a :- not b. b :- not a."), &opts()).unwrap());
        assert!(check_inconsistency_meta(&p("a :- a. :- not a."), &opts()).unwrap());
    }

    #[test]
    fn meta_even_loop_projection() {
        let prog = p("d(a). q(X) :- d(X), not p(X). p(X) :- d(X), not q(X).");
        let sets = meta_answer_sets(&prog, Encoding::NonGround, &opts()).unwrap();
        let decoded: BTreeSet<BTreeSet<Atom>> = sets.iter().filter_map(decode_true).collect();
        let want: BTreeSet<BTreeSet<Atom>> = [
            [Atom::consts("d", &["a"]), Atom::consts("q", &["a"])].into_iter().collect(),
            [Atom::consts("d", &["a"]), Atom::consts("p", &["a"])].into_iter().collect(),
        ]
        .into_iter()
        .collect();
        assert_eq!(decoded, want);
        assert!(sets.iter().all(|i| !i.contains(&no_as())));
    }

    #[test]
    fn meta_unique_saturated_model() {
        let sets = meta_answer_sets(&p("a :- not b. b :- not c. c :- not a."), Encoding::Ground, &opts()).unwrap();
        assert_eq!(sets.len(), 1);
        assert!(sets.iter().next().unwrap().contains(&no_as()));
    }

    #[test]
    fn meta_projection_matches_oracle() {
        let prog = p("a :- not b. b :- not a. c :- a. c :- b. :- c, not a.");
        let sets = meta_answer_sets(&prog, Encoding::Ground, &opts()).unwrap();
        let decoded: BTreeSet<BTreeSet<Atom>> = sets.iter().filter_map(decode_true).collect();
        assert_eq!(decoded, answer_sets_bruteforce(&prog).unwrap());
    }

    #[test]
    fn hcf_shift() {
        let s = shift_hcf(&p("in(X) v out(X) :- n(X). n(1).")).unwrap();
        assert_eq!(s, p("in(X) :- n(X), not out(X). out(X) :- n(X), not in(X). n(1)."));
        assert!(shift_hcf(&p("a v b. a :- b. b :- a.")).is_err());
    }

    #[test]
    fn brave_fact_query() {
        let prog = p("ok :- &query_b[\"s\"](x).");
        let load = |_: &str| parse_program("x.");
        let sets = solve_with_queries(&prog, &load, &opts()).unwrap();
        assert_eq!(sets, [[Atom::prop("ok")].into_iter().collect()].into_iter().collect());
    }

    #[test]
    fn cautious_query_even_loop() {
        let load = |_: &str| parse_program("a :- not b. b :- not a.");
        let oracle = RefSem::default();
        let s = load("").unwrap();
        let q = [(Polarity::Pos, Atom::prop("a"))];
        assert!(!query_entails(&s, QueryMode::Cautious, &BTreeSet::new(), &q, &oracle).unwrap());
        assert!(query_entails(&s, QueryMode::Brave, &BTreeSet::new(), &q, &oracle).unwrap());
        let prog = p("ok :- &query_c[\"s\"](a). nb :- not &query_b[\"s\"](a).");
        let sets = solve_with_queries(&prog, &load, &opts()).unwrap();
        assert_eq!(sets, [BTreeSet::new()].into_iter().collect());
        assert_eq!(sets, answer_sets_with_queries_oracle(&prog, &load, &oracle).unwrap());
    }

    #[test]
    fn query_entails_vacuous() {
        let oracle = RefSem::default();
        let s = p("a :- not a.");
        let q = [(Polarity::Pos, Atom::prop("z"))];
        assert!(query_entails(&s, QueryMode::Cautious, &BTreeSet::new(), &q, &oracle).unwrap());
        assert!(!query_entails(&s, QueryMode::Brave, &BTreeSet::new(), &q, &oracle).unwrap());
        assert!(query_entails(
            &p("a."),
            QueryMode::Cautious,
            &BTreeSet::new(),
            &[(Polarity::Pos, Atom::prop("a"))],
            &oracle
        )
        .unwrap());
    }

    #[test]
    fn query_with_inputs() {
        let load = |_: &str| parse_program("bad :- sel(X), sel(Y), X != Y.");
        let prog = p("n(1). n(2). sel(X) v nsel(X) :- n(X). two :- &query_c[\"s\"; sel](bad).");
        let sets = solve_with_queries(&prog, &load, &opts()).unwrap();
        let oracle = answer_sets_with_queries_oracle(&prog, &load, &RefSem::default()).unwrap();
        assert_eq!(sets, oracle);
        assert_eq!(sets.iter().filter(|i| i.contains(&Atom::prop("two"))).count(), 1);
    }

    #[test]
    fn namespaces_are_disjoint() {
        let load = |_: &str| parse_program("a :- not b. b :- not a.");
        let prog = p("x :- &query_c[\"s\"](a). y :- &query_b[\"s\"](b).");
        let rp = rewrite_queries(&prog, &load).unwrap();
        let preds = |i: usize| -> BTreeSet<Symbol> {
            rp.ordinary_atoms().into_iter().map(|a| a.pred).filter(|s| s.starts_with(&format!("__q{i}_"))).collect()
        };
        assert!(!preds(1).is_empty());
        assert!(preds(1).is_disjoint(&preds(2)));
    }

    #[test]
    fn tau_structure() {
        let d: BTreeSet<Atom> = [Atom::prop("a")].into_iter().collect();
        let t = tau(&d, &p("b :- a.")).unwrap();
        assert!(has_rule(&t, "irPlus(a) v irMinus(a) v irFree(a)."));
        assert!(has_rule(&t, ":- not noAS."));
        assert!(tau(&d, &p("a :- b.")).is_err());
    }

    #[test]
    fn tau_two_constraints() {
        let prog = p(":- a. :- b.");
        let d: BTreeSet<Atom> = [Atom::prop("a"), Atom::prop("b")].into_iter().collect();
        let got = enumerate_irs_tau(&prog, &d, &opts()).unwrap();
        assert_eq!(got.len(), 5);
        assert_eq!(got, irs_bruteforce(&prog, &d).unwrap());
    }

    #[test]
    fn tau_section_example() {
        let prog = p(":- a, not c. d :- b.");
        let d: BTreeSet<Atom> = [Atom::prop("a"), Atom::prop("b"), Atom::prop("c")].into_iter().collect();
        let got = enumerate_irs_tau(&prog, &d, &opts()).unwrap();
        let ir =
            InconsistencyReason::new([Atom::prop("a")].into_iter().collect(), [Atom::prop("c")].into_iter().collect());
        assert!(got.contains(&ir));
        assert_eq!(got, irs_bruteforce(&prog, &d).unwrap());
    }

    #[test]
    fn tau_consistent() {
        let d: BTreeSet<Atom> = [Atom::prop("b")].into_iter().collect();
        assert!(enumerate_irs_tau(&p("a."), &d, &opts()).unwrap().is_empty());
        assert!(enumerate_irs_tau(&p("a :- not c."), &BTreeSet::new(), &opts()).unwrap().is_empty());
    }
}
