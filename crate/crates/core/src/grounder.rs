//! Grounding.
//!
//! [`ground`] works stratum by stratum over the predicate dependency graph.
//! Per stratum it computes an over-approximation of derivable atoms
//! (`possible`) together with atoms that are derivable for sure (`certain`),
//! then instantiates every rule by matching its positive body atoms against
//! `possible`. Rules without variables are always kept verbatim. Conditional
//! literals are expanded over the possible instances of their condition.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::ast::*;
use crate::error::{Error, Result};
use crate::externals::{ExternalDef, ExternalKind, Registry};
use crate::limits::Limits;

/// How output tuples of external atoms are over-approximated when their
/// inputs are not yet fixed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExtMode {
    /// Union of outputs over every possible input extension (monotone externals: one call).
    #[default]
    Enumerate,
    /// Structural superset of outputs; one call, valid for every input extension.
    Superset,
}

#[derive(Clone, Debug, Default)]
pub struct GroundOptions {
    pub limits: Limits,
    pub ext_mode: ExtMode,
    /// Atoms treated as possibly true (but not certain) from the start.
    pub seed_possible: BTreeSet<Atom>,
    /// Restrict variable bindings to these terms (empty: unrestricted).
    pub constants: BTreeSet<Term>,
}

#[derive(Clone, Debug, Default)]
pub struct Grounding {
    pub program: Program,
    pub possible: BTreeSet<Atom>,
    pub certain: BTreeSet<Atom>,
    /// External output computations performed.
    pub evaluations: usize,
}

#[derive(Default)]
struct AtomIndex {
    set: HashSet<Atom>,
    by_pred: HashMap<Symbol, Vec<Atom>>,
}

impl AtomIndex {
    fn insert(&mut self, a: Atom) -> bool {
        if self.set.insert(a.clone()) {
            self.by_pred.entry(a.pred.clone()).or_default().push(a);
            true
        } else {
            false
        }
    }

    fn contains(&self, a: &Atom) -> bool {
        self.set.contains(a)
    }

    fn of(&self, p: &Symbol) -> &[Atom] {
        self.by_pred.get(p).map(Vec::as_slice).unwrap_or(&[])
    }

    fn count(&self, p: &Symbol) -> usize {
        self.of(p).len()
    }
}

struct Grounder<'a> {
    reg: &'a Registry,
    opts: &'a GroundOptions,
    possible: AtomIndex,
    certain: AtomIndex,
    complete: HashSet<Symbol>,
    evaluations: usize,
    ext_cache: HashMap<(ExternalAtom, Vec<usize>), BTreeSet<Vec<Term>>>,
    cond_aux: BTreeMap<(Polarity, Atom, Atom), Atom>,
    aux_rules: Vec<Rule>,
}

fn body_preds(r: &Rule) -> Vec<Symbol> {
    let mut out = Vec::new();
    for l in &r.body {
        match &l.kind {
            LitKind::Ordinary(a) => out.push(a.pred.clone()),
            LitKind::External(e) => out.extend(e.inputs.iter().cloned()),
            LitKind::Conditional(c) => {
                out.push(c.lit.pred.clone());
                out.push(c.cond.pred.clone());
            }
            LitKind::Builtin(..) => {}
            LitKind::Query(q) => out.extend(q.inputs.iter().cloned()),
        }
    }
    out
}

/// Strongly connected components of the predicate graph in dependency order.
fn strata(p: &Program) -> Vec<Vec<Symbol>> {
    let mut preds: BTreeSet<Symbol> = BTreeSet::new();
    let mut edges: BTreeMap<Symbol, BTreeSet<Symbol>> = BTreeMap::new();
    for r in &p.rules {
        let bs = body_preds(r);
        preds.extend(bs.iter().cloned());
        for h in &r.head {
            preds.insert(h.pred.clone());
            for b in &bs {
                edges.entry(b.clone()).or_default().insert(h.pred.clone());
            }
            for h2 in &r.head {
                edges.entry(h.pred.clone()).or_default().insert(h2.pred.clone());
            }
        }
    }
    let nodes: Vec<Symbol> = preds.into_iter().collect();
    let ix: HashMap<Symbol, usize> = nodes.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    let adj: Vec<Vec<usize>> =
        nodes.iter().map(|n| edges.get(n).map(|s| s.iter().map(|m| ix[m]).collect()).unwrap_or_default()).collect();
    // iterative Tarjan; components come out in reverse topological order
    let n = nodes.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps: Vec<Vec<Symbol>> = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut next)) = work.last_mut() {
            if *next < adj[v].len() {
                let w = adj[v][*next];
                *next += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(u, _)) = work.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(nodes[w].clone());
                        if w == v {
                            break;
                        }
                    }
                    comp.sort();
                    comps.push(comp);
                }
            }
        }
    }
    comps.reverse();
    comps
}

/// Outputs valid for every extension of the input predicates within `possible`.
fn output_superset(def: &ExternalDef, e: &ExternalAtom, possible: &BTreeSet<Atom>) -> BTreeSet<Vec<Term>> {
    match &def.kind {
        ExternalKind::Id => def.outputs(&e.inputs, possible),
        ExternalKind::Neg => [vec![]].into_iter().collect(),
        ExternalKind::Diff => possible.iter().filter(|a| a.pred == e.inputs[0]).map(|a| a.args.clone()).collect(),
        ExternalKind::Table(t) => t.entries.values().flatten().cloned().collect(),
    }
}

impl<'a> Grounder<'a> {
    fn add_possible(&mut self, a: Atom) -> Result<bool> {
        if self.possible.contains(&a) {
            return Ok(false);
        }
        if a.args.iter().any(|t| t.depth() > self.opts.limits.term_depth) {
            return Err(Error::Bound { name: "term_depth", limit: self.opts.limits.term_depth });
        }
        Ok(self.possible.insert(a))
    }

    fn ext_of(&self, idx: &AtomIndex, preds: &[Symbol]) -> BTreeSet<Atom> {
        preds.iter().flat_map(|p| idx.of(p).iter().cloned()).collect()
    }

    fn inputs_complete(&self, e: &ExternalAtom) -> bool {
        e.inputs.iter().all(|p| self.complete.contains(p))
    }

    fn ext_outputs(&mut self, e: &ExternalAtom) -> Result<BTreeSet<Vec<Term>>> {
        let shape = ExternalAtom { outputs: vec![], ..e.clone() };
        let key: Vec<usize> = e.inputs.iter().flat_map(|p| [self.possible.count(p), self.certain.count(p)]).collect();
        if let Some(v) = self.ext_cache.get(&(shape.clone(), key.clone())) {
            return Ok(v.clone());
        }
        let def = self.reg.check(e)?.clone();
        let out = if self.inputs_complete(e) {
            self.evaluations += 1;
            def.outputs(&e.inputs, &self.ext_of(&self.certain, &e.inputs))
        } else {
            let possible = self.ext_of(&self.possible, &e.inputs);
            match self.opts.ext_mode {
                ExtMode::Superset => {
                    self.evaluations += 1;
                    output_superset(&def, e, &possible)
                }
                ExtMode::Enumerate if def.monotone => {
                    self.evaluations += 1;
                    def.outputs(&e.inputs, &possible)
                }
                ExtMode::Enumerate => {
                    let certain = self.ext_of(&self.certain, &e.inputs);
                    let unc: Vec<&Atom> = possible.difference(&certain).collect();
                    let limit = self.opts.limits.grounding_evals;
                    if unc.len() >= 63 || self.evaluations + (1usize << unc.len()) > limit {
                        return Err(Error::Bound { name: "grounding_evals", limit });
                    }
                    let mut acc = BTreeSet::new();
                    for k in 0..1u64 << unc.len() {
                        let mut ext = certain.clone();
                        ext.extend(unc.iter().enumerate().filter(|(j, _)| k >> j & 1 == 1).map(|(_, a)| (*a).clone()));
                        acc.extend(def.outputs(&e.inputs, &ext));
                    }
                    self.evaluations += 1 << unc.len();
                    acc
                }
            }
        };
        self.ext_cache.insert((shape, key), out.clone());
        Ok(out)
    }

    /// Enumerates substitutions satisfying the binding literals of `r`.
    fn instances(&mut self, r: &Rule) -> Result<Vec<Subst>> {
        let mut out = Vec::new();
        let pending: Vec<usize> = (0..r.body.len())
            .filter(|&i| match &r.body[i].kind {
                LitKind::Ordinary(_) => r.body[i].polarity == Polarity::Pos,
                LitKind::External(_) | LitKind::Builtin(..) => true,
                _ => false,
            })
            .collect();
        self.extend_subst(r, pending, Subst::new(), &mut out)?;
        if !self.opts.constants.is_empty() {
            out.retain(|s| s.values().all(|t| self.opts.constants.contains(t)));
        }
        Ok(out)
    }

    fn extend_subst(&mut self, r: &Rule, mut pending: Vec<usize>, s: Subst, out: &mut Vec<Subst>) -> Result<()> {
        // builtins first: evaluate or bind
        let mut s = s;
        loop {
            let mut progressed = false;
            let mut i = 0;
            while i < pending.len() {
                let l = &r.body[pending[i]];
                if let LitKind::Builtin(a, op, b) = &l.kind {
                    let (a, b) = (a.apply(&s), b.apply(&s));
                    if a.is_ground() && b.is_ground() {
                        if !op.eval(&a, &b) {
                            return Ok(());
                        }
                        pending.remove(i);
                        progressed = true;
                        continue;
                    }
                    if *op == CmpOp::Eq {
                        let bind = match (&a, &b) {
                            (Term::Var(v), t) | (t, Term::Var(v)) if t.is_ground() => Some((v.clone(), t.clone())),
                            _ => None,
                        };
                        if let Some((v, t)) = bind {
                            s.insert(v, t);
                            pending.remove(i);
                            progressed = true;
                            continue;
                        }
                    }
                }
                i += 1;
            }
            if !progressed {
                break;
            }
        }
        // next: the positive atom with the fewest unbound variables, then externals
        let mut best: Option<(usize, usize)> = None;
        for (k, &i) in pending.iter().enumerate() {
            if let LitKind::Ordinary(a) = &r.body[i].kind {
                let unbound = a.apply(&s).vars().len();
                if best.is_none_or(|(_, u)| unbound < u) {
                    best = Some((k, unbound));
                }
            }
        }
        if let Some((k, unbound)) = best {
            let i = pending.remove(k);
            let LitKind::Ordinary(a) = &r.body[i].kind else { unreachable!() };
            let pat = a.apply(&s);
            if unbound == 0 {
                if self.possible.contains(&pat) {
                    self.extend_subst(r, pending, s, out)?;
                }
                return Ok(());
            }
            let cands: Vec<Atom> = self.possible.of(&pat.pred).to_vec();
            for g in &cands {
                let mut s2 = s.clone();
                if pat.unify_ground(g, &mut s2) {
                    self.extend_subst(r, pending.clone(), s2, out)?;
                }
            }
            return Ok(());
        }
        if let Some(k) = pending.iter().position(|&i| matches!(r.body[i].kind, LitKind::External(_))) {
            let i = pending.remove(k);
            let LitKind::External(e) = &r.body[i].kind else { unreachable!() };
            let e = e.apply(&s);
            for tuple in self.ext_outputs(&e)? {
                if tuple.len() != e.outputs.len() {
                    continue;
                }
                let mut s2 = s.clone();
                if e.outputs.iter().zip(&tuple).all(|(p, g)| match_term(p, g, &mut s2)) {
                    self.extend_subst(r, pending.clone(), s2, out)?;
                }
            }
            return Ok(());
        }
        if let Some(&i) = pending.first() {
            return Err(Error::Invalid(format!("cannot bind `{}` in rule `{r}`", r.body[i])));
        }
        out.push(s);
        Ok(())
    }

    /// True if the ground instance certainly fires.
    fn certainly_fires(&self, g: &Rule) -> Result<bool> {
        if g.head.len() != 1 {
            return Ok(false);
        }
        for l in &g.body {
            let ok = match &l.kind {
                LitKind::Ordinary(a) if l.polarity == Polarity::Pos => self.certain.contains(a),
                LitKind::Ordinary(a) => self.complete.contains(&a.pred) && !self.possible.contains(a),
                LitKind::External(e) if self.inputs_complete(e) => {
                    let def = self.reg.check(e)?;
                    def.evaluate(e, &self.ext_of(&self.certain, &e.inputs)) == (l.polarity == Polarity::Pos)
                }
                LitKind::Builtin(..) => true,
                _ => false,
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn instantiate(&mut self, r: &Rule, s: &Subst) -> Result<Option<Rule>> {
        let mut body = Vec::with_capacity(r.body.len());
        for l in &r.body {
            match &l.kind {
                LitKind::Builtin(..) => {}
                LitKind::Conditional(c) => body.extend(self.expand_cond(c, s)?),
                _ => {
                    let g = l.apply(s);
                    if !g.is_ground() {
                        return Err(Error::Invalid(format!("unsafe literal `{g}` after grounding rule `{r}`")));
                    }
                    body.push(g);
                }
            }
        }
        let head: Vec<Atom> = r.head.iter().map(|h| h.apply(s)).collect();
        if head.iter().any(|h| !h.is_ground()) {
            return Err(Error::Invalid(format!("unsafe head in rule `{r}`")));
        }
        Ok(Some(Rule::new(head, body)))
    }

    fn expand_cond(&mut self, c: &CondLit, s: &Subst) -> Result<Vec<BodyLiteral>> {
        let cond = c.cond.apply(s);
        let lit = c.lit.apply(s);
        let mut out = Vec::new();
        let cands: Vec<Atom> = self.possible.of(&cond.pred).to_vec();
        for g in &cands {
            let mut s2 = Subst::new();
            if !cond.unify_ground(g, &mut s2) {
                continue;
            }
            let li = lit.apply(&s2);
            if !li.is_ground() {
                return Err(Error::Invalid(format!("conditional literal `{li}` not ground after expansion")));
            }
            if self.certain.contains(g) {
                out.push(BodyLiteral { polarity: c.polarity, kind: LitKind::Ordinary(li) });
            } else {
                let key = (c.polarity, li.clone(), g.clone());
                let aux = match self.cond_aux.get(&key) {
                    Some(a) => a.clone(),
                    None => {
                        let a = Atom::new(&format!("__cond_{}", self.cond_aux.len()), vec![]);
                        self.aux_rules.push(Rule::new(
                            vec![a.clone()],
                            vec![BodyLiteral { polarity: c.polarity, kind: LitKind::Ordinary(li) }],
                        ));
                        self.aux_rules.push(Rule::new(vec![a.clone()], vec![BodyLiteral::neg(g.clone())]));
                        self.cond_aux.insert(key, a.clone());
                        a
                    }
                };
                out.push(BodyLiteral::pos(aux));
            }
        }
        Ok(out)
    }

    fn run(&mut self, p: &Program) -> Result<Vec<Rule>> {
        for r in &p.rules {
            if r.has_queries() {
                return Err(Error::Unsupported(format!("query atom in `{r}` must be rewritten before grounding")));
            }
        }
        for a in &self.opts.seed_possible {
            self.add_possible(a.clone())?;
        }
        for comp in strata(p) {
            let in_comp: HashSet<&Symbol> = comp.iter().collect();
            let rules: Vec<&Rule> =
                p.rules.iter().filter(|r| r.head.iter().any(|h| in_comp.contains(&h.pred))).collect();
            loop {
                let mut changed = false;
                for r in &rules {
                    for s in self.instances(r)? {
                        let g = self.instantiate_shallow(r, &s)?;
                        for h in &g.head {
                            changed |= self.add_possible(h.clone())?;
                        }
                        if self.certainly_fires(&g)? {
                            changed |= self.certain.insert(g.head[0].clone());
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            for pred in comp {
                if self.possible.count(&pred) == self.certain.count(&pred) {
                    self.complete.insert(pred);
                }
            }
        }
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for r in &p.rules {
            if r.is_ground() {
                let mut keep = true;
                for l in &r.body {
                    if let LitKind::Builtin(a, op, b) = &l.kind {
                        keep &= op.eval(a, b);
                    }
                }
                if keep {
                    let g = self.instantiate(r, &Subst::new())?.unwrap();
                    if seen.insert(g.clone()) {
                        out.push(g);
                    }
                }
                continue;
            }
            for s in self.instances(r)? {
                if let Some(g) = self.instantiate(r, &s)? {
                    if seen.insert(g.clone()) {
                        out.push(g);
                        if out.len() > self.opts.limits.ground_rules {
                            return Err(Error::Bound { name: "ground_rules", limit: self.opts.limits.ground_rules });
                        }
                    }
                }
            }
        }
        out.append(&mut self.aux_rules);
        Ok(out)
    }

    /// Instance used during the fixpoint: conditionals dropped.
    fn instantiate_shallow(&self, r: &Rule, s: &Subst) -> Result<Rule> {
        let body = r
            .body
            .iter()
            .filter(|l| !matches!(l.kind, LitKind::Builtin(..) | LitKind::Conditional(_)))
            .map(|l| l.apply(s))
            .collect();
        Ok(Rule::new(r.head.iter().map(|h| h.apply(s)).collect(), body))
    }
}

/// Grounds `p ∪ facts`. The facts are part of the returned program.
pub fn ground(p: &Program, facts: &BTreeSet<Atom>, reg: &Registry, opts: &GroundOptions) -> Result<Grounding> {
    let full = p.with_facts(facts);
    let mut g = Grounder {
        reg,
        opts,
        possible: AtomIndex::default(),
        certain: AtomIndex::default(),
        complete: HashSet::new(),
        evaluations: 0,
        ext_cache: HashMap::new(),
        cond_aux: BTreeMap::new(),
        aux_rules: Vec::new(),
    };
    let rules = g.run(&full)?;
    let mut program = Program::new(rules);
    program.external_decls = p.external_decls.clone();
    Ok(Grounding {
        program,
        possible: g.possible.set.into_iter().collect(),
        certain: g.certain.set.into_iter().collect(),
        evaluations: g.evaluations,
    })
}

/// Grounding with default options and the builtin externals.
pub fn ground_program(p: &Program) -> Result<Program> {
    Ok(ground(p, &BTreeSet::new(), &Registry::new(), &GroundOptions::default())?.program)
}

/// Partially optimized grounding of `p ∪ facts(f)` over the constants `c`:
/// instances whose positive body atoms cannot be derived are left out.
pub fn pog(p: &Program, f: &BTreeSet<Atom>, c: &BTreeSet<Term>) -> Result<Program> {
    let opts = GroundOptions { constants: c.clone(), ..GroundOptions::default() };
    Ok(ground(p, f, &Registry::new(), &opts)?.program)
}

/// Every rule under every substitution of its variables by `c`; ground builtins evaluated.
pub fn ground_naive(p: &Program, c: &BTreeSet<Term>) -> Result<Program> {
    ground_naive_limited(p, c, &Limits::default())
}

pub fn ground_naive_limited(p: &Program, c: &BTreeSet<Term>, limits: &Limits) -> Result<Program> {
    let consts: Vec<&Term> = c.iter().collect();
    let mut out = Vec::new();
    for r in &p.rules {
        let vars = r.vars_ordered();
        if !vars.is_empty() && consts.is_empty() {
            return Err(Error::Invalid(format!("no constants to ground `{r}`")));
        }
        let total = consts.len().checked_pow(vars.len() as u32).unwrap_or(usize::MAX);
        if out.len().saturating_add(total) > limits.ground_rules {
            return Err(Error::Bound { name: "ground_rules", limit: limits.ground_rules });
        }
        for k in 0..total {
            let mut s = Subst::new();
            let mut rest = k;
            for v in &vars {
                s.insert(v.clone(), consts[rest % consts.len()].clone());
                rest /= consts.len();
            }
            let g = r.apply(&s);
            let mut keep = true;
            let body = g
                .body
                .into_iter()
                .filter(|l| match &l.kind {
                    LitKind::Builtin(a, op, b) => {
                        keep &= op.eval(a, b);
                        false
                    }
                    _ => true,
                })
                .collect();
            if keep {
                out.push(Rule::new(g.head, body));
            }
        }
    }
    Ok(Program::new(out))
}

/// Replaces every conditional literal by the conjunction of its instances over
/// the supplied extensions.
pub fn expand_conditional(r: &Rule, extension_of: &BTreeMap<Symbol, BTreeSet<Atom>>) -> Result<Rule> {
    let mut body = Vec::new();
    for l in &r.body {
        match &l.kind {
            LitKind::Conditional(c) => {
                let ext =
                    extension_of.get(&c.cond.pred).ok_or_else(|| Error::MissingExtension(c.cond.pred.to_string()))?;
                for g in ext {
                    let mut s = Subst::new();
                    if c.cond.unify_ground(g, &mut s) {
                        body.push(BodyLiteral { polarity: c.polarity, kind: LitKind::Ordinary(c.lit.apply(&s)) });
                    }
                }
            }
            _ => body.push(l.clone()),
        }
    }
    Ok(Rule::new(r.head.clone(), body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn p(s: &str) -> Program {
        parse_program(s).unwrap()
    }

    fn consts(xs: &[&str]) -> BTreeSet<Term> {
        xs.iter().map(|x| Term::c(x)).collect()
    }

    fn rules_of(s: &str) -> BTreeSet<String> {
        p(s).rules.iter().map(|r| r.to_string()).collect()
    }

    fn rendered(prog: &Program) -> BTreeSet<String> {
        prog.rules.iter().map(|r| r.to_string()).collect()
    }

    #[test]
    fn naive() {
        assert_eq!(rendered(&ground_naive(&p("q(X) :- p(X)."), &consts(&["1"])).unwrap()), rules_of("q(1) :- p(1)."));
        assert_eq!(ground_naive(&p("q(X) :- p(X)."), &consts(&["a", "b"])).unwrap().rules.len(), 2);
        assert!(ground_naive(&p("s :- i(X), i(Y), X != Y."), &consts(&["a"])).unwrap().rules.is_empty());
        assert!(ground_naive(&p("q(X) :- p(X)."), &consts(&[])).is_err());
    }

    #[test]
    fn pog_keeps_variable_free_rules() {
        let prog = normalize_constraints(&p("q(X) :- p(X). :- not q(1). :- a."));
        let g = pog(&prog, &BTreeSet::new(), &consts(&["1"])).unwrap();
        assert_eq!(rendered(&g), rendered(&normalize_constraints(&p(":- not q(1). :- a."))));
        let f: BTreeSet<Atom> = [Atom::consts("p", &["1"])].into();
        let g = pog(&p("q(X) :- p(X)."), &f, &consts(&["1"])).unwrap();
        assert_eq!(rendered(&g), rules_of("p(1). q(1) :- p(1)."));
    }

    #[test]
    fn conditional_expansion() {
        let r = p("inReduct(r1) :- COND(false(X) : bodyN(r1,X)).").rules[0].clone();
        let mut ext = BTreeMap::new();
        ext.insert(sym("bodyN"), [Atom::new("bodyN", vec![Term::c("r1"), Term::func("p", vec![Term::int(1)])])].into());
        let g = expand_conditional(&r, &ext).unwrap();
        assert_eq!(g.to_string(), "inReduct(r1) :- false(p(1)).");
        ext.insert(sym("bodyN"), BTreeSet::new());
        assert_eq!(expand_conditional(&r, &ext).unwrap().to_string(), "inReduct(r1).");
        ext.insert(sym("bodyN"), [Atom::consts("bodyN", &["r1", "a"]), Atom::consts("bodyN", &["r1", "b"])].into());
        assert_eq!(expand_conditional(&r, &ext).unwrap().body.len(), 2);
        assert!(matches!(expand_conditional(&r, &BTreeMap::new()), Err(Error::MissingExtension(_))));
    }

    #[test]
    fn stratified_grounding_with_conditionals() {
        let prog = p("rule(r1). rule(r2). body(r1,a). body(r2,b). body(r2,c).
                      ok(R) :- rule(R), COND(t(X) : body(R,X)).");
        let g = ground_program(&prog).unwrap();
        let txt = rendered(&g);
        assert!(txt.contains("ok(r1) :- rule(r1), t(a)."));
        assert!(txt.contains("ok(r2) :- rule(r2), t(b), t(c)."));
    }

    #[test]
    fn external_outputs_and_value_invention() {
        let prog = p("dom(1). dom(2). dom(3). in(X) v out(X) :- dom(X). r(X) :- &diff[dom,in](X).");
        let g = ground(&prog, &BTreeSet::new(), &Registry::new(), &GroundOptions::default()).unwrap();
        // in/ out are guessed, so every subset of in(1..3) is enumerated
        assert_eq!(g.evaluations, 8);
        assert_eq!(
            g.program.rules.iter().filter(|r| r.head.first().is_some_and(|h| h.pred.as_ref() == "r")).count(),
            3
        );
        let opts = GroundOptions { ext_mode: ExtMode::Superset, ..GroundOptions::default() };
        let g2 = ground(&prog, &BTreeSet::new(), &Registry::new(), &opts).unwrap();
        assert_eq!(g2.evaluations, 1);
        assert_eq!(rendered(&g.program), rendered(&g2.program));
        let small =
            GroundOptions { limits: Limits { grounding_evals: 4, ..Limits::default() }, ..GroundOptions::default() };
        assert!(ground(&prog, &BTreeSet::new(), &Registry::new(), &small).unwrap_err().is_bound());
    }

    #[test]
    fn exact_external_when_inputs_fixed() {
        let prog = p("dom(1). dom(2). in(1). r(X) :- &diff[dom,in](X).");
        let g = ground(&prog, &BTreeSet::new(), &Registry::new(), &GroundOptions::default()).unwrap();
        assert!(rendered(&g.program).contains("r(2) :- &diff[dom,in](2)."));
        assert!(!rendered(&g.program).iter().any(|r| r.starts_with("r(1)")));
        assert!(g.certain.contains(&Atom::consts("r", &["2"])));
    }

    #[test]
    fn builtins_bind_and_filter() {
        let g = ground_program(&p("n(1). n(2). n(3). lt(X,Y) :- n(X), n(Y), X < Y. d(X,Y) :- n(X), Y = X.")).unwrap();
        assert_eq!(g.rules.iter().filter(|r| r.head[0].pred.as_ref() == "lt").count(), 3);
        assert_eq!(g.rules.iter().filter(|r| r.head[0].pred.as_ref() == "d").count(), 3);
    }

    #[test]
    fn depth_cap() {
        let opts = GroundOptions { limits: Limits { term_depth: 2, ..Limits::default() }, ..GroundOptions::default() };
        let prog = p("n(z). n(s(X)) :- n(X).");
        assert!(ground(&prog, &BTreeSet::new(), &Registry::new(), &opts).unwrap_err().is_bound());
    }

    #[test]
    fn strata_order() {
        let s = strata(&p("a :- b. b :- c. c :- not d. d :- e."));
        let pos = |x: &str| s.iter().position(|c| c.iter().any(|y| y.as_ref() == x)).unwrap();
        assert!(pos("e") < pos("d") && pos("d") < pos("c") && pos("c") < pos("b") && pos("b") < pos("a"));
    }
}
