//! Inconsistency reasons and their extraction from level-0 conflicts.

use std::collections::BTreeSet;
use std::fmt;

use crate::ast::*;
use crate::cdnl::{sign_of, var_of, Lit, Solver, SolverOptions};
use crate::error::{Error, Result};
use crate::externals::Registry;
use crate::grounder::pog;
use crate::nogoods::{Nogood, SLit};
use crate::refsem::RefSem;

/// A pair `(R+, R-)` over an input domain.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InconsistencyReason {
    pub r_plus: BTreeSet<Atom>,
    pub r_minus: BTreeSet<Atom>,
}

impl InconsistencyReason {
    pub fn new(r_plus: BTreeSet<Atom>, r_minus: BTreeSet<Atom>) -> InconsistencyReason {
        InconsistencyReason { r_plus, r_minus }
    }

    /// Disjoint and within `d`.
    pub fn is_well_formed(&self, d: &BTreeSet<Atom>) -> bool {
        self.r_plus.is_disjoint(&self.r_minus) && self.r_plus.is_subset(d) && self.r_minus.is_subset(d)
    }

    pub fn size(&self) -> usize {
        self.r_plus.len() + self.r_minus.len()
    }
}

impl fmt::Display for InconsistencyReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "+{} -{}", render_set(&self.r_plus), render_set(&self.r_minus))
    }
}

/// Result of inconsistency analysis on a solver whose search ended on level 0.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub ir: InconsistencyReason,
    /// Initially violated nogood.
    pub start: Nogood,
    /// Resolution steps: (reason nogood, pivot atom).
    pub steps: Vec<(Nogood, Atom)>,
    /// Final nogood, over domain atoms only.
    pub result: Nogood,
}

/// Resolves the violated nogood with trail reasons until only `d`-literals
/// that agree with the input facts remain. A domain literal assigned against
/// its input value was derived by the program and is resolved further.
pub fn analyze_inconsistency(d: &BTreeSet<Atom>, s: &Solver, conflict: u32) -> Result<Analysis> {
    let e = &s.engine;
    let input = |l: Lit| {
        let a = s.atom(var_of(l));
        d.contains(a) && sign_of(l) == s.facts().contains(a)
    };
    let mut start = conflict;
    // the violated nogood may be the input assumption itself (`x ∈ F` while the
    // program derived `F x`): start from the reason of the derived literal
    if let [l] = e.nogood(conflict) {
        if d.contains(s.atom(var_of(*l))) && !input(*l) {
            if let Some(r) = e.reason_of(var_of(*l)) {
                start = r;
            }
        }
    }
    let mut delta: BTreeSet<Lit> = e.nogood(start).iter().copied().collect();
    let mut steps = Vec::new();
    loop {
        let pick = delta.iter().copied().filter(|&l| !input(l)).max_by_key(|&l| e.trail_position(var_of(l)));
        let Some(l) = pick else { break };
        let v = var_of(l);
        debug_assert_eq!(e.lit_value(l), 1);
        let r = e
            .reason_of(v)
            .ok_or_else(|| Error::Invalid(format!("guessed literal {} in level-0 analysis", s.to_slit(l))))?;
        delta.remove(&l);
        delta.extend(e.nogood(r).iter().copied().filter(|&q| var_of(q) != v));
        steps.push((s.nogood_symbolic(r), s.atom(v).clone()));
    }
    let mut ir = InconsistencyReason::default();
    for &l in &delta {
        let a = s.atom(var_of(l)).clone();
        if sign_of(l) {
            ir.r_plus.insert(a);
        } else {
            ir.r_minus.insert(a);
        }
    }
    let result = Nogood::new(delta.iter().map(|&l| s.to_slit(l)).collect());
    Ok(Analysis { ir, start: s.nogood_symbolic(start), steps, result })
}

/// Replays the resolution chain of an analysis; `true` iff it reproduces the result.
pub fn replay(a: &Analysis) -> bool {
    let mut cur: BTreeSet<SLit> = a.start.0.iter().cloned().collect();
    for (ng, pivot) in &a.steps {
        let Some(p) = cur.iter().find(|l| &l.atom == pivot).cloned() else { return false };
        if !ng.0.contains(&p.negate()) {
            return false;
        }
        cur.remove(&p);
        cur.extend(ng.0.iter().filter(|l| &l.atom != pivot).cloned());
    }
    cur.into_iter().collect::<Vec<_>>()
        == a.result.0.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect::<Vec<_>>()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnalysisOutcome {
    AnswerSet(BTreeSet<Atom>),
    Ir(InconsistencyReason),
    /// The reason mentions a primed atom and cannot be lifted.
    NotLiftable(InconsistencyReason),
}

/// Solves ground `p ∪ facts(f)`; on inconsistency returns an IR w.r.t. `d`.
pub fn analyze_with_solver(
    p: &Program,
    f: &BTreeSet<Atom>,
    d: &BTreeSet<Atom>,
    reg: &Registry,
    opts: &SolverOptions,
) -> Result<AnalysisOutcome> {
    if let Some(a) = f.iter().find(|a| !d.contains(*a)) {
        return Err(Error::Invalid(format!("fact {a} outside the domain")));
    }
    let heads = p.heads();
    if let Some(a) = d.iter().find(|a| heads.contains(*a)) {
        return Err(Error::DomainInHeads(a.to_string()));
    }
    let mut s = Solver::with_atoms(p, f, d, reg, opts)?;
    match s.search()? {
        Ok(m) => Ok(AnalysisOutcome::AnswerSet(m)),
        Err(Some(ci)) => Ok(AnalysisOutcome::Ir(analyze_inconsistency(d, &s, ci)?.ir)),
        Err(None) => Err(Error::Invalid("solver exhausted without a conflict".into())),
    }
}

pub fn prime(a: &Atom) -> Atom {
    Atom::new("prime", vec![a.to_term()])
}

/// Lifts analysis to a non-ground program: analyzes `pog(p, f, c)` plus
/// `a :- prime(a)` for each of its non-auxiliary atoms over `d ∪ primes`.
pub fn analyze_nonground(
    p: &Program,
    f: &BTreeSet<Atom>,
    d: &BTreeSet<Atom>,
    c: &BTreeSet<Term>,
    reg: &Registry,
    opts: &SolverOptions,
) -> Result<AnalysisOutcome> {
    let g = pog(p, f, c)?;
    let atoms = atoms_of(&g)?;
    let mut ext = g.clone();
    let mut dom = d.clone();
    // constraint auxiliaries are not atoms of the input program
    for a in atoms.iter().filter(|a| !a.is_aux()) {
        let pa = prime(a);
        ext.rules.push(Rule::normal(a.clone(), vec![pa.clone()], vec![]));
        dom.insert(pa);
    }
    let facts_free = Program::new(ext.rules.into_iter().filter(|r| !(r.is_fact() && f.contains(&r.head[0]))).collect());
    let mut s = Solver::with_atoms(&facts_free, f, &dom, reg, opts)?;
    match s.search()? {
        Ok(m) => Ok(AnalysisOutcome::AnswerSet(m.into_iter().filter(|a| a.pred.as_ref() != "prime").collect())),
        Err(Some(ci)) => {
            let ir = analyze_inconsistency(&dom, &s, ci)?.ir;
            let primed = |x: &Atom| x.pred.as_ref() == "prime" && !d.contains(x);
            if ir.r_plus.iter().chain(&ir.r_minus).any(primed) {
                Ok(AnalysisOutcome::NotLiftable(ir))
            } else {
                Ok(AnalysisOutcome::Ir(ir))
            }
        }
        Err(None) => Err(Error::Invalid("solver exhausted without a conflict".into())),
    }
}

/// Greedy one-literal shrinking, each step validated by the brute-force oracle.
pub fn minimize_ir(
    p: &Program,
    d: &BTreeSet<Atom>,
    ir: &InconsistencyReason,
    oracle: &RefSem,
) -> Result<InconsistencyReason> {
    let mut cur = ir.clone();
    loop {
        let mut shrunk = false;
        let cands: Vec<(bool, Atom)> = cur
            .r_plus
            .iter()
            .map(|a| (true, a.clone()))
            .chain(cur.r_minus.iter().map(|a| (false, a.clone())))
            .collect();
        for (plus, a) in cands {
            let mut t = cur.clone();
            if plus {
                t.r_plus.remove(&a);
            } else {
                t.r_minus.remove(&a);
            }
            if oracle.is_ir(p, d, &t)? {
                cur = t;
                shrunk = true;
                break;
            }
        }
        if !shrunk {
            return Ok(cur);
        }
    }
}
