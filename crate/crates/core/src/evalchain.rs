//! Evaluation of a program split into a list of units.
//!
//! Three modes:
//! - monolithic: ground the whole program at once, then solve;
//! - splitting: solve unit by unit, feeding each answer set of a unit into the
//!   next one as facts;
//! - tuprop: splitting plus trans-unit propagation. When a unit is
//!   inconsistent for some input, an inconsistency reason over the atoms of
//!   its predecessors is turned into a constraint and installed in the
//!   earliest unit that defines all of its atoms. Live solvers of that unit
//!   pick it up before producing their next answer set.
//!
//! Under tuprop a unit is grounded independently of its input (all
//! predecessor atoms are possible, externals use output supersets), so the
//! reasons found by the solver hold for every input, not only the current one.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::ast::*;
use crate::cdnl::{Solver, SolverOptions};
use crate::error::{Error, Result};
use crate::externals::Registry;
use crate::grounder::{ground, ExtMode, GroundOptions};
use crate::increason::{analyze_inconsistency, InconsistencyReason};
use crate::nogoods::SLit;
use crate::refsem::{Interpretation, RefSem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Monolithic,
    Splitting,
    TuProp,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Monolithic, Mode::Splitting, Mode::TuProp];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Monolithic => "monolithic",
            Mode::Splitting => "splitting",
            Mode::TuProp => "tuprop",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "monolithic" => Ok(Mode::Monolithic),
            "split" | "splitting" => Ok(Mode::Splitting),
            "tuprop" | "tu-propagation" => Ok(Mode::TuProp),
            _ => Err(Error::Invalid(format!("unknown evaluation mode `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct UnitCounters {
    pub groundings: u64,
    pub solves: u64,
    pub conflicts: u64,
}

/// A constraint produced by trans-unit propagation.
#[derive(Clone, Debug)]
pub struct Learned {
    /// Unit whose inconsistency was analyzed.
    pub from: usize,
    /// Unit the constraint was installed in.
    pub host: usize,
    pub ir: InconsistencyReason,
    pub constraint: Rule,
    /// Analysis domain: input facts plus atoms defined before `from`.
    pub domain: BTreeSet<Atom>,
    /// Constraints hosted by `from` at analysis time (part of the analyzed program).
    pub context: Vec<Rule>,
}

#[derive(Clone, Debug)]
pub struct EvaluationChain {
    pub units: Vec<Program>,
    /// Heads of each unit's input-independent grounding (set by [`EvaluationChain::prepare`]).
    pub defined_atoms: Vec<BTreeSet<Atom>>,
    pub learned_constraints: Vec<Vec<Rule>>,
    pub counters: Vec<UnitCounters>,
    /// Counters of the last monolithic run.
    pub monolithic: UnitCounters,
    pub learned: Vec<Learned>,
    input: BTreeSet<Atom>,
}

impl EvaluationChain {
    /// Validates acyclicity and builds a chain from explicit units.
    pub fn new(units: Vec<Program>) -> Result<EvaluationChain> {
        check_acyclic(&units)?;
        let n = units.len();
        Ok(EvaluationChain {
            units,
            defined_atoms: vec![BTreeSet::new(); n],
            learned_constraints: vec![Vec::new(); n],
            counters: vec![UnitCounters::default(); n],
            monolithic: UnitCounters::default(),
            learned: Vec::new(),
            input: BTreeSet::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// All units as one program.
    pub fn flatten(&self) -> Program {
        let mut p = Program::new(self.units.iter().flat_map(|u| u.rules.iter().cloned()).collect());
        for u in &self.units {
            for d in &u.external_decls {
                if !p.external_decls.contains(d) {
                    p.external_decls.push(d.clone());
                }
            }
        }
        p
    }

    /// Clears counters and learned constraints.
    pub fn reset(&mut self) {
        let n = self.units.len();
        self.learned_constraints = vec![Vec::new(); n];
        self.counters = vec![UnitCounters::default(); n];
        self.monolithic = UnitCounters::default();
        self.learned.clear();
    }

    /// Computes `defined_atoms` for input facts `f` by grounding every unit with all
    /// atoms of its predecessors (and `f`) possible.
    pub fn prepare(&mut self, f: &BTreeSet<Atom>, reg: &Registry, limits: &crate::Limits) -> Result<()> {
        self.input = f.clone();
        let mut known = f.clone();
        for i in 0..self.units.len() {
            let g = ground_generic(&self.units[i], &[], &known, reg, limits)?;
            let defined: BTreeSet<Atom> = g.heads().difference(&known).cloned().collect();
            known.extend(defined.iter().cloned());
            self.defined_atoms[i] = defined;
        }
        Ok(())
    }

    /// Input facts plus all atoms defined in units before `i`.
    pub fn domain(&self, i: usize) -> BTreeSet<Atom> {
        let mut d = self.input.clone();
        for s in &self.defined_atoms[..i] {
            d.extend(s.iter().cloned());
        }
        d
    }

    /// Total (groundings + solves) over all units; monolithic runs use their own counters.
    pub fn total_work(&self, mode: Mode) -> u64 {
        match mode {
            Mode::Monolithic => self.monolithic.groundings + self.monolithic.solves,
            _ => self.counters.iter().map(|c| c.groundings + c.solves).sum(),
        }
    }
}

fn ground_generic(
    unit: &Program,
    extra: &[Rule],
    possible: &BTreeSet<Atom>,
    reg: &Registry,
    limits: &crate::Limits,
) -> Result<Program> {
    let mut u = unit.clone();
    u.rules.extend(extra.iter().cloned());
    let opts = GroundOptions {
        limits: limits.clone(),
        ext_mode: ExtMode::Superset,
        seed_possible: possible.clone(),
        ..Default::default()
    };
    Ok(ground(&u, &BTreeSet::new(), reg, &opts)?.program)
}

fn predicates_used(p: &Program) -> BTreeSet<Symbol> {
    let mut out = BTreeSet::new();
    for r in &p.rules {
        out.extend(r.head.iter().map(|a| a.pred.clone()));
        for l in &r.body {
            match &l.kind {
                LitKind::Ordinary(a) => {
                    out.insert(a.pred.clone());
                }
                LitKind::External(e) => out.extend(e.inputs.iter().cloned()),
                LitKind::Conditional(c) => {
                    out.insert(c.lit.pred.clone());
                    out.insert(c.cond.pred.clone());
                }
                LitKind::Query(q) => out.extend(q.inputs.iter().cloned()),
                LitKind::Builtin(..) => {}
            }
        }
    }
    out
}

/// No unit may define a predicate used by an earlier unit.
pub fn check_acyclic(units: &[Program]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (j, u) in units.iter().enumerate() {
        let defined: BTreeSet<Symbol> = u.rules.iter().flat_map(|r| r.head.iter().map(|a| a.pred.clone())).collect();
        if let Some(p) = defined.intersection(&seen).next() {
            return Err(Error::Cyclic(format!("unit {} defines `{p}`, which an earlier unit already uses", j + 1)));
        }
        seen.extend(predicates_used(u));
    }
    Ok(())
}

fn value_inventing_nonmonotone(r: &Rule, reg: &Registry) -> bool {
    r.body.iter().any(|l| match &l.kind {
        LitKind::External(e) => {
            !e.outputs.iter().all(Term::is_ground) && reg.get(&e.name).map(|d| !d.monotone).unwrap_or(true)
        }
        _ => false,
    })
}

/// Splits at `#split` markers. Without markers, cuts right before the first rule
/// whose body has a nonmonotone external atom with output variables; if that cut
/// would break acyclicity the program stays a single unit.
pub fn split_program(p: &Program, reg: &Registry) -> Result<EvaluationChain> {
    let slice = |cuts: &[usize]| -> Vec<Program> {
        let mut bounds = vec![0];
        bounds.extend(cuts.iter().copied());
        bounds.push(p.rules.len());
        bounds
            .windows(2)
            .filter(|w| w[0] < w[1])
            .map(|w| {
                let mut u = Program::new(p.rules[w[0]..w[1]].to_vec());
                u.external_decls = p.external_decls.clone();
                u
            })
            .collect()
    };
    if !p.unit_markers.is_empty() {
        let mut cuts = p.unit_markers.clone();
        cuts.sort_unstable();
        cuts.dedup();
        return EvaluationChain::new(slice(&cuts));
    }
    let cut = p.rules.iter().position(|r| value_inventing_nonmonotone(r, reg)).filter(|&i| i > 0);
    if let Some(c) = cut {
        let units = slice(&[c]);
        if check_acyclic(&units).is_ok() {
            return EvaluationChain::new(units);
        }
    }
    EvaluationChain::new(slice(&[]))
}

fn constraint_of(ir: &InconsistencyReason) -> Rule {
    Rule::constraint(
        ir.r_plus
            .iter()
            .cloned()
            .map(BodyLiteral::pos)
            .chain(ir.r_minus.iter().cloned().map(BodyLiteral::neg))
            .collect(),
    )
}

fn constraint_lits(r: &Rule) -> Vec<SLit> {
    r.body
        .iter()
        .filter_map(|l| {
            let a = l.ordinary()?.clone();
            Some(if l.polarity == Polarity::Pos { SLit::t(a) } else { SLit::f(a) })
        })
        .collect()
}

struct Run<'a> {
    chain: &'a mut EvaluationChain,
    mode: Mode,
    reg: &'a Registry,
    opts: &'a SolverOptions,
    domains: Vec<BTreeSet<Atom>>,
}

impl Run<'_> {
    fn instantiate(&mut self, i: usize, input: &BTreeSet<Atom>) -> Result<Solver> {
        let c = &mut self.chain.counters[i];
        c.groundings += 1;
        c.solves += 1;
        let unit = &self.chain.units[i];
        let limits = &self.opts.limits;
        let mut s = if self.mode == Mode::TuProp {
            let g = ground_generic(unit, &[], &self.domains[i], self.reg, limits)?;
            Solver::with_atoms(&g, input, &self.domains[i], self.reg, self.opts)?
        } else {
            let opts = GroundOptions { limits: limits.clone(), ..Default::default() };
            let g = ground(unit, input, self.reg, &opts)?;
            Solver::new(&g.program, &BTreeSet::new(), self.reg, self.opts)?
        };
        for r in &self.chain.learned_constraints[i] {
            s.add_constraint(&constraint_lits(r));
        }
        Ok(s)
    }

    fn visit(&mut self, i: usize, input: BTreeSet<Atom>, out: &mut BTreeSet<Interpretation>) -> Result<()> {
        let mut s = self.instantiate(i, &input)?;
        let mut installed = self.chain.learned_constraints[i].len();
        let mut found = false;
        loop {
            match s.search()? {
                Ok(m) => {
                    found = true;
                    if i + 1 == self.chain.units.len() {
                        out.insert(m);
                    } else {
                        self.visit(i + 1, m, out)?;
                    }
                    while installed < self.chain.learned_constraints[i].len() {
                        s.add_constraint(&constraint_lits(&self.chain.learned_constraints[i][installed]));
                        installed += 1;
                    }
                }
                Err(conflict) => {
                    if let (false, Mode::TuProp, true, Some(ci)) = (found, self.mode, i > 0, conflict) {
                        self.propagate(i, &s, ci)?;
                    }
                    break;
                }
            }
        }
        self.chain.counters[i].conflicts += s.engine.stats.conflicts;
        Ok(())
    }

    fn propagate(&mut self, i: usize, s: &Solver, conflict: u32) -> Result<()> {
        let d = &self.domains[i];
        let ir = analyze_inconsistency(d, s, conflict)?.ir;
        let atoms: BTreeSet<&Atom> = ir.r_plus.iter().chain(&ir.r_minus).collect();
        // earliest unit whose prefix defines every atom of the constraint
        let host = (0..i)
            .find(|&h| atoms.iter().all(|a| self.domains[h + 1].contains(*a)))
            .expect("reason atoms lie in the analysis domain");
        let c = constraint_of(&ir);
        if self.chain.learned_constraints[host].contains(&c) {
            return Ok(());
        }
        self.chain.learned.push(Learned {
            from: i,
            host,
            ir,
            constraint: c.clone(),
            domain: d.clone(),
            context: self.chain.learned_constraints[i].clone(),
        });
        self.chain.learned_constraints[host].push(c);
        Ok(())
    }
}

/// Answer sets of the chain's program plus facts `f` (auxiliary atoms projected away).
/// Counters and learned constraints are reset first.
pub fn evaluate_chain(
    chain: &mut EvaluationChain,
    f: &BTreeSet<Atom>,
    mode: Mode,
    reg: &Registry,
    opts: &SolverOptions,
) -> Result<BTreeSet<Interpretation>> {
    chain.reset();
    if mode == Mode::Monolithic {
        let gopts = GroundOptions { limits: opts.limits.clone(), ..Default::default() };
        chain.monolithic.groundings += 1;
        let g = ground(&chain.flatten(), f, reg, &gopts)?;
        chain.monolithic.solves += 1;
        let mut s = Solver::new(&g.program, &BTreeSet::new(), reg, opts)?;
        let models = s.all_models()?;
        chain.monolithic.conflicts += s.engine.stats.conflicts;
        return Ok(models.into_iter().map(|m| project(&m)).collect());
    }
    chain.prepare(f, reg, &opts.limits)?;
    let domains = (0..=chain.len()).map(|i| chain.domain(i)).collect();
    let mut out = BTreeSet::new();
    if chain.is_empty() {
        out.insert(f.clone());
        return Ok(out);
    }
    let mut run = Run { chain, mode, reg, opts, domains };
    run.visit(0, f.clone(), &mut out)?;
    Ok(out.into_iter().map(|m| project(&m)).collect())
}

/// Solves unit `i` (`i ≥ 1`) under `input` with an input-independent grounding. If it
/// is inconsistent, installs the constraint of its inconsistency reason and returns it.
pub fn tu_propagate(
    chain: &mut EvaluationChain,
    i: usize,
    input: &BTreeSet<Atom>,
    reg: &Registry,
    opts: &SolverOptions,
) -> Result<Option<Learned>> {
    if i == 0 || i >= chain.len() {
        return Err(Error::Invalid(format!("unit {i} has no predecessor to propagate to")));
    }
    let domains = (0..=chain.len()).map(|k| chain.domain(k)).collect();
    let mut run = Run { chain, mode: Mode::TuProp, reg, opts, domains };
    let mut s = run.instantiate(i, input)?;
    match s.search()? {
        Ok(_) => Ok(None),
        Err(None) => Err(Error::Invalid("solver exhausted without a conflict".into())),
        Err(Some(ci)) => {
            let before = run.chain.learned.len();
            run.propagate(i, &s, ci)?;
            Ok(run.chain.learned.get(before).cloned())
        }
    }
}

/// Exhaustive check that a learned constraint preserves answer sets of the
/// analyzed unit for every fact set over the analysis domain.
pub fn check_learned(chain: &EvaluationChain, l: &Learned, reg: &Registry, oracle: &RefSem) -> Result<bool> {
    let d: Vec<Atom> = l.domain.iter().cloned().collect();
    if d.len() > oracle.limits.ir_domain {
        return Err(Error::Bound { name: "ir_domain", limit: oracle.limits.ir_domain });
    }
    let base = ground_generic(&chain.units[l.from], &l.context, &l.domain, reg, &oracle.limits)?;
    let mut with = base.clone();
    with.rules.push(l.constraint.clone());
    for mask in 0u64..1 << d.len() {
        let f: BTreeSet<Atom> =
            d.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, a)| a.clone()).collect();
        if oracle.answer_sets_projected(&base, &f)? != oracle.answer_sets_projected(&with, &f)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{committee, gen_setguess};
    use crate::parser::parse_program;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    fn all_modes(p: &Program, reg: &Registry) -> Vec<BTreeSet<Interpretation>> {
        let mut chain = split_program(p, reg).unwrap();
        Mode::ALL.iter().map(|&m| evaluate_chain(&mut chain, &BTreeSet::new(), m, reg, &opts()).unwrap()).collect()
    }

    #[test]
    fn committee_partition() {
        let c = committee();
        let chain = split_program(&c.program, &c.registry()).unwrap();
        assert_eq!(chain.len(), 2);
        let tail: Vec<String> = chain.units[0].rules.iter().rev().take(2).map(|r| r.to_string()).collect();
        assert_eq!(tail, [":- in(X), in(Y), conflict(X,Y).", "in(X) v out(X) :- person(X)."]);
        assert_eq!(chain.units[1].rules.len(), 2);
    }

    #[test]
    fn unmarked_ordinary_program_is_one_unit() {
        let p = parse_program("a :- not b. b :- not a.").unwrap();
        assert_eq!(split_program(&p, &Registry::new()).unwrap().len(), 1);
    }

    #[test]
    fn setguess_cut_before_external_rule() {
        let chain = split_program(&gen_setguess(3), &Registry::new()).unwrap();
        assert_eq!(chain.len(), 2);
        assert_eq!(chain.units[1].rules[0].to_string(), "r(X) :- &diff[dom,in](X).");
    }

    #[test]
    fn marker_cycle_is_an_error() {
        let p = parse_program("a :- b. #split. b :- c.").unwrap();
        assert!(matches!(split_program(&p, &Registry::new()), Err(Error::Cyclic(_))));
    }

    #[test]
    fn setguess_three_modes() {
        let sets = all_modes(&gen_setguess(3), &Registry::new());
        assert_eq!(sets[0].len(), 2);
        assert_eq!(sets[0], sets[1]);
        assert_eq!(sets[0], sets[2]);
    }

    #[test]
    fn committee_modes_agree_with_oracle() {
        let c = committee();
        let reg = c.registry();
        let sets = all_modes(&c.program, &reg);
        assert_eq!(sets[0], sets[1]);
        assert_eq!(sets[0], sets[2]);
        let flat =
            crate::grounder::ground(&c.program, &BTreeSet::new(), &reg, &GroundOptions::default()).unwrap().program;
        let oracle = RefSem { reg: reg.clone(), ..RefSem::default() };
        assert_eq!(sets[0], oracle.answer_sets_projected(&flat, &BTreeSet::new()).unwrap());
        assert!(!sets[0].is_empty());
    }

    #[test]
    fn single_unit_splitting_is_monolithic() {
        let p = parse_program("a :- not b. b :- not a. c :- a.").unwrap();
        let sets = all_modes(&p, &Registry::new());
        assert_eq!(sets[0], sets[1]);
        assert_eq!(sets[1], sets[2]);
    }

    #[test]
    fn committee_example_reason() {
        let c = committee();
        let reg = c.registry();
        let mut chain = split_program(&c.program, &reg).unwrap();
        chain.prepare(&BTreeSet::new(), &reg, &opts().limits).unwrap();
        let input: BTreeSet<Atom> = chain.units[0]
            .rules
            .iter()
            .filter(|r| r.is_fact())
            .map(|r| r.head[0].clone())
            .chain(["jack", "joseph"].map(|x| Atom::consts("in", &[x])))
            .chain(["alyson", "joe", "sue"].map(|x| Atom::consts("out", &[x])))
            .collect();
        let l = tu_propagate(&mut chain, 1, &input, &reg, &opts()).unwrap().expect("inconsistent");
        let expected: BTreeSet<Atom> = ["alyson", "joe", "sue"].map(|x| Atom::consts("in", &[x])).into_iter().collect();
        assert!(l.ir.r_plus.is_empty());
        assert_eq!(l.ir.r_minus, expected);
        assert_eq!(l.constraint.to_string(), ":- not in(alyson), not in(joe), not in(sue).");
        assert_eq!(l.host, 0);
        assert_eq!(chain.learned_constraints[0], vec![l.constraint.clone()]);
    }

    #[test]
    fn setguess_learned_constraints_are_safe() {
        let p = gen_setguess(2);
        let reg = Registry::new();
        let mut chain = split_program(&p, &reg).unwrap();
        evaluate_chain(&mut chain, &BTreeSet::new(), Mode::TuProp, &reg, &opts()).unwrap();
        assert!(!chain.learned.is_empty());
        let oracle = RefSem::default();
        for l in &chain.learned {
            assert_eq!(l.host, 0);
            assert!(check_learned(&chain, l, &reg, &oracle).unwrap(), "{}", l.constraint);
        }
    }

    #[test]
    fn setguess_counters() {
        let reg = Registry::new();
        for n in 3..=6 {
            let mut chain = split_program(&gen_setguess(n), &reg).unwrap();
            evaluate_chain(&mut chain, &BTreeSet::new(), Mode::Splitting, &reg, &opts()).unwrap();
            assert_eq!(chain.counters[1].solves, 1 << n);
            evaluate_chain(&mut chain, &BTreeSet::new(), Mode::TuProp, &reg, &opts()).unwrap();
            assert!(chain.counters[1].solves < 1 << n);
        }
    }
}
