//! Conflict-driven nogood learning for ground programs with external atoms.
//!
//! [`Engine`] is a propositional nogood solver: watched literals, first-UIP
//! learning that keeps level-0 literals (so learned nogoods remain resolvents
//! usable by inconsistency analysis), no restarts, no deletion, and a fixed
//! decision order (smallest unassigned variable, `F` first).
//!
//! [`Solver`] sits on top. It builds the guessing program, translates it to
//! nogoods, checks compatibility of replacement atoms and minimality on
//! complete assignments, learns input/output nogoods from external
//! evaluations, and enumerates answer sets.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::ast::*;
use crate::error::{Error, Result};
use crate::externals::Registry;
use crate::limits::Limits;
use crate::nogoods::{body_key, clark_completion_with, Completion, Nogood, SLit};

/// `T v` is `2v`, `F v` is `2v + 1`.
pub type Lit = u32;

pub fn mk_lit(var: u32, sign: bool) -> Lit {
    (var << 1) | (!sign) as u32
}

pub fn var_of(l: Lit) -> u32 {
    l >> 1
}

pub fn sign_of(l: Lit) -> bool {
    l & 1 == 0
}

const NO_REASON: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Input,
    Learned,
    Added,
}

#[derive(Clone, Debug, Default)]
pub struct Stats {
    pub decisions: u64,
    pub conflicts: u64,
    pub learned: u64,
    pub added: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Added {
    /// Stored; no assignment changed.
    Stored,
    /// Stored and its complement literal was asserted (possibly after backjumping).
    Asserted,
    /// Violated with at least two literals on the (new) current level.
    Conflict(u32),
    /// Tautological; dropped.
    Ignored,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchResult {
    Model,
    /// Conflict on decision level 0; the index names the violated nogood.
    Unsat(u32),
}

/// Hooks into the search loop.
pub trait Theory {
    /// Called at every propagation fixpoint; returned nogoods are added.
    fn on_fixpoint(&mut self, _e: &Engine) -> Result<Vec<Vec<Lit>>> {
        Ok(vec![])
    }
    /// Called on complete assignments. Returning no nogoods accepts the assignment;
    /// otherwise at least one returned nogood must be violated.
    fn on_total(&mut self, e: &Engine) -> Result<Vec<Vec<Lit>>>;
}

pub struct NoTheory;

impl Theory for NoTheory {
    fn on_total(&mut self, _e: &Engine) -> Result<Vec<Vec<Lit>>> {
        Ok(vec![])
    }
}

/// One resolution step: the nogood used and the pivot variable.
pub type ProofStep = (u32, u32);

#[derive(Clone, Debug)]
pub struct Engine {
    val: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail_pos: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    nogoods: Vec<Vec<Lit>>,
    origin: Vec<Origin>,
    watches: Vec<Vec<u32>>,
    seen: Vec<bool>,
    dec_ptr: usize,
    /// Resolution chains for learned nogoods: (conflict nogood, steps).
    pub proofs: Option<HashMap<u32, (u32, Vec<ProofStep>)>>,
    pub stats: Stats,
    pub conflict_limit: u64,
}

impl Engine {
    pub fn new(n_vars: usize) -> Engine {
        Engine {
            val: vec![0; n_vars],
            level: vec![0; n_vars],
            reason: vec![NO_REASON; n_vars],
            trail_pos: vec![0; n_vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            nogoods: Vec::new(),
            origin: Vec::new(),
            watches: vec![Vec::new(); 2 * n_vars],
            seen: vec![false; n_vars],
            dec_ptr: 0,
            proofs: None,
            stats: Stats::default(),
            conflict_limit: 0,
        }
    }

    pub fn record_proofs(&mut self) {
        self.proofs = Some(HashMap::new());
    }

    pub fn num_vars(&self) -> usize {
        self.val.len()
    }

    pub fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    pub fn value(&self, v: u32) -> Option<bool> {
        match self.val[v as usize] {
            0 => None,
            x => Some(x > 0),
        }
    }

    /// 1 if the literal holds, -1 if its complement holds, 0 if unassigned.
    pub fn lit_value(&self, l: Lit) -> i8 {
        lit_val(&self.val, l)
    }

    pub fn level_of(&self, v: u32) -> u32 {
        self.level[v as usize]
    }

    pub fn reason_of(&self, v: u32) -> Option<u32> {
        match self.reason[v as usize] {
            NO_REASON => None,
            r => Some(r),
        }
    }

    pub fn trail(&self) -> &[Lit] {
        &self.trail
    }

    pub fn trail_position(&self, v: u32) -> u32 {
        self.trail_pos[v as usize]
    }

    pub fn nogood(&self, i: u32) -> &[Lit] {
        &self.nogoods[i as usize]
    }

    pub fn origin(&self, i: u32) -> Origin {
        self.origin[i as usize]
    }

    pub fn num_nogoods(&self) -> usize {
        self.nogoods.len()
    }

    pub fn is_complete(&self) -> bool {
        self.trail.len() == self.val.len()
    }

    fn assign(&mut self, l: Lit, reason: u32) {
        let v = var_of(l) as usize;
        debug_assert_eq!(self.val[v], 0);
        self.val[v] = if sign_of(l) { 1 } else { -1 };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail_pos[v] = self.trail.len() as u32;
        self.trail.push(l);
        #[cfg(debug_assertions)]
        if reason != NO_REASON {
            self.check_unit(reason, l);
        }
    }

    /// Trail invariant: every other literal of the reason is true and none is
    /// above the implied literal's level.
    #[cfg(debug_assertions)]
    fn check_unit(&self, reason: u32, implied: Lit) {
        let mut max = 0;
        for &q in &self.nogoods[reason as usize] {
            if var_of(q) == var_of(implied) {
                assert_eq!(q, implied ^ 1, "reason must contain the complement of the implied literal");
                continue;
            }
            assert_eq!(self.lit_value(q), 1, "reason not unit at assert time");
            max = max.max(self.level_of(var_of(q)));
        }
        assert_eq!(max, self.decision_level(), "implied literal not at the maximum level of its implicants");
    }

    /// Pushes a decision literal on a new level.
    pub fn decide(&mut self, l: Lit) {
        self.stats.decisions += 1;
        self.trail_lim.push(self.trail.len());
        self.assign(l, NO_REASON);
    }

    pub fn backjump(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let keep = self.trail_lim[lvl as usize];
        for &l in &self.trail[keep..] {
            let v = var_of(l) as usize;
            self.val[v] = 0;
            self.reason[v] = NO_REASON;
            self.dec_ptr = self.dec_ptr.min(v);
        }
        self.trail.truncate(keep);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = self.trail.len();
    }

    fn store(&mut self, lits: Vec<Lit>, origin: Origin) -> u32 {
        let idx = self.nogoods.len() as u32;
        if lits.len() >= 2 {
            self.watches[lits[0] as usize].push(idx);
            self.watches[lits[1] as usize].push(idx);
        }
        self.nogoods.push(lits);
        self.origin.push(origin);
        idx
    }

    /// Adds a nogood given before search starts.
    pub fn add_input(&mut self, lits: Vec<Lit>) -> Added {
        self.add(lits, Origin::Input)
    }

    /// Adds a nogood in any solver state, restoring watch and trail invariants.
    pub fn add_nogood(&mut self, lits: Vec<Lit>) -> Added {
        self.stats.added += 1;
        self.add(lits, Origin::Added)
    }

    fn add(&mut self, mut lits: Vec<Lit>, origin: Origin) -> Added {
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] ^ 1 == w[1]) {
            return Added::Ignored;
        }
        if lits.is_empty() {
            self.backjump(0);
            let idx = self.store(lits, origin);
            return Added::Conflict(idx);
        }
        if lits.len() == 1 {
            let l = lits[0];
            if self.lit_value(l) == -1 && self.level_of(var_of(l)) == 0 {
                self.store(lits, origin);
                return Added::Stored;
            }
            self.backjump(0);
            let idx = self.store(lits, origin);
            if self.lit_value(l) == 1 {
                return Added::Conflict(idx);
            }
            self.assign(l ^ 1, idx);
            return Added::Asserted;
        }
        // Non-true literals first (unassigned, then false by descending level),
        // then true literals by descending level.
        let rank = |e: &Engine, l: Lit| -> (u8, i64) {
            match e.lit_value(l) {
                0 => (0, 0),
                -1 => (1, -(e.level_of(var_of(l)) as i64)),
                _ => (2, -(e.level_of(var_of(l)) as i64)),
            }
        };
        lits.sort_by_key(|&l| rank(self, l));
        let non_true = lits.iter().take_while(|&&l| self.lit_value(l) != 1).count();
        if non_true >= 2 {
            self.store(lits, origin);
            return Added::Stored;
        }
        if non_true == 1 {
            let w = lits[0];
            let t_max = self.level_of(var_of(lits[1]));
            if self.lit_value(w) == -1 && self.level_of(var_of(w)) <= t_max {
                self.store(lits, origin);
                return Added::Stored;
            }
            self.backjump(t_max);
            let idx = self.store(lits, origin);
            self.assign(w ^ 1, idx);
            return Added::Asserted;
        }
        let lm = self.level_of(var_of(lits[0]));
        let at_max = lits.iter().filter(|&&l| self.level_of(var_of(l)) == lm).count();
        if at_max == 1 {
            let second = self.level_of(var_of(lits[1]));
            self.backjump(second);
            let w = lits[0];
            let idx = self.store(lits, origin);
            self.assign(w ^ 1, idx);
            return Added::Asserted;
        }
        self.backjump(lm);
        Added::Conflict(self.store(lits, origin))
    }

    /// Exhaustive unit propagation; returns a violated nogood if one is found.
    pub fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let l = self.trail[self.qhead];
            self.qhead += 1;
            let mut ws = std::mem::take(&mut self.watches[l as usize]);
            let mut i = 0;
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                let ng = &mut self.nogoods[ci as usize];
                if ng[0] == l {
                    ng.swap(0, 1);
                }
                let other = ng[0];
                if lit_val(&self.val, other) == -1 {
                    i += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..ng.len() {
                    if lit_val(&self.val, ng[k]) != 1 {
                        ng.swap(1, k);
                        let nw = ng[1];
                        self.watches[nw as usize].push(ci);
                        ws.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                if lit_val(&self.val, other) == 0 {
                    self.assign(other ^ 1, ci);
                    i += 1;
                } else {
                    conflict = Some(ci);
                    break;
                }
            }
            let mut rest = std::mem::take(&mut self.watches[l as usize]);
            ws.append(&mut rest);
            self.watches[l as usize] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    /// First-UIP analysis of a nogood violated on the current level (> 0).
    /// Returns the learned nogood (UIP literal first), the backjump level and the
    /// resolution steps.
    pub fn analyze(&mut self, ci: u32) -> (Vec<Lit>, u32, Vec<ProofStep>) {
        let cur = self.decision_level();
        let mut learned: Vec<Lit> = Vec::new();
        let mut steps = Vec::new();
        let mut counter = 0usize;
        let mut confl = ci;
        let mut pivot: Option<u32> = None;
        let mut idx = self.trail.len();
        let uip;
        loop {
            for k in 0..self.nogoods[confl as usize].len() {
                let q = self.nogoods[confl as usize][k];
                let v = var_of(q);
                if Some(v) == pivot || self.seen[v as usize] {
                    continue;
                }
                self.seen[v as usize] = true;
                if self.level[v as usize] == cur {
                    counter += 1;
                } else {
                    learned.push(q);
                }
            }
            loop {
                idx -= 1;
                if self.seen[var_of(self.trail[idx]) as usize] {
                    break;
                }
            }
            let p = self.trail[idx];
            let pv = var_of(p);
            self.seen[pv as usize] = false;
            counter -= 1;
            if counter == 0 {
                uip = p;
                break;
            }
            confl = self.reason[pv as usize];
            debug_assert_ne!(confl, NO_REASON);
            steps.push((confl, pv));
            pivot = Some(pv);
        }
        for &q in &learned {
            self.seen[var_of(q) as usize] = false;
        }
        let bj = learned.iter().map(|&q| self.level_of(var_of(q))).max().unwrap_or(0);
        learned.sort_by_key(|&q| std::cmp::Reverse(self.level_of(var_of(q))));
        learned.insert(0, uip);
        (learned, bj, steps)
    }

    fn learn(&mut self, ci: u32) {
        self.stats.conflicts += 1;
        let (lits, bj, steps) = self.analyze(ci);
        self.backjump(bj);
        let uip = lits[0];
        let idx = self.store(lits, Origin::Learned);
        self.stats.learned += 1;
        if let Some(p) = self.proofs.as_mut() {
            p.insert(idx, (ci, steps));
        }
        self.assign(uip ^ 1, idx);
    }

    fn next_decision(&mut self) -> Option<u32> {
        while self.dec_ptr < self.val.len() {
            if self.val[self.dec_ptr] == 0 {
                return Some(self.dec_ptr as u32);
            }
            self.dec_ptr += 1;
        }
        None
    }

    /// Conflict handling: returns `Some(Unsat)` on level 0, otherwise learns and backjumps.
    fn on_conflict(&mut self, ci: u32) -> Result<Option<SearchResult>> {
        if self.decision_level() == 0 {
            return Ok(Some(SearchResult::Unsat(ci)));
        }
        self.learn(ci);
        if self.conflict_limit > 0 && self.stats.conflicts > self.conflict_limit {
            return Err(Error::Bound { name: "conflicts", limit: self.conflict_limit as usize });
        }
        Ok(None)
    }

    /// Adds nogoods from a theory hook. Returns whether the state changed, or a final result.
    fn integrate(&mut self, ngs: Vec<Vec<Lit>>) -> Result<std::result::Result<bool, SearchResult>> {
        let mut changed = false;
        for n in ngs {
            match self.add_nogood(n) {
                Added::Stored | Added::Ignored => {}
                Added::Asserted => changed = true,
                Added::Conflict(ci) => {
                    changed = true;
                    if let Some(r) = self.on_conflict(ci)? {
                        return Ok(Err(r));
                    }
                }
            }
        }
        Ok(Ok(changed))
    }

    /// Runs the search loop until a model is accepted or a level-0 conflict occurs.
    pub fn search(&mut self, th: &mut dyn Theory) -> Result<SearchResult> {
        loop {
            if let Some(ci) = self.propagate() {
                if let Some(r) = self.on_conflict(ci)? {
                    return Ok(r);
                }
                continue;
            }
            let ngs = th.on_fixpoint(self)?;
            if !ngs.is_empty() {
                match self.integrate(ngs)? {
                    Err(r) => return Ok(r),
                    Ok(true) => continue,
                    Ok(false) => {}
                }
            }
            match self.next_decision() {
                Some(v) => self.decide(mk_lit(v, false)),
                None => {
                    let ngs = th.on_total(self)?;
                    if ngs.is_empty() {
                        return Ok(SearchResult::Model);
                    }
                    match self.integrate(ngs)? {
                        Err(r) => return Ok(r),
                        Ok(true) => {}
                        Ok(false) => {
                            return Err(Error::Invalid("theory rejected a model without a violated nogood".into()))
                        }
                    }
                }
            }
        }
    }
}

fn lit_val(val: &[i8], l: Lit) -> i8 {
    let x = val[var_of(l) as usize];
    if sign_of(l) {
        x
    } else {
        -x
    }
}

/// Replays a learned nogood's resolution chain; `true` iff it reproduces `learned`.
pub fn replay_resolution(e: &Engine, learned: u32) -> bool {
    let Some((start, steps)) = e.proofs.as_ref().and_then(|p| p.get(&learned)) else {
        return false;
    };
    let mut cur: BTreeSet<Lit> = e.nogood(*start).iter().copied().collect();
    for &(ng, pivot) in steps {
        let other: BTreeSet<Lit> = e.nogood(ng).iter().copied().collect();
        let pos = cur.iter().copied().find(|&l| var_of(l) == pivot);
        let neg = other.iter().copied().find(|&l| var_of(l) == pivot);
        match (pos, neg) {
            (Some(a), Some(b)) if a ^ 1 == b => {
                cur.remove(&a);
                cur.extend(other.into_iter().filter(|&l| l != b));
            }
            _ => return false,
        }
    }
    let target: BTreeSet<Lit> = e.nogood(learned).iter().copied().collect();
    cur == target
}

// ---------------------------------------------------------------------------
// Guessing program

/// Replacement atom for a ground external atom.
pub fn replacement_atoms(e: &ExternalAtom) -> (Atom, Atom) {
    let mut args: Vec<Term> = e.inputs.iter().map(|p| Term::Const(p.clone())).collect();
    args.extend(e.outputs.iter().cloned());
    (Atom::new(&format!("__e_{}", e.name), args.clone()), Atom::new(&format!("__ne_{}", e.name), args))
}

/// Guessing program: external atoms replaced by replacement atoms plus
/// `e :- not ne. ne :- not e.` per distinct external atom. Ground builtins are
/// evaluated away. Returns the program and the (external, e, ne) triples.
pub fn rewrite_guessing_program(p: &Program) -> Result<(Program, Vec<(ExternalAtom, Atom, Atom)>)> {
    let mut reps: Vec<(ExternalAtom, Atom, Atom)> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut out = Program { unit_markers: vec![], ..p.clone() };
    out.rules.clear();
    for r in &p.rules {
        let mut body = Vec::with_capacity(r.body.len());
        let mut keep = true;
        for l in &r.body {
            match &l.kind {
                LitKind::Ordinary(_) => body.push(l.clone()),
                LitKind::External(e) => {
                    if !e.is_ground() {
                        return Err(Error::NonGround(format!("external atom {e} in guessing program")));
                    }
                    let (ea, na) = replacement_atoms(e);
                    if seen.insert(e.clone()) {
                        reps.push((e.clone(), ea.clone(), na));
                    }
                    body.push(BodyLiteral { polarity: l.polarity, kind: LitKind::Ordinary(ea) });
                }
                LitKind::Builtin(a, op, b) => {
                    if !(a.is_ground() && b.is_ground()) {
                        return Err(Error::NonGround(format!("builtin `{l}`")));
                    }
                    if !op.eval(a, b) {
                        keep = false;
                    }
                }
                LitKind::Conditional(_) | LitKind::Query(_) => {
                    return Err(Error::Unsupported(format!("`{l}` must be expanded before solving")))
                }
            }
        }
        if keep {
            out.rules.push(Rule { head: r.head.clone(), body });
        }
    }
    for (_, e, ne) in &reps {
        out.rules.push(Rule::normal(e.clone(), vec![], vec![ne.clone()]));
        out.rules.push(Rule::normal(ne.clone(), vec![], vec![e.clone()]));
    }
    out.collect_queries();
    Ok((out, reps))
}

// ---------------------------------------------------------------------------
// Symbolic solver

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub limits: Limits,
    pub record_proofs: bool,
    /// Learn input/output nogoods whenever an external's input is fully assigned.
    pub theory_propagation: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { limits: Limits::from_env().unwrap_or_default(), record_proofs: false, theory_propagation: true }
    }
}

struct Rep {
    ext: ExternalAtom,
    var: u32,
    inputs: Vec<u32>,
    universe: BTreeSet<Atom>,
}

/// Ground rule over variables, used by the minimality checks.
struct VRule {
    heads: Vec<u32>,
    pos: Vec<u32>,
    neg: Vec<u32>,
    /// (replacement index, positive?)
    ext: Vec<(usize, bool)>,
    beta: Option<u32>,
}

enum Minimality {
    /// Normal program without externals: least-model check of the reduct.
    Gl,
    /// Search for a smaller model of the FLP reduct.
    Flp,
}

struct HexTheory {
    reg: Registry,
    atoms: Vec<Atom>,
    is_beta: Vec<bool>,
    /// Atoms of the input program (guessing and body auxiliaries excluded).
    original: Vec<bool>,
    reps: Vec<Rep>,
    rules: Vec<VRule>,
    minimality: Minimality,
    learned_io: HashSet<Vec<Lit>>,
    theory_propagation: bool,
    limits: Limits,
    pub minimality_checks: u64,
    pub failed_candidates: u64,
}

impl HexTheory {
    fn ext_set(&self, e: &Engine, rep: &Rep) -> BTreeSet<Atom> {
        rep.inputs.iter().filter(|&&v| e.value(v) == Some(true)).map(|&v| self.atoms[v as usize].clone()).collect()
    }

    fn io_nogood(&self, e: &Engine, rep: &Rep) -> Result<(bool, Vec<Lit>)> {
        let def = self.reg.check(&rep.ext)?;
        let ext = self.ext_set(e, rep);
        let (v, just) = def.justify(&rep.ext, &rep.universe, &ext);
        let index = |a: &Atom| rep.inputs.iter().copied().find(|&x| &self.atoms[x as usize] == a);
        let mut lits = Vec::with_capacity(just.len() + 1);
        for l in just {
            match index(&l.atom) {
                Some(x) => lits.push(mk_lit(x, l.sign)),
                None if !l.sign => {}
                None => return Err(Error::Invalid(format!("justification mentions unknown atom {}", l.atom))),
            }
        }
        lits.push(mk_lit(rep.var, !v));
        lits.sort_unstable();
        Ok((v, lits))
    }

    fn blocking(&self, e: &Engine) -> Vec<Lit> {
        (0..e.num_vars() as u32)
            .filter(|&v| !self.is_beta[v as usize])
            .map(|v| mk_lit(v, e.value(v) == Some(true)))
            .collect()
    }

    fn check_gl(&self, e: &Engine) -> Option<Vec<Lit>> {
        let n = e.num_vars();
        let truth = |v: u32| e.value(v) == Some(true);
        let mut in_lfp = vec![false; n];
        let mut missing: Vec<usize> = Vec::with_capacity(self.rules.len());
        let mut by_pos: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut queue = Vec::new();
        for (i, r) in self.rules.iter().enumerate() {
            let active = !r.heads.is_empty() && r.neg.iter().all(|&x| !truth(x));
            missing.push(if active { r.pos.len() } else { usize::MAX });
            if active {
                for &x in &r.pos {
                    by_pos[x as usize].push(i);
                }
                if r.pos.is_empty() {
                    queue.push(r.heads[0]);
                }
            }
        }
        while let Some(h) = queue.pop() {
            if in_lfp[h as usize] {
                continue;
            }
            in_lfp[h as usize] = true;
            for &ri in &by_pos[h as usize] {
                missing[ri] -= 1;
                if missing[ri] == 0 {
                    queue.push(self.rules[ri].heads[0]);
                }
            }
        }
        let unfounded: Vec<u32> =
            (0..n as u32).filter(|&v| !self.is_beta[v as usize] && truth(v) && !in_lfp[v as usize]).collect();
        let &u = unfounded.first()?;
        let uset: HashSet<u32> = unfounded.iter().copied().collect();
        let mut lits = vec![mk_lit(u, true)];
        for r in &self.rules {
            if r.heads.iter().any(|h| uset.contains(h)) && r.pos.iter().all(|p| !uset.contains(p)) {
                match r.beta {
                    Some(b) => lits.push(mk_lit(b, false)),
                    None => return Some(self.blocking(e)),
                }
            }
        }
        Some(lits)
    }

    /// Searches for a model of the FLP reduct strictly below the current
    /// assignment; returns the true atoms it drops.
    fn check_flp(&mut self, e: &Engine) -> Result<Option<Vec<u32>>> {
        self.minimality_checks += 1;
        if self.limits.minimality_checks > 0 && self.minimality_checks > self.limits.minimality_checks as u64 {
            return Err(Error::Bound { name: "minimality_checks", limit: self.limits.minimality_checks });
        }
        let truth = |v: u32| e.value(v) == Some(true);
        // sub-variables: true ordinary atoms, then external atoms used in the reduct
        let mut sub_of: HashMap<u32, u32> = HashMap::new();
        let mut main_of: Vec<u32> = Vec::new();
        for v in 0..e.num_vars() as u32 {
            if truth(v) && self.original[v as usize] {
                sub_of.insert(v, main_of.len() as u32);
                main_of.push(v);
            }
        }
        let n_atoms = main_of.len();
        let mut ext_sub: BTreeMap<usize, u32> = BTreeMap::new();
        let mut reduct: Vec<&VRule> = Vec::new();
        for r in &self.rules {
            let body_true = r.pos.iter().all(|&x| truth(x))
                && r.neg.iter().all(|&x| !truth(x))
                && r.ext.iter().all(|&(i, pos)| truth(self.reps[i].var) == pos);
            if body_true {
                for &(i, _) in &r.ext {
                    let next = (n_atoms + ext_sub.len()) as u32;
                    ext_sub.entry(i).or_insert(next);
                }
                reduct.push(r);
            }
        }
        let mut sub = Engine::new(n_atoms + ext_sub.len());
        for r in &reduct {
            let mut lits: Vec<Lit> = r.pos.iter().map(|x| mk_lit(sub_of[x], true)).collect();
            lits.extend(r.ext.iter().map(|&(i, pos)| mk_lit(ext_sub[&i], pos)));
            lits.extend(r.heads.iter().filter_map(|h| sub_of.get(h)).map(|&s| mk_lit(s, false)));
            if let Added::Conflict(_) = sub.add_input(lits) {
                return Ok(None);
            }
        }
        if let Added::Conflict(_) = sub.add_input((0..n_atoms as u32).map(|s| mk_lit(s, true)).collect()) {
            return Ok(None);
        }
        struct SubTheory<'a> {
            t: &'a HexTheory,
            main_of: &'a [u32],
            ext_sub: &'a BTreeMap<usize, u32>,
        }
        impl Theory for SubTheory<'_> {
            fn on_total(&mut self, s: &Engine) -> Result<Vec<Vec<Lit>>> {
                let j: BTreeSet<Atom> = (0..self.main_of.len() as u32)
                    .filter(|&x| s.value(x) == Some(true))
                    .map(|x| self.t.atoms[self.main_of[x as usize] as usize].clone())
                    .collect();
                let mut out = Vec::new();
                for (&ri, &x) in self.ext_sub {
                    let rep = &self.t.reps[ri];
                    let def = self.t.reg.check(&rep.ext)?;
                    let (v, just) = def.justify(&rep.ext, &rep.universe, &j);
                    if v != (s.value(x) == Some(true)) {
                        let mut lits = Vec::new();
                        for l in just {
                            match self.main_of.iter().position(|&m| self.t.atoms[m as usize] == l.atom) {
                                Some(k) => lits.push(mk_lit(k as u32, l.sign)),
                                None if !l.sign => {}
                                None => unreachable!("true input atom outside the candidate"),
                            }
                        }
                        lits.push(mk_lit(x, !v));
                        out.push(lits);
                    }
                }
                Ok(out)
            }
        }
        let mut th = SubTheory { t: self, main_of: &main_of, ext_sub: &ext_sub };
        if sub.search(&mut th)? != SearchResult::Model {
            return Ok(None);
        }
        Ok(Some((0..n_atoms as u32).filter(|&x| sub.value(x) != Some(true)).map(|x| main_of[x as usize]).collect()))
    }

    /// Nogoods `{T u} ∪ W` for each `u ∈ U`, where `U` is unfounded w.r.t. the
    /// current assignment and `W` keeps every rule that could support `U` from
    /// outside blocked: a false body literal or a true head outside `U`. Only
    /// sound without externals; otherwise the full assignment is blocked.
    fn unfounded_nogoods(&self, e: &Engine, u: &[u32]) -> Vec<Vec<Lit>> {
        if !self.reps.is_empty() || u.is_empty() {
            return vec![self.blocking(e)];
        }
        let truth = |v: u32| e.value(v) == Some(true);
        let uset: HashSet<u32> = u.iter().copied().collect();
        let mut w: BTreeSet<Lit> = BTreeSet::new();
        for r in &self.rules {
            if !r.heads.iter().any(|h| uset.contains(h)) || r.pos.iter().any(|p| uset.contains(p)) {
                continue;
            }
            let blocker = r
                .pos
                .iter()
                .find(|&&x| !truth(x))
                .map(|&x| mk_lit(x, false))
                .or_else(|| r.neg.iter().find(|&&x| truth(x)).map(|&x| mk_lit(x, true)))
                .or_else(|| r.heads.iter().find(|&&h| !uset.contains(&h) && truth(h)).map(|&h| mk_lit(h, true)));
            match blocker {
                Some(l) => {
                    w.insert(l);
                }
                None => return vec![self.blocking(e)],
            }
        }
        u.iter()
            .map(|&x| {
                let mut n: Vec<Lit> = w.iter().copied().collect();
                n.push(mk_lit(x, true));
                n.sort_unstable();
                n.dedup();
                n
            })
            .collect()
    }
}

impl Theory for HexTheory {
    fn on_fixpoint(&mut self, e: &Engine) -> Result<Vec<Vec<Lit>>> {
        if !self.theory_propagation {
            return Ok(vec![]);
        }
        let mut out = Vec::new();
        for rep in &self.reps {
            if rep.inputs.iter().all(|&v| e.value(v).is_some()) {
                let (_, lits) = self.io_nogood(e, rep)?;
                if !self.learned_io.contains(&lits) {
                    out.push(lits);
                }
            }
        }
        for l in &out {
            self.learned_io.insert(l.clone());
        }
        Ok(out)
    }

    fn on_total(&mut self, e: &Engine) -> Result<Vec<Vec<Lit>>> {
        let mut out = Vec::new();
        for rep in &self.reps {
            let (v, lits) = self.io_nogood(e, rep)?;
            if v != (e.value(rep.var) == Some(true)) {
                out.push(lits);
            }
        }
        if !out.is_empty() {
            for l in &out {
                self.learned_io.insert(l.clone());
            }
            self.failed_candidates += 1;
            return Ok(out);
        }
        let fail = match self.minimality {
            Minimality::Flp => self.check_flp(e)?.map(|u| self.unfounded_nogoods(e, &u)),
            Minimality::Gl => self.check_gl(e).map(|n| vec![n]),
        };
        match fail {
            Some(n) => {
                self.failed_candidates += 1;
                Ok(n)
            }
            None => Ok(vec![]),
        }
    }
}

/// Result of a single search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome<T> {
    AnswerSet(BTreeSet<Atom>),
    HandlerResult(T),
}

/// Answer-set solver for one ground program plus input facts.
pub struct Solver {
    pub engine: Engine,
    theory: HexTheory,
    index: HashMap<Atom, u32>,
    project: Vec<u32>,
    pending_block: Option<Vec<Lit>>,
    /// Level-0 conflict found while adding nogoods outside search.
    dead: Option<u32>,
    exhausted: bool,
    pub completion: Completion,
    pub models: u64,
    facts: BTreeSet<Atom>,
}

impl Solver {
    /// `p` must be ground (externals and ground builtins allowed). `extra_atoms` are
    /// made known to the solver (input atoms of externals that occur nowhere else).
    pub fn new(p: &Program, facts: &BTreeSet<Atom>, reg: &Registry, opts: &SolverOptions) -> Result<Solver> {
        Solver::with_atoms(p, facts, &BTreeSet::new(), reg, opts)
    }

    pub fn with_atoms(
        p: &Program,
        facts: &BTreeSet<Atom>,
        extra_atoms: &BTreeSet<Atom>,
        reg: &Registry,
        opts: &SolverOptions,
    ) -> Result<Solver> {
        let full = p.with_facts(facts);
        let (hat, reps) = rewrite_guessing_program(&full)?;
        for (e, _, _) in &reps {
            reg.check(e)?;
        }
        let comp = clark_completion_with(&hat, extra_atoms)?;
        // variable order: program atoms sorted, body auxiliaries last
        let mut atoms: Vec<Atom> = comp.atoms.iter().cloned().collect();
        let n_prog = atoms.len();
        atoms.extend(comp.bodies.iter().map(|(_, b)| b.clone()));
        let index: HashMap<Atom, u32> = atoms.iter().enumerate().map(|(i, a)| (a.clone(), i as u32)).collect();
        let is_beta: Vec<bool> = (0..atoms.len()).map(|i| i >= n_prog).collect();
        let mut engine = Engine::new(atoms.len());
        engine.conflict_limit = opts.limits.conflicts as u64;
        if opts.record_proofs {
            engine.record_proofs();
        }
        let to_lits = |n: &Nogood| n.0.iter().map(|l| mk_lit(index[&l.atom], l.sign)).collect::<Vec<_>>();
        let mut dead = None;
        for n in &comp.nogoods {
            if let Added::Conflict(ci) = engine.add_input(to_lits(n)) {
                dead.get_or_insert(ci);
            }
        }
        let reps: Vec<Rep> = reps
            .into_iter()
            .map(|(ext, e, _)| {
                let universe: BTreeSet<Atom> =
                    comp.atoms.iter().filter(|a| ext.inputs.contains(&a.pred)).cloned().collect();
                let inputs = universe.iter().map(|a| index[a]).collect();
                Rep { var: index[&e], ext, inputs, universe }
            })
            .collect();
        let rep_index: HashMap<Atom, usize> =
            reps.iter().enumerate().map(|(i, r)| (replacement_atoms(&r.ext).0, i)).collect();
        let mut rules = Vec::new();
        for r in &full.rules {
            let mut vr = VRule {
                heads: r.head.iter().map(|h| index[h]).collect(),
                pos: vec![],
                neg: vec![],
                ext: vec![],
                beta: None,
            };
            let mut keep = true;
            for l in &r.body {
                let pos = l.polarity == Polarity::Pos;
                match &l.kind {
                    LitKind::Ordinary(a) => {
                        if pos {
                            vr.pos.push(index[a]);
                        } else {
                            vr.neg.push(index[a]);
                        }
                    }
                    LitKind::External(e) => vr.ext.push((rep_index[&replacement_atoms(e).0], pos)),
                    LitKind::Builtin(a, op, b) => keep &= op.eval(a, b),
                    _ => unreachable!("rejected by rewrite_guessing_program"),
                }
            }
            if !keep {
                continue;
            }
            if vr.heads.len() == 1 && vr.ext.is_empty() && !r.body.is_empty() {
                let hr = Rule { head: r.head.clone(), body: r.body.clone() };
                vr.beta = body_key(&hr).ok().and_then(|k| comp.beta(&k)).map(|b| index[b]);
            }
            rules.push(vr);
        }
        let mut original = vec![false; atoms.len()];
        for a in full.ordinary_atoms().iter().chain(extra_atoms) {
            if let Some(&v) = index.get(a) {
                original[v as usize] = true;
            }
        }
        let minimality = if full.is_normal() && reps.is_empty() { Minimality::Gl } else { Minimality::Flp };
        let project = (0..n_prog as u32).filter(|&v| !atoms[v as usize].is_aux()).collect();
        let theory = HexTheory {
            reg: reg.clone(),
            atoms,
            is_beta,
            original,
            reps,
            rules,
            minimality,
            learned_io: HashSet::new(),
            theory_propagation: opts.theory_propagation,
            limits: opts.limits.clone(),
            minimality_checks: 0,
            failed_candidates: 0,
        };
        Ok(Solver {
            engine,
            theory,
            index,
            project,
            pending_block: None,
            dead,
            exhausted: false,
            completion: comp,
            models: 0,
            facts: facts.clone(),
        })
    }

    /// The input facts the solver was built with.
    pub fn facts(&self) -> &BTreeSet<Atom> {
        &self.facts
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.theory.atoms
    }

    pub fn var(&self, a: &Atom) -> Option<u32> {
        self.index.get(a).copied()
    }

    pub fn atom(&self, v: u32) -> &Atom {
        &self.theory.atoms[v as usize]
    }

    pub fn is_body_aux(&self, v: u32) -> bool {
        self.theory.is_beta[v as usize]
    }

    pub fn to_slit(&self, l: Lit) -> SLit {
        SLit { sign: sign_of(l), atom: self.atom(var_of(l)).clone() }
    }

    pub fn nogood_symbolic(&self, i: u32) -> Nogood {
        Nogood::new(self.engine.nogood(i).iter().map(|&l| self.to_slit(l)).collect())
    }

    pub fn minimality_checks(&self) -> u64 {
        self.theory.minimality_checks
    }

    fn interpretation(&self) -> BTreeSet<Atom> {
        self.project.iter().filter(|&&v| self.engine.value(v) == Some(true)).map(|&v| self.atom(v).clone()).collect()
    }

    /// Full assignment over all program atoms (auxiliaries included, body atoms excluded).
    pub fn full_interpretation(&self) -> BTreeSet<Atom> {
        (0..self.engine.num_vars() as u32)
            .filter(|&v| !self.is_body_aux(v) && self.engine.value(v) == Some(true))
            .map(|v| self.atom(v).clone())
            .collect()
    }

    /// Adds a constraint (nogood over atoms). Literals over unknown atoms: `F a` is
    /// always satisfied and dropped; a nogood with `T a` can never fire and is skipped.
    /// Backjumps to level 0.
    pub fn add_constraint(&mut self, lits: &[SLit]) {
        let mut out = Vec::new();
        for l in lits {
            match self.var(&l.atom) {
                Some(v) => out.push(mk_lit(v, l.sign)),
                None if !l.sign => {}
                None => return,
            }
        }
        self.engine.backjump(0);
        if let Added::Conflict(ci) = self.engine.add_nogood(out) {
            self.dead.get_or_insert(ci);
        }
    }

    /// Searches for the first answer set; on a level-0 conflict returns the violated nogood.
    pub fn search(&mut self) -> Result<std::result::Result<BTreeSet<Atom>, Option<u32>>> {
        if self.exhausted {
            return Ok(Err(None));
        }
        if let Some(ci) = self.dead {
            self.exhausted = true;
            return Ok(Err(Some(ci)));
        }
        if let Some(b) = self.pending_block.take() {
            match self.engine.integrate(vec![b])? {
                Err(SearchResult::Unsat(ci)) => {
                    self.exhausted = true;
                    return Ok(Err(Some(ci)));
                }
                Err(SearchResult::Model) => unreachable!(),
                Ok(_) => {}
            }
        }
        match self.engine.search(&mut self.theory)? {
            SearchResult::Model => {
                self.models += 1;
                if self.theory.limits.models > 0 && self.models > self.theory.limits.models as u64 {
                    return Err(Error::Bound { name: "models", limit: self.theory.limits.models });
                }
                let block = self.project.iter().map(|&v| mk_lit(v, self.engine.value(v) == Some(true))).collect();
                self.pending_block = Some(block);
                Ok(Ok(self.interpretation()))
            }
            SearchResult::Unsat(ci) => {
                self.exhausted = true;
                Ok(Err(Some(ci)))
            }
        }
    }

    pub fn next_model(&mut self) -> Result<Option<BTreeSet<Atom>>> {
        Ok(self.search()?.ok())
    }

    pub fn all_models(&mut self) -> Result<Vec<BTreeSet<Atom>>> {
        let mut out = Vec::new();
        while let Some(m) = self.next_model()? {
            out.push(m);
        }
        Ok(out)
    }
}

/// Algorithm CDNL-HEX: an answer set of `p ∪ facts`, or the handler's value on a
/// level-0 conflict (called with the solver and the violated nogood).
pub fn solve<T>(
    p: &Program,
    facts: &BTreeSet<Atom>,
    reg: &Registry,
    opts: &SolverOptions,
    handler: impl FnOnce(&Solver, Option<u32>) -> T,
) -> Result<SolveOutcome<T>> {
    let mut s = Solver::new(p, facts, reg, opts)?;
    match s.search()? {
        Ok(m) => Ok(SolveOutcome::AnswerSet(m)),
        Err(ci) => Ok(SolveOutcome::HandlerResult(handler(&s, ci))),
    }
}

/// All answer sets of a ground, possibly disjunctive program (projected to non-auxiliary atoms).
pub fn solve_disjunctive(p: &Program, reg: &Registry, opts: &SolverOptions) -> Result<BTreeSet<BTreeSet<Atom>>> {
    Ok(Solver::new(p, &BTreeSet::new(), reg, opts)?.all_models()?.into_iter().collect())
}

pub fn answer_sets(
    p: &Program,
    facts: &BTreeSet<Atom>,
    reg: &Registry,
    opts: &SolverOptions,
) -> Result<BTreeSet<BTreeSet<Atom>>> {
    Ok(Solver::new(p, facts, reg, opts)?.all_models()?.into_iter().collect())
}

/// Checks a complete assignment of the guessing program (true atoms, replacement
/// atoms included). Returns `None` if it is a compatible, minimal candidate, or the
/// nogood that rejects it.
pub fn check_candidate(p: &Program, reg: &Registry, assignment: &BTreeSet<Atom>) -> Result<Option<Nogood>> {
    let mut s = Solver::new(p, &BTreeSet::new(), reg, &SolverOptions::default())?;
    s.theory.theory_propagation = false;
    let n = s.engine.num_vars() as u32;
    for v in 0..n {
        if s.is_body_aux(v) {
            continue;
        }
        let l = mk_lit(v, assignment.contains(s.atom(v)));
        if s.engine.value(v).is_none() {
            s.engine.decide(l);
        }
    }
    // body auxiliaries follow from the atoms
    for (key, beta) in s.completion.bodies.clone() {
        let v = s.index[&beta];
        if s.engine.value(v).is_none() {
            let holds = key.iter().all(|(p, a)| assignment.contains(a) == (*p == Polarity::Pos));
            s.engine.decide(mk_lit(v, holds));
        }
    }
    let ngs = s.theory.on_total(&s.engine)?;
    Ok(ngs.first().map(|n| Nogood::new(n.iter().map(|&l| s.to_slit(l)).collect())))
}
