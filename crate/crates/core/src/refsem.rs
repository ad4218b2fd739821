//! Brute-force reference semantics.
//!
//! Ground programs are compiled to bitmasks over at most 64 atoms. Normal
//! programs without external atoms are solved by guessing the negative
//! atoms and comparing with the least model of the reduct; everything else
//! goes through the FLP definition (model check plus an exhaustive search for
//! a smaller model of the FLP reduct). Enumeration is split across threads
//! via [`crate::par`].

use std::collections::{BTreeSet, HashMap};

use crate::ast::*;
use crate::error::{Error, Result};
use crate::externals::{ExternalDef, Registry};
use crate::increason::InconsistencyReason;
use crate::limits::Limits;
use crate::par::{self, Parallelism};

pub type Interpretation = BTreeSet<Atom>;

/// `{ H(r) <- B+(r) | B-(r) ∩ i = ∅ }`.
pub fn gl_reduct(p: &Program, i: &Interpretation) -> Result<Program> {
    let mut out = Program::new(vec![]);
    for r in &p.rules {
        if r.has_externals() || !r.is_ordinary() {
            return Err(Error::Unsupported(format!("GL-reduct of non-ordinary rule `{r}`")));
        }
        if r.neg_atoms().all(|a| !i.contains(a)) {
            out.rules.push(Rule::new(r.head.clone(), r.pos_atoms().cloned().map(BodyLiteral::pos).collect()));
        }
    }
    Ok(out)
}

/// Rules whose whole body holds in `i`.
pub fn flp_reduct(p: &Program, i: &Interpretation, reg: &Registry) -> Result<Program> {
    let mut out = Program::new(vec![]);
    for r in &p.rules {
        if body_holds(r, i, reg)? {
            out.rules.push(r.clone());
        }
    }
    Ok(out)
}

fn body_holds(r: &Rule, i: &Interpretation, reg: &Registry) -> Result<bool> {
    for l in &r.body {
        let v = match &l.kind {
            LitKind::Ordinary(a) => i.contains(a),
            LitKind::External(e) => reg.evaluate_external(e, i)?,
            LitKind::Builtin(a, op, b) => {
                if !(a.is_ground() && b.is_ground()) {
                    return Err(Error::NonGround(format!("builtin `{l}`")));
                }
                op.eval(a, b)
            }
            _ => return Err(Error::Unsupported(format!("body literal `{l}`"))),
        };
        if v != (l.polarity == Polarity::Pos) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Least model of a positive normal program.
pub fn tp_lfp(p: &Program) -> Result<Interpretation> {
    for r in &p.rules {
        if r.head.len() > 1 || r.neg_atoms().next().is_some() || !r.is_ordinary() {
            return Err(Error::Unsupported(format!("T_P fixpoint needs a positive normal program; got `{r}`")));
        }
    }
    let mut i = Interpretation::new();
    loop {
        let before = i.len();
        for r in &p.rules {
            if let Some(h) = r.head.first() {
                if !i.contains(h) && r.pos_atoms().all(|a| i.contains(a)) {
                    i.insert(h.clone());
                }
            }
        }
        if i.len() == before {
            return Ok(i);
        }
    }
}

struct CRule {
    head: u64,
    pos: u64,
    neg: u64,
    ext: Vec<(usize, bool)>,
}

struct CExt {
    ext: ExternalAtom,
    def: ExternalDef,
    inputs: Vec<usize>,
    table: Option<Vec<bool>>,
}

/// A ground program over at most 64 atoms.
pub struct Compiled {
    pub atoms: Vec<Atom>,
    index: HashMap<Atom, usize>,
    rules: Vec<CRule>,
    exts: Vec<CExt>,
    neg_mask: u64,
    gl: bool,
}

const TABLE_BITS: usize = 16;

impl Compiled {
    /// Compiles `p` over `atoms_of(p) ∪ extra`.
    pub fn new(p: &Program, extra: &BTreeSet<Atom>, reg: &Registry) -> Result<Compiled> {
        if !p.is_ground() {
            return Err(Error::NonGround("reference semantics requires a ground program".into()));
        }
        let mut all = atoms_of(p)?;
        all.extend(extra.iter().cloned());
        if all.len() > 64 {
            return Err(Error::Bound { name: "bruteforce_atoms", limit: 64 });
        }
        let atoms: Vec<Atom> = all.into_iter().collect();
        let index: HashMap<Atom, usize> = atoms.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        let bit = |a: &Atom| 1u64 << index[a];
        let mut exts: Vec<CExt> = Vec::new();
        let mut ext_ix: HashMap<ExternalAtom, usize> = HashMap::new();
        let mut rules = Vec::new();
        let mut neg_mask = 0;
        let mut gl = true;
        for r in &p.rules {
            let mut cr = CRule { head: 0, pos: 0, neg: 0, ext: vec![] };
            for h in &r.head {
                cr.head |= bit(h);
            }
            gl &= r.head.len() <= 1;
            let mut keep = true;
            for l in &r.body {
                let pos = l.polarity == Polarity::Pos;
                match &l.kind {
                    LitKind::Ordinary(a) if pos => cr.pos |= bit(a),
                    LitKind::Ordinary(a) => cr.neg |= bit(a),
                    LitKind::External(e) => {
                        gl = false;
                        let k = match ext_ix.get(e) {
                            Some(&k) => k,
                            None => {
                                let def = reg.check(e)?.clone();
                                let inputs: Vec<usize> = atoms
                                    .iter()
                                    .enumerate()
                                    .filter(|(_, a)| e.inputs.contains(&a.pred))
                                    .map(|(i, _)| i)
                                    .collect();
                                exts.push(CExt { ext: e.clone(), def, inputs, table: None });
                                ext_ix.insert(e.clone(), exts.len() - 1);
                                exts.len() - 1
                            }
                        };
                        cr.ext.push((k, pos));
                    }
                    LitKind::Builtin(a, op, b) => keep &= op.eval(a, b),
                    _ => return Err(Error::Unsupported(format!("body literal `{l}` in reference semantics"))),
                }
            }
            if keep {
                neg_mask |= cr.neg;
                rules.push(cr);
            }
        }
        for x in &mut exts {
            if x.inputs.len() <= TABLE_BITS {
                let t: Vec<bool> = (0..1u64 << x.inputs.len())
                    .map(|k| {
                        let ext: BTreeSet<Atom> = x
                            .inputs
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| k >> j & 1 == 1)
                            .map(|(_, &i)| atoms[i].clone())
                            .collect();
                        x.def.evaluate(&x.ext, &ext)
                    })
                    .collect();
                x.table = Some(t);
            }
        }
        Ok(Compiled { atoms, index, rules, exts, neg_mask, gl })
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn mask_of(&self, s: &BTreeSet<Atom>) -> u64 {
        s.iter().filter_map(|a| self.index.get(a)).fold(0, |m, &i| m | 1 << i)
    }

    pub fn set_of(&self, m: u64) -> Interpretation {
        (0..self.atoms.len()).filter(|i| m >> i & 1 == 1).map(|i| self.atoms[i].clone()).collect()
    }

    fn ext_value(&self, k: usize, m: u64) -> bool {
        let x = &self.exts[k];
        match &x.table {
            Some(t) => {
                let idx = x.inputs.iter().enumerate().fold(0usize, |acc, (j, &i)| acc | ((m >> i & 1) as usize) << j);
                t[idx]
            }
            None => x.def.evaluate(&x.ext, &self.set_of(m)),
        }
    }

    /// Body holds under `m`; externals evaluated under `ext_at`.
    fn body(&self, r: &CRule, m: u64, ext_at: u64) -> bool {
        r.pos & !m == 0 && r.neg & m == 0 && r.ext.iter().all(|&(k, pos)| self.ext_value(k, ext_at) == pos)
    }

    /// Classical model of the program plus facts `f`.
    pub fn is_model(&self, m: u64, f: u64) -> bool {
        f & !m == 0 && self.rules.iter().all(|r| r.head & m != 0 || !self.body(r, m, m))
    }

    fn flp_answer_set(&self, m: u64, f: u64) -> bool {
        if !self.is_model(m, f) {
            return false;
        }
        let reduct: Vec<&CRule> = self.rules.iter().filter(|r| self.body(r, m, m)).collect();
        if m == 0 {
            return true;
        }
        let mut j = (m - 1) & m;
        loop {
            if f & !j == 0 && reduct.iter().all(|r| r.head & j != 0 || !self.body(r, j, j)) {
                return false;
            }
            if j == 0 {
                return true;
            }
            j = (j - 1) & m;
        }
    }

    /// Least model of the reduct w.r.t. the negative-atom guess `n`, if stable.
    fn gl_candidate(&self, n: u64, f: u64) -> Option<u64> {
        let mut i = f;
        loop {
            let before = i;
            for r in &self.rules {
                if r.head != 0 && r.neg & n == 0 && r.pos & !i == 0 {
                    i |= r.head;
                }
            }
            if i == before {
                break;
            }
        }
        if i & self.neg_mask != n {
            return None;
        }
        if self.rules.iter().any(|r| r.head == 0 && self.body(r, i, i)) {
            return None;
        }
        Some(i)
    }

    fn neg_bits(&self) -> Vec<usize> {
        (0..64).filter(|i| self.neg_mask >> i & 1 == 1).collect()
    }

    fn spread(bits: &[usize], k: u64) -> u64 {
        bits.iter().enumerate().fold(0, |m, (j, &b)| m | (k >> j & 1) << b)
    }

    fn dimension(&self, limits: &Limits) -> Result<u32> {
        let d = if self.gl { self.neg_mask.count_ones() as usize } else { self.atoms.len() };
        if d > limits.bruteforce_atoms {
            return Err(Error::Bound { name: "bruteforce_atoms", limit: limits.bruteforce_atoms });
        }
        Ok(d as u32)
    }

    /// All answer sets of the program plus facts `f`, as masks.
    pub fn answer_sets(&self, f: u64, limits: &Limits, mode: Parallelism) -> Result<Vec<u64>> {
        let d = self.dimension(limits)?;
        let mut out = if self.gl {
            let bits = self.neg_bits();
            par::filter_map_range(mode, 1 << d, |k| self.gl_candidate(Self::spread(&bits, k), f))
        } else {
            par::filter_map_range(mode, 1 << d, |m| self.flp_answer_set(m, f).then_some(m))
        };
        out.sort_unstable();
        Ok(out)
    }

    pub fn is_consistent(&self, f: u64, limits: &Limits, mode: Parallelism) -> Result<bool> {
        let d = self.dimension(limits)?;
        Ok(if self.gl {
            let bits = self.neg_bits();
            par::any_range(mode, 1 << d, |k| self.gl_candidate(Self::spread(&bits, k), f).is_some())
        } else {
            par::any_range(mode, 1 << d, |m| self.flp_answer_set(m, f))
        })
    }

    /// Forces the FLP route (for cross-checking the two definitions).
    pub fn answer_sets_flp(&self, f: u64, limits: &Limits, mode: Parallelism) -> Result<Vec<u64>> {
        if self.atoms.len() > limits.bruteforce_atoms {
            return Err(Error::Bound { name: "bruteforce_atoms", limit: limits.bruteforce_atoms });
        }
        let mut out = par::filter_map_range(mode, 1 << self.atoms.len(), |m| self.flp_answer_set(m, f).then_some(m));
        out.sort_unstable();
        Ok(out)
    }

    /// Classical models (over all compiled atoms).
    pub fn models(&self, limits: &Limits, mode: Parallelism) -> Result<Vec<u64>> {
        if self.atoms.len() > limits.bruteforce_atoms {
            return Err(Error::Bound { name: "bruteforce_atoms", limit: limits.bruteforce_atoms });
        }
        Ok(par::filter_map_range(mode, 1 << self.atoms.len(), |m| self.is_model(m, 0).then_some(m)))
    }

    /// Def. 9 on masks.
    pub fn is_unfounded(&self, u: u64, i: u64) -> bool {
        self.rules
            .iter()
            .all(|r| r.head & u == 0 || !self.body(r, i, i) || !self.body(r, i & !u, i & !u) || r.head & !u & i != 0)
    }
}

/// Brute-force oracle with its configuration.
#[derive(Clone)]
pub struct RefSem {
    pub reg: Registry,
    pub limits: Limits,
    pub mode: Parallelism,
}

impl Default for RefSem {
    fn default() -> Self {
        RefSem { reg: Registry::new(), limits: Limits::from_env().unwrap_or_default(), mode: Parallelism::default() }
    }
}

impl RefSem {
    pub fn new(reg: Registry, limits: Limits, mode: Parallelism) -> RefSem {
        RefSem { reg, limits, mode }
    }

    pub fn compile(&self, p: &Program, extra: &BTreeSet<Atom>) -> Result<Compiled> {
        Compiled::new(p, extra, &self.reg)
    }

    /// All answer sets, auxiliary atoms included.
    pub fn answer_sets(&self, p: &Program) -> Result<BTreeSet<Interpretation>> {
        let c = self.compile(p, &BTreeSet::new())?;
        Ok(c.answer_sets(0, &self.limits, self.mode)?.into_iter().map(|m| c.set_of(m)).collect())
    }

    /// Answer sets of `p ∪ facts(f)`.
    pub fn answer_sets_with(&self, p: &Program, f: &BTreeSet<Atom>) -> Result<BTreeSet<Interpretation>> {
        let c = self.compile(p, f)?;
        let fm = c.mask_of(f);
        Ok(c.answer_sets(fm, &self.limits, self.mode)?.into_iter().map(|m| c.set_of(m)).collect())
    }

    /// Answer sets projected to non-auxiliary atoms.
    pub fn answer_sets_projected(&self, p: &Program, f: &BTreeSet<Atom>) -> Result<BTreeSet<Interpretation>> {
        Ok(self.answer_sets_with(p, f)?.into_iter().map(|s| project(&s)).collect())
    }

    pub fn answer_sets_flp(&self, p: &Program) -> Result<BTreeSet<Interpretation>> {
        let c = self.compile(p, &BTreeSet::new())?;
        Ok(c.answer_sets_flp(0, &self.limits, self.mode)?.into_iter().map(|m| c.set_of(m)).collect())
    }

    pub fn is_consistent(&self, p: &Program, f: &BTreeSet<Atom>) -> Result<bool> {
        let c = self.compile(p, f)?;
        c.is_consistent(c.mask_of(f), &self.limits, self.mode)
    }

    fn check_domain(&self, p: &Program, d: &BTreeSet<Atom>) -> Result<()> {
        let heads = p.heads();
        if let Some(a) = d.iter().find(|a| heads.contains(*a)) {
            return Err(Error::DomainInHeads(a.to_string()));
        }
        if d.len() > self.limits.ir_domain {
            return Err(Error::Bound { name: "ir_domain", limit: self.limits.ir_domain });
        }
        Ok(())
    }

    /// `inc[F]` for every `F ⊆ d`, indexed by the bitmask over `d` in sorted order.
    fn inconsistency_table(&self, p: &Program, d: &BTreeSet<Atom>) -> Result<Vec<bool>> {
        let c = self.compile(p, d)?;
        let dm: Vec<u64> = d.iter().map(|a| c.mask_of(&[a.clone()].into())).collect();
        let masks: Vec<u64> = (0..1u64 << d.len()).map(|k| Compiled::spread_masks(&dm, k)).collect();
        let res = par::map(self.mode, masks, |f| c.is_consistent(f, &self.limits, Parallelism::Sequential).map(|x| !x));
        res.into_iter().collect()
    }

    /// Every IR of `p` w.r.t. `d`.
    pub fn irs(&self, p: &Program, d: &BTreeSet<Atom>) -> Result<BTreeSet<InconsistencyReason>> {
        self.check_domain(p, d)?;
        let inc = self.inconsistency_table(p, d)?;
        let k = d.len();
        let elems: Vec<&Atom> = d.iter().collect();
        let n3 = 3usize.pow(k as u32);
        // trit 0 = free, 1 = in R+, 2 = in R-
        let mut ok = vec![false; n3];
        let pow3: Vec<usize> = (0..k).map(|i| 3usize.pow(i as u32)).collect();
        for t in (0..n3).rev() {
            let mut rest = t;
            let mut free = None;
            let mut plus = 0usize;
            for (i, &p3) in pow3.iter().enumerate() {
                let trit = rest % 3;
                rest /= 3;
                match trit {
                    0 if free.is_none() => free = Some(p3),
                    1 => plus |= 1 << i,
                    _ => {}
                }
            }
            ok[t] = match free {
                None => inc[plus],
                Some(p3) => ok[t + p3] && ok[t + 2 * p3],
            };
        }
        let mut out = BTreeSet::new();
        for (t, &good) in ok.iter().enumerate() {
            if !good {
                continue;
            }
            let mut r = InconsistencyReason::default();
            let mut rest = t;
            for e in &elems {
                match rest % 3 {
                    1 => {
                        r.r_plus.insert((*e).clone());
                    }
                    2 => {
                        r.r_minus.insert((*e).clone());
                    }
                    _ => {}
                }
                rest /= 3;
            }
            out.insert(r);
        }
        Ok(out)
    }

    /// Def. 8 membership.
    pub fn is_ir(&self, p: &Program, d: &BTreeSet<Atom>, r: &InconsistencyReason) -> Result<bool> {
        self.check_domain(p, d)?;
        if !r.is_well_formed(d) {
            return Ok(false);
        }
        let c = self.compile(p, d)?;
        let base = c.mask_of(&r.r_plus);
        let free: Vec<u64> = d
            .iter()
            .filter(|a| !r.r_plus.contains(*a) && !r.r_minus.contains(*a))
            .map(|a| c.mask_of(&[a.clone()].into()))
            .collect();
        let results = par::map(self.mode, (0..1u64 << free.len()).collect(), |k| {
            c.is_consistent(base | Compiled::spread_masks(&free, k), &self.limits, Parallelism::Sequential)
        });
        for x in results {
            if x? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_minimal_ir(&self, p: &Program, d: &BTreeSet<Atom>, r: &InconsistencyReason) -> Result<bool> {
        if !self.is_ir(p, d, r)? {
            return Err(Error::NotAnIr(r.to_string()));
        }
        for a in &r.r_plus {
            let mut s = r.clone();
            s.r_plus.remove(a);
            if self.is_ir(p, d, &s)? {
                return Ok(false);
            }
        }
        for a in &r.r_minus {
            let mut s = r.clone();
            s.r_minus.remove(a);
            if self.is_ir(p, d, &s)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Def. 9.
    pub fn is_unfounded_set(&self, u: &BTreeSet<Atom>, p: &Program, i: &Interpretation) -> Result<bool> {
        let c = self.compile(p, &u.union(i).cloned().collect())?;
        Ok(c.is_unfounded(c.mask_of(u), c.mask_of(i)))
    }

    /// IR check through classical models and unfounded sets.
    pub fn check_ir_via_ufs(&self, p: &Program, d: &BTreeSet<Atom>, r: &InconsistencyReason) -> Result<bool> {
        if !r.is_well_formed(d) {
            return Ok(false);
        }
        let c = self.compile(p, d)?;
        let plus = c.mask_of(&r.r_plus);
        let allowed_out = c.mask_of(&d.difference(&r.r_minus).cloned().collect());
        let models = c.models(&self.limits, self.mode)?;
        Ok(models.iter().all(|&m| {
            if plus & !m != 0 {
                return true;
            }
            let cand = m & !allowed_out;
            let mut u = cand;
            while u != 0 {
                if c.is_unfounded(u, m) {
                    return true;
                }
                u = (u - 1) & cand;
            }
            false
        }))
    }

    /// Sufficient condition: every classical model misses `R+` or meets `R-`.
    pub fn prop21_condition(&self, p: &Program, d: &BTreeSet<Atom>, r: &InconsistencyReason) -> Result<bool> {
        let c = self.compile(p, d)?;
        let plus = c.mask_of(&r.r_plus);
        let minus = c.mask_of(&r.r_minus);
        Ok(c.models(&self.limits, self.mode)?.iter().all(|&m| plus & !m != 0 || m & minus != 0))
    }
}

impl Compiled {
    fn spread_masks(bits: &[u64], k: u64) -> u64 {
        bits.iter().enumerate().fold(0, |m, (j, &b)| if k >> j & 1 == 1 { m | b } else { m })
    }
}

pub fn answer_sets_bruteforce(p: &Program) -> Result<BTreeSet<Interpretation>> {
    RefSem::default().answer_sets(p)
}

pub fn irs_bruteforce(p: &Program, d: &BTreeSet<Atom>) -> Result<BTreeSet<InconsistencyReason>> {
    RefSem::default().irs(p, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn p(s: &str) -> Program {
        parse_program(s).unwrap()
    }

    fn set(xs: &[&str]) -> Interpretation {
        xs.iter().map(|x| Atom::prop(x)).collect()
    }

    fn ir(plus: &[&str], minus: &[&str]) -> InconsistencyReason {
        InconsistencyReason { r_plus: set(plus), r_minus: set(minus) }
    }

    #[test]
    fn reducts() {
        assert_eq!(gl_reduct(&p("a :- not b."), &set(&[])).unwrap().rules, p("a.").rules);
        assert!(gl_reduct(&p("a :- not b."), &set(&["b"])).unwrap().rules.is_empty());
        assert_eq!(gl_reduct(&p("p :- q, not r. q."), &set(&["p", "q"])).unwrap().rules, p("p :- q. q.").rules);
        let reg = Registry::new();
        assert!(flp_reduct(&p("p :- &id[p]()."), &set(&[]), &reg).unwrap().rules.is_empty());
        assert_eq!(flp_reduct(&p("a :- not b."), &set(&[]), &reg).unwrap().rules.len(), 1);
        assert!(flp_reduct(&p("a :- b."), &set(&["a"]), &reg).unwrap().rules.is_empty());
    }

    #[test]
    fn least_models() {
        assert_eq!(tp_lfp(&p("a. b :- a.")).unwrap(), set(&["a", "b"]));
        assert_eq!(tp_lfp(&p("")).unwrap(), set(&[]));
        assert_eq!(tp_lfp(&p("a :- b. b :- a.")).unwrap(), set(&[]));
        assert!(tp_lfp(&p("a :- not b.")).is_err());
    }

    #[test]
    fn answer_sets() {
        assert_eq!(answer_sets_bruteforce(&p("p :- &id[p]().")).unwrap(), [set(&[])].into());
        assert_eq!(answer_sets_bruteforce(&p("a :- not b. b :- not a.")).unwrap(), [set(&["a"]), set(&["b"])].into());
        assert!(answer_sets_bruteforce(&p("a :- not a.")).unwrap().is_empty());
        assert_eq!(answer_sets_bruteforce(&p("a v b.")).unwrap(), [set(&["a"]), set(&["b"])].into());
        assert!(answer_sets_bruteforce(&p("a. :- a.")).unwrap().is_empty());
    }

    #[test]
    fn gl_and_flp_agree_on_fixture() {
        let prog = p("a :- not b. b :- not a. c :- a. c :- d. d :- c, not a. :- b, not c.");
        let r = RefSem::default();
        assert_eq!(r.answer_sets(&prog).unwrap(), r.answer_sets_flp(&prog).unwrap());
    }

    #[test]
    fn ir_enumeration() {
        let prog = normalize_constraints(&p(":- a. :- b."));
        let d = set(&["a", "b"]);
        let all = irs_bruteforce(&prog, &d).unwrap();
        let want: BTreeSet<_> =
            [ir(&["a"], &[]), ir(&["b"], &[]), ir(&["a", "b"], &[]), ir(&["a"], &["b"]), ir(&["b"], &["a"])].into();
        assert_eq!(all, want);
        let prog = normalize_constraints(&p(":- a, not c. d :- b."));
        assert!(irs_bruteforce(&prog, &set(&["a", "b", "c"])).unwrap().contains(&ir(&["a"], &["c"])));
        assert!(matches!(irs_bruteforce(&p("a."), &set(&["a"])), Err(Error::DomainInHeads(_))));
    }

    #[test]
    fn minimality_of_irs() {
        let r = RefSem::default();
        let prog = normalize_constraints(&p(":- a. :- b."));
        let d = set(&["a", "b"]);
        assert!(r.is_minimal_ir(&prog, &d, &ir(&["a"], &[])).unwrap());
        assert!(!r.is_minimal_ir(&prog, &d, &ir(&["a", "b"], &[])).unwrap());
        assert!(r.is_minimal_ir(&normalize_constraints(&p(":- not x.")), &set(&["x"]), &ir(&[], &[])).is_err());
        let prog = normalize_constraints(&p(":- not y."));
        assert!(r.is_minimal_ir(&prog, &set(&[]), &ir(&[], &[])).unwrap());
        assert!(matches!(r.is_minimal_ir(&prog, &set(&["x"]), &ir(&["x"], &[])), Ok(false)));
    }

    #[test]
    fn unfounded_sets() {
        let r = RefSem::default();
        assert!(r.is_unfounded_set(&set(&["a"]), &p("a :- a."), &set(&["a"])).unwrap());
        assert!(!r.is_unfounded_set(&set(&["a"]), &p("a."), &set(&["a"])).unwrap());
        assert!(!r.is_unfounded_set(&set(&["p"]), &p("p :- q. q."), &set(&["p", "q"])).unwrap());
    }

    #[test]
    fn ir_via_unfounded_sets() {
        let r = RefSem::default();
        let prog = normalize_constraints(&p(":- a, not c. d :- b."));
        assert!(r.check_ir_via_ufs(&prog, &set(&["a", "b", "c"]), &ir(&["a"], &["c"])).unwrap());
        let prog = normalize_constraints(&p(":- a. :- b."));
        assert!(r.check_ir_via_ufs(&prog, &set(&["a", "b"]), &ir(&["a"], &["b"])).unwrap());
        assert!(!r.check_ir_via_ufs(&p("a."), &set(&[]), &ir(&[], &[])).unwrap());
    }

    #[test]
    fn bound_is_enforced() {
        let r = RefSem { limits: Limits { bruteforce_atoms: 2, ..Limits::default() }, ..RefSem::default() };
        assert!(r.answer_sets(&p("a v b. c v d.")).unwrap_err().is_bound());
    }

    #[test]
    fn saturation_fixture_on_self_loop() {
        // Non-3-colorability by saturation; the self-loop makes the graph uncolorable.
        let prog = p("node(a). edge(a,a).
             col(a,r) v col(a,g) v col(a,b) :- node(a).
             sat :- edge(a,a), col(a,r), col(a,r).
             sat :- edge(a,a), col(a,g), col(a,g).
             sat :- edge(a,a), col(a,b), col(a,b).
             col(a,r) :- sat. col(a,g) :- sat. col(a,b) :- sat.
             :- not sat.");
        let as_ = answer_sets_bruteforce(&prog).unwrap();
        assert_eq!(as_.len(), 1);
        assert!(as_.iter().next().unwrap().contains(&Atom::prop("sat")));
    }
}
