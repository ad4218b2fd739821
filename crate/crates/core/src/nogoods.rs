//! Clark completion and singleton loop nogoods of ground ordinary programs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::ast::*;
use crate::error::{Error, Result};

/// `T a` (sign = true) or `F a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SLit {
    pub sign: bool,
    pub atom: Atom,
}

impl SLit {
    pub fn t(atom: Atom) -> SLit {
        SLit { sign: true, atom }
    }

    pub fn f(atom: Atom) -> SLit {
        SLit { sign: false, atom }
    }

    pub fn negate(&self) -> SLit {
        SLit { sign: !self.sign, atom: self.atom.clone() }
    }
}

impl fmt::Display for SLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", if self.sign { "T" } else { "F" }, self.atom)
    }
}

/// A set of signed literals; an assignment is a solution iff it does not contain all of them.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Nogood(pub Vec<SLit>);

impl Nogood {
    pub fn new(mut lits: Vec<SLit>) -> Nogood {
        lits.sort_by(|a, b| a.atom.cmp(&b.atom).then(a.sign.cmp(&b.sign)));
        lits.dedup();
        Nogood(lits)
    }

    /// Contains some atom with both signs (never violated).
    pub fn is_tautology(&self) -> bool {
        self.0.windows(2).any(|w| w[0].atom == w[1].atom)
    }

    /// Violated by the complete interpretation `i` (true atoms).
    pub fn violated_by(&self, i: &BTreeSet<Atom>) -> bool {
        self.0.iter().all(|l| i.contains(&l.atom) == l.sign)
    }
}

impl fmt::Display for Nogood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

pub const BODY_PRED: &str = "__body";

/// Canonical body: sorted, deduplicated signed atoms.
pub type BodyKey = Vec<(Polarity, Atom)>;

pub fn body_key(r: &Rule) -> Result<BodyKey> {
    let mut k = Vec::with_capacity(r.body.len());
    for l in &r.body {
        match &l.kind {
            LitKind::Ordinary(a) => k.push((l.polarity, a.clone())),
            _ => return Err(Error::Unsupported(format!("non-ordinary body literal `{l}` in completion"))),
        }
    }
    k.sort();
    k.dedup();
    Ok(k)
}

fn lit_of(p: Polarity, a: &Atom) -> SLit {
    SLit { sign: p == Polarity::Pos, atom: a.clone() }
}

/// Nogood representation of a ground ordinary program.
#[derive(Clone, Debug, Default)]
pub struct Completion {
    pub nogoods: Vec<Nogood>,
    /// Body auxiliaries, in creation order.
    pub bodies: Vec<(BodyKey, Atom)>,
    pub body_index: BTreeMap<BodyKey, Atom>,
    /// Program atoms (auxiliary body atoms excluded).
    pub atoms: BTreeSet<Atom>,
    /// Support nogoods only (one per non-fact atom).
    pub support: Vec<Nogood>,
}

impl Completion {
    pub fn beta(&self, key: &BodyKey) -> Option<&Atom> {
        self.body_index.get(key)
    }
}

struct Builder {
    c: Completion,
    supports: BTreeMap<Atom, Vec<Atom>>,
    facts: BTreeSet<Atom>,
}

impl Builder {
    fn push(&mut self, n: Nogood) {
        if !n.is_tautology() {
            self.c.nogoods.push(n);
        }
    }

    fn intern(&mut self, key: BodyKey) -> Atom {
        if let Some(b) = self.c.body_index.get(&key) {
            return b.clone();
        }
        let beta = Atom::new(BODY_PRED, vec![Term::int(self.c.bodies.len() as i64)]);
        self.push(Nogood::new(
            std::iter::once(SLit::f(beta.clone())).chain(key.iter().map(|(p, a)| lit_of(*p, a))).collect(),
        ));
        for (p, a) in &key {
            self.push(Nogood::new(vec![SLit::t(beta.clone()), lit_of(*p, a).negate()]));
        }
        self.c.body_index.insert(key.clone(), beta.clone());
        self.c.bodies.push((key, beta.clone()));
        beta
    }

    /// `h` is derived by body `key` (already shifted).
    fn support(&mut self, h: &Atom, key: BodyKey) {
        if key.is_empty() {
            self.facts.insert(h.clone());
            self.push(Nogood::new(vec![SLit::f(h.clone())]));
            return;
        }
        let b = self.intern(key);
        self.push(Nogood::new(vec![SLit::f(h.clone()), SLit::t(b.clone())]));
        self.supports.entry(h.clone()).or_default().push(b);
    }
}

fn build(p: &Program, extra_atoms: &BTreeSet<Atom>) -> Result<Completion> {
    if !p.is_ground() {
        return Err(Error::NonGround("completion requires a ground program".into()));
    }
    let mut atoms = p.ordinary_atoms();
    atoms.extend(extra_atoms.iter().cloned());
    if atoms.iter().any(|a| a.pred.as_ref() == BODY_PRED) {
        return Err(Error::Invalid(format!("predicate {BODY_PRED} is reserved")));
    }
    let mut b =
        Builder { c: Completion { atoms, ..Default::default() }, supports: BTreeMap::new(), facts: BTreeSet::new() };
    for r in &p.rules {
        let key = body_key(r)?;
        match r.head.len() {
            0 => b.push(Nogood::new(key.iter().map(|(p, a)| lit_of(*p, a)).collect())),
            1 => b.support(&r.head[0], key),
            _ => {
                let mut clause: Vec<SLit> = r.head.iter().map(|h| SLit::f(h.clone())).collect();
                if !key.is_empty() {
                    let beta = b.intern(key.clone());
                    clause.push(SLit::t(beta));
                }
                b.push(Nogood::new(clause));
                for h in &r.head {
                    let mut shifted = key.clone();
                    shifted.extend(r.head.iter().filter(|o| *o != h).map(|o| (Polarity::Neg, o.clone())));
                    shifted.sort();
                    shifted.dedup();
                    b.support(h, shifted);
                }
            }
        }
    }
    let atoms: Vec<Atom> = b.c.atoms.iter().cloned().collect();
    for a in atoms {
        if b.facts.contains(&a) {
            continue;
        }
        let mut lits = vec![SLit::t(a.clone())];
        lits.extend(b.supports.get(&a).into_iter().flatten().map(|beta| SLit::f(beta.clone())));
        let n = Nogood::new(lits);
        b.c.support.push(n.clone());
        b.push(n);
    }
    Ok(b.c)
}

/// Completion plus singleton loop nogoods. Disjunctive rules contribute a clause
/// nogood `{F a1, .., F ak, T β}` and support through their shifted bodies.
pub fn clark_completion(p: &Program) -> Result<Completion> {
    build(p, &BTreeSet::new())
}

/// As [`clark_completion`], with additional atoms that occur nowhere in `p`
/// (they receive the unit nogood `{T a}`).
pub fn clark_completion_with(p: &Program, extra_atoms: &BTreeSet<Atom>) -> Result<Completion> {
    build(p, extra_atoms)
}

/// `{T a, F β1, .., F βk}` for every atom `a` that is not a fact.
pub fn singleton_loop_nogoods(p: &Program) -> Result<Vec<Nogood>> {
    Ok(build(p, &BTreeSet::new())?.support)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn beta(k: i64) -> Atom {
        Atom::new(BODY_PRED, vec![Term::int(k)])
    }

    fn ng(lits: &[(bool, Atom)]) -> Nogood {
        Nogood::new(lits.iter().map(|(s, a)| SLit { sign: *s, atom: a.clone() }).collect())
    }

    #[test]
    fn completion_of_negative_rule() {
        let c = clark_completion(&parse_program("a :- not b.").unwrap()).unwrap();
        let (a, b, be) = (Atom::prop("a"), Atom::prop("b"), beta(0));
        let set: BTreeSet<Nogood> = c.nogoods.iter().cloned().collect();
        for want in [
            ng(&[(true, be.clone()), (true, b.clone())]),
            ng(&[(false, be.clone()), (false, b.clone())]),
            ng(&[(false, a.clone()), (true, be.clone())]),
            ng(&[(true, a.clone()), (false, be.clone())]),
            ng(&[(true, b.clone())]),
        ] {
            assert!(set.contains(&want), "missing {want}");
        }
        assert_eq!(set.len(), 5);
    }

    #[test]
    fn fact_and_undefined() {
        let c = clark_completion(&parse_program("a. c :- b.").unwrap()).unwrap();
        assert!(c.nogoods.contains(&ng(&[(false, Atom::prop("a"))])));
        assert!(c.nogoods.contains(&ng(&[(true, Atom::prop("b"))])));
    }

    #[test]
    fn shared_bodies() {
        let c = clark_completion(&parse_program("a :- x. b :- x. x :- not y.").unwrap()).unwrap();
        assert_eq!(c.bodies.len(), 2);
    }

    #[test]
    fn singleton_loops() {
        let s = singleton_loop_nogoods(&parse_program("a :- b. a :- c. d :- a.").unwrap()).unwrap();
        assert!(s.contains(&ng(&[(true, Atom::prop("a")), (false, beta(0)), (false, beta(1))])));
        assert!(s.contains(&ng(&[(true, Atom::prop("b"))])));
        assert!(s.contains(&ng(&[(true, Atom::prop("d")), (false, beta(2))])));
    }

    #[test]
    fn disjunctive_clause() {
        let c = clark_completion(&parse_program("a v b.").unwrap()).unwrap();
        assert!(c.nogoods.contains(&ng(&[(false, Atom::prop("a")), (false, Atom::prop("b"))])));
    }

    #[test]
    fn no_complementary_pairs() {
        let c = clark_completion(&parse_program("a :- b, not b. b :- not a.").unwrap()).unwrap();
        assert!(c.nogoods.iter().all(|n| !n.is_tautology()));
    }
}
