//! Deterministic instance generators: random programs for property checks and
//! the three chain benchmark families (configuration, diagnosis, set guessing).
//!
//! # Random stream
//!
//! Every generator draws from [`SplitMix64`], keyed by `(family, n, seed)`:
//!
//! ```text
//! s  = FNV-1a-64(family bytes)          offset 0xcbf29ce484222325, prime 0x100000001b3
//! s  = mix(s ^ n)
//! s  = mix(s ^ (seed * 0x9e3779b97f4a7c15))          wrapping
//! next: s += 0x9e3779b97f4a7c15; return mix(s)
//! mix(z): z = (z ^ z>>30) * 0xbf58476d1ce4e5b9
//!         z = (z ^ z>>27) * 0x94d049bb133111eb
//!         z ^ z>>31
//! below(k) = next() % k
//! ```
//!
//! The modulo bias is irrelevant at these sizes and keeps streams identical
//! across platforms.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::*;
use crate::externals::{Registry, Table};
use crate::refsem::tp_lfp;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(family: &str, n: u64, seed: u64) -> SplitMix64 {
        let mut s: u64 = 0xcbf2_9ce4_8422_2325;
        for b in family.bytes() {
            s ^= b as u64;
            s = s.wrapping_mul(0x0000_0100_0000_01b3);
        }
        s = mix(s ^ n);
        s = mix(s ^ seed.wrapping_mul(GOLDEN));
        SplitMix64 { state: s }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }

    /// Uniform in `0..k` (`k > 0`).
    pub fn below(&mut self, k: u64) -> u64 {
        self.next_u64() % k
    }

    /// Uniform in `lo..=hi`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.below((hi - lo + 1) as u64) as usize
    }

    /// True with probability `num/den`.
    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.below(den) < num
    }

    pub fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.below(xs.len() as u64) as usize]
    }

    /// Binomial(trials, 1/2).
    pub fn binomial_half(&mut self, trials: u32) -> u32 {
        (0..trials).filter(|_| self.next_u64() >> 63 == 1).count() as u32
    }
}

// ---------------------------------------------------------------------------
// Random programs

fn prop_pool(k: usize) -> Vec<Atom> {
    ["a", "b", "c", "d", "e", "f", "g", "h"][..k].iter().map(|s| Atom::prop(s)).collect()
}

fn random_body(rng: &mut SplitMix64, pool: &[Atom], max_len: usize) -> (Vec<Atom>, Vec<Atom>) {
    let len = rng.range(0, max_len.min(pool.len()));
    let mut chosen: Vec<Atom> = Vec::new();
    while chosen.len() < len {
        let a = rng.pick(pool).clone();
        if !chosen.contains(&a) {
            chosen.push(a);
        }
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for a in chosen {
        if rng.chance(1, 2) {
            pos.push(a);
        } else {
            neg.push(a);
        }
    }
    (pos, neg)
}

fn rule_of(head: Option<Atom>, pos: Vec<Atom>, neg: Vec<Atom>) -> Rule {
    let body = pos.into_iter().map(BodyLiteral::pos).chain(neg.into_iter().map(BodyLiteral::neg)).collect();
    Rule::new(head.into_iter().collect(), body)
}

/// Ground normal program over at most `max_atoms` propositional atoms with
/// `1..=max_rules` rules; roughly one rule in seven is a constraint.
pub fn random_ground_normal(rng: &mut SplitMix64, max_atoms: usize, max_rules: usize) -> Program {
    let pool = prop_pool(rng.range(1, max_atoms));
    let n_rules = rng.range(1, max_rules);
    let rules = (0..n_rules)
        .map(|_| {
            let head = (!rng.chance(1, 7)).then(|| rng.pick(&pool).clone());
            let (pos, neg) = random_body(rng, &pool, 3);
            if head.is_none() && pos.is_empty() && neg.is_empty() {
                return rule_of(None, vec![], vec![rng.pick(&pool).clone()]);
            }
            rule_of(head, pos, neg)
        })
        .collect();
    Program::new(rules)
}

/// Random safe non-ground program: a domain `dom/1` over up to `n_consts`
/// constants, derived predicates `p/1`, `q/1`, `r/2`, rules with at most two
/// variables, each bound by a positive `dom` atom.
pub fn random_nonground(rng: &mut SplitMix64, n_consts: usize, max_rules: usize) -> Program {
    let consts: Vec<Term> = (1..=rng.range(1, n_consts) as i64).map(Term::int).collect();
    let mut rules: Vec<Rule> =
        consts.iter().filter(|_| rng.chance(3, 4)).map(|c| Rule::fact(Atom::new("dom", vec![c.clone()]))).collect();
    if rules.is_empty() {
        rules.push(Rule::fact(Atom::new("dom", vec![consts[0].clone()])));
    }
    let vars = [Term::v("X"), Term::v("Y")];
    for _ in 0..rng.range(1, max_rules) {
        let nv = rng.range(0, 2);
        let vs: Vec<Term> = vars[..nv].to_vec();
        let term = |rng: &mut SplitMix64| -> Term {
            if vs.is_empty() || rng.chance(1, 5) {
                rng.pick(&consts).clone()
            } else {
                rng.pick(&vs).clone()
            }
        };
        let atom = |rng: &mut SplitMix64| -> Atom {
            match rng.below(3) {
                0 => Atom::new("p", vec![term(rng)]),
                1 => Atom::new("q", vec![term(rng)]),
                _ => Atom::new("r", vec![term(rng), term(rng)]),
            }
        };
        let mut pos: Vec<Atom> = vs.iter().map(|v| Atom::new("dom", vec![v.clone()])).collect();
        let mut neg = Vec::new();
        for _ in 0..rng.range(0, 2) {
            let a = atom(rng);
            if rng.chance(1, 2) {
                pos.push(a);
            } else {
                neg.push(a);
            }
        }
        let head = (!rng.chance(1, 6)).then(|| atom(rng));
        if head.is_none() && pos.is_empty() && neg.is_empty() {
            continue;
        }
        rules.push(rule_of(head, pos, neg));
    }
    Program::new(rules)
}

/// A ground program with a separate input domain `D` (atoms `x..`, never in
/// heads) and an input fact set `F ⊆ D`.
pub fn random_with_domain(
    rng: &mut SplitMix64,
    max_d: usize,
    max_atoms: usize,
    max_rules: usize,
) -> (Program, BTreeSet<Atom>, BTreeSet<Atom>) {
    let d: Vec<Atom> = ["x", "y", "z", "w"][..rng.range(1, max_d.min(4))].iter().map(|s| Atom::prop(s)).collect();
    let inner = prop_pool(rng.range(1, max_atoms));
    let all: Vec<Atom> = inner.iter().chain(&d).cloned().collect();
    let rules = (0..rng.range(1, max_rules))
        .map(|_| {
            let head = (!rng.chance(1, 4)).then(|| rng.pick(&inner).clone());
            let (pos, neg) = random_body(rng, &all, 3);
            if head.is_none() && pos.is_empty() && neg.is_empty() {
                return rule_of(None, vec![rng.pick(&d).clone()], vec![]);
            }
            rule_of(head, pos, neg)
        })
        .collect();
    let f = d.iter().filter(|_| rng.chance(1, 2)).cloned().collect();
    (Program::new(rules), d.into_iter().collect(), f)
}

/// Random two-unit chain: a guess over `g(1..k)` in the first unit, and a
/// checking unit using `id`/`diff` externals over the guess plus random
/// constraints. At most 9 ground atoms in total.
pub fn random_chain(rng: &mut SplitMix64) -> Program {
    let k = rng.range(1, 2) as i64;
    let mut text = String::new();
    for i in 1..=k {
        text += &format!("e({i}). ");
    }
    text += "g(X) v h(X) :- e(X). ";
    if rng.chance(1, 2) {
        let (i, j) = (rng.range(1, k as usize), rng.range(1, k as usize));
        text += &format!(":- g({i}), h({j}). ");
    }
    text += "#split. ";
    text += match rng.below(3) {
        0 => "s(X) :- &diff[e,g](X). ",
        1 => "s(X) :- &id[g](X). ",
        _ => "s(X) :- &diff[e,h](X). ",
    };
    for _ in 0..rng.range(0, 2) {
        let i = rng.range(1, k as usize);
        text += match rng.below(4) {
            0 => format!(":- s({i}), g({i}). "),
            1 => format!(":- not s({i}). "),
            2 => format!("t :- s({i}), not h({i}). "),
            _ => format!(":- s({i}), not t. "),
        }
        .as_str();
    }
    crate::parser::parse_program(&text).expect("generated chain parses")
}

// ---------------------------------------------------------------------------
// Benchmark families

/// A program together with the table externals it uses.
#[derive(Clone, Debug)]
pub struct Instance {
    pub program: Program,
    /// External name to (input predicate count, table); all are nonmonotone
    /// with one output.
    pub tables: BTreeMap<String, (usize, Table)>,
}

impl Instance {
    pub fn registry(&self) -> Registry {
        let mut r = Registry::new();
        for (name, (ia, t)) in &self.tables {
            r.register_table(name, *ia, 1, false, t.clone());
        }
        r
    }
}

fn push_split(p: &mut Program) {
    p.unit_markers.push(p.rules.len());
}

fn parse_rules(text: &str) -> Vec<Rule> {
    crate::parser::parse_program(text).expect("generator text parses").rules
}

fn subsets<T: Clone + Ord>(xs: &[T]) -> impl Iterator<Item = BTreeSet<T>> + '_ {
    (0u64..1 << xs.len())
        .map(move |m| xs.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, x)| x.clone()).collect())
}

/// The committee program: guess a committee without conflicts of interest,
/// then demand technical or financial competence as computed by the
/// nonmonotone table external `competences`. `joe` and `sue` are the only
/// technicians, `alyson` the only economist; a committee with both
/// technicians loses the `resources` competence.
pub fn committee() -> Instance {
    let persons = ["alyson", "jack", "joe", "joseph", "sue"];
    let mut p = Program::default();
    let mut text: String = persons.iter().map(|x| format!("person({x}). ")).collect();
    text += "conflict(jack, alyson). in(X) v out(X) :- person(X). :- in(X), in(Y), conflict(X, Y).";
    p.rules = parse_rules(&text);
    push_split(&mut p);
    p.rules.extend(parse_rules("comp(X) :- &competences[in](X). :- not comp(technical), not comp(financial)."));
    let ins: Vec<Atom> = persons.iter().map(|x| Atom::consts("in", &[*x])).collect();
    let mut t = Table::default();
    for s in subsets(&ins) {
        let has = |x: &str| s.contains(&Atom::consts("in", &[x]));
        let mut out = Vec::new();
        if has("joe") || has("sue") {
            out.push(vec![Term::c("technical")]);
        }
        if has("alyson") {
            out.push(vec![Term::c("financial")]);
        }
        if s.len() >= 2 && !(has("joe") && has("sue")) {
            out.push(vec![Term::c("resources")]);
        }
        t.insert(s, out);
    }
    Instance { program: p, tables: [("competences".to_string(), (1, t))].into_iter().collect() }
}

pub fn config_properties(n: usize) -> usize {
    n / 5 + 1
}

/// Abstract configuration `(D, P, m, C)`: `n` domain elements, `⌊n/5+1⌋`
/// properties, a uniformly random `m: 2^D → 2^P` as table external `m`, and
/// Binomial(2n, 1/2) constraints `(C⁺, C⁻)`, each rendered as
/// `:- has(c⁺).., not has(c⁻)..`.
pub fn gen_config_instance(n: usize, seed: u64) -> Instance {
    let mut rng = SplitMix64::new("config", n as u64, seed);
    let props: Vec<Term> = (1..=config_properties(n)).map(|i| Term::c(&format!("p{i}"))).collect();
    let elems: Vec<String> = (1..=n).map(|i| format!("e{i}")).collect();
    let mut p = Program::default();
    let mut text: String = elems.iter().map(|e| format!("elem({e}). ")).collect();
    text += "sel(X) v nsel(X) :- elem(X).";
    p.rules = parse_rules(&text);
    push_split(&mut p);
    p.rules.extend(parse_rules("has(P) :- &m[sel](P)."));
    let sels: Vec<Atom> = elems.iter().map(|e| Atom::consts("sel", &[e.as_str()])).collect();
    let mut t = Table::default();
    for s in subsets(&sels) {
        let out: Vec<Vec<Term>> = props.iter().filter(|_| rng.chance(1, 2)).map(|x| vec![x.clone()]).collect();
        t.insert(s, out);
    }
    let count = rng.binomial_half(2 * n as u32);
    for _ in 0..count {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        while pos.is_empty() && neg.is_empty() {
            for x in &props {
                match rng.below(3) {
                    0 => pos.push(Atom::new("has", vec![x.clone()])),
                    1 => neg.push(Atom::new("has", vec![x.clone()])),
                    _ => {}
                }
            }
        }
        p.rules.push(rule_of(None, pos, neg));
    }
    Instance { program: p, tables: [("m".to_string(), (1, t))].into_iter().collect() }
}

/// Diagnosis `⟨O_d, O_p, H, C, P⟩` with `n` observations, each definite with
/// probability 1/5. `H` has `⌈n/2⌉` hypotheses; the inner program `P` derives
/// each observation from one or two random hypotheses. The external
/// `entails[sel](H)` is a table giving, per selection of potential
/// observations, the hypotheses true in every answer set of
/// `P ∪ {h ∨ h̄}` that contains the definite and selected observations.
pub fn gen_diagnosis_instance(n: usize, seed: u64) -> Instance {
    let mut rng = SplitMix64::new("diagnosis", n as u64, seed);
    let hyps: Vec<String> = (1..=n.div_ceil(2)).map(|i| format!("h{i}")).collect();
    let obs: Vec<String> = (1..=n).map(|i| format!("o{i}")).collect();
    let definite: Vec<bool> = obs.iter().map(|_| rng.chance(1, 5)).collect();
    // inner program: o :- h. or o :- h, h'.
    let mut inner = Vec::new();
    for o in &obs {
        for _ in 0..rng.range(1, 2) {
            let mut body = vec![Atom::prop(rng.pick(&hyps))];
            if rng.chance(1, 3) {
                let h = Atom::prop(rng.pick(&hyps));
                if !body.contains(&h) {
                    body.push(h);
                }
            }
            inner.push(Rule::normal(Atom::prop(o), body, vec![]));
        }
    }
    let inner = Program::new(inner);
    let hyp_atoms: Vec<Atom> = hyps.iter().map(|h| Atom::prop(h)).collect();
    // answer sets of P ∪ {h ∨ h̄}: one per hypothesis subset, closed under P
    let worlds: Vec<(BTreeSet<Atom>, BTreeSet<Atom>)> =
        subsets(&hyp_atoms).map(|t| (t.clone(), tp_lfp(&inner.with_facts(&t)).expect("positive program"))).collect();
    let def_obs: BTreeSet<Atom> = obs.iter().zip(&definite).filter(|(_, d)| **d).map(|(o, _)| Atom::prop(o)).collect();
    let pot: Vec<&String> = obs.iter().zip(&definite).filter(|(_, d)| !**d).map(|(o, _)| o).collect();
    let sels: Vec<Atom> = pot.iter().map(|o| Atom::consts("sel", &[o.as_str()])).collect();
    let mut t = Table::default();
    for s in subsets(&sels) {
        let mut need = def_obs.clone();
        need.extend(s.iter().map(|a| Atom::prop(&a.args[0].to_string())));
        let entailed = hyp_atoms
            .iter()
            .filter(|h| worlds.iter().filter(|(_, m)| need.is_subset(m)).all(|(t, _)| t.contains(*h)))
            .map(|h| vec![Term::c(h.pred.as_ref())])
            .collect::<Vec<_>>();
        t.insert(s, entailed);
    }
    let mut text = String::new();
    for (o, d) in obs.iter().zip(&definite) {
        text += &format!("{}({o}). ", if *d { "defObs" } else { "potObs" });
    }
    for h in &hyps {
        text += &format!("hyp({h}). ");
    }
    text += "sel(O) v nsel(O) :- potObs(O). in(H) v out(H) :- hyp(H). ";
    for _ in 0..rng.binomial_half(hyps.len() as u32) {
        let a = rng.pick(&hyps).clone();
        let b = rng.pick(&hyps).clone();
        text += &if a == b { format!(":- in({a}). ") } else { format!(":- in({a}), in({b}). ") };
    }
    let mut p = Program { rules: parse_rules(&text), ..Default::default() };
    push_split(&mut p);
    p.rules.extend(parse_rules("expl(H) :- &entails[sel](H). :- in(H), not expl(H)."));
    Instance { program: p, tables: [("entails".to_string(), (1, t))].into_iter().collect() }
}

/// The set-guessing program for domain size `n`. The external is
/// `diff[dom,in]`, so `r` collects the elements that are out.
pub fn gen_setguess(n: usize) -> Program {
    let mut text: String = (1..=n).map(|i| format!("dom({i}). ")).collect();
    text += "in(X) v out(X) :- dom(X). someIn :- in(X). r(X) :- &diff[dom,in](X). :- r(X), someIn.";
    crate::parser::parse_program(&text).expect("set-guessing program parses")
}
