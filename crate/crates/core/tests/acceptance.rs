//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any fails.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use aspir::ast::*;
use aspir::bench::{run_one, Family};
use aspir::cdnl::{answer_sets, solve, SolveOutcome, SolverOptions};
use aspir::evalchain::{check_learned, evaluate_chain, split_program, Mode};
use aspir::externals::Registry;
use aspir::gen::*;
use aspir::grounder::{ground_naive, ground_program};
use aspir::increason::{analyze_nonground, analyze_with_solver, AnalysisOutcome};
use aspir::metaenc::*;
use aspir::parse_program;
use aspir::refsem::{irs_bruteforce, RefSem};
use aspir::Limits;

type Outcome = Result<String, String>;

// Pinned limits and tolerances.
const CRIT1_PROGRAMS: u64 = 500;
const CRIT1_BUDGET: Duration = Duration::from_secs(60);
const CRIT2_PROGRAMS: u64 = 300;
const CRIT2_BUDGET: Duration = Duration::from_secs(600);
const CRIT3_PROGRAMS: u64 = 50;
const CRIT4_PAIRS: u64 = 100;
const CRIT5_INSTANCES: usize = 300;
const CRIT6_PROGRAMS: u64 = 100;
const CRIT7_PROGRAMS: u64 = 50;
const CRIT8_CHAINS: u64 = 100;
const CRIT8_MAX_DOMAIN: usize = 8;
const CRIT9_SIZES: std::ops::RangeInclusive<usize> = 5..=12;
const CRIT9_MAX_STEP: u64 = 2;
const CRIT9_BUDGET: Duration = Duration::from_secs(300);
const CRIT10_SIZES: std::ops::RangeInclusive<usize> = 2..=9;
const CRIT10_SEEDS: [u64; 3] = [1, 2, 3];
const CRIT10_MIN_SHARE: f64 = 0.90;

fn opts() -> SolverOptions {
    SolverOptions { limits: Limits::default(), record_proofs: false, theory_propagation: true }
}

fn oracle() -> RefSem {
    RefSem::default()
}

fn p(text: &str) -> Program {
    parse_program(text).expect("fixture parses")
}

fn atoms(names: &[&str]) -> BTreeSet<Atom> {
    names.iter().map(|n| Atom::prop(n)).collect()
}

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

fn err<E: std::fmt::Display>(ctx: &str) -> impl FnOnce(E) -> String + '_ {
    move |e| format!("{ctx}: {e}")
}

fn crit1() -> Outcome {
    let start = Instant::now();
    let reg = Registry::new();
    let (mut consistent, mut inconsistent) = (0, 0);
    for seed in 0..CRIT1_PROGRAMS {
        let mut rng = SplitMix64::new("crit1", 0, seed);
        let prog = random_ground_normal(&mut rng, 6, 8);
        let expected: BTreeSet<_> =
            oracle().answer_sets(&prog).map_err(err("oracle"))?.iter().map(project).collect();
        let first = solve(&prog, &BTreeSet::new(), &reg, &opts(), |_, _| ()).map_err(err("solve"))?;
        match first {
            SolveOutcome::AnswerSet(m) => {
                let m = project(&m);
                if !expected.contains(&m) {
                    return Err(format!("seed {seed}: {} is not an answer set of\n{prog}", render_set(&m)));
                }
                consistent += 1;
            }
            SolveOutcome::HandlerResult(()) => {
                if !expected.is_empty() {
                    return Err(format!(
                        "seed {seed}: solver reports inconsistency, oracle has {} answer sets",
                        expected.len()
                    ));
                }
                inconsistent += 1;
            }
        }
        let all: BTreeSet<_> = answer_sets(&prog, &BTreeSet::new(), &reg, &opts())
            .map_err(err("enumerate"))?
            .iter()
            .map(project)
            .collect();
        if all != expected {
            return Err(format!("seed {seed}: enumeration differs from oracle for\n{prog}"));
        }
    }
    let t = start.elapsed();
    if t > CRIT1_BUDGET {
        return Err(format!("took {t:.1?} > {CRIT1_BUDGET:?}"));
    }
    Ok(format!("{CRIT1_PROGRAMS} programs ({consistent} consistent, {inconsistent} inconsistent) agree, {t:.1?}"))
}

/// Checks the meta-program of `prog` against the oracle answer sets `expected`.
fn meta_agrees(prog: &Program, enc: Encoding, expected: &BTreeSet<BTreeSet<Atom>>) -> Result<(), String> {
    let sets = meta_answer_sets(prog, enc, &opts()).map_err(err("meta"))?;
    let saturated = sets.iter().filter(|i| i.contains(&no_as())).count();
    if expected.is_empty() {
        if sets.len() != 1 || saturated != 1 {
            return Err(format!("inconsistent program, meta has {} sets ({saturated} saturated):\n{prog}", sets.len()));
        }
        return Ok(());
    }
    if saturated != 0 {
        return Err(format!("consistent program has a saturated meta answer set:\n{prog}"));
    }
    let decoded: BTreeSet<BTreeSet<Atom>> = sets.iter().filter_map(decode_true).collect();
    let want: BTreeSet<BTreeSet<Atom>> = expected.iter().map(project).collect();
    if decoded != want || decoded.len() != sets.len() {
        return Err(format!("decoded meta answer sets differ from oracle for\n{prog}"));
    }
    Ok(())
}

fn crit2() -> Outcome {
    let start = Instant::now();
    let mut inconsistent = 0;
    for seed in 0..CRIT2_PROGRAMS {
        let mut rng = SplitMix64::new("crit2", 0, seed);
        let prog = random_ground_normal(&mut rng, 4, 5);
        let expected = oracle().answer_sets(&prog).map_err(err("oracle"))?;
        inconsistent += usize::from(expected.is_empty());
        meta_agrees(&prog, Encoding::Ground, &expected).map_err(|e| format!("seed {seed}: {e}"))?;
        if check_inconsistency_meta(&prog, &opts()).map_err(err("meta"))? != expected.is_empty() {
            return Err(format!("seed {seed}: meta consistency check disagrees"));
        }
    }
    let t = start.elapsed();
    if t > CRIT2_BUDGET {
        return Err(format!("took {t:.1?} > {CRIT2_BUDGET:?}"));
    }
    Ok(format!("{CRIT2_PROGRAMS} programs ({inconsistent} inconsistent) exact, {t:.1?}"))
}

fn crit3() -> Outcome {
    let mut progs = vec![p("d(a). q(X) :- d(X), not p(X). p(X) :- d(X), not q(X).")];
    for seed in 0..CRIT3_PROGRAMS {
        let mut rng = SplitMix64::new("crit3", 0, seed);
        progs.push(random_nonground(&mut rng, 3, 4));
    }
    let mut inconsistent = 0;
    for (k, prog) in progs.iter().enumerate() {
        let g = ground_program(prog).map_err(err("ground"))?;
        let expected = oracle().answer_sets(&g).map_err(err("oracle"))?;
        inconsistent += usize::from(expected.is_empty());
        meta_agrees(prog, Encoding::NonGround, &expected).map_err(|e| format!("program {k}: {e}"))?;
    }
    let ex6 = meta_answer_sets(&progs[0], Encoding::NonGround, &opts()).map_err(err("meta"))?;
    let want: BTreeSet<BTreeSet<Atom>> = [
        [Atom::consts("d", &["a"]), Atom::consts("q", &["a"])].into(),
        [Atom::consts("d", &["a"]), Atom::consts("p", &["a"])].into(),
    ]
    .into();
    if ex6.iter().filter_map(decode_true).collect::<BTreeSet<_>>() != want {
        return Err("even-loop projection differs".into());
    }
    Ok(format!("even loop + {CRIT3_PROGRAMS} random non-ground programs ({inconsistent} inconsistent) exact"))
}

fn hamiltonian(file: &str, atom: &str) -> Result<(usize, usize), String> {
    let path = fixture(&format!("hamiltonian/{file}"));
    let prog = parse_program(&std::fs::read_to_string(&path).map_err(err("read"))?).map_err(err("parse"))?;
    let load = file_loader(&fixture("hamiltonian"));
    let sets = solve_with_queries(&prog, &load, &opts()).map_err(err(file))?;
    Ok((sets.len(), sets.iter().filter(|s| s.contains(&Atom::prop(atom))).count()))
}

fn crit4() -> Outcome {
    // cautious query over the whole guess-and-check program
    let (n, with) = hamiltonian("whole_path.lp", "noHamiltonian")?;
    if (n, with) != (1, 1) {
        return Err(format!("whole-program query, path: {with}/{n} answer sets with noHamiltonian, want 1/1"));
    }
    let (n, with) = hamiltonian("whole_cycle.lp", "noHamiltonian")?;
    if n == 0 || with != 0 {
        return Err(format!("whole-program query, cycle: {with}/{n} answer sets with noHamiltonian, want 0/>0"));
    }
    // the guess stays outside, the check is queried per guess
    let (n, with) = hamiltonian("guess_path.lp", "notHamiltonian")?;
    if n != 16 || with != 16 {
        return Err(format!("per-guess query, path: {with}/{n}, want 16/16"));
    }
    let (n, with) = hamiltonian("guess_cycle.lp", "notHamiltonian")?;
    if n != 8 || with != 7 {
        return Err(format!("per-guess query, cycle: {with}/{n}, want 7/8"));
    }
    let (mut entailed, mut with_input) = (0, 0);
    for seed in 0..CRIT4_PAIRS {
        let mut rng = SplitMix64::new("crit4", 0, seed);
        let s = random_ground_normal(&mut rng, 4, 5);
        let pool: Vec<Atom> = s.ordinary_atoms().into_iter().collect();
        if pool.is_empty() {
            continue;
        }
        let mode = if rng.chance(1, 2) { QueryMode::Brave } else { QueryMode::Cautious };
        let mut q: Vec<(Polarity, Atom)> = Vec::new();
        for _ in 0..rng.range(1, 2) {
            let a = rng.pick(&pool).clone();
            if q.iter().all(|(_, b)| *b != a) {
                q.push((if rng.chance(2, 3) { Polarity::Pos } else { Polarity::Neg }, a));
            }
        }
        // optional input predicate `x`, used positively by the subprogram
        let input = rng.chance(1, 2);
        let mut s = s;
        let mut facts = BTreeSet::new();
        if input {
            with_input += 1;
            let target = rng.pick(&pool).clone();
            s.rules.push(Rule::normal(target, vec![Atom::prop("x")], vec![]));
            if rng.chance(1, 2) {
                facts.insert(Atom::prop("x"));
            }
        }
        let lits: Vec<String> =
            q.iter().map(|(pol, a)| if *pol == Polarity::Pos { a.to_string() } else { format!("not {a}") }).collect();
        let tag = if mode == QueryMode::Brave { "b" } else { "c" };
        let inputs = if input { "; x" } else { "" };
        let mut text = format!("ok :- &query_{tag}[\"s\"{inputs}]({}).", lits.join(", "));
        for f in &facts {
            text += &format!(" {f}.");
        }
        let prog = p(&text);
        let sub = s.clone();
        let load = move |_: &str| Ok(sub.clone());
        let sets = solve_with_queries(&prog, &load, &opts()).map_err(err("rewrite"))?;
        let want = query_entails(&s, mode, &facts, &q, &oracle()).map_err(err("oracle"))?;
        entailed += usize::from(want);
        let got: Vec<bool> = sets.iter().map(|i| i.contains(&Atom::prop("ok"))).collect();
        if got != vec![want] {
            return Err(format!("seed {seed}: rewritten program gives {got:?}, oracle {want} for `{text}` over\n{s}"));
        }
    }
    Ok(format!(
        "Hamiltonian fixtures (path: true, 3-cycle: false); {CRIT4_PAIRS} random query pairs ({entailed} entailed, {with_input} with input) exact"
    ))
}

fn crit5() -> Outcome {
    let reg = Registry::new();
    let mut checked = 0;
    let mut seed = 0;
    let mut sizes = 0;
    while checked < CRIT5_INSTANCES {
        seed += 1;
        let mut rng = SplitMix64::new("crit5", 0, seed);
        let (prog, d, f) = random_with_domain(&mut rng, 4, 3, 5);
        if oracle().is_consistent(&prog, &f).map_err(err("oracle"))? {
            continue;
        }
        match analyze_with_solver(&prog, &f, &d, &reg, &opts()).map_err(err("analyze"))? {
            AnalysisOutcome::Ir(ir) => {
                if !oracle().is_ir(&prog, &d, &ir).map_err(err("is_ir"))? {
                    return Err(format!("seed {seed}: {ir} is not an IR of\n{prog}wrt. {}", render_set(&d)));
                }
                sizes += ir.size();
            }
            other => return Err(format!("seed {seed}: expected an IR, got {other:?}")),
        }
        checked += 1;
    }
    Ok(format!("{checked} inconsistent instances, 0 failures (mean IR size {:.2})", sizes as f64 / checked as f64))
}

fn crit6() -> Outcome {
    let mut cases: Vec<(Program, BTreeSet<Atom>)> = vec![
        (p(":- a, not c. d :- b."), atoms(&["a", "b", "c"])),
        (p(":- a. :- b."), atoms(&["a", "b"])),
        (p("q :- a. :- q, not b."), atoms(&["a", "b"])),
        (p("x :- not y. y :- not x. :- a, x. :- a, y."), atoms(&["a"])),
        (p("a."), atoms(&["b"])),
    ];
    let fixtures = cases.len();
    for seed in 0..CRIT6_PROGRAMS {
        let mut rng = SplitMix64::new("crit6", 0, seed);
        let (prog, d, _) = random_with_domain(&mut rng, 3, 3, 4);
        cases.push((prog, d));
    }
    let mut total = 0;
    for (k, (prog, d)) in cases.iter().enumerate() {
        let via_tau = enumerate_irs_tau(prog, d, &opts()).map_err(err("tau"))?;
        let bf = irs_bruteforce(prog, d).map_err(err("bruteforce"))?;
        if via_tau != bf {
            return Err(format!("case {k}: tau gives {} IRs, brute force {} for\n{prog}", via_tau.len(), bf.len()));
        }
        total += bf.len();
    }
    Ok(format!("{fixtures} fixtures + {CRIT6_PROGRAMS} random programs, {total} IRs, exact set equality"))
}

fn crit7() -> Outcome {
    let reg = Registry::new();
    let mut cases: Vec<(Program, BTreeSet<Atom>, BTreeSet<Atom>, BTreeSet<Term>)> = Vec::new();
    // an atom whose only rule body is unsupported, for 1..=3 constants
    for k in 1..=3i64 {
        let consts: BTreeSet<Term> = (1..=k).map(Term::int).collect();
        let prog = p("q(X) :- p(X). :- not q(1). :- a.");
        let mut d = atoms(&["a"]);
        d.extend((1..=k).map(|i| Atom::new("p", vec![Term::int(i)])));
        for f in [BTreeSet::new(), atoms(&["a"])] {
            cases.push((prog.clone(), d.clone(), f, consts.clone()));
        }
    }
    for seed in 0..CRIT7_PROGRAMS {
        let mut rng = SplitMix64::new("crit7", 0, seed);
        let prog = random_nonground(&mut rng, 2, 4);
        // domain: instances of `dom`, which the program may only use in bodies
        let consts: BTreeSet<Term> = (1..=2).map(Term::int).collect();
        let d: BTreeSet<Atom> = consts.iter().map(|c| Atom::new("dom", vec![c.clone()])).collect();
        let prog = Program::new(
            prog.rules.into_iter().filter(|r| !(r.is_fact() && r.head[0].pred.as_ref() == "dom")).collect(),
        );
        let f: BTreeSet<Atom> = d.iter().filter(|_| rng.chance(1, 2)).cloned().collect();
        cases.push((prog, d, f, consts));
    }
    let (mut lifted, mut not_liftable, mut consistent) = (0, 0, 0);
    for (k, (prog, d, f, c)) in cases.iter().enumerate() {
        match analyze_nonground(prog, f, d, c, &reg, &opts()).map_err(err("analyze"))? {
            AnalysisOutcome::Ir(ir) => {
                let naive = ground_naive(prog, c).map_err(err("ground"))?;
                if !oracle().is_ir(&naive, d, &ir).map_err(err("is_ir"))? {
                    return Err(format!("case {k}: lifted {ir} fails validation for\n{prog}"));
                }
                lifted += 1;
            }
            AnalysisOutcome::NotLiftable(_) => not_liftable += 1,
            AnalysisOutcome::AnswerSet(_) => consistent += 1,
        }
    }
    Ok(format!(
        "{} cases: {lifted} lifted IRs valid, {not_liftable} not liftable, {consistent} consistent; 0 failures",
        cases.len()
    ))
}

fn modes_agree(
    prog: &Program,
    reg: &Registry,
    label: &str,
) -> Result<(BTreeSet<BTreeSet<Atom>>, Vec<aspir::evalchain::Learned>, aspir::evalchain::EvaluationChain), String> {
    let mut chain = split_program(prog, reg).map_err(err("split"))?;
    let mut results = Vec::new();
    for m in [Mode::Monolithic, Mode::Splitting, Mode::TuProp] {
        results.push(evaluate_chain(&mut chain, &BTreeSet::new(), m, reg, &opts()).map_err(err(label))?);
    }
    if results[0] != results[1] || results[0] != results[2] {
        return Err(format!(
            "{label}: modes disagree ({} / {} / {} answer sets)",
            results[0].len(),
            results[1].len(),
            results[2].len()
        ));
    }
    let learned = chain.learned.clone();
    Ok((results.swap_remove(0), learned, chain))
}

fn crit8() -> Outcome {
    let mut fixtures: Vec<(String, Program, Registry)> = Vec::new();
    for n in 1..=4 {
        fixtures.push((format!("setguess({n})"), gen_setguess(n), Registry::new()));
    }
    let c = committee();
    fixtures.push(("committee".into(), c.program.clone(), c.registry()));
    for n in 2..=4 {
        let i = gen_config_instance(n, 1);
        fixtures.push((format!("config({n})"), i.program.clone(), i.registry()));
        let i = gen_diagnosis_instance(n, 1);
        fixtures.push((format!("diagnosis({n})"), i.program.clone(), i.registry()));
    }
    for seed in 0..CRIT8_CHAINS {
        let mut rng = SplitMix64::new("crit8", 0, seed);
        fixtures.push((format!("chain#{seed}"), random_chain(&mut rng), Registry::new()));
    }
    let (mut checked, mut skipped) = (0, 0);
    for (label, prog, reg) in &fixtures {
        let (_, learned, chain) = modes_agree(prog, reg, label)?;
        for l in &learned {
            if l.domain.len() > CRIT8_MAX_DOMAIN {
                skipped += 1;
                continue;
            }
            let with_tables = RefSem::new(reg.clone(), Limits::default(), Default::default());
            if !check_learned(&chain, l, reg, &with_tables).map_err(err("check"))? {
                return Err(format!("{label}: learned {} loses answer sets", l.constraint));
            }
            checked += 1;
        }
    }
    Ok(format!(
        "{} chains agree across modes; {checked} learned constraints verified exhaustively ({skipped} with |D| > {CRIT8_MAX_DOMAIN} not enumerated)",
        fixtures.len()
    ))
}

fn crit9() -> Outcome {
    let start = Instant::now();
    let mut report = Vec::new();
    let mut prev: Option<u64> = None;
    for n in CRIT9_SIZES {
        let split = run_one(Family::SetGuess, n, 0, Mode::Splitting, &opts()).map_err(err("splitting"))?;
        let tu = run_one(Family::SetGuess, n, 0, Mode::TuProp, &opts()).map_err(err("tuprop"))?;
        let (s2, t2) = (split.unit_solves[1], tu.unit_solves[1]);
        if s2 != 1 << n {
            return Err(format!("n={n}: splitting unit-2 solves {s2} != 2^{n} (unit-1 conflicts {})", split.conflicts));
        }
        if t2 >= s2 {
            return Err(format!("n={n}: tuprop unit-2 solves {t2} not below {s2}"));
        }
        if split.answer_count != Some(2) || tu.answer_count != Some(2) {
            return Err(format!("n={n}: answer counts {:?} / {:?}", split.answer_count, tu.answer_count));
        }
        let step = prev.map(|p| t2 as i64 - p as i64);
        if let Some(s) = step {
            if s < 0 || s as u64 > CRIT9_MAX_STEP {
                return Err(format!("n={n}: tuprop step {s} outside 0..={CRIT9_MAX_STEP}"));
            }
        }
        prev = Some(t2);
        report.push(format!("n={n}: {s2} vs {t2} (step {})", step.map_or("-".into(), |s| format!("+{s}"))));
    }
    let t = start.elapsed();
    if t > CRIT9_BUDGET {
        return Err(format!("took {t:.1?} > {CRIT9_BUDGET:?}"));
    }
    Ok(format!("unit-2 solves splitting vs tuprop: {}; {t:.1?}", report.join(", ")))
}

fn crit10() -> Outcome {
    let mut lines = Vec::new();
    for family in [Family::Config, Family::Diagnosis] {
        let jobs: Vec<(usize, u64)> = CRIT10_SIZES.flat_map(|n| CRIT10_SEEDS.map(|s| (n, s))).collect();
        let rows: Vec<Result<[aspir::bench::Row; 3], String>> =
            aspir::par::map(aspir::par::Parallelism::Parallel, jobs, |(n, s)| {
                let run =
                    |m| run_one(family, n, s, m, &opts()).map_err(|e| format!("{family} n={n} seed={s} {m}: {e}"));
                Ok([run(Mode::Monolithic)?, run(Mode::Splitting)?, run(Mode::TuProp)?])
            });
        let (mut total, mut le, mut excess) = (0, 0, 0);
        for r in rows {
            let [mono, split, tu] = r?;
            if mono.answer_count != split.answer_count || split.answer_count != tu.answer_count {
                return Err(format!(
                    "{family} n={} seed={}: answer counts {:?}/{:?}/{:?}",
                    split.n, split.seed, mono.answer_count, split.answer_count, tu.answer_count
                ));
            }
            total += 1;
            let (a, b) = (tu.total_work(), split.total_work());
            if a <= b {
                le += 1;
            } else if a - b > tu.learned_constraints as u64 {
                excess += 1;
            }
        }
        let share = le as f64 / total as f64;
        if share < CRIT10_MIN_SHARE || excess > 0 {
            return Err(format!(
                "{family}: tuprop <= splitting on {le}/{total}, {excess} exceed by more than learned constraints"
            ));
        }
        lines.push(format!("{family}: tuprop <= splitting on {le}/{total}"));
    }
    Ok(format!("{}; answer counts agree across modes", lines.join("; ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("reference-semantics soundness", crit1),
        ("meta inconsistency check (ground)", crit2),
        ("meta inconsistency check (non-ground)", crit3),
        ("query atoms", crit4),
        ("IR soundness", crit5),
        ("tau completeness", crit6),
        ("non-ground lifting", crit7),
        ("tu-propagation safety", crit8),
        ("set-guessing counter shape", crit9),
        ("config/diagnosis counter shape", crit10),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let k = i + 1;
        if !filter.is_empty() && !filter.contains(&k) {
            continue;
        }
        let start = Instant::now();
        let res = std::panic::catch_unwind(*f).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed();
        match res {
            Ok(detail) => println!("PASS {k:>2} {name}: {detail} [{t:.1?}]"),
            Err(e) => {
                failed += 1;
                println!("FAIL {k:>2} {name}: {e} [{t:.1?}]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
