use std::collections::BTreeSet;

use aspir::ast::Atom;
use aspir::externals::Registry;
use aspir::gen::{random_ground_normal, SplitMix64};
use aspir::par::Parallelism;
use aspir::refsem::RefSem;
use aspir::{parse_program, Limits};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn oracle(mode: Parallelism) -> RefSem {
    RefSem::new(Registry::new(), Limits::default(), mode)
}

/// Answer-set enumeration of the brute-force oracle over a 14-atom program
/// where every atom is guessed.
fn answer_sets(c: &mut Criterion) {
    let mut text = String::new();
    for i in 0..7 {
        text += &format!("a{i} :- not b{i}. b{i} :- not a{i}. ");
    }
    text += ":- a0, a1, b2. :- b3, a4. c :- a5, b6.";
    let p = parse_program(&text).unwrap();
    let mut g = c.benchmark_group("oracle_answer_sets");
    for mode in [Parallelism::Sequential, Parallelism::Parallel] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &p, |b, p| {
            b.iter(|| oracle(mode).answer_sets(p).unwrap())
        });
    }
    g.finish();
}

/// Inconsistency-reason enumeration over a 6-atom domain.
fn irs(c: &mut Criterion) {
    let mut rng = SplitMix64::new("bench", 0, 7);
    let mut p = random_ground_normal(&mut rng, 6, 8);
    let d: BTreeSet<Atom> = ["x", "y", "z", "u", "v", "w"].iter().map(|s| Atom::prop(s)).collect();
    p.extend(parse_program(":- x, not a. :- y, z. b :- u, not w. :- v, not b.").unwrap().rules);
    let mut g = c.benchmark_group("oracle_irs");
    g.sample_size(20);
    for mode in [Parallelism::Sequential, Parallelism::Parallel] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &p, |b, p| {
            b.iter(|| oracle(mode).irs(p, &d).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, answer_sets, irs);
criterion_main!(benches);
