use std::collections::BTreeSet;
use std::path::PathBuf;

use aspir::ast::Atom;
use aspir::cdnl::SolverOptions;
use aspir::metaenc::{answer_sets_with_queries_oracle, file_loader, solve_with_queries};
use aspir::parse_program;
use aspir::refsem::RefSem;

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/hamiltonian")
}

fn run(file: &str) -> BTreeSet<BTreeSet<Atom>> {
    let d = dir();
    let p = parse_program(&std::fs::read_to_string(d.join(file)).unwrap()).unwrap();
    solve_with_queries(&p, &file_loader(&d), &SolverOptions::default()).unwrap()
}

#[test]
fn whole_program_query_path_has_no_cycle() {
    let sets = run("whole_path.lp");
    assert_eq!(sets.len(), 1);
    assert!(sets.iter().all(|i| i.contains(&Atom::prop("noHamiltonian"))));
}

#[test]
fn whole_program_query_triangle_has_cycle() {
    let sets = run("whole_cycle.lp");
    assert!(!sets.is_empty());
    assert!(sets.iter().all(|i| !i.contains(&Atom::prop("noHamiltonian"))));
}

#[test]
fn per_guess_query_with_inputs() {
    let nh = Atom::prop("notHamiltonian");
    let path = run("guess_path.lp");
    assert_eq!(path.len(), 16);
    assert!(path.iter().all(|i| i.contains(&nh)));
    let cyc = run("guess_cycle.lp");
    assert_eq!(cyc.len(), 8);
    assert_eq!(cyc.iter().filter(|i| !i.contains(&nh)).count(), 1);
    let d = dir();
    let p = parse_program(&std::fs::read_to_string(d.join("guess_cycle.lp")).unwrap()).unwrap();
    assert_eq!(cyc, answer_sets_with_queries_oracle(&p, &file_loader(&d), &RefSem::default()).unwrap());
}
