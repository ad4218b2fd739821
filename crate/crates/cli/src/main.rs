//! `aspir`: solve, check, query and explain answer-set programs, evaluate
//! split programs and run the chain benchmarks.
//!
//! Exit codes: 0 success, 1 no answer set / inconsistent / no reason found,
//! 2 usage or input error, 3 resource bound exceeded. Bounds can be tuned with
//! `ASPIR_LIMITS`, e.g. `ASPIR_LIMITS=bruteforce_atoms=24,ground_rules=100000`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use aspir::ast::{render_set, Atom, LitKind, Polarity, Program};
use aspir::bench::{run_suite, to_csv, to_json, Family};
use aspir::cdnl::{answer_sets, SolverOptions};
use aspir::evalchain::{evaluate_chain, split_program, Mode};
use aspir::externals::Registry;
use aspir::grounder::{ground, ExtMode, GroundOptions};
use aspir::increason::{analyze_with_solver, minimize_ir, AnalysisOutcome};
use aspir::metaenc::{
    answer_sets_with_queries_oracle, check_inconsistency_meta, enumerate_irs_tau, file_loader, solve_with_queries, tau,
};
use aspir::par::{self, Parallelism};
use aspir::refsem::RefSem;
use aspir::{parse_program, render_program, Error, InconsistencyReason, Limits};

#[derive(Parser)]
#[command(name = "aspir", version, about = "Answer-set solving with inconsistency reasons")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Cdnl,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum Via {
    Cdnl,
    Tau,
    Bruteforce,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print all answer sets.
    Solve {
        /// Program file
        file: PathBuf,
        /// File whose facts are added as input
        #[arg(long)]
        facts: Option<PathBuf>,
        /// Conflict-driven solver or brute-force reference semantics
        #[arg(long, value_enum, default_value = "cdnl")]
        mode: Engine,
    },
    /// Decide consistency through the saturation meta-program.
    MetaCheck {
        /// Program file
        file: PathBuf,
        /// File whose facts are added as input
        #[arg(long)]
        facts: Option<PathBuf>,
    },
    /// Answer sets of a program with query atoms.
    Query {
        /// Program file
        file: PathBuf,
        /// File whose facts are added as input
        #[arg(long)]
        facts: Option<PathBuf>,
        /// Resolve query atoms by guessing and checking with the reference semantics.
        #[arg(long)]
        oracle: bool,
    },
    /// Inconsistency reasons with respect to an input domain.
    Explain {
        /// Program file
        file: PathBuf,
        /// Comma-separated domain atoms, e.g. `a,p(1,2)`.
        #[arg(long)]
        domain: String,
        /// File whose facts are added as input
        #[arg(long)]
        facts: Option<PathBuf>,
        /// Backend: solver conflict analysis, the reason-enumerating meta-program, or brute force
        #[arg(long, value_enum, default_value = "cdnl")]
        via: Via,
        /// Shrink the reason greedily (validated by brute force).
        #[arg(long)]
        minimize: bool,
        /// Print the reason-enumerating program instead of solving it.
        #[arg(long)]
        emit_tau: bool,
    },
    /// Evaluate a program as a chain of units.
    Chain {
        /// Program file
        file: PathBuf,
        /// monolithic, splitting (split) or tuprop (tu-propagation)
        #[arg(long, value_parser = parse_mode)]
        mode: Mode,
        /// File whose facts are added as input
        #[arg(long)]
        facts: Option<PathBuf>,
    },
    /// Run a benchmark family and write one CSV row per instance and mode.
    Bench {
        /// config, diagnosis or setguess
        #[arg(value_parser = parse_family)]
        family: Family,
        /// Comma-separated instance sizes
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        /// Comma-separated generator seeds
        #[arg(long, value_delimiter = ',', default_value = "1")]
        seeds: Vec<u64>,
        /// Comma-separated evaluation modes
        #[arg(long, value_delimiter = ',', value_parser = parse_mode, default_value = "monolithic,splitting,tuprop")]
        modes: Vec<Mode>,
        /// Output file (standard output if absent).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0: all cores, 1: sequential).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

type Res<T> = Result<T, Error>;

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn load_program(path: &Path) -> Res<Program> {
    aspir::parser::parse_program_named(&read(path)?, &path.display().to_string())
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn load_facts(path: Option<&PathBuf>) -> Res<BTreeSet<Atom>> {
    let Some(path) = path else { return Ok(BTreeSet::new()) };
    let p = load_program(path)?;
    p.rules
        .iter()
        .map(|r| {
            if r.is_fact() && r.head[0].is_ground() {
                Ok(r.head[0].clone())
            } else {
                Err(Error::Invalid(format!("{}: `{r}` is not a ground fact", path.display())))
            }
        })
        .collect()
}

fn parse_domain(s: &str) -> Res<BTreeSet<Atom>> {
    if s.trim().is_empty() {
        return Ok(BTreeSet::new());
    }
    let p = parse_program(&format!("__domain :- {s}."))?;
    p.rules[0]
        .body
        .iter()
        .map(|l| match (&l.kind, l.polarity) {
            (LitKind::Ordinary(a), Polarity::Pos) if a.is_ground() => Ok(a.clone()),
            _ => Err(Error::Invalid(format!("domain entry `{l}` is not a ground atom"))),
        })
        .collect()
}

fn solver_opts() -> Res<SolverOptions> {
    Ok(SolverOptions { limits: Limits::from_env()?, ..SolverOptions::default() })
}

fn oracle(reg: Registry, limits: &Limits) -> RefSem {
    RefSem::new(reg, limits.clone(), Parallelism::Parallel)
}

fn print_sets(sets: &BTreeSet<BTreeSet<Atom>>, as_json: bool) -> u8 {
    if as_json {
        let v: Vec<Vec<String>> = sets.iter().map(|s| s.iter().map(Atom::to_string).collect()).collect();
        println!("{}", json!({ "answer_sets": v }));
    } else {
        for s in sets {
            println!("{}", render_set(s));
        }
    }
    u8::from(sets.is_empty())
}

fn ir_json(ir: &InconsistencyReason) -> Value {
    json!({
        "plus": ir.r_plus.iter().map(Atom::to_string).collect::<Vec<_>>(),
        "minus": ir.r_minus.iter().map(Atom::to_string).collect::<Vec<_>>(),
    })
}

fn print_irs(irs: &[InconsistencyReason], as_json: bool) -> u8 {
    if as_json {
        println!("{}", json!({ "irs": irs.iter().map(ir_json).collect::<Vec<_>>() }));
    } else {
        for ir in irs {
            println!("IR: {ir}");
        }
    }
    u8::from(irs.is_empty())
}

fn run(cli: Cli) -> Res<u8> {
    let as_json = cli.json;
    match cli.cmd {
        Cmd::Solve { file, facts, mode } => {
            let p = load_program(&file)?;
            let f = load_facts(facts.as_ref())?;
            let opts = solver_opts()?;
            let reg = Registry::for_program(&p, &base_dir(&file))?;
            let sets = if !p.query_decls.is_empty() {
                let load = file_loader(&base_dir(&file));
                match mode {
                    Engine::Cdnl => solve_with_queries(&p.with_facts(&f), &load, &opts)?,
                    Engine::Oracle => {
                        answer_sets_with_queries_oracle(&p.with_facts(&f), &load, &oracle(reg, &opts.limits))?
                    }
                }
            } else {
                let g =
                    ground(&p, &f, &reg, &GroundOptions { limits: opts.limits.clone(), ..Default::default() })?.program;
                match mode {
                    Engine::Cdnl => answer_sets(&g, &BTreeSet::new(), &reg, &opts)?,
                    Engine::Oracle => oracle(reg, &opts.limits).answer_sets_projected(&g, &BTreeSet::new())?,
                }
            };
            Ok(print_sets(&sets, as_json))
        }
        Cmd::MetaCheck { file, facts } => {
            let p = load_program(&file)?.with_facts(&load_facts(facts.as_ref())?);
            let inconsistent = check_inconsistency_meta(&p, &solver_opts()?)?;
            if as_json {
                println!("{}", json!({ "consistent": !inconsistent }));
            } else {
                println!("{}", if inconsistent { "INCONSISTENT" } else { "CONSISTENT" });
            }
            Ok(u8::from(inconsistent))
        }
        Cmd::Query { file, facts, oracle: use_oracle } => {
            let p = load_program(&file)?.with_facts(&load_facts(facts.as_ref())?);
            if p.query_decls.is_empty() {
                return Err(Error::Invalid(format!("{}: no query atoms", file.display())));
            }
            let opts = solver_opts()?;
            let load = file_loader(&base_dir(&file));
            let sets = if use_oracle {
                answer_sets_with_queries_oracle(&p, &load, &oracle(Registry::new(), &opts.limits))?
            } else {
                solve_with_queries(&p, &load, &opts)?
            };
            Ok(print_sets(&sets, as_json))
        }
        Cmd::Explain { file, domain, facts, via, minimize, emit_tau } => {
            let p = load_program(&file)?;
            let d = parse_domain(&domain)?;
            let f = load_facts(facts.as_ref())?;
            if let Some(a) = f.iter().find(|a| !d.contains(*a)) {
                return Err(Error::Invalid(format!("fact {a} is outside the domain")));
            }
            let opts = solver_opts()?;
            let reg = Registry::for_program(&p, &base_dir(&file))?;
            // every domain atom may be present: ground independently of the facts
            let gopts = GroundOptions {
                limits: opts.limits.clone(),
                ext_mode: ExtMode::Superset,
                seed_possible: d.clone(),
                ..Default::default()
            };
            let g = ground(&p, &BTreeSet::new(), &reg, &gopts)?.program;
            let oracle = oracle(reg.clone(), &opts.limits);
            if emit_tau {
                print!("{}", render_program(&tau(&d, &g)?));
                return Ok(0);
            }
            let irs: Vec<InconsistencyReason> = match via {
                Via::Cdnl => match analyze_with_solver(&g, &f, &d, &reg, &opts)? {
                    AnalysisOutcome::Ir(ir) | AnalysisOutcome::NotLiftable(ir) => vec![ir],
                    AnalysisOutcome::AnswerSet(m) => {
                        if as_json {
                            println!(
                                "{}",
                                json!({ "consistent": true, "answer_set": m.iter().map(Atom::to_string).collect::<Vec<_>>() })
                            );
                        } else {
                            println!("CONSISTENT {}", render_set(&m));
                        }
                        return Ok(1);
                    }
                },
                Via::Tau => enumerate_irs_tau(&g, &d, &opts)?.into_iter().collect(),
                Via::Bruteforce => oracle.irs(&g, &d)?.into_iter().collect(),
            };
            let irs = if minimize {
                let mut out: Vec<InconsistencyReason> = Vec::new();
                for ir in &irs {
                    let m = minimize_ir(&g, &d, ir, &oracle)?;
                    if !out.contains(&m) {
                        out.push(m);
                    }
                }
                out
            } else {
                irs
            };
            Ok(print_irs(&irs, as_json))
        }
        Cmd::Chain { file, mode, facts } => {
            let p = load_program(&file)?;
            let f = load_facts(facts.as_ref())?;
            let opts = solver_opts()?;
            let reg = Registry::for_program(&p, &base_dir(&file))?;
            let mut chain = split_program(&p, &reg)?;
            let sets = evaluate_chain(&mut chain, &f, mode, &reg, &opts)?;
            let counters = if mode == Mode::Monolithic { vec![chain.monolithic] } else { chain.counters.clone() };
            if as_json {
                let v: Vec<Vec<String>> = sets.iter().map(|s| s.iter().map(Atom::to_string).collect()).collect();
                let learned: Vec<Value> = chain
                    .learned
                    .iter()
                    .map(|l| json!({ "from": l.from, "host": l.host, "constraint": l.constraint.to_string() }))
                    .collect();
                println!(
                    "{}",
                    json!({ "answer_sets": v, "units": chain.len(), "counters": counters, "learned": learned })
                );
                return Ok(u8::from(sets.is_empty()));
            }
            for (i, c) in counters.iter().enumerate() {
                eprintln!("unit {}: groundings={} solves={} conflicts={}", i + 1, c.groundings, c.solves, c.conflicts);
            }
            for l in &chain.learned {
                eprintln!("learned in unit {} (from unit {}): {}", l.host + 1, l.from + 1, l.constraint);
            }
            Ok(print_sets(&sets, false))
        }
        Cmd::Bench { family, sizes, seeds, modes, out, jobs } => {
            let par_mode = if jobs == 1 { Parallelism::Sequential } else { Parallelism::Parallel };
            if jobs > 1 {
                par::set_threads(jobs);
            }
            let rows = run_suite(family, &sizes, &seeds, &modes, &solver_opts()?, par_mode)?;
            let text = if as_json { to_json(&rows) + "\n" } else { to_csv(&rows, true) };
            match out {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|source| Error::Io { path: path.display().to_string(), source })?,
                None => print!("{text}"),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("aspir: {e}");
            ExitCode::from(if e.is_bound() { 3 } else { 2 })
        }
    }
}
