//! Counter-based measurement of the chain evaluation modes on the benchmark
//! families. Wall-clock time is recorded but every comparison uses counters.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::cdnl::SolverOptions;
use crate::error::{Error, Result};
use crate::evalchain::{evaluate_chain, split_program, Mode};
use crate::externals::Registry;
use crate::gen::{gen_config_instance, gen_diagnosis_instance, gen_setguess, Instance};
use crate::par::{self, Parallelism};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Config,
    Diagnosis,
    SetGuess,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Config => "config",
            Family::Diagnosis => "diagnosis",
            Family::SetGuess => "setguess",
        }
    }

    pub fn instance(self, n: usize, seed: u64) -> Instance {
        match self {
            Family::Config => gen_config_instance(n, seed),
            Family::Diagnosis => gen_diagnosis_instance(n, seed),
            Family::SetGuess => Instance { program: gen_setguess(n), tables: Default::default() },
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        match s {
            "config" => Ok(Family::Config),
            "diagnosis" => Ok(Family::Diagnosis),
            "setguess" | "set-guessing" => Ok(Family::SetGuess),
            _ => Err(Error::Invalid(format!("unknown benchmark family `{s}`"))),
        }
    }
}

pub const CSV_HEADER: [&str; 10] = [
    "family",
    "n",
    "seed",
    "mode",
    "answer_count",
    "unit_groundings",
    "unit_solves",
    "conflicts",
    "learned_constraints",
    "wall_ms",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    pub mode: Mode,
    /// `None` when a resource bound stopped the run (see `bound`).
    pub answer_count: Option<usize>,
    /// Per-unit groundings (a single entry for monolithic runs).
    pub unit_groundings: Vec<u64>,
    pub unit_solves: Vec<u64>,
    pub conflicts: u64,
    pub learned_constraints: usize,
    pub wall_ms: f64,
    /// Name of the bound that was hit, if any.
    pub bound: Option<String>,
}

impl Row {
    pub fn total_work(&self) -> u64 {
        self.unit_groundings.iter().sum::<u64>() + self.unit_solves.iter().sum::<u64>()
    }

    fn record(&self, with_time: bool) -> Vec<String> {
        let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(";");
        vec![
            self.family.to_string(),
            self.n.to_string(),
            self.seed.to_string(),
            self.mode.to_string(),
            match (&self.answer_count, &self.bound) {
                (Some(c), _) => c.to_string(),
                (None, Some(b)) => format!("bound:{b}"),
                (None, None) => "error".into(),
            },
            join(&self.unit_groundings),
            join(&self.unit_solves),
            self.conflicts.to_string(),
            self.learned_constraints.to_string(),
            if with_time { format!("{:.3}", self.wall_ms) } else { String::new() },
        ]
    }
}

/// Evaluates one instance in one mode.
pub fn run_one(family: Family, n: usize, seed: u64, mode: Mode, opts: &SolverOptions) -> Result<Row> {
    let inst = family.instance(n, seed);
    let reg: Registry = inst.registry();
    let mut chain = split_program(&inst.program, &reg)?;
    let start = Instant::now();
    let res = evaluate_chain(&mut chain, &BTreeSet::new(), mode, &reg, opts);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let (answer_count, bound) = match res {
        Ok(sets) => (Some(sets.len()), None),
        Err(Error::Bound { name, .. }) => (None, Some(name.to_string())),
        Err(e) => return Err(e),
    };
    let (g, s, c) = if mode == Mode::Monolithic {
        (vec![chain.monolithic.groundings], vec![chain.monolithic.solves], chain.monolithic.conflicts)
    } else {
        (
            chain.counters.iter().map(|c| c.groundings).collect(),
            chain.counters.iter().map(|c| c.solves).collect(),
            chain.counters.iter().map(|c| c.conflicts).sum(),
        )
    };
    Ok(Row {
        family,
        n,
        seed,
        mode,
        answer_count,
        unit_groundings: g,
        unit_solves: s,
        conflicts: c,
        learned_constraints: chain.learned.len(),
        wall_ms,
        bound,
    })
}

/// Every (size, seed, mode) combination, rows in that nesting order. Instances
/// run in parallel under `par`; each chain evaluation itself is sequential.
pub fn run_suite(
    family: Family,
    sizes: &[usize],
    seeds: &[u64],
    modes: &[Mode],
    opts: &SolverOptions,
    par: Parallelism,
) -> Result<Vec<Row>> {
    let jobs: Vec<(usize, u64, Mode)> =
        sizes.iter().flat_map(|&n| seeds.iter().flat_map(move |&s| modes.iter().map(move |&m| (n, s, m)))).collect();
    par::map(par, jobs, |(n, s, m)| run_one(family, n, s, m, opts)).into_iter().collect()
}

/// CSV with the fixed header; `with_time = false` blanks `wall_ms` for
/// byte-identical reruns.
pub fn to_csv(rows: &[Row], with_time: bool) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record(r.record(with_time)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn to_json(rows: &[Row]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize")
}
