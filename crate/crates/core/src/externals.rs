//! External-atom oracles: the builtin `id`, `neg`, `diff`, table-driven
//! externals loaded from JSON, and the learning function that turns an
//! evaluation into input/output nogoods.
//!
//! Every evaluator sees its input as a set of true atoms over its input
//! predicates. Atoms outside that set are false.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use serde_json::Value;

use crate::ast::*;
use crate::error::{Error, Result};
use crate::nogoods::{Nogood, SLit};

/// Maps each input extension (the set of true input atoms) to its output tuples.
/// Missing keys produce no output.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Table {
    pub entries: BTreeMap<BTreeSet<Atom>, BTreeSet<Vec<Term>>>,
}

impl Table {
    pub fn insert(&mut self, key: BTreeSet<Atom>, outputs: impl IntoIterator<Item = Vec<Term>>) {
        self.entries.entry(key).or_default().extend(outputs);
    }

    pub fn lookup(&self, key: &BTreeSet<Atom>) -> BTreeSet<Vec<Term>> {
        self.entries.get(key).cloned().unwrap_or_default()
    }

    /// Parses `{"{a, p(1)}": [["x"], ["y"]], "{}": []}`.
    pub fn from_json(text: &str, path: &str) -> Result<Table> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Json { path: path.into(), source: e })?;
        let obj = v.as_object().ok_or_else(|| Error::Invalid(format!("{path}: table must be a JSON object")))?;
        let mut t = Table::default();
        for (k, outs) in obj {
            let key = parse_atom_set(k).map_err(|e| Error::Invalid(format!("{path}: key {k:?}: {e}")))?;
            let arr =
                outs.as_array().ok_or_else(|| Error::Invalid(format!("{path}: value of {k:?} must be an array")))?;
            let mut tuples = BTreeSet::new();
            for tup in arr {
                let items =
                    tup.as_array().ok_or_else(|| Error::Invalid(format!("{path}: output tuple must be an array")))?;
                let mut terms = Vec::new();
                for it in items {
                    let s = match it {
                        Value::String(s) => s.clone(),
                        Value::Number(n) => n.to_string(),
                        _ => return Err(Error::Invalid(format!("{path}: output terms must be strings or numbers"))),
                    };
                    terms.push(parse_term(&s).map_err(|e| Error::Invalid(format!("{path}: term {s:?}: {e}")))?);
                }
                tuples.insert(terms);
            }
            t.insert(key, tuples);
        }
        Ok(t)
    }

    pub fn to_json(&self) -> String {
        let mut obj = serde_json::Map::new();
        for (k, outs) in &self.entries {
            let tuples: Vec<Value> =
                outs.iter().map(|t| Value::Array(t.iter().map(|x| Value::String(x.to_string())).collect())).collect();
            obj.insert(render_set(k), Value::Array(tuples));
        }
        serde_json::to_string_pretty(&Value::Object(obj)).expect("table serializes")
    }
}

fn parse_atom_set(s: &str) -> Result<BTreeSet<Atom>> {
    let inner = s.trim().trim_start_matches('{').trim_end_matches('}').trim();
    if inner.is_empty() {
        return Ok(BTreeSet::new());
    }
    let p = crate::parser::parse_program(&format!("__key :- {inner}."))?;
    p.rules[0]
        .body
        .iter()
        .map(|l| match (&l.kind, l.polarity) {
            (LitKind::Ordinary(a), Polarity::Pos) if a.is_ground() => Ok(a.clone()),
            _ => Err(Error::Invalid(format!("`{l}` is not a ground atom"))),
        })
        .collect()
}

fn parse_term(s: &str) -> Result<Term> {
    let p = crate::parser::parse_program(&format!("__t({s})."))?;
    match p.rules.first().and_then(|r| r.head.first()).map(|a| a.args.as_slice()) {
        Some([t]) if t.is_ground() => Ok(t.clone()),
        _ => Err(Error::Invalid(format!("`{s}` is not a ground term"))),
    }
}

#[derive(Clone, Debug)]
pub enum ExternalKind {
    /// True output tuples are the argument tuples of true input atoms.
    Id,
    /// Zero outputs; true iff the input extension is empty.
    Neg,
    /// `diff[a,b](c)` holds iff `a(c)` is true and `b(c)` is not.
    Diff,
    Table(Arc<Table>),
}

#[derive(Clone, Debug)]
pub struct ExternalDef {
    pub name: Symbol,
    pub input_arity: usize,
    /// `None` accepts any output arity.
    pub output_arity: Option<usize>,
    /// Declared monotone in all inputs.
    pub monotone: bool,
    pub kind: ExternalKind,
}

fn with_pred<'a>(ext: &'a BTreeSet<Atom>, p: &'a Symbol) -> impl Iterator<Item = &'a Atom> {
    ext.iter().filter(move |a| &a.pred == p)
}

impl ExternalDef {
    /// All output tuples that evaluate to true under the input extension `ext`.
    pub fn outputs(&self, inputs: &[Symbol], ext: &BTreeSet<Atom>) -> BTreeSet<Vec<Term>> {
        match &self.kind {
            ExternalKind::Id => with_pred(ext, &inputs[0]).map(|a| a.args.clone()).collect(),
            ExternalKind::Neg => {
                if with_pred(ext, &inputs[0]).next().is_none() {
                    [vec![]].into_iter().collect()
                } else {
                    BTreeSet::new()
                }
            }
            ExternalKind::Diff => {
                let minus: BTreeSet<&Vec<Term>> = with_pred(ext, &inputs[1]).map(|a| &a.args).collect();
                with_pred(ext, &inputs[0]).filter(|a| !minus.contains(&a.args)).map(|a| a.args.clone()).collect()
            }
            ExternalKind::Table(t) => {
                let key: BTreeSet<Atom> = ext.iter().filter(|a| inputs.contains(&a.pred)).cloned().collect();
                t.lookup(&key)
            }
        }
    }

    pub fn evaluate(&self, e: &ExternalAtom, ext: &BTreeSet<Atom>) -> bool {
        match &self.kind {
            ExternalKind::Id if !e.outputs.is_empty() => {
                ext.contains(&Atom { pred: e.inputs[0].clone(), args: e.outputs.clone() })
            }
            ExternalKind::Id => with_pred(ext, &e.inputs[0]).next().is_some(),
            ExternalKind::Diff => {
                ext.contains(&Atom { pred: e.inputs[0].clone(), args: e.outputs.clone() })
                    && !ext.contains(&Atom { pred: e.inputs[1].clone(), args: e.outputs.clone() })
            }
            _ => self.outputs(&e.inputs, ext).contains(&e.outputs),
        }
    }

    /// Evaluates `e` and returns a set of input literals whose truth alone fixes the
    /// value. `universe` lists every input atom that can be true; the rest are false.
    pub fn justify(&self, e: &ExternalAtom, universe: &BTreeSet<Atom>, ext: &BTreeSet<Atom>) -> (bool, Vec<SLit>) {
        let v = self.evaluate(e, ext);
        let holds = |a: &Atom| ext.contains(a);
        let lit = |a: &Atom| SLit { sign: holds(a), atom: a.clone() };
        fn on<'a>(u: &'a BTreeSet<Atom>, p: &'a Symbol) -> impl Iterator<Item = &'a Atom> + 'a {
            u.iter().filter(move |a| &a.pred == p)
        }
        let known = |a: &Atom| universe.contains(a);
        let j: Vec<SLit> = match &self.kind {
            ExternalKind::Id | ExternalKind::Neg if e.outputs.is_empty() => {
                let nonempty = on(universe, &e.inputs[0]).find(|a| holds(a));
                match nonempty {
                    Some(a) => vec![lit(a)],
                    None => on(universe, &e.inputs[0]).map(lit).collect(),
                }
            }
            ExternalKind::Id => {
                let a = Atom { pred: e.inputs[0].clone(), args: e.outputs.clone() };
                if known(&a) {
                    vec![lit(&a)]
                } else {
                    vec![]
                }
            }
            ExternalKind::Neg => vec![],
            ExternalKind::Diff => {
                let a = Atom { pred: e.inputs[0].clone(), args: e.outputs.clone() };
                let b = Atom { pred: e.inputs[1].clone(), args: e.outputs.clone() };
                let present = |x: &Atom| if known(x) { vec![lit(x)] } else { vec![] };
                if v {
                    let mut out = present(&a);
                    out.extend(present(&b));
                    out
                } else if !holds(&a) {
                    present(&a)
                } else {
                    present(&b)
                }
            }
            ExternalKind::Table(t) => table_justification(t, e, universe, ext, v),
        };
        (v, j)
    }

    /// Input/output nogood for the replacement atom `rep` standing for `e`.
    pub fn learn_io_nogood(
        &self,
        e: &ExternalAtom,
        rep: &Atom,
        universe: &BTreeSet<Atom>,
        ext: &BTreeSet<Atom>,
    ) -> Nogood {
        let (v, mut lits) = self.justify(e, universe, ext);
        lits.push(SLit { sign: !v, atom: rep.clone() });
        Nogood::new(lits)
    }
}

/// Greedy one-literal-at-a-time shrinking of the full input assignment, keeping
/// only literals needed to fix the output value on every consistent table key.
fn table_justification(
    t: &Table,
    e: &ExternalAtom,
    universe: &BTreeSet<Atom>,
    ext: &BTreeSet<Atom>,
    v: bool,
) -> Vec<SLit> {
    let u: Vec<&Atom> = universe.iter().filter(|a| e.inputs.contains(&a.pred)).collect();
    let keys: Vec<(&BTreeSet<Atom>, bool)> = t
        .entries
        .iter()
        .filter(|(k, _)| k.iter().all(|a| u.contains(&a)))
        .map(|(k, outs)| (k, outs.contains(&e.outputs)))
        .collect();
    let mut fixed: Vec<SLit> = u.iter().map(|a| SLit { sign: ext.contains(*a), atom: (*a).clone() }).collect();
    let invariant = |fixed: &[SLit]| -> bool {
        let consistent = keys.iter().filter(|(k, _)| fixed.iter().all(|l| k.contains(&l.atom) == l.sign));
        if v {
            let free = u.len() - fixed.len();
            let hits = consistent.filter(|(_, out)| *out).count();
            free < 63 && hits as u64 == 1u64 << free
        } else {
            consistent.clone().all(|(_, out)| !*out)
        }
    };
    let mut i = 0;
    while i < fixed.len() {
        let l = fixed.remove(i);
        if !invariant(&fixed) {
            fixed.insert(i, l);
            i += 1;
        }
    }
    fixed
}

/// Named oracle functions available to a program.
#[derive(Clone, Debug)]
pub struct Registry {
    defs: BTreeMap<Symbol, ExternalDef>,
}

impl Default for Registry {
    fn default() -> Self {
        Registry::new()
    }
}

impl Registry {
    /// The builtins `id`, `neg` and `diff`.
    pub fn new() -> Registry {
        let mut r = Registry { defs: BTreeMap::new() };
        for (name, ia, oa, mono, kind) in [
            ("id", 1, None, true, ExternalKind::Id),
            ("neg", 1, Some(0), false, ExternalKind::Neg),
            ("diff", 2, None, false, ExternalKind::Diff),
        ] {
            r.register(ExternalDef { name: sym(name), input_arity: ia, output_arity: oa, monotone: mono, kind });
        }
        r
    }

    pub fn register(&mut self, def: ExternalDef) {
        self.defs.insert(def.name.clone(), def);
    }

    pub fn register_table(
        &mut self,
        name: &str,
        input_arity: usize,
        output_arity: usize,
        monotone: bool,
        table: Table,
    ) {
        self.register(ExternalDef {
            name: sym(name),
            input_arity,
            output_arity: Some(output_arity),
            monotone,
            kind: ExternalKind::Table(Arc::new(table)),
        });
    }

    /// Builtins plus the tables declared by `#external` in `p`, with paths relative to `base`.
    pub fn for_program(p: &Program, base: &Path) -> Result<Registry> {
        let mut r = Registry::new();
        for d in &p.external_decls {
            let path = base.join(&d.file);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
            let t = Table::from_json(&text, &path.display().to_string())?;
            r.register_table(&d.name, d.input_arity, d.output_arity, d.monotone, t);
        }
        Ok(r)
    }

    pub fn get(&self, name: &str) -> Result<&ExternalDef> {
        self.defs.get(name).ok_or_else(|| Error::UnknownExternal(name.to_string()))
    }

    /// Looks up `e`'s definition and checks its arities.
    pub fn check(&self, e: &ExternalAtom) -> Result<&ExternalDef> {
        let d = self.get(&e.name)?;
        if d.input_arity != e.inputs.len() {
            return Err(Error::ExternalArity {
                name: e.name.to_string(),
                what: "input",
                expected: d.input_arity,
                found: e.inputs.len(),
            });
        }
        if let Some(oa) = d.output_arity {
            if oa != e.outputs.len() {
                return Err(Error::ExternalArity {
                    name: e.name.to_string(),
                    what: "output",
                    expected: oa,
                    found: e.outputs.len(),
                });
            }
        }
        Ok(d)
    }

    /// Truth of a ground external atom under the interpretation `interp` (true atoms).
    pub fn evaluate_external(&self, e: &ExternalAtom, interp: &BTreeSet<Atom>) -> Result<bool> {
        Ok(self.check(e)?.evaluate(e, interp))
    }

    /// Input-output nogoods for `e` under the complete interpretation `interp`,
    /// one per replacement atom in `reps` (pairs of ground external atom and replacement).
    pub fn learn_io_nogood(
        &self,
        reps: &[(ExternalAtom, Atom)],
        universe: &BTreeSet<Atom>,
        interp: &BTreeSet<Atom>,
    ) -> Result<Vec<Nogood>> {
        reps.iter().map(|(e, rep)| Ok(self.check(e)?.learn_io_nogood(e, rep, universe, interp))).collect()
    }
}

/// True atoms of `interp` whose predicate is among `preds`.
pub fn restrict(interp: &BTreeSet<Atom>, preds: &[Symbol]) -> BTreeSet<Atom> {
    interp.iter().filter(|a| preds.contains(&a.pred)).cloned().collect()
}
