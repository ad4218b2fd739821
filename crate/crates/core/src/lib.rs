//! Answer-set solving for logic programs with external atoms.
//!
//! The crate bundles a parser, a grounder, a conflict-driven solver with
//! inconsistency analysis, saturation-based meta-encodings, an evaluation
//! chain with trans-unit propagation, and a brute-force reference semantics
//! that every other component is tested against.

pub mod ast;
pub mod bench;
pub mod cdnl;
pub mod error;
pub mod evalchain;
pub mod externals;
pub mod gen;
pub mod grounder;
pub mod increason;
pub mod limits;
pub mod metaenc;
pub mod nogoods;
pub mod par;
pub mod parser;
pub mod refsem;

pub use ast::{Atom, BodyLiteral, Program, Rule, Term};
pub use error::{Error, Result};
pub use increason::InconsistencyReason;
pub use limits::Limits;
pub use parser::{parse_program, render_program};
