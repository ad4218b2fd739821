//! Text format for programs.
//!
//! ```text
//! % comment
//! p(X) v q(X) :- d(X), not e(X).
//! r(X) :- &diff[dom,out](X).
//! ok :- &query_c["sub.lp"; node,arc](invalid).
//! inReduct(R) :- rule(R), COND(false(X) : bodyN(R,X)).
//! #split.
//! #external comp/1/1 "comp.json".
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::ast::*;
use crate::error::{Error, Result, SourceSpan};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Str(String),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const PUNCTS: [&str; 20] =
    [":-", "!=", "<=", ">=", "<>", ".", ",", "(", ")", "[", "]", ";", ":", "&", "|", "=", "<", ">", "#", "/"];

fn lex(text: &str, file: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let span = |line, col| SourceSpan { file: file.to_string(), line, column: col };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_alphanumeric() || c == '_' || (c == '-' && i + 1 < chars.len() && chars[i + 1].is_ascii_digit()) {
            let start = i;
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if s.starts_with(|ch: char| ch.is_ascii_uppercase()) { Tok::Var(s) } else { Tok::Ident(s) };
            out.push(Token { tok, line: l0, col: c0 });
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            i += 1;
            col += 1;
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(Error::Syntax {
                            span: span(l0, c0),
                            message: "unterminated string".into(),
                            expected: "\"".into(),
                        })
                    }
                    Some('"') => {
                        i += 1;
                        col += 1;
                        break;
                    }
                    Some('\\') if i + 1 < chars.len() => {
                        s.push(chars[i + 1]);
                        i += 2;
                        col += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                        col += 1;
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), line: l0, col: c0 });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match PUNCTS.iter().find(|p| rest.starts_with(*p)) {
            Some(p) => {
                i += p.len();
                col += p.len();
                out.push(Token { tok: Tok::Punct(p), line: l0, col: c0 });
            }
            None => {
                return Err(Error::Syntax {
                    span: span(l0, c0),
                    message: format!("unexpected character `{c}`"),
                    expected: "a term, literal or punctuation".into(),
                })
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    file: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> SourceSpan {
        let t = &self.toks[self.pos];
        SourceSpan { file: self.file.to_string(), line: t.line, column: t.col }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, expected: &str) -> Result<T> {
        let found = match self.peek() {
            Tok::Ident(s) | Tok::Var(s) => format!("`{s}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".into(),
        };
        Err(Error::Syntax { span: self.span(), message: format!("unexpected {found}"), expected: expected.into() })
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn eat(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<()> {
        if self.eat(p) {
            Ok(())
        } else {
            self.err(&format!("`{p}`"))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.err("an identifier"),
        }
    }

    fn term(&mut self) -> Result<Term> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.bump();
                Ok(Term::Var(sym(&v)))
            }
            Tok::Ident(s) => {
                self.bump();
                if self.eat("(") {
                    let args = self.term_list(")")?;
                    Ok(Term::func(&s, args))
                } else {
                    Ok(Term::c(&s))
                }
            }
            _ => self.err("a term"),
        }
    }

    fn term_list(&mut self, close: &str) -> Result<Vec<Term>> {
        let mut args = Vec::new();
        if self.eat(close) {
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            if self.eat(close) {
                return Ok(args);
            }
            self.expect(",")?;
        }
    }

    fn atom(&mut self) -> Result<Atom> {
        let span = self.span();
        match self.term()? {
            Term::Const(c) => Ok(Atom { pred: c, args: vec![] }),
            Term::Func(f, args) => Ok(Atom { pred: f, args }),
            Term::Var(_) => {
                Err(Error::Syntax { span, message: "variable in atom position".into(), expected: "an atom".into() })
            }
        }
    }

    fn pred_list(&mut self, close: &str) -> Result<Vec<Symbol>> {
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(sym(&self.ident()?));
            if self.eat(close) {
                return Ok(out);
            }
            self.expect(",")?;
        }
    }

    fn signed_atom(&mut self) -> Result<(Polarity, Atom)> {
        let pol = if matches!(self.peek(), Tok::Ident(s) if s == "not") && !self.is_call_at(0) {
            self.bump();
            Polarity::Neg
        } else {
            Polarity::Pos
        };
        Ok((pol, self.atom()?))
    }

    /// `not(` is an atom named `not`, not negation.
    fn is_call_at(&self, k: usize) -> bool {
        matches!(self.peek_at(k + 1), Tok::Punct("("))
    }

    fn body_literal(&mut self) -> Result<BodyLiteral> {
        let mut polarity = Polarity::Pos;
        if matches!(self.peek(), Tok::Ident(s) if s == "not") && !self.is_call_at(0) {
            self.bump();
            polarity = Polarity::Neg;
        }
        if self.eat("&") {
            let span = self.span();
            let name = self.ident()?;
            self.expect("[")?;
            if let Some(mode) = name.strip_prefix("query_") {
                let mode = match mode {
                    "b" => QueryMode::Brave,
                    "c" => QueryMode::Cautious,
                    _ => {
                        return Err(Error::Syntax {
                            span,
                            message: format!("unknown query kind `{name}`"),
                            expected: "query_b or query_c".into(),
                        })
                    }
                };
                let subprogram = match self.bump() {
                    Tok::Str(s) => s,
                    _ => return self.err("a quoted subprogram path"),
                };
                let inputs = if self.eat(";") {
                    self.pred_list("]")?
                } else {
                    self.expect("]")?;
                    vec![]
                };
                self.expect("(")?;
                let mut query = Vec::new();
                if !self.eat(")") {
                    loop {
                        let lspan = self.span();
                        let (p, a) = self.signed_atom()?;
                        if !a.is_ground() {
                            return Err(Error::NonGroundQuery { span: lspan, lit: a.to_string() });
                        }
                        query.push((p, a));
                        if self.eat(")") {
                            break;
                        }
                        self.expect(",")?;
                    }
                }
                return Ok(BodyLiteral {
                    polarity,
                    kind: LitKind::Query(QueryAtomRef { mode, subprogram, inputs, query }),
                });
            }
            let inputs = self.pred_list("]")?;
            let outputs = if self.eat("(") { self.term_list(")")? } else { vec![] };
            return Ok(BodyLiteral {
                polarity,
                kind: LitKind::External(ExternalAtom { name: sym(&name), inputs, outputs }),
            });
        }
        if matches!(self.peek(), Tok::Var(s) if s == "COND") && self.is_call_at(0) {
            let span = self.span();
            self.bump();
            self.expect("(")?;
            let (lp, lit) = self.signed_atom()?;
            self.expect(":")?;
            let cond = self.atom()?;
            self.expect(")")?;
            if polarity == Polarity::Neg {
                return Err(Error::Syntax {
                    span,
                    message: "negated conditional literal".into(),
                    expected: "COND(...) in positive position".into(),
                });
            }
            return Ok(BodyLiteral { polarity, kind: LitKind::Conditional(CondLit { polarity: lp, lit, cond }) });
        }
        let span = self.span();
        let lhs = self.term()?;
        let op = match self.peek() {
            Tok::Punct("=") => Some(CmpOp::Eq),
            Tok::Punct("!=") | Tok::Punct("<>") => Some(CmpOp::Ne),
            Tok::Punct("<") => Some(CmpOp::Lt),
            Tok::Punct("<=") => Some(CmpOp::Le),
            Tok::Punct(">") => Some(CmpOp::Gt),
            Tok::Punct(">=") => Some(CmpOp::Ge),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let rhs = self.term()?;
            if polarity == Polarity::Neg {
                return Err(Error::Syntax {
                    span,
                    message: "negated comparison".into(),
                    expected: "a comparison without `not`".into(),
                });
            }
            return Ok(BodyLiteral { polarity, kind: LitKind::Builtin(lhs, op, rhs) });
        }
        let atom = match lhs {
            Term::Const(c) => Atom { pred: c, args: vec![] },
            Term::Func(f, args) => Atom { pred: f, args },
            Term::Var(_) => {
                return Err(Error::Syntax {
                    span,
                    message: "variable in atom position".into(),
                    expected: "a literal".into(),
                })
            }
        };
        Ok(BodyLiteral { polarity, kind: LitKind::Ordinary(atom) })
    }

    fn directive(&mut self, prog: &mut Program) -> Result<()> {
        let span = self.span();
        let name = self.ident()?;
        match name.as_str() {
            "split" => {
                self.expect(".")?;
                let at = prog.rules.len();
                if !prog.unit_markers.contains(&at) {
                    prog.unit_markers.push(at);
                }
                Ok(())
            }
            "external" => {
                let ename = self.ident()?;
                self.expect("/")?;
                let input_arity = self.number()?;
                self.expect("/")?;
                let output_arity = self.number()?;
                let monotone = if matches!(self.peek(), Tok::Ident(s) if s == "monotone") {
                    self.bump();
                    true
                } else {
                    false
                };
                let file = match self.bump() {
                    Tok::Str(s) => s,
                    _ => return self.err("a quoted table path"),
                };
                self.expect(".")?;
                prog.external_decls.push(ExternalDecl { name: sym(&ename), input_arity, output_arity, monotone, file });
                Ok(())
            }
            _ => Err(Error::Syntax {
                span,
                message: format!("unknown directive #{name}"),
                expected: "#split or #external".into(),
            }),
        }
    }

    fn number(&mut self) -> Result<usize> {
        let span = self.span();
        let s = self.ident()?;
        s.parse().map_err(|_| Error::Syntax {
            span,
            message: format!("`{s}` is not a count"),
            expected: "a non-negative integer".into(),
        })
    }

    fn rule(&mut self) -> Result<(Rule, SourceSpan)> {
        let span = self.span();
        let mut head = Vec::new();
        if !self.is_punct(":-") {
            head.push(self.atom()?);
            loop {
                let disj = match self.peek() {
                    Tok::Ident(s) if s == "v" && !self.is_call_at(0) => true,
                    Tok::Punct("|") => true,
                    _ => false,
                };
                if !disj {
                    break;
                }
                self.bump();
                head.push(self.atom()?);
            }
        }
        let mut body = Vec::new();
        if self.eat(":-") {
            if !self.is_punct(".") {
                loop {
                    body.push(self.body_literal()?);
                    if !self.eat(",") {
                        break;
                    }
                }
            }
        } else if head.is_empty() {
            return self.err("a rule");
        }
        self.expect(".")?;
        Ok((Rule { head, body }, span))
    }
}

/// Parses a program; error spans name the file `<input>`.
pub fn parse_program(text: &str) -> Result<Program> {
    parse_program_named(text, "<input>")
}

pub fn parse_program_named(text: &str, file: &str) -> Result<Program> {
    let toks = lex(text, file)?;
    let mut p = Parser { toks, pos: 0, file };
    let mut prog = Program::default();
    let mut spans = Vec::new();
    while *p.peek() != Tok::Eof {
        if p.eat("#") {
            p.directive(&mut prog)?;
        } else {
            let (r, span) = p.rule()?;
            prog.rules.push(r);
            spans.push(span);
        }
    }
    prog.unit_markers.retain(|&m| m > 0 && m < prog.rules.len());
    prog.collect_queries();
    check_arities(&prog, &spans)?;
    for (r, span) in prog.rules.iter().zip(&spans) {
        check_safety(r, span)?;
    }
    Ok(prog)
}

fn check_arities(prog: &Program, spans: &[SourceSpan]) -> Result<()> {
    let mut seen: BTreeMap<Symbol, usize> = BTreeMap::new();
    for (r, span) in prog.rules.iter().zip(spans) {
        let mut atoms: Vec<&Atom> = r.head.iter().collect();
        for l in &r.body {
            match &l.kind {
                LitKind::Ordinary(a) => atoms.push(a),
                LitKind::Conditional(c) => {
                    atoms.push(&c.lit);
                    atoms.push(&c.cond);
                }
                _ => {}
            }
        }
        for a in atoms {
            match seen.get(&a.pred) {
                Some(&n) if n != a.arity() => {
                    return Err(Error::ArityClash {
                        span: span.clone(),
                        pred: a.pred.to_string(),
                        expected: n,
                        found: a.arity(),
                    })
                }
                Some(_) => {}
                None => {
                    seen.insert(a.pred.clone(), a.arity());
                }
            }
        }
    }
    Ok(())
}

/// Variables bound by positive ordinary atoms, external outputs and `X = t` with `t` bound.
pub fn safe_vars(r: &Rule) -> BTreeSet<Symbol> {
    let mut safe = BTreeSet::new();
    for l in &r.body {
        if l.polarity != Polarity::Pos {
            continue;
        }
        match &l.kind {
            LitKind::Ordinary(a) => a.vars_into(&mut safe),
            LitKind::External(e) => e.outputs.iter().for_each(|t| t.vars_into(&mut safe)),
            _ => {}
        }
    }
    loop {
        let mut changed = false;
        for l in &r.body {
            if let LitKind::Builtin(a, CmpOp::Eq, b) = &l.kind {
                for (x, y) in [(a, b), (b, a)] {
                    if let Term::Var(v) = x {
                        let mut vs = BTreeSet::new();
                        y.vars_into(&mut vs);
                        if !safe.contains(v) && vs.is_subset(&safe) {
                            safe.insert(v.clone());
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return safe;
        }
    }
}

fn check_safety(r: &Rule, span: &SourceSpan) -> Result<()> {
    let safe = safe_vars(r);
    let unsafe_var = |v: &Symbol| Error::Unsafe { span: span.clone(), var: v.to_string(), rule: r.to_string() };
    let mut global = BTreeSet::new();
    r.head.iter().for_each(|a| a.vars_into(&mut global));
    for l in &r.body {
        match &l.kind {
            LitKind::Conditional(c) => {
                // Variables of the condition are local unless bound elsewhere.
                let cond_vars = c.cond.vars();
                for v in c.lit.vars() {
                    if !cond_vars.contains(&v) && !safe.contains(&v) {
                        return Err(unsafe_var(&v));
                    }
                }
            }
            _ => l.vars_into(&mut global),
        }
    }
    match global.iter().find(|v| !safe.contains(*v)) {
        Some(v) => Err(unsafe_var(v)),
        None => Ok(()),
    }
}

/// Serializes a program; `parse_program(render_program(p)) == p`.
pub fn render_program(p: &Program) -> String {
    let mut out = String::new();
    for d in &p.external_decls {
        let m = if d.monotone { " monotone" } else { "" };
        let _ = writeln!(out, "#external {}/{}/{}{} {:?}.", d.name, d.input_arity, d.output_arity, m, d.file);
    }
    for (i, r) in p.rules.iter().enumerate() {
        if p.unit_markers.contains(&i) {
            out.push_str("#split.\n");
        }
        let _ = writeln!(out, "{r}");
    }
    out
}
