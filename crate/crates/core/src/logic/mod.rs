//! Object-language AST: terms, atoms, goals, clauses, programs.
//!
//! The concrete syntax is Prolog-style: `:-` rule neck, `,` conjunction,
//! `;` disjunction, `\+` negation as failure, infix comparison and
//! arithmetic operators, list brackets, and `%` line comments. Rendering
//! is canonical (one clause per line, single space after commas) and
//! round-trips through the parser structurally.

mod parser;

pub use parser::{parse_atom, parse_program, parse_term, SyntaxError};

use serde::{Deserialize, Serialize};
use std::fmt;

/// A first-order term. Lists carry an optional tail so `[a, b | T]`
/// is representable; a list with no tail is proper.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Constant(String),
    Int(i64),
    Variable(String),
    Compound(String, Vec<Term>),
    List(Vec<Term>, Option<Box<Term>>),
}

impl Term {
    pub fn is_ground(&self) -> bool {
        match self {
            Term::Constant(_) | Term::Int(_) => true,
            Term::Variable(_) => false,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
            Term::List(items, tail) => {
                items.iter().all(Term::is_ground)
                    && tail.as_ref().is_none_or(|t| t.is_ground())
            }
        }
    }

    /// The empty list `[]`.
    pub fn nil() -> Term {
        Term::List(Vec::new(), None)
    }

    pub fn constant(name: impl Into<String>) -> Term {
        Term::Constant(name.into())
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Variable(name.into())
    }

    /// Collects variable names in first-occurrence order.
    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Variable(v) => {
                if !out.iter().any(|x| x == v) {
                    out.push(v.clone());
                }
            }
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Term::List(items, tail) => {
                items.iter().for_each(|a| a.collect_vars(out));
                if let Some(t) = tail {
                    t.collect_vars(out);
                }
            }
            _ => {}
        }
    }
}

/// An atomic formula `p(t1, ..., tn)`. Predicate identity is `(name, arity)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Atom {
        Atom { predicate: predicate.into(), args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn key(&self) -> (String, usize) {
        (self.predicate.clone(), self.args.len())
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn collect_vars(&self, out: &mut Vec<String>) {
        self.args.iter().for_each(|a| a.collect_vars(out));
    }
}

/// Builtins understood by the entailment engine. The set is closed;
/// goals on any other non-program predicate simply fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BuiltinOp {
    /// `=` unification
    Unify,
    /// `\=` not unifiable
    NotUnify,
    /// `==` structural equality
    StructEq,
    /// `is` arithmetic evaluation
    Is,
    /// `=:=`
    ArithEq,
    /// `=\=`
    ArithNeq,
    /// `<`
    Lt,
    /// `>`
    Gt,
    /// `>=`
    Ge,
    /// `=<`
    Le,
    /// `findall/3`
    FindAll,
    /// `forall/2`, read as `\+ (Cond, \+ Action)`
    ForAll,
    /// `length/2`
    Length,
    /// `sort/2` (sorts and removes duplicates)
    Sort,
    /// `member/2` over the existing elements of a list
    Member,
    /// `max_list/2`
    MaxList,
    /// `min_list/2`
    MinList,
    /// `!` — parsed and accepted, executed as `true`
    Cut,
}

impl BuiltinOp {
    pub fn name(&self) -> &'static str {
        match self {
            BuiltinOp::Unify => "=",
            BuiltinOp::NotUnify => "\\=",
            BuiltinOp::StructEq => "==",
            BuiltinOp::Is => "is",
            BuiltinOp::ArithEq => "=:=",
            BuiltinOp::ArithNeq => "=\\=",
            BuiltinOp::Lt => "<",
            BuiltinOp::Gt => ">",
            BuiltinOp::Ge => ">=",
            BuiltinOp::Le => "=<",
            BuiltinOp::FindAll => "findall",
            BuiltinOp::ForAll => "forall",
            BuiltinOp::Length => "length",
            BuiltinOp::Sort => "sort",
            BuiltinOp::Member => "member",
            BuiltinOp::MaxList => "max_list",
            BuiltinOp::MinList => "min_list",
            BuiltinOp::Cut => "!",
        }
    }

    pub fn from_name(name: &str, arity: usize) -> Option<BuiltinOp> {
        let op = match (name, arity) {
            ("=", 2) => BuiltinOp::Unify,
            ("\\=", 2) => BuiltinOp::NotUnify,
            ("==", 2) => BuiltinOp::StructEq,
            ("is", 2) => BuiltinOp::Is,
            ("=:=", 2) => BuiltinOp::ArithEq,
            ("=\\=", 2) => BuiltinOp::ArithNeq,
            ("<", 2) => BuiltinOp::Lt,
            (">", 2) => BuiltinOp::Gt,
            (">=", 2) => BuiltinOp::Ge,
            ("=<", 2) => BuiltinOp::Le,
            ("findall", 3) => BuiltinOp::FindAll,
            ("forall", 2) => BuiltinOp::ForAll,
            ("length", 2) => BuiltinOp::Length,
            ("sort", 2) => BuiltinOp::Sort,
            ("member", 2) => BuiltinOp::Member,
            ("max_list", 2) => BuiltinOp::MaxList,
            ("min_list", 2) => BuiltinOp::MinList,
            ("!", 0) => BuiltinOp::Cut,
            _ => return None,
        };
        Some(op)
    }

    /// Whether calls on this builtin render infix (`X \= Y`) rather
    /// than functionally (`length(L, N)`).
    fn is_infix(&self) -> bool {
        !matches!(
            self,
            BuiltinOp::FindAll
                | BuiltinOp::ForAll
                | BuiltinOp::Length
                | BuiltinOp::Sort
                | BuiltinOp::Member
                | BuiltinOp::MaxList
                | BuiltinOp::MinList
                | BuiltinOp::Cut
        )
    }
}

/// A body goal. Conjunctions are kept flattened; goal arguments of
/// `findall`/`forall` stay as terms and are reified at execution time.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Goal {
    Literal(Atom),
    Negation(Vec<Goal>),
    Conjunction(Vec<Goal>),
    Disjunction(Box<Goal>, Box<Goal>),
    Builtin(BuiltinOp, Vec<Term>),
}

impl Goal {
    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Goal::Literal(a) => a.collect_vars(out),
            Goal::Negation(gs) | Goal::Conjunction(gs) => {
                gs.iter().for_each(|g| g.collect_vars(out))
            }
            Goal::Disjunction(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Goal::Builtin(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Walks every goal in this tree, including goal-valued builtin
    /// arguments (`findall`/`forall`), calling `f` on each.
    pub fn visit(&self, f: &mut dyn FnMut(&Goal)) {
        f(self);
        match self {
            Goal::Negation(gs) | Goal::Conjunction(gs) => gs.iter().for_each(|g| g.visit(f)),
            Goal::Disjunction(l, r) => {
                l.visit(f);
                r.visit(f);
            }
            Goal::Builtin(op, args) => {
                let goal_positions: &[usize] = match op {
                    BuiltinOp::FindAll => &[1],
                    BuiltinOp::ForAll => &[0, 1],
                    _ => &[],
                };
                for &i in goal_positions {
                    if let Some(t) = args.get(i) {
                        if let Ok(g) = goal_from_term(t) {
                            g.visit(f);
                        }
                    }
                }
            }
            Goal::Literal(_) => {}
        }
    }
}

/// A definite clause `head :- body`. An empty body makes it a fact.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Goal>,
}

impl Clause {
    pub fn fact(head: Atom) -> Clause {
        Clause { head, body: Vec::new() }
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    /// Visits every goal in the body, including nested ones.
    pub fn visit_goals(&self, f: &mut dyn FnMut(&Goal)) {
        for g in &self.body {
            g.visit(f);
        }
    }
}

/// An ordered list of clauses. Clause order is preserved: engine
/// solution order depends on it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Program {
    pub clauses: Vec<Clause>,
}

impl Program {
    pub fn new(clauses: Vec<Clause>) -> Program {
        Program { clauses }
    }

    pub fn from_facts(facts: impl IntoIterator<Item = Atom>) -> Program {
        Program { clauses: facts.into_iter().map(Clause::fact).collect() }
    }

    pub fn extended(&self, extra: &Program) -> Program {
        let mut clauses = self.clauses.clone();
        clauses.extend(extra.clauses.iter().cloned());
        Program { clauses }
    }
}

/// Converts a parsed term into a body goal, flattening conjunctions
/// and mapping operator compounds onto the builtin set.
pub fn goal_from_term(t: &Term) -> Result<Goal, String> {
    match t {
        Term::Compound(f, args) if f == "," && args.len() == 2 => {
            let mut goals = Vec::new();
            flatten_conj(t, &mut goals)?;
            Ok(Goal::Conjunction(goals))
        }
        Term::Compound(f, args) if f == ";" && args.len() == 2 => Ok(Goal::Disjunction(
            Box::new(goal_from_term(&args[0])?),
            Box::new(goal_from_term(&args[1])?),
        )),
        Term::Compound(f, args) if f == "\\+" && args.len() == 1 => {
            let mut goals = Vec::new();
            flatten_conj(&args[0], &mut goals)?;
            Ok(Goal::Negation(goals))
        }
        Term::Compound(f, args) => {
            if let Some(op) = BuiltinOp::from_name(f, args.len()) {
                Ok(Goal::Builtin(op, args.clone()))
            } else {
                Ok(Goal::Literal(Atom::new(f.clone(), args.clone())))
            }
        }
        Term::Constant(c) => {
            if c == "!" {
                Ok(Goal::Builtin(BuiltinOp::Cut, Vec::new()))
            } else {
                Ok(Goal::Literal(Atom::new(c.clone(), Vec::new())))
            }
        }
        Term::Variable(v) => Err(format!("variable goal `{v}` is not supported")),
        Term::Int(_) | Term::List(..) => Err(format!("`{t}` cannot be called as a goal")),
    }
}

fn flatten_conj(t: &Term, out: &mut Vec<Goal>) -> Result<(), String> {
    match t {
        Term::Compound(f, args) if f == "," && args.len() == 2 => {
            flatten_conj(&args[0], out)?;
            flatten_conj(&args[1], out)
        }
        _ => {
            match goal_from_term(t)? {
                Goal::Conjunction(gs) => out.extend(gs),
                g => out.push(g),
            }
            Ok(())
        }
    }
}

/// Converts body goals back into a single term, the inverse of
/// [`goal_from_term`] for goal-valued builtin arguments.
pub fn term_from_goals(goals: &[Goal]) -> Term {
    let terms: Vec<Term> = goals.iter().map(term_from_goal).collect();
    terms
        .into_iter()
        .rev()
        .reduce(|acc, t| Term::Compound(",".into(), vec![t, acc]))
        .unwrap_or_else(|| Term::Constant("!".into()))
}

fn term_from_goal(g: &Goal) -> Term {
    match g {
        Goal::Literal(a) => {
            if a.args.is_empty() {
                Term::Constant(a.predicate.clone())
            } else {
                Term::Compound(a.predicate.clone(), a.args.clone())
            }
        }
        Goal::Negation(gs) => Term::Compound("\\+".into(), vec![term_from_goals(gs)]),
        Goal::Conjunction(gs) => term_from_goals(gs),
        Goal::Disjunction(l, r) => {
            Term::Compound(";".into(), vec![term_from_goal(l), term_from_goal(r)])
        }
        Goal::Builtin(BuiltinOp::Cut, _) => Term::Constant("!".into()),
        Goal::Builtin(op, args) => Term::Compound(op.name().into(), args.clone()),
    }
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

pub(crate) struct OpInfo {
    pub prio: u32,
    pub assoc: Assoc,
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Assoc {
    Xfx,
    Xfy,
    Yfx,
}

pub(crate) fn infix_op(name: &str) -> Option<OpInfo> {
    let (prio, assoc) = match name {
        ":-" => (1200, Assoc::Xfx),
        ";" => (1100, Assoc::Xfy),
        "," => (1000, Assoc::Xfy),
        "=" | "\\=" | "==" | "is" | "=:=" | "=\\=" | "<" | ">" | ">=" | "=<" => {
            (700, Assoc::Xfx)
        }
        "+" | "-" => (500, Assoc::Yfx),
        "*" | "//" | "mod" => (400, Assoc::Yfx),
        _ => return None,
    };
    Some(OpInfo { prio, assoc })
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, max_prio: u32) -> fmt::Result {
    match t {
        Term::Constant(c) => write!(f, "{c}"),
        Term::Int(n) => write!(f, "{n}"),
        Term::Variable(v) => write!(f, "{v}"),
        Term::List(items, tail) => {
            write!(f, "[")?;
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_term(f, item, 999)?;
            }
            if let Some(t) = tail {
                write!(f, "|")?;
                write_term(f, t, 999)?;
            }
            write!(f, "]")
        }
        Term::Compound(op, args) if args.len() == 1 && op == "\\+" => {
            let needs_parens = 900 > max_prio;
            if needs_parens {
                write!(f, "(")?;
            }
            write!(f, "\\+ ")?;
            write_term(f, &args[0], 900)?;
            if needs_parens {
                write!(f, ")")?;
            }
            Ok(())
        }
        Term::Compound(op, args) if args.len() == 2 && infix_op(op).is_some() => {
            let info = infix_op(op).unwrap();
            let needs_parens = info.prio > max_prio;
            if needs_parens {
                write!(f, "(")?;
            }
            let (lp, rp) = match info.assoc {
                Assoc::Xfx => (info.prio - 1, info.prio - 1),
                Assoc::Xfy => (info.prio - 1, info.prio),
                Assoc::Yfx => (info.prio, info.prio - 1),
            };
            write_term(f, &args[0], lp)?;
            if op == "," {
                write!(f, ", ")?;
            } else {
                write!(f, " {op} ")?;
            }
            write_term(f, &args[1], rp)?;
            if needs_parens {
                write!(f, ")")?;
            }
            Ok(())
        }
        Term::Compound(functor, args) => {
            write!(f, "{functor}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_term(f, a, 999)?;
            }
            write!(f, ")")
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, 1200)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.predicate)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_term(f, a, 999)?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

fn write_goal(f: &mut fmt::Formatter<'_>, g: &Goal, max_prio: u32) -> fmt::Result {
    match g {
        Goal::Literal(a) => write!(f, "{a}"),
        Goal::Negation(goals) => {
            if 900 > max_prio {
                write!(f, "(")?;
            }
            write!(f, "\\+ ")?;
            if goals.len() == 1 {
                write_goal(f, &goals[0], 900)?;
            } else {
                write!(f, "(")?;
                write_goal_seq(f, goals)?;
                write!(f, ")")?;
            }
            if 900 > max_prio {
                write!(f, ")")?;
            }
            Ok(())
        }
        Goal::Conjunction(goals) => {
            write!(f, "(")?;
            write_goal_seq(f, goals)?;
            write!(f, ")")
        }
        // Disjunction is always rendered parenthesized.
        Goal::Disjunction(l, r) => {
            write!(f, "(")?;
            write_goal(f, l, 1099)?;
            write!(f, " ; ")?;
            write_goal(f, r, 1100)?;
            write!(f, ")")
        }
        Goal::Builtin(BuiltinOp::Cut, _) => write!(f, "!"),
        Goal::Builtin(op, args) if op.is_infix() && args.len() == 2 => {
            if 700 > max_prio {
                write!(f, "(")?;
            }
            write_term(f, &args[0], 699)?;
            write!(f, " {} ", op.name())?;
            write_term(f, &args[1], 699)?;
            if 700 > max_prio {
                write!(f, ")")?;
            }
            Ok(())
        }
        Goal::Builtin(op, args) => {
            write!(f, "{}(", op.name())?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_term(f, a, 999)?;
            }
            write!(f, ")")
        }
    }
}

fn write_goal_seq(f: &mut fmt::Formatter<'_>, goals: &[Goal]) -> fmt::Result {
    for (i, g) in goals.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write_goal(f, g, 999)?;
    }
    Ok(())
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_goal(f, self, 1100)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            write!(f, " :- ")?;
            write_goal_seq(f, &self.body)?;
        }
        write!(f, ".")
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Canonical text for a program: one clause per line.
pub fn render(program: &Program) -> String {
    program.to_string()
}

// Terms serialize as their canonical text; this keeps language presets
// and task records human-readable.
impl Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Term, D::Error> {
        let text = String::deserialize(d)?;
        parse_term(&text).map_err(serde::de::Error::custom)
    }
}
