//! Top-down resolution engine with negation as failure, plus a
//! bottom-up fixpoint oracle for the function-free definite fragment.
//!
//! The solver is iterative: goals live on a shared-structure stack and
//! backtracking runs through an explicit choice-point list, so resolution
//! depth is bounded by [`ResourceLimits::max_depth`], not the host stack.
//! Sub-searches spawned by `\+`, `findall` and `forall` share the same
//! step, depth, and wall-clock budget as the root query, which keeps
//! adversarial hypotheses from hiding work inside nested aggregation.

mod builtins;
mod fixpoint;

pub use fixpoint::{forward_chain, UnsupportedConstruct};

use crate::logic::{Atom, Clause, Goal, Program, Term};
use std::collections::HashMap;
use std::rc::Rc;
use std::time::{Duration, Instant};

/// Budgets for a single query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceLimits {
    /// Maximum resolution depth (nesting of clause-body expansions).
    pub max_depth: usize,
    /// Maximum number of resolution steps across the whole query,
    /// including sub-searches.
    pub max_steps: u64,
    /// Wall-clock budget per query.
    pub wall_timeout: Duration,
}

impl Default for ResourceLimits {
    fn default() -> Self {
        ResourceLimits {
            max_depth: 10_000,
            max_steps: 1_000_000,
            wall_timeout: Duration::from_secs(5),
        }
    }
}

/// Why a query was cut short. Distinct from ordinary failure and never
/// silently coerced into `NotEntailed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceReason {
    Depth,
    Steps,
    Timeout,
    /// Unbound variable where a bound one was required (`is`, comparisons,
    /// goal reification).
    Instantiation,
    /// Non-numeric argument, overflow, or division by zero in arithmetic.
    Arithmetic,
}

impl std::fmt::Display for ResourceReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ResourceReason::Depth => "depth",
            ResourceReason::Steps => "steps",
            ResourceReason::Timeout => "timeout",
            ResourceReason::Instantiation => "instantiation",
            ResourceReason::Arithmetic => "arithmetic",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntailmentOutcome {
    Entailed,
    NotEntailed,
    ResourceExceeded(ResourceReason),
}

impl EntailmentOutcome {
    pub fn is_entailed(&self) -> bool {
        matches!(self, EntailmentOutcome::Entailed)
    }
}

/// Bindings for the free variables of a query goal, in first-occurrence
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution(pub Vec<(String, Term)>);

impl Substitution {
    pub fn get(&self, name: &str) -> Option<&Term> {
        self.0.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

/// Decides whether `program ⊨ query` within `limits`. The query should
/// be ground; free variables are answered existentially.
pub fn entails(program: &Program, query: &Atom, limits: &ResourceLimits) -> EntailmentOutcome {
    let index = ClauseIndex::new(program);
    let mut solver = Solver::new(&index, limits);
    let stack = Frame::push(None, Goal::Literal(query.clone()), 0);
    match solver.run(stack, &mut |_| Ok(true)) {
        Ok(true) => EntailmentOutcome::Entailed,
        Ok(false) => EntailmentOutcome::NotEntailed,
        Err(reason) => EntailmentOutcome::ResourceExceeded(reason),
    }
}

/// Enumerates every solution of `goal` in clause order, left-to-right
/// goal order. Duplicates are preserved.
pub fn solve_all(
    program: &Program,
    goal: &Goal,
    limits: &ResourceLimits,
) -> Result<Vec<Substitution>, ResourceReason> {
    let index = ClauseIndex::new(program);
    let mut solver = Solver::new(&index, limits);
    let mut vars = Vec::new();
    goal.collect_vars(&mut vars);
    let mut out = Vec::new();
    let stack = Frame::push(None, goal.clone(), 0);
    solver.run(stack, &mut |s| {
        let binding = vars
            .iter()
            .map(|v| (v.clone(), s.resolve(&Term::Variable(v.clone()))))
            .collect();
        out.push(Substitution(binding));
        Ok(false)
    })?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Solver machinery
// ---------------------------------------------------------------------------

pub(crate) struct ClauseIndex<'p> {
    clauses: &'p [Clause],
    by_pred: HashMap<(String, usize), Vec<usize>>,
}

impl<'p> ClauseIndex<'p> {
    pub(crate) fn new(program: &'p Program) -> Self {
        let mut by_pred: HashMap<(String, usize), Vec<usize>> = HashMap::new();
        for (i, c) in program.clauses.iter().enumerate() {
            by_pred.entry(c.head.key()).or_default().push(i);
        }
        ClauseIndex { clauses: &program.clauses, by_pred }
    }

    fn candidates(&self, key: &(String, usize)) -> Vec<usize> {
        self.by_pred.get(key).cloned().unwrap_or_default()
    }
}

/// A goal pending execution, with the resolution depth it was
/// introduced at. Frames share structure across choice points.
struct Frame {
    goal: Goal,
    depth: usize,
    rest: Stack,
}

type Stack = Option<Rc<Frame>>;

impl Frame {
    fn push(rest: Stack, goal: Goal, depth: usize) -> Stack {
        Some(Rc::new(Frame { goal, depth, rest }))
    }

    fn push_seq(rest: Stack, goals: &[Goal], depth: usize) -> Stack {
        goals
            .iter()
            .rev()
            .fold(rest, |acc, g| Frame::push(acc, g.clone(), depth))
    }
}

enum Alts {
    /// Remaining program clauses for a literal.
    Clauses { atom: Atom, candidates: Vec<usize>, next: usize },
    /// Right branch of a disjunction.
    Right(Goal),
    /// Remaining list elements for `member/2`.
    Members { item: Term, elements: Vec<Term>, next: usize },
}

struct ChoicePoint {
    trail_mark: usize,
    rest: Stack,
    depth: usize,
    alts: Alts,
}

pub(crate) struct Solver<'a> {
    index: &'a ClauseIndex<'a>,
    limits: &'a ResourceLimits,
    deadline: Instant,
    steps: u64,
    fresh: u64,
    bindings: HashMap<String, Term>,
    trail: Vec<String>,
}

enum Step {
    /// Deterministic success; continue with the remaining goals.
    Continue,
    /// Failure; backtrack.
    Fail,
    /// Alternatives were pushed; resume via `advance`.
    Choice,
}

impl<'a> Solver<'a> {
    pub(crate) fn new(index: &'a ClauseIndex<'a>, limits: &'a ResourceLimits) -> Self {
        Solver {
            index,
            limits,
            deadline: Instant::now() + limits.wall_timeout,
            steps: 0,
            fresh: 0,
            bindings: HashMap::new(),
            trail: Vec::new(),
        }
    }

    /// Runs the search over `stack`, invoking `on_solution` each time the
    /// goal stack empties. The callback returns `true` to stop the search.
    /// Returns whether the search was stopped (as opposed to exhausted).
    fn run(
        &mut self,
        stack: Stack,
        on_solution: &mut dyn FnMut(&mut Solver) -> Result<bool, ResourceReason>,
    ) -> Result<bool, ResourceReason> {
        let mut cps: Vec<ChoicePoint> = Vec::new();
        let mut stack = stack;
        loop {
            let Some(frame) = stack.clone() else {
                if on_solution(self)? {
                    return Ok(true);
                }
                match self.advance(&mut cps)? {
                    Some(s) => {
                        stack = s;
                        continue;
                    }
                    None => return Ok(false),
                }
            };
            self.tick()?;
            let rest = frame.rest.clone();
            let depth = frame.depth;
            let step = match &frame.goal {
                Goal::Literal(atom) => {
                    if depth >= self.limits.max_depth {
                        return Err(ResourceReason::Depth);
                    }
                    let candidates = self.index.candidates(&atom.key());
                    cps.push(ChoicePoint {
                        trail_mark: self.trail.len(),
                        rest: rest.clone(),
                        depth,
                        alts: Alts::Clauses { atom: atom.clone(), candidates, next: 0 },
                    });
                    Step::Choice
                }
                Goal::Conjunction(goals) => {
                    stack = Frame::push_seq(rest, goals, depth);
                    continue;
                }
                Goal::Disjunction(left, right) => {
                    cps.push(ChoicePoint {
                        trail_mark: self.trail.len(),
                        rest: rest.clone(),
                        depth,
                        alts: Alts::Right((**right).clone()),
                    });
                    stack = Frame::push(rest, (**left).clone(), depth);
                    continue;
                }
                Goal::Negation(goals) => {
                    if self.prove_once(goals, depth)? {
                        Step::Fail
                    } else {
                        Step::Continue
                    }
                }
                Goal::Builtin(op, args) => self.exec_builtin(*op, args, depth, &rest, &mut cps)?,
            };
            match step {
                Step::Continue => stack = rest,
                Step::Fail | Step::Choice => match self.advance(&mut cps)? {
                    Some(s) => stack = s,
                    None => return Ok(false),
                },
            }
        }
    }

    /// Finds the next viable alternative, undoing bindings as choice
    /// points are revisited or discarded.
    fn advance(&mut self, cps: &mut Vec<ChoicePoint>) -> Result<Option<Stack>, ResourceReason> {
        loop {
            let Some(cp) = cps.last_mut() else { return Ok(None) };
            let trail_mark = cp.trail_mark;
            let depth = cp.depth;
            match &mut cp.alts {
                Alts::Clauses { atom, candidates, next } => {
                    let atom = atom.clone();
                    let index = self.index;
                    let mut advanced = None;
                    while *next < candidates.len() {
                        let ci = candidates[*next];
                        *next += 1;
                        self.undo(trail_mark);
                        let renamed = self.rename_clause(&index.clauses[ci]);
                        if self.unify_atoms(&atom, &renamed.head) {
                            advanced =
                                Some(Frame::push_seq(cp.rest.clone(), &renamed.body, depth + 1));
                            break;
                        }
                    }
                    let exhausted = *next >= candidates.len();
                    match advanced {
                        Some(stack) => {
                            if exhausted {
                                // no alternatives left: drop the choice
                                // point so deterministic recursion runs
                                // in constant control space
                                cps.pop();
                            }
                            return Ok(Some(stack));
                        }
                        None => {
                            self.undo(trail_mark);
                            cps.pop();
                        }
                    }
                }
                Alts::Right(goal) => {
                    let goal = goal.clone();
                    self.undo(trail_mark);
                    let rest = cp.rest.clone();
                    cps.pop();
                    return Ok(Some(Frame::push(rest, goal, depth)));
                }
                Alts::Members { item, elements, next } => {
                    let item = item.clone();
                    let mut advanced = None;
                    while *next < elements.len() {
                        let candidate = elements[*next].clone();
                        *next += 1;
                        self.undo(trail_mark);
                        if self.unify(&item, &candidate) {
                            advanced = Some(cp.rest.clone());
                            break;
                        }
                    }
                    let exhausted = *next >= elements.len();
                    match advanced {
                        Some(stack) => {
                            if exhausted {
                                cps.pop();
                            }
                            return Ok(Some(stack));
                        }
                        None => {
                            self.undo(trail_mark);
                            cps.pop();
                        }
                    }
                }
            }
        }
    }

    /// Proves the conjunction once in an isolated sub-search, leaving
    /// no bindings behind. Shares the budget of the enclosing query.
    pub(crate) fn prove_once(
        &mut self,
        goals: &[Goal],
        depth: usize,
    ) -> Result<bool, ResourceReason> {
        let mark = self.trail.len();
        let stack = Frame::push_seq(None, goals, depth + 1);
        let found = self.run(stack, &mut |_| Ok(true))?;
        self.undo(mark);
        Ok(found)
    }

    /// Enumerates all solutions of a goal, resolving `template` under
    /// each, with bindings rolled back afterwards.
    pub(crate) fn collect_all(
        &mut self,
        goal: &Goal,
        template: &Term,
        depth: usize,
    ) -> Result<Vec<Term>, ResourceReason> {
        let mark = self.trail.len();
        let stack = Frame::push(None, goal.clone(), depth + 1);
        let mut results = Vec::new();
        let run = self.run(stack, &mut |s| {
            results.push(s.resolve(template));
            Ok(false)
        });
        self.undo(mark);
        run?;
        Ok(results)
    }

    fn tick(&mut self) -> Result<(), ResourceReason> {
        self.steps += 1;
        if self.steps > self.limits.max_steps {
            return Err(ResourceReason::Steps);
        }
        if self.steps % 256 == 0 && Instant::now() > self.deadline {
            return Err(ResourceReason::Timeout);
        }
        Ok(())
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            self.bindings.remove(&v);
        }
    }

    fn bind(&mut self, var: String, t: Term) {
        self.trail.push(var.clone());
        self.bindings.insert(var, t);
    }

    /// Shallow dereference: follows variable bindings until a non-variable
    /// or an unbound variable is reached.
    pub(crate) fn walk(&self, t: &Term) -> Term {
        let mut cur = t.clone();
        while let Term::Variable(v) = &cur {
            match self.bindings.get(v) {
                Some(next) => cur = next.clone(),
                None => break,
            }
        }
        cur
    }

    /// Deep resolution, normalizing list tails along the way.
    pub(crate) fn resolve(&self, t: &Term) -> Term {
        let t = self.walk(t);
        match t {
            Term::Compound(f, args) => {
                Term::Compound(f, args.iter().map(|a| self.resolve(a)).collect())
            }
            Term::List(items, tail) => {
                let mut out: Vec<Term> = items.iter().map(|a| self.resolve(a)).collect();
                match tail {
                    None => Term::List(out, None),
                    Some(t) => match self.resolve(&t) {
                        Term::List(more, tail2) => {
                            out.extend(more);
                            Term::List(out, tail2)
                        }
                        other => Term::List(out, Some(Box::new(other))),
                    },
                }
            }
            other => other,
        }
    }

    fn rename_clause(&mut self, clause: &Clause) -> Clause {
        self.fresh += 1;
        let tag = self.fresh;
        let mut map = HashMap::new();
        let head = Atom {
            predicate: clause.head.predicate.clone(),
            args: clause.head.args.iter().map(|t| rename_term(t, tag, &mut map)).collect(),
        };
        let body = clause.body.iter().map(|g| rename_goal(g, tag, &mut map)).collect();
        Clause { head, body }
    }

    fn unify_atoms(&mut self, a: &Atom, b: &Atom) -> bool {
        debug_assert_eq!(a.key(), b.key());
        a.args.iter().zip(&b.args).all(|(x, y)| self.unify(x, y))
    }

    pub(crate) fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let a = self.walk(a);
        let b = self.walk(b);
        match (a, b) {
            (Term::Variable(x), Term::Variable(y)) if x == y => true,
            (Term::Variable(x), t) => {
                self.bind(x, t);
                true
            }
            (t, Term::Variable(y)) => {
                self.bind(y, t);
                true
            }
            (Term::Constant(x), Term::Constant(y)) => x == y,
            (Term::Int(x), Term::Int(y)) => x == y,
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(&ys).all(|(x, y)| self.unify(x, y))
            }
            (Term::List(xs, xt), Term::List(ys, yt)) => self.unify_lists(xs, xt, ys, yt),
            _ => false,
        }
    }

    fn unify_lists(
        &mut self,
        xs: Vec<Term>,
        xt: Option<Box<Term>>,
        ys: Vec<Term>,
        yt: Option<Box<Term>>,
    ) -> bool {
        let n = xs.len().min(ys.len());
        for (x, y) in xs.iter().take(n).zip(ys.iter().take(n)) {
            if !self.unify(x, y) {
                return false;
            }
        }
        match xs.len().cmp(&ys.len()) {
            std::cmp::Ordering::Equal => match (xt, yt) {
                (None, None) => true,
                (Some(t), None) | (None, Some(t)) => self.unify(&t, &Term::nil()),
                (Some(tx), Some(ty)) => self.unify(&tx, &ty),
            },
            std::cmp::Ordering::Less => match xt {
                Some(tx) => self.unify(&tx, &Term::List(ys[n..].to_vec(), yt)),
                None => false,
            },
            std::cmp::Ordering::Greater => match yt {
                Some(ty) => self.unify(&ty, &Term::List(xs[n..].to_vec(), xt)),
                None => false,
            },
        }
    }
}

fn rename_term(t: &Term, tag: u64, map: &mut HashMap<String, String>) -> Term {
    match t {
        Term::Variable(v) => {
            let fresh = map
                .entry(v.clone())
                .or_insert_with(|| format!("_G{tag}_{v}"))
                .clone();
            Term::Variable(fresh)
        }
        Term::Compound(f, args) => {
            Term::Compound(f.clone(), args.iter().map(|a| rename_term(a, tag, map)).collect())
        }
        Term::List(items, tail) => Term::List(
            items.iter().map(|a| rename_term(a, tag, map)).collect(),
            tail.as_ref().map(|t| Box::new(rename_term(t, tag, map))),
        ),
        other => other.clone(),
    }
}

fn rename_goal(g: &Goal, tag: u64, map: &mut HashMap<String, String>) -> Goal {
    match g {
        Goal::Literal(a) => Goal::Literal(Atom {
            predicate: a.predicate.clone(),
            args: a.args.iter().map(|t| rename_term(t, tag, map)).collect(),
        }),
        Goal::Negation(gs) => {
            Goal::Negation(gs.iter().map(|g| rename_goal(g, tag, map)).collect())
        }
        Goal::Conjunction(gs) => {
            Goal::Conjunction(gs.iter().map(|g| rename_goal(g, tag, map)).collect())
        }
        Goal::Disjunction(l, r) => Goal::Disjunction(
            Box::new(rename_goal(l, tag, map)),
            Box::new(rename_goal(r, tag, map)),
        ),
        Goal::Builtin(op, args) => {
            Goal::Builtin(*op, args.iter().map(|t| rename_term(t, tag, map)).collect())
        }
    }
}

/// Standard-order-style comparison used by `sort/2`: variables, then
/// integers, then constants, then compounds, then lists.
pub(crate) fn term_cmp(a: &Term, b: &Term) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    fn rank(t: &Term) -> u8 {
        match t {
            Term::Variable(_) => 0,
            Term::Int(_) => 1,
            Term::Constant(_) => 2,
            Term::Compound(..) => 3,
            Term::List(..) => 4,
        }
    }
    match (a, b) {
        (Term::Variable(x), Term::Variable(y)) => x.cmp(y),
        (Term::Int(x), Term::Int(y)) => x.cmp(y),
        (Term::Constant(x), Term::Constant(y)) => x.cmp(y),
        (Term::Compound(f, xs), Term::Compound(g, ys)) => xs
            .len()
            .cmp(&ys.len())
            .then_with(|| f.cmp(g))
            .then_with(|| {
                xs.iter()
                    .zip(ys)
                    .map(|(x, y)| term_cmp(x, y))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal)
            }),
        (Term::List(xs, xt), Term::List(ys, yt)) => xs
            .iter()
            .zip(ys)
            .map(|(x, y)| term_cmp(x, y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or_else(|| {
                xs.len().cmp(&ys.len()).then_with(|| match (xt, yt) {
                    (None, None) => Ordering::Equal,
                    (None, Some(_)) => Ordering::Less,
                    (Some(_), None) => Ordering::Greater,
                    (Some(x), Some(y)) => term_cmp(x, y),
                })
            }),
        _ => rank(a).cmp(&rank(b)),
    }
}

#[cfg(test)]
mod tests;
