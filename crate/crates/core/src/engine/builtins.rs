//! Builtin execution. The set is closed: `=`, `\=`, `==`, `is`, `=:=`,
//! `=\=`, `<`, `>`, `>=`, `=<`, `findall/3`, `forall/2`, `length/2`,
//! `sort/2`, `member/2`, `max_list/2`, `min_list/2`, and `!` (run as
//! `true`). `member/2` enumerates only the elements already present in
//! the list, so it is finite even on partial lists.

use super::{term_cmp, Alts, ChoicePoint, ResourceReason, Solver, Stack, Step};
use crate::logic::{goal_from_term, BuiltinOp, Goal, Term};

enum ListView {
    Proper(Vec<Term>),
    Partial(Vec<Term>, String),
    NotList,
}

impl Solver<'_> {
    pub(super) fn exec_builtin(
        &mut self,
        op: BuiltinOp,
        args: &[Term],
        depth: usize,
        rest: &Stack,
        cps: &mut Vec<ChoicePoint>,
    ) -> Result<Step, ResourceReason> {
        match op {
            BuiltinOp::Cut => Ok(Step::Continue),
            BuiltinOp::Unify => {
                let mark = self.trail.len();
                if self.unify(&args[0], &args[1]) {
                    Ok(Step::Continue)
                } else {
                    self.undo(mark);
                    Ok(Step::Fail)
                }
            }
            BuiltinOp::NotUnify => {
                let mark = self.trail.len();
                let unifiable = self.unify(&args[0], &args[1]);
                self.undo(mark);
                Ok(if unifiable { Step::Fail } else { Step::Continue })
            }
            BuiltinOp::StructEq => {
                let a = self.resolve(&args[0]);
                let b = self.resolve(&args[1]);
                Ok(if a == b { Step::Continue } else { Step::Fail })
            }
            BuiltinOp::Is => {
                let value = self.eval_arith(&args[1])?;
                Ok(self.unify_or_fail(&args[0], &Term::Int(value)))
            }
            BuiltinOp::ArithEq | BuiltinOp::ArithNeq | BuiltinOp::Lt | BuiltinOp::Gt
            | BuiltinOp::Ge | BuiltinOp::Le => {
                let a = self.eval_arith(&args[0])?;
                let b = self.eval_arith(&args[1])?;
                let holds = match op {
                    BuiltinOp::ArithEq => a == b,
                    BuiltinOp::ArithNeq => a != b,
                    BuiltinOp::Lt => a < b,
                    BuiltinOp::Gt => a > b,
                    BuiltinOp::Ge => a >= b,
                    BuiltinOp::Le => a <= b,
                    _ => unreachable!(),
                };
                Ok(if holds { Step::Continue } else { Step::Fail })
            }
            BuiltinOp::FindAll => {
                let goal = self.reify_goal(&args[1])?;
                let template = args[0].clone();
                let results = self.collect_all(&goal, &template, depth)?;
                Ok(self.unify_or_fail(&args[2], &Term::List(results, None)))
            }
            BuiltinOp::ForAll => {
                // forall(Cond, Action) holds iff no solution of Cond
                // fails Action: \+ (Cond, \+ Action).
                let cond = self.reify_goal(&args[0])?;
                let action = self.reify_goal(&args[1])?;
                let counterexample =
                    self.prove_once(&[cond, Goal::Negation(vec![action])], depth)?;
                Ok(if counterexample { Step::Fail } else { Step::Continue })
            }
            BuiltinOp::Length => self.exec_length(args),
            BuiltinOp::Sort => {
                let mut items = match self.list_view(&args[0]) {
                    ListView::Proper(items) => items.iter().map(|t| self.resolve(t)).collect::<Vec<_>>(),
                    ListView::Partial(..) => return Err(ResourceReason::Instantiation),
                    ListView::NotList => return Ok(Step::Fail),
                };
                items.sort_by(term_cmp);
                items.dedup();
                Ok(self.unify_or_fail(&args[1], &Term::List(items, None)))
            }
            BuiltinOp::Member => {
                let elements = match self.list_view(&args[1]) {
                    ListView::Proper(items) | ListView::Partial(items, _) => items,
                    ListView::NotList => return Ok(Step::Fail),
                };
                cps.push(ChoicePoint {
                    trail_mark: self.trail.len(),
                    rest: rest.clone(),
                    depth,
                    alts: Alts::Members { item: args[0].clone(), elements, next: 0 },
                });
                Ok(Step::Choice)
            }
            BuiltinOp::MaxList | BuiltinOp::MinList => {
                let items = match self.list_view(&args[0]) {
                    ListView::Proper(items) => items,
                    ListView::Partial(..) => return Err(ResourceReason::Instantiation),
                    ListView::NotList => return Ok(Step::Fail),
                };
                let mut values = Vec::with_capacity(items.len());
                for item in &items {
                    match self.walk(item) {
                        Term::Int(n) => values.push(n),
                        Term::Variable(_) => return Err(ResourceReason::Instantiation),
                        _ => return Err(ResourceReason::Arithmetic),
                    }
                }
                let Some(best) = (match op {
                    BuiltinOp::MaxList => values.iter().max(),
                    _ => values.iter().min(),
                }) else {
                    return Ok(Step::Fail);
                };
                Ok(self.unify_or_fail(&args[1], &Term::Int(*best)))
            }
        }
    }

    fn unify_or_fail(&mut self, a: &Term, b: &Term) -> Step {
        let mark = self.trail.len();
        if self.unify(a, b) {
            Step::Continue
        } else {
            self.undo(mark);
            Step::Fail
        }
    }

    fn exec_length(&mut self, args: &[Term]) -> Result<Step, ResourceReason> {
        match self.list_view(&args[0]) {
            ListView::Proper(items) => {
                Ok(self.unify_or_fail(&args[1], &Term::Int(items.len() as i64)))
            }
            ListView::Partial(items, tail_var) => match self.walk(&args[1]) {
                Term::Int(n) if n >= items.len() as i64 => {
                    let extra = (n as usize) - items.len();
                    let fresh: Vec<Term> = (0..extra)
                        .map(|_| {
                            self.fresh += 1;
                            Term::Variable(format!("_L{}", self.fresh))
                        })
                        .collect();
                    Ok(self.unify_or_fail(
                        &Term::Variable(tail_var),
                        &Term::List(fresh, None),
                    ))
                }
                Term::Int(_) => Ok(Step::Fail),
                _ => Err(ResourceReason::Instantiation),
            },
            ListView::NotList => Ok(Step::Fail),
        }
    }

    /// Walks a list spine, collecting the elements present. An unbound
    /// root counts as partial with no elements.
    fn list_view(&self, t: &Term) -> ListView {
        let mut items = Vec::new();
        let mut cur = self.walk(t);
        loop {
            match cur {
                Term::List(elems, tail) => {
                    items.extend(elems);
                    match tail {
                        None => return ListView::Proper(items),
                        Some(t) => cur = self.walk(&t),
                    }
                }
                Term::Variable(v) => return ListView::Partial(items, v),
                _ => return ListView::NotList,
            }
        }
    }

    /// Turns a goal-valued term argument into an executable goal.
    fn reify_goal(&mut self, t: &Term) -> Result<Goal, ResourceReason> {
        let resolved = self.resolve(t);
        goal_from_term(&resolved).map_err(|_| ResourceReason::Instantiation)
    }

    fn eval_arith(&self, t: &Term) -> Result<i64, ResourceReason> {
        match self.walk(t) {
            Term::Int(n) => Ok(n),
            Term::Variable(_) => Err(ResourceReason::Instantiation),
            Term::Compound(op, args) => {
                match (op.as_str(), args.len()) {
                    ("-", 1) => {
                        return self
                            .eval_arith(&args[0])?
                            .checked_neg()
                            .ok_or(ResourceReason::Arithmetic)
                    }
                    _ => {}
                }
                if args.len() != 2 {
                    return Err(ResourceReason::Arithmetic);
                }
                let a = self.eval_arith(&args[0])?;
                let b = self.eval_arith(&args[1])?;
                let result = match op.as_str() {
                    "+" => a.checked_add(b),
                    "-" => a.checked_sub(b),
                    "*" => a.checked_mul(b),
                    "//" => {
                        if b == 0 {
                            None
                        } else {
                            a.checked_div(b)
                        }
                    }
                    "mod" => {
                        if b == 0 {
                            None
                        } else {
                            Some(a.rem_euclid(b))
                        }
                    }
                    _ => None,
                };
                result.ok_or(ResourceReason::Arithmetic)
            }
            Term::Constant(_) | Term::List(..) => Err(ResourceReason::Arithmetic),
        }
    }
}
