//! Bottom-up least-fixpoint evaluation for the function-free definite
//! fragment. This is the independent oracle the top-down engine is
//! checked against: naive iteration, no clever joins.

use crate::logic::{Atom, Goal, Program, Term};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("unsupported construct for fixpoint evaluation: {0}")]
pub struct UnsupportedConstruct(pub String);

/// Computes the set of all ground atoms entailed by `program`.
///
/// The program must consist of function-free definite clauses without
/// negation or builtins, and every clause must be range-restricted
/// (head variables appear in the body; facts are ground).
pub fn forward_chain(program: &Program) -> Result<BTreeSet<Atom>, UnsupportedConstruct> {
    let mut rules = Vec::new();
    let mut facts: BTreeSet<Atom> = BTreeSet::new();

    for clause in &program.clauses {
        check_atom(&clause.head)?;
        let mut body = Vec::new();
        for goal in &clause.body {
            match goal {
                Goal::Literal(a) => {
                    check_atom(a)?;
                    body.push(a.clone());
                }
                other => {
                    return Err(UnsupportedConstruct(format!(
                        "non-literal goal `{other}`"
                    )))
                }
            }
        }
        let mut body_vars = Vec::new();
        body.iter().for_each(|a| a.collect_vars(&mut body_vars));
        let mut head_vars = Vec::new();
        clause.head.collect_vars(&mut head_vars);
        for v in &head_vars {
            if !body_vars.contains(v) {
                return Err(UnsupportedConstruct(format!(
                    "head variable `{v}` not bound by the body of `{clause}`"
                )));
            }
        }
        if body.is_empty() {
            facts.insert(clause.head.clone());
        } else {
            rules.push((clause.head.clone(), body));
        }
    }

    loop {
        let before = facts.len();
        let mut derived = Vec::new();
        for (head, body) in &rules {
            let mut env = BTreeMap::new();
            join(body, 0, &facts, &mut env, &mut |env| {
                derived.push(instantiate(head, env));
            });
        }
        facts.extend(derived);
        if facts.len() == before {
            return Ok(facts);
        }
    }
}

fn check_atom(a: &Atom) -> Result<(), UnsupportedConstruct> {
    for arg in &a.args {
        match arg {
            Term::Constant(_) | Term::Int(_) | Term::Variable(_) => {}
            other => {
                return Err(UnsupportedConstruct(format!(
                    "non-flat argument `{other}` in `{a}`"
                )))
            }
        }
    }
    Ok(())
}

fn join(
    body: &[Atom],
    idx: usize,
    facts: &BTreeSet<Atom>,
    env: &mut BTreeMap<String, Term>,
    emit: &mut dyn FnMut(&BTreeMap<String, Term>),
) {
    let Some(pattern) = body.get(idx) else {
        emit(env);
        return;
    };
    for fact in facts {
        if fact.key() != pattern.key() {
            continue;
        }
        let mut bound_here = Vec::new();
        let matched = pattern.args.iter().zip(&fact.args).all(|(p, f)| match p {
            Term::Variable(v) => match env.get(v) {
                Some(t) => t == f,
                None => {
                    env.insert(v.clone(), f.clone());
                    bound_here.push(v.clone());
                    true
                }
            },
            other => other == f,
        });
        if matched {
            join(body, idx + 1, facts, env, emit);
        }
        for v in bound_here {
            env.remove(&v);
        }
    }
}

fn instantiate(head: &Atom, env: &BTreeMap<String, Term>) -> Atom {
    Atom {
        predicate: head.predicate.clone(),
        args: head
            .args
            .iter()
            .map(|t| match t {
                Term::Variable(v) => env.get(v).cloned().expect("range-restricted head"),
                other => other.clone(),
            })
            .collect(),
    }
}
