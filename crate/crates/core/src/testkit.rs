//! Deterministic random-program generation used by the oracle-agreement
//! tests and benchmarks.
//!
//! Programs are function-free, negation-free, and range-restricted, and
//! the predicate dependency graph is acyclic (each rule's body only uses
//! predicates defined earlier in the order). Without tabling, top-down
//! resolution cannot decide recursive programs in general, so recursion
//! is left to the hand-written cases where termination is known.

use crate::language::{Language, PredicateSpec, CAR, TRAIN};
use crate::logic::{Atom, Clause, Goal, Program, Term};
use crate::rulegen::LengthConvention;
use crate::synth::{AtomScope, BackgroundPolicy, TaskConfig};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// The task specification of the worked example: vocabulary
/// {is_red_train/1, has_car/2, car_color/2, car_len/2} with constants
/// {red, blue, short, long}, one car per train.
pub fn worked_example_language() -> Language {
    let mut domains = std::collections::BTreeMap::new();
    domains.insert(
        "COLOR".to_string(),
        vec![Term::constant("red"), Term::constant("blue")],
    );
    domains.insert(
        "LEN".to_string(),
        vec![Term::constant("short"), Term::constant("long")],
    );
    Language {
        predicates: vec![
            PredicateSpec::new("has_car", &[TRAIN, CAR]),
            PredicateSpec::new("car_color", &[CAR, "COLOR"]),
            PredicateSpec::new("car_len", &[CAR, "LEN"]),
        ],
        domains,
        constraints: vec![],
        positive_target: "is_red_train".into(),
        negative_target: None,
        num_cars: 1..=1,
    }
}

/// Configuration of the worked example: κ = (1, 1), rule length 2 under
/// the all-literals convention (the `has_car` link counts), mirror
/// backgrounds restricted to rule-relevant atoms.
pub fn worked_example_config(seed: u64) -> TaskConfig {
    let mut config = TaskConfig::new(seed);
    config.rule_length = 2..=2;
    config.length_convention = LengthConvention::AllLiterals;
    config.background_policy = BackgroundPolicy::Mirror;
    config.background_scope = AtomScope::RuleRelevant;
    config
}

/// Generates a small random datalog program with at most `max_constants`
/// constants and `max_clauses` clauses.
pub fn random_datalog(seed: u64, max_constants: usize, max_clauses: usize) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_constants = rng.random_range(2..=max_constants.max(2));
    let constants: Vec<String> = (0..n_constants).map(|i| format!("c{i}")).collect();
    let n_preds = rng.random_range(2..=4usize);
    let preds: Vec<(String, usize)> = (0..n_preds)
        .map(|i| (format!("p{i}"), rng.random_range(1..=2usize)))
        .collect();

    let n_clauses = rng.random_range(1..=max_clauses.max(1));
    let mut clauses = Vec::new();
    for _ in 0..n_clauses {
        let head_idx = rng.random_range(0..preds.len());
        let (head_name, head_arity) = preds[head_idx].clone();
        // facts for the lowest strata or with some probability everywhere
        if head_idx == 0 || rng.random_bool(0.45) {
            let args = (0..head_arity)
                .map(|_| Term::constant(constants.choose(&mut rng).unwrap().clone()))
                .collect();
            clauses.push(Clause::fact(Atom::new(head_name, args)));
            continue;
        }
        // rule body over strictly lower predicates keeps dependencies acyclic
        let body_len = rng.random_range(1..=3usize);
        let var_pool = ["X", "Y", "Z"];
        let mut body = Vec::new();
        let mut body_vars: Vec<String> = Vec::new();
        for _ in 0..body_len {
            let (name, arity) = preds[rng.random_range(0..head_idx)].clone();
            let args: Vec<Term> = (0..arity)
                .map(|_| {
                    if rng.random_bool(0.7) {
                        let v = var_pool.choose(&mut rng).unwrap().to_string();
                        if !body_vars.contains(&v) {
                            body_vars.push(v.clone());
                        }
                        Term::var(v)
                    } else {
                        Term::constant(constants.choose(&mut rng).unwrap().clone())
                    }
                })
                .collect();
            body.push(Goal::Literal(Atom::new(name, args)));
        }
        // range restriction: head arguments come from body variables or constants
        let head_args: Vec<Term> = (0..head_arity)
            .map(|_| {
                if !body_vars.is_empty() && rng.random_bool(0.75) {
                    Term::var(body_vars.choose(&mut rng).unwrap().clone())
                } else {
                    Term::constant(constants.choose(&mut rng).unwrap().clone())
                }
            })
            .collect();
        clauses.push(Clause { head: Atom::new(head_name, head_args), body });
    }
    Program::new(clauses)
}

/// All ground atoms over the program's predicate signatures and constants.
pub fn herbrand_base_of(program: &Program) -> Vec<Atom> {
    use std::collections::BTreeSet;
    let mut preds: BTreeSet<(String, usize)> = BTreeSet::new();
    let mut constants: BTreeSet<String> = BTreeSet::new();
    let scan_term = |t: &Term, constants: &mut BTreeSet<String>| {
        if let Term::Constant(c) = t {
            constants.insert(c.clone());
        }
    };
    for clause in &program.clauses {
        preds.insert(clause.head.key());
        for a in &clause.head.args {
            scan_term(a, &mut constants);
        }
        for g in &clause.body {
            if let Goal::Literal(atom) = g {
                preds.insert(atom.key());
                for a in &atom.args {
                    scan_term(a, &mut constants);
                }
            }
        }
    }
    let constants: Vec<String> = constants.into_iter().collect();
    let mut out = Vec::new();
    for (name, arity) in preds {
        let mut tuples: Vec<Vec<Term>> = vec![Vec::new()];
        for _ in 0..arity {
            tuples = tuples
                .into_iter()
                .flat_map(|prefix| {
                    constants.iter().map(move |c| {
                        let mut next = prefix.clone();
                        next.push(Term::constant(c.clone()));
                        next
                    })
                })
                .collect();
        }
        out.extend(tuples.into_iter().map(|args| Atom::new(name.clone(), args)));
    }
    out
}
