use super::*;
use crate::logic::{parse_atom, parse_program, Goal};
use crate::testkit::{herbrand_base_of, random_datalog};

fn limits() -> ResourceLimits {
    ResourceLimits::default()
}

#[test]
fn entails_worked_example() {
    let program = parse_program(
        "has_car(t1, c1). car_color(c1, red). \
         is_red_train(T) :- has_car(T, C), car_color(C, red).",
    )
    .unwrap();
    let q = parse_atom("is_red_train(t1)").unwrap();
    assert_eq!(entails(&program, &q, &limits()), EntailmentOutcome::Entailed);
}

#[test]
fn entails_fails_on_mismatching_background() {
    let program = parse_program(
        "has_car(t1, c1). car_color(c1, red). \
         has_car(t2, c2). car_color(c2, blue). \
         is_red_train(T) :- has_car(T, C), car_color(C, red).",
    )
    .unwrap();
    let q = parse_atom("is_red_train(t2)").unwrap();
    assert_eq!(entails(&program, &q, &limits()), EntailmentOutcome::NotEntailed);
}

#[test]
fn findall_length_counts_cars() {
    // exactly two cars entail the rule; three do not
    let rule = "eastbound(Train) :- findall(Car, has_car(Train, Car), Cars), length(Cars, 2).";
    let two = parse_program(&format!("has_car(t1, c1). has_car(t1, c2). {rule}")).unwrap();
    let three = parse_program(&format!(
        "has_car(t1, c1). has_car(t1, c2). has_car(t1, c3). {rule}"
    ))
    .unwrap();
    let q = parse_atom("eastbound(t1)").unwrap();
    assert_eq!(entails(&two, &q, &limits()), EntailmentOutcome::Entailed);
    assert_eq!(entails(&three, &q, &limits()), EntailmentOutcome::NotEntailed);
}

#[test]
fn unknown_predicate_fails_quietly() {
    let program = parse_program("p(X) :- q(X).").unwrap();
    let q = parse_atom("p(a)").unwrap();
    assert_eq!(entails(&program, &q, &limits()), EntailmentOutcome::NotEntailed);
}

#[test]
fn unbound_arithmetic_is_an_instantiation_failure() {
    let program = parse_program("p(X) :- Y is X + 1, Y > 0.").unwrap();
    let q = parse_atom("p(a)").unwrap();
    // X is bound to a constant, not a number
    assert_eq!(
        entails(&program, &q, &limits()),
        EntailmentOutcome::ResourceExceeded(ResourceReason::Arithmetic)
    );
    let program = parse_program("p :- X is Y + 1, X > 0.").unwrap();
    let q = parse_atom("p").unwrap();
    assert_eq!(
        entails(&program, &q, &limits()),
        EntailmentOutcome::ResourceExceeded(ResourceReason::Instantiation)
    );
}

#[test]
fn solve_all_returns_solutions_in_clause_order() {
    let program = parse_program("has_car(t1, c1). has_car(t1, c2).").unwrap();
    let goal = Goal::Literal(parse_atom("has_car(t1, C)").unwrap());
    let subs = solve_all(&program, &goal, &limits()).unwrap();
    assert_eq!(subs.len(), 2);
    assert_eq!(subs[0].get("C"), Some(&Term::constant("c1")));
    assert_eq!(subs[1].get("C"), Some(&Term::constant("c2")));
}

#[test]
fn solve_all_on_empty_program_is_empty() {
    let program = Program::default();
    let goal = Goal::Literal(parse_atom("car_color(C, red)").unwrap());
    assert_eq!(solve_all(&program, &goal, &limits()).unwrap(), Vec::new());
}

#[test]
fn disjunction_solutions_in_order() {
    let program = Program::default();
    let goal = crate::logic::goal_from_term(&crate::logic::parse_term("(X = 1 ; X = 2)").unwrap())
        .unwrap();
    let subs = solve_all(&program, &goal, &limits()).unwrap();
    assert_eq!(subs.len(), 2);
    assert_eq!(subs[0].get("X"), Some(&Term::Int(1)));
    assert_eq!(subs[1].get("X"), Some(&Term::Int(2)));
}

#[test]
fn negation_as_failure() {
    let program = parse_program(
        "has_car(t1, c1). car_color(c1, blue). \
         eastbound(Train) :- \\+ (has_car(Train, Car), car_color(Car, red)).",
    )
    .unwrap();
    let q = parse_atom("eastbound(t1)").unwrap();
    assert_eq!(entails(&program, &q, &limits()), EntailmentOutcome::Entailed);

    let program2 = parse_program(
        "has_car(t1, c1). car_color(c1, red). \
         eastbound(Train) :- \\+ (has_car(Train, Car), car_color(Car, red)).",
    )
    .unwrap();
    assert_eq!(entails(&program2, &q, &limits()), EntailmentOutcome::NotEntailed);
}

#[test]
fn forall_universal_quantification() {
    let sat = parse_program(
        "has_car(t1, c1). has_wall(c1, full). car_len(c1, long). \
         has_car(t1, c2). has_wall(c2, railing). car_len(c2, short). \
         eastbound(Train) :- forall((has_car(Train, Car), has_wall(Car, full)), car_len(Car, long)).",
    )
    .unwrap();
    let q = parse_atom("eastbound(t1)").unwrap();
    assert_eq!(entails(&sat, &q, &limits()), EntailmentOutcome::Entailed);

    let unsat = parse_program(
        "has_car(t1, c1). has_wall(c1, full). car_len(c1, short). \
         eastbound(Train) :- forall((has_car(Train, Car), has_wall(Car, full)), car_len(Car, long)).",
    )
    .unwrap();
    assert_eq!(entails(&unsat, &q, &limits()), EntailmentOutcome::NotEntailed);
}

#[test]
fn sort_and_member_and_extrema() {
    let program = parse_program(
        "p(S) :- sort([b, a, c, a], S). \
         q(X) :- member(X, [1, 2, 3]), X > 1. \
         r(M) :- max_list([3, 1, 2], M). \
         s(M) :- min_list([3, 1, 2], M).",
    )
    .unwrap();
    let subs = solve_all(&program, &Goal::Literal(parse_atom("p(S)").unwrap()), &limits()).unwrap();
    assert_eq!(subs[0].get("S").unwrap().to_string(), "[a, b, c]");
    let subs = solve_all(&program, &Goal::Literal(parse_atom("q(X)").unwrap()), &limits()).unwrap();
    assert_eq!(subs.len(), 2);
    let subs = solve_all(&program, &Goal::Literal(parse_atom("r(M)").unwrap()), &limits()).unwrap();
    assert_eq!(subs[0].get("M"), Some(&Term::Int(3)));
    let subs = solve_all(&program, &Goal::Literal(parse_atom("s(M)").unwrap()), &limits()).unwrap();
    assert_eq!(subs[0].get("M"), Some(&Term::Int(1)));
}

#[test]
fn recursion_over_lists_terminates() {
    let program = parse_program(
        "scan([Car|_]) :- car_len(Car, long). \
         scan([_|Cars]) :- scan(Cars). \
         car_len(c2, long). car_len(c1, short).",
    )
    .unwrap();
    assert_eq!(
        entails(&program, &parse_atom("scan([c1, c2])").unwrap(), &limits()),
        EntailmentOutcome::Entailed
    );
    assert_eq!(
        entails(&program, &parse_atom("scan([c1])").unwrap(), &limits()),
        EntailmentOutcome::NotEntailed
    );
}

#[test]
fn unbounded_recursion_hits_resource_limits() {
    let program = parse_program("p :- p.").unwrap();
    let q = parse_atom("p").unwrap();
    match entails(&program, &q, &limits()) {
        EntailmentOutcome::ResourceExceeded(r) => {
            assert!(matches!(r, ResourceReason::Depth | ResourceReason::Steps))
        }
        other => panic!("expected resource exhaustion, got {other:?}"),
    }
}

#[test]
fn wall_timeout_is_honored() {
    // stays within depth bounds forever by backtracking over member
    let program = parse_program(
        "loop :- member(X, [1, 2, 3, 4, 5, 6, 7, 8]), member(Y, [1, 2, 3, 4, 5, 6, 7, 8]), \
         member(Z, [1, 2, 3, 4, 5, 6, 7, 8]), X > 8, Y > X, Z > Y. \
         p :- loop. \
         p :- p.",
    )
    .unwrap();
    let tight = ResourceLimits {
        max_depth: usize::MAX / 2,
        max_steps: u64::MAX,
        wall_timeout: std::time::Duration::from_millis(200),
    };
    let started = std::time::Instant::now();
    let outcome = entails(&program, &parse_atom("p").unwrap(), &tight);
    assert_eq!(
        outcome,
        EntailmentOutcome::ResourceExceeded(ResourceReason::Timeout)
    );
    assert!(started.elapsed() < std::time::Duration::from_millis(400));
}

#[test]
fn forward_chain_worked_example() {
    let program = parse_program(
        "has_car(t1, c1). car_color(c1, red). \
         is_red_train(T) :- has_car(T, C), car_color(C, red).",
    )
    .unwrap();
    let fixpoint = forward_chain(&program).unwrap();
    assert!(fixpoint.contains(&parse_atom("is_red_train(t1)").unwrap()));
    assert_eq!(fixpoint.len(), 3);
}

#[test]
fn forward_chain_empty_program() {
    assert!(forward_chain(&Program::default()).unwrap().is_empty());
}

#[test]
fn forward_chain_transitive_closure_chain() {
    // 4-node chain: 3 base edges plus 2 + 1 transitive hops = 6 reachable pairs
    let program = parse_program(
        "edge(n1, n2). edge(n2, n3). edge(n3, n4). \
         reach(X, Y) :- edge(X, Y). \
         reach(X, Y) :- edge(X, Z), reach(Z, Y).",
    )
    .unwrap();
    let fixpoint = forward_chain(&program).unwrap();
    let reach: Vec<_> = fixpoint.iter().filter(|a| a.predicate == "reach").collect();
    assert_eq!(reach.len(), 6);
}

#[test]
fn forward_chain_rejects_negation_and_builtins() {
    let with_negation = parse_program("p(X) :- q(X), \\+ r(X). q(a).").unwrap();
    assert!(forward_chain(&with_negation).is_err());
    let with_builtin = parse_program("p(X) :- q(X), X \\= a. q(a).").unwrap();
    assert!(forward_chain(&with_builtin).is_err());
    let unsafe_head = parse_program("p(X) :- q(Y). q(a).").unwrap();
    assert!(forward_chain(&unsafe_head).is_err());
}

#[test]
fn top_down_matches_transitive_closure_fixpoint() {
    let program = parse_program(
        "edge(n1, n2). edge(n2, n3). edge(n3, n4). \
         reach(X, Y) :- edge(X, Y). \
         reach(X, Y) :- edge(X, Z), reach(Z, Y).",
    )
    .unwrap();
    let fixpoint = forward_chain(&program).unwrap();
    for atom in herbrand_base_of(&program) {
        let expectation = fixpoint.contains(&atom);
        assert_eq!(
            entails(&program, &atom, &limits()).is_entailed(),
            expectation,
            "disagreement on {atom}"
        );
    }
}

#[test]
fn oracle_agreement_on_random_programs() {
    for seed in 0..60 {
        let program = random_datalog(seed, 8, 6);
        let fixpoint = forward_chain(&program).unwrap();
        for atom in herbrand_base_of(&program) {
            let td = entails(&program, &atom, &limits());
            assert_eq!(
                td.is_entailed(),
                fixpoint.contains(&atom),
                "seed {seed}: disagreement on {atom} (top-down {td:?})\n{program}"
            );
        }
    }
}

#[test]
fn adding_facts_is_monotone() {
    for seed in 0..40 {
        let base = random_datalog(seed, 6, 5);
        let extra = random_datalog(seed.wrapping_add(10_000), 6, 3);
        let extra_facts =
            Program::new(extra.clauses.into_iter().filter(|c| c.is_fact()).collect());
        let grown = base.extended(&extra_facts);
        let before = forward_chain(&base).unwrap();
        let after = forward_chain(&grown).unwrap();
        assert!(before.is_subset(&after), "seed {seed}: fixpoint shrank");
        for atom in &before {
            assert!(
                entails(&grown, atom, &limits()).is_entailed(),
                "seed {seed}: adding facts flipped {atom} to not entailed"
            );
        }
    }
}

#[test]
fn naf_coherence_on_ground_queries() {
    for seed in 0..40 {
        let program = random_datalog(seed, 6, 5);
        for atom in herbrand_base_of(&program).into_iter().take(24) {
            let positive = entails(&program, &atom, &limits());
            let negated = Goal::Negation(vec![Goal::Literal(atom.clone())]);
            let negative = solve_all(&program, &negated, &limits()).unwrap();
            assert_ne!(
                positive.is_entailed(),
                !negative.is_empty(),
                "NAF incoherence on {atom}"
            );
        }
    }
}

#[test]
fn repeated_calls_are_deterministic() {
    let program = random_datalog(7, 8, 6);
    let goal = Goal::Literal(Atom::new("p1", vec![Term::var("X")]));
    let first = solve_all(&program, &goal, &limits()).unwrap();
    for _ in 0..5 {
        assert_eq!(solve_all(&program, &goal, &limits()).unwrap(), first);
    }
}

#[test]
fn duplicate_solutions_are_preserved() {
    let program = parse_program("p(a). p(a). q(X) :- p(X).").unwrap();
    let subs =
        solve_all(&program, &Goal::Literal(parse_atom("q(X)").unwrap()), &limits()).unwrap();
    assert_eq!(subs.len(), 2);
}

#[test]
fn length_generates_fresh_lists() {
    let program = parse_program("p(L) :- length(L, 3).").unwrap();
    let subs =
        solve_all(&program, &Goal::Literal(parse_atom("p(L)").unwrap()), &limits()).unwrap();
    assert_eq!(subs.len(), 1);
    match subs[0].get("L") {
        Some(Term::List(items, None)) => assert_eq!(items.len(), 3),
        other => panic!("expected proper 3-list, got {other:?}"),
    }
}
