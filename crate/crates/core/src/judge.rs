//! The symbolic judge: executes a candidate hypothesis against a task's
//! validation program and emits verifiable scores.
//!
//! Scores: `syntax` (the hypothesis parses and resolves over the task
//! language), `overall` (every positive example entailed and every
//! negative refuted), and `partial` (fraction of correctly classified
//! examples, kept as an exact rational). The judge never consults the
//! ground-truth rule: equivalence is behavioral over (B, E⁺, E⁻).
//!
//! A query that exceeds its resource limits counts as misclassified and
//! voids `overall`; rewarding non-termination with "not entailed" would
//! let adversarial recursion pass negatives for free.

use crate::engine::{entails, EntailmentOutcome, ResourceLimits};
use crate::language::Language;
use crate::logic::{parse_program, Atom, Program};
use crate::rulegen::validate_clause;
use crate::synth::TaskInstance;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleOutcome {
    pub query: String,
    pub expected_positive: bool,
    /// "entailed", "not_entailed", or "resource:<reason>".
    pub outcome: String,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub syntax: bool,
    pub overall: bool,
    /// Exact correct-count ratio over |E⁺ ∪ E⁻|.
    pub partial: Ratio<u64>,
    pub per_example: Vec<ExampleOutcome>,
    pub diagnostics: Vec<String>,
}

impl Judgment {
    fn invalid(diagnostics: Vec<String>) -> Judgment {
        Judgment {
            syntax: false,
            overall: false,
            partial: Ratio::new(0, 1),
            per_example: Vec::new(),
            diagnostics,
        }
    }

    pub fn partial_f64(&self) -> f64 {
        *self.partial.numer() as f64 / (*self.partial.denom() as f64).max(1.0)
    }

    /// Scores as the (syntax, overall, partial) triple.
    pub fn scores(&self) -> (u8, u8, f64) {
        (u8::from(self.syntax), u8::from(self.overall), self.partial_f64())
    }
}

/// Outcome of hypothesis-text validation.
struct ParsedHypothesis {
    program: Program,
    contains_cut: bool,
}

/// 1 iff the text parses as one or more clauses, at least one clause
/// heads the positive target, and every body predicate resolves to a
/// language predicate, a builtin, or a hypothesis-local definition with
/// all constants in-domain.
pub fn syntax_score(hypothesis_text: &str, language: &Language) -> u8 {
    u8::from(check_hypothesis(hypothesis_text, language).is_ok())
}

fn check_hypothesis(
    hypothesis_text: &str,
    language: &Language,
) -> Result<ParsedHypothesis, Vec<String>> {
    let program = match parse_program(hypothesis_text) {
        Ok(p) => p,
        Err(e) => return Err(vec![format!("parse error: {e}")]),
    };
    if program.clauses.is_empty() {
        return Err(vec!["empty hypothesis".to_string()]);
    }
    let mut problems = Vec::new();
    let target_key = (language.positive_target.clone(), 1usize);
    let locals: BTreeSet<(String, usize)> =
        program.clauses.iter().map(|c| c.head.key()).collect();
    if !locals.contains(&target_key) {
        problems.push(format!(
            "no clause heads the target predicate {}/1",
            language.positive_target
        ));
    }
    // clauses may define helper predicates, but not redefine background
    // predicates out from under the validation program
    for key in &locals {
        if language.predicate_names().contains(key) {
            problems.push(format!(
                "hypothesis redefines background predicate {}/{}",
                key.0, key.1
            ));
        }
    }
    let mut contains_cut = false;
    for clause in &program.clauses {
        let v = validate_clause(clause, language, &locals);
        contains_cut |= v.contains_cut;
        if !v.body_predicates_known || !v.constants_in_domain {
            problems.extend(v.problems.into_iter().map(|p| format!("`{clause}`: {p}")));
        }
    }
    if problems.is_empty() {
        Ok(ParsedHypothesis { program, contains_cut })
    } else {
        Err(problems)
    }
}

/// Judges a hypothesis against the task's validation program. Every
/// query is evaluated independently under `limits`.
pub fn judge(hypothesis_text: &str, task: &TaskInstance, limits: &ResourceLimits) -> Judgment {
    let parsed = match check_hypothesis(hypothesis_text, &task.language) {
        Ok(p) => p,
        Err(problems) => return Judgment::invalid(problems),
    };
    let mut diagnostics = Vec::new();
    if parsed.contains_cut {
        diagnostics.push("hypothesis contains cut, executed as true".to_string());
    }
    let program = task.background.extended(&parsed.program);

    let mut per_example = Vec::new();
    let mut correct: u64 = 0;
    let mut resource_hit = false;
    let queries = task
        .positives
        .iter()
        .map(|q| (q, true))
        .chain(task.negatives.iter().map(|q| (q, false)));
    for (query, expected_positive) in queries {
        let (outcome, is_correct) = match entails(&program, query, limits) {
            EntailmentOutcome::Entailed => ("entailed".to_string(), expected_positive),
            EntailmentOutcome::NotEntailed => ("not_entailed".to_string(), !expected_positive),
            EntailmentOutcome::ResourceExceeded(r) => {
                resource_hit = true;
                diagnostics.push(format!(
                    "query {query} exceeded resource limits ({r}); counted as misclassified"
                ));
                (format!("resource:{r}"), false)
            }
        };
        if is_correct {
            correct += 1;
        }
        per_example.push(ExampleOutcome {
            query: query.to_string(),
            expected_positive,
            outcome,
            correct: is_correct,
        });
    }

    let total = per_example.len() as u64;
    let partial = Ratio::new(correct, total.max(1));
    let overall = !resource_hit && total > 0 && correct == total;
    Judgment { syntax: true, overall, partial, per_example, diagnostics }
}

/// Order-preserving batch judging. Results are identical to sequential
/// judging regardless of `parallelism`; judging is a pure function of
/// its inputs, so workers need no coordination beyond the work queue.
pub fn judge_batch(
    items: &[(&str, &TaskInstance)],
    limits: &ResourceLimits,
    parallelism: usize,
) -> Vec<Judgment> {
    let workers = parallelism.max(1).min(items.len().max(1));
    if workers <= 1 {
        return items.iter().map(|(h, t)| judge(h, t, limits)).collect();
    }
    let cursor = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Judgment>>> =
        items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                let Some((hypothesis, task)) = items.get(i) else { break };
                let judgment = judge(hypothesis, task, limits);
                *slots[i].lock().unwrap() = Some(judgment);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every slot judged"))
        .collect()
}

/// Convenience wrapper for judging a bare (background, examples) triple
/// with no full task instance, as the reward service accepts inline.
pub fn judge_inline(
    hypothesis_text: &str,
    background: &Program,
    positives: &[Atom],
    negatives: &[Atom],
    target: &str,
    limits: &ResourceLimits,
) -> Judgment {
    let language = Language::infer_from_background(background, target);
    let task = TaskInstance {
        rule: crate::logic::Clause::fact(Atom::new(target, vec![])),
        language,
        background: background.clone(),
        positives: positives.to_vec(),
        negatives: negatives.to_vec(),
        prompt_logic: String::new(),
        prompt_nl: String::new(),
        level: None,
        seed: 0,
        metadata: Default::default(),
    };
    judge(hypothesis_text, &task, limits)
}
