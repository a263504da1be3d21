//! Synthesis, judging, and scoring of inductive logic programming tasks.
//!
//! The pipeline: a [`language::Language`] fixes the vocabulary and grammar,
//! [`synth::synthesize`] produces tasks (latent rule, background, labeled
//! examples, prompts), [`judge`] executes candidate hypotheses against the
//! validation program for verifiable rewards, and [`curriculum`] regenerates
//! the 20-level benchmark with [`metrics`] for scoring model runs.

pub mod curriculum;
pub mod engine;
pub mod judge;
pub mod language;
pub mod logic;
pub mod metrics;
pub mod records;
pub mod rulegen;
pub mod synth;
pub mod testkit;

pub use engine::{entails, forward_chain, solve_all, EntailmentOutcome, ResourceLimits};
pub use judge::{judge, judge_batch, syntax_score, Judgment};
pub use language::{filter_by_grammar, herbrand_base, level_language, Language};
pub use logic::{parse_program, render, Atom, Clause, Goal, Program, Term};
pub use synth::{emit_prompt, synthesize, PromptStyle, TaskConfig, TaskInstance};
