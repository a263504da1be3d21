//! Task synthesis: given a language and a task configuration, produce a
//! complete task instance (latent rule, background knowledge, labeled
//! examples, prompts, validation program).
//!
//! The loop samples one example background per iteration, labels it by
//! entailment against the candidate rule, and accepts it only while the
//! matching quota (κ_pos or κ_neg) is unfilled. Rules that cannot fill
//! both quotas (tautologies, contradictions) are caught early by a
//! 64-sample probe and resampled, keeping the loop from running forever.

use crate::engine::{entails, EntailmentOutcome, ResourceLimits, ResourceReason};
use crate::language::{GrammarConstraint, Language};
use crate::logic::{Atom, Clause, Goal, Program, Term};
use crate::rulegen::{
    rule_feature_tags, validate_rule, LengthConvention, RuleGenError, RulePolicy,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;
use thiserror::Error;

/// Background sampling policy B_π.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundPolicy {
    /// Independent uniform draws over the grammar-filtered atom space.
    Uniform,
    /// Near-identical positive/negative twins differing only in atoms of
    /// predicates relevant to the rule.
    Mirror,
}

/// Which attribute predicates backgrounds assign. `AllPredicates` gives
/// every car one value per language attribute; `RuleRelevant` keeps only
/// the structural atoms plus attributes the rule mentions, matching
/// minimal worked-example style tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomScope {
    #[default]
    AllPredicates,
    RuleRelevant,
}

#[derive(Debug, Clone, Error)]
pub enum SynthesisError {
    #[error("invalid task config: {0}")]
    InvalidConfig(String),
    #[error("rule generation failed: {0}")]
    RuleGen(#[from] RuleGenError),
    #[error("mirror sampling failed after {attempts} attempts")]
    MirrorFailure { attempts: u32 },
    #[error("synthesis failed after {rule_resamples} rule resamples: {}", diagnostics.join("; "))]
    Failure { rule_resamples: u32, diagnostics: Vec<String> },
}

/// Task configuration Θ plus the seed and budgets that make synthesis
/// reproducible and observable.
#[derive(Debug, Clone)]
pub struct TaskConfig {
    pub rule_policy: RulePolicy,
    pub rule_length: RangeInclusive<u32>,
    pub length_convention: LengthConvention,
    pub background_policy: BackgroundPolicy,
    pub background_scope: AtomScope,
    pub kappa_pos: u32,
    pub kappa_neg: u32,
    pub seed: u64,
    pub limits: ResourceLimits,
    pub max_attempts_per_example: u32,
    pub max_rule_resamples: u32,
}

impl TaskConfig {
    pub fn new(seed: u64) -> TaskConfig {
        TaskConfig {
            rule_policy: RulePolicy::Uniform,
            rule_length: 1..=1,
            length_convention: LengthConvention::AttributesOnly,
            background_policy: BackgroundPolicy::Uniform,
            background_scope: AtomScope::AllPredicates,
            kappa_pos: 1,
            kappa_neg: 1,
            seed,
            limits: ResourceLimits::default(),
            max_attempts_per_example: 5000,
            max_rule_resamples: 25,
        }
    }

    pub fn validate(&self) -> Result<(), SynthesisError> {
        if self.kappa_pos == 0 || self.kappa_neg == 0 {
            return Err(SynthesisError::InvalidConfig(
                "kappa_pos and kappa_neg must be at least 1".into(),
            ));
        }
        if self.background_policy == BackgroundPolicy::Mirror && self.kappa_pos != self.kappa_neg
        {
            return Err(SynthesisError::InvalidConfig(
                "mirror sampling requires kappa_pos = kappa_neg".into(),
            ));
        }
        if self.rule_length.is_empty() || *self.rule_length.start() == 0 {
            return Err(SynthesisError::InvalidConfig("rule_length must start at 1+".into()));
        }
        Ok(())
    }
}

/// The per-train ground atoms of one loop iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExampleBackground {
    pub train_id: String,
    pub car_ids: Vec<String>,
    pub atoms: Vec<Atom>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskMetadata {
    /// Rule policy that produced R★.
    pub policy: String,
    /// Background samples drawn (accepted + rejected).
    pub attempts: u32,
    pub rule_resamples: u32,
    pub feature_tags: BTreeSet<String>,
    /// The rule contains cut, which the engine runs as `true`.
    pub nonstandard_cut: bool,
    /// Labelings that hit resource limits during generation (those
    /// backgrounds are discarded, never accepted as negatives).
    pub resource_events: u32,
    /// Positive/negative twin train ids under mirror sampling.
    pub mirror_pairs: Vec<(String, String)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub split: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tier: Option<String>,
}

/// A synthesized task: latent ground-truth rule, background knowledge,
/// labeled example queries, and both prompt styles.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskInstance {
    pub rule: Clause,
    pub language: Language,
    pub background: Program,
    pub positives: Vec<Atom>,
    pub negatives: Vec<Atom>,
    pub prompt_logic: String,
    pub prompt_nl: String,
    pub level: Option<u32>,
    pub seed: u64,
    pub metadata: TaskMetadata,
}

impl TaskInstance {
    /// The executable validation program: background facts plus positive
    /// example facts, with negatives as annotated comment lines. The
    /// machine-readable record keeps both sets explicitly.
    pub fn validation_program(&self) -> String {
        let mut out = crate::logic::render(&self.background);
        for q in &self.positives {
            out.push('\n');
            out.push_str(&format!("{q}."));
        }
        for q in &self.negatives {
            out.push('\n');
            out.push_str(&format!("% negative example: {q}."));
        }
        out
    }

    /// Background plus the ground-truth rule, the program a positive
    /// query must be entailed by.
    pub fn program_with_rule(&self) -> Program {
        let mut clauses = self.background.clauses.clone();
        clauses.push(self.rule.clone());
        Program::new(clauses)
    }
}

// ---------------------------------------------------------------------------
// Id allocation
// ---------------------------------------------------------------------------

/// Train/car id counters scoped to one task. Ids are previewed during
/// sampling and committed only when an example is accepted, so rejected
/// samples leave no gaps.
#[derive(Debug, Clone, Default)]
struct IdAllocator {
    trains: usize,
    cars: usize,
}

impl IdAllocator {
    fn preview(&self, car_count: usize) -> (String, Vec<String>) {
        let train = format!("train{}", self.trains + 1);
        let cars = (0..car_count).map(|i| format!("car{}", self.cars + i + 1)).collect();
        (train, cars)
    }

    fn commit(&mut self, car_count: usize) {
        self.trains += 1;
        self.cars += car_count;
    }
}

// ---------------------------------------------------------------------------
// Background sampling
// ---------------------------------------------------------------------------

/// Uniform background sampling: draws the car count from the language,
/// then gives each car exactly one value per applicable attribute
/// predicate, uniformly over the values the grammar constraints allow.
/// Structural `has_car` and `car_num` atoms are always included.
pub fn sample_background(
    language: &Language,
    rng: &mut impl Rng,
    train_id: &str,
    car_ids_start: usize,
) -> ExampleBackground {
    sample_background_scoped(language, rng, train_id, car_ids_start, None)
}

fn sample_background_scoped(
    language: &Language,
    rng: &mut impl Rng,
    train_id: &str,
    car_ids_start: usize,
    scope: Option<&BTreeSet<String>>,
) -> ExampleBackground {
    let lo = *language.num_cars.start() as usize;
    let hi = *language.num_cars.end() as usize;
    let car_count = rng.random_range(lo..=hi);
    let car_ids: Vec<String> =
        (0..car_count).map(|i| format!("car{}", car_ids_start + i + 1)).collect();
    let atoms =
        sample_atoms_for_cars(language, rng, train_id, &car_ids, scope, &BTreeMap::new());
    ExampleBackground { train_id: train_id.to_string(), car_ids, atoms }
}

/// Assigns atoms for the given cars. `pinned` maps (car, predicate) to a
/// fixed value, used by mirror flips to keep irrelevant atoms identical.
fn sample_atoms_for_cars(
    language: &Language,
    rng: &mut impl Rng,
    train_id: &str,
    car_ids: &[String],
    scope: Option<&BTreeSet<String>>,
    pinned: &BTreeMap<(String, String), Term>,
) -> Vec<Atom> {
    let train = Term::constant(train_id);
    let mut atoms = Vec::new();
    for (pos, car_id) in car_ids.iter().enumerate() {
        let car = Term::constant(car_id.clone());
        atoms.push(Atom::new("has_car", vec![train.clone(), car.clone()]));
        if language.has_predicate("car_num") {
            atoms.push(Atom::new("car_num", vec![car.clone(), Term::Int(pos as i64 + 1)]));
        }
        for pred in language.attribute_predicates() {
            if let Some(preds) = scope {
                if !preds.contains(&pred.name) {
                    continue;
                }
            }
            let value = match pinned.get(&(car_id.clone(), pred.name.clone())) {
                Some(v) => v.clone(),
                None => {
                    let value_type = &pred.arg_types[1];
                    let domain = language.domain_in_context(value_type, car_ids.len());
                    let allowed: Vec<&Term> = domain
                        .iter()
                        .filter(|v| {
                            value_allowed(language, &atoms, car_id, &pred.name, v)
                        })
                        .collect();
                    match allowed.choose(rng) {
                        Some(v) => (*v).clone(),
                        // over-constrained slot: fall back to the raw domain
                        None => domain.choose(rng).expect("non-empty domain").clone(),
                    }
                }
            };
            atoms.push(Atom::new(pred.name.clone(), vec![car.clone(), value]));
        }
    }
    atoms
}

/// Whether assigning `pred(car, value)` keeps the partial atom set valid
/// under every mutual-exclusion constraint. Only constraints naming
/// `pred` on either side are consulted.
fn value_allowed(
    language: &Language,
    atoms_so_far: &[Atom],
    car_id: &str,
    pred: &str,
    value: &Term,
) -> bool {
    let mut involved = language
        .constraints
        .iter()
        .filter_map(|c| match c {
            GrammarConstraint::MutualExclusion { condition, forbidden }
                if condition.predicate == pred || forbidden.predicate == pred =>
            {
                Some((condition, forbidden))
            }
            _ => None,
        })
        .peekable();
    if involved.peek().is_none() {
        return true;
    }
    let candidate = Atom::new(pred, vec![Term::constant(car_id), value.clone()]);
    let mut set: Vec<Atom> = atoms_so_far
        .iter()
        .filter(|a| a.args.first() == candidate.args.first())
        .cloned()
        .collect();
    set.push(candidate);
    crate::language::filter_by_grammar(&set, language).len() == set.len()
}

// ---------------------------------------------------------------------------
// Labeling
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelOutcome {
    pub label: bool,
    pub query: Atom,
    /// Set when entailment hit a resource limit; the label defaults to
    /// negative and the synthesizer discards the background entirely.
    pub resource: Option<ResourceReason>,
}

/// Labels one example background: the query is the positive target over
/// the background's train, positive iff `b ∪ {rule} ⊨ q`.
pub fn assign_label(
    rule: &Clause,
    background: &ExampleBackground,
    language: &Language,
    limits: &ResourceLimits,
) -> LabelOutcome {
    let query = Atom::new(
        language.positive_target.clone(),
        vec![Term::constant(background.train_id.clone())],
    );
    let mut clauses: Vec<Clause> =
        background.atoms.iter().cloned().map(Clause::fact).collect();
    clauses.push(rule.clone());
    let program = Program::new(clauses);
    match entails(&program, &query, limits) {
        EntailmentOutcome::Entailed => LabelOutcome { label: true, query, resource: None },
        EntailmentOutcome::NotEntailed => LabelOutcome { label: false, query, resource: None },
        EntailmentOutcome::ResourceExceeded(r) => {
            LabelOutcome { label: false, query, resource: Some(r) }
        }
    }
}

/// Attribute predicates (beyond the structural pair) mentioned anywhere
/// in the rule body, including inside negation and goal-valued builtin
/// arguments.
pub fn relevant_predicates(rule: &Clause, language: &Language) -> BTreeSet<String> {
    let mut preds = BTreeSet::new();
    rule.visit_goals(&mut |g| {
        if let Goal::Literal(atom) = g {
            if language
                .attribute_predicates()
                .iter()
                .any(|p| p.name == atom.predicate)
            {
                preds.insert(atom.predicate.clone());
            }
        }
    });
    preds
}

// ---------------------------------------------------------------------------
// Mirror sampling
// ---------------------------------------------------------------------------

const MIRROR_ATTEMPTS: u32 = 800;

/// Generates a positive/negative twin pair: identical car structure,
/// identical atoms for rule-irrelevant predicates (up to id renaming),
/// with rule-relevant atoms re-sampled so the labels split.
pub fn mirror_pair(
    language: &Language,
    rule: &Clause,
    rng: &mut impl Rng,
    limits: &ResourceLimits,
    scope: AtomScope,
    alloc: &IdAllocatorView,
) -> Result<MirrorOutcome, SynthesisError> {
    let relevant = relevant_predicates(rule, language);
    let scope_preds: Option<BTreeSet<String>> = match scope {
        AtomScope::AllPredicates => None,
        AtomScope::RuleRelevant => Some(relevant.clone()),
    };
    let mut resource_events = 0u32;

    // positive twin: re-sample until the rule fires
    let (pos_train, pos_cars) = alloc.preview_nth(0);
    let mut attempts = 0u32;
    let positive = loop {
        attempts += 1;
        if attempts > MIRROR_ATTEMPTS {
            return Err(SynthesisError::MirrorFailure { attempts });
        }
        let bg = sample_background_scoped(
            language,
            rng,
            &pos_train,
            pos_cars,
            scope_preds.as_ref(),
        );
        let outcome = assign_label(rule, &bg, language, limits);
        if outcome.resource.is_some() {
            resource_events += 1;
            continue;
        }
        if outcome.label {
            break bg;
        }
    };

    // negative twin: same car count, irrelevant atoms pinned to the
    // positive twin's values, relevant atoms re-sampled until the label flips
    let (neg_train, neg_cars_start) = alloc.preview_nth_after(1, positive.car_ids.len());
    let neg_car_ids: Vec<String> = (0..positive.car_ids.len())
        .map(|i| format!("car{}", neg_cars_start + i + 1))
        .collect();
    let mut pinned: BTreeMap<(String, String), Term> = BTreeMap::new();
    for atom in &positive.atoms {
        if atom.predicate == "has_car" || atom.predicate == "car_num" {
            continue;
        }
        if relevant.contains(&atom.predicate) {
            continue;
        }
        // map the positive twin's car id onto the negative twin's
        if let Some(idx) = positive
            .car_ids
            .iter()
            .position(|c| Some(c.as_str()) == atom.args.first().and_then(constant_name))
        {
            pinned.insert(
                (neg_car_ids[idx].clone(), atom.predicate.clone()),
                atom.args[1].clone(),
            );
        }
    }

    let mut neg_attempts = 0u32;
    let negative = loop {
        neg_attempts += 1;
        if neg_attempts > MIRROR_ATTEMPTS {
            return Err(SynthesisError::MirrorFailure { attempts: attempts + neg_attempts });
        }
        let atoms = sample_atoms_for_cars(
            language,
            rng,
            &neg_train,
            &neg_car_ids,
            scope_preds.as_ref(),
            &pinned,
        );
        let bg = ExampleBackground {
            train_id: neg_train.clone(),
            car_ids: neg_car_ids.clone(),
            atoms,
        };
        let outcome = assign_label(rule, &bg, language, limits);
        if outcome.resource.is_some() {
            resource_events += 1;
            continue;
        }
        if !outcome.label {
            break bg;
        }
    };

    Ok(MirrorOutcome {
        positive,
        negative,
        attempts: attempts + neg_attempts,
        resource_events,
    })
}

fn constant_name(t: &Term) -> Option<&str> {
    match t {
        Term::Constant(c) => Some(c.as_str()),
        _ => None,
    }
}

#[derive(Debug, Clone)]
pub struct MirrorOutcome {
    pub positive: ExampleBackground,
    pub negative: ExampleBackground,
    pub attempts: u32,
    pub resource_events: u32,
}

/// Read-only view of the id counters used to preview twin ids without
/// committing them.
#[derive(Debug, Clone)]
pub struct IdAllocatorView {
    trains: usize,
    cars: usize,
}

impl IdAllocatorView {
    pub fn new(trains: usize, cars: usize) -> Self {
        IdAllocatorView { trains, cars }
    }

    fn preview_nth(&self, n: usize) -> (String, usize) {
        (format!("train{}", self.trains + n + 1), self.cars)
    }

    fn preview_nth_after(&self, n: usize, cars_used: usize) -> (String, usize) {
        (format!("train{}", self.trains + n + 1), self.cars + cars_used)
    }
}

// ---------------------------------------------------------------------------
// The synthesizer
// ---------------------------------------------------------------------------

const PROBE_SAMPLES: u32 = 64;

/// Runs the full synthesis pipeline for one task.
pub fn synthesize(language: &Language, config: &TaskConfig) -> Result<TaskInstance, SynthesisError> {
    config.validate()?;
    language
        .validate()
        .map_err(|e| SynthesisError::InvalidConfig(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut diagnostics: Vec<String> = Vec::new();

    for resample in 0..=config.max_rule_resamples {
        let r_len = rng.random_range(config.rule_length.clone());
        let rule = match config.rule_policy.generate(
            language,
            r_len,
            config.length_convention,
            &mut rng,
        ) {
            Ok(rule) => rule,
            Err(e) => {
                diagnostics.push(format!("rule generation: {e}"));
                continue;
            }
        };
        let validation = validate_rule(&rule, language);
        if !validation.is_valid() {
            diagnostics.push(format!("invalid rule `{rule}`: {:?}", validation.problems));
            continue;
        }

        let scope_preds = match config.background_scope {
            AtomScope::AllPredicates => None,
            AtomScope::RuleRelevant => Some(relevant_predicates(&rule, language)),
        };
        // tautology/contradiction screen: the rejection loop cannot fill
        // both quotas unless the probe sees both labels
        let mut saw = (false, false);
        let mut probe_resource = 0u32;
        for _ in 0..PROBE_SAMPLES {
            let bg = sample_background_scoped(
                language,
                &mut rng,
                "probe",
                0,
                scope_preds.as_ref(),
            );
            let outcome = assign_label(&rule, &bg, language, &config.limits);
            if outcome.resource.is_some() {
                probe_resource += 1;
                continue;
            }
            if outcome.label {
                saw.0 = true;
            } else {
                saw.1 = true;
            }
            if saw.0 && saw.1 {
                break;
            }
        }
        if !(saw.0 && saw.1) {
            diagnostics.push(format!(
                "degenerate rule `{rule}` (probe saw positive={} negative={})",
                saw.0, saw.1
            ));
            continue;
        }

        match build_examples(language, config, &rule, &mut rng) {
            Ok(mut built) => {
                built.resource_events += probe_resource;
                let metadata = TaskMetadata {
                    policy: config.rule_policy.name().to_string(),
                    attempts: built.attempts,
                    rule_resamples: resample,
                    feature_tags: rule_feature_tags(&rule),
                    nonstandard_cut: validation.contains_cut,
                    resource_events: built.resource_events,
                    mirror_pairs: built.mirror_pairs,
                    split: None,
                    tier: None,
                };
                let background = Program::from_facts(
                    built.examples.iter().flat_map(|b| b.atoms.iter().cloned()),
                );
                let mut task = TaskInstance {
                    rule,
                    language: language.clone(),
                    background,
                    positives: built.positives,
                    negatives: built.negatives,
                    prompt_logic: String::new(),
                    prompt_nl: String::new(),
                    level: None,
                    seed: config.seed,
                    metadata,
                };
                task.prompt_logic = emit_prompt(&task, PromptStyle::Logic);
                task.prompt_nl = emit_prompt(&task, PromptStyle::Natural);
                return Ok(task);
            }
            Err(d) => diagnostics.push(d),
        }
    }
    Err(SynthesisError::Failure {
        rule_resamples: config.max_rule_resamples,
        diagnostics: dedup_tail(diagnostics),
    })
}

fn dedup_tail(mut diagnostics: Vec<String>) -> Vec<String> {
    diagnostics.dedup();
    if diagnostics.len() > 8 {
        let skipped = diagnostics.len() - 8;
        diagnostics.truncate(8);
        diagnostics.push(format!("... {skipped} more"));
    }
    diagnostics
}

struct BuiltExamples {
    examples: Vec<ExampleBackground>,
    positives: Vec<Atom>,
    negatives: Vec<Atom>,
    attempts: u32,
    resource_events: u32,
    mirror_pairs: Vec<(String, String)>,
}

fn build_examples(
    language: &Language,
    config: &TaskConfig,
    rule: &Clause,
    rng: &mut ChaCha8Rng,
) -> Result<BuiltExamples, String> {
    let mut alloc = IdAllocator::default();
    let mut examples = Vec::new();
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    let mut attempts = 0u32;
    let mut resource_events = 0u32;
    let mut mirror_pairs = Vec::new();

    match config.background_policy {
        BackgroundPolicy::Mirror => {
            for _ in 0..config.kappa_pos {
                let view = IdAllocatorView { trains: alloc.trains, cars: alloc.cars };
                let outcome = mirror_pair(
                    language,
                    rule,
                    rng,
                    &config.limits,
                    config.background_scope,
                    &view,
                )
                .map_err(|e| format!("{e} for rule `{rule}`"))?;
                attempts += outcome.attempts;
                resource_events += outcome.resource_events;
                let pos_query = Atom::new(
                    language.positive_target.clone(),
                    vec![Term::constant(outcome.positive.train_id.clone())],
                );
                let neg_query = Atom::new(
                    language.positive_target.clone(),
                    vec![Term::constant(outcome.negative.train_id.clone())],
                );
                mirror_pairs.push((
                    outcome.positive.train_id.clone(),
                    outcome.negative.train_id.clone(),
                ));
                alloc.commit(outcome.positive.car_ids.len());
                alloc.commit(outcome.negative.car_ids.len());
                positives.push(pos_query);
                negatives.push(neg_query);
                examples.push(outcome.positive);
                examples.push(outcome.negative);
            }
        }
        BackgroundPolicy::Uniform => {
            let scope_preds = match config.background_scope {
                AtomScope::AllPredicates => None,
                AtomScope::RuleRelevant => Some(relevant_predicates(rule, language)),
            };
            let mut since_accept = 0u32;
            while (positives.len() as u32) < config.kappa_pos
                || (negatives.len() as u32) < config.kappa_neg
            {
                since_accept += 1;
                if since_accept > config.max_attempts_per_example {
                    return Err(format!(
                        "example quota unfilled after {} attempts for rule `{rule}` \
                         ({} positives, {} negatives)",
                        config.max_attempts_per_example,
                        positives.len(),
                        negatives.len()
                    ));
                }
                attempts += 1;
                let (train_id, _) = alloc.preview(0);
                let bg = sample_background_scoped(
                    language,
                    rng,
                    &train_id,
                    alloc.cars,
                    scope_preds.as_ref(),
                );
                let outcome = assign_label(rule, &bg, language, &config.limits);
                if outcome.resource.is_some() {
                    // a limit-labeled negative might actually be positive
                    resource_events += 1;
                    continue;
                }
                let accept = if outcome.label {
                    (positives.len() as u32) < config.kappa_pos
                } else {
                    (negatives.len() as u32) < config.kappa_neg
                };
                if accept {
                    alloc.commit(bg.car_ids.len());
                    if outcome.label {
                        positives.push(outcome.query);
                    } else {
                        negatives.push(outcome.query);
                    }
                    examples.push(bg);
                    since_accept = 0;
                }
            }
        }
    }

    Ok(BuiltExamples { examples, positives, negatives, attempts, resource_events, mirror_pairs })
}

// ---------------------------------------------------------------------------
// Prompts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptStyle {
    Logic,
    Natural,
}

/// Renders the instruction prompt: background atoms, then the labeled
/// examples, then the fixed instruction text for the style.
pub fn emit_prompt(task: &TaskInstance, style: PromptStyle) -> String {
    match style {
        PromptStyle::Logic => {
            let mut lines: Vec<String> =
                task.background.clauses.iter().map(|c| c.to_string()).collect();
            for q in &task.positives {
                lines.push(format!("{q}."));
            }
            if let Some(neg) = &task.language.negative_target {
                for q in &task.negatives {
                    lines.push(format!("{neg}({}).", render_args(q)));
                }
            }
            let instructions = include_str!("../data/instructions_logic.txt")
                .replace("{target}", &task.language.positive_target);
            format!("{}\n\n{}", lines.join("\n"), instructions)
        }
        PromptStyle::Natural => {
            let mut lines: Vec<String> = Vec::new();
            for group in group_atoms_by_train(&task.background) {
                let sentences: Vec<String> =
                    group.iter().map(|a| nl_sentence(a)).collect();
                lines.push(sentences.join(" "));
            }
            for q in &task.positives {
                lines.push(nl_label_sentence(&task.language.positive_target, q, true));
            }
            if let Some(neg) = &task.language.negative_target {
                for q in &task.negatives {
                    lines.push(nl_label_sentence(neg, q, false));
                }
            }
            let instructions = include_str!("../data/instructions_nl.txt")
                .replace("{target}", &task.language.positive_target);
            format!("{}\n\n{}", lines.join("\n"), instructions)
        }
    }
}

fn render_args(q: &Atom) -> String {
    q.args.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
}

/// Groups background facts per train, using has_car links to attach
/// car attributes to their train.
fn group_atoms_by_train(background: &Program) -> Vec<Vec<Atom>> {
    let mut car_to_train: BTreeMap<String, String> = BTreeMap::new();
    let mut train_order: Vec<String> = Vec::new();
    for clause in &background.clauses {
        let a = &clause.head;
        if a.predicate == "has_car" && a.args.len() == 2 {
            if let (Some(t), Some(c)) = (constant_name(&a.args[0]), constant_name(&a.args[1])) {
                car_to_train.insert(c.to_string(), t.to_string());
                if !train_order.contains(&t.to_string()) {
                    train_order.push(t.to_string());
                }
            }
        }
    }
    let mut groups: BTreeMap<String, Vec<Atom>> = BTreeMap::new();
    let mut orphans: Vec<Atom> = Vec::new();
    for clause in &background.clauses {
        let a = &clause.head;
        let train = if a.predicate == "has_car" {
            a.args.first().and_then(constant_name).map(str::to_string)
        } else {
            a.args
                .first()
                .and_then(constant_name)
                .and_then(|c| car_to_train.get(c).cloned())
        };
        match train {
            Some(t) => groups.entry(t).or_default().push(a.clone()),
            None => orphans.push(a.clone()),
        }
    }
    let mut out: Vec<Vec<Atom>> = train_order
        .into_iter()
        .filter_map(|t| groups.remove(&t))
        .collect();
    if !orphans.is_empty() {
        out.push(orphans);
    }
    out
}

/// One English sentence per background fact.
pub fn nl_sentence(atom: &Atom) -> String {
    let arg = |i: usize| -> String {
        atom.args.get(i).map(|t| t.to_string()).unwrap_or_default()
    };
    match (atom.predicate.as_str(), atom.args.len()) {
        ("has_car", 2) => format!("Train {} has a car {}.", arg(0), arg(1)),
        ("car_num", 2) => format!("The car {} is in position {}.", arg(0), arg(1)),
        ("car_color", 2) => format!("The car {} is {}.", arg(0), arg(1)),
        ("car_len", 2) => format!("The car {} is {}.", arg(0), arg(1)),
        ("has_wall", 2) => format!("The car {} has a {} wall.", arg(0), arg(1)),
        ("has_roof", 2) => {
            if arg(1) == "none" {
                format!("The car {} has no roof.", arg(0))
            } else {
                format!("The car {} has a {} roof.", arg(0), arg(1))
            }
        }
        ("has_payload", 2) => {
            if arg(1) == "none" {
                format!("The car {} carries no payload.", arg(0))
            } else {
                format!("The car {} carries a {}.", arg(0), arg(1))
            }
        }
        ("load_num", 2) => format!("The car {} carries {} loads.", arg(0), arg(1)),
        ("has_wheel", 2) => format!("The car {} has {} wheels.", arg(0), arg(1)),
        ("has_window", 2) => {
            if arg(1) == "none" {
                format!("The car {} has no window.", arg(0))
            } else {
                format!("The car {} has a {} window.", arg(0), arg(1))
            }
        }
        ("car_type", 2) => format!("The car {} is a {} car.", arg(0), arg(1)),
        ("passenger_num", 2) => format!("The car {} carries {} passengers.", arg(0), arg(1)),
        _ => format!("The fact {atom} holds."),
    }
}

fn nl_label_sentence(target: &str, q: &Atom, positive: bool) -> String {
    let train = q.args.first().map(|t| t.to_string()).unwrap_or_default();
    match target {
        "eastbound" | "westbound" => format!("Train {train} is {target}."),
        _ if positive => format!("Train {train} is a positive example."),
        _ => format!("Train {train} is a negative example."),
    }
}
