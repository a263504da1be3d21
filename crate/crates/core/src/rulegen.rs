//! Ground-truth rule generation: uniform sampling over the language,
//! plus template- and LLM-guided generation with validation.
//!
//! The template pool is the deterministic offline stand-in for the
//! LLM-guided policy; both draw on the same exemplar catalogue, which
//! doubles as the prompt corpus for a live client.

use crate::language::{Language, NUM};
use crate::logic::{parse_program, Atom, BuiltinOp, Clause, Goal, Term};
use rand::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum RuleGenError {
    #[error("rule generation exhausted: {0}")]
    GenerationExhausted(String),
    #[error("LLM client unavailable: {0}")]
    LlmUnavailable(String),
    #[error("no valid rule after {attempts} attempts")]
    ValidationFailed { attempts: u32 },
    #[error("template not applicable: {0}")]
    TemplateNotApplicable(String),
}

/// Transport-agnostic LLM interface: one blocking completion call.
pub trait LlmClient: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, String>;
}

/// Canned client for tests and offline runs: replies cycle through the
/// given responses.
pub struct StaticClient {
    responses: Vec<String>,
    cursor: std::sync::Mutex<usize>,
}

impl StaticClient {
    pub fn new(responses: Vec<String>) -> Self {
        StaticClient { responses, cursor: std::sync::Mutex::new(0) }
    }
}

impl LlmClient for StaticClient {
    fn complete(&self, _prompt: &str) -> Result<String, String> {
        if self.responses.is_empty() {
            return Err("no canned responses".into());
        }
        let mut cursor = self.cursor.lock().unwrap();
        let reply = self.responses[*cursor % self.responses.len()].clone();
        *cursor += 1;
        Ok(reply)
    }
}

/// How the requested rule length is counted. The curriculum counts
/// attribute/builtin literals only, treating `has_car` links as
/// structural; the all-literals convention matches displays where the
/// link is counted too.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthConvention {
    #[default]
    AttributesOnly,
    AllLiterals,
}

/// Rule sampling policy R_sample.
#[derive(Clone)]
pub enum RulePolicy {
    Uniform,
    TemplatePool(Vec<RuleTemplate>),
    LlmGuided { client: Arc<dyn LlmClient> },
}

impl std::fmt::Debug for RulePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RulePolicy::Uniform => write!(f, "Uniform"),
            RulePolicy::TemplatePool(t) => write!(f, "TemplatePool({} templates)", t.len()),
            RulePolicy::LlmGuided { .. } => write!(f, "LlmGuided"),
        }
    }
}

impl RulePolicy {
    pub fn name(&self) -> &'static str {
        match self {
            RulePolicy::Uniform => "uniform",
            RulePolicy::TemplatePool(_) => "template",
            RulePolicy::LlmGuided { .. } => "llm",
        }
    }

    pub fn generate(
        &self,
        language: &Language,
        r_len: u32,
        convention: LengthConvention,
        rng: &mut impl Rng,
    ) -> Result<Clause, RuleGenError> {
        match self {
            RulePolicy::Uniform => sample_rule_uniform(language, r_len, rng, convention),
            _ => generate_rule_llm(self, language, r_len, rng),
        }
    }
}

// ---------------------------------------------------------------------------
// Uniform sampling
// ---------------------------------------------------------------------------

/// Samples a ground-truth rule: head over one train variable, body with
/// `r_len` attribute literals (plus the structural `has_car` links that
/// connect every car variable to the train). Values are ground constants
/// with probability 0.8, otherwise a fresh variable constrained by a
/// `\=` companion.
pub fn sample_rule_uniform(
    language: &Language,
    r_len: u32,
    rng: &mut impl Rng,
    convention: LengthConvention,
) -> Result<Clause, RuleGenError> {
    let max_cars = *language.num_cars.end() as usize;
    let car_range_varies = language.num_cars.start() != language.num_cars.end();
    // car_num is positional; on fixed-car-count levels any ground
    // car_num literal is constant-valued, so it only enters the pool
    // when the car count actually varies.
    let pool: Vec<&crate::language::PredicateSpec> = language
        .predicates
        .iter()
        .filter(|p| p.is_car_attribute() && (p.name != "car_num" || car_range_varies))
        .collect();
    if pool.is_empty() {
        return Err(RuleGenError::GenerationExhausted(
            "language has no car attribute predicates".into(),
        ));
    }

    let budget = r_len.max(1);
    let mut used: BTreeSet<(usize, String)> = BTreeSet::new();
    let mut cars_in_rule = 1usize;
    let mut attr_goals: Vec<Goal> = Vec::new();
    let mut var_counter = 0usize;
    // total counts literals under the active convention
    let mut total: u32 = match convention {
        LengthConvention::AttributesOnly => 0,
        LengthConvention::AllLiterals => 1, // the first has_car link
    };

    while total < budget {
        let remaining = budget - total;
        let used_ref = &used;
        let reusable: Vec<(usize, &crate::language::PredicateSpec)> = (0..cars_in_rule)
            .flat_map(|c| {
                pool.iter()
                    .filter(move |p| !used_ref.contains(&(c, p.name.clone())))
                    .map(move |p| (c, *p))
            })
            .collect();
        let can_open_car = cars_in_rule < max_cars
            && (convention == LengthConvention::AttributesOnly || remaining >= 2);
        let open_new = can_open_car
            && !attr_goals.is_empty()
            && (reusable.is_empty() || rng.random_bool(0.35));

        let (car_idx, pred, link_cost) = if open_new || reusable.is_empty() {
            if !can_open_car {
                return Err(RuleGenError::GenerationExhausted(format!(
                    "no unused attribute slots for rule length {r_len}"
                )));
            }
            let pred = *pool.choose(rng).unwrap();
            cars_in_rule += 1;
            (cars_in_rule - 1, pred, u32::from(convention == LengthConvention::AllLiterals))
        } else {
            let (c, p) = reusable.choose(rng).copied().unwrap();
            (c, p, 0)
        };
        used.insert((car_idx, pred.name.clone()));
        let cost = emit_attribute(
            language,
            pred,
            car_idx,
            remaining - link_cost,
            convention,
            rng,
            &mut attr_goals,
            &mut var_counter,
        );
        total += cost + link_cost;
    }

    let mut body: Vec<Goal> = (0..cars_in_rule)
        .map(|i| {
            Goal::Literal(Atom::new(
                "has_car",
                vec![Term::var("Train"), Term::var(car_var(i))],
            ))
        })
        .collect();
    body.extend(attr_goals);
    Ok(Clause {
        head: Atom::new(language.positive_target.clone(), vec![Term::var("Train")]),
        body,
    })
}

fn car_var(i: usize) -> String {
    if i == 0 {
        "Car".to_string()
    } else {
        format!("Car{}", i + 1)
    }
}

/// Appends one attribute literal (ground value, or variable with a `\=`
/// companion) and returns its literal cost under the convention.
#[allow(clippy::too_many_arguments)]
fn emit_attribute(
    language: &Language,
    pred: &crate::language::PredicateSpec,
    car_idx: usize,
    remaining: u32,
    convention: LengthConvention,
    rng: &mut impl Rng,
    out: &mut Vec<Goal>,
    var_counter: &mut usize,
) -> u32 {
    let value_type = &pred.arg_types[1];
    let domain: Vec<Term> = if value_type == NUM {
        (1..=*language.num_cars.end() as i64).map(Term::Int).collect()
    } else {
        language.domains.get(value_type).cloned().unwrap_or_default()
    };
    let companion_possible = domain.len() >= 2
        && match convention {
            LengthConvention::AttributesOnly => true,
            LengthConvention::AllLiterals => remaining >= 2,
        };
    let car = Term::var(car_var(car_idx));
    if companion_possible && rng.random_bool(0.2) {
        *var_counter += 1;
        let v = Term::var(format!("V{var_counter}"));
        let excluded = domain.choose(rng).unwrap().clone();
        out.push(Goal::Literal(Atom::new(pred.name.clone(), vec![car, v.clone()])));
        out.push(Goal::Builtin(BuiltinOp::NotUnify, vec![v, excluded]));
        match convention {
            // the companion is structural under attribute counting
            LengthConvention::AttributesOnly => 1,
            LengthConvention::AllLiterals => 2,
        }
    } else {
        let value = domain.choose(rng).expect("non-empty domain").clone();
        out.push(Goal::Literal(Atom::new(pred.name.clone(), vec![car, value])));
        1
    }
}

// ---------------------------------------------------------------------------
// Templates and LLM-guided generation
// ---------------------------------------------------------------------------

/// One exemplar pattern: concrete code for the prompt corpus plus a
/// hole-bearing pattern for offline instantiation. Holes are written
/// `{TYPE}` or `{TYPE<digit>}`; same token, same value; distinct tokens
/// of one type get distinct values. `{target}` is the positive-class
/// predicate and `{NUM}` draws from the language's car-count range.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleTemplate {
    pub name: String,
    pub description: String,
    pub tags: BTreeSet<String>,
    pub effective_length: u32,
    pub pattern: String,
    pub example: String,
}

impl RuleTemplate {
    pub fn instantiate(
        &self,
        language: &Language,
        rng: &mut impl Rng,
    ) -> Result<Clause, RuleGenError> {
        let mut text = self.pattern.replace("{target}", &language.positive_target);
        let holes = collect_holes(&text);
        // group hole tokens by base type, assigning distinct values
        let mut by_type: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for token in &holes {
            let base = token.trim_end_matches(|c: char| c.is_ascii_digit()).to_string();
            by_type.entry(base).or_default().push(token.clone());
        }
        for (base, tokens) in by_type {
            let domain: Vec<Term> = if base == NUM {
                (*language.num_cars.start() as i64..=*language.num_cars.end() as i64)
                    .map(Term::Int)
                    .collect()
            } else {
                language.domains.get(&base).cloned().unwrap_or_default()
            };
            if domain.len() < tokens.len() {
                return Err(RuleGenError::TemplateNotApplicable(format!(
                    "{}: needs {} distinct {} values, domain has {}",
                    self.name,
                    tokens.len(),
                    base,
                    domain.len()
                )));
            }
            let values: Vec<&Term> = domain.iter().choose_multiple(rng, tokens.len());
            for (token, value) in tokens.iter().zip(values) {
                text = text.replace(&format!("{{{token}}}"), &value.to_string());
            }
        }
        let program = parse_program(&text).map_err(|e| {
            RuleGenError::TemplateNotApplicable(format!("{}: {e}", self.name))
        })?;
        program
            .clauses
            .into_iter()
            .next()
            .ok_or_else(|| RuleGenError::TemplateNotApplicable(format!("{}: empty", self.name)))
    }
}

fn collect_holes(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'{' {
            if let Some(end) = text[i + 1..].find('}') {
                let token = &text[i + 1..i + 1 + end];
                if !token.is_empty()
                    && token.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit())
                    && !out.contains(&token.to_string())
                {
                    out.push(token.to_string());
                }
                i += end + 2;
                continue;
            }
        }
        i += 1;
    }
    out
}

/// The built-in exemplar catalogue.
pub fn builtin_templates() -> Vec<RuleTemplate> {
    serde_json::from_str(include_str!("../data/rule_templates.json"))
        .expect("template catalogue parses")
}

/// Renders the rule-generation prompt for a live LLM client.
pub fn render_rule_prompt(language: &Language, r_len: u32) -> String {
    let templates = builtin_templates();
    let examples = templates
        .iter()
        .enumerate()
        .map(|(i, t)| format!("{}. {}\n{}", i + 1, t.description, t.example))
        .collect::<Vec<_>>()
        .join("\n\n");
    let predicates = language
        .predicates
        .iter()
        .map(|p| format!("{}/{}", p.name, p.arity()))
        .collect::<Vec<_>>()
        .join(", ");
    let domains = language
        .domains
        .iter()
        .map(|(k, v)| {
            format!(
                "{k}: {}",
                v.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" | ")
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    include_str!("../data/rule_prompt.txt")
        .replace("{target}", &language.positive_target)
        .replace("{predicates}", &predicates)
        .replace("{domains}", &domains)
        .replace("{length}", &r_len.to_string())
        .replace("{examples}", &examples)
}

const LLM_RETRY_CAP: u32 = 3;

/// Template- or LLM-guided generation. For the template pool, a template
/// with effective length closest to `r_len` is selected uniformly and
/// instantiated; for a live client, the reply is parsed and validated,
/// retrying up to the cap.
pub fn generate_rule_llm(
    policy: &RulePolicy,
    language: &Language,
    r_len: u32,
    rng: &mut impl Rng,
) -> Result<Clause, RuleGenError> {
    match policy {
        RulePolicy::Uniform => {
            sample_rule_uniform(language, r_len, rng, LengthConvention::AttributesOnly)
        }
        RulePolicy::TemplatePool(templates) => {
            let mut candidates: Vec<&RuleTemplate> = templates.iter().collect();
            let mut attempts = 0;
            while !candidates.is_empty() {
                attempts += 1;
                let best = candidates
                    .iter()
                    .map(|t| t.effective_length.abs_diff(r_len))
                    .min()
                    .unwrap();
                let closest: Vec<usize> = candidates
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| t.effective_length.abs_diff(r_len) == best)
                    .map(|(i, _)| i)
                    .collect();
                let pick = *closest.choose(rng).unwrap();
                let template = candidates.remove(pick);
                if let Ok(rule) = template.instantiate(language, rng) {
                    if validate_rule(&rule, language).is_valid() {
                        return Ok(rule);
                    }
                }
            }
            Err(RuleGenError::ValidationFailed { attempts })
        }
        RulePolicy::LlmGuided { client } => {
            let prompt = render_rule_prompt(language, r_len);
            for attempt in 1..=LLM_RETRY_CAP {
                let reply = client
                    .complete(&prompt)
                    .map_err(RuleGenError::LlmUnavailable)?;
                let Some(text) = crate::metrics::extract_program_text(&reply) else {
                    continue;
                };
                let Ok(program) = parse_program(&text) else { continue };
                let Some(rule) = program.clauses.into_iter().next() else { continue };
                if validate_rule(&rule, language).is_valid() {
                    return Ok(rule);
                }
                let _ = attempt;
            }
            Err(RuleGenError::ValidationFailed { attempts: LLM_RETRY_CAP })
        }
    }
}

// ---------------------------------------------------------------------------
// Validation and feature tags
// ---------------------------------------------------------------------------

/// Validation report for a candidate rule. Cut does not invalidate a
/// rule; the engine runs it as `true` and the flag marks the task
/// metadata as nonstandard.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleValidation {
    pub head_is_target: bool,
    pub body_predicates_known: bool,
    pub constants_in_domain: bool,
    pub contains_cut: bool,
    pub problems: Vec<String>,
}

impl RuleValidation {
    pub fn is_valid(&self) -> bool {
        self.head_is_target && self.body_predicates_known && self.constants_in_domain
    }
}

/// Validates a single ground-truth rule against the language: the head
/// must be the positive target, every body predicate a language
/// predicate or builtin, and every constant in-domain.
pub fn validate_rule(rule: &Clause, language: &Language) -> RuleValidation {
    validate_clause(rule, language, &BTreeSet::new())
}

/// Clause-wise validation with hypothesis-local predicate definitions
/// allowed in bodies (helper predicates).
pub fn validate_clause(
    clause: &Clause,
    language: &Language,
    locals: &BTreeSet<(String, usize)>,
) -> RuleValidation {
    let mut problems = Vec::new();
    let head_is_target =
        clause.head.predicate == language.positive_target && clause.head.arity() == 1;

    let known = language.predicate_names();
    let mut body_predicates_known = true;
    let mut constants_in_domain = true;
    let mut contains_cut = false;

    clause.visit_goals(&mut |g| match g {
        Goal::Literal(atom) => {
            let key = atom.key();
            if let Some(spec) = language.predicate(&atom.predicate) {
                if spec.arity() != atom.arity() {
                    body_predicates_known = false;
                    problems.push(format!("wrong arity for {}", atom.predicate));
                    return;
                }
                for (ty, arg) in spec.arg_types.iter().zip(&atom.args) {
                    if arg.is_ground() && !language.constant_fits_type(ty, arg) {
                        constants_in_domain = false;
                        problems.push(format!("constant `{arg}` not in domain {ty}"));
                    }
                }
            } else if !known.contains(&key) && !locals.contains(&key) {
                body_predicates_known = false;
                problems.push(format!("unknown predicate {}/{}", key.0, key.1));
            }
        }
        Goal::Builtin(op, args) => {
            if *op == BuiltinOp::Cut {
                contains_cut = true;
            }
            let goal_positions: &[usize] = match op {
                BuiltinOp::FindAll => &[1],
                BuiltinOp::ForAll => &[0, 1],
                _ => &[],
            };
            for (i, arg) in args.iter().enumerate() {
                if goal_positions.contains(&i) {
                    continue; // goals are re-visited by Goal::visit
                }
                check_term_constants(arg, language, &mut constants_in_domain, &mut problems);
            }
        }
        _ => {}
    });

    RuleValidation {
        head_is_target,
        body_predicates_known,
        constants_in_domain,
        contains_cut,
        problems,
    }
}

fn check_term_constants(
    t: &Term,
    language: &Language,
    ok: &mut bool,
    problems: &mut Vec<String>,
) {
    match t {
        Term::Constant(_) => {
            if !language.constant_in_some_domain(t) {
                *ok = false;
                problems.push(format!("constant `{t}` not in any domain"));
            }
        }
        Term::Compound(_, args) => {
            args.iter().for_each(|a| check_term_constants(a, language, ok, problems))
        }
        Term::List(items, tail) => {
            items.iter().for_each(|a| check_term_constants(a, language, ok, problems));
            if let Some(t) = tail {
                check_term_constants(t, language, ok, problems);
            }
        }
        _ => {}
    }
}

/// Structural feature tags for task metadata.
pub fn rule_feature_tags(rule: &Clause) -> BTreeSet<String> {
    let mut tags = BTreeSet::new();
    let head_key = rule.head.key();
    rule.visit_goals(&mut |g| match g {
        Goal::Negation(_) => {
            tags.insert("negation".into());
        }
        Goal::Disjunction(..) => {
            tags.insert("disjunction".into());
        }
        Goal::Builtin(op, _) => {
            let tag = match op {
                BuiltinOp::FindAll
                | BuiltinOp::Length
                | BuiltinOp::Sort
                | BuiltinOp::Member
                | BuiltinOp::MaxList
                | BuiltinOp::MinList => "aggregation",
                BuiltinOp::ForAll => "universal",
                BuiltinOp::Is | BuiltinOp::ArithEq | BuiltinOp::ArithNeq => "arithmetic",
                BuiltinOp::Lt | BuiltinOp::Gt | BuiltinOp::Ge | BuiltinOp::Le => "comparison",
                BuiltinOp::Unify | BuiltinOp::NotUnify | BuiltinOp::StructEq => "comparison",
                BuiltinOp::Cut => "cut",
            };
            tags.insert(tag.into());
        }
        Goal::Literal(atom) => {
            if atom.key() == head_key {
                tags.insert("recursion".into());
            }
        }
        _ => {}
    });
    tags
}
