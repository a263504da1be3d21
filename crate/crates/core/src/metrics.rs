//! Scoring model responses over a dataset: cumulative reasoning level,
//! syntax proportion, per-tier accuracy, and token cost accounting.
//!
//! All ratios are computed in exact rationals; floats appear only in
//! rendered reports.

use crate::curriculum::Tier;
use crate::engine::ResourceLimits;
use crate::judge::{judge, judge_batch, Judgment};
use crate::synth::TaskInstance;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no pricing row for model `{0}`")]
    UnknownModel(String),
    #[error("invalid pricing table: {0}")]
    InvalidPricing(String),
}

/// Per-level aggregate over judged responses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: u32,
    pub tasks: u32,
    /// Tasks with overall = 1.
    pub solved: u32,
    /// Tasks with syntax = 1. `solved <= syntax_valid` always.
    pub syntax_valid: u32,
    pub partial_sum: Ratio<u64>,
}

impl LevelStats {
    pub fn new(level: u32) -> LevelStats {
        LevelStats {
            level,
            tasks: 0,
            solved: 0,
            syntax_valid: 0,
            partial_sum: Ratio::new(0, 1),
        }
    }

    pub fn record(&mut self, judgment: &Judgment) {
        self.tasks += 1;
        self.solved += u32::from(judgment.overall);
        self.syntax_valid += u32::from(judgment.syntax);
        self.partial_sum += judgment.partial;
    }

    pub fn solved_fraction(&self) -> Ratio<u64> {
        Ratio::new(self.solved as u64, (self.tasks as u64).max(1))
    }
}

/// Cumulative reasoning level: the sum over levels of the per-level
/// solved fraction. Range [0, number of levels].
pub fn lrl(per_level: &[LevelStats]) -> Ratio<u64> {
    per_level
        .iter()
        .map(LevelStats::solved_fraction)
        .fold(Ratio::new(0, 1), |acc, f| acc + f)
}

/// Solved-over-tasks pooled per tier, as a percentage.
pub fn tier_accuracy(
    per_level: &[LevelStats],
    tiers: &BTreeMap<u32, Tier>,
) -> BTreeMap<Tier, Ratio<u64>> {
    let mut pooled: BTreeMap<Tier, (u64, u64)> = BTreeMap::new();
    for stats in per_level {
        let tier = tiers.get(&stats.level).copied().unwrap_or(Tier::Basic);
        let entry = pooled.entry(tier).or_insert((0, 0));
        entry.0 += stats.solved as u64;
        entry.1 += stats.tasks as u64;
    }
    pooled
        .into_iter()
        .map(|(tier, (solved, tasks))| (tier, Ratio::new(solved * 100, tasks.max(1))))
        .collect()
}

/// Syntactically valid responses over all responses, as a percentage.
pub fn syntax_proportion(per_level: &[LevelStats]) -> Ratio<u64> {
    let valid: u64 = per_level.iter().map(|s| s.syntax_valid as u64).sum();
    let tasks: u64 = per_level.iter().map(|s| s.tasks as u64).sum();
    Ratio::new(valid * 100, tasks.max(1))
}

// ---------------------------------------------------------------------------
// Pricing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceRow {
    /// USD per 1M input tokens.
    pub input: f64,
    /// USD per 1M cached input tokens, when the provider meters them.
    pub cached_input: Option<f64>,
    /// USD per 1M output tokens.
    pub output: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PricingTable(pub BTreeMap<String, PriceRow>);

impl PricingTable {
    /// The built-in table of public API rates.
    pub fn builtin() -> PricingTable {
        serde_json::from_str(include_str!("../data/pricing.json")).expect("pricing parses")
    }

    pub fn from_json(text: &str) -> Result<PricingTable, MetricsError> {
        let table: PricingTable =
            serde_json::from_str(text).map_err(|e| MetricsError::InvalidPricing(e.to_string()))?;
        for (model, row) in &table.0 {
            if row.input < 0.0 || row.output < 0.0 || row.cached_input.is_some_and(|c| c < 0.0) {
                return Err(MetricsError::InvalidPricing(format!(
                    "negative rate for {model}"
                )));
            }
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub input: u64,
    /// Cached-input tokens; the cached rate applies only when supplied.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cached_input: Option<u64>,
    pub output: u64,
}

impl TokenUsage {
    pub fn add(&mut self, other: &TokenUsage) {
        self.input += other.input;
        if let Some(c) = other.cached_input {
            *self.cached_input.get_or_insert(0) += c;
        }
        self.output += other.output;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub per_model: BTreeMap<String, f64>,
    pub total_usd: f64,
}

/// Σ tokens × rate / 1e6 per model. Unknown models are an error rather
/// than a silent zero.
pub fn compute_cost(
    usage: &BTreeMap<String, TokenUsage>,
    pricing: &PricingTable,
) -> Result<CostReport, MetricsError> {
    let mut per_model = BTreeMap::new();
    let mut total = 0.0;
    for (model, tokens) in usage {
        let row = pricing
            .0
            .get(model)
            .ok_or_else(|| MetricsError::UnknownModel(model.clone()))?;
        let mut usd = tokens.input as f64 * row.input / 1e6
            + tokens.output as f64 * row.output / 1e6;
        if let (Some(cached), Some(rate)) = (tokens.cached_input, row.cached_input) {
            usd += cached as f64 * rate / 1e6;
        } else if let Some(cached) = tokens.cached_input {
            // no cached rate listed: cached tokens bill at the input rate
            usd += cached as f64 * row.input / 1e6;
        }
        total += usd;
        per_model.insert(model.clone(), usd);
    }
    Ok(CostReport { per_model, total_usd: total })
}

// ---------------------------------------------------------------------------
// Response extraction
// ---------------------------------------------------------------------------

/// How a hypothesis is pulled out of raw model output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionRule {
    /// Last code-fenced block if any, otherwise the longest suffix that
    /// parses as clauses.
    #[default]
    FenceThenSuffix,
    /// Only the longest parsing suffix.
    SuffixOnly,
    /// The raw text, trimmed.
    Verbatim,
}

/// Extracts candidate hypothesis text from a raw model response.
pub fn extract_hypothesis(text: &str, rule: ExtractionRule) -> Option<String> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return None;
    }
    match rule {
        ExtractionRule::Verbatim => Some(trimmed.to_string()),
        ExtractionRule::SuffixOnly => longest_parsing_suffix(trimmed),
        ExtractionRule::FenceThenSuffix => last_code_fence(trimmed)
            .or_else(|| longest_parsing_suffix(trimmed))
            .or(Some(trimmed.to_string())),
    }
}

/// Extraction tuned for program text: fenced block or parsing suffix,
/// never falling back to raw prose.
pub fn extract_program_text(text: &str) -> Option<String> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return None;
    }
    if let Some(block) = last_code_fence(trimmed) {
        if crate::logic::parse_program(&block).is_ok() {
            return Some(block);
        }
    }
    longest_parsing_suffix(trimmed)
}

fn last_code_fence(text: &str) -> Option<String> {
    let parts: Vec<&str> = text.split("```").collect();
    if parts.len() < 3 {
        return None;
    }
    // blocks sit at odd indices; take the last complete one
    let last_block_idx = if parts.len() % 2 == 1 { parts.len() - 2 } else { parts.len() - 3 };
    let block = parts.get(last_block_idx)?;
    let cleaned = match block.split_once('\n') {
        // drop a language tag like ```prolog
        Some((first, rest)) if !first.trim().is_empty() && !first.contains('(') => rest,
        _ => block,
    };
    let cleaned = cleaned.trim();
    (!cleaned.is_empty()).then(|| cleaned.to_string())
}

fn longest_parsing_suffix(text: &str) -> Option<String> {
    let lines: Vec<&str> = text.lines().collect();
    for start in 0..lines.len() {
        let candidate = lines[start..].join("\n");
        let candidate = candidate.trim();
        if candidate.is_empty() {
            continue;
        }
        if let Ok(p) = crate::logic::parse_program(candidate) {
            if !p.clauses.is_empty() {
                return Some(candidate.to_string());
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Dataset scoring
// ---------------------------------------------------------------------------

/// One model response row: raw output text plus optional token usage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub id: String,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tokens: Option<TokenUsage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: u32,
    pub tasks: u32,
    pub solved: u32,
    pub syntax_valid: u32,
    pub solved_fraction: f64,
    pub mean_partial: f64,
}

/// The full scoring report for one response file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub levels: Vec<LevelReport>,
    pub lrl: f64,
    /// Exact LRL as (numerator, denominator).
    pub lrl_exact: (u64, u64),
    pub tier_accuracy: BTreeMap<String, f64>,
    pub syntax_proportion: f64,
    pub missing_responses: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub costs: Option<CostReport>,
    /// Reserved for multi-sample pass@k aggregation; single-attempt
    /// scoring leaves it empty.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pass_at_k: Option<serde_json::Value>,
}

/// Judges every (task, response) pair and aggregates the metrics.
/// Missing or empty responses count as syntax 0.
#[allow(clippy::too_many_arguments)]
pub fn score_responses(
    tasks: &[(String, TaskInstance)],
    responses: &BTreeMap<String, ResponseRecord>,
    tiers: &BTreeMap<u32, Tier>,
    limits: &ResourceLimits,
    extraction: ExtractionRule,
    parallelism: usize,
    pricing: Option<&PricingTable>,
) -> Result<EvalReport, MetricsError> {
    let mut missing = Vec::new();
    let hypotheses: Vec<Option<String>> = tasks
        .iter()
        .map(|(id, _)| {
            let text = responses.get(id).and_then(|r| r.output.as_deref());
            match text {
                Some(t) => extract_hypothesis(t, extraction),
                None => {
                    missing.push(id.clone());
                    None
                }
            }
        })
        .collect();

    let items: Vec<(&str, &TaskInstance)> = tasks
        .iter()
        .zip(&hypotheses)
        .map(|((_, task), h)| (h.as_deref().unwrap_or(""), task))
        .collect();
    let judgments = if parallelism > 1 {
        judge_batch(&items, limits, parallelism)
    } else {
        items.iter().map(|(h, t)| judge(h, t, limits)).collect()
    };

    let mut per_level: BTreeMap<u32, LevelStats> = BTreeMap::new();
    for ((_, task), judgment) in tasks.iter().zip(&judgments) {
        let level = task.level.unwrap_or(0);
        per_level.entry(level).or_insert_with(|| LevelStats::new(level)).record(judgment);
    }
    let stats: Vec<LevelStats> = per_level.into_values().collect();

    let lrl_value = lrl(&stats);
    let tier_acc = tier_accuracy(&stats, tiers);
    let syntax = syntax_proportion(&stats);

    let costs = match pricing {
        Some(table) => {
            let mut usage: BTreeMap<String, TokenUsage> = BTreeMap::new();
            for (id, _) in tasks {
                if let Some(r) = responses.get(id) {
                    if let (Some(model), Some(tokens)) = (&r.model, &r.tokens) {
                        usage.entry(model.clone()).or_default().add(tokens);
                    }
                }
            }
            (!usage.is_empty()).then(|| compute_cost(&usage, table)).transpose()?
        }
        None => None,
    };

    Ok(EvalReport {
        levels: stats
            .iter()
            .map(|s| LevelReport {
                level: s.level,
                tasks: s.tasks,
                solved: s.solved,
                syntax_valid: s.syntax_valid,
                solved_fraction: ratio_f64(s.solved_fraction()),
                mean_partial: ratio_f64(s.partial_sum) / (s.tasks as f64).max(1.0),
            })
            .collect(),
        lrl: ratio_f64(lrl_value),
        lrl_exact: (*lrl_value.numer(), *lrl_value.denom()),
        tier_accuracy: tier_acc
            .into_iter()
            .map(|(t, v)| (t.to_string(), ratio_f64(v)))
            .collect(),
        syntax_proportion: ratio_f64(syntax),
        missing_responses: missing,
        costs,
        pass_at_k: None,
    })
}

pub fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / (*r.denom() as f64).max(1.0)
}
