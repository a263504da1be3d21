//! Persistence and wire formats: one-task-per-line JSONL records, the
//! dataset manifest with its content hash, and the reward-service
//! request/response shapes.

use crate::engine::ResourceLimits;
use crate::judge::Judgment;
use crate::language::Language;
use crate::logic::{parse_atom, parse_program, Atom, Program};
use crate::synth::{TaskInstance, TaskMetadata};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("record {id}: {message}")]
    Malformed { id: String, message: String },
}

/// One task as a JSONL row. `background`, `positives`, and `negatives`
/// are canonical program/atom text and re-parse into the task they came
/// from; the metadata object carries the language so records are
/// self-contained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub id: String,
    pub level: u32,
    pub tier: String,
    pub seed: u64,
    pub prompt_logic: String,
    pub prompt_nl: String,
    pub ground_truth_rule: String,
    pub background: String,
    pub positives: Vec<String>,
    pub negatives: Vec<String>,
    pub metadata: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RecordMetadata {
    #[serde(flatten)]
    task: TaskMetadata,
    language: Language,
}

impl TaskRecord {
    pub fn from_task(task: &TaskInstance, id: impl Into<String>) -> TaskRecord {
        let metadata = RecordMetadata {
            task: task.metadata.clone(),
            language: task.language.clone(),
        };
        TaskRecord {
            id: id.into(),
            level: task.level.unwrap_or(0),
            tier: task.metadata.tier.clone().unwrap_or_default(),
            seed: task.seed,
            prompt_logic: task.prompt_logic.clone(),
            prompt_nl: task.prompt_nl.clone(),
            ground_truth_rule: task.rule.to_string(),
            background: crate::logic::render(&task.background),
            positives: task.positives.iter().map(|a| a.to_string()).collect(),
            negatives: task.negatives.iter().map(|a| a.to_string()).collect(),
            metadata: serde_json::to_value(metadata).expect("metadata serializes"),
        }
    }

    pub fn to_task(&self) -> Result<TaskInstance, RecordError> {
        let err = |message: String| RecordError::Malformed { id: self.id.clone(), message };
        let meta: RecordMetadata = serde_json::from_value(self.metadata.clone())
            .map_err(|e| err(format!("metadata: {e}")))?;
        let rule_program = parse_program(&self.ground_truth_rule)
            .map_err(|e| err(format!("rule: {e}")))?;
        let rule = rule_program
            .clauses
            .into_iter()
            .next()
            .ok_or_else(|| err("empty ground-truth rule".into()))?;
        let background: Program =
            parse_program(&self.background).map_err(|e| err(format!("background: {e}")))?;
        let parse_atoms = |items: &[String], what: &str| -> Result<Vec<Atom>, RecordError> {
            items
                .iter()
                .map(|s| parse_atom(s).map_err(|e| err(format!("{what}: {e}"))))
                .collect()
        };
        Ok(TaskInstance {
            rule,
            language: meta.language,
            background,
            positives: parse_atoms(&self.positives, "positive example")?,
            negatives: parse_atoms(&self.negatives, "negative example")?,
            prompt_logic: self.prompt_logic.clone(),
            prompt_nl: self.prompt_nl.clone(),
            level: (self.level > 0).then_some(self.level),
            seed: self.seed,
            metadata: meta.task,
        })
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

/// Writes records as one JSON object per line.
pub fn write_jsonl<W: Write>(mut out: W, records: &[TaskRecord]) -> Result<(), RecordError> {
    for r in records {
        writeln!(out, "{}", r.to_json_line())?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<TaskRecord>, RecordError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TaskRecord = serde_json::from_str(&line)
            .map_err(|source| RecordError::Json { line: i + 1, source })?;
        out.push(record);
    }
    Ok(out)
}

/// Reads generic JSONL rows (responses, etc.).
pub fn read_jsonl_as<T: serde::de::DeserializeOwned, R: BufRead>(
    input: R,
) -> Result<Vec<T>, RecordError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: T = serde_json::from_str(&line)
            .map_err(|source| RecordError::Json { line: i + 1, source })?;
        out.push(row);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: u32,
    pub tier: String,
    pub counts: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub dataset_seed: u64,
    pub levels: Vec<LevelSummary>,
    /// Record totals per split.
    pub counts: BTreeMap<String, u32>,
    /// sha256 over the canonical JSONL lines of every record in
    /// (level, split, index) order.
    pub content_hash: String,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Hashes records in their serialized line form.
pub fn content_hash<'a>(records: impl IntoIterator<Item = &'a TaskRecord>) -> String {
    let mut hasher = Sha256::new();
    for r in records {
        hasher.update(r.to_json_line().as_bytes());
        hasher.update(b"\n");
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

// ---------------------------------------------------------------------------
// Reward service wire types
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitsOverride {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timeout_ms: Option<u64>,
}

impl LimitsOverride {
    /// Resolves against server limits; client values can only tighten.
    pub fn clamp_to(&self, server: &ResourceLimits) -> ResourceLimits {
        ResourceLimits {
            max_depth: self.max_depth.unwrap_or(server.max_depth).min(server.max_depth),
            max_steps: self.max_steps.unwrap_or(server.max_steps).min(server.max_steps),
            wall_timeout: self
                .timeout_ms
                .map(std::time::Duration::from_millis)
                .unwrap_or(server.wall_timeout)
                .min(server.wall_timeout),
        }
    }
}

/// A judge request: either `task_id` into the preloaded dataset, or an
/// inline (background, positives, negatives) triple.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JudgeRequest {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub task_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub background: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub positives: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub negatives: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target: Option<String>,
    pub hypothesis: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub limits: Option<LimitsOverride>,
}

/// Mirror of [`Judgment`] with the partial score rounded to six decimal
/// digits for the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeResponse {
    pub syntax: u8,
    pub overall: u8,
    pub partial: f64,
    pub diagnostics: Vec<String>,
}

impl JudgeResponse {
    pub fn from_judgment(j: &Judgment) -> JudgeResponse {
        let (syntax, overall, partial) = j.scores();
        JudgeResponse {
            syntax,
            overall,
            partial: (partial * 1e6).round() / 1e6,
            diagnostics: j.diagnostics.clone(),
        }
    }
}
