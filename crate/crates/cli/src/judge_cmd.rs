//! `induct judge`: score a model-response file against a dataset.

use anyhow::Context;
use clap::Args;
use induct_core::curriculum::default_tiers;
use induct_core::engine::ResourceLimits;
use induct_core::metrics::{score_responses, ExtractionRule, PricingTable, ResponseRecord};
use induct_core::records::{read_jsonl, read_jsonl_as};
use induct_core::synth::TaskInstance;
use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

#[derive(Debug, Clone, Args)]
pub struct JudgeArgs {
    /// Dataset JSONL file (usually the test split).
    #[arg(long)]
    pub dataset: PathBuf,
    /// Responses JSONL: rows of {"id", "output", "model"?, "tokens"?}.
    #[arg(long)]
    pub responses: PathBuf,
    /// Where the JSON score report goes (stdout when omitted).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Pricing table JSON; adds cost columns when supplied.
    #[arg(long)]
    pub pricing: Option<PathBuf>,
    /// Use the built-in public pricing table.
    #[arg(long)]
    pub builtin_pricing: bool,
    /// Worker threads for judging.
    #[arg(long, default_value_t = 4)]
    pub parallelism: usize,
    /// Per-query wall timeout in milliseconds.
    #[arg(long, default_value_t = 5000)]
    pub timeout_ms: u64,
    /// Response extraction rule.
    #[arg(long, default_value = "fence_then_suffix")]
    pub extraction: String,
}

pub fn run(args: &JudgeArgs) -> anyhow::Result<()> {
    let dataset_file = fs::File::open(&args.dataset)
        .with_context(|| format!("opening {}", args.dataset.display()))?;
    let records = read_jsonl(std::io::BufReader::new(dataset_file))?;
    let mut tasks: Vec<(String, TaskInstance)> = Vec::with_capacity(records.len());
    for record in &records {
        tasks.push((record.id.clone(), record.to_task()?));
    }

    let responses_file = fs::File::open(&args.responses)
        .with_context(|| format!("opening {}", args.responses.display()))?;
    let rows: Vec<ResponseRecord> = read_jsonl_as(std::io::BufReader::new(responses_file))?;
    let responses: BTreeMap<String, ResponseRecord> =
        rows.into_iter().map(|r| (r.id.clone(), r)).collect();

    let pricing = match (&args.pricing, args.builtin_pricing) {
        (Some(path), _) => Some(PricingTable::from_json(&fs::read_to_string(path)?)?),
        (None, true) => Some(PricingTable::builtin()),
        (None, false) => None,
    };

    let extraction = match args.extraction.as_str() {
        "fence_then_suffix" => ExtractionRule::FenceThenSuffix,
        "suffix" => ExtractionRule::SuffixOnly,
        "verbatim" => ExtractionRule::Verbatim,
        other => anyhow::bail!("unknown extraction rule `{other}`"),
    };

    let limits = ResourceLimits {
        wall_timeout: std::time::Duration::from_millis(args.timeout_ms),
        ..ResourceLimits::default()
    };

    let report = score_responses(
        &tasks,
        &responses,
        &default_tiers(),
        &limits,
        extraction,
        args.parallelism.max(1),
        pricing.as_ref(),
    )?;

    let text = serde_json::to_string_pretty(&report)?;
    match &args.report {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            eprintln!(
                "judged {} tasks: LRL {:.3}, syntax {:.1}% ({} responses missing)",
                tasks.len(),
                report.lrl,
                report.syntax_proportion,
                report.missing_responses.len()
            );
        }
        None => println!("{text}"),
    }
    Ok(())
}
