//! Command implementations behind the `induct` binary: dataset
//! generation, response judging, and the HTTP reward service.

pub mod generate;
pub mod judge_cmd;
pub mod llm_http;
pub mod service;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "induct",
    about = "Synthesize inductive logic tasks, judge hypotheses, serve rewards",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate dataset splits as JSONL plus a manifest.
    Generate(generate::GenerateArgs),
    /// Judge a response file against a dataset and write a score report.
    Judge(judge_cmd::JudgeArgs),
    /// Serve the judge over HTTP for reward queries.
    Serve(service::ServeArgs),
    /// Print the level table of the default curriculum.
    Curriculum {
        /// Emit the full level specs as JSON.
        #[arg(long)]
        json: bool,
    },
}

pub fn print_curriculum(json: bool) -> anyhow::Result<()> {
    let levels = induct_core::curriculum::default_curriculum();
    if json {
        println!("{}", serde_json::to_string_pretty(&levels)?);
        return Ok(());
    }
    println!(
        "{:<6} {:<7} {:>6} {:>7} {:>9} {:>7} {:>10} {:>7} {:>19} {:>10}",
        "level", "tier", "preds", "cars", "kappa", "R_len", "policy", "llm%", "splits", "log10size"
    );
    for spec in &levels {
        let policy = match spec.background_policy {
            induct_core::synth::BackgroundPolicy::Mirror => "mirror",
            induct_core::synth::BackgroundPolicy::Uniform => "uniform",
        };
        println!(
            "{:<6} {:<7} {:>6} {:>7} {:>9} {:>7} {:>10} {:>7} {:>19} {:>10.1}",
            spec.level,
            spec.tier.to_string(),
            spec.language.predicates.len(),
            format!("{}-{}", spec.language.num_cars.start(), spec.language.num_cars.end()),
            spec.kappa_total,
            format!("{}-{}", spec.rule_length.start(), spec.rule_length.end()),
            policy,
            format!("{:.0}", spec.llm_rule_fraction * 100.0),
            format!(
                "{}/{}/{}",
                spec.split_sizes.train, spec.split_sizes.eval, spec.split_sizes.test
            ),
            induct_core::curriculum::estimate_comb_size(spec),
        );
    }
    Ok(())
}

/// Parses a level selection like `3`, `1-5`, or `1,4,7-9`.
pub fn parse_levels(text: &str) -> anyhow::Result<Vec<u32>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if let Some((lo, hi)) = part.split_once('-') {
            let lo: u32 = lo.trim().parse()?;
            let hi: u32 = hi.trim().parse()?;
            anyhow::ensure!(lo <= hi, "bad level range `{part}`");
            out.extend(lo..=hi);
        } else if !part.is_empty() {
            out.push(part.parse()?);
        }
    }
    anyhow::ensure!(!out.is_empty(), "no levels selected");
    out.sort_unstable();
    out.dedup();
    for level in &out {
        anyhow::ensure!((1..=20).contains(level), "level {level} out of range 1..=20");
    }
    Ok(out)
}
