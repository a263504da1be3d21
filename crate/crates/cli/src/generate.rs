//! `induct generate`: build curriculum levels and write JSONL splits
//! plus a manifest with a reproducible content hash.

use anyhow::Context;
use clap::Args;
use induct_core::curriculum::{build_dataset, default_curriculum, BuildOptions};
use induct_core::records::write_jsonl;
use induct_core::rulegen::{builtin_templates, RulePolicy};
use std::fs;
use std::path::PathBuf;

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// Levels to build, e.g. `1-5` or `1,3,9-12`.
    #[arg(long, default_value = "1-20")]
    pub levels: String,
    /// Dataset seed; the manifest hash is a pure function of it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for the split files and manifest.
    #[arg(long)]
    pub out: PathBuf,
    /// Splits to write.
    #[arg(long, default_value = "train,eval,test", value_delimiter = ',')]
    pub splits: Vec<String>,
    /// Output format (jsonl only).
    #[arg(long, default_value = "jsonl")]
    pub format: String,
    /// Rule source for the guided share: `none`/`stub` use the built-in
    /// template pool, `http` calls the endpoint in INDUCT_LLM_ENDPOINT.
    #[arg(long, default_value = "none")]
    pub llm_client: String,
    /// Override the train split size of every level.
    #[arg(long)]
    pub train_size: Option<u32>,
    /// Override the eval split size of every level.
    #[arg(long)]
    pub eval_size: Option<u32>,
    /// Override the test split size of every level.
    #[arg(long)]
    pub test_size: Option<u32>,
}

pub fn run(args: &GenerateArgs) -> anyhow::Result<()> {
    anyhow::ensure!(args.format == "jsonl", "unsupported format `{}`", args.format);
    let levels = crate::parse_levels(&args.levels)?;
    let curriculum = default_curriculum();
    let specs: Vec<_> = curriculum
        .into_iter()
        .filter(|spec| levels.contains(&spec.level))
        .collect();

    let guided_policy = match args.llm_client.as_str() {
        "none" | "stub" => None,
        "http" => Some(RulePolicy::LlmGuided {
            client: std::sync::Arc::new(crate::llm_http::HttpLlmClient::from_env()?),
        }),
        other => anyhow::bail!("unknown --llm-client `{other}` (none|stub|http)"),
    };
    let _ = builtin_templates(); // validates the embedded catalogue early

    let options = BuildOptions {
        train_size: args.train_size,
        eval_size: args.eval_size,
        test_size: args.test_size,
        limits: None,
        guided_policy,
    };

    let build = build_dataset(&specs, args.seed, &options)
        .context("dataset synthesis failed")?;

    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    for split in &args.splits {
        let records = build
            .splits
            .get(split)
            .map(Vec::as_slice)
            .unwrap_or_default();
        let path = args.out.join(format!("{split}.jsonl"));
        let file = fs::File::create(&path)
            .with_context(|| format!("creating {}", path.display()))?;
        write_jsonl(std::io::BufWriter::new(file), records)?;
        eprintln!("wrote {} records to {}", records.len(), path.display());
    }
    let manifest_path = args.out.join("manifest.json");
    fs::write(&manifest_path, serde_json::to_string_pretty(&build.manifest)?)?;
    eprintln!(
        "manifest {} (hash {})",
        manifest_path.display(),
        &build.manifest.content_hash[..16]
    );
    for warning in &build.manifest.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(())
}
