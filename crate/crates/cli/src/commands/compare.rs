use crate::commands::{csv_num, parse_kinds, parse_seeds, read_sessions};
use crate::manifest::RunManifest;
use anyhow::{Context, Result};
use clap::Args;
use deepbrain_core::eval::{compare_models, BenchmarkProtocol, CompareRow, DEFAULT_BENCHMARK_EPOCHS};
use std::fs;
use std::path::PathBuf;

#[derive(Args)]
pub struct CompareArgs {
    /// Quiet-condition sessions (JSONL)
    #[arg(long)]
    pub quiet: PathBuf,
    /// Noisy-condition sessions (JSONL)
    #[arg(long)]
    pub noisy: PathBuf,
    /// Comma-separated model kinds
    #[arg(long, default_value = "deepbrain,stacked,lstm,mlp")]
    pub models: String,
    /// Comma-separated seeds; metrics are means over them
    #[arg(long, default_value = "1,2,3")]
    pub seeds: String,
    #[arg(long, default_value_t = DEFAULT_BENCHMARK_EPOCHS)]
    pub epochs: usize,
    /// Directory for compare_quiet.csv, compare_noisy.csv, compare.json
    #[arg(long = "out-dir")]
    pub out_dir: PathBuf,
}

fn table_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from("method,accuracy,precision,recall,f1,auc\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.method,
            csv_num(r.accuracy),
            csv_num(r.precision),
            csv_num(r.recall),
            csv_num(r.f1),
            csv_num(r.auc)
        ));
    }
    out
}

pub fn run(args: CompareArgs) -> Result<()> {
    let kinds = parse_kinds(&args.models)?;
    let seeds = parse_seeds(&args.seeds)?;
    if kinds.is_empty() || seeds.is_empty() {
        return Err(crate::CliFailure::Usage("need at least one model and one seed".into()).into());
    }
    let quiet = read_sessions(&args.quiet)?;
    let noisy = read_sessions(&args.noisy)?;

    let mut protocol = BenchmarkProtocol::default();
    protocol.epochs = args.epochs;
    let comparison = compare_models(&kinds, &quiet, &noisy, &protocol, &seeds)?;

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    let quiet_csv = args.out_dir.join("compare_quiet.csv");
    let noisy_csv = args.out_dir.join("compare_noisy.csv");
    let json_path = args.out_dir.join("compare.json");
    fs::write(&quiet_csv, table_csv(&comparison.quiet))?;
    fs::write(&noisy_csv, table_csv(&comparison.noisy))?;
    let mut body = serde_json::to_string_pretty(&comparison)?;
    body.push('\n');
    fs::write(&json_path, body)?;

    let mut manifest = RunManifest::new(
        "compare",
        serde_json::json!({
            "models": kinds.iter().map(|k| k.cli_name()).collect::<Vec<_>>(),
            "protocol": protocol,
        }),
        seeds.clone(),
    );
    manifest.hash_input(&args.quiet)?;
    manifest.hash_input(&args.noisy)?;
    manifest.record_output(&quiet_csv);
    manifest.record_output(&noisy_csv);
    manifest.record_output(&json_path);
    manifest.write_beside(&json_path)?;

    for (label, rows) in [("quiet", &comparison.quiet), ("noisy", &comparison.noisy)] {
        for r in rows {
            println!(
                "{} {}: accuracy={:.4} f1={:.4} auc={:.4}",
                label, r.method, r.accuracy, r.f1, r.auc
            );
        }
    }
    Ok(())
}
