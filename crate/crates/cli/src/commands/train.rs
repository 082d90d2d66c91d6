use crate::commands::{csv_num, read_sessions};
use crate::manifest::RunManifest;
use anyhow::{Context, Result};
use clap::Args;
use deepbrain_core::network::{ModelConfig, ModelKind};
use deepbrain_core::preprocess::{preprocess_session, PreprocessConfig};
use deepbrain_core::signal::{split_dataset, Dataset};
use deepbrain_core::training::{train_model, TrainConfig};
use std::fs;
use std::path::PathBuf;

#[derive(Args)]
pub struct TrainArgs {
    /// Training sessions (JSONL)
    #[arg(long)]
    pub data: PathBuf,
    /// Model kind: deepbrain | stacked | lstm | mlp
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value_t = 80)]
    pub epochs: usize,
    /// Minibatch size
    #[arg(long, default_value_t = 64)]
    pub batch: usize,
    /// Learning rate (Adam)
    #[arg(long, default_value_t = 1e-4)]
    pub lr: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Fraction of windows used for training; the rest select the best epoch
    #[arg(long = "train-frac", default_value_t = 0.85)]
    pub train_frac: f64,
    /// Checkpoint output path (JSON)
    #[arg(long)]
    pub out: PathBuf,
    /// History CSV path; defaults to `<out>.history.csv`
    #[arg(long)]
    pub history: Option<PathBuf>,
}

pub fn run(args: TrainArgs) -> Result<()> {
    let kind: ModelKind = args
        .model
        .parse()
        .map_err(|e: deepbrain_core::Error| crate::CliFailure::Usage(e.to_string()))?;
    let sessions = read_sessions(&args.data)?;
    let pre = PreprocessConfig::default();
    let windows = sessions
        .iter()
        .map(|s| preprocess_session(s, &pre))
        .collect::<deepbrain_core::Result<Vec<_>>>()?;
    let data = Dataset::new(windows);
    let (train, valid) = split_dataset(&data, args.train_frac, args.seed)?;

    let config = ModelConfig::new(kind);
    let mut tcfg = TrainConfig::new(args.epochs, args.seed);
    tcfg.batch_size = args.batch;
    tcfg.learning_rate = Some(args.lr);
    let outcome = train_model(&config, &tcfg, &train, &valid, &pre)?;

    outcome.checkpoint.save(&args.out)?;
    let history_path = args
        .history
        .clone()
        .unwrap_or_else(|| args.out.with_file_name(format!(
            "{}.history.csv",
            args.out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
        )));
    let mut csv = String::from("epoch,train_loss,valid_accuracy\n");
    for h in &outcome.history {
        csv.push_str(&format!(
            "{},{},{}\n",
            h.epoch,
            csv_num(h.train_loss),
            csv_num(h.valid_accuracy)
        ));
    }
    fs::write(&history_path, csv)
        .with_context(|| format!("cannot write {}", history_path.display()))?;

    let mut manifest = RunManifest::new(
        "train",
        serde_json::json!({
            "model_config": config,
            "train_config": {
                "epochs": tcfg.epochs,
                "batch_size": tcfg.batch_size,
                "seed": tcfg.seed,
                "shuffle_each_epoch": tcfg.shuffle_each_epoch,
                "learning_rate": args.lr,
                "grad_clip": tcfg.grad_clip,
            },
            "preprocess_config": pre,
            "train_fraction": args.train_frac,
            "train_windows": train.len(),
            "valid_windows": valid.len(),
            "best_epoch": outcome.best_epoch,
        }),
        vec![args.seed],
    );
    manifest.hash_input(&args.data)?;
    manifest.record_output(&args.out);
    manifest.record_output(&history_path);
    manifest.write_beside(&args.out)?;

    let last = outcome.history.last().expect("history");
    eprintln!(
        "trained {} for {} epochs: final loss {:.4}, best valid accuracy {:.4} (epoch {})",
        kind.display_name(),
        args.epochs,
        last.train_loss,
        outcome
            .history
            .iter()
            .map(|h| h.valid_accuracy)
            .fold(f64::NEG_INFINITY, f64::max),
        outcome.best_epoch
    );
    Ok(())
}
