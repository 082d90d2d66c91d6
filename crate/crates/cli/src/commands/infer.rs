use crate::manifest::RunManifest;
use anyhow::{Context, Result};
use clap::Args;
use deepbrain_core::signal::LabelClass;
use deepbrain_core::stream::{run_stream, StreamClassifier, StreamConfig};
use deepbrain_core::training::Checkpoint;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;

#[derive(Args)]
pub struct InferArgs {
    /// Checkpoint to run
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Sample source, one number per line; standard input when omitted
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Samples between inferences
    #[arg(long, default_value_t = 30)]
    pub stride: usize,
    /// Majority vote over the last k decisions (odd)
    #[arg(long, default_value_t = 3)]
    pub votes: usize,
    /// Override a command, e.g. --map relaxed=halt (repeatable)
    #[arg(long = "map")]
    pub map: Vec<String>,
    /// Session log path; standard output when omitted
    #[arg(long)]
    pub log: Option<PathBuf>,
}

pub fn run(args: InferArgs) -> Result<()> {
    let checkpoint = Checkpoint::load(&args.checkpoint)?;
    let classifier = StreamClassifier::from_checkpoint(&checkpoint)?;
    let mut cfg = StreamConfig {
        stride: args.stride,
        smoothing_votes: args.votes,
        ..StreamConfig::default()
    };
    for entry in &args.map {
        let (class, command) = entry.split_once('=').ok_or_else(|| {
            crate::CliFailure::Usage(format!("--map wants class=command, got {:?}", entry))
        })?;
        let class = LabelClass::from_str_name(class.trim())
            .map_err(|e| crate::CliFailure::Usage(e.to_string()))?;
        cfg.command_map.set(class, command.trim());
    }
    cfg.validate()
        .map_err(|e| crate::CliFailure::Usage(e.to_string()))?;

    let summary = match (&args.input, &args.log) {
        (Some(input), Some(log)) => {
            let reader = BufReader::new(File::open(input).map_err(|e| {
                deepbrain_core::Error::Data(format!("cannot open {}: {}", input.display(), e))
            })?);
            let writer = BufWriter::new(
                File::create(log).with_context(|| format!("cannot create {}", log.display()))?,
            );
            run_stream(reader, &classifier, &cfg, writer)?
        }
        (Some(input), None) => {
            let reader = BufReader::new(File::open(input).map_err(|e| {
                deepbrain_core::Error::Data(format!("cannot open {}: {}", input.display(), e))
            })?);
            let stdout = io::stdout();
            run_stream(reader, &classifier, &cfg, BufWriter::new(stdout.lock()))?
        }
        (None, Some(log)) => {
            let stdin = io::stdin();
            let writer = BufWriter::new(
                File::create(log).with_context(|| format!("cannot create {}", log.display()))?,
            );
            run_stream(stdin.lock(), &classifier, &cfg, writer)?
        }
        (None, None) => {
            let stdin = io::stdin();
            let stdout = io::stdout();
            run_stream(stdin.lock(), &classifier, &cfg, BufWriter::new(stdout.lock()))?
        }
    };

    if let Some(log) = &args.log {
        let mut manifest = RunManifest::new(
            "infer",
            serde_json::json!({
                "checkpoint": args.checkpoint.display().to_string(),
                "stride": cfg.stride,
                "smoothing_votes": cfg.smoothing_votes,
                "command_map": cfg.command_map,
                "summary": summary,
            }),
            vec![],
        );
        manifest.hash_input(&args.checkpoint)?;
        if let Some(input) = &args.input {
            manifest.hash_input(input)?;
        }
        manifest.record_output(log);
        manifest.write_beside(log)?;
    }

    let mut err = io::stderr();
    writeln!(
        err,
        "windows processed: {}, malformed lines skipped: {}, commands emitted: {}",
        summary.inferences, summary.malformed_lines, summary.commands_emitted
    )?;
    Ok(())
}
