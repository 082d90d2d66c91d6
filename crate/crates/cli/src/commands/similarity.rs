use crate::commands::{csv_num, read_sessions};
use crate::manifest::RunManifest;
use anyhow::{Context, Result};
use clap::Args;
use deepbrain_core::eval::similarity_matrix;
use deepbrain_core::signal::{LabelClass, CLASS_COUNT};
use std::fs;
use std::path::PathBuf;

#[derive(Args)]
pub struct SimilarityArgs {
    /// Sessions to analyze (JSONL)
    #[arg(long)]
    pub data: PathBuf,
    /// Session pairs sampled per class pair
    #[arg(long, default_value_t = 60)]
    pub pairs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output CSV path
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: SimilarityArgs) -> Result<()> {
    let sessions = read_sessions(&args.data)?;
    let sim = similarity_matrix(&sessions, args.pairs, args.seed)?;

    let mut csv = String::from("class");
    for class in LabelClass::ALL {
        csv.push(',');
        csv.push_str(class.as_str());
    }
    csv.push_str(",self,cross\n");
    for r in 0..CLASS_COUNT {
        csv.push_str(LabelClass::ALL[r].as_str());
        for c in 0..CLASS_COUNT {
            csv.push(',');
            csv.push_str(&csv_num(sim.matrix[r][c]));
        }
        csv.push_str(&format!(",{},{}\n", csv_num(sim.self_values[r]), csv_num(sim.cross_values[r])));
    }
    fs::write(&args.out, &csv).with_context(|| format!("cannot write {}", args.out.display()))?;

    let mut manifest = RunManifest::new(
        "similarity",
        serde_json::json!({
            "pairs_per_class_pair": args.pairs,
            "sessions": sessions.len(),
        }),
        vec![args.seed],
    );
    manifest.hash_input(&args.data)?;
    manifest.record_output(&args.out);
    manifest.write_beside(&args.out)?;

    eprintln!("similarity table written to {}", args.out.display());
    Ok(())
}
