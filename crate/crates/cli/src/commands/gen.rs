use crate::manifest::RunManifest;
use anyhow::{Context, Result};
use clap::Args;
use deepbrain_core::signal::{write_sessions_jsonl, Gender};
use deepbrain_core::synth::{generate_dataset, GenSpec, SubjectProfile};
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

#[derive(Args)]
pub struct GenArgs {
    /// Sessions to generate per class
    #[arg(long = "classes-per")]
    pub classes_per: usize,
    /// Generate under the noisy condition
    #[arg(long)]
    pub noisy: bool,
    /// Master seed; per-session seeds derive from it
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output JSONL path
    #[arg(long)]
    pub out: PathBuf,
    /// Number of subjects, alternating male/female
    #[arg(long, default_value_t = 4)]
    pub subjects: usize,
}

pub fn run(args: GenArgs) -> Result<()> {
    if args.subjects == 0 {
        return Err(crate::CliFailure::Usage("--subjects must be >= 1".into()).into());
    }
    let mut spec = GenSpec::new(args.classes_per);
    spec.profiles = (0..args.subjects)
        .map(|i| {
            let gender = if i % 2 == 0 { Gender::Male } else { Gender::Female };
            SubjectProfile::new(format!("s{}", i + 1), gender)
        })
        .collect();
    let sessions = generate_dataset(&spec, args.noisy, args.seed)?;

    let file = File::create(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    write_sessions_jsonl(BufWriter::new(file), &sessions)?;

    let mut manifest = RunManifest::new(
        "gen",
        serde_json::json!({
            "gen_spec": spec,
            "noisy": args.noisy,
            "master_seed": args.seed,
            "session_count": sessions.len(),
        }),
        vec![args.seed],
    );
    manifest.record_output(&args.out);
    manifest.write_beside(&args.out)?;

    eprintln!(
        "wrote {} sessions ({} per class) to {}",
        sessions.len(),
        args.classes_per,
        args.out.display()
    );
    Ok(())
}
