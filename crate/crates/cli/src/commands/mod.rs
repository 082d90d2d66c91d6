pub mod compare;
pub mod eval;
pub mod gen;
pub mod gradcheck;
pub mod infer;
pub mod similarity;
pub mod train;

use anyhow::{Context, Result};
use deepbrain_core::signal::RawSession;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

pub fn read_sessions(path: &Path) -> Result<Vec<RawSession>> {
    let file = File::open(path)
        .map_err(|e| deepbrain_core::Error::Data(format!("cannot open {}: {}", path.display(), e)))?;
    let sessions = deepbrain_core::signal::read_sessions_jsonl(BufReader::new(file))
        .with_context(|| format!("while reading {}", path.display()))?;
    if sessions.is_empty() {
        return Err(deepbrain_core::Error::Data(format!("{} holds no sessions", path.display())).into());
    }
    Ok(sessions)
}

pub fn parse_kinds(list: &str) -> Result<Vec<deepbrain_core::network::ModelKind>> {
    list.split(',')
        .map(|tok| {
            tok.trim()
                .parse()
                .map_err(|e: deepbrain_core::Error| anyhow::Error::from(e))
        })
        .collect()
}

pub fn parse_seeds(list: &str) -> Result<Vec<u64>> {
    list.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<u64>()
                .map_err(|e| crate::CliFailure::Usage(format!("bad seed {:?}: {}", tok, e)).into())
        })
        .collect()
}

/// Format a float for CSV output: full round-trip precision, shortest form.
pub fn csv_num(v: f64) -> String {
    format!("{}", v)
}
