use anyhow::Result;
use clap::Args;
use deepbrain_core::network::{ModelConfig, ModelKind, ModelParams};
use deepbrain_core::training::{gradcheck_fixture_batch, gradient_check, GRADCHECK_FD_STEP};

#[derive(Args)]
pub struct GradcheckArgs {
    /// Check a single kind; all four when omitted
    #[arg(long)]
    pub model: Option<String>,
    /// Central-difference step
    #[arg(long, default_value_t = GRADCHECK_FD_STEP)]
    pub h: f64,
    #[arg(long, default_value_t = 17)]
    pub seed: u64,
    /// Pass/fail threshold on the max relative error
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
}

pub fn run(args: GradcheckArgs) -> Result<()> {
    let kinds: Vec<ModelKind> = match &args.model {
        Some(name) => vec![name
            .parse()
            .map_err(|e: deepbrain_core::Error| crate::CliFailure::Usage(e.to_string()))?],
        None => ModelKind::ALL.to_vec(),
    };
    let mut failed = false;
    for kind in kinds {
        let config = ModelConfig::gradcheck_fixture(kind);
        let params = ModelParams::init(&config, args.seed)?;
        let (batch, one_hots) = gradcheck_fixture_batch(&config, 3);
        let report = gradient_check(&config, &params, &batch, &one_hots, args.seed, args.h)?;
        let verdict = if report.max_relative_error < args.tolerance {
            "PASS"
        } else {
            failed = true;
            "FAIL"
        };
        println!(
            "{}: {} parameters, max relative error {:.3e} (worst: {}) ... {}",
            kind.cli_name(),
            report.parameter_count,
            report.max_relative_error,
            report.worst_parameter,
            verdict
        );
    }
    if failed {
        return Err(crate::CliFailure::Numeric(
            "gradient check exceeded tolerance".into(),
        )
        .into());
    }
    Ok(())
}
