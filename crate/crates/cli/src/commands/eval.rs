use crate::commands::{csv_num, read_sessions};
use crate::manifest::RunManifest;
use crate::plot::{unit_line_chart, Series};
use anyhow::{Context, Result};
use clap::Args;
use deepbrain_core::eval::{classification_metrics_with_scores, roc_curve, RocCurve};
use deepbrain_core::preprocess::preprocess_session;
use deepbrain_core::signal::{Dataset, LabelClass};
use deepbrain_core::training::{predict_probs, Checkpoint};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Args)]
pub struct EvalArgs {
    /// Checkpoint to evaluate
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Evaluation sessions (JSONL)
    #[arg(long)]
    pub data: PathBuf,
    /// Directory for metrics.json, metrics.csv, roc_<class>.csv, roc.svg
    #[arg(long = "out-dir")]
    pub out_dir: PathBuf,
}

fn roc_csv(curve: &RocCurve) -> String {
    let mut out = String::from("threshold,fpr,tpr\n");
    for p in &curve.points {
        let threshold = if p.threshold.is_infinite() {
            "inf".to_string()
        } else {
            csv_num(p.threshold)
        };
        out.push_str(&format!("{},{},{}\n", threshold, csv_num(p.fpr), csv_num(p.tpr)));
    }
    out
}

pub fn run(args: EvalArgs) -> Result<()> {
    let checkpoint = Checkpoint::load(&args.checkpoint)?;
    let params = checkpoint.to_params()?;
    let sessions = read_sessions(&args.data)?;
    let windows = sessions
        .iter()
        .map(|s| preprocess_session(s, &checkpoint.preprocess_config))
        .collect::<deepbrain_core::Result<Vec<_>>>()?;
    let data = Dataset::new(windows);
    let labels: Vec<LabelClass> = data.windows.iter().map(|w| w.label()).collect();
    let probs = predict_probs(&checkpoint.model_config, &params, &data)?;
    let report = classification_metrics_with_scores(&probs, &labels)?;

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    let out = |name: &str| -> PathBuf { args.out_dir.join(name) };

    let metrics_json = out("metrics.json");
    let mut body = serde_json::to_string_pretty(&report)?;
    body.push('\n');
    fs::write(&metrics_json, body)?;

    let metrics_csv = out("metrics.csv");
    let mut csv = String::from("scope,support,accuracy,precision,recall,f1,tpr,fpr,auc\n");
    csv.push_str(&format!(
        "overall,{},{},{},{},{},,,{}\n",
        labels.len(),
        csv_num(report.accuracy),
        csv_num(report.weighted_precision),
        csv_num(report.weighted_recall),
        csv_num(report.weighted_f1),
        report.micro_auc.map(csv_num).unwrap_or_default()
    ));
    for m in &report.per_class {
        csv.push_str(&format!(
            "{},{},,{},{},{},{},{},{}\n",
            m.class.as_str(),
            m.support,
            csv_num(m.precision),
            csv_num(m.recall),
            csv_num(m.f1),
            csv_num(m.tpr),
            csv_num(m.fpr),
            m.auc.map(csv_num).unwrap_or_default()
        ));
    }
    fs::write(&metrics_csv, csv)?;

    // one-vs-rest ROC per class, CSV plus a combined SVG
    let mut written: Vec<PathBuf> = vec![metrics_json, metrics_csv];
    let mut series = Vec::new();
    for class in LabelClass::ALL {
        let scores: Vec<f64> = (0..probs.rows()).map(|r| probs.at(r, class.index())).collect();
        match roc_curve(&scores, &labels, class) {
            Ok(curve) => {
                let path = out(&format!("roc_{}.csv", class.as_str()));
                fs::write(&path, roc_csv(&curve))?;
                written.push(path);
                series.push(Series {
                    label: class.as_str().to_string(),
                    points: curve.points.iter().map(|p| (p.fpr, p.tpr)).collect(),
                });
            }
            Err(deepbrain_core::Error::DegenerateInput(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    let svg_path = out("roc.svg");
    fs::write(
        &svg_path,
        unit_line_chart("ROC (one-vs-rest)", "False positive rate", "True positive rate", &series),
    )?;
    written.push(svg_path);

    let mut manifest = RunManifest::new(
        "eval",
        serde_json::json!({
            "checkpoint": args.checkpoint.display().to_string(),
            "model_config": checkpoint.model_config,
            "preprocess_config": checkpoint.preprocess_config,
            "windows": labels.len(),
        }),
        vec![],
    );
    manifest.hash_input(&args.checkpoint)?;
    manifest.hash_input(&args.data)?;
    for path in &written {
        manifest.record_output(path);
    }
    manifest.write_beside(&args.out_dir.join("metrics.json"))?;

    eprintln!(
        "evaluated {} windows: accuracy {:.4}, weighted F1 {:.4}",
        labels.len(),
        report.accuracy,
        report.weighted_f1
    );
    print_metrics_line(&args.out_dir, report.accuracy);
    Ok(())
}

fn print_metrics_line(dir: &Path, accuracy: f64) {
    println!("{} accuracy={}", dir.display(), csv_num(accuracy));
}
