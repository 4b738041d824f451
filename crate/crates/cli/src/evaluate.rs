//! `eval-pr` and `report`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use shading_core::annotations::{ClassCounts, ShadingClass, ShadingLabelMap};
use shading_core::classify::{ScoreKind, SmoothScoreMap};
use shading_core::eval::{
    balanced_pr, collect_samples, precision_at_recall, read_curve_csv, report_csv, report_text, write_curve_csv,
    BalanceSpec, ClassWeights, LabeledSample, PrecisionAtRecall, ReportRow, REPORT_RECALLS,
};

use crate::batch::{self, Failure};

pub struct EvalJob {
    pub labels: PathBuf,
    pub scores: PathBuf,
    pub kind: ScoreKind,
}

impl EvalJob {
    pub fn samples(&self, id: &str) -> Result<Vec<LabeledSample>> {
        let labels = ShadingLabelMap::load_png(self.labels.join(format!("{id}.png")))
            .with_context(|| format!("loading labels for {id}"))?;
        let scores = SmoothScoreMap::load_pfm(self.scores.join(format!("{id}.pfm")), self.kind)
            .with_context(|| format!("loading scores for {id}"))?;
        Ok(collect_samples(&scores, &labels)?)
    }
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum AtRecall {
    Achieved { precision: f64, recall: f64, threshold: f64 },
    NotAchieved { not_achieved: bool, max_recall: f64 },
}

impl From<PrecisionAtRecall> for AtRecall {
    fn from(p: PrecisionAtRecall) -> Self {
        match p {
            PrecisionAtRecall::Achieved { precision, recall, threshold } => AtRecall::Achieved {
                precision,
                recall,
                threshold,
            },
            PrecisionAtRecall::NotAchieved { max_recall } => AtRecall::NotAchieved {
                not_achieved: true,
                max_recall,
            },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EvalSummary {
    pub command: &'static str,
    pub method: String,
    pub balance: String,
    pub photos: usize,
    pub succeeded: usize,
    pub samples: ClassCounts,
    pub class_weights: ClassWeights,
    pub curve_points: usize,
    pub precision_at_recall: BTreeMap<String, AtRecall>,
    pub failures: Vec<Failure>,
}

/// Merges samples in photo-ID order and writes `<method>_pr.csv` and
/// `<method>_summary.json`, and prints the method's table row.
pub fn eval_pr(
    job: &EvalJob,
    pool: &rayon::ThreadPool,
    ids: &[String],
    method: &str,
    balance: &BalanceSpec,
    output: &Path,
) -> Result<EvalSummary> {
    let (per_photo, failures) = batch::run(pool, ids, |id| job.samples(id));
    let samples: Vec<LabeledSample> = per_photo.into_values().flatten().collect();
    if samples.is_empty() {
        bail!("no labeled samples in {} photos", ids.len());
    }
    let mut counts = ClassCounts::default();
    for s in &samples {
        match s.class {
            ShadingClass::Smooth => counts.smooth += 1,
            ShadingClass::NsNd => counts.nsnd += 1,
            ShadingClass::NsSb => counts.nssb += 1,
            ShadingClass::Unlabeled => {}
        }
    }
    let curve = balanced_pr(&samples, balance)?;
    let csv_path = output.join(format!("{method}_pr.csv"));
    write_curve_csv(&curve, BufWriter::new(File::create(&csv_path)?))
        .with_context(|| format!("writing {}", csv_path.display()))?;

    let mut at = BTreeMap::new();
    for r in REPORT_RECALLS {
        at.insert(format!("{r:.2}"), precision_at_recall(&curve, r)?.into());
    }
    let summary = EvalSummary {
        command: "eval-pr",
        method: method.to_string(),
        balance: balance.to_string(),
        photos: ids.len(),
        succeeded: ids.len() - failures.len(),
        samples: counts,
        class_weights: curve.class_weights,
        curve_points: curve.points.len(),
        precision_at_recall: at,
        failures,
    };
    batch::write_json(&output.join(format!("{method}_summary.json")), &summary)?;
    let row = ReportRow::from_curve(method, &curve, &REPORT_RECALLS)?;
    print!("{}", report_text(&[row], &REPORT_RECALLS));
    Ok(summary)
}

/// `NAME=PATH` curve argument.
pub fn parse_curve_arg(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => Err(format!("expected NAME=PATH, got {s:?}")),
    }
}

/// Every `<name>_pr.csv` in `dir`, sorted by name.
pub fn curves_in_dir(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let ids = batch::photo_ids(None, dir, "_pr.csv")?;
    Ok(ids
        .into_iter()
        .map(|name| {
            let path = dir.join(format!("{name}_pr.csv"));
            (name, path)
        })
        .collect())
}

/// Builds the precision-at-recall table from saved curves. Writes
/// `table.csv` and `table.txt` under `output` and returns the text.
pub fn report(curves: &[(String, PathBuf)], output: &Path) -> Result<String> {
    if curves.is_empty() {
        bail!("no curves given");
    }
    let mut rows = Vec::new();
    for (name, path) in curves {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let curve = read_curve_csv(file).with_context(|| format!("reading {}", path.display()))?;
        rows.push(ReportRow::from_curve(name.clone(), &curve, &REPORT_RECALLS)?);
    }
    report_csv(&rows, &REPORT_RECALLS, BufWriter::new(File::create(output.join("table.csv"))?))?;
    let text = report_text(&rows, &REPORT_RECALLS);
    std::fs::write(output.join("table.txt"), &text)?;
    Ok(text)
}
