//! Class-balanced precision-recall evaluation of smooth-shading scores.
//!
//! Each labelled pixel of class `c` carries weight `f_c / N_c`, where `f_c`
//! is the class's share of the balance ratio and `N_c` its sample count, so
//! the weighted class masses follow the ratio exactly. Precision and recall
//! are computed for the smooth class.
//!
//! The sweep visits every distinct score `v` from high to low; the point
//! for `v` predicts smooth where `score >= v`. This is the same set as the
//! strict rule `score > θ` for any θ between `v` and the next lower score,
//! and it includes the all-smooth prediction at the lowest score.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::annotations::{ShadingClass, ShadingLabelMap};
use crate::classify::SmoothScoreMap;
use crate::imgcore::ensure_same_dims;
use crate::{Error, Result};

/// Recall levels reported in summary tables.
pub const REPORT_RECALLS: [f64; 3] = [0.3, 0.5, 0.7];

/// Target mass ratio S : NS-ND : NS-SB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceSpec {
    pub smooth: f64,
    pub nsnd: f64,
    pub nssb: f64,
}

impl Default for BalanceSpec {
    fn default() -> Self {
        Self {
            smooth: 2.0,
            nsnd: 1.0,
            nssb: 1.0,
        }
    }
}

impl BalanceSpec {
    pub fn new(smooth: f64, nsnd: f64, nssb: f64) -> Result<Self> {
        let spec = Self { smooth, nsnd, nssb };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for v in [self.smooth, self.nsnd, self.nssb] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("balance entries must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Share of the total mass assigned to `class` (0 for Unlabeled).
    pub fn fraction(&self, class: ShadingClass) -> f64 {
        let total = self.smooth + self.nsnd + self.nssb;
        match class {
            ShadingClass::Smooth => self.smooth / total,
            ShadingClass::NsNd => self.nsnd / total,
            ShadingClass::NsSb => self.nssb / total,
            ShadingClass::Unlabeled => 0.0,
        }
    }
}

impl FromStr for BalanceSpec {
    type Err = Error;

    /// Parses `"2:1:1"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let bad = || Error::InvalidParameter(format!("balance must look like S:ND:SB, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let mut v = [0.0; 3];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p.parse().map_err(|_| bad())?;
        }
        Self::new(v[0], v[1], v[2])
    }
}

impl std::fmt::Display for BalanceSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.smooth, self.nsnd, self.nssb)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    /// Row-major pixel index within its image.
    pub index: usize,
    pub class: ShadingClass,
    pub score: f64,
}

/// One sample per labelled pixel, in row-major order.
pub fn collect_samples(scores: &SmoothScoreMap, labels: &ShadingLabelMap) -> Result<Vec<LabeledSample>> {
    ensure_same_dims(labels.dims(), scores.dims())?;
    Ok(labels
        .labels()
        .iter()
        .zip(scores.scores().data())
        .enumerate()
        .filter(|(_, (c, _))| **c != ShadingClass::Unlabeled)
        .map(|(index, (&class, &score))| LabeledSample { index, class, score })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Per-sample weight of each class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub smooth: f64,
    pub nsnd: f64,
    pub nssb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    /// Ordered by decreasing threshold, hence non-decreasing recall.
    pub points: Vec<PrPoint>,
    pub class_weights: ClassWeights,
}

fn class_slot(c: ShadingClass) -> Option<usize> {
    match c {
        ShadingClass::Smooth => Some(0),
        ShadingClass::NsNd => Some(1),
        ShadingClass::NsSb => Some(2),
        ShadingClass::Unlabeled => None,
    }
}

/// Balanced precision and recall for a prediction containing `predicted[c]`
/// of the `totals[c]` samples of each class.
///
/// Masses are `f_c * (k_c / N_c)`, which equals the sum of `k_c` weights
/// `f_c / N_c` but is computed from integers so ties in the order of
/// accumulation cannot change the result.
pub fn balanced_point(predicted: [usize; 3], totals: [usize; 3], fractions: [f64; 3]) -> (f64, f64) {
    let mass = |c: usize| fractions[c] * (predicted[c] as f64 / totals[c] as f64);
    let smooth = mass(0);
    let all = smooth + mass(1) + mass(2);
    let precision = if all > 0.0 { smooth / all } else { 0.0 };
    let recall = predicted[0] as f64 / totals[0] as f64;
    (precision, recall)
}

/// Sweeps the threshold over all distinct scores.
pub fn balanced_pr(samples: &[LabeledSample], spec: &BalanceSpec) -> Result<PrCurve> {
    spec.validate()?;
    let mut totals = [0usize; 3];
    for s in samples {
        let slot = class_slot(s.class)
            .ok_or_else(|| Error::InvalidValue(format!("unlabelled sample at pixel {}", s.index)))?;
        if !s.score.is_finite() {
            return Err(Error::InvalidValue(format!("non-finite score at pixel {}", s.index)));
        }
        totals[slot] += 1;
    }
    for (slot, class) in [ShadingClass::Smooth, ShadingClass::NsNd, ShadingClass::NsSb].into_iter().enumerate() {
        if totals[slot] == 0 {
            return Err(Error::MissingClass(class.name()));
        }
    }
    let fractions = [
        spec.fraction(ShadingClass::Smooth),
        spec.fraction(ShadingClass::NsNd),
        spec.fraction(ShadingClass::NsSb),
    ];

    let mut order: Vec<&LabeledSample> = samples.iter().collect();
    order.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.index.cmp(&b.index)));

    let mut points = Vec::new();
    let mut predicted = [0usize; 3];
    let mut i = 0;
    while i < order.len() {
        let threshold = order[i].score;
        while i < order.len() && order[i].score == threshold {
            predicted[class_slot(order[i].class).unwrap()] += 1;
            i += 1;
        }
        let (precision, recall) = balanced_point(predicted, totals, fractions);
        points.push(PrPoint {
            threshold,
            precision,
            recall,
        });
    }

    Ok(PrCurve {
        points,
        class_weights: ClassWeights {
            smooth: fractions[0] / totals[0] as f64,
            nsnd: fractions[1] / totals[1] as f64,
            nssb: fractions[2] / totals[2] as f64,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrecisionAtRecall {
    Achieved { precision: f64, recall: f64, threshold: f64 },
    /// The curve never reaches the requested recall.
    NotAchieved { max_recall: f64 },
}

impl PrecisionAtRecall {
    pub fn precision(&self) -> Option<f64> {
        match *self {
            PrecisionAtRecall::Achieved { precision, .. } => Some(precision),
            PrecisionAtRecall::NotAchieved { .. } => None,
        }
    }
}

/// Precision of the point with the smallest recall `>= r`. Among points
/// sharing that recall the one with the highest threshold wins.
pub fn precision_at_recall(curve: &PrCurve, r: f64) -> Result<PrecisionAtRecall> {
    if curve.points.is_empty() {
        return Err(Error::InvalidValue("empty precision-recall curve".into()));
    }
    let best = curve
        .points
        .iter()
        .filter(|p| p.recall >= r)
        .fold(None::<&PrPoint>, |best, p| match best {
            Some(b) if b.recall <= p.recall => Some(b),
            _ => Some(p),
        });
    Ok(match best {
        Some(p) => PrecisionAtRecall::Achieved {
            precision: p.precision,
            recall: p.recall,
            threshold: p.threshold,
        },
        None => PrecisionAtRecall::NotAchieved {
            max_recall: curve.points.iter().map(|p| p.recall).fold(0.0, f64::max),
        },
    })
}

/// Writes `threshold,precision,recall` rows.
pub fn write_curve_csv(curve: &PrCurve, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["threshold", "precision", "recall"]).map_err(csv_err)?;
    for p in &curve.points {
        w.serialize((p.threshold, p.precision, p.recall)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads points written by [`write_curve_csv`]. Class weights are not
/// stored in the CSV and come back as NaN.
pub fn read_curve_csv(input: impl Read) -> Result<PrCurve> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["threshold", "precision", "recall"] {
        return Err(Error::InvalidValue(format!("unexpected PR header {headers:?}")));
    }
    let mut points = Vec::new();
    for row in r.deserialize() {
        let (threshold, precision, recall): (f64, f64, f64) = row.map_err(csv_err)?;
        points.push(PrPoint {
            threshold,
            precision,
            recall,
        });
    }
    Ok(PrCurve {
        points,
        class_weights: ClassWeights {
            smooth: f64::NAN,
            nsnd: f64::NAN,
            nssb: f64::NAN,
        },
    })
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidValue(format!("csv: {e}"))
}

/// One row of the precision-at-recall table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub values: Vec<PrecisionAtRecall>,
}

impl ReportRow {
    pub fn from_curve(method: impl Into<String>, curve: &PrCurve, recalls: &[f64]) -> Result<Self> {
        let values = recalls
            .iter()
            .map(|&r| precision_at_recall(curve, r))
            .collect::<Result<_>>()?;
        Ok(Self {
            method: method.into(),
            values,
        })
    }
}

fn cell(v: &PrecisionAtRecall) -> String {
    match v.precision() {
        Some(p) => format!("{p:.3}"),
        None => "n/a".to_string(),
    }
}

fn recall_header(r: f64) -> String {
    format!("P@{}%", (r * 100.0).round())
}

/// Table as CSV: `method,P@30%,...`; unreachable recalls print `n/a`.
pub fn report_csv(rows: &[ReportRow], recalls: &[f64], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["method".to_string()];
    header.extend(recalls.iter().map(|&r| recall_header(r)));
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        let mut rec = vec![row.method.clone()];
        rec.extend(row.values.iter().map(cell));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Table as column-aligned text.
pub fn report_text(rows: &[ReportRow], recalls: &[f64]) -> String {
    let headers: Vec<String> = recalls.iter().map(|&r| recall_header(r)).collect();
    let name_w = rows.iter().map(|r| r.method.len()).chain(["method".len()]).max().unwrap_or(6);
    let col_w = headers.iter().map(String::len).chain([5]).max().unwrap_or(5);
    let mut s = String::new();
    let _ = write!(s, "{:<name_w$}", "method");
    for h in &headers {
        let _ = write!(s, "  {h:>col_w$}");
    }
    s.push('\n');
    for row in rows {
        let _ = write!(s, "{:<name_w$}", row.method);
        for v in &row.values {
            let _ = write!(s, "  {:>col_w$}", cell(v));
        }
        s.push('\n');
    }
    s
}
