//! CSV and JSON renderings of the report tables. Percentages are rounded to
//! one decimal; absent values are empty cells in CSV and `null` in JSON.

use std::io::Write;

use serde_json::{json, Value};

use super::alignment::AlignmentReport;
use super::confusion::{ConfusionCounts3x3, StanceVerdictMetrics};
use crate::model::VerdictClass;

pub const ALIGNMENT_COLUMNS: [&str; 11] = [
    "group",
    "truth_pos_pct",
    "truth_pos",
    "truth_neg_pct",
    "truth_neg",
    "misinfo_pos_pct",
    "misinfo_pos",
    "misinfo_neg_pct",
    "misinfo_neg",
    "balanced_accuracy",
    "macro_f1",
];

pub const CONFUSION_COLUMNS: [&str; 6] = ["stance", "truth", "mixed", "misinfo", "precision", "f1"];

/// One decimal place.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| format!("{:.1}", round1(v))).unwrap_or_default()
}

fn num(x: Option<f64>) -> Value {
    x.map(|v| json!(round1(v))).unwrap_or(Value::Null)
}

pub fn write_alignment_csv<W: Write>(reports: &[AlignmentReport], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ALIGNMENT_COLUMNS)?;
    for r in reports {
        w.write_record([
            r.group.clone(),
            cell(r.truth_pos_pct),
            r.truth_pos.to_string(),
            cell(r.truth_neg_pct),
            r.truth_neg.to_string(),
            cell(r.misinfo_pos_pct),
            r.misinfo_pos.to_string(),
            cell(r.misinfo_neg_pct),
            r.misinfo_neg.to_string(),
            cell(r.balanced_accuracy),
            cell(r.macro_f1),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// An array of objects keyed by [`ALIGNMENT_COLUMNS`].
pub fn alignment_json(reports: &[AlignmentReport]) -> Value {
    Value::Array(
        reports
            .iter()
            .map(|r| {
                json!({
                    "group": r.group,
                    "truth_pos_pct": num(r.truth_pos_pct),
                    "truth_pos": r.truth_pos,
                    "truth_neg_pct": num(r.truth_neg_pct),
                    "truth_neg": r.truth_neg,
                    "misinfo_pos_pct": num(r.misinfo_pos_pct),
                    "misinfo_pos": r.misinfo_pos,
                    "misinfo_neg_pct": num(r.misinfo_neg_pct),
                    "misinfo_neg": r.misinfo_neg,
                    "balanced_accuracy": num(r.balanced_accuracy),
                    "macro_f1": num(r.macro_f1),
                })
            })
            .collect(),
    )
}

/// Stance rows with per-class counts, precision and F1, then a `recall`
/// row under the class columns.
pub fn write_confusion_csv<W: Write>(
    m: &ConfusionCounts3x3,
    metrics: &StanceVerdictMetrics,
    out: W,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CONFUSION_COLUMNS)?;
    for s in ConfusionCounts3x3::rows() {
        let mut row = vec![s.as_str().to_string()];
        row.extend(VerdictClass::ALL.map(|c| m.get(s, c).to_string()));
        row.push(cell(metrics.precision(s)));
        row.push(cell(metrics.f1(s)));
        w.write_record(row)?;
    }
    let mut recall = vec!["recall".to_string()];
    recall.extend(VerdictClass::ALL.map(|c| cell(metrics.recall(c))));
    recall.extend([String::new(), String::new()]);
    w.write_record(recall)?;
    w.flush()?;
    Ok(())
}

pub fn confusion_json(m: &ConfusionCounts3x3, metrics: &StanceVerdictMetrics) -> Value {
    let rows: Vec<Value> = ConfusionCounts3x3::rows()
        .into_iter()
        .map(|s| {
            json!({
                "stance": s.as_str(),
                "truth": m.get(s, VerdictClass::Truth),
                "mixed": m.get(s, VerdictClass::Mixed),
                "misinfo": m.get(s, VerdictClass::Misinfo),
                "precision": num(metrics.precision(s)),
                "f1": num(metrics.f1(s)),
            })
        })
        .collect();
    let recall: serde_json::Map<String, Value> = VerdictClass::ALL
        .into_iter()
        .map(|c| (c.as_str().to_string(), num(metrics.recall(c))))
        .collect();
    json!({ "rows": rows, "recall": recall })
}
