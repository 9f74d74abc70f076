use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{f1, pct, AnalyticsError, Observation};
use crate::model::{StanceLabel, VerdictClass};

/// Rows in table order: Positive, Neutral, Negative.
const ROWS: [StanceLabel; 3] = [StanceLabel::Positive, StanceLabel::NeutralNoStance, StanceLabel::Negative];

fn row(stance: StanceLabel) -> usize {
    match stance {
        StanceLabel::Positive => 0,
        StanceLabel::NeutralNoStance => 1,
        StanceLabel::Negative => 2,
    }
}

/// Counts of classified pairs by stance (rows) and verdict class (columns).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts3x3 {
    /// `cells[stance][class]`, stances Positive / Neutral / Negative and
    /// classes Truth / Mixed / Misinfo.
    pub cells: [[u64; 3]; 3],
}

impl ConfusionCounts3x3 {
    pub fn get(&self, stance: StanceLabel, class: VerdictClass) -> u64 {
        self.cells[row(stance)][class.index()]
    }

    pub fn add(&mut self, stance: StanceLabel, class: VerdictClass, n: u64) {
        self.cells[row(stance)][class.index()] += n;
    }

    pub fn row_total(&self, stance: StanceLabel) -> u64 {
        self.cells[row(stance)].iter().sum()
    }

    pub fn column_total(&self, class: VerdictClass) -> u64 {
        self.cells.iter().map(|r| r[class.index()]).sum()
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().sum()
    }

    /// Stances in table order.
    pub fn rows() -> [StanceLabel; 3] {
        ROWS
    }
}

/// Builds the matrix. Every observation must carry a stance.
pub fn confusion(observations: &[Observation]) -> Result<ConfusionCounts3x3, AnalyticsError> {
    let mut m = ConfusionCounts3x3::default();
    for o in observations {
        let stance = o.stance.ok_or_else(|| AnalyticsError::Unclassified(o.pair_id.clone()))?;
        m.add(stance, o.verdict_class, 1);
    }
    Ok(m)
}

/// Percentages; a ratio with a zero denominator is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StanceVerdictMetrics {
    pub precision: BTreeMap<StanceLabel, Option<f64>>,
    pub recall: BTreeMap<VerdictClass, Option<f64>>,
    pub f1: BTreeMap<StanceLabel, Option<f64>>,
}

impl StanceVerdictMetrics {
    pub fn precision(&self, stance: StanceLabel) -> Option<f64> {
        self.precision[&stance]
    }

    pub fn recall(&self, class: VerdictClass) -> Option<f64> {
        self.recall[&class]
    }

    pub fn f1(&self, stance: StanceLabel) -> Option<f64> {
        self.f1[&stance]
    }
}

/// Precision per stance against its aligned class, recall per class and
/// their F1, all from unrounded ratios.
pub fn stance_verdict_metrics(m: &ConfusionCounts3x3) -> StanceVerdictMetrics {
    let mut precision = BTreeMap::new();
    let mut recall = BTreeMap::new();
    let mut f1s = BTreeMap::new();
    for class in VerdictClass::ALL {
        let stance = class.aligned_stance();
        recall.insert(class, pct(m.get(stance, class), m.column_total(class)));
    }
    for stance in ROWS {
        let class = stance.aligned_class();
        let p = pct(m.get(stance, class), m.row_total(stance));
        precision.insert(stance, p);
        f1s.insert(stance, f1(p, recall[&class]));
    }
    StanceVerdictMetrics {
        precision,
        recall,
        f1: f1s,
    }
}
