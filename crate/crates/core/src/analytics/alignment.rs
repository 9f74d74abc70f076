use serde::{Deserialize, Serialize};

use super::{f1, pct, Observation};
use crate::model::{StanceLabel, VerdictClass};

/// Binary stance-by-class counts after dropping Neutral stances and Mixed
/// claims.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentCounts {
    pub truth_pos: u64,
    pub truth_neg: u64,
    pub misinfo_pos: u64,
    pub misinfo_neg: u64,
}

impl AlignmentCounts {
    /// Counts one observation; returns false when it is excluded.
    pub fn add(&mut self, o: &Observation) -> bool {
        let slot = match (o.verdict_class, o.stance) {
            (VerdictClass::Truth, Some(StanceLabel::Positive)) => &mut self.truth_pos,
            (VerdictClass::Truth, Some(StanceLabel::Negative)) => &mut self.truth_neg,
            (VerdictClass::Misinfo, Some(StanceLabel::Positive)) => &mut self.misinfo_pos,
            (VerdictClass::Misinfo, Some(StanceLabel::Negative)) => &mut self.misinfo_neg,
            _ => return false,
        };
        *slot += 1;
        true
    }

    pub fn total(&self) -> u64 {
        self.truth_pos + self.truth_neg + self.misinfo_pos + self.misinfo_neg
    }
}

/// One row of an alignment table. Percentages are unrounded; `None` marks a
/// zero denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub group: String,
    pub truth_pos: u64,
    pub truth_neg: u64,
    pub misinfo_pos: u64,
    pub misinfo_neg: u64,
    pub truth_pos_pct: Option<f64>,
    pub truth_neg_pct: Option<f64>,
    pub misinfo_pos_pct: Option<f64>,
    pub misinfo_neg_pct: Option<f64>,
    /// Mean of the Truth and Misinfo recalls.
    pub balanced_accuracy: Option<f64>,
    /// Mean of the Truth and Misinfo F1 scores.
    pub macro_f1: Option<f64>,
}

impl AlignmentReport {
    /// Positive stance predicts Truth, Negative predicts Misinfo.
    pub fn from_counts(group: impl Into<String>, c: AlignmentCounts) -> Self {
        let truth = c.truth_pos + c.truth_neg;
        let misinfo = c.misinfo_pos + c.misinfo_neg;
        let recall_truth = pct(c.truth_pos, truth);
        let recall_misinfo = pct(c.misinfo_neg, misinfo);
        let precision_truth = pct(c.truth_pos, c.truth_pos + c.misinfo_pos);
        let precision_misinfo = pct(c.misinfo_neg, c.truth_neg + c.misinfo_neg);
        let mean = |a: Option<f64>, b: Option<f64>| Some((a? + b?) / 2.0);
        AlignmentReport {
            group: group.into(),
            truth_pos: c.truth_pos,
            truth_neg: c.truth_neg,
            misinfo_pos: c.misinfo_pos,
            misinfo_neg: c.misinfo_neg,
            truth_pos_pct: recall_truth,
            truth_neg_pct: pct(c.truth_neg, truth),
            misinfo_pos_pct: pct(c.misinfo_pos, misinfo),
            misinfo_neg_pct: recall_misinfo,
            balanced_accuracy: mean(recall_truth, recall_misinfo),
            macro_f1: mean(f1(precision_truth, recall_truth), f1(precision_misinfo, recall_misinfo)),
        }
    }

    pub fn counts(&self) -> AlignmentCounts {
        AlignmentCounts {
            truth_pos: self.truth_pos,
            truth_neg: self.truth_neg,
            misinfo_pos: self.misinfo_pos,
            misinfo_neg: self.misinfo_neg,
        }
    }

    pub fn pair_count(&self) -> u64 {
        self.counts().total()
    }
}

/// Alignment over every observation, after the exclusions.
pub fn alignment_report<'a>(
    observations: impl IntoIterator<Item = &'a Observation>,
    group: impl Into<String>,
) -> AlignmentReport {
    let mut counts = AlignmentCounts::default();
    for o in observations {
        counts.add(o);
    }
    AlignmentReport::from_counts(group, counts)
}
