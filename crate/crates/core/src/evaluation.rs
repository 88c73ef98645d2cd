//! Confusion matrices and per-class / macro classification metrics.
//!
//! Per-class figures use a one-vs-rest reduction of the 4×4 matrix:
//! `TP = cm[c][c]`, `FP = column sum − TP`, `FN = row sum − TP`. Any ratio
//! with a zero denominator is reported as 0.

use serde::{Deserialize, Serialize};

use crate::data::{Label, NUM_CLASSES};
use crate::error::{Error, Result};

/// `counts[t][p]`: samples of true class `t` predicted as `p`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, truth: usize, predicted: usize) -> Result<()> {
        if truth >= NUM_CLASSES || predicted >= NUM_CLASSES {
            return Err(Error::invalid(format!(
                "class pair ({truth}, {predicted}) outside 0..{NUM_CLASSES}"
            )));
        }
        self.counts[truth][predicted] += 1;
        Ok(())
    }

    /// Elementwise sum, for combining matrices from independent folds.
    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in row.iter_mut().zip(other_row) {
                *a += b;
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..NUM_CLASSES).map(|c| self.counts[c][c]).sum()
    }

    pub fn true_positives(&self, class: usize) -> u64 {
        self.counts[class][class]
    }

    pub fn false_positives(&self, class: usize) -> u64 {
        (0..NUM_CLASSES).map(|t| self.counts[t][class]).sum::<u64>() - self.true_positives(class)
    }

    pub fn false_negatives(&self, class: usize) -> u64 {
        self.counts[class].iter().sum::<u64>() - self.true_positives(class)
    }

    pub fn support(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }
}

pub fn accumulate_confusion(preds: &[usize], labels: &[usize]) -> Result<ConfusionMatrix> {
    if preds.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} labels",
            preds.len(),
            labels.len()
        )));
    }
    let mut cm = ConfusionMatrix::new();
    for (&p, &t) in preds.iter().zip(labels) {
        cm.record(t, p)?;
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Unweighted mean.
pub fn macro_average(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn per_class_metrics(cm: &ConfusionMatrix) -> [ClassMetrics; NUM_CLASSES] {
    std::array::from_fn(|c| {
        let tp = cm.true_positives(c);
        let precision = ratio(tp, tp + cm.false_positives(c));
        let recall = ratio(tp, tp + cm.false_negatives(c));
        ClassMetrics {
            precision,
            recall,
            f1: f1_score(precision, recall),
            support: cm.support(c),
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub per_class: [ClassMetrics; NUM_CLASSES],
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
}

impl Report {
    pub fn class(&self, label: Label) -> &ClassMetrics {
        &self.per_class[label.index()]
    }
}

pub fn summarize(cm: &ConfusionMatrix) -> Result<Report> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::invalid("cannot summarize an empty confusion matrix"));
    }
    let per_class = per_class_metrics(cm);
    let pick = |f: fn(&ClassMetrics) -> f64| macro_average(&per_class.map(|m| f(&m)));
    Ok(Report {
        macro_precision: pick(|m| m.precision),
        macro_recall: pick(|m| m.recall),
        macro_f1: pick(|m| m.f1),
        accuracy: cm.trace() as f64 / total as f64,
        per_class,
        confusion: *cm,
    })
}
