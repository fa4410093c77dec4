//! Overlap metrics between a predicted and a ground-truth mask.

use std::fmt::Write as _;

use crate::error::{mismatch, Result};
use crate::raster::BinaryMask;

/// Pixel confusion counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Dice, precision and recall for one case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub counts: ConfusionCounts,
    pub dice: f64,
    pub precision: f64,
    pub recall: f64,
}

/// A 0/0 ratio is 1 when both masks are empty and 0 otherwise.
fn ratio(num: u64, den: u64, both_empty: bool) -> f64 {
    if den == 0 {
        if both_empty {
            1.0
        } else {
            0.0
        }
    } else {
        num as f64 / den as f64
    }
}

pub fn confusion_counts(pred: &BinaryMask, gt: &BinaryMask) -> Result<ConfusionCounts> {
    if !pred.same_dims(gt) {
        return Err(mismatch(
            format!("{}x{}", gt.width(), gt.height()),
            format!("{}x{}", pred.width(), pred.height()),
        ));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &g) in pred.pixels().iter().zip(gt.pixels()) {
        match (p, g) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// `precision = TP/(TP+FP)`, `dice = 2TP/(2TP+FP+FN)`, `recall = TP/(TP+FN)`.
pub fn confusion_and_metrics(pred: &BinaryMask, gt: &BinaryMask) -> Result<Metrics> {
    let counts = confusion_counts(pred, gt)?;
    let both_empty = counts.tp + counts.fp + counts.fn_ == 0;
    let ConfusionCounts { tp, fp, fn_, .. } = counts;
    Ok(Metrics {
        counts,
        dice: ratio(2 * tp, 2 * tp + fp + fn_, both_empty),
        precision: ratio(tp, tp + fp, both_empty),
        recall: ratio(tp, tp + fn_, both_empty),
    })
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-case evaluation rows.
#[derive(Debug, Clone, Default)]
pub struct EvalReport {
    pub cases: Vec<(String, Metrics)>,
}

impl EvalReport {
    pub fn push(&mut self, case_id: impl Into<String>, m: Metrics) {
        self.cases.push((case_id.into(), m));
    }

    /// `(mean, std)` of dice, precision and recall, in that order.
    pub fn summary(&self) -> [(f64, f64); 3] {
        let col = |f: fn(&Metrics) -> f64| mean_std(&self.cases.iter().map(|(_, m)| f(m)).collect::<Vec<_>>());
        [col(|m| m.dice), col(|m| m.precision), col(|m| m.recall)]
    }

    /// CSV with header `case_id,dice,precision,recall`, one row per case, then
    /// `mean` and `std` footer rows. Reals are written in shortest round-trip
    /// form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("case_id,dice,precision,recall\n");
        for (id, m) in &self.cases {
            writeln!(out, "{id},{},{},{}", m.dice, m.precision, m.recall).unwrap();
        }
        let [d, p, r] = self.summary();
        writeln!(out, "mean,{},{},{}", d.0, p.0, r.0).unwrap();
        writeln!(out, "std,{},{},{}", d.1, p.1, r.1).unwrap();
        out
    }
}
