//! Evaluation metrics: confusion-matrix classification scores,
//! mask-overlap scores for segmentation, and elapsed-time statistics.

use crate::preprocess::BinaryMask;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("label '{0}' is not in the declared class list")]
    UnknownLabel(String),
    #[error("confusion matrix has no observations")]
    EmptyMatrix,
    #[error("mask dimensions differ: {0}x{1} vs {2}x{3}")]
    MaskDimensionMismatch(u32, u32, u32, u32),
    #[error("need at least one class")]
    NoClasses,
}

/// k-by-k confusion matrix; rows index the true class, columns the
/// predicted class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: Vec<String>,
    cells: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(classes: &[String]) -> Result<ConfusionMatrix, MetricsError> {
        if classes.is_empty() {
            return Err(MetricsError::NoClasses);
        }
        Ok(ConfusionMatrix {
            classes: classes.to_vec(),
            cells: vec![0; classes.len() * classes.len()],
        })
    }

    /// Builds from raw counts, row-major. `cells.len()` must be `k*k`.
    pub fn from_cells(classes: &[String], cells: Vec<u64>) -> Result<ConfusionMatrix, MetricsError> {
        if classes.is_empty() {
            return Err(MetricsError::NoClasses);
        }
        assert_eq!(cells.len(), classes.len() * classes.len());
        Ok(ConfusionMatrix {
            classes: classes.to_vec(),
            cells,
        })
    }

    pub fn record(&mut self, true_label: &str, pred_label: &str) -> Result<(), MetricsError> {
        let i = self.class_index(true_label)?;
        let j = self.class_index(pred_label)?;
        self.cells[i * self.classes.len() + j] += 1;
        Ok(())
    }

    fn class_index(&self, label: &str) -> Result<usize, MetricsError> {
        self.classes
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| MetricsError::UnknownLabel(label.to_string()))
    }

    pub fn k(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn get(&self, true_idx: usize, pred_idx: usize) -> u64 {
        self.cells[true_idx * self.classes.len() + pred_idx]
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().sum()
    }

    /// Row sum: number of observations whose true class is `idx`.
    pub fn support(&self, idx: usize) -> u64 {
        let k = self.classes.len();
        self.cells[idx * k..(idx + 1) * k].iter().sum()
    }

    fn predicted(&self, idx: usize) -> u64 {
        let k = self.classes.len();
        (0..k).map(|i| self.cells[i * k + idx]).sum()
    }
}

/// Tallies (true, predicted) label pairs over a declared ordered class list.
pub fn confusion_from_pairs<'a, I>(
    pairs: I,
    classes: &[String],
) -> Result<ConfusionMatrix, MetricsError>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut cm = ConfusionMatrix::zeros(classes)?;
    for (t, p) in pairs {
        cm.record(t, p)?;
    }
    Ok(cm)
}

/// One-vs-rest scores for a single class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics {
    pub label: String,
    pub support: u64,
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
    pub f1: f64,
}

/// Per-class and aggregate classification scores. The aggregate fields are
/// support-weighted; macro averages are available through methods.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub per_class: Vec<ClassMetrics>,
    pub overall_accuracy: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_specificity: f64,
    pub weighted_f1: f64,
}

impl ClassificationReport {
    pub fn macro_precision(&self) -> f64 {
        mean_of(self.per_class.iter().map(|c| c.precision))
    }

    pub fn macro_recall(&self) -> f64 {
        mean_of(self.per_class.iter().map(|c| c.recall))
    }

    pub fn macro_specificity(&self) -> f64 {
        mean_of(self.per_class.iter().map(|c| c.specificity))
    }

    pub fn macro_f1(&self) -> f64 {
        mean_of(self.per_class.iter().map(|c| c.f1))
    }

    /// Human-readable report; every fraction is printed to four decimals.
    pub fn format_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("overall accuracy     {:.4}\n", self.overall_accuracy));
        out.push_str(&format!("weighted precision   {:.4}\n", self.weighted_precision));
        out.push_str(&format!("weighted recall      {:.4}\n", self.weighted_recall));
        out.push_str(&format!("weighted f1          {:.4}\n", self.weighted_f1));
        out.push_str(&format!(
            "weighted specificity {:.4}\n",
            self.weighted_specificity
        ));
        out.push('\n');
        let name_w = self
            .per_class
            .iter()
            .map(|c| c.label.len())
            .max()
            .unwrap_or(5)
            .max(5);
        out.push_str(&format!(
            "{:<name_w$}  {:>8}  {:>9}  {:>7}  {:>11}  {:>7}\n",
            "class", "support", "precision", "recall", "specificity", "f1"
        ));
        for c in &self.per_class {
            out.push_str(&format!(
                "{:<name_w$}  {:>8}  {:>9.4}  {:>7.4}  {:>11.4}  {:>7.4}\n",
                c.label, c.support, c.precision, c.recall, c.specificity, c.f1
            ));
        }
        out
    }
}

fn mean_of(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// One-vs-rest metrics per class plus support-weighted aggregates.
/// Undefined 0/0 cells are reported as 0. Weighted recall always equals
/// the overall accuracy for single-label data.
pub fn classification_report(cm: &ConfusionMatrix) -> Result<ClassificationReport, MetricsError> {
    let total = cm.total();
    if total == 0 {
        return Err(MetricsError::EmptyMatrix);
    }
    let totalf = total as f64;
    let mut per_class = Vec::with_capacity(cm.k());
    let (mut wp, mut wr, mut ws, mut wf) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut diagonal = 0u64;
    for c in 0..cm.k() {
        let tp = cm.get(c, c);
        let support = cm.support(c);
        let fn_ = support - tp;
        let fp = cm.predicted(c) - tp;
        let tn = total - tp - fn_ - fp;
        let m = ClassMetrics {
            label: cm.classes()[c].clone(),
            support,
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, tp + fn_),
            specificity: ratio(tn, tn + fp),
            f1: ratio(2 * tp, 2 * tp + fn_ + fp),
        };
        let weight = support as f64 / totalf;
        wp += weight * m.precision;
        wr += weight * m.recall;
        ws += weight * m.specificity;
        wf += weight * m.f1;
        diagonal += tp;
        per_class.push(m);
    }
    Ok(ClassificationReport {
        per_class,
        overall_accuracy: diagonal as f64 / totalf,
        weighted_precision: wp,
        weighted_recall: wr,
        weighted_specificity: ws,
        weighted_f1: wf,
    })
}

/// Pixelwise overlap scores between a predicted and a reference mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegScores {
    pub accuracy: f64,
    pub iou: f64,
    pub dice: f64,
}

/// Accuracy, IoU (Jaccard), and Dice over two equally sized masks.
/// Two empty masks agree perfectly: all three scores are 1.
pub fn seg_overlap_scores(pred: &BinaryMask, truth: &BinaryMask) -> Result<SegScores, MetricsError> {
    if pred.width() != truth.width() || pred.height() != truth.height() {
        return Err(MetricsError::MaskDimensionMismatch(
            pred.width(),
            pred.height(),
            truth.width(),
            truth.height(),
        ));
    }
    let (mut tp, mut tn, mut fp, mut fn_) = (0u64, 0u64, 0u64, 0u64);
    for (&p, &t) in pred.data().iter().zip(truth.data()) {
        match (p, t) {
            (true, true) => tp += 1,
            (false, false) => tn += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
        }
    }
    let n = tp + tn + fp + fn_;
    let accuracy = ratio(tp + tn, n);
    let (iou, dice) = if tp + fn_ + fp == 0 {
        (1.0, 1.0)
    } else {
        (
            tp as f64 / (tp + fn_ + fp) as f64,
            2.0 * tp as f64 / (2 * tp + fn_ + fp) as f64,
        )
    };
    Ok(SegScores {
        accuracy,
        iou,
        dice,
    })
}

/// Per-item elapsed times with summary order statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingStats {
    samples: Vec<f64>,
}

impl TimingStats {
    /// `samples` must be nonempty and nonnegative.
    pub fn from_samples(samples: Vec<f64>) -> Option<TimingStats> {
        if samples.is_empty() || samples.iter().any(|&s| s < 0.0 || s.is_nan()) {
            return None;
        }
        Some(TimingStats { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn median(&self) -> f64 {
        let mut sorted = self.samples.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = sorted.len();
        if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        }
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(0.0, f64::max)
    }
}

/// Runs `work`, measuring its elapsed wall time on a monotonic clock.
/// Returns the work's result together with the elapsed seconds.
pub fn time_block<T, F: FnOnce() -> T>(work: F) -> (T, f64) {
    let start = Instant::now();
    let result = work();
    (result, start.elapsed().as_secs_f64())
}
