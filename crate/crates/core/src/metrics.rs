//! Accuracy, one-vs-rest ROC-AUC and confusion matrices.

use std::io::Write;

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::forest::{argmax, TrainedForest};

/// ROC-AUC of `scores` for the positive set, via the Mann-Whitney rank statistic
/// with mid-ranks for tied scores.
///
/// Returns `None` when either class is empty.
pub fn roc_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    assert_eq!(scores.len(), positive.len());
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1..=j share their mean
        let mid_rank = (i + 1 + j) as f64 / 2.0;
        let pos_in_group = order[i..j].iter().filter(|&&k| positive[k]).count();
        rank_sum += mid_rank * pos_in_group as f64;
        i = j;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

/// Macro average of one-vs-rest AUCs over classes that have both positives and
/// negatives in `labels`. Also returns the per-class values.
pub fn macro_roc_auc(
    proba: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
) -> (f64, Vec<Option<f64>>) {
    let per_class: Vec<Option<f64>> = (0..n_classes)
        .map(|c| {
            let scores: Vec<f64> = proba.iter().map(|p| p[c]).collect();
            let positive: Vec<bool> = labels.iter().map(|&l| l == c).collect();
            roc_auc(&scores, &positive)
        })
        .collect();
    let defined: Vec<f64> = per_class.iter().flatten().copied().collect();
    let mean = if defined.is_empty() {
        f64::NAN
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };
    (mean, per_class)
}

/// `confusion[actual][predicted]`.
pub fn confusion_matrix(
    actual: &[usize],
    predicted: &[usize],
    n_classes: usize,
) -> Vec<Vec<usize>> {
    let mut m = vec![vec![0; n_classes]; n_classes];
    for (&a, &p) in actual.iter().zip(predicted) {
        m[a][p] += 1;
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub class_names: Vec<String>,
    /// Percent.
    pub accuracy: f64,
    /// Macro one-vs-rest average.
    pub roc_auc: f64,
    pub per_class_auc: Vec<Option<f64>>,
    pub confusion: Vec<Vec<usize>>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub test_size: usize,
}

/// Scores `test_set` with the forest. Test labels are matched to the forest's
/// classes by name.
pub fn evaluate(forest: &TrainedForest, test_set: &LabeledDataset) -> Result<EvalReport> {
    if test_set.is_empty() {
        return Err(Error::Evaluation("test set is empty".into()));
    }
    let mapping: Vec<usize> = test_set
        .class_names
        .iter()
        .map(|name| {
            forest
                .class_names
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| {
                    Error::Evaluation(format!("class '{name}' was not seen in training"))
                })
        })
        .collect::<Result<_>>()?;
    let k = forest.class_names.len();
    let actual: Vec<usize> = test_set.rows.iter().map(|r| mapping[r.label]).collect();
    let proba: Vec<Vec<f64>> = test_set
        .rows
        .iter()
        .map(|r| forest.predict_proba(&r.features))
        .collect();
    Ok(report_from_scores(
        &proba,
        &actual,
        forest.class_names.clone(),
        k,
    ))
}

pub fn report_from_scores(
    proba: &[Vec<f64>],
    actual: &[usize],
    class_names: Vec<String>,
    n_classes: usize,
) -> EvalReport {
    let predicted: Vec<usize> = proba.iter().map(|p| argmax(p)).collect();
    let confusion = confusion_matrix(actual, &predicted, n_classes);
    let correct: usize = (0..n_classes).map(|c| confusion[c][c]).sum();
    let accuracy = 100.0 * correct as f64 / actual.len() as f64;
    let (roc_auc, per_class_auc) = macro_roc_auc(proba, actual, n_classes);
    let precision = (0..n_classes)
        .map(|c| {
            let col: usize = confusion.iter().map(|row| row[c]).sum();
            if col == 0 {
                0.0
            } else {
                confusion[c][c] as f64 / col as f64
            }
        })
        .collect();
    let recall = (0..n_classes)
        .map(|c| {
            let row: usize = confusion[c].iter().sum();
            if row == 0 {
                0.0
            } else {
                confusion[c][c] as f64 / row as f64
            }
        })
        .collect();
    EvalReport {
        class_names,
        accuracy,
        roc_auc,
        per_class_auc,
        confusion,
        precision,
        recall,
        test_size: actual.len(),
    }
}

impl EvalReport {
    /// Human-readable summary. The header states the averaging scheme and forest
    /// settings, since neither is implied by the numbers alone.
    pub fn write_text<W: Write>(&self, mut out: W, forest: &TrainedForest) -> std::io::Result<()> {
        let cfg = &forest.config;
        writeln!(out, "# classifier: random forest (Gini), n_trees={}, max_depth={}, min_leaf={}, features_per_split={}, seed={}",
            cfg.n_trees,
            cfg.max_depth.map_or("unlimited".to_string(), |d| d.to_string()),
            cfg.min_leaf,
            cfg.features_per_split,
            cfg.seed)?;
        writeln!(
            out,
            "# roc_auc: macro average of one-vs-rest rank-statistic AUCs"
        )?;
        writeln!(out, "test rows: {}", self.test_size)?;
        writeln!(out, "accuracy: {:.2}%", self.accuracy)?;
        writeln!(out, "roc_auc: {:.4}", self.roc_auc)?;
        writeln!(out)?;
        writeln!(
            out,
            "{:<16} {:>9} {:>9} {:>9}",
            "class", "precision", "recall", "auc"
        )?;
        for (c, name) in self.class_names.iter().enumerate() {
            let auc = self.per_class_auc[c].map_or("n/a".to_string(), |a| format!("{a:.4}"));
            writeln!(
                out,
                "{:<16} {:>9.4} {:>9.4} {:>9}",
                name, self.precision[c], self.recall[c], auc
            )?;
        }
        writeln!(out)?;
        writeln!(out, "confusion (rows = actual, columns = predicted)")?;
        write!(out, "{:<16}", "")?;
        for name in &self.class_names {
            write!(out, " {name:>8}")?;
        }
        writeln!(out)?;
        for (c, row) in self.confusion.iter().enumerate() {
            write!(out, "{:<16}", self.class_names[c])?;
            for v in row {
                write!(out, " {v:>8}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn write_confusion_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "actual\\predicted")?;
        for name in &self.class_names {
            write!(out, ",{name}")?;
        }
        writeln!(out)?;
        for (c, row) in self.confusion.iter().enumerate() {
            write!(out, "{}", self.class_names[c])?;
            for v in row {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}
