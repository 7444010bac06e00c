use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// Stratified train/test split.
///
/// The overall train size is `round(fraction · N)`, apportioned to classes by
/// largest remainder, then clamped so each class keeps at least one row on each
/// side. Rows keep their original relative order within each part.
pub fn split(
    dataset: &LabeledDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let k = dataset.class_names.len();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, r) in dataset.rows.iter().enumerate() {
        by_class[r.label].push(i);
    }
    for (c, rows) in by_class.iter().enumerate() {
        if rows.len() < 2 {
            return Err(Error::Stratification(format!(
                "class '{}' has {} row(s); at least 2 are needed",
                dataset.class_names[c],
                rows.len()
            )));
        }
    }

    let quotas = apportion(
        &by_class.iter().map(Vec::len).collect::<Vec<_>>(),
        train_fraction,
    );

    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (c, rows) in by_class.iter().enumerate() {
        let mut shuffled = rows.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        shuffled.shuffle(&mut rng);
        let (tr, te) = shuffled.split_at(quotas[c]);
        train_idx.extend_from_slice(tr);
        test_idx.extend_from_slice(te);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((dataset.subset(&train_idx), dataset.subset(&test_idx)))
}

/// Per-class train counts.
fn apportion(counts: &[usize], fraction: f64) -> Vec<usize> {
    let total: usize = counts.iter().sum();
    let target = (fraction * total as f64).round() as usize;
    let exact: Vec<f64> = counts.iter().map(|&n| n as f64 * fraction).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut remaining = target.saturating_sub(quotas.iter().sum());
    let mut order: Vec<usize> = (0..counts.len()).collect();
    // largest fractional part first, ties by class index
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &c in &order {
        if remaining == 0 {
            break;
        }
        quotas[c] += 1;
        remaining -= 1;
    }
    for (q, &n) in quotas.iter_mut().zip(counts) {
        *q = (*q).clamp(1, n - 1);
    }
    quotas
}
