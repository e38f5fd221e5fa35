//! Entropy-based split measures for the C4.5-style baseline: Shannon
//! entropy, information gain, split information and gain ratio, all in
//! bits (log base 2).

use crate::contingency::ContingencyView;

/// Gains at or below this threshold are treated as zero when ranking
/// attributes, so float noise on a class-independent attribute cannot
/// trigger a split.
pub const GAIN_EPS: f64 = 1e-12;

/// Shannon entropy of a class count vector, with `0 * log2(0) = 0`.
/// The counts must not all be zero.
pub fn entropy(class_counts: &[u64]) -> f64 {
    let total: u64 = class_counts.iter().sum();
    assert!(total > 0, "entropy requires at least one instance");
    let total = total as f64;
    -class_counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            p * p.log2()
        })
        .sum::<f64>()
}

/// Entropy of the node's class distribution minus the size-weighted
/// entropies of the per-category branches.
pub fn information_gain(view: &ContingencyView) -> f64 {
    let n = view.node_total() as f64;
    let branch_term: f64 = (0..view.categories().len())
        .filter(|&i| view.row_total(i) > 0)
        .map(|i| view.row_total(i) as f64 / n * entropy(view.row(i)))
        .sum();
    entropy(&view.class_totals()) - branch_term
}

/// Entropy of the branch size distribution itself.
pub fn split_information(view: &ContingencyView) -> f64 {
    let sizes: Vec<u64> = (0..view.categories().len())
        .map(|i| view.row_total(i))
        .collect();
    entropy(&sizes)
}

/// Information gain normalized by split information. An attribute that
/// produces a single branch has zero split information and gets ratio 0,
/// keeping the attribute ranking total.
pub fn gain_ratio(view: &ContingencyView) -> f64 {
    let si = split_information(view);
    if si == 0.0 {
        return 0.0;
    }
    information_gain(view) / si
}
