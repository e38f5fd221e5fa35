//! Per-node cross-tabulation of one attribute against the class variable,
//! plus the conditional class intervals and category-to-class linkage
//! built on top of it.

use crate::interval::ProbabilityInterval;
use num::{BigInt, BigRational};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ContingencyError {
    #[error("view must contain at least one category")]
    Empty,
    #[error("category rows disagree on the number of classes")]
    RaggedRows,
    #[error("category count does not match row count")]
    LengthMismatch,
    #[error("category {0} not present in view")]
    UnknownCategory(usize),
    #[error("class index {0} out of range")]
    UnknownClass(usize),
}

/// Cross-tabulation of one attribute's categories against class labels at
/// a tree node. Categories and classes are schema indices; rows are kept
/// in the order given at construction (schema order in practice).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyView {
    attribute: usize,
    categories: Vec<usize>,
    class_counts: Vec<Vec<u64>>,
    node_total: u64,
}

impl ContingencyView {
    /// `categories[i]` labels row `i` of `class_counts`; every row must
    /// cover the same classes.
    pub fn new(
        attribute: usize,
        categories: Vec<usize>,
        class_counts: Vec<Vec<u64>>,
    ) -> Result<Self, ContingencyError> {
        if categories.is_empty() || class_counts.is_empty() {
            return Err(ContingencyError::Empty);
        }
        if categories.len() != class_counts.len() {
            return Err(ContingencyError::LengthMismatch);
        }
        let classes = class_counts[0].len();
        if classes == 0 || class_counts.iter().any(|row| row.len() != classes) {
            return Err(ContingencyError::RaggedRows);
        }
        let node_total = class_counts.iter().flatten().sum();
        Ok(Self {
            attribute,
            categories,
            class_counts,
            node_total,
        })
    }

    pub fn attribute(&self) -> usize {
        self.attribute
    }

    pub fn categories(&self) -> &[usize] {
        &self.categories
    }

    pub fn num_classes(&self) -> usize {
        self.class_counts[0].len()
    }

    pub fn node_total(&self) -> u64 {
        self.node_total
    }

    fn row_of(&self, category: usize) -> Result<usize, ContingencyError> {
        self.categories
            .iter()
            .position(|&c| c == category)
            .ok_or(ContingencyError::UnknownCategory(category))
    }

    /// Class counts of one category row, `n^C(t = c)` for every class.
    pub fn row(&self, index: usize) -> &[u64] {
        &self.class_counts[index]
    }

    /// `n(t = c)` for the row at `index`.
    pub fn row_total(&self, index: usize) -> u64 {
        self.class_counts[index].iter().sum()
    }

    /// Class totals across all categories.
    pub fn class_totals(&self) -> Vec<u64> {
        let mut totals = vec![0u64; self.num_classes()];
        for row in &self.class_counts {
            for (t, &c) in totals.iter_mut().zip(row) {
                *t += c;
            }
        }
        totals
    }

    /// The class with the largest count in the whole view; ties go to the
    /// earlier class index.
    pub fn node_majority_class(&self) -> usize {
        majority_index(&self.class_totals())
    }

    /// NPI interval for the next instance with attribute value `category`
    /// having class `class`:
    /// `[n^C(t=c) / (n(t=c)+1), (n^C(t=c)+1) / (n(t=c)+1)]`.
    /// An empty category gives the vacuous interval.
    pub fn conditional_class_interval(
        &self,
        category: usize,
        class: usize,
    ) -> Result<ProbabilityInterval, ContingencyError> {
        let row = self.row_of(category)?;
        let in_class = *self.class_counts[row]
            .get(class)
            .ok_or(ContingencyError::UnknownClass(class))?;
        let denom = BigInt::from(self.row_total(row) + 1);
        Ok(ProbabilityInterval::new(
            BigRational::new(in_class.into(), denom.clone()),
            BigRational::new(BigInt::from(in_class + 1), denom),
        ))
    }

    /// Linked class per category: the class with the largest count in the
    /// category, ties to the earlier class index. Empty categories link to
    /// the node majority class.
    pub fn majority_class_map(&self) -> Vec<(usize, usize)> {
        let node_majority = self.node_majority_class();
        self.categories
            .iter()
            .zip(&self.class_counts)
            .map(|(&category, row)| {
                let class = if row.iter().all(|&c| c == 0) {
                    node_majority
                } else {
                    majority_index(row)
                };
                (category, class)
            })
            .collect()
    }

    /// Copy of the view restricted to categories with at least one
    /// instance. Returns `Empty` when no category is observed.
    pub fn observed_only(&self) -> Result<ContingencyView, ContingencyError> {
        let keep: Vec<usize> = (0..self.categories.len())
            .filter(|&i| self.row_total(i) > 0)
            .collect();
        if keep.is_empty() {
            return Err(ContingencyError::Empty);
        }
        ContingencyView::new(
            self.attribute,
            keep.iter().map(|&i| self.categories[i]).collect(),
            keep.iter().map(|&i| self.class_counts[i].clone()).collect(),
        )
    }
}

/// Index of the largest count, earliest index on ties.
pub(crate) fn majority_index(counts: &[u64]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate().skip(1) {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::rat;

    fn view(rows: &[(usize, &[u64])]) -> ContingencyView {
        ContingencyView::new(
            0,
            rows.iter().map(|&(c, _)| c).collect(),
            rows.iter().map(|&(_, r)| r.to_vec()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn totals_are_consistent() {
        let v = view(&[(0, &[3, 1]), (1, &[1, 5])]);
        assert_eq!(v.node_total(), 10);
        assert_eq!(v.row_total(0), 4);
        assert_eq!(v.row_total(1), 6);
        assert_eq!(v.class_totals(), vec![4, 6]);
    }

    #[test]
    fn conditional_interval_direct_form() {
        let v = view(&[(0, &[1, 1]), (1, &[1, 5])]);
        let iv = v.conditional_class_interval(1, 1).unwrap();
        assert_eq!(iv, ProbabilityInterval::new(rat(5, 7), rat(6, 7)));
    }

    #[test]
    fn empty_category_is_vacuous() {
        let v = view(&[(0, &[0, 0]), (1, &[2, 3])]);
        assert_eq!(
            v.conditional_class_interval(0, 0).unwrap(),
            ProbabilityInterval::new(rat(0, 1), rat(1, 1))
        );
    }

    #[test]
    fn unanimous_category_upper_is_one() {
        let v = view(&[(0, &[9, 0]), (1, &[0, 1])]);
        assert_eq!(
            v.conditional_class_interval(0, 0).unwrap(),
            ProbabilityInterval::new(rat(9, 10), rat(1, 1))
        );
    }

    #[test]
    fn interval_width_is_reciprocal_of_row_total_plus_one() {
        let v = view(&[(0, &[3, 4]), (1, &[2, 0])]);
        for &(cat, class) in &[(0, 0), (0, 1), (1, 0), (1, 1)] {
            let iv = v.conditional_class_interval(cat, class).unwrap();
            let row = v.categories().iter().position(|&c| c == cat).unwrap();
            assert_eq!(iv.width(), rat(1, v.row_total(row) + 1));
        }
    }

    #[test]
    fn unknown_labels_rejected() {
        let v = view(&[(0, &[1, 0])]);
        assert_eq!(
            v.conditional_class_interval(7, 0),
            Err(ContingencyError::UnknownCategory(7))
        );
        assert_eq!(
            v.conditional_class_interval(0, 5),
            Err(ContingencyError::UnknownClass(5))
        );
    }

    #[test]
    fn majority_map_strict_and_tied() {
        let v = view(&[(0, &[3, 1]), (1, &[2, 2])]);
        // tie in category 1 goes to the earlier class
        assert_eq!(v.majority_class_map(), vec![(0, 0), (1, 0)]);
    }

    #[test]
    fn empty_category_inherits_node_majority() {
        let v = view(&[(0, &[0, 0]), (1, &[1, 4])]);
        assert_eq!(v.majority_class_map(), vec![(0, 1), (1, 1)]);
    }

    #[test]
    fn majority_map_invariant_under_duplication() {
        let base = [(0usize, [2u64, 2]), (1, [1, 3])];
        let once = view(&[(0, &base[0].1), (1, &base[1].1)]);
        let tripled_rows: Vec<Vec<u64>> =
            base.iter().map(|(_, r)| r.iter().map(|&c| c * 3).collect()).collect();
        let tripled = ContingencyView::new(0, vec![0, 1], tripled_rows).unwrap();
        assert_eq!(once.majority_class_map(), tripled.majority_class_map());
    }

    #[test]
    fn observed_only_drops_empty_rows() {
        let v = view(&[(0, &[0, 0]), (1, &[2, 1]), (2, &[0, 4])]);
        let filtered = v.observed_only().unwrap();
        assert_eq!(filtered.categories(), &[1, 2]);
        assert_eq!(filtered.node_total(), 7);
        let all_empty = view(&[(0, &[0, 0])]);
        assert_eq!(all_empty.observed_only(), Err(ContingencyError::Empty));
    }

    #[test]
    fn construction_validations() {
        assert_eq!(
            ContingencyView::new(0, vec![], vec![]),
            Err(ContingencyError::Empty)
        );
        assert_eq!(
            ContingencyView::new(0, vec![0, 1], vec![vec![1, 2]]),
            Err(ContingencyError::LengthMismatch)
        );
        assert_eq!(
            ContingencyView::new(0, vec![0, 1], vec![vec![1, 2], vec![1]]),
            Err(ContingencyError::RaggedRows)
        );
    }
}
