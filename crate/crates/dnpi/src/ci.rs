//! The Correct Indication split criterion.
//!
//! For an attribute at a tree node, CI is the probability that the
//! attribute's value for the next instance points at the right class,
//! written as a weighted average of per-category conditional class
//! probabilities. The weights (category probabilities) are only known
//! imprecisely, so lower and upper CI bounds are obtained by optimizing
//! over the NPI interval for binary attributes, or over the
//! box-and-simplex structure `{(n_i-1)/n <= p_i <= (n_i+1)/n, sum = 1}`
//! for multinomial attributes. The multinomial optimum has a closed
//! greedy form; `ci_polytope_oracle` re-derives it by brute-force vertex
//! enumeration as an independent check.

use crate::contingency::{majority_index, ContingencyView};
use crate::interval::{rat, ProbabilityInterval};
use num::{BigRational, One, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CiError {
    #[error("binary correct indication needs exactly two categories, got {0}")]
    NotBinary(usize),
    #[error("category {0} has no instances at this node")]
    EmptyCategory(usize),
    #[error("no class linked to category {0}")]
    MissingLink(usize),
    #[error("vertex enumeration supports at most {max} categories, got {got}")]
    TooManyCategories { got: usize, max: usize },
    #[error("category probability polytope has no vertices")]
    InfeasiblePolytope,
}

/// CI bounds for one attribute, together with the category probability
/// vectors that achieve each bound (in the view's category order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CiScore {
    attribute: usize,
    interval: ProbabilityInterval,
    lower_masses: Vec<BigRational>,
    upper_masses: Vec<BigRational>,
}

impl CiScore {
    pub fn attribute(&self) -> usize {
        self.attribute
    }

    pub fn interval(&self) -> &ProbabilityInterval {
        &self.interval
    }

    pub fn lower(&self) -> &BigRational {
        self.interval.lower()
    }

    pub fn upper(&self) -> &BigRational {
        self.interval.upper()
    }

    pub fn lower_masses(&self) -> &[BigRational] {
        &self.lower_masses
    }

    pub fn upper_masses(&self) -> &[BigRational] {
        &self.upper_masses
    }
}

/// Lower fractions `f_i = n^{C_i}(t=c_i) / (n(t=c_i)+1)` and upper
/// fractions `g_i = (n^{C_i}(t=c_i)+1) / (n(t=c_i)+1)` under the given
/// category-to-class link.
fn linked_fractions(
    view: &ContingencyView,
    class_link: &[(usize, usize)],
) -> Result<(Vec<BigRational>, Vec<BigRational>), CiError> {
    let mut lower = Vec::with_capacity(view.categories().len());
    let mut upper = Vec::with_capacity(view.categories().len());
    for (i, &cat) in view.categories().iter().enumerate() {
        let total = view.row_total(i);
        if total == 0 {
            return Err(CiError::EmptyCategory(cat));
        }
        let class = class_link
            .iter()
            .find(|&&(c, _)| c == cat)
            .map(|&(_, class)| class)
            .ok_or(CiError::MissingLink(cat))?;
        let hits = *view.row(i).get(class).ok_or(CiError::MissingLink(cat))?;
        lower.push(rat(hits, total + 1));
        upper.push(rat(hits + 1, total + 1));
    }
    Ok((lower, upper))
}

/// CI bounds for a binary attribute, optimizing the weighted average over
/// the Bernoulli NPI interval for `p = P(t=1)`.
///
/// With a binary class the linkage is positional: value 0 indicates class
/// 0 and value 1 indicates class 1. With three or more classes each value
/// is linked to its majority class instead.
pub fn ci_binary(view: &ContingencyView) -> Result<CiScore, CiError> {
    let cats = view.categories();
    if cats.len() != 2 {
        return Err(CiError::NotBinary(cats.len()));
    }
    let (row0, row1) = if cats[0] < cats[1] { (0, 1) } else { (1, 0) };
    let class_link = if view.num_classes() == 2 {
        let mut link = vec![(0, 0); 2];
        link[row0] = (cats[row0], 0);
        link[row1] = (cats[row1], 1);
        link
    } else {
        view.majority_class_map()
    };
    let (f, g) = linked_fractions(view, &class_link)?;

    let n = view.node_total();
    let ones = view.row_total(row1);
    let p_lo = rat(ones, n + 1);
    let p_hi = rat(ones + 1, n + 1);

    // pushing mass toward value 1 helps iff its fraction is no smaller
    let p_lower = if f[row0] >= f[row1] { &p_hi } else { &p_lo };
    let p_upper = if g[row0] <= g[row1] { &p_hi } else { &p_lo };
    let lower = &f[row0] * (BigRational::one() - p_lower) + &f[row1] * p_lower;
    let upper = &g[row0] * (BigRational::one() - p_upper) + &g[row1] * p_upper;

    let mut lower_masses = vec![BigRational::zero(); 2];
    lower_masses[row0] = BigRational::one() - p_lower;
    lower_masses[row1] = p_lower.clone();
    let mut upper_masses = vec![BigRational::zero(); 2];
    upper_masses[row0] = BigRational::one() - p_upper;
    upper_masses[row1] = p_upper.clone();

    Ok(CiScore {
        attribute: view.attribute(),
        interval: ProbabilityInterval::new(lower, upper),
        lower_masses,
        upper_masses,
    })
}

/// Greedy mass assignment over the box-and-simplex structure: everyone
/// starts at `(n_i-1)/n`; the spare mass `k/n` goes 2/n at a time to the
/// categories that move the objective the furthest, which after sorting
/// by the objective fractions means the first half (minimizing) or the
/// last half (maximizing), with an odd `k` leaving 1/n for the middle.
fn greedy_masses(
    row_totals: &[u64],
    n: u64,
    keys: &[BigRational],
    favor_smallest: bool,
) -> Vec<BigRational> {
    let k = row_totals.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));

    let half = k / 2;
    let mut extra = vec![0u64; k];
    if favor_smallest {
        for &i in &order[..half] {
            extra[i] = 2;
        }
    } else {
        for &i in &order[k - half..] {
            extra[i] = 2;
        }
    }
    if k % 2 == 1 {
        extra[order[half]] = 1;
    }
    row_totals
        .iter()
        .zip(&extra)
        .map(|(&total, &e)| rat(total - 1 + e, n))
        .collect()
}

/// CI bounds for a multinomial attribute with `k >= 2` observed
/// categories, using the greedy optimum over the box-and-simplex
/// structure of category probabilities. `class_link` maps each category
/// to the class it indicates.
pub fn ci_multinomial(
    view: &ContingencyView,
    class_link: &[(usize, usize)],
) -> Result<CiScore, CiError> {
    let (f, g) = linked_fractions(view, class_link)?;
    let n = view.node_total();
    let row_totals: Vec<u64> = (0..view.categories().len())
        .map(|i| view.row_total(i))
        .collect();

    let lower_masses = greedy_masses(&row_totals, n, &f, true);
    let upper_masses = greedy_masses(&row_totals, n, &g, false);
    let lower: BigRational = f.iter().zip(&lower_masses).map(|(fi, pi)| fi * pi).sum();
    let upper: BigRational = g.iter().zip(&upper_masses).map(|(gi, pi)| gi * pi).sum();

    Ok(CiScore {
        attribute: view.attribute(),
        interval: ProbabilityInterval::new(lower, upper),
        lower_masses,
        upper_masses,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

/// Brute-force check value for `ci_multinomial`: optimizes the weighted
/// average over the polytope `{(n_i-1)/n <= p_i <= (n_i+1)/n, sum p = 1}`
/// by enumerating its vertices. Each vertex pins all but at most one
/// coordinate at a box endpoint, so trying every (free coordinate,
/// endpoint assignment) pair covers them all. Exponential in `k`, capped
/// at 8 categories.
pub fn ci_polytope_oracle(
    view: &ContingencyView,
    class_link: &[(usize, usize)],
    direction: Direction,
) -> Result<BigRational, CiError> {
    let k = view.categories().len();
    const MAX_K: usize = 8;
    if k > MAX_K {
        return Err(CiError::TooManyCategories { got: k, max: MAX_K });
    }
    let (f, g) = linked_fractions(view, class_link)?;
    let fractions = match direction {
        Direction::Min => f,
        Direction::Max => g,
    };
    let n = view.node_total();
    let lo: Vec<BigRational> = (0..k).map(|i| rat(view.row_total(i) - 1, n)).collect();
    let hi: Vec<BigRational> = (0..k).map(|i| rat(view.row_total(i) + 1, n)).collect();

    let mut best: Option<BigRational> = None;
    for free in 0..k {
        for mask in 0u32..(1 << (k - 1)) {
            let mut p = vec![BigRational::zero(); k];
            let mut assigned = BigRational::zero();
            let mut bit = 0;
            for i in 0..k {
                if i == free {
                    continue;
                }
                let v = if mask >> bit & 1 == 1 { &hi[i] } else { &lo[i] };
                assigned += v;
                p[i] = v.clone();
                bit += 1;
            }
            let rest = BigRational::one() - assigned;
            if rest < lo[free] || rest > hi[free] {
                continue;
            }
            p[free] = rest;
            let value: BigRational = fractions.iter().zip(&p).map(|(fi, pi)| fi * pi).sum();
            best = Some(match best.take() {
                None => value,
                Some(b) => match direction {
                    Direction::Min => b.min(value),
                    Direction::Max => b.max(value),
                },
            });
        }
    }
    best.ok_or(CiError::InfeasiblePolytope)
}

/// CI for one attribute at a node, dispatching on the attribute's
/// declared arity. The view must already be restricted to observed
/// categories.
///
/// A single observed category means the attribute is constant at the
/// node: its value is certain, so CI collapses to the conditional
/// interval of the category's majority class with all mass on that
/// category. Such an attribute can never strictly beat the no-attribute
/// upper bound, so it is never selected for a split.
pub fn ci_score(view: &ContingencyView, declared_arity: usize) -> Result<CiScore, CiError> {
    for (i, &cat) in view.categories().iter().enumerate() {
        if view.row_total(i) == 0 {
            return Err(CiError::EmptyCategory(cat));
        }
    }
    if view.categories().len() == 1 {
        let class = majority_index(view.row(0));
        let interval = view
            .conditional_class_interval(view.categories()[0], class)
            .expect("category and class come from the view");
        return Ok(CiScore {
            attribute: view.attribute(),
            interval,
            lower_masses: vec![BigRational::one()],
            upper_masses: vec![BigRational::one()],
        });
    }
    if declared_arity == 2 {
        ci_binary(view)
    } else {
        ci_multinomial(view, &view.majority_class_map())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn view(rows: Vec<Vec<u64>>) -> ContingencyView {
        let cats = (0..rows.len()).collect();
        ContingencyView::new(0, cats, rows).unwrap()
    }

    /// Six categories with counts 1..6, every instance in class 0, so
    /// both fraction sequences are ascending in listed order.
    fn six_category_view() -> ContingencyView {
        view((1..=6).map(|c| vec![c, 0]).collect())
    }

    fn five_category_view() -> ContingencyView {
        view((1..=5).map(|c| vec![c, 0]).collect())
    }

    fn masses(numers: &[u64], denom: u64) -> Vec<BigRational> {
        numers.iter().map(|&x| rat(x, denom)).collect()
    }

    #[test]
    fn six_category_lower_masses() {
        let v = six_category_view();
        let score = ci_multinomial(&v, &v.majority_class_map()).unwrap();
        assert_eq!(score.lower_masses(), &masses(&[2, 3, 4, 3, 4, 5], 21)[..]);
    }

    #[test]
    fn six_category_upper_masses() {
        let v = six_category_view();
        let score = ci_multinomial(&v, &v.majority_class_map()).unwrap();
        assert_eq!(score.upper_masses(), &masses(&[0, 1, 2, 5, 6, 7], 21)[..]);
    }

    #[test]
    fn five_category_masses() {
        let v = five_category_view();
        let score = ci_multinomial(&v, &v.majority_class_map()).unwrap();
        assert_eq!(score.lower_masses(), &masses(&[2, 3, 3, 3, 4], 15)[..]);
        assert_eq!(score.upper_masses(), &masses(&[0, 1, 3, 5, 6], 15)[..]);
    }

    #[test]
    fn binary_worked_example() {
        // n=10, value 0: 3 of class 0 and 1 of class 1; value 1: 1 and 5
        let v = view(vec![vec![3, 1], vec![1, 5]]);
        let score = ci_binary(&v).unwrap();
        assert_eq!(score.lower(), &rat(51, 77));
        assert_eq!(score.upper(), &rat(46, 55));
        assert_eq!(score.lower_masses(), &[rat(5, 11), rat(6, 11)][..]);
        assert_eq!(score.upper_masses(), &[rat(4, 11), rat(7, 11)][..]);
    }

    #[test]
    fn perfectly_predictive_binary_upper_is_one() {
        let v = view(vec![vec![4, 0], vec![0, 6]]);
        let score = ci_binary(&v).unwrap();
        assert_eq!(score.upper(), &BigRational::one());
        // lower puts as much mass as allowed on the weaker value 0 side
        assert_eq!(score.lower(), &rat(64, 77));
    }

    #[test]
    fn binary_attribute_with_three_classes_links_majorities() {
        // positional linkage would score this view at zero; majority
        // linkage recognizes value 0 -> class 1, value 1 -> class 2
        let v = view(vec![vec![0, 4, 0], vec![0, 0, 5]]);
        let score = ci_binary(&v).unwrap();
        assert_eq!(score.lower(), &rat(49, 60));
        assert_eq!(score.upper(), &BigRational::one());
    }

    #[test]
    fn non_binary_view_rejected() {
        let v = view(vec![vec![1, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(ci_binary(&v).unwrap_err(), CiError::NotBinary(3));
    }

    #[test]
    fn two_observed_categories_of_a_wider_attribute() {
        // schema arity 3, but only two categories left at the node
        let v = view(vec![vec![3, 0], vec![5, 0]]);
        let score = ci_score(&v, 3).unwrap();
        assert_eq!(score.lower_masses(), &[rat(4, 8), rat(4, 8)][..]);
        assert_eq!(score.upper_masses(), &[rat(2, 8), rat(6, 8)][..]);
        assert_eq!(score.lower(), &rat(19, 24));
        assert_eq!(score.upper(), &BigRational::one());
    }

    #[test]
    fn constant_attribute_collapses_to_conditional_interval() {
        let v = ContingencyView::new(0, vec![1], vec![vec![2, 7]]).unwrap();
        let score = ci_score(&v, 2).unwrap();
        assert_eq!(score.lower(), &rat(7, 10));
        assert_eq!(score.upper(), &rat(8, 10));
        assert_eq!(score.lower_masses(), &[BigRational::one()][..]);
    }

    #[test]
    fn equal_fractions_make_bounds_trivial() {
        let v = view(vec![vec![1, 1], vec![1, 1], vec![1, 1]]);
        let link = v.majority_class_map();
        let score = ci_multinomial(&v, &link).unwrap();
        assert_eq!(score.lower(), &rat(1, 3));
        assert_eq!(score.upper(), &rat(2, 3));
        assert_eq!(
            ci_polytope_oracle(&v, &link, Direction::Min).unwrap(),
            rat(1, 3)
        );
        assert_eq!(
            ci_polytope_oracle(&v, &link, Direction::Max).unwrap(),
            rat(2, 3)
        );
    }

    #[test]
    fn greedy_matches_oracle_on_the_worked_views() {
        for v in [six_category_view(), five_category_view()] {
            let link = v.majority_class_map();
            let score = ci_multinomial(&v, &link).unwrap();
            assert_eq!(
                score.lower(),
                &ci_polytope_oracle(&v, &link, Direction::Min).unwrap()
            );
            assert_eq!(
                score.upper(),
                &ci_polytope_oracle(&v, &link, Direction::Max).unwrap()
            );
        }
    }

    #[test]
    fn oracle_caps_category_count() {
        let v = view((0..9).map(|_| vec![1, 1]).collect());
        assert_eq!(
            ci_polytope_oracle(&v, &v.majority_class_map(), Direction::Min),
            Err(CiError::TooManyCategories { got: 9, max: 8 })
        );
    }

    prop_compose! {
        /// Contingency rows with every category observed at least once.
        fn arb_rows()(
            k in 2usize..=6,
            classes in 2usize..=3,
        )(
            rows in prop::collection::vec(
                prop::collection::vec(0u64..=8, classes),
                k,
            ),
        ) -> Vec<Vec<u64>> {
            rows.into_iter()
                .map(|mut row| {
                    if row.iter().all(|&c| c == 0) {
                        row[0] = 1;
                    }
                    row
                })
                .collect()
        }
    }

    proptest! {
        #[test]
        fn greedy_equals_oracle(rows in arb_rows()) {
            let v = view(rows);
            let link = v.majority_class_map();
            let score = ci_multinomial(&v, &link).unwrap();
            prop_assert_eq!(
                score.lower(),
                &ci_polytope_oracle(&v, &link, Direction::Min).unwrap()
            );
            prop_assert_eq!(
                score.upper(),
                &ci_polytope_oracle(&v, &link, Direction::Max).unwrap()
            );
        }

        #[test]
        fn mass_vectors_are_feasible(rows in arb_rows()) {
            let v = view(rows);
            let n = v.node_total();
            let score = ci_multinomial(&v, &v.majority_class_map()).unwrap();
            for ms in [score.lower_masses(), score.upper_masses()] {
                let total: BigRational = ms.iter().sum();
                prop_assert_eq!(total, BigRational::one());
                for (i, m) in ms.iter().enumerate() {
                    prop_assert!(*m >= rat(v.row_total(i) - 1, n));
                    prop_assert!(*m <= rat(v.row_total(i) + 1, n));
                }
            }
        }

        #[test]
        fn interval_invariant_under_rotation(rows in arb_rows(), shift in 0usize..6) {
            let k = rows.len();
            let rotated: Vec<Vec<u64>> =
                (0..k).map(|i| rows[(i + shift) % k].clone()).collect();
            let a = view(rows);
            let b = view(rotated);
            let sa = ci_multinomial(&a, &a.majority_class_map()).unwrap();
            let sb = ci_multinomial(&b, &b.majority_class_map()).unwrap();
            prop_assert_eq!(sa.interval(), sb.interval());
        }
    }
}
