//! Nonparametric predictive inference kernels for Bernoulli and
//! multinomial future observations.
//!
//! All results are exact rationals. The Bernoulli kernel gives the upper
//! probability that the number of successes among the next `m` trials
//! falls in a given set, with the lower probability obtained through the
//! conjugacy property `lower(A) = 1 - upper(complement of A)`. The
//! multinomial kernel gives the probability interval for the next
//! observation landing in a union of categories, when the total number of
//! possible categories `K` is known.

use crate::interval::ProbabilityInterval;
use num::{BigInt, BigRational, One, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NpiError {
    #[error("success count {successes} exceeds trial count {trials}")]
    SuccessesExceedTrials { successes: u64, trials: u64 },
    #[error("event success set must be nonempty, strictly increasing and within 0..={max}")]
    InvalidSuccessSet { max: u64 },
    #[error("multinomial inference requires at least one observation")]
    NoObservations,
    #[error("declared category total {declared} is below the {observed} observed categories")]
    TooFewDeclaredCategories { declared: usize, observed: usize },
    #[error("category index {index} is out of range")]
    UnknownCategory { index: usize },
    #[error("category index {index} has no observations")]
    UnobservedCategory { index: usize },
    #[error("event lists category index {index} more than once")]
    DuplicateCategory { index: usize },
    #[error("event includes {requested} unobserved categories but only {available} exist")]
    TooManyUnobserved { requested: usize, available: usize },
}

/// Observed Bernoulli data: `successes` successes in `trials` trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BernoulliRecord {
    trials: u64,
    successes: u64,
}

impl BernoulliRecord {
    pub fn new(trials: u64, successes: u64) -> Result<Self, NpiError> {
        if successes > trials {
            return Err(NpiError::SuccessesExceedTrials { successes, trials });
        }
        Ok(Self { trials, successes })
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn successes(&self) -> u64 {
        self.successes
    }
}

/// The event that the success count among the next `future_trials` trials
/// falls in `success_set`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BernoulliEventSpec {
    future_trials: u64,
    success_set: Vec<u64>,
}

impl BernoulliEventSpec {
    /// `success_set` must be nonempty, strictly increasing and contained
    /// in `0..=future_trials`.
    pub fn new(future_trials: u64, success_set: Vec<u64>) -> Result<Self, NpiError> {
        let ok = !success_set.is_empty()
            && success_set.windows(2).all(|w| w[0] < w[1])
            && *success_set.last().unwrap() <= future_trials;
        if !ok {
            return Err(NpiError::InvalidSuccessSet { max: future_trials });
        }
        Ok(Self {
            future_trials,
            success_set,
        })
    }

    pub fn future_trials(&self) -> u64 {
        self.future_trials
    }

    pub fn success_set(&self) -> &[u64] {
        &self.success_set
    }

    /// Complement of the success set within `0..=future_trials`. Empty
    /// when the event already covers every possible count.
    pub fn complement_set(&self) -> Vec<u64> {
        (0..=self.future_trials)
            .filter(|r| !self.success_set.contains(r))
            .collect()
    }
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut out = BigInt::one();
    for i in 0..k {
        out *= BigInt::from(n - i);
        out /= BigInt::from(i + 1);
    }
    out
}

/// NPI upper probability that the success count among the next `m` trials
/// lies in the event's success set, given `s` successes in `n` trials.
///
/// Evaluated as the telescoping binomial sum
/// `C(n+m,n)^-1 * sum_j [C(s+r_j,s) - C(s+r_{j-1},s)] * C(n-s+m-r_j,n-s)`
/// with the leading term's subtrahend taken as zero.
pub fn bernoulli_event_upper(record: &BernoulliRecord, event: &BernoulliEventSpec) -> BigRational {
    let n = record.trials;
    let s = record.successes;
    let m = event.future_trials;
    let mut numer = BigInt::zero();
    let mut prev = BigInt::zero();
    for &r in &event.success_set {
        let cur = binomial(s + r, s);
        numer += (&cur - &prev) * binomial(n - s + m - r, n - s);
        prev = cur;
    }
    BigRational::new(numer, binomial(n + m, n))
}

/// NPI lower probability of the same event, by conjugacy: one minus the
/// upper probability of the complementary success set. An event covering
/// every count has lower probability one.
pub fn bernoulli_event_lower(record: &BernoulliRecord, event: &BernoulliEventSpec) -> BigRational {
    let complement = event.complement_set();
    if complement.is_empty() {
        return BigRational::one();
    }
    let complement_event = BernoulliEventSpec::new(event.future_trials, complement)
        .expect("complement of a valid event is valid");
    BigRational::one() - bernoulli_event_upper(record, &complement_event)
}

/// Probability interval for the next single trial being a success:
/// `[s/(n+1), (s+1)/(n+1)]`.
pub fn bernoulli_next_interval(record: &BernoulliRecord) -> ProbabilityInterval {
    let denom = BigInt::from(record.trials + 1);
    ProbabilityInterval::new(
        BigRational::new(record.successes.into(), denom.clone()),
        BigRational::new(BigInt::from(record.successes + 1), denom),
    )
}

/// Observed multinomial data over a declared universe of `total_categories`
/// possible categories, of which the entries of `counts` are the declared
/// (possibly zero) observation counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultinomialCounts {
    counts: Vec<u64>,
    total_categories: usize,
}

impl MultinomialCounts {
    /// `total_categories` is the known number of possible categories `K`;
    /// it may not be below the number of categories actually observed.
    pub fn new(counts: Vec<u64>, total_categories: usize) -> Result<Self, NpiError> {
        let observed = counts.iter().filter(|&&c| c > 0).count();
        if total_categories < observed {
            return Err(NpiError::TooFewDeclaredCategories {
                declared: total_categories,
                observed,
            });
        }
        Ok(Self {
            counts,
            total_categories,
        })
    }

    /// Convenience constructor for the fully-observed case `K = len(counts)`.
    pub fn fully_observed(counts: Vec<u64>) -> Result<Self, NpiError> {
        let k = counts.len();
        Self::new(counts, k)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Number of observed categories (nonzero counts).
    pub fn observed_categories(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn total_categories(&self) -> usize {
        self.total_categories
    }
}

/// Event `next observation falls in a union of categories`: a set of
/// observed category indices plus a number of unobserved categories
/// included in the union.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultinomialEventSpec {
    observed_members: Vec<usize>,
    unobserved_count: usize,
}

impl MultinomialEventSpec {
    pub fn new(observed_members: Vec<usize>, unobserved_count: usize) -> Self {
        Self {
            observed_members,
            unobserved_count,
        }
    }

    /// Event consisting of a single observed category.
    pub fn singleton(index: usize) -> Self {
        Self::new(vec![index], 0)
    }

    fn validate(&self, counts: &MultinomialCounts) -> Result<(), NpiError> {
        let mut seen = vec![false; counts.counts.len()];
        for &i in &self.observed_members {
            let c = *counts
                .counts
                .get(i)
                .ok_or(NpiError::UnknownCategory { index: i })?;
            if c == 0 {
                return Err(NpiError::UnobservedCategory { index: i });
            }
            if seen[i] {
                return Err(NpiError::DuplicateCategory { index: i });
            }
            seen[i] = true;
        }
        let unobserved_available = counts.total_categories - counts.observed_categories();
        if self.unobserved_count > unobserved_available {
            return Err(NpiError::TooManyUnobserved {
                requested: self.unobserved_count,
                available: unobserved_available,
            });
        }
        Ok(())
    }
}

/// Probability interval for the next observation falling in the given
/// union of categories, with `K` known.
///
/// With `r` observed event categories carrying `sum_r` observations,
/// `l` unobserved event categories, `k` observed categories overall and
/// `n` observations:
/// lower = `(sum_r - r + max(2r + l - K, 0)) / n`,
/// upper = `(sum_r - r + min(2r + l, k)) / n`.
pub fn multinomial_event_interval(
    counts: &MultinomialCounts,
    event: &MultinomialEventSpec,
) -> Result<ProbabilityInterval, NpiError> {
    let n = counts.total();
    if n == 0 {
        return Err(NpiError::NoObservations);
    }
    event.validate(counts)?;

    let k = counts.observed_categories() as i64;
    let big_k = counts.total_categories as i64;
    let r = event.observed_members.len() as i64;
    let l = event.unobserved_count as i64;
    let sum_r: u64 = event.observed_members.iter().map(|&i| counts.counts[i]).sum();

    let lower_numer = sum_r as i64 - r + (2 * r + l - big_k).max(0);
    let upper_numer = sum_r as i64 - r + (2 * r + l).min(k);
    Ok(ProbabilityInterval::new(
        BigRational::new(lower_numer.into(), BigInt::from(n)),
        BigRational::new(upper_numer.into(), BigInt::from(n)),
    ))
}

/// Probability interval for the next observation falling in a single
/// observed category: `[max(0, (n_i - 1)/n), min((n_i + 1)/n, 1)]`.
pub fn multinomial_singleton_interval(
    counts: &MultinomialCounts,
    index: usize,
) -> Result<ProbabilityInterval, NpiError> {
    let n = counts.total();
    if n == 0 {
        return Err(NpiError::NoObservations);
    }
    let c = *counts
        .counts
        .get(index)
        .ok_or(NpiError::UnknownCategory { index })?;
    if c == 0 {
        return Err(NpiError::UnobservedCategory { index });
    }
    Ok(singleton_interval_from_counts(c, n))
}

/// Shared form of the singleton bounds, also used for the no-attribute
/// interval of a multiclass target.
pub(crate) fn singleton_interval_from_counts(category_count: u64, n: u64) -> ProbabilityInterval {
    let n_big = BigInt::from(n);
    let lower = BigRational::new(BigInt::from(category_count as i64 - 1).max(BigInt::zero()), n_big.clone());
    let upper = BigRational::new(BigInt::from(category_count + 1), n_big).min(BigRational::one());
    ProbabilityInterval::new(lower, upper)
}
