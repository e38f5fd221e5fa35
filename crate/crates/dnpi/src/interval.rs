//! Lower/upper probability pairs in exact rational arithmetic.

use num::{BigRational, ToPrimitive, Zero};
use std::fmt;

/// Build a rational from two unsigned integers.
pub fn rat(numer: u64, denom: u64) -> BigRational {
    BigRational::new(numer.into(), denom.into())
}

/// A lower/upper probability pair, `0 <= lower <= upper <= 1`.
///
/// All probability kernels in this crate return their results as one of
/// these. Values are exact rationals; conversion to `f64` happens only at
/// reporting boundaries via [`ProbabilityInterval::to_f64`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbabilityInterval {
    lower: BigRational,
    upper: BigRational,
}

impl ProbabilityInterval {
    /// Construct an interval, panicking if the bounds are out of order or
    /// outside `[0, 1]`. Kernel code only ever produces valid bounds, so a
    /// violation here is a bug in the caller.
    pub fn new(lower: BigRational, upper: BigRational) -> Self {
        let one = BigRational::from_integer(1.into());
        assert!(
            !lower.is_negative() && lower <= upper && upper <= one,
            "invalid probability interval [{lower}, {upper}]"
        );
        Self { lower, upper }
    }

    /// The vacuous interval `[0, 1]`.
    pub fn vacuous() -> Self {
        Self {
            lower: BigRational::zero(),
            upper: BigRational::from_integer(1.into()),
        }
    }

    /// Degenerate interval `[p, p]`.
    pub fn exact(p: BigRational) -> Self {
        Self::new(p.clone(), p)
    }

    pub fn lower(&self) -> &BigRational {
        &self.lower
    }

    pub fn upper(&self) -> &BigRational {
        &self.upper
    }

    /// Imprecision `upper - lower`.
    pub fn width(&self) -> BigRational {
        &self.upper - &self.lower
    }

    /// Convert both bounds to `f64` as `(lower, upper)`.
    pub fn to_f64(&self) -> (f64, f64) {
        (
            self.lower.to_f64().expect("probability fits in f64"),
            self.upper.to_f64().expect("probability fits in f64"),
        )
    }
}

impl fmt::Display for ProbabilityInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}

trait IsNegative {
    fn is_negative(&self) -> bool;
}

impl IsNegative for BigRational {
    fn is_negative(&self) -> bool {
        self < &BigRational::zero()
    }
}
