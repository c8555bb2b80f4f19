//! Log-magnitude arithmetic for integrals whose values underflow `f64`.
//!
//! Carleman weights raised to powers `2a` in the tens of thousands produce
//! integrands far below the smallest subnormal. Sums of such terms are
//! carried as `log(value)` with a max-shifted pairwise reduction; ratios and
//! scale factors then stay in ordinary floating point.

use alloc::vec::Vec;

use crate::fmath;

/// A nonnegative quantity stored as its natural logarithm
/// (`f64::NEG_INFINITY` encodes zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogVal {
    log: f64,
}

impl LogVal {
    pub const ZERO: LogVal = LogVal {
        log: f64::NEG_INFINITY,
    };

    /// From a nonnegative plain value.
    pub fn from_value(v: f64) -> Self {
        debug_assert!(v >= 0.0);
        if v == 0.0 {
            Self::ZERO
        } else {
            Self { log: fmath::ln(v) }
        }
    }

    /// From a natural-log magnitude.
    pub fn from_log(log: f64) -> Self {
        Self { log }
    }

    /// Natural log of the value (`-inf` for zero).
    #[inline]
    pub fn log(&self) -> f64 {
        self.log
    }

    /// Base-10 log, the form used in reports.
    pub fn log10(&self) -> f64 {
        self.log / core::f64::consts::LN_10
    }

    /// Plain value; may underflow to 0 or overflow to `inf`.
    pub fn value(&self) -> f64 {
        if self.log == f64::NEG_INFINITY {
            0.0
        } else {
            fmath::exp(self.log)
        }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.log == f64::NEG_INFINITY
    }

    /// Multiply by a positive plain factor.
    pub fn scale(&self, factor: f64) -> Self {
        debug_assert!(factor > 0.0);
        if self.is_zero() {
            Self::ZERO
        } else {
            Self {
                log: self.log + fmath::ln(factor),
            }
        }
    }

    /// Ratio `self / other` as a plain value; `inf` when dividing a nonzero
    /// by zero, and 1 is never fabricated for 0/0 (that yields NaN).
    pub fn ratio(&self, other: &LogVal) -> f64 {
        if self.is_zero() && other.is_zero() {
            f64::NAN
        } else if other.is_zero() {
            f64::INFINITY
        } else if self.is_zero() {
            0.0
        } else {
            fmath::exp(self.log - other.log)
        }
    }
}

/// Sum terms given as natural-log magnitudes with a fixed pairwise tree over
/// the input order; the shift by the maximum keeps the reduction in range.
pub fn log_sum(terms: &[f64]) -> LogVal {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return LogVal::ZERO;
    }
    let shifted: Vec<f64> = terms.iter().map(|&l| fmath::exp(l - m)).collect();
    let s = pairwise_sum(&shifted);
    LogVal::from_log(m + fmath::ln(s))
}

/// Deterministic pairwise (tree) summation over the slice order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_on_integers() {
        let v: Vec<f64> = (1..=1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
    }

    #[test]
    fn log_sum_handles_extreme_magnitudes() {
        // Two terms around e^{-50000}: representable only in log space.
        let terms = [-50000.0, -50000.0 - core::f64::consts::LN_2];
        let s = log_sum(&terms);
        // e^-50000 * (1 + 1/2)
        let expected = -50000.0 + 1.5f64.ln();
        assert!((s.log() - expected).abs() < 1e-12);
    }

    #[test]
    fn ratio_of_extremes_is_finite() {
        let a = LogVal::from_log(-90000.0);
        let b = LogVal::from_log(-90001.0);
        assert!((a.ratio(&b) - core::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn zero_behaviour() {
        assert!(LogVal::ZERO.is_zero());
        assert_eq!(LogVal::ZERO.value(), 0.0);
        let one = LogVal::from_value(1.0);
        assert_eq!(one.ratio(&LogVal::ZERO), f64::INFINITY);
        assert!(LogVal::ZERO.ratio(&LogVal::ZERO).is_nan());
    }
}
