//! Concave increasing utility functions.
//!
//! All utilities in this crate are piecewise linear: the family is dense
//! enough for every construction we need, and every counterexample is a
//! single-kink member. [`KinkedUtility`] is the workhorse
//! `u(x) = min{x, iota*x + (1-iota)*kink}`: identity below the kink, slope
//! `iota` above it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cmp;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UtilityError {
    #[error("breakpoints must be finite and strictly increasing")]
    BadBreakpoints,
    #[error("need exactly {expected} slopes for {breakpoints} breakpoints, got {got}")]
    SlopeCount {
        expected: usize,
        breakpoints: usize,
        got: usize,
    },
    #[error("slopes must be strictly positive and weakly decreasing")]
    BadSlopes,
    #[error("iota must lie strictly inside (0, 1), got {0}")]
    BadIota(f64),
}

/// A strictly increasing function of money.
pub trait Utility {
    fn eval(&self, x: f64) -> f64;
}

impl<T: Utility + ?Sized> Utility for &T {
    fn eval(&self, x: f64) -> f64 {
        (**self).eval(x)
    }
}

/// Piecewise-linear concave increasing utility.
///
/// `breakpoints` are the kink abscissae (possibly none, in which case the
/// function is affine). With `k` breakpoints there are `k + 1` segment
/// slopes: `slopes[0]` applies below the first breakpoint, `slopes[i]` on
/// `[breakpoints[i-1], breakpoints[i]]`, and the last slope above the final
/// breakpoint. `anchor` is the value at the first breakpoint (at `x = 0` for
/// the affine case). Positivity makes it strictly increasing; weakly
/// decreasing slopes make it concave; continuity holds by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearUtility {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    anchor: f64,
}

impl PiecewiseLinearUtility {
    pub fn new(breakpoints: Vec<f64>, slopes: Vec<f64>, anchor: f64) -> Result<Self, UtilityError> {
        if breakpoints.iter().any(|b| !b.is_finite())
            || breakpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(UtilityError::BadBreakpoints);
        }
        if slopes.len() != breakpoints.len() + 1 {
            return Err(UtilityError::SlopeCount {
                expected: breakpoints.len() + 1,
                breakpoints: breakpoints.len(),
                got: slopes.len(),
            });
        }
        if slopes.iter().any(|s| !s.is_finite() || *s <= 0.0)
            || slopes.windows(2).any(|w| w[1] > w[0] + cmp::EPS)
        {
            return Err(UtilityError::BadSlopes);
        }
        if !anchor.is_finite() {
            return Err(UtilityError::BadBreakpoints);
        }
        Ok(Self {
            breakpoints,
            slopes,
            anchor,
        })
    }

    /// The identity utility (risk neutral).
    pub fn identity() -> Self {
        Self::affine(1.0, 0.0)
    }

    /// `u(x) = slope * x + intercept`.
    pub fn affine(slope: f64, intercept: f64) -> Self {
        assert!(slope > 0.0);
        Self {
            breakpoints: Vec::new(),
            slopes: vec![slope],
            anchor: intercept,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }
}

impl Utility for PiecewiseLinearUtility {
    fn eval(&self, x: f64) -> f64 {
        let bp = &self.breakpoints;
        if bp.is_empty() {
            return self.anchor + self.slopes[0] * x;
        }
        if x <= bp[0] {
            return self.anchor + self.slopes[0] * (x - bp[0]);
        }
        let mut y = self.anchor;
        let mut prev = bp[0];
        for i in 1..bp.len() {
            if x <= bp[i] {
                return y + self.slopes[i] * (x - prev);
            }
            y += self.slopes[i] * (bp[i] - prev);
            prev = bp[i];
        }
        y + self.slopes[bp.len()] * (x - prev)
    }
}

/// `u(x) = min{x, iota*x + (1-iota)*kink}` for `iota` in `(0, 1)`.
///
/// Identity below `kink`, slope `iota` above it. Concave and strictly
/// increasing; equal to the two-segment [`PiecewiseLinearUtility`] with
/// breakpoint `kink` and slopes `(1, iota)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinkedUtility {
    pub kink: f64,
    pub iota: f64,
}

impl KinkedUtility {
    pub fn new(kink: f64, iota: f64) -> Result<Self, UtilityError> {
        if !(0.0..=1.0).contains(&iota) || iota == 0.0 || iota == 1.0 || !iota.is_finite() {
            return Err(UtilityError::BadIota(iota));
        }
        if !kink.is_finite() {
            return Err(UtilityError::BadBreakpoints);
        }
        Ok(Self { kink, iota })
    }

    pub fn to_piecewise(self) -> PiecewiseLinearUtility {
        PiecewiseLinearUtility {
            breakpoints: vec![self.kink],
            slopes: vec![1.0, self.iota],
            anchor: self.kink,
        }
    }
}

impl Utility for KinkedUtility {
    fn eval(&self, x: f64) -> f64 {
        x.min(self.iota * x + (1.0 - self.iota) * self.kink)
    }
}
