use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// A real interval with independent open/closed endpoint flags.
///
/// Unbounded endpoints are represented by infinities and are always open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
    lo_closed: bool,
    hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::InvalidInput("interval endpoint is NaN".into()));
        }
        if !(lo < hi) {
            return Err(Error::InvalidInput(format!("interval needs lo < hi, got [{lo}, {hi}]")));
        }
        if (lo_closed && lo.is_infinite()) || (hi_closed && hi.is_infinite()) {
            return Err(Error::InvalidInput("an unbounded endpoint cannot be closed".into()));
        }
        if lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::InvalidInput(format!("empty interval ({lo}, {hi})")));
        }
        Ok(Self {
            lo,
            hi,
            lo_closed,
            hi_closed,
        })
    }

    pub fn open(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, false, false)
    }

    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, true, true)
    }

    pub fn real_line() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn lo_closed(&self) -> bool {
        self.lo_closed
    }

    pub fn hi_closed(&self) -> bool {
        self.hi_closed
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn contains_interior(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    /// Finite sampling range: the interval cut to `window`, then shrunk on
    /// every finite endpoint of the interval itself so that samples stay in
    /// the interior. Returns `None` when nothing is left.
    pub fn sampling_range(&self, window: (f64, f64), abs_tol: f64, rel_tol: f64) -> Option<(f64, f64)> {
        let (wlo, whi) = window;
        let mut lo = self.lo.max(wlo);
        let mut hi = self.hi.min(whi);
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return None;
        }
        let shrink = abs_tol.max(rel_tol * (hi - lo));
        if lo == self.lo {
            lo += shrink;
        }
        if hi == self.hi {
            hi -= shrink;
        }
        (lo < hi).then_some((lo, hi))
    }

    /// Image of the interval under `t -> center + scale * (t - center)` with
    /// `scale > 0`.
    pub fn contract_toward(&self, center: f64, scale: f64) -> Result<Self> {
        let map = |v: f64| {
            if v.is_infinite() {
                v
            } else {
                center + scale * (v - center)
            }
        };
        Self::new(map(self.lo), map(self.hi), self.lo_closed, self.hi_closed)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}
