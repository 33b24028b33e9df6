use serde::Serialize;

use crate::error::{Error, Result};
use crate::fnexpr::Interval;

/// Grid construction parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    /// Uniform interior points.
    pub size: usize,
    /// Additional low-discrepancy points.
    pub extra: usize,
    pub seed: u64,
    /// Sampling window applied to unbounded (or large) intervals.
    pub window: (f64, f64),
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            size: 201,
            extra: 64,
            seed: 1,
            window: (-10.0, 10.0),
        }
    }
}

/// Strictly increasing sample of an interval's interior.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    points: Vec<f64>,
    #[serde(skip)]
    source: Interval,
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

impl Grid {
    pub fn from_points(points: Vec<f64>, source: Interval) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "a grid needs at least 3 points, got {}",
                points.len()
            )));
        }
        if let Some(w) = points.windows(2).find(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput(format!(
                "grid points must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(p) = points.iter().find(|p| !source.contains_interior(**p)) {
            return Err(Error::InvalidInput(format!(
                "grid point {p} is not interior to {source}"
            )));
        }
        Ok(Self { points, source })
    }

    /// `n` uniform points over the sampling range of `interval`.
    pub fn uniform(interval: Interval, n: usize, window: (f64, f64), abs_tol: f64, rel_tol: f64) -> Result<Self> {
        let (lo, hi) = sampling_range(interval, window, abs_tol, rel_tol)?;
        Self::from_points(uniform_points(lo, hi, n), interval)
    }

    /// Uniform points plus `spec.extra` deterministic low-discrepancy points
    /// (an additive golden-ratio sequence with a seed-derived offset).
    pub fn build(interval: Interval, spec: &GridSpec, abs_tol: f64, rel_tol: f64) -> Result<Self> {
        if spec.size < 3 {
            return Err(Error::InvalidInput(format!(
                "grid size must be at least 3, got {}",
                spec.size
            )));
        }
        let (lo, hi) = sampling_range(interval, spec.window, abs_tol, rel_tol)?;
        let mut points = uniform_points(lo, hi, spec.size);
        let offset = (spec.seed as f64 * std::f64::consts::SQRT_2).fract();
        points.extend((1..=spec.extra).map(|k| {
            let u = (offset + k as f64 * GOLDEN).fract();
            lo + u * (hi - lo)
        }));
        points.sort_by(f64::total_cmp);
        let min_gap = 1e-6 * (hi - lo);
        let mut kept: Vec<f64> = Vec::with_capacity(points.len());
        for p in points {
            match kept.last() {
                Some(&last) if p - last < min_gap => {}
                _ => kept.push(p),
            }
        }
        Self::from_points(kept, interval)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn source_interval(&self) -> Interval {
        self.source
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        self.points[self.points.len() - 1]
    }
}

fn sampling_range(interval: Interval, window: (f64, f64), abs_tol: f64, rel_tol: f64) -> Result<(f64, f64)> {
    interval.sampling_range(window, abs_tol, rel_tol).ok_or_else(|| {
        Error::InvalidInput(format!(
            "interval {interval} has no interior inside window [{}, {}]",
            window.0, window.1
        ))
    })
}

/// `n` points from `lo` to `hi` inclusive; symmetric ranges put the middle
/// point exactly at zero.
pub(crate) fn uniform_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let m = (n - 1) as f64;
    (0..n)
        .map(|i| {
            let i = i as f64;
            ((m - i) * lo + i * hi) / m
        })
        .collect()
}
