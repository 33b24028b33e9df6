use super::{grid::uniform_points, integrate_monotone, Tolerance};
use crate::error::{Error, EvalError, Result};
use crate::fnexpr::{Interval, RealFn};

/// Mesh size for the cached node values.
pub const MESH_POINTS: usize = 4097;

/// `x -> f_c + integral of g from c to x`, with the integral cached at the
/// nodes of a uniform mesh (plus `c`). Between nodes the remaining piece is
/// integrated exactly from the nearest node to the left, so no
/// interpolation error enters and `f(c) = f_c` holds exactly.
#[derive(Debug, Clone)]
pub struct Antiderivative<G> {
    g: G,
    domain: Interval,
    anchor: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
    /// Sum of the guaranteed per-cell quadrature bounds along the mesh.
    error_bound: f64,
    error_estimate: f64,
    tol: Tolerance,
}

fn cell_tolerance() -> Tolerance {
    Tolerance::uniform(1e-13)
}

impl<G: RealFn> Antiderivative<G> {
    /// Builds the node cache over `domain` cut to `window`.
    pub fn new(g: G, c: f64, f_c: f64, domain: Interval, window: (f64, f64)) -> Result<Self> {
        if !domain.contains(c) {
            return Err(Error::Precondition(format!("anchor {c} is outside {domain}")));
        }
        let lo = domain.lo().max(window.0.min(c));
        let hi = domain.hi().min(window.1.max(c));
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "{domain} has no extent inside window [{}, {}]",
                window.0, window.1
            )));
        }
        let mut nodes = uniform_points(lo, hi, MESH_POINTS);
        let at = nodes.partition_point(|&t| t < c);
        if nodes.get(at) != Some(&c) {
            nodes.insert(at, c);
        }
        let tol = cell_tolerance();
        let mut values = vec![0.0; nodes.len()];
        values[at] = f_c;
        let (mut bound, mut estimate) = (0.0, 0.0);
        for k in at + 1..nodes.len() {
            let piece = integrate_monotone(&g, nodes[k - 1], nodes[k], &tol)?;
            values[k] = values[k - 1] + piece.value;
            bound += piece.error_bound;
            estimate += piece.error_estimate;
        }
        for k in (0..at).rev() {
            let piece = integrate_monotone(&g, nodes[k + 1], nodes[k], &tol)?;
            values[k] = values[k + 1] + piece.value;
            bound += piece.error_bound;
            estimate += piece.error_estimate;
        }
        Ok(Self {
            g,
            domain,
            anchor: c,
            nodes,
            values,
            error_bound: bound,
            error_estimate: estimate,
            tol,
        })
    }

    pub fn integrand(&self) -> &G {
        &self.g
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    /// Sum of the local error estimates over the mesh cells.
    pub fn error_estimate(&self) -> f64 {
        self.error_estimate
    }

    /// Sum of the per-cell bounds `width * (max g - min g)`; meaningful
    /// for monotone integrands, where it dominates the true error.
    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
}

impl<G: RealFn> RealFn for Antiderivative<G> {
    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        if !self.domain.contains(x) {
            return Err(EvalError::OutOfDomain { x, domain: self.domain });
        }
        let k = self.nodes.partition_point(|&t| t <= x).saturating_sub(1);
        let (node, base) = (self.nodes[k], self.values[k]);
        if x == node {
            return Ok(base);
        }
        let piece = integrate_monotone(&self.g, node, x, &self.tol).map_err(|e| match e {
            Error::Eval(inner) => inner,
            other => EvalError::Numeric(other.to_string()),
        })?;
        Ok(base + piece.value)
    }

    fn domain(&self) -> Interval {
        self.domain
    }

    fn describe(&self) -> String {
        format!("integral of {} from {}", self.g.describe(), self.anchor)
    }
}
