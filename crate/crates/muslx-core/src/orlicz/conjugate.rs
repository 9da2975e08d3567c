//! Numerical Legendre-Fenchel conjugation.
//!
//! The conjugate m*(x) = sup_s (s x - m(s)) is computed per dual node by a
//! golden-section search on the concave objective, after growing a bracket
//! until m'(S) >= x. Tables interpolate between nodes with the monotone
//! piecewise cubic of Fritsch and Carlson, which preserves the fact that a
//! conjugate is nondecreasing.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use super::young::YoungFunction;
use super::OrliczError;
use crate::fmath;

const INV_PHI: f64 = 0.618_033_988_749_894_8;
const BRACKET_CAP: f64 = 1e12;

/// Tabulated convex conjugate on a dual grid, with the exact anchor
/// m*(0) = 0 prepended.
#[derive(Debug, Clone)]
pub struct ConjugateTable {
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    /// The conjugated function, kept so that sharp queries can re-solve the
    /// sup at the exact argument instead of interpolating.
    source: Option<YoungFunction>,
    pub label: String,
}

impl ConjugateTable {
    /// Dual arguments covered by the table.
    pub fn coverage(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Monotone-cubic evaluation; errors outside coverage.
    pub fn eval(&self, x: f64) -> Result<f64, OrliczError> {
        let (lo, hi) = self.coverage();
        if !(x >= lo && x <= hi) {
            return Err(OrliczError::OutOfCoverage { x });
        }
        // Binary search for the segment.
        let mut a = 0usize;
        let mut b = self.nodes.len() - 1;
        while b - a > 1 {
            let mid = (a + b) / 2;
            if self.nodes[mid] <= x {
                a = mid;
            } else {
                b = mid;
            }
        }
        let h = self.nodes[b] - self.nodes[a];
        let t = (x - self.nodes[a]) / h;
        let (ya, yb) = (self.values[a], self.values[b]);
        let (da, db) = (self.slopes[a], self.slopes[b]);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Ok(h00 * ya + h10 * h * da + h01 * yb + h11 * h * db)
    }

    /// Coverage-checked evaluation that re-solves the sup at `x` when the
    /// source function is available. Interpolation error (relative ~1e-4)
    /// would otherwise leak into inequality checks that are exact algebra.
    pub fn eval_sharp(&self, x: f64) -> Result<f64, OrliczError> {
        let (lo, hi) = self.coverage();
        if !(x >= lo && x <= hi) {
            return Err(OrliczError::OutOfCoverage { x });
        }
        match &self.source {
            Some(m) => conjugate_at(m, x),
            None => self.eval(x),
        }
    }

    /// Second numerical transform: conjugates the table itself over its own
    /// coverage, for biconjugation checks.
    pub fn conjugate(&self, primal_grid: &[f64]) -> Result<ConjugateTable, OrliczError> {
        validate_grid(primal_grid)?;
        let (_, x_hi) = self.coverage();
        let mut values = Vec::with_capacity(primal_grid.len());
        for &s in primal_grid {
            let objective = |x: f64| s * x - self.eval(x).unwrap_or(f64::INFINITY);
            values.push(golden_max(objective, 0.0, x_hi));
        }
        build_table(format!("({})*", self.label), primal_grid, values, None)
    }

    /// Rows (x, m*(x)) excluding the synthetic zero anchor.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes
            .iter()
            .copied()
            .zip(self.values.iter().copied())
            .skip(1)
    }
}

/// Log-spaced default dual grid: 512 nodes on [1e-4, 1e4]. Conjugates of
/// super-polynomial Young functions span many decades, so log spacing is the
/// only sensible default.
pub fn default_dual_grid() -> Vec<f64> {
    log_grid(1e-4, 1e4, 512)
}

pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (la, lb) = (fmath::ln(lo), fmath::ln(hi));
    (0..count)
        .map(|i| fmath::exp(la + (lb - la) * i as f64 / (count - 1) as f64))
        .collect()
}

/// Computes m* on `dual_grid`.
pub fn conjugate(m: &YoungFunction, dual_grid: &[f64]) -> Result<ConjugateTable, OrliczError> {
    validate_grid(dual_grid)?;
    let mut values = Vec::with_capacity(dual_grid.len());
    for &x in dual_grid {
        values.push(conjugate_at(m, x)?);
    }
    build_table(format!("{}*", m.label), dual_grid, values, Some(m.clone()))
}

/// Single-point conjugate value sup_s (s x - m(s)).
pub fn conjugate_at(m: &YoungFunction, x: f64) -> Result<f64, OrliczError> {
    if x == 0.0 {
        return Ok(0.0);
    }
    // Grow the bracket until the objective derivative x - m'(s) turns
    // negative; beyond that point the concave objective only falls.
    let mut hi = 1.0;
    while m.deriv(hi) < x {
        hi *= 2.0;
        if hi > BRACKET_CAP {
            return Err(OrliczError::BracketExhausted { x });
        }
    }
    Ok(golden_max(|s| s * x - m.eval(s), 0.0, hi))
}

/// Fenchel-Young gap m(s) + m*(x) - s x; nonnegative up to quadrature slack,
/// zero (within 1e-6) when x = m'(s).
pub fn fenchel_young_gap(
    m: &YoungFunction,
    mstar: &ConjugateTable,
    s: f64,
    x: f64,
) -> Result<f64, OrliczError> {
    Ok(m.eval(s) + mstar.eval_sharp(x)? - s * x)
}

fn validate_grid(grid: &[f64]) -> Result<(), OrliczError> {
    if grid.is_empty() || grid[0] <= 0.0 {
        return Err(OrliczError::BadGrid);
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(OrliczError::BadGrid);
    }
    Ok(())
}

fn build_table(
    label: String,
    grid: &[f64],
    grid_values: Vec<f64>,
    source: Option<YoungFunction>,
) -> Result<ConjugateTable, OrliczError> {
    let mut nodes = vec![0.0];
    nodes.extend_from_slice(grid);
    let mut values = vec![0.0];
    values.extend(grid_values);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(OrliczError::NonFiniteModular);
    }
    let slopes = pchip_slopes(&nodes, &values);
    Ok(ConjugateTable {
        nodes,
        values,
        slopes,
        source,
        label,
    })
}

/// Golden-section maximization of a concave objective on [a, b], to relative
/// tolerance 1e-10 in the argument.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let tol = 1e-10;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol * (fmath::abs(b) + tol) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd).max(0.0)
}

/// Fritsch-Carlson slopes for monotone cubic interpolation.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    d[0] = delta[0];
    d[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            d[i] = 0.0;
        } else {
            // Weighted harmonic mean keeps the interpolant monotone.
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d
}
