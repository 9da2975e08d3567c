//! Truncated Q-Wiener machinery: the Dirichlet sine basis, counter-addressed
//! Brownian increments, diagonal noise maps h(u), and the sampled checks of
//! the growth/Lipschitz assumptions.
//!
//! The expansion W(t) = sum_j e_j beta_j(t) uses unweighted independent
//! Brownian motions; the 1/j^2 covariance weights live in the U-norm and
//! never enter the integrals computed here.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::fmath;
use crate::grid::{Domain, GridError, GridFunction};
use crate::rng;

type ModeFn = Arc<dyn Fn(f64, [f64; 2], f64) -> f64 + Send + Sync>;
type SpaceFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseError {
    ModeMismatch { expected: usize, got: usize },
    EmptyPartition,
    Shape(GridError),
}

impl core::fmt::Display for NoiseError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            NoiseError::ModeMismatch { expected, got } => {
                write!(f, "mode count mismatch: expected {expected}, got {got}")
            }
            NoiseError::EmptyPartition => write!(f, "time partition must be nonempty"),
            NoiseError::Shape(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for NoiseError {}

impl From<GridError> for NoiseError {
    fn from(e: GridError) -> Self {
        NoiseError::Shape(e)
    }
}

/// Sine basis orthonormal in L^2(D): sqrt(2/L) sin(j pi (x-lo)/L) in 1-D,
/// tensor products in 2-D enumerated by increasing index sum. On the uniform
/// lattice the discrete Gram matrix is the identity to rounding, because the
/// sine sums telescope exactly.
#[derive(Debug, Clone, Copy)]
pub struct BasisSpec {
    pub domain: Domain,
    pub modes: usize,
}

impl BasisSpec {
    pub fn new(domain: Domain, modes: usize) -> Self {
        Self { domain, modes }
    }

    /// Tensor indices (1-based) of linear mode `j` (0-based). 1-D modes map
    /// to (j+1, 0); 2-D pairs are enumerated by increasing sum, then first
    /// component: (1,1), (1,2), (2,1), (1,3), (2,2), (3,1), ...
    pub fn mode_indices(&self, j: usize) -> (usize, usize) {
        if self.domain.dim == 1 {
            return (j + 1, 0);
        }
        let mut count = 0usize;
        let mut sum = 2usize;
        loop {
            let in_diag = sum - 1;
            if count + in_diag > j {
                let a = j - count + 1;
                return (a, sum - a);
            }
            count += in_diag;
            sum += 1;
        }
    }

    /// e_j evaluated at a point.
    pub fn eval(&self, j: usize, x: [f64; 2]) -> f64 {
        let l = self.domain.hi - self.domain.lo;
        let scale = fmath::sqrt(2.0 / l);
        let (jx, jy) = self.mode_indices(j);
        let sx = fmath::sin(jx as f64 * core::f64::consts::PI * (x[0] - self.domain.lo) / l);
        if self.domain.dim == 1 {
            scale * sx
        } else {
            let sy = fmath::sin(jy as f64 * core::f64::consts::PI * (x[1] - self.domain.lo) / l);
            scale * scale * sx * sy
        }
    }

    /// e_j sampled on the grid.
    pub fn field(&self, j: usize) -> GridFunction {
        GridFunction::from_fn(self.domain, |x| self.eval(j, x))
    }

    /// Coefficients <u, e_j> for j < n.
    pub fn project(&self, u: &GridFunction, n: usize) -> Result<Vec<f64>, GridError> {
        (0..n).map(|j| self.field(j).l2_inner(u)).collect()
    }

    /// sum_j c_j e_j on the grid.
    pub fn lift(&self, coefficients: &[f64]) -> GridFunction {
        let mut out = GridFunction::zeros(self.domain);
        for (j, c) in coefficients.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            let e = self.field(j);
            for (o, v) in out.values.iter_mut().zip(&e.values) {
                *o += c * v;
            }
        }
        out
    }

    /// Largest deviation of the discrete Gram matrix from the identity.
    pub fn gram_max_deviation(&self) -> f64 {
        let fields: Vec<GridFunction> = (0..self.modes).map(|j| self.field(j)).collect();
        let mut worst = 0.0f64;
        for (i, fi) in fields.iter().enumerate() {
            for (j, fj) in fields.iter().enumerate() {
                let g = fi.l2_inner(fj).expect("same domain");
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max(fmath::abs(g - target));
            }
        }
        worst
    }

    /// Eigenvalue of the discrete 1-D Dirichlet Laplacian (the composition
    /// -div grad of this crate) for mode j: (2/h sin(j pi h / 2L))^2.
    pub fn laplacian_eigenvalue_1d(&self, j: usize) -> f64 {
        assert_eq!(self.domain.dim, 1, "closed-form eigenvalues are 1-D only");
        let h = self.domain.spacing();
        let l = self.domain.hi - self.domain.lo;
        let (jx, _) = self.mode_indices(j);
        let s = fmath::sin(jx as f64 * core::f64::consts::PI * h / (2.0 * l));
        let v = 2.0 / h * s;
        v * v
    }
}

/// Diagonal noise map: mode j acts as x -> h_j(t, x, u(x)).
#[derive(Clone)]
pub struct NoiseModel {
    modes: Vec<ModeFn>,
    /// True when no mode reads the state argument.
    pub additive: bool,
    /// Growth constant: sum_j |h_j|^2 <= C1 lambda^2 + C3(x).
    pub c1: f64,
    /// Lipschitz constant of (H2).
    pub c2: f64,
    c3: SpaceFn,
}

impl core::fmt::Debug for NoiseModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("NoiseModel")
            .field("modes", &self.modes.len())
            .field("additive", &self.additive)
            .field("c1", &self.c1)
            .field("c2", &self.c2)
            .finish()
    }
}

impl NoiseModel {
    pub fn zero() -> Self {
        Self {
            modes: Vec::new(),
            additive: true,
            c1: 0.0,
            c2: 0.0,
            c3: Arc::new(|_| 0.0),
        }
    }

    pub fn new(
        modes: Vec<ModeFn>,
        additive: bool,
        c1: f64,
        c2: f64,
        c3: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            modes,
            additive,
            c1,
            c2,
            c3: Arc::new(c3),
        }
    }

    /// h_j = amp_j e_j(x), optionally scaled by the state (multiplicative).
    /// The declared constants are exact for this diagonal form.
    pub fn diagonal_sine(basis: &BasisSpec, amplitudes: &[f64], multiplicative: bool) -> Self {
        let basis = *basis;
        let sup_e_sq = if basis.domain.dim == 1 { 2.0 } else { 4.0 }
            / fmath::powf(basis.domain.hi - basis.domain.lo, basis.domain.dim as f64);
        let amp_sq_sum: f64 = amplitudes.iter().map(|a| a * a).sum();
        let modes: Vec<ModeFn> = amplitudes
            .iter()
            .enumerate()
            .map(|(j, amp)| {
                let amp = *amp;
                let f: ModeFn = if multiplicative {
                    Arc::new(move |_t, x, lambda| amp * basis.eval(j, x) * lambda)
                } else {
                    Arc::new(move |_t, x, _| amp * basis.eval(j, x))
                };
                f
            })
            .collect();
        let amps: Vec<f64> = amplitudes.to_vec();
        let c3_basis = basis;
        Self {
            modes,
            additive: !multiplicative,
            c1: if multiplicative {
                amp_sq_sum * sup_e_sq
            } else {
                0.0
            },
            c2: if multiplicative {
                amp_sq_sum * sup_e_sq
            } else {
                0.0
            },
            c3: if multiplicative {
                Arc::new(|_| 0.0)
            } else {
                Arc::new(move |x| {
                    amps.iter()
                        .enumerate()
                        .map(|(j, a)| {
                            let e = c3_basis.eval(j, x);
                            a * a * e * e
                        })
                        .sum()
                })
            },
        }
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    #[inline]
    pub fn eval_mode(&self, j: usize, t: f64, x: [f64; 2], lambda: f64) -> f64 {
        (self.modes[j])(t, x, lambda)
    }

    pub fn c3(&self, x: [f64; 2]) -> f64 {
        (self.c3)(x)
    }

    /// Keeps only the first `n` modes (the projection layer of the
    /// approximation cascade).
    pub fn truncate_modes(&self, n: usize) -> Self {
        let mut out = self.clone();
        out.modes.truncate(n);
        out
    }
}

/// Brownian increments delta beta_j^m ~ N(0, dt), addressed by
/// (seed, path, mode, global step). Materialized once per path; the values
/// are a pure function of the key, so any scheduling order reproduces them.
#[derive(Debug, Clone)]
pub struct WienerDraw {
    pub seed: u64,
    pub path_index: u64,
    pub steps: usize,
    pub modes: usize,
    pub dt: f64,
    pub first_step: u64,
    increments: Vec<f64>,
}

impl WienerDraw {
    #[inline]
    pub fn increment(&self, step: usize, mode: usize) -> f64 {
        self.increments[step * self.modes + mode]
    }

    /// beta_j over the whole draw: sum of the mode's increments.
    pub fn mode_total(&self, mode: usize) -> f64 {
        (0..self.steps).map(|m| self.increment(m, mode)).sum()
    }
}

/// Draws the increments for one path.
pub fn sample_increments(
    seed: u64,
    path_index: u64,
    steps: usize,
    modes: usize,
    dt: f64,
    first_step: u64,
) -> WienerDraw {
    let sqrt_dt = fmath::sqrt(dt);
    let mut increments = Vec::with_capacity(steps * modes);
    for m in 0..steps {
        for j in 0..modes {
            let key =
                rng::increment_key(seed, path_index, j as u64, first_step + m as u64);
            increments.push(sqrt_dt * rng::standard_normal(key));
        }
    }
    WienerDraw {
        seed,
        path_index,
        steps,
        modes,
        dt,
        first_step,
        increments,
    }
}

/// One noise kick: sum_j h_j(t, x, u(x)) delta beta_j^m on the grid.
pub fn apply_noise(
    h: &NoiseModel,
    t: f64,
    u: &GridFunction,
    draw: &WienerDraw,
    step: usize,
) -> Result<GridFunction, NoiseError> {
    if draw.modes != h.mode_count() {
        return Err(NoiseError::ModeMismatch {
            expected: h.mode_count(),
            got: draw.modes,
        });
    }
    let mut out = GridFunction::zeros(u.domain);
    for j in 0..h.mode_count() {
        let db = draw.increment(step, j);
        if db == 0.0 {
            continue;
        }
        for i in 0..out.values.len() {
            let x = u.domain.node_coord(i);
            out.values[i] += h.eval_mode(j, t, x, u.values[i]) * db;
        }
    }
    Ok(out)
}

/// Squared Hilbert-Schmidt norm sum_j |h_j(t, ., u)|^2_{L^2} by grid
/// quadrature.
pub fn hs_norm_sq(h: &NoiseModel, t: f64, u: &GridFunction) -> f64 {
    let w = u.domain.volume_weight();
    let mut total = 0.0;
    for j in 0..h.mode_count() {
        let mut mode_sq = 0.0;
        for i in 0..u.values.len() {
            let x = u.domain.node_coord(i);
            let v = h.eval_mode(j, t, x, u.values[i]);
            mode_sq += v * v;
        }
        total += mode_sq * w;
    }
    total
}

/// Freezes h at the left endpoints of the partition: the elementary-process
/// approximation h~(t) = h(t_l) for t in (t_l, t_{l+1}].
pub fn elementary_approximation(
    h: &NoiseModel,
    partition: &[f64],
) -> Result<NoiseModel, NoiseError> {
    if partition.is_empty() {
        return Err(NoiseError::EmptyPartition);
    }
    let points: Arc<Vec<f64>> = Arc::new(partition.to_vec());
    let modes: Vec<ModeFn> = h
        .modes
        .iter()
        .map(|inner| {
            let inner = inner.clone();
            let points = points.clone();
            let f: ModeFn = Arc::new(move |t, x, lambda| {
                let below = points.iter().filter(|p| **p < t).count();
                let idx = below.saturating_sub(1).min(points.len() - 1);
                inner(points[idx], x, lambda)
            });
            f
        })
        .collect();
    Ok(NoiseModel {
        modes,
        additive: h.additive,
        c1: h.c1,
        c2: h.c2,
        c3: h.c3.clone(),
    })
}

#[derive(Debug, Clone)]
pub struct HAssumptionReport {
    /// Worst excess of sum_j |h_j(., lambda)|^2 over C1 lambda^2 + C3(x).
    pub growth_excess: f64,
    pub growth_witness: (f64, [f64; 2], f64),
    /// Worst excess of sum_j |h_j(., l1) - h_j(., l2)|^2 over C2 |l1 - l2|^2.
    pub lipschitz_excess: f64,
    pub lipschitz_witness: (f64, [f64; 2], f64, f64),
    pub samples: usize,
    pub pass: bool,
}

/// Samples the (H2) growth and Lipschitz bounds against the declared
/// constants; violations are report content.
pub fn verify_h_assumptions(
    h: &NoiseModel,
    domain: &Domain,
    lambda_range: (f64, f64),
    samples: usize,
    seed: u64,
) -> HAssumptionReport {
    let mut stream = rng::SampleStream::new(seed);
    let mut report = HAssumptionReport {
        growth_excess: f64::NEG_INFINITY,
        growth_witness: (0.0, [0.0; 2], 0.0),
        lipschitz_excess: f64::NEG_INFINITY,
        lipschitz_witness: (0.0, [0.0; 2], 0.0, 0.0),
        samples,
        pass: true,
    };
    for _ in 0..samples.max(1) {
        let t = stream.uniform();
        let x = [
            stream.range(domain.lo, domain.hi),
            if domain.dim == 2 {
                stream.range(domain.lo, domain.hi)
            } else {
                0.0
            },
        ];
        let l1 = stream.range(lambda_range.0, lambda_range.1);
        let l2 = stream.range(lambda_range.0, lambda_range.1);

        let mut sq = 0.0;
        let mut diff_sq = 0.0;
        for j in 0..h.mode_count() {
            let v1 = h.eval_mode(j, t, x, l1);
            let v2 = h.eval_mode(j, t, x, l2);
            sq += v1 * v1;
            diff_sq += (v1 - v2) * (v1 - v2);
        }
        let g_excess = sq - h.c1 * l1 * l1 - h.c3(x);
        if g_excess > report.growth_excess {
            report.growth_excess = g_excess;
            report.growth_witness = (t, x, l1);
        }
        let l_excess = diff_sq - h.c2 * (l1 - l2) * (l1 - l2);
        if l_excess > report.lipschitz_excess {
            report.lipschitz_excess = l_excess;
            report.lipschitz_witness = (t, x, l1, l2);
        }
    }
    let tol = 1e-9;
    report.pass = report.growth_excess <= tol && report.lipschitz_excess <= tol;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn basis_1d(n: usize, modes: usize) -> BasisSpec {
        BasisSpec::new(Domain::unit_interval(n), modes)
    }

    #[test]
    fn gram_matrix_is_identity() {
        // Resolution 8N is the contract; the sine lattice sums are exact, so
        // the deviation is pure rounding.
        let b = basis_1d(64, 8);
        assert!(b.gram_max_deviation() < 1e-12);
        let b2 = BasisSpec::new(Domain::unit_square(32), 6);
        assert!(b2.gram_max_deviation() < 1e-12);
    }

    #[test]
    fn mode_enumeration_2d() {
        let b = BasisSpec::new(Domain::unit_square(8), 6);
        let expect = [(1, 1), (1, 2), (2, 1), (1, 3), (2, 2), (3, 1)];
        for (j, e) in expect.iter().enumerate() {
            assert_eq!(b.mode_indices(j), *e, "mode {j}");
        }
    }

    #[test]
    fn project_lift_round_trip() {
        let b = basis_1d(128, 8);
        // project(e_3) is the unit vector at index 3.
        let coeffs = b.project(&b.field(3), 8).unwrap();
        for (j, c) in coeffs.iter().enumerate() {
            let target = if j == 3 { 1.0 } else { 0.0 };
            assert!((c - target).abs() < 1e-12, "mode {j}: {c}");
        }
        // project(0) = 0.
        let zeros = b.project(&GridFunction::zeros(b.domain), 8).unwrap();
        assert!(zeros.iter().all(|c| *c == 0.0));
        // Random band-limited field round-trips.
        let mut stream = rng::SampleStream::new(17);
        let coeffs: Vec<f64> = (0..8).map(|_| stream.range(-1.0, 1.0)).collect();
        let u = b.lift(&coeffs);
        let back = b.project(&u, 8).unwrap();
        for (a, c) in coeffs.iter().zip(&back) {
            assert!((a - c).abs() < 1e-8);
        }
    }

    #[test]
    fn increments_are_deterministic_and_distributed() {
        let a = sample_increments(7, 3, 50, 4, 0.01, 0);
        let b = sample_increments(7, 3, 50, 4, 0.01, 0);
        assert_eq!(a.increments, b.increments);

        // Mean over 10^6 single-step draws within 5 standard errors of 0
        // (dt = 1, stderr = 1e-3).
        let mut sum = 0.0;
        for path in 0..1_000_000u64 {
            sum += sample_increments(42, path, 1, 1, 1.0, 0).increment(0, 0);
        }
        let mean = sum / 1e6;
        assert!(mean.abs() < 5e-3, "mean {mean}");
    }

    #[test]
    fn empty_draw_for_zero_steps() {
        let d = sample_increments(1, 0, 0, 4, 0.1, 0);
        assert_eq!(d.steps, 0);
        assert_eq!(d.increments.len(), 0);
    }

    #[test]
    fn per_mode_variance_and_independence() {
        let dt = 0.25;
        let steps = 40_000;
        let d = sample_increments(11, 0, steps, 2, dt, 0);
        for j in 0..2 {
            let mut sum_sq = 0.0;
            for m in 0..steps {
                let v = d.increment(m, j);
                sum_sq += v * v;
            }
            let var = sum_sq / steps as f64;
            let se = dt * (2.0f64 / steps as f64).sqrt();
            assert!((var - dt).abs() < 5.0 * se, "mode {j}: var {var}");
        }
        let mut cross = 0.0;
        for m in 0..steps {
            cross += d.increment(m, 0) * d.increment(m, 1);
        }
        let corr = cross / steps as f64;
        let se = dt / (steps as f64).sqrt();
        assert!(corr.abs() < 5.0 * se, "corr {corr}");
    }

    #[test]
    fn apply_noise_examples() {
        let b = basis_1d(64, 4);
        let u = GridFunction::zeros(b.domain);

        // Zero amplitudes give the zero field.
        let h0 = NoiseModel::diagonal_sine(&b, &[0.0; 4], false);
        let draw = sample_increments(5, 0, 3, 4, 0.1, 0);
        let kick = apply_noise(&h0, 0.0, &u, &draw, 1).unwrap();
        assert!(kick.values.iter().all(|v| *v == 0.0));

        // Single additive mode scales e_1 by its increment.
        let h1 = NoiseModel::new(
            vec![Arc::new({
                let b = b;
                move |_t, x: [f64; 2], _| b.eval(0, x)
            }) as ModeFn],
            true,
            0.0,
            0.0,
            |_| 0.0,
        );
        let mut fixed = sample_increments(5, 0, 2, 1, 1.0, 0);
        fixed.increments = vec![0.0, 0.3];
        let kick = apply_noise(&h1, 0.0, &u, &fixed, 1).unwrap();
        let e1 = b.field(0);
        for (k, e) in kick.values.iter().zip(&e1.values) {
            assert!((k - 0.3 * e).abs() < 1e-15);
        }
    }

    #[test]
    fn multiplicative_noise_matches_pointwise_summation() {
        let b = basis_1d(64, 4);
        let amps: Vec<f64> = (1..=4).map(|j| fmath::powf(2.0, -(j as f64))).collect();
        let h = NoiseModel::diagonal_sine(&b, &amps, true);
        let u = GridFunction::from_fn(b.domain, |x| 1.0 + x[0]);
        let draw = sample_increments(9, 2, 5, 4, 0.01, 0);
        let kick = apply_noise(&h, 0.3, &u, &draw, 2).unwrap();
        for node in [0usize, 20, 62] {
            let x = b.domain.node_coord(node);
            let mut expect = 0.0;
            for j in 0..4 {
                expect += u.values[node] * amps[j] * b.eval(j, x) * draw.increment(2, j);
            }
            assert!((kick.values[node] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn mode_mismatch_is_an_error() {
        let b = basis_1d(32, 4);
        let h = NoiseModel::diagonal_sine(&b, &[1.0; 4], false);
        let draw = sample_increments(5, 0, 2, 3, 0.1, 0);
        assert!(matches!(
            apply_noise(&h, 0.0, &GridFunction::zeros(b.domain), &draw, 0),
            Err(NoiseError::ModeMismatch { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn hs_norm_examples() {
        let b = basis_1d(256, 8);
        let u = GridFunction::zeros(b.domain);
        assert_eq!(hs_norm_sq(&NoiseModel::zero(), 0.0, &u), 0.0);

        // A single orthonormal mode has unit HS norm.
        let mut amps = vec![0.0; 8];
        amps[0] = 1.0;
        let h = NoiseModel::diagonal_sine(&b, &amps, false);
        assert!((hs_norm_sq(&h, 0.0, &u) - 1.0).abs() < 1e-12);

        // Geometric amplitudes: sum_{j<=8} 4^-j = (1 - 4^-8)/3.
        let amps: Vec<f64> = (1..=8).map(|j| fmath::powf(2.0, -(j as f64))).collect();
        let h = NoiseModel::diagonal_sine(&b, &amps, false);
        let expect = (1.0 - fmath::powf(4.0, -8.0)) / 3.0;
        assert!((hs_norm_sq(&h, 0.0, &u) - expect).abs() < 1e-12);
        assert!((expect - 0.3333282470703125).abs() < 1e-16);
    }

    #[test]
    fn elementary_approximation_freezes_left_endpoints() {
        let b = basis_1d(32, 1);
        // h_1(t) = t * e_1.
        let h = NoiseModel::new(
            vec![Arc::new({
                move |t: f64, x: [f64; 2], _| t * b.eval(0, x)
            }) as ModeFn],
            true,
            0.0,
            0.0,
            |_| 0.0,
        );
        let frozen = elementary_approximation(&h, &[0.0, 0.5, 1.0]).unwrap();
        let x = [0.5, 0.0];
        let e = b.eval(0, x);
        assert_eq!(frozen.eval_mode(0, 0.25, x, 0.0), 0.0);
        assert_eq!(frozen.eval_mode(0, 0.5, x, 0.0), 0.0);
        assert!((frozen.eval_mode(0, 0.75, x, 0.0) - 0.5 * e).abs() < 1e-15);
        assert!((frozen.eval_mode(0, 1.0, x, 0.0) - 0.5 * e).abs() < 1e-15);

        // Constant-in-time noise is unchanged.
        let hc = NoiseModel::diagonal_sine(&b, &[0.7], false);
        let fc = elementary_approximation(&hc, &[0.0, 0.25, 0.75]).unwrap();
        for t in [0.1, 0.3, 0.9] {
            assert_eq!(fc.eval_mode(0, t, x, 0.0), hc.eval_mode(0, t, x, 0.0));
        }
        assert!(matches!(
            elementary_approximation(&hc, &[]),
            Err(NoiseError::EmptyPartition)
        ));
    }

    #[test]
    fn elementary_defect_decays_quadratically() {
        // |h~ - h|_T^2 = int sum_j |h_j(t_l) - h_j(t)|^2 dt ~ O(dt^2) for
        // Lipschitz-in-t amplitudes.
        let b = basis_1d(64, 1);
        let h = NoiseModel::new(
            vec![Arc::new({
                move |t: f64, x: [f64; 2], _| t * b.eval(0, x)
            }) as ModeFn],
            true,
            0.0,
            0.0,
            |_| 0.0,
        );
        let u = GridFunction::zeros(b.domain);
        let defect = |pieces: usize| -> f64 {
            let partition: Vec<f64> = (0..=pieces).map(|i| i as f64 / pieces as f64).collect();
            let frozen = elementary_approximation(&h, &partition).unwrap();
            // Quadrature of the defect over t with a fine fixed grid.
            let fine = 512;
            let mut total = 0.0;
            for i in 0..fine {
                let t = (i as f64 + 0.5) / fine as f64;
                let mut mode_sq = 0.0;
                for node in 0..u.values.len() {
                    let x = b.domain.node_coord(node);
                    let d = frozen.eval_mode(0, t, x, 0.0) - h.eval_mode(0, t, x, 0.0);
                    mode_sq += d * d;
                }
                total += mode_sq * b.domain.volume_weight() / fine as f64;
            }
            total
        };
        let d4 = defect(4);
        let d8 = defect(8);
        let d16 = defect(16);
        assert!(d8 < d4 / 3.0, "{d4} -> {d8}");
        assert!(d16 < d8 / 3.0, "{d8} -> {d16}");
    }

    #[test]
    fn h_assumption_checks() {
        let dom = Domain::unit_interval(64);
        let b = BasisSpec::new(dom, 4);

        // Zero noise passes with all constants zero.
        let report = verify_h_assumptions(&NoiseModel::zero(), &dom, (-5.0, 5.0), 500, 1);
        assert!(report.pass, "{report:?}");

        // Diagonal multiplicative noise passes with its declared constants.
        let amps: Vec<f64> = (1..=4).map(|j| fmath::powf(2.0, -(j as f64))).collect();
        let h = NoiseModel::diagonal_sine(&b, &amps, true);
        let report = verify_h_assumptions(&h, &dom, (-10.0, 10.0), 2000, 2);
        assert!(report.pass, "{report:?}");

        // Quadratic growth violates the linear Lipschitz bound at large
        // lambda.
        let bad = NoiseModel::new(
            vec![Arc::new(move |_t, _x, lambda: f64| lambda * lambda) as ModeFn],
            false,
            1.0,
            1.0,
            |_| 0.0,
        );
        let report = verify_h_assumptions(&bad, &dom, (-50.0, 50.0), 2000, 3);
        assert!(!report.pass);
        assert!(report.lipschitz_excess > 0.0);
    }
}
