//! Semi-implicit Euler-Maruyama integration of
//! du - div A(t, x, grad u) dt = h(u) dW: backward Euler in the monotone
//! operator, explicit left-endpoint evaluation of the noise (the Ito

//! predictability convention), with an energy ledger per step and the
//! approximation cascades in the regularization weight and the mode count.

mod newton;

pub use newton::{step_implicit, NewtonParams};

use alloc::string::String;
use alloc::vec::Vec;

use crate::fmath;
use crate::grid::{Domain, GridError, GridFunction, Trajectory};
use crate::noise::{
    apply_noise, hs_norm_sq, sample_increments, NoiseError, NoiseModel, WienerDraw,
};
use crate::operators::{regularize, Flux};
use crate::orlicz::YoungFunction;

#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    /// The damped Newton loop could not reduce the residual to tolerance.
    NewtonDiverged { step: usize },
    /// A state or residual overflowed; the step is too large.
    NonFiniteState { step: usize },
    /// Picard iterates failed to contract within the iteration budget.
    NoContraction { iterations: usize },
    BadConfig(String),
    Noise(NoiseError),
    Grid(GridError),
}

impl core::fmt::Display for SolverError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SolverError::NewtonDiverged { step } => write!(f, "newton diverged at step {step}"),
            SolverError::NonFiniteState { step } => write!(f, "non-finite state at step {step}"),
            SolverError::NoContraction { iterations } => {
                write!(f, "no contraction after {iterations} fixed-point iterations")
            }
            SolverError::BadConfig(why) => write!(f, "bad solver config: {why}"),
            SolverError::Noise(e) => write!(f, "{e}"),
            SolverError::Grid(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SolverError {}

impl From<NoiseError> for SolverError {
    fn from(e: NoiseError) -> Self {
        SolverError::Noise(e)
    }
}

impl From<GridError> for SolverError {
    fn from(e: GridError) -> Self {
        SolverError::Grid(e)
    }
}

/// The problem data: grid, operator, noise map, initial state.
#[derive(Debug, Clone)]
pub struct Problem {
    pub domain: Domain,
    pub flux: Flux,
    pub noise: NoiseModel,
    pub u0: GridFunction,
}

/// Numerical dials for one solve.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Start time; Brownian increments are keyed by the absolute step index
    /// t0/dt + m, so a solve restarted at a breakpoint reuses the exact
    /// increments of the global solve.
    pub t0: f64,
    /// End time.
    pub horizon: f64,
    pub dt: f64,
    /// Regularization weight for the operator perturbation; 0 disables it.
    pub eps: f64,
    /// The Young function whose gradient the regularization adds.
    pub eps_young: Option<YoungFunction>,
    pub newton_tol: f64,
    pub newton_max: usize,
    pub paths: usize,
    pub seed: u64,
    pub store_trajectory: bool,
    /// Weight exponent of the fixed-point norm sup_m e^(-alpha t_m) |.|.
    pub alpha: f64,
    pub fixed_point_tol: f64,
    pub fixed_point_max: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            t0: 0.0,
            horizon: 1.0,
            dt: 1e-2,
            eps: 0.0,
            eps_young: None,
            newton_tol: 1e-10,
            newton_max: 50,
            paths: 1,
            seed: 0,
            store_trajectory: false,
            alpha: 10.0,
            fixed_point_tol: 1e-8,
            fixed_point_max: 50,
        }
    }
}

impl SolverConfig {
    /// Number of steps; errors unless (horizon - t0) is a whole number of
    /// steps within 1e-9 relative.
    pub fn step_count(&self) -> Result<usize, SolverError> {
        if !(self.dt > 0.0) || !(self.horizon > self.t0) {
            return Err(SolverError::BadConfig(
                "need dt > 0 and horizon > t0".into(),
            ));
        }
        if !(self.newton_tol > 0.0) {
            return Err(SolverError::BadConfig("newton_tol must be > 0".into()));
        }
        let span = self.horizon - self.t0;
        let m = fmath::round(span / self.dt);
        if m < 1.0 || fmath::abs(m * self.dt - span) > 1e-9 * span.max(1.0) {
            return Err(SolverError::BadConfig(
                "horizon - t0 must be a whole number of steps".into(),
            ));
        }
        Ok(m as usize)
    }

    /// Absolute index of the first step, anchoring the increment keys.
    pub fn first_step_index(&self) -> Result<u64, SolverError> {
        if self.t0 == 0.0 {
            return Ok(0);
        }
        let k = fmath::round(self.t0 / self.dt);
        if fmath::abs(k * self.dt - self.t0) > 1e-9 * self.t0.max(1.0) {
            return Err(SolverError::BadConfig(
                "t0 must sit on the step grid".into(),
            ));
        }
        Ok(k as u64)
    }

    fn newton_params(&self) -> NewtonParams {
        NewtonParams {
            tol: self.newton_tol,
            max_iter: self.newton_max,
        }
    }

    /// The operator actually stepped: A itself, or its regularization
    /// A + eps grad m when eps > 0.
    pub fn effective_flux(&self, flux: &Flux) -> Result<Flux, SolverError> {
        if self.eps == 0.0 {
            return Ok(flux.clone());
        }
        let m = self.eps_young.as_ref().ok_or_else(|| {
            SolverError::BadConfig("eps > 0 needs eps_young".into())
        })?;
        Ok(regularize(flux, self.eps, m))
    }
}

/// Per-step energy bookkeeping. The accumulators hold, after row m,
/// the sums over steps up to m of dt <A(grad u), grad u> (right endpoint),
/// dt |h(u)|_HS^2 (left endpoint), and <u^m, h dW> (left endpoint).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow {
    pub step: usize,
    pub t: f64,
    pub norm_sq: f64,
    pub dissipation_acc: f64,
    pub hs_acc: f64,
    pub stoch_acc: f64,
}

/// One path of the scheme: the ledger always, the trajectory on request.
#[derive(Debug, Clone)]
pub struct PathResult {
    pub path_index: u64,
    pub ledger: Vec<LedgerRow>,
    pub trajectory: Option<Trajectory>,
}

impl PathResult {
    /// Ledger row whose time matches `t` within grid tolerance.
    pub fn row_at_time(&self, t: f64) -> Option<&LedgerRow> {
        self.ledger
            .iter()
            .find(|row| fmath::abs(row.t - t) <= 1e-9 * t.abs().max(1.0))
    }

    pub fn final_row(&self) -> &LedgerRow {
        self.ledger.last().expect("ledger is never empty")
    }
}

/// How the noise reads the state: the path's own current state
/// (Euler-Maruyama) or a frozen trajectory (one Picard sweep).
enum NoiseState<'a> {
    Current,
    Frozen(&'a Trajectory),
}

fn solve_path_inner(
    problem: &Problem,
    config: &SolverConfig,
    path_index: u64,
    noise_state: NoiseState<'_>,
    store_trajectory: bool,
) -> Result<PathResult, SolverError> {
    let steps = config.step_count()?;
    let first_step = config.first_step_index()?;
    let flux = config.effective_flux(&problem.flux)?;
    let params = config.newton_params();
    let draw = sample_increments(
        config.seed,
        path_index,
        steps,
        problem.noise.mode_count(),
        config.dt,
        first_step,
    );

    let mut u = problem.u0.clone();
    let mut ledger = Vec::with_capacity(steps + 1);
    ledger.push(LedgerRow {
        step: 0,
        t: config.t0,
        norm_sq: u.l2_norm_sq(),
        dissipation_acc: 0.0,
        hs_acc: 0.0,
        stoch_acc: 0.0,
    });
    let mut frames = Vec::new();
    let mut times = Vec::new();
    if store_trajectory {
        frames.push(u.clone());
        times.push(config.t0);
    }

    let mut dissipation_acc = 0.0;
    let mut hs_acc = 0.0;
    let mut stoch_acc = 0.0;

    for m in 0..steps {
        let t_now = config.t0 + m as f64 * config.dt;
        let t_next = config.t0 + (m + 1) as f64 * config.dt;

        let noise_input = match &noise_state {
            NoiseState::Current => &u,
            NoiseState::Frozen(traj) => &traj.frames[m],
        };
        let kick = apply_noise(&problem.noise, t_now, noise_input, &draw, m)?;
        hs_acc += config.dt * hs_norm_sq(&problem.noise, t_now, noise_input);
        stoch_acc += u.l2_inner(&kick)?;

        let next = step_implicit(&u, t_next, config.dt, &flux, &kick, &params)
            .map_err(|e| tag_step(e, m))?;
        if !next.l2_norm_sq().is_finite() {
            return Err(SolverError::NonFiniteState { step: m });
        }

        let grad = next.gradient();
        let mut diss = 0.0;
        let w = problem.domain.volume_weight();
        for c in 0..grad.vecs.len() {
            let a = flux.eval(t_next, problem.domain.cell_center(c), grad.vecs[c]);
            diss += fmath::dot2(a, grad.vecs[c]);
        }
        dissipation_acc += config.dt * diss * w;

        u = next;
        ledger.push(LedgerRow {
            step: m + 1,
            t: t_next,
            norm_sq: u.l2_norm_sq(),
            dissipation_acc,
            hs_acc,
            stoch_acc,
        });
        if store_trajectory {
            frames.push(u.clone());
            times.push(t_next);
        }
    }

    let trajectory = if store_trajectory {
        Some(Trajectory::new(times, frames)?)
    } else {
        None
    };
    Ok(PathResult {
        path_index,
        ledger,
        trajectory,
    })
}

fn tag_step(e: SolverError, step: usize) -> SolverError {
    match e {
        SolverError::NewtonDiverged { .. } => SolverError::NewtonDiverged { step },
        SolverError::NonFiniteState { .. } => SolverError::NonFiniteState { step },
        other => other,
    }
}

/// Integrates one path with the noise read off the current state
/// (Euler-Maruyama).
pub fn solve_path(
    problem: &Problem,
    config: &SolverConfig,
    path_index: u64,
) -> Result<PathResult, SolverError> {
    solve_path_inner(
        problem,
        config,
        path_index,
        NoiseState::Current,
        config.store_trajectory,
    )
}

#[derive(Debug, Clone)]
pub struct FixedPointStats {
    pub iterations: usize,
    /// Weighted defects sup_m e^(-alpha t_m) |S_{k+1} - S_k| per iteration.
    pub defects: Vec<f64>,
}

/// Banach fixed-point treatment of multiplicative noise: Picard iteration on
/// whole paths against the same Brownian draw, measured in the
/// exponentially weighted sup norm. Additive noise is a constant map and
/// returns after a single solve.
pub fn solve_multiplicative(
    problem: &Problem,
    config: &SolverConfig,
    path_index: u64,
) -> Result<(PathResult, FixedPointStats), SolverError> {
    if problem.noise.additive {
        let result = solve_path(problem, config, path_index)?;
        return Ok((
            result,
            FixedPointStats {
                iterations: 1,
                defects: Vec::new(),
            },
        ));
    }

    let steps = config.step_count()?;
    let times: Vec<f64> = (0..=steps)
        .map(|m| config.t0 + m as f64 * config.dt)
        .collect();
    let zero_frames: Vec<GridFunction> = (0..=steps)
        .map(|_| GridFunction::zeros(problem.domain))
        .collect();
    let mut prev = Trajectory::new(times, zero_frames)?;
    let mut defects = Vec::new();

    for iteration in 1..=config.fixed_point_max {
        let result =
            solve_path_inner(problem, config, path_index, NoiseState::Frozen(&prev), true)?;
        let current = result.trajectory.as_ref().expect("trajectory was stored");

        let mut defect = 0.0f64;
        for m in 0..current.frames.len() {
            let d = current.frames[m].sub(&prev.frames[m])?.l2_norm();
            defect = defect.max(fmath::exp(-config.alpha * current.times[m]) * d);
        }
        defects.push(defect);

        if defect <= config.fixed_point_tol {
            let mut out = result;
            if !config.store_trajectory {
                out.trajectory = None;
            }
            return Ok((
                out,
                FixedPointStats {
                    iterations: iteration,
                    defects,
                },
            ));
        }
        prev = result.trajectory.expect("trajectory was stored");
    }

    Err(SolverError::NoContraction {
        iterations: config.fixed_point_max,
    })
}

/// One row of an approximation-cascade table: Monte Carlo estimate of
/// E sup_m |u_a - u_b|^2 with shared draws for a consecutive dial pair,
/// plus (for the mode cascade) the driving bound int |h_a - h_b|^2_HS dt.
#[derive(Debug, Clone)]
pub struct CascadeRow {
    pub dial_a: f64,
    pub dial_b: Option<f64>,
    pub mean_sup_diff_sq: f64,
    pub stderr: f64,
    pub rhs_bound: Option<f64>,
    pub ratio: Option<f64>,
}

/// Runs the solve at each regularization weight (descending) and measures
/// consecutive differences pathwise with shared draws.
pub fn epsilon_cascade(
    problem: &Problem,
    config: &SolverConfig,
    eps_list: &[f64],
) -> Result<Vec<CascadeRow>, SolverError> {
    if eps_list.is_empty() {
        return Err(SolverError::BadConfig("empty eps list".into()));
    }
    if eps_list.windows(2).any(|w| w[1] > w[0]) {
        return Err(SolverError::BadConfig(
            "eps list must be nonincreasing".into(),
        ));
    }
    if eps_list.len() == 1 {
        return Ok(alloc::vec![CascadeRow {
            dial_a: eps_list[0],
            dial_b: None,
            mean_sup_diff_sq: 0.0,
            stderr: 0.0,
            rhs_bound: None,
            ratio: None,
        }]);
    }

    let mut sup_sq_per_pair: Vec<Vec<f64>> =
        alloc::vec![Vec::with_capacity(config.paths); eps_list.len() - 1];
    for path in 0..config.paths as u64 {
        let mut previous: Option<Trajectory> = None;
        for (k, eps) in eps_list.iter().enumerate() {
            let mut cfg = config.clone();
            cfg.eps = *eps;
            let result = solve_path_inner(problem, &cfg, path, NoiseState::Current, true)?;
            let traj = result.trajectory.expect("trajectory was stored");
            if let Some(prev) = previous.take() {
                let sup = prev.sup_l2_diff(&traj)?;
                sup_sq_per_pair[k - 1].push(sup * sup);
            }
            previous = Some(traj);
        }
    }

    Ok(eps_list
        .windows(2)
        .zip(sup_sq_per_pair)
        .map(|(pair, samples)| {
            let (mean, stderr) = mean_stderr(&samples);
            CascadeRow {
                dial_a: pair[0],
                dial_b: Some(pair[1]),
                mean_sup_diff_sq: mean,
                stderr,
                rhs_bound: None,
                ratio: None,
            }
        })
        .collect())
}

/// Mode-truncation cascade: solves with the first N modes for each N in the
/// ascending list, with shared draws (increment keys are independent of the
/// mode count), and compares E sup |u^{N1} - u^{N2}|^2 against the bound
/// int |h^{N1} - h^{N2}|^2_HS dt.
pub fn noise_mode_cascade(
    problem: &Problem,
    config: &SolverConfig,
    mode_list: &[usize],
) -> Result<Vec<CascadeRow>, SolverError> {
    if mode_list.is_empty() {
        return Err(SolverError::BadConfig("empty mode list".into()));
    }
    if mode_list.windows(2).any(|w| w[1] < w[0]) {
        return Err(SolverError::BadConfig(
            "mode list must be nondecreasing".into(),
        ));
    }
    if mode_list.last().copied().unwrap() > problem.noise.mode_count() {
        return Err(SolverError::BadConfig(
            "mode list exceeds the noise model".into(),
        ));
    }
    if mode_list.len() == 1 {
        return Ok(alloc::vec![CascadeRow {
            dial_a: mode_list[0] as f64,
            dial_b: None,
            mean_sup_diff_sq: 0.0,
            stderr: 0.0,
            rhs_bound: Some(0.0),
            ratio: None,
        }]);
    }

    let steps = config.step_count()?;
    let mut sup_sq_per_pair: Vec<Vec<f64>> =
        alloc::vec![Vec::with_capacity(config.paths); mode_list.len() - 1];
    let mut rhs_per_pair: Vec<f64> = alloc::vec![0.0; mode_list.len() - 1];

    for path in 0..config.paths as u64 {
        let mut previous: Option<(usize, Trajectory)> = None;
        for (k, n) in mode_list.iter().enumerate() {
            let mut sub = problem.clone();
            sub.noise = problem.noise.truncate_modes(*n);
            let result = solve_path_inner(&sub, config, path, NoiseState::Current, true)?;
            let traj = result.trajectory.expect("trajectory was stored");
            if let Some((n_prev, prev)) = previous.take() {
                let sup = prev.sup_l2_diff(&traj)?;
                sup_sq_per_pair[k - 1].push(sup * sup);
                if path == 0 {
                    // The driving bound: left-endpoint time quadrature of the
                    // HS defect of the dropped modes, along the finer path.
                    let mut bound = 0.0;
                    for m in 0..steps {
                        let t = config.t0 + m as f64 * config.dt;
                        let state = &traj.frames[m];
                        let full = sub.noise.clone();
                        let tail_full = hs_norm_sq(&full, t, state);
                        let tail_prev =
                            hs_norm_sq(&problem.noise.truncate_modes(n_prev), t, state);
                        bound += config.dt * (tail_full - tail_prev);
                    }
                    rhs_per_pair[k - 1] = bound;
                }
            }
            previous = Some((*n, traj));
        }
    }

    Ok(mode_list
        .windows(2)
        .zip(sup_sq_per_pair.iter().zip(&rhs_per_pair))
        .map(|(pair, (samples, rhs))| {
            let (mean, stderr) = mean_stderr(samples);
            CascadeRow {
                dial_a: pair[0] as f64,
                dial_b: Some(pair[1] as f64),
                mean_sup_diff_sq: mean,
                stderr,
                rhs_bound: Some(*rhs),
                ratio: if *rhs > 0.0 { Some(mean / rhs) } else { None },
            }
        })
        .collect())
}

/// Sample mean and standard error.
pub fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, fmath::sqrt(var / n as f64))
}

/// Convenience: Brownian draw for a path of this configuration.
pub fn draw_for(problem: &Problem, config: &SolverConfig, path_index: u64) -> Result<WienerDraw, SolverError> {
    Ok(sample_increments(
        config.seed,
        path_index,
        config.step_count()?,
        problem.noise.mode_count(),
        config.dt,
        config.first_step_index()?,
    ))
}
