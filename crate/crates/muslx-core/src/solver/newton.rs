//! The monotone implicit step: damped Newton with a matrix-free conjugate
//! gradient inner solve.
//!
//! One backward-Euler increment solves, in the discrete weak sense,
//!
//! ```text
//!     <u, v> + dt <A(t, x, grad u), grad v> = <rhs, v>   for all grid v,
//! ```
//!
//! equivalently R(u) = u - rhs - dt div A(t, x, grad u) = 0, since the
//! divergence is the exact negative adjoint of the gradient. When the flux
//! has a potential, the same root is the minimizer of
//! J(u) = |u - rhs|^2/2 + dt int Phi(t, x, grad u), and the line search
//! monitors J; otherwise it monitors |R|.

use alloc::vec;
use alloc::vec::Vec;

use super::SolverError;
use crate::grid::{GradientField, GridFunction};
use crate::operators::Flux;

#[derive(Debug, Clone, Copy)]
pub struct NewtonParams {
    /// Exit when |R|_{L^2} <= tol * (1 + |u_prev|).
    pub tol: f64,
    /// Maximum Newton iterations.
    pub max_iter: usize,
}

impl Default for NewtonParams {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
        }
    }
}

const MAX_HALVINGS: usize = 30;

/// Residual field R(u) = u - rhs - dt div A(t, x, grad u).
fn residual(u: &GridFunction, rhs: &GridFunction, t: f64, dt: f64, flux: &Flux) -> GridFunction {
    let grad = u.gradient();
    let mut stress = GradientField::zeros(u.domain);
    for c in 0..stress.vecs.len() {
        stress.vecs[c] = flux.eval(t, u.domain.cell_center(c), grad.vecs[c]);
    }
    let div = stress.divergence();
    let mut out = GridFunction::zeros(u.domain);
    for i in 0..out.values.len() {
        out.values[i] = u.values[i] - rhs.values[i] - dt * div.values[i];
    }
    out
}

fn objective(u: &GridFunction, rhs: &GridFunction, t: f64, dt: f64, flux: &Flux) -> f64 {
    let w = u.domain.volume_weight();
    let mut quad = 0.0;
    for i in 0..u.values.len() {
        let d = u.values[i] - rhs.values[i];
        quad += d * d;
    }
    let grad = u.gradient();
    let mut pot = 0.0;
    for c in 0..grad.vecs.len() {
        pot += flux
            .potential_at(t, u.domain.cell_center(c), grad.vecs[c])
            .expect("objective needs a potential");
    }
    0.5 * w * quad + dt * w * pot
}

/// Applies v -> v + dt (-div)(J grad v) with frozen per-cell Jacobians.
fn hessian_apply(
    v: &[f64],
    out: &mut [f64],
    jacobians: &[[[f64; 2]; 2]],
    dt: f64,
    scratch: &mut GridFunction,
) {
    scratch.values.copy_from_slice(v);
    let grad = scratch.gradient();
    let mut mapped = GradientField::zeros(scratch.domain);
    for c in 0..mapped.vecs.len() {
        let g = grad.vecs[c];
        let j = &jacobians[c];
        mapped.vecs[c] = [
            j[0][0] * g[0] + j[0][1] * g[1],
            j[1][0] * g[0] + j[1][1] * g[1],
        ];
    }
    let div = mapped.divergence();
    for i in 0..out.len() {
        out[i] = v[i] - dt * div.values[i];
    }
}

/// Unpreconditioned CG on the (symmetric positive definite) Newton system.
/// Returns the iteration count.
fn conjugate_gradient(
    jacobians: &[[[f64; 2]; 2]],
    dt: f64,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    scratch: &mut GridFunction,
) -> usize {
    let n = b.len();
    let dot = |a: &[f64], c: &[f64]| -> f64 { a.iter().zip(c).map(|(p, q)| p * q).sum() };
    x.iter_mut().for_each(|v| *v = 0.0);
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let b_norm_sq = dot(b, b);
    if b_norm_sq == 0.0 {
        return 0;
    }
    let target = rel_tol * rel_tol * b_norm_sq;
    let mut rr = b_norm_sq;
    let max_iter = 20 * n + 100;
    for iter in 0..max_iter {
        hessian_apply(&p, &mut ap, jacobians, dt, scratch);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            // Curvature loss from a non-PSD local Jacobian; the damped outer
            // loop copes with whatever partial step we have.
            return iter;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_next = dot(&r, &r);
        if rr_next <= target {
            return iter + 1;
        }
        let beta = rr_next / rr;
        rr = rr_next;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    max_iter
}

/// One backward-Euler increment: solves u - dt div A(t_next, x, grad u) =
/// u_prev + forcing. The returned state satisfies
/// |R(u)|_{L^2} <= tol (1 + |u_prev|).
pub fn step_implicit(
    u_prev: &GridFunction,
    t_next: f64,
    dt: f64,
    flux: &Flux,
    forcing: &GridFunction,
    params: &NewtonParams,
) -> Result<GridFunction, SolverError> {
    let rhs = u_prev.add(forcing).map_err(SolverError::Grid)?;
    let tol = params.tol * (1.0 + u_prev.l2_norm());
    let use_objective = flux.has_potential();

    let mut u = rhs.clone();
    let mut scratch = GridFunction::zeros(u.domain);
    let mut merit = if use_objective {
        objective(&u, &rhs, t_next, dt, flux)
    } else {
        residual(&u, &rhs, t_next, dt, flux).l2_norm()
    };

    for _ in 0..params.max_iter {
        let r = residual(&u, &rhs, t_next, dt, flux);
        let r_norm = r.l2_norm();
        if !r_norm.is_finite() {
            return Err(SolverError::NonFiniteState { step: 0 });
        }
        if r_norm <= tol {
            return Ok(u);
        }

        // Freeze the per-cell flux Jacobians at the current gradient.
        let grad = u.gradient();
        let jacobians: Vec<[[f64; 2]; 2]> = (0..grad.vecs.len())
            .map(|c| flux.jacobian_at(t_next, u.domain.cell_center(c), grad.vecs[c]))
            .collect();

        let neg_r: Vec<f64> = r.values.iter().map(|v| -v).collect();
        let cg_rel = (tol / (2.0 * r_norm)).clamp(1e-12, 1e-2);
        let mut delta = vec![0.0; neg_r.len()];
        conjugate_gradient(&jacobians, dt, &neg_r, &mut delta, cg_rel, &mut scratch);

        // Damped update: halve until the merit decreases.
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let mut trial = u.clone();
            for i in 0..trial.values.len() {
                trial.values[i] += alpha * delta[i];
            }
            let trial_merit = if use_objective {
                objective(&trial, &rhs, t_next, dt, flux)
            } else {
                residual(&trial, &rhs, t_next, dt, flux).l2_norm()
            };
            if trial_merit.is_finite() && trial_merit < merit {
                u = trial;
                merit = trial_merit;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // No decrease even at the smallest damping: either converged to
            // merit floor or genuinely stuck; decide by the residual.
            let r_now = residual(&u, &rhs, t_next, dt, flux).l2_norm();
            if r_now <= tol {
                return Ok(u);
            }
            return Err(SolverError::NewtonDiverged { step: 0 });
        }
    }

    let r_final = residual(&u, &rhs, t_next, dt, flux).l2_norm();
    if r_final <= tol {
        Ok(u)
    } else {
        Err(SolverError::NewtonDiverged { step: 0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Domain;
    use crate::operators::{plaplace_flux, ExponentField};
    use crate::rng::SampleStream;

    /// Direct tridiagonal oracle for (I + dt L_h) u = b with the standard
    /// 1-D Dirichlet second-difference matrix (Thomas algorithm).
    fn tridiagonal_oracle(b: &[f64], dt: f64, h: f64) -> Vec<f64> {
        let n = b.len();
        let lam = dt / (h * h);
        let diag = 1.0 + 2.0 * lam;
        let off = -lam;
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        c[0] = off / diag;
        d[0] = b[0] / diag;
        for i in 1..n {
            let m = diag - off * c[i - 1];
            c[i] = off / m;
            d[i] = (b[i] - off * d[i - 1]) / m;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    }

    #[test]
    fn linear_step_matches_tridiagonal_solve() {
        let dom = Domain::unit_interval(128);
        let flux = plaplace_flux(ExponentField::constant(2.0), 0.0, &dom).unwrap();
        let mut stream = SampleStream::new(31);
        let u_prev = GridFunction::from_fn(dom, |x| {
            crate::fmath::sin(3.0 * x[0]) + 0.2 * x[0]
        });
        let forcing = GridFunction::from_values(
            dom,
            (0..dom.node_count()).map(|_| stream.range(-0.1, 0.1)).collect(),
        )
        .unwrap();
        let dt = 1e-3;
        let params = NewtonParams {
            tol: 1e-12,
            max_iter: 50,
        };
        let got = step_implicit(&u_prev, 0.0, dt, &flux, &forcing, &params).unwrap();
        let rhs = u_prev.add(&forcing).unwrap();
        let oracle = tridiagonal_oracle(&rhs.values, dt, dom.spacing());
        for i in 0..oracle.len() {
            assert!(
                (got.values[i] - oracle[i]).abs() < 1e-10,
                "node {i}: {} vs {}",
                got.values[i],
                oracle[i]
            );
        }
    }

    #[test]
    fn eigenmode_contracts_by_resolvent_factor() {
        // u_prev = e_1, zero forcing: the step divides by 1 + dt mu_1 with
        // the discrete eigenvalue mu_1.
        let dom = Domain::unit_interval(256);
        let basis = crate::noise::BasisSpec::new(dom, 1);
        let flux = plaplace_flux(ExponentField::constant(2.0), 0.0, &dom).unwrap();
        let e1 = basis.field(0);
        let dt = 1e-2;
        let params = NewtonParams::default();
        let got = step_implicit(&e1, 0.0, dt, &flux, &GridFunction::zeros(dom), &params).unwrap();
        let mu1 = basis.laplacian_eigenvalue_1d(0);
        let factor = 1.0 / (1.0 + dt * mu1);
        for i in 0..got.values.len() {
            assert!(
                (got.values[i] - factor * e1.values[i]).abs() < 1e-9,
                "node {i}"
            );
        }
    }

    #[test]
    fn zero_data_is_a_fixed_point() {
        let dom = Domain::unit_interval(32);
        let flux = plaplace_flux(ExponentField::constant(4.0), 0.0, &dom).unwrap();
        let zero = GridFunction::zeros(dom);
        let got =
            step_implicit(&zero, 0.5, 0.1, &flux, &zero, &NewtonParams::default()).unwrap();
        assert!(got.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn nonlinear_step_weak_residual_under_random_tests() {
        // p = 4, small random data: check the weak form against 100 random
        // test functions.
        let dom = Domain::unit_interval(64);
        let flux = plaplace_flux(ExponentField::constant(4.0), 0.0, &dom).unwrap();
        let mut stream = SampleStream::new(77);
        let u_prev = GridFunction::from_values(
            dom,
            (0..dom.node_count()).map(|_| stream.range(-0.3, 0.3)).collect(),
        )
        .unwrap();
        let dt = 1e-2;
        let tol = 1e-10;
        let params = NewtonParams { tol, max_iter: 50 };
        let zero = GridFunction::zeros(dom);
        let u = step_implicit(&u_prev, 0.3, dt, &flux, &zero, &params).unwrap();

        let grad = u.gradient();
        let mut stress = GradientField::zeros(dom);
        for c in 0..stress.vecs.len() {
            stress.vecs[c] = flux.eval(0.3, dom.cell_center(c), grad.vecs[c]);
        }
        let bound = tol * (1.0 + u_prev.l2_norm());
        for _ in 0..100 {
            let v = GridFunction::from_values(
                dom,
                (0..dom.node_count()).map(|_| stream.range(-1.0, 1.0)).collect(),
            )
            .unwrap();
            let weak = u.l2_inner(&v).unwrap() + dt * stress.inner(&v.gradient()).unwrap()
                - u_prev.l2_inner(&v).unwrap();
            // |<R, v>| <= |R| |v|.
            assert!(
                weak.abs() <= bound * v.l2_norm() * 1.01,
                "weak residual {weak}"
            );
        }
    }

    #[test]
    fn two_dimensional_linear_step_damps_tensor_mode() {
        let dom = Domain::unit_square(24);
        let flux = plaplace_flux(ExponentField::constant(2.0), 0.0, &dom).unwrap();
        let basis = crate::noise::BasisSpec::new(dom, 1);
        let e11 = basis.field(0);
        let dt = 1e-2;
        let u = step_implicit(&e11, 0.0, dt, &flux, &GridFunction::zeros(dom), &NewtonParams::default())
            .unwrap();
        // The Q1-center discretization damps the (1,1) mode by some factor in
        // (0, 1); it need not match the 5-point-stencil eigenvalue, but it
        // must stay a pure mode.
        let c = u.l2_inner(&e11).unwrap();
        assert!(c > 0.0 && c < 1.0, "contraction {c}");
        let residual_mode = u.sub(&e11.scaled(c)).unwrap().l2_norm();
        assert!(residual_mode < 1e-8, "mode mixing {residual_mode}");
    }
}
