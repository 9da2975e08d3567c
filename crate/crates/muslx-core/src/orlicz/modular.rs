//! Modulars, Luxemburg norms, and the Hölder defect over Q_T.

use super::nfunction::NFunction;
use super::OrliczError;
use crate::fmath;
use crate::grid::{GridFunction, Trajectory};

const SCALE_CAP: f64 = 1e12;
const SCALE_CAP_EXPANDED: f64 = 1e18;

/// Modular of a space-time field: the Q_T quadrature of M(t, x, |f|).
/// Nonnegative, zero iff the field vanishes; overflow is an error (the
/// modular is +infinity at this resolution).
pub fn modular(m: &NFunction, f: &Trajectory) -> Result<f64, OrliczError> {
    let v = f.qt_quadrature(|t, x, val| m.eval(t, x, fmath::abs(val)));
    if v.is_finite() {
        Ok(v)
    } else {
        Err(OrliczError::NonFiniteModular)
    }
}

/// Modular of a spatial slice at time `t` (integral over D only).
pub fn modular_slice(m: &NFunction, t: f64, f: &GridFunction) -> Result<f64, OrliczError> {
    let w = f.domain.volume_weight();
    let mut total = 0.0;
    for i in 0..f.values.len() {
        total += m.eval(t, f.domain.node_coord(i), fmath::abs(f.values[i]));
    }
    let v = total * w;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(OrliczError::NonFiniteModular)
    }
}

/// Luxemburg norm inf { lambda > 0 : modular(f / lambda) <= 1 } by bisection
/// to relative tolerance 1e-10. Homogeneous of degree one.
pub fn luxemburg_norm(m: &NFunction, f: &Trajectory) -> Result<f64, OrliczError> {
    luxemburg_impl(|lambda| modular_of_scaled(m, f, lambda))
}

/// Luxemburg norm of a spatial slice at time `t`.
pub fn luxemburg_norm_slice(
    m: &NFunction,
    t: f64,
    f: &GridFunction,
) -> Result<f64, OrliczError> {
    luxemburg_impl(|lambda| modular_slice(m, t, &f.scaled(1.0 / lambda)))
}

fn modular_of_scaled(m: &NFunction, f: &Trajectory, lambda: f64) -> Result<f64, OrliczError> {
    let v = f.qt_quadrature(|t, x, val| m.eval(t, x, fmath::abs(val) / lambda));
    if v.is_finite() {
        Ok(v)
    } else {
        Err(OrliczError::NonFiniteModular)
    }
}

fn luxemburg_impl(
    modular_at: impl Fn(f64) -> Result<f64, OrliczError>,
) -> Result<f64, OrliczError> {
    // An overflowing modular counts as "> 1" during the search.
    let above_one = |lambda: f64| -> bool {
        match modular_at(lambda) {
            Ok(v) => v > 1.0,
            Err(OrliczError::NonFiniteModular) => true,
            Err(_) => true,
        }
    };

    if !above_one(1e-12) {
        // Effectively the zero field at this resolution.
        return Ok(0.0);
    }
    let mut hi = 1e-12;
    while above_one(hi) {
        hi *= 2.0;
        if hi > SCALE_CAP {
            // One cap expansion before giving up.
            if hi > SCALE_CAP_EXPANDED {
                return Err(OrliczError::NoFiniteScale);
            }
        }
    }
    let mut lo = hi / 2.0;
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if above_one(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Duality pairing int_{Q_T} f g, with the same midpoint-in-time quadrature
/// as the modular.
pub fn qt_pairing(f: &Trajectory, g: &Trajectory) -> Result<f64, OrliczError> {
    if f.frames.len() != g.frames.len() || f.domain() != g.domain() {
        return Err(OrliczError::Grid(crate::grid::GridError::ShapeMismatch));
    }
    let dom = f.domain();
    let w = dom.volume_weight();
    let mut total = 0.0;
    for mid in 0..f.frames.len() - 1 {
        let dt = f.times[mid + 1] - f.times[mid];
        let mut slab = 0.0;
        for i in 0..f.frames[mid].values.len() {
            let fv = 0.5 * (f.frames[mid].values[i] + f.frames[mid + 1].values[i]);
            let gv = 0.5 * (g.frames[mid].values[i] + g.frames[mid + 1].values[i]);
            slab += fv * gv;
        }
        total += dt * w * slab;
    }
    Ok(total)
}

/// Hölder defect 2 |f|_{L_M} |g|_{L_M*} - int f g; nonnegative up to
/// quadrature slack by the Orlicz-Hölder inequality.
pub fn holder_defect(
    m: &NFunction,
    mstar: &NFunction,
    f: &Trajectory,
    g: &Trajectory,
) -> Result<f64, OrliczError> {
    let nf = luxemburg_norm(m, f)?;
    let ng = luxemburg_norm(mstar, g)?;
    Ok(2.0 * nf * ng - qt_pairing(f, g)?)
}
