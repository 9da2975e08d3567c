//! Flux operators and the exponent fields that drive them.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::OperatorError;
use crate::fmath;
use crate::grid::Domain;
use crate::orlicz::YoungFunction;

type FluxFn = Arc<dyn Fn(f64, [f64; 2], [f64; 2]) -> [f64; 2] + Send + Sync>;
type PotentialFn = Arc<dyn Fn(f64, [f64; 2], [f64; 2]) -> f64 + Send + Sync>;
type JacobianFn = Arc<dyn Fn(f64, [f64; 2], [f64; 2]) -> [[f64; 2]; 2] + Send + Sync>;
type FieldFn = Arc<dyn Fn(f64, [f64; 2]) -> f64 + Send + Sync>;

/// Spatial profile of an exponent or coefficient: constant or affine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpatialExpr {
    Constant(f64),
    Affine { a0: f64, ax: f64, ay: f64 },
}

impl SpatialExpr {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match *self {
            SpatialExpr::Constant(c) => c,
            SpatialExpr::Affine { a0, ax, ay } => a0 + ax * x[0] + ay * x[1],
        }
    }

    /// Minimum over the closed box [lo, hi]^2; affine profiles attain it at
    /// a corner.
    fn min_over(&self, lo: f64, hi: f64) -> f64 {
        match *self {
            SpatialExpr::Constant(c) => c,
            SpatialExpr::Affine { .. } => {
                let mut m = f64::INFINITY;
                for &cx in &[lo, hi] {
                    for &cy in &[lo, hi] {
                        m = m.min(self.eval([cx, cy]));
                    }
                }
                m
            }
        }
    }
}

/// Exponent p(t, x): piecewise in time (right-continuous, so piece `i` is
/// active on [breakpoints[i-1], breakpoints[i])) with a constant or affine
/// spatial profile per piece. Lookups snap to a breakpoint within 1e-9 so
/// that nominally breakpoint-aligned step times hit the intended piece
/// regardless of how they were accumulated.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentField {
    pub breakpoints: Vec<f64>,
    pub pieces: Vec<SpatialExpr>,
}

impl ExponentField {
    pub fn constant(p: f64) -> Self {
        Self {
            breakpoints: Vec::new(),
            pieces: alloc::vec![SpatialExpr::Constant(p)],
        }
    }

    pub fn piecewise(breakpoints: Vec<f64>, pieces: Vec<SpatialExpr>) -> Result<Self, OperatorError> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(OperatorError::Rejected(
                "need exactly one more piece than breakpoints".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(OperatorError::Rejected(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            breakpoints,
            pieces,
        })
    }

    pub fn piece_index(&self, t: f64) -> usize {
        let tol = 1e-9 * fmath::abs(t).max(1.0);
        self.breakpoints.iter().filter(|b| **b <= t + tol).count()
    }

    pub fn eval(&self, t: f64, x: [f64; 2]) -> f64 {
        self.pieces[self.piece_index(t)].eval(x)
    }

    fn min_over_domain(&self, domain: &Domain) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.min_over(domain.lo, domain.hi))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Pointwise operator A(t, x, xi), optionally with a scalar potential whose
/// xi-gradient is A and with declared coercivity constants (c, g).
#[derive(Clone)]
pub struct Flux {
    eval: FluxFn,
    potential: Option<PotentialFn>,
    jacobian: Option<JacobianFn>,
    pub coercivity: Option<(f64, FieldFn)>,
    pub label: String,
}

impl core::fmt::Debug for Flux {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Flux").field("label", &self.label).finish()
    }
}

impl Flux {
    pub fn new(
        label: impl Into<String>,
        eval: impl Fn(f64, [f64; 2], [f64; 2]) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            potential: None,
            jacobian: None,
            coercivity: None,
            label: label.into(),
        }
    }

    pub fn with_potential(
        mut self,
        potential: impl Fn(f64, [f64; 2], [f64; 2]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.potential = Some(Arc::new(potential));
        self
    }

    pub fn with_jacobian(
        mut self,
        jacobian: impl Fn(f64, [f64; 2], [f64; 2]) -> [[f64; 2]; 2] + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    pub fn with_coercivity(
        mut self,
        c: f64,
        g: impl Fn(f64, [f64; 2]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.coercivity = Some((c, Arc::new(g)));
        self
    }

    #[inline]
    pub fn eval(&self, t: f64, x: [f64; 2], xi: [f64; 2]) -> [f64; 2] {
        (self.eval)(t, x, xi)
    }

    pub fn has_potential(&self) -> bool {
        self.potential.is_some()
    }

    pub fn potential_at(&self, t: f64, x: [f64; 2], xi: [f64; 2]) -> Option<f64> {
        self.potential.as_ref().map(|p| p(t, x, xi))
    }

    /// Jacobian of xi -> A(t, x, xi): analytic when supplied, otherwise a
    /// symmetrized central finite difference.
    pub fn jacobian_at(&self, t: f64, x: [f64; 2], xi: [f64; 2]) -> [[f64; 2]; 2] {
        if let Some(j) = &self.jacobian {
            return j(t, x, xi);
        }
        let mut out = [[0.0; 2]; 2];
        for col in 0..2 {
            let h = 1e-6 * fmath::norm2(xi).max(1e-3);
            let mut hi = xi;
            let mut lo = xi;
            hi[col] += h;
            lo[col] -= h;
            let ahi = self.eval(t, x, hi);
            let alo = self.eval(t, x, lo);
            out[0][col] = (ahi[0] - alo[0]) / (2.0 * h);
            out[1][col] = (ahi[1] - alo[1]) / (2.0 * h);
        }
        // Symmetrize: the Newton solve wants a symmetric local matrix.
        let off = 0.5 * (out[0][1] + out[1][0]);
        out[0][1] = off;
        out[1][0] = off;
        out
    }
}

fn power_part(s2: f64, exponent: f64, xi: [f64; 2]) -> [f64; 2] {
    // |xi|^(exponent-2) xi written on squared radius, with the zero
    // convention at the origin.
    if s2 == 0.0 {
        return [0.0; 2];
    }
    let factor = fmath::powf(s2, 0.5 * (exponent - 2.0));
    [factor * xi[0], factor * xi[1]]
}

fn power_jacobian(s2: f64, exponent: f64, xi: [f64; 2]) -> [[f64; 2]; 2] {
    let s2 = s2.max(1e-30);
    let a = fmath::powf(s2, 0.5 * (exponent - 2.0));
    let b = (exponent - 2.0) * fmath::powf(s2, 0.5 * (exponent - 4.0));
    [
        [a + b * xi[0] * xi[0], b * xi[0] * xi[1]],
        [b * xi[0] * xi[1], a + b * xi[1] * xi[1]],
    ]
}

/// A(t,x,xi) = (delta^2 + |xi|^2)^((p(t,x)-2)/2) xi, the p(t,x)-Laplacian
/// flux, with potential (delta^2+|xi|^2)^(p/2)/p. With delta = 0 the
/// origin uses the A(.,0) = 0 convention. Carries the exact coercivity pair
/// (c, g) = (1, 0) for M = |xi|^p/p.
pub fn plaplace_flux(
    p: ExponentField,
    delta_reg: f64,
    domain: &Domain,
) -> Result<Flux, OperatorError> {
    if !(delta_reg >= 0.0) {
        return Err(OperatorError::Rejected("delta must be >= 0".into()));
    }
    let p_min = p.min_over_domain(domain);
    if !(p_min > 1.0) {
        return Err(OperatorError::Rejected(format!(
            "exponent field reaches {p_min} <= 1"
        )));
    }
    let d2 = delta_reg * delta_reg;
    let label = format!("plaplace(delta={delta_reg})");
    let p_eval = p.clone();
    let p_pot = p.clone();
    let p_jac = p;
    Ok(Flux::new(label, move |t, x, xi| {
        let s2 = d2 + xi[0] * xi[0] + xi[1] * xi[1];
        power_part(s2, p_eval.eval(t, x), xi)
    })
    .with_potential(move |t, x, xi| {
        let pp = p_pot.eval(t, x);
        fmath::powf(d2 + xi[0] * xi[0] + xi[1] * xi[1], 0.5 * pp) / pp
    })
    .with_jacobian(move |t, x, xi| {
        let s2 = d2 + xi[0] * xi[0] + xi[1] * xi[1];
        power_jacobian(s2, p_jac.eval(t, x), xi)
    })
    .with_coercivity(1.0, |_, _| 0.0))
}

/// The identity flux A(xi) = xi (p = 2 heat operator).
pub fn linear_flux(domain: &Domain) -> Flux {
    plaplace_flux(ExponentField::constant(2.0), 0.0, domain).expect("p = 2 is valid")
}

/// Double-phase flux |xi|^(p-2) xi + a(t,x) |xi|^(q-2) xi for 1 < p <= q and
/// a >= 0, with the matching potential.
pub fn double_phase_flux(
    p: f64,
    q: f64,
    a: impl Fn(f64, [f64; 2]) -> f64 + Send + Sync + 'static,
) -> Result<Flux, OperatorError> {
    if !(p > 1.0) {
        return Err(OperatorError::Rejected(format!("p = {p} <= 1")));
    }
    if q < p {
        return Err(OperatorError::Rejected(format!("q = {q} < p = {p}")));
    }
    let a: FieldFn = Arc::new(a);
    // Cheap sampled nonnegativity screen over the unit ranges.
    {
        let mut stream = crate::rng::SampleStream::new(0xd0b1e);
        for _ in 0..256 {
            let t = stream.uniform();
            let x = [stream.uniform(), stream.uniform()];
            let v = a(t, x);
            if v < 0.0 {
                return Err(OperatorError::Rejected(format!(
                    "coefficient a({t}, {x:?}) = {v} < 0"
                )));
            }
        }
    }
    let a_eval = a.clone();
    let a_pot = a.clone();
    let a_jac = a;
    Ok(Flux::new(format!("double_phase({p},{q})"), move |t, x, xi| {
        let s2 = xi[0] * xi[0] + xi[1] * xi[1];
        let lo = power_part(s2, p, xi);
        let hi = power_part(s2, q, xi);
        let av = a_eval(t, x);
        [lo[0] + av * hi[0], lo[1] + av * hi[1]]
    })
    .with_potential(move |t, x, xi| {
        let s2 = xi[0] * xi[0] + xi[1] * xi[1];
        fmath::powf(s2, 0.5 * p) / p + a_pot(t, x) * fmath::powf(s2, 0.5 * q) / q
    })
    .with_jacobian(move |t, x, xi| {
        let s2 = xi[0] * xi[0] + xi[1] * xi[1];
        let jl = power_jacobian(s2, p, xi);
        let jh = power_jacobian(s2, q, xi);
        let av = a_jac(t, x);
        [
            [jl[0][0] + av * jh[0][0], jl[0][1] + av * jh[0][1]],
            [jl[1][0] + av * jh[1][0], jl[1][1] + av * jh[1][1]],
        ]
    }))
}

/// The regularized operator A + eps * grad_xi m(|xi|), which pushes the flux
/// into the dual Orlicz class of `m`. Potentials add (the extra term is
/// eps * m(|xi|)); the Jacobian uses a finite difference of m' for the
/// radial curvature.
pub fn regularize(a: &Flux, eps: f64, m: &YoungFunction) -> Flux {
    let base_eval = a.eval.clone();
    let base_pot = a.potential.clone();
    let base_jac = a.jacobian.clone();
    let m_eval = m.clone();
    let m_pot = m.clone();
    let m_jac = m.clone();

    let mut out = Flux::new(
        format!("{}+{eps}*grad {}", a.label, m.label),
        move |t, x, xi| {
            let base = base_eval(t, x, xi);
            let s = fmath::norm2(xi);
            if s == 0.0 {
                return base;
            }
            let scale = eps * m_eval.deriv(s) / s;
            [base[0] + scale * xi[0], base[1] + scale * xi[1]]
        },
    );
    if let Some(pot) = base_pot {
        out = out.with_potential(move |t, x, xi| {
            pot(t, x, xi) + eps * m_pot.eval(fmath::norm2(xi))
        });
    }
    if let Some(jac) = base_jac {
        out = out.with_jacobian(move |t, x, xi| {
            let mut j = jac(t, x, xi);
            let s = fmath::norm2(xi).max(1e-15);
            let d1 = m_jac.deriv(s);
            let h = 1e-6 * s;
            let d2 = (m_jac.deriv(s + h) - m_jac.deriv(s - h)) / (2.0 * h);
            let radial = d1 / s;
            let aniso = (d2 - radial) / (s * s);
            j[0][0] += eps * (radial + aniso * xi[0] * xi[0]);
            j[0][1] += eps * aniso * xi[0] * xi[1];
            j[1][0] += eps * aniso * xi[0] * xi[1];
            j[1][1] += eps * (radial + aniso * xi[1] * xi[1]);
            j
        });
    }
    out
}
