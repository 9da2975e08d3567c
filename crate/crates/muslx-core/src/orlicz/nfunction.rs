//! Isotropic N-functions M(t, x, s) sandwiched between two Young functions.

use alloc::string::String;
use alloc::sync::Arc;

use super::young::{AxiomCheck, YoungFunction};
use crate::fmath;
use crate::rng::SampleStream;

type IntegrandFn = Arc<dyn Fn(f64, [f64; 2], f64) -> f64 + Send + Sync>;

/// Isotropic integrand: the third argument is always `|xi|`, so anisotropy
/// is unrepresentable by construction.
#[derive(Clone)]
pub struct NFunction {
    eval: IntegrandFn,
    pub lower: YoungFunction,
    pub upper: YoungFunction,
    pub label: String,
}

impl core::fmt::Debug for NFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("NFunction").field("label", &self.label).finish()
    }
}

impl NFunction {
    pub fn new(
        label: impl Into<String>,
        eval: impl Fn(f64, [f64; 2], f64) -> f64 + Send + Sync + 'static,
        lower: YoungFunction,
        upper: YoungFunction,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            lower,
            upper,
            label: label.into(),
        }
    }

    /// Homogeneous case M(t, x, s) = m(s).
    pub fn from_young(m: YoungFunction) -> Self {
        let label = m.label.clone();
        let inner = m.clone();
        Self {
            eval: Arc::new(move |_, _, s| inner.eval(s)),
            lower: m.clone(),
            upper: m,
            label,
        }
    }

    /// The double-phase integrand s^p/p + a(t,x) s^q/q with 0 <= a <= a_max.
    pub fn double_phase(
        p: f64,
        q: f64,
        a: impl Fn(f64, [f64; 2]) -> f64 + Send + Sync + 'static,
        a_max: f64,
    ) -> Result<Self, super::OrliczError> {
        let lower = YoungFunction::power(p)?;
        let upper = YoungFunction::custom(
            alloc::format!("power:{p}+{a_max}*power:{q}"),
            move |s| fmath::powf(s, p) / p + a_max * fmath::powf(s, q) / q,
            move |s| fmath::powf(s, p - 1.0) + a_max * fmath::powf(s, q - 1.0),
            None,
        )?;
        Ok(Self::new(
            alloc::format!("double_phase:{p},{q}"),
            move |t, x, s| fmath::powf(s, p) / p + a(t, x) * fmath::powf(s, q) / q,
            lower,
            upper,
        ))
    }

    #[inline]
    pub fn eval(&self, t: f64, x: [f64; 2], s: f64) -> f64 {
        (self.eval)(t, x, s)
    }
}

#[derive(Debug, Clone)]
pub struct NBoundsReport {
    /// lower(s) <= M(t,x,s) on samples.
    pub lower_bound: AxiomCheck,
    /// M(t,x,s) <= upper(s) on samples.
    pub upper_bound: AxiomCheck,
    /// Convexity of s -> M(t,x,s) on sampled triples.
    pub convexity: AxiomCheck,
}

impl NBoundsReport {
    pub fn pass(&self) -> bool {
        self.lower_bound.pass && self.upper_bound.pass && self.convexity.pass
    }
}

/// Samples the N-function sandwich N4 and convexity in the scalar argument;
/// (t, x) range over (0,1) x (0,1)^2, s log-uniform.
pub fn check_nfunction_bounds(m: &NFunction, sample_count: usize) -> NBoundsReport {
    let n = sample_count.max(1);
    let mut stream = SampleStream::new(0x4e_46_55_4e);
    let mut s_hi = 1e3;
    while s_hi > 1.0 && !m.upper.eval(s_hi).is_finite() {
        s_hi /= 2.0;
    }

    let mut lower_bound = AxiomCheck {
        pass: true,
        worst: f64::INFINITY,
        witness: 0.0,
    };
    let mut upper_bound = AxiomCheck {
        pass: true,
        worst: f64::INFINITY,
        witness: 0.0,
    };
    let mut convexity = AxiomCheck {
        pass: true,
        worst: f64::INFINITY,
        witness: 0.0,
    };

    for _ in 0..n {
        let t = stream.uniform();
        let x = [stream.uniform(), stream.uniform()];
        let s = stream.log_range(1e-4, s_hi);
        let v = m.eval(t, x, s);
        let lo_margin = v - m.lower.eval(s);
        if lo_margin < lower_bound.worst {
            lower_bound = AxiomCheck {
                pass: lo_margin >= -1e-12 * v.abs().max(1.0),
                worst: lo_margin,
                witness: s,
            };
        }
        let hi_margin = m.upper.eval(s) - v;
        if hi_margin < upper_bound.worst {
            upper_bound = AxiomCheck {
                pass: hi_margin >= -1e-12 * v.abs().max(1.0),
                worst: hi_margin,
                witness: s,
            };
        }
        let a = stream.log_range(1e-4, s_hi / 4.0);
        let b = a * stream.range(1.1, 2.0);
        let c = b * stream.range(1.1, 2.0);
        let d1 = (m.eval(t, x, b) - m.eval(t, x, a)) / (b - a);
        let d2 = (m.eval(t, x, c) - m.eval(t, x, b)) / (c - b);
        let dd = (d2 - d1) / (c - a);
        if dd < convexity.worst {
            convexity = AxiomCheck {
                pass: dd >= -1e-10,
                worst: dd,
                witness: b,
            };
        }
    }

    NBoundsReport {
        lower_bound,
        upper_bound,
        convexity,
    }
}

/// Sampled ratio M(t,x,r)/M(t,y,r) over random (t, x, y, r).
///
/// This is only a diagnostic for the spatial-continuity envelope: the
/// limsup condition on the majorant cannot be certified from finitely many
/// samples, so no pass/fail verdict is attached.
#[derive(Debug, Clone, Copy)]
pub struct ThetaDiagnostic {
    pub max_ratio: f64,
    pub witness_t: f64,
    pub witness_x: [f64; 2],
    pub witness_y: [f64; 2],
    pub witness_r: f64,
}

pub fn theta_ratio_diagnostic(m: &NFunction, sample_count: usize) -> ThetaDiagnostic {
    let mut stream = SampleStream::new(0x54_48_45_54_41);
    let mut out = ThetaDiagnostic {
        max_ratio: 0.0,
        witness_t: 0.0,
        witness_x: [0.0; 2],
        witness_y: [0.0; 2],
        witness_r: 0.0,
    };
    for _ in 0..sample_count.max(1) {
        let t = stream.uniform();
        let x = [stream.uniform(), stream.uniform()];
        let y = [stream.uniform(), stream.uniform()];
        let r = stream.log_range(1e-3, 1e3);
        let denom = m.eval(t, y, r);
        if denom <= 0.0 {
            continue;
        }
        let ratio = m.eval(t, x, r) / denom;
        if ratio > out.max_ratio {
            out = ThetaDiagnostic {
                max_ratio: ratio,
                witness_t: t,
                witness_x: x,
                witness_y: y,
                witness_r: r,
            };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homogeneous_nfunction_respects_bounds() {
        let m = NFunction::from_young(YoungFunction::power(2.0).unwrap());
        let report = check_nfunction_bounds(&m, 500);
        assert!(report.pass(), "{report:?}");
    }

    #[test]
    fn double_phase_respects_bounds() {
        let m = NFunction::double_phase(2.0, 4.0, |_, x| x[0], 1.0).unwrap();
        let report = check_nfunction_bounds(&m, 500);
        assert!(report.pass(), "{report:?}");
    }

    #[test]
    fn violated_sandwich_is_flagged() {
        // Claim an upper bound that is actually below M.
        let m = NFunction::new(
            "bad",
            |_, _, s| s * s,
            YoungFunction::power(2.0).unwrap(),
            YoungFunction::power(2.0).unwrap(), // s^2/2 < s^2
        );
        let report = check_nfunction_bounds(&m, 200);
        assert!(!report.upper_bound.pass);
    }

    #[test]
    fn theta_diagnostic_is_one_for_homogeneous() {
        let m = NFunction::from_young(YoungFunction::power(3.0).unwrap());
        let d = theta_ratio_diagnostic(&m, 200);
        assert!((d.max_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn theta_diagnostic_sees_spatial_variation() {
        let m = NFunction::double_phase(2.0, 4.0, |_, x| x[0], 1.0).unwrap();
        let d = theta_ratio_diagnostic(&m, 2000);
        assert!(d.max_ratio > 1.0);
    }
}
