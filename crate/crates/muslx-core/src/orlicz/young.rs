//! Scalar Young functions: convex, superlinear, vanishing only at zero.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;

use super::OrliczError;
use crate::fmath;
use crate::rng::SampleStream;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Declared growth envelope: m(s) <= K exp(B s^(1+beta)) with beta < 1, the
/// regime in which Gaussian tails keep every modular of a stochastic
/// integral finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthParams {
    pub b: f64,
    pub beta: f64,
}

/// A Young function together with its derivative.
///
/// Values are dimensionless; the derivative is what the conjugate bracket
/// search and the operator regularization consume.
#[derive(Clone)]
pub struct YoungFunction {
    eval: ScalarFn,
    deriv: ScalarFn,
    pub label: String,
    pub growth_params: Option<GrowthParams>,
}

impl core::fmt::Debug for YoungFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("YoungFunction")
            .field("label", &self.label)
            .field("growth_params", &self.growth_params)
            .finish()
    }
}

impl YoungFunction {
    /// Wraps user closures after a cheap construction-time sanity pass:
    /// m(0) = 0, positivity at a few points, convexity on a few triples.
    pub fn custom(
        label: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
        growth_params: Option<GrowthParams>,
    ) -> Result<Self, OrliczError> {
        let candidate = Self {
            eval: Arc::new(eval),
            deriv: Arc::new(deriv),
            label: label.into(),
            growth_params,
        };
        candidate.construction_sanity()?;
        Ok(candidate)
    }

    fn construction_sanity(&self) -> Result<(), OrliczError> {
        if self.eval(0.0) != 0.0 {
            return Err(OrliczError::Rejected(format!(
                "{}: m(0) must be 0",
                self.label
            )));
        }
        for s in [1e-3, 1e-1, 1.0, 10.0] {
            let v = self.eval(s);
            if !(v > 0.0) {
                return Err(OrliczError::Rejected(format!(
                    "{}: m({s}) = {v} is not positive",
                    self.label
                )));
            }
        }
        for (a, b, c) in [(0.0, 0.5, 1.0), (0.1, 1.0, 2.0), (1.0, 3.0, 9.0)] {
            if second_divided_difference(|s| self.eval(s), a, b, c) < -1e-10 {
                return Err(OrliczError::Rejected(format!(
                    "{}: not convex near ({a}, {b}, {c})",
                    self.label
                )));
            }
        }
        Ok(())
    }

    /// m(s) = s^p / p for p > 1; conjugate pair of `power(p')`.
    pub fn power(p: f64) -> Result<Self, OrliczError> {
        if !(p > 1.0) {
            return Err(OrliczError::Rejected(format!("power exponent {p} <= 1")));
        }
        Self::custom(
            format!("power:{p}"),
            move |s| fmath::powf(s, p) / p,
            move |s| fmath::powf(s, p - 1.0),
            None,
        )
    }

    /// m(s) = s^p for p > 1; the unnormalized power scale used by the plain
    /// modular examples.
    pub fn power_plain(p: f64) -> Self {
        assert!(p > 1.0, "power_plain exponent must exceed 1");
        Self::custom(
            format!("power_plain:{p}"),
            move |s| fmath::powf(s, p),
            move |s| p * fmath::powf(s, p - 1.0),
            None,
        )
        .expect("plain powers are Young functions")
    }

    /// m(s) = exp(B s^(1+beta)) - 1 with 0 < beta < 1.
    pub fn exp_beta(b: f64, beta: f64) -> Result<Self, OrliczError> {
        if !(b > 0.0) || !(beta > 0.0 && beta < 1.0) {
            return Err(OrliczError::Rejected(format!(
                "exp_beta needs B > 0 and beta in (0,1), got ({b}, {beta})"
            )));
        }
        let q = 1.0 + beta;
        Self::custom(
            format!("exp_beta:{b},{beta}"),
            move |s| fmath::exp_m1(b * fmath::powf(s, q)),
            move |s| {
                if s == 0.0 {
                    0.0
                } else {
                    b * q * fmath::powf(s, beta) * fmath::exp(b * fmath::powf(s, q))
                }
            },
            Some(GrowthParams { b, beta }),
        )
    }

    /// m(s) = s^2 log(e + s).
    pub fn zygmund() -> Self {
        Self::custom(
            "zygmund",
            |s| s * s * fmath::ln(core::f64::consts::E + s),
            |s| 2.0 * s * fmath::ln(core::f64::consts::E + s) + s * s / (core::f64::consts::E + s),
            None,
        )
        .expect("zygmund is a Young function")
    }

    /// Resolves the config names `power:p`, `exp_beta:B,beta`, `zygmund`.
    pub fn by_name(name: &str) -> Result<Self, OrliczError> {
        let bad = |n: &str| OrliczError::Rejected(format!("unknown Young function `{n}`"));
        if name == "zygmund" {
            return Ok(Self::zygmund());
        }
        if let Some(p) = name.strip_prefix("power:") {
            let p: f64 = p.trim().parse().map_err(|_| bad(name))?;
            return Self::power(p);
        }
        if let Some(args) = name.strip_prefix("exp_beta:") {
            let mut it = args.split(',');
            let b: f64 = it
                .next()
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| bad(name))?;
            let beta: f64 = it
                .next()
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| bad(name))?;
            if it.next().is_some() {
                return Err(bad(name));
            }
            return Self::exp_beta(b, beta);
        }
        Err(bad(name))
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        (self.eval)(s)
    }

    #[inline]
    pub fn deriv(&self, s: f64) -> f64 {
        (self.deriv)(s)
    }
}

fn second_divided_difference(f: impl Fn(f64) -> f64, a: f64, b: f64, c: f64) -> f64 {
    let d1 = (f(b) - f(a)) / (b - a);
    let d2 = (f(c) - f(b)) / (c - b);
    (d2 - d1) / (c - a)
}

/// Outcome of one sampled axiom: the worst margin seen and where.
#[derive(Debug, Clone, Copy)]
pub struct AxiomCheck {
    pub pass: bool,
    pub worst: f64,
    pub witness: f64,
}

#[derive(Debug, Clone)]
pub struct YoungAxiomReport {
    /// m(0) = 0 and m > 0 away from 0.
    pub y1: AxiomCheck,
    /// Convexity via second divided differences >= -1e-10.
    pub y2: AxiomCheck,
    /// Superlinearity proxy: m(s)/s grows by >= 10x from s=1 to s=1e3 and
    /// shrinks by >= 10x from s=1 to s=1e-3. A finite stand-in for the two
    /// limits, which cannot be sampled.
    pub y3: AxiomCheck,
    /// m' against a central finite difference of m, relative 1e-6.
    pub derivative: AxiomCheck,
}

impl YoungAxiomReport {
    pub fn pass(&self) -> bool {
        self.y1.pass && self.y2.pass && self.y3.pass && self.derivative.pass
    }
}

/// Samples the Young axioms Y1-Y3 plus derivative consistency.
pub fn check_young_axioms(m: &YoungFunction, sample_count: usize) -> YoungAxiomReport {
    let n = sample_count.max(1);
    let mut stream = SampleStream::new(0x59_4f_55_4e_47);

    // Stay where the function itself is representable; exponential-type
    // functions overflow f64 long before s = 1e3.
    let mut s_hi = 1e3;
    while s_hi > 1.0 && !m.eval(s_hi).is_finite() {
        s_hi /= 2.0;
    }

    let mut y1 = AxiomCheck {
        pass: m.eval(0.0) == 0.0,
        worst: m.eval(0.0),
        witness: 0.0,
    };
    for _ in 0..n {
        let s = stream.log_range(1e-6, s_hi);
        let v = m.eval(s);
        if v <= 0.0 && (y1.pass || v < y1.worst) {
            y1 = AxiomCheck {
                pass: false,
                worst: v,
                witness: s,
            };
        }
    }

    let mut y2 = AxiomCheck {
        pass: true,
        worst: f64::INFINITY,
        witness: 0.0,
    };
    for _ in 0..n {
        let a = stream.log_range(1e-4, s_hi / 4.0);
        let b = a * stream.range(1.1, 2.0);
        let c = b * stream.range(1.1, 2.0);
        let dd = second_divided_difference(|s| m.eval(s), a, b, c);
        if dd < y2.worst {
            y2 = AxiomCheck {
                pass: dd >= -1e-10,
                worst: dd,
                witness: b,
            };
        }
    }

    let ratio = |s: f64| m.eval(s) / s;
    let (r_lo, r_mid, r_hi) = (ratio(1e-3), ratio(1.0), ratio(1e3));
    let grow = r_hi / r_mid;
    let shrink = r_mid / r_lo;
    let y3 = AxiomCheck {
        pass: grow >= 10.0 && shrink >= 10.0,
        worst: grow.min(shrink),
        witness: if grow < shrink { 1e3 } else { 1e-3 },
    };

    let mut derivative = AxiomCheck {
        pass: true,
        worst: 0.0,
        witness: 0.0,
    };
    for _ in 0..n {
        let s = stream.log_range(1e-3, s_hi.min(1e3));
        let eta = 1e-6 * s;
        let fd = (m.eval(s + eta) - m.eval(s - eta)) / (2.0 * eta);
        let rel = fmath::abs(m.deriv(s) - fd) / fmath::abs(m.deriv(s)).max(1e-300);
        if rel > derivative.worst {
            derivative = AxiomCheck {
                pass: rel <= 1e-6,
                worst: rel,
                witness: s,
            };
        }
    }

    YoungAxiomReport {
        y1,
        y2,
        y3,
        derivative,
    }
}
