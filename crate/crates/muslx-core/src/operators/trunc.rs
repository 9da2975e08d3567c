//! Truncation at level k, its primitive, and the C^2 smoothed variant.
//!
//! The smoothed truncation is pinned down only by its properties (derivative
//! in [0,1], C^2, concave on the positive axis, second derivative bounded by
//! C/delta); we realize it with the smoothstep profile
//! T'(k+s) = 1 - S(s/delta), S(r) = 3r^2 - 2r^3 on the transition band,
//! which meets every listed property with C = 1.5 and gives
//! T(k+delta) = k + delta/2 exactly.

use super::OperatorError;
use crate::fmath;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationFamily {
    pub level: f64,
    pub smoothing: f64,
}

impl TruncationFamily {
    pub fn new(level: f64, smoothing: f64) -> Result<Self, OperatorError> {
        if !(level > 0.0) {
            return Err(OperatorError::Rejected("truncation level must be > 0".into()));
        }
        if !(smoothing >= 0.0) {
            return Err(OperatorError::Rejected("smoothing must be >= 0".into()));
        }
        Ok(Self { level, smoothing })
    }

    pub fn sharp(level: f64) -> Result<Self, OperatorError> {
        Self::new(level, 0.0)
    }

    /// T_k(z): clamp to [-k, k].
    pub fn truncate(&self, z: f64) -> f64 {
        z.clamp(-self.level, self.level)
    }

    /// Derivative of T_k: the indicator of |z| <= k.
    pub fn truncate_deriv(&self, z: f64) -> f64 {
        if fmath::abs(z) <= self.level {
            1.0
        } else {
            0.0
        }
    }

    /// G_k(z) = int_0^z T_k: z^2/2 inside, linear growth of slope k outside.
    pub fn primitive(&self, z: f64) -> f64 {
        let k = self.level;
        let a = fmath::abs(z);
        if a <= k {
            0.5 * z * z
        } else {
            0.5 * k * k + k * (a - k)
        }
    }

    /// (T_k(z), G_k(z)) in one call.
    pub fn truncate_pair(&self, z: f64) -> (f64, f64) {
        (self.truncate(z), self.primitive(z))
    }

    /// T_{k,delta}(z); requires smoothing > 0.
    pub fn truncate_smooth(&self, z: f64) -> f64 {
        let (k, d) = self.smooth_params();
        let a = fmath::abs(z);
        let out = if a <= k {
            a
        } else if a >= k + d {
            k + 0.5 * d
        } else {
            let s = a - k;
            let q = s / d;
            // int_0^s (1 - S(r/d)) dr = s - d (q^3 - q^4/2)
            k + s - d * (q * q * q - 0.5 * q * q * q * q)
        };
        if z < 0.0 {
            -out
        } else {
            out
        }
    }

    /// T'_{k,delta}(z) in [0, 1].
    pub fn truncate_smooth_deriv(&self, z: f64) -> f64 {
        let (k, d) = self.smooth_params();
        let a = fmath::abs(z);
        if a <= k {
            1.0
        } else if a >= k + d {
            0.0
        } else {
            let q = (a - k) / d;
            1.0 - (3.0 * q * q - 2.0 * q * q * q)
        }
    }

    /// G_{k,delta}(z), the primitive of the smoothed truncation.
    pub fn primitive_smooth(&self, z: f64) -> f64 {
        let (k, d) = self.smooth_params();
        let a = fmath::abs(z);
        if a <= k {
            0.5 * a * a
        } else if a < k + d {
            let s = a - k;
            let q = s / d;
            // int_0^s T(k+r) dr with the band profile above.
            0.5 * k * k + k * s + 0.5 * s * s
                - d * d * (0.25 * q * q * q * q - 0.1 * q * q * q * q * q)
        } else {
            let at_band_end = 0.5 * k * k + k * d + 0.5 * d * d - d * d * (0.25 - 0.1);
            at_band_end + (k + 0.5 * d) * (a - k - d)
        }
    }

    /// (T_{k,delta}, T'_{k,delta}, G_{k,delta}) in one call.
    pub fn truncate_smooth_triple(&self, z: f64) -> (f64, f64, f64) {
        (
            self.truncate_smooth(z),
            self.truncate_smooth_deriv(z),
            self.primitive_smooth(z),
        )
    }

    fn smooth_params(&self) -> (f64, f64) {
        assert!(
            self.smoothing > 0.0,
            "smooth truncation needs smoothing > 0"
        );
        (self.level, self.smoothing)
    }
}
