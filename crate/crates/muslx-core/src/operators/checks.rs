//! Sampled verification of the operator assumptions: coercivity against the
//! N-function pair, strict monotonicity, and the bounded-image property.

use alloc::string::String;

use super::flux::Flux;
use crate::fmath;
use crate::orlicz::{ConjugateTable, NFunction, OrliczError, YoungFunction};
use crate::rng::SampleStream;

/// Where the random (t, x, xi) samples come from.
#[derive(Debug, Clone, Copy)]
pub struct SampleSpec {
    pub t_range: (f64, f64),
    pub x_range: (f64, f64),
    /// Gradient radii are log-uniform over this range.
    pub xi_radius: (f64, f64),
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            t_range: (0.0, 1.0),
            x_range: (0.0, 1.0),
            xi_radius: (1e-2, 1e2),
            seed: 0xc0e_2c1,
        }
    }
}

impl SampleSpec {
    fn point(&self, stream: &mut SampleStream) -> (f64, [f64; 2]) {
        let t = stream.range(self.t_range.0, self.t_range.1);
        let x = [
            stream.range(self.x_range.0, self.x_range.1),
            stream.range(self.x_range.0, self.x_range.1),
        ];
        (t, x)
    }

    fn gradient(&self, stream: &mut SampleStream) -> [f64; 2] {
        let r = stream.log_range(self.xi_radius.0, self.xi_radius.1);
        let phi = stream.range(0.0, core::f64::consts::TAU);
        [r * fmath::cos(phi), r * fmath::sin(phi)]
    }
}

/// How to evaluate the conjugate M* in the coercivity inequality.
pub enum MStar<'a> {
    /// An analytic conjugate, exact algebra (e.g. power p against power p').
    Analytic(&'a YoungFunction),
    /// A tabulated numerical conjugate.
    Table(&'a ConjugateTable),
    /// Solve sup_s (y s - M(t,x,s)) afresh at every sample; the only option
    /// when M genuinely varies in (t, x).
    Pointwise,
}

#[derive(Debug, Clone)]
pub struct CoercivityReport {
    /// Largest value of M + M*(A) - c A.xi - g seen (<= tolerance passes).
    pub worst_margin: f64,
    pub witness_t: f64,
    pub witness_x: [f64; 2],
    pub witness_xi: [f64; 2],
    pub samples: usize,
    pub tolerance: f64,
    pub pass: bool,
    pub note: String,
}

/// Checks M(t,x,|xi|) + M*(t,x,|A|) <= c A.xi + g(t,x) + 1e-9 on random
/// samples. Failures are report content, not errors.
pub fn verify_coercivity(
    a: &Flux,
    m: &NFunction,
    mstar: &MStar<'_>,
    c: f64,
    g: &dyn Fn(f64, [f64; 2]) -> f64,
    samples: usize,
    spec: &SampleSpec,
) -> Result<CoercivityReport, OrliczError> {
    let tolerance = 1e-9;
    let mut stream = SampleStream::new(spec.seed);
    let mut report = CoercivityReport {
        worst_margin: f64::NEG_INFINITY,
        witness_t: 0.0,
        witness_x: [0.0; 2],
        witness_xi: [0.0; 2],
        samples,
        tolerance,
        pass: true,
        note: String::new(),
    };
    for _ in 0..samples.max(1) {
        let (t, x) = spec.point(&mut stream);
        let xi = spec.gradient(&mut stream);
        let av = a.eval(t, x, xi);
        let a_len = fmath::norm2(av);
        let mstar_val = match mstar {
            MStar::Analytic(mc) => mc.eval(a_len),
            MStar::Table(table) => table.eval_sharp(a_len)?,
            MStar::Pointwise => pointwise_conjugate(m, t, x, a_len)?,
        };
        let margin = m.eval(t, x, fmath::norm2(xi)) + mstar_val
            - c * fmath::dot2(av, xi)
            - g(t, x);
        if margin > report.worst_margin {
            report.worst_margin = margin;
            report.witness_t = t;
            report.witness_x = x;
            report.witness_xi = xi;
        }
    }
    report.pass = report.worst_margin <= tolerance;
    Ok(report)
}

/// sup_s (y s - M(t, x, s)) by bracket growth on the secant slope and
/// golden-section on the concave objective.
fn pointwise_conjugate(m: &NFunction, t: f64, x: [f64; 2], y: f64) -> Result<f64, OrliczError> {
    if y == 0.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    loop {
        let secant = (m.eval(t, x, hi) - m.eval(t, x, 0.5 * hi)) / (0.5 * hi);
        if secant >= y {
            break;
        }
        hi *= 2.0;
        if hi > 1e12 {
            return Err(OrliczError::BracketExhausted { x: y });
        }
    }
    let inv_phi = 0.618_033_988_749_894_8;
    let (mut lo, mut hi) = (0.0f64, hi);
    let mut p = hi - inv_phi * hi;
    let mut q = inv_phi * hi;
    let f = |s: f64| s * y - m.eval(t, x, s);
    let (mut fp, mut fq) = (f(p), f(q));
    while hi - lo > 1e-10 * (fmath::abs(hi) + 1e-10) {
        if fp > fq {
            hi = q;
            q = p;
            fq = fp;
            p = hi - inv_phi * (hi - lo);
            fp = f(p);
        } else {
            lo = p;
            p = q;
            fp = fq;
            q = lo + inv_phi * (hi - lo);
            fq = f(q);
        }
    }
    Ok(fp.max(fq).max(0.0))
}

#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    /// Smallest (A(xi1) - A(xi2)) . (xi1 - xi2) over the sampled pairs.
    pub min_product: f64,
    pub witness_t: f64,
    pub witness_x: [f64; 2],
    pub witness_xi1: [f64; 2],
    pub witness_xi2: [f64; 2],
    pub samples: usize,
    pub pass: bool,
}

/// Samples strict monotonicity (A3) on random pairs xi1 != xi2.
pub fn verify_monotonicity(a: &Flux, samples: usize, spec: &SampleSpec) -> MonotonicityReport {
    let mut stream = SampleStream::new(spec.seed ^ 0x4d4f4e4f);
    let mut report = MonotonicityReport {
        min_product: f64::INFINITY,
        witness_t: 0.0,
        witness_x: [0.0; 2],
        witness_xi1: [0.0; 2],
        witness_xi2: [0.0; 2],
        samples,
        pass: true,
    };
    let mut done = 0usize;
    while done < samples.max(1) {
        let (t, x) = spec.point(&mut stream);
        let xi1 = spec.gradient(&mut stream);
        let xi2 = spec.gradient(&mut stream);
        let diff = [xi1[0] - xi2[0], xi1[1] - xi2[1]];
        if diff[0] == 0.0 && diff[1] == 0.0 {
            continue;
        }
        done += 1;
        let a1 = a.eval(t, x, xi1);
        let a2 = a.eval(t, x, xi2);
        let product = fmath::dot2([a1[0] - a2[0], a1[1] - a2[1]], diff);
        if product < report.min_product {
            report.min_product = product;
            report.witness_t = t;
            report.witness_x = x;
            report.witness_xi1 = xi1;
            report.witness_xi2 = xi2;
        }
    }
    report.pass = report.min_product > 0.0;
    report
}

/// Empirical sup of |A(t,x,xi)| over |xi| <= K; includes samples pinned to
/// the boundary radius, where monotone-in-radius fluxes peak.
pub fn bounded_flux_bound(a: &Flux, k: f64, samples: usize, spec: &SampleSpec) -> f64 {
    if k == 0.0 {
        return 0.0;
    }
    let mut stream = SampleStream::new(spec.seed ^ 0x424e44);
    let mut sup = 0.0f64;
    for i in 0..samples.max(1) {
        let (t, x) = spec.point(&mut stream);
        let r = if i % 4 == 0 {
            k
        } else {
            k * stream.uniform()
        };
        let phi = stream.range(0.0, core::f64::consts::TAU);
        let xi = [r * fmath::cos(phi), r * fmath::sin(phi)];
        sup = sup.max(fmath::norm2(a.eval(t, x, xi)));
    }
    sup
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Domain;
    use crate::operators::flux::{double_phase_flux, plaplace_flux, ExponentField};
    use crate::orlicz::{conjugate, default_dual_grid};

    fn plap(p: f64) -> Flux {
        plaplace_flux(ExponentField::constant(p), 0.0, &Domain::unit_interval(8)).unwrap()
    }

    #[test]
    fn p_laplacian_coercivity_is_an_identity() {
        // M = |xi|^p/p, M* = |y|^p'/p', A = |xi|^(p-2) xi:
        // M + M*(A) = |xi|^p/p + |xi|^p/p' = A.xi with c = 1, g = 0.
        // Radii where f64 rounding of powf stays below the 1e-12 gate; the
        // identity itself is scale-free.
        let spec = SampleSpec {
            xi_radius: (1e-2, 2.0),
            ..SampleSpec::default()
        };
        for p in [1.5, 2.0, 3.0, 4.0] {
            let a = plap(p);
            let m = NFunction::from_young(YoungFunction::power(p).unwrap());
            let mstar = YoungFunction::power(p / (p - 1.0)).unwrap();
            let report = verify_coercivity(
                &a,
                &m,
                &MStar::Analytic(&mstar),
                1.0,
                &|_, _| 0.0,
                10_000,
                &spec,
            )
            .unwrap();
            assert!(report.pass, "p = {p}: {report:?}");
            assert!(report.worst_margin <= 1e-12, "p = {p}: {}", report.worst_margin);
        }
    }

    #[test]
    fn coercivity_at_zero_gradient_reduces_to_g() {
        let a = plap(2.0);
        let m = NFunction::from_young(YoungFunction::power(2.0).unwrap());
        let mstar = YoungFunction::power(2.0).unwrap();
        // xi = 0 contributes margin -g; with g = 1 every sample passes.
        let spec = SampleSpec {
            xi_radius: (1e-12, 1e-11),
            ..SampleSpec::default()
        };
        let report = verify_coercivity(
            &a,
            &m,
            &MStar::Analytic(&mstar),
            1.0,
            &|_, _| 1.0,
            100,
            &spec,
        )
        .unwrap();
        assert!(report.pass);
        assert!(report.worst_margin < 0.0);
    }

    #[test]
    fn double_phase_margin_via_pointwise_conjugation() {
        // M matched to the double-phase potential integrand; the paper fixes
        // no (c, g) here, so this documents the empirical margin at c = 2.
        let a = double_phase_flux(2.0, 4.0, |_, _| 1.0).unwrap();
        let m = NFunction::double_phase(2.0, 4.0, |_, _| 1.0, 1.0).unwrap();
        let report = verify_coercivity(
            &a,
            &m,
            &MStar::Pointwise,
            2.0,
            &|_, _| 1.0,
            10_000,
            &SampleSpec::default(),
        )
        .unwrap();
        assert!(report.pass, "worst margin {}", report.worst_margin);
    }

    #[test]
    fn pointwise_conjugate_matches_analytic_power() {
        let m = NFunction::from_young(YoungFunction::power(3.0).unwrap());
        let mstar = YoungFunction::power(1.5).unwrap();
        for y in [0.1, 1.0, 7.0, 40.0] {
            let got = pointwise_conjugate(&m, 0.3, [0.4, 0.0], y).unwrap();
            let expect = mstar.eval(y);
            assert!((got - expect).abs() <= 1e-9 * expect.max(1.0), "{got} vs {expect}");
        }
    }

    #[test]
    fn table_backed_coercivity_passes_with_slack() {
        let a = plap(3.0);
        let m = NFunction::from_young(YoungFunction::power(3.0).unwrap());
        let table = conjugate(&YoungFunction::power(3.0).unwrap(), &default_dual_grid()).unwrap();
        let spec = SampleSpec {
            xi_radius: (1e-1, 1e1),
            ..SampleSpec::default()
        };
        let report =
            verify_coercivity(&a, &m, &MStar::Table(&table), 1.0, &|_, _| 0.0, 2_000, &spec)
                .unwrap();
        assert!(report.pass, "worst margin {}", report.worst_margin);
    }

    #[test]
    fn monotonicity_of_builtins() {
        for p in [1.5, 2.0, 4.0] {
            let report = verify_monotonicity(&plap(p), 10_000, &SampleSpec::default());
            assert!(report.pass, "p = {p}: min {}", report.min_product);
        }
        let dp = double_phase_flux(2.0, 4.0, |_, _| 1.0).unwrap();
        let report = verify_monotonicity(&dp, 10_000, &SampleSpec::default());
        assert!(report.pass, "double phase: min {}", report.min_product);
    }

    #[test]
    fn p_two_monotonicity_product_is_distance_squared() {
        let a = plap(2.0);
        let mut stream = SampleStream::new(8);
        for _ in 0..100 {
            let xi1 = [stream.range(-2.0, 2.0), stream.range(-2.0, 2.0)];
            let xi2 = [stream.range(-2.0, 2.0), stream.range(-2.0, 2.0)];
            let a1 = a.eval(0.0, [0.5, 0.0], xi1);
            let a2 = a.eval(0.0, [0.5, 0.0], xi2);
            let d = [xi1[0] - xi2[0], xi1[1] - xi2[1]];
            let product = fmath::dot2([a1[0] - a2[0], a1[1] - a2[1]], d);
            let dist_sq = d[0] * d[0] + d[1] * d[1];
            assert!((product - dist_sq).abs() < 1e-14);
        }
        // Equal arguments give exactly zero.
        let same = a.eval(0.0, [0.5, 0.0], [1.0, 1.0]);
        assert_eq!(
            fmath::dot2([same[0] - same[0], same[1] - same[1]], [0.0, 0.0]),
            0.0
        );
    }

    #[test]
    fn p_four_pairs_against_pointwise_oracle() {
        let a = plap(4.0);
        let mut stream = SampleStream::new(13);
        for _ in 0..1000 {
            let xi1 = [stream.range(-2.0, 2.0), stream.range(-2.0, 2.0)];
            let xi2 = [stream.range(-2.0, 2.0), stream.range(-2.0, 2.0)];
            let a1 = a.eval(0.0, [0.5, 0.0], xi1);
            // Oracle: |xi|^2 xi componentwise.
            let n1 = xi1[0] * xi1[0] + xi1[1] * xi1[1];
            assert!((a1[0] - n1 * xi1[0]).abs() < 1e-12);
            assert!((a1[1] - n1 * xi1[1]).abs() < 1e-12);
            let a2 = a.eval(0.0, [0.5, 0.0], xi2);
            let d = [xi1[0] - xi2[0], xi1[1] - xi2[1]];
            if d[0] != 0.0 || d[1] != 0.0 {
                let product = fmath::dot2([a1[0] - a2[0], a1[1] - a2[1]], d);
                assert!(product > 0.0);
            }
        }
    }

    #[test]
    fn bounded_flux_bound_examples() {
        let spec = SampleSpec::default();
        // p = 2: sup over |xi| <= 5 is 5.
        let b = bounded_flux_bound(&plap(2.0), 5.0, 4000, &spec);
        assert!((b - 5.0).abs() < 1e-9, "{b}");
        // p = 3: |xi|^2 at |xi| = 2 is 4.
        let b = bounded_flux_bound(&plap(3.0), 2.0, 4000, &spec);
        assert!((b - 4.0).abs() < 1e-9, "{b}");
        // K = 0 gives 0.
        assert_eq!(bounded_flux_bound(&plap(3.0), 0.0, 100, &spec), 0.0);
        // Monotone in K.
        let b1 = bounded_flux_bound(&plap(3.0), 1.0, 4000, &spec);
        let b2 = bounded_flux_bound(&plap(3.0), 2.0, 4000, &spec);
        assert!(b1 <= b2);
    }
}
