//! Adaptive Gauss-Kronrod quadrature.
//!
//! The 21-point Kronrod rule with its embedded 10-point Gauss rule drives a
//! global bisection scheme (largest error first). Two helpers sit on top:
//! a semi-infinite variant via `t = a + u/(1-u)` and a log-space variant for
//! integrands `e^{g}` whose magnitude would overflow `f64`.

use alloc::vec::Vec;

use crate::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

// Gauss weights for XGK[1], XGK[3], .., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Tolerances for [`integrate_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl QuadOptions {
    pub fn relative(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol: 0.0,
            max_intervals: 4000,
        }
    }
}

/// Value and absolute error estimate of a definite integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(Error::QuadratureFailure {
            a,
            b,
            estimate: f64::INFINITY,
        });
    }
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut fv = [(0.0, 0.0); 10];
    for (j, &x) in XGK[..10].iter().enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        if !f1.is_finite() || !f2.is_finite() {
            return Err(Error::QuadratureFailure {
                a,
                b,
                estimate: f64::INFINITY,
            });
        }
        fv[j] = (f1, f2);
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for (j, &(f1, f2)) in fv.iter().enumerate() {
        resasc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = kronrod * half;
    resasc *= half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        let scaled = libm::pow(200.0 * error / resasc, 1.5);
        error = resasc * if scaled < 1.0 { scaled } else { 1.0 };
    }
    let round_off = 50.0 * f64::EPSILON * value.abs();
    if error < round_off {
        error = round_off;
    }
    Ok(Segment { a, b, value, error })
}

/// Integrates `f` over `[a, b]` with global adaptive bisection.
pub fn integrate_with<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let mut segments: Vec<Segment> = Vec::with_capacity(64);
    segments.push(kronrod21(f, a, b)?);
    loop {
        let (value, error) = segments
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target {
            return Ok(Estimate { value, error });
        }
        if segments.len() >= opts.max_intervals {
            return Err(Error::QuadratureFailure {
                a,
                b,
                estimate: error,
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval can no longer be split in floating point.
            return Err(Error::QuadratureFailure {
                a,
                b,
                estimate: error,
            });
        }
        segments.push(kronrod21(f, seg.a, mid)?);
        segments.push(kronrod21(f, mid, seg.b)?);
    }
}

/// Integrates `f` over `[a, b]` to relative tolerance `rel_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    integrate_with(&f, a, b, &QuadOptions::relative(rel_tol)).map(|e| e.value)
}

/// Integrates `f` over `[a, ∞)` through the map `t = a + u/(1-u)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, rel_tol: f64) -> Result<f64> {
    let mapped = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let w = 1.0 - u;
        let v = f(a + u / w) / (w * w);
        if v.is_finite() {
            v
        } else if u > 0.999_999 {
            0.0
        } else {
            v
        }
    };
    integrate(mapped, 0.0, 1.0, rel_tol)
}

/// Returns `ln ∫_a^b e^{g(t)} dt` without forming `e^{g}` directly.
///
/// The interval is cut into panels that shrink geometrically towards both
/// ends, so mass concentrated in a thin layer next to an endpoint (steep
/// exponential growth) is still resolved.
pub fn log_integral_exp<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if !(b > a) {
        return if a == b {
            Ok(f64::NEG_INFINITY)
        } else {
            Err(Error::InvalidParameter(alloc::format!(
                "log_integral_exp needs a <= b, got [{a}, {b}]"
            )))
        };
    }
    let width = b - a;
    let mut points: Vec<f64> = Vec::with_capacity(140);
    points.push(a);
    points.push(b);
    let mut frac = 0.5;
    for _ in 0..52 {
        points.push(a + width * frac);
        points.push(b - width * frac);
        frac *= 0.5;
    }
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut peak = f64::NEG_INFINITY;
    for w in points.windows(2) {
        for t in [w[0], 0.5 * (w[0] + w[1]), w[1]] {
            let v = g(t);
            if v.is_nan() {
                return Err(Error::QuadratureFailure {
                    a,
                    b,
                    estimate: f64::NAN,
                });
            }
            if v > peak {
                peak = v;
            }
        }
    }
    for i in 1..64 {
        let v = g(a + width * (i as f64) / 64.0);
        if v > peak {
            peak = v;
        }
    }
    if peak == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let shifted = |t: f64| {
        let v = g(t);
        if v == f64::NEG_INFINITY {
            0.0
        } else {
            libm::exp(v - peak)
        }
    };
    // g itself carries round-off proportional to its magnitude, which caps
    // the relative accuracy attainable for e^{g}
    let rel_tol = rel_tol.max(64.0 * f64::EPSILON * peak.abs());
    let opts = QuadOptions {
        rel_tol,
        abs_tol: 0.0,
        max_intervals: 400,
    };
    // panels whose own accuracy target is lost to round-off are accepted
    // when they are negligible against the whole integral
    let mut total = 0.0;
    let mut unresolved = 0.0;
    for w in points.windows(2) {
        match integrate_with(&shifted, w[0], w[1], &opts) {
            Ok(est) => total += est.value,
            Err(Error::QuadratureFailure { estimate, .. }) if estimate.is_finite() => {
                total += estimate;
                unresolved += estimate.abs();
            }
            Err(e) => return Err(e),
        }
    }
    if unresolved > rel_tol * total.abs() {
        return Err(Error::QuadratureFailure {
            a,
            b,
            estimate: total,
        });
    }
    if total <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(peak + libm::log(total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kronrod_weights_integrate_polynomials() {
        for k in 0..20 {
            let v = integrate(|x| libm::pow(x, k as f64), 0.0, 1.0, 1e-12).unwrap();
            assert_relative_eq!(v, 1.0 / (k as f64 + 1.0), max_relative = 1e-12);
        }
    }

    #[test]
    fn smooth_oscillatory_integral() {
        let v = integrate(libm::sin, 0.0, core::f64::consts::PI, 1e-12).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn endpoint_singularity_is_resolved_adaptively() {
        let v = integrate(|x| 1.0 / libm::sqrt(x), 0.0, 1.0, 1e-9).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-8);
    }

    #[test]
    fn semi_infinite_map() {
        let v = integrate_to_infinity(|x| libm::exp(-x), 0.0, 1e-10).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-9);
        let v = integrate_to_infinity(|x| 1.0 / (1.0 + x * x), 0.0, 1e-10).unwrap();
        assert_relative_eq!(v, core::f64::consts::FRAC_PI_2, max_relative = 1e-9);
    }

    #[test]
    fn log_space_matches_direct_quadrature() {
        let direct = integrate(|t| t * t * libm::exp(t), 0.0, 3.0, 1e-12).unwrap();
        let logged =
            log_integral_exp(|t| 2.0 * libm::log(t) + t, 0.0, 3.0, 1e-12).unwrap();
        assert_relative_eq!(libm::exp(logged), direct, max_relative = 1e-10);
    }

    #[test]
    fn log_space_handles_overflowing_mass() {
        // ∫_0^R e^{t^3} dt ≈ e^{R^3}/(3R^2) for large R.
        let r: f64 = 50.0;
        let logged = log_integral_exp(|t| t * t * t, 0.0, r, 1e-10).unwrap();
        let approx = r * r * r - libm::log(3.0 * r * r);
        assert!((logged - approx).abs() < 1e-3, "{logged} vs {approx}");
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let err = integrate(|x| if x > 0.5 { f64::NAN } else { 1.0 }, 0.0, 1.0, 1e-9);
        assert!(matches!(err, Err(Error::QuadratureFailure { .. })));
    }
}
