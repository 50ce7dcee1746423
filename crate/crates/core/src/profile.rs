//! Continuous curvature functions of the re-parametrized distance `s`.
//!
//! The same type carries both the comparison curvature `κ(s)` (Laplacian,
//! volume and Myers comparisons) and the non-negative non-decreasing bound
//! `𝖪(s)` used by the stochastic criteria, which relate through
//! `κ = −𝖪/(n−m)`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

/// Symbolic description of the behaviour of a profile as `s → ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailClass {
    /// `c` for all large `s`.
    Constant(f64),
    /// `coeff · s^exponent`.
    PowerLaw { coeff: f64, exponent: f64 },
    /// `coeff · s^exponent · (ln s)^log_exponent`.
    LogPower {
        coeff: f64,
        exponent: f64,
        log_exponent: f64,
    },
    /// No symbolic information; divergence tests fall back to numerics.
    CustomNumeric,
}

impl TailClass {
    /// Leading-order value predicted by the tail class at `s`.
    pub fn predict(&self, s: f64) -> Option<f64> {
        match *self {
            TailClass::Constant(c) => Some(c),
            TailClass::PowerLaw { coeff, exponent } => Some(coeff * libm::pow(s, exponent)),
            TailClass::LogPower {
                coeff,
                exponent,
                log_exponent,
            } => Some(coeff * libm::pow(s, exponent) * libm::pow(libm::log(s), log_exponent)),
            TailClass::CustomNumeric => None,
        }
    }
}

type Eval = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A continuous function `s ↦ κ(s)` on `[0, ∞)` with tail metadata.
#[derive(Clone)]
pub struct CurvatureProfile {
    eval: Eval,
    tail: TailClass,
    label: String,
}

impl fmt::Debug for CurvatureProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurvatureProfile")
            .field("label", &self.label)
            .field("tail", &self.tail)
            .finish()
    }
}

impl CurvatureProfile {
    pub fn constant(c: f64) -> Self {
        Self {
            eval: Arc::new(move |_| c),
            tail: TailClass::Constant(c),
            label: format!("constant({c})"),
        }
    }

    /// `coeff · s^exponent` with `exponent ≥ 0` so the profile is continuous at `0`.
    pub fn power_law(coeff: f64, exponent: f64) -> Self {
        Self {
            eval: Arc::new(move |s: f64| {
                if exponent == 0.0 {
                    coeff
                } else {
                    coeff * libm::pow(s.max(0.0), exponent)
                }
            }),
            tail: if exponent == 0.0 {
                TailClass::Constant(coeff)
            } else {
                TailClass::PowerLaw { coeff, exponent }
            },
            label: format!("power_law({coeff}, {exponent})"),
        }
    }

    /// `coeff · s^exponent · ln(e + s)^log_exponent`, asymptotic to
    /// `coeff · s^exponent · (ln s)^log_exponent`.
    pub fn log_power(coeff: f64, exponent: f64, log_exponent: f64) -> Self {
        Self {
            eval: Arc::new(move |s: f64| {
                let s = s.max(0.0);
                coeff
                    * libm::pow(s, exponent)
                    * libm::pow(libm::log(core::f64::consts::E + s), log_exponent)
            }),
            tail: TailClass::LogPower {
                coeff,
                exponent,
                log_exponent,
            },
            label: format!("log_power({coeff}, {exponent}, {log_exponent})"),
        }
    }

    /// Piecewise-linear interpolation of `(s, value)` knots, held constant
    /// outside the knot range.
    pub fn tabulated(knots: Vec<(f64, f64)>) -> Self {
        let knots: Arc<Vec<(f64, f64)>> = Arc::new(knots);
        let label = format!("table({} knots)", knots.len());
        Self {
            eval: Arc::new(move |s| interpolate_linear(&knots, s)),
            tail: TailClass::CustomNumeric,
            label,
        }
    }

    pub fn custom<F>(label: impl Into<String>, tail: TailClass, eval: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            tail,
            label: label.into(),
        }
    }

    /// The comparison curvature `κ = −𝖪/(n−m)` associated with a lower
    /// bound `Ric_{m,n}(L) ≥ −𝖪(s_p) e^{−4φ/(n−m)}`.
    pub fn kappa_from_lower_bound(ksf: &CurvatureProfile, n_minus_m: f64) -> Self {
        let inner = ksf.eval.clone();
        let scale = -1.0 / n_minus_m;
        let tail = match ksf.tail {
            TailClass::Constant(c) => TailClass::Constant(scale * c),
            TailClass::PowerLaw { coeff, exponent } => TailClass::PowerLaw {
                coeff: scale * coeff,
                exponent,
            },
            TailClass::LogPower {
                coeff,
                exponent,
                log_exponent,
            } => TailClass::LogPower {
                coeff: scale * coeff,
                exponent,
                log_exponent,
            },
            TailClass::CustomNumeric => TailClass::CustomNumeric,
        };
        Self {
            eval: Arc::new(move |s| scale * inner(s)),
            tail,
            label: format!("-({})/{}", ksf.label, n_minus_m),
        }
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        (self.eval)(s)
    }

    pub fn tail(&self) -> TailClass {
        self.tail
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True when the profile is the zero function (symbolically, or for
    /// numeric profiles on the sample grid).
    pub fn is_identically_zero(&self, samples: &[f64]) -> bool {
        match self.tail {
            TailClass::Constant(c) => c == 0.0,
            TailClass::PowerLaw { coeff, .. } | TailClass::LogPower { coeff, .. } => coeff == 0.0,
            TailClass::CustomNumeric => samples.iter().all(|&s| self.eval(s) == 0.0),
        }
    }

    /// Checks the tail class against `eval` on `tail_grid` (1% relative).
    pub fn tail_is_consistent(&self, tail_grid: &[f64]) -> bool {
        tail_grid.iter().all(|&s| match self.tail.predict(s) {
            None => true,
            Some(p) => {
                let v = self.eval(s);
                (v - p).abs() <= 0.01 * p.abs().max(v.abs()) || (v == 0.0 && p == 0.0)
            }
        })
    }

    /// Checks `𝖪 ≥ 0` and non-decreasing on the given increasing samples.
    pub fn is_nonnegative_nondecreasing(&self, samples: &[f64]) -> bool {
        let mut prev = f64::NEG_INFINITY;
        for &s in samples {
            let v = self.eval(s);
            if !(v >= 0.0) || v < prev - 1e-12 * v.abs().max(1.0) {
                return false;
            }
            prev = v;
        }
        true
    }
}

fn interpolate_linear(knots: &[(f64, f64)], s: f64) -> f64 {
    match knots {
        [] => 0.0,
        [only] => only.1,
        _ => {
            let first = knots[0];
            let last = knots[knots.len() - 1];
            if s <= first.0 {
                return first.1;
            }
            if s >= last.0 {
                return last.1;
            }
            let idx = knots.partition_point(|k| k.0 <= s);
            let (s0, v0) = knots[idx - 1];
            let (s1, v1) = knots[idx];
            v0 + (v1 - v0) * (s - s0) / (s1 - s0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn tail_classes_agree_with_eval() {
        let grid: Vec<f64> = (10..20).map(|k| libm::pow(2.0, k as f64)).collect();
        assert!(CurvatureProfile::constant(2.0).tail_is_consistent(&grid));
        assert!(CurvatureProfile::power_law(3.0, 1.5).tail_is_consistent(&grid));
        // ln(e + s) vs ln s differ by < 1% once s is large
        let far: Vec<f64> = (40..50).map(|k| libm::pow(2.0, k as f64)).collect();
        assert!(CurvatureProfile::log_power(1.0, 2.0, 1.0).tail_is_consistent(&far));
        let wrong = CurvatureProfile::custom("bad", TailClass::Constant(1.0), |s| s);
        assert!(!wrong.tail_is_consistent(&grid));
    }

    #[test]
    fn profiles_are_continuous_on_dense_grid() {
        let profiles = [
            CurvatureProfile::constant(-1.0),
            CurvatureProfile::power_law(2.0, 0.5),
            CurvatureProfile::log_power(1.0, 1.0, 2.0),
            CurvatureProfile::tabulated(vec![(0.0, 1.0), (1.0, 3.0), (2.0, 0.0)]),
        ];
        for p in &profiles {
            let mut s = 0.0;
            while s < 3.0 {
                let h = 1e-10;
                assert!((p.eval(s + h) - p.eval(s)).abs() < 1e-4, "{p:?} at {s}");
                s += 0.013;
            }
        }
    }

    #[test]
    fn kappa_from_bound_flips_sign() {
        let ksf = CurvatureProfile::power_law(2.0, 1.0);
        let kappa = CurvatureProfile::kappa_from_lower_bound(&ksf, 2.0);
        assert_eq!(kappa.eval(3.0), -3.0);
        assert_eq!(
            kappa.tail(),
            TailClass::PowerLaw {
                coeff: -1.0,
                exponent: 1.0
            }
        );
    }

    #[test]
    fn tabulated_extrapolates_flat() {
        let p = CurvatureProfile::tabulated(vec![(1.0, 2.0), (2.0, 4.0)]);
        assert_eq!(p.eval(0.0), 2.0);
        assert_eq!(p.eval(1.5), 3.0);
        assert_eq!(p.eval(10.0), 4.0);
        assert_eq!(p.tail(), TailClass::CustomNumeric);
    }

    #[test]
    fn monotone_check() {
        let grid: Vec<f64> = (0..50).map(|i| i as f64 * 0.2).collect();
        assert!(CurvatureProfile::power_law(1.0, 2.0).is_nonnegative_nondecreasing(&grid));
        assert!(!CurvatureProfile::constant(-1.0).is_nonnegative_nondecreasing(&grid));
        let bump = CurvatureProfile::tabulated(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)]);
        assert!(!bump.is_nonnegative_nondecreasing(&grid));
    }
}
