//! Symbolic tails `C · r^a · (ln r)^b · exp(ρ · r^g)` of positive functions
//! as `r → ∞`, and the integral test on them.

use alloc::format;
use alloc::string::String;
use core::fmt;

use crate::model::LogTail;
use crate::profile::TailClass;

/// Tolerance when comparing a power exponent against `−1`.
pub const EXPONENT_TOL: f64 = 1e-9;

/// Leading-order tail of a positive function, stored with `ln C` so that
/// huge or tiny constants do not overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tail {
    pub log_coeff: f64,
    pub power: f64,
    pub log_power: f64,
    /// Exponential rate `ρ`; zero when there is no exponential factor.
    pub rate: f64,
    /// Exponential growth order `g > 0` (ignored when `rate == 0`).
    pub growth: f64,
}

/// Result of the integral test `∫^∞ tail(r) dr`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailRule {
    ExponentialGrowth,
    ExponentialDecay,
    PowerAtMostOne,
    PowerAboveOne,
    /// Exponent exactly `−1`; decided by the logarithmic power.
    LogBorderline,
}

impl TailRule {
    pub fn diverges(self) -> bool {
        matches!(
            self,
            TailRule::ExponentialGrowth | TailRule::PowerAtMostOne | TailRule::LogBorderline
        )
    }
}

impl Tail {
    pub const ONE: Tail = Tail {
        log_coeff: 0.0,
        power: 0.0,
        log_power: 0.0,
        rate: 0.0,
        growth: 0.0,
    };

    /// A positive constant `c`.
    pub fn constant(c: f64) -> Option<Tail> {
        (c > 0.0).then(|| Tail {
            log_coeff: libm::log(c),
            ..Self::ONE
        })
    }

    /// `c · r^a`.
    pub fn power(c: f64, a: f64) -> Option<Tail> {
        Self::constant(c).map(|t| Tail { power: a, ..t })
    }

    /// `c · r^a · (ln r)^b`.
    pub fn log_power(c: f64, a: f64, b: f64) -> Option<Tail> {
        Self::constant(c).map(|t| Tail {
            power: a,
            log_power: b,
            ..t
        })
    }

    /// `exp(a r^p + b ln r + c) = e^c · r^b · exp(a r^p)`.
    pub fn exp_of(t: LogTail) -> Tail {
        Tail {
            log_coeff: t.c,
            power: t.b,
            log_power: 0.0,
            rate: if t.p > 0.0 { t.a } else { 0.0 },
            growth: if t.p > 0.0 && t.a != 0.0 { t.p } else { 0.0 },
        }
    }

    /// Tail of a curvature profile with positive leading coefficient.
    pub fn from_class(class: TailClass) -> Option<Tail> {
        match class {
            TailClass::Constant(c) => Self::constant(c),
            TailClass::PowerLaw { coeff, exponent } => Self::power(coeff, exponent),
            TailClass::LogPower {
                coeff,
                exponent,
                log_exponent,
            } => Self::log_power(coeff, exponent, log_exponent),
            TailClass::CustomNumeric => None,
        }
    }

    /// Product; `None` if the exponential parts cancel at leading order.
    pub fn mul(self, o: Tail) -> Option<Tail> {
        let (rate, growth) = if self.rate == 0.0 {
            (o.rate, o.growth)
        } else if o.rate == 0.0 {
            (self.rate, self.growth)
        } else if (self.growth - o.growth).abs() < 1e-12 {
            let rate = self.rate + o.rate;
            if rate.abs() <= 1e-12 * self.rate.abs().max(o.rate.abs()) {
                return None;
            }
            (rate, self.growth)
        } else if self.growth > o.growth {
            (self.rate, self.growth)
        } else {
            (o.rate, o.growth)
        };
        Some(Tail {
            log_coeff: self.log_coeff + o.log_coeff,
            power: self.power + o.power,
            log_power: self.log_power + o.log_power,
            rate,
            growth,
        })
    }

    /// `tail^k`.
    pub fn powf(self, k: f64) -> Tail {
        Tail {
            log_coeff: k * self.log_coeff,
            power: k * self.power,
            log_power: k * self.log_power,
            rate: k * self.rate,
            growth: self.growth,
        }
    }

    pub fn recip(self) -> Tail {
        self.powf(-1.0)
    }

    /// True when the function tends to `+∞`.
    pub fn unbounded(&self) -> bool {
        self.rate > 0.0
            || (self.rate == 0.0
                && (self.power > 0.0 || (self.power == 0.0 && self.log_power > 0.0)))
    }

    /// Leading tail of `ln` of a function tending to `+∞`; `None` when that
    /// is an iterated logarithm or the function is not unbounded.
    pub fn ln(self) -> Option<Tail> {
        if !self.unbounded() {
            return None;
        }
        if self.rate > 0.0 {
            Tail::power(self.rate, self.growth)
        } else if self.power > 0.0 {
            Tail::log_power(self.power, 0.0, 1.0)
        } else {
            None
        }
    }

    /// `𝖪(T(r))` for a profile tail class and an unbounded argument tail.
    pub fn compose(class: TailClass, arg: Tail) -> Option<Tail> {
        match class {
            TailClass::Constant(c) => Tail::constant(c),
            TailClass::PowerLaw { coeff, exponent } => {
                Tail::constant(coeff)?.mul(arg.powf(exponent))
            }
            TailClass::LogPower {
                coeff,
                exponent,
                log_exponent,
            } => {
                let base = Tail::constant(coeff)?.mul(arg.powf(exponent))?;
                if log_exponent == 0.0 {
                    return Some(base);
                }
                base.mul(arg.ln()?.powf(log_exponent))
            }
            TailClass::CustomNumeric => None,
        }
    }

    /// Integral test for `∫^∞ tail(r) dr`.
    pub fn integral_rule(&self) -> TailRule {
        if self.rate > 0.0 {
            TailRule::ExponentialGrowth
        } else if self.rate < 0.0 {
            TailRule::ExponentialDecay
        } else if self.power > -1.0 + EXPONENT_TOL {
            TailRule::PowerAtMostOne
        } else if self.power < -1.0 - EXPONENT_TOL {
            TailRule::PowerAboveOne
        } else if self.log_power >= -1.0 {
            TailRule::LogBorderline
        } else {
            TailRule::PowerAboveOne
        }
    }

    /// `ln tail(r)`, including the constant.
    pub fn log_eval(&self, r: f64) -> f64 {
        let lr = libm::log(r);
        let mut v = self.log_coeff + self.power * lr;
        if self.log_power != 0.0 {
            v += self.log_power * libm::log(lr);
        }
        if self.rate != 0.0 {
            v += self.rate * libm::pow(r, self.growth);
        }
        v
    }

    pub fn describe(&self) -> String {
        format!("{self}")
    }
}

impl fmt::Display for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4e}·r^{:.6}", libm::exp(self.log_coeff), self.power)?;
        if self.log_power != 0.0 {
            write!(f, "·(ln r)^{:.6}", self.log_power)?;
        }
        if self.rate != 0.0 {
            write!(f, "·exp({:.6}·r^{:.6})", self.rate, self.growth)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_rules() {
        assert_eq!(Tail::power(1.0, -1.0).unwrap().integral_rule(), TailRule::LogBorderline);
        assert!(Tail::power(1.0, -1.0).unwrap().integral_rule().diverges());
        assert!(!Tail::power(1.0, -2.0).unwrap().integral_rule().diverges());
        assert!(Tail::power(3.0, -0.5).unwrap().integral_rule().diverges());
        assert!(Tail::log_power(1.0, -1.0, -1.0).unwrap().integral_rule().diverges());
        assert!(!Tail::log_power(1.0, -1.0, -2.0).unwrap().integral_rule().diverges());
    }

    #[test]
    fn exponential_parts_dominate() {
        let grow = Tail::exp_of(LogTail::power(1e-3, 2.0)).mul(Tail::power(1.0, -50.0).unwrap());
        assert_eq!(grow.unwrap().integral_rule(), TailRule::ExponentialGrowth);
        let decay = Tail::exp_of(LogTail::power(-1.0, 0.5));
        assert_eq!(decay.integral_rule(), TailRule::ExponentialDecay);
        let cancel = Tail::exp_of(LogTail::power(1.0, 2.0)).mul(Tail::exp_of(LogTail::power(-1.0, 2.0)));
        assert!(cancel.is_none());
    }

    #[test]
    fn composition_through_log_argument() {
        // 𝖪(s) = s²(ln s)² at T = r³ gives r⁶ · 9 (ln r)²
        let t = Tail::power(1.0, 3.0).unwrap();
        let k = Tail::compose(
            TailClass::LogPower {
                coeff: 1.0,
                exponent: 2.0,
                log_exponent: 2.0,
            },
            t,
        )
        .unwrap();
        assert!((k.power - 6.0).abs() < 1e-15);
        assert!((k.log_power - 2.0).abs() < 1e-15);
        assert!((k.log_coeff - libm::log(9.0)).abs() < 1e-12);
    }

    #[test]
    fn log_eval_matches_definition() {
        let t = Tail {
            log_coeff: 0.3,
            power: -1.5,
            log_power: 2.0,
            rate: -0.2,
            growth: 1.5,
        };
        let r: f64 = 7.0;
        let direct = 0.3 - 1.5 * libm::log(r) + 2.0 * libm::log(libm::log(r)) - 0.2 * libm::pow(r, 1.5);
        assert!((t.log_eval(r) - direct).abs() < 1e-12);
    }
}
