//! Rotationally symmetric weighted model manifolds `dr² + f(r)² g_{S^{n−1}}`
//! with a radial potential `φ`, and their radial geometry seen from the pole.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::asymptotic::Tail;
use crate::criteria::{self, DivergenceVerdict, Verdict};
use crate::quad;
use crate::{Error, Result};

/// Relative tolerance used for `s_p` and `μ(B_r)`.
pub const RADIAL_QUAD_TOL: f64 = 1e-9;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied scalar function of `r`; derivatives are taken numerically.
#[derive(Clone)]
pub struct NumericFn {
    label: String,
    f: RealFn,
}

impl NumericFn {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    /// Piecewise-linear interpolation through `(r, value)` knots.
    pub fn table(label: impl Into<String>, knots: Vec<(f64, f64)>) -> Self {
        let profile = crate::CurvatureProfile::tabulated(knots);
        Self::new(label, move |r| profile.eval(r))
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for NumericFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NumericFn({})", self.label)
    }
}

fn fd_step(r: f64) -> f64 {
    1e-5f64.max(1e-5 * r.abs())
}

/// Five-point central first and second derivatives; `g` must already be
/// extended through the pole.
fn five_point<F: Fn(f64) -> f64>(g: F, r: f64) -> (f64, f64) {
    let h = fd_step(r);
    let (m2, m1, z, p1, p2) = (g(r - 2.0 * h), g(r - h), g(r), g(r + h), g(r + 2.0 * h));
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * z + 16.0 * p1 - p2) / (12.0 * h * h);
    (d1, d2)
}

/// Leading behaviour `a·r^p + b·ln r + c` of a log-scale quantity as `r → ∞`
/// (`p > 0` whenever `a ≠ 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogTail {
    pub a: f64,
    pub p: f64,
    pub b: f64,
    pub c: f64,
}

impl LogTail {
    pub const ZERO: LogTail = LogTail {
        a: 0.0,
        p: 0.0,
        b: 0.0,
        c: 0.0,
    };

    pub fn constant(c: f64) -> Self {
        LogTail { c, ..Self::ZERO }
    }

    pub fn power(a: f64, p: f64) -> Self {
        if a == 0.0 || p == 0.0 {
            return Self::constant(if p == 0.0 { a } else { 0.0 });
        }
        LogTail {
            a,
            p,
            ..Self::ZERO
        }
    }

    pub fn log(b: f64) -> Self {
        LogTail { b, ..Self::ZERO }
    }

    pub fn scale(self, k: f64) -> Self {
        LogTail {
            a: k * self.a,
            p: self.p,
            b: k * self.b,
            c: k * self.c,
        }
    }

    /// Sum of two tails; `None` when the leading power terms cancel, since the
    /// remainder is then unknown.
    pub fn add(self, other: Self) -> Option<Self> {
        let (a, p) = if self.a == 0.0 {
            (other.a, other.p)
        } else if other.a == 0.0 {
            (self.a, self.p)
        } else if (self.p - other.p).abs() < 1e-12 {
            let a = self.a + other.a;
            if a == 0.0 {
                return None;
            }
            (a, self.p)
        } else if self.p > other.p {
            (self.a, self.p)
        } else {
            (other.a, other.p)
        };
        Some(LogTail {
            a,
            p,
            b: self.b + other.b,
            c: self.c + other.c,
        })
    }

    /// `+1` if the quantity tends to `+∞`, `−1` for `−∞`, `0` if bounded.
    pub fn direction(&self) -> i8 {
        if self.a != 0.0 {
            if self.a > 0.0 {
                1
            } else {
                -1
            }
        } else if self.b > 0.0 {
            1
        } else if self.b < 0.0 {
            -1
        } else {
            0
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let mut v = self.c;
        if self.a != 0.0 {
            v += self.a * libm::pow(r, self.p);
        }
        if self.b != 0.0 {
            v += self.b * libm::log(r);
        }
        v
    }
}

/// Warp function families `f` with `f(0) = 0`, `f′(0) = 1`.
#[derive(Debug, Clone)]
pub enum Warp {
    /// `f(r) = r`.
    Euclidean,
    /// `f(r) = sin r` on `(0, π)`.
    Sphere,
    /// `f(r) = sinh r`.
    Hyperbolic,
    /// `f(r) = Σ_k c_k r^{k+1}` with `c_0 = 1`.
    Polynomial(Vec<f64>),
    /// Numeric warp, extended oddly through the pole for differencing.
    Custom(NumericFn),
}

impl Warp {
    pub fn label(&self) -> String {
        match self {
            Warp::Euclidean => "euclidean".into(),
            Warp::Sphere => "sphere".into(),
            Warp::Hyperbolic => "hyperbolic".into(),
            Warp::Polynomial(c) => format!("polynomial{c:?}"),
            Warp::Custom(g) => format!("custom({})", g.label()),
        }
    }

    /// Natural radius of definition (first positive zero of `f`, or `∞`).
    pub fn natural_radius(&self) -> f64 {
        match self {
            Warp::Sphere => PI,
            _ => f64::INFINITY,
        }
    }

    fn custom_odd(g: &NumericFn, r: f64) -> f64 {
        if r < 0.0 {
            -g.eval(-r)
        } else {
            g.eval(r)
        }
    }

    pub fn f(&self, r: f64) -> f64 {
        match self {
            Warp::Euclidean => r,
            Warp::Sphere => libm::sin(r),
            Warp::Hyperbolic => libm::sinh(r),
            Warp::Polynomial(c) => c
                .iter()
                .rev()
                .fold(0.0, |acc, &ck| acc * r + ck)
                * r,
            Warp::Custom(g) => Self::custom_odd(g, r),
        }
    }

    pub fn df(&self, r: f64) -> f64 {
        match self {
            Warp::Euclidean => 1.0,
            Warp::Sphere => libm::cos(r),
            Warp::Hyperbolic => libm::cosh(r),
            Warp::Polynomial(c) => c
                .iter()
                .enumerate()
                .rev()
                .fold(0.0, |acc, (k, &ck)| acc * r + (k as f64 + 1.0) * ck),
            Warp::Custom(g) => five_point(|t| Self::custom_odd(g, t), r).0,
        }
    }

    pub fn ddf(&self, r: f64) -> f64 {
        match self {
            Warp::Euclidean => 0.0,
            Warp::Sphere => -libm::sin(r),
            Warp::Hyperbolic => libm::sinh(r),
            Warp::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, &ck)| {
                    acc * r + (k as f64 + 1.0) * k as f64 * ck
                }),
            Warp::Custom(g) => five_point(|t| Self::custom_odd(g, t), r).1,
        }
    }

    /// `f′/f`, evaluated stably for large `r`.
    pub fn log_derivative(&self, r: f64) -> f64 {
        match self {
            Warp::Euclidean => 1.0 / r,
            Warp::Sphere => libm::cos(r) / libm::sin(r),
            Warp::Hyperbolic => 1.0 / libm::tanh(r),
            _ => self.df(r) / self.f(r),
        }
    }

    /// `f″/f`.
    pub fn curvature_ratio(&self, r: f64) -> f64 {
        match self {
            Warp::Euclidean => 0.0,
            Warp::Sphere => -1.0,
            Warp::Hyperbolic => 1.0,
            _ => self.ddf(r) / self.f(r),
        }
    }

    /// `ln f(r)`, stable for `sinh` at large `r`.
    pub fn ln_f(&self, r: f64) -> f64 {
        match self {
            Warp::Hyperbolic if r > 20.0 => {
                r - core::f64::consts::LN_2 + libm::log1p(-libm::exp(-2.0 * r))
            }
            _ => {
                let v = self.f(r);
                if v > 0.0 {
                    libm::log(v)
                } else if v == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    f64::NAN
                }
            }
        }
    }

    /// Leading behaviour of `ln f` as `r → ∞`.
    pub fn log_tail(&self) -> Option<LogTail> {
        match self {
            Warp::Euclidean => Some(LogTail::log(1.0)),
            Warp::Hyperbolic => Some(LogTail {
                a: 1.0,
                p: 1.0,
                b: 0.0,
                c: -core::f64::consts::LN_2,
            }),
            Warp::Polynomial(c) => {
                let (k, &lead) = c.iter().enumerate().rev().find(|(_, &v)| v != 0.0)?;
                if lead <= 0.0 {
                    return None;
                }
                Some(LogTail {
                    b: k as f64 + 1.0,
                    c: libm::log(lead),
                    ..LogTail::ZERO
                })
            }
            Warp::Sphere | Warp::Custom(_) => None,
        }
    }
}

/// Radial potential families `φ(r)`.
#[derive(Debug, Clone)]
pub enum Potential {
    Zero,
    Constant(f64),
    /// `a·r²`.
    Quadratic { a: f64 },
    /// `a·r^p`, `p > 0`.
    Power { a: f64, p: f64 },
    /// `c·ln(1 + r^q)`, `q > 0`.
    LogPower { c: f64, q: f64 },
    /// `Σ_k c_k r^k`.
    Polynomial(Vec<f64>),
    /// Numeric potential, extended evenly through the pole for differencing.
    Custom(NumericFn),
}

impl Potential {
    /// `−((n−m)ε/4)·ln(1 + r²)`.
    pub fn log_decay(n_minus_m: f64, eps: f64) -> Self {
        Potential::LogPower {
            c: -n_minus_m * eps / 4.0,
            q: 2.0,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Potential::Zero => "zero".into(),
            Potential::Constant(c) => format!("constant({c})"),
            Potential::Quadratic { a } => format!("quadratic({a})"),
            Potential::Power { a, p } => format!("power({a}, {p})"),
            Potential::LogPower { c, q } => format!("log_power({c}, {q})"),
            Potential::Polynomial(c) => format!("polynomial{c:?}"),
            Potential::Custom(g) => format!("custom({})", g.label()),
        }
    }

    fn custom_even(g: &NumericFn, r: f64) -> f64 {
        g.eval(r.abs())
    }

    pub fn phi(&self, r: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Constant(c) => *c,
            Potential::Quadratic { a } => a * r * r,
            Potential::Power { a, p } => a * libm::pow(r, *p),
            Potential::LogPower { c, q } => c * libm::log1p(libm::pow(r, *q)),
            Potential::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * r + ck),
            Potential::Custom(g) => Self::custom_even(g, r),
        }
    }

    pub fn dphi(&self, r: f64) -> f64 {
        match self {
            Potential::Zero | Potential::Constant(_) => 0.0,
            Potential::Quadratic { a } => 2.0 * a * r,
            Potential::Power { a, p } => a * p * libm::pow(r, p - 1.0),
            Potential::LogPower { c, q } => {
                let rq = libm::pow(r, *q);
                c * q * libm::pow(r, q - 1.0) / (1.0 + rq)
            }
            Potential::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, &ck)| acc * r + k as f64 * ck),
            Potential::Custom(g) => five_point(|t| Self::custom_even(g, t), r).0,
        }
    }

    pub fn ddphi(&self, r: f64) -> f64 {
        match self {
            Potential::Zero | Potential::Constant(_) => 0.0,
            Potential::Quadratic { a } => 2.0 * a,
            Potential::Power { a, p } => a * p * (p - 1.0) * libm::pow(r, p - 2.0),
            Potential::LogPower { c, q } => {
                let rq = libm::pow(r, *q);
                c * q * libm::pow(r, q - 2.0) * ((q - 1.0) - rq) / ((1.0 + rq) * (1.0 + rq))
            }
            Potential::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(2)
                .rev()
                .fold(0.0, |acc, (k, &ck)| {
                    acc * r + (k as f64) * (k as f64 - 1.0) * ck
                }),
            Potential::Custom(g) => five_point(|t| Self::custom_even(g, t), r).1,
        }
    }

    /// True when `φ` is known to be monotone in `r`, so that the running
    /// extrema over `[0, r]` are attained at the endpoints.
    pub fn is_monotone(&self) -> bool {
        !matches!(self, Potential::Polynomial(_) | Potential::Custom(_))
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Potential::Zero | Potential::Constant(_) => true,
            Potential::Quadratic { a } => *a == 0.0,
            Potential::Power { a, .. } => *a == 0.0,
            Potential::LogPower { c, .. } => *c == 0.0,
            Potential::Polynomial(c) => c.iter().skip(1).all(|&v| v == 0.0),
            Potential::Custom(_) => false,
        }
    }

    /// Leading behaviour of `φ` as `r → ∞`.
    pub fn tail(&self) -> Option<LogTail> {
        match self {
            Potential::Zero => Some(LogTail::ZERO),
            Potential::Constant(c) => Some(LogTail::constant(*c)),
            Potential::Quadratic { a } => Some(LogTail::power(*a, 2.0)),
            Potential::Power { a, p } => Some(LogTail::power(*a, *p)),
            Potential::LogPower { c, q } => Some(LogTail::log(c * q)),
            Potential::Polynomial(c) => match c.iter().enumerate().rev().find(|(_, &v)| v != 0.0) {
                None => Some(LogTail::ZERO),
                Some((0, &c0)) => Some(LogTail::constant(c0)),
                Some((k, &a)) => Some(LogTail::power(a, k as f64)),
            },
            Potential::Custom(_) => None,
        }
    }
}

/// Verdict of the `(φ, m)`-completeness test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completeness {
    Complete,
    Incomplete,
    Inconclusive,
}

/// A weighted model `(n, m, f, φ, R)` seen from its pole.
#[derive(Debug, Clone)]
pub struct WeightedModel {
    n: u32,
    m: f64,
    warp: Warp,
    potential: Potential,
    radius: f64,
    r_eval: f64,
}

/// Area `ω_k` of the unit sphere `S^k`.
pub fn sphere_area(k: u32) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        2 => 4.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * sphere_area(k - 2),
    }
}

/// Sampled radii used when validating a model or scanning `φ`.
fn scan_grid(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    let ratio = hi / lo;
    (0..count).map(move |i| lo * libm::pow(ratio, i as f64 / (count - 1) as f64))
}

impl WeightedModel {
    /// Builds and validates a model. The radius of definition is the warp's
    /// natural radius; the evaluation radius defaults to `min(R, 10)`.
    pub fn new(n: u32, m: f64, warp: Warp, potential: Potential) -> Result<Self> {
        let radius = warp.natural_radius();
        Self::on_ball(n, m, warp, potential, radius)
    }

    /// Same as [`WeightedModel::new`] with the radius of definition given up
    /// front, for warps that are only positive on `(0, R)`.
    pub fn on_ball(n: u32, m: f64, warp: Warp, potential: Potential, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || radius > warp.natural_radius() {
            return Err(Error::InvalidModel(format!(
                "radius {radius} outside (0, {}]",
                warp.natural_radius()
            )));
        }
        let model = Self {
            n,
            m,
            warp,
            potential,
            radius,
            r_eval: radius.min(10.0),
        };
        model.validate()?;
        Ok(model)
    }

    /// Restricts the radius of definition (e.g. to the first zero of a
    /// polynomial warp).
    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || radius > self.warp.natural_radius() {
            return Err(Error::InvalidModel(format!(
                "radius {radius} outside (0, {}]",
                self.warp.natural_radius()
            )));
        }
        self.radius = radius;
        self.r_eval = self.r_eval.min(radius);
        self.validate()?;
        Ok(self)
    }

    /// Sets the evaluation radius `R_eval` (which fixes the pole floor
    /// `10⁻⁶·R_eval`).
    pub fn with_eval_radius(mut self, r_eval: f64) -> Result<Self> {
        if !(r_eval > 0.0) || r_eval > self.radius || !r_eval.is_finite() {
            return Err(Error::InvalidModel(format!(
                "evaluation radius {r_eval} outside (0, {}]",
                self.radius
            )));
        }
        self.r_eval = r_eval;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidModel(format!("dimension n = {} < 2", self.n)));
        }
        if !(self.m <= 1.0) || !self.m.is_finite() {
            return Err(Error::InvalidModel(format!("m = {} must be finite and ≤ 1", self.m)));
        }
        if let Warp::Polynomial(c) = &self.warp {
            if c.first().copied() != Some(1.0) {
                return Err(Error::InvalidModel(
                    "polynomial warp must start with f′(0) = 1".into(),
                ));
            }
        }
        match &self.potential {
            Potential::Power { p, .. } if !(*p > 0.0) => {
                return Err(Error::InvalidModel(format!("power potential needs p > 0, got {p}")))
            }
            Potential::LogPower { q, .. } if !(*q > 0.0) => {
                return Err(Error::InvalidModel(format!(
                    "log_power potential needs q > 0, got {q}"
                )))
            }
            _ => {}
        }
        let f0 = self.warp.f(0.0);
        let h = 1e-6;
        let slope = (self.warp.f(h) - self.warp.f(-h)) / (2.0 * h);
        if f0.abs() > 1e-12 || (slope - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidModel(format!(
                "warp violates the pole condition: f(0) = {f0}, f′(0) ≈ {slope}"
            )));
        }
        let hi = if self.radius.is_finite() {
            self.radius * (1.0 - 1e-9)
        } else {
            self.r_eval
        };
        for r in scan_grid(self.r_min(), hi, 512) {
            let fr = self.warp.f(r);
            if !(fr > 0.0) || !fr.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "warp is not positive at r = {r} (f = {fr})"
                )));
            }
            let (p, dp, ddp) = (
                self.potential.phi(r),
                self.potential.dphi(r),
                self.potential.ddphi(r),
            );
            if !(p.is_finite() && dp.is_finite() && ddp.is_finite()) {
                return Err(Error::InvalidModel(format!("potential is not C² at r = {r}")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// `n − m`, always `≥ 1`.
    pub fn n_minus_m(&self) -> f64 {
        self.n as f64 - self.m
    }

    pub fn warp(&self) -> &Warp {
        &self.warp
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn eval_radius(&self) -> f64 {
        self.r_eval
    }

    /// Pole floor below which pole-singular quantities are not evaluated.
    pub fn r_min(&self) -> f64 {
        1e-6 * self.r_eval
    }

    pub fn phi(&self, r: f64) -> f64 {
        self.potential.phi(r)
    }

    fn check_open(&self, r: f64) -> Result<()> {
        if !(r < self.radius) || r.is_nan() {
            return Err(Error::OutOfDomain {
                value: r,
                domain: format!("(0, {})", self.radius),
            });
        }
        if r < self.r_min() {
            return Err(Error::PoleSingularity {
                r,
                floor: self.r_min(),
            });
        }
        Ok(())
    }

    fn check_closed(&self, r: f64) -> Result<()> {
        if !(r >= 0.0 && r <= self.radius) {
            return Err(Error::OutOfDomain {
                value: r,
                domain: format!("[0, {}]", self.radius),
            });
        }
        Ok(())
    }

    /// `e^{−2φ/(n−m)}`, the integrand of `s_p`.
    pub fn speed(&self, r: f64) -> f64 {
        libm::exp(-2.0 * self.phi(r) / self.n_minus_m())
    }

    /// `s_p(r) = ∫₀^r e^{−2φ(t)/(n−m)} dt`.
    pub fn reparam_distance(&self, r: f64) -> Result<f64> {
        Ok(libm::exp(self.log_reparam_distance(r)?))
    }

    /// `ln s_p(r)`, usable when `s_p` itself overflows.
    pub fn log_reparam_distance(&self, r: f64) -> Result<f64> {
        self.check_closed(r)?;
        let k = -2.0 / self.n_minus_m();
        self.log_interval_integral(|t| k * self.phi(t), 0.0, r)
    }

    /// `s_p(r₁) − s_p(r₀)`.
    pub fn reparam_increment(&self, r0: f64, r1: f64) -> Result<f64> {
        self.check_closed(r0)?;
        self.check_closed(r1)?;
        let k = -2.0 / self.n_minus_m();
        Ok(libm::exp(self.log_interval_integral(|t| k * self.phi(t), r0, r1)?))
    }

    fn log_interval_integral<G: Fn(f64) -> f64>(&self, g: G, a: f64, b: f64) -> Result<f64> {
        if a == b {
            return Ok(f64::NEG_INFINITY);
        }
        if self.potential.is_constant() && !matches!(self.warp, Warp::Custom(_)) {
            // constant integrands close exactly
            let v = g(0.5 * (a + b));
            if v.is_finite() && g(a).is_finite() && g(b).is_finite() && g(a) == v && g(b) == v {
                return Ok(v + libm::log(b - a));
            }
        }
        quad::log_integral_exp(g, a, b, RADIAL_QUAD_TOL)
    }

    /// `(φ, m)`-completeness at the pole: divergence of `∫₀^∞ e^{−2φ/(n−m)}`.
    pub fn phi_m_complete(&self) -> Result<(Completeness, DivergenceVerdict)> {
        if self.radius.is_finite() {
            return Err(Error::FiniteRadius {
                radius: self.radius,
            });
        }
        let k = -2.0 / self.n_minus_m();
        let tail = self
            .potential
            .tail()
            .map(|t| Tail::exp_of(t.scale(k)));
        let verdict = criteria::classify_divergence(&|r| self.speed(r), tail, 1.0)?;
        let c = match verdict.verdict {
            Verdict::Diverges => Completeness::Complete,
            Verdict::Converges => Completeness::Incomplete,
            Verdict::Inconclusive => Completeness::Inconclusive,
        };
        Ok((c, verdict))
    }

    /// `Lr_p(r) = (n−1) f′/f − φ′`.
    pub fn weighted_laplacian_of_r(&self, r: f64) -> Result<f64> {
        self.check_open(r)?;
        Ok(self.drift(r))
    }

    /// Radial drift of the `L`-diffusion; same as `Lr_p` but without the
    /// domain checks, for use inside simulation loops.
    #[inline]
    pub fn drift(&self, r: f64) -> f64 {
        (self.n as f64 - 1.0) * self.warp.log_derivative(r) - self.potential.dphi(r)
    }

    /// `Ric_{m,n}(L)(∂r, ∂r) = −(n−1) f″/f + φ″ + φ′²/(n−m)`.
    pub fn bakry_emery_ricci_radial(&self, r: f64) -> Result<f64> {
        self.check_open(r)?;
        let dp = self.potential.dphi(r);
        Ok(-(self.n as f64 - 1.0) * self.warp.curvature_ratio(r)
            + self.potential.ddphi(r)
            + dp * dp / self.n_minus_m())
    }

    /// `λ = e^{2φ/(n−m)}·Lr_p`.
    pub fn lambda_of_s(&self, r: f64) -> Result<f64> {
        let lr = self.weighted_laplacian_of_r(r)?;
        Ok(libm::exp(2.0 * self.phi(r) / self.n_minus_m()) * lr)
    }

    /// `ln J_φ(r) = −φ(r) + (n−1) ln f(r)`.
    pub fn log_density(&self, r: f64) -> f64 {
        let lf = self.warp.ln_f(r);
        if lf == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        -self.phi(r) + (self.n as f64 - 1.0) * lf
    }

    /// `J_φ(r) = e^{−φ(r)} f(r)^{n−1}`.
    pub fn density(&self, r: f64) -> f64 {
        libm::exp(self.log_density(r))
    }

    /// `ln μ(B_r)`.
    pub fn log_volume_ball(&self, r: f64) -> Result<f64> {
        self.log_volume_annulus(0.0, r)
    }

    /// `μ(B_r) = ω_{n−1} ∫₀^r J_φ`.
    pub fn volume_ball(&self, r: f64) -> Result<f64> {
        Ok(libm::exp(self.log_volume_ball(r)?))
    }

    /// `ln μ(A(p, r₀, r₁))`.
    pub fn log_volume_annulus(&self, r0: f64, r1: f64) -> Result<f64> {
        self.check_closed(r0)?;
        self.check_closed(r1)?;
        if !(r1 >= r0) {
            return Err(Error::InvalidParameter(format!(
                "annulus needs r0 ≤ r1, got [{r0}, {r1}]"
            )));
        }
        let inner = quad::log_integral_exp(|t| self.log_density(t), r0, r1, RADIAL_QUAD_TOL)?;
        Ok(libm::log(sphere_area(self.n - 1)) + inner)
    }

    /// `(φ̲_p(r), φ̄_p(r))`: extrema of `φ` over `B_r(p)`.
    pub fn phi_extrema(&self, r: f64) -> (f64, f64) {
        let p0 = self.phi(0.0);
        let pr = self.phi(r);
        if self.potential.is_monotone() || r <= 0.0 {
            return (p0.min(pr), p0.max(pr));
        }
        let (mut lo, mut hi) = (p0.min(pr), p0.max(pr));
        let samples = 512;
        let mut best_lo = 0.0;
        let mut best_hi = 0.0;
        for i in 1..samples {
            let t = r * i as f64 / samples as f64;
            let v = self.phi(t);
            if v < lo {
                lo = v;
                best_lo = t;
            }
            if v > hi {
                hi = v;
                best_hi = t;
            }
        }
        let width = r / samples as f64;
        if best_lo > 0.0 {
            lo = lo.min(golden(|t| self.phi(t), best_lo - width, best_lo + width, r));
        }
        if best_hi > 0.0 {
            hi = hi.max(-golden(|t| -self.phi(t), best_hi - width, best_hi + width, r));
        }
        (lo, hi)
    }

    pub fn phi_lower(&self, r: f64) -> f64 {
        self.phi_extrema(r).0
    }

    pub fn phi_upper(&self, r: f64) -> f64 {
        self.phi_extrema(r).1
    }

    /// Leading tails of `φ̲_p` and `φ̄_p` (both are `φ`'s tail when `φ`
    /// runs off to `∓∞`, constants otherwise).
    pub fn phi_extrema_tails(&self) -> Option<(LogTail, LogTail)> {
        let t = self.potential.tail()?;
        let bounded = LogTail::ZERO;
        Some(match t.direction() {
            1 => (bounded, t),
            -1 => (t, bounded),
            _ => (bounded, bounded),
        })
    }

    /// Leading tail of `ln J_φ`.
    pub fn log_density_tail(&self) -> Option<LogTail> {
        let lf = self.warp.log_tail()?.scale(self.n as f64 - 1.0);
        let phi = self.potential.tail()?.scale(-1.0);
        lf.add(phi)
    }

    /// Precomputes radial profiles on `grid` (strictly increasing, within `(0, R]`).
    pub fn profile_cache(&self, grid: &[f64]) -> Result<RadialProfileCache> {
        RadialProfileCache::build(self, grid)
    }
}

/// Minimum of `g` on `[a, b] ∩ [0, cap]` by golden-section search.
fn golden<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, cap: f64) -> f64 {
    let (mut a, mut b) = (a.max(0.0), b.min(cap));
    let inv = 0.618_033_988_749_894_9;
    let mut c = b - inv * (b - a);
    let mut d = a + inv * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..80 {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv * (b - a);
            gd = g(d);
        }
    }
    gc.min(gd)
}

/// Radial profiles of a model sampled on a fixed grid.
#[derive(Debug, Clone)]
pub struct RadialProfileCache {
    pub r: Vec<f64>,
    pub s_p: Vec<f64>,
    pub phi_lower: Vec<f64>,
    pub phi_upper: Vec<f64>,
    pub j_phi: Vec<f64>,
    pub log_mu_ball: Vec<f64>,
}

impl RadialProfileCache {
    fn build(model: &WeightedModel, grid: &[f64]) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::InvalidParameter("empty radial grid".into()));
        }
        for w in grid.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidParameter(
                    "radial grid must be strictly increasing".into(),
                ));
            }
        }
        if !(grid[0] > 0.0) || !(grid[grid.len() - 1] <= model.radius()) {
            return Err(Error::OutOfDomain {
                value: grid[0],
                domain: format!("(0, {}]", model.radius()),
            });
        }
        let k = -2.0 / model.n_minus_m();
        let ln_omega = libm::log(sphere_area(model.n - 1));
        let mut s_p = Vec::with_capacity(grid.len());
        let mut lo_v = Vec::with_capacity(grid.len());
        let mut hi_v = Vec::with_capacity(grid.len());
        let mut j = Vec::with_capacity(grid.len());
        let mut mu = Vec::with_capacity(grid.len());

        let mut prev = 0.0;
        let mut log_s = f64::NEG_INFINITY;
        let mut log_m = f64::NEG_INFINITY;
        let p0 = model.phi(0.0);
        let (mut lo, mut hi) = (p0, p0);
        for &r in grid {
            let ds = model.log_interval_integral(|t| k * model.phi(t), prev, r)?;
            let dm = quad::log_integral_exp(|t| model.log_density(t), prev, r, RADIAL_QUAD_TOL)?;
            log_s = log_add(log_s, ds);
            log_m = log_add(log_m, dm);
            // extrema over the new shell, then the running extrema
            let shell = if model.potential.is_monotone() {
                let pr = model.phi(r);
                (pr, pr)
            } else {
                shell_extrema(model, prev, r)
            };
            lo = lo.min(shell.0);
            hi = hi.max(shell.1);
            s_p.push(libm::exp(log_s));
            lo_v.push(lo);
            hi_v.push(hi);
            j.push(model.density(r));
            mu.push(ln_omega + log_m);
            prev = r;
        }
        Ok(Self {
            r: grid.to_vec(),
            s_p,
            phi_lower: lo_v,
            phi_upper: hi_v,
            j_phi: j,
            log_mu_ball: mu,
        })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn mu_ball(&self, i: usize) -> f64 {
        libm::exp(self.log_mu_ball[i])
    }
}

fn shell_extrema(model: &WeightedModel, a: f64, b: f64) -> (f64, f64) {
    let samples = 32;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut at_lo, mut at_hi) = (a, a);
    for i in 0..=samples {
        let t = a + (b - a) * i as f64 / samples as f64;
        let v = model.phi(t);
        if v < lo {
            lo = v;
            at_lo = t;
        }
        if v > hi {
            hi = v;
            at_hi = t;
        }
    }
    let w = (b - a) / samples as f64;
    let lo = lo.min(golden(|t| model.phi(t), (at_lo - w).max(a), (at_lo + w).min(b), b));
    let hi = hi.max(-golden(|t| -model.phi(t), (at_hi - w).max(a), (at_hi + w).min(b), b));
    (lo, hi)
}

/// `ln(e^x + e^y)`.
pub(crate) fn log_add(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let (hi, lo) = if x > y { (x, y) } else { (y, x) };
    hi + libm::log1p(libm::exp(lo - hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn flat(n: u32) -> WeightedModel {
        WeightedModel::new(n, 1.0, Warp::Euclidean, Potential::Zero).unwrap()
    }

    #[test]
    fn reparam_distance_examples() {
        assert_relative_eq!(flat(3).reparam_distance(2.5).unwrap(), 2.5, max_relative = 1e-12);
        // φ = ((n−m)/2) ln(1+t): integrand 1/(1+t)
        let m = WeightedModel::new(3, 1.0, Warp::Euclidean, Potential::LogPower { c: 1.0, q: 1.0 })
            .unwrap();
        for r in [0.5, 2.0, 7.0] {
            assert_relative_eq!(
                m.reparam_distance(r).unwrap(),
                libm::log1p(r),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn weighted_laplacian_examples() {
        assert_relative_eq!(flat(3).weighted_laplacian_of_r(0.5).unwrap(), 4.0);
        let sphere = WeightedModel::new(2, 1.0, Warp::Sphere, Potential::Zero).unwrap();
        assert_relative_eq!(
            sphere.weighted_laplacian_of_r(PI / 4.0).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        let quad = WeightedModel::new(2, 1.0, Warp::Euclidean, Potential::Quadratic { a: 1.0 })
            .unwrap();
        assert_relative_eq!(quad.weighted_laplacian_of_r(1.0).unwrap(), -1.0);
        assert!(matches!(
            quad.weighted_laplacian_of_r(1e-9),
            Err(Error::PoleSingularity { .. })
        ));
    }

    #[test]
    fn ricci_examples() {
        let sphere = WeightedModel::new(3, 1.0, Warp::Sphere, Potential::Zero).unwrap();
        for r in [0.1, 1.0, 3.0] {
            assert_relative_eq!(sphere.bakry_emery_ricci_radial(r).unwrap(), 2.0);
        }
        let quad = WeightedModel::new(2, 1.0, Warp::Euclidean, Potential::Quadratic { a: 1.0 })
            .unwrap();
        assert_relative_eq!(quad.bakry_emery_ricci_radial(1.0).unwrap(), 6.0);
    }

    #[test]
    fn lambda_examples() {
        assert_relative_eq!(flat(3).lambda_of_s(2.0).unwrap(), 1.0);
        let quad = WeightedModel::new(2, 1.0, Warp::Euclidean, Potential::Quadratic { a: 1.0 })
            .unwrap();
        assert_relative_eq!(
            quad.lambda_of_s(0.5).unwrap(),
            libm::exp(0.5),
            max_relative = 1e-14
        );
    }

    #[test]
    fn volume_examples() {
        assert_relative_eq!(flat(2).volume_ball(1.0).unwrap(), PI, max_relative = 1e-9);
        assert_relative_eq!(
            flat(3).volume_ball(2.0).unwrap(),
            4.0 / 3.0 * PI * 8.0,
            max_relative = 1e-9
        );
        let sphere = WeightedModel::new(2, 1.0, Warp::Sphere, Potential::Zero).unwrap();
        assert_relative_eq!(sphere.volume_ball(PI).unwrap(), 4.0 * PI, max_relative = 1e-9);
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(3), 2.0 * PI * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(4), 8.0 * PI * PI / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn completeness_examples() {
        let bounded = WeightedModel::new(3, 1.0, Warp::Euclidean, Potential::Constant(4.0)).unwrap();
        assert_eq!(bounded.phi_m_complete().unwrap().0, Completeness::Complete);
        let log = WeightedModel::new(3, 1.0, Warp::Euclidean, Potential::LogPower { c: 1.0, q: 1.0 })
            .unwrap();
        assert_eq!(log.phi_m_complete().unwrap().0, Completeness::Complete);
        let linear =
            WeightedModel::new(3, 1.0, Warp::Euclidean, Potential::Power { a: 2.0, p: 1.0 })
                .unwrap();
        assert_eq!(linear.phi_m_complete().unwrap().0, Completeness::Incomplete);
        let sphere = WeightedModel::new(2, 1.0, Warp::Sphere, Potential::Zero).unwrap();
        assert!(matches!(sphere.phi_m_complete(), Err(Error::FiniteRadius { .. })));
    }

    #[test]
    fn invalid_models_are_rejected() {
        assert!(WeightedModel::new(1, 1.0, Warp::Euclidean, Potential::Zero).is_err());
        assert!(WeightedModel::new(3, 1.5, Warp::Euclidean, Potential::Zero).is_err());
        assert!(WeightedModel::new(3, 1.0, Warp::Polynomial(alloc::vec![2.0]), Potential::Zero)
            .is_err());
        // f = r − r² vanishes at r = 1
        let crossing = Warp::Polynomial(alloc::vec![1.0, -1.0]);
        assert!(WeightedModel::new(3, 1.0, crossing, Potential::Zero).is_err());
    }

    #[test]
    fn numeric_derivatives_match_closed_forms() {
        let closed = Potential::LogPower { c: -0.5, q: 2.0 };
        let numeric = Potential::Custom(NumericFn::new("log", |r| -0.5 * libm::log1p(r * r)));
        for r in [0.0, 0.3, 1.0, 4.0, 20.0] {
            assert!((closed.dphi(r) - numeric.dphi(r)).abs() < 1e-8);
            // prescribed step h = 1e-5 leaves ~ε|φ|/h² of round-off in φ″
            assert!((closed.ddphi(r) - numeric.ddphi(r)).abs() < 2e-5);
        }
        let sinh = Warp::Custom(NumericFn::new("sinh", libm::sinh));
        for r in [0.0, 0.5, 2.0] {
            assert!((sinh.df(r) - libm::cosh(r)).abs() < 1e-8);
            assert!((sinh.ddf(r) - libm::sinh(r)).abs() < 1e-5);
        }
    }

    #[test]
    fn polynomial_warp_derivatives() {
        let w = Warp::Polynomial(alloc::vec![1.0, 0.5, 0.25]);
        let r = 1.3;
        assert_relative_eq!(w.f(r), r + 0.5 * r * r + 0.25 * r * r * r, max_relative = 1e-14);
        assert_relative_eq!(w.df(r), 1.0 + r + 0.75 * r * r, max_relative = 1e-14);
        assert_relative_eq!(w.ddf(r), 1.0 + 1.5 * r, max_relative = 1e-14);
    }

    #[test]
    fn hyperbolic_log_warp_is_stable() {
        let w = Warp::Hyperbolic;
        assert_relative_eq!(w.ln_f(25.0), libm::log(libm::sinh(25.0)), max_relative = 1e-14);
        assert!(w.ln_f(900.0).is_finite());
    }

    #[test]
    fn extrema_of_nonmonotone_potential() {
        // φ = r² − r³/3 peaks at r = 2 with φ = 4/3 then decreases
        let m = WeightedModel::new(
            3,
            1.0,
            Warp::Euclidean,
            Potential::Polynomial(alloc::vec![0.0, 0.0, 1.0, -1.0 / 3.0]),
        )
        .unwrap();
        let (lo, hi) = m.phi_extrema(3.0);
        assert!((hi - 4.0 / 3.0).abs() < 1e-10);
        assert_eq!(lo, 0.0);
        let (lo, _) = m.phi_extrema(5.0);
        assert_relative_eq!(lo, 25.0 - 125.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn cache_matches_pointwise_quantities() {
        let m = WeightedModel::new(3, 1.0, Warp::Euclidean, Potential::log_decay(2.0, 1.0)).unwrap();
        let grid: Vec<f64> = (1..=40).map(|i| 0.1 * i as f64).collect();
        let cache = m.profile_cache(&grid).unwrap();
        for (i, &r) in grid.iter().enumerate() {
            assert_relative_eq!(cache.s_p[i], m.reparam_distance(r).unwrap(), max_relative = 1e-8);
            assert_relative_eq!(cache.mu_ball(i), m.volume_ball(r).unwrap(), max_relative = 1e-8);
            assert_relative_eq!(cache.j_phi[i], m.density(r), max_relative = 1e-14);
        }
        // ∫₀¹ √(1+t²) dt = (√2 + asinh 1)/2
        let exact = 0.5 * (libm::sqrt(2.0) + libm::asinh(1.0));
        assert_relative_eq!(cache.s_p[9], exact, max_relative = 1e-9);
    }
}
