//! Divergence tests for improper integrals `∫_{r₀}^∞ g(r) dr` and the
//! integral criteria for conservativeness, recurrence and the Feller property.
//!
//! Integrands with a recognised symbolic tail are decided by the integral
//! test on the tail. Everything else goes through a numeric fallback built
//! from dyadic partial integrals and log-log exponent fits, which answers
//! `Inconclusive` rather than guess.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::asymptotic::{Tail, TailRule};
use crate::model::{log_add, sphere_area, WeightedModel};
use crate::profile::CurvatureProfile;
use crate::quad;
use crate::{Error, Result};

/// Number of doublings of the numeric fallback (`r ≤ 2^16 r₀`).
pub const DOUBLINGS: u32 = 16;
/// Minimum relative growth per doubling for a numeric `Diverges`.
pub const GROWTH_PER_DOUBLING: f64 = 0.05;
/// Decay exponent above which a numeric fit is taken as convergent.
pub const CONVERGENT_EXPONENT: f64 = 1.1;
/// Maximum disagreement of the two exponent fits.
pub const FIT_AGREEMENT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Diverges,
    Converges,
    Inconclusive,
}

/// Numeric evidence: dyadic partial integrals and tail exponent fits.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericEvidence {
    /// Upper limits `2^k r₀`, `k = 1..=16`.
    pub uppers: Vec<f64>,
    /// `ln ∫_{r₀}^{2^k r₀} g`.
    pub log_partials: Vec<f64>,
    /// Fitted decay exponents `α̂` (integrand `~ r^{−α̂}`) on the last two
    /// dyadic windows.
    pub exponents: [f64; 2],
    /// Relative growth of the partial integral over the last four doublings.
    pub growth: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evidence {
    Symbolic { tail: Tail, rule: TailRule },
    Numeric(NumericEvidence),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceVerdict {
    pub verdict: Verdict,
    pub evidence: Evidence,
    pub r0: f64,
    /// Free-form notes (shortcuts tried, substitutions made, side conditions).
    pub notes: Vec<String>,
}

impl DivergenceVerdict {
    pub fn diverges(&self) -> bool {
        self.verdict == Verdict::Diverges
    }

    pub fn summary(&self) -> String {
        let ev = match &self.evidence {
            Evidence::Symbolic { tail, rule } => format!("symbolic tail {tail} ({rule:?})"),
            Evidence::Numeric(n) => format!(
                "numeric: exponents {:.4}/{:.4}, growth {:.4}..{:.4}",
                n.exponents[0], n.exponents[1], n.growth[0], n.growth[3]
            ),
        };
        format!("{:?} [r0 = {}; {}]", self.verdict, self.r0, ev)
    }
}

fn sample_radii(r0: f64) -> impl Iterator<Item = f64> {
    let top = libm::pow(2.0, DOUBLINGS as f64);
    (0..=256).map(move |i| r0 * libm::pow(top, i as f64 / 256.0))
}

fn check_log_integrand<G: Fn(f64) -> f64>(log_g: &G, r0: f64) -> Result<()> {
    for r in sample_radii(r0) {
        let v = log_g(r);
        if v.is_nan() {
            return Err(Error::NegativeIntegrand { r, value: f64::NAN });
        }
    }
    Ok(())
}

/// Classifies `∫_{r₀}^∞ g` for a non-negative integrand `g`, using `tail`
/// when known.
pub fn classify_divergence(
    g: &dyn Fn(f64) -> f64,
    tail: Option<Tail>,
    r0: f64,
) -> Result<DivergenceVerdict> {
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(Error::InvalidParameter(format!("cutoff r0 = {r0} must be positive")));
    }
    for r in sample_radii(r0) {
        let v = g(r);
        if v < 0.0 || v.is_nan() {
            return Err(Error::NegativeIntegrand { r, value: v });
        }
    }
    classify_log_divergence(&|r| libm::log(g(r)), tail, r0)
}

/// Same as [`classify_divergence`] for an integrand given as `ln g`.
pub fn classify_log_divergence(
    log_g: &dyn Fn(f64) -> f64,
    tail: Option<Tail>,
    r0: f64,
) -> Result<DivergenceVerdict> {
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(Error::InvalidParameter(format!("cutoff r0 = {r0} must be positive")));
    }
    check_log_integrand(&log_g, r0)?;
    if let Some(tail) = tail {
        let rule = tail.integral_rule();
        return Ok(DivergenceVerdict {
            verdict: if rule.diverges() {
                Verdict::Diverges
            } else {
                Verdict::Converges
            },
            evidence: Evidence::Symbolic { tail, rule },
            r0,
            notes: Vec::new(),
        });
    }
    numeric_divergence(log_g, r0)
}

fn fit_exponent(log_g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Option<f64> {
    let count = 33;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..count {
        let r = a * libm::pow(b / a, i as f64 / (count - 1) as f64);
        let y = log_g(r);
        if !y.is_finite() {
            return None;
        }
        let x = libm::log(r);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let n = count as f64;
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Some(-slope)
}

fn numeric_divergence(log_g: &dyn Fn(f64) -> f64, r0: f64) -> Result<DivergenceVerdict> {
    let mut uppers = Vec::with_capacity(DOUBLINGS as usize);
    let mut partials = Vec::with_capacity(DOUBLINGS as usize);
    let mut acc = f64::NEG_INFINITY;
    let mut lo = r0;
    let mut notes = Vec::new();
    for _ in 0..DOUBLINGS {
        let hi = 2.0 * lo;
        let piece = match quad::log_integral_exp(log_g, lo, hi, 1e-8) {
            Ok(piece) => piece,
            Err(Error::QuadratureFailure { .. }) if negligible_piece(log_g, lo, hi, acc) => {
                notes.push(format!("[{lo}, {hi}] unresolved but below round-off of the partial integral"));
                f64::NEG_INFINITY
            }
            Err(e) => return Err(e),
        };
        acc = log_add(acc, piece);
        uppers.push(hi);
        partials.push(acc);
        lo = hi;
    }
    let k = partials.len();
    let mut growth = [0.0; 4];
    for (j, g) in growth.iter_mut().enumerate() {
        let (prev, cur) = (partials[k - 5 + j], partials[k - 4 + j]);
        *g = if prev == f64::NEG_INFINITY {
            if cur == f64::NEG_INFINITY {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            libm::expm1(cur - prev)
        };
    }
    let top = r0 * libm::pow(2.0, DOUBLINGS as f64);
    let fits = [
        fit_exponent(log_g, top / 4.0, top / 2.0),
        fit_exponent(log_g, top / 2.0, top),
    ];
    let vanishing = (0..33).all(|i| {
        let r = top / 4.0 * libm::pow(4.0, i as f64 / 32.0);
        log_g(r) == f64::NEG_INFINITY
    });
    let exponents = [
        fits[0].unwrap_or(f64::INFINITY),
        fits[1].unwrap_or(f64::INFINITY),
    ];
    let sustained = growth.iter().all(|&g| g >= GROWTH_PER_DOUBLING);
    let verdict = if vanishing {
        Verdict::Converges
    } else if let [Some(a1), Some(a2)] = fits {
        if a1 > CONVERGENT_EXPONENT && a2 > CONVERGENT_EXPONENT {
            Verdict::Converges
        } else if sustained
            && ((a1 <= CONVERGENT_EXPONENT
                && a2 <= CONVERGENT_EXPONENT
                && (a1 - a2).abs() <= FIT_AGREEMENT)
                || (a1 < 0.0 && a2 < 0.0))
        {
            Verdict::Diverges
        } else {
            Verdict::Inconclusive
        }
    } else {
        Verdict::Inconclusive
    };
    Ok(DivergenceVerdict {
        verdict,
        evidence: Evidence::Numeric(NumericEvidence {
            uppers,
            log_partials: partials,
            exponents,
            growth,
        }),
        r0,
        notes,
    })
}

/// Whether `∫_lo^hi e^{log_g}` is invisible next to `e^{acc}`, bounding the
/// piece by its width times the largest sampled value. Steep integrands
/// whose mass sits inside one ulp of `lo` defeat the quadrature but are
/// caught here.
fn negligible_piece(log_g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, acc: f64) -> bool {
    if !acc.is_finite() {
        return false;
    }
    let peak = (0..=256)
        .map(|i| log_g(lo * libm::pow(hi / lo, i as f64 / 256.0)))
        .fold(f64::NEG_INFINITY, f64::max);
    peak + libm::log(hi - lo) < acc - 40.0
}

/// Checks that `𝖪` is admissible and returns the effective profile
/// `𝖪 ∨ 𝖪(t₀)` when `𝖪` vanishes on an initial segment.
fn effective_ksf(ksf: &CurvatureProfile, notes: &mut Vec<String>) -> Result<CurvatureProfile> {
    let samples: Vec<f64> = core::iter::once(0.0)
        .chain((0..=400).map(|i| 1e-3 * libm::pow(1e10, i as f64 / 400.0)))
        .collect();
    if !ksf.is_nonnegative_nondecreasing(&samples) {
        return Err(Error::InvalidParameter(format!(
            "curvature bound {} must be non-negative and non-decreasing",
            ksf.label()
        )));
    }
    if ksf.is_identically_zero(&samples) {
        return Err(Error::ZeroProfile);
    }
    if ksf.eval(0.0) > 0.0 {
        return Ok(ksf.clone());
    }
    let t0 = samples
        .iter()
        .copied()
        .find(|&s| ksf.eval(s) > 0.0)
        .unwrap_or(samples[samples.len() - 1]);
    let floor = ksf.eval(t0);
    notes.push(format!("K replaced by max(K, K({t0:.3e})) = max(K, {floor:.3e})"));
    let inner = ksf.clone();
    Ok(CurvatureProfile::custom(
        format!("max({}, {floor})", ksf.label()),
        ksf.tail(),
        move |s| inner.eval(s).max(floor),
    ))
}

fn symbolic_phi_tails(model: &WeightedModel) -> Option<(Tail, Tail, Tail)> {
    // e^{−2φ̲/(n−m)}, e^{2φ̲/(n−m)}, e^{(2φ̄−2φ̲)/(n−m)}
    let d = model.n_minus_m();
    let (lo, hi) = model.phi_extrema_tails()?;
    let down = Tail::exp_of(lo.scale(-2.0 / d));
    let up = Tail::exp_of(lo.scale(2.0 / d));
    let spread = Tail::exp_of(hi.add(lo.scale(-1.0))?.scale(2.0 / d));
    Some((down, up, spread))
}

/// `T(r) = e^{−2φ̲_p(r)/(n−m)}·r` and its logarithm.
fn log_t_argument(model: &WeightedModel, r: f64) -> (f64, f64) {
    let lo = model.phi_lower(r);
    let log_t = -2.0 * lo / model.n_minus_m() + libm::log(r);
    (lo, log_t)
}

fn ln_ksf_at_log(ksf: &CurvatureProfile, log_t: f64) -> f64 {
    let k = ksf.eval(libm::exp(log_t));
    if k.is_finite() {
        return libm::log(k);
    }
    // 𝖪(T) overflowed; use the symbolic tail in log space when available
    match Tail::from_class(ksf.tail()) {
        Some(t) => {
            let mut v = t.log_coeff + t.power * log_t;
            if t.log_power != 0.0 {
                v += t.log_power * libm::log(log_t);
            }
            v
        }
        None => f64::INFINITY,
    }
}

/// Condition **K**(p): divergence of
/// `∫ dr / (√𝖪(e^{−2φ̲/(n−m)} r) · e^{−2φ̲/(n−m)})`.
pub fn condition_k(model: &WeightedModel, ksf: &CurvatureProfile) -> Result<DivergenceVerdict> {
    condition_k_at(model, ksf, 1.0)
}

pub fn condition_k_at(model: &WeightedModel, ksf: &CurvatureProfile, r0: f64) -> Result<DivergenceVerdict> {
    let mut notes = Vec::new();
    let ksf = effective_ksf(ksf, &mut notes)?;
    let d = model.n_minus_m();
    let tail = symbolic_phi_tails(model).and_then(|(down, _, _)| {
        let t_arg = down.mul(Tail::power(1.0, 1.0)?)?;
        let k_t = Tail::compose(ksf.tail(), t_arg)?;
        k_t.powf(-0.5).mul(down.recip())
    });
    let log_g = |r: f64| {
        let (lo, log_t) = log_t_argument(model, r);
        -0.5 * ln_ksf_at_log(&ksf, log_t) + 2.0 * lo / d
    };
    let mut v = classify_log_divergence(&log_g, tail, r0)?;
    v.notes.append(&mut notes);
    Ok(v)
}

/// Condition **K̄**(p): divergence of
/// `∫ dr / (√𝖪(e^{−2φ̲/(n−m)} r) · e^{(2φ̄−2φ̲)/(n−m)})`.
pub fn condition_k_bar(model: &WeightedModel, ksf: &CurvatureProfile) -> Result<DivergenceVerdict> {
    condition_k_bar_at(model, ksf, 1.0)
}

pub fn condition_k_bar_at(
    model: &WeightedModel,
    ksf: &CurvatureProfile,
    r0: f64,
) -> Result<DivergenceVerdict> {
    let mut notes = Vec::new();
    let ksf = effective_ksf(ksf, &mut notes)?;
    let d = model.n_minus_m();
    let tail = symbolic_phi_tails(model).and_then(|(down, _, spread)| {
        let t_arg = down.mul(Tail::power(1.0, 1.0)?)?;
        let k_t = Tail::compose(ksf.tail(), t_arg)?;
        k_t.powf(-0.5).mul(spread.recip())
    });
    let log_g = |r: f64| {
        let (lo, hi) = model.phi_extrema(r);
        let log_t = -2.0 * lo / d + libm::log(r);
        -0.5 * ln_ksf_at_log(&ksf, log_t) - (2.0 * hi - 2.0 * lo) / d
    };
    let mut v = classify_log_divergence(&log_g, tail, r0)?;
    v.notes.append(&mut notes);
    Ok(v)
}

/// Divergence of `∫ exp(2φ̲_p(r)/(n−m)) dr` (the `𝖪 ≡ 0` conservativeness
/// criterion).
pub fn condition_asymptotic_phi(model: &WeightedModel) -> Result<DivergenceVerdict> {
    condition_asymptotic_phi_at(model, 1.0)
}

pub fn condition_asymptotic_phi_at(model: &WeightedModel, r0: f64) -> Result<DivergenceVerdict> {
    let d = model.n_minus_m();
    let mut notes = Vec::new();
    if let Some((lo, _)) = model.phi_extrema_tails() {
        if lo.a == 0.0 {
            notes.push(format!(
                "liminf phi_lower/log r = {} > -inf (log-bounded lower tail)",
                lo.b
            ));
        }
    }
    let tail = symbolic_phi_tails(model).map(|(_, up, _)| up);
    let mut v = classify_log_divergence(&|r| 2.0 * model.phi_lower(r) / d, tail, r0)?;
    v.notes.append(&mut notes);
    Ok(v)
}

/// Divergence of `∫ exp(−(2φ̄_p − 2φ̲_p)/(n−m)) dr` (the `𝖪 ≡ 0` Feller
/// criterion).
pub fn condition_k0_feller(model: &WeightedModel) -> Result<DivergenceVerdict> {
    condition_k0_feller_at(model, 1.0)
}

pub fn condition_k0_feller_at(model: &WeightedModel, r0: f64) -> Result<DivergenceVerdict> {
    let d = model.n_minus_m();
    let tail = symbolic_phi_tails(model).map(|(_, _, spread)| spread.recip());
    classify_log_divergence(
        &|r| {
            let (lo, hi) = model.phi_extrema(r);
            -(2.0 * hi - 2.0 * lo) / d
        },
        tail,
        r0,
    )
}

/// Divergence of `∫ dr / √𝖪(r)`.
pub fn hsu_condition(ksf: &CurvatureProfile) -> Result<DivergenceVerdict> {
    hsu_condition_at(ksf, 1.0)
}

pub fn hsu_condition_at(ksf: &CurvatureProfile, r0: f64) -> Result<DivergenceVerdict> {
    let mut notes = Vec::new();
    let ksf = effective_ksf(ksf, &mut notes)?;
    let tail = Tail::from_class(ksf.tail()).map(|t| t.powf(-0.5));
    let mut v = classify_log_divergence(&|r| -0.5 * libm::log(ksf.eval(r)), tail, r0)?;
    v.notes.append(&mut notes);
    Ok(v)
}

/// `ln μ(B_r)` tabulated on a geometric grid, for the volume criteria.
struct LogVolumeTable {
    log_r: Vec<f64>,
    log_mu: Vec<f64>,
}

impl LogVolumeTable {
    fn build(model: &WeightedModel, r0: f64) -> Result<Self> {
        let per_doubling = 32;
        let top = r0 * libm::pow(2.0, DOUBLINGS as f64 + 1.0);
        let start = r0 / 4.0;
        let count = (libm::log2(top / start) * per_doubling as f64) as usize + 1;
        let mut log_r = Vec::with_capacity(count + 1);
        let mut log_mu = Vec::with_capacity(count + 1);
        let ln_omega = libm::log(sphere_area(model.n() - 1));
        let mut acc = quad::log_integral_exp(|t| model.log_density(t), 0.0, start, 1e-9)?;
        log_r.push(libm::log(start));
        log_mu.push(ln_omega + acc);
        let mut lo = start;
        for i in 1..=count {
            let hi = start * libm::pow(2.0, i as f64 / per_doubling as f64);
            acc = log_add(
                acc,
                quad::log_integral_exp(|t| model.log_density(t), lo, hi, 1e-9)?,
            );
            log_r.push(libm::log(hi));
            log_mu.push(ln_omega + acc);
            lo = hi;
        }
        Ok(Self { log_r, log_mu })
    }

    fn eval(&self, r: f64) -> f64 {
        let x = libm::log(r);
        let idx = self.log_r.partition_point(|&v| v <= x).clamp(1, self.log_r.len() - 1);
        let (x0, x1) = (self.log_r[idx - 1], self.log_r[idx]);
        let (y0, y1) = (self.log_mu[idx - 1], self.log_mu[idx]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// How `ln μ(B_r)` behaves for large `r`, derived from the density tail.
enum VolumeTail {
    /// `ln μ ~ a r^p`, `a > 0`.
    Exponential { a: f64, p: f64, b: f64, c: f64 },
    /// `μ ~ e^c r^{b+1}/(b+1)`.
    Polynomial { b: f64, c: f64 },
    /// `μ ~ e^c ln r`.
    Logarithmic { c: f64 },
    /// Total mass is finite.
    Bounded,
}

fn volume_tail(model: &WeightedModel) -> Option<VolumeTail> {
    let d = model.log_density_tail()?;
    let c = d.c + libm::log(sphere_area(model.n() - 1));
    Some(if d.a > 0.0 {
        VolumeTail::Exponential {
            a: d.a,
            p: d.p,
            b: d.b,
            c,
        }
    } else if d.a < 0.0 || d.b < -1.0 - 1e-12 {
        VolumeTail::Bounded
    } else if (d.b + 1.0).abs() <= 1e-12 {
        VolumeTail::Logarithmic { c }
    } else {
        VolumeTail::Polynomial { b: d.b, c }
    })
}

/// Grigor'yan's volume test: divergence of `∫ r dr / log μ(B_r)`. The
/// logarithm is floored at `1` (i.e. `μ(B_r)` is bounded by `max(μ(B_r), e)`),
/// so finite total mass counts as divergent.
pub fn grigoryan_test(model: &WeightedModel) -> Result<DivergenceVerdict> {
    grigoryan_test_at(model, 1.0)
}

pub fn grigoryan_test_at(model: &WeightedModel, r0: f64) -> Result<DivergenceVerdict> {
    if model.radius().is_finite() {
        return Err(Error::FiniteRadius {
            radius: model.radius(),
        });
    }
    let tail = volume_tail(model).and_then(|vt| match vt {
        VolumeTail::Exponential { a, p, .. } => Tail::power(1.0 / a, 1.0 - p),
        VolumeTail::Polynomial { b, .. } => Tail::log_power(1.0 / (b + 1.0), 1.0, -1.0),
        VolumeTail::Logarithmic { .. } => None,
        VolumeTail::Bounded => Tail::power(1.0, 1.0),
    });
    let table = match tail {
        Some(_) => None,
        None => Some(LogVolumeTable::build(model, r0)?),
    };
    let log_g = |r: f64| {
        let log_mu = match &table {
            Some(t) => t.eval(r),
            None => model.log_volume_ball(r).unwrap_or(f64::NAN),
        };
        libm::log(r) - libm::log(log_mu.max(1.0))
    };
    if tail.is_some() {
        // cheap sanity evaluation of the true integrand at the cutoff
        let v = log_g(r0);
        if v.is_nan() {
            return Err(Error::QuadratureFailure {
                a: 0.0,
                b: r0,
                estimate: f64::NAN,
            });
        }
        let rule = tail.unwrap().integral_rule();
        return Ok(DivergenceVerdict {
            verdict: if rule.diverges() {
                Verdict::Diverges
            } else {
                Verdict::Converges
            },
            evidence: Evidence::Symbolic {
                tail: tail.unwrap(),
                rule,
            },
            r0,
            notes: Vec::new(),
        });
    }
    classify_log_divergence(&log_g, None, r0)
}

/// Side conditions for the recurrence conclusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecurrenceSides {
    pub n_at_most_m_plus_one: bool,
    /// `None` when the potential has no symbolic tail.
    pub phi_lower_bounded: Option<bool>,
}

impl RecurrenceSides {
    pub fn hold(&self) -> bool {
        self.n_at_most_m_plus_one && self.phi_lower_bounded == Some(true)
    }
}

/// Divergence of `∫ r dr / μ(B_r)` together with the side conditions
/// `n ≤ m + 1` and `inf φ > −∞`.
pub fn recurrence_test(model: &WeightedModel) -> Result<(DivergenceVerdict, RecurrenceSides)> {
    recurrence_test_at(model, 1.0)
}

pub fn recurrence_test_at(
    model: &WeightedModel,
    r0: f64,
) -> Result<(DivergenceVerdict, RecurrenceSides)> {
    if model.radius().is_finite() {
        return Err(Error::FiniteRadius {
            radius: model.radius(),
        });
    }
    let sides = RecurrenceSides {
        n_at_most_m_plus_one: model.n() as f64 <= model.m() + 1.0,
        phi_lower_bounded: model.potential().tail().map(|t| t.direction() >= 0),
    };
    let tail = volume_tail(model).and_then(|vt| {
        let mu = match vt {
            VolumeTail::Exponential { a, p, b, c } => Tail {
                log_coeff: c - libm::log(a * p),
                power: b - (p - 1.0),
                log_power: 0.0,
                rate: a,
                growth: p,
            },
            VolumeTail::Polynomial { b, c } => Tail::power(libm::exp(c) / (b + 1.0), b + 1.0)?,
            VolumeTail::Logarithmic { c } => Tail::log_power(libm::exp(c), 0.0, 1.0)?,
            VolumeTail::Bounded => Tail::ONE,
        };
        Tail::power(1.0, 1.0)?.mul(mu.recip())
    });
    let table = match tail {
        Some(_) => None,
        None => Some(LogVolumeTable::build(model, r0)?),
    };
    let log_g = |r: f64| {
        let log_mu = match &table {
            Some(t) => t.eval(r),
            None => model.log_volume_ball(r).unwrap_or(f64::NAN),
        };
        libm::log(r) - log_mu
    };
    if let Some(tail) = tail {
        if log_g(r0).is_nan() {
            return Err(Error::QuadratureFailure {
                a: 0.0,
                b: r0,
                estimate: f64::NAN,
            });
        }
        let rule = tail.integral_rule();
        let v = DivergenceVerdict {
            verdict: if rule.diverges() {
                Verdict::Diverges
            } else {
                Verdict::Converges
            },
            evidence: Evidence::Symbolic { tail, rule },
            r0,
            notes: Vec::new(),
        };
        return Ok((v, sides));
    }
    Ok((classify_log_divergence(&log_g, None, r0)?, sides))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Potential, Warp};

    fn flat(n: u32, phi: Potential) -> WeightedModel {
        WeightedModel::new(n, 1.0, Warp::Euclidean, phi).unwrap()
    }

    #[test]
    fn engine_examples() {
        let harmonic = classify_divergence(&|r| 1.0 / r, Tail::power(1.0, -1.0), 1.0).unwrap();
        assert_eq!(harmonic.verdict, Verdict::Diverges);
        let square = classify_divergence(&|r| 1.0 / (r * r), Tail::power(1.0, -2.0), 1.0).unwrap();
        assert_eq!(square.verdict, Verdict::Converges);
        let rlogr = classify_divergence(
            &|r| 1.0 / (r * libm::log(r)),
            Tail::log_power(1.0, -1.0, -1.0),
            2.0,
        )
        .unwrap();
        assert_eq!(rlogr.verdict, Verdict::Diverges);
    }

    #[test]
    fn numeric_fallback_examples() {
        let harmonic = classify_divergence(&|r| 1.0 / r, None, 1.0).unwrap();
        assert_eq!(harmonic.verdict, Verdict::Diverges, "{harmonic:?}");
        let square = classify_divergence(&|r| 1.0 / (r * r), None, 1.0).unwrap();
        assert_eq!(square.verdict, Verdict::Converges);
        let flat = classify_divergence(&|_| 2.0, None, 5.0).unwrap();
        assert_eq!(flat.verdict, Verdict::Diverges);
        let decay = classify_divergence(&|r| libm::exp(-r), None, 1.0).unwrap();
        assert_eq!(decay.verdict, Verdict::Converges);
        let growth = classify_log_divergence(&|r| r, None, 1.0).unwrap();
        assert_eq!(growth.verdict, Verdict::Diverges);
        // ln ln r growth is too slow to certify numerically
        let rlogr = classify_divergence(&|r| 1.0 / (r * libm::log(r)), None, 2.0).unwrap();
        assert_eq!(rlogr.verdict, Verdict::Inconclusive);
        if let Evidence::Numeric(ev) = &rlogr.evidence {
            assert!(ev.log_partials.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn negative_integrand_is_rejected() {
        let err = classify_divergence(&|r| 1.0 - r, None, 1.0);
        assert!(matches!(err, Err(Error::NegativeIntegrand { .. })));
    }

    #[test]
    fn condition_k_examples() {
        let bounded = flat(3, Potential::Constant(1.0));
        let k = CurvatureProfile::constant(2.0);
        assert!(condition_k(&bounded, &k).unwrap().diverges());
        let r4 = CurvatureProfile::power_law(1.0, 4.0);
        assert_eq!(
            condition_k(&flat(3, Potential::Zero), &r4).unwrap().verdict,
            Verdict::Converges
        );
        assert!(matches!(
            condition_k(&bounded, &CurvatureProfile::constant(0.0)),
            Err(Error::ZeroProfile)
        ));
    }

    #[test]
    fn k_bar_examples() {
        let m = flat(3, Potential::Constant(-2.0));
        let k = CurvatureProfile::constant(1.0);
        let a = condition_k(&m, &k).unwrap();
        let b = condition_k_bar(&m, &k).unwrap();
        assert_eq!(a.verdict, Verdict::Diverges);
        assert_eq!(a.verdict, b.verdict);
        let linear = flat(3, Potential::Power { a: 1.0, p: 1.0 });
        assert_eq!(condition_k_bar(&linear, &k).unwrap().verdict, Verdict::Converges);
    }

    #[test]
    fn asymptotic_phi_examples() {
        assert!(condition_asymptotic_phi(&flat(3, Potential::Constant(-5.0)))
            .unwrap()
            .diverges());
        // φ = −c ln(1+r): e^{2φ/(n−m)} ~ r^{−c}
        for c in [0.5, 1.0] {
            let m = flat(3, Potential::LogPower { c: -c, q: 1.0 });
            assert!(condition_asymptotic_phi(&m).unwrap().diverges());
        }
        let steep = flat(3, Potential::LogPower { c: -3.0, q: 1.0 });
        let v = condition_asymptotic_phi(&steep).unwrap();
        assert_eq!(v.verdict, Verdict::Converges);
        assert!(!v.notes.is_empty());
    }

    #[test]
    fn k0_feller_for_monotone_potentials() {
        let m = flat(3, Potential::log_decay(2.0, 1.0));
        assert!(condition_k0_feller(&m).unwrap().diverges());
        let up = flat(3, Potential::Quadratic { a: 1.0 });
        assert_eq!(condition_k0_feller(&up).unwrap().verdict, Verdict::Converges);
    }

    #[test]
    fn volume_criteria_examples() {
        assert!(grigoryan_test(&flat(2, Potential::Zero)).unwrap().diverges());
        let (rec, sides) =
            recurrence_test(&WeightedModel::new(2, 1.0, Warp::Euclidean, Potential::Zero).unwrap())
                .unwrap();
        assert!(rec.diverges());
        assert!(sides.hold());
        let (rec3, sides3) = recurrence_test(&flat(3, Potential::Zero)).unwrap();
        assert_eq!(rec3.verdict, Verdict::Converges);
        assert!(!sides3.n_at_most_m_plus_one);
        let cubic = flat(3, Potential::Power { a: -1.0, p: 3.0 });
        assert_eq!(grigoryan_test(&cubic).unwrap().verdict, Verdict::Converges);
    }

    #[test]
    fn numeric_volume_criteria_agree_with_symbolic() {
        let numeric = Warp::Custom(crate::model::NumericFn::new("r", |r| r));
        let m = WeightedModel::new(2, 1.0, numeric, Potential::Zero).unwrap();
        let (rec, _) = recurrence_test(&m).unwrap();
        // 1/(π r) is borderline: partial integrals grow by ln 2/ln r per doubling
        assert_ne!(rec.verdict, Verdict::Converges);
        assert!(grigoryan_test(&m).unwrap().diverges());
    }

    #[test]
    fn hsu_examples() {
        assert!(hsu_condition(&CurvatureProfile::power_law(3.0, 2.0)).unwrap().diverges());
        assert_eq!(
            hsu_condition(&CurvatureProfile::power_law(1.0, 2.5)).unwrap().verdict,
            Verdict::Converges
        );
        assert!(hsu_condition(&CurvatureProfile::constant(4.0)).unwrap().diverges());
    }

    #[test]
    fn initial_zero_segment_is_lifted() {
        let table = CurvatureProfile::tabulated(alloc::vec![(0.0, 0.0), (1.0, 0.0), (2.0, 1.0)]);
        let v = hsu_condition(&table).unwrap();
        assert!(v.diverges());
        assert!(!v.notes.is_empty());
    }
}
