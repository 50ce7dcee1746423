//! Monte Carlo simulation of the radial `L`-diffusion
//! `dr = √2 dβ + Lr_p(r) dt` and a 1D boundary classification oracle.
//!
//! Each path draws from its own ChaCha8 stream keyed by `(seed, path index)`,
//! so an estimate depends only on the inputs and not on how paths are
//! scheduled. [`PathSimulator::run_path`] is the per-path entry point for
//! callers that parallelize; [`SimulationEstimate::from_outcomes`] reduces the
//! results.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::asymptotic::Tail;
use crate::criteria::{classify_log_divergence, DivergenceVerdict, Verdict, DOUBLINGS};
use crate::model::WeightedModel;
use crate::quad;
use crate::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;
/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.5758293035489004;

/// Wilson score interval for `events` successes out of `n` trials.
pub fn wilson_interval(events: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = events as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

/// Discretization controls. The step at radius `r` with drift `b` is
/// `dt = min(dt_max, c·r², c·r/|b|)`, capped by the remaining horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scheme {
    /// Absolute step cap; unbounded by default since `c·r²` already bounds
    /// the step wherever the diffusion dominates.
    pub dt_max: f64,
    /// The constant `c` of the step rule.
    pub step_scale: f64,
    /// Explosion threshold; defaults to `10⁶·r_start`.
    pub r_explode: Option<f64>,
    /// Reflecting floor; defaults to `10⁻³·min(1, r_start)`.
    pub r_floor: Option<f64>,
    /// Paths still running after this many steps are censored.
    pub max_steps: u64,
}

impl Default for Scheme {
    fn default() -> Self {
        Self {
            dt_max: f64::INFINITY,
            step_scale: 0.001,
            r_explode: None,
            r_floor: None,
            max_steps: 1_000_000,
        }
    }
}

/// The concrete parameters a simulation ran with, reported with every estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeMetadata {
    pub dt_max: f64,
    pub step_scale: f64,
    pub r_explode: f64,
    pub r_floor: f64,
    pub max_steps: u64,
    pub r_start: f64,
    pub horizon: f64,
    /// Target radius for hitting estimates.
    pub target: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// `r` exceeds `r_explode` before the horizon.
    Explosion,
    /// `min r ≤ R_target` before the horizon.
    Hitting,
}

/// Fate of a single path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathOutcome {
    /// The event of interest happened.
    Event,
    /// Reached the horizon without the event.
    Horizon,
    /// Left through `r_explode` during a hitting estimate.
    Escaped,
    /// Ran out of steps.
    StepLimit,
}

impl PathOutcome {
    /// Paths counted in `n_censored`. For explosion estimates a path that
    /// survives to the horizon below `r_explode` is censored; for hitting
    /// estimates a path is censored when it escapes or runs out of steps
    /// before either hitting the target or reaching the horizon.
    pub fn censored(self, kind: EventKind) -> bool {
        match kind {
            EventKind::Explosion => matches!(self, PathOutcome::Horizon | PathOutcome::StepLimit),
            EventKind::Hitting => matches!(self, PathOutcome::Escaped | PathOutcome::StepLimit),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationEstimate {
    pub kind: EventKind,
    pub p_hat: f64,
    /// Wilson 95% interval.
    pub ci: (f64, f64),
    pub n_paths: u64,
    pub events: u64,
    pub n_censored: u64,
    pub seed: u64,
    pub scheme: SchemeMetadata,
}

impl SimulationEstimate {
    pub fn from_outcomes(
        kind: EventKind,
        outcomes: &[PathOutcome],
        seed: u64,
        scheme: SchemeMetadata,
    ) -> Self {
        let n = outcomes.len() as u64;
        let events = outcomes.iter().filter(|o| **o == PathOutcome::Event).count() as u64;
        let n_censored = outcomes.iter().filter(|o| o.censored(kind)).count() as u64;
        Self {
            kind,
            p_hat: if n == 0 { 0.0 } else { events as f64 / n as f64 },
            ci: wilson_interval(events, n, Z95),
            n_paths: n,
            events,
            n_censored,
            seed,
            scheme,
        }
    }

    /// Wilson interval at another confidence level.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.events, self.n_paths, z)
    }
}

/// A validated simulation setup for one starting radius.
#[derive(Debug, Clone)]
pub struct PathSimulator<'a> {
    model: &'a WeightedModel,
    kind: EventKind,
    meta: SchemeMetadata,
}

impl<'a> PathSimulator<'a> {
    /// Explosion before `horizon` from `r_start`.
    pub fn explosion(
        model: &'a WeightedModel,
        r_start: f64,
        horizon: f64,
        scheme: &Scheme,
    ) -> Result<Self> {
        Self::build(model, EventKind::Explosion, r_start, None, horizon, scheme)
    }

    /// Hitting of `B_{target}` before `horizon` (may be `+∞`) from `r_start`.
    pub fn hitting(
        model: &'a WeightedModel,
        r_start: f64,
        target: f64,
        horizon: f64,
        scheme: &Scheme,
    ) -> Result<Self> {
        if !(target > 0.0 && target < r_start) {
            return Err(Error::InvalidStart {
                r_start,
                reason: format!("hitting needs 0 < R_target < r_start, got R_target = {target}"),
            });
        }
        Self::build(model, EventKind::Hitting, r_start, Some(target), horizon, scheme)
    }

    fn build(
        model: &'a WeightedModel,
        kind: EventKind,
        r_start: f64,
        target: Option<f64>,
        horizon: f64,
        scheme: &Scheme,
    ) -> Result<Self> {
        if !(r_start > 0.0 && r_start < model.radius()) {
            return Err(Error::InvalidStart {
                r_start,
                reason: format!("start must lie in (0, {})", model.radius()),
            });
        }
        if !(horizon > 0.0) {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
        }
        if !(scheme.dt_max > 0.0 && scheme.step_scale > 0.0) {
            return Err(Error::InvalidParameter("dt_max and step scale must be positive".into()));
        }
        let r_explode = scheme.r_explode.unwrap_or(1e6 * r_start);
        let r_floor = scheme.r_floor.unwrap_or(1e-3 * r_start.min(1.0));
        if !(r_floor > 0.0 && r_floor < r_start && r_explode > r_start) {
            return Err(Error::InvalidParameter(format!(
                "need r_floor < r_start < r_explode, got {r_floor}, {r_start}, {r_explode}"
            )));
        }
        if let Some(t) = target {
            if !(t > r_floor) {
                return Err(Error::InvalidParameter(format!(
                    "target {t} must lie above the reflecting floor {r_floor}"
                )));
            }
        }
        Ok(Self {
            model,
            kind,
            meta: SchemeMetadata {
                dt_max: scheme.dt_max,
                step_scale: scheme.step_scale,
                r_explode,
                r_floor,
                max_steps: scheme.max_steps,
                r_start,
                horizon,
                target,
            },
        })
    }

    pub fn kind(&self) -> EventKind {
        self.kind
    }

    pub fn metadata(&self) -> SchemeMetadata {
        self.meta
    }

    /// Simulates path `index` of the run keyed by `seed`.
    pub fn run_path(&self, seed: u64, index: u64) -> Result<PathOutcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let m = &self.meta;
        // a finite radius acts as an escape boundary too
        let ceiling = m.r_explode.min(self.model.radius());
        let mut r = m.r_start;
        let mut t = 0.0;
        for _ in 0..m.max_steps {
            let b = self.model.drift(r);
            if !b.is_finite() {
                return Err(Error::DriftOverflow { r, path: index });
            }
            let mut dt = m.dt_max.min(m.step_scale * r * r);
            if b != 0.0 {
                dt = dt.min(m.step_scale * r / b.abs());
            }
            let last = dt >= m.horizon - t;
            if last {
                dt = m.horizon - t;
            }
            let tamed = b * dt / (1.0 + dt * b.abs() / r.max(1.0));
            let z: f64 = rng.sample(StandardNormal);
            let mut next = r + tamed + libm::sqrt(2.0 * dt) * z;
            if next < m.r_floor {
                next = (2.0 * m.r_floor - next).max(m.r_floor);
            }
            if let Some(target) = m.target {
                if next <= target {
                    return Ok(PathOutcome::Event);
                }
                // Brownian bridge crossing probability for variance 2 dt
                let cross = libm::exp(-(r - target) * (next - target) / dt);
                let u: f64 = rng.random();
                if u < cross {
                    return Ok(PathOutcome::Event);
                }
            }
            if next >= ceiling {
                return Ok(match self.kind {
                    EventKind::Explosion => PathOutcome::Event,
                    EventKind::Hitting => PathOutcome::Escaped,
                });
            }
            r = next;
            t += dt;
            if last {
                return Ok(PathOutcome::Horizon);
            }
        }
        Ok(PathOutcome::StepLimit)
    }

    /// Runs `n_paths` paths sequentially.
    pub fn estimate(&self, n_paths: u64, seed: u64) -> Result<SimulationEstimate> {
        let outcomes = (0..n_paths)
            .map(|i| self.run_path(seed, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.reduce(&outcomes, seed))
    }

    pub fn reduce(&self, outcomes: &[PathOutcome], seed: u64) -> SimulationEstimate {
        SimulationEstimate::from_outcomes(self.kind, outcomes, seed, self.meta)
    }
}

/// Estimates `P(explosion before T)` from `r_start`.
pub fn simulate_explosion(
    model: &WeightedModel,
    r_start: f64,
    horizon: f64,
    n_paths: u64,
    seed: u64,
    scheme: &Scheme,
) -> Result<SimulationEstimate> {
    PathSimulator::explosion(model, r_start, horizon, scheme)?.estimate(n_paths, seed)
}

/// Estimates `P_{r_start}(σ ≤ t)` for the first hitting time `σ` of `B_{target}`.
pub fn estimate_hitting_prob(
    model: &WeightedModel,
    r_start: f64,
    target: f64,
    horizon: f64,
    n_paths: u64,
    seed: u64,
    scheme: &Scheme,
) -> Result<SimulationEstimate> {
    PathSimulator::hitting(model, r_start, target, horizon, scheme)?.estimate(n_paths, seed)
}

/// Seed used for the `i`-th start of a decay scan.
pub fn scan_seed(seed: u64, start_index: usize) -> u64 {
    seed.wrapping_add((start_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FellerVerdict {
    FellerConsistent,
    NotFellerConsistent,
}

/// Upper CI bound the last estimate of a scan must stay under.
pub const FELLER_FINAL_UPPER: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct FellerScan {
    pub estimates: Vec<SimulationEstimate>,
    pub verdict: FellerVerdict,
}

impl FellerScan {
    /// Consistent when consecutive estimates never increase beyond CI
    /// overlap and the last CI upper bound is at most [`FELLER_FINAL_UPPER`].
    pub fn from_estimates(estimates: Vec<SimulationEstimate>) -> Self {
        let monotone = estimates
            .windows(2)
            .all(|w| w[1].p_hat <= w[0].p_hat || w[1].ci.0 <= w[0].ci.1);
        let tail_ok = estimates.last().map_or(false, |e| e.ci.1 <= FELLER_FINAL_UPPER);
        Self {
            verdict: if monotone && tail_ok {
                FellerVerdict::FellerConsistent
            } else {
                FellerVerdict::NotFellerConsistent
            },
            estimates,
        }
    }
}

/// `P_{r₀}(σ ≤ t)` for each `r₀` in `starts`, each start using [`scan_seed`].
pub fn feller_decay_scan(
    model: &WeightedModel,
    target: f64,
    horizon: f64,
    starts: &[f64],
    n_paths: u64,
    seed: u64,
    scheme: &Scheme,
) -> Result<FellerScan> {
    check_starts(starts, target)?;
    let estimates = starts
        .iter()
        .enumerate()
        .map(|(i, &r0)| {
            estimate_hitting_prob(model, r0, target, horizon, n_paths, scan_seed(seed, i), scheme)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FellerScan::from_estimates(estimates))
}

/// Validates a scan's start radii.
pub fn check_starts(starts: &[f64], target: f64) -> Result<()> {
    if starts.is_empty() || !starts.windows(2).all(|w| w[1] > w[0]) || !(starts[0] > target) {
        return Err(Error::InvalidParameter(format!(
            "starts must be strictly increasing and above R_target = {target}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryClass {
    /// Reached in finite time with positive probability.
    Accessible,
    Inaccessible,
    /// The numeric integral test was inconclusive.
    Undetermined,
}

impl BoundaryClass {
    fn from_verdict(v: &DivergenceVerdict) -> Self {
        match v.verdict {
            Verdict::Converges => BoundaryClass::Accessible,
            Verdict::Diverges => BoundaryClass::Inaccessible,
            Verdict::Inconclusive => BoundaryClass::Undetermined,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryClassification {
    pub plus_infinity: BoundaryClass,
    pub zero: BoundaryClass,
    /// Integral test behind `plus_infinity`: `∫^∞ s′(y) M(c, y) dy`.
    pub plus_test: DivergenceVerdict,
    /// Integral test behind `zero` after `y = 1/u`.
    pub zero_test: DivergenceVerdict,
}

/// Feller's test for the radial diffusion with generator `d²/dr² + b d/dr`.
///
/// With `L(y) = ln J_φ(y)` the speed density is `e^{L}` and the scale
/// density `e^{−L}`; a boundary is accessible exactly when
/// `∫ s′(y) M(c, y) dy` is finite near it, `M` being the speed measure
/// between `c = 1` and `y`.
pub fn feller_explosion_test_1d(model: &WeightedModel) -> Result<BoundaryClassification> {
    if model.radius().is_finite() {
        return Err(Error::FiniteRadius {
            radius: model.radius(),
        });
    }
    let c = 1.0;
    let log_m = |y: f64| model.log_density(y);
    let span = DOUBLINGS + 1;
    // ln[s′(y) M(c, y)] = ln M(c, y) − L(y)
    let outward = LogCumulative::build(&log_m, c, span, 1.0)?;
    let plus = |y: f64| outward.ln_mass(y) - log_m(y);
    let plus_tail = model.log_density_tail().and_then(plus_infinity_tail);
    let plus_test = classify_log_divergence(&plus, plus_tail, 2.0 * c)?;
    // y = 1/u on (0, c]: ∫_{1/c}^∞ s′(1/u) M(1/u, c) u^{−2} du
    let inward = LogCumulative::build(&log_m, c, span, -1.0)?;
    let zero = |u: f64| {
        let y = 1.0 / u;
        inward.ln_mass(y) - log_m(y) - 2.0 * libm::log(u)
    };
    let zero_test = classify_log_divergence(&zero, None, 2.0 / c)?;
    Ok(BoundaryClassification {
        plus_infinity: BoundaryClass::from_verdict(&plus_test),
        zero: BoundaryClass::from_verdict(&zero_test),
        plus_test,
        zero_test,
    })
}

const KNOTS_PER_DOUBLING: u32 = 64;

/// `ln ∫ e^{L}` between an anchor `c` and `y`, tabulated on a geometric grid
/// moving away from `c` (outwards for `dir = 1`, towards 0 for `dir = −1`)
/// and interpolated linearly in `ln y`.
struct LogCumulative {
    c: f64,
    dir: f64,
    ln_mass: Vec<f64>,
}

impl LogCumulative {
    fn build(log_m: &dyn Fn(f64) -> f64, c: f64, doublings: u32, dir: f64) -> Result<Self> {
        let count = (doublings * KNOTS_PER_DOUBLING) as usize;
        let mut ln_mass = Vec::with_capacity(count + 1);
        ln_mass.push(f64::NEG_INFINITY);
        let mut acc = f64::NEG_INFINITY;
        let mut prev = c;
        for k in 1..=count {
            let y = Self::knot(c, dir, k);
            let (a, b) = if dir > 0.0 { (prev, y) } else { (y, prev) };
            let panel = quad::log_integral_exp(|z| log_m(z), a, b, 1e-10)?;
            acc = crate::model::log_add(acc, panel);
            ln_mass.push(acc);
            prev = y;
        }
        Ok(Self { c, dir, ln_mass })
    }

    fn knot(c: f64, dir: f64, k: usize) -> f64 {
        c * libm::exp2(dir * k as f64 / KNOTS_PER_DOUBLING as f64)
    }

    fn ln_mass(&self, y: f64) -> f64 {
        let pos = self.dir * libm::log2(y / self.c) * KNOTS_PER_DOUBLING as f64;
        if !(pos >= 0.0) || pos > (self.ln_mass.len() - 1) as f64 {
            return f64::NAN;
        }
        let k = (libm::floor(pos) as usize).min(self.ln_mass.len() - 2);
        let w = pos - k as f64;
        let (lo, hi) = (self.ln_mass[k], self.ln_mass[k + 1]);
        if lo == f64::NEG_INFINITY {
            // first panel: ∫ grows linearly in the distance to c
            let y1 = Self::knot(self.c, self.dir, 1);
            return hi + libm::log(((y - self.c) / (y1 - self.c)).abs());
        }
        lo + w * (hi - lo)
    }
}

/// Leading tail of `y ↦ e^{−L(y)} ∫_c^y e^{L}` for `L = a y^p + b ln y + c`.
///
/// - `a > 0`: Laplace asymptotics give `1/L′(y) = y^{1−p}/(a p)`.
/// - `a = 0`, `b > −1`: the integral grows like `y^{b+1}/(b+1)`, the product like `y/(b+1)`.
/// - `a = 0`, `b = −1`: `y ln y`.
/// - `a = 0`, `b < −1` or `a < 0`: the integral converges and `e^{−L}` alone
///   sets the tail, which is at least `y` and so not integrable.
fn plus_infinity_tail(l: crate::model::LogTail) -> Option<Tail> {
    if l.a > 0.0 {
        Tail::power(1.0 / (l.a * l.p), 1.0 - l.p)
    } else if l.a < 0.0 {
        Some(Tail::exp_of(l.scale(-1.0)))
    } else if l.b > -1.0 {
        Tail::power(1.0 / (l.b + 1.0), 1.0)
    } else if l.b == -1.0 {
        Tail::log_power(1.0, 1.0, 1.0)
    } else {
        Tail::power(1.0, -l.b)
    }
}
