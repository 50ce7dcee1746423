//! The Jacobi equation `𝔰″ + κ𝔰 = 0`, `𝔰(0) = 0`, `𝔰′(0) = 1`, and the
//! derived Riccati quantities `cot_κ = 𝔰′/𝔰` and `m_κ = (n−m) cot_κ`.
//!
//! Integration starts at `ε = 10⁻⁶·max(1, s_max)` from the series
//! `𝔰(ε) = ε − κ(0)ε³/6`, `𝔰′(ε) = 1 − κ(0)ε²/2`, and proceeds with an
//! adaptive Dormand-Prince pair until `s_max` or the first zero `δ_κ`.

use alloc::format;
use alloc::vec::Vec;

use crate::ode::{DormandPrince, State, Step};
use crate::profile::CurvatureProfile;
use crate::{Error, Result};

/// Absolute tolerance of the bisection locating `δ_κ`.
pub const DELTA_ROOT_TOL: f64 = 1e-10;
/// A local minimum of `𝔰` below this value counts as a (grazing) zero.
pub const GRAZING_ZERO: f64 = 1e-12;
const MAX_STEPS: usize = 2_000_000;

/// First zero `δ_κ` of the Jacobi solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Delta {
    /// `𝔰_κ(δ) = 0` at the given point.
    At(f64),
    /// No zero on `(0, s_max]`; `δ_κ > s_max`.
    Beyond(f64),
}

impl Delta {
    /// `δ_κ`, or `+∞` if no zero was found on the solved range.
    pub fn value(&self) -> f64 {
        match *self {
            Delta::At(d) => d,
            Delta::Beyond(_) => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Delta::At(_))
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    s: f64,
    value: f64,
    slope: f64,
    curvature: f64,
}

/// Sampled solution of the Jacobi equation on `[ε, min(s_max, δ_κ)]`.
#[derive(Debug, Clone)]
pub struct JacobiSolution {
    nodes: Vec<Node>,
    delta: Delta,
    kappa: CurvatureProfile,
    kappa0: f64,
    s_max: f64,
    tol: f64,
}

fn curvature_at(kappa: &CurvatureProfile, s: f64) -> Result<f64> {
    let k = kappa.eval(s);
    if k.is_finite() {
        Ok(k)
    } else {
        Err(Error::NonFiniteCurvature { s })
    }
}

fn bisect<F: Fn(f64) -> f64>(g: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let glo = g(lo);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if (gm > 0.0) == (glo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves the Jacobi equation for `kappa` on `(0, s_max]` with relative
/// tolerance `tol ∈ (0, 10⁻³]`.
pub fn solve_jacobi(kappa: &CurvatureProfile, s_max: f64, tol: f64) -> Result<JacobiSolution> {
    if !(s_max > 0.0) || !s_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "s_max must be positive and finite, got {s_max}"
        )));
    }
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must lie in (0, 1e-3], got {tol}"
        )));
    }
    let kappa0 = curvature_at(kappa, 0.0)?;
    let eps = 1e-6 * s_max.max(1.0);
    let rhs = |s: f64, y: &State| -> Result<State> { Ok([y[1], -curvature_at(kappa, s)? * y[0]]) };
    let h_max = s_max / 2048.0;
    let dp = DormandPrince::new(rhs, tol, tol * eps, h_max);

    let mut s = eps;
    let mut y: State = [eps - kappa0 * eps * eps * eps / 6.0, 1.0 - kappa0 * eps * eps / 2.0];
    let mut dy = dp.rhs(s, &y)?;
    let mut nodes = Vec::with_capacity(4096);
    nodes.push(Node {
        s,
        value: y[0],
        slope: y[1],
        curvature: curvature_at(kappa, s)?,
    });
    let mut h = eps;
    let mut delta = Delta::Beyond(s_max);

    for _ in 0..MAX_STEPS {
        if s >= s_max {
            break;
        }
        let remaining = s_max - s;
        let (step, next) = dp.advance(s, &y, &dy, h.min(remaining))?;
        let step: Step = step;
        let end = if remaining - step.h <= 1e-14 * s_max {
            s_max
        } else {
            step.t1()
        };

        if step.y1[0] <= 0.0 {
            let root = bisect(|t| step.eval(t)[0], step.t0, end, DELTA_ROOT_TOL);
            let at = step.eval(root);
            nodes.push(Node {
                s: root,
                value: 0.0,
                slope: at[1],
                curvature: curvature_at(kappa, root)?,
            });
            delta = Delta::At(root);
            break;
        }
        if y[1] < 0.0 && step.y1[1] > 0.0 {
            let turn = bisect(|t| step.eval(t)[1], step.t0, end, DELTA_ROOT_TOL);
            let at = step.eval(turn);
            if at[0] < GRAZING_ZERO {
                nodes.push(Node {
                    s: turn,
                    value: 0.0,
                    slope: 0.0,
                    curvature: curvature_at(kappa, turn)?,
                });
                delta = Delta::At(turn);
                break;
            }
        }

        s = end;
        y = step.y1;
        dy = step.dy1;
        h = next;
        nodes.push(Node {
            s,
            value: y[0],
            slope: y[1],
            curvature: curvature_at(kappa, s)?,
        });
    }
    if matches!(delta, Delta::Beyond(_)) && s < s_max {
        return Err(Error::StepUnderflow { s, step: h });
    }

    Ok(JacobiSolution {
        nodes,
        delta,
        kappa: kappa.clone(),
        kappa0,
        s_max,
        tol,
    })
}

#[inline]
fn hermite(t: f64, h: f64, y0: f64, m0: f64, y1: f64, m1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * m0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * m1
}

impl JacobiSolution {
    pub fn delta(&self) -> Delta {
        self.delta
    }

    pub fn kappa(&self) -> &CurvatureProfile {
        &self.kappa
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Start of the integrated range (the series seed point `ε`).
    pub fn s_start(&self) -> f64 {
        self.nodes[0].s
    }

    /// Right end of the sampled range: `δ_κ` or `s_max`.
    pub fn s_end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1].s
    }

    /// `(s, 𝔰_κ(s), 𝔰_κ′(s))` at the integrator nodes.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.nodes.iter().map(|n| (n.s, n.value, n.slope))
    }

    fn check_closed_domain(&self, s: f64) -> Result<()> {
        if !(s >= 0.0) || s > self.s_end() {
            return Err(Error::OutOfDomain {
                value: s,
                domain: format!("[0, {}]", self.s_end()),
            });
        }
        Ok(())
    }

    /// `(𝔰_κ(s), 𝔰_κ′(s))` on `[0, min(s_max, δ_κ)]`.
    pub fn state(&self, s: f64) -> Result<(f64, f64)> {
        self.check_closed_domain(s)?;
        let first = self.nodes[0];
        if s <= first.s {
            let k0 = self.kappa0;
            return Ok((s - k0 * s * s * s / 6.0, 1.0 - k0 * s * s / 2.0));
        }
        let idx = self.nodes.partition_point(|n| n.s <= s);
        if idx >= self.nodes.len() {
            let last = self.nodes[self.nodes.len() - 1];
            return Ok((last.value, last.slope));
        }
        let a = self.nodes[idx - 1];
        let b = self.nodes[idx];
        let h = b.s - a.s;
        let t = (s - a.s) / h;
        let value = hermite(t, h, a.value, a.slope, b.value, b.slope);
        let slope = hermite(
            t,
            h,
            a.slope,
            -a.curvature * a.value,
            b.slope,
            -b.curvature * b.value,
        );
        Ok((value, slope))
    }

    /// `𝔰_κ(s)`.
    pub fn value(&self, s: f64) -> Result<f64> {
        self.state(s).map(|v| v.0)
    }

    /// `cot_κ(s) = 𝔰_κ′(s)/𝔰_κ(s)` for `0 < s < δ_κ` (and `s ≤ s_max`).
    pub fn cot_kappa(&self, s: f64) -> Result<f64> {
        let open_end = self.delta.value();
        if !(s > 0.0) || s >= open_end || s > self.s_max {
            return Err(Error::OutOfDomain {
                value: s,
                domain: format!("(0, {})", open_end.min(self.s_max)),
            });
        }
        if s < self.nodes[0].s {
            // series of 𝔰′/𝔰 about the pole
            return Ok(1.0 / s - self.kappa0 * s / 3.0);
        }
        let (v, d) = self.state(s)?;
        Ok(d / v)
    }

    /// `m_κ(s) = (n−m)·cot_κ(s)`.
    pub fn m_kappa(&self, s: f64, n: u32, m: f64) -> Result<f64> {
        Ok((n as f64 - m) * self.cot_kappa(s)?)
    }

    /// Residual `−a′ − κ − a²` of the Riccati equation for `a = cot_κ`,
    /// with `a′` from a central difference of step `h`.
    pub fn riccati_residual(&self, s: f64, h: f64) -> Result<f64> {
        let a = self.cot_kappa(s)?;
        let da = (self.cot_kappa(s + h)? - self.cot_kappa(s - h)?) / (2.0 * h);
        Ok(-da - self.kappa.eval(s) - a * a)
    }

    /// Residual `𝔰″ + κ𝔰` from a second central difference of step `h`.
    pub fn jacobi_residual(&self, s: f64, h: f64) -> Result<f64> {
        let y0 = self.value(s - h)?;
        let y1 = self.value(s)?;
        let y2 = self.value(s + h)?;
        Ok((y2 - 2.0 * y1 + y0) / (h * h) + self.kappa.eval(s) * y1)
    }
}
