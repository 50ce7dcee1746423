//! Grid checks of the comparison inequalities on a model manifold.
//!
//! Every check returns a [`ComparisonReport`] holding both sides of the
//! inequality per grid point. Checks whose curvature hypothesis fails on the
//! grid come back as [`ReportVerdict::NotApplicable`] and never claim a
//! verdict on the inequality itself.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::jacobi::{solve_jacobi, Delta, JacobiSolution};
use crate::model::{Potential, WeightedModel};
use crate::profile::CurvatureProfile;
use crate::quad;
use crate::{Error, Result};

/// Relative tolerance handed to the Jacobi solver by the verifiers.
pub const JACOBI_TOL: f64 = 1e-10;
/// Default number of grid points.
pub const DEFAULT_GRID_POINTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InequalityId {
    CurvatureDimension,
    Laplacian,
    Riccati,
    VolumeElementPairwise,
    VolumeElementMonotone,
    BishopGromov,
    VolumeGrowth,
    Myers,
    ConditionA,
}

impl InequalityId {
    /// Short tag naming the statement being checked.
    pub fn tag(self) -> &'static str {
        match self {
            InequalityId::CurvatureDimension => "curvature-dimension-bound",
            InequalityId::Laplacian => "laplacian-comparison",
            InequalityId::Riccati => "riccati-inequality",
            InequalityId::VolumeElementPairwise => "volume-element-comparison",
            InequalityId::VolumeElementMonotone => "volume-element-monotonicity",
            InequalityId::BishopGromov => "bishop-gromov",
            InequalityId::VolumeGrowth => "volume-growth-bound",
            InequalityId::Myers => "weighted-myers",
            InequalityId::ConditionA => "condition-a",
        }
    }
}

/// Absolute plus relative slack: a row passes when
/// `margin ≥ −(abs + rel·max(|lhs|, |rhs|))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const CLOSED_FORM: Tolerance = Tolerance {
        abs: 1e-8,
        rel: 1e-8,
    };
    pub const FINITE_DIFFERENCE: Tolerance = Tolerance {
        abs: 1e-4,
        rel: 1e-4,
    };

    pub fn bound(&self, lhs: f64, rhs: f64) -> f64 {
        self.abs + self.rel * lhs.abs().max(rhs.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub r: f64,
    pub s_p: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

impl ReportRow {
    pub fn new(r: f64, s_p: f64, lhs: f64, rhs: f64) -> Self {
        Self {
            r,
            s_p,
            lhs,
            rhs,
            margin: rhs - lhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReportVerdict {
    Holds,
    Violated { r: f64, margin: f64 },
    NotApplicable(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub id: InequalityId,
    pub rows: Vec<ReportRow>,
    pub verdict: ReportVerdict,
    pub tolerance: Tolerance,
}

impl ComparisonReport {
    /// Builds the report and its verdict from evaluated rows.
    pub fn from_rows(id: InequalityId, rows: Vec<ReportRow>, tolerance: Tolerance) -> Self {
        let mut worst: Option<(f64, ReportRow)> = None;
        for row in &rows {
            let slack = row.margin + tolerance.bound(row.lhs, row.rhs);
            let bad = !(slack >= 0.0);
            if bad && worst.map_or(true, |(w, _)| slack < w || slack.is_nan()) {
                worst = Some((slack, *row));
            }
        }
        let verdict = match worst {
            None => ReportVerdict::Holds,
            Some((_, row)) => ReportVerdict::Violated {
                r: row.r,
                margin: row.margin,
            },
        };
        Self {
            id,
            rows,
            verdict,
            tolerance,
        }
    }

    pub fn not_applicable(id: InequalityId, reason: String, tolerance: Tolerance) -> Self {
        Self {
            id,
            rows: Vec::new(),
            verdict: ReportVerdict::NotApplicable(reason),
            tolerance,
        }
    }

    pub fn holds(&self) -> bool {
        self.verdict == ReportVerdict::Holds
    }

    pub fn is_violated(&self) -> bool {
        matches!(self.verdict, ReportVerdict::Violated { .. })
    }

    pub fn is_not_applicable(&self) -> bool {
        matches!(self.verdict, ReportVerdict::NotApplicable(_))
    }

    /// Smallest margin over the rows (`+∞` for an empty report).
    pub fn min_margin(&self) -> f64 {
        self.rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min)
    }

    /// Largest `|margin|` over the rows.
    pub fn max_abs_margin(&self) -> f64 {
        self.rows.iter().map(|r| r.margin.abs()).fold(0.0, f64::max)
    }
}

/// `count` geometrically spaced radii on `[lo, hi]`.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return alloc::vec![hi];
    }
    let ratio = hi / lo;
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                lo * libm::pow(ratio, i as f64 / (count - 1) as f64)
            }
        })
        .collect()
}

/// Default verification grid: 256 geometric points on `[10⁻³ r_max, r_max]`
/// with `r_max = min(3, 0.95 R)`.
pub fn default_grid(model: &WeightedModel) -> Vec<f64> {
    let r_max = 3.0f64.min(0.95 * model.radius());
    geometric_grid(1e-3 * r_max, r_max, DEFAULT_GRID_POINTS)
}

/// `s_p` on the grid, accumulated interval by interval.
fn s_on_grid(model: &WeightedModel, grid: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(grid.len());
    let mut prev = 0.0;
    let mut s = 0.0;
    for &r in grid {
        s += model.reparam_increment(prev, r)?;
        out.push(s);
        prev = r;
    }
    Ok(out)
}

fn check_grid(model: &WeightedModel, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidParameter("grid must be strictly increasing".into()));
        }
    }
    if !(grid[0] > 0.0) || !(grid[grid.len() - 1] < model.radius()) {
        return Err(Error::OutOfDomain {
            value: grid[grid.len() - 1],
            domain: format!("(0, {})", model.radius()),
        });
    }
    Ok(())
}

/// A tabulated `κ` in the s-variable with
/// `Ric_{m,n}(L) ≥ (n−m) κ(s_p) e^{−4φ/(n−m)}` near the grid.
///
/// Each knot takes the minimum of the pointwise bound over itself and its
/// two neighbours, so the linear interpolant stays below the bound at both
/// ends of every segment and does not overshoot it where it is convex.
pub fn fit_curvature_bound(model: &WeightedModel, grid: &[f64]) -> Result<CurvatureProfile> {
    check_grid(model, grid)?;
    let s = s_on_grid(model, grid)?;
    let d = model.n_minus_m();
    let mut pointwise = Vec::with_capacity(grid.len());
    for &r in grid {
        let ric = model.bakry_emery_ricci_radial(r)?;
        pointwise.push(ric * libm::exp(4.0 * model.phi(r) / d) / d);
    }
    let last = pointwise.len() - 1;
    let mut knots = Vec::with_capacity(grid.len() + 1);
    for i in 0..=last {
        let lo = pointwise[i.saturating_sub(1)..=(i + 1).min(last)]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        knots.push((s[i], lo));
    }
    let first = knots[0].1;
    knots.insert(0, (0.0, first));
    Ok(CurvatureProfile::tabulated(knots))
}

/// The smallest non-negative non-decreasing `𝖪` with
/// `Ric_{m,n}(L) ≥ −𝖪(s_p) e^{−4φ/(n−m)}` on the grid: running maximum
/// from the left of `max(0, −(n−m)κ)` for the fitted `κ`.
pub fn fit_ksf_envelope(model: &WeightedModel, grid: &[f64]) -> Result<CurvatureProfile> {
    check_grid(model, grid)?;
    let s = s_on_grid(model, grid)?;
    let d = model.n_minus_m();
    let mut knots = Vec::with_capacity(grid.len() + 1);
    let mut running = 0.0f64;
    for (i, &r) in grid.iter().enumerate() {
        let ric = model.bakry_emery_ricci_radial(r)?;
        let need = -ric * libm::exp(4.0 * model.phi(r) / d);
        running = running.max(need).max(0.0);
        knots.push((s[i], running));
    }
    let first = knots[0].1;
    knots.insert(0, (0.0, first));
    Ok(CurvatureProfile::tabulated(knots))
}

/// The curvature-dimension hypothesis `Ric_{m,n}(L) ≥ (n−m) κ(s_p) e^{−4φ/(n−m)}`.
pub fn check_cd_hypothesis(
    model: &WeightedModel,
    kappa: &CurvatureProfile,
    grid: &[f64],
    s: &[f64],
) -> Result<ComparisonReport> {
    let d = model.n_minus_m();
    let mut rows = Vec::with_capacity(grid.len());
    for (i, &r) in grid.iter().enumerate() {
        let ric = model.bakry_emery_ricci_radial(r)?;
        let bound = d * kappa.eval(s[i]) * libm::exp(-4.0 * model.phi(r) / d);
        rows.push(ReportRow::new(r, s[i], bound, ric));
    }
    Ok(ComparisonReport::from_rows(
        InequalityId::CurvatureDimension,
        rows,
        Tolerance::CLOSED_FORM,
    ))
}

fn cd_failure(cd: &ComparisonReport) -> Option<String> {
    match cd.verdict {
        ReportVerdict::Violated { r, margin } => Some(format!(
            "curvature-dimension hypothesis fails at r = {r:.6e} (margin {margin:.3e})"
        )),
        _ => None,
    }
}

fn jacobi_for(kappa: &CurvatureProfile, s_top: f64) -> Result<JacobiSolution> {
    solve_jacobi(kappa, (s_top * (1.0 + 1e-6)).max(1e-6), JACOBI_TOL)
}

/// Checks `Lr_p ≤ e^{−2φ/(n−m)} m_κ(s_p)` on the grid, after the
/// curvature-dimension hypothesis and `s_p < δ_κ`.
pub fn verify_laplacian_comparison(
    model: &WeightedModel,
    kappa: &CurvatureProfile,
    grid: &[f64],
) -> Result<ComparisonReport> {
    let tol = Tolerance::CLOSED_FORM;
    check_grid(model, grid)?;
    let s = s_on_grid(model, grid)?;
    let cd = check_cd_hypothesis(model, kappa, grid, &s)?;
    if let Some(reason) = cd_failure(&cd) {
        return Ok(ComparisonReport::not_applicable(InequalityId::Laplacian, reason, tol));
    }
    let sol = jacobi_for(kappa, s[s.len() - 1])?;
    let delta = sol.delta().value();
    let d = model.n_minus_m();
    let mut rows = Vec::with_capacity(grid.len());
    for (i, &r) in grid.iter().enumerate() {
        if s[i] >= delta {
            // s_p < δ_κ is itself a consequence of the hypothesis
            let row = ReportRow::new(r, s[i], s[i], delta);
            return Ok(ComparisonReport {
                id: InequalityId::Laplacian,
                rows: alloc::vec![row],
                verdict: ReportVerdict::Violated {
                    r,
                    margin: row.margin,
                },
                tolerance: tol,
            });
        }
        let lhs = model.weighted_laplacian_of_r(r)?;
        let rhs = libm::exp(-2.0 * model.phi(r) / d) * d * sol.cot_kappa(s[i])?;
        rows.push(ReportRow::new(r, s[i], lhs, rhs));
    }
    Ok(ComparisonReport::from_rows(InequalityId::Laplacian, rows, tol))
}

/// Checks `dλ/ds ≤ −λ²/(n−m) − e^{4φ/(n−m)} Ric_{m,n}(L)` with `dλ/ds`
/// from a central difference in `r`.
pub fn verify_riccati_inequality(model: &WeightedModel, grid: &[f64]) -> Result<ComparisonReport> {
    check_grid(model, grid)?;
    let s = s_on_grid(model, grid)?;
    let d = model.n_minus_m();
    let mut rows = Vec::with_capacity(grid.len());
    for (i, &r) in grid.iter().enumerate() {
        let h = 1e-4 * r;
        if r - h < model.r_min() || r + h >= model.radius() {
            continue;
        }
        let dl_dr = (model.lambda_of_s(r + h)? - model.lambda_of_s(r - h)?) / (2.0 * h);
        let dl_ds = libm::exp(2.0 * model.phi(r) / d) * dl_dr;
        let lambda = model.lambda_of_s(r)?;
        let ric = model.bakry_emery_ricci_radial(r)?;
        let rhs = -lambda * lambda / d - libm::exp(4.0 * model.phi(r) / d) * ric;
        rows.push(ReportRow::new(r, s[i], dl_ds, rhs));
    }
    Ok(ComparisonReport::from_rows(
        InequalityId::Riccati,
        rows,
        Tolerance::FINITE_DIFFERENCE,
    ))
}

/// Pairwise and monotone forms of the volume element comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeElementReports {
    /// `J_φ(b)/J_φ(a) ≤ 𝔰_κ(s_p(b))^{n−m}/𝔰_κ(s_p(a))^{n−m}` over grid pairs,
    /// each row holding the quotient of the two sides against `1`.
    pub pairwise: ComparisonReport,
    /// `r ↦ J_φ(r)/𝔰_κ(s_p(r))^{n−m}` non-increasing: each row compares the
    /// quotient at a grid point (lhs) with the one at the previous point.
    pub monotone: ComparisonReport,
}

/// Volume element comparison on `[r₀, r₁]` sampled at `count` points.
pub fn verify_volume_element_comparison(
    model: &WeightedModel,
    kappa: &CurvatureProfile,
    r0: f64,
    r1: f64,
    count: usize,
) -> Result<VolumeElementReports> {
    if !(0.0 < r0 && r0 < r1 && r1 < model.radius()) || count < 2 {
        return Err(Error::InvalidParameter(format!(
            "volume element comparison needs 0 < r0 < r1 < R, got [{r0}, {r1}]"
        )));
    }
    let tol = Tolerance::CLOSED_FORM;
    let grid = geometric_grid(r0, r1, count);
    let s = s_on_grid(model, &grid)?;
    let cd = check_cd_hypothesis(model, kappa, &grid, &s)?;
    if let Some(reason) = cd_failure(&cd) {
        return Ok(VolumeElementReports {
            pairwise: ComparisonReport::not_applicable(
                InequalityId::VolumeElementPairwise,
                reason.clone(),
                tol,
            ),
            monotone: ComparisonReport::not_applicable(
                InequalityId::VolumeElementMonotone,
                reason,
                tol,
            ),
        });
    }
    let sol = jacobi_for(kappa, s[s.len() - 1])?;
    let d = model.n_minus_m();
    let mut log_j = Vec::with_capacity(count);
    let mut log_sn = Vec::with_capacity(count);
    for (i, &r) in grid.iter().enumerate() {
        log_j.push(model.log_density(r));
        let v = sol.value(s[i])?;
        log_sn.push(d * libm::log(v));
    }
    let mut mono = Vec::with_capacity(count - 1);
    for i in 1..count {
        let prev = libm::exp(log_j[i - 1] - log_sn[i - 1]);
        let cur = libm::exp(log_j[i] - log_sn[i]);
        mono.push(ReportRow::new(grid[i], s[i], cur, prev));
    }
    let stride = (count / 20).max(1);
    let picks: Vec<usize> = (0..count).step_by(stride).collect();
    let mut pairs = Vec::new();
    for (a_idx, &a) in picks.iter().enumerate() {
        for &b in &picks[a_idx + 1..] {
            let lhs = libm::exp((log_j[b] - log_j[a]) - (log_sn[b] - log_sn[a]));
            pairs.push(ReportRow::new(grid[b], s[b], lhs, 1.0));
        }
    }
    Ok(VolumeElementReports {
        pairwise: ComparisonReport::from_rows(InequalityId::VolumeElementPairwise, pairs, tol),
        monotone: ComparisonReport::from_rows(InequalityId::VolumeElementMonotone, mono, tol),
    })
}

/// `ν(κ, a, b) = ω_{n−1} ∫_a^b 𝔰_κ(s_p(r))^{n−m} dr` without the sphere factor.
fn nu_integral(
    model: &WeightedModel,
    sol: &JacobiSolution,
    a: f64,
    b: f64,
    s_a: f64,
) -> Result<f64> {
    let d = model.n_minus_m();
    let integrand = |t: f64| {
        let s = s_a + quad::integrate(|u| model.speed(u), a, t, 1e-12).unwrap_or(f64::NAN);
        match sol.value(s.min(sol.s_end())) {
            Ok(v) if v > 0.0 => libm::pow(v, d),
            Ok(_) => 0.0,
            Err(_) => f64::NAN,
        }
    };
    quad::integrate(integrand, a, b, 1e-10)
}

/// Checks `μ(A(r_b, r₁))/μ(A(r₀, r_a)) ≤ ν(κ, r_b, r₁)/ν(κ, r₀, r_a)`.
pub fn verify_bishop_gromov(
    model: &WeightedModel,
    kappa: &CurvatureProfile,
    r0: f64,
    ra: f64,
    rb: f64,
    r1: f64,
) -> Result<ComparisonReport> {
    if !(0.0 <= r0 && r0 < ra && ra <= r1 && r0 <= rb && rb < r1 && r1 < model.radius()) {
        return Err(Error::InvalidParameter(format!(
            "annuli need 0 ≤ r0 < ra ≤ r1, r0 ≤ rb < r1 < R; got ({r0}, {ra}, {rb}, {r1})"
        )));
    }
    let tol = Tolerance::CLOSED_FORM;
    let cd_grid = geometric_grid(1e-3 * r1, r1, 64);
    let cd_s = s_on_grid(model, &cd_grid)?;
    let cd = check_cd_hypothesis(model, kappa, &cd_grid, &cd_s)?;
    if let Some(reason) = cd_failure(&cd) {
        return Ok(ComparisonReport::not_applicable(InequalityId::BishopGromov, reason, tol));
    }
    let s1 = model.reparam_distance(r1)?;
    let sol = jacobi_for(kappa, s1)?;
    let mu_num = model.log_volume_annulus(rb, r1)?;
    let mu_den = model.log_volume_annulus(r0, ra)?;
    if mu_den == f64::NEG_INFINITY {
        return Err(Error::DegenerateAnnulus { inner: r0, outer: ra });
    }
    let s0 = model.reparam_distance(r0)?;
    let sb = model.reparam_distance(rb)?;
    let nu_num = nu_integral(model, &sol, rb, r1, sb)?;
    let nu_den = nu_integral(model, &sol, r0, ra, s0)?;
    if !(nu_den > 0.0) {
        return Err(Error::DegenerateAnnulus { inner: r0, outer: ra });
    }
    let row = ReportRow::new(r1, s1, libm::exp(mu_num - mu_den), nu_num / nu_den);
    Ok(ComparisonReport::from_rows(
        InequalityId::BishopGromov,
        alloc::vec![row],
        tol,
    ))
}

/// Ball form of the volume comparison along a grid: with `R` the last grid
/// point, each row below `R` compares `ν(κ, 0, r)/ν(κ, 0, R)` (lhs) with
/// `μ(B_r)/μ(B_R)` (rhs). `rhs ≥ lhs` is the ball case `(0, r; 0, R)` of the
/// annulus comparison, written so both sides lie in `[0, 1]`.
pub fn verify_bishop_gromov_scan(
    model: &WeightedModel,
    kappa: &CurvatureProfile,
    grid: &[f64],
) -> Result<ComparisonReport> {
    let tol = Tolerance::CLOSED_FORM;
    check_grid(model, grid)?;
    let s = s_on_grid(model, grid)?;
    let cd = check_cd_hypothesis(model, kappa, grid, &s)?;
    if let Some(reason) = cd_failure(&cd) {
        return Ok(ComparisonReport::not_applicable(InequalityId::BishopGromov, reason, tol));
    }
    let sol = jacobi_for(kappa, s[s.len() - 1])?;
    let cache = model.profile_cache(grid)?;
    let mut nu = Vec::with_capacity(grid.len());
    let (mut prev_r, mut prev_s, mut acc) = (0.0, 0.0, 0.0);
    for (i, &r) in grid.iter().enumerate() {
        acc += nu_integral(model, &sol, prev_r, r, prev_s)?;
        nu.push(acc);
        prev_r = r;
        prev_s = s[i];
    }
    let last = grid.len() - 1;
    // the row at R itself is the normalization 1 = 1 and is left out
    let rows = grid[..last]
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let mu_ratio = libm::exp(cache.log_mu_ball[i] - cache.log_mu_ball[last]);
            ReportRow::new(r, s[i], nu[i] / nu[last], mu_ratio)
        })
        .collect();
    Ok(ComparisonReport::from_rows(InequalityId::BishopGromov, rows, tol))
}

/// Right-hand side of the ball growth bound for `r₁ < r₂`:
/// `e^{2(φ̄(r₁)−φ̲(r₂))} (r₂/r₁)^{n−m+1} exp(√((n−m)𝖪(T)) T)` with
/// `T = e^{−2φ̲(r₂)/(n−m)} r₂`.
pub fn volume_growth_rhs(model: &WeightedModel, ksf: &CurvatureProfile, r1: f64, r2: f64) -> f64 {
    let d = model.n_minus_m();
    let hi1 = model.phi_upper(r1);
    let lo2 = model.phi_lower(r2);
    let t = libm::exp(-2.0 * lo2 / d) * r2;
    let k = ksf.eval(t).max(0.0);
    libm::exp(2.0 * (hi1 - lo2) + (d + 1.0) * libm::log(r2 / r1) + libm::sqrt(d * k) * t)
}

/// Checks `μ(B_{r₂})/μ(B_{r₁})` against [`volume_growth_rhs`] for each `r₂`
/// in `r2_grid`, after verifying `Ric_{m,n}(L) ≥ −𝖪(s_p) e^{−4φ/(n−m)}`.
pub fn verify_volume_growth_bound(
    model: &WeightedModel,
    ksf: &CurvatureProfile,
    r1: f64,
    r2_grid: &[f64],
) -> Result<ComparisonReport> {
    let tol = Tolerance::CLOSED_FORM;
    check_grid(model, r2_grid)?;
    if !(r1 > 0.0 && r1 < r2_grid[0]) {
        return Err(Error::InvalidParameter(format!(
            "volume growth needs 0 < r1 < r2, got r1 = {r1}, r2 ≥ {}",
            r2_grid[0]
        )));
    }
    let top = r2_grid[r2_grid.len() - 1];
    let samples: Vec<f64> = (0..=200).map(|i| 10.0 * top * i as f64 / 200.0).collect();
    if !ksf.is_nonnegative_nondecreasing(&samples) {
        return Ok(ComparisonReport::not_applicable(
            InequalityId::VolumeGrowth,
            "curvature bound must be non-negative and non-decreasing".into(),
            tol,
        ));
    }
    let d = model.n_minus_m();
    let kappa = CurvatureProfile::kappa_from_lower_bound(ksf, d);
    let cd_grid = geometric_grid(1e-3 * top, top, 128);
    let cd_s = s_on_grid(model, &cd_grid)?;
    let cd = check_cd_hypothesis(model, &kappa, &cd_grid, &cd_s)?;
    if let Some(reason) = cd_failure(&cd) {
        return Ok(ComparisonReport::not_applicable(InequalityId::VolumeGrowth, reason, tol));
    }
    let log_mu1 = model.log_volume_ball(r1)?;
    let s = s_on_grid(model, r2_grid)?;
    let mut rows = Vec::with_capacity(r2_grid.len());
    for (i, &r2) in r2_grid.iter().enumerate() {
        let lhs = libm::exp(model.log_volume_ball(r2)? - log_mu1);
        rows.push(ReportRow::new(r2, s[i], lhs, volume_growth_rhs(model, ksf, r1, r2)));
    }
    Ok(ComparisonReport::from_rows(InequalityId::VolumeGrowth, rows, tol))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MyersDiagnostic {
    pub delta: Delta,
    /// `sup_{r<R} s_p(r)`.
    pub s_sup: f64,
    /// Radius `r*` with `s_p(r*) = δ_κ`, when it exists inside `(0, R]`.
    pub compact_radius: Option<f64>,
    /// One row: `lhs = s_sup`, `rhs = δ_κ`.
    pub report: ComparisonReport,
}

/// Checks `sup s_p ≤ δ_κ` and locates the radius `r*` at which `s_p` reaches `δ_κ`.
pub fn myers_diagnostic(model: &WeightedModel, kappa: &CurvatureProfile) -> Result<MyersDiagnostic> {
    let tol = Tolerance::CLOSED_FORM;
    let radius = model.radius();
    let top = if radius.is_finite() {
        radius * (1.0 - 1e-6)
    } else {
        model.eval_radius()
    };
    let grid = geometric_grid(1e-3 * top, top, 256);
    let s = s_on_grid(model, &grid)?;
    let s_sup = if radius.is_finite() {
        model.reparam_distance(radius)?
    } else {
        match model.phi_m_complete() {
            Ok((crate::Completeness::Complete, _)) => f64::INFINITY,
            _ => {
                let tail = quad::integrate_to_infinity(|t| model.speed(t), top, 1e-10)
                    .unwrap_or(f64::INFINITY);
                s[s.len() - 1] + tail
            }
        }
    };
    let cap = if s_sup.is_finite() {
        1.5 * s_sup + 1.0
    } else {
        1e3
    };
    // strongly negative κ overflows long before s = 1e3, so back off the cap
    let mut attempt = solve_jacobi(kappa, cap, JACOBI_TOL);
    let mut cap = cap;
    for smaller in [100.0, 30.0, 10.0] {
        if attempt.is_ok() || smaller >= cap {
            break;
        }
        cap = smaller;
        attempt = solve_jacobi(kappa, cap, JACOBI_TOL);
    }
    let delta = attempt?.delta();
    let not_app = |reason: String| MyersDiagnostic {
        delta,
        s_sup,
        compact_radius: None,
        report: ComparisonReport::not_applicable(InequalityId::Myers, reason, tol),
    };
    let cd = check_cd_hypothesis(model, kappa, &grid, &s)?;
    if let Some(reason) = cd_failure(&cd) {
        return Ok(not_app(reason));
    }
    let Delta::At(delta_value) = delta else {
        return Ok(not_app(format!(
            "no finite first zero of the Jacobi solution below s = {cap}"
        )));
    };
    let compact_radius = find_radius_for_s(model, delta_value, radius, top)?;
    let row = ReportRow::new(radius.min(top), s_sup, s_sup, delta_value);
    Ok(MyersDiagnostic {
        delta,
        s_sup,
        compact_radius,
        report: ComparisonReport::from_rows(InequalityId::Myers, alloc::vec![row], tol),
    })
}

fn find_radius_for_s(model: &WeightedModel, target: f64, radius: f64, top: f64) -> Result<Option<f64>> {
    let hi_limit = if radius.is_finite() { radius } else { 1e6 * top };
    let s_hi = model.reparam_distance(hi_limit).unwrap_or(f64::INFINITY);
    if s_hi < target * (1.0 - 1e-9) {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, hi_limit);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if model.reparam_distance(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// The two eigenvalues of `Hess(h) + (K/(n−m)) h^{−3} E_n` at radius `ρ`
/// for `h = e^{φ/(n−m)}`: `(radial, tangential)`.
pub fn condition_a_eigenvalues(n_minus_m: f64, k: f64, potential: &Potential, rho: f64) -> (f64, f64) {
    let (radial, tangential, h) = hessian_eigenvalues(n_minus_m, potential, rho);
    let shift = k / n_minus_m * libm::pow(h, -3.0);
    (radial + shift, tangential + shift)
}

fn hessian_eigenvalues(d: f64, potential: &Potential, rho: f64) -> (f64, f64, f64) {
    let h = libm::exp(potential.phi(rho) / d);
    let dp = potential.dphi(rho);
    let ddp = potential.ddphi(rho);
    let radial = h * (ddp / d + dp * dp / (d * d));
    let tangential = if rho == 0.0 {
        h * ddp / d
    } else {
        h * dp / (rho * d)
    };
    (radial, tangential, h)
}

/// Condition (A) on a radial grid: the minimum eigenvalue must be `≥ 0`
/// (within `10⁻¹²`). Rows carry `lhs = 0`, `rhs = min eigenvalue`.
pub fn check_condition_a(
    n: u32,
    m: f64,
    k: f64,
    potential: &Potential,
    x_grid: &[f64],
) -> Result<ComparisonReport> {
    let d = n as f64 - m;
    if n < 2 || !(m <= 1.0) || !(k >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "condition (A) needs n ≥ 2, m ≤ 1, K ≥ 0; got n = {n}, m = {m}, K = {k}"
        )));
    }
    let rows = x_grid
        .iter()
        .map(|&rho| {
            let (a, b) = condition_a_eigenvalues(d, k, potential, rho);
            ReportRow::new(rho, rho, 0.0, a.min(b))
        })
        .collect();
    Ok(ComparisonReport::from_rows(
        InequalityId::ConditionA,
        rows,
        Tolerance { abs: 1e-12, rel: 0.0 },
    ))
}

/// Smallest `K ≥ 0` for which condition (A) holds on the grid:
/// `(n−m)·max(0, −λ_min(Hess h)·h³)`.
pub fn condition_a_min_k(n: u32, m: f64, potential: &Potential, x_grid: &[f64]) -> f64 {
    let d = n as f64 - m;
    x_grid
        .iter()
        .map(|&rho| {
            let (a, b, h) = hessian_eigenvalues(d, potential, rho);
            -a.min(b) * h * h * h * d
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Warp;
    use core::f64::consts::PI;

    fn model(n: u32, warp: Warp, phi: Potential) -> WeightedModel {
        WeightedModel::new(n, 1.0, warp, phi).unwrap()
    }

    #[test]
    fn laplacian_equality_cases() {
        let flat = model(3, Warp::Euclidean, Potential::Zero);
        let rep =
            verify_laplacian_comparison(&flat, &CurvatureProfile::constant(0.0), &default_grid(&flat))
                .unwrap();
        assert!(rep.holds());
        assert!(rep.max_abs_margin() < 1e-8, "{}", rep.max_abs_margin());
        let sphere = model(2, Warp::Sphere, Potential::Zero);
        let rep = verify_laplacian_comparison(
            &sphere,
            &CurvatureProfile::constant(1.0),
            &default_grid(&sphere),
        )
        .unwrap();
        assert!(rep.holds());
        assert!(rep.max_abs_margin() < 1e-8, "{}", rep.max_abs_margin());
    }

    #[test]
    fn laplacian_strict_case() {
        let m = model(2, Warp::Euclidean, Potential::Quadratic { a: 1.0 });
        let rep =
            verify_laplacian_comparison(&m, &CurvatureProfile::constant(0.0), &default_grid(&m))
                .unwrap();
        assert!(rep.holds());
        assert!(rep.min_margin() > 0.0);
    }

    #[test]
    fn cd_failure_is_not_applicable() {
        let sphere = model(2, Warp::Sphere, Potential::Zero);
        let rep = verify_laplacian_comparison(
            &sphere,
            &CurvatureProfile::constant(2.0),
            &default_grid(&sphere),
        )
        .unwrap();
        assert!(rep.is_not_applicable());
    }

    #[test]
    fn riccati_cases() {
        for m in [
            model(3, Warp::Euclidean, Potential::Zero),
            model(2, Warp::Sphere, Potential::Zero),
            model(2, Warp::Euclidean, Potential::Quadratic { a: 1.0 }),
        ] {
            let rep = verify_riccati_inequality(&m, &default_grid(&m)).unwrap();
            assert!(rep.holds(), "{:?}", rep.verdict);
        }
    }

    #[test]
    fn volume_element_cases() {
        let flat = model(3, Warp::Euclidean, Potential::Zero);
        let rep =
            verify_volume_element_comparison(&flat, &CurvatureProfile::constant(0.0), 0.01, 3.0, 100)
                .unwrap();
        assert!(rep.pairwise.holds() && rep.monotone.holds());
        assert!(rep.pairwise.max_abs_margin() < 1e-8);
        let quad = model(2, Warp::Euclidean, Potential::Quadratic { a: 1.0 });
        let rep =
            verify_volume_element_comparison(&quad, &CurvatureProfile::constant(0.0), 0.01, 3.0, 100)
                .unwrap();
        assert!(rep.monotone.holds() && rep.pairwise.holds());
        assert!(rep.monotone.min_margin() > 0.0);
    }

    #[test]
    fn bishop_gromov_cases() {
        let flat = model(2, Warp::Euclidean, Potential::Zero);
        let rep =
            verify_bishop_gromov(&flat, &CurvatureProfile::constant(0.0), 0.0, 1.0, 0.0, 2.0).unwrap();
        assert!(rep.holds());
        assert!((rep.rows[0].lhs - 4.0).abs() < 1e-8);
        assert!((rep.rows[0].rhs - 4.0).abs() < 1e-8);
        let sphere = model(2, Warp::Sphere, Potential::Zero);
        let rep =
            verify_bishop_gromov(&sphere, &CurvatureProfile::constant(1.0), 0.0, 1.0, 0.0, 2.0)
                .unwrap();
        let exact = (1.0 - libm::cos(2.0)) / (1.0 - libm::cos(1.0));
        assert!((rep.rows[0].lhs - exact).abs() < 1e-8);
        assert!((rep.rows[0].rhs - exact).abs() < 1e-8);
        let quad = model(2, Warp::Euclidean, Potential::Quadratic { a: 1.0 });
        let rep =
            verify_bishop_gromov(&quad, &CurvatureProfile::constant(0.0), 0.0, 1.0, 1.0, 2.0).unwrap();
        assert!(rep.holds() && rep.min_margin() > 0.0);
    }

    #[test]
    fn volume_growth_cases() {
        let zero = CurvatureProfile::constant(0.0);
        let flat2 = model(2, Warp::Euclidean, Potential::Zero);
        let rep = verify_volume_growth_bound(&flat2, &zero, 1.0, &[2.0]).unwrap();
        assert!(rep.holds());
        assert!((rep.rows[0].lhs - 4.0).abs() < 1e-8 && (rep.rows[0].rhs - 4.0).abs() < 1e-12);
        let flat3 = model(3, Warp::Euclidean, Potential::Zero);
        let rep = verify_volume_growth_bound(&flat3, &zero, 1.0, &[2.0]).unwrap();
        assert!((rep.rows[0].lhs - 8.0).abs() < 1e-8 && rep.holds());
    }

    #[test]
    fn myers_cases() {
        for n in [2, 3] {
            let sphere = model(n, Warp::Sphere, Potential::Zero);
            let diag = myers_diagnostic(&sphere, &CurvatureProfile::constant(1.0)).unwrap();
            assert!((diag.s_sup - PI).abs() < 1e-6);
            assert!((diag.delta.value() - PI).abs() < 1e-6);
            assert!(diag.report.holds(), "{:?}", diag.report.verdict);
            assert!((diag.compact_radius.unwrap() - PI).abs() < 1e-6);
        }
        let flat = model(3, Warp::Euclidean, Potential::Zero);
        let diag = myers_diagnostic(&flat, &CurvatureProfile::constant(0.0)).unwrap();
        assert!(diag.report.is_not_applicable());
    }

    #[test]
    fn condition_a_threshold() {
        let grid: Vec<f64> = (0..200).map(|i| 0.05 * i as f64).collect();
        for (n, m) in [(2u32, 1.0), (3, 1.0)] {
            let d = n as f64 - m;
            let phi = Potential::log_decay(d, 1.0);
            assert_eq!(condition_a_min_k(n, m, &phi, &grid), d / 2.0);
            assert!(check_condition_a(n, m, d / 2.0, &phi, &grid).unwrap().holds());
            let low = check_condition_a(n, m, 0.4 * d, &phi, &grid).unwrap();
            match low.verdict {
                ReportVerdict::Violated { r, margin } => {
                    assert_eq!(r, 0.0);
                    assert!((margin + 0.1).abs() < 1e-12);
                }
                other => panic!("{other:?}"),
            }
        }
        let convex = Potential::Quadratic { a: 1.0 };
        assert!(check_condition_a(3, 1.0, 0.0, &convex, &grid).unwrap().holds());
    }

    #[test]
    fn fitted_bounds() {
        let sphere = model(2, Warp::Sphere, Potential::Zero);
        let grid = default_grid(&sphere);
        let k = fit_curvature_bound(&sphere, &grid).unwrap();
        for &r in &grid {
            assert!((k.eval(r) - 1.0).abs() < 1e-12);
        }
        let flat = model(4, Warp::Euclidean, Potential::Zero);
        let k = fit_curvature_bound(&flat, &default_grid(&flat)).unwrap();
        assert_eq!(k.eval(1.0), 0.0);
        let ex = model(3, Warp::Euclidean, Potential::log_decay(2.0, 1.0));
        let env = fit_ksf_envelope(&ex, &default_grid(&ex)).unwrap();
        let grid: Vec<f64> = (0..50).map(|i| 0.1 * i as f64).collect();
        assert!(env.is_nonnegative_nondecreasing(&grid));
        assert!((env.eval(0.0) - 1.0).abs() < 1e-4);
    }
}
