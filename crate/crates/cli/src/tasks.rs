//! Execution of scenario tasks.

use std::fmt;

use bemodel_core::criteria::{self, DivergenceVerdict, Evidence, Verdict};
use bemodel_core::diffusion::{
    self, feller_explosion_test_1d, scan_seed, BoundaryClass, FellerScan, FellerVerdict, PathSimulator,
    SimulationEstimate, FELLER_FINAL_UPPER, Z99,
};
use bemodel_core::verify::{self, ComparisonReport, InequalityId, ReportVerdict};
use bemodel_core::{CurvatureProfile, WeightedModel};
use rayon::prelude::*;

use crate::output::{num, Table};
use crate::scenario::{Expectation, ProfileSpec, Scenario, Task};

/// CI bound separating "no explosion observed" from noise.
pub const CONSERVATIVE_UPPER: f64 = 1e-2;
/// CI lower bound required to call a model explosive.
pub const EXPLOSIVE_LOWER: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    Pass,
    Inconclusive,
    Fail,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::Inconclusive => "inconclusive",
            Outcome::Fail => "fail",
        })
    }
}

/// One line of the summary report.
#[derive(Debug, Clone)]
pub struct TaskResult {
    pub label: String,
    pub verdict: String,
    pub worst_margin: Option<f64>,
    pub tag: &'static str,
    pub outcome: Outcome,
    pub notes: Vec<String>,
}

/// Everything a run produced.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub results: Vec<TaskResult>,
    pub tables: Vec<Table>,
}

impl RunOutput {
    pub fn worst(&self) -> Outcome {
        self.results.iter().map(|r| r.outcome).max().unwrap_or(Outcome::Pass)
    }
}

/// Resolved numerical inputs shared by the tasks.
pub struct Context<'a> {
    pub scenario: &'a Scenario,
    pub model: WeightedModel,
    pub grid: Vec<f64>,
    pub pool: &'a rayon::ThreadPool,
}

impl<'a> Context<'a> {
    pub fn new(scenario: &'a Scenario, pool: &'a rayon::ThreadPool) -> bemodel_core::Result<Self> {
        let model = scenario.build_model()?;
        let r_max = scenario
            .grid
            .r_max
            .unwrap_or_else(|| 3.0f64.min(0.95 * model.radius()));
        let r_min = scenario.grid.r_min.unwrap_or(1e-3 * r_max);
        if !(r_min > 0.0 && r_max > r_min && r_max < model.radius()) {
            return Err(bemodel_core::Error::InvalidParameter(format!(
                "grid [{r_min}, {r_max}] must lie inside (0, {})",
                model.radius()
            )));
        }
        let grid = verify::geometric_grid(r_min, r_max, scenario.grid.points);
        Ok(Self {
            scenario,
            model,
            grid,
            pool,
        })
    }

    fn profile(&self, spec: Option<&ProfileSpec>, fit: fn(&WeightedModel, &[f64]) -> bemodel_core::Result<CurvatureProfile>) -> bemodel_core::Result<Option<CurvatureProfile>> {
        match spec {
            None => Ok(None),
            Some(ProfileSpec::Fit) => fit(&self.model, &self.grid).map(Some),
            Some(spec) => spec
                .explicit(self.scenario.numeric_profiles)
                .map_err(bemodel_core::Error::InvalidParameter),
        }
    }

    pub fn kappa(&self) -> bemodel_core::Result<Option<CurvatureProfile>> {
        self.profile(self.scenario.kappa.as_ref(), verify::fit_curvature_bound)
    }

    pub fn ksf(&self) -> bemodel_core::Result<Option<CurvatureProfile>> {
        self.profile(self.scenario.ksf.as_ref(), verify::fit_ksf_envelope)
    }

    /// Runs `n` paths on the pool; the result is independent of the thread count.
    pub fn estimate(&self, sim: &PathSimulator<'_>, n: u64, seed: u64) -> bemodel_core::Result<SimulationEstimate> {
        let outcomes = self.pool.install(|| {
            (0..n)
                .into_par_iter()
                .map(|i| sim.run_path(seed, i))
                .collect::<bemodel_core::Result<Vec<_>>>()
        })?;
        Ok(sim.reduce(&outcomes, seed))
    }
}

fn error_result(label: impl Into<String>, tag: &'static str, err: impl fmt::Display) -> TaskResult {
    TaskResult {
        label: label.into(),
        verdict: format!("error: {err}"),
        worst_margin: None,
        tag,
        outcome: Outcome::Inconclusive,
        notes: Vec::new(),
    }
}

pub fn run_task(ctx: &Context<'_>, task: Task, out: &mut RunOutput) {
    let r = match task {
        Task::Laplacian => report_task(ctx, task, |k| {
            verify::verify_laplacian_comparison(&ctx.model, k.unwrap(), &ctx.grid).map(|r| vec![("laplacian", r)])
        }),
        Task::Riccati => report_task(ctx, task, |_| {
            verify::verify_riccati_inequality(&ctx.model, &ctx.grid).map(|r| vec![("riccati", r)])
        }),
        Task::VolumeElement => report_task(ctx, task, |k| {
            let top = ctx.grid[ctx.grid.len() - 1];
            verify::verify_volume_element_comparison(&ctx.model, k.unwrap(), ctx.grid[0], top, ctx.grid.len())
                .map(|r| vec![("volume_element_pairwise", r.pairwise), ("volume_element_monotone", r.monotone)])
        }),
        Task::BishopGromov => report_task(ctx, task, |k| {
            verify::verify_bishop_gromov_scan(&ctx.model, k.unwrap(), &ctx.grid).map(|r| vec![("bishop_gromov", r)])
        }),
        Task::VolumeGrowth => volume_growth(ctx),
        Task::Myers => myers(ctx),
        Task::ConditionA => condition_a(ctx),
        Task::Criteria => criteria_task(ctx),
        Task::Explosion => explosion(ctx),
        Task::Hitting => hitting(ctx),
        Task::FellerScan => feller_scan(ctx),
    };
    match r {
        Ok((results, tables)) => {
            out.results.extend(results);
            out.tables.extend(tables);
        }
        Err(e) => out.results.push(error_result(task.name(), task_tag(task), e)),
    }
}

type TaskOutput = (Vec<TaskResult>, Vec<Table>);

fn task_tag(task: Task) -> &'static str {
    match task {
        Task::Laplacian => InequalityId::Laplacian.tag(),
        Task::Riccati => InequalityId::Riccati.tag(),
        Task::VolumeElement => InequalityId::VolumeElementPairwise.tag(),
        Task::BishopGromov => InequalityId::BishopGromov.tag(),
        Task::VolumeGrowth => InequalityId::VolumeGrowth.tag(),
        Task::Myers => InequalityId::Myers.tag(),
        Task::ConditionA => InequalityId::ConditionA.tag(),
        Task::Criteria => "integral-criteria",
        Task::Explosion => "stochastic-completeness",
        Task::Hitting => "hitting-probability",
        Task::FellerScan => "feller-property",
    }
}

fn report_verdict(r: &ComparisonReport) -> String {
    match &r.verdict {
        ReportVerdict::Holds => "holds".into(),
        ReportVerdict::Violated { r, margin } => format!("violated at r = {} (margin {})", num(*r), num(*margin)),
        ReportVerdict::NotApplicable(why) => format!("not applicable: {why}"),
    }
}

fn judge_report(r: &ComparisonReport, expect: Expectation) -> Outcome {
    use Expectation as E;
    match (&r.verdict, expect) {
        (_, E::Any) => Outcome::Pass,
        (ReportVerdict::Holds, E::Holds) => Outcome::Pass,
        (ReportVerdict::Violated { .. }, E::Violated) => Outcome::Pass,
        (ReportVerdict::NotApplicable(_), E::NotApplicable) => Outcome::Pass,
        (ReportVerdict::NotApplicable(_), _) => Outcome::Inconclusive,
        _ => Outcome::Fail,
    }
}

fn report_result(label: String, r: &ComparisonReport, expect: Expectation) -> TaskResult {
    TaskResult {
        label,
        verdict: report_verdict(r),
        worst_margin: if r.rows.is_empty() { None } else { Some(r.min_margin()) },
        tag: r.id.tag(),
        outcome: judge_report(r, expect),
        notes: Vec::new(),
    }
}

fn report_task<F>(ctx: &Context<'_>, task: Task, f: F) -> anyhow::Result<TaskOutput>
where
    F: FnOnce(Option<&CurvatureProfile>) -> bemodel_core::Result<Vec<(&'static str, ComparisonReport)>>,
{
    let kappa = ctx.kappa()?;
    let reports = f(kappa.as_ref())?;
    let expect = ctx.scenario.expectation(task.name()).unwrap_or(Expectation::Holds);
    let mut results = Vec::new();
    let mut tables = Vec::new();
    for (name, rep) in &reports {
        let label = if reports.len() == 1 { task.name().to_owned() } else { (*name).to_owned() };
        results.push(report_result(label, rep, expect));
        tables.push(Table::from_report(*name, rep));
    }
    Ok((results, tables))
}

fn volume_growth(ctx: &Context<'_>) -> anyhow::Result<TaskOutput> {
    let ksf = ctx.ksf()?.expect("checked when the scenario was built");
    let r1 = ctx.scenario.growth_r1;
    let r2 = match &ctx.scenario.growth_r2 {
        Some(v) => v.clone(),
        None => [2.0, 3.0, 5.0, 10.0]
            .iter()
            .map(|f| f * r1)
            .filter(|&r| r < ctx.model.radius())
            .collect(),
    };
    let rep = verify::verify_volume_growth_bound(&ctx.model, &ksf, r1, &r2)?;
    let expect = ctx.scenario.expectation("volume_growth").unwrap_or(Expectation::Holds);
    Ok((
        vec![report_result("volume_growth".into(), &rep, expect)],
        vec![Table::from_report("volume_growth", &rep)],
    ))
}

fn myers(ctx: &Context<'_>) -> anyhow::Result<TaskOutput> {
    let kappa = ctx.kappa()?.expect("checked when the scenario was built");
    let diag = verify::myers_diagnostic(&ctx.model, &kappa)?;
    let expect = ctx.scenario.expectation("myers").unwrap_or(Expectation::Holds);
    let mut res = report_result("myers".into(), &diag.report, expect);
    res.notes.push(format!("s_sup = {}", num(diag.s_sup)));
    res.notes.push(format!("delta = {:?}", diag.delta));
    if let Some(r) = diag.compact_radius {
        res.notes.push(format!("s_p reaches delta at r = {}", num(r)));
    }
    Ok((vec![res], vec![Table::from_report("myers", &diag.report)]))
}

fn condition_a(ctx: &Context<'_>) -> anyhow::Result<TaskOutput> {
    let spec = ctx.scenario.condition_a.as_ref().expect("checked when the scenario was built");
    let (n, m) = (ctx.model.n(), ctx.model.m());
    let last = (spec.points.max(2) - 1) as f64;
    let x_grid: Vec<f64> = (0..spec.points.max(2)).map(|i| spec.rho_max * i as f64 / last).collect();
    let expect = ctx.scenario.expectation("condition_A").unwrap_or(Expectation::Holds);
    let min_k = verify::condition_a_min_k(n, m, ctx.model.potential(), &x_grid);
    let mut results = Vec::new();
    let mut tables = Vec::new();
    for (i, &k) in spec.k.iter().enumerate() {
        let rep = verify::check_condition_a(n, m, k, ctx.model.potential(), &x_grid)?;
        let mut res = report_result(format!("condition_A[K={}]", num(k)), &rep, expect);
        res.notes.push(format!("minimal K on the grid = {}", num(min_k)));
        results.push(res);
        let name = if spec.k.len() == 1 { "condition_A".to_owned() } else { format!("condition_A_{}", i + 1) };
        tables.push(Table::from_report(name, &rep));
    }
    Ok((results, tables))
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Diverges => "diverges",
        Verdict::Converges => "converges",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn judge_verdict(v: Verdict, expect: Option<Expectation>) -> Outcome {
    use Expectation as E;
    match (v, expect) {
        (_, Some(E::Any)) => Outcome::Pass,
        (Verdict::Inconclusive, Some(E::Inconclusive)) => Outcome::Pass,
        (Verdict::Inconclusive, _) => Outcome::Inconclusive,
        (_, None) => Outcome::Pass,
        (Verdict::Diverges, Some(E::Diverges)) | (Verdict::Converges, Some(E::Converges)) => Outcome::Pass,
        _ => Outcome::Fail,
    }
}

/// Verdicts of every applicable criterion at each cutoff.
pub fn evaluate_criteria(
    model: &WeightedModel,
    ksf: Option<&CurvatureProfile>,
    r0s: &[f64],
) -> Vec<(&'static str, Vec<bemodel_core::Result<DivergenceVerdict>>)> {
    let mut out = Vec::new();
    let each = |f: &dyn Fn(f64) -> bemodel_core::Result<DivergenceVerdict>| r0s.iter().map(|&r0| f(r0)).collect::<Vec<_>>();
    if let Some(k) = ksf {
        out.push(("condition_K", each(&|r0| criteria::condition_k_at(model, k, r0))));
        out.push(("condition_K_bar", each(&|r0| criteria::condition_k_bar_at(model, k, r0))));
        out.push(("hsu", each(&|r0| criteria::hsu_condition_at(k, r0))));
    }
    out.push(("asymptotic_phi", each(&|r0| criteria::condition_asymptotic_phi_at(model, r0))));
    out.push(("K0_feller", each(&|r0| criteria::condition_k0_feller_at(model, r0))));
    if model.radius().is_infinite() {
        out.push(("grigoryan", each(&|r0| criteria::grigoryan_test_at(model, r0))));
        out.push((
            "recurrence",
            each(&|r0| criteria::recurrence_test_at(model, r0).map(|(v, sides)| {
                let mut v = v;
                v.notes.push(format!(
                    "side conditions: n <= m + 1: {}, phi bounded below: {:?}",
                    sides.n_at_most_m_plus_one, sides.phi_lower_bounded
                ));
                v
            })),
        ));
    }
    out
}

fn evidence_text(v: &DivergenceVerdict) -> String {
    match &v.evidence {
        Evidence::Symbolic { tail, rule } => format!("symbolic {tail} ({rule:?})"),
        Evidence::Numeric(ev) => format!(
            "numeric exponents {}/{} growth {}",
            num(ev.exponents[0]),
            num(ev.exponents[1]),
            ev.growth.iter().map(|g| num(*g)).collect::<Vec<_>>().join("/")
        ),
    }
}

fn criteria_task(ctx: &Context<'_>) -> anyhow::Result<TaskOutput> {
    let mut notes = Vec::new();
    let ksf = match ctx.ksf() {
        Ok(k) => k,
        Err(e) => {
            notes.push(format!("curvature function unavailable: {e}"));
            None
        }
    };
    let r0s = &ctx.scenario.criteria_r0;
    let mut table = Table::new("criteria", &["criterion", "r0", "verdict", "evidence"]);
    let mut evidence = Table::new("criteria_evidence", &["criterion", "r0", "upper", "log_partial"]);
    let mut results = Vec::new();
    let mut final_verdicts = Vec::new();
    for (name, runs) in evaluate_criteria(&ctx.model, ksf.as_ref(), r0s) {
        let tag = "integral-criteria";
        let mut verdicts = Vec::new();
        let mut run_notes = Vec::new();
        let mut failed = None;
        for (&r0, run) in r0s.iter().zip(&runs) {
            match run {
                Ok(v) => {
                    table.push(vec![name.into(), num(r0), verdict_name(v.verdict).into(), evidence_text(v)]);
                    if let Evidence::Numeric(ev) = &v.evidence {
                        for (u, lp) in ev.uppers.iter().zip(&ev.log_partials) {
                            evidence.push(vec![name.into(), num(r0), num(*u), num(*lp)]);
                        }
                    }
                    run_notes.extend(v.notes.iter().cloned());
                    verdicts.push(v.verdict);
                }
                Err(e) => {
                    table.push(vec![name.into(), num(r0), "error".into(), e.to_string()]);
                    failed.get_or_insert_with(|| e.to_string());
                }
            }
        }
        run_notes.dedup();
        let key = format!("criteria.{name}");
        if let Some(e) = failed {
            // a zero curvature function routes conservativeness to the asymptotic-phi test
            let outcome = if matches!(runs[0], Err(bemodel_core::Error::ZeroProfile)) {
                Outcome::Pass
            } else {
                Outcome::Inconclusive
            };
            results.push(TaskResult {
                label: key,
                verdict: format!("error: {e}"),
                worst_margin: None,
                tag,
                outcome,
                notes: run_notes,
            });
            continue;
        }
        let agreed = verdicts.windows(2).all(|w| w[0] == w[1]);
        let verdict = if agreed { verdicts[0] } else { Verdict::Inconclusive };
        if !agreed {
            run_notes.push(format!("verdict depends on the cutoff: {verdicts:?}"));
        }
        final_verdicts.push((name, verdict));
        results.push(TaskResult {
            label: key,
            verdict: verdict_name(verdict).into(),
            worst_margin: None,
            tag,
            outcome: judge_verdict(verdict, ctx.scenario.expectation(name)),
            notes: run_notes,
        });
    }
    // the curvature conditions must form a chain of implications
    let get = |n: &str| final_verdicts.iter().find(|(k, _)| *k == n).map(|(_, v)| *v);
    if let (Some(kb), Some(k), Some(h)) = (get("condition_K_bar"), get("condition_K"), get("hsu")) {
        let broken = (kb == Verdict::Diverges && k != Verdict::Diverges)
            || (k == Verdict::Diverges && h != Verdict::Diverges);
        let expect = ctx.scenario.expectation("criteria").unwrap_or(Expectation::Holds);
        let outcome = match (broken, expect) {
            (_, Expectation::Any) | (true, Expectation::Violated) | (false, Expectation::Holds) => Outcome::Pass,
            _ => Outcome::Fail,
        };
        results.push(TaskResult {
            label: "criteria.implication_chain".into(),
            verdict: if broken { "violated" } else { "holds" }.into(),
            worst_margin: None,
            tag: "integral-criteria-implications",
            outcome,
            notes: Vec::new(),
        });
    }
    if let Some(first) = results.first_mut() {
        first.notes.extend(notes);
    }
    let mut tables = vec![table];
    if !evidence.rows.is_empty() {
        tables.push(evidence);
    }
    Ok((results, tables))
}

fn estimate_text(e: &SimulationEstimate) -> String {
    format!(
        "p_hat = {} (95% CI [{}, {}], {} events, {} censored of {})",
        num(e.p_hat),
        num(e.ci.0),
        num(e.ci.1),
        e.events,
        e.n_censored,
        e.n_paths
    )
}

fn scheme_note(e: &SimulationEstimate) -> String {
    let s = &e.scheme;
    format!(
        "scheme: dt_max = {}, step_scale = {}, r_explode = {}, r_floor = {}, max_steps = {}",
        num(s.dt_max),
        num(s.step_scale),
        num(s.r_explode),
        num(s.r_floor),
        s.max_steps
    )
}

fn explosion(ctx: &Context<'_>) -> anyhow::Result<TaskOutput> {
    let sim_spec = &ctx.scenario.simulation;
    let r_start = sim_spec.r_start.expect("checked when the scenario was built");
    let horizon = sim_spec.horizon.expect("checked when the scenario was built");
    let sim = PathSimulator::explosion(&ctx.model, r_start, horizon, &sim_spec.scheme)?;
    let est = ctx.estimate(&sim, sim_spec.n_paths, ctx.scenario.seed)?;
    let mut notes = vec![scheme_note(&est)];
    let mut expect = ctx.scenario.expectation("explosion").unwrap_or(Expectation::Oracle);
    if expect == Expectation::Oracle {
        if ctx.model.radius().is_finite() {
            notes.push("finite radius: no boundary at infinity to classify".into());
            expect = Expectation::Any;
        } else {
            let class = feller_explosion_test_1d(&ctx.model)?;
            notes.push(format!("1D oracle: +inf {:?}, 0 {:?}", class.plus_infinity, class.zero));
            expect = match class.plus_infinity {
                BoundaryClass::Inaccessible => Expectation::Conservative,
                BoundaryClass::Accessible => Expectation::Explosive,
                BoundaryClass::Undetermined => Expectation::Inconclusive,
            };
        }
    }
    let (outcome, margin) = match expect {
        Expectation::Conservative => {
            let m = CONSERVATIVE_UPPER - est.ci.1;
            (if m >= 0.0 { Outcome::Pass } else { Outcome::Fail }, Some(m))
        }
        Expectation::Explosive => {
            let m = est.ci.0 - EXPLOSIVE_LOWER;
            (if m >= 0.0 { Outcome::Pass } else { Outcome::Fail }, Some(m))
        }
        Expectation::Inconclusive => (Outcome::Inconclusive, None),
        _ => (Outcome::Pass, None),
    };
    Ok((
        vec![TaskResult {
            label: "explosion".into(),
            verdict: estimate_text(&est),
            worst_margin: margin,
            tag: task_tag(Task::Explosion),
            outcome,
            notes,
        }],
        vec![Table::from_estimates("explosion", &[est])],
    ))
}

fn hitting(ctx: &Context<'_>) -> anyhow::Result<TaskOutput> {
    let s = &ctx.scenario.simulation;
    let (r_start, horizon, target) = (s.r_start.unwrap(), s.horizon.unwrap(), s.target.unwrap());
    let sim = PathSimulator::hitting(&ctx.model, r_start, target, horizon, &s.scheme)?;
    let est = ctx.estimate(&sim, s.n_paths, ctx.scenario.seed)?;
    let mut notes = vec![scheme_note(&est)];
    let expect = ctx.scenario.expectation("hitting").unwrap_or(Expectation::Holds);
    let (outcome, margin) = match s.expected_p {
        Some(p) => {
            let (lo, hi) = est.interval(Z99);
            let half = 0.5 * (hi - lo);
            let m = half - (est.p_hat - p).abs();
            notes.push(format!("closed form p = {}, 99% half-width {}", num(p), num(half)));
            let ok = m >= 0.0;
            let outcome = match expect {
                Expectation::Any => Outcome::Pass,
                Expectation::Violated if !ok => Outcome::Pass,
                Expectation::Holds if ok => Outcome::Pass,
                _ => Outcome::Fail,
            };
            (outcome, Some(m))
        }
        None => (Outcome::Pass, None),
    };
    Ok((
        vec![TaskResult {
            label: "hitting".into(),
            verdict: estimate_text(&est),
            worst_margin: margin,
            tag: task_tag(Task::Hitting),
            outcome,
            notes,
        }],
        vec![Table::from_estimates("hitting", &[est])],
    ))
}

fn feller_scan(ctx: &Context<'_>) -> anyhow::Result<TaskOutput> {
    let s = &ctx.scenario.simulation;
    let starts = s.starts.as_deref().unwrap();
    let (horizon, target) = (s.horizon.unwrap(), s.target.unwrap());
    diffusion::check_starts(starts, target)?;
    let mut estimates = Vec::new();
    for (i, &r0) in starts.iter().enumerate() {
        let sim = PathSimulator::hitting(&ctx.model, r0, target, horizon, &s.scheme)?;
        estimates.push(ctx.estimate(&sim, s.n_paths, scan_seed(ctx.scenario.seed, i))?);
    }
    let scan = FellerScan::from_estimates(estimates);
    let last = scan.estimates.last().unwrap();
    let expect = ctx.scenario.expectation("feller_scan").unwrap_or(Expectation::FellerConsistent);
    let outcome = match (scan.verdict, expect) {
        (_, Expectation::Any) => Outcome::Pass,
        (FellerVerdict::FellerConsistent, Expectation::FellerConsistent) => Outcome::Pass,
        (FellerVerdict::NotFellerConsistent, Expectation::NotFellerConsistent) => Outcome::Pass,
        _ => Outcome::Fail,
    };
    let verdict = match scan.verdict {
        FellerVerdict::FellerConsistent => "feller consistent",
        FellerVerdict::NotFellerConsistent => "not feller consistent",
    };
    let p: Vec<String> = scan.estimates.iter().map(|e| num(e.p_hat)).collect();
    Ok((
        vec![TaskResult {
            label: "feller_scan".into(),
            verdict: format!("{verdict}: p_hat = {}", p.join(", ")),
            worst_margin: Some(FELLER_FINAL_UPPER - last.ci.1),
            tag: task_tag(Task::FellerScan),
            outcome,
            notes: vec![scheme_note(last)],
        }],
        vec![Table::from_estimates("feller_scan", &scan.estimates)],
    ))
}

