//! Typed scenarios built from INI documents.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use bemodel_core::model::NumericFn;
use bemodel_core::{CurvatureProfile, Potential, TailClass, Warp, WeightedModel};

use crate::config::{split_list, ConfigError, Document};

/// Environment variable overriding the scenario seed.
pub const SEED_ENV: &str = "BEMODEL_SEED";
pub const DEFAULT_SEED: u64 = 20240601;

const SECTIONS: &[(&str, &[&str])] = &[
    ("scenario", &["name", "description", "tasks", "seed", "out"]),
    ("model", &["n", "m", "warp", "potential", "r_eval", "radius"]),
    ("curvature", &["kappa", "ksf", "numeric"]),
    ("grid", &["points", "r_min", "r_max"]),
    ("volume_growth", &["r1", "r2"]),
    ("condition_A", &["k", "k_factor", "rho_max", "points"]),
    ("criteria", &["r0"]),
    (
        "simulation",
        &[
            "n_paths",
            "r_start",
            "horizon",
            "target",
            "starts",
            "expected_p",
            "dt_max",
            "step_scale",
            "r_explode",
            "r_floor",
            "max_steps",
        ],
    ),
    ("expect", &["*"]),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Laplacian,
    Riccati,
    VolumeElement,
    BishopGromov,
    VolumeGrowth,
    Myers,
    ConditionA,
    Criteria,
    Explosion,
    Hitting,
    FellerScan,
}

impl Task {
    pub const ALL: [Task; 11] = [
        Task::Laplacian,
        Task::Riccati,
        Task::VolumeElement,
        Task::BishopGromov,
        Task::VolumeGrowth,
        Task::Myers,
        Task::ConditionA,
        Task::Criteria,
        Task::Explosion,
        Task::Hitting,
        Task::FellerScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Laplacian => "laplacian",
            Task::Riccati => "riccati",
            Task::VolumeElement => "volume_element",
            Task::BishopGromov => "bishop_gromov",
            Task::VolumeGrowth => "volume_growth",
            Task::Myers => "myers",
            Task::ConditionA => "condition_A",
            Task::Criteria => "criteria",
            Task::Explosion => "explosion",
            Task::Hitting => "hitting",
            Task::FellerScan => "feller_scan",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown task `{s}`"))
    }
}

/// Names of the individual integral criteria, usable as `[expect]` keys.
pub const CRITERIA: [&str; 7] = [
    "condition_K",
    "condition_K_bar",
    "hsu",
    "asymptotic_phi",
    "K0_feller",
    "grigoryan",
    "recurrence",
];

/// Declared outcome for a task or criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expectation {
    Holds,
    Violated,
    NotApplicable,
    Diverges,
    Converges,
    Inconclusive,
    FellerConsistent,
    NotFellerConsistent,
    /// Explosion CI upper bound at most `10⁻²`.
    Conservative,
    /// Explosion CI lower bound at least `0.5`.
    Explosive,
    /// Follow the 1D boundary classification.
    Oracle,
    /// Report only.
    Any,
}

impl FromStr for Expectation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "holds" => Expectation::Holds,
            "violated" => Expectation::Violated,
            "not_applicable" => Expectation::NotApplicable,
            "diverges" => Expectation::Diverges,
            "converges" => Expectation::Converges,
            "inconclusive" => Expectation::Inconclusive,
            "feller_consistent" => Expectation::FellerConsistent,
            "not_feller_consistent" => Expectation::NotFellerConsistent,
            "conservative" => Expectation::Conservative,
            "explosive" => Expectation::Explosive,
            "oracle" => Expectation::Oracle,
            "any" => Expectation::Any,
            _ => return Err(format!("unknown expectation `{s}`")),
        })
    }
}

impl Expectation {
    fn allowed_for(key: &str) -> &'static [Expectation] {
        use Expectation::*;
        match key {
            "explosion" => &[Conservative, Explosive, Oracle, Any],
            "hitting" => &[Holds, Violated, Any],
            "feller_scan" => &[FellerConsistent, NotFellerConsistent, Any],
            "criteria" => &[Holds, Violated, Any],
            k if CRITERIA.contains(&k) => &[Diverges, Converges, Inconclusive, Any],
            _ => &[Holds, Violated, NotApplicable, Any],
        }
    }
}

/// A function family written as `name` or `name(arg, ...)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub name: String,
    pub args: Vec<String>,
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s.find('(') {
            None => {
                if s.is_empty() || s.contains(')') {
                    return Err(format!("malformed family `{s}`"));
                }
                Ok(Family {
                    name: s.to_owned(),
                    args: Vec::new(),
                })
            }
            Some(open) => {
                let inner = s[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| format!("missing `)` in `{s}`"))?;
                Ok(Family {
                    name: s[..open].trim().to_owned(),
                    args: split_list(inner).into_iter().map(str::to_owned).collect(),
                })
            }
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            f.write_str(&self.name)
        } else {
            write!(f, "{}({})", self.name, self.args.join(", "))
        }
    }
}

impl fmt::Display for ProfileSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileSpec::Fit => f.write_str("fit"),
            ProfileSpec::Explicit(family) => family.fmt(f),
        }
    }
}

impl Family {
    fn numbers(&self, count: Option<usize>) -> Result<Vec<f64>, String> {
        if let Some(c) = count {
            if self.args.len() != c {
                return Err(format!("`{}` takes {} argument(s), got {}", self.name, c, self.args.len()));
            }
        }
        self.args
            .iter()
            .map(|a| a.parse::<f64>().map_err(|_| format!("`{a}` is not a number")))
            .collect()
    }

    fn knots(&self) -> Result<Vec<(f64, f64)>, String> {
        let knots = self
            .args
            .iter()
            .map(|a| {
                let (x, y) = a
                    .split_once(':')
                    .ok_or_else(|| format!("knot `{a}` must be written x:y"))?;
                let x = x.trim().parse::<f64>().map_err(|_| format!("bad knot `{a}`"))?;
                let y = y.trim().parse::<f64>().map_err(|_| format!("bad knot `{a}`"))?;
                Ok((x, y))
            })
            .collect::<Result<Vec<_>, String>>()?;
        if knots.len() < 2 || !knots.windows(2).all(|w| w[1].0 > w[0].0) {
            return Err("a table needs at least two knots with increasing abscissae".into());
        }
        Ok(knots)
    }
}

#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub n: u32,
    pub m: f64,
    pub warp: Family,
    pub potential: Family,
    pub r_eval: Option<f64>,
    pub radius: Option<f64>,
}

impl ModelSpec {
    pub fn warp(&self) -> Result<Warp, String> {
        let w = &self.warp;
        Ok(match w.name.as_str() {
            "euclidean" => {
                w.numbers(Some(0))?;
                Warp::Euclidean
            }
            "sphere" => {
                w.numbers(Some(0))?;
                Warp::Sphere
            }
            "hyperbolic" => {
                w.numbers(Some(0))?;
                Warp::Hyperbolic
            }
            "polynomial" => Warp::Polynomial(w.numbers(None)?),
            "table" => {
                let knots = w.knots()?;
                // odd extension through the pole
                let table = NumericFn::table("warp table", knots);
                Warp::Custom(NumericFn::new("table", move |r: f64| {
                    r.signum() * table.eval(r.abs())
                }))
            }
            other => return Err(format!("unknown warp family `{other}`")),
        })
    }

    pub fn potential(&self) -> Result<Potential, String> {
        let p = &self.potential;
        let d = self.n as f64 - self.m;
        Ok(match p.name.as_str() {
            "zero" => {
                p.numbers(Some(0))?;
                Potential::Zero
            }
            "constant" => Potential::Constant(p.numbers(Some(1))?[0]),
            "quadratic" => Potential::Quadratic {
                a: p.numbers(Some(1))?[0],
            },
            "power" => {
                let v = p.numbers(Some(2))?;
                Potential::Power { a: v[0], p: v[1] }
            }
            "log_power" => {
                let v = p.numbers(Some(2))?;
                Potential::LogPower { c: v[0], q: v[1] }
            }
            "example_2_13" | "log_decay" => Potential::log_decay(d, p.numbers(Some(1))?[0]),
            "polynomial" => Potential::Polynomial(p.numbers(None)?),
            "table" => {
                let table = NumericFn::table("potential table", p.knots()?);
                // even extension through the pole
                Potential::Custom(NumericFn::new("table", move |r: f64| table.eval(r.abs())))
            }
            other => return Err(format!("unknown potential family `{other}`")),
        })
    }
}

/// A curvature function: an explicit family or a fit from the model.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSpec {
    Fit,
    Explicit(Family),
}

impl ProfileSpec {
    pub fn explicit(&self, numeric: bool) -> Result<Option<CurvatureProfile>, String> {
        let ProfileSpec::Explicit(f) = self else {
            return Ok(None);
        };
        let profile = match f.name.as_str() {
            "constant" => CurvatureProfile::constant(f.numbers(Some(1))?[0]),
            "power_law" => {
                let v = f.numbers(Some(2))?;
                if !(v[1] >= 0.0) {
                    return Err("power_law needs a non-negative exponent".into());
                }
                CurvatureProfile::power_law(v[0], v[1])
            }
            "log_power" => {
                let v = f.numbers(Some(3))?;
                CurvatureProfile::log_power(v[0], v[1], v[2])
            }
            "table" => CurvatureProfile::tabulated(f.knots()?),
            other => return Err(format!("unknown curvature family `{other}`")),
        };
        Ok(Some(if numeric {
            let label = format!("numeric {}", profile.label());
            CurvatureProfile::custom(label, TailClass::CustomNumeric, move |s| profile.eval(s))
        } else {
            profile
        }))
    }
}

impl FromStr for ProfileSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "fit" {
            Ok(ProfileSpec::Fit)
        } else {
            s.parse().map(ProfileSpec::Explicit)
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridSpec {
    pub points: usize,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ConditionASpec {
    pub k: Vec<f64>,
    pub rho_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone)]
pub struct SimulationSpec {
    pub n_paths: u64,
    pub r_start: Option<f64>,
    pub horizon: Option<f64>,
    pub target: Option<f64>,
    pub starts: Option<Vec<f64>>,
    pub expected_p: Option<f64>,
    pub scheme: bemodel_core::diffusion::Scheme,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub origin: String,
    pub model: ModelSpec,
    pub kappa: Option<ProfileSpec>,
    pub ksf: Option<ProfileSpec>,
    pub numeric_profiles: bool,
    pub tasks: Vec<Task>,
    pub grid: GridSpec,
    pub growth_r1: f64,
    pub growth_r2: Option<Vec<f64>>,
    pub condition_a: Option<ConditionASpec>,
    pub criteria_r0: Vec<f64>,
    pub simulation: SimulationSpec,
    pub expect: Vec<(String, Expectation)>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Scenario {
    /// Builds a scenario; `env_seed` (from [`SEED_ENV`]) overrides the file.
    pub fn from_document(doc: &Document, env_seed: Option<&str>) -> Result<Self, ConfigError> {
        doc.check_keys(SECTIONS)?;
        let name = doc.require("scenario", "name")?.to_owned();
        let tasks: Vec<Task> = doc
            .parse_list("scenario", "tasks")?
            .ok_or_else(|| doc.missing("scenario", "tasks"))?;
        if tasks.is_empty() {
            return Err(doc.invalid("scenario", "tasks", "at least one task is required"));
        }
        let mut seed = doc.parse_or("scenario", "seed", DEFAULT_SEED)?;
        if let Some(raw) = env_seed {
            seed = raw.trim().parse().map_err(|_| ConfigError::Invalid {
                at: crate::config::Location {
                    origin: SEED_ENV.into(),
                    line: None,
                },
                section: "scenario".into(),
                key: "seed".into(),
                msg: format!("cannot parse `{raw}` as an unsigned integer"),
            })?;
        }

        let n: u32 = doc.parse("model", "n")?.ok_or_else(|| doc.missing("model", "n"))?;
        if n < 2 {
            return Err(doc.invalid("model", "n", "dimension must be an integer ≥ 2"));
        }
        let m: f64 = doc.parse("model", "m")?.ok_or_else(|| doc.missing("model", "m"))?;
        if !(m <= 1.0) {
            return Err(doc.invalid("model", "m", "m must be ≤ 1"));
        }
        let model = ModelSpec {
            n,
            m,
            warp: doc.parse("model", "warp")?.ok_or_else(|| doc.missing("model", "warp"))?,
            potential: doc.parse_or("model", "potential", "zero".parse().unwrap())?,
            r_eval: doc.parse("model", "r_eval")?,
            radius: doc.parse("model", "radius")?,
        };
        model.warp().map_err(|e| doc.invalid("model", "warp", e))?;
        model.potential().map_err(|e| doc.invalid("model", "potential", e))?;

        let numeric_profiles = doc.parse_or("curvature", "numeric", false)?;
        let kappa: Option<ProfileSpec> = doc.parse("curvature", "kappa")?;
        let ksf: Option<ProfileSpec> = doc.parse("curvature", "ksf")?;
        for (key, spec) in [("kappa", &kappa), ("ksf", &ksf)] {
            if let Some(spec) = spec {
                spec.explicit(numeric_profiles)
                    .map_err(|e| doc.invalid("curvature", key, e))?;
            }
        }

        let grid = GridSpec {
            points: doc.parse_or("grid", "points", bemodel_core::verify::DEFAULT_GRID_POINTS)?,
            r_min: doc.parse("grid", "r_min")?,
            r_max: doc.parse("grid", "r_max")?,
        };
        if grid.points < 2 {
            return Err(doc.invalid("grid", "points", "need at least two grid points"));
        }

        let condition_a = if tasks.contains(&Task::ConditionA) {
            let d = n as f64 - m;
            let k = match (
                doc.parse_list::<f64>("condition_A", "k")?,
                doc.parse_list::<f64>("condition_A", "k_factor")?,
            ) {
                (Some(k), None) => k,
                (None, Some(f)) => f.into_iter().map(|x| x * d).collect(),
                (None, None) => vec![d / 2.0],
                (Some(_), Some(_)) => {
                    return Err(doc.invalid("condition_A", "k_factor", "give either k or k_factor, not both"))
                }
            };
            if k.is_empty() || k.iter().any(|&v| !(v >= 0.0)) {
                return Err(doc.invalid("condition_A", "k", "K values must be non-negative"));
            }
            Some(ConditionASpec {
                k,
                rho_max: doc.parse_or("condition_A", "rho_max", 10.0)?,
                points: doc.parse_or("condition_A", "points", 401)?,
            })
        } else {
            None
        };

        let mut scheme = bemodel_core::diffusion::Scheme::default();
        if let Some(v) = doc.parse("simulation", "dt_max")? {
            scheme.dt_max = v;
        }
        if let Some(v) = doc.parse("simulation", "step_scale")? {
            scheme.step_scale = v;
        }
        scheme.r_explode = doc.parse("simulation", "r_explode")?;
        scheme.r_floor = doc.parse("simulation", "r_floor")?;
        if let Some(v) = doc.parse("simulation", "max_steps")? {
            scheme.max_steps = v;
        }
        let simulation = SimulationSpec {
            n_paths: doc.parse_or("simulation", "n_paths", 10_000)?,
            r_start: doc.parse("simulation", "r_start")?,
            horizon: doc.parse("simulation", "horizon")?,
            target: doc.parse("simulation", "target")?,
            starts: doc.parse_list("simulation", "starts")?,
            expected_p: doc.parse("simulation", "expected_p")?,
            scheme,
        };

        let mut expect = Vec::new();
        for key in doc.keys("expect") {
            let known = Task::ALL.iter().any(|t| t.name() == key) || CRITERIA.contains(&key.as_str());
            if !known {
                return Err(ConfigError::UnknownKey {
                    at: doc.at("expect", &key),
                    section: "expect".into(),
                    key,
                });
            }
            let value: Expectation = doc.parse("expect", &key)?.unwrap();
            if !Expectation::allowed_for(&key).contains(&value) {
                return Err(doc.invalid("expect", &key, format!("`{value:?}` is not meaningful here")));
            }
            expect.push((key, value));
        }

        let scenario = Scenario {
            name,
            description: doc.get("scenario", "description").unwrap_or("").to_owned(),
            origin: doc.origin().to_owned(),
            model,
            kappa,
            ksf,
            numeric_profiles,
            tasks,
            grid,
            growth_r1: doc.parse_or("volume_growth", "r1", 1.0)?,
            growth_r2: doc.parse_list("volume_growth", "r2")?,
            condition_a,
            criteria_r0: doc.parse_list("criteria", "r0")?.unwrap_or_else(|| vec![1.0]),
            simulation,
            expect,
            seed,
            out: doc.parse::<String>("scenario", "out")?.map(PathBuf::from),
        };
        scenario.check_requirements(doc)?;
        // surface invalid model combinations as config errors
        scenario
            .build_model()
            .map_err(|e| doc.invalid("model", "warp", e.to_string()))?;
        Ok(scenario)
    }

    fn check_requirements(&self, doc: &Document) -> Result<(), ConfigError> {
        for task in &self.tasks {
            match task {
                Task::Laplacian | Task::VolumeElement | Task::BishopGromov | Task::Myers => {
                    if self.kappa.is_none() {
                        return Err(doc.invalid("curvature", "kappa", format!("required by task {task}")));
                    }
                }
                Task::VolumeGrowth => {
                    if self.ksf.is_none() {
                        return Err(doc.invalid("curvature", "ksf", format!("required by task {task}")));
                    }
                }
                Task::ConditionA => {
                    if self.model.warp.name != "euclidean" {
                        return Err(doc.invalid("model", "warp", "condition_A is stated on flat space"));
                    }
                    if !(self.model.m <= 1.0) {
                        return Err(doc.invalid("model", "m", "condition_A needs m ≤ 1"));
                    }
                }
                Task::Explosion | Task::Hitting => {
                    for key in ["r_start", "horizon"] {
                        if doc.get("simulation", key).is_none() {
                            return Err(doc.missing("simulation", key));
                        }
                    }
                    if *task == Task::Hitting && self.simulation.target.is_none() {
                        return Err(doc.missing("simulation", "target"));
                    }
                }
                Task::FellerScan => {
                    for key in ["horizon", "target", "starts"] {
                        if doc.get("simulation", key).is_none() {
                            return Err(doc.missing("simulation", key));
                        }
                    }
                    let starts = self.simulation.starts.as_deref().unwrap_or(&[]);
                    let target = self.simulation.target.unwrap_or(0.0);
                    if bemodel_core::diffusion::check_starts(starts, target).is_err() {
                        return Err(doc.invalid(
                            "simulation",
                            "starts",
                            "starts must be strictly increasing and above the target",
                        ));
                    }
                }
                Task::Riccati | Task::Criteria => {}
            }
        }
        if self.simulation.n_paths == 0 {
            return Err(doc.invalid("simulation", "n_paths", "need at least one path"));
        }
        if self.criteria_r0.iter().any(|&r| !(r > 0.0)) {
            return Err(doc.invalid("criteria", "r0", "cutoffs must be positive"));
        }
        Ok(())
    }

    pub fn build_model(&self) -> bemodel_core::Result<WeightedModel> {
        let warp = self.model.warp().map_err(bemodel_core::Error::InvalidModel)?;
        let potential = self.model.potential().map_err(bemodel_core::Error::InvalidModel)?;
        let mut model = match self.model.radius {
            Some(r) => WeightedModel::on_ball(self.model.n, self.model.m, warp, potential, r)?,
            None => WeightedModel::new(self.model.n, self.model.m, warp, potential)?,
        };
        if let Some(r_eval) = self.model.r_eval {
            model = model.with_eval_radius(r_eval)?;
        }
        Ok(model)
    }

    pub fn expectation(&self, key: &str) -> Option<Expectation> {
        self.expect.iter().find(|(k, _)| k == key).map(|(_, e)| *e)
    }
}
