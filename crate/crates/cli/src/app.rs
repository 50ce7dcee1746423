//! Top-level commands: run, list and describe.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};

use crate::builtin;
use crate::config::{ConfigError, Document};
use crate::output::{num, write_atomic};
use crate::scenario::Scenario;
use crate::tasks::{run_task, Context, Outcome, RunOutput};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

pub const SUMMARY_FILE: &str = "summary.txt";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub overrides: Vec<String>,
    /// Value of the seed environment variable, if set.
    pub env_seed: Option<String>,
}

/// Loads a scenario from a file path or a built-in name.
pub fn load(config: &str, overrides: &[String], env_seed: Option<&str>) -> Result<Scenario, ConfigError> {
    let path = Path::new(config);
    let mut doc = if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Document::load(config, &text)?
    } else if let Some(text) = builtin::find(config) {
        Document::load(format!("builtin:{config}"), text)?
    } else {
        return Err(ConfigError::UnknownScenario(config.to_owned()));
    };
    for spec in overrides {
        doc.apply_override(spec)?;
    }
    Scenario::from_document(&doc, env_seed)
}

pub fn exit_code(outcome: Outcome) -> i32 {
    match outcome {
        Outcome::Pass => EXIT_PASS,
        Outcome::Fail => EXIT_FAIL,
        Outcome::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

/// Runs every task of `scenario` on a pool of `workers` threads.
pub fn execute(scenario: &Scenario, workers: Option<usize>) -> Result<RunOutput> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().context("building the worker pool")?;
    let ctx = Context::new(scenario, &pool)?;
    let mut out = RunOutput::default();
    for &task in &scenario.tasks {
        run_task(&ctx, task, &mut out);
    }
    Ok(out)
}

pub fn output_dir(scenario: &Scenario, cli_out: Option<&Path>) -> PathBuf {
    cli_out
        .map(Path::to_owned)
        .or_else(|| scenario.out.clone())
        .unwrap_or_else(|| Path::new("bemodel-out").join(&scenario.name))
}

/// Plain `key = value` report; identical inputs give identical bytes.
pub fn summary_text(scenario: &Scenario, out: &RunOutput) -> String {
    let mut s = String::new();
    let model = &scenario.model;
    let opt = |p: &Option<crate::scenario::ProfileSpec>| p.as_ref().map_or("none".to_owned(), ToString::to_string);
    let _ = writeln!(s, "scenario = {}", scenario.name);
    let _ = writeln!(s, "source = {}", scenario.origin);
    let _ = writeln!(s, "seed = {}", scenario.seed);
    let _ = writeln!(
        s,
        "model = n={} m={} warp={} potential={}",
        model.n,
        num(model.m),
        model.warp,
        model.potential
    );
    let _ = writeln!(s, "kappa = {}", opt(&scenario.kappa));
    let _ = writeln!(s, "ksf = {}", opt(&scenario.ksf));
    let tasks: Vec<&str> = scenario.tasks.iter().map(|t| t.name()).collect();
    let _ = writeln!(s, "tasks = {}", tasks.join(", "));
    for r in &out.results {
        let _ = writeln!(s, "\n[{}]", r.label);
        let _ = writeln!(s, "verdict = {}", r.verdict);
        let margin = r.worst_margin.map_or("none".to_owned(), num);
        let _ = writeln!(s, "worst_margin = {margin}");
        let _ = writeln!(s, "tag = {}", r.tag);
        let _ = writeln!(s, "outcome = {}", r.outcome);
        for note in &r.notes {
            let _ = writeln!(s, "note = {note}");
        }
    }
    let worst = out.worst();
    let _ = writeln!(s, "\n[overall]");
    let _ = writeln!(s, "outcome = {worst}");
    let _ = writeln!(s, "exit_code = {}", exit_code(worst));
    s
}

/// Writes the summary and every table; returns the written paths.
pub fn write_outputs(scenario: &Scenario, dir: &Path, out: &RunOutput) -> Result<Vec<PathBuf>> {
    let mut paths = vec![write_atomic(dir, SUMMARY_FILE, summary_text(scenario, out).as_bytes())?];
    for table in &out.tables {
        let name = format!("{}.csv", table.name);
        paths.push(write_atomic(dir, &name, &table.to_csv(scenario.seed)?)?);
    }
    Ok(paths)
}

/// The `run` command; returns the process exit code.
pub fn run(config: &str, opts: &RunOptions) -> i32 {
    let scenario = match load(config, &opts.overrides, opts.env_seed.as_deref()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let out = match execute(&scenario, opts.workers) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_CONFIG;
        }
    };
    let dir = output_dir(&scenario, opts.out.as_deref());
    if let Err(e) = write_outputs(&scenario, &dir, &out) {
        eprintln!("error: {e:#}");
        return EXIT_CONFIG;
    }
    for r in &out.results {
        println!("{:<13} {:<40} {}", r.outcome.to_string(), r.label, r.verdict);
    }
    let worst = out.worst();
    println!("{} -> {} ({})", scenario.name, worst, dir.display());
    exit_code(worst)
}

/// The `list` command.
pub fn list() -> String {
    let mut s = String::new();
    for (name, text) in builtin::BUILTINS {
        let description = Document::load(*name, text)
            .ok()
            .and_then(|d| d.get("scenario", "description").map(str::to_owned))
            .unwrap_or_default();
        let _ = writeln!(s, "{name:<22} {description}");
    }
    s
}

/// The `describe` command: model data on 13 points of `[0, r_max]`.
pub fn describe(scenario: &Scenario) -> Result<String> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build()?;
    let ctx = Context::new(scenario, &pool)?;
    let model = &ctx.model;
    let ksf = ctx.ksf()?;
    let d = model.n_minus_m();
    let r_max = *ctx.grid.last().expect("grid is never empty");

    let mut s = String::new();
    let spec = &scenario.model;
    let _ = writeln!(s, "scenario: {}", scenario.name);
    if !scenario.description.is_empty() {
        let _ = writeln!(s, "description: {}", scenario.description);
    }
    let _ = writeln!(
        s,
        "model: n = {}, m = {}, n - m = {}, warp = {}, potential = {}",
        spec.n,
        num(spec.m),
        num(d),
        spec.warp,
        spec.potential
    );
    let _ = writeln!(s, "radius: {}", num(model.radius()));
    if let Some(k) = &scenario.kappa {
        let _ = writeln!(s, "kappa: {k}");
    }
    if let Some(k) = &scenario.ksf {
        let _ = writeln!(s, "ksf: {k}");
    }
    let mut header = vec!["r", "s_p", "phi", "Lr", "ric", "ric_scaled", "mu_ball"];
    if ksf.is_some() {
        header.push("ric_bound");
    }
    let _ = writeln!(s, "{}", header.join("\t"));
    for i in 0..13 {
        let r = r_max * i as f64 / 12.0;
        // the pole itself is singular for Lr; sample at the floor instead
        let re = r.max(model.r_min());
        let sp = model.reparam_distance(re)?;
        let phi = model.phi(re);
        let lr = model.weighted_laplacian_of_r(re)?;
        let ric = model.bakry_emery_ricci_radial(re)?;
        let vol = if r > 0.0 { model.volume_ball(r)? } else { 0.0 };
        let mut row = vec![
            num(r),
            num(sp),
            num(phi),
            num(lr),
            num(ric),
            num(ric * (4.0 * phi / d).exp()),
            num(vol),
        ];
        if let Some(k) = &ksf {
            row.push(num(-k.eval(sp) * (-4.0 * phi / d).exp()));
        }
        let _ = writeln!(s, "{}", row.join("\t"));
    }
    Ok(s)
}
