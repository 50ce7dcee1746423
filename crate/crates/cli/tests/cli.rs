use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bemodel::app;
use bemodel::builtin::BUILTINS;
use bemodel::tasks::{evaluate_criteria, Context};
use bemodel_core::criteria::Verdict;
use bemodel_core::diffusion::{PathSimulator, Scheme, SimulationEstimate};
use rayon::prelude::*;

fn bemodel(args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bemodel"));
    cmd.args(args).env_remove("BEMODEL_SEED");
    if let Some(s) = seed {
        cmd.env("BEMODEL_SEED", s);
    }
    cmd.output().unwrap()
}

fn run(config: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", config, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    bemodel(&args, None)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn exit_code_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("sphere_equality", 0),
        ("condition_A_threshold", 1),
        ("borderline_hsu", 2),
        ("no_such_scenario", 3),
    ];
    for (name, code) in cases {
        let o = run(name, &dir.path().join(name), &[]);
        assert_eq!(o.status.code(), Some(code), "{name}: {}{}", stdout(&o), stderr(&o));
    }
    let summary = fs::read_to_string(dir.path().join("condition_A_threshold/summary.txt")).unwrap();
    let failing: Vec<&str> = summary
        .split("\n\n")
        .filter(|block| block.contains("outcome = fail") && !block.starts_with("[overall]"))
        .collect();
    assert_eq!(failing.len(), 1, "{summary}");
    assert!(failing[0].starts_with("[condition_A[K=0.8]]"), "{summary}");
}

#[test]
fn sphere_equality_margins_vanish() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("sphere_equality", dir.path(), &[]).status.code(), Some(0));
    for name in ["laplacian", "volume_element_pairwise", "volume_element_monotone", "bishop_gromov", "myers"] {
        let text = fs::read_to_string(dir.path().join(format!("{name}.csv"))).unwrap();
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        for rec in rd.records() {
            let margin: f64 = rec.unwrap()[4].parse().unwrap();
            assert!(margin.abs() <= 1e-6, "{name}: margin {margin}");
        }
    }
}

#[test]
fn config_errors_exit_3_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    fs::write(
        &cfg,
        "[scenario]\nname = bad\ntasks = laplacian\n[model]\nn = 3\nm = 1\nwarp = euclidean\n[curvature]\nkappa = constant(zero)\n",
    )
    .unwrap();
    let o = run(cfg.to_str().unwrap(), &dir.path().join("o"), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("bad.ini:9: [curvature] kappa"), "{}", stderr(&o));
    assert!(!dir.path().join("o").exists());

    let o = run("flat", &dir.path().join("o"), &["--set", "model.m=2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("m must be"), "{}", stderr(&o));
    let o = run("flat", &dir.path().join("o"), &["--set", "oops"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(bemodel(&["frobnicate"], None).status.code(), Some(3));
    assert_eq!(bemodel(&["run", "flat"], Some("not-a-number")).status.code(), Some(3));
}

#[test]
fn seed_is_recorded_and_overridable() {
    let dir = tempfile::tempdir().unwrap();
    let fast = ["--set", "simulation.n_paths=1000"];
    let a = dir.path().join("a");
    assert_eq!(run("feller_decay", &a, &fast).status.code(), Some(0));
    let csv = fs::read_to_string(a.join("feller_scan.csv")).unwrap();
    assert!(csv.starts_with("# seed=1011\n"), "{csv}");
    assert!(csv.lines().nth(1).unwrap() == "r_start,n_paths,events,censored,p_hat,ci_lo,ci_hi");

    let b = dir.path().join("b");
    let mut args = vec!["run", "feller_decay", "--out", b.to_str().unwrap()];
    args.extend_from_slice(&fast);
    assert_eq!(bemodel(&args, Some("99")).status.code(), Some(0));
    assert!(fs::read_to_string(b.join("feller_scan.csv")).unwrap().starts_with("# seed=99\n"));
    let summary = fs::read_to_string(b.join("summary.txt")).unwrap();
    assert!(summary.contains("seed = 99\n"));
    assert!(summary.contains("tag = feller-property"));
    assert!(summary.contains("worst_margin = "));
}

#[test]
fn list_includes_the_library() {
    let text = stdout(&bemodel(&["list"], None));
    for name in ["flat", "sphere", "hyperbolic", "quadratic_phi", "example_2_13", "example_2_14", "explosive_r4"] {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(name)), "{name} missing");
    }
}

fn describe_rows(config: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let o = bemodel(&["describe", config], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines().skip_while(|l| !l.starts_with("r\t"));
    let header = lines.next().unwrap().split('\t').map(str::to_owned).collect();
    let rows = lines
        .map(|l| l.split('\t').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn describe_flat_reparametrization_is_identity() {
    let (header, rows) = describe_rows("flat");
    let sp = header.iter().position(|h| h == "s_p").unwrap();
    assert_eq!(rows.len(), 13);
    for row in rows.iter().skip(1) {
        assert!((row[sp] - row[0]).abs() <= 1e-9 * row[0].max(1.0), "{row:?}");
    }
}

#[test]
fn describe_example_ricci_closed_form() {
    let (header, rows) = describe_rows("example_2_13");
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (ric, bound) = (col("ric"), col("ric_bound"));
    for target in [0.0, 1.0, 2.0] {
        let row = rows.iter().find(|r| r[0] == target).unwrap();
        // Ric = (1.5r² − 1)/(1 + r²)² for φ = −½ ln(1 + r²); the bound is −(1 + r²)
        let exact = (1.5 * target * target - 1.0) / (1.0 + target * target).powi(2);
        assert!((row[ric] - exact).abs() <= 1e-8, "r = {target}: {}", row[ric]);
        assert!((row[bound] + 1.0 + target * target).abs() <= 1e-8);
        assert!(row[ric] >= row[bound]);
    }
}

#[test]
fn out_dir_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = app::load("sphere", &[], None).unwrap();
    assert_eq!(app::output_dir(&scenario, None), Path::new("bemodel-out/sphere"));
    assert_eq!(app::output_dir(&scenario, Some(dir.path())), dir.path());
    let custom = format!("scenario.out={}", dir.path().join("x").display());
    let scenario = app::load("sphere", &[custom], None).unwrap();
    assert_eq!(app::output_dir(&scenario, None), dir.path().join("x"));
}

fn estimate(sim: &PathSimulator<'_>, n: u64, seed: u64) -> SimulationEstimate {
    let outcomes: Vec<_> = (0..n).into_par_iter().map(|i| sim.run_path(seed, i).unwrap()).collect();
    sim.reduce(&outcomes, seed)
}

/// Built-ins on a complete model, with their explosion settings.
fn explosion_library() -> Vec<(String, bemodel_core::WeightedModel, f64, f64, Vec<(&'static str, Verdict)>)> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let mut out = Vec::new();
    for (name, _) in BUILTINS {
        let s = app::load(name, &[], None).unwrap();
        let model = s.build_model().unwrap();
        if model.radius().is_finite() {
            continue;
        }
        let ctx = Context::new(&s, &pool).unwrap();
        let ksf = ctx.ksf().unwrap();
        let verdicts = evaluate_criteria(&model, ksf.as_ref(), &[1.0])
            .into_iter()
            .filter_map(|(k, v)| v.into_iter().next().unwrap().ok().map(|v| (k, v.verdict)))
            .collect();
        let r_start = s.simulation.r_start.unwrap_or(1.0);
        let horizon = s.simulation.horizon.filter(|t| t.is_finite()).unwrap_or(10.0);
        out.push((name.to_string(), model, r_start, horizon, verdicts));
    }
    out
}

#[test]
fn divergent_criteria_rule_out_explosion() {
    let scheme = Scheme::default();
    for (name, model, r_start, horizon, verdicts) in explosion_library() {
        let conservative = verdicts
            .iter()
            .any(|&(k, v)| (k == "condition_K" || k == "grigoryan") && v == Verdict::Diverges);
        if !conservative {
            continue;
        }
        let sim = PathSimulator::explosion(&model, r_start, horizon, &scheme).unwrap();
        let e = estimate(&sim, 2000, 5);
        assert!(e.ci.1 <= 1e-2, "{name}: CI upper {}", e.ci.1);
    }
}

#[test]
fn halving_the_step_is_stable_on_builtins() {
    for (name, model, r_start, horizon, _) in explosion_library() {
        let coarse = Scheme {
            dt_max: 0.01,
            ..Scheme::default()
        };
        let fine = Scheme {
            dt_max: 0.005,
            ..Scheme::default()
        };
        let a = estimate(&PathSimulator::explosion(&model, r_start, horizon, &coarse).unwrap(), 2000, 6);
        let b = estimate(&PathSimulator::explosion(&model, r_start, horizon, &fine).unwrap(), 2000, 6);
        let half = 0.5 * (a.ci.1 - a.ci.0).max(b.ci.1 - b.ci.0);
        assert!((a.p_hat - b.p_hat).abs() <= half.max(1e-12), "{name}: {} vs {}", a.p_hat, b.p_hat);
    }
}
