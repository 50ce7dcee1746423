use bemodel_core::criteria::*;
use bemodel_core::model::NumericFn;
use bemodel_core::{CurvatureProfile, Potential, Warp, WeightedModel};
use proptest::prelude::*;

fn flat(n: u32, m: f64, phi: Potential) -> WeightedModel {
    WeightedModel::new(n, m, Warp::Euclidean, phi).unwrap()
}

fn library() -> Vec<(&'static str, WeightedModel, CurvatureProfile)> {
    vec![
        ("flat", flat(3, 1.0, Potential::Zero), CurvatureProfile::constant(1.0)),
        (
            "hyperbolic",
            WeightedModel::new(3, 1.0, Warp::Hyperbolic, Potential::Zero).unwrap(),
            CurvatureProfile::constant(2.0),
        ),
        ("quadratic_k", flat(2, 1.0, Potential::Zero), CurvatureProfile::power_law(1.0, 2.0)),
        ("steep_k", flat(3, 0.0, Potential::Zero), CurvatureProfile::power_law(1.0, 4.0)),
        ("shifted", flat(3, 1.0, Potential::Constant(-2.0)), CurvatureProfile::constant(1.0)),
        (
            "example_2_13",
            flat(3, 1.0, Potential::log_decay(2.0, 1.0)),
            CurvatureProfile::constant(1.0),
        ),
        (
            "log_decay_half",
            flat(3, 1.0, Potential::log_decay(2.0, 0.5)),
            CurvatureProfile::power_law(1.0, 2.0 / 3.0),
        ),
        (
            "linear_phi",
            flat(3, 1.0, Potential::Power { a: 1.0, p: 1.0 }),
            CurvatureProfile::constant(1.0),
        ),
        (
            "inward_log",
            flat(3, 1.0, Potential::LogPower { c: -3.0, q: 1.0 }),
            CurvatureProfile::power_law(1.0, 2.0),
        ),
        (
            "growing_log",
            flat(3, 0.5, Potential::LogPower { c: 2.0, q: 2.0 }),
            CurvatureProfile::power_law(2.0, 1.0),
        ),
    ]
}

fn implication_holds(m: &WeightedModel, k: &CurvatureProfile, r0: f64) -> Result<(), String> {
    let kb = condition_k_bar_at(m, k, r0).unwrap().verdict;
    let kk = condition_k_at(m, k, r0).unwrap().verdict;
    let hsu = hsu_condition_at(k, r0).unwrap().verdict;
    if kb == Verdict::Diverges && kk != Verdict::Diverges {
        return Err(format!("K-bar diverges but K is {kk:?}"));
    }
    if kk == Verdict::Diverges && hsu != Verdict::Diverges {
        return Err(format!("K diverges but Hsu is {hsu:?}"));
    }
    Ok(())
}

#[test]
fn implication_chain_over_library() {
    for (name, m, k) in library() {
        for r0 in [1.0, 5.0, 25.0] {
            implication_holds(&m, &k, r0).unwrap_or_else(|e| panic!("{name}, r0 = {r0}: {e}"));
        }
    }
}

#[test]
fn verdicts_independent_of_cutoff() {
    for (name, m, k) in library() {
        let base = [
            condition_k_at(&m, &k, 1.0).unwrap().verdict,
            condition_k_bar_at(&m, &k, 1.0).unwrap().verdict,
            hsu_condition_at(&k, 1.0).unwrap().verdict,
            condition_asymptotic_phi_at(&m, 1.0).unwrap().verdict,
            condition_k0_feller_at(&m, 1.0).unwrap().verdict,
            grigoryan_test_at(&m, 1.0).unwrap().verdict,
        ];
        for r0 in [5.0, 25.0] {
            let other = [
                condition_k_at(&m, &k, r0).unwrap().verdict,
                condition_k_bar_at(&m, &k, r0).unwrap().verdict,
                hsu_condition_at(&k, r0).unwrap().verdict,
                condition_asymptotic_phi_at(&m, r0).unwrap().verdict,
                condition_k0_feller_at(&m, r0).unwrap().verdict,
                grigoryan_test_at(&m, r0).unwrap().verdict,
            ];
            assert_eq!(base, other, "{name}, r0 = {r0}");
        }
    }
}

#[test]
fn bounded_potential_collapses_to_hsu() {
    let wobble = Potential::Custom(NumericFn::new("0.5 sin r", |r| 0.5 * r.sin()));
    for phi in [Potential::Zero, Potential::Constant(3.0), wobble] {
        let m = flat(3, 1.0, phi);
        for k in [
            CurvatureProfile::constant(1.0),
            CurvatureProfile::power_law(1.0, 2.0),
            CurvatureProfile::power_law(1.0, 3.0),
        ] {
            let hsu = hsu_condition(&k).unwrap().verdict;
            let kk = condition_k(&m, &k).unwrap();
            let kb = condition_k_bar(&m, &k).unwrap();
            if kk.verdict != Verdict::Inconclusive {
                assert_eq!(kk.verdict, hsu, "{} / {}: {}", m.potential().label(), k.label(), kk.summary());
            }
            if kb.verdict != Verdict::Inconclusive {
                assert_eq!(kb.verdict, hsu, "{} / {}: {}", m.potential().label(), k.label(), kb.summary());
            }
        }
    }
}

#[test]
fn log_decay_family_diverges() {
    for (eps, delta) in [(0.0, 1.0), (1.0, 1.0), (0.5, 2.0 / 3.0)] {
        let m = flat(3, 1.0, Potential::log_decay(2.0, eps));
        let k = CurvatureProfile::power_law(1.0, 2.0 * (1.0 - delta));
        for (name, v) in [
            ("asymptotic-phi", condition_asymptotic_phi(&m).unwrap()),
            ("K0-Feller", condition_k0_feller(&m).unwrap()),
            ("K", condition_k(&m, &k).unwrap()),
            ("K-bar", condition_k_bar(&m, &k).unwrap()),
            ("Hsu", hsu_condition(&k).unwrap()),
            ("Grigor'yan", grigoryan_test(&m).unwrap()),
        ] {
            assert!(v.diverges(), "(ε, δ) = ({eps}, {delta}), {name}: {}", v.summary());
        }
    }
}

#[test]
fn symbolic_and_numeric_engines_agree() {
    // (1+r)^{−α} from a closed form versus the same integrand without a tail
    for alpha in [0.5, 1.0, 1.5, 3.0] {
        let g = move |r: f64| (1.0 + r).powf(-alpha);
        let numeric = classify_divergence(&g, None, 1.0).unwrap().verdict;
        let expected = if alpha <= 1.0 { Verdict::Diverges } else { Verdict::Converges };
        assert!(
            numeric == expected || numeric == Verdict::Inconclusive,
            "α = {alpha}: {numeric:?}"
        );
    }
    let oracle = classify_divergence(&|r| 1.0 / r, None, 1.0).unwrap();
    if let Evidence::Numeric(ev) = oracle.evidence {
        // ∫_1^{2^k} dr/r = k ln 2
        for (k, lp) in ev.log_partials.iter().enumerate() {
            let exact = ((k + 1) as f64 * std::f64::consts::LN_2).ln();
            assert!((lp - exact).abs() < 1e-8, "k = {k}");
        }
    } else {
        panic!("expected numeric evidence");
    }
}

#[test]
fn super_exponential_decay_converges_at_every_cutoff() {
    // ln g = −2r⁴: past r ≈ 3·10⁴ the mass per piece lies within one ulp of its left end
    for r0 in [1.0, 5.0, 25.0] {
        let v = classify_log_divergence(&|r: f64| -2.0 * r.powi(4), None, r0).unwrap();
        assert_eq!(v.verdict, Verdict::Converges, "r0 = {r0}: {}", v.summary());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn implication_chain_random(
        eps in 0.0..2.0f64,
        k_exp in 0.0..4.0f64,
        k_coeff in 0.1..5.0f64,
        r0 in prop::sample::select(vec![1.0, 5.0, 25.0]),
    ) {
        let m = flat(3, 1.0, Potential::log_decay(2.0, eps));
        let k = CurvatureProfile::power_law(k_coeff, k_exp);
        prop_assert!(implication_holds(&m, &k, r0).is_ok());
    }

    #[test]
    fn cutoff_invariance_random(eps in 0.0..2.0f64, k_exp in 0.0..4.0f64) {
        let m = flat(3, 1.0, Potential::log_decay(2.0, eps));
        let k = CurvatureProfile::power_law(1.0, k_exp);
        let a = condition_k_at(&m, &k, 1.0).unwrap().verdict;
        let b = condition_k_at(&m, &k, 25.0).unwrap().verdict;
        prop_assert_eq!(a, b);
        let a = condition_k_bar_at(&m, &k, 1.0).unwrap().verdict;
        let b = condition_k_bar_at(&m, &k, 5.0).unwrap().verdict;
        prop_assert_eq!(a, b);
    }
}
