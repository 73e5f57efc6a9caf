use std::collections::BTreeMap;
use std::sync::Arc;

use mpe_core::bots::{policy_factory, PolicyFactory};
use mpe_core::engine::rng::stream;
use mpe_core::eval::{
    aggregate_substrate_score, build_scenario, focal_per_capita, gini, normalize_scores, run_batch, run_seeds,
    scenario_mode, MetricsReport, PopulationSpec, RunOptions, ScenarioMode, ScenarioSpec,
};
use mpe_core::{Error, Registry};
use proptest::prelude::*;

fn short() -> RunOptions {
    RunOptions { max_steps: Some(150), ..Default::default() }
}

#[test]
fn clean_up_modes() {
    let reg = Registry::builtin();
    assert_eq!(reg.scenario("clean_up/SC0").unwrap().mode(), ScenarioMode::Visitor);
    assert_eq!(reg.scenario("clean_up/SC1").unwrap().mode(), ScenarioMode::Resident);
    assert_eq!(reg.select_scenarios("clean_up").unwrap().len(), 9);
}

#[test]
fn per_capita_and_gini_examples() {
    assert_eq!(focal_per_capita(&[2.0, 4.0, 10.0], &[0, 1]).unwrap(), 3.0);
    assert_eq!(focal_per_capita(&[7.0], &[0]).unwrap(), 7.0);
    assert_eq!(focal_per_capita(&[0.0, 0.0, 0.0], &[0, 1, 2]).unwrap(), 0.0);
    assert!(matches!(focal_per_capita(&[1.0], &[]), Err(Error::Contract(_))));
    assert_eq!(gini(&[1.0, 1.0, 1.0]), 0.0);
    assert_eq!(gini(&[0.0, 1.0]), 0.5);
    assert_eq!(gini(&[0.0, 0.0, 0.0]), 0.0);
    assert!((aggregate_substrate_score(&[0.2, 0.4, 0.6]).unwrap() - 0.4).abs() < 1e-12);
    assert_eq!(aggregate_substrate_score(&[0.7]).unwrap(), 0.7);
}

#[test]
fn self_play_scenario_has_no_background() {
    let reg = Registry::builtin();
    let text = "substrate = \"clean_up\"\n[[scenario]]\nname = \"all\"\nfocal = 7\n";
    let specs = ScenarioSpec::parse_file("inline", text, |id| reg.substrate_config(id)).unwrap();
    let report = run_seeds(reg, &specs[0], &PopulationSpec::random(), &[1], &short()).unwrap();
    assert_eq!(report.mode, ScenarioMode::Resident);
    assert_eq!(report.background_per_capita, None);
    assert_eq!(report.per_player_returns.len(), 7);
}

#[test]
fn bad_scenarios_are_config_errors() {
    let reg = Registry::builtin();
    let lookup = |id: &str| reg.substrate_config(id);
    for text in [
        "substrate = \"clean_up\"\n[[scenario]]\nname = \"x\"\nfocal = 3\nbots = [\"noop\"]\n",
        "substrate = \"clean_up\"\n[[scenario]]\nname = \"x\"\nfocal = 0\nbots = []\n",
        "substrate = \"coins\"\n[[scenario]]\nname = \"x\"\nfocal = 1\nroles = [\"default\", \"pilot\"]\nbots = [\"noop\"]\n",
    ] {
        assert!(matches!(ScenarioSpec::parse_file("inline", text, lookup), Err(Error::Config(_))), "{text}");
    }
}

#[test]
fn missing_role_in_population_is_a_config_error() {
    let reg = Registry::builtin();
    let spec = reg.scenario("bach_or_stravinsky_repeated/SC0").unwrap();
    let pop = PopulationSpec {
        policies: BTreeMap::from([("bach_fan".to_string(), vec![policy_factory(reg, "random").unwrap()])]),
        with_replacement: true,
    };
    // the focal slot of SC0 is a stravinsky fan
    assert!(matches!(build_scenario(reg, spec, &pop, 1), Err(Error::Config(_))));
}

#[test]
fn batch_is_reproducible() {
    let reg = Registry::builtin();
    let spec = reg.scenario("clean_up/SC1").unwrap();
    let a = run_seeds(reg, spec, &PopulationSpec::random(), &[3, 4], &short()).unwrap();
    let b = run_seeds(reg, spec, &PopulationSpec::random(), &[3, 4], &short()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.episodes, 2);
    assert!(a.focal_per_capita >= 0.0);
}

#[test]
fn run_batch_uses_consecutive_seeds() {
    let reg = Registry::builtin();
    let spec = reg.scenario("running_with_scissors_one_shot/SC1").unwrap();
    let r = run_batch(reg, spec, &PopulationSpec::random(), 3, 40).unwrap();
    assert_eq!(r.seeds, vec![40, 41, 42]);
    assert_eq!(r.rows.len(), 3);
}

#[test]
fn collective_return_decomposes() {
    let reg = Registry::builtin();
    let spec = reg.scenario("externality_mushrooms/SC2").unwrap();
    let r = run_seeds(reg, spec, &PopulationSpec::random(), &[5, 6], &short()).unwrap();
    for row in &r.rows {
        let f: f64 = row.returns[..spec.focal].iter().sum();
        let b: f64 = row.returns[spec.focal..].iter().sum();
        assert!((row.collective_return - (f + b)).abs() < 1e-9);
    }
}

fn three_factories() -> Vec<Arc<dyn PolicyFactory>> {
    let reg = Registry::builtin();
    ["pure_0", "pure_1", "pure_2"].iter().map(|n| policy_factory(reg, n).unwrap()).collect()
}

#[test]
fn sampling_law() {
    let roles = vec!["default".to_string(); 3];
    let mut with = PopulationSpec::uniform(three_factories());
    let mut repeats = 0;
    for seed in 0..200 {
        let drawn = with.sample(&roles, &mut stream(seed, "focal")).unwrap();
        let names: std::collections::BTreeSet<&str> = drawn.iter().map(|f| f.name()).collect();
        repeats += usize::from(names.len() < 3);
    }
    assert!(repeats > 0, "sampling with replacement never repeated a policy");

    with.with_replacement = false;
    for seed in 0..200 {
        let drawn = with.sample(&roles, &mut stream(seed, "focal")).unwrap();
        let names: std::collections::BTreeSet<&str> = drawn.iter().map(|f| f.name()).collect();
        assert_eq!(names.len(), 3);
    }
    let four = vec!["default".to_string(); 4];
    assert!(with.sample(&four, &mut stream(0, "focal")).is_err());
}

#[test]
fn report_ignores_seed_order() {
    let reg = Registry::builtin();
    let spec = reg.scenario("stag_hunt_repeated/SC5").unwrap();
    let opts = RunOptions { max_steps: Some(300), ..Default::default() };
    let a = run_seeds(reg, spec, &PopulationSpec::random(), &[1, 2, 3, 4], &opts).unwrap();
    let mut rows = a.rows.clone();
    rows.reverse();
    let b = MetricsReport::from_rows(spec, rows, opts.inequality).unwrap();
    assert_eq!(a, b);
    let c = run_seeds(reg, spec, &PopulationSpec::random(), &[4, 2, 3, 1], &opts).unwrap();
    assert_eq!(a, c);
}

proptest! {
    #[test]
    fn mode_law(players in 1usize..20, focal_frac in 0.0f64..1.0) {
        let focal = 1 + ((players - 1) as f64 * focal_frac) as usize;
        let resident = focal > players - focal;
        prop_assert_eq!(scenario_mode(focal, players) == ScenarioMode::Resident, resident);
    }

    #[test]
    fn normalized_scores_are_bounded(raw in proptest::collection::vec(proptest::collection::vec(-100.0f64..100.0, 4), 2..6)) {
        let s = normalize_scores(&raw);
        for col in 0..4 {
            let c: Vec<f64> = raw.iter().map(|r| r[col]).collect();
            let n: Vec<f64> = s.iter().map(|r| r[col]).collect();
            prop_assert!(n.iter().all(|x| (0.0..=1.0).contains(x)));
            let (lo, hi) = c.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            if hi > lo {
                for (x, y) in c.iter().zip(&n) {
                    if *x == hi { prop_assert_eq!(*y, 1.0); }
                    if *x == lo { prop_assert_eq!(*y, 0.0); }
                }
            } else {
                prop_assert!(n.iter().all(|&y| y == 0.0));
            }
        }
    }

    #[test]
    fn gini_is_a_unit_interval(xs in proptest::collection::vec(0.0f64..1000.0, 1..12)) {
        let g = gini(&xs);
        prop_assert!((0.0..=1.0).contains(&g));
    }

    #[test]
    fn aggregate_is_permutation_invariant(mut xs in proptest::collection::vec(0.0f64..1.0, 1..10)) {
        let a = aggregate_substrate_score(&xs).unwrap();
        xs.reverse();
        let b = aggregate_substrate_score(&xs).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }
}
