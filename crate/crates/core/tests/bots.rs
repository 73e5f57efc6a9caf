use mpe_core::bots::nav::{move_action, route};
use mpe_core::bots::{bot_catalog, grim_update, GrimState, Goal, Mode, Policy};
use mpe_core::engine::rng::stream;
use mpe_core::engine::Pos;
use mpe_core::eval::{build_scenario, PopulationSpec};
use mpe_core::Registry;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn unknown_bot_is_a_registry_error() {
    let err = bot_catalog("no_such_bot", 0, 1).unwrap_err();
    assert!(err.to_string().contains("no_such_bot"), "{err}");
}

#[test]
fn catalog_covers_the_required_bots() {
    let reg = Registry::builtin();
    for name in [
        "noop",
        "pure_0",
        "pure_1",
        "pure_2",
        "grim_k1",
        "grim_k2",
        "tit_for_tat",
        "tit_for_tat_noisy",
        "alternate_0",
        "coins_cooperator",
        "coins_defector",
        "coins_generous",
        "coins_harsh",
        "coins_generous_strong",
        "coins_harsh_strong",
        "cleanup_altruist",
        "cleanup_free_rider",
        "cleanup_turns_clean_first",
        "cleanup_turns_eat_first",
        "cleanup_reciprocator",
        "cleanup_suspicious",
        "cleanup_nice",
        "boat_paddler",
        "boat_flailer",
        "mining_gold",
        "mining_iron",
        "mining_any",
        "gift_cooperator",
        "gift_defector",
        "gift_extreme",
        "territory_aggressor",
        "territory_moderate",
        "commons_pacifist",
        "commons_zapper_sustainable",
    ] {
        reg.bot(name).unwrap();
    }
}

#[test]
fn noop_bot_never_moves() {
    let reg = Registry::builtin();
    let spec = reg.scenario("territory_rooms/SC3").unwrap();
    let mut ep = build_scenario(reg, spec, &PopulationSpec::random(), 4).unwrap();
    ep.env.set_max_steps(Some(300));
    while !ep.env.is_done() {
        let acts = ep.actions();
        for (p, &a) in acts.iter().enumerate().skip(1) {
            assert_eq!(ep.env.action_set(p).name(a), Some("noop"));
        }
        ep.env.step(&acts).unwrap();
    }
}

#[test]
fn seated_paddler_paddles() {
    let reg = Registry::builtin();
    let spec = reg.scenario("boat_race/SC0").unwrap();
    let mut ep = build_scenario(reg, spec, &PopulationSpec::random(), 2).unwrap();
    let mut seated_steps = 0;
    while !ep.env.is_done() {
        let acts = ep.actions();
        let boat = ep.env.rules().as_any().downcast_ref::<mpe_core::substrates::boat_race::BoatRules>().unwrap();
        for p in 1..6 {
            if boat.seat_of(p).is_some() && boat.phase().racing {
                seated_steps += 1;
                assert_eq!(ep.env.action_set(p).name(acts[p]), Some("paddle"));
            }
        }
        ep.env.step(&acts).unwrap();
    }
    assert!(seated_steps > 0, "no paddler ever boarded");
}

#[test]
fn tit_for_tat_opens_with_cooperation() {
    let reg = Registry::builtin();
    let spec = reg.scenario("prisoners_dilemma_repeated/SC5").unwrap();
    let mut ep = build_scenario(reg, spec, &PopulationSpec::random(), 8).unwrap();
    let mut bot = bot_catalog("tit_for_tat", 1, 8).unwrap();
    while !ep.env.is_done() {
        let a = ep.policies[0].act(&ep.env, 0);
        let b = bot.act(&ep.env, 1);
        if bot.memory().interactions > 0 {
            return;
        }
        assert_eq!(bot.current_goal(), Some(&"play:0".parse::<Goal>().unwrap()));
        ep.env.step(&[a, b]).unwrap();
    }
    panic!("no interaction happened");
}

#[test]
fn identical_episodes_give_identical_bot_actions() {
    let reg = Registry::builtin();
    for id in ["clean_up/SC4", "coins/SC3", "stag_hunt_arena/SC5", "gift_refinements/SC4"] {
        let spec = reg.scenario(id).unwrap();
        let trace = || {
            let mut ep = build_scenario(reg, spec, &PopulationSpec::random(), 11).unwrap();
            ep.env.set_max_steps(Some(250));
            let mut all = Vec::new();
            while !ep.env.is_done() {
                let a = ep.actions();
                all.extend_from_slice(&a);
                ep.env.step(&a).unwrap();
            }
            all
        };
        assert_eq!(trace(), trace(), "{id}");
    }
}

#[test]
fn coins_cooperator_never_takes_the_other_colour() {
    use mpe_core::engine::{EventKind, Payload};
    let reg = Registry::builtin();
    let spec = reg.scenario("coins/SC5").unwrap();
    for seed in 0..3 {
        let mut ep = build_scenario(reg, spec, &PopulationSpec::random(), seed).unwrap();
        ep.env.set_max_steps(Some(600));
        while !ep.env.is_done() {
            let out = ep.step().unwrap();
            for e in &out.events {
                if e.kind == EventKind::CoinCollected && e.actor == Some(1) {
                    assert!(matches!(e.payload, Payload::Coin { mismatched: false, .. }));
                }
            }
        }
    }
}

fn zaps_in(id: &str, bot_slots: std::ops::Range<usize>, seed: u64, steps: u64) -> usize {
    let reg = Registry::builtin();
    let spec = reg.scenario(id).unwrap();
    let mut ep = build_scenario(reg, spec, &PopulationSpec::random(), seed).unwrap();
    ep.env.set_max_steps(Some(steps));
    let mut zaps = 0;
    while !ep.env.is_done() {
        let acts = ep.actions();
        zaps += bot_slots.clone().filter(|&p| ep.env.action_set(p).name(acts[p]) == Some("zap")).count();
        ep.env.step(&acts).unwrap();
    }
    zaps
}

#[test]
fn zappers_do_zap() {
    let total: usize = (0..3).map(|s| zaps_in("commons_harvest_open/SC0", 5..7, s, 1000)).sum();
    assert!(total > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn grim_defection_is_absorbing(k in 1u32..4, plays in proptest::collection::vec(any::<bool>(), 0..60)) {
        let mut s = GrimState::new(k);
        let mut defected_once = false;
        for (i, d) in plays.iter().enumerate() {
            s = grim_update(s, *d);
            let strikes = plays[..=i].iter().filter(|x| **x).count() as u32;
            prop_assert_eq!(s.mode == Mode::Defect, strikes >= k);
            if defected_once {
                prop_assert_eq!(s.mode, Mode::Defect);
            }
            defected_once |= s.mode == Mode::Defect;
        }
    }

    #[test]
    fn pacifists_never_zap(seed in 0u64..1000) {
        prop_assert_eq!(zaps_in("commons_harvest_closed/SC0", 2..7, seed, 150), 0);
        prop_assert_eq!(zaps_in("commons_harvest_partnership/SC4", 2..7, seed, 150), 0);
    }

    #[test]
    fn route_reaches_any_reachable_cell(seed in 0u64..500) {
        let reg = Registry::builtin();
        let sub = reg.substrate("commons_harvest_open").unwrap();
        let mut env = sub.reset(&["default".to_string()], seed).unwrap();
        let mut rng = stream(seed, "nav");
        let (w, h) = (env.state().width(), env.state().height());
        let target = loop {
            let p = Pos { x: rng.gen_range(0..w), y: rng.gen_range(0..h) };
            if route(env.state(), env.rules(), 0, |q| q == p).is_some() {
                break p;
            }
        };
        let budget = (w * h) as u64;
        let mut steps = 0;
        loop {
            let r = route(env.state(), env.rules(), 0, |q| q == target).expect("target stays reachable");
            let Some(dir) = r.first else { break };
            let facing = env.state().avatars[0].orientation;
            let a = move_action(env.action_set(0), facing, dir);
            env.step(&[a]).unwrap();
            steps += 1;
            prop_assert!(steps <= budget, "not there after {} steps", steps);
        }
        prop_assert_eq!(env.state().avatars[0].pos, target);
    }
}
