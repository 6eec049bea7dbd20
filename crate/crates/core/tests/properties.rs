//! Geometry, separation and observation invariants checked against
//! independent brute-force oracles.

mod common;

use std::sync::Arc;

use atc_stack::airspace::{
    advance_waypoint, bearing_to, cross_track_distance, normalize_heading, relative_turn, Fix, Point, Route, Sector,
    CROSS_TRACK_CLIP_NM,
};
use atc_stack::dynamics::{AircraftState, Performance};
use atc_stack::env::{ActionSpace, AtcEnv, EnvConfig};
use atc_stack::rewards::RewardPreset;
use atc_stack::safety::{project_min_separation, ProjectionHeading};
use atc_stack::scenario::{generate, ScenarioKind};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn two_fix_route(a: Point, b: Point) -> Arc<Route> {
    let fix = |name: &str, p| Fix {
        name: name.into(),
        position: p,
    };
    Arc::new(Route {
        id: "T".into(),
        fixes: vec![fix("A", a), fix("B", b), fix("C", b.offset(0.0, 10.0))],
    })
}

/// Closest distance from `p` to the line through `a` and `b`, found by
/// sampling the line parameter and repeatedly narrowing around the best sample.
fn sampled_line_distance(p: Point, a: Point, b: Point) -> f64 {
    let at = |t: f64| Point::new(a.east + t * (b.east - a.east), a.north + t * (b.north - a.north));
    let (mut lo, mut hi) = (-50.0, 50.0);
    let mut best = f64::INFINITY;
    for _ in 0..60 {
        let n = 40;
        let (mut best_t, mut local) = (lo, f64::INFINITY);
        for i in 0..=n {
            let t = lo + (hi - lo) * i as f64 / n as f64;
            let d = at(t).distance(p);
            if d < local {
                local = d;
                best_t = t;
            }
        }
        best = best.min(local);
        let span = (hi - lo) / n as f64;
        lo = best_t - span;
        hi = best_t + span;
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn relative_turn_is_signed_shortest_turn(cleared in 0.0f64..360.0, target in 0.0f64..360.0) {
        let t = relative_turn(cleared, target);
        prop_assert!((-180.0..=180.0).contains(&t));
        let back = normalize_heading(cleared + t);
        let err = (back - normalize_heading(target)).abs();
        prop_assert!(err < 1e-9 || (360.0 - err) < 1e-9, "{cleared} + {t} != {target}");
    }

    #[test]
    fn bearings_are_reciprocal(ae in -60.0f64..60.0, an in -60.0f64..60.0, be in -60.0f64..60.0, bn in -60.0f64..60.0) {
        let (a, b) = (Point::new(ae, an), Point::new(be, bn));
        prop_assume!(a.distance(b) > 1e-3);
        let ab = bearing_to(a, b).unwrap();
        let ba = bearing_to(b, a).unwrap();
        prop_assert!((0.0..360.0).contains(&ab));
        prop_assert!(relative_turn(ab, ba).abs() - 180.0 < 1e-9 && relative_turn(ab, ba).abs() > 180.0 - 1e-9);
    }

    #[test]
    fn cross_track_matches_sampled_distance(
        ae in -60.0f64..60.0, an in -60.0f64..60.0,
        bearing in 0.0f64..360.0, len in 5.0f64..80.0,
        pe in -60.0f64..60.0, pn in -60.0f64..60.0,
    ) {
        let a = Point::new(ae, an);
        let b = a.offset(bearing, len);
        let p = Point::new(pe, pn);
        let route = two_fix_route(a, b);
        let xtd = cross_track_distance(p, &route, 0);
        let oracle = sampled_line_distance(p, a, b);
        prop_assert!((xtd.abs() - oracle.min(CROSS_TRACK_CLIP_NM)).abs() < 1e-6, "{xtd} vs {oracle}");
        if oracle > 1e-6 {
            let side = relative_turn(bearing, bearing_to(a, p).unwrap());
            prop_assert_eq!(xtd > 0.0, side > 0.0 && side < 180.0);
        }
    }

    #[test]
    fn waypoint_index_never_regresses(seed in any::<u64>()) {
        let sector = Sector::default_sector();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let route = &sector.routes[rng.random_range(0..sector.routes.len())];
        let mut index = 1;
        for _ in 0..200 {
            let p = Point::new(rng.random_range(-60.0..60.0), rng.random_range(-60.0..60.0));
            let next = advance_waypoint(p, route, index);
            prop_assert!(next == index || next == index + 1);
            prop_assert!(next <= route.last_index());
            index = next;
        }
    }
}

fn random_aircraft(rng: &mut ChaCha8Rng, route: &Arc<Route>) -> AircraftState {
    let p = Point::new(rng.random_range(-60.0..60.0), rng.random_range(-60.0..60.0));
    let mut ac = AircraftState::on_route("X", Arc::clone(route), p, rng.random_range(0.0..360.0), 300, Performance::default());
    ac.cleared_heading = rng.random_range(0.0..360.0);
    ac
}

#[test]
fn closest_approach_matches_one_second_sampling() {
    let sector = Sector::default_sector();
    let route = Arc::new(sector.routes[0].clone());
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for heading in [ProjectionHeading::Current, ProjectionHeading::Cleared] {
        for case in 0..1000 {
            let a = random_aircraft(&mut rng, &route);
            let b = random_aircraft(&mut rng, &route);
            let analytic = project_min_separation(&a, &b, 150.0, heading).projected_min_nm;
            let sampled = common::sampled_closest_approach(&a, &b, 150.0, heading);
            assert!(analytic <= sampled + 1e-9, "case {case}: {analytic} > {sampled}");
            assert!(sampled - analytic <= 0.05, "case {case}: {analytic} vs {sampled}");
        }
    }
}

#[test]
fn observations_stay_in_unit_box_under_random_play() {
    let sector = Arc::new(Sector::default_sector());
    let setups = [
        (ScenarioKind::LateralNav, ActionSpace::LateralSmall, RewardPreset::LateralNavigation),
        (ScenarioKind::LateralNav, ActionSpace::LateralLarge, RewardPreset::LateralNavigation),
        (ScenarioKind::LateralAvoidance, ActionSpace::LateralSmall, RewardPreset::LateralNavigationAndAvoidance),
        (ScenarioKind::Vertical, ActionSpace::Vertical, RewardPreset::VerticalNavigation),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut steps = 0;
    let mut episode = 0u64;
    while steps < 10_000 {
        let (kind, space, preset) = setups[episode as usize % setups.len()];
        let mut env = AtcEnv::new(Arc::clone(&sector), space, EnvConfig::new(preset.weights())).unwrap();
        let sc = generate(&sector, episode, kind, Performance::default()).unwrap();
        let mut obs = env.reset(&sc).unwrap();
        // Bias toward acting so headings wander far from the route.
        let act_prob = rng.random_range(0.0..1.0);
        loop {
            assert!(obs.iter().all(|v| (0.0..=1.0).contains(v)), "{kind} {obs:?}");
            let a = if rng.random_bool(act_prob) { rng.random_range(1..space.size()) } else { 0 };
            let r = env.step(a).unwrap();
            steps += 1;
            obs = r.observation;
            if r.done {
                assert!(obs.iter().all(|v| (0.0..=1.0).contains(v)));
                break;
            }
        }
        episode += 1;
    }
}
