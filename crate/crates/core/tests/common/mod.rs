//! Oracles shared by the integration tests.

#![allow(dead_code)]

use atc_stack::dynamics::AircraftState;
use atc_stack::safety::ProjectionHeading;

/// Straight-line extrapolation sampled once per second over the horizon.
pub fn sampled_closest_approach(a: &AircraftState, b: &AircraftState, d_max: f64, heading: ProjectionHeading) -> f64 {
    let dir = |ac: &AircraftState| match heading {
        ProjectionHeading::Current => ac.heading,
        ProjectionHeading::Cleared => ac.cleared_heading,
    };
    let horizon = d_max * 3600.0 / a.performance.ground_speed_kts.max(b.performance.ground_speed_kts);
    let pos = |ac: &AircraftState, t: f64| ac.position.offset(dir(ac), ac.performance.ground_speed_kts * t / 3600.0);
    let mut best = a.position.distance(b.position);
    let mut t = 0.0;
    while t <= horizon {
        best = best.min(pos(a, t).distance(pos(b, t)));
        t += 1.0;
    }
    best.min(pos(a, horizon).distance(pos(b, horizon)))
}

/// Lateral-nav heuristic: turn whichever aircraft is furthest off its
/// next-fix bearing by 10° toward it, once that error exceeds 10°. Decodes
/// the observation itself, so it depends only on the observation layout.
pub fn track_next_fix(obs: &[f64]) -> usize {
    let mut best = (0, 10.0);
    for ac in 0..2 {
        let theta = obs[4 * ac] * 360.0 - 180.0;
        if theta.abs() > best.1 {
            best = (if theta > 0.0 { 2 + 2 * ac } else { 1 + 2 * ac }, theta.abs());
        }
    }
    best.0
}
