//! Two aircraft on crossing routes converging on the central fix, the second
//! 3 nm ahead of the first. Prints the current distance, the projected
//! closest approach and the safety penalty once a minute.
//!
//! `cargo run --example conflict_projection`

use std::sync::Arc;

use atc_stack::airspace::{Point, Sector};
use atc_stack::dynamics::{AircraftState, Performance};
use atc_stack::rewards::{safety_reward, RewardConfig};
use atc_stack::safety::{project_min_separation, ProjectionHeading};

fn main() {
    let sector = Sector::default_sector();
    let route = |id: &str| Arc::new(sector.routes.iter().find(|r| r.id == id).expect("route in the default sector").clone());
    let perf = Performance::default();
    let (ra, rb) = (route("ARMEN-EPRAT"), route("CARSO-GORDA"));
    let start = |r: &Arc<atc_stack::airspace::Route>, offset: f64| {
        let p: Point = r.entry().position;
        AircraftState::on_route("AC", Arc::clone(r), p.offset(r.leg_bearing(0), offset), r.leg_bearing(0), 300, perf)
    };
    let mut a = start(&ra, 0.0);
    let mut b = start(&rb, 3.0);
    let cfg = RewardConfig::default();
    println!("{:>5} {:>9} {:>10} {:>9} {:>8}", "min", "now nm", "cpa nm", "cpa in s", "r_s");
    for minute in 0..10 {
        let report = project_min_separation(&a, &b, cfg.d_max, ProjectionHeading::Current);
        println!(
            "{minute:>5} {:>9.2} {:>10.2} {:>9.0} {:>8.3}",
            report.current_nm,
            report.projected_min_nm,
            report.time_of_closest_approach,
            safety_reward(&report, &cfg)
        );
        for _ in 0..10 {
            a.step(6.0);
            b.step(6.0);
        }
    }
}
