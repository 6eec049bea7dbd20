//! Loads a sector file (the bundled X-Plus sector by default) and lists every
//! route with its length and the turn flown at the central fix.
//!
//! `cargo run --example sector_routes -- [sector.toml]`

use atc_stack::airspace::{relative_turn, Sector};

fn main() -> atc_stack::Result<()> {
    let sector = match std::env::args().nth(1) {
        Some(path) => Sector::from_path(path)?,
        None => Sector::default_sector(),
    };
    println!(
        "{}: {} fixes, {} routes, box ±{} nm, airway half-width {} nm",
        sector.name,
        sector.fixes.len(),
        sector.routes.len(),
        sector.half_box(),
        sector.airway_half_width_nm
    );
    for route in &sector.routes {
        let length: f64 = (0..route.leg_count())
            .map(|leg| {
                let (a, b) = route.leg(leg);
                a.distance(b)
            })
            .sum();
        // turn at each interior fix, positive right
        let turns: Vec<String> = (1..route.leg_count())
            .map(|leg| format!("{:+.0}", relative_turn(route.leg_bearing(leg - 1), route.leg_bearing(leg))))
            .collect();
        let names: Vec<&str> = route.fixes.iter().map(|f| f.name.as_str()).collect();
        println!("{:<8} {:>6.1} nm  turns [{}]  {}", route.id, length, turns.join(" "), names.join(" > "));
    }
    Ok(())
}
