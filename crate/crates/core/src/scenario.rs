//! Seeded scenario generation.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`), a
//! counter-based generator whose output for a given 64-bit seed is fixed by
//! its published definition. Each rejected candidate is redrawn on a fresh
//! stream of the same key (`set_stream(attempt)`), so attempt `k` of seed `s`
//! is reproducible on its own.

use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::airspace::{Route, Sector};
use crate::dynamics::{AircraftState, Performance};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_STEPS: usize = 300;
pub const LATERAL_FLIGHT_LEVEL: i32 = 300;
pub const START_DISC_RADIUS_NM: f64 = 4.0;
pub const MIN_INITIAL_SEPARATION_NM: f64 = 20.0;
pub const MAX_ATTEMPTS: usize = 100;
pub const VERTICAL_FL_RANGE: (i32, i32) = (100, 300);
pub const SCENARIO_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    LateralNav,
    LateralAvoidance,
    Vertical,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::LateralNav => "lateral_nav",
            ScenarioKind::LateralAvoidance => "lateral_avoidance",
            ScenarioKind::Vertical => "vertical",
        }
    }

    pub fn aircraft_count(self) -> usize {
        match self {
            ScenarioKind::Vertical => 1,
            _ => 2,
        }
    }

    pub fn is_lateral(self) -> bool {
        !matches!(self, ScenarioKind::Vertical)
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lateral_nav" => Ok(ScenarioKind::LateralNav),
            "lateral_avoidance" => Ok(ScenarioKind::LateralAvoidance),
            "vertical" => Ok(ScenarioKind::Vertical),
            other => Err(Error::Config(format!(
                "unknown scenario kind {other:?} (expected lateral_nav, lateral_avoidance or vertical)"
            ))),
        }
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One aircraft together with where and at what level it should leave.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioAircraft {
    pub state: AircraftState,
    pub exit_fix: String,
    pub exit_fl: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default = "format_version")]
    pub format_version: u32,
    pub kind: ScenarioKind,
    pub seed: u64,
    pub max_steps: usize,
    pub aircraft: Vec<ScenarioAircraft>,
}

fn format_version() -> u32 {
    SCENARIO_FORMAT_VERSION
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::InvalidScenario("max_steps must be positive".into()));
        }
        if self.aircraft.len() != self.kind.aircraft_count() {
            return Err(Error::InvalidScenario(format!(
                "{} scenarios carry {} aircraft, found {}",
                self.kind,
                self.kind.aircraft_count(),
                self.aircraft.len()
            )));
        }
        for a in &self.aircraft {
            let s = &a.state;
            if self.kind.is_lateral() && s.selected_fl != LATERAL_FLIGHT_LEVEL {
                return Err(Error::InvalidScenario(format!(
                    "{}: lateral scenarios fly at FL{LATERAL_FLIGHT_LEVEL}",
                    s.callsign
                )));
            }
            if s.next_fix_index >= s.route.fixes.len() || s.next_fix_index == 0 {
                return Err(Error::InvalidScenario(format!(
                    "{}: next_fix_index {} invalid for route {}",
                    s.callsign, s.next_fix_index, s.route.id
                )));
            }
            if !(0.0..360.0).contains(&s.heading) || !(0.0..360.0).contains(&s.cleared_heading) {
                return Err(Error::InvalidScenario(format!(
                    "{}: headings must lie in [0, 360)",
                    s.callsign
                )));
            }
            s.performance.validate()?;
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn from_toml(text: &str) -> Result<Scenario> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::parse("scenario", e))?;
        if s.format_version != SCENARIO_FORMAT_VERSION {
            return Err(Error::InvalidScenario(format!(
                "unsupported format_version {}",
                s.format_version
            )));
        }
        s.validate()?;
        Ok(s)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Scenario> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Scenario::from_toml(&text)
    }
}

/// Builds a scenario of `kind` from `seed`.
pub fn generate(sector: &Sector, seed: u64, kind: ScenarioKind, performance: Performance) -> Result<Scenario> {
    match kind {
        ScenarioKind::Vertical => generate_vertical(sector, seed, performance),
        lateral => generate_lateral(sector, seed, lateral, performance),
    }
}

fn callsign(i: usize) -> String {
    format!("AC{}", i + 1)
}

fn pick_route(sector: &Sector, rng: &mut ChaCha8Rng) -> Arc<Route> {
    Arc::new(sector.routes[rng.random_range(0..sector.routes.len())].clone())
}

/// Two aircraft at FL300 on randomly drawn routes, each starting uniformly
/// inside a 4 nm disc around its entry fix. Candidates sharing an entry fix
/// or starting closer than 20 nm apart are redrawn.
pub fn generate_lateral(
    sector: &Sector,
    seed: u64,
    kind: ScenarioKind,
    performance: Performance,
) -> Result<Scenario> {
    if !kind.is_lateral() {
        return Err(Error::Config(format!("{kind} is not a lateral kind")));
    }
    if sector.entry_fixes.len() < 2 {
        return Err(Error::InvalidScenario(
            "lateral scenarios need at least two entry fixes".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..MAX_ATTEMPTS {
        rng.set_stream(attempt as u64);
        rng.set_word_pos(0);
        let mut aircraft = Vec::with_capacity(2);
        for i in 0..2 {
            let route = pick_route(sector, &mut rng);
            let radius = START_DISC_RADIUS_NM * rng.random::<f64>().sqrt();
            let angle = 360.0 * rng.random::<f64>();
            let start = route.entry().position.offset(angle, radius);
            let heading = route.leg_bearing(0);
            let exit_fix = route.exit().name.clone();
            aircraft.push(ScenarioAircraft {
                state: AircraftState::on_route(
                    callsign(i),
                    route,
                    start,
                    heading,
                    LATERAL_FLIGHT_LEVEL,
                    performance,
                ),
                exit_fix,
                exit_fl: LATERAL_FLIGHT_LEVEL,
            });
        }
        let (a, b) = (&aircraft[0].state, &aircraft[1].state);
        if a.route.entry().name != b.route.entry().name
            && a.position.distance(b.position) >= MIN_INITIAL_SEPARATION_NM
        {
            return Ok(Scenario {
                format_version: SCENARIO_FORMAT_VERSION,
                kind,
                seed,
                max_steps: DEFAULT_MAX_STEPS,
                aircraft,
            });
        }
    }
    Err(Error::GenerationExhausted(MAX_ATTEMPTS))
}

/// One aircraft at its entry fix with initial and exit levels drawn
/// uniformly from FL100, FL110, ..., FL300 (equal values allowed).
pub fn generate_vertical(sector: &Sector, seed: u64, performance: Performance) -> Result<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let route = pick_route(sector, &mut rng);
    let (lo, hi) = VERTICAL_FL_RANGE;
    let levels = (hi - lo) / 10 + 1;
    let initial = lo + 10 * rng.random_range(0..levels);
    let target = lo + 10 * rng.random_range(0..levels);
    let start = route.entry().position;
    let exit_fix = route.exit().name.clone();
    let mut state = AircraftState::on_route(callsign(0), route, start, 0.0, initial, performance);
    state.own_navigation();
    state.heading = state.cleared_heading;
    Ok(Scenario {
        format_version: SCENARIO_FORMAT_VERSION,
        kind: ScenarioKind::Vertical,
        seed,
        max_steps: DEFAULT_MAX_STEPS,
        aircraft: vec![ScenarioAircraft {
            state,
            exit_fix,
            exit_fl: target,
        }],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_scenario() {
        let s = Sector::default_sector();
        let p = Performance::default();
        for kind in [ScenarioKind::LateralNav, ScenarioKind::LateralAvoidance, ScenarioKind::Vertical] {
            assert_eq!(generate(&s, 42, kind, p).unwrap(), generate(&s, 42, kind, p).unwrap());
        }
        assert_ne!(
            generate(&s, 1, ScenarioKind::LateralNav, p).unwrap(),
            generate(&s, 2, ScenarioKind::LateralNav, p).unwrap()
        );
    }

    #[test]
    fn lateral_sweep_respects_generation_rules() {
        let s = Sector::default_sector();
        for seed in 0..1000 {
            let sc = generate_lateral(&s, seed, ScenarioKind::LateralNav, Performance::default()).unwrap();
            sc.validate().unwrap();
            let (a, b) = (&sc.aircraft[0].state, &sc.aircraft[1].state);
            assert!(a.position.distance(b.position) >= MIN_INITIAL_SEPARATION_NM);
            assert_ne!(a.route.entry().name, b.route.entry().name);
            for ac in &sc.aircraft {
                let st = &ac.state;
                assert!(st.position.distance(st.route.entry().position) <= START_DISC_RADIUS_NM);
                assert_eq!(st.heading, st.route.leg_bearing(0));
                assert_eq!(st.altitude_ft, 30_000.0);
                assert_eq!(ac.exit_fl, 300);
                assert_eq!(ac.exit_fix, st.route.exit().name);
            }
        }
    }

    #[test]
    fn vertical_sweep_levels() {
        let s = Sector::default_sector();
        let mut saw_equal = false;
        for seed in 0..1000 {
            let sc = generate_vertical(&s, seed, Performance::default()).unwrap();
            sc.validate().unwrap();
            let ac = &sc.aircraft[0];
            for fl in [ac.state.selected_fl, ac.exit_fl] {
                assert!(fl % 10 == 0 && (100..=300).contains(&fl), "{fl}");
            }
            assert_eq!(ac.state.position, ac.state.route.entry().position);
            saw_equal |= ac.state.selected_fl == ac.exit_fl;
        }
        assert!(saw_equal);
    }

    #[test]
    fn exhausted_generation_reports_error() {
        let doc = r#"
            format_version = 1
            entry_fixes = ["A", "B"]
            [[fixes]]
            name = "A"
            east = 0.0
            north = 55.0
            [[fixes]]
            name = "B"
            east = 0.0
            north = -55.0
            [[fixes]]
            name = "M"
            east = 0.0
            north = 0.0
            [[routes]]
            id = "AB"
            fixes = ["A", "M", "B"]
        "#;
        let sector = crate::airspace::load_sector(doc).unwrap();
        // only one route, so both aircraft always share an entry fix
        assert!(matches!(
            generate_lateral(&sector, 7, ScenarioKind::LateralNav, Performance::default()),
            Err(Error::GenerationExhausted(100))
        ));
    }

    #[test]
    fn toml_round_trip() {
        let s = Sector::default_sector();
        let sc = generate(&s, 9, ScenarioKind::LateralAvoidance, Performance::default()).unwrap();
        let back = Scenario::from_toml(&sc.to_toml()).unwrap();
        assert_eq!(sc, back);
    }
}
