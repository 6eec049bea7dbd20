//! Point-mass aircraft kinematics advanced in fixed steps.
//!
//! Each aircraft flies at constant ground speed, turns toward its cleared
//! heading at a fixed rate along the shortest angular path, and climbs or
//! descends toward its selected flight level at a fixed vertical rate. Both
//! the turn and the level change are captured exactly, never overshot.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::airspace::{
    advance_waypoint, bearing_to, fix_reached, normalize_heading, relative_turn, FlightLevelBounds,
    Point, Route,
};
use crate::error::{Error, Result};

/// Simulation step length in seconds.
pub const STEP_SECONDS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Performance {
    pub ground_speed_kts: f64,
    pub turn_rate_deg_s: f64,
    pub vertical_rate_fpm: f64,
}

impl Default for Performance {
    fn default() -> Self {
        Self {
            ground_speed_kts: 450.0,
            turn_rate_deg_s: 1.5,
            vertical_rate_fpm: 2000.0,
        }
    }
}

impl Performance {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.ground_speed_kts) && ok(self.turn_rate_deg_s) && ok(self.vertical_rate_fpm) {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "performance values must be positive: {self:?}"
            )))
        }
    }

    /// Distance covered in `seconds`.
    pub fn distance_nm(&self, seconds: f64) -> f64 {
        self.ground_speed_kts * seconds / 3600.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "delta")]
pub enum CommandKind {
    /// Signed degrees, positive is a right turn.
    HeadingDelta(i32),
    /// Signed flight levels, positive is a climb.
    LevelDelta(i32),
}

impl CommandKind {
    pub fn delta(self) -> i32 {
        match self {
            CommandKind::HeadingDelta(d) | CommandKind::LevelDelta(d) => d,
        }
    }

    pub fn validate(self) -> Result<()> {
        let d = self.delta();
        if d == 0 || d % 10 != 0 {
            return Err(Error::InvalidCommand(format!(
                "delta {d} must be a non-zero multiple of 10"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Command {
    pub target: String,
    pub kind: CommandKind,
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            CommandKind::HeadingDelta(d) if d < 0 => write!(f, "{} turn left {}", self.target, -d),
            CommandKind::HeadingDelta(d) => write!(f, "{} turn right {}", self.target, d),
            CommandKind::LevelDelta(d) if d < 0 => write!(f, "{} descend {} FL", self.target, -d),
            CommandKind::LevelDelta(d) => write!(f, "{} climb {} FL", self.target, d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AircraftState {
    pub callsign: String,
    pub position: Point,
    pub heading: f64,
    pub cleared_heading: f64,
    pub altitude_ft: f64,
    pub selected_fl: i32,
    pub performance: Performance,
    pub route: Arc<Route>,
    pub next_fix_index: usize,
    pub steps_since_last_action: u32,
    pub action_count: u32,
    pub exited: bool,
    /// Distance to the exit fix at the moment of exit; `None` when the
    /// aircraft left the sector some other way or is still flying.
    pub exit_miss_nm: Option<f64>,
}

impl AircraftState {
    /// Aircraft at `position` flying toward fix `next_fix_index` of `route`.
    pub fn on_route(
        callsign: impl Into<String>,
        route: Arc<Route>,
        position: Point,
        heading: f64,
        flight_level: i32,
        performance: Performance,
    ) -> Self {
        let heading = normalize_heading(heading);
        Self {
            callsign: callsign.into(),
            position,
            heading,
            cleared_heading: heading,
            altitude_ft: f64::from(flight_level) * 100.0,
            selected_fl: flight_level,
            performance,
            route,
            next_fix_index: 1,
            steps_since_last_action: 0,
            action_count: 0,
            exited: false,
            exit_miss_nm: None,
        }
    }

    /// Index of the leg currently being flown.
    pub fn active_leg(&self) -> usize {
        self.next_fix_index.clamp(1, self.route.last_index()) - 1
    }

    pub fn flight_level(&self) -> f64 {
        self.altitude_ft / 100.0
    }

    /// Applies a clearance: heading deltas move the cleared heading, level
    /// deltas move the selected level (clamped to `bounds`).
    pub fn apply_command(&mut self, kind: CommandKind, bounds: FlightLevelBounds) -> Result<()> {
        if self.exited {
            return Err(Error::AircraftExited(self.callsign.clone()));
        }
        kind.validate()?;
        self.apply_clearance(kind, bounds);
        self.steps_since_last_action = 0;
        self.action_count += 1;
        Ok(())
    }

    /// Moves the cleared heading or selected level without touching any
    /// bookkeeping counters.
    pub(crate) fn apply_clearance(&mut self, kind: CommandKind, bounds: FlightLevelBounds) {
        match kind {
            CommandKind::HeadingDelta(d) => {
                self.cleared_heading = normalize_heading(self.cleared_heading + f64::from(d));
            }
            CommandKind::LevelDelta(d) => {
                self.selected_fl = bounds.clamp(self.selected_fl + d);
            }
        }
    }

    /// Advances the aircraft by `dt` seconds.
    pub fn step(&mut self, dt: f64) {
        if self.exited {
            return;
        }
        let perf = self.performance;

        let max_turn = perf.turn_rate_deg_s * dt;
        let wanted = relative_turn(self.heading, self.cleared_heading);
        let turned = if wanted.abs() <= max_turn {
            wanted
        } else {
            max_turn.copysign(wanted)
        };
        let mean_heading = self.heading + turned / 2.0;
        self.heading = if turned == wanted {
            self.cleared_heading
        } else {
            normalize_heading(self.heading + turned)
        };
        self.position = self.position.offset(mean_heading, perf.distance_nm(dt));

        let target_ft = f64::from(self.selected_fl) * 100.0;
        let max_climb = perf.vertical_rate_fpm * dt / 60.0;
        let gap = target_ft - self.altitude_ft;
        self.altitude_ft = if gap.abs() <= max_climb {
            target_ft
        } else {
            self.altitude_ft + max_climb.copysign(gap)
        };

        self.next_fix_index = advance_waypoint(self.position, &self.route, self.next_fix_index);
        let last = self.route.last_index();
        if self.next_fix_index == last && fix_reached(self.position, &self.route, last) {
            self.exited = true;
            self.exit_miss_nm = Some(self.position.distance(self.route.exit().position));
        }
    }

    /// Points the cleared heading at the next fix.
    pub fn own_navigation(&mut self) {
        if self.exited {
            return;
        }
        let target = self.route.fixes[self.next_fix_index].position;
        if let Ok(b) = bearing_to(self.position, target) {
            self.cleared_heading = b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airspace::Fix;
    use approx::assert_abs_diff_eq;

    fn route() -> Arc<Route> {
        let fix = |name: &str, e, n| Fix {
            name: name.into(),
            position: Point::new(e, n),
        };
        Arc::new(Route {
            id: "T".into(),
            fixes: vec![fix("A", 0.0, -50.0), fix("B", 0.0, 0.0), fix("C", 40.0, 30.0)],
        })
    }

    fn aircraft() -> AircraftState {
        AircraftState::on_route("T1", route(), Point::new(0.0, -50.0), 0.0, 300, Performance::default())
    }

    #[test]
    fn heading_command_wraps() {
        let mut a = aircraft();
        a.cleared_heading = 355.0;
        a.apply_command(CommandKind::HeadingDelta(10), FlightLevelBounds::default()).unwrap();
        assert_abs_diff_eq!(a.cleared_heading, 5.0, epsilon = 1e-12);
        assert_eq!(a.action_count, 1);
        assert_eq!(a.steps_since_last_action, 0);
    }

    #[test]
    fn level_command_clamps_at_bounds() {
        let mut a = aircraft();
        let b = FlightLevelBounds::default();
        a.apply_command(CommandKind::LevelDelta(10), b).unwrap();
        assert_eq!(a.selected_fl, 310);
        a.selected_fl = 450;
        a.apply_command(CommandKind::LevelDelta(10), b).unwrap();
        assert_eq!(a.selected_fl, 450);
    }

    #[test]
    fn bad_commands_rejected() {
        let mut a = aircraft();
        let b = FlightLevelBounds::default();
        assert!(a.apply_command(CommandKind::HeadingDelta(0), b).is_err());
        assert!(a.apply_command(CommandKind::HeadingDelta(15), b).is_err());
        a.exited = true;
        assert!(matches!(
            a.apply_command(CommandKind::HeadingDelta(10), b),
            Err(Error::AircraftExited(_))
        ));
    }

    #[test]
    fn one_step_turns_nine_degrees() {
        let mut a = aircraft();
        a.cleared_heading = 90.0;
        a.step(STEP_SECONDS);
        assert_abs_diff_eq!(a.heading, 9.0, epsilon = 1e-12);
    }

    #[test]
    fn straight_and_level_moves_three_quarters_of_a_mile() {
        let mut a = aircraft();
        let before = a.clone();
        a.step(STEP_SECONDS);
        assert_abs_diff_eq!(a.position.distance(before.position), 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(a.position.north, -49.25, epsilon = 1e-12);
        assert_eq!(a.heading, before.heading);
        assert_eq!(a.altitude_ft, before.altitude_ft);
        assert_eq!(a.selected_fl, before.selected_fl);
    }

    #[test]
    fn climb_captures_level() {
        let mut a = aircraft();
        a.altitude_ft = 29_800.0;
        a.step(STEP_SECONDS);
        assert_eq!(a.altitude_ft, 30_000.0);
    }

    #[test]
    fn ten_degree_turn_takes_two_steps() {
        let mut a = aircraft();
        a.cleared_heading = 10.0;
        a.step(STEP_SECONDS);
        assert!(a.heading < 10.0);
        a.step(STEP_SECONDS);
        assert_eq!(a.heading, 10.0);
    }

    #[test]
    fn reversal_turns_right() {
        let mut a = aircraft();
        a.cleared_heading = 180.0;
        a.step(STEP_SECONDS);
        assert_abs_diff_eq!(a.heading, 9.0, epsilon = 1e-12);
    }

    #[test]
    fn own_navigation_points_at_next_fix() {
        let mut a = aircraft();
        a.cleared_heading = 250.0;
        a.own_navigation();
        assert_abs_diff_eq!(a.cleared_heading, 0.0);
        let mut gone = aircraft();
        gone.exited = true;
        gone.cleared_heading = 250.0;
        gone.own_navigation();
        assert_eq!(gone.cleared_heading, 250.0);
    }

    #[test]
    fn own_navigation_flies_the_route() {
        let mut a = aircraft();
        let r = a.route.clone();
        let mut closest = vec![f64::INFINITY; r.fixes.len()];
        for _ in 0..400 {
            a.own_navigation();
            a.step(STEP_SECONDS);
            for (i, f) in r.fixes.iter().enumerate() {
                closest[i] = closest[i].min(a.position.distance(f.position));
            }
            if a.exited {
                break;
            }
        }
        assert!(a.exited);
        for d in &closest[1..] {
            assert!(*d <= crate::airspace::CAPTURE_RADIUS_NM, "{closest:?}");
        }
    }
}
