//! Pairwise separation and closest-point-of-approach projection.

use serde::{Deserialize, Serialize};

use crate::airspace::{bearing_to, relative_turn};
use crate::dynamics::AircraftState;
use crate::error::Result;

/// Lateral separation standard.
pub const SEPARATION_MINIMUM_NM: f64 = 5.0;

/// Which heading the dead-reckoning projection extrapolates along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionHeading {
    /// Heading actually being flown, ignoring any pending turn.
    #[default]
    Current,
    Cleared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub current_nm: f64,
    pub projected_min_nm: f64,
    /// Seconds from now until the projected minimum, within `[0, horizon]`.
    pub time_of_closest_approach: f64,
}

/// Planar distance between two aircraft.
pub fn separation(a: &AircraftState, b: &AircraftState) -> f64 {
    a.position.distance(b.position)
}

fn velocity_nm_s(ac: &AircraftState, heading: ProjectionHeading) -> (f64, f64) {
    let h = match heading {
        ProjectionHeading::Current => ac.heading,
        ProjectionHeading::Cleared => ac.cleared_heading,
    }
    .to_radians();
    let speed = ac.performance.ground_speed_kts / 3600.0;
    (speed * h.sin(), speed * h.cos())
}

/// Extrapolates both aircraft in straight lines at constant speed for the
/// time the faster one needs to fly `d_max` nm and returns the minimum
/// distance over that window.
pub fn project_min_separation(
    a: &AircraftState,
    b: &AircraftState,
    d_max: f64,
    heading: ProjectionHeading,
) -> SeparationReport {
    let horizon = d_max * 3600.0
        / a.performance
            .ground_speed_kts
            .max(b.performance.ground_speed_kts);
    let (va_e, va_n) = velocity_nm_s(a, heading);
    let (vb_e, vb_n) = velocity_nm_s(b, heading);
    let (re, rn) = (a.position.east - b.position.east, a.position.north - b.position.north);
    let (ve, vn) = (va_e - vb_e, va_n - vb_n);
    let speed_sq = ve * ve + vn * vn;
    let t = if speed_sq <= f64::EPSILON * 1e-6 {
        0.0
    } else {
        (-(re * ve + rn * vn) / speed_sq).clamp(0.0, horizon)
    };
    let current = re.hypot(rn);
    let projected = (re + ve * t).hypot(rn + vn * t).min(current);
    SeparationReport {
        current_nm: current,
        projected_min_nm: projected,
        time_of_closest_approach: t,
    }
}

/// Turn from `a`'s cleared heading toward `b`, in `[-180, 180]`.
pub fn relative_bearing(a: &AircraftState, b: &AircraftState) -> Result<f64> {
    Ok(relative_turn(a.cleared_heading, bearing_to(a.position, b.position)?))
}
