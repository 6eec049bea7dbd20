//! Sector geometry and the planar navigation helpers built on it.
//!
//! Everything lives on a flat plane measured in nautical miles east and north
//! of the sector centre. Bearings are compass bearings: 0 is north and angles
//! grow clockwise.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest magnitude reported for a cross-track distance.
pub const CROSS_TRACK_CLIP_NM: f64 = 100.0;

/// Distance within which a fix counts as reached.
pub const CAPTURE_RADIUS_NM: f64 = 2.0;

/// Current sector-file schema version.
pub const SECTOR_FORMAT_VERSION: u32 = 1;

const DEFAULT_SECTOR: &str = include_str!("../data/x_plus.toml");

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub east: f64,
    pub north: f64,
}

impl Point {
    pub const ORIGIN: Point = Point {
        east: 0.0,
        north: 0.0,
    };

    pub const fn new(east: f64, north: f64) -> Self {
        Self { east, north }
    }

    pub fn distance(self, other: Point) -> f64 {
        (other.east - self.east).hypot(other.north - self.north)
    }

    /// Moves `distance` nm along compass `bearing_deg`.
    pub fn offset(self, bearing_deg: f64, distance: f64) -> Point {
        let b = bearing_deg.to_radians();
        Point {
            east: self.east + distance * b.sin(),
            north: self.north + distance * b.cos(),
        }
    }

    fn minus(self, other: Point) -> (f64, f64) {
        (self.east - other.east, self.north - other.north)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fix {
    pub name: String,
    pub position: Point,
}

/// An ordered fix sequence: entry, intermediates, exit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub id: String,
    pub fixes: Vec<Fix>,
}

impl Route {
    pub fn leg_count(&self) -> usize {
        self.fixes.len().saturating_sub(1)
    }

    pub fn last_index(&self) -> usize {
        self.fixes.len() - 1
    }

    pub fn entry(&self) -> &Fix {
        &self.fixes[0]
    }

    pub fn exit(&self) -> &Fix {
        &self.fixes[self.last_index()]
    }

    /// Start and end of leg `leg` (which ends at fix `leg + 1`).
    pub fn leg(&self, leg: usize) -> (Point, Point) {
        (self.fixes[leg].position, self.fixes[leg + 1].position)
    }

    /// Compass bearing of leg `leg`.
    pub fn leg_bearing(&self, leg: usize) -> f64 {
        let (a, b) = self.leg(leg);
        bearing_to(a, b).expect("route legs have positive length")
    }

    /// Distance still to fly: straight to fix `next_index`, then along the
    /// remaining legs to the exit.
    pub fn remaining_distance(&self, position: Point, next_index: usize) -> f64 {
        let next = next_index.min(self.last_index());
        let mut total = position.distance(self.fixes[next].position);
        for leg in next..self.leg_count() {
            let (a, b) = self.leg(leg);
            total += a.distance(b);
        }
        total
    }
}

/// Lower and upper flight level of the sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlightLevelBounds {
    pub lower: i32,
    pub upper: i32,
}

impl FlightLevelBounds {
    pub fn clamp(self, fl: i32) -> i32 {
        fl.clamp(self.lower, self.upper)
    }

    pub fn contains_feet(self, altitude_ft: f64) -> bool {
        altitude_ft >= f64::from(self.lower) * 100.0 && altitude_ft <= f64::from(self.upper) * 100.0
    }
}

impl Default for FlightLevelBounds {
    fn default() -> Self {
        Self {
            lower: 50,
            upper: 450,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub name: String,
    pub fixes: Vec<Fix>,
    pub routes: Vec<Route>,
    /// Side length of the square sector box, centred on the origin.
    pub bounding_box_nm: f64,
    pub airway_half_width_nm: f64,
    pub vertical_bounds: FlightLevelBounds,
    pub entry_fixes: Vec<String>,
}

/// On-disk shape of a sector document (TOML).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorFile {
    pub format_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default = "default_box")]
    pub bounding_box_nm: f64,
    #[serde(default = "default_half_width")]
    pub airway_half_width_nm: f64,
    #[serde(default = "default_vertical")]
    pub vertical_bounds: [i32; 2],
    pub entry_fixes: Vec<String>,
    pub fixes: Vec<FixEntry>,
    pub routes: Vec<RouteEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixEntry {
    pub name: String,
    pub east: f64,
    pub north: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteEntry {
    pub id: String,
    pub fixes: Vec<String>,
}

fn default_box() -> f64 {
    120.0
}
fn default_half_width() -> f64 {
    10.0
}
fn default_vertical() -> [i32; 2] {
    [50, 450]
}

impl Sector {
    /// The bundled eight-arm sector centred on fix `EGL`.
    pub fn default_sector() -> Sector {
        load_sector(DEFAULT_SECTOR).expect("bundled sector is valid")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Sector> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        load_sector(&text)
    }

    pub fn fix(&self, name: &str) -> Option<&Fix> {
        self.fixes.iter().find(|f| f.name == name)
    }

    pub fn is_entry(&self, name: &str) -> bool {
        self.entry_fixes.iter().any(|e| e == name)
    }

    pub fn half_box(&self) -> f64 {
        self.bounding_box_nm / 2.0
    }

    pub fn contains(&self, p: Point) -> bool {
        let h = self.half_box();
        p.east.abs() <= h && p.north.abs() <= h
    }

    pub fn to_file(&self) -> SectorFile {
        SectorFile {
            format_version: SECTOR_FORMAT_VERSION,
            name: self.name.clone(),
            bounding_box_nm: self.bounding_box_nm,
            airway_half_width_nm: self.airway_half_width_nm,
            vertical_bounds: [self.vertical_bounds.lower, self.vertical_bounds.upper],
            entry_fixes: self.entry_fixes.clone(),
            fixes: self
                .fixes
                .iter()
                .map(|f| FixEntry {
                    name: f.name.clone(),
                    east: f.position.east,
                    north: f.position.north,
                })
                .collect(),
            routes: self
                .routes
                .iter()
                .map(|r| RouteEntry {
                    id: r.id.clone(),
                    fixes: r.fixes.iter().map(|f| f.name.clone()).collect(),
                })
                .collect(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("sector serializes")
    }
}

/// Parses and validates a sector document.
pub fn load_sector(document: &str) -> Result<Sector> {
    let file: SectorFile = toml::from_str(document).map_err(|e| Error::parse("sector", e))?;
    Sector::try_from(file)
}

impl TryFrom<SectorFile> for Sector {
    type Error = Error;

    fn try_from(file: SectorFile) -> Result<Sector> {
        if file.format_version != SECTOR_FORMAT_VERSION {
            return Err(Error::sector(
                "format_version",
                format!("unsupported version {}", file.format_version),
            ));
        }
        if !(file.bounding_box_nm > 0.0) {
            return Err(Error::sector("bounding_box_nm", "must be positive"));
        }
        if !(file.airway_half_width_nm > 0.0) {
            return Err(Error::sector("airway_half_width_nm", "must be positive"));
        }
        let [lower, upper] = file.vertical_bounds;
        if lower < 0 || lower >= upper {
            return Err(Error::sector(
                "vertical_bounds",
                format!("need 0 <= lower < upper, got [{lower}, {upper}]"),
            ));
        }
        let half = file.bounding_box_nm / 2.0;

        let mut names = HashSet::new();
        let mut fixes = Vec::with_capacity(file.fixes.len());
        for f in &file.fixes {
            if !names.insert(f.name.as_str()) {
                return Err(Error::sector(
                    format!("fixes.{}", f.name),
                    "duplicate fix name",
                ));
            }
            let position = Point::new(f.east, f.north);
            if !position.east.is_finite()
                || !position.north.is_finite()
                || position.east.abs() > half
                || position.north.abs() > half
            {
                return Err(Error::sector(
                    format!("fixes.{}", f.name),
                    "position outside the sector bounding box",
                ));
            }
            fixes.push(Fix {
                name: f.name.clone(),
                position,
            });
        }
        let lookup = |name: &str| fixes.iter().find(|f| f.name == name);

        if file.entry_fixes.is_empty() {
            return Err(Error::sector("entry_fixes", "at least one entry fix required"));
        }
        for e in &file.entry_fixes {
            let fix = lookup(e).ok_or_else(|| {
                Error::sector(format!("entry_fixes.{e}"), "unknown fix")
            })?;
            // Entry fixes must sit on the outer quarter of the box.
            if fix.position.distance(Point::ORIGIN) < 0.75 * half {
                return Err(Error::sector(
                    format!("entry_fixes.{e}"),
                    "entry fix is not on the sector periphery",
                ));
            }
        }

        let mut route_ids = HashSet::new();
        let mut routes = Vec::with_capacity(file.routes.len());
        for r in &file.routes {
            let field = format!("routes.{}", r.id);
            if !route_ids.insert(r.id.as_str()) {
                return Err(Error::sector(field, "duplicate route id"));
            }
            if r.fixes.len() < 3 {
                return Err(Error::sector(field, "a route needs at least 3 fixes"));
            }
            let mut route_fixes = Vec::with_capacity(r.fixes.len());
            for name in &r.fixes {
                let fix = lookup(name).ok_or_else(|| {
                    Error::sector(field.clone(), format!("unknown fix {name}"))
                })?;
                route_fixes.push(fix.clone());
            }
            for pair in route_fixes.windows(2) {
                if pair[0].name == pair[1].name {
                    return Err(Error::sector(field, "consecutive fixes must differ"));
                }
                if pair[0].position.distance(pair[1].position) <= 1e-9 {
                    return Err(Error::sector(field, "zero-length leg"));
                }
            }
            if !file.entry_fixes.contains(&r.fixes[0]) {
                return Err(Error::sector(field, "first fix is not an entry fix"));
            }
            routes.push(Route {
                id: r.id.clone(),
                fixes: route_fixes,
            });
        }
        if routes.is_empty() {
            return Err(Error::sector("routes", "at least one route required"));
        }

        Ok(Sector {
            name: file.name,
            fixes,
            routes,
            bounding_box_nm: file.bounding_box_nm,
            airway_half_width_nm: file.airway_half_width_nm,
            vertical_bounds: FlightLevelBounds { lower, upper },
            entry_fixes: file.entry_fixes,
        })
    }
}

/// Wraps any angle into `[0, 360)`.
pub fn normalize_heading(deg: f64) -> f64 {
    let h = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if h >= 360.0 {
        0.0
    } else {
        h
    }
}

/// Signed perpendicular distance from `position` to the infinite line through
/// leg `active_leg`, positive to the right of the direction of travel, clipped
/// to ±100 nm.
pub fn cross_track_distance(position: Point, route: &Route, active_leg: usize) -> f64 {
    unclipped_cross_track(position, route, active_leg).clamp(-CROSS_TRACK_CLIP_NM, CROSS_TRACK_CLIP_NM)
}

pub(crate) fn unclipped_cross_track(position: Point, route: &Route, active_leg: usize) -> f64 {
    debug_assert!(active_leg < route.leg_count());
    let (a, b) = route.leg(active_leg);
    let (de, dn) = b.minus(a);
    let len = de.hypot(dn);
    let (ve, vn) = position.minus(a);
    (dn * ve - de * vn) / len
}

/// Smallest signed turn from `cleared_heading` to `target_bearing`, in
/// `[-180, 180]`. Positive is a right turn; an exact reversal reports `+180`.
pub fn relative_turn(cleared_heading: f64, target_bearing: f64) -> f64 {
    let diff = normalize_heading(target_bearing - cleared_heading);
    if diff > 180.0 {
        diff - 360.0
    } else {
        diff
    }
}

/// Compass bearing from `from` to `to`, in `[0, 360)`.
pub fn bearing_to(from: Point, to: Point) -> Result<f64> {
    let (de, dn) = to.minus(from);
    if de.hypot(dn) <= 1e-9 {
        return Err(Error::CoincidentPoints);
    }
    Ok(normalize_heading(de.atan2(dn).to_degrees()))
}

/// True when `position` has captured fix `index`: within the capture radius,
/// or past the end of the leg that ends there.
pub fn fix_reached(position: Point, route: &Route, index: usize) -> bool {
    let target = route.fixes[index].position;
    if position.distance(target) <= CAPTURE_RADIUS_NM {
        return true;
    }
    if index == 0 {
        return false;
    }
    let (a, b) = route.leg(index - 1);
    let (de, dn) = b.minus(a);
    let len = de.hypot(dn);
    let (ve, vn) = position.minus(a);
    (ve * de + vn * dn) / len > len
}

/// Next-fix progression. Moves on by one when the indexed fix has been
/// reached; never goes backwards and stops at the exit fix.
pub fn advance_waypoint(position: Point, route: &Route, current_index: usize) -> usize {
    let last = route.last_index();
    if current_index >= last {
        return last;
    }
    if fix_reached(position, route, current_index) {
        current_index + 1
    } else {
        current_index
    }
}

/// Every route that starts at `entry`.
pub fn viable_routes<'a>(sector: &'a Sector, entry: &str) -> Result<Vec<&'a Route>> {
    if !sector.is_entry(entry) {
        return Err(Error::NotEntryFix(entry.to_string()));
    }
    Ok(sector
        .routes
        .iter()
        .filter(|r| r.entry().name == entry)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn north_route() -> Route {
        let fix = |name: &str, e, n| Fix {
            name: name.into(),
            position: Point::new(e, n),
        };
        Route {
            id: "T".into(),
            fixes: vec![fix("A", 0.0, -20.0), fix("B", 0.0, 0.0), fix("C", 20.0, 20.0)],
        }
    }

    #[test]
    fn default_sector_shape() {
        let s = Sector::default_sector();
        assert_eq!(s.entry_fixes.len(), 8);
        assert_eq!(s.fix("EGL").unwrap().position, Point::ORIGIN);
        assert_eq!(s.bounding_box_nm, 120.0);
        assert_eq!(s.airway_half_width_nm, 10.0);
        assert_eq!(s.routes.len(), 40);
        for r in &s.routes {
            assert!(r.fixes.iter().any(|f| f.name == "EGL"));
        }
    }

    #[test]
    fn default_sector_round_trips_through_toml() {
        let s = Sector::default_sector();
        let again = load_sector(&s.to_toml()).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn duplicate_fix_is_named() {
        let doc = r#"
            format_version = 1
            entry_fixes = ["A"]
            [[fixes]]
            name = "A"
            east = 0.0
            north = 55.0
            [[fixes]]
            name = "A"
            east = 0.0
            north = 0.0
            [[routes]]
            id = "R"
            fixes = ["A", "A", "A"]
        "#;
        let err = load_sector(doc).unwrap_err().to_string();
        assert!(err.contains("fixes.A"), "{err}");
        assert!(err.contains("duplicate"), "{err}");
    }

    #[test]
    fn unknown_route_fix_names_route() {
        let doc = r#"
            format_version = 1
            entry_fixes = ["A"]
            [[fixes]]
            name = "A"
            east = 0.0
            north = 55.0
            [[fixes]]
            name = "B"
            east = 0.0
            north = 0.0
            [[routes]]
            id = "LOST"
            fixes = ["A", "B", "NOWHERE"]
        "#;
        let err = load_sector(doc).unwrap_err().to_string();
        assert!(err.contains("routes.LOST"), "{err}");
        assert!(err.contains("NOWHERE"), "{err}");
    }

    #[test]
    fn malformed_document_is_a_parse_error() {
        assert!(matches!(load_sector("format_version = ["), Err(Error::Parse { .. })));
    }

    #[test]
    fn cross_track_examples() {
        let r = north_route();
        assert_eq!(cross_track_distance(Point::new(0.0, -5.0), &r, 0), 0.0);
        assert_abs_diff_eq!(cross_track_distance(Point::new(3.0, -10.0), &r, 0), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cross_track_distance(Point::new(-3.0, -10.0), &r, 0), -3.0, epsilon = 1e-12);
        assert_eq!(cross_track_distance(Point::new(-250.0, 0.0), &r, 0), -100.0);
    }

    #[test]
    fn relative_turn_examples() {
        assert_eq!(relative_turn(350.0, 10.0), 20.0);
        assert_eq!(relative_turn(90.0, 90.0), 0.0);
        assert_eq!(relative_turn(0.0, 180.0), 180.0);
        assert_eq!(relative_turn(10.0, 350.0), -20.0);
    }

    #[test]
    fn bearing_examples() {
        let o = Point::ORIGIN;
        assert_abs_diff_eq!(bearing_to(o, Point::new(0.0, 10.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(bearing_to(o, Point::new(10.0, 0.0)).unwrap(), 90.0);
        assert_abs_diff_eq!(bearing_to(o, Point::new(-10.0, -10.0)).unwrap(), 225.0, epsilon = 1e-12);
        assert!(matches!(bearing_to(o, o), Err(Error::CoincidentPoints)));
    }

    #[test]
    fn advance_waypoint_examples() {
        let r = north_route();
        // 1 nm short of B
        assert_eq!(advance_waypoint(Point::new(0.0, -1.0), &r, 1), 2);
        // at the route start
        assert_eq!(advance_waypoint(Point::new(0.0, -20.0), &r, 1), 1);
        // abeam B but 5 nm off track
        assert_eq!(advance_waypoint(Point::new(5.0, 0.5), &r, 1), 2);
        // saturated at the exit
        assert_eq!(advance_waypoint(Point::new(20.0, 20.0), &r, 2), 2);
    }

    #[test]
    fn viable_routes_by_entry() {
        let s = Sector::default_sector();
        for e in &s.entry_fixes {
            let routes = viable_routes(&s, e).unwrap();
            assert!(routes.len() >= 2);
            assert!(routes.iter().all(|r| &r.entry().name == e));
        }
        assert!(matches!(viable_routes(&s, "EGL"), Err(Error::NotEntryFix(_))));
    }
}
