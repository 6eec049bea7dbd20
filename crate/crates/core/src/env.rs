//! The centralised control MDP.
//!
//! One environment instance drives every aircraft of a scenario. The agent
//! picks a single discrete action per 6 s step; index 0 is always "no
//! action". Observations are flat vectors with every entry in `[0, 1]`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::airspace::{
    bearing_to, cross_track_distance, relative_turn, unclipped_cross_track, Sector,
};
use crate::dynamics::{AircraftState, Command, CommandKind, STEP_SECONDS};
use crate::error::{Error, Result};
use crate::rewards::{
    centreline_reward, damping_reward, safety_reward, terminal_rewards, total_step_reward,
    vertical_reward, RewardComponents, RewardConfig, RewardWeights, TerminalSummary,
};
use crate::safety::{project_min_separation, relative_bearing, ProjectionHeading, SeparationReport};
use crate::scenario::{Scenario, ScenarioKind};

/// Heading features span a full turn either way.
const ANGLE_RANGE: (f64, f64) = (-180.0, 180.0);
const CROSS_TRACK_RANGE: (f64, f64) = (-100.0, 100.0);
const PAIR_DISTANCE_RANGE: (f64, f64) = (0.0, 150.0);
const TOP_OF_DESCENT_RANGE: (f64, f64) = (-100.0, 100.0);
const LEVEL_DIFF_RANGE: (f64, f64) = (-200.0, 200.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionSpace {
    /// No action, then left/right 10 degrees for each of two aircraft.
    LateralSmall,
    /// No action, then left 10..90 and right 10..90 degrees for each of two aircraft.
    LateralLarge,
    /// No action, descend 10 FL, climb 10 FL.
    Vertical,
}

impl ActionSpace {
    pub fn size(self) -> usize {
        match self {
            ActionSpace::LateralSmall => 5,
            ActionSpace::LateralLarge => 37,
            ActionSpace::Vertical => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ActionSpace::LateralSmall => "lateral_small",
            ActionSpace::LateralLarge => "lateral_large",
            ActionSpace::Vertical => "vertical",
        }
    }

    pub fn supports(self, kind: ScenarioKind) -> bool {
        match self {
            ActionSpace::Vertical => kind == ScenarioKind::Vertical,
            _ => kind.is_lateral(),
        }
    }

    /// The natural action space for a scenario kind.
    pub fn default_for(kind: ScenarioKind) -> ActionSpace {
        if kind.is_lateral() {
            ActionSpace::LateralSmall
        } else {
            ActionSpace::Vertical
        }
    }
}

impl std::str::FromStr for ActionSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lateral_small" => Ok(ActionSpace::LateralSmall),
            "lateral_large" => Ok(ActionSpace::LateralLarge),
            "vertical" => Ok(ActionSpace::Vertical),
            other => Err(Error::Config(format!("unknown action space {other:?}"))),
        }
    }
}

impl std::fmt::Display for ActionSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A primitive bound to an aircraft slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodedAction {
    pub aircraft: usize,
    pub kind: CommandKind,
}

/// Maps an action index to its primitive. The enumeration order is part of
/// the checkpoint format:
///
/// * `lateral_small`: 1 → ac1 −10°, 2 → ac1 +10°, 3 → ac2 −10°, 4 → ac2 +10°
/// * `lateral_large`: 1..=9 → ac1 −10°..−90°, 10..=18 → ac1 +10°..+90°, then
///   19..=36 repeat the pattern for ac2
/// * `vertical`: 1 → −10 FL, 2 → +10 FL
pub fn decode_action(index: usize, space: ActionSpace) -> Result<Option<DecodedAction>> {
    if index >= space.size() {
        return Err(Error::ActionOutOfRange {
            index,
            space: space.name(),
            size: space.size(),
        });
    }
    if index == 0 {
        return Ok(None);
    }
    let i = index - 1;
    let decoded = match space {
        ActionSpace::LateralSmall => DecodedAction {
            aircraft: i / 2,
            kind: CommandKind::HeadingDelta(if i % 2 == 0 { -10 } else { 10 }),
        },
        ActionSpace::LateralLarge => {
            let within = i % 18;
            let magnitude = 10 * (within % 9 + 1) as i32;
            DecodedAction {
                aircraft: i / 18,
                kind: CommandKind::HeadingDelta(if within < 9 { -magnitude } else { magnitude }),
            }
        }
        ActionSpace::Vertical => DecodedAction {
            aircraft: 0,
            kind: CommandKind::LevelDelta(if i == 0 { -10 } else { 10 }),
        },
    };
    Ok(Some(decoded))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObservationConfig {
    /// Clip for time since last action in lateral scenarios, seconds.
    pub lateral_dt_max_s: f64,
    /// Clip for time since last action in vertical scenarios, seconds.
    pub vertical_dt_max_s: f64,
}

impl Default for ObservationConfig {
    fn default() -> Self {
        Self {
            lateral_dt_max_s: 60.0,
            vertical_dt_max_s: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub rewards: RewardConfig,
    pub weights: RewardWeights,
    #[serde(default)]
    pub observation: ObservationConfig,
    #[serde(default)]
    pub projection: ProjectionHeading,
}

impl EnvConfig {
    pub fn new(weights: RewardWeights) -> Self {
        Self {
            rewards: RewardConfig::default(),
            weights,
            observation: ObservationConfig::default(),
            projection: ProjectionHeading::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Observation(pub Vec<f64>);

impl std::ops::Deref for Observation {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Observation length for a scenario kind.
pub fn observation_len(kind: ScenarioKind) -> usize {
    match kind {
        ScenarioKind::LateralNav => 8,
        ScenarioKind::LateralAvoidance => 10,
        ScenarioKind::Vertical => 4,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvAircraft {
    pub state: AircraftState,
    pub entry_fl: i32,
    pub exit_fix: String,
    pub exit_fl: i32,
    /// Set when a clearance was issued during the current (not yet advanced) step.
    pub commanded: bool,
}

impl EnvAircraft {
    fn exited_correctly(&self, exit_radius: f64) -> bool {
        self.state.exited
            && self.state.selected_fl == self.exit_fl
            && self.state.exit_miss_nm.is_some_and(|d| d <= exit_radius)
    }
}

/// Everything needed to resume an episode; serializable for replay checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeState {
    pub kind: ScenarioKind,
    pub seed: u64,
    pub max_steps: usize,
    pub step: usize,
    pub aircraft: Vec<EnvAircraft>,
    pub excursion: bool,
    pub min_separation_nm: Option<f64>,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub components: RewardComponents,
    pub separation: Option<SeparationReport>,
    pub action_counts: Vec<u32>,
    pub exited: Vec<bool>,
    pub command: Option<Command>,
    /// The action targeted an aircraft that had already left and was ignored.
    pub ignored_action: bool,
    pub terminal: Option<TerminalSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Debug, Clone)]
pub struct AtcEnv {
    sector: Arc<Sector>,
    space: ActionSpace,
    config: EnvConfig,
    episode: Option<EpisodeState>,
}

fn normalize(value: f64, (lo, hi): (f64, f64)) -> f64 {
    (value.clamp(lo, hi) - lo) / (hi - lo)
}

fn turn_to(ac: &AircraftState, index: usize) -> f64 {
    let target = ac.route.fixes[index.min(ac.route.last_index())].position;
    bearing_to(ac.position, target)
        .map(|b| relative_turn(ac.cleared_heading, b))
        .unwrap_or(0.0)
}

impl AtcEnv {
    pub fn new(sector: Arc<Sector>, space: ActionSpace, config: EnvConfig) -> Result<Self> {
        config.rewards.validate()?;
        config.weights.validate()?;
        Ok(Self {
            sector,
            space,
            config,
            episode: None,
        })
    }

    pub fn sector(&self) -> &Arc<Sector> {
        &self.sector
    }

    pub fn action_space(&self) -> ActionSpace {
        self.space
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    /// Swaps the reward weighting, e.g. between curriculum phases.
    pub fn set_weights(&mut self, weights: RewardWeights) -> Result<()> {
        weights.validate()?;
        self.config.weights = weights;
        Ok(())
    }

    pub fn episode(&self) -> Option<&EpisodeState> {
        self.episode.as_ref()
    }

    pub fn is_done(&self) -> bool {
        self.episode.as_ref().is_none_or(|e| e.done)
    }

    /// Starts an episode. Every aircraft begins with a fully decayed action
    /// clock so no damping penalty applies before the first action.
    pub fn reset(&mut self, scenario: &Scenario) -> Result<Observation> {
        scenario.validate()?;
        if !self.space.supports(scenario.kind) {
            return Err(Error::KindMismatch {
                scenario: scenario.kind.name(),
                space: self.space.name(),
            });
        }
        let aircraft: Vec<EnvAircraft> = scenario
            .aircraft
            .iter()
            .map(|a| {
                let mut state = a.state.clone();
                state.steps_since_last_action = self.config.rewards.n_max;
                state.action_count = 0;
                EnvAircraft {
                    entry_fl: state.selected_fl,
                    state,
                    exit_fix: a.exit_fix.clone(),
                    exit_fl: a.exit_fl,
                    commanded: false,
                }
            })
            .collect();
        let min_separation_nm = match aircraft.as_slice() {
            [a, b] => Some(a.state.position.distance(b.state.position)),
            _ => None,
        };
        self.episode = Some(EpisodeState {
            kind: scenario.kind,
            seed: scenario.seed,
            max_steps: scenario.max_steps,
            step: 0,
            aircraft,
            excursion: false,
            min_separation_nm,
            done: false,
        });
        Ok(self.observation())
    }

    /// Resumes from a previously captured episode state.
    pub fn restore(&mut self, state: EpisodeState) -> Result<()> {
        if !self.space.supports(state.kind) {
            return Err(Error::KindMismatch {
                scenario: state.kind.name(),
                space: self.space.name(),
            });
        }
        self.episode = Some(state);
        Ok(())
    }

    fn episode_ref(&self) -> &EpisodeState {
        self.episode.as_ref().expect("environment has not been reset")
    }

    /// Builds the normalized observation for the current state.
    pub fn observation(&self) -> Observation {
        let ep = self.episode_ref();
        let obs_cfg = &self.config.observation;
        let mut out = Vec::with_capacity(observation_len(ep.kind));
        match ep.kind {
            ScenarioKind::LateralNav | ScenarioKind::LateralAvoidance => {
                let dt_range = (0.0, obs_cfg.lateral_dt_max_s);
                for ac in &ep.aircraft {
                    let s = &ac.state;
                    out.push(normalize(turn_to(s, s.next_fix_index), ANGLE_RANGE));
                    out.push(normalize(turn_to(s, s.next_fix_index + 1), ANGLE_RANGE));
                    let d_c = cross_track_distance(s.position, &s.route, s.active_leg());
                    out.push(normalize(d_c, CROSS_TRACK_RANGE));
                    let dt = STEP_SECONDS * f64::from(s.steps_since_last_action);
                    out.push(normalize(dt, dt_range));
                }
                if ep.kind == ScenarioKind::LateralAvoidance {
                    let (a, b) = (&ep.aircraft[0].state, &ep.aircraft[1].state);
                    let theta = relative_bearing(a, b).unwrap_or(0.0);
                    out.push(normalize(theta, ANGLE_RANGE));
                    out.push(normalize(a.position.distance(b.position), PAIR_DISTANCE_RANGE));
                }
            }
            ScenarioKind::Vertical => {
                let ac = &ep.aircraft[0];
                let s = &ac.state;
                out.push(normalize(top_of_descent_margin(ac), TOP_OF_DESCENT_RANGE));
                out.push(normalize(f64::from(s.selected_fl - ac.exit_fl), LEVEL_DIFF_RANGE));
                out.push(normalize(f64::from(ac.entry_fl - ac.exit_fl), LEVEL_DIFF_RANGE));
                let dt = STEP_SECONDS * f64::from(s.steps_since_last_action);
                out.push(normalize(dt, (0.0, obs_cfg.vertical_dt_max_s)));
            }
        }
        Observation(out)
    }

    /// Decodes `action`, applies it, advances every aircraft one step and
    /// scores the result.
    pub fn step(&mut self, action: usize) -> Result<StepResult> {
        let decoded = decode_action(action, self.space)?;
        let bounds = self.sector.vertical_bounds;
        let ep = self.episode.as_mut().ok_or(Error::EpisodeDone)?;
        if ep.done {
            return Err(Error::EpisodeDone);
        }
        let mut ignored_action = false;
        let mut command = None;
        if let Some(d) = decoded {
            let ac = &mut ep.aircraft[d.aircraft];
            if ac.state.exited {
                ignored_action = true;
            } else {
                ac.state.apply_command(d.kind, bounds)?;
                ac.commanded = true;
                command = Some(Command {
                    target: ac.state.callsign.clone(),
                    kind: d.kind,
                });
            }
        }
        Ok(self.advance(command, ignored_action))
    }

    /// Changes an aircraft's cleared heading or selected level without
    /// advancing time. The aircraft's action clock reads zero afterwards;
    /// its instruction count is left alone (see [`AtcEnv::record_instruction`]).
    /// Returns `false` when the target has already exited.
    pub fn apply_frozen(&mut self, action: DecodedAction) -> Result<bool> {
        let bounds = self.sector.vertical_bounds;
        let ep = self.episode.as_mut().ok_or(Error::EpisodeDone)?;
        if ep.done {
            return Err(Error::EpisodeDone);
        }
        action.kind.validate()?;
        let ac = ep
            .aircraft
            .get_mut(action.aircraft)
            .ok_or_else(|| Error::InvalidCommand(format!("no aircraft slot {}", action.aircraft)))?;
        if ac.state.exited {
            return Ok(false);
        }
        ac.state.apply_clearance(action.kind, bounds);
        ac.state.steps_since_last_action = 0;
        ac.commanded = true;
        Ok(true)
    }

    /// Counts one issued instruction against `aircraft`.
    pub fn record_instruction(&mut self, aircraft: usize) {
        if let Some(ep) = self.episode.as_mut() {
            ep.aircraft[aircraft].state.action_count += 1;
        }
    }

    fn advance(&mut self, command: Option<Command>, ignored_action: bool) -> StepResult {
        let sector = Arc::clone(&self.sector);
        let cfg = self.config;
        let ep = self.episode.as_mut().expect("episode present");

        for ac in ep.aircraft.iter_mut() {
            let commanded = std::mem::take(&mut ac.commanded);
            if ac.state.exited {
                continue;
            }
            if ep.kind == ScenarioKind::Vertical {
                ac.state.own_navigation();
            }
            ac.state.step(STEP_SECONDS);
            if !commanded {
                ac.state.steps_since_last_action = ac.state.steps_since_last_action.saturating_add(1);
            }
            let s = &ac.state;
            let off_airway =
                unclipped_cross_track(s.position, &s.route, s.active_leg()).abs() > sector.airway_half_width_nm;
            let off_level = !sector.vertical_bounds.contains_feet(s.altitude_ft);
            let outside = !sector.contains(s.position);
            if off_airway || off_level || outside {
                ep.excursion = true;
            }
            if outside && !ac.state.exited {
                ac.state.exited = true;
            }
        }
        ep.step += 1;

        let active: Vec<&EnvAircraft> = ep.aircraft.iter().filter(|a| !a.state.exited).collect();
        let mut components = RewardComponents::default();
        if !active.is_empty() {
            let n = active.len() as f64;
            for ac in &active {
                let s = &ac.state;
                let d_c = cross_track_distance(s.position, &s.route, s.active_leg());
                components.centreline += centreline_reward(d_c, cfg.rewards.lambda_c) / n;
                components.damping += damping_reward(s.steps_since_last_action, cfg.rewards.n_max) / n;
                components.vertical += vertical_reward(s.selected_fl, ac.exit_fl, cfg.rewards.lambda_v) / n;
            }
        }
        let mut separation = None;
        if let [a, b] = ep.aircraft.as_slice() {
            if !a.state.exited && !b.state.exited {
                let report = project_min_separation(&a.state, &b.state, cfg.rewards.d_max, cfg.projection);
                components.safety = safety_reward(&report, &cfg.rewards);
                ep.min_separation_nm = Some(
                    ep.min_separation_nm
                        .map_or(report.current_nm, |m| m.min(report.current_nm)),
                );
                separation = Some(report);
            }
        }

        let all_exited = ep.aircraft.iter().all(|a| a.state.exited);
        ep.done = all_exited || ep.step >= ep.max_steps;
        let terminal = ep.done.then(|| TerminalSummary {
            exited_correctly: ep
                .aircraft
                .iter()
                .all(|a| a.exited_correctly(cfg.rewards.exit_radius)),
            within_bounds: !ep.excursion,
            within_action_budget: ep
                .aircraft
                .iter()
                .all(|a| a.state.action_count < cfg.rewards.action_budget),
        });
        if let Some(t) = &terminal {
            components.terminal = terminal_rewards(t, cfg.weights.action_criterion);
        }
        let reward = total_step_reward(&components, &cfg.weights);
        let info = StepInfo {
            components,
            separation,
            action_counts: ep.aircraft.iter().map(|a| a.state.action_count).collect(),
            exited: ep.aircraft.iter().map(|a| a.state.exited).collect(),
            command,
            ignored_action,
            terminal,
        };
        let done = ep.done;
        StepResult {
            observation: self.observation(),
            reward,
            done,
            info,
        }
    }
}

/// Along-route distance to the exit minus the distance flown while changing
/// from the current level to the exit level at the aircraft's vertical rate.
/// Zero marks the top of descent (or bottom of climb).
pub fn top_of_descent_margin(ac: &EnvAircraft) -> f64 {
    let s = &ac.state;
    let remaining = s.route.remaining_distance(s.position, s.next_fix_index);
    let level_gap_ft = (s.altitude_ft - f64::from(ac.exit_fl) * 100.0).abs();
    let minutes = level_gap_ft / s.performance.vertical_rate_fpm;
    remaining - s.performance.ground_speed_kts * minutes / 60.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Performance;
    use crate::rewards::RewardPreset;
    use crate::scenario::generate;

    fn env(kind: ScenarioKind, preset: RewardPreset) -> (AtcEnv, Scenario) {
        let sector = Arc::new(Sector::default_sector());
        let sc = generate(&sector, 3, kind, Performance::default()).unwrap();
        let e = AtcEnv::new(sector, ActionSpace::default_for(kind), EnvConfig::new(preset.weights())).unwrap();
        (e, sc)
    }

    #[test]
    fn decode_small_space() {
        let s = ActionSpace::LateralSmall;
        assert_eq!(decode_action(0, s).unwrap(), None);
        let want = [(0, -10), (0, 10), (1, -10), (1, 10)];
        for (i, (ac, d)) in want.into_iter().enumerate() {
            assert_eq!(
                decode_action(i + 1, s).unwrap(),
                Some(DecodedAction {
                    aircraft: ac,
                    kind: CommandKind::HeadingDelta(d)
                })
            );
        }
        assert!(matches!(decode_action(5, s), Err(Error::ActionOutOfRange { .. })));
    }

    #[test]
    fn decode_large_space() {
        let s = ActionSpace::LateralLarge;
        assert_eq!(s.size(), 37);
        let d = |i| decode_action(i, s).unwrap().unwrap();
        assert_eq!(d(1), DecodedAction { aircraft: 0, kind: CommandKind::HeadingDelta(-10) });
        assert_eq!(d(9), DecodedAction { aircraft: 0, kind: CommandKind::HeadingDelta(-90) });
        assert_eq!(d(10), DecodedAction { aircraft: 0, kind: CommandKind::HeadingDelta(10) });
        assert_eq!(d(18), DecodedAction { aircraft: 0, kind: CommandKind::HeadingDelta(90) });
        assert_eq!(d(19), DecodedAction { aircraft: 1, kind: CommandKind::HeadingDelta(-10) });
        assert_eq!(d(36), DecodedAction { aircraft: 1, kind: CommandKind::HeadingDelta(90) });
        assert!(decode_action(37, s).is_err());
    }

    #[test]
    fn decode_vertical_space() {
        let s = ActionSpace::Vertical;
        assert_eq!(decode_action(1, s).unwrap().unwrap().kind, CommandKind::LevelDelta(-10));
        assert_eq!(decode_action(2, s).unwrap().unwrap().kind, CommandKind::LevelDelta(10));
    }

    #[test]
    fn reset_layouts() {
        for (kind, len) in [
            (ScenarioKind::LateralNav, 8),
            (ScenarioKind::LateralAvoidance, 10),
            (ScenarioKind::Vertical, 4),
        ] {
            let (mut e, sc) = env(kind, RewardPreset::LateralNavigation);
            let o = e.reset(&sc).unwrap();
            assert_eq!(o.len(), len);
            assert!(o.iter().all(|v| (0.0..=1.0).contains(v)));
            assert_eq!(e.reset(&sc).unwrap(), o);
        }
    }

    #[test]
    fn kind_mismatch_rejected() {
        let sector = Arc::new(Sector::default_sector());
        let sc = generate(&sector, 1, ScenarioKind::Vertical, Performance::default()).unwrap();
        let mut e = AtcEnv::new(sector, ActionSpace::LateralSmall, EnvConfig::new(RewardWeights::zero())).unwrap();
        assert!(matches!(e.reset(&sc), Err(Error::KindMismatch { .. })));
    }

    #[test]
    fn on_centreline_toward_fix_is_midpoint() {
        let (mut e, mut sc) = env(ScenarioKind::LateralNav, RewardPreset::LateralNavigation);
        let st = &mut sc.aircraft[0].state;
        st.position = st.route.entry().position;
        st.heading = st.route.leg_bearing(0);
        st.cleared_heading = st.heading;
        let o = e.reset(&sc).unwrap();
        assert!((o[0] - 0.5).abs() < 1e-6, "{}", o[0]);
        assert!((o[2] - 0.5).abs() < 1e-6, "{}", o[2]);
        // n_max steps of 6 s saturate the 60 s clip
        assert_eq!(o[3], 1.0);
    }

    #[test]
    fn top_of_descent_zero_is_half() {
        let (mut e, mut sc) = env(ScenarioKind::Vertical, RewardPreset::VerticalNavigation);
        let ac = &mut sc.aircraft[0];
        ac.state.altitude_ft = 30_000.0;
        ac.state.selected_fl = 300;
        ac.exit_fl = 100;
        // remaining distance = 20000 ft / 2000 fpm = 10 min at 450 kts = 75 nm
        let route = ac.state.route.clone();
        let total = route.remaining_distance(route.entry().position, 1);
        let back = total - 75.0;
        // walk `back` nm down the route from the entry fix
        let mut pos = route.entry().position;
        let mut next = 1;
        let mut left = back;
        while left > 0.0 {
            let target = route.fixes[next].position;
            let d = pos.distance(target);
            if d <= left {
                left -= d;
                pos = target;
                next += 1;
            } else {
                let b = bearing_to(pos, target).unwrap();
                pos = pos.offset(b, left);
                left = 0.0;
            }
        }
        ac.state.position = pos;
        ac.state.next_fix_index = next;
        let o = e.reset(&sc).unwrap();
        assert!((o[0] - 0.5).abs() < 1e-9, "{}", o[0]);
    }

    #[test]
    fn idle_episode_never_changes_clearances() {
        let (mut e, sc) = env(ScenarioKind::LateralNav, RewardPreset::LateralNavigation);
        e.reset(&sc).unwrap();
        let cleared: Vec<f64> = sc.aircraft.iter().map(|a| a.state.cleared_heading).collect();
        loop {
            let r = e.step(0).unwrap();
            assert_eq!(r.info.components.damping, 0.0);
            let now: Vec<f64> = e.episode().unwrap().aircraft.iter().map(|a| a.state.cleared_heading).collect();
            assert_eq!(now, cleared);
            if r.done {
                break;
            }
        }
        assert!(matches!(e.step(0), Err(Error::EpisodeDone)));
    }

    #[test]
    fn action_resets_only_target_clock() {
        let (mut e, sc) = env(ScenarioKind::LateralNav, RewardPreset::LateralNavigation);
        e.reset(&sc).unwrap();
        e.step(0).unwrap();
        let r = e.step(2).unwrap();
        let ep = e.episode().unwrap();
        assert_eq!(ep.aircraft[0].state.steps_since_last_action, 0);
        assert_eq!(ep.aircraft[1].state.steps_since_last_action, 12);
        assert_eq!(r.info.action_counts, vec![1, 0]);
        // averaged over both aircraft: (-1 + 0) / 2
        assert_eq!(r.info.components.damping, -0.5);
    }

    #[test]
    fn zero_weights_give_zero_reward_until_terminal() {
        let sector = Arc::new(Sector::default_sector());
        let sc = generate(&sector, 5, ScenarioKind::LateralAvoidance, Performance::default()).unwrap();
        let mut w = RewardWeights::zero();
        w.terminal = 1.0;
        let mut e = AtcEnv::new(sector, ActionSpace::LateralSmall, EnvConfig::new(w)).unwrap();
        e.reset(&sc).unwrap();
        let mut step = 0;
        loop {
            let r = e.step(step % 5).unwrap();
            step += 1;
            if r.done {
                assert_eq!(r.reward, r.info.components.terminal);
                break;
            }
            assert_eq!(r.reward, 0.0);
        }
    }
}
