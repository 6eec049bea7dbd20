//! Online action stacking.
//!
//! At each decision point the simulation clock is frozen and the policy is
//! queried repeatedly. Every primitive it emits is applied to the target's
//! cleared heading or selected level only, the observation is rebuilt, and
//! the policy is asked again. Consecutive same-direction primitives for one
//! aircraft compile into a single [`MacroCommand`], which counts as one
//! issued instruction. The decision point ends on "no action", on a
//! primitive for an aircraft that has already left, or at a cap.
//!
//! The underlying MDP is untouched: stacking only changes how many policy
//! queries happen between two physics steps.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::CommandKind;
use crate::env::{decode_action, AtcEnv, Observation};
use crate::error::{Error, Result};
use crate::ppo::{greedy_action, sample_categorical, PolicyNetwork};
use crate::rewards::{RewardComponents, TerminalSummary};
use crate::scenario::{Scenario, ScenarioKind};

pub const MAX_PRIMITIVES_PER_MACRO: u32 = 18;
pub const MAX_QUERIES_PER_DECISION: usize = 40;
/// Size of one heading or level increment.
pub const INCREMENT: i32 = 10;

/// Chooses an action index from an observation.
pub trait ActionSelector {
    fn select(&mut self, observation: &[f64]) -> usize;
}

/// Argmax of the policy's action probabilities.
#[derive(Debug, Clone, Copy)]
pub struct Greedy<'a>(pub &'a PolicyNetwork);

impl ActionSelector for Greedy<'_> {
    fn select(&mut self, observation: &[f64]) -> usize {
        greedy_action(self.0, observation)
    }
}

/// Draws from the policy's action distribution.
#[derive(Debug)]
pub struct Sampled<'a, R> {
    pub policy: &'a PolicyNetwork,
    pub rng: R,
}

impl<R: Rng> ActionSelector for Sampled<'_, R> {
    fn select(&mut self, observation: &[f64]) -> usize {
        let p = self.policy.action_probabilities(observation);
        sample_categorical(&p, &mut self.rng)
    }
}

/// Replays a fixed list of action indices, then emits 0 forever.
#[derive(Debug, Clone, Default)]
pub struct Scripted {
    actions: Vec<usize>,
    next: usize,
}

impl Scripted {
    pub fn new(actions: impl Into<Vec<usize>>) -> Self {
        Self {
            actions: actions.into(),
            next: 0,
        }
    }

    pub fn queries(&self) -> usize {
        self.next
    }
}

impl ActionSelector for Scripted {
    fn select(&mut self, _: &[f64]) -> usize {
        let a = self.actions.get(self.next).copied().unwrap_or(0);
        self.next += 1;
        a
    }
}

/// Adapts a closure.
pub struct FnSelector<F>(pub F);

impl<F: FnMut(&[f64]) -> usize> ActionSelector for FnSelector<F> {
    fn select(&mut self, observation: &[f64]) -> usize {
        (self.0)(observation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MacroKind {
    Heading,
    Level,
}

/// A compound clearance. `|magnitude| == 10 * primitive_count`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacroCommand {
    pub aircraft: usize,
    pub target: String,
    pub kind: MacroKind,
    /// Degrees (positive right) or flight levels (positive up).
    pub magnitude: i32,
    pub primitive_count: u32,
}

impl MacroCommand {
    fn direction(&self) -> i32 {
        self.magnitude.signum()
    }
}

impl std::fmt::Display for MacroCommand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let m = self.magnitude.abs();
        match (self.kind, self.magnitude >= 0) {
            (MacroKind::Heading, true) => write!(f, "{} turn right {m}", self.target),
            (MacroKind::Heading, false) => write!(f, "{} turn left {m}", self.target),
            (MacroKind::Level, true) => write!(f, "{} climb {m} FL", self.target),
            (MacroKind::Level, false) => write!(f, "{} descend {m} FL", self.target),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    NoAction,
    ExitedTarget,
    MacroCap,
    QueryCap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub query: usize,
    pub observation: Observation,
    pub action: usize,
}

/// Every query made at one frozen decision point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackTrace {
    pub entries: Vec<TraceEntry>,
    pub stop: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedDecision {
    pub macros: Vec<MacroCommand>,
    pub trace: StackTrace,
}

fn split(kind: CommandKind) -> (MacroKind, i32) {
    match kind {
        CommandKind::HeadingDelta(d) => (MacroKind::Heading, d),
        CommandKind::LevelDelta(d) => (MacroKind::Level, d),
    }
}

/// Runs one frozen decision point on `env` and returns the compiled macros.
/// Positions, headings and altitudes are untouched; only cleared headings,
/// selected levels and action clocks of targeted aircraft change. Each
/// macro is counted once against its target's instruction total.
pub fn stacked_decision(selector: &mut impl ActionSelector, env: &mut AtcEnv) -> Result<StackedDecision> {
    let space = env.action_space();
    let mut macros: Vec<MacroCommand> = Vec::new();
    let mut entries = Vec::new();
    let mut open: Option<usize> = None;

    let stop = loop {
        if entries.len() == MAX_QUERIES_PER_DECISION {
            break StopReason::QueryCap;
        }
        let observation = env.observation();
        let action = selector.select(&observation);
        entries.push(TraceEntry {
            query: entries.len(),
            observation,
            action,
        });
        let Some(decoded) = decode_action(action, space)? else {
            break StopReason::NoAction;
        };
        let (kind, delta) = split(decoded.kind);
        let increments = (delta.abs() / INCREMENT) as u32;

        let extends = open.is_some_and(|i| {
            let m = &macros[i];
            m.aircraft == decoded.aircraft && m.kind == kind && m.direction() == delta.signum()
        });
        if extends {
            let m = &macros[open.expect("open macro")];
            if m.primitive_count + increments > MAX_PRIMITIVES_PER_MACRO {
                break StopReason::MacroCap;
            }
        }
        if !env.apply_frozen(decoded)? {
            break StopReason::ExitedTarget;
        }
        if extends {
            let m = &mut macros[open.expect("open macro")];
            m.magnitude += delta;
            m.primitive_count += increments;
        } else {
            let ep = env.episode().ok_or(Error::EpisodeDone)?;
            macros.push(MacroCommand {
                aircraft: decoded.aircraft,
                target: ep.aircraft[decoded.aircraft].state.callsign.clone(),
                kind,
                magnitude: delta,
                primitive_count: increments,
            });
            open = Some(macros.len() - 1);
            env.record_instruction(decoded.aircraft);
        }
        if macros[open.expect("open macro")].primitive_count >= MAX_PRIMITIVES_PER_MACRO {
            break StopReason::MacroCap;
        }
    };
    Ok(StackedDecision {
        macros,
        trace: StackTrace { entries, stop },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Unstacked,
    Stacked,
}

impl EvalMode {
    pub fn name(self) -> &'static str {
        match self {
            EvalMode::Unstacked => "unstacked",
            EvalMode::Stacked => "stacked",
        }
    }
}

impl std::str::FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unstacked" => Ok(EvalMode::Unstacked),
            "stacked" => Ok(EvalMode::Stacked),
            other => Err(Error::Config(format!("unknown mode {other:?} (unstacked, stacked)"))),
        }
    }
}

/// Kinematic snapshot of one aircraft after a step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AircraftSnapshot {
    pub east: f64,
    pub north: f64,
    pub heading: f64,
    pub cleared_heading: f64,
    pub altitude_ft: f64,
    pub selected_fl: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub aircraft: Vec<AircraftSnapshot>,
    /// Primitive chosen in unstacked mode; `None` in stacked mode.
    pub action: Option<usize>,
    /// Human-readable clearances issued before this step, `;`-separated.
    pub command: String,
    pub components: RewardComponents,
    pub reward: f64,
    pub separation_nm: Option<f64>,
    pub projected_min_nm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroRecord {
    pub step: usize,
    #[serde(flatten)]
    pub command: MacroCommand,
}

/// Full record of one evaluation episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub scenario_seed: u64,
    pub kind: ScenarioKind,
    pub mode: EvalMode,
    pub callsigns: Vec<String>,
    /// Initial positions, so a rendering can draw the whole track.
    pub start: Vec<AircraftSnapshot>,
    pub steps: Vec<StepRecord>,
    pub macros: Vec<MacroRecord>,
    /// Non-φ primitives (unstacked) or macros (stacked).
    pub instructions: u32,
    /// Individual primitives emitted, equal to `instructions` when unstacked.
    pub primitives: u32,
    pub total_reward: f64,
    pub terminal: TerminalSummary,
    /// Every criterion scored by the active weights holds.
    pub success: bool,
    pub min_separation_nm: Option<f64>,
    /// Every aircraft's selected level equals its exit level at the end.
    pub final_level_correct: bool,
}

impl EpisodeRecord {
    pub fn loss_of_separation(&self) -> bool {
        self.min_separation_nm
            .is_some_and(|d| d < crate::safety::SEPARATION_MINIMUM_NM)
    }
}

fn snapshots(env: &AtcEnv) -> Vec<AircraftSnapshot> {
    env.episode()
        .map(|ep| {
            ep.aircraft
                .iter()
                .map(|a| AircraftSnapshot {
                    east: a.state.position.east,
                    north: a.state.position.north,
                    heading: a.state.heading,
                    cleared_heading: a.state.cleared_heading,
                    altitude_ft: a.state.altitude_ft,
                    selected_fl: a.state.selected_fl,
                })
                .collect()
        })
        .unwrap_or_default()
}

fn run_episode(
    selector: &mut impl ActionSelector,
    env: &mut AtcEnv,
    scenario: &Scenario,
    mode: EvalMode,
) -> Result<EpisodeRecord> {
    let mut observation = env.reset(scenario)?;
    let start = snapshots(env);
    let callsigns = scenario.aircraft.iter().map(|a| a.state.callsign.clone()).collect();
    let mut steps = Vec::new();
    let mut macros = Vec::new();
    let mut instructions = 0;
    let mut primitives = 0;
    let mut total_reward = 0.0;

    loop {
        let step = steps.len();
        let (action, command, result) = match mode {
            EvalMode::Unstacked => {
                let a = selector.select(&observation);
                if a != 0 {
                    instructions += 1;
                    primitives += 1;
                }
                let r = env.step(a)?;
                let text = r.info.command.as_ref().map(ToString::to_string).unwrap_or_default();
                (Some(a), text, r)
            }
            EvalMode::Stacked => {
                let d = stacked_decision(selector, env)?;
                instructions += d.macros.len() as u32;
                primitives += d.macros.iter().map(|m| m.primitive_count).sum::<u32>();
                let text = d.macros.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
                macros.extend(d.macros.into_iter().map(|command| MacroRecord { step, command }));
                (None, text, env.step(0)?)
            }
        };
        total_reward += result.reward;
        steps.push(StepRecord {
            step,
            aircraft: snapshots(env),
            action,
            command,
            components: result.info.components,
            reward: result.reward,
            separation_nm: result.info.separation.map(|s| s.current_nm),
            projected_min_nm: result.info.separation.map(|s| s.projected_min_nm),
        });
        if result.done {
            let ep = env.episode().ok_or(Error::EpisodeDone)?;
            return Ok(EpisodeRecord {
                scenario_seed: scenario.seed,
                kind: scenario.kind,
                mode,
                callsigns,
                start,
                steps,
                macros,
                instructions,
                primitives,
                total_reward,
                terminal: result.info.terminal.unwrap_or_default(),
                success: result
                    .info
                    .terminal
                    .is_some_and(|t| t.succeeded(env.config().weights.action_criterion)),
                min_separation_nm: ep.min_separation_nm,
                final_level_correct: ep.aircraft.iter().all(|a| a.state.selected_fl == a.exit_fl),
            });
        }
        observation = result.observation;
    }
}

/// One selected primitive per physics step.
pub fn run_unstacked_episode(
    selector: &mut impl ActionSelector,
    env: &mut AtcEnv,
    scenario: &Scenario,
) -> Result<EpisodeRecord> {
    run_episode(selector, env, scenario, EvalMode::Unstacked)
}

/// A stacked decision point before every physics step.
pub fn run_stacked_episode(
    selector: &mut impl ActionSelector,
    env: &mut AtcEnv,
    scenario: &Scenario,
) -> Result<EpisodeRecord> {
    run_episode(selector, env, scenario, EvalMode::Stacked)
}

pub fn run_mode(
    selector: &mut impl ActionSelector,
    env: &mut AtcEnv,
    scenario: &Scenario,
    mode: EvalMode,
) -> Result<EpisodeRecord> {
    run_episode(selector, env, scenario, mode)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::airspace::Sector;
    use crate::dynamics::Performance;
    use crate::env::{ActionSpace, EnvConfig};
    use crate::rewards::RewardPreset;
    use crate::scenario::generate;

    fn env_for(kind: ScenarioKind, space: ActionSpace, seed: u64) -> (AtcEnv, Scenario) {
        let sector = Arc::new(Sector::default_sector());
        let sc = generate(&sector, seed, kind, Performance::default()).unwrap();
        let env = AtcEnv::new(sector, space, EnvConfig::new(RewardPreset::LateralNavigation.weights())).unwrap();
        (env, sc)
    }

    #[test]
    fn phi_gives_no_macros() {
        let (mut env, sc) = env_for(ScenarioKind::LateralNav, ActionSpace::LateralSmall, 1);
        env.reset(&sc).unwrap();
        let d = stacked_decision(&mut Scripted::new([0]), &mut env).unwrap();
        assert!(d.macros.is_empty());
        assert_eq!(d.trace.stop, StopReason::NoAction);
        assert_eq!(d.trace.entries.len(), 1);
    }

    #[test]
    fn three_rights_compile_to_thirty() {
        let (mut env, sc) = env_for(ScenarioKind::LateralNav, ActionSpace::LateralSmall, 2);
        env.reset(&sc).unwrap();
        let before = env.episode().unwrap().aircraft[0].state.cleared_heading;
        let d = stacked_decision(&mut Scripted::new([2, 2, 2, 0]), &mut env).unwrap();
        assert_eq!(d.macros.len(), 1);
        assert_eq!(d.macros[0].magnitude, 30);
        assert_eq!(d.macros[0].primitive_count, 3);
        assert_eq!(d.macros[0].kind, MacroKind::Heading);
        let after = &env.episode().unwrap().aircraft[0].state;
        assert_eq!(after.action_count, 1);
        assert_eq!(after.steps_since_last_action, 0);
        assert!((crate::airspace::relative_turn(before, after.cleared_heading) - 30.0).abs() < 1e-9);
    }

    #[test]
    fn flip_and_switch_chain_macros() {
        let (mut env, sc) = env_for(ScenarioKind::LateralNav, ActionSpace::LateralSmall, 3);
        env.reset(&sc).unwrap();
        let d = stacked_decision(&mut Scripted::new([2, 2, 1, 4, 4, 0]), &mut env).unwrap();
        let got: Vec<(usize, i32)> = d.macros.iter().map(|m| (m.aircraft, m.magnitude)).collect();
        assert_eq!(got, vec![(0, 20), (0, -10), (1, 20)]);
    }

    #[test]
    fn macro_cap_stops_at_180() {
        let (mut env, sc) = env_for(ScenarioKind::LateralNav, ActionSpace::LateralSmall, 4);
        env.reset(&sc).unwrap();
        let d = stacked_decision(&mut Scripted::new(vec![2; 30]), &mut env).unwrap();
        assert_eq!(d.trace.stop, StopReason::MacroCap);
        assert_eq!(d.macros.len(), 1);
        assert_eq!(d.macros[0].magnitude, 180);
    }

    #[test]
    fn large_space_counts_increments() {
        let (mut env, sc) = env_for(ScenarioKind::LateralNav, ActionSpace::LateralLarge, 5);
        env.reset(&sc).unwrap();
        // +90 then +90 fills the cap exactly; a further +10 is refused
        let d = stacked_decision(&mut Scripted::new([18, 18, 10]), &mut env).unwrap();
        assert_eq!(d.macros[0].magnitude, 180);
        assert_eq!(d.macros[0].primitive_count, 18);
        assert_eq!(d.trace.stop, StopReason::MacroCap);
        assert_eq!(d.trace.entries.len(), 2);
    }

    #[test]
    fn macro_display_reads_like_a_clearance() {
        let m = MacroCommand {
            aircraft: 0,
            target: "AC1".into(),
            kind: MacroKind::Heading,
            magnitude: 70,
            primitive_count: 7,
        };
        assert_eq!(m.to_string(), "AC1 turn right 70");
    }
}
