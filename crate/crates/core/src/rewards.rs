//! Shaped step rewards, the terminal bonus set and their weighted sum.
//!
//! Every step component is non-positive and bounded below by -1, so the total
//! step reward lies in `[-(sum of active weights), 0]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::safety::SeparationReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardConfig {
    /// Centreline scale in nm.
    pub lambda_c: f64,
    /// Steps after an action before the damping penalty reaches zero.
    pub n_max: u32,
    /// Distance below which the safety penalty applies, and the projection path length.
    pub d_max: f64,
    /// Projected-separation scale in nm.
    pub lambda_s: f64,
    /// Vertical scale in flight levels.
    pub lambda_v: f64,
    /// Actions per aircraft must stay strictly below this for the action bonus.
    pub action_budget: u32,
    /// Exit counts as correct within this distance of the exit fix.
    pub exit_radius: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            lambda_c: 6.0,
            n_max: 10,
            d_max: 150.0,
            lambda_s: 5.0,
            lambda_v: 40.0,
            action_budget: 30,
            exit_radius: 5.0,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if pos(self.lambda_c)
            && self.n_max > 0
            && pos(self.d_max)
            && pos(self.lambda_s)
            && pos(self.lambda_v)
            && self.action_budget > 0
            && pos(self.exit_radius)
        {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "reward constants must be positive: {self:?}"
            )))
        }
    }
}

/// The four named weightings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardPreset {
    LateralNavigationWithoutDamping,
    LateralNavigation,
    VerticalNavigation,
    LateralNavigationAndAvoidance,
}

impl RewardPreset {
    pub const ALL: [RewardPreset; 4] = [
        RewardPreset::LateralNavigationWithoutDamping,
        RewardPreset::LateralNavigation,
        RewardPreset::VerticalNavigation,
        RewardPreset::LateralNavigationAndAvoidance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RewardPreset::LateralNavigationWithoutDamping => "lateral_navigation_without_damping",
            RewardPreset::LateralNavigation => "lateral_navigation",
            RewardPreset::VerticalNavigation => "vertical_navigation",
            RewardPreset::LateralNavigationAndAvoidance => "lateral_navigation_and_avoidance",
        }
    }

    pub fn weights(self) -> RewardWeights {
        let (centreline, damping, safety, vertical) = match self {
            RewardPreset::LateralNavigationWithoutDamping => (1.0, 0.0, 0.0, 0.0),
            RewardPreset::LateralNavigation => (1.0, 0.25, 0.0, 0.0),
            RewardPreset::VerticalNavigation => (0.0, 0.5, 0.0, 1.0),
            RewardPreset::LateralNavigationAndAvoidance => (1.0, 0.3, 2.0, 0.0),
        };
        RewardWeights {
            centreline,
            damping,
            safety,
            vertical,
            terminal: 1.0,
            action_criterion: self != RewardPreset::LateralNavigationWithoutDamping,
        }
    }
}

impl std::str::FromStr for RewardPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RewardPreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown reward preset {s:?}; expected one of {}",
                    RewardPreset::ALL.map(|p| p.name()).join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardWeights {
    pub centreline: f64,
    pub damping: f64,
    pub safety: f64,
    pub vertical: f64,
    pub terminal: f64,
    /// Whether the action-budget criterion takes part in the terminal set.
    #[serde(default = "yes")]
    pub action_criterion: bool,
}

fn yes() -> bool {
    true
}

impl RewardWeights {
    pub fn zero() -> Self {
        Self {
            centreline: 0.0,
            damping: 0.0,
            safety: 0.0,
            vertical: 0.0,
            terminal: 0.0,
            action_criterion: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |w: f64| w.is_finite() && w >= 0.0;
        if [self.centreline, self.damping, self.safety, self.vertical, self.terminal]
            .into_iter()
            .all(ok)
        {
            Ok(())
        } else {
            Err(Error::Config(format!("reward weights must be non-negative: {self:?}")))
        }
    }

    pub fn step_weight_sum(&self) -> f64 {
        self.centreline + self.damping + self.safety + self.vertical
    }
}

/// Per-step reward components plus the terminal bonus (zero except on the
/// final step).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardComponents {
    pub centreline: f64,
    pub damping: f64,
    pub safety: f64,
    pub vertical: f64,
    pub terminal: f64,
}

/// `exp(-(d_c / lambda_c)^2) - 1`
pub fn centreline_reward(d_c: f64, lambda_c: f64) -> f64 {
    (-(d_c / lambda_c).powi(2)).exp() - 1.0
}

/// `n_s / n_max - 1` until `n_max` steps have passed, then 0.
pub fn damping_reward(n_s: u32, n_max: u32) -> f64 {
    if n_s < n_max {
        f64::from(n_s) / f64::from(n_max) - 1.0
    } else {
        0.0
    }
}

/// `(d / d_max - 1) * exp(-(d_s / lambda_s)^2)` while the pair is closer than
/// `d_max`, otherwise 0.
pub fn safety_reward(report: &SeparationReport, config: &RewardConfig) -> f64 {
    let d = report.current_nm;
    if d < config.d_max {
        (d / config.d_max - 1.0) * (-(report.projected_min_nm / config.lambda_s).powi(2)).exp()
    } else {
        0.0
    }
}

/// `exp(-|selected - exit| / lambda_v) - 1`, levels in FL.
pub fn vertical_reward(selected_fl: i32, exit_fl: i32, lambda_v: f64) -> f64 {
    let delta = f64::from((selected_fl - exit_fl).abs());
    (-delta / lambda_v).exp() - 1.0
}

/// Outcome of an episode against the three terminal criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TerminalSummary {
    /// Every aircraft left via its exit fix at its exit level.
    pub exited_correctly: bool,
    /// No aircraft ever strayed outside the airway or the vertical bounds.
    pub within_bounds: bool,
    /// Every aircraft received fewer actions than the budget.
    pub within_action_budget: bool,
}

impl TerminalSummary {
    pub fn all(&self) -> bool {
        self.exited_correctly && self.within_bounds && self.within_action_budget
    }

    /// Every criterion that takes part in the terminal reward holds.
    pub fn succeeded(&self, action_criterion: bool) -> bool {
        self.exited_correctly && self.within_bounds && (self.within_action_budget || !action_criterion)
    }
}

pub const CRITERION_BONUS: f64 = 5.0;
pub const ALL_CRITERIA_BONUS: f64 = 20.0;

/// 5 per satisfied criterion, plus 20 when every considered criterion holds.
/// With `action_criterion` false the action budget is ignored entirely.
pub fn terminal_rewards(summary: &TerminalSummary, action_criterion: bool) -> f64 {
    let mut criteria = vec![summary.exited_correctly, summary.within_bounds];
    if action_criterion {
        criteria.push(summary.within_action_budget);
    }
    let met = criteria.iter().filter(|&&c| c).count() as f64;
    let bonus = if criteria.iter().all(|&c| c) {
        ALL_CRITERIA_BONUS
    } else {
        0.0
    };
    CRITERION_BONUS * met + bonus
}

/// Weighted sum of the components. Per-aircraft components are expected to
/// be averaged across aircraft already.
pub fn total_step_reward(components: &RewardComponents, weights: &RewardWeights) -> f64 {
    weights.centreline * components.centreline
        + weights.damping * components.damping
        + weights.safety * components.safety
        + weights.vertical * components.vertical
        + weights.terminal * components.terminal
}
