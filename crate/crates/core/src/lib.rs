//! En-route ATC simulation, reward shaping, PPO training and online action
//! stacking. Start from the crate examples; the CLI lives in `src/bin`.

pub mod airspace;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod env;
pub mod error;
pub mod eval;
pub mod ppo;
pub mod rewards;
pub mod safety;
pub mod scenario;
pub mod stacking;
pub mod trace;

pub use error::{Error, Result};
