//! Tabulates the shaped reward terms and the terminal bonus so their scales
//! can be compared at a glance.
//!
//! `cargo run --example reward_profiles`

use atc_stack::rewards::{centreline_reward, damping_reward, terminal_rewards, vertical_reward, RewardConfig, TerminalSummary};

fn main() {
    let cfg = RewardConfig::default();
    println!("centreline (lambda_c = {} nm)", cfg.lambda_c);
    for d in [0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 15.0] {
        println!("  d_c {d:>5.1} nm  {:>7.3}", centreline_reward(d, cfg.lambda_c));
    }
    println!("damping (n_max = {})", cfg.n_max);
    for n in 0..=cfg.n_max {
        println!("  n_s {n:>2}  {:>5.2}", damping_reward(n, cfg.n_max));
    }
    println!("vertical (lambda_v = {} FL)", cfg.lambda_v);
    for delta in [0, 10, 40, 100, 200] {
        println!("  |dFL| {delta:>3}  {:>7.3}", vertical_reward(300, 300 - delta, cfg.lambda_v));
    }
    println!("terminal bonus (exit, bounds, budget)");
    for bits in 0..8u8 {
        let t = TerminalSummary {
            exited_correctly: bits & 1 != 0,
            within_bounds: bits & 2 != 0,
            within_action_budget: bits & 4 != 0,
        };
        println!(
            "  {:<5} {:<5} {:<5}  {:>4}  (without budget criterion {:>4})",
            t.exited_correctly,
            t.within_bounds,
            t.within_action_budget,
            terminal_rewards(&t, true),
            terminal_rewards(&t, false)
        );
    }
}
