//! Coarse grid search for the classical autopilot gains on the default glider.
//!
//! Usage: `cargo run --release --example gain_search -- [episodes] [base_seed]`
//!
//! Every combination flies the same seeded calm-air episodes; candidates are
//! ranked by failures first and mean miss second. The best few are printed.

use std::sync::Arc;

use glider_core::baseline::{ClassicController, ClassicGains, PidConfig};
use glider_core::eval::{run_campaign, Execution};
use glider_core::ScenarioConfig;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let episodes: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(40);
    let base_seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let scenario = Arc::new(ScenarioConfig::default());

    let long_kp = [2.0, 4.0, 8.0, 12.0];
    let long_ki = [0.5, 1.0, 2.0];
    let head_kp = [2.0, 4.0, 8.0, 12.0];
    let head_ki = [0.0, 0.5];
    let roll_kp = [1.0, 2.0];
    let q_damp = [0.0, 0.5];

    let mut results = Vec::new();
    for &lkp in &long_kp {
        for &lki in &long_ki {
            for &hkp in &head_kp {
                for &hki in &head_ki {
                    for &rkp in &roll_kp {
                        for &qd in &q_damp {
                            let gains = ClassicGains {
                                longitudinal: PidConfig { kp: lkp, ki: lki, kd: 0.0, output_limit: 1.0, integrator_limit: 0.5 },
                                heading: PidConfig {
                                    kp: hkp,
                                    ki: hki,
                                    kd: 0.0,
                                    output_limit: 45f64.to_radians(),
                                    integrator_limit: 0.5,
                                },
                                roll: PidConfig::proportional(rkp, 1.0),
                                pitch_rate_damping: qd,
                                elevator_bias: 0.0,
                            };
                            let c = run_campaign(
                                || ClassicController::new(gains),
                                &scenario,
                                episodes,
                                base_seed,
                                Execution::Parallel { workers: 0 },
                            );
                            let (fails, mmd) = match c {
                                Ok(c) => (c.stats.n - c.stats.impacts, c.stats.mmd),
                                Err(_) => (episodes, f64::INFINITY),
                            };
                            results.push((fails, mmd, gains));
                        }
                    }
                }
            }
        }
    }
    results.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    for (fails, mmd, g) in results.iter().take(15) {
        println!(
            "fails={fails} mmd={mmd:.3} long=({}, {}) head=({}, {}) roll={} q={}",
            g.longitudinal.kp, g.longitudinal.ki, g.heading.kp, g.heading.ki, g.roll.kp, g.pitch_rate_damping
        );
    }
}
