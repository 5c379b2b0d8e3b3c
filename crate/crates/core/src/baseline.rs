//! Classical seeker-driven autopilot.
//!
//! The camera offsets are de-rotated by the roll angle so the vertical channel
//! drives the symmetric elevon deflection through one PID, and the horizontal
//! channel feeds a heading PID whose output is a roll-angle command tracked by
//! a roll PID on the asymmetric deflection.

use std::f64::consts::PI;

use crate::env::{Action, Observation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidConfig {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub output_limit: f64,
    /// Bound on the accumulated error (error·s).
    pub integrator_limit: f64,
}

impl PidConfig {
    pub fn proportional(kp: f64, output_limit: f64) -> Self {
        Self {
            kp,
            ki: 0.0,
            kd: 0.0,
            output_limit,
            integrator_limit: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState {
    pub integrator: f64,
    pub previous_error: f64,
    pub initialized: bool,
}

/// One PID update. The derivative term is zero on the first sample.
pub fn pid_step(cfg: &PidConfig, state: &PidState, error: f64, dt: f64) -> (f64, PidState) {
    let integrator = (state.integrator + error * dt).clamp(-cfg.integrator_limit, cfg.integrator_limit);
    let derivative = if state.initialized {
        (error - state.previous_error) / dt
    } else {
        0.0
    };
    let raw = cfg.kp * error + cfg.ki * integrator + cfg.kd * derivative;
    let output = raw.clamp(-cfg.output_limit, cfg.output_limit);
    (
        output,
        PidState {
            integrator,
            previous_error: error,
            initialized: true,
        },
    )
}

/// Rotates the image offsets by the roll angle back into a wings-level frame.
pub fn derotate(u: f64, v: f64, phi: f64) -> (f64, f64) {
    let (s, c) = phi.sin_cos();
    (c * u - s * v, s * u + c * v)
}

/// Gains of the three loops plus optional pitch-rate damping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicGains {
    /// Vertical image offset → normalised symmetric deflection.
    pub longitudinal: PidConfig,
    /// Horizontal image offset → roll command (rad).
    pub heading: PidConfig,
    /// Roll error (rad) → normalised asymmetric deflection.
    pub roll: PidConfig,
    /// Added `k · q*` on the symmetric channel; zero disables it.
    pub pitch_rate_damping: f64,
    /// Constant offset on the symmetric channel.
    pub elevator_bias: f64,
}

impl Default for ClassicGains {
    fn default() -> Self {
        Self {
            longitudinal: PidConfig {
                kp: 4.0,
                ki: 0.5,
                kd: 0.0,
                output_limit: 1.0,
                integrator_limit: 0.5,
            },
            heading: PidConfig {
                kp: 8.0,
                ki: 0.0,
                kd: 0.0,
                output_limit: 45f64.to_radians(),
                integrator_limit: 0.0,
            },
            roll: PidConfig {
                kp: 1.0,
                ki: 0.0,
                kd: 0.0,
                output_limit: 1.0,
                integrator_limit: 0.0,
            },
            pitch_rate_damping: 0.0,
            elevator_bias: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicController {
    pub gains: ClassicGains,
    longitudinal: PidState,
    heading: PidState,
    roll: PidState,
}

impl ClassicController {
    pub fn new(gains: ClassicGains) -> Self {
        Self {
            gains,
            longitudinal: PidState::default(),
            heading: PidState::default(),
            roll: PidState::default(),
        }
    }

    pub fn reset(&mut self) {
        *self = Self::new(self.gains);
    }
}

/// One update of the cascade. Outputs are clamped to [−1, 1].
pub fn classic_controller_step(obs: &Observation, dt: f64, ctl: &mut ClassicController) -> Action {
    let phi = obs.phi_n * PI;
    let (u_stab, v_stab) = derotate(obs.u_cam, obs.v_cam, phi);
    let g = ctl.gains;

    let (pitch_cmd, long) = pid_step(&g.longitudinal, &ctl.longitudinal, v_stab, dt);
    let delta_el = g.elevator_bias + pitch_cmd + g.pitch_rate_damping * obs.q_n;

    let (roll_cmd, head) = pid_step(&g.heading, &ctl.heading, u_stab, dt);
    let (delta_ail, roll) = pid_step(&g.roll, &ctl.roll, roll_cmd - phi, dt);

    ctl.longitudinal = long;
    ctl.heading = head;
    ctl.roll = roll;
    Action::new(delta_el, delta_ail)
}
