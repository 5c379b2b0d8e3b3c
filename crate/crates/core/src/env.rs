//! Episodic environment: randomized reset, fixed-rate stepping, normalized
//! observations, line-of-sight reward and termination.
//!
//! The target sits at the NED origin. Reset places the glider on a bearing
//! `c` from north at horizontal range `r`, i.e. at `(−r cos c, −r sin c, −h)`,
//! heading north and trimmed.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::aero::{total_wrench, wind_in_body, AeroError, GliderModel};
use crate::atmosphere::{wind_at, DrydenState, WindConfig};
use crate::baseline::ClassicGains;
use crate::dynamics::{rk4_step, ActuatorState, RigidBodyState, Trim, TrimError, DEFAULT_DT, GRAVITY};
use crate::frames::FrameError;
use crate::model::{default_glider, default_seeker, DEFAULT_RHO};
use crate::seeker::{project, ImagePoint, SeekerModel};

pub const TARGET_NED: Vector3<f64> = Vector3::new(0.0, 0.0, 0.0);
/// Rate normalisation for p and q (rad/s).
pub const RATE_SCALE: f64 = 2.0 * PI;
pub const MAX_RESET_ATTEMPTS: u32 = 100;
pub const DEFAULT_BLIND_RANGE: f64 = 10.0;

const RESET_STREAM: u64 = 0;
const DRYDEN_STREAM_BASE: u64 = 1;
const NOISE_STREAM: u64 = u64::MAX;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("step called before reset")]
    NotReset,
    #[error("step called after the episode ended")]
    StepAfterTermination,
    #[error("no feasible initial condition after {attempts} draws")]
    InfeasibleScenario { attempts: u32 },
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Trim(#[from] TrimError),
    #[error(transparent)]
    Aero(#[from] AeroError),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Observation {
    pub phi_n: f64,
    pub theta_n: f64,
    pub p_n: f64,
    pub q_n: f64,
    pub u_cam: f64,
    pub v_cam: f64,
}

impl Observation {
    pub fn to_array(&self) -> [f64; 6] {
        [self.phi_n, self.theta_n, self.p_n, self.q_n, self.u_cam, self.v_cam]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            phi_n: a[0],
            theta_n: a[1],
            p_n: a[2],
            q_n: a[3],
            u_cam: a[4],
            v_cam: a[5],
        }
    }
}

/// Normalised elevon command. Components are clamped to [−1, 1] on
/// construction; NaN becomes 0.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Action {
    pub delta_el_n: f64,
    pub delta_ail_n: f64,
}

fn clamp_unit(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-1.0, 1.0)
    }
}

impl Action {
    pub fn new(delta_el_n: f64, delta_ail_n: f64) -> Self {
        Self {
            delta_el_n: clamp_unit(delta_el_n),
            delta_ail_n: clamp_unit(delta_ail_n),
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Physical deflections for a given travel limit (rad).
    pub fn to_actuators(&self, limit: f64) -> ActuatorState {
        let a = Action::new(self.delta_el_n, self.delta_ail_n);
        ActuatorState {
            delta_el: a.delta_el_n * limit,
            delta_ail: a.delta_ail_n * limit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self { w1: 1.0, w2: 0.1, w3: 0.1 }
    }
}

/// Uniform initial-condition ranges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitDistribution {
    /// Horizontal range (m).
    pub range: (f64, f64),
    /// Bearing of the glider from north as seen from the target (rad).
    pub cone: (f64, f64),
    /// Altitude is `ratio · r + U(−spread, spread)` (m).
    pub altitude_ratio: f64,
    pub altitude_spread: f64,
}

impl Default for InitDistribution {
    fn default() -> Self {
        Self {
            range: (100.0, 200.0),
            cone: (-45f64.to_radians(), 45f64.to_radians()),
            altitude_ratio: 0.5,
            altitude_spread: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub glider: GliderModel,
    pub seeker: SeekerModel,
    pub wind: WindConfig,
    pub init: InitDistribution,
    pub reward: RewardWeights,
    /// One-off reward when the episode ends on a lost target or a fault.
    pub terminal_penalty: f64,
    /// Standard deviation of additive noise on the normalised image point.
    pub pixel_noise_std: f64,
    /// Slant range (m) inside which a lost target does not end the episode;
    /// the seeker holds its last valid measurement instead.
    pub blind_range: f64,
    pub max_duration: f64,
    pub dt: f64,
    pub rho: f64,
    pub gravity: f64,
    pub gains: ClassicGains,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            glider: default_glider(),
            seeker: default_seeker(),
            wind: WindConfig::calm(),
            init: InitDistribution::default(),
            reward: RewardWeights::default(),
            terminal_penalty: -10.0,
            pixel_noise_std: 0.0,
            blind_range: DEFAULT_BLIND_RANGE,
            max_duration: 60.0,
            dt: DEFAULT_DT,
            rho: DEFAULT_RHO,
            gravity: GRAVITY,
            gains: ClassicGains::default(),
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |m: &str| Err(EnvError::InvalidConfig(m.to_string()));
        let i = &self.init;
        if !(i.range.0 > 0.0 && i.range.0 <= i.range.1) {
            return bad("init.range must satisfy 0 < min <= max");
        }
        if !(i.cone.0 <= i.cone.1 && i.cone.0 > -PI && i.cone.1 < PI) {
            return bad("init.cone must satisfy -180 < min <= max < 180 degrees");
        }
        if !(i.altitude_spread >= 0.0) || i.altitude_ratio * i.range.0 - i.altitude_spread <= 0.0 {
            return bad("init altitude rule can place the glider at or below ground");
        }
        if !(self.dt > 0.0 && self.max_duration > 0.0) {
            return bad("dt and max_duration must be positive");
        }
        if !(self.reward.w1 > 0.0 && self.reward.w2 >= 0.0 && self.reward.w3 >= 0.0) {
            return bad("reward weights need w1 > 0 and w2, w3 >= 0");
        }
        if !(self.terminal_penalty <= 0.0) {
            return bad("terminal_penalty must be <= 0");
        }
        if !(self.pixel_noise_std >= 0.0) {
            return bad("pixel_noise_std must be >= 0");
        }
        if !(self.blind_range >= 0.0) {
            return bad("blind_range must be >= 0");
        }
        if !(self.rho > 0.0 && self.gravity > 0.0) {
            return bad("rho and gravity must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TerminationCause {
    Impact,
    TargetLost,
    GimbalFault,
}

impl TerminationCause {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Impact => "impact",
            Self::TargetLost => "target_lost",
            Self::GimbalFault => "gimbal_fault",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub time: f64,
    pub steps: u64,
    pub state: RigidBodyState,
    pub actuators: ActuatorState,
    pub image: ImagePoint,
    /// Horizontal distance to the target; the interpolated ground point after impact.
    pub horizontal_miss: f64,
    pub impact_ned: Option<Vector2<f64>>,
    /// Initial range and bearing drawn at reset.
    pub initial_range: f64,
    pub initial_cone: f64,
    pub initial_altitude: f64,
    pub reset_attempts: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub termination: Option<TerminationCause>,
    pub truncated: bool,
    pub info: StepInfo,
}

impl StepResult {
    pub fn terminated(&self) -> bool {
        self.termination.is_some()
    }

    pub fn done(&self) -> bool {
        self.terminated() || self.truncated
    }

    /// `(observation, reward, terminated, truncated, info)`.
    pub fn into_tuple(self) -> (Observation, f64, bool, bool, StepInfo) {
        (self.observation, self.reward, self.terminated(), self.truncated, self.info)
    }
}

/// Normalised observation; every component is clamped to [−1, 1].
pub fn observe(state: &RigidBodyState, image: &ImagePoint) -> Observation {
    let a = &state.attitude;
    let w = &state.rates_body;
    Observation {
        phi_n: clamp_unit(a.phi / PI),
        theta_n: clamp_unit(a.theta / FRAC_PI_2),
        p_n: clamp_unit(w.x / RATE_SCALE),
        q_n: clamp_unit(w.y / RATE_SCALE),
        u_cam: clamp_unit(image.u),
        v_cam: clamp_unit(image.v),
    }
}

/// Line-of-sight reward: image offset from the centre plus actuator effort.
pub fn reward(image: &ImagePoint, action: &Action, weights: &RewardWeights) -> f64 {
    let camera = weights.w1 * image.u.hypot(image.v);
    let actuator = weights.w2 * action.delta_el_n.powi(2) + weights.w3 * action.delta_ail_n.powi(2);
    -(camera + actuator)
}

pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    rewards.iter().rev().fold(0.0, |acc, r| r + gamma * acc)
}

/// Ground-plane point where the segment `prev → next` crosses z = 0.
pub fn ground_crossing(prev: &Vector3<f64>, next: &Vector3<f64>) -> Vector2<f64> {
    let dz = next.z - prev.z;
    let f = if dz > 0.0 { (-prev.z / dz).clamp(0.0, 1.0) } else { 1.0 };
    Vector2::new(prev.x + f * (next.x - prev.x), prev.y + f * (next.y - prev.y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Idle,
    Running,
    Done,
}

/// Failure inside one integration step.
enum StepFault {
    Frame,
    Aero(AeroError),
}

impl From<FrameError> for StepFault {
    fn from(_: FrameError) -> Self {
        Self::Frame
    }
}

/// One glider episode at a time. Owns all mutable state; the scenario is
/// shared read-only.
#[derive(Debug, Clone)]
pub struct Environment {
    cfg: Arc<ScenarioConfig>,
    trim: Trim,
    phase: Phase,
    state: RigidBodyState,
    dryden: DrydenState,
    noise_rng: ChaCha8Rng,
    gust_ned: Vector3<f64>,
    actuators: ActuatorState,
    image: ImagePoint,
    steps: u64,
    impact: Option<Vector2<f64>>,
    initial: (f64, f64, f64, u32),
}

impl Environment {
    pub fn new(cfg: Arc<ScenarioConfig>) -> Result<Self, EnvError> {
        cfg.validate()?;
        let trim = crate::dynamics::trim_longitudinal(&cfg.glider, cfg.rho, cfg.gravity)?;
        Ok(Self {
            trim,
            phase: Phase::Idle,
            state: RigidBodyState::default(),
            dryden: DrydenState::new(0, DRYDEN_STREAM_BASE),
            noise_rng: ChaCha8Rng::seed_from_u64(0),
            gust_ned: Vector3::zeros(),
            actuators: ActuatorState::default(),
            image: ImagePoint::centered(),
            steps: 0,
            impact: None,
            initial: (0.0, 0.0, 0.0, 0),
            cfg,
        })
    }

    pub fn config(&self) -> &Arc<ScenarioConfig> {
        &self.cfg
    }

    pub fn trim(&self) -> &Trim {
        &self.trim
    }

    pub fn state(&self) -> &RigidBodyState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.cfg.dt
    }

    pub fn is_done(&self) -> bool {
        self.phase == Phase::Done
    }

    /// Draws a trimmed initial condition with the target in view.
    pub fn reset(&mut self, seed: u64) -> Result<(Observation, StepInfo), EnvError> {
        let cfg = Arc::clone(&self.cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(RESET_STREAM);
        let init = &cfg.init;
        for attempt in 1..=MAX_RESET_ATTEMPTS {
            let r = rng.random_range(init.range.0..=init.range.1);
            let cone = rng.random_range(init.cone.0..=init.cone.1);
            let alt = init.altitude_ratio * r + rng.random_range(-init.altitude_spread..=init.altitude_spread);
            if alt <= 0.0 {
                continue;
            }
            let state = self.trim.state(Vector3::new(-r * cone.cos(), -r * cone.sin(), -alt));
            let image = project(&TARGET_NED, &state.position_ned, &state.attitude, &cfg.seeker);
            if !image.visible {
                continue;
            }
            self.state = state;
            self.dryden = DrydenState::new(seed, DRYDEN_STREAM_BASE.wrapping_add(cfg.wind.seed));
            self.noise_rng = ChaCha8Rng::seed_from_u64(seed);
            self.noise_rng.set_stream(NOISE_STREAM);
            self.gust_ned = Vector3::zeros();
            self.actuators = ActuatorState::default();
            self.steps = 0;
            self.impact = None;
            self.initial = (r, cone, alt, attempt);
            self.image = self.sense();
            self.phase = Phase::Running;
            return Ok((observe(&self.state, &self.image), self.info()));
        }
        self.phase = Phase::Idle;
        Err(EnvError::InfeasibleScenario {
            attempts: MAX_RESET_ATTEMPTS,
        })
    }

    /// Advances the simulation by one control period.
    pub fn step(&mut self, action: &Action) -> Result<StepResult, EnvError> {
        match self.phase {
            Phase::Idle => return Err(EnvError::NotReset),
            Phase::Done => return Err(EnvError::StepAfterTermination),
            Phase::Running => {}
        }
        let cfg = Arc::clone(&self.cfg);
        let action = Action::new(action.delta_el_n, action.delta_ail_n);
        self.actuators = action.to_actuators(cfg.glider.deflection_limit);
        let wind_ned = wind_at(&cfg.wind, &self.gust_ned);
        let controls = self.actuators;

        let stepped = rk4_step(
            &self.state,
            cfg.dt,
            |s: &RigidBodyState| {
                total_wrench(s, &controls, &cfg.glider, &wind_in_body(s, &wind_ned), cfg.rho).map_err(StepFault::Aero)
            },
            &cfg.glider.mass,
            cfg.gravity,
        );
        self.steps += 1;

        let next = match stepped {
            Ok(next) if next.is_finite() => next,
            Ok(_) | Err(StepFault::Frame) => {
                self.phase = Phase::Done;
                return Ok(self.finish(TerminationCause::GimbalFault, cfg.terminal_penalty));
            }
            Err(StepFault::Aero(e)) => {
                self.phase = Phase::Done;
                return Err(e.into());
            }
        };
        let prev_position = self.state.position_ned;
        self.state = next;

        let airspeed = (next.velocity_body - wind_in_body(&next, &wind_ned)).norm();
        self.gust_ned = self.dryden.step(&cfg.wind, airspeed, cfg.dt);
        let image = self.sense();
        let slant = (TARGET_NED - next.position_ned).norm();
        if image.visible || slant > cfg.blind_range {
            self.image = image;
        }

        let termination = if next.position_ned.z >= 0.0 {
            self.impact = Some(ground_crossing(&prev_position, &next.position_ned));
            Some(TerminationCause::Impact)
        } else if !self.image.visible {
            Some(TerminationCause::TargetLost)
        } else {
            None
        };
        let truncated = termination.is_none() && self.time() >= cfg.max_duration - 0.5 * cfg.dt;
        if termination.is_some() || truncated {
            self.phase = Phase::Done;
        }
        let r = if self.image.visible {
            reward(&self.image, &action, &cfg.reward)
        } else {
            cfg.terminal_penalty
        };
        Ok(StepResult {
            observation: observe(&self.state, &self.image),
            reward: r,
            termination,
            truncated,
            info: self.info(),
        })
    }

    /// Terminal result that keeps the last valid state.
    fn finish(&self, cause: TerminationCause, reward: f64) -> StepResult {
        StepResult {
            observation: observe(&self.state, &self.image),
            reward,
            termination: Some(cause),
            truncated: false,
            info: self.info(),
        }
    }

    fn sense(&mut self) -> ImagePoint {
        let mut p = project(&TARGET_NED, &self.state.position_ned, &self.state.attitude, &self.cfg.seeker);
        let sd = self.cfg.pixel_noise_std;
        if sd > 0.0 && p.visible {
            let n = Normal::new(0.0, sd).expect("validated noise level");
            p.u += n.sample(&mut self.noise_rng);
            p.v += n.sample(&mut self.noise_rng);
            p.visible = p.u.abs() <= 1.0 && p.v.abs() <= 1.0;
        }
        p
    }

    fn info(&self) -> StepInfo {
        let ground = self
            .impact
            .unwrap_or_else(|| Vector2::new(self.state.position_ned.x, self.state.position_ned.y));
        StepInfo {
            time: self.time(),
            steps: self.steps,
            state: self.state,
            actuators: self.actuators,
            image: self.image,
            horizontal_miss: (ground - TARGET_NED.xy()).norm(),
            impact_ned: self.impact,
            initial_range: self.initial.0,
            initial_cone: self.initial.1,
            initial_altitude: self.initial.2,
            reset_attempts: self.initial.3,
        }
    }
}
