//! Flat-earth rigid-body equations, RK4 stepping and longitudinal trim.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::aero::{total_wrench, AeroError, GliderModel, Wrench};
use crate::frames::{euler_rate_matrix, euler_to_dcm, EulerAngles, FrameError};

/// Standard gravity (m/s²).
pub const GRAVITY: f64 = 9.81;

/// Fixed simulation step (s), i.e. a 100 Hz loop.
pub const DEFAULT_DT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RigidBodyState {
    /// CG position in NED (m); z is positive down.
    pub position_ned: Vector3<f64>,
    pub attitude: EulerAngles,
    /// Velocity of the CG relative to the ground, body axes (m/s).
    pub velocity_body: Vector3<f64>,
    /// Body rates p, q, r (rad/s).
    pub rates_body: Vector3<f64>,
}

impl RigidBodyState {
    pub fn is_finite(&self) -> bool {
        self.position_ned.iter().all(|x| x.is_finite())
            && self.attitude.as_vector().iter().all(|x| x.is_finite())
            && self.velocity_body.iter().all(|x| x.is_finite())
            && self.rates_body.iter().all(|x| x.is_finite())
    }

    fn advanced(&self, d: &StateDerivative, h: f64) -> RigidBodyState {
        RigidBodyState {
            position_ned: self.position_ned + d.position_dot * h,
            attitude: EulerAngles::from_vector(&(self.attitude.as_vector() + d.attitude_dot * h)),
            velocity_body: self.velocity_body + d.velocity_dot * h,
            rates_body: self.rates_body + d.rates_dot * h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub position_dot: Vector3<f64>,
    pub attitude_dot: Vector3<f64>,
    pub velocity_dot: Vector3<f64>,
    pub rates_dot: Vector3<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum MassError {
    #[error("mass must be positive, got {0} kg")]
    NonPositiveMass(f64),
    #[error("inertia tensor must be symmetric positive definite")]
    BadInertia,
}

/// Mass and inertia about the CG, body axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassProperties {
    mass: f64,
    inertia: Matrix3<f64>,
    inertia_inv: Matrix3<f64>,
}

impl MassProperties {
    pub fn new(mass: f64, inertia: Matrix3<f64>) -> Result<Self, MassError> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(MassError::NonPositiveMass(mass));
        }
        if (inertia - inertia.transpose()).amax() > 1e-12 * inertia.amax() {
            return Err(MassError::BadInertia);
        }
        let chol = inertia.cholesky().ok_or(MassError::BadInertia)?;
        Ok(Self {
            mass,
            inertia,
            inertia_inv: chol.inverse(),
        })
    }

    pub fn diagonal(mass: f64, ixx: f64, iyy: f64, izz: f64) -> Result<Self, MassError> {
        Self::new(mass, Matrix3::from_diagonal(&Vector3::new(ixx, iyy, izz)))
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn inertia(&self) -> &Matrix3<f64> {
        &self.inertia
    }
}

/// Control surface deflections in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActuatorState {
    /// Symmetric (pitch) deflection; positive is trailing edge down.
    pub delta_el: f64,
    /// Asymmetric (roll) deflection; positive rolls right.
    pub delta_ail: f64,
}

/// Time derivative of the rigid-body state.
///
/// Gravity `(0, 0, g)` in NED is rotated into the body frame with the
/// transpose of the body→NED matrix.
pub fn state_derivative(
    state: &RigidBodyState,
    wrench: &Wrench,
    mp: &MassProperties,
    gravity: f64,
) -> Result<StateDerivative, FrameError> {
    let h = euler_rate_matrix(&state.attitude)?;
    let b = euler_to_dcm(&state.attitude).0;
    let omega = &state.rates_body;
    let v = &state.velocity_body;
    let g_body = b.tr_mul(&Vector3::new(0.0, 0.0, gravity));
    let i_omega = mp.inertia * omega;
    Ok(StateDerivative {
        position_dot: b * v,
        attitude_dot: h * omega,
        velocity_dot: wrench.force_body / mp.mass + g_body - omega.cross(v),
        rates_dot: mp.inertia_inv * (wrench.moment_body - omega.cross(&i_omega)),
    })
}

/// Classical fourth-order Runge-Kutta step.
///
/// The wrench is re-evaluated at every stage. Roll and yaw are wrapped back to
/// (−π, π] afterwards.
pub fn rk4_step<F, E>(
    state: &RigidBodyState,
    dt: f64,
    mut wrench: F,
    mp: &MassProperties,
    gravity: f64,
) -> Result<RigidBodyState, E>
where
    F: FnMut(&RigidBodyState) -> Result<Wrench, E>,
    E: From<FrameError>,
{
    let k1 = state_derivative(state, &wrench(state)?, mp, gravity)?;
    let s2 = state.advanced(&k1, dt / 2.0);
    let k2 = state_derivative(&s2, &wrench(&s2)?, mp, gravity)?;
    let s3 = state.advanced(&k2, dt / 2.0);
    let k3 = state_derivative(&s3, &wrench(&s3)?, mp, gravity)?;
    let s4 = state.advanced(&k3, dt);
    let k4 = state_derivative(&s4, &wrench(&s4)?, mp, gravity)?;

    let sum = StateDerivative {
        position_dot: k1.position_dot + (k2.position_dot + k3.position_dot) * 2.0 + k4.position_dot,
        attitude_dot: k1.attitude_dot + (k2.attitude_dot + k3.attitude_dot) * 2.0 + k4.attitude_dot,
        velocity_dot: k1.velocity_dot + (k2.velocity_dot + k3.velocity_dot) * 2.0 + k4.velocity_dot,
        rates_dot: k1.rates_dot + (k2.rates_dot + k3.rates_dot) * 2.0 + k4.rates_dot,
    };
    let mut next = state.advanced(&sum, dt / 6.0);
    next.attitude = next.attitude.wrapped();
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrimError {
    #[error("no trim found: {0}")]
    NoTrimFound(String),
    #[error("glider is not statically stable in pitch (dCm/dα ≥ 0 at every zero-moment incidence)")]
    NotStable,
    #[error(transparent)]
    Aero(#[from] AeroError),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Steady wings-level glide with zero elevon deflection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trim {
    /// True airspeed (m/s).
    pub airspeed: f64,
    /// Body incidence (rad).
    pub alpha: f64,
    /// Pitch attitude (rad).
    pub pitch: f64,
    /// Flight-path angle (rad), negative when descending.
    pub gamma: f64,
    /// |m·v̇| at the trimmed state (N).
    pub force_residual: f64,
    /// |M_y| at the trimmed state (N·m).
    pub moment_residual: f64,
}

impl Trim {
    /// Trimmed state at the given NED position, heading north.
    pub fn state(&self, position_ned: Vector3<f64>) -> RigidBodyState {
        RigidBodyState {
            position_ned,
            attitude: EulerAngles::new(0.0, self.pitch, 0.0),
            velocity_body: Vector3::new(self.airspeed * self.alpha.cos(), 0.0, self.airspeed * self.alpha.sin()),
            rates_body: Vector3::zeros(),
        }
    }
}

const TRIM_REFERENCE_SPEED: f64 = 20.0;
const TRIM_SPEED_RANGE: (f64, f64) = (3.0, 60.0);
const TRIM_SCAN_POINTS: usize = 400;
const TRIM_MAX_ITER: usize = 100;
const TRIM_TOLERANCE: f64 = 1e-12;

fn aero_at_incidence(glider: &GliderModel, rho: f64, alpha: f64) -> Result<Wrench, AeroError> {
    let state = RigidBodyState {
        position_ned: Vector3::zeros(),
        attitude: EulerAngles::default(),
        velocity_body: Vector3::new(alpha.cos(), 0.0, alpha.sin()) * TRIM_REFERENCE_SPEED,
        rates_body: Vector3::zeros(),
    };
    total_wrench(&state, &ActuatorState::default(), glider, &Vector3::zeros(), rho)
}

/// Longitudinal trim with zero elevon deflection.
///
/// With zero rates every surface sees the same incidence and all loads scale
/// with V², so the pitching moment fixes the incidence (stable root found by
/// scan + bisection) and the lift/drag resultant fixes airspeed and attitude in
/// closed form.
pub fn trim_longitudinal(glider: &GliderModel, rho: f64, gravity: f64) -> Result<Trim, TrimError> {
    let stall = glider
        .surfaces
        .iter()
        .map(|s| s.stall_alpha)
        .fold(f64::INFINITY, f64::min);
    if !stall.is_finite() {
        return Err(TrimError::NoTrimFound("glider has no lifting surfaces".into()));
    }
    let lo = -stall * (1.0 - 1e-9);
    let hi = stall * (1.0 - 1e-9);
    let moment = |a: f64| aero_at_incidence(glider, rho, a).map(|w| w.moment_body.y);

    let mut bracket = None;
    let mut saw_unstable_root = false;
    let mut prev_a = lo;
    let mut prev_m = moment(lo)?;
    for i in 1..=TRIM_SCAN_POINTS {
        let a = lo + (hi - lo) * i as f64 / TRIM_SCAN_POINTS as f64;
        let m = moment(a)?;
        if prev_m > 0.0 && m <= 0.0 {
            bracket = Some((prev_a, a));
            break;
        }
        if prev_m < 0.0 && m >= 0.0 {
            saw_unstable_root = true;
        }
        prev_a = a;
        prev_m = m;
    }
    let (mut a_lo, mut a_hi) = match bracket {
        Some(b) => b,
        None if saw_unstable_root => return Err(TrimError::NotStable),
        None => {
            return Err(TrimError::NoTrimFound(format!(
                "pitching moment has no zero for incidence in (−{stall:.4}, {stall:.4}) rad"
            )))
        }
    };
    let mut alpha = 0.5 * (a_lo + a_hi);
    for _ in 0..TRIM_MAX_ITER {
        alpha = 0.5 * (a_lo + a_hi);
        let m = moment(alpha)?;
        if m > 0.0 {
            a_lo = alpha;
        } else {
            a_hi = alpha;
        }
        if a_hi - a_lo < TRIM_TOLERANCE || m == 0.0 {
            break;
        }
    }

    let reference = aero_at_incidence(glider, rho, alpha)?;
    let fx = reference.force_body.x;
    let fz = reference.force_body.z;
    let resultant = fx.hypot(fz);
    if !(fz < 0.0) || resultant == 0.0 {
        return Err(TrimError::NoTrimFound(format!(
            "no upward aerodynamic force at the zero-moment incidence {alpha:.6} rad"
        )));
    }
    let weight = glider.mass.mass() * gravity;
    let airspeed = TRIM_REFERENCE_SPEED * (weight / resultant).sqrt();
    if airspeed < TRIM_SPEED_RANGE.0 || airspeed > TRIM_SPEED_RANGE.1 {
        return Err(TrimError::NoTrimFound(format!(
            "trim airspeed {airspeed:.3} m/s outside [{}, {}] m/s",
            TRIM_SPEED_RANGE.0, TRIM_SPEED_RANGE.1
        )));
    }
    // aerodynamic force must cancel weight: F = m·g·(sinθ, 0, −cosθ)
    let pitch = fx.atan2(-fz);
    let mut trim = Trim {
        airspeed,
        alpha,
        pitch,
        gamma: pitch - alpha,
        force_residual: f64::NAN,
        moment_residual: f64::NAN,
    };
    let state = trim.state(Vector3::zeros());
    let wrench = total_wrench(&state, &ActuatorState::default(), glider, &Vector3::zeros(), rho)?;
    let d = state_derivative(&state, &wrench, &glider.mass, gravity)?;
    trim.force_residual = d.velocity_dot.norm() * glider.mass.mass();
    trim.moment_residual = wrench.moment_body.y.abs();
    Ok(trim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::default_glider;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[derive(Debug)]
    struct Never;
    impl From<FrameError> for Never {
        fn from(_: FrameError) -> Self {
            Never
        }
    }

    fn unit_mass() -> MassProperties {
        MassProperties::diagonal(1.0, 0.1, 0.2, 0.3).unwrap()
    }

    fn zero_wrench(_: &RigidBodyState) -> Result<Wrench, Never> {
        Ok(Wrench::zero())
    }

    #[test]
    fn mass_properties_validation() {
        assert!(MassProperties::diagonal(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(MassProperties::diagonal(1.0, -1.0, 1.0, 1.0).is_err());
        let asym = Matrix3::new(1.0, 0.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(MassProperties::new(1.0, asym).is_err());
    }

    #[test]
    fn free_fall_derivative() {
        let d = state_derivative(&RigidBodyState::default(), &Wrench::zero(), &unit_mass(), GRAVITY).unwrap();
        assert_eq!(d.velocity_dot, Vector3::new(0.0, 0.0, 9.81));
        assert_eq!(d.position_dot, Vector3::zeros());
        assert_eq!(d.attitude_dot, Vector3::zeros());
        assert_eq!(d.rates_dot, Vector3::zeros());
    }

    #[test]
    fn pitched_gravity_components() {
        let st = RigidBodyState {
            attitude: EulerAngles::new(0.0, -0.5, 0.0),
            ..Default::default()
        };
        let d = state_derivative(&st, &Wrench::zero(), &unit_mass(), GRAVITY).unwrap();
        assert_abs_diff_eq!(d.velocity_dot.x, 4.703, epsilon = 1e-3);
        assert_abs_diff_eq!(d.velocity_dot.x, -9.81 * (-0.5f64).sin(), epsilon = 1e-14);
        assert_abs_diff_eq!(d.velocity_dot.z, 8.609, epsilon = 1e-3);
    }

    #[test]
    fn coriolis_term() {
        let st = RigidBodyState {
            velocity_body: Vector3::new(10.0, 0.0, 0.0),
            rates_body: Vector3::new(0.0, 0.0, 1.0),
            ..Default::default()
        };
        let d = state_derivative(&st, &Wrench::zero(), &unit_mass(), 0.0).unwrap();
        assert_abs_diff_eq!(d.velocity_dot, Vector3::new(0.0, -10.0, 0.0), epsilon = 0.0);
    }

    #[test]
    fn derivative_propagates_gimbal_lock() {
        let st = RigidBodyState {
            attitude: EulerAngles::new(0.0, PI / 2.0 - 1e-4, 0.0),
            ..Default::default()
        };
        assert!(state_derivative(&st, &Wrench::zero(), &unit_mass(), GRAVITY).is_err());
    }

    #[test]
    fn ballistic_drop_is_exact() {
        let mut st = RigidBodyState::default();
        for _ in 0..100 {
            st = rk4_step(&st, 0.01, zero_wrench, &unit_mass(), GRAVITY).unwrap();
        }
        assert_abs_diff_eq!(st.velocity_body.z, 9.81, epsilon = 1e-9);
        assert_abs_diff_eq!(st.position_ned.z, 4.905, epsilon = 1e-9);
    }

    #[test]
    fn constant_velocity_cruise() {
        let mut st = RigidBodyState {
            velocity_body: Vector3::new(1.0, 0.0, 0.0),
            ..Default::default()
        };
        for _ in 0..100 {
            st = rk4_step(&st, 0.01, zero_wrench, &unit_mass(), 0.0).unwrap();
        }
        assert_abs_diff_eq!(st.position_ned, Vector3::new(1.0, 0.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn constant_roll_rate() {
        let mp = MassProperties::diagonal(1.0, 0.1, 0.1, 0.1).unwrap();
        let mut st = RigidBodyState {
            rates_body: Vector3::new(PI, 0.0, 0.0),
            ..Default::default()
        };
        for _ in 0..100 {
            st = rk4_step(&st, 0.01, zero_wrench, &mp, 0.0).unwrap();
            assert!(st.attitude.is_valid());
        }
        assert!(crate::frames::wrap_pi(st.attitude.phi - PI).abs() < 1e-6);
    }

    #[test]
    fn default_glider_trims() {
        let g = default_glider();
        let t = trim_longitudinal(&g, 1.225, GRAVITY).unwrap();
        assert!(t.force_residual < 1e-6, "{t:?}");
        assert!(t.moment_residual < 1e-6, "{t:?}");
        assert!(t.gamma < 0.0);
        assert!(t.airspeed > 5.0 && t.airspeed < 40.0);
        let st = t.state(Vector3::zeros());
        let w = total_wrench(&st, &ActuatorState::default(), &g, &Vector3::zeros(), 1.225).unwrap();
        let d = state_derivative(&st, &w, &g.mass, GRAVITY).unwrap();
        assert!(d.velocity_dot.norm() < 1e-4);
        assert!(d.rates_dot.y.abs() < 1e-4);
    }

    #[test]
    fn trim_moves_with_cg() {
        let g = default_glider();
        let base = trim_longitudinal(&g, 1.225, GRAVITY).unwrap();
        let mut shifted = g.clone();
        for s in &mut shifted.surfaces {
            s.mounting.position_body.x += 0.05;
        }
        let t = trim_longitudinal(&shifted, 1.225, GRAVITY).unwrap();
        assert!((t.alpha - base.alpha).abs() > 1e-4);
    }

    #[test]
    fn tailless_glider_has_no_trim() {
        let mut g = default_glider();
        g.surfaces.retain(|s| s.name.contains("wing"));
        assert!(trim_longitudinal(&g, 1.225, GRAVITY).is_err());
    }
}
