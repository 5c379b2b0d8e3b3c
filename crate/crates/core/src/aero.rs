//! Per-surface aerodynamic build-up.
//!
//! The glider is a list of independent lifting surfaces plus a drag-only
//! fuselage. Each surface sees the airspeed at its own neutral point (so body
//! rates produce damping), computes linear lift with induced drag in its wind
//! frame, and the loads are rotated back to body axes and transported to the
//! centre of gravity. There is no interaction between surfaces.

use std::f64::consts::PI;

use nalgebra::Vector3;
use thiserror::Error;

use crate::dynamics::{ActuatorState, MassProperties, RigidBodyState};
use crate::frames::{euler_to_dcm, wind_frame_dcm, Dcm, SurfaceMounting};

/// Smallest forward airspeed component (m/s) accepted in a surface wing frame.
pub const MIN_FORWARD_AIRSPEED: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AeroError {
    #[error("aspect ratio must be positive, got {0}")]
    InvalidAspectRatio(f64),
    #[error("degenerate airflow on surface `{surface}`: forward component {forward} m/s")]
    DegenerateAirflow { surface: String, forward: f64 },
}

/// Geometry, mounting and coefficients of one lifting surface.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftingSurface {
    pub name: String,
    pub mounting: SurfaceMounting,
    /// Planform area (m²).
    pub area: f64,
    /// Mean chord (m).
    pub chord: f64,
    pub aspect_ratio: f64,
    pub cl0: f64,
    pub cd0: f64,
    pub cm0: f64,
    /// Oswald efficiency.
    pub oswald: f64,
    /// Incidence beyond which lift stops growing (rad).
    pub stall_alpha: f64,
    /// Multiplier applied to the asymmetric (aileron) command: −1, 0 or +1.
    pub deflection_sign: i8,
}

impl LiftingSurface {
    /// Deflection seen by this surface for the given actuator state, clamped to
    /// `±limit`. Fixed surfaces always get zero.
    pub fn deflection(&self, controls: &ActuatorState, limit: f64) -> f64 {
        if self.mounting.hinge.is_none() {
            return 0.0;
        }
        let raw = controls.delta_el + f64::from(self.deflection_sign) * controls.delta_ail;
        raw.clamp(-limit, limit)
    }
}

/// Fuselage form-factor drag model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuselageDrag {
    pub form_factor: f64,
    pub skin_friction: f64,
    /// Wetted area (m²).
    pub wet_area: f64,
    /// Reference area (m²).
    pub ref_area: f64,
}

/// Everything needed to compute the aerodynamic wrench of the airframe.
#[derive(Debug, Clone, PartialEq)]
pub struct GliderModel {
    pub mass: MassProperties,
    pub surfaces: Vec<LiftingSurface>,
    pub fuselage: FuselageDrag,
    /// Per-surface deflection limit (rad); also the de-normalisation scale of
    /// agent actions.
    pub deflection_limit: f64,
}

/// Airflow seen by one surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalAirflow {
    /// Surface velocity through the air, wing-frame components (m/s).
    pub velocity_wing: Vector3<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub dynamic_pressure: f64,
    /// Body→wing DCM including the current deflection.
    pub body_to_wing: Dcm,
    /// Neutral point relative to the CG, body axes (m).
    pub position_body: Vector3<f64>,
}

impl LocalAirflow {
    pub fn airspeed(&self) -> f64 {
        self.velocity_wing.norm()
    }
}

/// Force and moment about the CG, body axes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wrench {
    pub force_body: Vector3<f64>,
    pub moment_body: Vector3<f64>,
}

impl Wrench {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Same wrench expressed about a reference point `p_ref` (body axes, relative to CG).
    pub fn about(&self, p_ref: &Vector3<f64>) -> Wrench {
        Wrench {
            force_body: self.force_body,
            moment_body: self.moment_body - p_ref.cross(&self.force_body),
        }
    }
}

impl std::ops::Add for Wrench {
    type Output = Wrench;
    fn add(self, rhs: Wrench) -> Wrench {
        Wrench {
            force_body: self.force_body + rhs.force_body,
            moment_body: self.moment_body + rhs.moment_body,
        }
    }
}

impl std::ops::AddAssign for Wrench {
    fn add_assign(&mut self, rhs: Wrench) {
        self.force_body += rhs.force_body;
        self.moment_body += rhs.moment_body;
    }
}

/// Finite-wing lift-curve slope per radian.
pub fn lift_slope(aspect_ratio: f64) -> Result<f64, AeroError> {
    if !(aspect_ratio > 0.0) || !aspect_ratio.is_finite() {
        return Err(AeroError::InvalidAspectRatio(aspect_ratio));
    }
    let half = aspect_ratio / 2.0;
    Ok(PI * aspect_ratio / (1.0 + (1.0 + half * half).sqrt()))
}

/// Lift, drag and pitching-moment coefficients at incidence `alpha`.
///
/// Past `stall_alpha` the lift magnitude is held at its stall value; induced
/// drag follows the clamped lift.
pub fn surface_coefficients(alpha: f64, surface: &LiftingSurface) -> (f64, f64, f64) {
    // aspect ratio is validated at load time
    let slope = lift_slope(surface.aspect_ratio).unwrap_or(0.0);
    let cl_linear = surface.cl0 + slope * alpha;
    let cl = if alpha.abs() > surface.stall_alpha {
        let cl_stall = surface.cl0 + slope * surface.stall_alpha.copysign(alpha);
        cl_linear.clamp(-cl_stall.abs(), cl_stall.abs())
    } else {
        cl_linear
    };
    let cdi = cl * cl / (PI * surface.oswald * surface.aspect_ratio);
    (cl, surface.cd0 + cdi, surface.cm0)
}

pub fn fuselage_drag_coefficient(fus: &FuselageDrag) -> f64 {
    fus.form_factor * fus.skin_friction * fus.wet_area / fus.ref_area
}

/// Airflow at a surface's neutral point.
///
/// `wind_body` is the air-mass velocity in body axes; the surface moves
/// through the air at `v_body + ω × p_W − wind_body`.
pub fn local_airflow(
    v_body: &Vector3<f64>,
    omega_body: &Vector3<f64>,
    mounting: &SurfaceMounting,
    wind_body: &Vector3<f64>,
    rho: f64,
    deflection: f64,
) -> Result<LocalAirflow, AeroError> {
    let point = v_body + omega_body.cross(&mounting.position_body) - wind_body;
    let body_to_wing = mounting.deflected(deflection);
    let vw = body_to_wing.apply(&point);
    if vw.x.abs() <= MIN_FORWARD_AIRSPEED {
        return Err(AeroError::DegenerateAirflow {
            surface: String::new(),
            forward: vw.x,
        });
    }
    let speed_sq = vw.norm_squared();
    let speed = speed_sq.sqrt();
    Ok(LocalAirflow {
        velocity_wing: vw,
        alpha: vw.z.atan2(vw.x),
        beta: (vw.y / speed).clamp(-1.0, 1.0).asin(),
        dynamic_pressure: 0.5 * rho * speed_sq,
        body_to_wing,
        position_body: mounting.position_body,
    })
}

/// Lift and drag force vectors (body axes) and the pure aerodynamic couple
/// (body axes, before transport to the CG).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceLoads {
    pub lift_body: Vector3<f64>,
    pub drag_body: Vector3<f64>,
    pub couple_body: Vector3<f64>,
}

pub fn surface_loads(flow: &LocalAirflow, surface: &LiftingSurface) -> SurfaceLoads {
    if flow.dynamic_pressure == 0.0 {
        return SurfaceLoads {
            lift_body: Vector3::zeros(),
            drag_body: Vector3::zeros(),
            couple_body: Vector3::zeros(),
        };
    }
    let (cl, cd, cm) = surface_coefficients(flow.alpha, surface);
    let qs = flow.dynamic_pressure * surface.area;
    // wind → wing → body
    let to_body = flow.body_to_wing.transpose().0 * wind_frame_dcm(flow.alpha, flow.beta).transpose().0;
    SurfaceLoads {
        lift_body: to_body * Vector3::new(0.0, 0.0, -qs * cl),
        drag_body: to_body * Vector3::new(-qs * cd, 0.0, 0.0),
        couple_body: to_body * Vector3::new(0.0, qs * surface.chord * cm, 0.0),
    }
}

/// Wrench of a single surface about the CG.
pub fn surface_wrench(flow: &LocalAirflow, surface: &LiftingSurface) -> Wrench {
    let loads = surface_loads(flow, surface);
    let force = loads.lift_body + loads.drag_body;
    Wrench {
        force_body: force,
        moment_body: loads.couple_body + flow.position_body.cross(&force),
    }
}

/// Drag of the fuselage, applied at the CG along the CG airflow.
pub fn fuselage_wrench(v_air_body: &Vector3<f64>, fus: &FuselageDrag, rho: f64) -> Wrench {
    let speed = v_air_body.norm();
    if speed < 1e-12 {
        return Wrench::zero();
    }
    let drag = 0.5 * rho * speed * speed * fus.ref_area * fuselage_drag_coefficient(fus);
    Wrench {
        force_body: -v_air_body * (drag / speed),
        moment_body: Vector3::zeros(),
    }
}

/// Aerodynamic wrench of the whole glider about its CG.
pub fn total_wrench(
    state: &RigidBodyState,
    controls: &ActuatorState,
    glider: &GliderModel,
    wind_body: &Vector3<f64>,
    rho: f64,
) -> Result<Wrench, AeroError> {
    let mut total = fuselage_wrench(&(state.velocity_body - wind_body), &glider.fuselage, rho);
    for surface in &glider.surfaces {
        let deflection = surface.deflection(controls, glider.deflection_limit);
        let flow = local_airflow(
            &state.velocity_body,
            &state.rates_body,
            &surface.mounting,
            wind_body,
            rho,
            deflection,
        )
        .map_err(|e| match e {
            AeroError::DegenerateAirflow { forward, .. } => AeroError::DegenerateAirflow {
                surface: surface.name.clone(),
                forward,
            },
            other => other,
        })?;
        total += surface_wrench(&flow, surface);
    }
    Ok(total)
}

/// Wind vector in body axes for the given attitude.
pub fn wind_in_body(state: &RigidBodyState, wind_ned: &Vector3<f64>) -> Vector3<f64> {
    euler_to_dcm(&state.attitude).0.tr_mul(wind_ned)
}
