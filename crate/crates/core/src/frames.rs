//! Attitude and frame conventions.
//!
//! Every rotation in the crate goes through this module:
//!
//! * Euler angles are ZYX (yaw, pitch, roll).
//! * [`euler_to_dcm`] returns the body→NED matrix `B`; its transpose maps NED
//!   vectors into the body frame.
//! * A surface's wing frame `W` is reached from the body frame with the
//!   surface mounting DCM (body→wing components), and the wind frame `S` from
//!   `W` with [`wind_frame_dcm`].
//! * All single-axis helpers ([`rot_x`], [`rot_y`], [`rot_z`]) are frame
//!   rotations: they map vector components from a parent frame into a child
//!   frame rotated by `+angle` about the named axis.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Margin from ±π/2 pitch below which Euler kinematics are accepted.
pub const GIMBAL_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FrameError {
    #[error("gimbal lock: pitch {theta} rad is within {GIMBAL_MARGIN} rad of ±π/2")]
    GimbalLock { theta: f64 },
}

/// Roll, pitch and yaw in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerAngles {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl EulerAngles {
    pub const fn new(phi: f64, theta: f64, psi: f64) -> Self {
        Self { phi, theta, psi }
    }

    /// Folds roll and yaw back into (−π, π]. Pitch is left untouched.
    pub fn wrapped(self) -> Self {
        Self {
            phi: wrap_pi(self.phi),
            theta: self.theta,
            psi: wrap_pi(self.psi),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.phi.is_finite()
            && self.psi.is_finite()
            && self.phi > -PI
            && self.phi <= PI
            && self.psi > -PI
            && self.psi <= PI
            && self.theta.abs() < FRAC_PI_2
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.phi, self.theta, self.psi)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }
}

/// Wraps an angle into (−π, π].
pub fn wrap_pi(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

/// Proper orthonormal 3×3 rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dcm(pub Matrix3<f64>);

impl Dcm {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// `self · other`, i.e. apply `other` first.
    pub fn then_after(&self, other: &Dcm) -> Self {
        Self(self.0 * other.0)
    }

    /// Largest entry of `RᵀR − I` and `|det − 1|`.
    pub fn orthonormality_error(&self) -> (f64, f64) {
        let gram = self.0.transpose() * self.0 - Matrix3::identity();
        (gram.amax(), (self.0.determinant() - 1.0).abs())
    }
}

/// Frame rotation about x (roll).
pub fn rot_x(angle: f64) -> Dcm {
    let (s, c) = angle.sin_cos();
    Dcm(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, s, 0.0, -s, c))
}

/// Frame rotation about y (pitch).
pub fn rot_y(angle: f64) -> Dcm {
    let (s, c) = angle.sin_cos();
    Dcm(Matrix3::new(c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c))
}

/// Frame rotation about z (yaw).
pub fn rot_z(angle: f64) -> Dcm {
    let (s, c) = angle.sin_cos();
    Dcm(Matrix3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0))
}

/// Body→NED direction cosine matrix for ZYX Euler angles.
pub fn euler_to_dcm(angles: &EulerAngles) -> Dcm {
    let (sp, cp) = angles.phi.sin_cos();
    let (st, ct) = angles.theta.sin_cos();
    let (ss, cs) = angles.psi.sin_cos();
    Dcm(Matrix3::new(
        ct * cs,
        sp * st * cs - cp * ss,
        cp * st * cs + sp * ss,
        ct * ss,
        sp * st * ss + cp * cs,
        cp * st * ss - sp * cs,
        -st,
        sp * ct,
        cp * ct,
    ))
}

/// Inverse of [`euler_to_dcm`] on the valid attitude range.
pub fn dcm_to_euler(dcm: &Dcm) -> EulerAngles {
    let m = &dcm.0;
    let theta = (-m[(2, 0)]).clamp(-1.0, 1.0).asin();
    let phi = m[(2, 1)].atan2(m[(2, 2)]);
    let psi = m[(1, 0)].atan2(m[(0, 0)]);
    EulerAngles::new(phi, theta, psi).wrapped()
}

/// Matrix `H` with Euler rates = `H · ω_body`.
pub fn euler_rate_matrix(angles: &EulerAngles) -> Result<Matrix3<f64>, FrameError> {
    if angles.theta.abs() >= FRAC_PI_2 - GIMBAL_MARGIN || !angles.theta.is_finite() {
        return Err(FrameError::GimbalLock {
            theta: angles.theta,
        });
    }
    let (sp, cp) = angles.phi.sin_cos();
    let (st, ct) = angles.theta.sin_cos();
    let tt = st / ct;
    Ok(Matrix3::new(
        1.0,
        sp * tt,
        cp * tt,
        0.0,
        cp,
        -sp,
        0.0,
        sp / ct,
        cp / ct,
    ))
}

/// Cross-product matrix: `skew(ω) · v = ω × v`.
pub fn skew(omega: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -omega.z, omega.y, omega.z, 0.0, -omega.x, -omega.y, omega.x, 0.0,
    )
}

/// Wing→wind DCM for local incidence `alpha_s` and sideslip `beta_s`.
///
/// The wind frame's x axis lies along the surface's velocity through the air,
/// so with `v_W = |v|·(cosα cosβ, sinβ, sinα cosβ)` the result maps `v_W` onto
/// `(|v|, 0, 0)`.
pub fn wind_frame_dcm(alpha_s: f64, beta_s: f64) -> Dcm {
    rot_z(beta_s).then_after(&rot_y(-alpha_s))
}

/// Placement of one lifting surface relative to the centre of gravity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceMounting {
    /// Neutral point relative to the CG, body axes (m).
    pub position_body: Vector3<f64>,
    /// Body→wing DCM at zero deflection.
    pub orientation_body: Dcm,
    /// Present on all-moving surfaces.
    pub hinge: Option<HingeAxis>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HingeAxis {
    /// Rotation about the surface's own spanwise axis `y_W`.
    Y,
}

impl SurfaceMounting {
    /// Mounting from a position and wing-frame Euler angles relative to the body.
    pub fn from_euler(position_body: Vector3<f64>, angles: &EulerAngles, hinge: Option<HingeAxis>) -> Self {
        Self {
            position_body,
            orientation_body: euler_to_dcm(angles).transpose(),
            hinge,
        }
    }

    /// Body→wing DCM with the surface rotated by `deflection` about its hinge.
    /// Positive deflection raises the leading edge (trailing edge down).
    pub fn deflected(&self, deflection: f64) -> Dcm {
        match self.hinge {
            Some(HingeAxis::Y) if deflection != 0.0 => {
                rot_y(deflection).then_after(&self.orientation_body)
            }
            _ => self.orientation_body,
        }
    }
}
