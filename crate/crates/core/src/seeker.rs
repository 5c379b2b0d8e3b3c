//! Strap-down pinhole seeker.
//!
//! Camera axes: boresight along camera x, image-right along camera y,
//! image-down along camera z. With the default mounting these coincide with
//! the body axes. A target at camera coordinates `(X, Y, Z)` with `X > 0`
//! lands on pixel `(p_x + f·Y/X, p_y + f·Z/X)`; normalised coordinates divide
//! the offset from the principal point by half the resolution.

use nalgebra::Vector3;
use thiserror::Error;

use crate::frames::{euler_to_dcm, Dcm, EulerAngles};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SeekerError {
    #[error("image point is not visible")]
    NotVisible,
    #[error("field of view must lie in (0, 180) degrees, got {0} rad")]
    BadFov(f64),
    #[error("resolution must be positive")]
    BadResolution,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeekerModel {
    /// Focal length (pixels).
    pub focal: f64,
    /// Principal point (pixels).
    pub principal_point: [f64; 2],
    /// Width and height (pixels).
    pub resolution: [f64; 2],
    /// Body→camera DCM.
    pub mounting_body: Dcm,
    /// Horizontal and vertical field of view (rad), derived from focal and resolution.
    pub fov: [f64; 2],
}

impl SeekerModel {
    /// Square-pixel camera centred on the image whose focal length is fixed by
    /// the horizontal field of view.
    pub fn from_horizontal_fov(hfov: f64, width: f64, height: f64, mounting: &EulerAngles) -> Result<Self, SeekerError> {
        if !(hfov > 0.0 && hfov < std::f64::consts::PI) {
            return Err(SeekerError::BadFov(hfov));
        }
        if !(width > 0.0 && height > 0.0) {
            return Err(SeekerError::BadResolution);
        }
        let focal = 0.5 * width / (0.5 * hfov).tan();
        Ok(Self {
            focal,
            principal_point: [0.5 * width, 0.5 * height],
            resolution: [width, height],
            mounting_body: euler_to_dcm(mounting).transpose(),
            fov: [hfov, 2.0 * (0.5 * height / focal).atan()],
        })
    }

    fn half_size(&self) -> [f64; 2] {
        [0.5 * self.resolution[0], 0.5 * self.resolution[1]]
    }

    /// Target position in camera axes.
    pub fn camera_coordinates(&self, target_ned: &Vector3<f64>, position_ned: &Vector3<f64>, attitude: &EulerAngles) -> Vector3<f64> {
        let body = euler_to_dcm(attitude).0.tr_mul(&(target_ned - position_ned));
        self.mounting_body.apply(&body)
    }

    /// Normalised image point of a camera-frame position.
    pub fn project_camera(&self, cam: &Vector3<f64>) -> ImagePoint {
        let depth = cam.x;
        if !(depth > 0.0) {
            return ImagePoint { u: 0.0, v: 0.0, visible: false };
        }
        let [hw, hh] = self.half_size();
        let u = self.focal * cam.y / depth / hw;
        let v = self.focal * cam.z / depth / hh;
        ImagePoint {
            u,
            v,
            visible: u.abs() <= 1.0 && v.abs() <= 1.0,
        }
    }

    /// Inverse of [`normalized_to_pixels`].
    pub fn pixels_to_normalized(&self, pixels: [f64; 2]) -> (f64, f64) {
        let [hw, hh] = self.half_size();
        (
            (pixels[0] - self.principal_point[0]) / hw,
            (pixels[1] - self.principal_point[1]) / hh,
        )
    }
}

/// Normalised image coordinates; `u` grows to the right, `v` downwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagePoint {
    pub u: f64,
    pub v: f64,
    pub visible: bool,
}

impl ImagePoint {
    pub fn centered() -> Self {
        Self { u: 0.0, v: 0.0, visible: true }
    }
}

/// Projects a NED target through the seeker of a glider at the given pose.
///
/// Points behind the camera are reported invisible with `u = v = 0`.
pub fn project(
    target_ned: &Vector3<f64>,
    position_ned: &Vector3<f64>,
    attitude: &EulerAngles,
    seeker: &SeekerModel,
) -> ImagePoint {
    seeker.project_camera(&seeker.camera_coordinates(target_ned, position_ned, attitude))
}

pub fn normalized_to_pixels(p: &ImagePoint, seeker: &SeekerModel) -> Result<[f64; 2], SeekerError> {
    if !p.visible {
        return Err(SeekerError::NotVisible);
    }
    let [hw, hh] = seeker.half_size();
    Ok([
        seeker.principal_point[0] + p.u * hw,
        seeker.principal_point[1] + p.v * hh,
    ])
}
