//! Shipped default airframe and seeker.
//!
//! The airframe approximates a 0.5 m span, 0.6 m long, 0.3 kg glider with a
//! straight main wing, an all-moving split horizontal tail used as elevons and
//! one vertical fin. The inertia tensor is a placeholder estimate.
//! `scenarios/airframes/glider_default.toml` carries the same numbers.

use nalgebra::Vector3;

use crate::aero::{FuselageDrag, GliderModel, LiftingSurface};
use crate::dynamics::MassProperties;
use crate::frames::{EulerAngles, HingeAxis, SurfaceMounting};
use crate::seeker::SeekerModel;

pub const DEFAULT_DEFLECTION_LIMIT_DEG: f64 = 20.0;
pub const DEFAULT_RHO: f64 = 1.225;
pub const DEFAULT_OSWALD: f64 = 0.75;

const WING_DIHEDRAL_DEG: f64 = 3.0;
const WING_INCIDENCE_DEG: f64 = 0.0;
const TAIL_INCIDENCE_DEG: f64 = -4.0;

#[allow(clippy::too_many_arguments)]
fn surface(
    name: &str,
    position: [f64; 3],
    mounting_deg: [f64; 3],
    hinge: Option<HingeAxis>,
    area: f64,
    chord: f64,
    aspect_ratio: f64,
    cd0: f64,
    stall_deg: f64,
    deflection_sign: i8,
) -> LiftingSurface {
    let angles = EulerAngles::new(
        mounting_deg[0].to_radians(),
        mounting_deg[1].to_radians(),
        mounting_deg[2].to_radians(),
    );
    LiftingSurface {
        name: name.to_string(),
        mounting: SurfaceMounting::from_euler(Vector3::from(position), &angles, hinge),
        area,
        chord,
        aspect_ratio,
        cl0: 0.0,
        cd0,
        cm0: 0.0,
        oswald: DEFAULT_OSWALD,
        stall_alpha: stall_deg.to_radians(),
        deflection_sign,
    }
}

pub fn default_glider() -> GliderModel {
    let wing_ar = 6.25;
    let tail_ar = 4.0;
    let fin_ar = 1.6;
    GliderModel {
        mass: MassProperties::diagonal(0.30, 3e-3, 6e-3, 8e-3).expect("valid default mass properties"),
        surfaces: vec![
            surface(
                "left_wing",
                [-0.01, -0.125, 0.0],
                [WING_DIHEDRAL_DEG, WING_INCIDENCE_DEG, 0.0],
                None,
                0.02,
                0.08,
                wing_ar,
                0.012,
                14.0,
                0,
            ),
            surface(
                "right_wing",
                [-0.01, 0.125, 0.0],
                [-WING_DIHEDRAL_DEG, WING_INCIDENCE_DEG, 0.0],
                None,
                0.02,
                0.08,
                wing_ar,
                0.012,
                14.0,
                0,
            ),
            surface(
                "left_elevon",
                [-0.33, -0.05, 0.0],
                [0.0, TAIL_INCIDENCE_DEG, 0.0],
                Some(HingeAxis::Y),
                0.005,
                0.05,
                tail_ar,
                0.012,
                16.0,
                1,
            ),
            surface(
                "right_elevon",
                [-0.33, 0.05, 0.0],
                [0.0, TAIL_INCIDENCE_DEG, 0.0],
                Some(HingeAxis::Y),
                0.005,
                0.05,
                tail_ar,
                0.012,
                16.0,
                -1,
            ),
            surface(
                "fin",
                [-0.33, 0.0, -0.03],
                [90.0, 0.0, 0.0],
                None,
                0.004,
                0.05,
                fin_ar,
                0.012,
                16.0,
                0,
            ),
        ],
        fuselage: FuselageDrag {
            form_factor: 1.2,
            skin_friction: 0.006,
            wet_area: 0.06,
            ref_area: 0.04,
        },
        deflection_limit: DEFAULT_DEFLECTION_LIMIT_DEG.to_radians(),
    }
}

/// 640×480 wide-angle camera with a 120° horizontal field, boresight on body x.
pub fn default_seeker() -> SeekerModel {
    SeekerModel::from_horizontal_fov(120f64.to_radians(), 640.0, 480.0, &EulerAngles::default())
        .expect("valid default seeker")
}
