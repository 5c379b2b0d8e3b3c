//! TOML scenario and airframe files.
//!
//! A scenario names its glider either as a path (relative to the scenario
//! file) or as an inline `[glider]` table. Angles in files are degrees; every
//! omitted scenario key takes the built-in default. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use nalgebra::{Matrix3, Vector3};
use serde::Deserialize;
use thiserror::Error;

use crate::aero::{lift_slope, FuselageDrag, GliderModel, LiftingSurface};
use crate::atmosphere::WindConfig;
use crate::baseline::{ClassicGains, PidConfig};
use crate::dynamics::MassProperties;
use crate::env::{InitDistribution, RewardWeights, ScenarioConfig};
use crate::frames::{EulerAngles, HingeAxis, SurfaceMounting};
use crate::seeker::SeekerModel;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: invalid `{key}`: {message}")]
    Invalid {
        path: PathBuf,
        key: String,
        message: String,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceFile {
    pub name: String,
    pub position: [f64; 3],
    #[serde(default)]
    pub mounting_deg: [f64; 3],
    pub area: f64,
    pub chord: f64,
    pub aspect_ratio: f64,
    #[serde(default)]
    pub cl0: f64,
    pub cd0: f64,
    #[serde(default)]
    pub cm0: f64,
    #[serde(default = "default_oswald")]
    pub oswald: f64,
    pub stall_deg: f64,
    #[serde(default)]
    pub hinge: Option<HingeAxis>,
    #[serde(default)]
    pub deflection_sign: i8,
}

fn default_oswald() -> f64 {
    crate::model::DEFAULT_OSWALD
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuselageFile {
    pub form_factor: f64,
    pub skin_friction: f64,
    pub wet_area: f64,
    pub ref_area: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GliderFile {
    pub mass_kg: f64,
    pub inertia: [[f64; 3]; 3],
    pub deflection_limit_deg: f64,
    pub fuselage: FuselageFile,
    #[serde(rename = "surface")]
    pub surfaces: Vec<SurfaceFile>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InitFile {
    pub range_m: Option<[f64; 2]>,
    pub cone_deg: Option<[f64; 2]>,
    pub altitude_ratio: Option<f64>,
    pub altitude_spread_m: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct WindFile {
    pub mean_ned: Option<[f64; 3]>,
    pub turbulence: Option<bool>,
    pub sigma: Option<[f64; 3]>,
    pub scale_lengths: Option<[f64; 3]>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SeekerFile {
    pub hfov_deg: Option<f64>,
    pub resolution: Option<[f64; 2]>,
    pub mounting_deg: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RewardFile {
    pub w1: Option<f64>,
    pub w2: Option<f64>,
    pub w3: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidFile {
    pub kp: f64,
    #[serde(default)]
    pub ki: f64,
    #[serde(default)]
    pub kd: f64,
    pub output_limit: f64,
    #[serde(default)]
    pub integrator_limit: f64,
}

impl From<PidFile> for PidConfig {
    fn from(p: PidFile) -> Self {
        PidConfig {
            kp: p.kp,
            ki: p.ki,
            kd: p.kd,
            output_limit: p.output_limit,
            integrator_limit: p.integrator_limit,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GainsFile {
    pub longitudinal: Option<PidFile>,
    /// Output limit in degrees of roll command.
    pub heading: Option<PidFile>,
    pub roll: Option<PidFile>,
    pub pitch_rate_damping: Option<f64>,
    pub elevator_bias: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    /// File path string or inline table.
    pub glider: Option<toml::Value>,
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub max_duration: Option<f64>,
    pub rho: Option<f64>,
    pub gravity: Option<f64>,
    pub blind_range: Option<f64>,
    pub pixel_noise_std: Option<f64>,
    pub terminal_penalty: Option<f64>,
    #[serde(default)]
    pub init: InitFile,
    #[serde(default)]
    pub wind: WindFile,
    #[serde(default)]
    pub seeker: SeekerFile,
    #[serde(default)]
    pub reward: RewardFile,
    #[serde(default)]
    pub pid: GainsFile,
}

struct Checker<'a> {
    path: &'a Path,
}

impl Checker<'_> {
    fn fail<T>(&self, key: impl Into<String>, message: impl Into<String>) -> Result<T, ConfigError> {
        Err(ConfigError::Invalid {
            path: self.path.to_path_buf(),
            key: key.into(),
            message: message.into(),
        })
    }

    fn require(&self, ok: bool, key: impl Into<String>, message: &str) -> Result<(), ConfigError> {
        if ok {
            Ok(())
        } else {
            self.fail(key, message)
        }
    }

    fn finite(&self, values: &[f64], key: &str) -> Result<(), ConfigError> {
        self.require(values.iter().all(|v| v.is_finite()), key, "must be finite")
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, path: &Path) -> Result<T, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse {
        path: path.to_path_buf(),
        message: e.to_string().trim_end().to_string(),
    })
}

pub fn load_glider(path: &Path) -> Result<GliderModel, ConfigError> {
    let file: GliderFile = parse(&read(path)?, path)?;
    build_glider(&file, path, "")
}

pub fn parse_glider(text: &str, path: &Path) -> Result<GliderModel, ConfigError> {
    build_glider(&parse(text, path)?, path, "")
}

fn build_glider(file: &GliderFile, path: &Path, prefix: &str) -> Result<GliderModel, ConfigError> {
    let c = Checker { path };
    let key = |k: &str| format!("{prefix}{k}");

    c.require(file.mass_kg > 0.0 && file.mass_kg.is_finite(), key("mass_kg"), "must be positive")?;
    let inertia = Matrix3::from_fn(|i, j| file.inertia[i][j]);
    let mass = match MassProperties::new(file.mass_kg, inertia) {
        Ok(m) => m,
        Err(e) => return c.fail(key("inertia"), e.to_string()),
    };
    c.require(
        file.deflection_limit_deg > 0.0 && file.deflection_limit_deg < 90.0,
        key("deflection_limit_deg"),
        "must lie in (0, 90)",
    )?;

    let f = &file.fuselage;
    c.finite(&[f.form_factor, f.skin_friction, f.wet_area, f.ref_area], &key("fuselage"))?;
    c.require(f.form_factor >= 0.0, key("fuselage.form_factor"), "must be >= 0")?;
    c.require(f.skin_friction >= 0.0, key("fuselage.skin_friction"), "must be >= 0")?;
    c.require(f.wet_area >= 0.0, key("fuselage.wet_area"), "must be >= 0")?;
    c.require(f.ref_area > 0.0, key("fuselage.ref_area"), "must be positive")?;

    c.require(!file.surfaces.is_empty(), key("surface"), "at least one surface is required")?;
    let mut surfaces = Vec::with_capacity(file.surfaces.len());
    for (i, s) in file.surfaces.iter().enumerate() {
        let k = |field: &str| format!("{prefix}surface[{i}].{field}");
        c.require(!s.name.trim().is_empty(), k("name"), "must not be empty")?;
        if file.surfaces[..i].iter().any(|o| o.name == s.name) {
            return c.fail(k("name"), format!("duplicate surface name `{}`", s.name));
        }
        c.finite(&s.position, &k("position"))?;
        c.finite(&s.mounting_deg, &k("mounting_deg"))?;
        c.finite(&[s.cl0, s.cd0, s.cm0], &k("coefficients"))?;
        c.require(s.area > 0.0, k("area"), "must be positive")?;
        c.require(s.chord > 0.0, k("chord"), "must be positive")?;
        c.require(lift_slope(s.aspect_ratio).is_ok(), k("aspect_ratio"), "must be positive")?;
        c.require(s.cd0 >= 0.0, k("cd0"), "must be >= 0")?;
        c.require(s.oswald > 0.0 && s.oswald <= 1.0, k("oswald"), "must lie in (0, 1]")?;
        c.require(s.stall_deg > 0.0 && s.stall_deg < 90.0, k("stall_deg"), "must lie in (0, 90)")?;
        c.require((-1..=1).contains(&s.deflection_sign), k("deflection_sign"), "must be -1, 0 or 1")?;
        c.require(
            s.mounting_deg[1].abs() < 90.0,
            k("mounting_deg"),
            "pitch must lie strictly between -90 and 90",
        )?;
        let angles = EulerAngles::new(
            s.mounting_deg[0].to_radians(),
            s.mounting_deg[1].to_radians(),
            s.mounting_deg[2].to_radians(),
        );
        surfaces.push(LiftingSurface {
            name: s.name.clone(),
            mounting: SurfaceMounting::from_euler(Vector3::from(s.position), &angles, s.hinge),
            area: s.area,
            chord: s.chord,
            aspect_ratio: s.aspect_ratio,
            cl0: s.cl0,
            cd0: s.cd0,
            cm0: s.cm0,
            oswald: s.oswald,
            stall_alpha: s.stall_deg.to_radians(),
            deflection_sign: s.deflection_sign,
        });
    }
    Ok(GliderModel {
        mass,
        surfaces,
        fuselage: FuselageDrag {
            form_factor: f.form_factor,
            skin_friction: f.skin_friction,
            wet_area: f.wet_area,
            ref_area: f.ref_area,
        },
        deflection_limit: file.deflection_limit_deg.to_radians(),
    })
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    parse_scenario(&read(path)?, path)
}

/// Parses scenario text; `path` locates relative glider files and labels errors.
pub fn parse_scenario(text: &str, path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let file: ScenarioFile = parse(text, path)?;
    let c = Checker { path };
    let mut cfg = ScenarioConfig::default();

    cfg.glider = match file.glider {
        None => cfg.glider,
        Some(toml::Value::String(p)) => {
            let full = path.parent().map(|d| d.join(&p)).unwrap_or_else(|| PathBuf::from(&p));
            match load_glider(&full) {
                Ok(g) => g,
                Err(ConfigError::Io { source, .. }) => {
                    return c.fail("glider", format!("cannot read airframe file {}: {source}", full.display()))
                }
                Err(e) => return Err(e),
            }
        }
        Some(v @ toml::Value::Table(_)) => {
            let g: GliderFile = v.try_into().map_err(|e: toml::de::Error| ConfigError::Parse {
                path: path.to_path_buf(),
                message: format!("in [glider]: {}", e.to_string().trim_end()),
            })?;
            build_glider(&g, path, "glider.")?
        }
        Some(_) => return c.fail("glider", "must be a file path or a table"),
    };

    macro_rules! set {
        ($field:expr, $value:expr) => {
            if let Some(v) = $value {
                $field = v;
            }
        };
    }
    set!(cfg.seed, file.seed);
    set!(cfg.dt, file.dt);
    set!(cfg.max_duration, file.max_duration);
    set!(cfg.rho, file.rho);
    set!(cfg.gravity, file.gravity);
    set!(cfg.blind_range, file.blind_range);
    set!(cfg.pixel_noise_std, file.pixel_noise_std);
    set!(cfg.terminal_penalty, file.terminal_penalty);
    c.require(cfg.dt > 0.0 && cfg.dt.is_finite(), "dt", "must be positive")?;
    c.require(cfg.max_duration > 0.0 && cfg.max_duration.is_finite(), "max_duration", "must be positive")?;
    c.require(cfg.max_duration >= cfg.dt, "max_duration", "must cover at least one step")?;
    c.require(cfg.rho > 0.0 && cfg.rho.is_finite(), "rho", "must be positive")?;
    c.require(cfg.gravity > 0.0 && cfg.gravity.is_finite(), "gravity", "must be positive")?;
    c.require(cfg.blind_range >= 0.0 && cfg.blind_range.is_finite(), "blind_range", "must be >= 0")?;
    c.require(
        cfg.pixel_noise_std >= 0.0 && cfg.pixel_noise_std.is_finite(),
        "pixel_noise_std",
        "must be >= 0",
    )?;
    c.require(
        cfg.terminal_penalty <= 0.0 && cfg.terminal_penalty.is_finite(),
        "terminal_penalty",
        "must be <= 0",
    )?;

    let defaults = InitDistribution::default();
    let range = file.init.range_m.unwrap_or([defaults.range.0, defaults.range.1]);
    let cone = file
        .init
        .cone_deg
        .unwrap_or([defaults.cone.0.to_degrees(), defaults.cone.1.to_degrees()]);
    let ratio = file.init.altitude_ratio.unwrap_or(defaults.altitude_ratio);
    let spread = file.init.altitude_spread_m.unwrap_or(defaults.altitude_spread);
    c.finite(&range, "init.range_m")?;
    c.finite(&cone, "init.cone_deg")?;
    c.require(range[0] > 0.0 && range[0] <= range[1], "init.range_m", "needs 0 < min <= max")?;
    c.require(
        cone[0] <= cone[1] && cone[0] > -180.0 && cone[1] < 180.0,
        "init.cone_deg",
        "needs -180 < min <= max < 180",
    )?;
    c.require(spread >= 0.0 && spread.is_finite(), "init.altitude_spread_m", "must be >= 0")?;
    c.require(
        ratio.is_finite() && ratio * range[0] - spread > 0.0,
        "init.altitude_ratio",
        "lowest possible start altitude must be above ground",
    )?;
    cfg.init = InitDistribution {
        range: (range[0], range[1]),
        cone: (cone[0].to_radians(), cone[1].to_radians()),
        altitude_ratio: ratio,
        altitude_spread: spread,
    };

    let mut wind = WindConfig::calm();
    set!(wind.mean_wind_ned, file.wind.mean_ned.map(Vector3::from));
    set!(wind.enabled, file.wind.turbulence);
    set!(wind.turbulence_intensity, file.wind.sigma.map(Vector3::from));
    set!(wind.scale_lengths, file.wind.scale_lengths.map(Vector3::from));
    set!(wind.seed, file.wind.seed);
    c.finite(wind.mean_wind_ned.as_slice(), "wind.mean_ned")?;
    c.require(
        wind.turbulence_intensity.iter().all(|s| *s >= 0.0 && s.is_finite()),
        "wind.sigma",
        "must be >= 0",
    )?;
    c.require(
        wind.scale_lengths.iter().all(|l| *l > 0.0 && l.is_finite()),
        "wind.scale_lengths",
        "must be positive",
    )?;
    cfg.wind = wind;

    let hfov = file.seeker.hfov_deg.unwrap_or(120.0);
    let [w, h] = file.seeker.resolution.unwrap_or([640.0, 480.0]);
    let m = file.seeker.mounting_deg.unwrap_or([0.0; 3]);
    c.require(hfov > 0.0 && hfov < 180.0, "seeker.hfov_deg", "must lie in (0, 180)")?;
    c.require(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite(), "seeker.resolution", "must be positive")?;
    c.finite(&m, "seeker.mounting_deg")?;
    let mounting = EulerAngles::new(m[0].to_radians(), m[1].to_radians(), m[2].to_radians());
    cfg.seeker = match SeekerModel::from_horizontal_fov(hfov.to_radians(), w, h, &mounting) {
        Ok(s) => s,
        Err(e) => return c.fail("seeker", e.to_string()),
    };

    let mut reward = RewardWeights::default();
    set!(reward.w1, file.reward.w1);
    set!(reward.w2, file.reward.w2);
    set!(reward.w3, file.reward.w3);
    c.require(reward.w1 > 0.0 && reward.w1.is_finite(), "reward.w1", "must be positive")?;
    c.require(reward.w2 >= 0.0 && reward.w2.is_finite(), "reward.w2", "must be >= 0")?;
    c.require(reward.w3 >= 0.0 && reward.w3.is_finite(), "reward.w3", "must be >= 0")?;
    cfg.reward = reward;

    let mut gains = ClassicGains::default();
    let pid_checks = [
        ("pid.longitudinal", file.pid.longitudinal, 1.0),
        ("pid.heading", file.pid.heading, 1f64.to_radians()),
        ("pid.roll", file.pid.roll, 1.0),
    ];
    for (key, pid, limit_scale) in pid_checks {
        if let Some(p) = pid {
            c.finite(&[p.kp, p.ki, p.kd, p.output_limit, p.integrator_limit], key)?;
            c.require(p.output_limit > 0.0, format!("{key}.output_limit"), "must be positive")?;
            c.require(p.integrator_limit >= 0.0, format!("{key}.integrator_limit"), "must be >= 0")?;
            let mut cfg_pid = PidConfig::from(p);
            cfg_pid.output_limit *= limit_scale;
            match key {
                "pid.longitudinal" => gains.longitudinal = cfg_pid,
                "pid.heading" => gains.heading = cfg_pid,
                _ => gains.roll = cfg_pid,
            }
        }
    }
    set!(gains.pitch_rate_damping, file.pid.pitch_rate_damping);
    set!(gains.elevator_bias, file.pid.elevator_bias);
    c.finite(&[gains.pitch_rate_damping], "pid.pitch_rate_damping")?;
    c.finite(&[gains.elevator_bias], "pid.elevator_bias")?;
    cfg.gains = gains;

    if let Err(e) = cfg.validate() {
        return c.fail("scenario", e.to_string());
    }
    Ok(cfg)
}
