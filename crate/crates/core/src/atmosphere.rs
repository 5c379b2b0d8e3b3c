//! Mean wind plus Dryden turbulence.
//!
//! Each gust channel is the output of a Dryden shaping filter driven by white
//! noise. The filters are discretised exactly for the current step: the state
//! transition is the matrix exponential and the injected noise covariance is
//! `P∞ − Φ P∞ Φᵀ`, so the stationary variance equals σ² for any `dt`.
//!
//! * longitudinal: `σ_u √(2L_u/πV) / (1 + (L_u/V) s)`
//! * lateral and vertical: `σ √(L/πV) (1 + √3 (L/V) s) / (1 + (L/V) s)²`
//!
//! Channels map onto NED north, east and down.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Airspeed floor (m/s) used when scaling the filter time constants.
pub const MIN_TURBULENCE_AIRSPEED: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindConfig {
    pub mean_wind_ned: Vector3<f64>,
    /// σ_u, σ_v, σ_w (m/s).
    pub turbulence_intensity: Vector3<f64>,
    /// L_u, L_v, L_w (m).
    pub scale_lengths: Vector3<f64>,
    pub enabled: bool,
    /// Mixed with the episode seed to select the turbulence noise stream.
    pub seed: u64,
}

impl WindConfig {
    /// Calm air with the light low-altitude turbulence preset available but off.
    pub fn calm() -> Self {
        Self {
            mean_wind_ned: Vector3::zeros(),
            turbulence_intensity: Vector3::new(1.06, 1.06, 0.7),
            scale_lengths: Vector3::new(200.0, 200.0, 50.0),
            enabled: false,
            seed: 0,
        }
    }

    pub fn with_mean(mut self, mean_wind_ned: Vector3<f64>) -> Self {
        self.mean_wind_ned = mean_wind_ned;
        self
    }

    pub fn with_turbulence(mut self, enabled: bool) -> Self {
        self.enabled = enabled;
        self
    }
}

impl Default for WindConfig {
    fn default() -> Self {
        Self::calm()
    }
}

/// Mean wind plus gust, NED (m/s).
pub fn wind_at(cfg: &WindConfig, gust_ned: &Vector3<f64>) -> Vector3<f64> {
    cfg.mean_wind_ned + gust_ned
}

/// Filter memories and noise stream of one turbulence generator.
#[derive(Debug, Clone)]
pub struct DrydenState {
    u: f64,
    v: [f64; 2],
    w: [f64; 2],
    rng: ChaCha8Rng,
}

impl DrydenState {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            u: 0.0,
            v: [0.0; 2],
            w: [0.0; 2],
            rng,
        }
    }

    /// Current gust without advancing the filters.
    pub fn gust(&self, cfg: &WindConfig, airspeed: f64) -> Vector3<f64> {
        if !cfg.enabled {
            return Vector3::zeros();
        }
        let v = airspeed.max(MIN_TURBULENCE_AIRSPEED);
        Vector3::new(
            self.u,
            second_order_output(&self.v, cfg.scale_lengths.y / v),
            second_order_output(&self.w, cfg.scale_lengths.z / v),
        )
    }

    /// Advances every channel by `dt` and returns the new gust (NED, m/s).
    /// Disabled turbulence returns zero and draws no random numbers.
    pub fn step(&mut self, cfg: &WindConfig, airspeed: f64, dt: f64) -> Vector3<f64> {
        if !cfg.enabled {
            return Vector3::zeros();
        }
        let v = airspeed.max(MIN_TURBULENCE_AIRSPEED);
        let sigma = cfg.turbulence_intensity;
        let lengths = cfg.scale_lengths;

        let a = (-v * dt / lengths.x).exp();
        let n: f64 = StandardNormal.sample(&mut self.rng);
        self.u = a * self.u + sigma.x * (1.0 - a * a).sqrt() * n;

        advance_second_order(&mut self.v, sigma.y, lengths.y / v, dt, &mut self.rng);
        advance_second_order(&mut self.w, sigma.z, lengths.z / v, dt, &mut self.rng);
        self.gust(cfg, airspeed)
    }
}

/// Output of `(1 + √3 T s)/(1 + T s)²` in controllable canonical form
/// `x1'' + 2λ x1' + λ² x1 = ξ`, `y = λ² x1 + √3 λ x2` with `λ = 1/T`.
fn second_order_output(x: &[f64; 2], tau: f64) -> f64 {
    let lambda = 1.0 / tau;
    lambda * lambda * x[0] + 3f64.sqrt() * lambda * x[1]
}

/// Exact discrete update of the canonical second-order Dryden filter.
///
/// Noise intensity `q = σ² T` gives output variance σ²; the stationary state
/// covariance is `diag(q/4λ³, q/4λ)`.
fn advance_second_order(x: &mut [f64; 2], sigma: f64, tau: f64, dt: f64, rng: &mut ChaCha8Rng) {
    let lambda = 1.0 / tau;
    let e = (-lambda * dt).exp();
    let phi = [
        [e * (1.0 + lambda * dt), e * dt],
        [-e * lambda * lambda * dt, e * (1.0 - lambda * dt)],
    ];
    let q = sigma * sigma * tau;
    let p11 = q / (4.0 * lambda.powi(3));
    let p22 = q / (4.0 * lambda);
    // Q = P − Φ P Φᵀ with diagonal P
    let q11 = p11 - (phi[0][0] * phi[0][0] * p11 + phi[0][1] * phi[0][1] * p22);
    let q12 = -(phi[0][0] * phi[1][0] * p11 + phi[0][1] * phi[1][1] * p22);
    let q22 = p22 - (phi[1][0] * phi[1][0] * p11 + phi[1][1] * phi[1][1] * p22);
    let l11 = q11.max(0.0).sqrt();
    let l21 = if l11 > 0.0 { q12 / l11 } else { 0.0 };
    let l22 = (q22 - l21 * l21).max(0.0).sqrt();

    let n1: f64 = StandardNormal.sample(rng);
    let n2: f64 = StandardNormal.sample(rng);
    let x0 = phi[0][0] * x[0] + phi[0][1] * x[1] + l11 * n1;
    let x1 = phi[1][0] * x[0] + phi[1][1] * x[1] + l21 * n1 + l22 * n2;
    x[0] = x0;
    x[1] = x1;
}
