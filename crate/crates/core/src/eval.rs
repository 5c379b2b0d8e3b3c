//! Episode runner, Monte Carlo campaigns and dispersion statistics.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::sync::Arc;

use nalgebra::Vector3;
use thiserror::Error;

use crate::baseline::{classic_controller_step, ClassicController, ClassicGains};
use crate::dynamics::RigidBodyState;
use crate::env::{Action, EnvError, Environment, Observation, ScenarioConfig, StepResult, TerminationCause};
use crate::frames::EulerAngles;

pub const DEFAULT_CAMPAIGN_SIZE: usize = 500;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("controller failed: {0}")]
    Controller(String),
    #[error("campaign needs at least one episode")]
    EmptyCampaign,
    #[error("no episode out of {0} ended in a ground impact")]
    AllEpisodesFailed(usize),
    #[error("could not build worker pool: {0}")]
    Pool(String),
    #[error("trajectory csv, line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Anything that maps observations to actions, one episode at a time.
pub trait Controller {
    fn name(&self) -> &str;

    /// Clears episode memory.
    fn reset(&mut self) {}

    fn act(&mut self, obs: &Observation, dt: f64) -> Result<Action, EvalError>;

    /// Sees every step result, including the terminal one.
    fn feedback(&mut self, _result: &StepResult) -> Result<(), EvalError> {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroController;

impl Controller for ZeroController {
    fn name(&self) -> &str {
        "scripted-zero"
    }

    fn act(&mut self, _obs: &Observation, _dt: f64) -> Result<Action, EvalError> {
        Ok(Action::zero())
    }
}

/// Replays a fixed action list, then holds zero.
#[derive(Debug, Clone, Default)]
pub struct ScriptedController {
    pub actions: Vec<Action>,
    cursor: usize,
}

impl ScriptedController {
    pub fn new(actions: Vec<Action>) -> Self {
        Self { actions, cursor: 0 }
    }
}

impl Controller for ScriptedController {
    fn name(&self) -> &str {
        "scripted"
    }

    fn reset(&mut self) {
        self.cursor = 0;
    }

    fn act(&mut self, _obs: &Observation, _dt: f64) -> Result<Action, EvalError> {
        let a = self.actions.get(self.cursor).copied().unwrap_or_default();
        self.cursor += 1;
        Ok(a)
    }
}

impl Controller for ClassicController {
    fn name(&self) -> &str {
        "pid"
    }

    fn reset(&mut self) {
        ClassicController::reset(self);
    }

    fn act(&mut self, obs: &Observation, dt: f64) -> Result<Action, EvalError> {
        Ok(classic_controller_step(obs, dt, self))
    }
}

pub fn pid_controller(gains: ClassicGains) -> ClassicController {
    ClassicController::new(gains)
}

/// How an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EpisodeEnd {
    Impact,
    TargetLost,
    GimbalFault,
    Timeout,
}

impl EpisodeEnd {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Impact => "impact",
            Self::TargetLost => "target_lost",
            Self::GimbalFault => "gimbal_fault",
            Self::Timeout => "timeout",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "impact" => Self::Impact,
            "target_lost" => Self::TargetLost,
            "gimbal_fault" => Self::GimbalFault,
            "timeout" => Self::Timeout,
            _ => return None,
        })
    }

    fn from_step(r: &StepResult) -> Self {
        match r.termination {
            Some(TerminationCause::Impact) => Self::Impact,
            Some(TerminationCause::TargetLost) => Self::TargetLost,
            Some(TerminationCause::GimbalFault) => Self::GimbalFault,
            None => Self::Timeout,
        }
    }
}

/// One logged sample: the state at `t`, and the action applied from it.
/// The final row has a zero action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub state: RigidBodyState,
    pub action: Action,
    pub observation: Observation,
    /// Reward received on arrival at this state (0 for the first row).
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOutcome {
    pub seed: u64,
    pub cause: EpisodeEnd,
    /// Ground-plane impact point (m); the last position when there was no impact.
    pub impact_ned: [f64; 2],
    /// Horizontal miss (m); infinite unless the episode ended on impact.
    pub miss: f64,
    pub duration: f64,
    pub steps: u64,
    pub total_reward: f64,
    pub trajectory: Option<Vec<TrajectoryRow>>,
}

impl EpisodeOutcome {
    pub fn is_impact(&self) -> bool {
        self.cause == EpisodeEnd::Impact
    }
}

/// Runs one seeded episode to its end.
pub fn run_episode(
    controller: &mut dyn Controller,
    scenario: &Arc<ScenarioConfig>,
    seed: u64,
    record: bool,
) -> Result<EpisodeOutcome, EvalError> {
    let mut env = Environment::new(Arc::clone(scenario))?;
    run_episode_in(controller, &mut env, seed, record)
}

/// As [`run_episode`] but reusing an existing environment.
pub fn run_episode_in(
    controller: &mut dyn Controller,
    env: &mut Environment,
    seed: u64,
    record: bool,
) -> Result<EpisodeOutcome, EvalError> {
    let dt = env.config().dt;
    controller.reset();
    let (mut obs, info) = env.reset(seed)?;
    let mut rows = record.then(Vec::new);
    let mut last = (info.state, 0.0);
    let mut total_reward = 0.0;
    loop {
        let action = controller.act(&obs, dt)?;
        let action = Action::new(action.delta_el_n, action.delta_ail_n);
        if let Some(rows) = rows.as_mut() {
            rows.push(TrajectoryRow {
                t: env.time(),
                state: last.0,
                action,
                observation: obs,
                reward: last.1,
            });
        }
        let result = env.step(&action)?;
        controller.feedback(&result)?;
        total_reward += result.reward;
        obs = result.observation;
        last = (result.info.state, result.reward);
        if result.done() {
            if let Some(rows) = rows.as_mut() {
                rows.push(TrajectoryRow {
                    t: result.info.time,
                    state: result.info.state,
                    action: Action::zero(),
                    observation: obs,
                    reward: result.reward,
                });
            }
            let cause = EpisodeEnd::from_step(&result);
            let impact = match result.info.impact_ned {
                Some(p) => [p.x, p.y],
                None => [result.info.state.position_ned.x, result.info.state.position_ned.y],
            };
            let miss = if cause == EpisodeEnd::Impact {
                impact[0].hypot(impact[1])
            } else {
                f64::INFINITY
            };
            return Ok(EpisodeOutcome {
                seed,
                cause,
                impact_ned: impact,
                miss,
                duration: result.info.time,
                steps: result.info.steps,
                total_reward,
                trajectory: rows,
            });
        }
    }
}

/// Serial execution or a fixed-size worker pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel { workers: usize },
}

impl Execution {
    /// One worker means sequential; zero means one per core.
    pub fn from_workers(workers: usize) -> Self {
        match workers {
            1 => Self::Sequential,
            w => Self::Parallel { workers: w },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CauseCounts {
    pub impact: usize,
    pub target_lost: usize,
    pub gimbal_fault: usize,
    pub timeout: usize,
}

impl CauseCounts {
    fn add(&mut self, cause: EpisodeEnd) {
        match cause {
            EpisodeEnd::Impact => self.impact += 1,
            EpisodeEnd::TargetLost => self.target_lost += 1,
            EpisodeEnd::GimbalFault => self.gimbal_fault += 1,
            EpisodeEnd::Timeout => self.timeout += 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignStats {
    /// Episodes run.
    pub n: usize,
    /// Episodes that ended on impact; the statistics below use only these.
    pub impacts: usize,
    pub mmd: f64,
    /// Radius about the target holding half of the impacts.
    pub cep50: f64,
    pub cep90: f64,
    /// CEP50 about the impact centroid instead of the target.
    pub cep50_centroid: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub sigma2_x: f64,
    pub sigma2_y: f64,
    pub causes: CauseCounts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    pub stats: CampaignStats,
    pub outcomes: Vec<EpisodeOutcome>,
}

/// Smallest sample radius covering at least `fraction` of the points.
pub fn radius_quantile(radii: &[f64], fraction: f64) -> f64 {
    let mut r: Vec<f64> = radii.to_vec();
    r.sort_by(f64::total_cmp);
    let k = ((fraction * r.len() as f64).ceil() as usize).clamp(1, r.len());
    r[k - 1]
}

fn sample_std(xs: &[f64], mean: f64) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

pub fn campaign_stats(outcomes: &[EpisodeOutcome]) -> Result<CampaignStats, EvalError> {
    if outcomes.is_empty() {
        return Err(EvalError::EmptyCampaign);
    }
    let mut causes = CauseCounts::default();
    for o in outcomes {
        causes.add(o.cause);
    }
    let hits: Vec<&EpisodeOutcome> = outcomes.iter().filter(|o| o.is_impact()).collect();
    if hits.is_empty() {
        return Err(EvalError::AllEpisodesFailed(outcomes.len()));
    }
    let n = hits.len() as f64;
    let xs: Vec<f64> = hits.iter().map(|o| o.impact_ned[0]).collect();
    let ys: Vec<f64> = hits.iter().map(|o| o.impact_ned[1]).collect();
    let misses: Vec<f64> = hits.iter().map(|o| o.miss).collect();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let centroid: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| (x - mean_x).hypot(y - mean_y)).collect();
    Ok(CampaignStats {
        n: outcomes.len(),
        impacts: hits.len(),
        mmd: misses.iter().sum::<f64>() / n,
        cep50: radius_quantile(&misses, 0.5),
        cep90: radius_quantile(&misses, 0.9),
        cep50_centroid: radius_quantile(&centroid, 0.5),
        mean_x,
        mean_y,
        sigma2_x: 2.0 * sample_std(&xs, mean_x),
        sigma2_y: 2.0 * sample_std(&ys, mean_y),
        causes,
    })
}

/// Runs `n` episodes with seeds `base_seed + i`. Results come back in seed
/// order whatever the execution mode.
pub fn run_campaign<C, F>(
    make_controller: F,
    scenario: &Arc<ScenarioConfig>,
    n: usize,
    base_seed: u64,
    execution: Execution,
) -> Result<Campaign, EvalError>
where
    C: Controller,
    F: Fn() -> C + Sync,
{
    if n == 0 {
        return Err(EvalError::EmptyCampaign);
    }
    scenario.validate()?;
    let episode = |i: usize| -> Result<EpisodeOutcome, EvalError> {
        let mut c = make_controller();
        run_episode(&mut c, scenario, base_seed.wrapping_add(i as u64), false)
    };
    let outcomes = match execution {
        Execution::Sequential => (0..n).map(episode).collect::<Result<Vec<_>, _>>()?,
        Execution::Parallel { workers } => parallel_map(n, workers, episode)?,
    };
    let stats = campaign_stats(&outcomes)?;
    Ok(Campaign { stats, outcomes })
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(n: usize, workers: usize, f: F) -> Result<Vec<T>, EvalError>
where
    T: Send,
    F: Fn(usize) -> Result<T, EvalError> + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| EvalError::Pool(e.to_string()))?;
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(n: usize, _workers: usize, f: F) -> Result<Vec<T>, EvalError>
where
    F: Fn(usize) -> Result<T, EvalError>,
{
    (0..n).map(f).collect()
}

/// Machine-readable `key = value` summary.
pub fn format_stats(stats: &CampaignStats) -> String {
    let mut s = String::new();
    let c = &stats.causes;
    let _ = writeln!(s, "n = {}", stats.n);
    let _ = writeln!(s, "impacts = {}", stats.impacts);
    let _ = writeln!(s, "mmd = {:.6}", stats.mmd);
    let _ = writeln!(s, "cep50 = {:.6}", stats.cep50);
    let _ = writeln!(s, "cep90 = {:.6}", stats.cep90);
    let _ = writeln!(s, "cep50_centroid = {:.6}", stats.cep50_centroid);
    let _ = writeln!(s, "mean_x = {:.6}", stats.mean_x);
    let _ = writeln!(s, "mean_y = {:.6}", stats.mean_y);
    let _ = writeln!(s, "sigma2_x = {:.6}", stats.sigma2_x);
    let _ = writeln!(s, "sigma2_y = {:.6}", stats.sigma2_y);
    let _ = writeln!(s, "cause_impact = {}", c.impact);
    let _ = writeln!(s, "cause_target_lost = {}", c.target_lost);
    let _ = writeln!(s, "cause_gimbal_fault = {}", c.gimbal_fault);
    let _ = writeln!(s, "cause_timeout = {}", c.timeout);
    s
}

pub const SCATTER_HEADER: &str = "seed,x,y,miss,cause";

pub fn write_scatter_csv<W: Write>(outcomes: &[EpisodeOutcome], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SCATTER_HEADER}")?;
    for o in outcomes {
        writeln!(
            w,
            "{},{},{},{},{}",
            o.seed,
            o.impact_ned[0],
            o.impact_ned[1],
            o.miss,
            o.cause.as_str()
        )?;
    }
    Ok(())
}

pub const TRAJECTORY_HEADER: &str = "t,x,y,z,phi,theta,psi,u,v,w,p,q,r,action_el,action_ail,obs_phi,obs_theta,obs_p,obs_q,obs_u,obs_v,reward";

/// Values are written with the shortest round-tripping representation so a
/// log can be compared bit for bit after parsing.
pub fn write_trajectory_csv<W: Write>(rows: &[TrajectoryRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for r in rows {
        let s = &r.state;
        let o = r.observation.to_array();
        let fields = [
            r.t,
            s.position_ned.x,
            s.position_ned.y,
            s.position_ned.z,
            s.attitude.phi,
            s.attitude.theta,
            s.attitude.psi,
            s.velocity_body.x,
            s.velocity_body.y,
            s.velocity_body.z,
            s.rates_body.x,
            s.rates_body.y,
            s.rates_body.z,
            r.action.delta_el_n,
            r.action.delta_ail_n,
            o[0],
            o[1],
            o[2],
            o[3],
            o[4],
            o[5],
            r.reward,
        ];
        let line: Vec<String> = fields.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn read_trajectory_csv<R: BufRead>(r: R) -> Result<Vec<TrajectoryRow>, EvalError> {
    let mut rows = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if i == 0 {
            if line.trim() != TRAJECTORY_HEADER {
                return Err(EvalError::Csv {
                    line: 1,
                    message: "unexpected header".into(),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| EvalError::Csv {
                line: lineno,
                message: e.to_string(),
            })?;
        if v.len() != 22 {
            return Err(EvalError::Csv {
                line: lineno,
                message: format!("expected 22 fields, got {}", v.len()),
            });
        }
        rows.push(TrajectoryRow {
            t: v[0],
            state: RigidBodyState {
                position_ned: Vector3::new(v[1], v[2], v[3]),
                attitude: EulerAngles::new(v[4], v[5], v[6]),
                velocity_body: Vector3::new(v[7], v[8], v[9]),
                rates_body: Vector3::new(v[10], v[11], v[12]),
            },
            action: Action {
                delta_el_n: v[13],
                delta_ail_n: v[14],
            },
            observation: Observation::from_array([v[15], v[16], v[17], v[18], v[19], v[20]]),
            reward: v[21],
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub rows: usize,
    /// First row whose state differs from the re-simulation.
    pub first_mismatch: Option<usize>,
}

/// Re-flies the logged actions from the same seed and compares every state.
pub fn replay(scenario: &Arc<ScenarioConfig>, seed: u64, rows: &[TrajectoryRow]) -> Result<ReplayReport, EvalError> {
    let actions: Vec<Action> = rows.iter().map(|r| r.action).collect();
    let mut ctl = ScriptedController::new(actions);
    let outcome = run_episode(&mut ctl, scenario, seed, true)?;
    let sim = outcome.trajectory.unwrap_or_default();
    let mismatch = (0..rows.len().max(sim.len())).find(|&i| match (rows.get(i), sim.get(i)) {
        (Some(a), Some(b)) => a.state != b.state || a.t != b.t,
        _ => true,
    });
    Ok(ReplayReport {
        rows: rows.len(),
        first_mismatch: mismatch,
    })
}
