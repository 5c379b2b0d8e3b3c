//! `glidesim`: trim reports, single flights, Monte-Carlo campaigns and replay
//! from TOML scenario files.
//!
//! Exit status is 0 on success, 1 on a runtime failure (bad scenario, no trim,
//! replay mismatch, failed episode) and 2 on a usage error.

mod external;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use glider_core::config::load_scenario;
use glider_core::dynamics::trim_longitudinal;
use glider_core::eval::{
    format_stats, read_trajectory_csv, replay, run_campaign, run_episode, write_scatter_csv, write_trajectory_csv,
    Controller, EpisodeOutcome, EvalError, Execution, ZeroController, DEFAULT_CAMPAIGN_SIZE,
};
use glider_core::{baseline::ClassicController, Observation, ScenarioConfig};

use crate::external::ExternalController;

#[derive(Parser, Debug)]
#[command(name = "glidesim", version, about = "Gliding projectile simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the trimmed glide of the scenario's airframe.
    Trim(ScenarioArg),
    /// Fly one episode and print a summary.
    Fly(FlyArgs),
    /// Run a seeded Monte-Carlo campaign and print dispersion statistics.
    Campaign(CampaignArgs),
    /// Re-fly a recorded trajectory and check it reproduces bit for bit.
    Replay(ReplayArgs),
    /// Parse and check a scenario file without flying it.
    ValidateConfig(ScenarioArg),
}

#[derive(Args, Debug)]
struct ScenarioArg {
    /// Scenario TOML file; the built-in defaults when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ControllerName {
    Pid,
    External,
    ScriptedZero,
}

#[derive(Args, Debug)]
struct FlyArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    #[arg(long, value_enum, default_value = "pid")]
    controller: ControllerName,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Log every step to the `--out` CSV.
    #[arg(long, requires = "out")]
    record: bool,
    /// Trajectory CSV path.
    #[arg(long, requires = "record")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CampaignArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    #[arg(long, value_enum, default_value = "pid")]
    controller: ControllerName,
    /// Seed of the first episode; episode k uses seed + k.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_CAMPAIGN_SIZE as u64, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// Worker threads; 0 uses every core, 1 runs serially.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Impact scatter CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    /// Seed the trajectory was flown with.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trajectory CSV written by `fly --record`.
    #[arg(long)]
    input: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn runtime(message: impl ToString) -> Self {
        Self { code: 1, message: message.to_string() }
    }

    fn usage(message: impl ToString) -> Self {
        Self { code: 2, message: message.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Trim(a) => cmd_trim(&a),
        Command::Fly(a) => cmd_fly(&a),
        Command::Campaign(a) => cmd_campaign(&a),
        Command::Replay(a) => cmd_replay(&a),
        Command::ValidateConfig(a) => cmd_validate(&a),
    }
}

fn scenario(arg: &ScenarioArg) -> Result<Arc<ScenarioConfig>, Failure> {
    let cfg = match &arg.scenario {
        Some(path) => load_scenario(path).map_err(Failure::runtime)?,
        None => ScenarioConfig::default(),
    };
    cfg.validate().map_err(Failure::runtime)?;
    Ok(Arc::new(cfg))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))
}

fn cmd_trim(arg: &ScenarioArg) -> Result<(), Failure> {
    let cfg = scenario(arg)?;
    let t = trim_longitudinal(&cfg.glider, cfg.rho, cfg.gravity).map_err(Failure::runtime)?;
    println!("airspeed = {:.6}", t.airspeed);
    println!("alpha_deg = {:.6}", t.alpha.to_degrees());
    println!("pitch_deg = {:.6}", t.pitch.to_degrees());
    println!("glide_angle_deg = {:.6}", t.gamma.to_degrees());
    println!("force_residual = {:e}", t.force_residual);
    println!("moment_residual = {:e}", t.moment_residual);
    Ok(())
}

/// Remembers the first observation handed to the wrapped controller.
struct FirstObservation<'a> {
    inner: &'a mut dyn Controller,
    first: Option<Observation>,
}

impl Controller for FirstObservation<'_> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn reset(&mut self) {
        self.first = None;
        self.inner.reset();
    }

    fn act(&mut self, obs: &Observation, dt: f64) -> Result<glider_core::Action, EvalError> {
        self.first.get_or_insert(*obs);
        self.inner.act(obs, dt)
    }

    fn feedback(&mut self, result: &glider_core::StepResult) -> Result<(), EvalError> {
        self.inner.feedback(result)
    }
}

fn summary(o: &EpisodeOutcome, controller: &str, first: Option<Observation>) -> String {
    let mut s = format!(
        "seed = {}\ncontroller = {controller}\ncause = {}\nduration = {:.2}\nsteps = {}\nmiss = {:.6}\nimpact_x = {:.6}\nimpact_y = {:.6}\ntotal_reward = {:.6}\n",
        o.seed,
        o.cause.as_str(),
        o.duration,
        o.steps,
        o.miss,
        o.impact_ned[0],
        o.impact_ned[1],
        o.total_reward,
    );
    if let Some(obs) = first {
        let parts: Vec<String> = obs.to_array().iter().map(|v| v.to_string()).collect();
        s.push_str(&format!("first_obs = {}\n", parts.join(",")));
    }
    s
}

fn cmd_fly(a: &FlyArgs) -> Result<(), Failure> {
    let cfg = scenario(&a.scenario)?;
    let stdin = io::stdin();
    let mut pid;
    let mut zero = ZeroController;
    let mut ext;
    let inner: &mut dyn Controller = match a.controller {
        ControllerName::Pid => {
            pid = ClassicController::new(cfg.gains);
            &mut pid
        }
        ControllerName::ScriptedZero => &mut zero,
        ControllerName::External => {
            ext = ExternalController::new(stdin.lock(), io::stdout());
            &mut ext
        }
    };
    let mut ctl = FirstObservation { inner, first: None };
    let outcome = run_episode(&mut ctl, &cfg, a.seed, a.record).map_err(Failure::runtime)?;
    let text = summary(&outcome, ctl.name(), ctl.first);

    if let (Some(path), Some(rows)) = (&a.out, &outcome.trajectory) {
        let mut w = create(path)?;
        write_trajectory_csv(rows, &mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))?;
    }
    // stdout carries the protocol in external mode
    if a.controller == ControllerName::External {
        eprint!("{text}");
    } else {
        print!("{text}");
    }
    Ok(())
}

fn cmd_campaign(a: &CampaignArgs) -> Result<(), Failure> {
    let cfg = scenario(&a.scenario)?;
    let n = a.n as usize;
    let exec = Execution::from_workers(a.workers);
    let campaign = match a.controller {
        ControllerName::Pid => {
            let gains = cfg.gains;
            run_campaign(move || ClassicController::new(gains), &cfg, n, a.seed, exec)
        }
        ControllerName::ScriptedZero => run_campaign(|| ZeroController, &cfg, n, a.seed, exec),
        ControllerName::External => {
            return Err(Failure::usage("campaigns need an in-process controller (pid or scripted-zero)"))
        }
    };
    let campaign = campaign.map_err(Failure::runtime)?;
    if let Some(path) = &a.out {
        let mut w = create(path)?;
        write_scatter_csv(&campaign.outcomes, &mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))?;
    }
    print!("{}", format_stats(&campaign.stats));
    Ok(())
}

fn cmd_replay(a: &ReplayArgs) -> Result<(), Failure> {
    let cfg = scenario(&a.scenario)?;
    let file = File::open(&a.input).map_err(|e| Failure::runtime(format!("{}: {e}", a.input.display())))?;
    let rows = read_trajectory_csv(BufReader::new(file))
        .map_err(|e| Failure::runtime(format!("{}: {e}", a.input.display())))?;
    let report = replay(&cfg, a.seed, &rows).map_err(Failure::runtime)?;
    println!("rows = {}", report.rows);
    match report.first_mismatch {
        None => {
            println!("identical = true");
            Ok(())
        }
        Some(i) => {
            println!("identical = false");
            println!("first_mismatch = {i}");
            Err(Failure::runtime(format!("replay diverges at row {i}")))
        }
    }
}

fn cmd_validate(arg: &ScenarioArg) -> Result<(), Failure> {
    let Some(path) = &arg.scenario else {
        return Err(Failure::usage("validate-config needs --scenario"));
    };
    let cfg = load_scenario(path).map_err(Failure::runtime)?;
    cfg.validate().map_err(Failure::runtime)?;
    println!("ok: {}", path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn n_is_campaign_only() {
        assert!(Cli::try_parse_from(["glidesim", "fly", "--n", "3"]).is_err());
        assert!(Cli::try_parse_from(["glidesim", "campaign", "--n", "0"]).is_err());
        assert!(Cli::try_parse_from(["glidesim", "campaign", "--n", "3"]).is_ok());
    }

    #[test]
    fn record_and_out_go_together() {
        assert!(Cli::try_parse_from(["glidesim", "fly", "--record"]).is_err());
        assert!(Cli::try_parse_from(["glidesim", "fly", "--out", "x.csv"]).is_err());
        assert!(Cli::try_parse_from(["glidesim", "fly", "--record", "--out", "x.csv"]).is_ok());
    }

    #[test]
    fn summary_layout() {
        let o = EpisodeOutcome {
            seed: 4,
            cause: glider_core::eval::EpisodeEnd::Impact,
            impact_ned: [0.5, -0.25],
            miss: 0.5f64.hypot(0.25),
            duration: 7.0,
            steps: 700,
            total_reward: -3.0,
            trajectory: None,
        };
        let s = summary(&o, "pid", None);
        assert!(s.starts_with("seed = 4\ncontroller = pid\ncause = impact\n"));
        assert!(s.contains("impact_y = -0.250000\n"));
        assert!(!s.contains("first_obs"));
    }
}
