use std::sync::Arc;

use glider_core::baseline::ClassicController;
use glider_core::eval::{
    campaign_stats, read_trajectory_csv, replay, run_campaign, run_episode, write_scatter_csv, write_trajectory_csv,
    EpisodeEnd, Execution, ScriptedController, ZeroController,
};
use glider_core::{Action, ScenarioConfig};

fn calm() -> Arc<ScenarioConfig> {
    Arc::new(ScenarioConfig::default())
}

#[test]
fn pid_episode_hits_near_target() {
    let cfg = calm();
    let mut c = ClassicController::new(cfg.gains);
    let o = run_episode(&mut c, &cfg, 3, false).unwrap();
    assert_eq!(o.cause, EpisodeEnd::Impact);
    assert!(o.miss < 2.0, "{o:?}");
    assert_eq!(o.miss, o.impact_ned[0].hypot(o.impact_ned[1]));
    assert!(o.duration < cfg.max_duration);
}

#[test]
fn recorded_rows_match_duration() {
    let cfg = calm();
    let mut c = ClassicController::new(cfg.gains);
    let o = run_episode(&mut c, &cfg, 4, true).unwrap();
    let rows = o.trajectory.unwrap();
    assert_eq!(rows.len() as u64, o.steps + 1);
    assert_eq!(rows.len(), (o.duration / cfg.dt).round() as usize + 1);
    assert_eq!(rows[0].t, 0.0);
    assert_eq!(rows[0].reward, 0.0);
}

#[test]
fn csv_replay_is_bit_identical() {
    let cfg = calm();
    let mut c = ClassicController::new(cfg.gains);
    let o = run_episode(&mut c, &cfg, 9, true).unwrap();
    let mut buf = Vec::new();
    write_trajectory_csv(o.trajectory.as_ref().unwrap(), &mut buf).unwrap();
    let rows = read_trajectory_csv(buf.as_slice()).unwrap();
    assert_eq!(&rows, o.trajectory.as_ref().unwrap());
    let report = replay(&cfg, 9, &rows).unwrap();
    assert_eq!(report.first_mismatch, None);

    let mut tampered = rows.clone();
    tampered[10].action = Action::new(1.0, 1.0);
    assert!(replay(&cfg, 9, &tampered).unwrap().first_mismatch.is_some());
}

#[test]
fn scripted_actions_reproduce_pid_run() {
    let cfg = calm();
    let mut c = ClassicController::new(cfg.gains);
    let o = run_episode(&mut c, &cfg, 12, true).unwrap();
    let actions = o.trajectory.as_ref().unwrap().iter().map(|r| r.action).collect();
    let again = run_episode(&mut ScriptedController::new(actions), &cfg, 12, true).unwrap();
    assert_eq!(again.impact_ned, o.impact_ned);
    assert_eq!(again.trajectory.unwrap().len(), o.trajectory.unwrap().len());
}

#[test]
fn zero_controller_episode_ends() {
    let cfg = calm();
    let o = run_episode(&mut ZeroController, &cfg, 0, false).unwrap();
    assert!(o.duration <= cfg.max_duration);
    if o.cause != EpisodeEnd::Impact {
        assert!(o.miss.is_infinite());
    }
}

#[test]
fn campaign_is_worker_count_independent() {
    let cfg = calm();
    let g = cfg.gains;
    let a = run_campaign(|| ClassicController::new(g), &cfg, 12, 500, Execution::Sequential).unwrap();
    let b = run_campaign(|| ClassicController::new(g), &cfg, 12, 500, Execution::Parallel { workers: 3 }).unwrap();
    assert_eq!(a, b);
    let seeds: Vec<u64> = a.outcomes.iter().map(|o| o.seed).collect();
    assert_eq!(seeds, (500..512).collect::<Vec<_>>());
    let (mut x, mut y) = (Vec::new(), Vec::new());
    write_scatter_csv(&a.outcomes, &mut x).unwrap();
    write_scatter_csv(&b.outcomes, &mut y).unwrap();
    assert_eq!(x, y);
}

#[test]
fn campaign_stats_match_outcomes() {
    let cfg = calm();
    let g = cfg.gains;
    let c = run_campaign(|| ClassicController::new(g), &cfg, 10, 0, Execution::Sequential).unwrap();
    assert_eq!(campaign_stats(&c.outcomes).unwrap(), c.stats);
    let c50 = c.stats.cep50;
    assert!(c50 <= c.stats.cep90);
    let inside = c.outcomes.iter().filter(|o| o.miss <= c50).count();
    assert!(inside * 2 >= c.stats.impacts);
}

#[test]
fn empty_campaign_is_rejected() {
    let cfg = calm();
    assert!(run_campaign(|| ZeroController, &cfg, 0, 0, Execution::Sequential).is_err());
}
