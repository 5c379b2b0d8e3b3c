use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::sync::Arc;

use glider_core::config::load_scenario;
use glider_core::dynamics::trim_longitudinal;
use glider_core::eval::{read_trajectory_csv, write_trajectory_csv, SCATTER_HEADER, TRAJECTORY_HEADER};
use glider_core::Environment;

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(name: &str) -> String {
    repo().join("scenarios").join(name).display().to_string()
}

fn glidesim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glidesim")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Value of a `key = value` line.
fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")))
        .unwrap_or_else(|| panic!("no `{key}` in:\n{text}"))
}

fn num(text: &str, key: &str) -> f64 {
    field(text, key).parse().unwrap()
}

#[test]
fn trim_default_scenario() {
    let out = glidesim(&["trim", "--scenario", &scenario("calm.toml")]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(num(&text, "force_residual") < 1e-6);
    assert!(num(&text, "moment_residual") < 1e-6);

    let cfg = load_scenario(Path::new(&scenario("calm.toml"))).unwrap();
    let t = trim_longitudinal(&cfg.glider, cfg.rho, cfg.gravity).unwrap();
    assert_eq!(field(&text, "airspeed"), format!("{:.6}", t.airspeed));
    assert_eq!(field(&text, "glide_angle_deg"), format!("{:.6}", t.gamma.to_degrees()));
}

#[test]
fn trim_without_tail_fails() {
    let out = glidesim(&["trim", "--scenario", &scenario("zero_tail.toml")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no trim found"), "{}", stderr(&out));
}

#[test]
fn trim_malformed_names_key() {
    let bad = repo().join("crates/cli/tests/fixtures/bad/negative_dt.toml");
    let out = glidesim(&["trim", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("`dt`"));
}

#[test]
fn fly_is_deterministic() {
    let args = ["fly", "--scenario", &scenario("turbulence.toml"), "--seed", "21"];
    let a = glidesim(&args);
    let b = glidesim(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(field(&stdout(&a), "controller"), "pid");
}

#[test]
fn fly_first_observation_matches_engine_reset() {
    let out = glidesim(&["fly", "--seed", "77"]);
    assert!(out.status.success());
    let logged: Vec<f64> = field(&stdout(&out), "first_obs").split(',').map(|v| v.parse().unwrap()).collect();
    let mut env = Environment::new(Arc::new(Default::default())).unwrap();
    let (obs, _) = env.reset(77).unwrap();
    assert_eq!(logged, obs.to_array().to_vec());
}

#[test]
fn fly_record_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let out = glidesim(&["fly", "--seed", "5", "--record", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(TRAJECTORY_HEADER));
    let duration = num(&stdout(&out), "duration");
    assert_eq!(lines.count(), (duration / 0.01).round() as usize + 1);
}

#[test]
fn unknown_controller_is_usage_error() {
    let out = glidesim(&["fly", "--controller", "neural"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn n_outside_campaign_is_usage_error() {
    assert_eq!(glidesim(&["fly", "--n", "4"]).status.code(), Some(2));
    assert_eq!(glidesim(&["campaign", "--n", "0"]).status.code(), Some(2));
    assert_eq!(glidesim(&["campaign", "--n", "2", "--controller", "external"]).status.code(), Some(2));
    assert_eq!(glidesim(&["validate-config"]).status.code(), Some(2));
}

#[test]
fn external_controller_matches_scripted_zero() {
    let reference = glidesim(&["fly", "--controller", "scripted-zero", "--seed", "8"]);
    let steps: usize = field(&stdout(&reference), "steps").parse().unwrap();

    let mut child = Command::new(env!("CARGO_BIN_EXE_glidesim"))
        .args(["fly", "--controller", "external", "--seed", "8"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    let feeder = std::thread::spawn(move || {
        for _ in 0..steps {
            stdin.write_all(b"[0.0, 0.0]\n").unwrap();
        }
    });
    let out = child.wait_with_output().unwrap();
    feeder.join().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    let summary = stderr(&out);
    for key in ["cause", "duration", "steps", "miss", "total_reward", "first_obs"] {
        assert_eq!(field(&summary, key), field(&stdout(&reference), key), "{key}");
    }
    let protocol = stdout(&out);
    assert_eq!(protocol.lines().count(), steps + 1);
    assert!(protocol.lines().last().unwrap().contains("\"cause\":"));
}

#[test]
fn external_controller_fails_when_stream_ends() {
    let out = Command::new(env!("CARGO_BIN_EXE_glidesim"))
        .args(["fly", "--controller", "external"])
        .stdin(Stdio::null())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("closed"));
}

#[test]
fn campaign_worker_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.csv");
    let four = dir.path().join("four.csv");
    let a = glidesim(&["campaign", "--n", "10", "--workers", "1", "--out", one.to_str().unwrap()]);
    let b = glidesim(&["campaign", "--n", "10", "--workers", "4", "--out", four.to_str().unwrap()]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let csv = std::fs::read_to_string(&one).unwrap();
    assert_eq!(csv, std::fs::read_to_string(&four).unwrap());
    assert_eq!(csv.lines().next(), Some(SCATTER_HEADER));
    assert_eq!(csv.lines().count(), 11);
    assert_eq!(num(&stdout(&a), "n"), 10.0);
}

#[test]
fn crosswind_campaign_spreads_further() {
    let calm = glidesim(&["campaign", "--n", "20", "--scenario", &scenario("calm.toml")]);
    let wind = glidesim(&["campaign", "--n", "20", "--scenario", &scenario("east_wind.toml")]);
    let (calm, wind) = (stdout(&calm), stdout(&wind));
    assert!(num(&wind, "mmd") > num(&calm, "mmd"), "{calm}\n{wind}");
    assert!(num(&wind, "mean_y") > 0.0);
    assert!(num(&calm, "cep50") <= num(&calm, "cep90"));
}

#[test]
fn replay_round_trip_and_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let path = csv.to_str().unwrap();
    assert!(glidesim(&["fly", "--seed", "31", "--record", "--out", path]).status.success());

    let ok = glidesim(&["replay", "--seed", "31", "--input", path]);
    assert!(ok.status.success(), "{}", stderr(&ok));
    assert_eq!(field(&stdout(&ok), "identical"), "true");

    let wrong_seed = glidesim(&["replay", "--seed", "32", "--input", path]);
    assert_eq!(wrong_seed.status.code(), Some(1));
    assert_eq!(field(&stdout(&wrong_seed), "first_mismatch"), "0");

    let mut rows = read_trajectory_csv(std::fs::read(&csv).unwrap().as_slice()).unwrap();
    rows[40].action.delta_ail_n = -rows[40].action.delta_ail_n + 0.5;
    let mut buf = Vec::new();
    write_trajectory_csv(&rows, &mut buf).unwrap();
    std::fs::write(&csv, buf).unwrap();
    let tampered = glidesim(&["replay", "--seed", "31", "--input", path]);
    assert_eq!(tampered.status.code(), Some(1));
    assert_eq!(field(&stdout(&tampered), "first_mismatch"), "41");
}

#[test]
fn validate_accepts_shipped_scenarios() {
    let mut count = 0;
    for entry in std::fs::read_dir(repo().join("scenarios")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let out = glidesim(&["validate-config", "--scenario", path.to_str().unwrap()]);
            assert!(out.status.success(), "{}: {}", path.display(), stderr(&out));
            count += 1;
        }
    }
    assert!(count >= 4);
}

#[test]
fn validate_rejects_malformed_fixtures() {
    let dir = repo().join("crates/cli/tests/fixtures/bad");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let expect = text.lines().next().unwrap().strip_prefix("# expect: ").unwrap();
        let out = glidesim(&["validate-config", "--scenario", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(1), "{}", path.display());
        let err = stderr(&out);
        assert!(err.contains(expect), "{}: wanted {expect:?} in {err}", path.display());
        assert!(err.contains(path.file_name().unwrap().to_str().unwrap()) || err.contains("cannot read"));
        count += 1;
    }
    assert_eq!(count, 10);
}
