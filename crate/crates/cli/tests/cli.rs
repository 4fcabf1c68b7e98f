use std::path::Path;
use std::process::{Command, Output};

use wdm_vlc::scenario::TrendResult;

fn wdm_vlc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wdm-vlc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("WDM_VLC_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn channel_writes_gains() {
    let dir = tempfile::tempdir().unwrap();
    let out = wdm_vlc(&["channel", "--user", "2,4", "--user", "1,1"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir.path().join("gains.csv"));
    assert!(csv.starts_with("user,h_0,h_1"));
    assert_eq!(csv.lines().count(), 3);
    let json: serde_json::Value = serde_json::from_str(&read(&dir.path().join("gains.json"))).unwrap();
    assert_eq!(json["gains"]["n_users"], 2);
    assert_eq!(json["pairs"].as_array().unwrap().len(), 64);
    let pairs = read(&dir.path().join("pairs.csv"));
    assert!(pairs.starts_with("user,luminaire,wavelength,signal_sq"));
    assert_eq!(pairs.lines().count(), 65);
}

#[test]
fn allocate_from_users_file_with_lp() {
    let dir = tempfile::tempdir().unwrap();
    let users = dir.path().join("users.json");
    std::fs::write(&users, r#"[{"x": 1.0, "y": 1.0}, {"x": 3.0, "y": 7.0}, {"x": 2.0, "y": 4.0}]"#).unwrap();
    let out = wdm_vlc(
        &["allocate", "--users", users.to_str().unwrap(), "--preset", "calibrated", "--write-lp"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&read(&dir.path().join("allocation.json"))).unwrap();
    assert_eq!(doc["assignment"].as_array().unwrap().len(), 3);
    assert_eq!(doc["links"].as_array().unwrap().len(), 3);
    assert!(doc["throughput_bps"].as_f64().unwrap() > 0.0);
    assert_eq!(read(&dir.path().join("links.csv")).lines().count(), 4);
    assert!(read(&dir.path().join("model.lp")).starts_with("Maximize"));
}

#[test]
fn allocate_stored_instance() {
    let dir = tempfile::tempdir().unwrap();
    let room = wdm_vlc::RoomConfig::default();
    let users = [wdm_vlc::UserPosition::at(1.0, 2.0), wdm_vlc::UserPosition::at(3.0, 6.0)];
    let inst =
        wdm_vlc::allocator::build_instance(&room, &users, &wdm_vlc::ReceiverModel::default()).unwrap();
    let path = dir.path().join("inst.json");
    std::fs::write(&path, wdm_vlc::io::to_json(&inst).unwrap()).unwrap();
    let out = wdm_vlc(&["allocate", "--instance", path.to_str().unwrap(), "--format", "json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&read(&dir.path().join("allocation.json"))).unwrap();
    assert!(doc["links"].is_null());
    assert!(!dir.path().join("links.csv").exists());
}

#[test]
fn simulate_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = wdm_vlc(&["simulate", "--counts", "1-3", "--trials", "2", "--seed", "5", "-v"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("throughput_gbps"));
    for f in ["trend.csv", "summary.csv", "trend.json", "throughput.dat", "sinr.dat", "sinr_served.dat"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let trend: TrendResult = serde_json::from_str(&read(&dir.path().join("trend.json"))).unwrap();
    assert_eq!(trend.master_seed, 5);
    assert_eq!(trend.points.len(), 3);
    let rows = wdm_vlc::io::read_trend_csv(std::fs::File::open(dir.path().join("trend.csv")).unwrap()).unwrap();
    assert_eq!(rows, wdm_vlc::io::trend_rows(&trend));
    assert_eq!(read(&dir.path().join("throughput.dat")).lines().count(), 4);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_wdm-vlc"))
        .args(["channel", "--user", "2,4", "--format", "csv"])
        .env("WDM_VLC_OUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("gains.csv").is_file());
    assert!(!dir.path().join("gains.json").exists());
}

#[test]
fn config_file_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"scenario": {"user_counts": [2], "trials_per_point": 1, "seed": 3, "allocator_mode": "greedy"}}"#).unwrap();
    let out = wdm_vlc(&["simulate", "--config", cfg.to_str().unwrap(), "--format", "json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trend: TrendResult = serde_json::from_str(&read(&dir.path().join("trend.json"))).unwrap();
    assert_eq!(trend.master_seed, 3);
    assert_eq!(trend.points[0].trials.len(), 1);
    assert_eq!(trend.allocator_mode.name(), "greedy");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad_cfg = dir.path().join("bad.json");
    std::fs::write(&bad_cfg, r#"{"room": {"width": -4}}"#).unwrap();
    let code = |args: &[&str], out: &Path| wdm_vlc(args, out).status.code().unwrap();

    assert_eq!(code(&["simulate", "--config", bad_cfg.to_str().unwrap()], dir.path()), 2);
    assert_eq!(code(&["channel", "--user", "9,1"], dir.path()), 2);
    assert_eq!(code(&["channel"], dir.path()), 2);
    assert_eq!(code(&["simulate", "--mode", "psychic"], dir.path()), 2);
    assert_eq!(code(&["allocate", "--random-users", "33"], dir.path()), 3);
    assert_eq!(code(&["simulate", "--counts", "40", "--trials", "1"], dir.path()), 3);
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&["simulate", "--config", missing.to_str().unwrap()], dir.path()), 4);
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    assert_eq!(code(&["channel", "--user", "1,1"], &blocker.join("sub")), 4);
}
