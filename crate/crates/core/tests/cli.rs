mod common;

use common::{body, cli, code, json};

#[test]
fn simulate_thermostat_reaches_heater_switch() {
    let o = cli(&["simulate", "thermostat", "--x0", "1,0.6"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let arc = &v["arcs"][0];
    assert!(arc["sup_j"].as_u64().unwrap() >= 1);
    assert_eq!(v["x0"], serde_json::json!([1.0, 0.6]));
}

#[test]
fn simulate_bouncing_ball_is_zeno() {
    let o = cli(&["simulate", "bouncing-ball", "--x0", "0,2"]);
    assert_eq!(code(&o), 0);
    let text = body(&o);
    assert!(text.contains("ZenoLimit"), "{text}");
}

#[test]
fn bad_initial_state_exits_3() {
    assert_eq!(code(&cli(&["simulate", "timer", "--x0", "-1"])), 3);
    assert_eq!(code(&cli(&["simulate", "bouncing-ball", "--x0", "-1,0"])), 3);
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(code(&cli(&["simulate", "no-such-scenario"])), 2);
    assert_eq!(code(&cli(&["simulate", "timer", "--policy", "sideways"])), 2);
    assert_eq!(code(&cli(&["certify", "timer", "--theorem", "bogus"])), 2);
    assert_eq!(code(&cli(&["certify", "timer", "--theorem", "strong-fta"])), 2);
    assert_eq!(code(&cli(&["simulate", "timer", "--tmax", "-1"])), 2);
    assert_eq!(code(&cli(&["monitor", "cx-zeno"])), 2);
}

#[test]
fn certify_examples() {
    assert_eq!(code(&cli(&["certify", "bouncing-ball", "--theorem", "weak"])), 0);
    assert_eq!(code(&cli(&["certify", "thermostat", "--theorem", "strong-eci"])), 0);
    let o = cli(&["certify", "cx-zeno", "--theorem", "strong-eci", "--variant", "3d"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    let items = v["reports"][0]["items"].as_array().unwrap();
    let g = items.iter().find(|i| i["id"] == "3-G(S2)").expect("3d item");
    assert_eq!(g["verdict"], "fail");
    assert!(!g["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn print_config_and_env_overrides() {
    let o = cli(&["--print-config", "simulate", "timer"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout).to_string();
    assert!(text.contains("grid_res = 64"), "{text}");
    assert!(text.contains("dt = 0.001"));
    let o = std::process::Command::new(common::BIN)
        .args(["--print-config", "simulate", "timer"])
        .env("HYUNTIL_GRID_RES", "8")
        .env("HYUNTIL_POLICY", "jump-priority")
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&o.stdout).to_string();
    assert!(text.contains("grid_res = 8"), "{text}");
    assert!(text.contains("JumpPriority"), "{text}");
}

#[test]
fn out_dir_gets_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = cli(&["simulate", "timer", "--out", d]);
    assert_eq!(code(&o), 0);
    let report = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert_eq!(report, String::from_utf8_lossy(&o.stdout));
    let csv = std::fs::read_to_string(dir.path().join("arc_0.csv")).unwrap();
    assert!(csv.lines().count() > 2);
}

#[test]
fn toml_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("timer.toml");
    std::fs::write(
        &p,
        r#"
name = "my-timer"
coords = ["x"]
x0 = [0.25]
[system]
C = "x >= 0 & x <= 1"
F = ["1"]
D = "x >= 1"
G = ["0"]
[grid]
lo = [-0.5]
hi = [2.0]
[until]
P = "x >= 0.5 & x <= 1"
Q = "x >= 1"
mode = "weak"
barrier = "0.5 - x"
"#,
    )
    .unwrap();
    let ps = p.to_str().unwrap();
    assert_eq!(code(&cli(&["certify", ps])), 0);
    assert_eq!(code(&cli(&["monitor", ps])), 0);
    let o = cli(&["simulate", ps]);
    assert_eq!(json(&o)["x0"], serde_json::json!([0.25]));
}
