use std::process::{Command, Output};

fn sweep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sweep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const TWO_DISKS: &str = r#"{
  "kind": "two-disks",
  "horizon": 1.0,
  "q0": [0.0, 5.0],
  "constraints": [
    {"type": "disk_exclusion", "name": "left", "center": [-1.0, 0.0], "radius": 1.5},
    {"type": "disk_exclusion", "name": "right", "center": [1.0, 0.0], "radius": 1.5}
  ],
  "perturbation": {"type": "constant", "value": [0.0, -1.0]},
  "regularity": {"alpha": 1.0, "beta": 1.0, "big_m": 0.6666666666666667, "margin_c": 0.3, "gamma": 2.0}
}"#;

#[test]
fn simulate_sticking_to_stdout() {
    let o = sweep(&["simulate", "builtin:sticking-1d", "--n", "10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 12);
    assert!(lines[0].starts_with("t,q_1,n_active,lambda_sum"));
    let mid: Vec<&str> = lines[6].split(',').collect();
    assert_eq!(mid[0].parse::<f64>().unwrap(), 0.5);
    assert!(mid[1].parse::<f64>().unwrap().abs() < 1e-12);
    assert_eq!(mid[2], "1");
}

#[test]
fn simulate_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lab.csv");
    let o = sweep(&["simulate", "builtin:labyrinth", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("final state inside target: true"));
    assert!(std::fs::read_to_string(&path).unwrap().lines().count() > 1000);
}

#[test]
fn project_onto_tangent_half_plane() {
    let o = sweep(&["project", "builtin:disk-slide", "--at", "0", "--point=-0.5,0.1", "--base=-1,0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let point = text.lines().next().unwrap().strip_prefix("point ").unwrap();
    let p: Vec<f64> = point.split(',').map(|v| v.parse().unwrap()).collect();
    assert!((p[0] + 1.0).abs() < 1e-12 && (p[1] - 0.1).abs() < 1e-12, "{text}");
}

#[test]
fn analyze_reports_constants() {
    let o = sweep(&["analyze", "builtin:crowd", "--samples", "50"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("h_max"));
    assert!(text.contains("crowd N=4"));
    assert!(text.contains("observed gamma") && !text.contains("EXCEEDS"));
    assert!(!text.contains("BELOW delta"));
    let again = sweep(&["analyze", "builtin:crowd", "--samples", "50"]);
    assert_eq!(text, stdout(&again));
}

#[test]
fn converge_on_disk_slide() {
    let o = sweep(&["converge", "builtin:disk-slide", "--n0", "100", "--levels", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("order ")).unwrap();
    let order: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((0.8..=1.2).contains(&order), "{text}");
    let exact = sweep(&["converge", "builtin:sticking-1d", "--n0", "10", "--levels", "3"]);
    assert!(stdout(&exact).contains("order exact"));
}

#[test]
fn input_errors_exit_with_two() {
    assert_eq!(sweep(&["simulate", "builtin:nope"]).status.code(), Some(2));
    assert_eq!(sweep(&["simulate", "/no/such/file.json"]).status.code(), Some(2));
    assert_eq!(
        sweep(&["converge", "builtin:disk-slide", "--levels", "2"]).status.code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, TWO_DISKS.replace("[0.0, 5.0]", "[0.0, 0.5]")).unwrap();
    let o = sweep(&["simulate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("left"));
}

#[test]
fn empty_linearization_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two.json");
    std::fs::write(&path, TWO_DISKS).unwrap();
    let p = path.to_str().unwrap();
    assert!(sweep(&["simulate", p, "--n", "20"]).status.success());
    let o = sweep(&["project", p, "--at", "0", "--point", "0,0", "--base", "0,0"]);
    assert_eq!(o.status.code(), Some(3));
}
