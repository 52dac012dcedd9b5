use sweep_core::scenario::{
    builtin_names, parse_scenario, parse_scenario_str, trajectory_csv, write_scenario,
    write_trajectory, CSV_TAIL,
};
use sweep_core::{builtin, simulate, Error};

#[test]
fn round_trip_every_builtin() {
    let dir = tempfile::tempdir().unwrap();
    for name in builtin_names() {
        let first = builtin(name).unwrap();
        let path = dir.path().join(format!("{name}.json"));
        write_scenario(&first, &path).unwrap();
        let second = parse_scenario(&path).unwrap();
        assert_eq!(first, second, "{name}");
        let path2 = dir.path().join(format!("{name}-2.json"));
        write_scenario(&second, &path2).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            std::fs::read_to_string(&path2).unwrap()
        );
    }
}

#[test]
fn sticking_fixture_contents() {
    let s = builtin("sticking-1d").unwrap();
    assert_eq!(s.dim(), 1);
    assert_eq!(s.q0()[0], 0.5);
    assert_eq!(s.spec.horizon, 1.0);
}

#[test]
fn malformed_files_are_parse_errors() {
    for text in ["{", r#"{"kind": "nope"}"#, r#"{"kind": "sticking-1d", "bogus": 1}"#] {
        assert!(matches!(parse_scenario_str(text), Err(Error::Parse(_))), "{text}");
    }
    let dir = tempfile::tempdir().unwrap();
    assert!(parse_scenario(dir.path().join("missing.json")).is_err());
}

#[test]
fn constant_trajectory_has_three_identical_rows() {
    let s = parse_scenario_str(
        r#"{"kind": "moving-half-line", "constraints": [], "horizon": 0.2, "q0": [0.25]}"#,
    )
    .unwrap();
    let traj = simulate(&s.problem(), 2).unwrap();
    let csv = trajectory_csv(&traj);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    let header: Vec<&str> = lines[0].split(',').collect();
    assert_eq!(header[..2], ["t", "q_1"]);
    assert_eq!(header[2..], CSV_TAIL);
    for row in &lines[1..] {
        assert_eq!(row.split(',').nth(1), Some("0.25"));
    }
}

#[test]
fn labyrinth_csv_ends_in_target() {
    let s = builtin("labyrinth").unwrap();
    let traj = simulate(&s.problem(), s.spec.output.n).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lab.csv");
    write_trajectory(&traj, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, trajectory_csv(&traj));
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    let target = s.spec.target.as_ref().unwrap();
    let d = ((last[1] - target.center[0]).powi(2) + (last[2] - target.center[1]).powi(2)).sqrt();
    assert!(d <= target.radius, "final distance {d}");
}
