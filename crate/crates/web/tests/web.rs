use ocuflow_web::{cavity, eye, flow_estimate};

fn stat(s: &ocuflow_web::Solution, field: &str) -> f64 {
    s.stats.iter().find(|r| r.field == field).map(|r| r.max).unwrap()
}

#[test]
fn flow_estimate_scales_linearly() {
    let a = flow_estimate(1.0).unwrap();
    let b = flow_estimate(3.0).unwrap();
    assert!((b.velocity - 3.0 * a.velocity).abs() < 1e-18);
    assert!((a.velocity - 1.98e-4).abs() < 1e-12);
    assert!(flow_estimate(-0.5).is_err());
}

#[test]
fn cavity_flows_only_when_gravity_is_across_the_heating() {
    let standing = cavity(6, 3.0, 3.0, 1.0, "standing").unwrap();
    assert!(standing.converged);
    assert!(stat(&standing, "velocity") > 1e-5);
    assert_eq!(standing.gravity, [0.0, -9.81, 0.0]);
    // Gravity along the temperature gradient is balanced by pressure in the
    // continuous problem. The linear pressure cannot match the quadratic
    // potential exactly, so a small spurious flow remains.
    let supine = cavity(6, 3.0, 3.0, 1.0, "supine").unwrap();
    assert!(stat(&supine, "velocity") < 1e-2 * stat(&standing, "velocity"));
    assert_eq!(supine.vertices.len(), supine.temperature.len());
    assert_eq!(supine.vertices.len(), supine.velocity.len());
    assert!(supine.triangles.iter().flatten().all(|&v| v < supine.vertices.len()));
}

#[test]
fn invalid_inputs_are_reported_as_messages() {
    assert!(cavity(0, 3.0, 3.0, 1.0, "standing").unwrap_err().contains("divisions"));
    assert!(cavity(4, 3.0, 3.0, 1.0, "upside-down").unwrap_err().contains("upside-down"));
    assert!(eye(294.0, "floating").is_err());
}

#[test]
fn eye_solution_is_warmest_inside() {
    let s = eye(294.0, "standing").unwrap();
    assert!(s.converged);
    let t_max = s.temperature.iter().cloned().fold(f64::MIN, f64::max);
    let t_min = s.temperature.iter().cloned().fold(f64::MAX, f64::min);
    assert!(t_min > 294.0 && t_max < 310.15 + 1e-9, "{t_min} {t_max}");
    let p = s.stats.iter().find(|r| r.field == "pressure").unwrap();
    assert!((p.mean - 15.5 * 133.322387415).abs() < 1e-6);
}
