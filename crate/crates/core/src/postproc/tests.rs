use std::path::Path;
use std::sync::Arc;

use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::mesh::{generate_rect, Mesh, RectLabels};

fn square(n: usize) -> Arc<Mesh> {
    Arc::new(generate_rect(n, n, [1.0, 1.0], &RectLabels::default()).unwrap())
}

fn velocity(mesh: &Arc<Mesh>, f: impl Fn(f64, f64) -> [f64; 2]) -> (FunctionSpace, Vec<f64>) {
    let space = FunctionSpace::new(mesh.clone(), 2, 2).unwrap();
    let u = space.interpolate(|x, out| {
        let v = f(x[0], x[1]);
        out[0] = v[0];
        out[1] = v[1];
    });
    (space, u)
}

fn bottom(mesh: &Mesh) -> Vec<usize> {
    wall_facets(mesh, &["bottom"]).unwrap()
}

#[test]
fn couette_flow_has_uniform_stress() {
    let mesh = square(4);
    let (space, u) = velocity(&mesh, |_, y| [y, 0.0]);
    let w = wall_shear_stress(&space, &u, &bottom(&mesh), 1e-3, WssOptions::default()).unwrap();
    for t in w.raw.iter().chain(&w.projected) {
        assert_relative_eq!(t[0], -1e-3, epsilon = 1e-15);
        assert!(t[1].abs() < 1e-15);
    }
    for m in &w.magnitude {
        assert_relative_eq!(*m, 1e-3, epsilon = 1e-15);
    }
    assert_relative_eq!(w.mean_magnitude(None).unwrap(), 1e-3, epsilon = 1e-15);
    assert!(w.projection_residual <= 1e-10);
}

#[test]
fn fluid_at_rest_has_no_stress() {
    let mesh = square(3);
    let (space, u) = velocity(&mesh, |_, _| [0.0, 0.0]);
    let w = wall_shear_stress(&space, &u, &bottom(&mesh), 1e-3, WssOptions::default()).unwrap();
    assert_eq!(w.max_magnitude(), 0.0);
    assert!(w.magnitude.iter().all(|&m| m == 0.0));
}

#[test]
fn rigid_rotation_is_not_stress_free_under_the_gradient_formula() {
    // grad u = [[0, -1], [1, 0]] and n = (0, -1), so (grad u) n = (1, 0).
    let mesh = square(3);
    let (space, u) = velocity(&mesh, |x, y| [-y, x]);
    let w = wall_shear_stress(&space, &u, &bottom(&mesh), 1e-3, WssOptions::default()).unwrap();
    for t in &w.projected {
        assert_relative_eq!(t[0], 1e-3, epsilon = 1e-14);
        assert!(t[1].abs() < 1e-14);
    }
    assert_relative_eq!(w.max_magnitude(), 1e-3, epsilon = 1e-14);
}

#[test]
fn tangential_flag_removes_normal_traction() {
    let mesh = square(3);
    let (space, u) = velocity(&mesh, |_, y| [0.5 * y, 2.0 * y]);
    let full = wall_shear_stress(&space, &u, &bottom(&mesh), 1.0, WssOptions::default()).unwrap();
    let tang = wall_shear_stress(&space, &u, &bottom(&mesh), 1.0, WssOptions { tangential: true }).unwrap();
    for (a, b) in full.projected.iter().zip(&tang.projected) {
        assert_relative_eq!(a[1], -2.0, epsilon = 1e-12);
        assert!(b[1].abs() < 1e-12);
        assert_relative_eq!(a[0], b[0], epsilon = 1e-12);
    }
}

#[test]
fn missing_wall_label_is_reported() {
    let mesh = square(2);
    assert!(matches!(wall_facets(&mesh, &["cornea"]), Err(Error::UnknownLabel(_))));
}

#[test]
fn projection_is_the_best_continuous_approximation() {
    let mesh = square(6);
    let (space, u) = velocity(&mesh, |x, y| [(3.0 * x).sin() * y * y + x * y, (2.0 * x).cos() * y]);
    let facets = wall_facets(&mesh, &["bottom", "left", "top"]).unwrap();
    let w = wall_shear_stress(&space, &u, &facets, 1.0, WssOptions::default()).unwrap();
    assert!(w.projection_residual <= 1e-10);
    let best = w.distance_to_raw(&w.projected).unwrap();
    assert!(best > 0.0, "corners make the raw field discontinuous");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..5 {
        let cand: Vec<[f64; 3]> = w
            .projected
            .iter()
            .map(|p| {
                let s = if k < 3 { 1e-2 } else { 1.0 };
                [p[0] + s * rng.random_range(-1.0..1.0), p[1] + s * rng.random_range(-1.0..1.0), 0.0]
            })
            .collect();
        assert!(best <= w.distance_to_raw(&cand).unwrap());
    }
}

#[test]
fn stress_error_shrinks_under_refinement() {
    // A curved shear profile: u_x = exp(y) - 1 gives |tau| = mu at y = 0.
    let mut errors = Vec::new();
    for n in [2, 4, 8, 16] {
        let mesh = square(n);
        let (space, u) = velocity(&mesh, |_, y| [y.exp() - 1.0, 0.0]);
        let w = wall_shear_stress(&space, &u, &bottom(&mesh), 1e-3, WssOptions::default()).unwrap();
        let err = w.projected.iter().map(|t| ((t[0] * t[0] + t[1] * t[1]).sqrt() - 1e-3).abs()).fold(0.0, f64::max);
        errors.push(err);
    }
    assert!(errors.windows(2).all(|e| e[1] < e[0]), "{errors:?}");
}

#[test]
fn statistics_of_simple_fields() {
    let mesh = square(4);
    let p1 = FunctionSpace::new(mesh.clone(), 1, 1).unwrap();
    let c = vec![3.5; p1.n_dofs()];
    let s = field_statistics(&p1, &c, &Region::All, "T", "K").unwrap();
    assert_relative_eq!(s.min, 3.5);
    assert_relative_eq!(s.mean, 3.5, epsilon = 1e-14);
    assert_relative_eq!(s.max, 3.5);

    let x = p1.interpolate(|p, out| out[0] = p[0]);
    let s = field_statistics(&p1, &x, &Region::Subdomain("domain".into()), "x", "m").unwrap();
    assert_eq!((s.min, s.max), (0.0, 1.0));
    assert_relative_eq!(s.mean, 0.5, epsilon = 1e-14);

    let s = field_statistics(&p1, &x, &Region::Boundary("top".into()), "x", "m").unwrap();
    assert_relative_eq!(s.mean, 0.5, epsilon = 1e-14);
    let s = field_statistics(&p1, &x, &Region::Boundary("right".into()), "x", "m").unwrap();
    assert_eq!((s.min, s.mean, s.max), (1.0, 1.0, 1.0));
}

#[test]
fn statistics_of_vector_magnitude() {
    let mesh = square(4);
    let (space, u) = velocity(&mesh, |_, _| [3.0, -4.0]);
    let s = field_statistics(&space, &u, &Region::All, "u", "m/s").unwrap();
    assert_relative_eq!(s.max, 5.0);
    assert_relative_eq!(s.mean, 5.0, epsilon = 1e-12);
    assert!(s.min <= s.mean && s.mean <= s.max + 1e-12);
}

#[test]
fn statistics_reject_unknown_region() {
    let mesh = square(2);
    let p1 = FunctionSpace::new(mesh, 1, 1).unwrap();
    let c = vec![0.0; p1.n_dofs()];
    assert!(field_statistics(&p1, &c, &Region::Subdomain("lens".into()), "T", "K").is_err());
}

#[test]
fn pressure_shift_to_physiological_level() {
    let mesh = square(5);
    let p1 = FunctionSpace::new(mesh, 1, 1).unwrap();
    let p = p1.interpolate(|x, out| out[0] = x[0] - 0.5);
    let shifted = normalize_pressure(&p1, &p, PressureTarget::MmHg(15.5)).unwrap();
    let s = field_statistics(&p1, &shifted, &Region::All, "p", "Pa").unwrap();
    assert_relative_eq!(s.mean, 15.5 * 133.322387415, epsilon = 1e-9);
    assert_relative_eq!(s.mean, 2066.497, epsilon = 1e-3);
    assert_relative_eq!(s.max - s.min, 1.0, epsilon = 1e-9);

    let same = normalize_pressure(&p1, &p, PressureTarget::Pascal(0.0)).unwrap();
    for (a, b) in same.iter().zip(&p) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn slot_flow_estimates() {
    let (u, tau) = slot_flow_estimate(2.03).unwrap();
    assert_relative_eq!(u, 4.02e-4, epsilon = 1e-6);
    assert_relative_eq!(tau, 13.6e-4, epsilon = 1e-12);
    assert_eq!(slot_flow_estimate(0.0).unwrap(), (0.0, 0.0));
    assert!(slot_flow_estimate(-1.0).is_err());
    assert!(slot_flow_estimate(f64::NAN).is_err());
}

fn vtu_attr(text: &str, attr: &str) -> usize {
    let start = text.find(&format!("{attr}=\"")).unwrap() + attr.len() + 2;
    let end = start + text[start..].find('"').unwrap();
    text[start..end].parse().unwrap()
}

#[test]
fn vtu_round_trip_counts_and_values() {
    let mesh = square(3);
    let p1 = FunctionSpace::new(mesh.clone(), 1, 1).unwrap();
    let t = vec![310.0; p1.n_dofs()];
    let (space, u) = velocity(&mesh, |x, y| [x, y]);
    let data = VtuData::default()
        .point("temperature", 1, vertex_values(&p1, &t).unwrap())
        .point("velocity", 2, vertex_values(&space, &u).unwrap())
        .cell("ones", 1, vec![1.0; mesh.n_cells()]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.vtu");
    write_vtu(&mesh, &data, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(vtu_attr(&text, "NumberOfPoints"), mesh.n_vertices());
    assert_eq!(vtu_attr(&text, "NumberOfCells"), mesh.n_cells());

    let block = text.split("Name=\"temperature\"").nth(1).unwrap();
    let body = &block[block.find('>').unwrap() + 1..block.find("</DataArray>").unwrap()];
    let vals: Vec<f64> = body.split_whitespace().map(|v| v.parse().unwrap()).collect();
    assert_eq!(vals.len(), mesh.n_vertices());
    assert!(vals.iter().all(|&v| v == 310.0));

    let bad = VtuData::default().point("short", 1, vec![0.0; 2]);
    assert!(matches!(write_vtu(&mesh, &bad, &path), Err(Error::DimensionMismatch(_))));
}

#[test]
fn vtu_write_failure_names_the_path() {
    let mesh = square(1);
    let path = Path::new("/nonexistent-dir/out.vtu");
    let err = write_vtu(&mesh, &VtuData::default(), path).unwrap_err();
    assert!(err.to_string().contains("nonexistent-dir"));
}

#[test]
fn stats_csv_has_one_row_per_record() {
    let rows: Vec<RegionStats> = ["standing", "prone", "supine"]
        .iter()
        .map(|p| RegionStats {
            region: p.to_string(),
            field: "u".into(),
            unit: "m/s".into(),
            min: 0.0,
            mean: 0.5,
            max: 1.0,
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stats.csv");
    write_records(&path, &rows).unwrap();
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["region", "field", "unit", "min", "mean", "max"]);
    let regions: Vec<String> = rdr.records().map(|r| r.unwrap()[0].to_string()).collect();
    assert_eq!(regions, ["standing", "prone", "supine"]);
}
