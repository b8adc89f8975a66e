//! Acceptance suite. Every criterion prints one PASS/FAIL/SKIP line straight
//! to stdout (bypassing the harness capture) and asserts on its outcome.
//! Each criterion also renders its numbers as CSV; the determinism check
//! recomputes criteria 1 to 8 and compares those bytes.

use std::io::Write;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use ocuflow::forms::{Flow, PhysicalParams, Problem, ProblemSetup, Radiation, State, Variant};
use ocuflow::krylov::SolverTree;
use ocuflow::mesh::{generate_rect, RectLabels};
use ocuflow::newton::{newton_solve, NewtonConfig};
use ocuflow::postproc::{slot_flow_estimate, wall_facets, wall_shear_stress, WssOptions};
use ocuflow::scenario::study::{
    mms_convergence, posture_study, preconditioner_study, run, sweep_minimum, sweep_point, RunOptions,
};
use ocuflow::scenario::{make_cavity_scenario, make_eye_scenario, make_mms_scenario, MmsKind, Posture, ScenarioSpec};

struct Outcome {
    pass: bool,
    detail: String,
    csv: Vec<u8>,
}

fn report(id: &str, name: &str, o: &Outcome) {
    let tag = if o.pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[{tag}] criterion {id} ({name}): {}", o.detail);
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).unwrap();
    }
    w.into_inner().unwrap()
}

fn tree() -> SolverTree {
    SolverTree::schur_upper()
}

fn cfg() -> NewtonConfig {
    NewtonConfig::default()
}

// ---------------------------------------------------------------------------

fn c1_mms() -> Outcome {
    let spec = make_mms_scenario(4, MmsKind::Trig);
    let rows = mms_convergence(&spec, &[4, 8, 16, 32], &cfg(), &tree()).unwrap();
    let tail = &rows[2..];
    let min_rate = |f: fn(&ocuflow::scenario::study::MmsRow) -> Option<f64>| {
        tail.iter().map(|r| f(r).unwrap()).fold(f64::INFINITY, f64::min)
    };
    let (ru, rp, rt) = (min_rate(|r| r.rate_u), min_rate(|r| r.rate_p), min_rate(|r| r.rate_t));
    let monotone =
        rows.windows(2).all(|w| w[1].err_u < w[0].err_u && w[1].err_p < w[0].err_p && w[1].err_t < w[0].err_t);
    Outcome {
        pass: ru >= 2.7 && rp >= 1.7 && rt >= 1.7 && monotone && rows.iter().all(|r| r.converged),
        detail: format!("min orders over the last three levels u {ru:.3}, p {rp:.3}, T {rt:.3}; monotone {monotone}"),
        csv: csv_bytes(&rows),
    }
}

#[derive(Serialize)]
struct FdRow {
    sample: usize,
    relative_mismatch: f64,
}

fn c2_jacobian() -> Outcome {
    let sc = make_eye_scenario(1, PhysicalParams::default(), Posture::Standing, Variant::default()).build().unwrap();
    let pb = &sc.problem;
    let (nu, np, nt) = pb.sizes();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let theta = pb.scaling.temperature;
    let mut rows = Vec::new();
    for sample in 0..10 {
        let mut draw = |n: usize, s: f64, shift: f64| -> Vec<f64> {
            (0..n).map(|_| shift + s * rng.random_range(-1.0..1.0)).collect()
        };
        let state = State {
            u: draw(nu, 1e-4, 0.0),
            p: draw(np, pb.scaling.pressure, 0.0),
            t: draw(nt, theta, pb.params.t_ref),
        };
        let mut dir = draw(nu, 1e-4, 0.0);
        dir.extend(draw(np, pb.scaling.pressure, 0.0));
        dir.extend(draw(nt, theta, 0.0));
        let sys = pb.newton_system(&state, &state.t).unwrap();
        let mut jd = vec![0.0; dir.len()];
        sys.apply_blocks(&dir, &mut jd);
        let h = 1e-6;
        let rp = pb.residual_raw(&state.updated(h, &dir)).unwrap();
        let rm = pb.residual_raw(&state.updated(-h, &dir)).unwrap();
        let diff: Vec<f64> = rp.iter().zip(&rm).zip(&jd).map(|((a, b), j)| -(a - b) / (2.0 * h) - j).collect();
        rows.push(FdRow { sample, relative_mismatch: pb.weighted_norm(&diff) / pb.weighted_norm(&jd) });
    }
    let worst = rows.iter().map(|r| r.relative_mismatch).fold(0.0, f64::max);
    Outcome {
        pass: worst <= 1e-5,
        detail: format!("largest relative mismatch over 10 random states {worst:.2e} (limit 1e-5)"),
        csv: csv_bytes(&rows),
    }
}

#[derive(Serialize)]
struct NewtonRow {
    case: &'static str,
    k: usize,
    crit: f64,
    residual: f64,
}

fn c3_newton() -> Outcome {
    let linear = Variant { flow: Flow::Stokes, radiation: Radiation::Linearized };
    let prm = PhysicalParams { beta: 0.0, ..Default::default() };
    let spec = ScenarioSpec { variant: linear, ..make_cavity_scenario(6, 3e-3, 3e-3, 1.0, prm) };
    let lin = run(&spec, &cfg(), &tree(), RunOptions::default()).unwrap();

    // Tolerances tight enough that two steps land below 1e-3; the inner
    // solves must then be accurate enough not to mask the quadratic rate.
    let slot = make_cavity_scenario(6, 3e-3, 10e-3, 2.03, PhysicalParams::default());
    let tight = NewtonConfig { eps_tol: 1e-12, res_tol: 1e-14, ..cfg() };
    let mut accurate = tree();
    accurate.outer.tol = 1e-12;
    let nl = run(&slot, &tight, &accurate, RunOptions::default()).unwrap();
    let crit = nl.outcome.log.crit_history();
    // Ratios crit[k+1] / crit[k]^2 for the final two steps whose new
    // crit is below 1e-3. One more step would only measure round-off.
    let tail: Vec<f64> = crit.windows(2).filter(|w| w[1] < 1e-3).map(|w| w[1] / (w[0] * w[0])).collect();
    let last_two = &tail[tail.len().saturating_sub(2)..];
    let c_max = last_two.iter().copied().fold(0.0, f64::max);
    let quadratic = last_two.len() == 2 && c_max <= 1e3;

    let mut rows = Vec::new();
    for (case, out) in [("linear", &lin), ("nonlinear", &nl)] {
        for s in &out.outcome.log.steps {
            rows.push(NewtonRow { case, k: s.k, crit: s.crit, residual: s.res_weighted });
        }
    }
    Outcome {
        pass: lin.converged() && lin.outcome.log.iterations() == 1 && nl.converged() && quadratic,
        detail: format!(
            "linear variant: {} iteration(s); nonlinear slot crit history {:?}; tail constants {:?}",
            lin.outcome.log.iterations(),
            crit.iter().map(|c| format!("{c:.1e}")).collect::<Vec<_>>(),
            last_two.iter().map(|c| format!("{c:.2}")).collect::<Vec<_>>()
        ),
        csv: csv_bytes(&rows),
    }
}

fn c4_preconditioner() -> Outcome {
    let mut plain = SolverTree::unpreconditioned();
    plain.outer.max_iters = 2000;
    let levels = [8, 16, 32];
    let rows = preconditioner_study(&levels, &[tree(), plain.clone()]).unwrap();
    let pre: Vec<_> = rows.iter().filter(|r| r.tree == "schur-upper").collect();
    let raw: Vec<_> = rows.iter().filter(|r| r.tree == plain.name).collect();
    let its: Vec<usize> = pre.iter().map(|r| r.outer_iterations).collect();
    let spread = *its.iter().max().unwrap() as f64 / *its.iter().min().unwrap() as f64;
    // A capped plain run counts as needing at least the cap.
    let below = pre.iter().zip(&raw).all(|(a, b)| a.outer_iterations < b.outer_iterations);
    Outcome {
        pass: pre.iter().all(|r| r.converged && r.relative_residual <= 1e-8) && spread <= 2.0 && below,
        detail: format!(
            "outer iterations with the fieldsplit tree {its:?} (spread {spread:.2}x); plain GMRES {:?} (cap {})",
            raw.iter()
                .map(|r| if r.converged { r.outer_iterations.to_string() } else { format!(">={}", r.outer_iterations) })
                .collect::<Vec<_>>(),
            plain.outer.max_iters
        ),
        csv: csv_bytes(&rows),
    }
}

#[derive(Serialize)]
struct SlotEstimateRow {
    delta_t: f64,
    u_max: f64,
    tau_max: f64,
    predicted_u: f64,
    predicted_tau: f64,
}

fn c5_slot_anchor() -> Outcome {
    let dt = 2.03;
    let slot = make_cavity_scenario(8, 3e-3, 10e-3, dt, PhysicalParams::default());
    let out = run(&slot, &cfg(), &tree(), RunOptions::default()).unwrap();
    let u_max = out.stat("aqueousHumor", "velocity").unwrap().max;
    let tau_max = out.wss.as_ref().unwrap().max_magnitude();
    let (pu, pt) = slot_flow_estimate(dt).unwrap();
    let row = SlotEstimateRow { delta_t: dt, u_max, tau_max, predicted_u: pu, predicted_tau: pt };
    Outcome {
        pass: out.converged() && (1.3e-4..=1.2e-3).contains(&u_max) && (2.5e-4..=2.7e-3).contains(&tau_max),
        detail: format!("u_max {u_max:.3e} m/s (estimate {pu:.3e}); max |tau_w| {tau_max:.3e} Pa (estimate {pt:.3e})"),
        csv: csv_bytes(&[row]),
    }
}

#[derive(Serialize)]
struct MirrorRow {
    reflection_mismatch: f64,
    negation_mismatch: f64,
}

fn c6_postures() -> Outcome {
    let base = make_eye_scenario(1, PhysicalParams::default(), Posture::Standing, Variant::default());
    let rows = posture_study(&base, &cfg(), &tree()).unwrap();
    let mean = |name: &str| rows.iter().find(|r| r.posture == name).unwrap().u_mean;
    let (st, su, pr) = (mean("standing"), mean("supine"), mean("prone"));
    let ratios = (st / su, st / pr);

    // Flipping gravity in a cavity that is symmetric about its mid-height
    // maps the flow to its mirror image (u_x, -u_y)(x, H - y).
    let solve = |sign: f64| {
        let prm = PhysicalParams { gravity_dir: [0.0, -sign, 0.0], ..Default::default() };
        let sc = make_cavity_scenario(8, 3e-3, 3e-3, 1.0, prm).build().unwrap();
        let out = newton_solve(&sc.problem, &sc.problem.initial_state(), &cfg(), &tree()).unwrap();
        (sc, out)
    };
    let (sc, down) = solve(1.0);
    let (_, up) = solve(-1.0);
    let sp = &sc.problem.velocity;
    let nn = sp.n_nodes();
    let key = |x: f64, y: f64| ((x * 1e9).round() as i64, (y * 1e9).round() as i64);
    let index: std::collections::HashMap<_, _> =
        sp.node_coords().iter().enumerate().map(|(i, p)| (key(p[0], p[1]), i)).collect();
    let (a, b) = (&down.state.u, &up.state.u);
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (mut refl, mut neg) = (0.0f64, 0.0f64);
    for (i, p) in sp.node_coords().iter().enumerate() {
        let j = index[&key(p[0], 3e-3 - p[1])];
        refl = refl.max((b[i] - a[j]).abs()).max((b[nn + i] + a[nn + j]).abs());
        neg = neg.max((b[i] + a[i]).abs()).max((b[nn + i] + a[nn + i]).abs());
    }
    let mirror = MirrorRow { reflection_mismatch: refl / scale, negation_mismatch: neg / scale };
    let mut csv = csv_bytes(&rows);
    csv.extend(csv_bytes(&[&mirror]));
    Outcome {
        pass: rows.iter().all(|r| r.converged)
            && ratios.0 >= 5.0
            && ratios.1 >= 5.0
            && down.converged()
            && up.converged()
            && mirror.reflection_mismatch <= 1e-8,
        detail: format!(
            "standing/supine {:.2}x, standing/prone {:.2}x; reversed gravity vs mirrored field {:.1e} (plain negation {:.1e})",
            ratios.0, ratios.1, mirror.reflection_mismatch, mirror.negation_mismatch
        ),
        csv,
    }
}

fn c7_sweep() -> Outcome {
    let base = make_eye_scenario(1, PhysicalParams::default(), Posture::Standing, Variant::default());
    let rows: Vec<_> =
        (283..=323).step_by(5).map(|t| sweep_point(&base, "params.T_amb", t as f64, &cfg(), &tree())).collect();
    let min_at = sweep_minimum(&rows);
    Outcome {
        pass: rows.len() == 9
            && rows.iter().all(|r| r.status == "converged")
            && min_at.is_some_and(|t| (305.0..=315.0).contains(&t)),
        detail: format!(
            "mean WSS minimum at T_amb = {min_at:?} K; series {:?}",
            rows.iter().map(|r| format!("{:.0}:{:.2e}", r.value, r.wss_total)).collect::<Vec<_>>()
        ),
        csv: csv_bytes(&rows),
    }
}

#[derive(Serialize)]
struct CouetteRow {
    n: usize,
    max_relative_error: f64,
    projection_gap: f64,
}

fn couette(n: usize) -> (Problem, State) {
    let gamma = 1.0;
    let mesh = Arc::new(generate_rect(n, n, [1e-3, 1e-3], &RectLabels::default()).unwrap());
    let mut prm = PhysicalParams { beta: 0.0, ..Default::default() };
    prm.k_by_label.insert("domain".into(), 0.58);
    let mut setup = ProblemSetup::new(mesh, &["domain"], prm);
    setup.velocity_bc = Some(Arc::new(move |x: &[f64; 3]| [gamma * x[1], 0.0, 0.0]));
    let t0 = setup.params.t_ref;
    let sides = ["left", "right", "bottom", "top"].iter().map(|s| s.to_string()).collect();
    setup.temperature_bc = Some((sides, Arc::new(move |_: &[f64; 3]| t0)));
    let pb = Problem::new(setup).unwrap();
    let out = newton_solve(&pb, &pb.initial_state(), &cfg(), &tree()).unwrap();
    assert!(out.converged());
    (pb, out.state)
}

fn c8_wss() -> Outcome {
    let mut rows = Vec::new();
    for n in [2, 4, 8] {
        let (pb, s) = couette(n);
        let fm = &pb.fluid.mesh;
        let w = wall_shear_stress(
            &pb.velocity,
            &s.u,
            &wall_facets(fm, &["bottom"]).unwrap(),
            pb.params.mu,
            WssOptions::default(),
        )
        .unwrap();
        let exact = pb.params.mu * 1.0;
        let (lo, hi) = w.magnitude_range(None);
        let err = ((hi - exact).abs()).max((lo - exact).abs()) / exact;
        rows.push(CouetteRow { n, max_relative_error: err, projection_gap: 0.0 });
    }

    // Optimality of the surface projection on a real flow: no perturbed
    // continuous field is closer to the raw stress.
    let eye = run(
        &make_eye_scenario(1, PhysicalParams::default(), Posture::Standing, Variant::default()),
        &cfg(),
        &tree(),
        RunOptions::default(),
    )
    .unwrap();
    let w = eye.wss.as_ref().unwrap();
    let best = w.distance_to_raw(&w.projected).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut gap = f64::INFINITY;
    for k in 0..5 {
        let s = w.max_magnitude() * [1e-3, 1e-2, 1e-1, 1.0, 10.0][k];
        let cand: Vec<[f64; 3]> = w
            .projected
            .iter()
            .map(|p| [p[0] + s * rng.random_range(-1.0..1.0), p[1] + s * rng.random_range(-1.0..1.0), 0.0])
            .collect();
        gap = gap.min(w.distance_to_raw(&cand).unwrap() - best);
    }
    rows.last_mut().unwrap().projection_gap = gap;
    let err = rows.last().unwrap().max_relative_error;
    Outcome {
        pass: err <= 1e-2 && gap >= 0.0 && w.projection_residual <= 1e-10,
        detail: format!(
            "Couette |tau_w| relative error after two refinements {err:.1e}; projection beats 5 random candidates by at least {gap:.2e}"
        ),
        csv: csv_bytes(&rows),
    }
}

// ---------------------------------------------------------------------------

type Criterion = fn() -> Outcome;

const CRITERIA: [(&str, &str, Criterion); 8] = [
    ("1", "manufactured-solution convergence", c1_mms),
    ("2", "Jacobian consistency", c2_jacobian),
    ("3", "Newton behaviour", c3_newton),
    ("4", "preconditioner efficacy", c4_preconditioner),
    ("5", "analytic slot anchor", c5_slot_anchor),
    ("6", "posture properties", c6_postures),
    ("7", "ambient sweep minimum", c7_sweep),
    ("8", "wall shear stress analytics", c8_wss),
];

static RESULTS: [OnceLock<Outcome>; 8] = [const { OnceLock::new() }; 8];

fn outcome(i: usize) -> &'static Outcome {
    RESULTS[i].get_or_init(|| {
        let o = CRITERIA[i].2();
        report(CRITERIA[i].0, CRITERIA[i].1, &o);
        o
    })
}

fn check(i: usize) {
    let o = outcome(i);
    assert!(o.pass, "criterion {} failed: {}", CRITERIA[i].0, o.detail);
}

#[test]
fn criterion_01_mms_convergence() {
    check(0);
}

#[test]
fn criterion_02_jacobian_consistency() {
    check(1);
}

#[test]
fn criterion_03_newton_behaviour() {
    check(2);
}

#[test]
fn criterion_04_preconditioner_efficacy() {
    check(3);
}

#[test]
fn criterion_05_analytic_slot_anchor() {
    check(4);
}

#[test]
fn criterion_06_posture_properties() {
    check(5);
}

#[test]
fn criterion_07_ambient_sweep() {
    check(6);
}

#[test]
fn criterion_08_wss_analytics() {
    check(7);
}

/// Runs when a configuration for the published full eye mesh is supplied
/// through `OCUFLOW_EYE_CONFIG`, a scenario TOML whose conductive-only
/// companion is obtained by setting `params.beta = 0`.
#[test]
fn criterion_09_full_eye_mesh() {
    let name = "full eye mesh, cornea temperature";
    let path = std::env::var_os("OCUFLOW_EYE_CONFIG").map(PathBuf::from);
    let Some(path) = path.filter(|p| p.exists()) else {
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "[SKIP] criterion 9 ({name}): OCUFLOW_EYE_CONFIG not set or file missing");
        return;
    };
    let text = std::fs::read_to_string(&path).unwrap();
    let mut spec = ScenarioSpec::from_toml(&text).unwrap();
    spec.params.t_amb = 298.0;
    spec.posture = Some(Posture::Standing);
    let cornea = spec.boundaries.gamma_amb.first().cloned().expect("config names the ambient boundary");
    let flow = run(&spec, &cfg(), &tree(), RunOptions::default()).unwrap();
    let still_spec = ScenarioSpec { params: PhysicalParams { beta: 0.0, ..spec.params.clone() }, ..spec.clone() };
    let still = run(&still_spec, &cfg(), &tree(), RunOptions::default()).unwrap();
    let t_flow = flow.stat(&cornea, "temperature").unwrap().max;
    let t_still = still.stat(&cornea, "temperature").unwrap().max;
    let o = Outcome {
        pass: (t_flow - 307.49222).abs() <= 0.3 && (t_still - 307.45746).abs() <= 0.3 && t_flow > t_still,
        detail: format!("cornea max T with flow {t_flow:.5} K, conduction only {t_still:.5} K"),
        csv: Vec::new(),
    };
    report("9", name, &o);
    assert!(o.pass, "{}", o.detail);
}

#[test]
fn criterion_10_determinism() {
    let mut same = Vec::new();
    for (i, (id, _, f)) in CRITERIA.iter().enumerate() {
        let first = outcome(i);
        let again = f();
        same.push((id, first.csv == again.csv && !first.csv.is_empty()));
    }
    let bad: Vec<_> = same.iter().filter(|(_, ok)| !ok).map(|(id, _)| **id).collect();
    let o = Outcome {
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            "criteria 1-8 reproduce bit-identical CSV output".into()
        } else {
            format!("CSV output differs on rerun for criteria {bad:?}")
        },
        csv: Vec::new(),
    };
    report("10", "determinism", &o);
    assert!(o.pass, "{}", o.detail);
}
