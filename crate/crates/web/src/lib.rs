//! Browser bindings for a few small solves. Every exported function returns
//! a JSON string so the page needs no extra glue beyond `JSON.parse`.
//!
//! The plain Rust functions below the bindings carry the logic and are what
//! the tests exercise.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use ocuflow::forms::{PhysicalParams, Variant};
use ocuflow::krylov::SolverTree;
use ocuflow::newton::NewtonConfig;
use ocuflow::postproc::{extend_to_parent, slot_flow_estimate, vertex_values, PressureTarget, RegionStats};
use ocuflow::scenario::study::{run, RunOptions, RunOutput};
use ocuflow::scenario::{make_cavity_scenario, make_eye_scenario, Posture, ScenarioSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowEstimate {
    pub delta_t: f64,
    /// Peak velocity [m/s].
    pub velocity: f64,
    /// Peak wall shear stress [Pa].
    pub wss: f64,
}

pub fn flow_estimate(delta_t: f64) -> Result<FlowEstimate, String> {
    let (velocity, wss) = slot_flow_estimate(delta_t).map_err(|e| e.to_string())?;
    Ok(FlowEstimate { delta_t, velocity, wss })
}

/// A solved scenario reduced to what a 2D canvas plot needs.
#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    pub converged: bool,
    pub iterations: usize,
    pub gravity: [f64; 3],
    pub stats: Vec<RegionStats>,
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Temperature at each vertex [K].
    pub temperature: Vec<f64>,
    /// Velocity at each vertex, zero outside the fluid [m/s].
    pub velocity: Vec<[f64; 2]>,
}

fn summarize(out: &RunOutput) -> Result<Solution, String> {
    let pb = &out.scenario.problem;
    let mesh = &pb.mesh;
    if mesh.dim() != 2 {
        return Err("the browser view only draws two-dimensional meshes".into());
    }
    let err = |e: ocuflow::Error| e.to_string();
    let t = vertex_values(&pb.temperature, &out.outcome.state.t).map_err(err)?;
    let u = vertex_values(&pb.velocity, &out.outcome.state.u).map_err(err)?;
    let u = extend_to_parent(&pb.fluid, &u, 2, mesh.n_vertices(), 0.0);
    Ok(Solution {
        converged: out.converged(),
        iterations: out.outcome.log.iterations(),
        gravity: pb.params.gravity_dir.map(|d| pb.params.g_mag * d),
        stats: out.stats.clone(),
        vertices: mesh.vertices().iter().map(|p| [p[0], p[1]]).collect(),
        triangles: mesh.cells().map(|c| [c[0], c[1], c[2]]).collect(),
        temperature: t,
        velocity: u.chunks(2).map(|c| [c[0], c[1]]).collect(),
    })
}

fn solve(spec: &ScenarioSpec, opts: RunOptions) -> Result<Solution, String> {
    let out = run(spec, &NewtonConfig::default(), &SolverTree::schur_upper(), opts).map_err(|e| e.to_string())?;
    summarize(&out)
}

/// Differentially heated rectangle, sizes in millimetres.
pub fn cavity(n: usize, width_mm: f64, height_mm: f64, delta_t: f64, posture: &str) -> Result<Solution, String> {
    if !(1..=24).contains(&n) {
        return Err(format!("divisions must lie between 1 and 24, got {n}"));
    }
    let mut spec = make_cavity_scenario(n, width_mm * 1e-3, height_mm * 1e-3, delta_t, PhysicalParams::default());
    spec.posture = Some(Posture::parse(posture).map_err(|e| e.to_string())?);
    solve(&spec, RunOptions::default())
}

/// The coarse eye cut at a given ambient temperature and posture, with
/// pressures reported around 15.5 mmHg.
pub fn eye(t_amb: f64, posture: &str) -> Result<Solution, String> {
    let posture = Posture::parse(posture).map_err(|e| e.to_string())?;
    let params = PhysicalParams { t_amb, ..PhysicalParams::default() };
    let spec = make_eye_scenario(1, params, posture, Variant::default());
    solve(&spec, RunOptions { pressure_target: Some(PressureTarget::MmHg(15.5)), ..RunOptions::default() })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = flowEstimate)]
pub fn flow_estimate_js(delta_t: f64) -> Result<String, JsError> {
    to_js(flow_estimate(delta_t))
}

#[wasm_bindgen(js_name = solveCavity)]
pub fn cavity_js(n: usize, width_mm: f64, height_mm: f64, delta_t: f64, posture: &str) -> Result<String, JsError> {
    to_js(cavity(n, width_mm, height_mm, delta_t, posture))
}

#[wasm_bindgen(js_name = solveEye)]
pub fn eye_js(t_amb: f64, posture: &str) -> Result<String, JsError> {
    to_js(eye(t_amb, posture))
}
