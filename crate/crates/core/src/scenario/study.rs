//! Multi-run studies built on single scenario solves: plain runs with
//! statistics, manufactured-solution convergence, parameter sweeps, posture
//! comparisons and solver benchmarks.

use std::sync::Arc;
use web_time::Instant;

use serde::Serialize;

use super::{make_lid_scenario, Posture, Scenario, ScenarioSpec};
use crate::error::{Error, Result};
use crate::fem::FunctionSpace;
use crate::forms::{PhysicalParams, State, Variant};
use crate::krylov::{SolverTree, TreeSolver};
use crate::newton::{newton_solve, NewtonConfig, NewtonOutcome};
use crate::postproc::{
    field_statistics, normalize_pressure, wall_shear_stress, PressureTarget, Region, RegionStats, WssField, WssOptions,
};

/// Wall-clock seconds per phase of a run. `export` is filled in by whoever
/// writes the files.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timings {
    pub load_mesh: f64,
    pub initialize: f64,
    pub assembly: f64,
    pub solve: f64,
    pub export: f64,
}

impl Timings {
    pub fn phases(&self) -> [(&'static str, f64); 5] {
        [
            ("load_mesh", self.load_mesh),
            ("initialize", self.initialize),
            ("assembly", self.assembly),
            ("solve", self.solve),
            ("export", self.export),
        ]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    /// Report pressures shifted to this mean instead of zero mean.
    pub pressure_target: Option<PressureTarget>,
    pub wss: WssOptions,
}

pub struct RunOutput {
    pub scenario: Scenario,
    pub outcome: NewtonOutcome,
    /// Pressure after the optional shift.
    pub pressure: Vec<f64>,
    pub wss: Option<WssField>,
    pub stats: Vec<RegionStats>,
    pub timings: Timings,
}

impl RunOutput {
    pub fn converged(&self) -> bool {
        self.outcome.converged()
    }

    pub fn stat(&self, region: &str, field: &str) -> Option<&RegionStats> {
        self.stats.iter().find(|s| s.region == region && s.field == field)
    }

    /// Mean wall shear stress magnitude over a named wall group, or over all
    /// walls when `group` is `None`.
    pub fn wss_mean(&self, group: Option<&str>) -> Option<f64> {
        let w = self.wss.as_ref()?;
        match group {
            None => w.mean_magnitude(None).ok(),
            Some(name) => w.mean_magnitude(Some(&self.scenario.wall(name)?.facets)).ok(),
        }
    }
}

/// Builds and solves one scenario and collects its statistics.
pub fn run(spec: &ScenarioSpec, cfg: &NewtonConfig, tree: &SolverTree, opts: RunOptions) -> Result<RunOutput> {
    let mut timings = Timings::default();
    let t = Instant::now();
    let mesh = spec.load_mesh()?;
    timings.load_mesh = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let scenario = spec.build_on(Arc::new(mesh))?;
    timings.initialize = t.elapsed().as_secs_f64();
    let pb = &scenario.problem;
    let outcome = newton_solve(pb, &pb.initial_state(), cfg, tree)?;
    timings.assembly = outcome.log.assembly_seconds();
    timings.solve = outcome.log.solve_seconds();

    let state = &outcome.state;
    let pressure = match opts.pressure_target {
        Some(target) if pb.pressure.n_dofs() > 0 => normalize_pressure(&pb.pressure, &state.p, target)?,
        _ => state.p.clone(),
    };
    let facets = scenario.all_wall_facets();
    let wss = if facets.is_empty() {
        None
    } else {
        Some(wall_shear_stress(&pb.velocity, &state.u, &facets, pb.params.mu, opts.wss)?)
    };
    let stats = collect_stats(&scenario, state, &pressure, wss.as_ref())?;
    Ok(RunOutput { scenario, outcome, pressure, wss, stats, timings })
}

fn collect_stats(sc: &Scenario, state: &State, pressure: &[f64], wss: Option<&WssField>) -> Result<Vec<RegionStats>> {
    let pb = &sc.problem;
    let fluid_name = sc.spec.fluid.labels.join("+");
    let mut stats = Vec::new();
    let mut fluid = |space: &FunctionSpace, coef: &[f64], field: &str, unit: &str| -> Result<()> {
        let mut s = field_statistics(space, coef, &Region::All, field, unit)?;
        s.region = fluid_name.clone();
        stats.push(s);
        Ok(())
    };
    fluid(&pb.velocity, &state.u, "velocity", "m/s")?;
    fluid(&pb.pressure, pressure, "pressure", "Pa")?;

    stats.push(field_statistics(&pb.temperature, &state.t, &Region::All, "temperature", "K")?);
    for (_, name) in pb.mesh.used_subdomains() {
        stats.push(field_statistics(&pb.temperature, &state.t, &Region::Subdomain(name.into()), "temperature", "K")?);
    }
    for name in &sc.spec.boundaries.gamma_amb {
        stats.push(field_statistics(&pb.temperature, &state.t, &Region::Boundary(name.clone()), "temperature", "K")?);
    }
    if let Some(w) = wss {
        let (min, max) = w.magnitude_range(None);
        stats.push(RegionStats {
            region: "walls".into(),
            field: "wss".into(),
            unit: "Pa".into(),
            min,
            mean: w.mean_magnitude(None)?,
            max,
        });
        for g in &sc.walls {
            let (min, max) = w.magnitude_range(Some(&g.facets));
            stats.push(RegionStats {
                region: g.name.clone(),
                field: "wss".into(),
                unit: "Pa".into(),
                min,
                mean: w.mean_magnitude(Some(&g.facets))?,
                max,
            });
        }
    }
    Ok(stats)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmsRow {
    pub n: usize,
    pub h: f64,
    pub err_u: f64,
    pub err_p: f64,
    pub err_t: f64,
    pub rate_u: Option<f64>,
    pub rate_p: Option<f64>,
    pub rate_t: Option<f64>,
    pub newton_iterations: usize,
    pub converged: bool,
}

/// Solves the manufactured problem on each listed resolution of `base`
/// (which must use the MMS generator) and reports L² errors and observed
/// orders between consecutive levels.
pub fn mms_convergence(
    base: &ScenarioSpec,
    levels: &[usize],
    cfg: &NewtonConfig,
    tree: &SolverTree,
) -> Result<Vec<MmsRow>> {
    use super::Generator;
    let Some(Generator::Mms { solution, .. }) = base.mesh.generator else {
        return Err(Error::Scenario("a convergence study needs the mms mesh generator".into()));
    };
    if levels.is_empty() {
        return Err(Error::InvalidArgument("at least one level is required".into()));
    }
    let mut rows: Vec<MmsRow> = Vec::new();
    for &n in levels {
        let mut spec = base.clone();
        spec.mesh.generator = Some(Generator::Mms { n, solution });
        let sc = spec.build()?;
        let pb = &sc.problem;
        let out = newton_solve(pb, &pb.initial_state(), cfg, tree)?;
        let [eu, ep, et] = sc.mms_errors(&out.state)?;
        let h = 1.0 / n as f64;
        let rate = |prev: f64, cur: f64, hp: f64| (prev / cur).ln() / (hp / h).ln();
        let (ru, rp, rt) = match rows.last() {
            Some(p) => (Some(rate(p.err_u, eu, p.h)), Some(rate(p.err_p, ep, p.h)), Some(rate(p.err_t, et, p.h))),
            None => (None, None, None),
        };
        rows.push(MmsRow {
            n,
            h,
            err_u: eu,
            err_p: ep,
            err_t: et,
            rate_u: ru,
            rate_p: rp,
            rate_t: rt,
            newton_iterations: out.log.iterations(),
            converged: out.converged(),
        });
    }
    Ok(rows)
}

/// Messages for every observed order on the last level below its minimum.
pub fn order_shortfalls(rows: &[MmsRow], min: [f64; 3]) -> Vec<String> {
    let Some(last) = rows.last() else { return Vec::new() };
    let mut out = Vec::new();
    for ((name, rate), m) in
        [("velocity", last.rate_u), ("pressure", last.rate_p), ("temperature", last.rate_t)].into_iter().zip(min)
    {
        if let Some(r) = rate {
            if !(r >= m) {
                out.push(format!("{name} order {r:.3} below {m}"));
            }
        }
    }
    out
}

/// Sets a numeric entry addressed by a dotted path such as `params.T_amb`.
/// The key must already exist in the serialized description.
pub fn set_param(spec: &mut ScenarioSpec, key: &str, value: f64) -> Result<()> {
    let text = spec.to_toml()?;
    let mut doc: toml::Table = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    let parts: Vec<&str> = key.split('.').collect();
    let (last, path) = parts.split_last().expect("split yields at least one part");
    let mut table = &mut doc;
    for p in path {
        table = table
            .get_mut(*p)
            .and_then(|v| v.as_table_mut())
            .ok_or_else(|| Error::Config(format!("unknown parameter `{key}`")))?;
    }
    match table.get_mut(*last) {
        Some(v @ toml::Value::Float(_)) => *v = toml::Value::Float(value),
        Some(v @ toml::Value::Integer(_)) if value.fract() == 0.0 => *v = toml::Value::Integer(value as i64),
        Some(_) => return Err(Error::Config(format!("parameter `{key}` is not numeric"))),
        None => return Err(Error::Config(format!("unknown parameter `{key}`"))),
    }
    let text = toml::to_string(&doc).map_err(|e| Error::Config(e.to_string()))?;
    *spec = ScenarioSpec::from_toml(&text)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub wss_total: f64,
    pub wss_cornea: Option<f64>,
    pub wss_iris: Option<f64>,
    pub u_max: f64,
    pub iterations: usize,
    pub status: String,
}

/// One sweep point. Failures are reported in `status` rather than returned,
/// so a sweep can carry on past them.
pub fn sweep_point(base: &ScenarioSpec, key: &str, value: f64, cfg: &NewtonConfig, tree: &SolverTree) -> SweepRow {
    let mut row = SweepRow {
        value,
        wss_total: f64::NAN,
        wss_cornea: None,
        wss_iris: None,
        u_max: f64::NAN,
        iterations: 0,
        status: String::new(),
    };
    let mut spec = base.clone();
    let result = set_param(&mut spec, key, value).and_then(|_| run(&spec, cfg, tree, RunOptions::default()));
    match result {
        Ok(out) => {
            row.wss_total = out.wss_mean(None).unwrap_or(f64::NAN);
            row.wss_cornea = out.wss_mean(Some("cornea"));
            row.wss_iris = out.wss_mean(Some("iris"));
            row.u_max = out.stats.iter().find(|s| s.field == "velocity").map_or(f64::NAN, |s| s.max);
            row.iterations = out.outcome.log.iterations();
            row.status = if out.converged() { "converged".into() } else { "not_converged".into() };
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    row
}

/// Parameter value of the smallest finite `wss_total` among converged rows.
pub fn sweep_minimum(rows: &[SweepRow]) -> Option<f64> {
    rows.iter()
        .filter(|r| r.status == "converged" && r.wss_total.is_finite())
        .min_by(|a, b| a.wss_total.total_cmp(&b.wss_total))
        .map(|r| r.value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PostureRow {
    pub posture: String,
    pub converged: bool,
    pub iterations: usize,
    pub u_mean: f64,
    pub u_max: f64,
    pub wss_mean: f64,
}

/// Solves `base` once per posture.
pub fn posture_study(base: &ScenarioSpec, cfg: &NewtonConfig, tree: &SolverTree) -> Result<Vec<PostureRow>> {
    Posture::ALL
        .iter()
        .map(|&posture| {
            let spec = ScenarioSpec { posture: Some(posture), ..base.clone() };
            let out = run(&spec, cfg, tree, RunOptions::default())?;
            let u = out.stats.iter().find(|s| s.field == "velocity").expect("velocity statistics are always collected");
            Ok(PostureRow {
                posture: posture.name().into(),
                converged: out.converged(),
                iterations: out.outcome.log.iterations(),
                u_mean: u.mean,
                u_max: u.max,
                wss_mean: out.wss_mean(None).unwrap_or(f64::NAN),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub tree: String,
    pub variant: String,
    pub converged: bool,
    pub newton_iterations: usize,
    pub linear_iterations: usize,
    pub status: String,
    /// Largest relative L² distance to another converged row of the same variant.
    pub max_rel_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchTiming {
    pub tree: String,
    pub variant: String,
    #[serde(rename = "load_mesh (s)")]
    pub load_mesh: f64,
    #[serde(rename = "initialize (s)")]
    pub initialize: f64,
    #[serde(rename = "assembly (s)")]
    pub assembly: f64,
    #[serde(rename = "solve (s)")]
    pub solve: f64,
}

/// Runs every (tree, variant) pair. Iteration counts are deterministic and
/// kept apart from wall-clock timings.
pub fn bench(
    base: &ScenarioSpec,
    cases: &[(SolverTree, Variant)],
    cfg: &NewtonConfig,
) -> (Vec<BenchRow>, Vec<BenchTiming>) {
    let mut rows = Vec::new();
    let mut timings = Vec::new();
    let mut states: Vec<Option<State>> = Vec::new();
    for (tree, variant) in cases {
        let spec = ScenarioSpec { variant: *variant, ..base.clone() };
        let mut row = BenchRow {
            tree: tree.name.clone(),
            variant: variant.name().into(),
            converged: false,
            newton_iterations: 0,
            linear_iterations: 0,
            status: String::new(),
            max_rel_diff: None,
        };
        let mut timing = BenchTiming {
            tree: tree.name.clone(),
            variant: variant.name().into(),
            load_mesh: 0.0,
            initialize: 0.0,
            assembly: 0.0,
            solve: 0.0,
        };
        match run(&spec, cfg, tree, RunOptions::default()) {
            Ok(out) => {
                row.converged = out.converged();
                row.newton_iterations = out.outcome.log.iterations();
                row.linear_iterations = out.outcome.log.steps.iter().map(|s| s.linear_iterations).sum();
                row.status = if row.converged { "converged".into() } else { "not_converged".into() };
                timing.load_mesh = out.timings.load_mesh;
                timing.initialize = out.timings.initialize;
                timing.assembly = out.timings.assembly;
                timing.solve = out.timings.solve;
                states.push(row.converged.then(|| out.outcome.state.clone()));
            }
            Err(e) => {
                row.status = format!("error: {e}");
                states.push(None);
            }
        }
        rows.push(row);
        timings.push(timing);
    }
    for i in 0..rows.len() {
        let Some(a) = &states[i] else { continue };
        let mut worst: Option<f64> = None;
        for j in 0..rows.len() {
            if i == j || rows[i].variant != rows[j].variant {
                continue;
            }
            if let Some(b) = &states[j] {
                let d = relative_difference(a, b);
                worst = Some(worst.map_or(d, |w: f64| w.max(d)));
            }
        }
        rows[i].max_rel_diff = worst;
    }
    (rows, timings)
}

/// Largest per-field relative Euclidean distance between two states.
pub fn relative_difference(a: &State, b: &State) -> f64 {
    let rel = |x: &[f64], y: &[f64]| {
        let num: f64 = x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        let den: f64 = x.iter().map(|p| p * p).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        if num == 0.0 {
            0.0
        } else {
            num / den
        }
    };
    rel(&a.u, &b.u).max(rel(&a.p, &b.p)).max(rel(&a.t, &b.t))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreconditionerRow {
    pub n: usize,
    pub tree: String,
    pub outer_iterations: usize,
    pub converged: bool,
    pub relative_residual: f64,
}

/// One linear solve of the first Newton system of the lid-driven Stokes
/// problem per resolution and tree.
pub fn preconditioner_study(levels: &[usize], trees: &[SolverTree]) -> Result<Vec<PreconditionerRow>> {
    let mut rows = Vec::new();
    for &n in levels {
        let sc = make_lid_scenario(n, PhysicalParams::default()).build()?;
        let pb = &sc.problem;
        let state = pb.initial_state();
        let sys = pb.newton_system(&state, &state.t)?;
        let (block, rhs) = sys.scaled();
        for tree in trees {
            let solver = TreeSolver::new(tree, &block)?;
            let mut x = vec![0.0; rhs.len()];
            let report = solver.solve(&rhs, &mut x)?;
            rows.push(PreconditionerRow {
                n,
                tree: tree.name.clone(),
                outer_iterations: report.outer.iterations,
                converged: report.outer.converged,
                relative_residual: report.outer.relative_residual(),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{make_cavity_scenario, make_mms_scenario, MmsKind};

    #[test]
    fn dotted_keys_reach_nested_parameters() {
        let mut spec = make_cavity_scenario(4, 3e-3, 3e-3, 1.0, PhysicalParams::default());
        set_param(&mut spec, "params.T_amb", 301.5).unwrap();
        assert_eq!(spec.params.t_amb, 301.5);
        set_param(&mut spec, "mesh.generator.n", 6.0).unwrap();
        assert!(matches!(spec.mesh.generator, Some(super::super::Generator::Cavity { n: 6, .. })));
        assert!(matches!(set_param(&mut spec, "params.T_moon", 1.0), Err(Error::Config(_))));
        assert!(set_param(&mut spec, "params.T_amb", -3.0).is_err());
    }

    #[test]
    fn resting_cavity_reports_no_motion() {
        let spec = make_cavity_scenario(4, 3e-3, 3e-3, 0.0, PhysicalParams::default());
        let out = run(&spec, &NewtonConfig::default(), &SolverTree::schur_upper(), RunOptions::default()).unwrap();
        assert!(out.converged());
        let u = out.stats.iter().find(|s| s.field == "velocity").unwrap();
        assert!(u.max <= 1e-12, "{}", u.max);
        for s in &out.stats {
            assert!(
                s.min <= s.mean + 1e-12 * s.mean.abs().max(1.0) && s.mean <= s.max + 1e-12 * s.max.abs().max(1.0),
                "{s:?}"
            );
        }
    }

    #[test]
    fn single_level_study_has_no_rates() {
        let spec = make_mms_scenario(4, MmsKind::Poly);
        let rows = mms_convergence(&spec, &[4], &NewtonConfig::default(), &SolverTree::schur_upper()).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].rate_u.is_none());
        assert!(rows[0].err_u < 1e-9 && rows[0].err_t < 1e-9, "{rows:?}");
        assert!(order_shortfalls(&rows, [2.7, 1.7, 1.7]).is_empty());
    }
}
