use std::fs::File;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use ocuflow::forms::Variant;
use ocuflow::krylov::SolverTree;
use ocuflow::newton::NewtonConfig;
use ocuflow::postproc::{extend_to_parent, vertex_values, write_records, write_vtu, VtuData};
use ocuflow::scenario::study::{self, MmsRow, RunOutput, SweepRow, Timings};
use ocuflow::scenario::{make_mms_scenario, Generator, MmsKind, Posture};

use crate::config::{hash_text, Config};
use crate::{BenchArgs, MmsArgs, RunArgs, SweepArgs};

/// Sizes the global thread pool from `OCUFLOW_THREADS` when it is set.
pub fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("OCUFLOW_THREADS") else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("OCUFLOW_THREADS must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

#[derive(Serialize)]
struct PhaseRow {
    phase: &'static str,
    seconds: f64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    ocuflow_version: &'a str,
    cli_version: &'a str,
    config: String,
    config_sha256: String,
    posture: Option<&'a str>,
    variant: &'a str,
    /// Gravitational acceleration vector [m/s^2].
    gravity: [f64; 3],
    converged: bool,
    newton_iterations: usize,
    linear_iterations: usize,
    timings: Timings,
    files: Vec<&'a str>,
}

/// Returns whether Newton converged.
pub fn run(args: &RunArgs) -> Result<bool> {
    let (cfg, text) = Config::load(&args.config)?;
    let mut spec = cfg.scenario.clone();
    if let Some(p) = &args.posture {
        spec.posture = Some(Posture::parse(p)?);
    }
    if let Some(v) = &args.variant {
        spec.variant = Variant::parse(v)?;
    }
    let tree = cfg.solver.tree()?;
    let mut out = study::run(&spec, &cfg.newton, &tree, cfg.run_options())
        .with_context(|| format!("solving {}", args.config.display()))?;

    create_dir(&args.out)?;
    let t = Instant::now();
    write_fields(&out, &args.out)?;
    write_records(&args.out.join("stats.csv"), &out.stats)?;
    out.outcome.log.save_csv(&args.out.join("newton.csv"))?;
    out.timings.export = t.elapsed().as_secs_f64();
    let phases: Vec<PhaseRow> =
        out.timings.phases().into_iter().map(|(phase, seconds)| PhaseRow { phase, seconds }).collect();
    write_records(&args.out.join("timings.csv"), &phases)?;

    let params = out.scenario.problem.params.clone();
    let log = &out.outcome.log;
    let manifest = Manifest {
        command: "run",
        ocuflow_version: ocuflow::VERSION,
        cli_version: env!("CARGO_PKG_VERSION"),
        config: args.config.display().to_string(),
        config_sha256: hash_text(&text),
        posture: spec.posture.map(Posture::name),
        variant: spec.variant.name(),
        gravity: params.gravity_dir.map(|d| params.g_mag * d),
        converged: out.converged(),
        newton_iterations: log.iterations(),
        linear_iterations: log.steps.iter().map(|s| s.linear_iterations).sum(),
        timings: out.timings,
        files: vec!["domain.vtu", "fluid.vtu", "stats.csv", "newton.csv", "timings.csv"],
    };
    write_json(&args.out.join("manifest.json"), &manifest)?;

    for s in &out.stats {
        println!(
            "{:<24} {:<12} min {:>12.5e}  mean {:>12.5e}  max {:>12.5e} {}",
            s.region, s.field, s.min, s.mean, s.max, s.unit
        );
    }
    let status = if out.converged() { "converged" } else { "did not converge" };
    println!("newton {status} after {} iterations", log.iterations());
    Ok(out.converged())
}

fn write_fields(out: &RunOutput, dir: &Path) -> Result<()> {
    let pb = &out.scenario.problem;
    let state = &out.outcome.state;
    let dim = pb.mesh.dim();
    let n_parent = pb.mesh.n_vertices();
    let fluid_mesh = pb.fluid.mesh.as_ref();

    let temperature = vertex_values(&pb.temperature, &state.t)?;
    let velocity = vertex_values(&pb.velocity, &state.u)?;
    let pressure = vertex_values(&pb.pressure, &out.pressure)?;
    let whole = VtuData::default().point("temperature", 1, temperature.clone()).point(
        "velocity",
        dim,
        extend_to_parent(&pb.fluid, &velocity, dim, n_parent, 0.0),
    );
    write_vtu(&pb.mesh, &whole, &dir.join("domain.vtu"))?;

    let fluid_t: Vec<f64> = pb.fluid.parent_vertex_map.iter().map(|&v| temperature[v]).collect();
    let mut fluid = VtuData::default().point("velocity", dim, velocity).point("pressure", 1, pressure).point(
        "temperature",
        1,
        fluid_t,
    );
    if let Some(w) = &out.wss {
        fluid = fluid.point("wss", 3, w.vertex_data(fluid_mesh.n_vertices()));
    }
    write_vtu(fluid_mesh, &fluid, &dir.join("fluid.vtu"))?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    serde_json::to_writer_pretty(f, value).with_context(|| format!("cannot write {}", path.display()))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Lower bounds on the observed orders of velocity, pressure and temperature.
const MIN_ORDERS: [f64; 3] = [2.7, 1.7, 1.7];

/// Returns whether every level converged.
pub fn mms(args: &MmsArgs) -> Result<bool> {
    ensure!((1..=8).contains(&args.levels), "--levels must lie between 1 and 8, got {}", args.levels);
    let (base, newton, tree) = match &args.config {
        Some(path) => {
            let (cfg, _) = Config::load(path)?;
            let tree = cfg.solver.tree()?;
            (cfg.scenario, cfg.newton, tree)
        }
        None => (make_mms_scenario(4, MmsKind::Trig), NewtonConfig::default(), SolverTree::schur_upper()),
    };
    let Some(Generator::Mms { n, .. }) = base.mesh.generator else {
        bail!("mms-convergence needs a config with the `mms` mesh generator");
    };
    let levels: Vec<usize> = (0..args.levels).map(|i| n << i).collect();
    let rows = study::mms_convergence(&base, &levels, &newton, &tree)?;

    create_dir(&args.out)?;
    write_mms_table(&args.out.join("mms.csv"), &rows)?;
    for r in &rows {
        println!(
            "n {:>4}  err_u {:.4e}  err_p {:.4e}  err_T {:.4e}  orders {} {} {}",
            r.n,
            r.err_u,
            r.err_p,
            r.err_t,
            fmt_rate(r.rate_u),
            fmt_rate(r.rate_p),
            fmt_rate(r.rate_t)
        );
    }
    for msg in study::order_shortfalls(&rows, MIN_ORDERS) {
        eprintln!("warning: {msg}");
    }
    Ok(rows.iter().all(|r| r.converged))
}

fn fmt_rate(r: Option<f64>) -> String {
    r.map_or_else(|| "-".into(), |r| format!("{r:.3}"))
}

/// Rate columns only appear when there is more than one level.
fn write_mms_table(path: &Path, rows: &[MmsRow]) -> Result<()> {
    let rates = rows.len() > 1;
    let mut w = csv_writer(path)?;
    let mut header = vec!["n", "h", "err_u", "err_p", "err_t"];
    if rates {
        header.extend(["rate_u", "rate_p", "rate_t"]);
    }
    header.extend(["newton_iterations", "converged"]);
    w.write_record(&header)?;
    for r in rows {
        let mut rec =
            vec![r.n.to_string(), r.h.to_string(), r.err_u.to_string(), r.err_p.to_string(), r.err_t.to_string()];
        if rates {
            rec.extend([opt(r.rate_u), opt(r.rate_p), opt(r.rate_t)]);
        }
        rec.extend([r.newton_iterations.to_string(), r.converged.to_string()]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses `a,b,c` or an inclusive range `start:stop:step`.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let parse = |s: &str| -> Result<f64> {
        let v: f64 = s.trim().parse().with_context(|| format!("`{s}` is not a number"))?;
        ensure!(v.is_finite(), "`{s}` is not finite");
        Ok(v)
    };
    let mut values = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        ensure!(parts.len() == 3, "a range is written start:stop:step, got `{text}`");
        let (a, b, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        ensure!(step > 0.0 && b >= a, "range `{text}` needs start <= stop and a positive step");
        // Counting steps keeps the points free of accumulated rounding.
        let n = ((b - a) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| a + i as f64 * step).collect()
    } else {
        text.split(',').filter(|s| !s.trim().is_empty()).map(parse).collect::<Result<Vec<_>>>()?
    };
    ensure!(!values.is_empty(), "no sweep values given");
    values.sort_by(f64::total_cmp);
    values.dedup();
    Ok(values)
}

fn sweep_column(param: &str) -> String {
    if param == "params.T_amb" {
        "TAMB".into()
    } else {
        param.to_string()
    }
}

/// Returns whether every point converged.
pub fn sweep(args: &SweepArgs) -> Result<bool> {
    ensure!(args.jobs > 0, "--jobs must be at least 1");
    let (cfg, _) = Config::load(&args.config)?;
    let tree = cfg.solver.tree()?;
    let values = parse_values(&args.values)?;
    // Reject a bad key up front rather than once per point.
    study::set_param(&mut cfg.scenario.clone(), &args.param, values[0])?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build()?;
    let rows: Vec<SweepRow> = pool.install(|| {
        values.par_iter().map(|&v| study::sweep_point(&cfg.scenario, &args.param, v, &cfg.newton, &tree)).collect()
    });

    create_dir(&args.out)?;
    let path = args.out.join("sweep.csv");
    let mut w = csv_writer(&path)?;
    w.write_record([
        sweep_column(&args.param).as_str(),
        "WSS_total",
        "WSS_cornea",
        "WSS_iris",
        "u_max",
        "iterations",
        "status",
    ])?;
    for r in &rows {
        w.write_record([
            r.value.to_string(),
            r.wss_total.to_string(),
            opt(r.wss_cornea),
            opt(r.wss_iris),
            r.u_max.to_string(),
            r.iterations.to_string(),
            r.status.clone(),
        ])?;
        println!("{:>10}  WSS_total {:.5e}  {}", r.value, r.wss_total, r.status);
    }
    w.flush()?;
    if let Some(v) = study::sweep_minimum(&rows) {
        println!("smallest mean wall shear stress at {} = {v}", args.param);
    }
    Ok(rows.iter().all(|r| r.status == "converged"))
}

fn split_list(text: &str) -> Vec<&str> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

/// Returns whether every case converged.
pub fn bench(args: &BenchArgs) -> Result<bool> {
    let (cfg, _) = Config::load(&args.config)?;
    let trees = split_list(&args.trees).into_iter().map(SolverTree::preset).collect::<ocuflow::Result<Vec<_>>>()?;
    ensure!(trees.len() >= 2, "--trees needs at least two presets to compare");
    let variants: Vec<Variant> = if args.variants.trim() == "all" {
        Variant::ALL.to_vec()
    } else {
        split_list(&args.variants).into_iter().map(Variant::parse).collect::<ocuflow::Result<_>>()?
    };
    ensure!(!variants.is_empty(), "--variants is empty");
    let cases: Vec<(SolverTree, Variant)> =
        variants.iter().flat_map(|v| trees.iter().map(move |t| (t.clone(), *v))).collect();
    let (rows, timings) = study::bench(&cfg.scenario, &cases, &cfg.newton);

    create_dir(&args.out)?;
    write_records(&args.out.join("bench.csv"), &rows)?;
    write_records(&args.out.join("bench_timings.csv"), &timings)?;
    for r in &rows {
        println!(
            "{:<24} {:<26} newton {:>3}  linear {:>6}  {}",
            r.tree, r.variant, r.newton_iterations, r.linear_iterations, r.status
        );
    }
    Ok(rows.iter().all(|r| r.converged))
}

#[cfg(test)]
mod tests {
    use super::parse_values;

    #[test]
    fn ranges_are_inclusive_and_lists_are_sorted() {
        assert_eq!(parse_values("283:323:5").unwrap().len(), 9);
        assert_eq!(parse_values("0.1:0.3:0.1").unwrap(), [0.1, 0.2, 0.30000000000000004]);
        assert_eq!(parse_values("310, 290,300,290").unwrap(), [290.0, 300.0, 310.0]);
        for bad in ["", "1:2", "3:1:1", "1:2:0", "a,b", "1,nan"] {
            assert!(parse_values(bad).is_err(), "{bad}");
        }
    }
}
