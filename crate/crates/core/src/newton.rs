//! Damped Newton iteration for the coupled flow and heat problem.
//!
//! Each step assembles the Jacobian at the current iterate, solves the
//! scaled correction system with a [`SolverTree`], and relaxes the update
//! with a backtracking line search (see [`Merit`]). Norms of
//! increments are Euclidean norms of coefficient vectors, so the stopping
//! quantity does not depend on the order of the unknowns.

use std::io::Write;
use std::path::Path;
use web_time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{Problem, State};
use crate::krylov::{norm2, BlockSystem, SolverTree, TreeSolver};

/// Quantity whose decrease the line search demands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Merit {
    /// Norm of the simplified Newton correction `J(x_k)^{-1} R(x)` in
    /// scaled unknowns. Invariant under rescaling of the equations, so
    /// full steps are kept when the raw residual grows only transiently.
    #[default]
    Natural,
    /// Weighted residual norm.
    Residual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum LineSearch {
    /// Always take the full step.
    None,
    /// Shrink the step until `m(x + a d) <= (1 - c a) m(x)`.
    Backtracking {
        c: f64,
        shrink: f64,
        max_halvings: usize,
        #[serde(default)]
        merit: Merit,
    },
}

impl Default for LineSearch {
    fn default() -> Self {
        LineSearch::Backtracking { c: 0.1, shrink: 0.5, max_halvings: 10, merit: Merit::Natural }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonConfig {
    /// Tolerance on the relative increment `Crit`.
    pub eps_tol: f64,
    pub max_iters: usize,
    pub line_search: LineSearch,
    /// The iteration also stops once the weighted residual drops below
    /// `res_tol` times the larger of the initial residual and the load.
    /// Zero disables this exit.
    pub res_tol: f64,
    /// Keep the radiation Jacobian at the initial temperature instead of
    /// re-linearizing it every step.
    pub freeze_radiation: bool,
    /// Start from the conduction solution with the prescribed velocity.
    pub conduction_start: bool,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            eps_tol: 1e-8,
            max_iters: 25,
            line_search: LineSearch::default(),
            res_tol: 1e-7,
            freeze_radiation: false,
            conduction_start: true,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_tol > 0.0) {
            return Err(Error::Config(format!("newton.eps_tol must be positive, got {}", self.eps_tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("newton.max_iters must be at least 1".into()));
        }
        if !(self.res_tol >= 0.0) {
            return Err(Error::Config(format!("newton.res_tol must be non-negative, got {}", self.res_tol)));
        }
        if let LineSearch::Backtracking { c, shrink, .. } = self.line_search {
            if !(shrink > 0.0 && shrink < 1.0) {
                return Err(Error::Config(format!("line search shrink must lie in (0, 1), got {shrink}")));
            }
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::Config(format!("line search c must lie in (0, 1), got {c}")));
            }
        }
        Ok(())
    }
}

/// `max_i |d_i| / |d0_i|` over the fields whose first increment is nonzero.
pub fn compute_crit(deltas: [f64; 3], deltas0: [f64; 3]) -> f64 {
    deltas.iter().zip(&deltas0).filter(|(_, &d0)| d0 > 0.0).map(|(&d, &d0)| d / d0).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepStatus {
    /// The sufficient-decrease condition held.
    Accepted,
    /// Full step taken without a decrease test.
    Full,
    /// No trial step satisfied the decrease test; the smallest was taken.
    MaxHalvings,
    /// The search direction vanished.
    Stagnation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchResult {
    pub alpha: f64,
    /// Residual norm at the accepted point.
    pub residual: f64,
    pub status: StepStatus,
}

/// Backtracking along `direction` from `x`. `residual` maps a point to its
/// residual norm; `r0` is that norm at `x`. Trial points with a non-finite
/// or failing residual count as rejected.
pub fn line_search(
    x: &[f64],
    direction: &[f64],
    r0: f64,
    residual: impl Fn(&[f64]) -> Result<f64>,
    ls: &LineSearch,
) -> Result<LineSearchResult> {
    if direction.iter().all(|&d| d == 0.0) {
        return Ok(LineSearchResult { alpha: 1.0, residual: r0, status: StepStatus::Stagnation });
    }
    let trial = |alpha: f64| -> Option<f64> {
        let y: Vec<f64> = x.iter().zip(direction).map(|(a, d)| a + alpha * d).collect();
        residual(&y).ok().filter(|r| r.is_finite())
    };
    let (c, shrink, max_halvings) = match *ls {
        LineSearch::None => {
            let r = trial(1.0).ok_or_else(|| Error::NonFinite("residual after a full Newton step".into()))?;
            return Ok(LineSearchResult { alpha: 1.0, residual: r, status: StepStatus::Full });
        }
        LineSearch::Backtracking { c, shrink, max_halvings, .. } => (c, shrink, max_halvings),
    };
    let mut alpha = 1.0;
    let mut last = None;
    for _ in 0..=max_halvings {
        if let Some(r) = trial(alpha) {
            if r <= (1.0 - c * alpha) * r0 {
                return Ok(LineSearchResult { alpha, residual: r, status: StepStatus::Accepted });
            }
            last = Some((alpha, r));
        }
        alpha *= shrink;
    }
    match last {
        Some((alpha, residual)) => {
            log::warn!("line search found no sufficient decrease; taking alpha = {alpha:e}");
            Ok(LineSearchResult { alpha, residual, status: StepStatus::MaxHalvings })
        }
        None => Err(Error::NonFinite("residual at every line-search trial point".into())),
    }
}

/// One Newton iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewtonStep {
    pub k: usize,
    pub crit: f64,
    /// Euclidean norms of the residual blocks after the update.
    pub res_u: f64,
    pub res_p: f64,
    pub res_t: f64,
    /// Weighted residual norm, used by the residual exit.
    pub res_weighted: f64,
    pub alpha: f64,
    pub line_search: StepStatus,
    pub linear_iterations: usize,
    #[serde(skip)]
    pub linear_relative_residual: f64,
    #[serde(skip)]
    pub assembly_seconds: f64,
    #[serde(skip)]
    pub solve_seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NewtonLog {
    pub steps: Vec<NewtonStep>,
    /// Weighted residual of the initial guess.
    pub initial_residual: f64,
    pub converged: bool,
    /// Newton steps spent on the conduction initial guess.
    pub conduction_iterations: usize,
    pub conduction_seconds: f64,
}

impl NewtonLog {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    pub fn crit_history(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.crit).collect()
    }

    pub fn assembly_seconds(&self) -> f64 {
        self.steps.iter().map(|s| s.assembly_seconds).sum()
    }

    pub fn solve_seconds(&self) -> f64 {
        self.steps.iter().map(|s| s.solve_seconds).sum::<f64>() + self.conduction_seconds
    }

    /// One row per iteration. Wall-clock times are left out so that
    /// repeated runs give identical files.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for s in &self.steps {
            w.serialize(s).map_err(|e| Error::Config(format!("writing Newton log: {e}")))?;
        }
        w.flush().map_err(|e| Error::io("<newton log>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub state: State,
    pub log: NewtonLog,
}

impl NewtonOutcome {
    pub fn converged(&self) -> bool {
        self.log.converged
    }
}

fn field_norms(pb: &Problem, v: &[f64]) -> [f64; 3] {
    let (nu, np, _) = pb.sizes();
    [norm2(&v[..nu]), norm2(&v[nu..nu + np]), norm2(&v[nu + np..])]
}

fn solve_with(solver: &TreeSolver, rhs: &[f64]) -> Result<(Vec<f64>, usize, f64)> {
    let mut y = vec![0.0; rhs.len()];
    let rep = solver.solve(rhs, &mut y)?;
    if !rep.outer.converged {
        return Err(Error::LinearSolve {
            iterations: rep.outer.iterations,
            relative_residual: rep.outer.relative_residual(),
        });
    }
    Ok((y, rep.outer.iterations, rep.outer.relative_residual()))
}

/// Solves the heat equation alone with the velocity of `state` held fixed.
/// Returns the new state and the number of Newton steps used.
pub fn conduction_solve(pb: &Problem, state: &State, tree: &SolverTree) -> Result<(State, usize)> {
    let mut s = state.clone();
    let (nu, np, nt) = pb.sizes();
    let theta = pb.scaling.temperature;
    for k in 1..=50 {
        let sys = pb.newton_system(&s, &s.t)?;
        let (full, rhs) = sys.scaled();
        let idx: Vec<usize> = (nu + np..nu + np + nt).collect();
        let heat = BlockSystem {
            matrix: full.matrix.submatrix(&idx, &idx),
            n_u: 0,
            n_p: 0,
            n_t: nt,
            components: 1,
            pressure_mass: None,
            schur_scale: 1.0,
            pressure_nullspace: false,
        };
        let (y, _, _) = TreeSolver::new(tree, &heat)
            .and_then(|solver| solve_with(&solver, &rhs[nu + np..]))
            .map_err(|e| Error::Newton { iteration: k, source: Box::new(e.in_block("conduction")) })?;
        let step = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (t, v) in s.t.iter_mut().zip(&y) {
            *t += v * theta;
        }
        if !s.is_finite() {
            return Err(Error::NonFinite(format!("temperature after conduction step {k}")));
        }
        // the heat problem is only mildly nonlinear through radiation
        if step <= 1e-11 {
            return Ok((s, k));
        }
    }
    Err(Error::Newton {
        iteration: 50,
        source: Box::new(Error::NonFinite("conduction initial guess did not settle".into())),
    })
}

/// Runs the Newton iteration from `init`. Failing to meet the tolerances
/// within `max_iters` is not an error: the returned log then has
/// `converged == false`.
pub fn newton_solve(pb: &Problem, init: &State, cfg: &NewtonConfig, tree: &SolverTree) -> Result<NewtonOutcome> {
    cfg.validate()?;
    tree.validate()?;
    let (nu, np, nt) = pb.sizes();
    if init.u.len() != nu || init.p.len() != np || init.t.len() != nt {
        return Err(Error::DimensionMismatch(format!(
            "initial state has sizes ({}, {}, {}), the problem ({nu}, {np}, {nt})",
            init.u.len(),
            init.p.len(),
            init.t.len()
        )));
    }
    let mut log = NewtonLog::default();
    let mut state = init.clone();
    let weighted = |x: &[f64]| -> Result<f64> {
        let s = State::from_slice(x, nu, np);
        Ok(pb.weighted_norm(&pb.residual(&s)?))
    };
    // The residual of the caller's guess carries the size of the boundary
    // data, which the conduction guess may already have absorbed.
    let guess_residual = weighted(&init.to_vec())?;
    if cfg.conduction_start {
        let start = Instant::now();
        let (s, k) = conduction_solve(pb, &state, tree)?;
        state = s;
        log.conduction_iterations = k;
        log.conduction_seconds = start.elapsed().as_secs_f64();
    }
    let rad_frozen = state.t.clone();

    let mut r_norm = weighted(&state.to_vec())?;
    log.initial_residual = r_norm;
    let reference = r_norm.max(guess_residual).max(pb.load_norm());
    let mut d0: Option<[f64; 3]> = None;

    for k in 1..=cfg.max_iters {
        let wrap = |e: Error| Error::Newton { iteration: k, source: Box::new(e) };
        let t_asm = Instant::now();
        let rad_t = if cfg.freeze_radiation { &rad_frozen } else { &state.t };
        let sys = pb.newton_system(&state, rad_t).map_err(wrap)?;
        let (scaled, rhs) = sys.scaled();
        let assembly_seconds = t_asm.elapsed().as_secs_f64();

        let t_solve = Instant::now();
        let solver = TreeSolver::new(tree, &scaled).map_err(wrap)?;
        let (y, linear_iterations, linear_rel) = solve_with(&solver, &rhs).map_err(wrap)?;
        let mut d = sys.unscale(&y);
        crate::krylov::remove_mean(&mut d[nu..nu + np]);

        let x = state.to_vec();
        let ls = match cfg.line_search {
            LineSearch::Backtracking { merit: Merit::Natural, .. } => {
                // the correction of the frozen Jacobian at a trial point
                let natural = |x: &[f64]| -> Result<f64> {
                    let r = pb.residual(&State::from_slice(x, nu, np))?;
                    Ok(norm2(&solve_with(&solver, &sys.scale_residual(&r))?.0))
                };
                let mut ls = line_search(&x, &d, norm2(&y), natural, &cfg.line_search).map_err(wrap)?;
                ls.residual = weighted(&state.updated(ls.alpha, &d).to_vec()).map_err(wrap)?;
                ls
            }
            _ => line_search(&x, &d, r_norm, weighted, &cfg.line_search).map_err(wrap)?,
        };
        let solve_seconds = t_solve.elapsed().as_secs_f64();

        state = state.updated(ls.alpha, &d);
        if !state.is_finite() {
            return Err(wrap(Error::NonFinite("state after the Newton update".into())));
        }
        r_norm = ls.residual;

        let step: Vec<f64> = d.iter().map(|v| v * ls.alpha).collect();
        let norms = field_norms(pb, &step);
        let first = *d0.get_or_insert(norms);
        let crit = compute_crit(norms, first);
        let res = field_norms(pb, &pb.residual(&state).map_err(wrap)?);
        log.steps.push(NewtonStep {
            k,
            crit,
            res_u: res[0],
            res_p: res[1],
            res_t: res[2],
            res_weighted: r_norm,
            alpha: ls.alpha,
            line_search: ls.status,
            linear_iterations,
            linear_relative_residual: linear_rel,
            assembly_seconds,
            solve_seconds,
        });
        log::info!(
            "newton {k}: crit {crit:.3e}, residual {r_norm:.3e}, alpha {}, {linear_iterations} linear iterations",
            ls.alpha
        );

        let by_increment = crit <= cfg.eps_tol && r_norm <= 1e-6 * reference;
        let by_residual = r_norm <= cfg.res_tol * reference;
        if by_increment || by_residual || reference == 0.0 {
            log.converged = true;
            break;
        }
    }
    if !log.converged {
        log::warn!("Newton did not converge in {} iterations", cfg.max_iters);
    }
    Ok(NewtonOutcome { state, log })
}
