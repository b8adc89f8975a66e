//! Declarative nested solver configuration and its realization as
//! preconditioners over a velocity/pressure/temperature block system.
//!
//! Unknowns are ordered `[u (component-major), p, T]`. The outer Krylov
//! method sees the whole matrix; the fieldsplit preconditioner treats the
//! fluid block `[A B^T; B 0]` and the heat block independently, the fluid
//! block in turn is preconditioned by the upper block-triangular Schur
//! factorization.

use std::cell::Cell;
use std::ops::Range;
use web_time::Instant;

use serde::{Deserialize, Serialize};

use super::amg::{AmgHierarchy, AmgOptions};
use super::dense::DenseLu;
use super::gmres::{gmres, GmresOptions, Identity, LinearOperator, Preconditioner, SolveReport};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KspType {
    Gmres,
    Fgmres,
    /// Apply the node's preconditioner exactly once.
    Preonly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KspNode {
    pub ksp: KspType,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_restart")]
    pub restart: usize,
}

fn default_tol() -> f64 {
    1e-5
}
fn default_max_iters() -> usize {
    1000
}
fn default_restart() -> usize {
    100
}

impl KspNode {
    pub fn preonly() -> Self {
        KspNode { ksp: KspType::Preonly, tol: default_tol(), max_iters: 1, restart: 1 }
    }
    pub fn krylov(ksp: KspType, tol: f64, max_iters: usize) -> Self {
        KspNode { ksp, tol, max_iters, restart: default_restart() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OuterPc {
    FieldsplitAdditive,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluidPc {
    SchurUpper,
    None,
}

/// Preconditioner of a leaf block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockPc {
    Amg,
    /// One AMG hierarchy per velocity component, couplings ignored.
    BlockJacobi,
    /// Dense LU; only sensible for small verification problems.
    Exact,
    None,
}

/// Matrix standing in for the (never formed) Schur complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchurApprox {
    /// Pressure mass matrix scaled by the inverse viscosity.
    Mass,
    /// `B diag(A)^{-1} B^T`.
    DiagA,
    /// Dense `B A^{-1} B^T`; verification only.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverTree {
    pub name: String,
    pub outer: KspNode,
    pub outer_pc: OuterPc,
    pub heat: KspNode,
    pub heat_pc: BlockPc,
    pub fluid: KspNode,
    pub fluid_pc: FluidPc,
    pub velocity: KspNode,
    pub velocity_pc: BlockPc,
    pub schur: KspNode,
    pub schur_pc: BlockPc,
    pub schur_approx: SchurApprox,
    #[serde(default)]
    pub amg: AmgOptions,
}

/// Largest block for which a dense factorization is attempted.
const DENSE_LIMIT: usize = 4000;

impl SolverTree {
    /// The nested configuration used for the production runs: flexible
    /// outer GMRES, additive fieldsplit, GMRES+AMG on heat, FGMRES with the
    /// upper Schur factorization on the fluid, single sweeps of block Jacobi
    /// (velocity) and AMG on the pressure mass matrix (Schur).
    pub fn schur_upper() -> Self {
        SolverTree {
            name: "schur-upper".into(),
            outer: KspNode { ksp: KspType::Fgmres, tol: 1e-8, max_iters: 1000, restart: 100 },
            outer_pc: OuterPc::FieldsplitAdditive,
            heat: KspNode::krylov(KspType::Gmres, 1e-5, 200),
            heat_pc: BlockPc::Amg,
            fluid: KspNode::krylov(KspType::Fgmres, 1e-5, 200),
            fluid_pc: FluidPc::SchurUpper,
            velocity: KspNode::preonly(),
            velocity_pc: BlockPc::BlockJacobi,
            schur: KspNode::preonly(),
            schur_pc: BlockPc::Amg,
            schur_approx: SchurApprox::Mass,
            amg: AmgOptions::default(),
        }
    }

    /// Same as [`SolverTree::schur_upper`] but with a short inner GMRES around
    /// the velocity block, for strongly convective velocity blocks.
    pub fn schur_upper_velocity_gmres() -> Self {
        SolverTree {
            name: "schur-upper-velocity-gmres".into(),
            velocity: KspNode::krylov(KspType::Gmres, 1e-2, 10),
            ..Self::schur_upper()
        }
    }

    pub fn unpreconditioned() -> Self {
        SolverTree {
            name: "unpreconditioned".into(),
            outer: KspNode { ksp: KspType::Gmres, tol: 1e-8, max_iters: 20000, restart: 100 },
            outer_pc: OuterPc::None,
            ..Self::schur_upper()
        }
    }

    /// Dense inner solves everywhere; for small verification problems.
    pub fn exact() -> Self {
        SolverTree {
            name: "exact".into(),
            heat: KspNode::preonly(),
            heat_pc: BlockPc::Exact,
            velocity: KspNode::preonly(),
            velocity_pc: BlockPc::Exact,
            schur: KspNode::preonly(),
            schur_pc: BlockPc::Exact,
            schur_approx: SchurApprox::Exact,
            fluid: KspNode::preonly(),
            ..Self::schur_upper()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "schur-upper" => Ok(Self::schur_upper()),
            "schur-upper-velocity-gmres" => Ok(Self::schur_upper_velocity_gmres()),
            "unpreconditioned" => Ok(Self::unpreconditioned()),
            "exact" => Ok(Self::exact()),
            _ => {
                Err(Error::InvalidTree(format!("unknown preset `{name}` (known: {})", Self::preset_names().join(", "))))
            }
        }
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["schur-upper", "schur-upper-velocity-gmres", "unpreconditioned", "exact"]
    }

    pub fn validate(&self) -> Result<()> {
        let nodes = [
            ("outer", &self.outer, self.outer_pc != OuterPc::None),
            ("heat", &self.heat, self.heat_pc != BlockPc::None),
            ("fluid", &self.fluid, self.fluid_pc != FluidPc::None),
            ("velocity", &self.velocity, self.velocity_pc != BlockPc::None),
            ("schur", &self.schur, self.schur_pc != BlockPc::None),
        ];
        for (name, node, has_pc) in nodes {
            if node.ksp == KspType::Preonly && !has_pc {
                return Err(Error::InvalidTree(format!("preonly node `{name}` has no preconditioner")));
            }
            if node.ksp != KspType::Preonly {
                if !(node.tol > 0.0 && node.tol < 1.0) {
                    return Err(Error::InvalidTree(format!("node `{name}` tolerance {} not in (0, 1)", node.tol)));
                }
                if node.max_iters == 0 || node.restart == 0 {
                    return Err(Error::InvalidTree(format!("node `{name}` needs positive max_iters and restart")));
                }
            }
        }
        if self.outer.ksp == KspType::Preonly {
            return Err(Error::InvalidTree("the outer node must be a Krylov method".into()));
        }
        if matches!(self.heat_pc, BlockPc::BlockJacobi) || matches!(self.schur_pc, BlockPc::BlockJacobi) {
            return Err(Error::InvalidTree("block Jacobi applies to the velocity block only".into()));
        }
        if self.amg.strength < 0.0 || !(self.amg.omega > 0.0 && self.amg.omega < 2.0) {
            return Err(Error::InvalidTree("AMG strength must be >= 0 and omega in (0, 2)".into()));
        }
        Ok(())
    }
}

/// An assembled linear system in `[u, p, T]` block ordering.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub matrix: CsrMatrix,
    pub n_u: usize,
    pub n_p: usize,
    pub n_t: usize,
    /// Number of velocity components; the velocity range is split evenly.
    pub components: usize,
    /// Pressure mass matrix, required by [`SchurApprox::Mass`].
    pub pressure_mass: Option<CsrMatrix>,
    /// The Schur complement is approximated by `-schur_scale * M_p`.
    pub schur_scale: f64,
    /// Constant pressures are in the kernel and get projected out.
    pub pressure_nullspace: bool,
}

impl BlockSystem {
    pub fn n(&self) -> usize {
        self.n_u + self.n_p + self.n_t
    }
    pub fn velocity_range(&self) -> Range<usize> {
        0..self.n_u
    }
    pub fn pressure_range(&self) -> Range<usize> {
        self.n_u..self.n_u + self.n_p
    }
    pub fn heat_range(&self) -> Range<usize> {
        self.n_u + self.n_p..self.n()
    }

    /// Removes the mean of the pressure part of a full-length vector.
    pub fn project_pressure(&self, v: &mut [f64]) {
        if self.pressure_nullspace && self.n_p > 0 {
            super::remove_mean(&mut v[self.pressure_range()]);
        }
    }

    fn check(&self) -> Result<()> {
        let n = self.n();
        if self.matrix.nrows != n || self.matrix.ncols != n {
            return Err(Error::DimensionMismatch(format!(
                "block sizes {}+{}+{} do not match a {}x{} matrix",
                self.n_u, self.n_p, self.n_t, self.matrix.nrows, self.matrix.ncols
            )));
        }
        if self.n_u > 0 && (self.components == 0 || !self.n_u.is_multiple_of(self.components)) {
            return Err(Error::DimensionMismatch(format!(
                "{} velocity unknowns cannot be split into {} components",
                self.n_u, self.components
            )));
        }
        if let Some(m) = &self.pressure_mass {
            if m.nrows != self.n_p || m.ncols != self.n_p {
                return Err(Error::DimensionMismatch("pressure mass matrix size".into()));
            }
        }
        Ok(())
    }
}

fn range_vec(r: Range<usize>) -> Vec<usize> {
    r.collect()
}

/// Approximate inverse of a single matrix.
enum Inverse {
    Identity,
    Amg(AmgHierarchy),
    Lu(DenseLu),
    BlockJacobi(Vec<(Range<usize>, Inverse)>),
}

impl Inverse {
    fn build(pc: BlockPc, a: &CsrMatrix, components: usize, opts: &AmgOptions) -> Result<Self> {
        Ok(match pc {
            BlockPc::None => Inverse::Identity,
            BlockPc::Amg => Inverse::Amg(AmgHierarchy::build(a, opts)?),
            BlockPc::Exact => Inverse::Lu(dense_lu(a)?),
            BlockPc::BlockJacobi => {
                let m = a.nrows / components.max(1);
                let mut blocks = Vec::with_capacity(components);
                for c in 0..components {
                    let r = c * m..(c + 1) * m;
                    let idx = range_vec(r.clone());
                    let sub = a.submatrix(&idx, &idx);
                    blocks.push((r, Inverse::Amg(AmgHierarchy::build(&sub, opts)?)));
                }
                Inverse::BlockJacobi(blocks)
            }
        })
    }
}

impl Preconditioner for Inverse {
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        match self {
            Inverse::Identity => z.copy_from_slice(r),
            Inverse::Amg(h) => h.vcycle(r, z),
            Inverse::Lu(lu) => lu.solve(r, z),
            Inverse::BlockJacobi(blocks) => {
                for (range, inv) in blocks {
                    inv.apply(&r[range.clone()], &mut z[range.clone()])?;
                }
            }
        }
        Ok(())
    }
}

fn dense_lu(a: &CsrMatrix) -> Result<DenseLu> {
    if a.nrows > DENSE_LIMIT {
        return Err(Error::InvalidTree(format!(
            "exact solve requested on a {}x{} block (limit {DENSE_LIMIT})",
            a.nrows, a.nrows
        )));
    }
    DenseLu::from_rows(&a.to_dense())
}

/// A solver node: either one preconditioner application or an inner
/// Krylov solve from a zero initial guess.
struct KspSolve {
    name: &'static str,
    node: KspNode,
    op: CsrMatrix,
    pc: Box<dyn Preconditioner>,
    /// Range inside this node's vector whose mean is projected out.
    nullspace: Option<Range<usize>>,
    iterations: Cell<usize>,
    calls: Cell<usize>,
}

impl KspSolve {
    fn new(
        name: &'static str,
        node: KspNode,
        op: CsrMatrix,
        pc: Box<dyn Preconditioner>,
        nullspace: Option<Range<usize>>,
    ) -> Self {
        KspSolve { name, node, op, pc, nullspace, iterations: Cell::new(0), calls: Cell::new(0) }
    }

    fn project(&self, v: &mut [f64]) {
        if let Some(r) = &self.nullspace {
            super::remove_mean(&mut v[r.clone()]);
        }
    }
}

impl Preconditioner for KspSolve {
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        self.calls.set(self.calls.get() + 1);
        if self.node.ksp == KspType::Preonly {
            self.pc.apply(r, z).map_err(|e| e.in_block(self.name))?;
            self.project(z);
            return Ok(());
        }
        let opts = GmresOptions {
            tol: self.node.tol,
            restart: self.node.restart,
            max_iters: self.node.max_iters,
            flexible: self.node.ksp == KspType::Fgmres || !self.pc.is_stationary(),
            record_iterates: false,
        };
        z.fill(0.0);
        let proj = |v: &mut [f64]| self.project(v);
        let projector: Option<&dyn Fn(&mut [f64])> = if self.nullspace.is_some() { Some(&proj) } else { None };
        let rep = gmres(&self.op, r, z, self.pc.as_ref(), &opts, projector).map_err(|e| e.in_block(self.name))?;
        self.iterations.set(self.iterations.get() + rep.iterations);
        Ok(())
    }

    fn is_stationary(&self) -> bool {
        self.node.ksp == KspType::Preonly && self.pc.is_stationary()
    }
}

/// Upper block-triangular factor `[A B^T; 0 S]^{-1}`: the pressure is
/// solved first with the Schur approximation, then the velocity sees the
/// corrected momentum residual.
struct SchurUpper {
    n_u: usize,
    bt: CsrMatrix,
    a_inv: KspSolve,
    s_inv: KspSolve,
    /// `z_p = s_factor * s_inv(r_p)`.
    s_factor: f64,
}

impl Preconditioner for SchurUpper {
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        let (ru, rp) = r.split_at(self.n_u);
        let (zu, zp) = z.split_at_mut(self.n_u);
        self.s_inv.apply(rp, zp)?;
        zp.iter_mut().for_each(|v| *v *= self.s_factor);
        let mut t = ru.to_vec();
        self.bt.matvec_add(-1.0, zp, &mut t);
        self.a_inv.apply(&t, zu)
    }

    fn is_stationary(&self) -> bool {
        self.a_inv.is_stationary() && self.s_inv.is_stationary()
    }
}

/// Block-diagonal preconditioner over the fluid and heat blocks.
struct FieldsplitAdditive {
    n_f: usize,
    fluid: Option<KspSolve>,
    heat: Option<KspSolve>,
}

impl Preconditioner for FieldsplitAdditive {
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        let (rf, rt) = r.split_at(self.n_f);
        let (zf, zt) = z.split_at_mut(self.n_f);
        match &self.fluid {
            Some(f) => f.apply(rf, zf)?,
            None => zf.copy_from_slice(rf),
        }
        match &self.heat {
            Some(h) => h.apply(rt, zt)?,
            None => zt.copy_from_slice(rt),
        }
        Ok(())
    }

    fn is_stationary(&self) -> bool {
        self.fluid.as_ref().is_none_or(|f| f.is_stationary()) && self.heat.as_ref().is_none_or(|h| h.is_stationary())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BlockStats {
    pub name: String,
    pub applications: usize,
    pub inner_iterations: usize,
}

#[derive(Debug, Clone, Default)]
pub struct TreeReport {
    pub outer: SolveReport,
    pub blocks: Vec<BlockStats>,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
}

/// A [`SolverTree`] bound to a [`BlockSystem`], with all hierarchies built.
pub struct TreeSolver<'a> {
    tree: SolverTree,
    system: &'a BlockSystem,
    fieldsplit: Option<FieldsplitAdditive>,
    setup_seconds: f64,
}

impl<'a> TreeSolver<'a> {
    pub fn new(tree: &SolverTree, system: &'a BlockSystem) -> Result<Self> {
        tree.validate()?;
        system.check()?;
        let start = Instant::now();
        let fieldsplit = match tree.outer_pc {
            OuterPc::None => None,
            OuterPc::FieldsplitAdditive => Some(build_fieldsplit(tree, system)?),
        };
        Ok(TreeSolver { tree: tree.clone(), system, fieldsplit, setup_seconds: start.elapsed().as_secs_f64() })
    }

    pub fn tree(&self) -> &SolverTree {
        &self.tree
    }

    /// Solves `K x = b`, starting from the given `x`.
    pub fn solve(&self, b: &[f64], x: &mut [f64]) -> Result<TreeReport> {
        let start = Instant::now();
        let pc: &dyn Preconditioner = match &self.fieldsplit {
            Some(f) => f,
            None => &Identity,
        };
        let opts = GmresOptions {
            tol: self.tree.outer.tol,
            restart: self.tree.outer.restart,
            max_iters: self.tree.outer.max_iters,
            flexible: self.tree.outer.ksp == KspType::Fgmres || !pc.is_stationary(),
            record_iterates: false,
        };
        let proj = |v: &mut [f64]| self.system.project_pressure(v);
        let projector: Option<&dyn Fn(&mut [f64])> =
            if self.system.pressure_nullspace && self.system.n_p > 0 { Some(&proj) } else { None };
        let mut rhs = b.to_vec();
        self.system.project_pressure(&mut rhs);
        let outer = gmres(&self.system.matrix, &rhs, x, pc, &opts, projector)?;
        Ok(TreeReport {
            outer,
            blocks: self.block_stats(),
            setup_seconds: self.setup_seconds,
            solve_seconds: start.elapsed().as_secs_f64(),
        })
    }

    fn block_stats(&self) -> Vec<BlockStats> {
        let Some(fs) = &self.fieldsplit else { return Vec::new() };
        let stats = |k: &KspSolve| BlockStats {
            name: k.name.to_string(),
            applications: k.calls.get(),
            inner_iterations: k.iterations.get(),
        };
        fs.fluid.iter().chain(fs.heat.iter()).map(stats).collect()
    }
}

impl LinearOperator for BlockSystem {
    fn dim(&self) -> usize {
        self.n()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.matrix.matvec(x, y);
        Ok(())
    }
}

fn build_fieldsplit(tree: &SolverTree, sys: &BlockSystem) -> Result<FieldsplitAdditive> {
    let n_f = sys.n_u + sys.n_p;
    let heat = if sys.n_t > 0 {
        let idx = range_vec(sys.heat_range());
        let k11 = sys.matrix.submatrix(&idx, &idx);
        let inv = Inverse::build(tree.heat_pc, &k11, 1, &tree.amg).map_err(|e| e.in_block("heat"))?;
        Some(KspSolve::new("heat", tree.heat, k11, Box::new(inv), None))
    } else {
        None
    };
    let fluid = if n_f > 0 { Some(build_fluid(tree, sys)?) } else { None };
    Ok(FieldsplitAdditive { n_f, fluid, heat })
}

fn build_fluid(tree: &SolverTree, sys: &BlockSystem) -> Result<KspSolve> {
    let n_f = sys.n_u + sys.n_p;
    let fidx = range_vec(0..n_f);
    let k00 = sys.matrix.submatrix(&fidx, &fidx);
    let nullspace = (sys.pressure_nullspace && sys.n_p > 0).then_some(sys.n_u..n_f);
    let pc: Box<dyn Preconditioner> = match tree.fluid_pc {
        FluidPc::None => Box::new(Identity),
        FluidPc::SchurUpper => Box::new(build_schur_upper(tree, sys)?),
    };
    Ok(KspSolve::new("fluid", tree.fluid, k00, pc, nullspace))
}

fn build_schur_upper(tree: &SolverTree, sys: &BlockSystem) -> Result<SchurUpper> {
    let uidx = range_vec(sys.velocity_range());
    let pidx = range_vec(sys.pressure_range());
    let a = sys.matrix.submatrix(&uidx, &uidx);
    let bt = sys.matrix.submatrix(&uidx, &pidx);
    let a_inv_pc =
        Inverse::build(tree.velocity_pc, &a, sys.components, &tree.amg).map_err(|e| e.in_block("velocity"))?;

    // `op` is a positive stand-in for -S, so z_p = -op^{-1} r_p up to scaling.
    let (mut op, s_factor) = match tree.schur_approx {
        SchurApprox::Mass => {
            let m = sys.pressure_mass.clone().ok_or_else(|| {
                Error::InvalidTree("the mass Schur approximation needs a pressure mass matrix".into())
            })?;
            if !(sys.schur_scale > 0.0) {
                return Err(Error::InvalidTree("schur_scale must be positive".into()));
            }
            (m, -1.0 / sys.schur_scale)
        }
        SchurApprox::DiagA => {
            let b = sys.matrix.submatrix(&pidx, &uidx);
            let d: Vec<f64> = a.diagonal().iter().map(|&v| if v != 0.0 { 1.0 / v } else { 0.0 }).collect();
            let mut dbt = bt.clone();
            dbt.scale_rows_cols(&d, &vec![1.0; sys.n_p]);
            let mut s = b.matmul(&dbt)?;
            s.scale(-1.0);
            (s, -1.0)
        }
        SchurApprox::Exact => {
            let b = sys.matrix.submatrix(&pidx, &uidx);
            let lu = dense_lu(&a).map_err(|e| e.in_block("schur"))?;
            let mut cols = vec![vec![0.0; sys.n_p]; sys.n_p];
            let mut col = vec![0.0; sys.n_u];
            let mut e = vec![0.0; sys.n_p];
            for j in 0..sys.n_p {
                e.fill(0.0);
                e[j] = 1.0;
                let btj = bt.mul_vec(&e);
                lu.solve(&btj, &mut col);
                let s = b.mul_vec(&col);
                for i in 0..sys.n_p {
                    cols[i][j] = s[i];
                }
            }
            (CsrMatrix::from_dense(&cols), -1.0)
        }
    };
    op.prune();
    if sys.pressure_nullspace && sys.n_p > 0 && tree.schur_approx != SchurApprox::Mass {
        // The stand-in shares the constant kernel; regularize it so that
        // AMG and LU are well defined. Mean-free inputs are unaffected for
        // the rank-one variant and only mildly perturbed for the shift.
        let diag = op.diagonal();
        let mean = diag.iter().sum::<f64>() / sys.n_p as f64;
        op = if tree.schur_pc == BlockPc::Exact {
            let mut d = op.to_dense();
            let w = mean / sys.n_p as f64;
            d.iter_mut().for_each(|row| row.iter_mut().for_each(|v| *v += w));
            CsrMatrix::from_dense(&d)
        } else {
            op.add(1.0, &CsrMatrix::identity(sys.n_p), 1e-8 * mean)?
        };
    }
    let s_pc = Inverse::build(tree.schur_pc, &op, 1, &tree.amg).map_err(|e| e.in_block("schur"))?;
    let s_null = (sys.pressure_nullspace && sys.n_p > 0).then_some(0..sys.n_p);
    Ok(SchurUpper {
        n_u: sys.n_u,
        bt,
        a_inv: KspSolve::new("velocity", tree.velocity, a, Box::new(a_inv_pc), None),
        s_inv: KspSolve::new("schur", tree.schur, op, Box::new(s_pc), s_null),
        s_factor,
    })
}
