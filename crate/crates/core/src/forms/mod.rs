//! Variational forms of the coupled aqueous-humor flow and ocular heat
//! transfer problem, their Newton linearization and the block system.
//!
//! Velocity (P2) and pressure (P1) live on the fluid submesh, temperature
//! (P1) on the whole mesh. Coupling integrals run over the fluid cells with
//! the temperature space reached through the submesh's parent cell map.

mod kernels;
mod params;
mod system;

use std::sync::Arc;

pub use params::{Flow, PhysicalParams, Radiation, Variant, TISSUE_CONDUCTIVITY};
pub use system::{NewtonSystem, Scaling};

use crate::error::{Error, Result};
use crate::fem::FunctionSpace;
use crate::krylov::CsrMatrix;
use crate::mesh::{extract_subdomain, Mesh, Point, SubMesh};

/// Vector-valued source or boundary datum.
pub type VectorFn = Arc<dyn Fn(&Point) -> [f64; 3] + Send + Sync>;
/// Scalar-valued source or boundary datum.
pub type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// Everything needed to set up a discrete problem.
#[derive(Clone)]
pub struct ProblemSetup {
    pub mesh: Arc<Mesh>,
    pub fluid_labels: Vec<String>,
    pub gamma_amb: Vec<String>,
    pub gamma_body: Vec<String>,
    pub params: PhysicalParams,
    pub variant: Variant,
    /// Velocity on the fluid boundary; no-slip when absent.
    pub velocity_bc: Option<VectorFn>,
    /// Fixed temperature on the listed boundary labels.
    pub temperature_bc: Option<(Vec<String>, ScalarFn)>,
    pub momentum_source: Option<VectorFn>,
    pub heat_source: Option<ScalarFn>,
}

impl ProblemSetup {
    pub fn new(mesh: Arc<Mesh>, fluid_labels: &[&str], params: PhysicalParams) -> Self {
        ProblemSetup {
            mesh,
            fluid_labels: fluid_labels.iter().map(|s| s.to_string()).collect(),
            gamma_amb: Vec::new(),
            gamma_body: Vec::new(),
            params,
            variant: Variant::default(),
            velocity_bc: None,
            temperature_bc: None,
            momentum_source: None,
            heat_source: None,
        }
    }
}

/// Essential boundary condition on one space.
#[derive(Debug, Clone)]
pub struct Dirichlet {
    pub mask: Vec<bool>,
    pub values: Vec<f64>,
}

impl Dirichlet {
    fn none(n: usize) -> Self {
        Dirichlet { mask: vec![false; n], values: vec![0.0; n] }
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn apply(&self, x: &mut [f64]) {
        for (i, &m) in self.mask.iter().enumerate() {
            if m {
                x[i] = self.values[i];
            }
        }
    }

    pub fn zero(&self, x: &mut [f64]) {
        for (i, &m) in self.mask.iter().enumerate() {
            if m {
                x[i] = 0.0;
            }
        }
    }
}

/// Coefficient vectors of velocity, pressure and temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub t: Vec<f64>,
}

impl State {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.u.len() + self.p.len() + self.t.len());
        v.extend_from_slice(&self.u);
        v.extend_from_slice(&self.p);
        v.extend_from_slice(&self.t);
        v
    }

    pub fn from_slice(v: &[f64], n_u: usize, n_p: usize) -> Self {
        State { u: v[..n_u].to_vec(), p: v[n_u..n_u + n_p].to_vec(), t: v[n_u + n_p..].to_vec() }
    }

    /// `self + alpha * d` for a stacked increment `d`.
    pub fn updated(&self, alpha: f64, d: &[f64]) -> Self {
        let (nu, np) = (self.u.len(), self.p.len());
        let add = |x: &[f64], dx: &[f64]| x.iter().zip(dx).map(|(a, b)| a + alpha * b).collect();
        State { u: add(&self.u, &d[..nu]), p: add(&self.p, &d[nu..nu + np]), t: add(&self.t, &d[nu + np..]) }
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.p).chain(&self.t).all(|v| v.is_finite())
    }
}

/// Matrices and loads that do not depend on the Newton iterate.
#[derive(Debug, Clone)]
pub struct ConstantBlocks {
    /// Viscous block.
    pub n: CsrMatrix,
    /// Divergence block, pressure rows by velocity columns.
    pub b: CsrMatrix,
    pub bt: CsrMatrix,
    /// Buoyancy coupling, velocity rows by temperature columns.
    pub d: CsrMatrix,
    pub pressure_mass: CsrMatrix,
    /// Conduction plus the linear Robin parts on the ambient and body
    /// boundaries.
    pub f_lin: CsrMatrix,
    /// Boundary mass matrix of the ambient boundary with unit coefficient.
    pub m_amb: CsrMatrix,
    /// Momentum load: reference buoyancy plus any volume source.
    pub l1: Vec<f64>,
    /// Heat load: boundary data plus any volume source.
    pub l2: Vec<f64>,
}

/// A discretized problem instance.
pub struct Problem {
    pub params: PhysicalParams,
    pub variant: Variant,
    pub mesh: Arc<Mesh>,
    pub fluid: SubMesh,
    pub velocity: FunctionSpace,
    pub pressure: FunctionSpace,
    pub temperature: FunctionSpace,
    /// Conductivity per cell of the whole mesh.
    pub conductivity: Vec<f64>,
    /// Facets (of the whole mesh) on the ambient and body boundaries.
    pub gamma_amb: Vec<usize>,
    pub gamma_body: Vec<usize>,
    pub velocity_bc: Dirichlet,
    pub temperature_bc: Dirichlet,
    pub scaling: Scaling,
    pub(crate) constant: ConstantBlocks,
}

fn labelled_facets(mesh: &Mesh, names: &[String]) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for n in names {
        out.extend(mesh.facets_with_label(mesh.boundary_label(n)?));
    }
    out.sort_unstable();
    Ok(out)
}

impl Problem {
    pub fn new(setup: ProblemSetup) -> Result<Self> {
        let ProblemSetup {
            mesh,
            fluid_labels,
            gamma_amb,
            gamma_body,
            params,
            variant,
            velocity_bc,
            temperature_bc,
            momentum_source,
            heat_source,
        } = setup;
        params.validate()?;
        if let Some(n) = gamma_amb.iter().find(|n| gamma_body.contains(n)) {
            return Err(Error::Scenario(format!("boundary `{n}` is both ambient and body")));
        }
        let labels: Vec<&str> = fluid_labels.iter().map(String::as_str).collect();
        let fluid = extract_subdomain(&mesh, &labels)?;
        let dim = mesh.dim();
        let velocity = FunctionSpace::new(fluid.mesh.clone(), 2, dim)?;
        let pressure = FunctionSpace::new(fluid.mesh.clone(), 1, 1)?;
        let temperature = FunctionSpace::new(mesh.clone(), 1, 1)?;

        let mut k_of_label = std::collections::BTreeMap::new();
        for (label, name) in mesh.used_subdomains() {
            k_of_label.insert(label, params.conductivity(name)?);
        }
        let conductivity: Vec<f64> = mesh.cell_labels().iter().map(|l| k_of_label[l]).collect();

        let gamma_amb = labelled_facets(&mesh, &gamma_amb)?;
        let gamma_body = labelled_facets(&mesh, &gamma_body)?;

        let mut vbc = Dirichlet::none(velocity.n_dofs());
        let nn = velocity.n_nodes();
        for node in velocity.exterior_nodes() {
            let val = velocity_bc.as_ref().map_or([0.0; 3], |f| f(&velocity.node_coords()[node]));
            for c in 0..dim {
                vbc.mask[c * nn + node] = true;
                vbc.values[c * nn + node] = val[c];
            }
        }
        let mut tbc = Dirichlet::none(temperature.n_dofs());
        if let Some((labels, f)) = &temperature_bc {
            let names: Vec<&str> = labels.iter().map(String::as_str).collect();
            for node in temperature.label_nodes(&names)? {
                tbc.mask[node] = true;
                tbc.values[node] = f(&temperature.node_coords()[node]);
            }
        }
        if let Some(v) = vbc.values.iter().chain(&tbc.values).find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("boundary datum {v}")));
        }

        let scaling = Scaling::new(
            &params,
            &fluid.mesh,
            &conductivity,
            &vbc,
            &tbc,
            !gamma_amb.is_empty() || !gamma_body.is_empty(),
        );
        let mut problem = Problem {
            params,
            variant,
            mesh,
            fluid,
            velocity,
            pressure,
            temperature,
            conductivity,
            gamma_amb,
            gamma_body,
            velocity_bc: vbc,
            temperature_bc: tbc,
            scaling,
            constant: ConstantBlocks {
                n: CsrMatrix::zeros(0, 0),
                b: CsrMatrix::zeros(0, 0),
                bt: CsrMatrix::zeros(0, 0),
                d: CsrMatrix::zeros(0, 0),
                pressure_mass: CsrMatrix::zeros(0, 0),
                f_lin: CsrMatrix::zeros(0, 0),
                m_amb: CsrMatrix::zeros(0, 0),
                l1: Vec::new(),
                l2: Vec::new(),
            },
        };
        problem.constant = kernels::constant_blocks(&problem, momentum_source.as_ref(), heat_source.as_ref())?;
        Ok(problem)
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    /// Sizes `(n_u, n_p, n_T)`.
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.velocity.n_dofs(), self.pressure.n_dofs(), self.temperature.n_dofs())
    }

    pub fn constant_blocks(&self) -> &ConstantBlocks {
        &self.constant
    }

    /// Zero velocity and pressure except boundary data, temperature at the
    /// reference value except boundary data.
    pub fn initial_state(&self) -> State {
        let (nu, np, nt) = self.sizes();
        let mut s = State { u: vec![0.0; nu], p: vec![0.0; np], t: vec![self.params.t_ref; nt] };
        self.velocity_bc.apply(&mut s.u);
        self.temperature_bc.apply(&mut s.t);
        s
    }

    /// True when the temperature equation has no Robin or Dirichlet part
    /// and the temperature is only defined up to a constant.
    pub fn temperature_is_floating(&self) -> bool {
        self.gamma_amb.is_empty() && self.gamma_body.is_empty() && self.temperature_bc.count() == 0
    }

    /// State blocks evaluated at `state`, with the radiation Jacobian taken
    /// at temperature `rad_t` (normally `state.t`).
    pub fn newton_system(&self, state: &State, rad_t: &[f64]) -> Result<NewtonSystem> {
        NewtonSystem::assemble(self, state, rad_t)
    }

    /// Residual `l - F(x)` without boundary-row elimination, stacked as
    /// `[r_u, r_p, r_T]`.
    pub fn residual_raw(&self, state: &State) -> Result<Vec<f64>> {
        kernels::residual(self, state)
    }

    /// Residual with Dirichlet rows zeroed and the pressure mean removed.
    pub fn residual(&self, state: &State) -> Result<Vec<f64>> {
        let mut r = self.residual_raw(state)?;
        self.restrict(&mut r);
        Ok(r)
    }

    /// Zeroes constrained rows of a stacked vector and projects out the
    /// pressure constant.
    pub fn restrict(&self, r: &mut [f64]) {
        let (nu, np, _) = self.sizes();
        self.velocity_bc.zero(&mut r[..nu]);
        crate::krylov::remove_mean(&mut r[nu..nu + np]);
        self.temperature_bc.zero(&mut r[nu + np..]);
    }

    /// Norm of a stacked residual with the scaling row weights applied.
    pub fn weighted_norm(&self, r: &[f64]) -> f64 {
        let (nu, np, _) = self.sizes();
        let s = &self.scaling;
        let mut sum = 0.0;
        for (i, v) in r.iter().enumerate() {
            let w = if i < nu {
                s.w_momentum
            } else if i < nu + np {
                s.w_continuity
            } else {
                s.w_heat
            };
            sum += (w * v) * (w * v);
        }
        sum.sqrt()
    }

    /// Norm of the loads, used as the scale of residual tolerances.
    pub fn load_norm(&self) -> f64 {
        let c = &self.constant;
        let mut l = Vec::with_capacity(c.l1.len() + self.pressure.n_dofs() + c.l2.len());
        l.extend_from_slice(&c.l1);
        l.extend(std::iter::repeat_n(0.0, self.pressure.n_dofs()));
        l.extend_from_slice(&c.l2);
        self.restrict(&mut l);
        self.weighted_norm(&l)
    }
}
