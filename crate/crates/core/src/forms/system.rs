//! The assembled Newton correction system and its nondimensional scaling.

use serde::Serialize;

use super::kernels::state_blocks;
use super::{Dirichlet, PhysicalParams, Problem, State};
use crate::error::Result;
use crate::krylov::{BlockSystem, CsrMatrix};
use crate::mesh::Mesh;

/// Characteristic scales used to balance the blocks of the linear system.
///
/// Unknowns are measured in units of `velocity`, `pressure` and
/// `temperature`; equations are weighted so that a residual of the size of
/// the viscous-buoyancy balance becomes of order one per unit volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scaling {
    pub length: f64,
    pub velocity: f64,
    pub pressure: f64,
    pub temperature: f64,
    pub w_momentum: f64,
    pub w_continuity: f64,
    pub w_heat: f64,
}

impl Scaling {
    pub(super) fn new(
        prm: &PhysicalParams,
        fluid: &Mesh,
        conductivity: &[f64],
        vbc: &Dirichlet,
        tbc: &Dirichlet,
        has_robin: bool,
    ) -> Self {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for x in fluid.vertices() {
            for d in 0..3 {
                lo[d] = lo[d].min(x[d]);
                hi[d] = hi[d].max(x[d]);
            }
        }
        let length = (0..3).map(|d| (hi[d] - lo[d]).powi(2)).sum::<f64>().sqrt();

        let mut theta: f64 = if has_robin { (prm.t_bl - prm.t_amb).abs() } else { 0.0 };
        let fixed: Vec<f64> = (0..tbc.mask.len()).filter(|&i| tbc.mask[i]).map(|i| tbc.values[i]).collect();
        if let (Some(a), Some(b)) = (fixed.iter().copied().reduce(f64::min), fixed.iter().copied().reduce(f64::max)) {
            theta = theta.max(b - a);
        }
        if theta == 0.0 {
            theta = 1.0;
        }
        let u_wall = (0..vbc.mask.len()).filter(|&i| vbc.mask[i]).fold(0.0f64, |m, i| m.max(vbc.values[i].abs()));
        let mut velocity = (prm.rho * prm.beta * prm.g_mag * theta * length * length / prm.mu).max(u_wall);
        if velocity == 0.0 {
            velocity = prm.mu / (prm.rho * length);
        }
        let pressure = prm.mu * velocity / length;
        let k = conductivity.iter().copied().fold(0.0f64, f64::max);
        Scaling {
            length,
            velocity,
            pressure,
            temperature: theta,
            w_momentum: length * length / (prm.mu * velocity),
            w_continuity: length / velocity,
            w_heat: length * length / (k * theta),
        }
    }
}

/// Jacobian blocks and residual at one Newton iterate.
///
/// Rows and columns are ordered `[u, p, T]`. The blocks are stored as
/// assembled, before boundary elimination; the residual has constrained
/// rows zeroed and the pressure constant removed.
#[derive(Debug, Clone)]
pub struct NewtonSystem {
    pub v: CsrMatrix,
    pub w: CsrMatrix,
    pub n: CsrMatrix,
    pub b: CsrMatrix,
    pub bt: CsrMatrix,
    pub d: CsrMatrix,
    pub e1: CsrMatrix,
    pub e2: CsrMatrix,
    pub f: CsrMatrix,
    pub r_u: Vec<f64>,
    pub r_p: Vec<f64>,
    pub r_t: Vec<f64>,
    pressure_mass: CsrMatrix,
    velocity_mask: Vec<bool>,
    temperature_mask: Vec<bool>,
    components: usize,
    scaling: Scaling,
    mu: f64,
}

impl NewtonSystem {
    pub(super) fn assemble(pb: &Problem, state: &State, rad_t: &[f64]) -> Result<Self> {
        let sb = state_blocks(pb, state, rad_t)?;
        let r = pb.residual(state)?;
        let (nu, np, _) = pb.sizes();
        let c = &pb.constant;
        Ok(NewtonSystem {
            v: sb.v,
            w: sb.w,
            n: c.n.clone(),
            b: c.b.clone(),
            bt: c.bt.clone(),
            d: c.d.clone(),
            e1: sb.e1,
            e2: sb.e2,
            f: sb.f,
            r_u: r[..nu].to_vec(),
            r_p: r[nu..nu + np].to_vec(),
            r_t: r[nu + np..].to_vec(),
            pressure_mass: c.pressure_mass.clone(),
            velocity_mask: pb.velocity_bc.mask.clone(),
            temperature_mask: pb.temperature_bc.mask.clone(),
            components: pb.dim(),
            scaling: pb.scaling,
            mu: pb.params.mu,
        })
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.n.nrows, self.b.nrows, self.f.nrows)
    }

    /// Velocity block `N + V + W`.
    pub fn velocity_block(&self) -> Result<CsrMatrix> {
        self.n.add(1.0, &self.v, 1.0)?.add(1.0, &self.w, 1.0)
    }

    /// Heat block `E2 + F`.
    pub fn heat_block(&self) -> Result<CsrMatrix> {
        self.f.add(1.0, &self.e2, 1.0)
    }

    /// The full Jacobian without boundary elimination or scaling.
    pub fn matrix(&self) -> CsrMatrix {
        let (nu, np, nt) = self.sizes();
        let n = nu + np + nt;
        let o = nu + np;
        CsrMatrix::from_blocks(
            n,
            n,
            &[
                (0, 0, &self.n, 1.0),
                (0, 0, &self.v, 1.0),
                (0, 0, &self.w, 1.0),
                (0, nu, &self.bt, 1.0),
                (0, o, &self.d, 1.0),
                (nu, 0, &self.b, 1.0),
                (o, 0, &self.e1, 1.0),
                (o, o, &self.e2, 1.0),
                (o, o, &self.f, 1.0),
            ],
        )
    }

    /// Applies the unscaled, uneliminated Jacobian block by block.
    pub fn apply_blocks(&self, x: &[f64], y: &mut [f64]) {
        let (nu, np, _) = self.sizes();
        let (xu, rest) = x.split_at(nu);
        let (xp, xt) = rest.split_at(np);
        y.fill(0.0);
        let (yu, rest) = y.split_at_mut(nu);
        let (yp, yt) = rest.split_at_mut(np);
        for m in [&self.n, &self.v, &self.w] {
            m.matvec_add(1.0, xu, yu);
        }
        self.bt.matvec_add(1.0, xp, yu);
        self.d.matvec_add(1.0, xt, yu);
        self.b.matvec_add(1.0, xu, yp);
        self.e1.matvec_add(1.0, xu, yt);
        self.e2.matvec_add(1.0, xt, yt);
        self.f.matvec_add(1.0, xt, yt);
    }

    pub fn residual(&self) -> Vec<f64> {
        let mut r = self.r_u.clone();
        r.extend_from_slice(&self.r_p);
        r.extend_from_slice(&self.r_t);
        r
    }

    fn row_weights(&self) -> Vec<f64> {
        let (nu, np, nt) = self.sizes();
        let s = &self.scaling;
        let mut w = vec![s.w_momentum; nu];
        w.extend(std::iter::repeat_n(s.w_continuity, np));
        w.extend(std::iter::repeat_n(s.w_heat, nt));
        w
    }

    fn col_scales(&self) -> Vec<f64> {
        let (nu, np, nt) = self.sizes();
        let s = &self.scaling;
        let mut c = vec![s.velocity; nu];
        c.extend(std::iter::repeat_n(s.pressure, np));
        c.extend(std::iter::repeat_n(s.temperature, nt));
        c
    }

    /// Scaled system with constrained rows and columns eliminated, and the
    /// matching scaled right-hand side. Solve it for `y`, then recover the
    /// increment with [`NewtonSystem::unscale`].
    pub fn scaled(&self) -> (BlockSystem, Vec<f64>) {
        let (nu, np, nt) = self.sizes();
        let mut m = self.matrix();
        let rw = self.row_weights();
        let cs = self.col_scales();
        m.scale_rows_cols(&rw, &cs);
        let mut mask = self.velocity_mask.clone();
        mask.extend(std::iter::repeat_n(false, np));
        mask.extend_from_slice(&self.temperature_mask);
        m.zero_rows(&mask);
        m.zero_cols(&mask);
        let diag = m.diagonal();
        for range in [0..nu, nu + np..nu + np + nt] {
            let free: Vec<f64> = range.clone().filter(|&i| !mask[i]).map(|i| diag[i].abs()).collect();
            let value = if free.is_empty() { 1.0 } else { free.iter().sum::<f64>() / free.len() as f64 };
            let block_mask: Vec<bool> = (0..mask.len()).map(|i| mask[i] && range.contains(&i)).collect();
            m.set_diagonal(&block_mask, if value > 0.0 { value } else { 1.0 });
        }
        m.prune();
        let rhs: Vec<f64> = self.residual().iter().zip(&rw).map(|(r, w)| r * w).collect();
        let s = &self.scaling;
        let sys = BlockSystem {
            matrix: m,
            n_u: nu,
            n_p: np,
            n_t: nt,
            components: self.components,
            pressure_mass: Some(self.pressure_mass.clone()),
            schur_scale: s.w_continuity * s.pressure / (2.0 * self.mu),
            pressure_nullspace: np > 0,
        };
        (sys, rhs)
    }

    /// Applies the scaling row weights to a stacked residual, giving a
    /// right-hand side for the system returned by [`NewtonSystem::scaled`].
    pub fn scale_residual(&self, r: &[f64]) -> Vec<f64> {
        r.iter().zip(self.row_weights()).map(|(a, w)| a * w).collect()
    }

    /// Converts a solution of the scaled system into a physical increment.
    pub fn unscale(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(self.col_scales()).map(|(a, c)| a * c).collect()
    }
}
