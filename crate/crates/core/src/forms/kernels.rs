//! Integrands of the individual forms.

use crate::error::{Error, Result};
use crate::fem::{
    assemble_facet_matrix, assemble_facet_vector, assemble_matrix, assemble_vector, mass_matrix, FnKernel, PointData,
    Shapes, SpaceOn,
};
use crate::krylov::CsrMatrix;
use crate::mesh::dot;

use super::{ConstantBlocks, Problem, Radiation, ScalarFn, State, VectorFn};

/// Quadrature order for integrands that are not polynomial.
const SOURCE_ORDER: usize = 8;
/// Quadrature order of the radiation facet terms.
const RADIATION_ORDER: usize = 8;

/// Value and gradient of a field at a point from the local shape data.
/// `grad[c][d] = d f_c / d x_d`.
pub(super) fn field_at(coef: &[f64], sh: &Shapes, n_nodes: usize, comps: usize) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut val = [0.0; 3];
    let mut grad = [[0.0; 3]; 3];
    for c in 0..comps {
        for (j, &node) in sh.nodes.iter().enumerate() {
            let a = coef[c * n_nodes + node];
            val[c] += a * sh.values[j];
            for d in 0..3 {
                grad[c][d] += a * sh.grads[j][d];
            }
        }
    }
    (val, grad)
}

pub(super) fn constant_blocks(
    pb: &Problem,
    momentum_source: Option<&VectorFn>,
    heat_source: Option<&ScalarFn>,
) -> Result<ConstantBlocks> {
    let prm = &pb.params;
    let dim = pb.dim();
    let fmesh = pb.fluid.mesh.as_ref();
    let v_on = SpaceOn::direct(&pb.velocity);
    let p_on = SpaceOn::direct(&pb.pressure);
    let t_fluid = SpaceOn::mapped(&pb.temperature, &pb.fluid.parent_cell_map);
    let t_on = SpaceOn::direct(&pb.temperature);
    let nv = pb.velocity.n_local();
    let np = pb.pressure.n_local();
    let nt = pb.temperature.n_local();
    let g = prm.gravity();
    let mu = prm.mu;

    let n = assemble_matrix(
        fmesh,
        None,
        v_on,
        v_on,
        2,
        &FnKernel {
            degree: 2,
            f: |p: &PointData, l: &mut [f64]| {
                let w = dim * nv;
                for i in 0..dim {
                    for a in 0..nv {
                        let row = (i * nv + a) * w;
                        let ga = &p.test.grads[a];
                        for j in 0..dim {
                            for b in 0..nv {
                                let gb = &p.trial.grads[b];
                                let mut v = gb[i] * ga[j];
                                if i == j {
                                    v += dot(ga, gb);
                                }
                                l[row + j * nv + b] += p.jxw * mu * v;
                            }
                        }
                    }
                }
            },
        },
    )?;

    let b = assemble_matrix(
        fmesh,
        None,
        v_on,
        p_on,
        2,
        &FnKernel {
            degree: 2,
            f: |p: &PointData, l: &mut [f64]| {
                let w = dim * nv;
                for q in 0..np {
                    for j in 0..dim {
                        for bb in 0..nv {
                            l[q * w + j * nv + bb] -= p.jxw * p.test.values[q] * p.trial.grads[bb][j];
                        }
                    }
                }
            },
        },
    )?;
    let bt = b.transpose();

    let rb = prm.rho * prm.beta;
    let d = assemble_matrix(
        fmesh,
        None,
        t_fluid,
        v_on,
        3,
        &FnKernel {
            degree: 3,
            f: |p: &PointData, l: &mut [f64]| {
                for i in 0..dim {
                    if g[i] == 0.0 {
                        continue;
                    }
                    for a in 0..nv {
                        let row = (i * nv + a) * nt;
                        for m in 0..nt {
                            l[row + m] += p.jxw * rb * g[i] * p.test.values[a] * p.trial.values[m];
                        }
                    }
                }
            },
        },
    )?;

    let pressure_mass = mass_matrix(&pb.pressure)?;

    let kc = &pb.conductivity;
    let stiffness = assemble_matrix(
        &pb.mesh,
        None,
        t_on,
        t_on,
        0,
        &FnKernel {
            degree: 0,
            f: |p: &PointData, l: &mut [f64]| {
                let k = kc[p.cell];
                for a in 0..nt {
                    for bb in 0..nt {
                        l[a * nt + bb] += p.jxw * k * dot(&p.test.grads[a], &p.trial.grads[bb]);
                    }
                }
            },
        },
    )?;
    let facet_mass = |facets: &[usize]| {
        assemble_facet_matrix(
            &pb.temperature,
            facets,
            2,
            &FnKernel {
                degree: 2,
                f: |p: &PointData, l: &mut [f64]| {
                    for a in 0..nt {
                        for bb in 0..nt {
                            l[a * nt + bb] += p.jxw * p.test.values[a] * p.trial.values[bb];
                        }
                    }
                },
            },
        )
    };
    let m_amb = facet_mass(&pb.gamma_amb)?;
    let m_body = facet_mass(&pb.gamma_body)?;
    let f_lin = stiffness.add(1.0, &m_amb, prm.h_amb)?.add(1.0, &m_body, prm.h_bl)?;

    // momentum load: reference buoyancy and optional volume source
    let t_ref = prm.t_ref;
    let mut l1 = assemble_vector(
        fmesh,
        None,
        v_on,
        2,
        &FnKernel {
            degree: 2,
            f: |p: &PointData, l: &mut [f64]| {
                for i in 0..dim {
                    for a in 0..nv {
                        l[i * nv + a] += p.jxw * rb * t_ref * g[i] * p.test.values[a];
                    }
                }
            },
        },
    )?;
    if let Some(src) = momentum_source {
        let s = assemble_vector(
            fmesh,
            None,
            v_on,
            SOURCE_ORDER,
            &FnKernel {
                degree: SOURCE_ORDER,
                f: |p: &PointData, l: &mut [f64]| {
                    let f = src(&p.x);
                    for i in 0..dim {
                        for a in 0..nv {
                            l[i * nv + a] += p.jxw * f[i] * p.test.values[a];
                        }
                    }
                },
            },
        )?;
        l1.iter_mut().zip(s).for_each(|(a, b)| *a += b);
    }

    // heat load: ambient exchange minus evaporation, blood exchange, source
    let amb_flux = match pb.variant.radiation {
        Radiation::Nonlinear => prm.h_amb * prm.t_amb + prm.sigma_sb * prm.epsilon * prm.t_amb.powi(4),
        Radiation::Linearized => (prm.h_amb + prm.h_rad()) * prm.t_amb,
    } - prm.evaporation;
    let facet_load = |facets: &[usize], value: f64| {
        assemble_facet_vector(
            &pb.temperature,
            facets,
            1,
            &FnKernel {
                degree: 1,
                f: move |p: &PointData, l: &mut [f64]| {
                    for a in 0..nt {
                        l[a] += p.jxw * value * p.test.values[a];
                    }
                },
            },
        )
    };
    let mut l2 = facet_load(&pb.gamma_amb, amb_flux)?;
    let body = facet_load(&pb.gamma_body, prm.h_bl * prm.t_bl)?;
    l2.iter_mut().zip(body).for_each(|(a, b)| *a += b);
    if let Some(src) = heat_source {
        let s = assemble_vector(
            &pb.mesh,
            None,
            t_on,
            SOURCE_ORDER,
            &FnKernel {
                degree: SOURCE_ORDER,
                f: |p: &PointData, l: &mut [f64]| {
                    let f = src(&p.x);
                    for a in 0..nt {
                        l[a] += p.jxw * f * p.test.values[a];
                    }
                },
            },
        )?;
        l2.iter_mut().zip(s).for_each(|(a, b)| *a += b);
    }

    Ok(ConstantBlocks { n, b, bt, d, pressure_mass, f_lin, m_amb, l1, l2 })
}

/// Iterate-dependent Jacobian blocks.
pub(super) struct StateBlocks {
    pub v: CsrMatrix,
    pub w: CsrMatrix,
    pub e1: CsrMatrix,
    pub e2: CsrMatrix,
    /// Full heat-flux Jacobian: constant part plus radiation.
    pub f: CsrMatrix,
}

fn check_finite(s: &State) -> Result<()> {
    if s.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("state passed to assembly".into()))
    }
}

pub(super) fn state_blocks(pb: &Problem, s: &State, rad_t: &[f64]) -> Result<StateBlocks> {
    check_finite(s)?;
    if rad_t.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("radiation temperature".into()));
    }
    let prm = &pb.params;
    let dim = pb.dim();
    let fmesh = pb.fluid.mesh.as_ref();
    let v_on = SpaceOn::direct(&pb.velocity);
    let t_fluid = SpaceOn::mapped(&pb.temperature, &pb.fluid.parent_cell_map);
    let nv = pb.velocity.n_local();
    let nt = pb.temperature.n_local();
    let vn = pb.velocity.n_nodes();
    let tn = pb.temperature.n_nodes();
    let (nu, _, ntd) = pb.sizes();
    let rho = prm.rho;
    let rcp = prm.rho * prm.cp;
    let u = &s.u;

    let (v, w) = if pb.variant.flow == super::Flow::Stokes {
        (CsrMatrix::zeros(nu, nu), CsrMatrix::zeros(nu, nu))
    } else {
        let v = assemble_matrix(
            fmesh,
            None,
            v_on,
            v_on,
            5,
            &FnKernel {
                degree: 5,
                f: |p: &PointData, l: &mut [f64]| {
                    let (uk, _) = field_at(u, &p.trial, vn, dim);
                    let wdt = dim * nv;
                    for b in 0..nv {
                        let adv = p.jxw * rho * dot(&uk, &p.trial.grads[b]);
                        for a in 0..nv {
                            let val = adv * p.test.values[a];
                            for i in 0..dim {
                                l[(i * nv + a) * wdt + i * nv + b] += val;
                            }
                        }
                    }
                },
            },
        )?;
        let w = assemble_matrix(
            fmesh,
            None,
            v_on,
            v_on,
            5,
            &FnKernel {
                degree: 5,
                f: |p: &PointData, l: &mut [f64]| {
                    let (_, gu) = field_at(u, &p.trial, vn, dim);
                    let wdt = dim * nv;
                    for a in 0..nv {
                        for b in 0..nv {
                            let phi = p.jxw * rho * p.test.values[a] * p.trial.values[b];
                            for i in 0..dim {
                                for j in 0..dim {
                                    l[(i * nv + a) * wdt + j * nv + b] += phi * gu[i][j];
                                }
                            }
                        }
                    }
                },
            },
        )?;
        (v, w)
    };

    let t = &s.t;
    let e1 = assemble_matrix(
        fmesh,
        None,
        v_on,
        t_fluid,
        3,
        &FnKernel {
            degree: 3,
            f: |p: &PointData, l: &mut [f64]| {
                let (_, gt) = field_at(t, &p.test, tn, 1);
                let wdt = dim * nv;
                for m in 0..nt {
                    for b in 0..nv {
                        let c = p.jxw * rcp * p.test.values[m] * p.trial.values[b];
                        for j in 0..dim {
                            l[m * wdt + j * nv + b] += c * gt[0][j];
                        }
                    }
                }
            },
        },
    )?;
    let vel = &pb.velocity;
    let e2 = assemble_matrix(
        fmesh,
        None,
        t_fluid,
        t_fluid,
        3,
        &FnKernel {
            degree: 3,
            f: |p: &PointData, l: &mut [f64]| {
                let uk = vel.eval(u, p.cell, p.lambda);
                for a in 0..nt {
                    for b in 0..nt {
                        l[a * nt + b] += p.jxw * rcp * dot(&uk, &p.trial.grads[b]) * p.test.values[a];
                    }
                }
            },
        },
    )?;

    let rad = match pb.variant.radiation {
        Radiation::Linearized => {
            let mut m = pb.constant.m_amb.clone();
            m.scale(prm.h_rad());
            m
        }
        Radiation::Nonlinear => {
            let c = 4.0 * prm.sigma_sb * prm.epsilon;
            assemble_facet_matrix(
                &pb.temperature,
                &pb.gamma_amb,
                RADIATION_ORDER,
                &FnKernel {
                    degree: 5,
                    f: |p: &PointData, l: &mut [f64]| {
                        let (tr, _) = field_at(rad_t, &p.test, tn, 1);
                        let k = p.jxw * c * tr[0].powi(3);
                        for a in 0..nt {
                            for b in 0..nt {
                                l[a * nt + b] += k * p.test.values[a] * p.trial.values[b];
                            }
                        }
                    },
                },
            )?
        }
    };
    let f = pb.constant.f_lin.add(1.0, &rad, 1.0)?;
    debug_assert_eq!(f.nrows, ntd);
    Ok(StateBlocks { v, w, e1, e2, f })
}

/// Residual `l - F(x)` stacked as `[r_u, r_p, r_T]`, without elimination.
pub(super) fn residual(pb: &Problem, s: &State) -> Result<Vec<f64>> {
    check_finite(s)?;
    let prm = &pb.params;
    let c = &pb.constant;
    let dim = pb.dim();
    let fmesh = pb.fluid.mesh.as_ref();
    let v_on = SpaceOn::direct(&pb.velocity);
    let t_fluid = SpaceOn::mapped(&pb.temperature, &pb.fluid.parent_cell_map);
    let nv = pb.velocity.n_local();
    let nt = pb.temperature.n_local();
    let vn = pb.velocity.n_nodes();
    let tn = pb.temperature.n_nodes();
    let (nu, np, ntd) = pb.sizes();

    let mut r = vec![0.0; nu + np + ntd];
    let (ru, rest) = r.split_at_mut(nu);
    let (rp, rt) = rest.split_at_mut(np);

    // momentum
    ru.copy_from_slice(&c.l1);
    c.n.matvec_add(-1.0, &s.u, ru);
    c.bt.matvec_add(-1.0, &s.p, ru);
    c.d.matvec_add(-1.0, &s.t, ru);
    if pb.variant.flow == super::Flow::NavierStokes {
        let rho = prm.rho;
        let u = &s.u;
        let conv = assemble_vector(
            fmesh,
            None,
            v_on,
            5,
            &FnKernel {
                degree: 5,
                f: |p: &PointData, l: &mut [f64]| {
                    let (uk, gu) = field_at(u, &p.test, vn, dim);
                    for i in 0..dim {
                        let adv: f64 = (0..dim).map(|j| uk[j] * gu[i][j]).sum();
                        for a in 0..nv {
                            l[i * nv + a] += p.jxw * rho * adv * p.test.values[a];
                        }
                    }
                },
            },
        )?;
        ru.iter_mut().zip(conv).for_each(|(a, b)| *a -= b);
    }

    // continuity: 0 - b(q, u) = int q div u
    c.b.matvec_add(-1.0, &s.u, rp);

    // heat
    rt.copy_from_slice(&c.l2);
    c.f_lin.matvec_add(-1.0, &s.t, rt);
    match pb.variant.radiation {
        Radiation::Linearized => c.m_amb.matvec_add(-prm.h_rad(), &s.t, rt),
        Radiation::Nonlinear => {
            let k = prm.sigma_sb * prm.epsilon;
            let t = &s.t;
            let rad = assemble_facet_vector(
                &pb.temperature,
                &pb.gamma_amb,
                RADIATION_ORDER,
                &FnKernel {
                    degree: 5,
                    f: |p: &PointData, l: &mut [f64]| {
                        let (tv, _) = field_at(t, &p.test, tn, 1);
                        for a in 0..nt {
                            l[a] += p.jxw * k * tv[0].powi(4) * p.test.values[a];
                        }
                    },
                },
            )?;
            rt.iter_mut().zip(rad).for_each(|(a, b)| *a -= b);
        }
    }
    let rcp = prm.rho * prm.cp;
    let (u, t, vel) = (&s.u, &s.t, &pb.velocity);
    let conv = assemble_vector(
        fmesh,
        None,
        t_fluid,
        3,
        &FnKernel {
            degree: 3,
            f: |p: &PointData, l: &mut [f64]| {
                let uk = vel.eval(u, p.cell, p.lambda);
                let (_, gt) = field_at(t, &p.test, tn, 1);
                let adv = rcp * dot(&uk, &gt[0]);
                for a in 0..nt {
                    l[a] += p.jxw * adv * p.test.values[a];
                }
            },
        },
    )?;
    rt.iter_mut().zip(conv).for_each(|(a, b)| *a -= b);
    Ok(r)
}
