//! Closed-form fields for manufactured-solution studies.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::forms::{PhysicalParams, ScalarFn, VectorFn};
use crate::mesh::Point;

type Vector = Arc<dyn Fn(&Point) -> [f64; 3] + Send + Sync>;
type Tensor = Arc<dyn Fn(&Point) -> [[f64; 3]; 3] + Send + Sync>;
type Scalar = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// Exact velocity, pressure and temperature with the derivatives needed to
/// form the matching source terms. `grad_u[i][j] = d u_i / d x_j`.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: Vector,
    pub grad_u: Tensor,
    pub lap_u: Vector,
    pub p: Scalar,
    pub grad_p: Vector,
    pub t: Scalar,
    pub grad_t: Vector,
    pub lap_t: Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MmsKind {
    /// Smooth trigonometric fields, used for convergence rates.
    #[default]
    Trig,
    /// Quadratic velocity and linear pressure and temperature; the
    /// discrete spaces contain them exactly.
    Poly,
}

impl ExactSolution {
    pub fn of(kind: MmsKind) -> Self {
        match kind {
            MmsKind::Trig => Self::trig(),
            MmsKind::Poly => Self::poly(),
        }
    }

    /// Rest state at uniform temperature `t0`; all sources vanish.
    pub fn rest(t0: f64) -> Self {
        ExactSolution {
            u: Arc::new(|_| [0.0; 3]),
            grad_u: Arc::new(|_| [[0.0; 3]; 3]),
            lap_u: Arc::new(|_| [0.0; 3]),
            p: Arc::new(|_| 0.0),
            grad_p: Arc::new(|_| [0.0; 3]),
            t: Arc::new(move |_| t0),
            grad_t: Arc::new(|_| [0.0; 3]),
            lap_t: Arc::new(|_| 0.0),
        }
    }

    /// A Taylor-Green type cell on the unit square. The temperature is not a
    /// function of the stream function, so heat convection does not vanish.
    pub fn trig() -> Self {
        let sc = |x: &Point| ((PI * x[0]).sin(), (PI * x[0]).cos(), (PI * x[1]).sin(), (PI * x[1]).cos());
        ExactSolution {
            u: Arc::new(move |x| {
                let (sa, ca, sb, cb) = sc(x);
                [sa * cb, -ca * sb, 0.0]
            }),
            grad_u: Arc::new(move |x| {
                let (sa, ca, sb, cb) = sc(x);
                [[PI * ca * cb, -PI * sa * sb, 0.0], [PI * sa * sb, -PI * ca * cb, 0.0], [0.0; 3]]
            }),
            lap_u: Arc::new(move |x| {
                let (sa, ca, sb, cb) = sc(x);
                [-2.0 * PI * PI * sa * cb, 2.0 * PI * PI * ca * sb, 0.0]
            }),
            p: Arc::new(move |x| {
                let (_, ca, _, cb) = sc(x);
                ca * cb
            }),
            grad_p: Arc::new(move |x| {
                let (sa, ca, sb, cb) = sc(x);
                [-PI * sa * cb, -PI * ca * sb, 0.0]
            }),
            t: Arc::new(move |x| 2.0 + (PI * x[0]).cos() * (PI * x[1]).cos() + 0.5 * x[0]),
            grad_t: Arc::new(move |x| {
                let (sa, ca, sb, cb) = sc(x);
                [-PI * sa * cb + 0.5, -PI * ca * sb, 0.0]
            }),
            lap_t: Arc::new(move |x| {
                let (_, ca, _, cb) = sc(x);
                -2.0 * PI * PI * ca * cb
            }),
        }
    }

    pub fn poly() -> Self {
        ExactSolution {
            u: Arc::new(|x| [x[0] * x[0], -2.0 * x[0] * x[1], 0.0]),
            grad_u: Arc::new(|x| [[2.0 * x[0], 0.0, 0.0], [-2.0 * x[1], -2.0 * x[0], 0.0], [0.0; 3]]),
            lap_u: Arc::new(|_| [2.0, 0.0, 0.0]),
            p: Arc::new(|x| x[0] + x[1] - 1.0),
            grad_p: Arc::new(|_| [1.0, 1.0, 0.0]),
            t: Arc::new(|x| 2.0 + x[0] - x[1]),
            grad_t: Arc::new(|_| [1.0, -1.0, 0.0]),
            lap_t: Arc::new(|_| 0.0),
        }
    }

    /// Momentum source `rho (u.grad)u - mu lap u + grad p + rho beta (T - T_ref) g`.
    /// `convection` switches the first term off for Stokes flow.
    pub fn momentum_source(&self, prm: &PhysicalParams, convection: bool) -> VectorFn {
        let s = self.clone();
        let (rho, mu, beta, t_ref, g) = (prm.rho, prm.mu, prm.beta, prm.t_ref, prm.gravity());
        Arc::new(move |x| {
            let u = (s.u)(x);
            let gu = (s.grad_u)(x);
            let lap = (s.lap_u)(x);
            let gp = (s.grad_p)(x);
            let buoy = rho * beta * ((s.t)(x) - t_ref);
            let mut f = [0.0; 3];
            for i in 0..3 {
                let adv: f64 = (0..3).map(|j| u[j] * gu[i][j]).sum();
                f[i] = -mu * lap[i] + gp[i] + buoy * g[i];
                if convection {
                    f[i] += rho * adv;
                }
            }
            f
        })
    }

    /// Heat source `rho Cp u.grad T - k lap T` for a uniform conductivity.
    pub fn heat_source(&self, prm: &PhysicalParams, k: f64) -> ScalarFn {
        let s = self.clone();
        let rcp = prm.rho * prm.cp;
        Arc::new(move |x| {
            let u = (s.u)(x);
            let gt = (s.grad_t)(x);
            rcp * (u[0] * gt[0] + u[1] * gt[1] + u[2] * gt[2]) - k * (s.lap_t)(x)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(ex: &ExactSolution) {
        let h = 1e-5;
        for x in [[0.3, 0.7, 0.0], [0.81, 0.12, 0.0], [0.5, 0.5, 0.0]] {
            let shift = |d: usize, s: f64| {
                let mut y = x;
                y[d] += s;
                y
            };
            let gu = (ex.grad_u)(&x);
            let gp = (ex.grad_p)(&x);
            let gt = (ex.grad_t)(&x);
            let mut lap_u = [0.0; 3];
            let mut lap_t = 0.0;
            for d in 0..2 {
                let (a, b) = (shift(d, h), shift(d, -h));
                let (ua, ub) = ((ex.u)(&a), (ex.u)(&b));
                for i in 0..2 {
                    assert!(((ua[i] - ub[i]) / (2.0 * h) - gu[i][d]).abs() < 1e-7);
                    lap_u[i] += (ua[i] - 2.0 * (ex.u)(&x)[i] + ub[i]) / (h * h);
                }
                assert!((((ex.p)(&a) - (ex.p)(&b)) / (2.0 * h) - gp[d]).abs() < 1e-7);
                assert!((((ex.t)(&a) - (ex.t)(&b)) / (2.0 * h) - gt[d]).abs() < 1e-7);
                lap_t += ((ex.t)(&a) - 2.0 * (ex.t)(&x) + (ex.t)(&b)) / (h * h);
            }
            let lu = (ex.lap_u)(&x);
            for i in 0..2 {
                assert!((lap_u[i] - lu[i]).abs() < 1e-3, "{lap_u:?} {lu:?}");
            }
            assert!((lap_t - (ex.lap_t)(&x)).abs() < 1e-3);
            // solenoidal
            assert!((gu[0][0] + gu[1][1]).abs() < 1e-12);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        fd_check(&ExactSolution::trig());
        fd_check(&ExactSolution::poly());
    }

    #[test]
    fn rest_state_has_no_sources() {
        let prm = PhysicalParams::default();
        let ex = ExactSolution::rest(prm.t_ref);
        let f = ex.momentum_source(&prm, true)(&[0.3, 0.2, 0.0]);
        assert_eq!(f, [0.0; 3]);
        assert_eq!(ex.heat_source(&prm, 0.5)(&[0.3, 0.2, 0.0]), 0.0);
    }
}
