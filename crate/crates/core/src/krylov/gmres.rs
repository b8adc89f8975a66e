//! Restarted GMRES and flexible GMRES with right preconditioning.

use super::sparse::{axpy, dot, norm2, CsrMatrix};
use crate::error::{Error, Result};

pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()>;
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.matvec(x, y);
        Ok(())
    }
}

/// Approximate inverse applied as `z = M^{-1} r`.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()>;
    /// False when successive applications may differ (inner Krylov solves).
    fn is_stationary(&self) -> bool {
        true
    }
}

pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        z.copy_from_slice(r);
        Ok(())
    }
}

/// Projection applied to every correction direction, used to keep
/// iterates orthogonal to a null space.
pub type Projector<'a> = &'a dyn Fn(&mut [f64]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    /// Relative tolerance on `||b - A x|| / ||b||`.
    pub tol: f64,
    pub restart: usize,
    pub max_iters: usize,
    /// Store preconditioned directions (required for nonstationary
    /// preconditioners).
    pub flexible: bool,
    /// Keep the iterate after every inner step (costly, for tests).
    pub record_iterates: bool,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions { tol: 1e-8, restart: 100, max_iters: 1000, flexible: false, record_iterates: false }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    /// Recomputed `||b - A x||`.
    pub residual_norm: f64,
    pub rhs_norm: f64,
    /// Estimated residual norm after each iteration.
    pub history: Vec<f64>,
    pub iterates: Vec<Vec<f64>>,
}

impl SolveReport {
    pub fn relative_residual(&self) -> f64 {
        if self.rhs_norm == 0.0 {
            0.0
        } else {
            self.residual_norm / self.rhs_norm
        }
    }
}

fn residual(op: &dyn LinearOperator, b: &[f64], x: &[f64], r: &mut [f64]) -> Result<()> {
    op.apply(x, r)?;
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    Ok(())
}

/// Solves `A x = b` starting from the given `x`. Non-convergence is reported
/// through [`SolveReport::converged`]; only breakdown and operator failures
/// are errors.
pub fn gmres(
    op: &dyn LinearOperator,
    b: &[f64],
    x: &mut [f64],
    pc: &dyn Preconditioner,
    opts: &GmresOptions,
    projector: Option<Projector>,
) -> Result<SolveReport> {
    let n = op.dim();
    if b.len() != n || x.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "GMRES on {n} unknowns with rhs {} and guess {}",
            b.len(),
            x.len()
        )));
    }
    let m = opts.restart.max(1);
    let bnorm = norm2(b);
    let mut report = SolveReport { rhs_norm: bnorm, ..Default::default() };
    if bnorm == 0.0 {
        x.fill(0.0);
        report.converged = true;
        return Ok(report);
    }
    let target = opts.tol * bnorm;
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut zs: Vec<Vec<f64>> = Vec::new();
    let mut h = vec![vec![0.0; m]; m + 1];
    let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
    let mut g = vec![0.0; m + 1];

    residual(op, b, x, &mut r)?;
    let mut beta = norm2(&r);
    while report.iterations < opts.max_iters && beta > target {
        v.clear();
        zs.clear();
        v.push(r.iter().map(|ri| ri / beta).collect());
        g.fill(0.0);
        g[0] = beta;
        let mut k = 0;
        let mut happy = false;
        while k < m && report.iterations < opts.max_iters {
            pc.apply(&v[k], &mut z)?;
            if let Some(p) = projector {
                p(&mut z);
            }
            op.apply(&z, &mut w)?;
            if opts.flexible {
                zs.push(z.clone());
            }
            for i in 0..=k {
                let hik = dot(&w, &v[i]);
                h[i][k] = hik;
                axpy(-hik, &v[i], &mut w);
            }
            let hnext = norm2(&w);
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let denom = h[k][k].hypot(hnext);
            if denom == 0.0 || !denom.is_finite() {
                return Err(Error::Breakdown { iteration: report.iterations + 1 });
            }
            cs[k] = h[k][k] / denom;
            sn[k] = hnext / denom;
            h[k][k] = denom;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            report.iterations += 1;
            k += 1;
            report.history.push(g[k].abs());
            if opts.record_iterates {
                let mut xi = x.to_vec();
                update(&mut xi, &h, &g, k, &v, &zs, pc, projector, opts.flexible)?;
                report.iterates.push(xi);
            }
            if hnext <= 1e-14 * denom {
                happy = true;
                break;
            }
            if g[k].abs() <= target {
                break;
            }
            v.push(w.iter().map(|wi| wi / hnext).collect());
        }
        update(x, &h, &g, k, &v, &zs, pc, projector, opts.flexible)?;
        residual(op, b, x, &mut r)?;
        beta = norm2(&r);
        if happy {
            break;
        }
    }
    report.residual_norm = beta;
    report.converged = beta <= target * (1.0 + 1e-8);
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn update(
    x: &mut [f64],
    h: &[Vec<f64>],
    g: &[f64],
    k: usize,
    v: &[Vec<f64>],
    zs: &[Vec<f64>],
    pc: &dyn Preconditioner,
    projector: Option<Projector>,
    flexible: bool,
) -> Result<()> {
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in i + 1..k {
            s -= h[i][j] * y[j];
        }
        if h[i][i] == 0.0 {
            return Err(Error::Breakdown { iteration: i + 1 });
        }
        y[i] = s / h[i][i];
    }
    if flexible {
        for (j, yj) in y.iter().enumerate() {
            axpy(*yj, &zs[j], x);
        }
    } else {
        let mut s = vec![0.0; x.len()];
        for (j, yj) in y.iter().enumerate() {
            axpy(*yj, &v[j], &mut s);
        }
        let mut z = vec![0.0; x.len()];
        pc.apply(&s, &mut z)?;
        if let Some(p) = projector {
            p(&mut z);
        }
        axpy(1.0, &z, x);
    }
    Ok(())
}

/// Removes the component of `v` along `basis`.
pub fn project_nullspace(v: &mut [f64], basis: &[f64]) {
    let bb = dot(basis, basis);
    if bb > 0.0 {
        let c = dot(v, basis) / bb;
        axpy(-c, basis, v);
    }
}

/// Removes the arithmetic mean, i.e. the projection onto the constants.
pub fn remove_mean(v: &mut [f64]) {
    if !v.is_empty() {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter_mut().for_each(|x| *x -= m);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::dense::DenseLu;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Diag(Vec<f64>);
    impl Preconditioner for Diag {
        fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
            for i in 0..r.len() {
                z[i] = r[i] / self.0[i];
            }
            Ok(())
        }
    }

    #[test]
    fn identity_converges_in_one_step() {
        let a = CsrMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 4.0];
        let mut x = vec![0.0; 5];
        let rep = gmres(&a, &b, &mut x, &Identity, &GmresOptions::default(), None).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        for i in 0..5 {
            assert!((x[i] - b[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn two_by_two() {
        let a = CsrMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
        let mut x = vec![0.0; 2];
        let rep = gmres(&a, &[1.0, 2.0], &mut x, &Identity, &GmresOptions::default(), None).unwrap();
        assert!(rep.converged && rep.iterations <= 2);
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-14 && (x[1] - 7.0 / 11.0).abs() < 1e-14);
    }

    fn random_spd(n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let s: f64 = (0..n).map(|k| g[i][k] * g[j][k]).sum();
                        s + if i == j { n as f64 } else { 0.0 }
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn random_spd_matches_dense_solve() {
        let n = 50;
        let dense = random_spd(n, 7);
        let a = CsrMatrix::from_dense(&dense);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let want = DenseLu::from_rows(&dense).unwrap().solve_vec(&b);
        for restart in [100, 7] {
            let mut x = vec![0.0; n];
            let opts = GmresOptions { tol: 1e-10, restart, ..Default::default() };
            let rep = gmres(&a, &b, &mut x, &Diag(a.diagonal()), &opts, None).unwrap();
            assert!(rep.converged);
            let r = b.iter().zip(a.mul_vec(&x)).map(|(bi, ai)| bi - ai).collect::<Vec<_>>();
            assert!((norm2(&r) - rep.residual_norm).abs() <= 1e-10 * norm2(&b));
            for i in 0..n {
                assert!((x[i] - want[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn flexible_matches_standard_with_fixed_preconditioner() {
        let n = 20;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dense: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| rng.random_range(-0.3..0.3) + if i == j { 4.0 } else { 0.0 }).collect())
            .collect();
        let a = CsrMatrix::from_dense(&dense);
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let pc = Diag((0..n).map(|i| 3.0 + i as f64 * 0.1).collect());
        let mut runs = Vec::new();
        for flexible in [false, true] {
            let mut x = vec![0.0; n];
            let opts = GmresOptions { tol: 1e-12, flexible, record_iterates: true, ..Default::default() };
            runs.push(gmres(&a, &b, &mut x, &pc, &opts, None).unwrap());
        }
        assert_eq!(runs[0].iterates.len(), runs[1].iterates.len());
        for (p, q) in runs[0].iterates.iter().zip(&runs[1].iterates) {
            for i in 0..n {
                assert!((p[i] - q[i]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn nonconvergence_is_flagged() {
        let n = 30;
        let a = CsrMatrix::from_dense(
            &(0..n).map(|i| (0..n).map(|j| if (j + 1) % n == i { 1.0 } else { 0.0 }).collect()).collect::<Vec<_>>(),
        );
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        let mut x = vec![0.0; n];
        let opts = GmresOptions { max_iters: 5, ..Default::default() };
        let rep = gmres(&a, &b, &mut x, &Identity, &opts, None).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 5);
    }

    #[test]
    fn singular_hessenberg_is_breakdown() {
        // A maps b to something orthogonal to it: the first Hessenberg
        // column is (0, 1), and the rotation cannot eliminate anything
        let a = CsrMatrix::from_dense(&[vec![0.0, 0.0], vec![0.0, 0.0]]);
        let mut x = vec![0.0; 2];
        let r = gmres(&a, &[1.0, 0.0], &mut x, &Identity, &GmresOptions::default(), None);
        assert!(matches!(r, Err(Error::Breakdown { .. })));
    }

    #[test]
    fn nullspace_projection() {
        let mut v = vec![1.0, 2.0, 3.0];
        remove_mean(&mut v);
        assert_eq!(v, vec![-1.0, 0.0, 1.0]);
        let mut c = vec![2.0; 4];
        project_nullspace(&mut c, &[1.0; 4]);
        assert!(c.iter().all(|x| x.abs() < 1e-15));
        let mut o = vec![1.0, -1.0];
        project_nullspace(&mut o, &[1.0, 1.0]);
        assert_eq!(o, vec![1.0, -1.0]);
    }
}
