//! Aggregation-based algebraic multigrid used as a V-cycle preconditioner.

use super::dense::DenseLu;
use super::gmres::Preconditioner;
use super::sparse::{CsrMatrix, Triplets};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmgOptions {
    /// Connection `i-j` is strong when `|a_ij| >= theta sqrt(|a_ii a_jj|)`.
    pub strength: f64,
    /// Smooth the tentative prolongator with one damped Jacobi step.
    pub smoothed: bool,
    pub omega: f64,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
    /// Levels with at most this many unknowns are solved directly.
    pub max_coarse: usize,
    pub max_levels: usize,
}

impl Default for AmgOptions {
    fn default() -> Self {
        AmgOptions {
            strength: 0.08,
            smoothed: true,
            omega: 2.0 / 3.0,
            pre_sweeps: 1,
            post_sweeps: 1,
            max_coarse: 64,
            max_levels: 25,
        }
    }
}

#[derive(Debug, Clone)]
struct Level {
    a: CsrMatrix,
    inv_diag: Vec<f64>,
    p: CsrMatrix,
    r: CsrMatrix,
}

#[derive(Debug, Clone)]
enum Coarse {
    Lu(DenseLu),
    Diagonal(Vec<f64>),
    Empty,
}

#[derive(Debug, Clone)]
pub struct AmgHierarchy {
    levels: Vec<Level>,
    coarse: Coarse,
    coarse_a: CsrMatrix,
    opts: AmgOptions,
}

fn inverse_diagonal(a: &CsrMatrix) -> Result<Vec<f64>> {
    a.diagonal()
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if d == 0.0 || !d.is_finite() {
                Err(Error::Singular(format!("zero diagonal in row {i}")))
            } else {
                Ok(1.0 / d)
            }
        })
        .collect()
}

/// Greedy three-pass aggregation on the symmetrized strength graph.
/// Nodes without strong connections stay unaggregated (`usize::MAX`).
fn aggregate(a: &CsrMatrix, theta: f64) -> (Vec<usize>, usize) {
    let n = a.nrows;
    let diag = a.diagonal();
    let mut t = Triplets::new(n, n);
    for i in 0..n {
        let (idx, val) = a.row(i);
        for (&j, &v) in idx.iter().zip(val) {
            if j != i && v != 0.0 && v.abs() >= theta * (diag[i] * diag[j]).abs().sqrt() {
                t.push(i, j, 1.0);
                t.push(j, i, 1.0);
            }
        }
    }
    let s = t.to_csr();
    const NONE: usize = usize::MAX;
    let mut agg = vec![NONE; n];
    let mut count = 0;
    // pass 1: seeds whose whole neighbourhood is free
    for i in 0..n {
        let nbrs = s.row(i).0;
        if agg[i] != NONE || nbrs.is_empty() || nbrs.iter().any(|&j| agg[j] != NONE) {
            continue;
        }
        agg[i] = count;
        for &j in nbrs {
            agg[j] = count;
        }
        count += 1;
    }
    // pass 2: attach leftovers to a neighbouring aggregate
    let snapshot = agg.clone();
    for i in 0..n {
        if agg[i] == NONE {
            if let Some(&j) = s.row(i).0.iter().find(|&&j| snapshot[j] != NONE) {
                agg[i] = snapshot[j];
            }
        }
    }
    // pass 3: whatever is still free and connected forms new aggregates
    for i in 0..n {
        let nbrs = s.row(i).0;
        if agg[i] != NONE || nbrs.is_empty() {
            continue;
        }
        agg[i] = count;
        for &j in nbrs {
            if agg[j] == NONE {
                agg[j] = count;
            }
        }
        count += 1;
    }
    (agg, count)
}

/// Spectral radius estimate of `D^{-1} A` by power iteration.
fn spectral_radius(a: &CsrMatrix, inv_diag: &[f64]) -> f64 {
    let n = a.nrows;
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64 * 0.1).collect();
    let mut y = vec![0.0; n];
    let mut rho = 1.0;
    for _ in 0..15 {
        a.matvec(&x, &mut y);
        for i in 0..n {
            y[i] *= inv_diag[i];
        }
        let ny = super::norm2(&y);
        let nx = super::norm2(&x);
        if ny == 0.0 || nx == 0.0 {
            break;
        }
        rho = ny / nx;
        for i in 0..n {
            x[i] = y[i] / ny;
        }
    }
    rho
}

impl AmgHierarchy {
    pub fn build(a: &CsrMatrix, opts: &AmgOptions) -> Result<Self> {
        if a.nrows != a.ncols {
            return Err(Error::DimensionMismatch("AMG needs a square matrix".into()));
        }
        let mut levels = Vec::new();
        let mut cur = a.clone();
        cur.prune();
        loop {
            if cur.nrows <= opts.max_coarse || cur.is_diagonal() || levels.len() + 1 >= opts.max_levels {
                break;
            }
            let inv_diag = inverse_diagonal(&cur)?;
            let (agg, nc) = aggregate(&cur, opts.strength);
            if nc == 0 {
                break;
            }
            if (cur.nrows as f64) < 1.1 * nc as f64 {
                return Err(Error::AmgStagnation { level: levels.len(), fine: cur.nrows, coarse: nc });
            }
            let mut t = Triplets::new(cur.nrows, nc);
            for (i, &g) in agg.iter().enumerate() {
                if g != usize::MAX {
                    t.push(i, g, 1.0);
                }
            }
            let mut p = t.to_csr();
            if opts.smoothed {
                let w = (4.0 / 3.0) / spectral_radius(&cur, &inv_diag);
                let mut s = cur.clone();
                let neg: Vec<f64> = inv_diag.iter().map(|d| -w * d).collect();
                s.scale_rows_cols(&neg, &vec![1.0; cur.ncols]);
                let sp = s.matmul(&p)?;
                p = p.add(1.0, &sp, 1.0)?;
                p.prune();
            }
            let r = p.transpose();
            let mut coarse = r.matmul(&cur)?.matmul(&p)?;
            coarse.prune();
            let next = coarse;
            levels.push(Level { a: cur, inv_diag, p, r });
            cur = next;
        }
        let coarse = if cur.nrows == 0 {
            Coarse::Empty
        } else if cur.is_diagonal() {
            Coarse::Diagonal(inverse_diagonal(&cur)?)
        } else if cur.nrows <= opts.max_coarse.max(1) * 4 {
            Coarse::Lu(DenseLu::from_rows(&cur.to_dense())?)
        } else {
            return Err(Error::AmgStagnation { level: levels.len(), fine: cur.nrows, coarse: cur.nrows });
        };
        Ok(AmgHierarchy { levels, coarse, coarse_a: cur, opts: *opts })
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len() + 1
    }

    /// Unknowns per level, finest first.
    pub fn level_sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.levels.iter().map(|l| l.a.nrows).collect();
        s.push(self.coarse_a.nrows);
        s
    }

    fn smooth(&self, l: &Level, b: &[f64], x: &mut [f64], sweeps: usize, tmp: &mut [f64]) {
        for _ in 0..sweeps {
            l.a.matvec(x, tmp);
            for i in 0..x.len() {
                x[i] += self.opts.omega * l.inv_diag[i] * (b[i] - tmp[i]);
            }
        }
    }

    fn cycle(&self, k: usize, b: &[f64], x: &mut [f64]) {
        if k == self.levels.len() {
            match &self.coarse {
                Coarse::Lu(lu) => lu.solve(b, x),
                Coarse::Diagonal(d) => {
                    for i in 0..b.len() {
                        x[i] = d[i] * b[i];
                    }
                }
                Coarse::Empty => {}
            }
            return;
        }
        let l = &self.levels[k];
        let n = b.len();
        let mut tmp = vec![0.0; n];
        x.fill(0.0);
        self.smooth(l, b, x, self.opts.pre_sweeps, &mut tmp);
        l.a.matvec(x, &mut tmp);
        let res: Vec<f64> = b.iter().zip(&tmp).map(|(bi, ti)| bi - ti).collect();
        let rc = l.r.mul_vec(&res);
        let mut ec = vec![0.0; rc.len()];
        self.cycle(k + 1, &rc, &mut ec);
        l.p.matvec_add(1.0, &ec, x);
        self.smooth(l, b, x, self.opts.post_sweeps, &mut tmp);
    }

    /// One V-cycle from a zero initial guess.
    pub fn vcycle(&self, r: &[f64], z: &mut [f64]) {
        self.cycle(0, r, z);
    }
}

impl Preconditioner for AmgHierarchy {
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        self.vcycle(r, z);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{stiffness_matrix, FunctionSpace};
    use crate::krylov::gmres::{gmres, GmresOptions};
    use crate::krylov::DenseLu;
    use crate::mesh::{generate_rect, RectLabels};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn poisson_1d(n: usize) -> CsrMatrix {
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, 2.0);
            if i > 0 {
                t.push(i, i - 1, -1.0);
            }
            if i + 1 < n {
                t.push(i, i + 1, -1.0);
            }
        }
        t.to_csr()
    }

    #[test]
    fn one_dimensional_poisson() {
        let n = 127;
        let a = poisson_1d(n);
        let b: Vec<f64> = (0..n).map(|i| ((i * 7 % 11) as f64) - 5.0).collect();
        let want = DenseLu::from_rows(&a.to_dense()).unwrap().solve_vec(&b);
        for smoothed in [false, true] {
            let h = AmgHierarchy::build(&a, &AmgOptions { smoothed, ..Default::default() }).unwrap();
            assert!(h.n_levels() >= 2);
            let mut x = vec![0.0; n];
            let opts = GmresOptions { tol: 1e-8, ..Default::default() };
            let rep = gmres(&a, &b, &mut x, &h, &opts, None).unwrap();
            assert!(rep.converged && rep.iterations <= 15, "{smoothed}: {}", rep.iterations);
            let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..n {
                assert!((x[i] - want[i]).abs() < 1e-6 * scale);
            }
        }
    }

    #[test]
    fn identity_is_reproduced() {
        let a = CsrMatrix::identity(10);
        let h = AmgHierarchy::build(&a, &AmgOptions::default()).unwrap();
        let r: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let mut z = vec![0.0; 10];
        h.vcycle(&r, &mut z);
        assert_eq!(z, r);
    }

    #[test]
    fn vcycle_is_linear() {
        let a = poisson_1d(200);
        let h = AmgHierarchy::build(&a, &AmgOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r1: Vec<f64> = (0..200).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r2: Vec<f64> = (0..200).map(|_| rng.random_range(-1.0..1.0)).collect();
        let alpha = 0.37;
        let mut z1 = vec![0.0; 200];
        let mut z2 = vec![0.0; 200];
        let mut z12 = vec![0.0; 200];
        h.vcycle(&r1, &mut z1);
        h.vcycle(&r2, &mut z2);
        let r12: Vec<f64> = r1.iter().zip(&r2).map(|(a, b)| a + alpha * b).collect();
        h.vcycle(&r12, &mut z12);
        for i in 0..200 {
            assert!((z12[i] - z1[i] - alpha * z2[i]).abs() < 1e-12);
        }
    }

    fn laplace_iterations(n: usize, smoothed: bool) -> usize {
        let mesh = Arc::new(generate_rect(n, n, [1.0, 1.0], &RectLabels::default()).unwrap());
        let s = FunctionSpace::new(mesh, 1, 1).unwrap();
        let mut a = stiffness_matrix(&s).unwrap();
        let bnd = s.exterior_nodes();
        let mut mask = vec![false; s.n_dofs()];
        bnd.iter().for_each(|&i| mask[i] = true);
        a.zero_rows(&mask);
        a.zero_cols(&mask);
        a.set_diagonal(&mask, 4.0);
        let b: Vec<f64> = (0..s.n_dofs()).map(|i| if mask[i] { 0.0 } else { 1.0 }).collect();
        let h = AmgHierarchy::build(&a, &AmgOptions { smoothed, ..Default::default() }).unwrap();
        let mut x = vec![0.0; b.len()];
        let rep = gmres(&a, &b, &mut x, &h, &GmresOptions { tol: 1e-8, ..Default::default() }, None).unwrap();
        assert!(rep.converged);
        rep.iterations
    }

    #[test]
    fn laplacian_refinement_is_nearly_mesh_independent() {
        let coarse = laplace_iterations(32, true);
        let fine = laplace_iterations(64, true);
        assert!(fine as f64 <= 1.5 * coarse as f64, "{coarse} -> {fine}");
    }
}
