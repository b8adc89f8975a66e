use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::fem::{simplex_rule, CellGeometry, FunctionSpace, QuadratureRule};
use crate::krylov::{dot, norm2, CsrMatrix, Triplets};
use crate::mesh::{Mesh, Point};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WssOptions {
    /// Drop the normal component, keeping only the tangential traction.
    pub tangential: bool,
}

/// Wall shear stress on a set of wall facets.
///
/// `raw` holds one vector per facet vertex, in facet order, and is
/// discontinuous across facets. `projected` is its surface L² projection
/// onto continuous piecewise-linear vectors, one value per entry of
/// `vertices`.
#[derive(Debug, Clone)]
pub struct WssField {
    pub dim: usize,
    pub facets: Vec<usize>,
    pub raw: Vec<Point>,
    pub vertices: Vec<usize>,
    pub projected: Vec<Point>,
    /// Mean of the projected magnitude over each facet [Pa].
    pub magnitude: Vec<f64>,
    /// Relative residual of the mass-matrix solve.
    pub projection_residual: f64,
    local: Vec<usize>,
    measures: Vec<f64>,
}

/// Boundary facets carrying any of the given labels.
pub fn wall_facets(mesh: &Mesh, labels: &[&str]) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for name in labels {
        let label = mesh.boundary_label(name)?;
        out.extend(mesh.facets_with_label(label));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Computes `mu (grad u) n` on the listed facets of the velocity space's
/// mesh, with `n` the outward normal of the adjacent cell.
pub fn wall_shear_stress(
    space: &FunctionSpace,
    u: &[f64],
    facets: &[usize],
    mu: f64,
    opts: WssOptions,
) -> Result<WssField> {
    let mesh = space.mesh();
    let dim = mesh.dim();
    if space.n_comp() != dim {
        return Err(Error::InvalidArgument("wall shear stress needs a vector velocity space".into()));
    }
    if u.len() != space.n_dofs() {
        return Err(Error::DimensionMismatch(format!(
            "velocity has {} values, the space has {} degrees of freedom",
            u.len(),
            space.n_dofs()
        )));
    }
    if facets.is_empty() {
        return Err(Error::InvalidArgument("no wall facets selected".into()));
    }

    let mut raw = Vec::with_capacity(facets.len() * dim);
    for &f in facets {
        let cell = mesh.facet_cells(f).0;
        let geom = CellGeometry::new(mesh, cell)?;
        let n = mesh.facet_normal_from(f, cell);
        let cv = mesh.cell(cell);
        for v in mesh.facet(f) {
            let k = cv.iter().position(|w| w == v).expect("facet vertex lies in its cell");
            let mut lambda = [0.0; 4];
            lambda[k] = 1.0;
            let g = space.eval_grad(u, cell, &geom, &lambda[..=dim]);
            let mut t = [0.0; 3];
            for (i, ti) in t.iter_mut().enumerate() {
                *ti = mu * (0..3).map(|j| g[i][j] * n[j]).sum::<f64>();
            }
            if opts.tangential {
                let tn: f64 = (0..3).map(|i| t[i] * n[i]).sum();
                for i in 0..3 {
                    t[i] -= tn * n[i];
                }
            }
            raw.push(t);
        }
    }

    let mut index = BTreeMap::new();
    for &f in facets {
        for &v in mesh.facet(f) {
            let next = index.len();
            index.entry(v).or_insert(next);
        }
    }
    // Renumber in ascending vertex order so the output is independent of facet order.
    let vertices: Vec<usize> = index.keys().copied().collect();
    for (i, slot) in index.values_mut().enumerate() {
        *slot = i;
    }
    let local: Vec<usize> = facets.iter().flat_map(|&f| mesh.facet(f).iter().map(|v| index[v])).collect();
    let measures: Vec<f64> = facets.iter().map(|&f| mesh.facet_measure(f)).collect();

    let nv = vertices.len();
    let mut trip = Triplets::new(nv, nv);
    let mut rhs = vec![vec![0.0; nv]; dim];
    let denom = (dim * (dim + 1)) as f64;
    for (fi, &m) in measures.iter().enumerate() {
        for a in 0..dim {
            let ia = local[fi * dim + a];
            for b in 0..dim {
                let w = m * if a == b { 2.0 } else { 1.0 } / denom;
                trip.push(ia, local[fi * dim + b], w);
                for (c, r) in rhs.iter_mut().enumerate() {
                    r[ia] += w * raw[fi * dim + b][c];
                }
            }
        }
    }
    let mass = CsrMatrix::from_triplets(&trip);
    let mut projected = vec![[0.0; 3]; nv];
    let mut worst: f64 = 0.0;
    for (c, b) in rhs.iter().enumerate() {
        let x = mass_solve(&mass, b, 1e-13)?;
        let mut r = mass.mul_vec(&x);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri -= bi;
        }
        let bn = norm2(b);
        if bn > 0.0 {
            worst = worst.max(norm2(&r) / bn);
        }
        for (p, xi) in projected.iter_mut().zip(&x) {
            p[c] = *xi;
        }
    }

    let mut field = WssField {
        dim,
        facets: facets.to_vec(),
        raw,
        vertices,
        projected,
        magnitude: Vec::new(),
        projection_residual: worst,
        local,
        measures,
    };
    let rule = simplex_rule(dim - 1, 4)?;
    field.magnitude = (0..facets.len()).map(|fi| field.facet_integral(fi, &rule, norm) / field.measures[fi]).collect();
    Ok(field)
}

fn norm(p: &Point) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

/// Jacobi-preconditioned conjugate gradients for the symmetric positive
/// definite surface mass matrix.
fn mass_solve(a: &CsrMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let bn = norm2(b);
    if bn == 0.0 {
        return Ok(x);
    }
    let dinv: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..10 * n + 100 {
        let q = a.mul_vec(&p);
        let alpha = rz / dot(&p, &q);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        if norm2(&r) <= tol * bn {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::LinearSolve { iterations: 10 * n + 100, relative_residual: norm2(&r) / bn })
}

impl WssField {
    fn facet_integral(&self, fi: usize, rule: &QuadratureRule, f: impl Fn(&Point) -> f64) -> f64 {
        let scale = self.measures[fi] / rule.reference_measure();
        (0..rule.len())
            .map(|q| {
                let l = rule.lambda(q);
                let mut v = [0.0; 3];
                for (a, la) in l.iter().enumerate() {
                    let pv = &self.projected[self.local[fi * self.dim + a]];
                    for c in 0..3 {
                        v[c] += la * pv[c];
                    }
                }
                rule.weights[q] * scale * f(&v)
            })
            .sum()
    }

    pub fn area(&self) -> f64 {
        self.measures.iter().sum()
    }

    /// Area-weighted mean of the projected magnitude, optionally over a
    /// subset of the wall facets (given as facet indices of the mesh).
    pub fn mean_magnitude(&self, subset: Option<&[usize]>) -> Result<f64> {
        let keep = selector(subset);
        let (mut num, mut den) = (0.0, 0.0);
        for (fi, &f) in self.facets.iter().enumerate() {
            if keep(f) {
                num += self.magnitude[fi] * self.measures[fi];
                den += self.measures[fi];
            }
        }
        if den == 0.0 {
            return Err(Error::InvalidArgument("no wall facets in the requested subset".into()));
        }
        Ok(num / den)
    }

    /// Largest projected magnitude at a wall vertex.
    pub fn max_magnitude(&self) -> f64 {
        self.projected.iter().map(norm).fold(0.0, f64::max)
    }

    /// Smallest and largest projected magnitude over the vertices of the
    /// selected facets, or of the whole wall.
    pub fn magnitude_range(&self, subset: Option<&[usize]>) -> (f64, f64) {
        let keep = selector(subset);
        let mut range = (f64::INFINITY, f64::NEG_INFINITY);
        for (fi, &f) in self.facets.iter().enumerate() {
            if keep(f) {
                for a in 0..self.dim {
                    let m = norm(&self.projected[self.local[fi * self.dim + a]]);
                    range = (range.0.min(m), range.1.max(m));
                }
            }
        }
        range
    }

    /// Exact `L²(wall)` distance between the raw field and a continuous
    /// piecewise-linear field given at `vertices`.
    pub fn distance_to_raw(&self, w: &[Point]) -> Result<f64> {
        if w.len() != self.vertices.len() {
            return Err(Error::DimensionMismatch(format!(
                "candidate has {} vertex values, the wall has {}",
                w.len(),
                self.vertices.len()
            )));
        }
        let d = self.dim;
        let denom = (d * (d + 1)) as f64;
        let mut total = 0.0;
        for (fi, &m) in self.measures.iter().enumerate() {
            for a in 0..d {
                for b in 0..d {
                    let ea = sub(&self.raw[fi * d + a], &w[self.local[fi * d + a]]);
                    let eb = sub(&self.raw[fi * d + b], &w[self.local[fi * d + b]]);
                    let wgt = m * if a == b { 2.0 } else { 1.0 } / denom;
                    total += wgt * (ea[0] * eb[0] + ea[1] * eb[1] + ea[2] * eb[2]);
                }
            }
        }
        Ok(total.max(0.0).sqrt())
    }

    /// Per-facet magnitudes scattered to all facets of a mesh, zero elsewhere.
    pub fn facet_data(&self, n_facets: usize) -> Vec<f64> {
        let mut out = vec![0.0; n_facets];
        for (fi, &f) in self.facets.iter().enumerate() {
            out[f] = self.magnitude[fi];
        }
        out
    }

    /// Projected vectors scattered to all vertices of a mesh, zero elsewhere.
    pub fn vertex_data(&self, n_vertices: usize) -> Vec<f64> {
        let mut out = vec![0.0; 3 * n_vertices];
        for (i, &v) in self.vertices.iter().enumerate() {
            out[3 * v..3 * v + 3].copy_from_slice(&self.projected[i]);
        }
        out
    }
}

fn selector(subset: Option<&[usize]>) -> impl Fn(usize) -> bool {
    let set: Option<BTreeSet<usize>> = subset.map(|s| s.iter().copied().collect());
    move |f| set.as_ref().is_none_or(|s| s.contains(&f))
}

fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
