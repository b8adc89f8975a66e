//! Lagrange shape functions on simplices in barycentric form.
//!
//! Local numbering puts the vertex functions first, followed by one
//! function per edge (degree 2 only) in the order of [`edges`].

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

const EDGES_2D: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];
const EDGES_3D: [(usize, usize); 6] = [(0, 1), (1, 2), (2, 0), (0, 3), (1, 3), (2, 3)];

/// Local edges of a `dim`-simplex as pairs of local vertices.
pub fn edges(dim: usize) -> &'static [(usize, usize)] {
    if dim == 2 {
        &EDGES_2D
    } else {
        &EDGES_3D
    }
}

pub fn n_local(dim: usize, degree: usize) -> usize {
    match degree {
        1 => dim + 1,
        _ => dim + 1 + edges(dim).len(),
    }
}

/// Shape function values at barycentric point `lambda`.
pub fn shape_values(dim: usize, degree: usize, lambda: &[f64], out: &mut [f64]) {
    let nv = dim + 1;
    if degree == 1 {
        out[..nv].copy_from_slice(&lambda[..nv]);
        return;
    }
    for i in 0..nv {
        out[i] = lambda[i] * (2.0 * lambda[i] - 1.0);
    }
    for (e, &(a, b)) in edges(dim).iter().enumerate() {
        out[nv + e] = 4.0 * lambda[a] * lambda[b];
    }
}

/// Partial derivatives with respect to each barycentric coordinate, laid
/// out as `out[i * (dim + 1) + j] = d phi_i / d lambda_j`.
pub fn shape_dlambda(dim: usize, degree: usize, lambda: &[f64], out: &mut [f64]) {
    let nv = dim + 1;
    let n = n_local(dim, degree);
    out[..n * nv].fill(0.0);
    if degree == 1 {
        for i in 0..nv {
            out[i * nv + i] = 1.0;
        }
        return;
    }
    for i in 0..nv {
        out[i * nv + i] = 4.0 * lambda[i] - 1.0;
    }
    for (e, &(a, b)) in edges(dim).iter().enumerate() {
        out[(nv + e) * nv + a] = 4.0 * lambda[b];
        out[(nv + e) * nv + b] = 4.0 * lambda[a];
    }
}

/// Affine geometry of one cell.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub dim: usize,
    /// Jacobian determinant of the reference map (positive).
    pub det: f64,
    /// Gradients of the barycentric coordinates.
    pub grad_lambda: [Point; 4],
    pub vertices: [Point; 4],
}

impl CellGeometry {
    pub fn new(mesh: &Mesh, cell: usize) -> Result<Self> {
        let dim = mesh.dim();
        let idx = mesh.cell(cell);
        let mut vertices = [[0.0; 3]; 4];
        for (k, &v) in idx.iter().enumerate() {
            vertices[k] = *mesh.vertex(v);
        }
        let mut j = [[0.0; 3]; 3];
        for c in 0..dim {
            for r in 0..dim {
                j[r][c] = vertices[c + 1][r] - vertices[0][r];
            }
        }
        let mut grad_lambda = [[0.0; 3]; 4];
        let det;
        if dim == 2 {
            det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det <= 0.0 || !det.is_finite() {
                return Err(Error::DegenerateCell { cell, det });
            }
            // rows of the inverse jacobian
            grad_lambda[1] = [j[1][1] / det, -j[0][1] / det, 0.0];
            grad_lambda[2] = [-j[1][0] / det, j[0][0] / det, 0.0];
        } else {
            let c0 = [j[0][0], j[1][0], j[2][0]];
            let c1 = [j[0][1], j[1][1], j[2][1]];
            let c2 = [j[0][2], j[1][2], j[2][2]];
            let x12 = crate::mesh::cross(&c1, &c2);
            let x20 = crate::mesh::cross(&c2, &c0);
            let x01 = crate::mesh::cross(&c0, &c1);
            det = crate::mesh::dot(&c0, &x12);
            if det <= 0.0 || !det.is_finite() {
                return Err(Error::DegenerateCell { cell, det });
            }
            grad_lambda[1] = x12.map(|x| x / det);
            grad_lambda[2] = x20.map(|x| x / det);
            grad_lambda[3] = x01.map(|x| x / det);
        }
        for k in 1..=dim {
            for d in 0..3 {
                grad_lambda[0][d] -= grad_lambda[k][d];
            }
        }
        Ok(CellGeometry { dim, det, grad_lambda, vertices })
    }

    pub fn point(&self, lambda: &[f64]) -> Point {
        let mut x = [0.0; 3];
        for (k, l) in lambda.iter().enumerate() {
            for d in 0..3 {
                x[d] += l * self.vertices[k][d];
            }
        }
        x
    }

    pub fn volume(&self) -> f64 {
        self.det / if self.dim == 2 { 2.0 } else { 6.0 }
    }

    /// Physical gradients from barycentric derivatives.
    pub fn gradients(&self, n: usize, dlambda: &[f64], out: &mut [Point]) {
        let nv = self.dim + 1;
        for i in 0..n {
            let mut g = [0.0; 3];
            for j in 0..nv {
                let s = dlambda[i * nv + j];
                if s != 0.0 {
                    for d in 0..3 {
                        g[d] += s * self.grad_lambda[j][d];
                    }
                }
            }
            out[i] = g;
        }
    }

    /// Barycentric coordinates of a physical point.
    pub fn barycentric(&self, x: &Point) -> [f64; 4] {
        let mut l = [0.0; 4];
        let r = crate::mesh::sub(x, &self.vertices[0]);
        for k in 1..=self.dim {
            l[k] = crate::mesh::dot(&self.grad_lambda[k], &r);
        }
        l[0] = 1.0 - l[1..].iter().sum::<f64>();
        l
    }
}
