//! Lagrange function spaces and their degree-of-freedom layout.
//!
//! Degrees of freedom are blocked by component: component `c` of node `n`
//! has global index `c * n_nodes + n`. For continuous spaces vertex nodes
//! coincide with mesh vertices and edge nodes follow, numbered in order of
//! first appearance while sweeping the cells.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use super::basis::{self, CellGeometry};
use crate::error::{Error, Result};
use crate::mesh::{local_face, Mesh, Point};

#[derive(Debug, Clone)]
pub struct FunctionSpace {
    mesh: Arc<Mesh>,
    degree: usize,
    n_comp: usize,
    discontinuous: bool,
    n_local: usize,
    n_nodes: usize,
    cell_nodes: Vec<usize>,
    node_coords: Vec<Point>,
    edge_nodes: HashMap<(usize, usize), usize>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl FunctionSpace {
    /// Continuous Lagrange space of degree 1 or 2 with `n_comp` components.
    pub fn new(mesh: Arc<Mesh>, degree: usize, n_comp: usize) -> Result<Self> {
        Self::build(mesh, degree, n_comp, false)
    }

    /// Same local basis but with every cell owning its own nodes.
    pub fn discontinuous(mesh: Arc<Mesh>, degree: usize, n_comp: usize) -> Result<Self> {
        Self::build(mesh, degree, n_comp, true)
    }

    fn build(mesh: Arc<Mesh>, degree: usize, n_comp: usize, discontinuous: bool) -> Result<Self> {
        if !(1..=2).contains(&degree) {
            return Err(Error::InvalidArgument(format!("unsupported degree {degree}")));
        }
        if n_comp == 0 || n_comp > 3 {
            return Err(Error::InvalidArgument(format!("unsupported component count {n_comp}")));
        }
        let dim = mesh.dim();
        let n_local = basis::n_local(dim, degree);
        let nv = dim + 1;
        let mut cell_nodes = Vec::with_capacity(mesh.n_cells() * n_local);
        let mut node_coords = Vec::new();
        let mut edge_nodes = HashMap::new();
        let midpoint = |a: usize, b: usize| -> Point {
            let (p, q) = (mesh.vertex(a), mesh.vertex(b));
            [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), 0.5 * (p[2] + q[2])]
        };
        if discontinuous {
            for cell in mesh.cells() {
                for &v in cell {
                    cell_nodes.push(node_coords.len());
                    node_coords.push(*mesh.vertex(v));
                }
                if degree == 2 {
                    for &(a, b) in basis::edges(dim) {
                        cell_nodes.push(node_coords.len());
                        node_coords.push(midpoint(cell[a], cell[b]));
                    }
                }
            }
        } else {
            node_coords.extend_from_slice(mesh.vertices());
            for cell in mesh.cells() {
                cell_nodes.extend_from_slice(&cell[..nv]);
                if degree == 2 {
                    for &(a, b) in basis::edges(dim) {
                        let key = edge_key(cell[a], cell[b]);
                        let next = node_coords.len();
                        let id = *edge_nodes.entry(key).or_insert(next);
                        if id == next {
                            node_coords.push(midpoint(cell[a], cell[b]));
                        }
                        cell_nodes.push(id);
                    }
                }
            }
        }
        Ok(FunctionSpace {
            n_nodes: node_coords.len(),
            mesh,
            degree,
            n_comp,
            discontinuous,
            n_local,
            cell_nodes,
            node_coords,
            edge_nodes,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_comp(&self) -> usize {
        self.n_comp
    }

    pub fn is_discontinuous(&self) -> bool {
        self.discontinuous
    }

    /// Scalar shape functions per cell.
    pub fn n_local(&self) -> usize {
        self.n_local
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_dofs(&self) -> usize {
        self.n_nodes * self.n_comp
    }

    pub fn dof(&self, comp: usize, node: usize) -> usize {
        comp * self.n_nodes + node
    }

    pub fn cell_nodes(&self, cell: usize) -> &[usize] {
        &self.cell_nodes[cell * self.n_local..(cell + 1) * self.n_local]
    }

    pub fn node_coords(&self) -> &[Point] {
        &self.node_coords
    }

    /// Nodes lying on the given local face of a cell.
    fn face_nodes(&self, cell: usize, k: usize, out: &mut BTreeSet<usize>) {
        let nodes = self.cell_nodes(cell);
        let dim = self.mesh.dim();
        for i in 0..=dim {
            if i != k {
                out.insert(nodes[i]);
            }
        }
        if self.degree == 2 {
            for (e, &(a, b)) in basis::edges(dim).iter().enumerate() {
                if a != k && b != k {
                    out.insert(nodes[dim + 1 + e]);
                }
            }
        }
    }

    /// Nodes on facets carrying any of the named boundary labels.
    pub fn label_nodes(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut out = BTreeSet::new();
        for name in labels {
            let l = self.mesh.boundary_label(name)?;
            for f in self.mesh.facets_with_label(l) {
                let cell = self.mesh.facet_cells(f).0;
                let verts = self.mesh.facet(f);
                let k =
                    self.mesh.cell(cell).iter().position(|v| !verts.contains(v)).expect("facet is a face of its cell");
                self.face_nodes(cell, k, &mut out);
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Nodes on the exterior boundary of the mesh.
    pub fn exterior_nodes(&self) -> Vec<usize> {
        let mut out = BTreeSet::new();
        for (c, k) in self.mesh.exterior_faces() {
            self.face_nodes(c, k, &mut out);
        }
        out.into_iter().collect()
    }

    /// Edge node of a continuous degree-2 space.
    pub fn edge_node(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_nodes.get(&edge_key(a, b)).copied()
    }

    /// Nodal interpolant of `f`, which writes `n_comp` values per point.
    pub fn interpolate(&self, f: impl Fn(&Point, &mut [f64])) -> Vec<f64> {
        let mut out = vec![0.0; self.n_dofs()];
        let mut v = vec![0.0; self.n_comp];
        for (n, x) in self.node_coords.iter().enumerate() {
            f(x, &mut v);
            for c in 0..self.n_comp {
                out[c * self.n_nodes + n] = v[c];
            }
        }
        out
    }

    /// Field values at barycentric point `lambda` of `cell`.
    pub fn eval(&self, coef: &[f64], cell: usize, lambda: &[f64]) -> [f64; 3] {
        let mut phi = [0.0; 10];
        basis::shape_values(self.mesh.dim(), self.degree, lambda, &mut phi);
        let mut out = [0.0; 3];
        for (i, &node) in self.cell_nodes(cell).iter().enumerate() {
            for c in 0..self.n_comp {
                out[c] += coef[c * self.n_nodes + node] * phi[i];
            }
        }
        out
    }

    /// Field gradients, `out[c][d] = d u_c / d x_d`.
    pub fn eval_grad(&self, coef: &[f64], cell: usize, geom: &CellGeometry, lambda: &[f64]) -> [[f64; 3]; 3] {
        let dim = self.mesh.dim();
        let mut dl = [0.0; 40];
        basis::shape_dlambda(dim, self.degree, lambda, &mut dl);
        let mut grads = [[0.0; 3]; 10];
        geom.gradients(self.n_local, &dl, &mut grads);
        let mut out = [[0.0; 3]; 3];
        for (i, &node) in self.cell_nodes(cell).iter().enumerate() {
            for c in 0..self.n_comp {
                let a = coef[c * self.n_nodes + node];
                for d in 0..3 {
                    out[c][d] += a * grads[i][d];
                }
            }
        }
        out
    }

    /// Local face index opposite the cell vertex absent from `facet`.
    pub fn opposite_vertex(&self, cell: usize, facet: &[usize]) -> usize {
        let cell_v = self.mesh.cell(cell);
        let face_set: Vec<usize> = facet.to_vec();
        (0..cell_v.len())
            .find(|&k| local_face(cell_v, k).iter().all(|v| face_set.contains(v)))
            .expect("facet belongs to cell")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_box, generate_rect, BoxLabels, RectLabels};

    #[test]
    fn p2_counts_on_square() {
        let mesh = Arc::new(generate_rect(2, 2, [1.0, 1.0], &RectLabels::default()).unwrap());
        let p1 = FunctionSpace::new(mesh.clone(), 1, 1).unwrap();
        let p2 = FunctionSpace::new(mesh.clone(), 2, 2).unwrap();
        // vertices: 9 grid + 4 centres; edges: 12 grid + 16 diagonals
        assert_eq!(p1.n_nodes(), 13);
        assert_eq!(p2.n_nodes(), 13 + 28);
        assert_eq!(p2.n_dofs(), 2 * 41);
        // each side has 2 segments: 3 vertices + 2 midpoints
        assert_eq!(p2.label_nodes(&["left"]).unwrap().len(), 5);
        assert_eq!(p2.exterior_nodes().len(), 16);
        assert_eq!(p1.exterior_nodes().len(), 8);
        let dg = FunctionSpace::discontinuous(mesh.clone(), 1, 1).unwrap();
        assert_eq!(dg.n_nodes(), 3 * mesh.n_cells());
    }

    #[test]
    fn p2_reproduces_quadratics() {
        let mesh = Arc::new(generate_box(2, 1, 1, [1.0, 1.0, 1.0], &BoxLabels::default()).unwrap());
        let space = FunctionSpace::new(mesh.clone(), 2, 2).unwrap();
        let f = |x: &Point| [x[0] * x[1] + x[2] * x[2], 1.0 - x[0] * x[0]];
        let coef = space.interpolate(|x, out| out.copy_from_slice(&f(x)));
        let lam = [0.1, 0.2, 0.3, 0.4];
        for c in 0..mesh.n_cells() {
            let g = CellGeometry::new(&mesh, c).unwrap();
            let x = g.point(&lam);
            let v = space.eval(&coef, c, &lam);
            let want = f(&x);
            assert!((v[0] - want[0]).abs() < 1e-14 && (v[1] - want[1]).abs() < 1e-14);
            let gr = space.eval_grad(&coef, c, &g, &lam);
            assert!((gr[0][0] - x[1]).abs() < 1e-12);
            assert!((gr[0][2] - 2.0 * x[2]).abs() < 1e-12);
            assert!((gr[1][0] + 2.0 * x[0]).abs() < 1e-12);
        }
    }
}
