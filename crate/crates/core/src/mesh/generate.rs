//! Structured mesh generators.

use std::collections::BTreeMap;

use super::{Label, Mesh, MeshParts, Point};
use crate::error::{Error, Result};

/// Side names of a 2D structured grid. The grid's first parameter runs
/// from `left` to `right`, the second from `bottom` to `top`.
#[derive(Debug, Clone)]
pub struct RectLabels {
    pub left: String,
    pub right: String,
    pub bottom: String,
    pub top: String,
    pub subdomain: String,
}

impl Default for RectLabels {
    fn default() -> Self {
        RectLabels {
            left: "left".into(),
            right: "right".into(),
            bottom: "bottom".into(),
            top: "top".into(),
            subdomain: "domain".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoxLabels {
    pub left: String,
    pub right: String,
    pub bottom: String,
    pub top: String,
    pub back: String,
    pub front: String,
    pub subdomain: String,
}

impl Default for BoxLabels {
    fn default() -> Self {
        BoxLabels {
            left: "left".into(),
            right: "right".into(),
            bottom: "bottom".into(),
            top: "top".into(),
            back: "back".into(),
            front: "front".into(),
            subdomain: "domain".into(),
        }
    }
}

/// Assigns consecutive labels to names in order of first use.
#[derive(Default)]
struct Interner {
    names: BTreeMap<Label, String>,
}

impl Interner {
    fn get(&mut self, name: &str) -> Label {
        if let Some((l, _)) = self.names.iter().find(|(_, n)| n.as_str() == name) {
            return *l;
        }
        let l = self.names.len() as Label + 1;
        self.names.insert(l, name.to_string());
        l
    }
}

/// Unit-spaced-or-not tensor grid mapped through `map`, each quadrilateral
/// split into four triangles around its centre. `xs` and `ys` are the
/// grid lines in parameter space; `cell_label(i, j)` names the subdomain of
/// quadrilateral `(i, j)`.
pub fn generate_mapped_grid<'a>(
    xs: &[f64],
    ys: &[f64],
    map: impl Fn(f64, f64) -> Point,
    cell_label: impl Fn(usize, usize) -> &'a str,
    sides: &RectLabels,
) -> Result<Mesh> {
    if xs.len() < 2 || ys.len() < 2 {
        return Err(Error::InvalidArgument("a mapped grid needs at least two lines per direction".into()));
    }
    let (nx, ny) = (xs.len() - 1, ys.len() - 1);
    let grid = |i: usize, j: usize| j * (nx + 1) + i;
    let centre = |i: usize, j: usize| (nx + 1) * (ny + 1) + j * nx + i;

    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) + nx * ny);
    for &y in ys {
        for &x in xs {
            vertices.push(map(x, y));
        }
    }
    for j in 0..ny {
        for i in 0..nx {
            vertices.push(map(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])));
        }
    }

    let mut subdomains = Interner::default();
    let mut cells = Vec::with_capacity(12 * nx * ny);
    let mut cell_labels = Vec::with_capacity(4 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (grid(i, j), grid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1));
            let m = centre(i, j);
            let label = subdomains.get(cell_label(i, j));
            for (p, q) in [(a, b), (b, c), (c, d), (d, a)] {
                cells.extend_from_slice(&[p, q, m]);
                cell_labels.push(label);
            }
        }
    }

    let mut boundaries = Interner::default();
    let mut facets = Vec::new();
    let mut facet_labels = Vec::new();
    let mut side = |name: &str, pairs: &mut dyn Iterator<Item = (usize, usize)>| {
        let l = boundaries.get(name);
        for (p, q) in pairs {
            facets.extend_from_slice(&[p, q]);
            facet_labels.push(l);
        }
    };
    side(&sides.left, &mut (0..ny).map(|j| (grid(0, j), grid(0, j + 1))));
    side(&sides.right, &mut (0..ny).map(|j| (grid(nx, j), grid(nx, j + 1))));
    side(&sides.bottom, &mut (0..nx).map(|i| (grid(i, 0), grid(i + 1, 0))));
    side(&sides.top, &mut (0..nx).map(|i| (grid(i, ny), grid(i + 1, ny))));

    Mesh::new(MeshParts {
        dim: 2,
        vertices,
        cells,
        cell_labels,
        facets,
        facet_labels,
        subdomain_names: subdomains.names,
        boundary_names: boundaries.names,
    })
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// `[0, width] x [0, height]` with `nx x ny` crossed quadrilaterals.
pub fn generate_rect(nx: usize, ny: usize, extent: [f64; 2], labels: &RectLabels) -> Result<Mesh> {
    if nx == 0 || ny == 0 || extent.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "rectangle needs positive resolution and extent, got {nx}x{ny} and {extent:?}"
        )));
    }
    generate_mapped_grid(
        &linspace(0.0, extent[0], nx),
        &linspace(0.0, extent[1], ny),
        |x, y| [x, y, 0.0],
        |_, _| labels.subdomain.as_str(),
        labels,
    )
}

/// Sector `r_in <= r <= r_out`, `theta0 <= theta <= theta1` with sides
/// `inner`, `outer`, `start` and `end`.
pub fn generate_annulus_sector(
    nr: usize,
    ntheta: usize,
    r_in: f64,
    r_out: f64,
    theta0: f64,
    theta1: f64,
) -> Result<Mesh> {
    if nr == 0 || ntheta == 0 || !(r_in > 0.0 && r_out > r_in && theta1 > theta0) {
        return Err(Error::InvalidArgument("malformed annulus sector".into()));
    }
    generate_mapped_grid(
        &linspace(r_in, r_out, nr),
        &linspace(theta0, theta1, ntheta),
        |r, t| [r * t.cos(), r * t.sin(), 0.0],
        |_, _| "annulus",
        &RectLabels {
            left: "inner".into(),
            right: "outer".into(),
            bottom: "start".into(),
            top: "end".into(),
            subdomain: "annulus".into(),
        },
    )
}

/// Box `[0,a] x [0,b] x [0,c]`, each hexahedron split into six
/// tetrahedra along its main diagonal.
pub fn generate_box(nx: usize, ny: usize, nz: usize, extent: [f64; 3], labels: &BoxLabels) -> Result<Mesh> {
    if nx == 0 || ny == 0 || nz == 0 || extent.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidArgument("box needs positive resolution and extent".into()));
    }
    let n = [nx, ny, nz];
    let id = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([
                    extent[0] * i as f64 / nx as f64,
                    extent[1] * j as f64 / ny as f64,
                    extent[2] * k as f64 / nz as f64,
                ]);
            }
        }
    }
    const PATHS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::with_capacity(24 * nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                for path in PATHS {
                    let mut p = [i, j, k];
                    cells.push(id(p[0], p[1], p[2]));
                    for axis in path {
                        p[axis] += 1;
                        cells.push(id(p[0], p[1], p[2]));
                    }
                }
            }
        }
    }
    let mut subdomains = Interner::default();
    let sub = subdomains.get(&labels.subdomain);
    let cell_labels = vec![sub; cells.len() / 4];

    let mut boundaries = Interner::default();
    let mut facets = Vec::new();
    let mut facet_labels = Vec::new();
    // Each boundary square is split along the diagonal joining its lowest
    // and highest corner, matching the faces of the tetrahedra above.
    for (axis, lo, hi) in
        [(0, &labels.left, &labels.right), (1, &labels.bottom, &labels.top), (2, &labels.back, &labels.front)]
    {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        for (name, at) in [(lo, 0), (hi, n[axis])] {
            let l = boundaries.get(name);
            for a in 0..n[u] {
                for b in 0..n[v] {
                    let corner = |da: usize, db: usize| {
                        let mut p = [0; 3];
                        p[axis] = at;
                        p[u] = a + da;
                        p[v] = b + db;
                        id(p[0], p[1], p[2])
                    };
                    let (c00, c10, c11, c01) = (corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1));
                    facets.extend_from_slice(&[c00, c10, c11, c00, c11, c01]);
                    facet_labels.extend_from_slice(&[l, l]);
                }
            }
        }
    }
    Mesh::new(MeshParts {
        dim: 3,
        vertices,
        cells,
        cell_labels,
        facets,
        facet_labels,
        subdomain_names: subdomains.names,
        boundary_names: boundaries.names,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::mesh_stats;

    #[test]
    fn crossed_square_counts() {
        let mesh = generate_rect(32, 32, [1.0, 1.0], &RectLabels::default()).unwrap();
        assert_eq!(mesh.n_cells(), 4 * 32 * 32);
        assert_eq!(mesh.n_vertices(), 33 * 33 + 32 * 32);
        let s = mesh_stats(&mesh);
        // the longest edge of each crossed triangle is a grid edge
        assert!((s.h_max - 1.0 / 32.0).abs() < 1e-15);
        let area: f64 = (0..mesh.n_cells()).map(|c| mesh.cell_volume(c)).sum();
        assert!((area - 1.0).abs() < 1e-13);
        assert_eq!(mesh.exterior_faces().len(), 4 * 32);
        assert_eq!(mesh.n_facets(), 4 * 32);
    }

    #[test]
    fn kuhn_box_volume_and_boundary() {
        let mesh = generate_box(2, 3, 4, [1.0, 2.0, 0.5], &BoxLabels::default()).unwrap();
        assert_eq!(mesh.n_cells(), 6 * 24);
        let vol: f64 = (0..mesh.n_cells()).map(|c| mesh.cell_volume(c)).sum();
        assert!((vol - 1.0).abs() < 1e-13);
        assert_eq!(mesh.exterior_faces().len(), mesh.n_facets());
        for (c, _) in mesh.exterior_faces() {
            assert!(mesh.cell_volume(c) > 0.0);
        }
        let front = mesh.boundary_label("front").unwrap();
        for f in mesh.facets_with_label(front) {
            assert!((mesh.facet_centroid(f)[2] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn annulus_area() {
        let mesh = generate_annulus_sector(8, 64, 1.0, 2.0, 0.0, std::f64::consts::FRAC_PI_2).unwrap();
        let area: f64 = (0..mesh.n_cells()).map(|c| mesh.cell_volume(c)).sum();
        let exact = 0.25 * std::f64::consts::PI * 3.0;
        assert!((area - exact).abs() < 1e-3);
    }

    #[test]
    fn bad_arguments() {
        assert!(generate_rect(0, 2, [1.0, 1.0], &RectLabels::default()).is_err());
        assert!(generate_rect(2, 2, [-1.0, 1.0], &RectLabels::default()).is_err());
        assert!(generate_annulus_sector(2, 2, 2.0, 1.0, 0.0, 1.0).is_err());
    }
}
