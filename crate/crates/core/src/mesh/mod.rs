//! Tagged simplicial meshes (triangles in 2D, tetrahedra in 3D).
//!
//! A [`Mesh`] stores its labelled facets explicitly. Exterior facets carry a
//! boundary label, and meshes read from file may also label interior
//! interfaces between subdomains. Cells are reoriented on construction so
//! that every cell has a positive signed volume.

mod generate;
mod msh;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};

pub use generate::{generate_annulus_sector, generate_box, generate_mapped_grid, generate_rect};
pub use generate::{BoxLabels, RectLabels};
pub use msh::{load_msh, parse_msh, write_msh};

/// Spatial point; the third coordinate is zero for 2D meshes.
pub type Point = [f64; 3];

/// Physical group tag.
pub type Label = u32;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<Point>,
    cells: Vec<usize>,
    cell_labels: Vec<Label>,
    facets: Vec<usize>,
    facet_labels: Vec<Label>,
    subdomain_names: BTreeMap<Label, String>,
    boundary_names: BTreeMap<Label, String>,
    facet_cells: Vec<[usize; 2]>,
}

/// Raw mesh description consumed by [`Mesh::new`].
#[derive(Debug, Clone, Default)]
pub struct MeshParts {
    pub dim: usize,
    pub vertices: Vec<Point>,
    pub cells: Vec<usize>,
    pub cell_labels: Vec<Label>,
    pub facets: Vec<usize>,
    pub facet_labels: Vec<Label>,
    pub subdomain_names: BTreeMap<Label, String>,
    pub boundary_names: BTreeMap<Label, String>,
}

/// Sorted vertex tuple identifying a facet independent of orientation.
pub(crate) type FaceKey = [usize; 3];

pub(crate) fn face_key(verts: &[usize]) -> FaceKey {
    let mut key = [NONE; 3];
    key[..verts.len()].copy_from_slice(verts);
    key[..verts.len()].sort_unstable();
    key
}

impl Mesh {
    pub fn new(parts: MeshParts) -> Result<Self> {
        let MeshParts {
            dim,
            vertices,
            mut cells,
            cell_labels,
            facets,
            facet_labels,
            mut subdomain_names,
            mut boundary_names,
        } = parts;
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidMesh(format!("unsupported dimension {dim}")));
        }
        let nc = dim + 1;
        if cells.is_empty() || cells.len() % nc != 0 {
            return Err(Error::InvalidMesh("cell array is empty or ragged".into()));
        }
        if cell_labels.len() != cells.len() / nc {
            return Err(Error::InvalidMesh("one subdomain label per cell required".into()));
        }
        if facets.len() % dim != 0 || facet_labels.len() != facets.len() / dim {
            return Err(Error::InvalidMesh("one boundary label per facet required".into()));
        }
        if let Some(&bad) = cells.iter().chain(facets.iter()).find(|&&v| v >= vertices.len()) {
            return Err(Error::InvalidMesh(format!("vertex index {bad} out of range")));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidMesh("non-finite vertex coordinate".into()));
        }
        let mut used = vec![false; vertices.len()];
        for &v in &cells {
            used[v] = true;
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::InvalidMesh(format!("vertex {v} belongs to no cell")));
        }
        for (c, cell) in cells.chunks_mut(nc).enumerate() {
            let vol = signed_volume(dim, &vertices, cell);
            if vol == 0.0 || !vol.is_finite() {
                return Err(Error::DegenerateCell { cell: c, det: vol });
            }
            if vol < 0.0 {
                cell.swap(0, 1);
            }
        }
        for label in &cell_labels {
            subdomain_names.entry(*label).or_insert_with(|| format!("subdomain_{label}"));
        }
        for label in &facet_labels {
            boundary_names.entry(*label).or_insert_with(|| format!("boundary_{label}"));
        }

        let mut faces: HashMap<FaceKey, [usize; 2]> = HashMap::new();
        for (c, cell) in cells.chunks(nc).enumerate() {
            for k in 0..nc {
                let key = face_key(&local_face(cell, k));
                let slot = faces.entry(key).or_insert([NONE, NONE]);
                if slot[0] == NONE {
                    slot[0] = c;
                } else if slot[1] == NONE {
                    slot[1] = c;
                } else {
                    return Err(Error::InvalidMesh(format!("face {key:?} shared by more than two cells")));
                }
            }
        }
        let mut facet_cells = Vec::with_capacity(facet_labels.len());
        for (f, facet) in facets.chunks(dim).enumerate() {
            match faces.get(&face_key(facet)) {
                Some(adj) => facet_cells.push(*adj),
                None => return Err(Error::InvalidMesh(format!("facet {f} ({facet:?}) has no adjacent cell"))),
            }
        }
        Ok(Mesh {
            dim,
            vertices,
            cells,
            cell_labels,
            facets,
            facet_labels,
            subdomain_names,
            boundary_names,
            facet_cells,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cell_labels.len()
    }

    pub fn n_facets(&self) -> usize {
        self.facet_labels.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &Point {
        &self.vertices[v]
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let n = self.dim + 1;
        &self.cells[c * n..(c + 1) * n]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> {
        self.cells.chunks(self.dim + 1)
    }

    pub fn cell_label(&self, c: usize) -> Label {
        self.cell_labels[c]
    }

    pub fn cell_labels(&self) -> &[Label] {
        &self.cell_labels
    }

    pub fn facet(&self, f: usize) -> &[usize] {
        &self.facets[f * self.dim..(f + 1) * self.dim]
    }

    pub fn facet_label(&self, f: usize) -> Label {
        self.facet_labels[f]
    }

    pub fn facet_labels(&self) -> &[Label] {
        &self.facet_labels
    }

    pub fn subdomain_names(&self) -> &BTreeMap<Label, String> {
        &self.subdomain_names
    }

    pub fn boundary_names(&self) -> &BTreeMap<Label, String> {
        &self.boundary_names
    }

    /// First adjacent cell of a labelled facet, and the second one when the
    /// facet is an interior interface.
    pub fn facet_cells(&self, f: usize) -> (usize, Option<usize>) {
        let [a, b] = self.facet_cells[f];
        (a, (b != NONE).then_some(b))
    }

    pub fn subdomain_label(&self, name: &str) -> Result<Label> {
        self.subdomain_names
            .iter()
            .find(|(_, n)| n.as_str() == name)
            .map(|(l, _)| *l)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    pub fn boundary_label(&self, name: &str) -> Result<Label> {
        self.boundary_names
            .iter()
            .find(|(_, n)| n.as_str() == name)
            .map(|(l, _)| *l)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    pub fn subdomain_name(&self, label: Label) -> &str {
        self.subdomain_names.get(&label).map(String::as_str).unwrap_or("")
    }

    /// Names of the subdomains that actually own cells, in label order.
    pub fn used_subdomains(&self) -> Vec<(Label, &str)> {
        let used: BTreeSet<Label> = self.cell_labels.iter().copied().collect();
        used.into_iter().map(|l| (l, self.subdomain_name(l))).collect()
    }

    pub fn facets_with_label(&self, label: Label) -> Vec<usize> {
        (0..self.n_facets()).filter(|&f| self.facet_labels[f] == label).collect()
    }

    pub fn cell_volume(&self, c: usize) -> f64 {
        signed_volume(self.dim, &self.vertices, self.cell(c))
    }

    pub fn cell_centroid(&self, c: usize) -> Point {
        centroid(&self.vertices, self.cell(c))
    }

    pub fn facet_centroid(&self, f: usize) -> Point {
        centroid(&self.vertices, self.facet(f))
    }

    pub fn facet_measure(&self, f: usize) -> f64 {
        simplex_measure(self.dim - 1, &self.vertices, self.facet(f))
    }

    /// Unit normal of facet `f` pointing out of `cell`.
    pub fn facet_normal_from(&self, f: usize, cell: usize) -> Point {
        oriented_normal(self.dim, &self.vertices, self.facet(f), &self.cell_centroid(cell))
    }

    /// Faces with a single adjacent cell as `(cell, local face index)`,
    /// where local face `k` is the face opposite local vertex `k`.
    pub fn exterior_faces(&self) -> Vec<(usize, usize)> {
        let nc = self.dim + 1;
        let mut count: HashMap<FaceKey, u8> = HashMap::new();
        for cell in self.cells() {
            for k in 0..nc {
                *count.entry(face_key(&local_face(cell, k))).or_default() += 1;
            }
        }
        let mut out = Vec::new();
        for (c, cell) in self.cells().enumerate() {
            for k in 0..nc {
                if count[&face_key(&local_face(cell, k))] == 1 {
                    out.push((c, k));
                }
            }
        }
        out
    }

    /// Vertices lying on exterior faces.
    pub fn exterior_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.n_vertices()];
        for (c, k) in self.exterior_faces() {
            for v in local_face(self.cell(c), k) {
                on[v] = true;
            }
        }
        on
    }

    /// Returns a copy with every vertex moved by `map`.
    pub fn map_vertices(&self, map: impl Fn(&Point) -> Point) -> Result<Mesh> {
        Mesh::new(MeshParts {
            dim: self.dim,
            vertices: self.vertices.iter().map(map).collect(),
            cells: self.cells.clone(),
            cell_labels: self.cell_labels.clone(),
            facets: self.facets.clone(),
            facet_labels: self.facet_labels.clone(),
            subdomain_names: self.subdomain_names.clone(),
            boundary_names: self.boundary_names.clone(),
        })
    }
}

/// Vertices of the face opposite local vertex `k`.
pub fn local_face(cell: &[usize], k: usize) -> Vec<usize> {
    cell.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, v)| *v).collect()
}

fn centroid(vertices: &[Point], idx: &[usize]) -> Point {
    let mut c = [0.0; 3];
    for &v in idx {
        for d in 0..3 {
            c[d] += vertices[v][d];
        }
    }
    c.map(|x| x / idx.len() as f64)
}

pub(crate) fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &Point, b: &Point) -> Point {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn signed_volume(dim: usize, vertices: &[Point], cell: &[usize]) -> f64 {
    let p0 = &vertices[cell[0]];
    let e1 = sub(&vertices[cell[1]], p0);
    let e2 = sub(&vertices[cell[2]], p0);
    if dim == 2 {
        0.5 * (e1[0] * e2[1] - e1[1] * e2[0])
    } else {
        let e3 = sub(&vertices[cell[3]], p0);
        dot(&cross(&e1, &e2), &e3) / 6.0
    }
}

/// Measure of a `k`-simplex (length, area or volume) embedded in 3-space.
pub(crate) fn simplex_measure(k: usize, vertices: &[Point], idx: &[usize]) -> f64 {
    let p0 = &vertices[idx[0]];
    match k {
        0 => 1.0,
        1 => norm(&sub(&vertices[idx[1]], p0)),
        2 => 0.5 * norm(&cross(&sub(&vertices[idx[1]], p0), &sub(&vertices[idx[2]], p0))),
        _ => signed_volume(3, vertices, idx).abs(),
    }
}

fn oriented_normal(dim: usize, vertices: &[Point], facet: &[usize], inside: &Point) -> Point {
    let p0 = &vertices[facet[0]];
    let mut n = if dim == 2 {
        let t = sub(&vertices[facet[1]], p0);
        [t[1], -t[0], 0.0]
    } else {
        cross(&sub(&vertices[facet[1]], p0), &sub(&vertices[facet[2]], p0))
    };
    let len = norm(&n);
    n = n.map(|x| x / len);
    let fc = centroid(vertices, facet);
    if dot(&n, &sub(&fc, inside)) < 0.0 {
        n = n.map(|x| -x);
    }
    n
}

/// Unit outward normals of every facet carrying `label`, in facet order.
pub fn facet_normals(mesh: &Mesh, label: &str) -> Result<Vec<Point>> {
    let l = mesh.boundary_label(label)?;
    Ok(mesh.facets_with_label(l).into_iter().map(|f| mesh.facet_normal_from(f, mesh.facet_cells(f).0)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshStats {
    pub h_min: f64,
    pub h_max: f64,
    pub h_mean: f64,
    pub n_elements: usize,
}

/// Element diameters, taken as the largest vertex-pair distance per cell.
pub fn mesh_stats(mesh: &Mesh) -> MeshStats {
    let mut h_min = f64::INFINITY;
    let mut h_max = 0.0f64;
    let mut sum = 0.0;
    for cell in mesh.cells() {
        let mut h = 0.0f64;
        for (i, &a) in cell.iter().enumerate() {
            for &b in &cell[i + 1..] {
                h = h.max(norm(&sub(mesh.vertex(a), mesh.vertex(b))));
            }
        }
        h_min = h_min.min(h);
        h_max = h_max.max(h);
        sum += h;
    }
    MeshStats { h_min, h_max, h_mean: sum / mesh.n_cells() as f64, n_elements: mesh.n_cells() }
}

pub const WALL_LABEL: &str = "wall";

/// Cells of a parent mesh restricted to a set of subdomains.
#[derive(Debug, Clone)]
pub struct SubMesh {
    pub mesh: Arc<Mesh>,
    pub parent_cell_map: Vec<usize>,
    pub parent_vertex_map: Vec<usize>,
    /// Parent subdomain on the far side of each child facet, `None` when
    /// the facet lies on the parent's exterior boundary.
    pub facet_neighbor: Vec<Option<Label>>,
}

impl SubMesh {
    pub fn facets_adjacent_to(&self, subdomain: Label) -> Vec<usize> {
        (0..self.facet_neighbor.len()).filter(|&f| self.facet_neighbor[f] == Some(subdomain)).collect()
    }
}

/// Extracts the cells carrying any of `labels`. Exterior facets of the
/// result keep the parent's label where the parent labels them; the others
/// (new interfaces) are labelled [`WALL_LABEL`].
pub fn extract_subdomain(parent: &Mesh, labels: &[&str]) -> Result<SubMesh> {
    if labels.is_empty() {
        return Err(Error::InvalidArgument("no subdomain labels given".into()));
    }
    let wanted: BTreeSet<Label> = labels.iter().map(|n| parent.subdomain_label(n)).collect::<Result<_>>()?;
    let dim = parent.dim();
    let parent_cell_map: Vec<usize> =
        (0..parent.n_cells()).filter(|&c| wanted.contains(&parent.cell_label(c))).collect();
    if parent_cell_map.is_empty() {
        return Err(Error::InvalidArgument(format!("labels {labels:?} select no cells")));
    }
    let mut used = vec![false; parent.n_vertices()];
    for &c in &parent_cell_map {
        for &v in parent.cell(c) {
            used[v] = true;
        }
    }
    let parent_vertex_map: Vec<usize> = (0..used.len()).filter(|&v| used[v]).collect();
    let mut child_of = vec![NONE; parent.n_vertices()];
    for (i, &v) in parent_vertex_map.iter().enumerate() {
        child_of[v] = i;
    }

    // All parent faces with their adjacent cells, to find the neighbour
    // across each exterior face of the child.
    let mut parent_faces: HashMap<FaceKey, [usize; 2]> = HashMap::new();
    for (c, cell) in parent.cells().enumerate() {
        for k in 0..=dim {
            let slot = parent_faces.entry(face_key(&local_face(cell, k))).or_insert([NONE, NONE]);
            if slot[0] == NONE {
                slot[0] = c;
            } else {
                slot[1] = c;
            }
        }
    }
    let mut child_face_count: HashMap<FaceKey, u8> = HashMap::new();
    for &c in &parent_cell_map {
        for k in 0..=dim {
            *child_face_count.entry(face_key(&local_face(parent.cell(c), k))).or_default() += 1;
        }
    }
    let is_child_exterior = |key: &FaceKey| child_face_count.get(key) == Some(&1);
    let neighbor_of = |key: &FaceKey| -> Option<Label> {
        let [a, b] = parent_faces[key];
        [a, b]
            .into_iter()
            .filter(|&c| c != NONE && !wanted.contains(&parent.cell_label(c)))
            .map(|c| parent.cell_label(c))
            .next()
    };

    let mut boundary_names = BTreeMap::new();
    let mut facets = Vec::new();
    let mut facet_labels = Vec::new();
    let mut facet_neighbor = Vec::new();
    let mut seen: BTreeSet<FaceKey> = BTreeSet::new();
    for f in 0..parent.n_facets() {
        let key = face_key(parent.facet(f));
        if is_child_exterior(&key) && seen.insert(key) {
            let label = parent.facet_label(f);
            boundary_names.insert(label, parent.boundary_names()[&label].clone());
            facets.extend(parent.facet(f).iter().map(|&v| child_of[v]));
            facet_labels.push(label);
            facet_neighbor.push(neighbor_of(&key));
        }
    }
    let wall = match parent.boundary_label(WALL_LABEL) {
        Ok(l) => l,
        Err(_) => parent.boundary_names().keys().max().map_or(1, |m| m + 1),
    };
    for &c in &parent_cell_map {
        for k in 0..=dim {
            let face = local_face(parent.cell(c), k);
            let key = face_key(&face);
            if is_child_exterior(&key) && seen.insert(key) {
                boundary_names.insert(wall, WALL_LABEL.to_string());
                facets.extend(face.iter().map(|&v| child_of[v]));
                facet_labels.push(wall);
                facet_neighbor.push(neighbor_of(&key));
            }
        }
    }

    let mut subdomain_names = BTreeMap::new();
    for l in &wanted {
        subdomain_names.insert(*l, parent.subdomain_names()[l].clone());
    }
    let mesh = Mesh::new(MeshParts {
        dim,
        vertices: parent_vertex_map.iter().map(|&v| *parent.vertex(v)).collect(),
        cells: parent_cell_map.iter().flat_map(|&c| parent.cell(c).iter().map(|&v| child_of[v])).collect(),
        cell_labels: parent_cell_map.iter().map(|&c| parent.cell_label(c)).collect(),
        facets,
        facet_labels,
        subdomain_names,
        boundary_names,
    })?;
    Ok(SubMesh { mesh: Arc::new(mesh), parent_cell_map, parent_vertex_map, facet_neighbor })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_triangle() -> Mesh {
        Mesh::new(MeshParts {
            dim: 2,
            vertices: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            cells: vec![0, 1, 2],
            cell_labels: vec![1],
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn single_triangle_stats() {
        let s = mesh_stats(&unit_triangle());
        let r2 = 2f64.sqrt();
        assert!((s.h_min - r2).abs() < 1e-15 && (s.h_max - r2).abs() < 1e-15);
        assert!((s.h_mean - r2).abs() < 1e-15);
        assert_eq!(s.n_elements, 1);
    }

    #[test]
    fn two_cell_mean_diameter() {
        let mesh = Mesh::new(MeshParts {
            dim: 2,
            vertices: vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.5, 0.5, 0.0],
                [3.0, 0.0, 0.0],
                [5.0, 0.0, 0.0],
                [4.0, 1.0, 0.0],
            ],
            cells: vec![0, 1, 2, 3, 4, 5],
            cell_labels: vec![1, 1],
            ..Default::default()
        })
        .unwrap();
        let s = mesh_stats(&mesh);
        assert!((s.h_mean - 1.5).abs() < 1e-15);
    }

    #[test]
    fn negative_orientation_is_fixed() {
        let mesh = Mesh::new(MeshParts {
            dim: 2,
            vertices: vec![[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]],
            cells: vec![0, 1, 2],
            cell_labels: vec![1],
            ..Default::default()
        })
        .unwrap();
        assert!(mesh.cell_volume(0) > 0.0);
    }

    #[test]
    fn degenerate_cell_rejected() {
        let err = Mesh::new(MeshParts {
            dim: 2,
            vertices: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
            cells: vec![0, 1, 2],
            cell_labels: vec![1],
            ..Default::default()
        });
        assert!(matches!(err, Err(Error::DegenerateCell { .. })));
    }

    #[test]
    fn dangling_facet_rejected() {
        let err = Mesh::new(MeshParts {
            dim: 2,
            vertices: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [5.0, 5.0, 0.0]],
            cells: vec![0, 1, 2, 1, 3, 2],
            cell_labels: vec![1, 1],
            facets: vec![0, 3],
            facet_labels: vec![1],
            ..Default::default()
        });
        assert!(matches!(err, Err(Error::InvalidMesh(m)) if m.contains("no adjacent cell")));
    }

    #[test]
    fn square_side_normals() {
        let mesh = generate_rect(3, 2, [1.0, 1.0], &RectLabels::default()).unwrap();
        for n in facet_normals(&mesh, "right").unwrap() {
            assert!((n[0] - 1.0).abs() < 1e-12 && n[1].abs() < 1e-12);
        }
        for n in facet_normals(&mesh, "top").unwrap() {
            assert!(n[0].abs() < 1e-12 && (n[1] - 1.0).abs() < 1e-12);
        }
        assert!(facet_normals(&mesh, "nowhere").is_err());
    }

    #[test]
    fn annulus_outer_normals_are_radial() {
        let mesh = generate_annulus_sector(4, 12, 1.0, 2.0, 0.1, 1.3).unwrap();
        let outer = mesh.boundary_label("outer").unwrap();
        for f in mesh.facets_with_label(outer) {
            let n = mesh.facet_normal_from(f, mesh.facet_cells(f).0);
            let m = mesh.facet_centroid(f);
            let r = norm(&m);
            for d in 0..2 {
                assert!((n[d] - m[d] / r).abs() < 1e-10);
            }
            assert!((norm(&n) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn extract_everything_is_identity() {
        let mesh = generate_rect(3, 2, [1.0, 2.0], &RectLabels::default()).unwrap();
        let sub = extract_subdomain(&mesh, &["domain"]).unwrap();
        assert_eq!(*sub.mesh, mesh);
        assert!(sub.parent_cell_map.iter().enumerate().all(|(i, &c)| i == c));
        assert!(sub.parent_vertex_map.iter().enumerate().all(|(i, &v)| i == v));
        assert!(sub.facet_neighbor.iter().all(Option::is_none));
    }

    #[test]
    fn extract_half_square() {
        let xs: Vec<f64> = (0..=4).map(|i| i as f64 / 4.0).collect();
        let mesh = generate_mapped_grid(
            &xs,
            &xs,
            |x, y| [x, y, 0.0],
            |i, _| if i < 2 { "left_half" } else { "right_half" },
            &RectLabels::default(),
        )
        .unwrap();
        let sub = extract_subdomain(&mesh, &["left_half"]).unwrap();
        assert_eq!(sub.mesh.n_cells(), mesh.n_cells() / 2);
        let wall = sub.mesh.boundary_label(WALL_LABEL).unwrap();
        let walls = sub.mesh.facets_with_label(wall);
        // the interface x = 1/2 is cut into 4 segments
        assert_eq!(walls.len(), 4);
        for f in walls {
            assert!((sub.mesh.facet_centroid(f)[0] - 0.5).abs() < 1e-15);
            assert_eq!(sub.facet_neighbor[f], Some(mesh.subdomain_label("right_half").unwrap()));
        }
        let area: f64 = (0..sub.mesh.n_cells()).map(|c| sub.mesh.cell_volume(c)).sum();
        assert!((area - 0.5).abs() < 1e-14);
        for (i, &pv) in sub.parent_vertex_map.iter().enumerate() {
            assert_eq!(sub.mesh.vertex(i), mesh.vertex(pv));
        }
        assert!(extract_subdomain(&mesh, &["missing"]).is_err());
    }
}
