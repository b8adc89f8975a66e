use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::FunctionSpace;
use crate::mesh::{Mesh, SubMesh};

/// Values attached to mesh vertices, `comps` consecutive entries per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct PointField {
    pub name: String,
    pub comps: usize,
    pub values: Vec<f64>,
}

/// Values attached to cells, `comps` consecutive entries per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    pub name: String,
    pub comps: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VtuData {
    pub point: Vec<PointField>,
    pub cell: Vec<CellField>,
}

impl VtuData {
    pub fn point(mut self, name: &str, comps: usize, values: Vec<f64>) -> Self {
        self.point.push(PointField { name: name.into(), comps, values });
        self
    }

    pub fn cell(mut self, name: &str, comps: usize, values: Vec<f64>) -> Self {
        self.cell.push(CellField { name: name.into(), comps, values });
        self
    }
}

/// Samples a continuous field at the mesh vertices, interleaving components.
/// Vertex nodes come first in the node numbering of continuous spaces.
pub fn vertex_values(space: &FunctionSpace, coef: &[f64]) -> Result<Vec<f64>> {
    if space.is_discontinuous() {
        return Err(Error::InvalidArgument("vertex sampling needs a continuous space".into()));
    }
    if coef.len() != space.n_dofs() {
        return Err(Error::DimensionMismatch(format!(
            "field has {} values, the space has {} degrees of freedom",
            coef.len(),
            space.n_dofs()
        )));
    }
    let nv = space.mesh().n_vertices();
    let (nn, nc) = (space.n_nodes(), space.n_comp());
    let mut out = Vec::with_capacity(nv * nc);
    for v in 0..nv {
        for c in 0..nc {
            out.push(coef[c * nn + v]);
        }
    }
    Ok(out)
}

/// Copies per-vertex values from a submesh into a parent-sized array,
/// filling vertices outside the submesh with `fill`.
pub fn extend_to_parent(sub: &SubMesh, values: &[f64], comps: usize, n_parent: usize, fill: f64) -> Vec<f64> {
    let mut out = vec![fill; n_parent * comps];
    for (local, &parent) in sub.parent_vertex_map.iter().enumerate() {
        out[parent * comps..(parent + 1) * comps].copy_from_slice(&values[local * comps..(local + 1) * comps]);
    }
    out
}

fn data_array(buf: &mut String, name: &str, comps: usize, values: &[f64], count: usize) {
    // Two-component vectors are padded so viewers treat them as vectors.
    let out_comps = if comps == 2 { 3 } else { comps };
    let _ = writeln!(
        buf,
        "        <DataArray type=\"Float64\" Name=\"{name}\" NumberOfComponents=\"{out_comps}\" format=\"ascii\">"
    );
    for e in 0..count {
        buf.push_str("         ");
        for c in 0..out_comps {
            let v = if c < comps { values[e * comps + c] } else { 0.0 };
            let _ = write!(buf, " {v:.12e}");
        }
        buf.push('\n');
    }
    buf.push_str("        </DataArray>\n");
}

/// Writes an ASCII XML unstructured grid. The subdomain label of each cell
/// is always included as cell data.
pub fn write_vtu(mesh: &Mesh, data: &VtuData, path: &Path) -> Result<()> {
    let (nv, nc) = (mesh.n_vertices(), mesh.n_cells());
    for f in &data.point {
        if f.comps == 0 || f.values.len() != nv * f.comps {
            return Err(Error::DimensionMismatch(format!(
                "point field '{}' has {} values for {} vertices",
                f.name,
                f.values.len(),
                nv
            )));
        }
    }
    for f in &data.cell {
        if f.comps == 0 || f.values.len() != nc * f.comps {
            return Err(Error::DimensionMismatch(format!(
                "cell field '{}' has {} values for {} cells",
                f.name,
                f.values.len(),
                nc
            )));
        }
    }
    let nper = mesh.dim() + 1;
    let vtk_type = if mesh.dim() == 2 { 5 } else { 10 };
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\"?>\n");
    s.push_str("<VTKFile type=\"UnstructuredGrid\" version=\"1.0\" byte_order=\"LittleEndian\">\n");
    s.push_str("  <UnstructuredGrid>\n");
    let _ = writeln!(s, "    <Piece NumberOfPoints=\"{nv}\" NumberOfCells=\"{nc}\">");
    s.push_str("      <Points>\n");
    let coords: Vec<f64> = mesh.vertices().iter().flatten().copied().collect();
    data_array(&mut s, "coordinates", 3, &coords, nv);
    s.push_str("      </Points>\n      <Cells>\n");
    s.push_str("        <DataArray type=\"Int64\" Name=\"connectivity\" format=\"ascii\">\n");
    for cell in mesh.cells() {
        let ids: Vec<String> = cell.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "          {}", ids.join(" "));
    }
    s.push_str("        </DataArray>\n");
    s.push_str("        <DataArray type=\"Int64\" Name=\"offsets\" format=\"ascii\">\n");
    for c in 0..nc {
        let _ = writeln!(s, "          {}", (c + 1) * nper);
    }
    s.push_str("        </DataArray>\n");
    s.push_str("        <DataArray type=\"UInt8\" Name=\"types\" format=\"ascii\">\n");
    for _ in 0..nc {
        let _ = writeln!(s, "          {vtk_type}");
    }
    s.push_str("        </DataArray>\n      </Cells>\n");

    s.push_str("      <PointData>\n");
    for f in &data.point {
        data_array(&mut s, &f.name, f.comps, &f.values, nv);
    }
    s.push_str("      </PointData>\n      <CellData>\n");
    let labels: Vec<f64> = mesh.cell_labels().iter().map(|&l| l as f64).collect();
    data_array(&mut s, "subdomain", 1, &labels, nc);
    for f in &data.cell {
        data_array(&mut s, &f.name, f.comps, &f.values, nc);
    }
    s.push_str("      </CellData>\n    </Piece>\n  </UnstructuredGrid>\n</VTKFile>\n");

    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(s.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Writes one CSV row per record, with a header derived from the field names.
pub fn write_records<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    for r in records {
        w.serialize(r).map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
