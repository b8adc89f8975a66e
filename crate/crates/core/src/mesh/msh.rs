//! Gmsh MSH 4.1 ASCII reader and writer.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{Label, Mesh, MeshParts, Point};
use crate::error::{Error, Result};

struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, path: &'a Path) -> Self {
        Lines { path, inner: text.lines().enumerate().peekable(), last: 0 }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse { path: self.path.to_path_buf(), line, message: message.into() }
    }

    /// Next non-blank line, trimmed, with its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            let t = l.trim();
            if !t.is_empty() {
                self.last = i + 1;
                return Some((i + 1, t));
            }
        }
        None
    }

    fn expect_line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let last = self.last;
        self.next().ok_or_else(|| self.err(last, format!("unexpected end of file, expected {what}")))
    }

    fn tokens(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        let (n, l) = self.expect_line(what)?;
        Ok((n, l.split_whitespace().collect()))
    }

    fn expect_end(&mut self, section: &str) -> Result<()> {
        let (n, l) = self.expect_line(&format!("$End{section}"))?;
        if l != format!("$End{section}") {
            return Err(self.err(n, format!("expected $End{section}, found `{l}`")));
        }
        Ok(())
    }

    fn skip_section(&mut self, section: &str) -> Result<()> {
        let end = format!("$End{section}");
        loop {
            let (_, l) = self.expect_line(&end)?;
            if l == end {
                return Ok(());
            }
        }
    }
}

fn num<T: FromStr>(lines: &Lines, line: usize, tok: Option<&&str>, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| lines.err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| lines.err(line, format!("cannot parse {what} from `{tok}`")))
}

fn nodes_per_element(ty: usize) -> Option<(usize, usize)> {
    // (topological dimension, node count)
    match ty {
        15 => Some((0, 1)),
        1 => Some((1, 2)),
        2 => Some((2, 3)),
        4 => Some((3, 4)),
        _ => None,
    }
}

struct Block {
    dim: usize,
    entity: i64,
    line: usize,
    elements: Vec<usize>,
}

/// Reads a mesh file from disk.
pub fn load_msh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8_lossy(&bytes);
    parse_msh(&text, path)
}

/// Parses MSH 4.1 ASCII text; `path` is only used in error messages.
pub fn parse_msh(text: &str, path: &Path) -> Result<Mesh> {
    let mut lines = Lines::new(text, path);
    let mut names: HashMap<(usize, i64), String> = HashMap::new();
    let mut entity_physical: HashMap<(usize, i64), Option<i64>> = HashMap::new();
    let mut node_index: HashMap<usize, usize> = HashMap::new();
    let mut coords: Vec<Point> = Vec::new();
    let mut blocks: Vec<Block> = Vec::new();
    let mut saw_format = false;

    while let Some((n, header)) = lines.next() {
        let Some(section) = header.strip_prefix('$') else {
            return Err(lines.err(n, format!("expected a section header, found `{header}`")));
        };
        match section {
            "MeshFormat" => {
                let (n, t) = lines.tokens("format line")?;
                let version = t.first().copied().unwrap_or("");
                if version != "4.1" {
                    return Err(Error::UnsupportedVersion { path: PathBuf::from(path), version: version.to_string() });
                }
                let file_type: usize = num(&lines, n, t.get(1), "file type")?;
                if file_type != 0 {
                    return Err(Error::UnsupportedVersion {
                        path: PathBuf::from(path),
                        version: "4.1 (binary)".into(),
                    });
                }
                lines.expect_end("MeshFormat")?;
                saw_format = true;
            }
            "PhysicalNames" => {
                let (n, t) = lines.tokens("physical name count")?;
                let count: usize = num(&lines, n, t.first(), "physical name count")?;
                for _ in 0..count {
                    let (n, l) = lines.expect_line("physical name")?;
                    let mut parts = l.splitn(3, char::is_whitespace);
                    let toks: Vec<&str> = parts.by_ref().take(2).collect();
                    let dim: usize = num(&lines, n, toks.first(), "physical dimension")?;
                    let tag: i64 = num(&lines, n, toks.get(1), "physical tag")?;
                    let name = l
                        .splitn(3, char::is_whitespace)
                        .nth(2)
                        .map(|s| s.trim().trim_matches('"').to_string())
                        .ok_or_else(|| lines.err(n, "missing physical name"))?;
                    names.insert((dim, tag), name);
                }
                lines.expect_end("PhysicalNames")?;
            }
            "Entities" => {
                let (n, t) = lines.tokens("entity counts")?;
                let counts: Vec<usize> =
                    (0..4).map(|i| num(&lines, n, t.get(i), "entity count")).collect::<Result<_>>()?;
                for (dim, &count) in counts.iter().enumerate() {
                    for _ in 0..count {
                        let (n, t) = lines.tokens("entity")?;
                        let tag: i64 = num(&lines, n, t.first(), "entity tag")?;
                        // points carry one coordinate triple, others a bounding box
                        let at = if dim == 0 { 4 } else { 7 };
                        let np: usize = num(&lines, n, t.get(at), "physical tag count")?;
                        let phys = if np > 0 {
                            Some(num::<i64>(&lines, n, t.get(at + 1), "physical tag")?.abs())
                        } else {
                            None
                        };
                        entity_physical.insert((dim, tag), phys);
                    }
                }
                lines.expect_end("Entities")?;
            }
            "Nodes" => {
                let (n, t) = lines.tokens("node header")?;
                let nblocks: usize = num(&lines, n, t.first(), "node block count")?;
                for _ in 0..nblocks {
                    let (n, t) = lines.tokens("node block header")?;
                    let parametric: usize = num(&lines, n, t.get(2), "parametric flag")?;
                    let count: usize = num(&lines, n, t.get(3), "node count")?;
                    let mut tags = Vec::with_capacity(count);
                    for _ in 0..count {
                        let (n, t) = lines.tokens("node tag")?;
                        tags.push((n, num::<usize>(&lines, n, t.first(), "node tag")?));
                    }
                    for (tn, tag) in tags {
                        let (n, t) = lines.tokens("node coordinates")?;
                        if parametric == 0 && t.len() != 3 {
                            return Err(lines.err(n, "expected three coordinates"));
                        }
                        let mut p = [0.0; 3];
                        for (d, x) in p.iter_mut().enumerate() {
                            *x = num(&lines, n, t.get(d), "coordinate")?;
                        }
                        if node_index.insert(tag, coords.len()).is_some() {
                            return Err(lines.err(tn, format!("duplicate node tag {tag}")));
                        }
                        coords.push(p);
                    }
                }
                lines.expect_end("Nodes")?;
            }
            "Elements" => {
                let (n, t) = lines.tokens("element header")?;
                let nblocks: usize = num(&lines, n, t.first(), "element block count")?;
                for _ in 0..nblocks {
                    let (n, t) = lines.tokens("element block header")?;
                    let dim: usize = num(&lines, n, t.first(), "entity dimension")?;
                    let entity: i64 = num(&lines, n, t.get(1), "entity tag")?;
                    let ty: usize = num(&lines, n, t.get(2), "element type")?;
                    let count: usize = num(&lines, n, t.get(3), "element count")?;
                    let (edim, nn) =
                        nodes_per_element(ty).ok_or_else(|| lines.err(n, format!("unsupported element type {ty}")))?;
                    if edim != dim {
                        return Err(lines.err(n, format!("element type {ty} in a {dim}-dimensional entity")));
                    }
                    let mut block = Block { dim, entity, line: n, elements: Vec::with_capacity(count * nn) };
                    for _ in 0..count {
                        let (n, t) = lines.tokens("element")?;
                        if t.len() != nn + 1 {
                            return Err(lines.err(n, format!("expected {} node tags", nn)));
                        }
                        for tok in &t[1..] {
                            let tag: usize = num(&lines, n, Some(tok), "node tag")?;
                            let idx = *node_index
                                .get(&tag)
                                .ok_or_else(|| lines.err(n, format!("element references undefined node tag {tag}")))?;
                            block.elements.push(idx);
                        }
                    }
                    blocks.push(block);
                }
                lines.expect_end("Elements")?;
            }
            other => {
                log::warn!("{}: skipping unsupported section ${other}", path.display());
                lines.skip_section(other)?;
            }
        }
    }
    if !saw_format {
        return Err(lines.err(1, "missing $MeshFormat section"));
    }

    let dim = blocks.iter().map(|b| b.dim).max().unwrap_or(0);
    if dim < 2 {
        return Err(Error::InvalidMesh(format!("{}: no triangles or tetrahedra", path.display())));
    }
    let label_of = |b: &Block| -> Result<Option<Label>> {
        match entity_physical.get(&(b.dim, b.entity)) {
            Some(Some(p)) => Ok(Some(*p as Label)),
            Some(None) => Ok(None),
            None => Err(lines.err(b.line, format!("undeclared entity ({}, {})", b.dim, b.entity))),
        }
    };
    let mut cells = Vec::new();
    let mut cell_labels = Vec::new();
    let mut facets = Vec::new();
    let mut facet_labels = Vec::new();
    for b in &blocks {
        let label = label_of(b)?;
        if b.dim == dim {
            let l = label
                .ok_or_else(|| lines.err(b.line, format!("cells of entity {} have no physical group", b.entity)))?;
            cell_labels.extend(std::iter::repeat_n(l, b.elements.len() / (dim + 1)));
            cells.extend_from_slice(&b.elements);
        } else if b.dim + 1 == dim {
            match label {
                Some(l) => {
                    facet_labels.extend(std::iter::repeat_n(l, b.elements.len() / dim));
                    facets.extend_from_slice(&b.elements);
                }
                None => {
                    log::warn!("{}: ignoring facets of entity {} without a physical group", path.display(), b.entity)
                }
            }
        }
    }

    // keep only vertices referenced by cells or facets, in file order
    let mut used = vec![false; coords.len()];
    for &v in cells.iter().chain(&facets) {
        used[v] = true;
    }
    let mut remap = vec![usize::MAX; coords.len()];
    let mut vertices = Vec::new();
    for (i, p) in coords.iter().enumerate() {
        if used[i] {
            remap[i] = vertices.len();
            vertices.push(*p);
        }
    }
    for v in cells.iter_mut().chain(facets.iter_mut()) {
        *v = remap[*v];
    }
    if dim == 2 && vertices.iter().any(|p| p[2] != 0.0) {
        return Err(Error::InvalidMesh(format!(
            "{}: two-dimensional mesh must lie in the z = 0 plane",
            path.display()
        )));
    }

    let pick = |d: usize, used: &[Label]| -> BTreeMap<Label, String> {
        let mut out = BTreeMap::new();
        for &l in used {
            if let Some(name) = names.get(&(d, l as i64)) {
                out.insert(l, name.clone());
            }
        }
        out
    };
    let subdomain_names = pick(dim, &cell_labels);
    let boundary_names = pick(dim - 1, &facet_labels);
    Mesh::new(MeshParts { dim, vertices, cells, cell_labels, facets, facet_labels, subdomain_names, boundary_names })
}

/// Writes `mesh` as MSH 4.1 ASCII. Every label becomes one entity of the
/// same tag and one physical group.
pub fn write_msh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_msh_string(mesh)).map_err(|e| Error::io(path, e))
}

pub(crate) fn to_msh_string(mesh: &Mesh) -> String {
    let dim = mesh.dim();
    let mut s = String::new();
    s.push_str("$MeshFormat\n4.1 0 8\n$EndMeshFormat\n");

    let subs = mesh.subdomain_names();
    let bnds = mesh.boundary_names();
    let _ = writeln!(s, "$PhysicalNames\n{}", subs.len() + bnds.len());
    for (l, n) in bnds {
        let _ = writeln!(s, "{} {} \"{}\"", dim - 1, l, n);
    }
    for (l, n) in subs {
        let _ = writeln!(s, "{} {} \"{}\"", dim, l, n);
    }
    s.push_str("$EndPhysicalNames\n");

    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in mesh.vertices() {
        for d in 0..3 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let bbox = format!("{:e} {:e} {:e} {:e} {:e} {:e}", lo[0], lo[1], lo[2], hi[0], hi[1], hi[2]);
    let mut counts = [0usize; 4];
    counts[dim - 1] = bnds.len();
    counts[dim] = subs.len();
    let _ = writeln!(s, "$Entities\n{} {} {} {}", counts[0], counts[1], counts[2], counts[3]);
    for l in bnds.keys() {
        let _ = writeln!(s, "{l} {bbox} 1 {l} 0");
    }
    for l in subs.keys() {
        let _ = writeln!(s, "{l} {bbox} 1 {l} 0");
    }
    s.push_str("$EndEntities\n");

    let nv = mesh.n_vertices();
    let first_sub = *subs.keys().next().expect("mesh has at least one subdomain");
    let _ = writeln!(s, "$Nodes\n1 {nv} 1 {nv}\n{dim} {first_sub} 0 {nv}");
    for i in 1..=nv {
        let _ = writeln!(s, "{i}");
    }
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:e} {:e} {:e}", p[0], p[1], p[2]);
    }
    s.push_str("$EndNodes\n");

    // One block per run of equal labels keeps the element order intact.
    let runs = |labels: &[Label]| -> Vec<(Label, usize, usize)> {
        let mut out: Vec<(Label, usize, usize)> = Vec::new();
        for (i, &l) in labels.iter().enumerate() {
            match out.last_mut() {
                Some(r) if r.0 == l => r.2 = i + 1,
                _ => out.push((l, i, i + 1)),
            }
        }
        out
    };
    let cell_runs = runs(mesh.cell_labels());
    let facet_runs = runs(mesh.facet_labels());
    let total = mesh.n_cells() + mesh.n_facets();
    let _ = writeln!(s, "$Elements\n{} {total} 1 {total}", cell_runs.len() + facet_runs.len());
    let mut tag = 1;
    let (ftype, ctype) = if dim == 2 { (1, 2) } else { (2, 4) };
    for (l, a, b) in facet_runs {
        let _ = writeln!(s, "{} {l} {ftype} {}", dim - 1, b - a);
        for f in a..b {
            let _ = write!(s, "{tag}");
            for v in mesh.facet(f) {
                let _ = write!(s, " {}", v + 1);
            }
            s.push('\n');
            tag += 1;
        }
    }
    for (l, a, b) in cell_runs {
        let _ = writeln!(s, "{dim} {l} {ctype} {}", b - a);
        for c in a..b {
            let _ = write!(s, "{tag}");
            for v in mesh.cell(c) {
                let _ = write!(s, " {}", v + 1);
            }
            s.push('\n');
            tag += 1;
        }
    }
    s.push_str("$EndElements\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_box, generate_rect, BoxLabels, RectLabels};

    const SQUARE: &str = r#"$MeshFormat
4.1 0 8
$EndMeshFormat
$PhysicalNames
3
1 10 "outer wall"
2 1 "fluid"
2 2 "solid"
$EndPhysicalNames
$Entities
0 1 2 0
5 0 0 0 2 1 0 1 10 0
1 0 0 0 1 1 0 1 1 0
2 1 0 0 2 1 0 1 2 0
$EndEntities
$Comments
anything at all
$EndComments
$Nodes
1 7 1 7
2 1 0 7
1
2
3
4
5
6
7
0 0 0
1 0 0
2 0 0
0 1 0
1 1 0
2 1 0
9 9 0
$EndNodes
$Elements
3 7 1 7
1 5 1 1
1 1 4
2 1 2 2
2 1 2 5
3 1 5 4
2 2 2 2
4 2 3 6
5 2 6 5
$EndElements
"#;

    #[test]
    fn parses_small_file() {
        let mesh = parse_msh(SQUARE, Path::new("square.msh")).unwrap();
        assert_eq!(mesh.dim(), 2);
        // node 7 is unused and dropped
        assert_eq!(mesh.n_vertices(), 6);
        assert_eq!(mesh.n_cells(), 4);
        assert_eq!(mesh.subdomain_label("fluid").unwrap(), 1);
        assert_eq!(mesh.subdomain_label("solid").unwrap(), 2);
        assert_eq!(mesh.boundary_label("outer wall").unwrap(), 10);
        assert_eq!(mesh.n_facets(), 1);
        assert!((0..4).all(|c| mesh.cell_volume(c) > 0.0));
    }

    #[test]
    fn rejects_other_versions_and_binary() {
        let v2 = SQUARE.replace("4.1 0 8", "2.2 0 8");
        assert!(matches!(parse_msh(&v2, Path::new("a.msh")), Err(Error::UnsupportedVersion { .. })));
        let bin = SQUARE.replace("4.1 0 8", "4.1 1 8");
        assert!(matches!(parse_msh(&bin, Path::new("a.msh")), Err(Error::UnsupportedVersion { .. })));
    }

    #[test]
    fn undefined_node_tag_is_named() {
        let bad = SQUARE.replace("5 2 6 5", "5 2 6 42");
        match parse_msh(&bad, Path::new("a.msh")) {
            Err(Error::Parse { line, message, .. }) => {
                assert!(message.contains("42"), "{message}");
                assert_eq!(line, 46);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_file_reports_line() {
        let cut: String = SQUARE.lines().take(30).collect::<Vec<_>>().join("\n");
        assert!(matches!(parse_msh(&cut, Path::new("a.msh")), Err(Error::Parse { .. })));
    }

    #[test]
    fn roundtrip_2d_and_3d() {
        let rect = generate_rect(4, 3, [1.0, 0.5], &RectLabels::default()).unwrap();
        let back = parse_msh(&to_msh_string(&rect), Path::new("r.msh")).unwrap();
        assert_eq!(back, rect);
        let boxed = generate_box(2, 2, 1, [1.0, 1.0, 1.0], &BoxLabels::default()).unwrap();
        let back = parse_msh(&to_msh_string(&boxed), Path::new("b.msh")).unwrap();
        assert_eq!(back, boxed);
    }
}
