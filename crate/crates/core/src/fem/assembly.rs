//! Cell and facet assembly driven by per-quadrature-point kernels.
//!
//! Integration runs over the cells of an integration mesh. A space may live
//! on that mesh or on a parent mesh from which the integration mesh was
//! extracted; in the latter case a cell map (the submesh's parent cell map)
//! translates integration cells to the space's cells. Extraction preserves
//! the local vertex order, so both cells share one reference map.

use super::basis::{self, CellGeometry};
use super::quadrature::{simplex_rule, QuadratureRule};
use super::space::FunctionSpace;
use crate::error::{Error, Result};
use crate::krylov::{CsrMatrix, Triplets};
use crate::mesh::{Mesh, Point};

/// Scalar shape functions of one space at one point.
pub struct Shapes<'a> {
    pub values: &'a [f64],
    pub grads: &'a [Point],
    /// Global node indices of the cell's local functions.
    pub nodes: &'a [usize],
    /// Cell of the space's own mesh.
    pub cell: usize,
}

pub struct PointData<'a> {
    pub x: Point,
    /// Quadrature weight times the Jacobian.
    pub jxw: f64,
    pub lambda: &'a [f64],
    pub geometry: &'a CellGeometry,
    /// Cell of the integration mesh.
    pub cell: usize,
    /// Outward unit normal on facet integrals, zero otherwise.
    pub normal: Point,
    pub trial: Shapes<'a>,
    pub test: Shapes<'a>,
}

/// Integrand of a bilinear form. `local` is row-major with test rows and
/// trial columns, each indexed as `component * n_local + function`.
pub trait BilinearKernel: Sync {
    /// Polynomial degree of the integrand on affine cells.
    fn degree(&self) -> usize;
    fn eval(&self, p: &PointData, local: &mut [f64]);
}

/// Integrand of a linear form; `local` is indexed like the test rows above.
pub trait LinearKernel: Sync {
    fn degree(&self) -> usize;
    fn eval(&self, p: &PointData, local: &mut [f64]);
}

/// Wraps a closure as a kernel of the given degree.
pub struct FnKernel<F> {
    pub degree: usize,
    pub f: F,
}

impl<F: Fn(&PointData, &mut [f64]) + Sync> BilinearKernel for FnKernel<F> {
    fn degree(&self) -> usize {
        self.degree
    }
    fn eval(&self, p: &PointData, local: &mut [f64]) {
        (self.f)(p, local)
    }
}

impl<F: Fn(&PointData, &mut [f64]) + Sync> LinearKernel for FnKernel<F> {
    fn degree(&self) -> usize {
        self.degree
    }
    fn eval(&self, p: &PointData, local: &mut [f64]) {
        (self.f)(p, local)
    }
}

/// A space together with the map from integration cells to its own cells.
#[derive(Clone, Copy)]
pub struct SpaceOn<'a> {
    pub space: &'a FunctionSpace,
    pub cell_map: Option<&'a [usize]>,
}

impl<'a> SpaceOn<'a> {
    pub fn direct(space: &'a FunctionSpace) -> Self {
        SpaceOn { space, cell_map: None }
    }

    pub fn mapped(space: &'a FunctionSpace, cell_map: &'a [usize]) -> Self {
        SpaceOn { space, cell_map: Some(cell_map) }
    }

    pub fn cell(&self, c: usize) -> usize {
        self.cell_map.map_or(c, |m| m[c])
    }
}

/// Precomputed shape data on a quadrature rule.
struct Table {
    n: usize,
    values: Vec<f64>,
    dlambda: Vec<f64>,
}

impl Table {
    fn new(dim: usize, degree: usize, lambdas: &[Vec<f64>]) -> Self {
        let n = basis::n_local(dim, degree);
        let nv = dim + 1;
        let mut values = vec![0.0; lambdas.len() * n];
        let mut dlambda = vec![0.0; lambdas.len() * n * nv];
        for (q, l) in lambdas.iter().enumerate() {
            basis::shape_values(dim, degree, l, &mut values[q * n..(q + 1) * n]);
            basis::shape_dlambda(dim, degree, l, &mut dlambda[q * n * nv..(q + 1) * n * nv]);
        }
        Table { n, values, dlambda }
    }
}

fn check_order(rule_order: usize, degree: usize) -> Result<()> {
    if rule_order < degree {
        return Err(Error::UnderIntegrated { order: rule_order, degree });
    }
    Ok(())
}

/// One integration point in cell coordinates.
struct Site {
    lambda: Vec<f64>,
    weight: f64,
    normal: Point,
}

/// Runs `visit` for each selected item in parallel chunks and concatenates
/// the per-chunk outputs in item order.
fn collect_ordered<T: Send>(items: &[usize], visit: impl Fn(&[usize]) -> Result<Vec<T>> + Sync) -> Result<Vec<T>> {
    const CHUNK: usize = 256;
    #[cfg(feature = "parallel")]
    let parts: Vec<Result<Vec<T>>> = {
        use rayon::prelude::*;
        items.par_chunks(CHUNK).map(&visit).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Result<Vec<T>>> = items.chunks(CHUNK).map(&visit).collect();
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

struct Ctx<'a> {
    mesh: &'a Mesh,
    trial: SpaceOn<'a>,
    test: SpaceOn<'a>,
}

impl Ctx<'_> {
    fn check(&self) -> Result<()> {
        for s in [self.trial, self.test] {
            let dim = s.space.mesh().dim();
            if dim != self.mesh.dim() {
                return Err(Error::DimensionMismatch("space and mesh dimensions differ".into()));
            }
            if s.cell_map.is_none() && s.space.mesh().n_cells() != self.mesh.n_cells() {
                return Err(Error::DimensionMismatch("space lives on another mesh but no cell map was given".into()));
            }
        }
        Ok(())
    }

    /// Evaluates `kernel` over the sites of one cell into `local`.
    #[allow(clippy::too_many_arguments)]
    fn cell_local(
        &self,
        c: usize,
        sites: &[Site],
        tt: &Table,
        st: &Table,
        geom: &CellGeometry,
        local: &mut [f64],
        bufs: &mut (Vec<Point>, Vec<Point>),
        kernel: &dyn Fn(&PointData, &mut [f64]),
        tables_per_site: bool,
        site_offset: usize,
    ) {
        let nv = self.mesh.dim() + 1;
        let (tc, sc) = (self.trial.cell(c), self.test.cell(c));
        let tnodes = self.trial.space.cell_nodes(tc);
        let snodes = self.test.space.cell_nodes(sc);
        for (qi, site) in sites.iter().enumerate() {
            let q = if tables_per_site { site_offset + qi } else { qi };
            let tv = &tt.values[q * tt.n..(q + 1) * tt.n];
            let sv = &st.values[q * st.n..(q + 1) * st.n];
            geom.gradients(tt.n, &tt.dlambda[q * tt.n * nv..(q + 1) * tt.n * nv], &mut bufs.0);
            geom.gradients(st.n, &st.dlambda[q * st.n * nv..(q + 1) * st.n * nv], &mut bufs.1);
            let pd = PointData {
                x: geom.point(&site.lambda),
                jxw: site.weight,
                lambda: &site.lambda,
                geometry: geom,
                cell: c,
                normal: site.normal,
                trial: Shapes { values: tv, grads: &bufs.0, nodes: tnodes, cell: tc },
                test: Shapes { values: sv, grads: &bufs.1, nodes: snodes, cell: sc },
            };
            kernel(&pd, local);
        }
    }
}

fn cell_sites(rule: &QuadratureRule, det: f64) -> Vec<Site> {
    (0..rule.len())
        .map(|q| Site { lambda: rule.lambda(q).to_vec(), weight: rule.weights[q] * det, normal: [0.0; 3] })
        .collect()
}

fn rule_lambdas(rule: &QuadratureRule) -> Vec<Vec<f64>> {
    (0..rule.len()).map(|q| rule.lambda(q).to_vec()).collect()
}

fn scatter_matrix(
    trips: &mut Vec<(usize, usize, f64)>,
    local: &[f64],
    trial: &FunctionSpace,
    test: &FunctionSpace,
    tnodes: &[usize],
    snodes: &[usize],
) {
    let ncols = tnodes.len() * trial.n_comp();
    for sc in 0..test.n_comp() {
        for (i, &si) in snodes.iter().enumerate() {
            let row = test.dof(sc, si);
            let lr = (sc * snodes.len() + i) * ncols;
            for tc in 0..trial.n_comp() {
                for (j, &tj) in tnodes.iter().enumerate() {
                    let v = local[lr + tc * tnodes.len() + j];
                    if v != 0.0 {
                        trips.push((row, trial.dof(tc, tj), v));
                    }
                }
            }
        }
    }
}

fn to_matrix(nrows: usize, ncols: usize, trips: Vec<(usize, usize, f64)>) -> CsrMatrix {
    let mut t = Triplets::new(nrows, ncols);
    t.rows.reserve(trips.len());
    t.cols.reserve(trips.len());
    t.vals.reserve(trips.len());
    for (r, c, v) in trips {
        t.push(r, c, v);
    }
    t.to_csr()
}

/// Assembles `sum_cells int kernel` over the listed integration cells
/// (all cells when `cells` is `None`).
pub fn assemble_matrix(
    mesh: &Mesh,
    cells: Option<&[usize]>,
    trial: SpaceOn,
    test: SpaceOn,
    order: usize,
    kernel: &dyn BilinearKernel,
) -> Result<CsrMatrix> {
    let ctx = Ctx { mesh, trial, test };
    ctx.check()?;
    let rule = simplex_rule(mesh.dim(), order)?;
    check_order(rule.order, kernel.degree())?;
    let lambdas = rule_lambdas(&rule);
    let tt = Table::new(mesh.dim(), trial.space.degree(), &lambdas);
    let st = Table::new(mesh.dim(), test.space.degree(), &lambdas);
    let all: Vec<usize>;
    let cells = match cells {
        Some(c) => c,
        None => {
            all = (0..mesh.n_cells()).collect();
            &all
        }
    };
    let nloc = tt.n * trial.space.n_comp() * st.n * test.space.n_comp();
    let f = |p: &PointData, l: &mut [f64]| kernel.eval(p, l);
    let trips = collect_ordered(cells, |chunk| {
        let mut out = Vec::new();
        let mut local = vec![0.0; nloc];
        let mut bufs = (vec![[0.0; 3]; tt.n], vec![[0.0; 3]; st.n]);
        for &c in chunk {
            let geom = CellGeometry::new(mesh, c)?;
            let sites = cell_sites(&rule, geom.det);
            local.fill(0.0);
            ctx.cell_local(c, &sites, &tt, &st, &geom, &mut local, &mut bufs, &f, false, 0);
            scatter_matrix(
                &mut out,
                &local,
                trial.space,
                test.space,
                trial.space.cell_nodes(trial.cell(c)),
                test.space.cell_nodes(test.cell(c)),
            );
        }
        Ok(out)
    })?;
    Ok(to_matrix(test.space.n_dofs(), trial.space.n_dofs(), trips))
}

/// Assembles a load vector over the listed integration cells.
pub fn assemble_vector(
    mesh: &Mesh,
    cells: Option<&[usize]>,
    test: SpaceOn,
    order: usize,
    kernel: &dyn LinearKernel,
) -> Result<Vec<f64>> {
    let ctx = Ctx { mesh, trial: test, test };
    ctx.check()?;
    let rule = simplex_rule(mesh.dim(), order)?;
    check_order(rule.order, kernel.degree())?;
    let lambdas = rule_lambdas(&rule);
    let st = Table::new(mesh.dim(), test.space.degree(), &lambdas);
    let all: Vec<usize>;
    let cells = match cells {
        Some(c) => c,
        None => {
            all = (0..mesh.n_cells()).collect();
            &all
        }
    };
    let nloc = st.n * test.space.n_comp();
    let f = |p: &PointData, l: &mut [f64]| kernel.eval(p, l);
    let entries = collect_ordered(cells, |chunk| {
        let mut out = Vec::new();
        let mut local = vec![0.0; nloc];
        let mut bufs = (vec![[0.0; 3]; st.n], vec![[0.0; 3]; st.n]);
        for &c in chunk {
            let geom = CellGeometry::new(mesh, c)?;
            let sites = cell_sites(&rule, geom.det);
            local.fill(0.0);
            ctx.cell_local(c, &sites, &st, &st, &geom, &mut local, &mut bufs, &f, false, 0);
            push_vector(&mut out, &local, test.space, test.space.cell_nodes(test.cell(c)));
        }
        Ok(out)
    })?;
    let mut v = vec![0.0; test.space.n_dofs()];
    for (i, x) in entries {
        v[i] += x;
    }
    Ok(v)
}

fn push_vector(out: &mut Vec<(usize, f64)>, local: &[f64], space: &FunctionSpace, nodes: &[usize]) {
    for c in 0..space.n_comp() {
        for (i, &n) in nodes.iter().enumerate() {
            let v = local[c * nodes.len() + i];
            if v != 0.0 {
                out.push((space.dof(c, n), v));
            }
        }
    }
}

/// Integration sites of a facet of `mesh`, expressed in its first
/// adjacent cell.
fn facet_sites(mesh: &Mesh, f: usize, rule: &QuadratureRule) -> (usize, Vec<Site>) {
    let dim = mesh.dim();
    let cell = mesh.facet_cells(f).0;
    let cv = mesh.cell(cell);
    let fv = mesh.facet(f);
    let pos: Vec<usize> = fv.iter().map(|v| cv.iter().position(|w| w == v).expect("facet of cell")).collect();
    let scale = mesh.facet_measure(f) / rule.reference_measure();
    let normal = mesh.facet_normal_from(f, cell);
    let sites = (0..rule.len())
        .map(|q| {
            let fl = rule.lambda(q);
            let mut lambda = vec![0.0; dim + 1];
            for (k, &p) in pos.iter().enumerate() {
                lambda[p] = fl[k];
            }
            Site { lambda, weight: rule.weights[q] * scale, normal }
        })
        .collect();
    (cell, sites)
}

fn facet_tables(
    mesh: &Mesh,
    facets: &[usize],
    rule: &QuadratureRule,
    degrees: [usize; 2],
) -> (Vec<(usize, Vec<Site>)>, Table, Table) {
    let sites: Vec<(usize, Vec<Site>)> = facets.iter().map(|&f| facet_sites(mesh, f, rule)).collect();
    let lambdas: Vec<Vec<f64>> = sites.iter().flat_map(|(_, s)| s.iter().map(|x| x.lambda.clone())).collect();
    (sites, Table::new(mesh.dim(), degrees[0], &lambdas), Table::new(mesh.dim(), degrees[1], &lambdas))
}

/// Boundary integral of a bilinear kernel over the listed facets of the
/// space's own mesh.
pub fn assemble_facet_matrix(
    space: &FunctionSpace,
    facets: &[usize],
    order: usize,
    kernel: &dyn BilinearKernel,
) -> Result<CsrMatrix> {
    let mesh = space.mesh().as_ref();
    let rule = simplex_rule(mesh.dim() - 1, order)?;
    check_order(rule.order, kernel.degree())?;
    let on = SpaceOn::direct(space);
    let ctx = Ctx { mesh, trial: on, test: on };
    let (sites, tt, st) = facet_tables(mesh, facets, &rule, [space.degree(); 2]);
    let n = tt.n * space.n_comp();
    let mut local = vec![0.0; n * n];
    let mut bufs = (vec![[0.0; 3]; tt.n], vec![[0.0; 3]; st.n]);
    let mut trips = Vec::new();
    let f = |p: &PointData, l: &mut [f64]| kernel.eval(p, l);
    let mut offset = 0;
    for (cell, s) in &sites {
        let geom = CellGeometry::new(mesh, *cell)?;
        local.fill(0.0);
        ctx.cell_local(*cell, s, &tt, &st, &geom, &mut local, &mut bufs, &f, true, offset);
        offset += s.len();
        let nodes = space.cell_nodes(*cell);
        scatter_matrix(&mut trips, &local, space, space, nodes, nodes);
    }
    Ok(to_matrix(space.n_dofs(), space.n_dofs(), trips))
}

/// Boundary integral of a linear kernel over the listed facets.
pub fn assemble_facet_vector(
    space: &FunctionSpace,
    facets: &[usize],
    order: usize,
    kernel: &dyn LinearKernel,
) -> Result<Vec<f64>> {
    let mesh = space.mesh().as_ref();
    let rule = simplex_rule(mesh.dim() - 1, order)?;
    check_order(rule.order, kernel.degree())?;
    let on = SpaceOn::direct(space);
    let ctx = Ctx { mesh, trial: on, test: on };
    let (sites, tt, st) = facet_tables(mesh, facets, &rule, [space.degree(); 2]);
    let mut local = vec![0.0; st.n * space.n_comp()];
    let mut bufs = (vec![[0.0; 3]; tt.n], vec![[0.0; 3]; st.n]);
    let mut v = vec![0.0; space.n_dofs()];
    let f = |p: &PointData, l: &mut [f64]| kernel.eval(p, l);
    let mut offset = 0;
    let mut entries = Vec::new();
    for (cell, s) in &sites {
        let geom = CellGeometry::new(mesh, *cell)?;
        local.fill(0.0);
        ctx.cell_local(*cell, s, &tt, &st, &geom, &mut local, &mut bufs, &f, true, offset);
        offset += s.len();
        entries.clear();
        push_vector(&mut entries, &local, space, space.cell_nodes(*cell));
        for &(i, x) in &entries {
            v[i] += x;
        }
    }
    Ok(v)
}

/// Integrates a scalar function over the listed cells (all by default).
pub fn integrate(
    mesh: &Mesh,
    cells: Option<&[usize]>,
    order: usize,
    f: impl Fn(usize, &CellGeometry, &[f64], &Point) -> f64,
) -> Result<f64> {
    let rule = simplex_rule(mesh.dim(), order)?;
    let mut total = 0.0;
    let mut visit = |c: usize| -> Result<()> {
        let g = CellGeometry::new(mesh, c)?;
        for q in 0..rule.len() {
            let l = rule.lambda(q);
            total += rule.weights[q] * g.det * f(c, &g, l, &g.point(l));
        }
        Ok(())
    };
    match cells {
        Some(cs) => cs.iter().try_for_each(|&c| visit(c))?,
        None => (0..mesh.n_cells()).try_for_each(&mut visit)?,
    }
    Ok(total)
}

/// Integrates a scalar function over the listed facets.
pub fn integrate_facets(
    mesh: &Mesh,
    facets: &[usize],
    order: usize,
    f: impl Fn(usize, &[f64], &Point, &Point) -> f64,
) -> Result<f64> {
    let rule = simplex_rule(mesh.dim() - 1, order)?;
    let mut total = 0.0;
    for &fc in facets {
        let (cell, sites) = facet_sites(mesh, fc, &rule);
        let g = CellGeometry::new(mesh, cell)?;
        for s in sites {
            total += s.weight * f(cell, &s.lambda, &g.point(&s.lambda), &s.normal);
        }
    }
    Ok(total)
}

/// Scalar mass matrix `int phi_j phi_i` on the given space.
pub fn mass_matrix(space: &FunctionSpace) -> Result<CsrMatrix> {
    let n = space.n_local();
    let comps = space.n_comp();
    let k = FnKernel {
        degree: 2 * space.degree(),
        f: move |p: &PointData, l: &mut [f64]| {
            for c in 0..comps {
                for i in 0..n {
                    for j in 0..n {
                        l[(c * n + i) * comps * n + c * n + j] += p.jxw * p.test.values[i] * p.trial.values[j];
                    }
                }
            }
        },
    };
    let on = SpaceOn::direct(space);
    assemble_matrix(space.mesh(), None, on, on, 2 * space.degree(), &k)
}

/// Scalar stiffness matrix `int grad phi_j . grad phi_i`.
pub fn stiffness_matrix(space: &FunctionSpace) -> Result<CsrMatrix> {
    let n = space.n_local();
    let comps = space.n_comp();
    let k = FnKernel {
        degree: 2 * (space.degree() - 1),
        f: move |p: &PointData, l: &mut [f64]| {
            for c in 0..comps {
                for i in 0..n {
                    for j in 0..n {
                        let g = crate::mesh::dot(&p.test.grads[i], &p.trial.grads[j]);
                        l[(c * n + i) * comps * n + c * n + j] += p.jxw * g;
                    }
                }
            }
        },
    };
    let on = SpaceOn::direct(space);
    assemble_matrix(space.mesh(), None, on, on, 2 * (space.degree() - 1), &k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{extract_subdomain, generate_box, generate_mapped_grid, generate_rect};
    use crate::mesh::{BoxLabels, RectLabels};
    use std::sync::Arc;

    #[test]
    fn mass_sums_to_area() {
        let mesh = Arc::new(generate_rect(3, 5, [2.0, 1.5], &RectLabels::default()).unwrap());
        for degree in [1, 2] {
            let s = FunctionSpace::new(mesh.clone(), degree, 1).unwrap();
            let m = mass_matrix(&s).unwrap();
            let total: f64 = m.data.iter().sum();
            assert!((total - 3.0).abs() < 1e-13);
            let k = stiffness_matrix(&s).unwrap();
            let ones = vec![1.0; s.n_dofs()];
            assert!(k.mul_vec(&ones).iter().all(|v| v.abs() < 1e-12));
        }
        let vec_space = FunctionSpace::new(mesh.clone(), 2, 2).unwrap();
        let m = mass_matrix(&vec_space).unwrap();
        assert!((m.data.iter().sum::<f64>() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn stiffness_energy_of_quadratic() {
        // int |grad(x^2 + y z)|^2 over the unit cube = 4/3 + 1/3 + 1/3
        let mesh = Arc::new(generate_box(2, 2, 2, [1.0; 3], &BoxLabels::default()).unwrap());
        let s = FunctionSpace::new(mesh, 2, 1).unwrap();
        let u = s.interpolate(|x, o| o[0] = x[0] * x[0] + x[1] * x[2]);
        let k = stiffness_matrix(&s).unwrap();
        let e = crate::krylov::dot(&u, &k.mul_vec(&u));
        assert!((e - 2.0).abs() < 1e-12);
    }

    #[test]
    fn under_integration_is_rejected() {
        let mesh = Arc::new(generate_rect(1, 1, [1.0, 1.0], &RectLabels::default()).unwrap());
        let s = FunctionSpace::new(mesh.clone(), 2, 1).unwrap();
        let k = FnKernel { degree: 4, f: |_: &PointData, _: &mut [f64]| {} };
        let on = SpaceOn::direct(&s);
        let r = assemble_matrix(&mesh, None, on, on, 2, &k);
        assert!(matches!(r, Err(Error::UnderIntegrated { order: 2, degree: 4 })));
    }

    #[test]
    fn facet_integrals_measure_boundary() {
        let mesh = Arc::new(generate_rect(4, 2, [2.0, 1.0], &RectLabels::default()).unwrap());
        let top = mesh.facets_with_label(mesh.boundary_label("top").unwrap());
        let s = FunctionSpace::new(mesh.clone(), 1, 1).unwrap();
        let k = FnKernel {
            degree: 2,
            f: |p: &PointData, l: &mut [f64]| {
                let n = p.test.values.len();
                for i in 0..n {
                    for j in 0..n {
                        l[i * n + j] += p.jxw * p.test.values[i] * p.trial.values[j];
                    }
                }
            },
        };
        let m = assemble_facet_matrix(&s, &top, 2, &k).unwrap();
        assert!((m.data.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let flux = integrate_facets(&mesh, &top, 2, |_, _, x, n| x[0] * n[1]).unwrap();
        assert!((flux - 2.0).abs() < 1e-14);
        let lin = FnKernel {
            degree: 1,
            f: |p: &PointData, l: &mut [f64]| {
                for (i, v) in p.test.values.iter().enumerate() {
                    l[i] += p.jxw * v;
                }
            },
        };
        let v = assemble_facet_vector(&s, &top, 1, &lin).unwrap();
        assert!((v.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn cross_mesh_assembly_matches_restriction() {
        let xs: Vec<f64> = (0..=4).map(|i| i as f64 / 4.0).collect();
        let parent = Arc::new(
            generate_mapped_grid(
                &xs,
                &xs,
                |x, y| [x, y, 0.0],
                |i, _| if i < 2 { "a" } else { "b" },
                &RectLabels::default(),
            )
            .unwrap(),
        );
        let sub = extract_subdomain(&parent, &["a"]).unwrap();
        let full = FunctionSpace::new(parent.clone(), 1, 1).unwrap();
        let local = FunctionSpace::new(sub.mesh.clone(), 2, 1).unwrap();
        let k = FnKernel {
            degree: 3,
            f: |p: &PointData, l: &mut [f64]| {
                let nt = p.trial.values.len();
                for i in 0..p.test.values.len() {
                    for j in 0..nt {
                        l[i * nt + j] += p.jxw * p.test.values[i] * p.trial.values[j];
                    }
                }
            },
        };
        let m = assemble_matrix(
            &sub.mesh,
            None,
            SpaceOn::mapped(&full, &sub.parent_cell_map),
            SpaceOn::direct(&local),
            3,
            &k,
        )
        .unwrap();
        // int_a x * 1 = 1/8 with both fields interpolated exactly
        let t = full.interpolate(|x, o| o[0] = x[0]);
        let one = vec![1.0; local.n_dofs()];
        let got = crate::krylov::dot(&one, &m.mul_vec(&t));
        assert!((got - 0.125).abs() < 1e-14);
    }

    #[test]
    fn integrate_polynomial() {
        let mesh = generate_rect(3, 3, [1.0, 1.0], &RectLabels::default()).unwrap();
        let v = integrate(&mesh, None, 4, |_, _, _, x| x[0].powi(2) * x[1].powi(2)).unwrap();
        assert!((v - 1.0 / 9.0).abs() < 1e-14);
    }
}
