//! Quantities derived from a converged state: wall shear stress, region
//! statistics, pressure offsets and file exports.

mod export;
mod wss;

pub use export::{extend_to_parent, vertex_values, write_records, write_vtu, CellField, PointField, VtuData};
pub use wss::{wall_facets, wall_shear_stress, WssField, WssOptions};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{integrate, integrate_facets, FunctionSpace};

/// Pascal per millimetre of mercury.
pub const MMHG: f64 = 133.322387415;

/// Lubrication-theory slope of the peak speed in a heated vertical slot.
pub const SLOT_VELOCITY_PER_K: f64 = 1.98e-4;

/// Slope of the matching wall shear stress estimate. The printed reference
/// value is 13.6e-4 Pa at a 2.03 K difference.
pub const SLOT_WSS_PER_K: f64 = 13.6e-4 / 2.03;

/// Linear estimates of peak speed [m/s] and wall shear stress [Pa] for an
/// anterior chamber driven by a temperature difference `delta_t`.
pub fn slot_flow_estimate(delta_t: f64) -> Result<(f64, f64)> {
    if !(delta_t >= 0.0) || !delta_t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "temperature difference {delta_t} must be a finite nonnegative number"
        )));
    }
    Ok((SLOT_VELOCITY_PER_K * delta_t, SLOT_WSS_PER_K * delta_t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PressureTarget {
    Pascal(f64),
    MmHg(f64),
}

impl PressureTarget {
    pub fn pascal(self) -> f64 {
        match self {
            PressureTarget::Pascal(p) => p,
            PressureTarget::MmHg(p) => p * MMHG,
        }
    }
}

/// Shifts a scalar field so that its mean over the whole mesh equals the target.
pub fn normalize_pressure(space: &FunctionSpace, p: &[f64], target: PressureTarget) -> Result<Vec<f64>> {
    check_len(space, p)?;
    let mesh = space.mesh();
    let order = space.degree().max(1);
    let vol = integrate(mesh, None, 0, |_, _, _, _| 1.0)?;
    let total = integrate(mesh, None, order, |c, _, l, _| space.eval(p, c, l)[0])?;
    let shift = target.pascal() - total / vol;
    Ok(p.iter().map(|v| v + shift).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    All,
    Subdomain(String),
    Boundary(String),
}

impl Region {
    pub fn name(&self) -> &str {
        match self {
            Region::All => "all",
            Region::Subdomain(s) | Region::Boundary(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionStats {
    pub region: String,
    pub field: String,
    pub unit: String,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

/// Extremes over the degrees of freedom in `region` and the integral mean.
/// Vector fields are reduced to their Euclidean magnitude first.
pub fn field_statistics(
    space: &FunctionSpace,
    coef: &[f64],
    region: &Region,
    field: &str,
    unit: &str,
) -> Result<RegionStats> {
    check_len(space, coef)?;
    let mesh = space.mesh();
    let nn = space.n_nodes();
    let nc = space.n_comp();
    let node_value = |n: usize| -> f64 {
        if nc == 1 {
            coef[n]
        } else {
            (0..nc).map(|c| coef[c * nn + n].powi(2)).sum::<f64>().sqrt()
        }
    };
    let point_value = |cell: usize, l: &[f64]| -> f64 {
        let v = space.eval(coef, cell, l);
        if nc == 1 {
            v[0]
        } else {
            v.iter().map(|x| x * x).sum::<f64>().sqrt()
        }
    };
    // Exact for scalar polynomials, and accurate for magnitudes.
    let order = if nc == 1 { space.degree().max(1) } else { 2 * space.degree() + 2 };
    let empty = || Error::InvalidArgument(format!("region '{}' contains no entities", region.name()));

    let (nodes, integral, measure): (Vec<usize>, f64, f64) = match region {
        Region::All => {
            let a = integrate(mesh, None, order, |c, _, l, _| point_value(c, l))?;
            let m = integrate(mesh, None, 0, |_, _, _, _| 1.0)?;
            ((0..nn).collect(), a, m)
        }
        Region::Subdomain(name) => {
            let label = mesh.subdomain_label(name)?;
            let cells: Vec<usize> = (0..mesh.n_cells()).filter(|&c| mesh.cell_label(c) == label).collect();
            if cells.is_empty() {
                return Err(empty());
            }
            let mut nodes: Vec<usize> = cells.iter().flat_map(|&c| space.cell_nodes(c).iter().copied()).collect();
            nodes.sort_unstable();
            nodes.dedup();
            let a = integrate(mesh, Some(&cells), order, |c, _, l, _| point_value(c, l))?;
            let m = integrate(mesh, Some(&cells), 0, |_, _, _, _| 1.0)?;
            (nodes, a, m)
        }
        Region::Boundary(name) => {
            let label = mesh.boundary_label(name)?;
            let facets = mesh.facets_with_label(label);
            if facets.is_empty() {
                return Err(empty());
            }
            let nodes = space.label_nodes(&[name.as_str()])?;
            let a = integrate_facets(mesh, &facets, order, |c, l, _, _| point_value(c, l))?;
            let m: f64 = facets.iter().map(|&f| mesh.facet_measure(f)).sum();
            (nodes, a, m)
        }
    };
    if nodes.is_empty() || measure <= 0.0 {
        return Err(empty());
    }
    let (min, max) = nodes
        .iter()
        .map(|&n| node_value(n))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Ok(RegionStats {
        region: region.name().to_string(),
        field: field.to_string(),
        unit: unit.to_string(),
        min,
        mean: integral / measure,
        max,
    })
}

fn check_len(space: &FunctionSpace, coef: &[f64]) -> Result<()> {
    if coef.len() != space.n_dofs() {
        return Err(Error::DimensionMismatch(format!(
            "field has {} values, the space has {} degrees of freedom",
            coef.len(),
            space.n_dofs()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests;
