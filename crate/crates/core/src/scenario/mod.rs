//! Problem instances: the eye slice analogue, benchmark cavities and
//! manufactured solutions, plus their serializable descriptions.

mod mms;
pub mod study;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use mms::{ExactSolution, MmsKind};

use crate::error::{Error, Result};
use crate::fem::{integrate, CellGeometry};
use crate::forms::{Flow, PhysicalParams, Problem, ProblemSetup, State, Variant};
use crate::mesh::{generate_mapped_grid, generate_rect, load_msh, Mesh, Point, RectLabels};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Posture {
    #[default]
    Standing,
    /// Lying on the back; gravity points from the cornea to the retina.
    Supine,
    /// Lying face down.
    Prone,
}

impl Posture {
    pub const ALL: [Posture; 3] = [Posture::Standing, Posture::Supine, Posture::Prone];

    /// Unit gravity direction. The first axis runs along the optical axis
    /// towards the back of the eye, the second points up when standing.
    pub fn gravity_dir(self) -> [f64; 3] {
        match self {
            Posture::Standing => [0.0, -1.0, 0.0],
            Posture::Supine => [1.0, 0.0, 0.0],
            Posture::Prone => [-1.0, 0.0, 0.0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Posture::Standing => "standing",
            Posture::Supine => "supine",
            Posture::Prone => "prone",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Posture::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown posture `{s}` (expected standing, supine or prone)")))
    }
}

/// Geometry of the two-dimensional eye cut.
pub mod eye {
    /// Radii of the layer interfaces, from the back of the slice to the
    /// corneal surface [m].
    pub const RADII: [f64; 5] = [4.0e-3, 6.5e-3, 9.4e-3, 11.4e-3, 12.0e-3];
    /// Half opening angle of the slice around the optical axis [rad].
    pub const HALF_ANGLE: f64 = 0.6;
    /// Fraction of the half angle inside which the chamber and lens lie;
    /// outside it the iris closes the chamber laterally.
    pub const PUPIL_FRACTION: f64 = 0.75;
    /// Radial divisions per layer at refinement 1.
    pub const RADIAL_DIVISIONS: [usize; 4] = [3, 3, 6, 2];
    /// Angular divisions of the lateral bands and the central band.
    pub const ANGULAR_DIVISIONS: [usize; 2] = [3, 12];
    pub const FLUID: &str = "aqueousHumor";
    pub const AMBIENT: &str = "anterior";
    pub const BODY: [&str; 3] = ["posterior", "lateral_lower", "lateral_upper"];
}

/// How the mesh of a scenario is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    /// Layered two-dimensional cut through the front of the eye.
    EyeSlice {
        #[serde(default = "one")]
        refine: usize,
    },
    /// Rectangle with a hot left wall and a cold right wall.
    Cavity { n: usize, width: f64, height: f64, delta_t: f64 },
    /// Unit-speed lid on top of a square, no heating.
    LidDriven {
        n: usize,
        #[serde(default = "one_f")]
        lid_velocity: f64,
    },
    /// Unit square with manufactured sources.
    Mms {
        n: usize,
        #[serde(default)]
        solution: MmsKind,
    },
}

fn one() -> usize {
    1
}
fn one_f() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSpec {
    pub path: Option<PathBuf>,
    pub generator: Option<Generator>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Boundaries {
    pub gamma_amb: Vec<String>,
    pub gamma_body: Vec<String>,
    /// Wall groups reported in shear stress statistics; all when empty.
    pub walls: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fluid {
    pub labels: Vec<String>,
}

/// A complete, serializable problem description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub mesh: MeshSpec,
    /// Overrides `params.gravity_dir` when present.
    #[serde(default)]
    pub posture: Option<Posture>,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default)]
    pub params: PhysicalParams,
    #[serde(default)]
    pub boundaries: Boundaries,
    #[serde(default)]
    pub fluid: Fluid,
}

/// Named part of the fluid boundary: facets of the fluid mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct WallGroup {
    pub name: String,
    pub facets: Vec<usize>,
}

/// A built scenario ready for solving.
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub problem: Problem,
    pub exact: Option<ExactSolution>,
    pub walls: Vec<WallGroup>,
}

/// The eye slice with nominal parameters; `refine` multiplies all divisions.
pub fn make_eye_scenario(refine: usize, params: PhysicalParams, posture: Posture, variant: Variant) -> ScenarioSpec {
    ScenarioSpec {
        mesh: MeshSpec { path: None, generator: Some(Generator::EyeSlice { refine }) },
        posture: Some(posture),
        variant,
        params,
        boundaries: Boundaries {
            gamma_amb: vec![eye::AMBIENT.into()],
            gamma_body: eye::BODY.iter().map(|s| s.to_string()).collect(),
            walls: Vec::new(),
        },
        fluid: Fluid { labels: vec![eye::FLUID.into()] },
    }
}

/// A fluid-filled rectangle, `n` divisions across the width, walls at
/// `T_ref + delta_t / 2` (left) and `T_ref - delta_t / 2` (right).
pub fn make_cavity_scenario(n: usize, width: f64, height: f64, delta_t: f64, params: PhysicalParams) -> ScenarioSpec {
    ScenarioSpec {
        mesh: MeshSpec { path: None, generator: Some(Generator::Cavity { n, width, height, delta_t }) },
        posture: None,
        variant: Variant::default(),
        params,
        boundaries: Boundaries::default(),
        fluid: Fluid { labels: vec![eye::FLUID.into()] },
    }
}

pub fn make_lid_scenario(n: usize, params: PhysicalParams) -> ScenarioSpec {
    let params = PhysicalParams { beta: 0.0, ..params };
    ScenarioSpec {
        mesh: MeshSpec { path: None, generator: Some(Generator::LidDriven { n, lid_velocity: 1.0 }) },
        posture: Some(Posture::Standing),
        variant: Variant { flow: Flow::Stokes, ..Variant::default() },
        params,
        boundaries: Boundaries::default(),
        fluid: Fluid { labels: vec![eye::FLUID.into()] },
    }
}

/// Unit parameters on the unit square (`domain`), so that every term of
/// the equations is of order one.
pub fn mms_params() -> PhysicalParams {
    PhysicalParams {
        mu: 1.0,
        rho: 1.0,
        cp: 1.0,
        beta: 1.0,
        g_mag: 1.0,
        t_ref: 2.0,
        k_by_label: BTreeMap::from([("domain".to_string(), 1.0)]),
        ..PhysicalParams::default()
    }
}

pub fn make_mms_scenario(n: usize, solution: MmsKind) -> ScenarioSpec {
    ScenarioSpec {
        mesh: MeshSpec { path: None, generator: Some(Generator::Mms { n, solution }) },
        posture: Some(Posture::Standing),
        variant: Variant::default(),
        params: mms_params(),
        boundaries: Boundaries::default(),
        fluid: Fluid { labels: vec!["domain".into()] },
    }
}

fn split(a: f64, b: f64, n: usize, out: &mut Vec<f64>) {
    let start = if out.is_empty() { 0 } else { 1 };
    for i in start..=n {
        out.push(a + (b - a) * i as f64 / n as f64);
    }
}

/// The layered eye cut. The polar angle is measured from the anterior
/// optical axis, so the cornea lies at negative `x`.
pub fn eye_slice_mesh(refine: usize) -> Result<Mesh> {
    if refine == 0 {
        return Err(Error::InvalidArgument("eye slice refinement must be at least 1".into()));
    }
    let mut rs = Vec::new();
    for (k, &n) in eye::RADIAL_DIVISIONS.iter().enumerate() {
        split(eye::RADII[k], eye::RADII[k + 1], n * refine, &mut rs);
    }
    let [n_side, n_mid] = eye::ANGULAR_DIVISIONS;
    let (th, tp) = (eye::HALF_ANGLE, eye::HALF_ANGLE * eye::PUPIL_FRACTION);
    let mut ts = Vec::new();
    split(-th, -tp, n_side * refine, &mut ts);
    split(-tp, tp, n_mid * refine, &mut ts);
    split(tp, th, n_side * refine, &mut ts);

    let r_mid: Vec<f64> = rs.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let t_mid: Vec<f64> = ts.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let label = |i: usize, j: usize| -> &'static str {
        let (r, t) = (r_mid[i], t_mid[j]);
        let central = t.abs() < tp;
        if r < eye::RADII[1] {
            "vitreousHumor"
        } else if r < eye::RADII[3] {
            match (central, r < eye::RADII[2]) {
                (true, true) => "lens",
                (true, false) => eye::FLUID,
                (false, _) => "iris",
            }
        } else if central {
            "cornea"
        } else {
            "sclera"
        }
    };
    generate_mapped_grid(
        &rs,
        &ts,
        |r, t| [-r * t.cos(), r * t.sin(), 0.0],
        label,
        &RectLabels {
            left: eye::BODY[0].into(),
            right: eye::AMBIENT.into(),
            bottom: eye::BODY[1].into(),
            top: eye::BODY[2].into(),
            subdomain: String::new(),
        },
    )
}

fn cavity_mesh(n: usize, width: f64, height: f64) -> Result<Mesh> {
    if n < 4 {
        return Err(Error::Scenario(format!("cavity needs at least 4 divisions, got {n}")));
    }
    let ny = ((n as f64) * height / width).round().max(1.0) as usize;
    generate_rect(n, ny, [width, height], &RectLabels { subdomain: eye::FLUID.into(), ..Default::default() })
}

const SIDES: [&str; 4] = ["left", "right", "bottom", "top"];

impl ScenarioSpec {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("serializing scenario: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ScenarioSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.mesh.path, &self.mesh.generator) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either mesh.path or mesh.generator, not both".into()))
            }
            (None, None) => return Err(Error::Config("missing mesh.path or mesh.generator".into())),
            _ => {}
        }
        if let Some(n) = self.boundaries.gamma_amb.iter().find(|n| self.boundaries.gamma_body.contains(n)) {
            return Err(Error::Scenario(format!("boundary `{n}` is both ambient and body")));
        }
        if self.mesh.path.is_some() && self.fluid.labels.is_empty() {
            return Err(Error::Config("fluid.labels must name the fluid subdomains".into()));
        }
        self.effective_params().validate()
    }

    /// Parameters with the posture's gravity direction applied.
    pub fn effective_params(&self) -> PhysicalParams {
        let mut p = self.params.clone();
        if let Some(posture) = self.posture {
            p.gravity_dir = posture.gravity_dir();
        }
        p
    }

    pub fn build(&self) -> Result<Scenario> {
        let mesh = self.load_mesh()?;
        self.build_on(Arc::new(mesh))
    }

    /// Reads or generates the mesh described by `self.mesh`.
    pub fn load_mesh(&self) -> Result<Mesh> {
        self.validate()?;
        Ok(match (&self.mesh.path, &self.mesh.generator) {
            (Some(path), _) => load_msh(path)?,
            (_, Some(Generator::EyeSlice { refine })) => eye_slice_mesh(*refine)?,
            (_, Some(Generator::Cavity { n, width, height, .. })) => cavity_mesh(*n, *width, *height)?,
            (_, Some(Generator::LidDriven { n, .. })) => cavity_mesh(*n, 1e-2, 1e-2)?,
            (_, Some(Generator::Mms { n, .. })) => {
                if *n == 0 {
                    return Err(Error::Scenario("MMS mesh needs at least one division".into()));
                }
                generate_rect(*n, *n, [1.0, 1.0], &RectLabels::default())?
            }
            (None, None) => unreachable!("validated"),
        })
    }

    /// Sets up spaces, boundary data and constant blocks on a loaded mesh.
    pub fn build_on(&self, mesh: Arc<Mesh>) -> Result<Scenario> {
        self.validate()?;
        let params = self.effective_params();
        let fluid: Vec<&str> = self.fluid.labels.iter().map(String::as_str).collect();
        let mut setup = ProblemSetup::new(mesh.clone(), &fluid, params.clone());
        setup.gamma_amb = self.boundaries.gamma_amb.clone();
        setup.gamma_body = self.boundaries.gamma_body.clone();
        setup.variant = self.variant;
        let sides: Vec<String> = SIDES.iter().map(|s| s.to_string()).collect();
        let mut exact = None;
        match &self.mesh.generator {
            Some(Generator::Cavity { width, delta_t, .. }) => {
                let (w, dt, t0) = (*width, *delta_t, params.t_ref);
                setup.temperature_bc = Some((
                    vec!["left".into(), "right".into()],
                    Arc::new(move |x: &Point| if x[0] < 0.5 * w { t0 + 0.5 * dt } else { t0 - 0.5 * dt }),
                ));
            }
            Some(Generator::LidDriven { lid_velocity, .. }) => {
                let lid = *lid_velocity;
                let top = 1e-2 * (1.0 - 1e-9);
                setup.velocity_bc =
                    Some(Arc::new(move |x: &Point| if x[1] >= top { [lid, 0.0, 0.0] } else { [0.0; 3] }));
                let t0 = params.t_ref;
                setup.temperature_bc = Some((sides.clone(), Arc::new(move |_: &Point| t0)));
            }
            Some(Generator::Mms { solution, .. }) => {
                let ex = ExactSolution::of(*solution);
                let k = params.conductivity("domain")?;
                setup.momentum_source = Some(ex.momentum_source(&params, self.variant.flow == Flow::NavierStokes));
                setup.heat_source = Some(ex.heat_source(&params, k));
                let u = ex.u.clone();
                setup.velocity_bc = Some(Arc::new(move |x: &Point| u(x)));
                let t = ex.t.clone();
                setup.temperature_bc = Some((sides.clone(), Arc::new(move |x: &Point| t(x))));
                exact = Some(ex);
            }
            _ => {}
        }
        let problem = Problem::new(setup)?;
        let walls = wall_groups(&problem, &self.boundaries.walls)?;
        Ok(Scenario { spec: self.clone(), problem, exact, walls })
    }
}

/// Groups the exterior facets of the fluid mesh by the name of what lies
/// beyond them: the neighbouring subdomain, or the boundary label where
/// the fluid touches the outside of the whole mesh.
fn wall_groups(pb: &Problem, wanted: &[String]) -> Result<Vec<WallGroup>> {
    let sub = &pb.fluid;
    let fm = &sub.mesh;
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for f in 0..fm.n_facets() {
        let name = match sub.facet_neighbor[f] {
            Some(l) => pb.mesh.subdomain_name(l).to_string(),
            None => fm.boundary_names().get(&fm.facet_label(f)).cloned().unwrap_or_default(),
        };
        groups.entry(name).or_default().push(f);
    }
    if !wanted.is_empty() {
        if let Some(w) = wanted.iter().find(|w| !groups.contains_key(*w)) {
            return Err(Error::UnknownLabel(format!("{w} (not a wall of the fluid region)")));
        }
        groups.retain(|k, _| wanted.contains(k));
    }
    Ok(groups.into_iter().map(|(name, facets)| WallGroup { name, facets }).collect())
}

impl Scenario {
    pub fn wall(&self, name: &str) -> Option<&WallGroup> {
        self.walls.iter().find(|w| w.name == name)
    }

    /// All wall facets of the fluid region.
    pub fn all_wall_facets(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self.walls.iter().flat_map(|w| w.facets.iter().copied()).collect();
        f.sort_unstable();
        f
    }

    /// L2 errors of velocity, pressure (up to its mean) and temperature
    /// against the manufactured solution.
    pub fn mms_errors(&self, s: &State) -> Result<[f64; 3]> {
        let ex = self.exact.as_ref().ok_or_else(|| Error::Scenario("scenario has no exact solution".into()))?;
        let pb = &self.problem;
        let fm = pb.fluid.mesh.as_ref();
        const ORDER: usize = 8;
        let eu = integrate(fm, None, ORDER, |c, _g: &CellGeometry, l, x| {
            let uh = pb.velocity.eval(&s.u, c, l);
            let u = (ex.u)(x);
            (0..3).map(|i| (uh[i] - u[i]).powi(2)).sum()
        })?;
        let dp = |c: usize, l: &[f64], x: &Point| pb.pressure.eval(&s.p, c, l)[0] - (ex.p)(x);
        let ep2 = integrate(fm, None, ORDER, |c, _, l, x| dp(c, l, x).powi(2))?;
        let ep1 = integrate(fm, None, ORDER, |c, _, l, x| dp(c, l, x))?;
        let area = integrate(fm, None, 0, |_, _, _, _| 1.0)?;
        let et =
            integrate(&pb.mesh, None, ORDER, |c, _, l, x| (pb.temperature.eval(&s.t, c, l)[0] - (ex.t)(x)).powi(2))?;
        Ok([eu.sqrt(), (ep2 - ep1 * ep1 / area).max(0.0).sqrt(), et.sqrt()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn postures_map_to_the_three_gravity_vectors() {
        let dirs: Vec<[f64; 3]> = Posture::ALL.iter().map(|p| p.gravity_dir()).collect();
        assert_eq!(dirs, vec![[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]);
        for p in Posture::ALL {
            assert_eq!(Posture::parse(p.name()).unwrap(), p);
        }
        assert!(Posture::parse("sitting").is_err());
    }

    #[test]
    fn eye_defaults_are_nominal() {
        let spec = make_eye_scenario(1, PhysicalParams::default(), Posture::Standing, Variant::default());
        let p = spec.effective_params();
        assert_eq!((p.t_amb, p.h_amb, p.epsilon, p.evaporation), (294.0, 10.0, 0.975, 40.0));
        assert_eq!(p.gravity(), [0.0, -9.81, 0.0]);
    }

    #[test]
    fn eye_slice_has_the_expected_regions() {
        let m = eye_slice_mesh(1).unwrap();
        let names: Vec<&str> = m.used_subdomains().iter().map(|(_, n)| *n).collect();
        for n in ["vitreousHumor", "lens", "aqueousHumor", "iris", "cornea", "sclera"] {
            assert!(names.contains(&n), "{n} missing from {names:?}");
        }
        let sc =
            make_eye_scenario(1, PhysicalParams::default(), Posture::Standing, Variant::default()).build().unwrap();
        let walls: Vec<&str> = sc.walls.iter().map(|w| w.name.as_str()).collect();
        assert_eq!(walls, vec!["cornea", "iris", "lens"]);
    }

    #[test]
    fn spec_roundtrips_through_toml() {
        for spec in [
            make_eye_scenario(
                2,
                PhysicalParams::default(),
                Posture::Prone,
                Variant::parse("stokes+linearized").unwrap(),
            ),
            make_cavity_scenario(8, 3e-3, 1e-2, 2.03, PhysicalParams::default()),
            make_mms_scenario(4, MmsKind::Poly),
        ] {
            let text = spec.to_toml().unwrap();
            assert_eq!(ScenarioSpec::from_toml(&text).unwrap(), spec, "{text}");
        }
    }

    #[test]
    fn config_errors_are_reported() {
        let mut spec = make_eye_scenario(1, PhysicalParams::default(), Posture::Standing, Variant::default());
        spec.boundaries.gamma_body.push(eye::AMBIENT.into());
        assert!(spec.validate().is_err());
        let mut spec = make_eye_scenario(1, PhysicalParams::default(), Posture::Standing, Variant::default());
        spec.params.k_by_label.remove("iris");
        let err = spec.build().err().unwrap().to_string();
        assert!(err.contains("iris"), "{err}");
        assert!(ScenarioSpec::from_toml("[mesh]\n").is_err());
        assert!(ScenarioSpec::from_toml("[mesh.generator]\nkind = \"eye_slice\"\n[extra]\n").is_err());
    }
}
