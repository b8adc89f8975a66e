use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Point;

/// Physical coefficients in SI units. Serialized field names follow the
/// usual symbols (`Cp`, `T_ref`, `sigma_SB`, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalParams {
    /// Dynamic viscosity [N s/m^2].
    pub mu: f64,
    /// Density, also the Boussinesq reference density [kg/m^3].
    pub rho: f64,
    /// Specific heat [J/(kg K)].
    #[serde(rename = "Cp")]
    pub cp: f64,
    /// Volume expansion coefficient [1/K].
    pub beta: f64,
    pub g_mag: f64,
    #[serde(rename = "T_ref")]
    pub t_ref: f64,
    pub h_bl: f64,
    pub h_amb: f64,
    #[serde(rename = "T_bl")]
    pub t_bl: f64,
    #[serde(rename = "T_amb")]
    pub t_amb: f64,
    /// Evaporation heat flux leaving through the ambient boundary [W/m^2].
    #[serde(rename = "E")]
    pub evaporation: f64,
    #[serde(rename = "sigma_SB")]
    pub sigma_sb: f64,
    pub epsilon: f64,
    /// Thermal conductivity per subdomain name [W/(m K)].
    pub k_by_label: BTreeMap<String, f64>,
    /// Unit vector along gravity.
    pub gravity_dir: [f64; 3],
}

pub const TISSUE_CONDUCTIVITY: [(&str, f64); 10] = [
    ("lens", 0.4),
    ("cornea", 0.58),
    ("sclera", 1.0042),
    ("iris", 1.0042),
    ("lamina", 1.0042),
    ("opticNerve", 1.0042),
    ("aqueousHumor", 0.28),
    ("vitreousHumor", 0.603),
    ("choroid", 0.52),
    ("retina", 0.52),
];

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            mu: 0.001,
            rho: 1000.0,
            cp: 4178.0,
            beta: 3e-4,
            g_mag: 9.81,
            t_ref: 298.0,
            h_bl: 65.0,
            h_amb: 10.0,
            t_bl: 310.0,
            t_amb: 294.0,
            evaporation: 40.0,
            sigma_sb: 5.67e-8,
            epsilon: 0.975,
            k_by_label: TISSUE_CONDUCTIVITY.iter().map(|&(n, k)| (n.to_string(), k)).collect(),
            gravity_dir: [0.0, -1.0, 0.0],
        }
    }
}

impl PhysicalParams {
    /// Gravity vector `g_mag * gravity_dir`.
    pub fn gravity(&self) -> Point {
        self.gravity_dir.map(|c| c * self.g_mag)
    }

    pub fn conductivity(&self, label: &str) -> Result<f64> {
        self.k_by_label
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(format!("{label} (no conductivity given)")))
    }

    /// Heat transfer coefficient of the radiation law linearized about
    /// the ambient temperature.
    pub fn h_rad(&self) -> f64 {
        4.0 * self.sigma_sb * self.epsilon * self.t_amb.powi(3)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mu", self.mu),
            ("rho", self.rho),
            ("Cp", self.cp),
            ("T_ref", self.t_ref),
            ("T_bl", self.t_bl),
            ("T_amb", self.t_amb),
            ("sigma_SB", self.sigma_sb),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("params.{name} must be positive, got {v}")));
            }
        }
        let nonnegative = [
            ("beta", self.beta),
            ("g_mag", self.g_mag),
            ("h_bl", self.h_bl),
            ("h_amb", self.h_amb),
            ("E", self.evaporation),
            ("epsilon", self.epsilon),
        ];
        for (name, v) in nonnegative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("params.{name} must be non-negative, got {v}")));
            }
        }
        for (name, &k) in &self.k_by_label {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::Config(format!("conductivity of `{name}` must be positive, got {k}")));
            }
        }
        let norm = self.gravity_dir.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("params.gravity_dir must have unit norm, got {norm}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flow {
    #[default]
    NavierStokes,
    /// Convective momentum transport dropped.
    Stokes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Radiation {
    #[default]
    Nonlinear,
    /// Radiation replaced by a Robin law with `h_rad = 4 sigma eps T_amb^3`.
    Linearized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Variant {
    pub flow: Flow,
    pub radiation: Radiation,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant { flow: Flow::NavierStokes, radiation: Radiation::Nonlinear },
        Variant { flow: Flow::NavierStokes, radiation: Radiation::Linearized },
        Variant { flow: Flow::Stokes, radiation: Radiation::Nonlinear },
        Variant { flow: Flow::Stokes, radiation: Radiation::Linearized },
    ];

    pub fn name(&self) -> &'static str {
        match (self.flow, self.radiation) {
            (Flow::NavierStokes, Radiation::Nonlinear) => "navier_stokes+nonlinear",
            (Flow::NavierStokes, Radiation::Linearized) => "navier_stokes+linearized",
            (Flow::Stokes, Radiation::Nonlinear) => "stokes+nonlinear",
            (Flow::Stokes, Radiation::Linearized) => "stokes+linearized",
        }
    }

    /// Parses `flow+radiation`, e.g. `stokes+linearized`, or a bare flow name.
    pub fn parse(s: &str) -> Result<Self> {
        let mut v = Variant::default();
        for part in s.split('+') {
            match part.trim() {
                "navier_stokes" | "navier-stokes" => v.flow = Flow::NavierStokes,
                "stokes" => v.flow = Flow::Stokes,
                "nonlinear" => v.radiation = Radiation::Nonlinear,
                "linearized" | "linear" => v.radiation = Radiation::Linearized,
                other => return Err(Error::Config(format!("unknown variant component `{other}`"))),
            }
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_nominal_values() {
        let p = PhysicalParams::default();
        assert_eq!((p.t_amb, p.h_amb, p.epsilon, p.evaporation), (294.0, 10.0, 0.975, 40.0));
        assert_eq!(p.gravity(), [0.0, -9.81, 0.0]);
        assert_eq!(p.conductivity("aqueousHumor").unwrap(), 0.28);
        let err = p.conductivity("tearFilm").unwrap_err().to_string();
        assert!(err.contains("tearFilm"));
        p.validate().unwrap();
    }

    #[test]
    fn params_toml_roundtrip_uses_symbol_names() {
        let p = PhysicalParams::default();
        let s = toml::to_string(&p).unwrap();
        assert!(s.contains("T_amb = 294.0") && s.contains("sigma_SB"));
        let back: PhysicalParams = toml::from_str(&s).unwrap();
        assert_eq!(p, back);
        assert!(toml::from_str::<PhysicalParams>("T_amb = 1.0\nbogus = 2").is_err());
    }

    #[test]
    fn variant_names_parse_back() {
        for v in Variant::ALL {
            assert_eq!(Variant::parse(v.name()).unwrap(), v);
        }
        assert!(Variant::parse("euler").is_err());
    }
}
