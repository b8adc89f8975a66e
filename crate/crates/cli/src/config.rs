use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ocuflow::krylov::SolverTree;
use ocuflow::newton::NewtonConfig;
use ocuflow::postproc::{PressureTarget, WssOptions};
use ocuflow::scenario::study::RunOptions;
use ocuflow::scenario::ScenarioSpec;

/// Which linear solver tree to use: a named preset, or a full description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_preset")]
    pub preset: String,
    #[serde(default)]
    pub tree: Option<SolverTree>,
}

fn default_preset() -> String {
    "schur-upper".into()
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection { preset: default_preset(), tree: None }
    }
}

impl SolverSection {
    pub fn tree(&self) -> Result<SolverTree> {
        let tree = match &self.tree {
            Some(t) => t.clone(),
            None => SolverTree::preset(&self.preset)?,
        };
        tree.validate()?;
        Ok(tree)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Shift reported pressures to this mean [mmHg].
    pub pressure_mmhg: Option<f64>,
    /// Report only the tangential part of the wall traction.
    pub tangential_wss: bool,
}

/// Contents of a run configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub newton: NewtonConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl Config {
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: Config = toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        // Mesh paths are relative to the file that names them.
        if let (Some(mesh), Some(dir)) = (cfg.scenario.mesh.path.as_mut(), path.parent()) {
            if mesh.is_relative() {
                *mesh = dir.join(&*mesh);
            }
        }
        cfg.validate().with_context(|| format!("invalid config {}", path.display()))?;
        Ok((cfg, text))
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.newton.validate()?;
        self.solver.tree()?;
        if let Some(p) = self.output.pressure_mmhg {
            if !p.is_finite() {
                bail!("output.pressure_mmhg must be finite");
            }
        }
        Ok(())
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            pressure_target: self.output.pressure_mmhg.map(PressureTarget::MmHg),
            wss: WssOptions { tangential: self.output.tangential_wss },
        }
    }
}

/// SHA-256 of the configuration text, hex encoded.
pub fn hash_text(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}
