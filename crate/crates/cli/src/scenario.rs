//! TOML scenario files.
//!
//! One scenario per file. Physics sections are optional at parse time and
//! demanded by the command that needs them, so a missing section is reported
//! by name together with the command.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qlaw_core::laws1d::{LawKind, TrajectoryControls};
use qlaw_core::numerics::OdeControls;
use qlaw_core::schrodinger1d::{PotentialKind, PotentialSpec, TabulatedPotential};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Module {
    Laws1d,
    Hydrogen2d,
    Relativistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub module: Module,
    /// Seed for randomly drawn constant sets; `--seed` overrides it.
    #[serde(default)]
    pub seed: u64,
    pub particle: Option<Particle>,
    pub potential: Option<PotentialConfig>,
    pub action: Option<ActionConfig>,
    pub law: Option<LawConfig>,
    #[serde(default)]
    pub controls: Controls,
    pub verify: Option<VerifyConfig>,
    pub sweep: Option<SweepConfig>,
    pub hydrogen: Option<HydrogenConfig>,
    pub relativistic: Option<RelativisticConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Particle {
    pub energy: f64,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub hbar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialShape {
    Free,
    Linear,
    Harmonic,
    Step,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: PotentialShape,
    pub slope: Option<f64>,
    pub stiffness: Option<f64>,
    pub position: Option<f64>,
    pub height: Option<f64>,
    /// Two-column `x,V` table, relative to the scenario file.
    pub file: Option<PathBuf>,
    pub domain: Option<[f64; 2]>,
    /// Numerov step for numerically generated pairs.
    #[serde(default = "default_step")]
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionConfig {
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub lambda: f64,
    /// Negative control: perturb the pair by this relative amplitude.
    #[serde(default)]
    pub corrupt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawTag {
    Energy,
    Bohm,
    Floyd,
}

impl From<LawTag> for LawKind {
    fn from(tag: LawTag) -> Self {
        match tag {
            LawTag::Energy => LawKind::EnergyLaw,
            LawTag::Bohm => LawKind::BohmForm,
            LawTag::Floyd => LawKind::FloydJacobi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    pub kind: LawTag,
    pub x0: f64,
    pub t_span: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Controls {
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_step: Option<f64>,
    #[serde(default = "yes")]
    pub detect_stall: bool,
}

impl Default for Controls {
    fn default() -> Self {
        Self {
            abs_tol: None,
            rel_tol: None,
            max_step: None,
            detect_stall: true,
        }
    }
}

impl Controls {
    pub fn ode(&self, base: OdeControls) -> OdeControls {
        OdeControls {
            abs_tol: self.abs_tol.unwrap_or(base.abs_tol),
            rel_tol: self.rel_tol.unwrap_or(base.rel_tol),
            max_step: self.max_step.or(base.max_step),
            ..base
        }
    }

    pub fn trajectory(&self) -> TrajectoryControls {
        let base = TrajectoryControls::default();
        TrajectoryControls {
            ode: self.ode(base.ode.clone()),
            detect_stall: self.detect_stall,
            ..base
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// `[lo, hi]` of the residual grid.
    pub range: [f64; 2],
    #[serde(default = "default_points")]
    pub points: usize,
    /// Extra `(a, b)` sets drawn from the seed, on top of `[action]`.
    #[serde(default)]
    pub random_constants: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Explicit `[[a, b], ...]` grid.
    #[serde(default)]
    pub constants: Vec<[f64; 2]>,
    /// Number of extra `(a, b)` sets drawn from the seed.
    #[serde(default)]
    pub random: usize,
    #[serde(default = "default_a_range")]
    pub a_range: [f64; 2],
    #[serde(default = "default_b_range")]
    pub b_range: [f64; 2],
    /// Defaults to 1e-3 de Broglie lengths.
    pub node_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Law2DTag {
    Bohm,
    Energy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Atomic,
    Si,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants2DConfig {
    #[serde(default)]
    pub nu2: f64,
    #[serde(default)]
    pub nu3: f64,
    #[serde(default)]
    pub nu4: f64,
    #[serde(default)]
    pub mu1: f64,
    #[serde(default)]
    pub mu2: f64,
    #[serde(default)]
    pub mu3: f64,
    #[serde(default)]
    pub lambda: f64,
}

/// Lengths and times are read in `units`; outputs use the same units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydrogenConfig {
    pub n: u32,
    pub l: i32,
    #[serde(default = "default_rho0")]
    pub rho0: f64,
    pub constants: Constants2DConfig,
    pub law: Law2DTag,
    pub r_init: f64,
    #[serde(default)]
    pub theta_init: f64,
    pub t_span: [f64; 2],
    #[serde(default = "default_units")]
    pub units: Units,
    pub r_max: Option<f64>,
}

/// Klein-Gordon setup; `energy` is the total energy including `mc^2`.
/// Uses `[potential]` when present, the free field otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelativisticConfig {
    pub c: f64,
    pub energy: f64,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "one")]
    pub k: f64,
    pub x0: f64,
    pub t_span: [f64; 2],
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_step() -> f64 {
    1e-3
}
fn default_points() -> usize {
    500
}
fn default_a_range() -> [f64; 2] {
    [0.5, 4.0]
}
fn default_b_range() -> [f64; 2] {
    [-1.0, 1.0]
}
fn default_rho0() -> f64 {
    qlaw_core::hydrogen2d::DEFAULT_RHO0
}
fn default_units() -> Units {
    Units::Atomic
}

/// A parsed scenario plus what it was loaded from.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub base_dir: PathBuf,
    /// Contents of referenced side files (tabulated potentials), hashed too.
    side_inputs: Vec<u8>,
}

impl LoadedScenario {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_str(&text, base_dir).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_str(text: &str, base_dir: PathBuf) -> Result<Self, CliError> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let mut loaded = Self {
            scenario,
            base_dir,
            side_inputs: Vec::new(),
        };
        if let Some(file) = loaded.scenario.potential.as_ref().and_then(|p| p.file.clone()) {
            let path = loaded.base_dir.join(file);
            loaded.side_inputs =
                std::fs::read(&path).map_err(|e| CliError::Config(format!("potential.file {}: {e}", path.display())))?;
        }
        Ok(loaded)
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(seed) = seed {
            self.scenario.seed = seed;
        }
        self
    }

    /// SHA-256 over the canonical JSON form of the effective scenario
    /// (seed included) and any side files.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&self.scenario).expect("scenario serializes"));
        h.update(&self.side_inputs);
        hex::encode(h.finalize())
    }

    pub fn potential(&self) -> Result<Option<PotentialSpec>, CliError> {
        let Some(p) = &self.scenario.potential else {
            return Ok(None);
        };
        let need = |v: Option<f64>, key: &str| v.ok_or_else(|| CliError::missing(&format!("potential.{key}")));
        let kind = match p.kind {
            PotentialShape::Free => return Ok(None),
            PotentialShape::Linear => PotentialKind::Linear {
                slope: need(p.slope, "slope")?,
            },
            PotentialShape::Harmonic => PotentialKind::Harmonic {
                stiffness: need(p.stiffness, "stiffness")?,
            },
            PotentialShape::Step => PotentialKind::Step {
                position: need(p.position, "position")?,
                height: need(p.height, "height")?,
            },
            PotentialShape::Tabulated => {
                let text = std::str::from_utf8(&self.side_inputs)
                    .map_err(|e| CliError::Config(format!("potential.file: {e}")))?;
                if p.file.is_none() {
                    return Err(CliError::missing("potential.file"));
                }
                PotentialKind::Tabulated(std::sync::Arc::new(TabulatedPotential::parse(text)?))
            }
        };
        let [lo, hi] = p.domain.ok_or_else(|| CliError::missing("potential.domain"))?;
        Ok(Some(PotentialSpec::new(kind, (lo, hi))?))
    }

    pub fn particle(&self) -> Result<&Particle, CliError> {
        self.scenario.particle.as_ref().ok_or_else(|| CliError::missing("particle"))
    }

    pub fn law(&self) -> Result<&LawConfig, CliError> {
        self.scenario.law.as_ref().ok_or_else(|| CliError::missing("law"))
    }

    pub fn action(&self) -> ActionConfig {
        self.scenario.action.clone().unwrap_or(ActionConfig {
            a: 1.0,
            b: 0.0,
            lambda: 0.0,
            corrupt: 0.0,
        })
    }

    pub fn hydrogen(&self) -> Result<&HydrogenConfig, CliError> {
        self.scenario.hydrogen.as_ref().ok_or_else(|| CliError::missing("hydrogen"))
    }

    pub fn relativistic(&self) -> Result<&RelativisticConfig, CliError> {
        self.scenario.relativistic.as_ref().ok_or_else(|| CliError::missing("relativistic"))
    }

    pub fn sweep(&self) -> Result<&SweepConfig, CliError> {
        self.scenario.sweep.as_ref().ok_or_else(|| CliError::missing("sweep"))
    }
}
