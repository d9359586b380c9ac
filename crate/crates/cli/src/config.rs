//! Scenario configuration files.
//!
//! A configuration is a flat TOML document: top-level keys, named spectra
//! under `[spectra.NAME]`, numerical settings under `[quad]` and `[mc]`, and
//! one section named after the scenario.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use casimir_born::born::Regime;
use casimir_born::materials::{
    Oscillator, PolarizabilityModel, Spectra, SusceptibilityModel, Transition,
};
use casimir_born::quad::{MCSpec, QuadScheme, QuadratureSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Ring,
    Halfspace,
    Body,
    VdwCluster,
    IdentitySuite,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ring => "ring",
            Self::Halfspace => "halfspace",
            Self::Body => "body",
            Self::VdwCluster => "vdw_cluster",
            Self::IdentitySuite => "identity_suite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitSystem {
    #[default]
    Reduced,
    Si,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeName {
    #[default]
    Full,
    Retarded,
    Nonretarded,
}

impl From<RegimeName> for Regime {
    fn from(r: RegimeName) -> Self {
        match r {
            RegimeName::Full => Regime::Full,
            RegimeName::Retarded => Regime::Retarded,
            RegimeName::Nonretarded => Regime::Nonretarded,
        }
    }
}

/// A scalar or a list of scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            Self::One(v) => vec![*v],
            Self::Many(v) => v.clone(),
        }
    }
}

/// A named response function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumConfig {
    /// Atomic polarizability, one static contribution `alpha0` per line at `omega`.
    Atom { alpha0: OneOrMany, omega: OneOrMany },
    /// Lorentz susceptibility, one static contribution `chi0` per oscillator.
    Oscillator {
        chi0: OneOrMany,
        omega: OneOrMany,
        #[serde(default)]
        gamma: Option<OneOrMany>,
    },
    /// Linear susceptibility `n alpha_B` of a dilute gas of the named atom.
    Dilute { density: f64, atom: String },
    /// Clausius-Mosotti susceptibility of the named atom at density `n`.
    ClausiusMosotti { density: f64, atom: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadConfig {
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_max_evals")]
    pub max_evals: usize,
    #[serde(default)]
    pub scheme: SchemeName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    #[default]
    HalfLineMapped,
    AdaptiveInterval,
}

fn default_rel_tol() -> f64 {
    QuadratureSpec::default().rel_tol
}
fn default_abs_tol() -> f64 {
    QuadratureSpec::default().abs_tol
}
fn default_max_evals() -> usize {
    QuadratureSpec::default().max_evals
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: default_rel_tol(),
            abs_tol: default_abs_tol(),
            max_evals: default_max_evals(),
            scheme: SchemeName::default(),
        }
    }
}

impl QuadConfig {
    pub fn spec(&self) -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_evals: self.max_evals,
            scheme: match self.scheme {
                SchemeName::HalfLineMapped => QuadScheme::HalfLineMapped,
                SchemeName::AdaptiveInterval => QuadScheme::AdaptiveInterval,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_strata")]
    pub strata: usize,
    #[serde(default = "default_delta")]
    pub coincidence_delta: f64,
    #[serde(default = "default_levels")]
    pub richardson_levels: usize,
}

impl McConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            samples: default_samples(),
            strata: default_strata(),
            coincidence_delta: default_delta(),
            richardson_levels: default_levels(),
        }
    }
}

fn default_samples() -> usize {
    MCSpec::default().samples
}
fn default_strata() -> usize {
    MCSpec::default().strata
}
fn default_delta() -> f64 {
    MCSpec::default().coincidence_delta
}
fn default_levels() -> usize {
    MCSpec::default().richardson_levels
}

impl McConfig {
    pub fn spec(&self) -> MCSpec {
        MCSpec {
            seed: self.seed,
            samples: self.samples,
            strata: self.strata,
            coincidence_delta: self.coincidence_delta,
            richardson_levels: self.richardson_levels,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingConfig {
    pub atom: String,
    pub medium: String,
    pub r0: f64,
    pub a: f64,
    /// Height of the atom above the ring plane on its axis.
    #[serde(default, rename = "zA", alias = "z_a")]
    pub z_a: f64,
    #[serde(default)]
    pub regime: RegimeName,
    #[serde(default = "default_lambda_band")]
    pub lambda_band: [f64; 2],
    /// Also evaluate the two-point term by pair Monte Carlo.
    #[serde(default)]
    pub monte_carlo: bool,
}

fn default_lambda_band() -> [f64; 2] {
    [0.5, 1.5]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    #[default]
    Homogeneous,
    Oscillating,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceConfig {
    pub atom: String,
    pub medium: String,
    #[serde(default)]
    pub profile: ProfileKind,
    #[serde(default)]
    pub kz: f64,
    #[serde(default)]
    pub z_table: Vec<f64>,
    #[serde(default)]
    pub p_table: Vec<f64>,
    /// Atom heights.
    #[serde(rename = "zA", alias = "heights")]
    pub heights: Vec<f64>,
    #[serde(default)]
    pub regime: RegimeName,
    /// Tabulate the far-field distance law of the oscillating profile in
    /// this regime instead of evaluating the profile.
    #[serde(default)]
    pub figure: Option<FigureName>,
    /// Ratios `kz c / omega_A` of the figure curves; `inf` is allowed.
    #[serde(default)]
    pub ratios: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureName {
    Retarded,
    Nonretarded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Cube,
    Cuboid,
    Torus,
    Voxels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyConfig {
    pub atom: String,
    pub medium: String,
    pub atom_position: [f64; 3],
    pub shape: ShapeKind,
    #[serde(default)]
    pub center: Option<[f64; 3]>,
    #[serde(default)]
    pub edge: Option<f64>,
    #[serde(default)]
    pub min: Option<[f64; 3]>,
    #[serde(default)]
    pub max: Option<[f64; 3]>,
    #[serde(default)]
    pub r0: Option<f64>,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub origin: Option<[f64; 3]>,
    #[serde(default)]
    pub spacing: Option<f64>,
    #[serde(default)]
    pub cells: Option<Vec<[i64; 3]>>,
    #[serde(default)]
    pub scales: Option<Vec<f64>>,
    #[serde(default)]
    pub regime: RegimeName,
    #[serde(default)]
    pub force: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    pub positions: Vec<[f64; 3]>,
    /// One spectrum name for all atoms or one per atom.
    pub atoms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub json: Option<PathBuf>,
    #[serde(default)]
    pub plot_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub units: UnitSystem,
    /// Length unit in meters when `units = "si"`.
    #[serde(default)]
    pub length_unit_m: Option<f64>,
    #[serde(default)]
    pub spectra: BTreeMap<String, SpectrumConfig>,
    #[serde(default)]
    pub quad: QuadConfig,
    #[serde(default)]
    pub mc: Option<McConfig>,
    #[serde(default)]
    pub ring: Option<RingConfig>,
    #[serde(default)]
    pub halfspace: Option<HalfspaceConfig>,
    #[serde(default)]
    pub body: Option<BodyConfig>,
    #[serde(default)]
    pub vdw_cluster: Option<ClusterConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn id(&self) -> String {
        self.id
            .clone()
            .unwrap_or_else(|| self.scenario.name().to_string())
    }

    /// Checks that the scenario section exists, that every referenced
    /// spectrum is defined with the right kind, and that Monte Carlo
    /// scenarios carry a seed.
    pub fn validate(&self) -> Result<(), CliError> {
        let missing = |section: &str| CliError::Config(format!("missing [{section}] section"));
        match self.scenario {
            ScenarioKind::Ring => {
                let r = self.ring.as_ref().ok_or_else(|| missing("ring"))?;
                self.atom("ring.atom", &r.atom)?;
                self.medium("ring.medium", &r.medium)?;
                if r.monte_carlo && self.mc.is_none() {
                    return Err(CliError::Config(
                        "ring.monte_carlo needs an [mc] section with a seed".into(),
                    ));
                }
            }
            ScenarioKind::Halfspace => {
                let h = self
                    .halfspace
                    .as_ref()
                    .ok_or_else(|| missing("halfspace"))?;
                self.atom("halfspace.atom", &h.atom)?;
                self.medium("halfspace.medium", &h.medium)?;
                if h.heights.is_empty() {
                    return Err(CliError::Config("halfspace.zA must not be empty".into()));
                }
            }
            ScenarioKind::Body => {
                let b = self.body.as_ref().ok_or_else(|| missing("body"))?;
                self.atom("body.atom", &b.atom)?;
                self.medium("body.medium", &b.medium)?;
                if !matches!(b.shape, ShapeKind::Voxels) && self.mc.is_none() {
                    return Err(CliError::Config(
                        "continuous bodies are integrated by Monte Carlo and need an [mc] section with a seed".into(),
                    ));
                }
            }
            ScenarioKind::VdwCluster => {
                let c = self
                    .vdw_cluster
                    .as_ref()
                    .ok_or_else(|| missing("vdw_cluster"))?;
                if c.atoms.len() != 1 && c.atoms.len() != c.positions.len() {
                    return Err(CliError::Config(
                        "vdw_cluster.atoms must name one spectrum or one per position".into(),
                    ));
                }
                for (i, name) in c.atoms.iter().enumerate() {
                    self.atom(&format!("vdw_cluster.atoms[{i}]"), name)?;
                }
            }
            ScenarioKind::IdentitySuite => {}
        }
        if self.units == UnitSystem::Si && !self.length_unit_m.is_some_and(|l| l > 0.0) {
            return Err(CliError::Config(
                "units = \"si\" needs a positive length_unit_m".into(),
            ));
        }
        Ok(())
    }

    fn lookup(&self, key: &str, name: &str) -> Result<&SpectrumConfig, CliError> {
        self.spectra.get(name).ok_or_else(|| {
            CliError::Config(format!("{key} refers to undefined spectrum \"{name}\""))
        })
    }

    /// Resolves an atomic polarizability by name.
    pub fn atom(&self, key: &str, name: &str) -> Result<PolarizabilityModel, CliError> {
        match self.lookup(key, name)? {
            SpectrumConfig::Atom { alpha0, omega } => {
                let (a, w) = (alpha0.to_vec(), omega.to_vec());
                if a.len() != w.len() {
                    return Err(CliError::Config(format!(
                        "spectrum \"{name}\": alpha0 and omega differ in length"
                    )));
                }
                let lines = a
                    .iter()
                    .zip(&w)
                    .map(|(&a0, &om)| Transition {
                        omega: om,
                        dipole_sq: 1.5 * a0 * om,
                    })
                    .collect();
                Ok(PolarizabilityModel::new(lines)?)
            }
            _ => Err(CliError::Config(format!(
                "{key}: spectrum \"{name}\" is not an atom"
            ))),
        }
    }

    /// Resolves a body susceptibility by name.
    pub fn medium(&self, key: &str, name: &str) -> Result<SusceptibilityModel, CliError> {
        match self.lookup(key, name)? {
            SpectrumConfig::Oscillator { chi0, omega, gamma } => {
                let (c, w) = (chi0.to_vec(), omega.to_vec());
                let g = gamma
                    .as_ref()
                    .map(|g| g.to_vec())
                    .unwrap_or_else(|| vec![0.0; c.len()]);
                if c.len() != w.len() || g.len() != c.len() {
                    return Err(CliError::Config(format!(
                        "spectrum \"{name}\": chi0, omega and gamma differ in length"
                    )));
                }
                let oscillators = (0..c.len())
                    .map(|i| Oscillator {
                        omega_t: w[i],
                        omega_p: (c[i] * w[i] * w[i]).sqrt(),
                        gamma: g[i],
                    })
                    .collect();
                Ok(SusceptibilityModel::oscillators(oscillators)?)
            }
            SpectrumConfig::Dilute { density, atom } => Ok(SusceptibilityModel::dilute(
                *density,
                self.atom(&format!("spectra.{name}.atom"), atom)?,
            )?),
            SpectrumConfig::ClausiusMosotti { density, atom } => {
                Ok(SusceptibilityModel::clausius_mosotti(
                    *density,
                    self.atom(&format!("spectra.{name}.atom"), atom)?,
                )?)
            }
            SpectrumConfig::Atom { .. } => Err(CliError::Config(format!(
                "{key}: spectrum \"{name}\" is an atom, not a medium"
            ))),
        }
    }

    pub fn spectra_pair(
        &self,
        atom: &str,
        medium: &str,
        section: &str,
    ) -> Result<Spectra, CliError> {
        Ok(Spectra::new(
            self.atom(&format!("{section}.atom"), atom)?,
            self.medium(&format!("{section}.medium"), medium)?,
        ))
    }

    pub fn mc_spec(&self) -> MCSpec {
        self.mc.as_ref().map(McConfig::spec).unwrap_or_default()
    }
}
