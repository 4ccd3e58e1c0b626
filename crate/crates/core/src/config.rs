//! Scenario files: a TOML description of the particle, the emitter and the
//! numerical settings, validated at load time.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{ClassifierThresholds, MemoryConvention};
use crate::error::{Error, Result};
use crate::greens::{energy_grid, EmitterConfig};
use crate::materials::{DrudeParams, LorentzShellParams, MaterialStack};
use crate::mie::dipole_resonance;
use crate::oracle::DEFAULT_TAIL_LIMIT;
use crate::pseudomode::FitOptions;

const BARE_PRESET: &str = include_str!("../presets/bare-paper.toml");
const COATED_PRESET: &str = include_str!("../presets/coated-paper.toml");

/// Names accepted by [`ScenarioConfig::preset`].
pub const PRESETS: [&str; 2] = ["bare-paper", "coated-paper"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub materials: MaterialsBlock,
    pub geometry: GeometryBlock,
    pub emitter: EmitterBlock,
    #[serde(default)]
    pub numerics: NumericsBlock,
    #[serde(default)]
    pub outputs: OutputsBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialsBlock {
    pub core: DrudeBlock,
    #[serde(default)]
    pub shell: Option<ShellBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrudeBlock {
    pub eps_inf: f64,
    /// eV
    pub omega_p: f64,
    /// eV
    pub gamma: f64,
}

/// Exciton energy, either in eV or tied to the core's dipolar plasmon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExcitonEnergy {
    Value(f64),
    Named(ExcitonAnchor),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExcitonAnchor {
    DipoleResonance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShellBlock {
    pub eps_inf: f64,
    /// Nominal oscillator strength quoted at `omega_ref`.
    pub f: f64,
    /// eV
    pub omega_ref: f64,
    pub omega_ex: ExcitonEnergy,
    /// eV
    pub gamma_ex: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryBlock {
    pub core_radius_nm: f64,
    #[serde(default)]
    pub shell_thickness_nm: f64,
    pub eps_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterBlock {
    pub dipole_debye: f64,
    /// Distance from the metal surface, nm.
    pub gap_nm: f64,
    /// eV
    pub omega_e: f64,
    #[serde(default)]
    pub omega_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsBlock {
    pub n_max: usize,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_step: f64,
    pub t_max: f64,
    pub t_step: f64,
    pub fit_terms: usize,
    pub fit: FitOptions,
    pub memory_convention: MemoryConvention,
    pub tail_limit: f64,
    pub sweep_min: f64,
    pub sweep_max: f64,
    pub sweep_step: f64,
    /// Time step of the swept population map, fs.
    pub sweep_t_step: f64,
    pub classifier: ClassifierThresholds,
}

impl Default for NumericsBlock {
    fn default() -> Self {
        NumericsBlock {
            n_max: crate::mie::DEFAULT_N_MAX,
            omega_min: 2.5,
            omega_max: 4.2,
            omega_step: 1e-3,
            t_max: 100.0,
            t_step: 0.01,
            fit_terms: 8,
            fit: FitOptions::default(),
            memory_convention: MemoryConvention::default(),
            tail_limit: DEFAULT_TAIL_LIMIT,
            sweep_min: 2.8,
            sweep_max: 3.9,
            sweep_step: 0.01,
            sweep_t_step: 0.1,
            classifier: ClassifierThresholds::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputsBlock {
    pub directory: String,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputsBlock {
    fn default() -> Self {
        OutputsBlock { directory: "out".into(), formats: vec![OutputFormat::Csv, OutputFormat::Json] }
    }
}

impl OutputsBlock {
    pub fn wants(&self, f: OutputFormat) -> bool {
        self.formats.contains(&f)
    }
}

/// 1-based line of `key = ...` inside `[section]`, if present in `src`.
fn locate(src: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in src.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            current = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            continue;
        }
        if current == section && t.split('=').next().map(str::trim) == Some(key) {
            return Some(i + 1);
        }
    }
    None
}

struct Checker<'a> {
    src: Option<&'a str>,
}

impl Checker<'_> {
    fn require(&self, ok: bool, section: &str, key: &str, msg: impl std::fmt::Display) -> Result<()> {
        if ok {
            return Ok(());
        }
        let at = match self.src.and_then(|s| locate(s, section, key)) {
            Some(line) => format!("line {line}: "),
            None => String::new(),
        };
        Err(Error::Config(format!("{at}{section}.{key}: {msg}")))
    }
}

impl ScenarioConfig {
    /// Parses and validates a scenario. Parse errors carry the toml crate's
    /// line and column; validation errors name the offending key and line.
    pub fn from_toml_str(src: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate_with(Some(src))?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let src =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&src).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "bare-paper" => Self::from_toml_str(BARE_PRESET),
            "coated-paper" => Self::from_toml_str(COATED_PRESET),
            other => Err(Error::Config(format!("unknown preset {other:?}; available: {}", PRESETS.join(", ")))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with(None)
    }

    fn validate_with(&self, src: Option<&str>) -> Result<()> {
        let c = Checker { src };
        let core = &self.materials.core;
        c.require(core.eps_inf > 0.0, "materials.core", "eps_inf", "must be positive")?;
        c.require(core.omega_p > 0.0, "materials.core", "omega_p", "must be positive")?;
        c.require(core.gamma > 0.0, "materials.core", "gamma", "must be positive")?;
        if let Some(sh) = &self.materials.shell {
            c.require(sh.eps_inf > 0.0, "materials.shell", "eps_inf", "must be positive")?;
            c.require(sh.f >= 0.0, "materials.shell", "f", "must be non-negative")?;
            c.require(sh.omega_ref > 0.0, "materials.shell", "omega_ref", "must be positive")?;
            c.require(sh.gamma_ex > 0.0, "materials.shell", "gamma_ex", "must be positive")?;
            if let ExcitonEnergy::Value(v) = sh.omega_ex {
                c.require(v > 0.0, "materials.shell", "omega_ex", "must be positive")?;
            }
        }
        let g = &self.geometry;
        c.require(g.core_radius_nm > 0.0, "geometry", "core_radius_nm", "must be positive")?;
        c.require(g.shell_thickness_nm >= 0.0, "geometry", "shell_thickness_nm", "must be non-negative")?;
        c.require(g.eps_b >= 1.0, "geometry", "eps_b", "must be at least 1")?;
        let e = &self.emitter;
        c.require(e.dipole_debye > 0.0, "emitter", "dipole_debye", "must be positive")?;
        c.require(
            e.gap_nm > self.effective_thickness(),
            "emitter",
            "gap_nm",
            format!("emitter must sit outside the shell (gap {} nm, shell {} nm)", e.gap_nm, g.shell_thickness_nm),
        )?;
        c.require(e.omega_e > 0.0, "emitter", "omega_e", "must be positive")?;
        let n = &self.numerics;
        c.require(n.n_max >= 1, "numerics", "n_max", "must be at least 1")?;
        c.require(n.omega_min > 0.0, "numerics", "omega_min", "must be positive")?;
        c.require(n.omega_max > n.omega_min, "numerics", "omega_max", "must exceed omega_min")?;
        c.require(
            n.omega_step > 0.0 && n.omega_step < n.omega_max - n.omega_min,
            "numerics",
            "omega_step",
            "must be positive and smaller than the band",
        )?;
        c.require(n.t_max > 0.0, "numerics", "t_max", "must be positive")?;
        c.require(n.t_step > 0.0 && n.t_step <= n.t_max, "numerics", "t_step", "must be in (0, t_max]")?;
        c.require(n.fit_terms >= 1, "numerics", "fit_terms", "must be at least 1")?;
        c.require(n.tail_limit > 0.0, "numerics", "tail_limit", "must be positive")?;
        c.require(
            n.sweep_max > n.sweep_min && n.sweep_min > 0.0,
            "numerics",
            "sweep_max",
            "must exceed sweep_min > 0",
        )?;
        c.require(n.sweep_step > 0.0, "numerics", "sweep_step", "must be positive")?;
        c.require(n.sweep_t_step > 0.0, "numerics", "sweep_t_step", "must be positive")?;
        let th = &n.classifier;
        c.require(th.weak > 0.0 && th.weak <= 1.0, "numerics.classifier", "weak", "must be in (0, 1]")?;
        c.require(
            th.significant > 0.0 && th.significant < 1.0,
            "numerics.classifier",
            "significant",
            "must be in (0, 1)",
        )?;
        c.require(th.step_mev > 0.0, "numerics.classifier", "step_mev", "must be positive")?;
        c.require(!self.outputs.directory.is_empty(), "outputs", "directory", "must not be empty")?;
        Ok(())
    }

    /// A missing shell block means no shell, whatever thickness is given.
    fn effective_thickness(&self) -> f64 {
        if self.materials.shell.is_some() {
            self.geometry.shell_thickness_nm
        } else {
            0.0
        }
    }

    /// Hex SHA-256 of the canonical serialization, for output provenance.
    pub fn hash(&self) -> String {
        let canonical = toml::to_string(self).expect("scenario serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn core(&self) -> DrudeParams {
        let c = &self.materials.core;
        DrudeParams { eps_inf: c.eps_inf, omega_p: c.omega_p, gamma: c.gamma }
    }

    /// Material stack with the exciton energy resolved.
    pub fn stack(&self) -> Result<MaterialStack> {
        let g = &self.geometry;
        let bare = MaterialStack::bare(self.core(), g.core_radius_nm, g.eps_b);
        let stack = match &self.materials.shell {
            Some(sh) if g.shell_thickness_nm > 0.0 => {
                let omega_ex = match sh.omega_ex {
                    ExcitonEnergy::Value(v) => v,
                    ExcitonEnergy::Named(ExcitonAnchor::DipoleResonance) => {
                        dipole_resonance(&bare, self.numerics.omega_min, self.numerics.omega_max)?
                    }
                };
                let shell = LorentzShellParams {
                    eps_inf_sh: sh.eps_inf,
                    f_nominal: sh.f,
                    omega_ex,
                    gamma_ex: sh.gamma_ex,
                    omega_ref: sh.omega_ref,
                };
                MaterialStack::coated(self.core(), shell, g.core_radius_nm, g.shell_thickness_nm, g.eps_b)
            }
            _ => bare,
        };
        stack.validate()?;
        Ok(stack)
    }

    pub fn emitter(&self) -> EmitterConfig {
        let e = &self.emitter;
        EmitterConfig { dipole_debye: e.dipole_debye, gap_nm: e.gap_nm, omega_e: e.omega_e, omega_g: e.omega_g }
    }

    pub fn energy_grid(&self) -> Result<Vec<f64>> {
        let n = &self.numerics;
        energy_grid(n.omega_min, n.omega_max, n.omega_step)
    }

    pub fn sweep_grid(&self) -> Result<Vec<f64>> {
        let n = &self.numerics;
        energy_grid(n.sweep_min, n.sweep_max, n.sweep_step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_load() {
        let bare = ScenarioConfig::preset("bare-paper").unwrap();
        assert!(bare.materials.shell.is_none());
        assert_eq!(bare.stack().unwrap().outer_radius(), 20.0);
        let coated = ScenarioConfig::preset("coated-paper").unwrap();
        let st = coated.stack().unwrap();
        let sh = st.shell.unwrap();
        assert!((sh.omega_ex - 3.0661).abs() < 1e-3);
        assert_eq!(coated.emitter().center_distance(&st), 23.0);
        assert_ne!(bare.hash(), coated.hash());
        assert_eq!(coated.hash(), ScenarioConfig::preset("coated-paper").unwrap().hash());
    }

    #[test]
    fn unknown_keys_rejected_with_line() {
        let src = COATED_PRESET.replace("gap_nm = 3.0", "gap_nm = 3.0\ngpa_nm = 2.0");
        let err = ScenarioConfig::from_toml_str(&src).unwrap_err().to_string();
        assert!(err.contains("gpa_nm") && err.contains("line"), "{err}");
    }

    #[test]
    fn invalid_values_name_the_line() {
        let src = COATED_PRESET.replace("gap_nm = 3.0", "gap_nm = 1.5");
        let line = src.lines().position(|l| l.starts_with("gap_nm")).unwrap() + 1;
        let err = ScenarioConfig::from_toml_str(&src).unwrap_err().to_string();
        assert!(err.contains(&format!("line {line}")) && err.contains("emitter.gap_nm"), "{err}");
    }

    #[test]
    fn omega_ex_forms() {
        let src = COATED_PRESET.replace("omega_ex = \"dipole-resonance\"", "omega_ex = 3.07");
        let cfg = ScenarioConfig::from_toml_str(&src).unwrap();
        assert_eq!(cfg.stack().unwrap().shell.unwrap().omega_ex, 3.07);
        let bad = COATED_PRESET.replace("omega_ex = \"dipole-resonance\"", "omega_ex = \"plasmon\"");
        assert!(ScenarioConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn zero_thickness_shell_is_bare() {
        let src = COATED_PRESET.replace("shell_thickness_nm = 2.0", "shell_thickness_nm = 0.0");
        let cfg = ScenarioConfig::from_toml_str(&src).unwrap();
        let bare = ScenarioConfig::preset("bare-paper").unwrap();
        assert_eq!(cfg.stack().unwrap(), bare.stack().unwrap());
    }
}
