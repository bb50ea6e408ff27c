//! TOML run configuration: species, grating, beam, sampling and output
//! blocks, with validation that names the offending field.

use crate::kernels::{BeamState, GratingGeometry};
use crate::pattern::Normalization;
use crate::wavefunction::{kappa_from_binding_energy, DimerSpecies, RadialWaveFunction};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
}

pub type Result<T> = std::result::Result<T, ConfigError>;

/// Complete run configuration, one TOML file per run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub species: SpeciesConfig,
    pub grating: GratingConfig,
    pub beam: BeamConfig,
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesConfig {
    pub mass1_u: f64,
    pub mass2_u: f64,
    /// Binding energy as k_B·T in mK (negative). Exactly one of this and
    /// `binding_energy_uev`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binding_energy_mk: Option<f64>,
    /// Binding energy in µeV (negative).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binding_energy_uev: Option<f64>,
    pub wavefunction: WavefunctionConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavefunctionConfig {
    /// "zero-range", "analytic" or "table".
    pub model: String,
    /// Zero-range decay constant override; derived from the binding
    /// energy when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_per_nm: Option<f64>,
    /// (weight, decay rate nm⁻¹) pairs for the analytic model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<[f64; 2]>>,
    /// Two-column `r_nm phi` text file for the tabulated model, relative
    /// to the config file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GratingConfig {
    pub period_d_nm: f64,
    pub slit_s_nm: f64,
    pub bar_count_n: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    /// Exactly one of `speed_m_per_s` and `wavenumber_per_nm`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speed_m_per_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavenumber_per_nm: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub k2_max_per_nm: f64,
    pub num_samples: usize,
    #[serde(default = "default_normalization")]
    pub normalization: Normalization,
}

fn default_normalization() -> Normalization {
    Normalization::UnitZerothOrder
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisUnit {
    #[serde(rename = "per-nm")]
    PerNm,
    #[serde(rename = "per-100nm")]
    Per100Nm,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_format")]
    pub format: OutputFormat,
    #[serde(default = "default_out_path")]
    pub path: PathBuf,
    #[serde(default = "default_axis_unit")]
    pub axis_unit: AxisUnit,
}

fn default_format() -> OutputFormat {
    OutputFormat::Csv
}

fn default_out_path() -> PathBuf {
    PathBuf::from("halodiff_out.csv")
}

fn default_axis_unit() -> AxisUnit {
    AxisUnit::PerNm
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            format: default_format(),
            path: default_out_path(),
            axis_unit: default_axis_unit(),
        }
    }
}

/// Physics objects resolved from a validated config.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub species: DimerSpecies,
    pub geometry: GratingGeometry,
    pub beam: BeamState,
    pub k2_max_per_nm: f64,
    pub num_samples: usize,
    pub normalization: Normalization,
    pub output: OutputConfig,
}

impl RunConfig {
    /// Parse a config file. Returns the config together with its parent
    /// directory (table paths resolve against it).
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let config: RunConfig = toml::from_str(&text)?;
        let dir = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok((config, dir))
    }

    /// Binding energy in µeV from whichever field is set.
    fn binding_energy_uev(&self) -> Option<f64> {
        match (
            self.species.binding_energy_uev,
            self.species.binding_energy_mk,
        ) {
            (Some(uev), None) => Some(uev),
            (None, Some(mk)) => Some(crate::constants::mk_to_uev(mk)),
            _ => None,
        }
    }

    /// Validate field constraints and cross-field rules; collects every
    /// problem with its field path.
    pub fn validate(&self, config_dir: &Path) -> Result<()> {
        let mut problems = Vec::new();
        let s = &self.species;
        if !(s.mass1_u > 0.0) {
            problems.push(format!("species.mass1_u: must be positive, got {}", s.mass1_u));
        }
        if !(s.mass2_u > 0.0) {
            problems.push(format!("species.mass2_u: must be positive, got {}", s.mass2_u));
        }
        match (s.binding_energy_uev, s.binding_energy_mk) {
            (Some(_), Some(_)) => problems.push(
                "species: set exactly one of binding_energy_mk and binding_energy_uev, not both"
                    .into(),
            ),
            (None, None) => problems.push(
                "species: one of binding_energy_mk or binding_energy_uev is required".into(),
            ),
            _ => {
                if let Some(e) = self.binding_energy_uev() {
                    if !(e < 0.0) {
                        problems.push(format!(
                            "species.binding_energy: must be negative (bound state), got {e} µeV"
                        ));
                    }
                }
            }
        }

        let wf = &s.wavefunction;
        match wf.model.as_str() {
            "zero-range" => {
                if let Some(k) = wf.kappa_per_nm {
                    if !(k > 0.0) {
                        problems.push(format!(
                            "species.wavefunction.kappa_per_nm: must be positive, got {k}"
                        ));
                    }
                }
                if wf.terms.is_some() || wf.path.is_some() {
                    problems.push(
                        "species.wavefunction: terms/path are not used by the zero-range model"
                            .into(),
                    );
                }
            }
            "analytic" => match &wf.terms {
                Some(terms) if !terms.is_empty() => {
                    for (i, t) in terms.iter().enumerate() {
                        if !(t[1] > 0.0) {
                            problems.push(format!(
                                "species.wavefunction.terms[{i}]: decay rate must be positive, got {}",
                                t[1]
                            ));
                        }
                    }
                }
                _ => problems.push(
                    "species.wavefunction.terms: the analytic model needs (weight, rate) pairs"
                        .into(),
                ),
            },
            "table" => match &wf.path {
                Some(p) => {
                    let resolved = resolve_path(config_dir, p);
                    if !resolved.is_file() {
                        problems.push(format!(
                            "species.wavefunction.path: table file {} does not exist",
                            resolved.display()
                        ));
                    }
                }
                None => problems
                    .push("species.wavefunction.path: the table model needs a file path".into()),
            },
            other => problems.push(format!(
                "species.wavefunction.model: unknown model '{other}' \
                 (expected zero-range, analytic or table)"
            )),
        }

        let g = &self.grating;
        if !(g.period_d_nm > 0.0) {
            problems.push(format!(
                "grating.period_d_nm: must be positive, got {}",
                g.period_d_nm
            ));
        }
        if !(g.slit_s_nm > 0.0 && g.slit_s_nm < g.period_d_nm) {
            problems.push(format!(
                "grating.slit_s_nm: must satisfy 0 < s < d, got s = {} with d = {}",
                g.slit_s_nm, g.period_d_nm
            ));
        }
        if g.bar_count_n < 1 {
            problems.push("grating.bar_count_n: must be at least 1".into());
        }

        match (self.beam.speed_m_per_s, self.beam.wavenumber_per_nm) {
            (Some(v), None) => {
                if !(v > 0.0) {
                    problems.push(format!("beam.speed_m_per_s: must be positive, got {v}"));
                }
            }
            (None, Some(k)) => {
                if !(k > 0.0) {
                    problems.push(format!("beam.wavenumber_per_nm: must be positive, got {k}"));
                }
            }
            (Some(_), Some(_)) => problems.push(
                "beam: set exactly one of speed_m_per_s and wavenumber_per_nm, not both".into(),
            ),
            (None, None) => problems
                .push("beam: one of speed_m_per_s or wavenumber_per_nm is required".into()),
        }

        let sp = &self.sampling;
        if !(sp.k2_max_per_nm > 0.0) {
            problems.push(format!(
                "sampling.k2_max_per_nm: must be positive, got {}",
                sp.k2_max_per_nm
            ));
        }
        if sp.num_samples < 2 {
            problems.push(format!(
                "sampling.num_samples: must be at least 2, got {}",
                sp.num_samples
            ));
        }

        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(problems))
        }
    }

    /// Validate and construct the physics objects.
    pub fn build(&self, config_dir: &Path) -> Result<ResolvedRun> {
        self.validate(config_dir)?;
        let fail = |msg: String| ConfigError::Invalid(vec![msg]);

        let binding_uev = self.binding_energy_uev().expect("validated");
        let s = &self.species;
        let reduced_mass = s.mass1_u * s.mass2_u / (s.mass1_u + s.mass2_u);

        let wavefunction = match s.wavefunction.model.as_str() {
            "zero-range" => {
                let kappa = match s.wavefunction.kappa_per_nm {
                    Some(k) => k,
                    None => kappa_from_binding_energy(binding_uev, reduced_mass)
                        .map_err(|e| fail(format!("species.wavefunction: {e}")))?,
                };
                RadialWaveFunction::zero_range(kappa)
                    .map_err(|e| fail(format!("species.wavefunction: {e}")))?
            }
            "analytic" => {
                let terms: Vec<(f64, f64)> = s
                    .wavefunction
                    .terms
                    .as_ref()
                    .expect("validated")
                    .iter()
                    .map(|t| (t[0], t[1]))
                    .collect();
                RadialWaveFunction::parametrized(&terms)
                    .map_err(|e| fail(format!("species.wavefunction.terms: {e}")))?
            }
            "table" => {
                let path = resolve_path(config_dir, s.wavefunction.path.as_ref().expect("validated"));
                RadialWaveFunction::tabulated_from_file(&path)
                    .map_err(|e| fail(format!("species.wavefunction.path: {e}")))?
            }
            _ => unreachable!("validated"),
        };

        let species = DimerSpecies::new(s.mass1_u, s.mass2_u, binding_uev, wavefunction)
            .map_err(|e| fail(format!("species: {e}")))?;
        let geometry = GratingGeometry::new(
            self.grating.period_d_nm,
            self.grating.slit_s_nm,
            self.grating.bar_count_n,
        )
        .map_err(|e| fail(format!("grating: {e}")))?;
        let beam = match (self.beam.speed_m_per_s, self.beam.wavenumber_per_nm) {
            (Some(v), None) => BeamState::from_speed(species.total_mass_u(), v),
            (None, Some(k)) => BeamState::new(k),
            _ => unreachable!("validated"),
        }
        .map_err(|e| fail(format!("beam: {e}")))?;

        Ok(ResolvedRun {
            species,
            geometry,
            beam,
            k2_max_per_nm: self.sampling.k2_max_per_nm,
            num_samples: self.sampling.num_samples,
            normalization: self.sampling.normalization,
            output: self.output.clone(),
        })
    }
}

fn resolve_path(config_dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        config_dir.join(p)
    }
}
