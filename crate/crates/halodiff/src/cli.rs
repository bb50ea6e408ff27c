//! Subcommand runners behind the `halodiff` binary: load a config, run
//! the requested computation, emit CSV/JSON artifacts.
//!
//! Numbers are written with 17 significant digits ({:.16e}), so output
//! files are byte-stable for a fixed config and library version.

use crate::config::{AxisUnit, ConfigError, OutputFormat, ResolvedRun, RunConfig};
use crate::kernels::{
    self, molecular_bar_amplitude, molecular_bar_amplitude_bruteforce, point_bar_amplitude,
    regime_check, AmplitudeMode, KernelError,
};
use crate::pattern::{self, DiffractionPattern, PatternError, PeakFindings, PeakRatio};
use serde::Serialize;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("failed to write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl CliError {
    /// Process exit code: 2 config/usage, 3 numerical/runtime failure.
    /// (Oracle mismatches exit 4 from the binary; they are reported as
    /// data, not as an error variant.)
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Pattern(_) | CliError::Kernel(_) | CliError::Write { .. }
            | CliError::ThreadPool(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            if n == 0 {
                return Err(CliError::Usage("--threads must be at least 1".into()));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::ThreadPool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let io_err = |source: std::io::Error| CliError::Write {
        path: path.display().to_string(),
        source,
    };
    std::fs::write(&tmp, contents).map_err(io_err)?;
    if let Err(source) = std::fs::rename(&tmp, path) {
        let _ = std::fs::remove_file(&tmp);
        return Err(io_err(source));
    }
    Ok(())
}

fn load(config_path: &Path) -> Result<(RunConfig, ResolvedRun)> {
    let (config, dir) = RunConfig::load(config_path)?;
    let run = config.build(&dir)?;
    Ok((config, run))
}

fn output_path(run: &ResolvedRun, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf).unwrap_or_else(|| run.output.path.clone())
}

fn output_format(run: &ResolvedRun, format: Option<OutputFormat>) -> OutputFormat {
    format.unwrap_or(run.output.format)
}

/// Highest diffraction order inside the sampled k₂ range.
fn max_order_in_range(run: &ResolvedRun) -> u32 {
    (run.k2_max_per_nm * run.geometry.period_d_nm() / (2.0 * PI)).floor() as u32
}

#[derive(Debug, Serialize)]
struct PeakRow {
    order: u32,
    k2_per_nm: f64,
    k2_per_100nm: f64,
    intensity_mol: f64,
    intensity_pp: f64,
    ratio_mol_over_pp: Option<f64>,
    pp_zero: bool,
}

fn peak_rows(findings: &PeakFindings) -> Vec<PeakRow> {
    findings
        .reports
        .iter()
        .map(|r| {
            let (ratio, pp_zero) = match r.ratio_mol_over_pp {
                PeakRatio::Finite(v) => (Some(v), false),
                PeakRatio::PointParticleZero => (None, true),
            };
            PeakRow {
                order: r.order,
                k2_per_nm: r.location_k2,
                k2_per_100nm: r.location_k2 * 100.0,
                intensity_mol: r.intensity_mol,
                intensity_pp: r.intensity_pp,
                ratio_mol_over_pp: ratio,
                pp_zero,
            }
        })
        .collect()
}

fn peaks_csv(rows: &[PeakRow]) -> String {
    let mut out =
        String::from("order,k2_per_nm,k2_per_100nm,I_mol,I_pp,ratio_mol_over_pp\n");
    for r in rows {
        let ratio = match r.ratio_mol_over_pp {
            Some(v) => fmt(v),
            None => "pp-zero".to_string(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.order,
            fmt(r.k2_per_nm),
            fmt(r.k2_per_100nm),
            fmt(r.intensity_mol),
            fmt(r.intensity_pp),
            ratio
        ));
    }
    out
}

fn pattern_csv(pattern: &DiffractionPattern) -> String {
    let mut out = String::from("k2_per_nm,k2_per_100nm,I_mol,I_pp,H_sq\n");
    for s in pattern.samples() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt(s.k2),
            fmt(s.k2 * 100.0),
            fmt(s.intensity_mol),
            fmt(s.intensity_pp),
            fmt(s.h_sq)
        ));
    }
    out
}

#[derive(Debug, Serialize)]
struct SampleRow {
    k2_per_nm: f64,
    k2_per_100nm: f64,
    intensity_mol: f64,
    intensity_pp: f64,
    h_sq: f64,
}

#[derive(Debug, Serialize)]
struct PatternDocument<'a> {
    version: &'a str,
    config: &'a RunConfig,
    axis_unit: AxisUnit,
    normalization: pattern::Normalization,
    regime_warnings: Vec<String>,
    peaks: Vec<PeakRow>,
    truncated_at_order: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<Vec<SampleRow>>,
}

/// Artifacts produced by a pattern run.
#[derive(Debug)]
pub struct PatternArtifacts {
    pub data_path: PathBuf,
    /// JSON sidecar next to the CSV (absent when the data file itself is
    /// JSON).
    pub sidecar_path: Option<PathBuf>,
    pub warnings: Vec<String>,
}

/// `pattern`: sample the full diffraction pattern, write CSV (plus JSON
/// sidecar with peaks, warnings, config echo and version) or a single
/// JSON document.
pub fn run_pattern(
    config_path: &Path,
    out: Option<&Path>,
    format: Option<OutputFormat>,
    threads: Option<usize>,
) -> Result<PatternArtifacts> {
    let (config, run) = load(config_path)?;
    let pattern = with_pool(threads, || {
        pattern::sample_pattern(
            &run.species,
            &run.geometry,
            &run.beam,
            run.k2_max_per_nm,
            run.num_samples,
            run.normalization,
        )
    })??;
    let findings = pattern::find_peaks(&pattern, max_order_in_range(&run))?;
    let warnings: Vec<String> = regime_check(&run.species, &run.geometry, &run.beam)
        .iter()
        .map(|w| w.to_string())
        .collect();

    let path = output_path(&run, out);
    match output_format(&run, format) {
        OutputFormat::Csv => {
            write_atomic(&path, &pattern_csv(&pattern))?;
            let sidecar = path.with_extension("json");
            let doc = PatternDocument {
                version: VERSION,
                config: &config,
                axis_unit: run.output.axis_unit,
                normalization: pattern.normalization(),
                regime_warnings: warnings.clone(),
                peaks: peak_rows(&findings),
                truncated_at_order: findings.truncated_at_order,
                samples: None,
            };
            let json = serde_json::to_string_pretty(&doc).expect("serializable document");
            write_atomic(&sidecar, &json)?;
            Ok(PatternArtifacts {
                data_path: path,
                sidecar_path: Some(sidecar),
                warnings,
            })
        }
        OutputFormat::Json => {
            let samples = pattern
                .samples()
                .iter()
                .map(|s| SampleRow {
                    k2_per_nm: s.k2,
                    k2_per_100nm: s.k2 * 100.0,
                    intensity_mol: s.intensity_mol,
                    intensity_pp: s.intensity_pp,
                    h_sq: s.h_sq,
                })
                .collect();
            let doc = PatternDocument {
                version: VERSION,
                config: &config,
                axis_unit: run.output.axis_unit,
                normalization: pattern.normalization(),
                regime_warnings: warnings.clone(),
                peaks: peak_rows(&findings),
                truncated_at_order: findings.truncated_at_order,
                samples: Some(samples),
            };
            let json = serde_json::to_string_pretty(&doc).expect("serializable document");
            write_atomic(&path, &json)?;
            Ok(PatternArtifacts {
                data_path: path,
                sidecar_path: None,
                warnings,
            })
        }
    }
}

/// `bar`: single-bar intensities |t_mol|² and |t_pp|² over the k₂ range
/// (reduced units, no grating function).
pub fn run_bar(
    config_path: &Path,
    out: Option<&Path>,
    format: Option<OutputFormat>,
    threads: Option<usize>,
) -> Result<PathBuf> {
    let (_, run) = load(config_path)?;
    let grid: Vec<f64> = (0..run.num_samples)
        .map(|i| run.k2_max_per_nm * i as f64 / (run.num_samples - 1) as f64)
        .collect();
    let rows: Vec<(f64, f64, f64)> = with_pool(threads, || {
        use rayon::prelude::*;
        grid.par_iter()
            .map(|&k2| {
                let mol = molecular_bar_amplitude(
                    &run.species,
                    &run.geometry,
                    &run.beam,
                    k2,
                    AmplitudeMode::Reduced,
                )?;
                let pp = point_bar_amplitude(k2, &run.geometry, &run.beam, AmplitudeMode::Reduced);
                Ok((k2, mol.intensity(), pp.intensity()))
            })
            .collect::<kernels::Result<Vec<_>>>()
    })??;

    let path = output_path(&run, out);
    match output_format(&run, format) {
        OutputFormat::Csv => {
            let mut csv = String::from("k2_per_nm,k2_per_100nm,t2_mol,t2_pp\n");
            for (k2, mol, pp) in &rows {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt(*k2),
                    fmt(k2 * 100.0),
                    fmt(*mol),
                    fmt(*pp)
                ));
            }
            write_atomic(&path, &csv)?;
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct BarRow {
                k2_per_nm: f64,
                k2_per_100nm: f64,
                t2_mol: f64,
                t2_pp: f64,
            }
            #[derive(Serialize)]
            struct BarDocument<'a> {
                version: &'a str,
                rows: Vec<BarRow>,
            }
            let doc = BarDocument {
                version: VERSION,
                rows: rows
                    .iter()
                    .map(|&(k2, mol, pp)| BarRow {
                        k2_per_nm: k2,
                        k2_per_100nm: k2 * 100.0,
                        t2_mol: mol,
                        t2_pp: pp,
                    })
                    .collect(),
            };
            write_atomic(&path, &serde_json::to_string_pretty(&doc).expect("serializable"))?;
        }
    }
    Ok(path)
}

/// `formfactor`: F(q) over q ∈ [0, k2_max].
pub fn run_formfactor(
    config_path: &Path,
    out: Option<&Path>,
    format: Option<OutputFormat>,
    threads: Option<usize>,
) -> Result<PathBuf> {
    let (_, run) = load(config_path)?;
    let wf = run.species.wavefunction().clone();
    let grid: Vec<f64> = (0..run.num_samples)
        .map(|i| run.k2_max_per_nm * i as f64 / (run.num_samples - 1) as f64)
        .collect();
    let rows: Vec<(f64, f64)> = with_pool(threads, || {
        use rayon::prelude::*;
        grid.par_iter()
            .map(|&q| Ok((q, kernels::form_factor(&wf, &wf, q)?)))
            .collect::<kernels::Result<Vec<_>>>()
    })??;

    let path = output_path(&run, out);
    match output_format(&run, format) {
        OutputFormat::Csv => {
            let mut csv = String::from("q_per_nm,q_per_100nm,form_factor\n");
            for (q, f) in &rows {
                csv.push_str(&format!("{},{},{}\n", fmt(*q), fmt(q * 100.0), fmt(*f)));
            }
            write_atomic(&path, &csv)?;
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct FormFactorRow {
                q_per_nm: f64,
                q_per_100nm: f64,
                form_factor: f64,
            }
            #[derive(Serialize)]
            struct FormFactorDocument<'a> {
                version: &'a str,
                rows: Vec<FormFactorRow>,
            }
            let doc = FormFactorDocument {
                version: VERSION,
                rows: rows
                    .iter()
                    .map(|&(q, f)| FormFactorRow {
                        q_per_nm: q,
                        q_per_100nm: q * 100.0,
                        form_factor: f,
                    })
                    .collect(),
            };
            write_atomic(&path, &serde_json::to_string_pretty(&doc).expect("serializable"))?;
        }
    }
    Ok(path)
}

/// `peaks`: per-order comparison table.
pub fn run_peaks(
    config_path: &Path,
    out: Option<&Path>,
    format: Option<OutputFormat>,
    max_order: Option<u32>,
    threads: Option<usize>,
) -> Result<PathBuf> {
    let (config, run) = load(config_path)?;
    let pattern = with_pool(threads, || {
        pattern::sample_pattern(
            &run.species,
            &run.geometry,
            &run.beam,
            run.k2_max_per_nm,
            run.num_samples,
            run.normalization,
        )
    })??;
    let findings = pattern::find_peaks(&pattern, max_order.unwrap_or_else(|| max_order_in_range(&run)))?;
    let rows = peak_rows(&findings);

    let path = output_path(&run, out);
    match output_format(&run, format) {
        OutputFormat::Csv => write_atomic(&path, &peaks_csv(&rows))?,
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct PeaksDocument<'a> {
                version: &'a str,
                config: &'a RunConfig,
                truncated_at_order: Option<u32>,
                peaks: Vec<PeakRow>,
            }
            let doc = PeaksDocument {
                version: VERSION,
                config: &config,
                truncated_at_order: findings.truncated_at_order,
                peaks: rows,
            };
            write_atomic(&path, &serde_json::to_string_pretty(&doc).expect("serializable"))?;
        }
    }
    Ok(path)
}

/// `check`: regime warnings as text lines (empty when clean).
pub fn run_check(config_path: &Path) -> Result<Vec<String>> {
    let (_, run) = load(config_path)?;
    Ok(regime_check(&run.species, &run.geometry, &run.beam)
        .iter()
        .map(|w| w.to_string())
        .collect())
}

/// One fast-vs-brute-force comparison point.
#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub k2_per_nm: f64,
    pub fast_re: f64,
    pub fast_im: f64,
    pub brute_re: f64,
    pub brute_im: f64,
    pub rel_diff: f64,
}

/// Outcome of the `oracle` subcommand.
#[derive(Debug)]
pub struct OracleOutcome {
    pub rows: Vec<OracleRow>,
    pub worst_rel_diff: f64,
    /// True when every point agrees to 1e-3.
    pub passed: bool,
    pub csv_path: Option<PathBuf>,
}

pub const ORACLE_MAX_POINTS: usize = 32;
pub const ORACLE_FAIL_THRESHOLD: f64 = 1e-3;

/// `oracle`: compare the symmetry-reduced amplitude against the 3D
/// brute-force evaluation at explicit k₂ points and/or peak orders.
pub fn run_oracle(
    config_path: &Path,
    k2_points: &[f64],
    orders: &[u32],
    out: Option<&Path>,
    threads: Option<usize>,
) -> Result<OracleOutcome> {
    let (_, run) = load(config_path)?;
    let mut points: Vec<f64> = k2_points.to_vec();
    points.extend(orders.iter().map(|&n| run.geometry.peak_position(n)));
    if points.is_empty() {
        points = (1..=3).map(|n| run.geometry.peak_position(n)).collect();
    }
    if points.len() > ORACLE_MAX_POINTS {
        return Err(CliError::Usage(format!(
            "{} comparison points requested; the 3D quadrature budget allows at most {}",
            points.len(),
            ORACLE_MAX_POINTS
        )));
    }

    let rows: Vec<OracleRow> = with_pool(threads, || -> kernels::Result<Vec<OracleRow>> {
        let mut rows = Vec::with_capacity(points.len());
        for &k2 in &points {
            let fast = molecular_bar_amplitude(
                &run.species,
                &run.geometry,
                &run.beam,
                k2,
                AmplitudeMode::Reduced,
            )?
            .value;
            let brute = molecular_bar_amplitude_bruteforce(
                &run.species,
                &run.geometry,
                &run.beam,
                k2,
                AmplitudeMode::Reduced,
            )?
            .value;
            let scale = fast.norm().max(brute.norm());
            let rel_diff = if scale > 0.0 {
                (fast - brute).norm() / scale
            } else {
                0.0
            };
            rows.push(OracleRow {
                k2_per_nm: k2,
                fast_re: fast.re,
                fast_im: fast.im,
                brute_re: brute.re,
                brute_im: brute.im,
                rel_diff,
            });
        }
        Ok(rows)
    })??;

    let worst = rows.iter().map(|r| r.rel_diff).fold(0.0, f64::max);
    let csv_path = match out {
        Some(path) => {
            let mut csv =
                String::from("k2_per_nm,fast_re,fast_im,brute_re,brute_im,rel_diff\n");
            for r in &rows {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    fmt(r.k2_per_nm),
                    fmt(r.fast_re),
                    fmt(r.fast_im),
                    fmt(r.brute_re),
                    fmt(r.brute_im),
                    fmt(r.rel_diff)
                ));
            }
            write_atomic(path, &csv)?;
            Some(path.to_path_buf())
        }
        None => None,
    };

    Ok(OracleOutcome {
        rows,
        worst_rel_diff: worst,
        passed: worst <= ORACLE_FAIL_THRESHOLD,
        csv_path,
    })
}
