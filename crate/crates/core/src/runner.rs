//! End-to-end experiments: synthesis, noise, indicators, recovery and the
//! artifact bundle.
//!
//! A bundle is a pure function of the config. Everything is produced in
//! memory in a fixed order and written at the end; wall time is returned to
//! the caller rather than stored, so reruns compare byte for byte.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::config::Resolved;
use crate::error::{Error, Result};
use crate::forward::{apply_noise, synthesize_with, MeasurementSet, ObservationSet, SourceQuadrature, WaveBand};
use crate::geometry::Vec2;
use crate::indicators::{
    eval_i_alhs, eval_i_epsilon, eval_i_minus, eval_i_plus, eval_modified, sobel_process, subtract_mean,
    IndicatorField, IndicatorKind,
};
use crate::io::{write_field_csv, write_pgm};
use crate::profile::{profile_from_far_field, SGrid};
use crate::recover::{reconstruct, DirectionOracle, ReconstructionReport, SimulationOracle};

/// One output file, path relative to the bundle root.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub path: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    pub report: Option<ReconstructionReport>,
    pub fields: Vec<IndicatorField>,
    pub timings: Vec<(String, Duration)>,
}

impl RunOutput {
    /// Writes every artifact under `root`, creating directories as needed.
    pub fn write_to(&self, root: &Path) -> Result<Vec<PathBuf>> {
        let mut written = Vec::with_capacity(self.artifacts.len());
        for a in &self.artifacts {
            let path = root.join(&a.path);
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&path, &a.bytes)?;
            written.push(path);
        }
        Ok(written)
    }

    pub fn artifact(&self, path: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.path == path)
    }
}

/// Clean and noisy data for a resolved experiment, plus the quadrature so
/// that recovery can request more directions.
pub struct Synthesis {
    pub quad: SourceQuadrature,
    pub band: WaveBand,
    pub clean: MeasurementSet,
    pub noisy: MeasurementSet,
}

pub fn synthesize(r: &Resolved) -> Result<Synthesis> {
    let obs = ObservationSet::new(r.l, r.config.gamma).map_err(|e| e.in_stage("observation set"))?;
    let band = WaveBand::new(r.lambda).map_err(|e| e.in_stage("wave band"))?;
    let quad = SourceQuadrature::new(&r.scene, r.config.source_resolution).map_err(|e| e.in_stage("quadrature"))?;
    let clean = synthesize_with(&quad, &obs, band);
    let noisy = apply_noise(&clean, &r.config.noise_model()).map_err(|e| e.in_stage("noise"))?;
    Ok(Synthesis {
        quad,
        band,
        clean,
        noisy,
    })
}

fn systematic_mean(r: &Resolved) -> f64 {
    r.config.systematic.map(|s| s.mu).unwrap_or(0.0)
}

/// The selected indicator fields, in config order.
pub fn indicate(r: &Resolved, ms: &MeasurementSet) -> Result<Vec<IndicatorField>> {
    let c = &r.config;
    let grid = &c.grid;
    let opts = &c.eval;
    let mut out: Vec<IndicatorField> = Vec::new();
    for &kind in &c.indicators {
        if out.iter().any(|f| f.kind == kind) {
            continue;
        }
        let stage = |e: Error| e.in_stage(format!("indicator {}", kind.name()));
        let field = match kind {
            IndicatorKind::Iminus => eval_i_minus(ms, grid, opts).map_err(stage)?,
            IndicatorKind::IminusProcessed => sobel_process(ms, grid, opts).map_err(stage)?,
            IndicatorKind::Iplus => eval_i_plus(ms, grid, opts).map_err(stage)?,
            IndicatorKind::Alhs => eval_i_alhs(ms, grid, opts).map_err(stage)?,
            IndicatorKind::IminusM | IndicatorKind::IplusM => {
                let (m, p) = eval_modified(ms, grid, systematic_mean(r), c.mu_subtraction, opts).map_err(stage)?;
                if kind == IndicatorKind::IminusM {
                    m
                } else {
                    p
                }
            }
            IndicatorKind::Iepsilon => {
                let plus = match out.iter().find(|f| f.kind == IndicatorKind::Iplus) {
                    Some(f) => f.clone(),
                    None => eval_i_plus(ms, grid, opts).map_err(stage)?,
                };
                eval_i_epsilon(&r.scene, &plus, c.epsilon).map_err(stage)?
            }
        };
        out.push(field);
    }
    Ok(out)
}

/// Simulated directions with the same noise model, mean-corrected when the
/// recorded data are.
struct CorrectedOracle<'a> {
    inner: &'a SimulationOracle,
    shift: Complex64,
}

impl DirectionOracle for CorrectedOracle<'_> {
    fn wavenumbers(&self) -> &[f64] {
        self.inner.wavenumbers()
    }

    fn measure(&self, xhat: Vec2) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let (mut p, mut m) = self.inner.measure(xhat)?;
        p.iter_mut().chain(m.iter_mut()).for_each(|v| *v -= self.shift);
        Ok((p, m))
    }
}

/// Support recovery. Data are mean-corrected first when the config carries a
/// systematic error and `recover.mean_corrected` is set. `sim` enables edge
/// identification through fresh simulated directions.
pub fn recover(r: &Resolved, ms: &MeasurementSet, sim: Option<&Synthesis>) -> Result<ReconstructionReport> {
    let rc = &r.config.recover;
    let correct = rc.mean_corrected && r.config.systematic.is_some();
    let data = if correct {
        subtract_mean(ms, systematic_mean(r), r.config.mu_subtraction)
    } else {
        ms.clone()
    };
    let oracle = match sim {
        Some(s) if rc.use_oracle => Some(
            SimulationOracle::new(s.quad.clone(), s.band, Some(r.config.noise_model()))
                .map_err(|e| e.in_stage("oracle"))?,
        ),
        _ => None,
    };
    let corrected = oracle.as_ref().map(|o| CorrectedOracle {
        inner: o,
        shift: if correct {
            r.config.mu_subtraction.shift(systematic_mean(r))
        } else {
            Complex64::new(0.0, 0.0)
        },
    });
    reconstruct(
        &data,
        &r.config.grid,
        &rc.params,
        corrected.as_ref().map(|o| o as &dyn DirectionOracle),
    )
    .map_err(|e| e.in_stage("recover"))
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v).map_err(|e| Error::Numerical(format!("serialization: {e}")))?;
    b.push(b'\n');
    Ok(b)
}

pub fn json_artifact<T: Serialize>(path: &str, v: &T) -> Result<Artifact> {
    Ok(Artifact {
        path: path.into(),
        bytes: json_bytes(v)?,
    })
}

pub fn measurement_artifact(path: &str, ms: &MeasurementSet) -> Result<Artifact> {
    let mut bytes = Vec::new();
    ms.write_csv(&mut bytes)?;
    Ok(Artifact {
        path: path.into(),
        bytes,
    })
}

/// `fields/<kind>.csv` and `fields/<kind>.pgm` for each field.
pub fn field_artifacts(fields: &[IndicatorField]) -> Result<Vec<Artifact>> {
    let mut out = Vec::with_capacity(2 * fields.len());
    for f in fields {
        let mut csv = Vec::new();
        write_field_csv(f, &mut csv)?;
        let mut pgm = Vec::new();
        write_pgm(f, &mut pgm)?;
        out.push(Artifact {
            path: format!("fields/{}.csv", f.kind.name()),
            bytes: csv,
        });
        out.push(Artifact {
            path: format!("fields/{}.pgm", f.kind.name()),
            bytes: pgm,
        });
    }
    Ok(out)
}

/// Appends `manifest.json` describing `artifacts`.
pub fn with_manifest(r: &Resolved, mut artifacts: Vec<Artifact>) -> Result<Vec<Artifact>> {
    let m = manifest(r, &artifacts);
    artifacts.push(json_artifact("manifest.json", &m)?);
    Ok(artifacts)
}

/// Everything that affects output, echoed for the manifest.
pub fn manifest(r: &Resolved, files: &[Artifact]) -> serde_json::Value {
    json!({
        "package": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "preset": r.preset.map(|p| p.name()),
        "L": r.l,
        "Lambda": r.lambda,
        "wavenumbers": { "first": 0.5, "step": WaveBand::SPACING, "count": 2 * r.lambda },
        "scene": r.scene,
        "config": r.config,
        "rng": "ChaCha8, seeded from the config seed; draws in (l, sign, m) order",
        "files": files.iter().map(|a| json!({ "path": a.path, "bytes": a.bytes.len() })).collect::<Vec<_>>(),
    })
}

/// Runs the full pipeline on simulated data.
pub fn run_experiment(r: &Resolved) -> Result<RunOutput> {
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timings: &mut Vec<(String, Duration)>| {
        timings.push((name.to_string(), clock.elapsed()));
        clock = Instant::now();
    };

    let sim = synthesize(r)?;
    lap("synthesize", &mut timings);
    let mut artifacts = vec![
        measurement_artifact("measurements.csv", &sim.noisy)?,
        measurement_artifact("measurements_clean.csv", &sim.clean)?,
    ];

    let sgrid = SGrid::for_band(sim.band);
    for l in 0..r.l {
        let p = profile_from_far_field(&sim.noisy.direction(l), &sgrid, true).map_err(|e| e.in_stage("profile"))?;
        let mut b = Vec::new();
        p.write_csv(&mut b)?;
        artifacts.push(Artifact {
            path: format!("profiles/direction_{l:03}.csv"),
            bytes: b,
        });
    }
    lap("profiles", &mut timings);

    let fields = indicate(r, &sim.noisy)?;
    artifacts.extend(field_artifacts(&fields)?);
    lap("indicators", &mut timings);

    let report = if r.config.recover.enabled {
        let rep = recover(r, &sim.noisy, Some(&sim))?;
        artifacts.push(json_artifact("report.json", &rep)?);
        Some(rep)
    } else {
        None
    };
    lap("recover", &mut timings);

    Ok(RunOutput {
        artifacts: with_manifest(r, artifacts)?,
        report,
        fields,
        timings,
    })
}
