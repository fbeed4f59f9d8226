use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use sparsefar::config::{load_config, ExperimentConfig, Preset, Resolved, SceneSpec};
use sparsefar::forward::{disk_far_field_analytic, MeasurementSet, ObservationSet};
use sparsefar::geometry::Vec2;
use sparsefar::indicators::IndicatorKind;
use sparsefar::profile::radon_oracle;
use sparsefar::runner::{
    field_artifacts, indicate, json_artifact, measurement_artifact, recover, run_experiment, synthesize,
    with_manifest, Artifact,
};
use sparsefar::{Error, Result};

/// Far-field source imaging experiments.
#[derive(Parser)]
#[command(name = "sparsefar", version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Simulate far-field data and write measurements.csv.
    Synthesize(Common),
    /// Evaluate indicator fields from simulated or recorded data.
    Indicate {
        #[command(flatten)]
        common: Common,
        /// Measurement CSV to use instead of simulating.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Recover corners, circles and edges.
    Recover {
        #[command(flatten)]
        common: Common,
        /// Measurement CSV to use instead of simulating; edges stay undecided.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Full pipeline: data, profiles, fields, report and manifest.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also write stage wall times as JSON to this file.
        #[arg(long)]
        timing: Option<PathBuf>,
    },
    /// Reference values used by the tests.
    #[command(subcommand)]
    Oracle(OracleCmd),
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Line integral of the source over x̂·y = s.
    Radon {
        #[command(flatten)]
        common: Common,
        /// Direction angle in radians.
        #[arg(long, allow_hyphen_values = true)]
        angle: f64,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
    },
    /// Closed-form far field of a uniform disk.
    Disk {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        cx: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        cy: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        amplitude: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        angle: f64,
        #[arg(long)]
        k: f64,
    },
}

#[derive(Args)]
struct Common {
    /// JSON config file; omitted means all defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: the config's `out`, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Indicator to evaluate; repeat for several.
    #[arg(long = "indicator", value_parser = parse_indicator)]
    indicators: Vec<IndicatorKind>,
    #[arg(long = "L")]
    l: Option<usize>,
    #[arg(long = "Lambda")]
    lambda: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
}

fn parse_indicator(s: &str) -> std::result::Result<IndicatorKind, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| {
        "expected one of iminus, iminus_processed, iplus, alhs, iminus_m, iplus_m, iepsilon".to_string()
    })
}

impl Common {
    fn resolve(&self) -> Result<(Resolved, PathBuf)> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::from(e).in_stage(format!("reading {}", p.display())))?;
                load_config(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(name) = &self.preset {
            cfg.scene = SceneSpec::Preset(Preset::from_name(name)?);
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if !self.indicators.is_empty() {
            cfg.indicators = self.indicators.clone();
        }
        cfg.l = self.l.or(cfg.l);
        cfg.lambda = self.lambda.or(cfg.lambda);
        if let Some(v) = self.delta {
            cfg.delta = v;
        }
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        let out = self
            .out
            .clone()
            .or_else(|| cfg.out.clone().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok((cfg.resolve()?, out))
    }
}

fn read_data(path: &Path, r: &Resolved) -> Result<MeasurementSet> {
    let obs = ObservationSet::new(r.l, r.config.gamma)?;
    let file = std::fs::File::open(path).map_err(|e| Error::from(e).in_stage(format!("reading {}", path.display())))?;
    MeasurementSet::read_csv(std::io::BufReader::new(file), obs).map_err(|e| e.in_stage(format!("reading {}", path.display())))
}

fn write_bundle(root: &Path, artifacts: &[Artifact]) -> Result<()> {
    for a in artifacts {
        let path = root.join(&a.path);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::from(e).in_stage(format!("creating {}", dir.display())))?;
        }
        std::fs::write(&path, &a.bytes).map_err(|e| Error::from(e).in_stage(format!("writing {}", path.display())))?;
    }
    eprintln!("wrote {} files to {}", artifacts.len(), root.display());
    Ok(())
}

fn print_complex(v: Complex64) {
    println!("{:.16e} {:.16e}", v.re, v.im);
}

fn execute(cli: Cli) -> Result<()> {
    match cli.verb {
        Verb::Synthesize(common) => {
            let (r, out) = common.resolve()?;
            let s = synthesize(&r)?;
            let files = vec![
                measurement_artifact("measurements.csv", &s.noisy)?,
                measurement_artifact("measurements_clean.csv", &s.clean)?,
            ];
            write_bundle(&out, &with_manifest(&r, files)?)
        }
        Verb::Indicate { common, data } => {
            let (r, out) = common.resolve()?;
            let ms = match data {
                Some(p) => read_data(&p, &r)?,
                None => synthesize(&r)?.noisy,
            };
            let fields = indicate(&r, &ms)?;
            write_bundle(&out, &with_manifest(&r, field_artifacts(&fields)?)?)
        }
        Verb::Recover { common, data } => {
            let (r, out) = common.resolve()?;
            let report = match data {
                Some(p) => recover(&r, &read_data(&p, &r)?, None)?,
                None => {
                    let s = synthesize(&r)?;
                    recover(&r, &s.noisy, Some(&s))?
                }
            };
            for w in &report.warnings {
                log::warn!("{w}");
            }
            eprintln!(
                "{} corners, {} circles, {} annuluses",
                report.corners.len(),
                report.circles.len(),
                report.annuluses.len()
            );
            write_bundle(&out, &with_manifest(&r, vec![json_artifact("report.json", &report)?])?)
        }
        Verb::Run { common, timing } => {
            let (r, out) = common.resolve()?;
            let start = Instant::now();
            let result = run_experiment(&r)?;
            write_bundle(&out, &result.artifacts)?;
            let mut stages: Vec<(String, f64)> =
                result.timings.iter().map(|(n, d)| (n.clone(), d.as_secs_f64())).collect();
            stages.push(("total".into(), start.elapsed().as_secs_f64()));
            for (name, secs) in &stages {
                eprintln!("{name:>12} {secs:8.2} s");
            }
            if let Some(path) = timing {
                let map: serde_json::Map<String, serde_json::Value> =
                    stages.into_iter().map(|(n, s)| (n, serde_json::json!(s))).collect();
                let text = serde_json::to_string_pretty(&map).expect("timings serialize");
                std::fs::write(&path, text + "\n").map_err(|e| Error::from(e).in_stage(format!("writing {}", path.display())))?;
            }
            Ok(())
        }
        Verb::Oracle(OracleCmd::Radon { common, angle, s }) => {
            let (r, _) = common.resolve()?;
            print_complex(radon_oracle(&r.scene, Vec2::from_angle(angle), s)?);
            Ok(())
        }
        Verb::Oracle(OracleCmd::Disk {
            radius,
            cx,
            cy,
            amplitude,
            angle,
            k,
        }) => {
            let v = disk_far_field_analytic(Vec2::new(cx, cy), radius, Complex64::new(amplitude, 0.0), Vec2::from_angle(angle), k)?;
            print_complex(v);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
