//! Experiment configuration: a JSON document naming a preset scene or
//! carrying an inline one, plus acquisition, noise, grid and recovery
//! settings. Every field has a default, so `{}` is a complete config.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::forward::{NoiseModel, ObservationSet, Systematic};
use crate::geometry::{Amplitude, BBox, Component, Region, SourceScene, Vec2};
use crate::indicators::{EvalOptions, IndicatorKind, MuSubtraction, SamplingGrid};
use crate::recover::RecoverParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// `0.5 ≤ |y| ≤ 1`.
    Annulus,
    /// `[−1, 1]²` without the open upper-right quadrant.
    Lshape,
    /// `(x + 13y²/15)² + y² ≤ 1`.
    Kite,
    /// Disk of radius 1 at `(−1, −1)` together with `[0, 1.5]² \ [0, 0.75]²`.
    Mixed,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Annulus, Preset::Lshape, Preset::Kite, Preset::Mixed];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Annulus => "annulus",
            Preset::Lshape => "lshape",
            Preset::Kite => "kite",
            Preset::Mixed => "mixed",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::config("scene", format!("unknown preset {name:?}")))
    }

    /// `(L, Λ)` used when the config does not override them.
    pub fn acquisition(self) -> (usize, usize) {
        match self {
            Preset::Annulus | Preset::Lshape => (25, 30),
            Preset::Kite => (21, 30),
            Preset::Mixed => (15, 20),
        }
    }

    pub fn region(self) -> Region {
        match self {
            Preset::Annulus => Region::Annulus {
                center: Vec2::default(),
                inner: 0.5,
                outer: 1.0,
            },
            Preset::Lshape => Region::Polygon {
                vertices: [(-1.0, -1.0), (1.0, -1.0), (1.0, 0.0), (0.0, 0.0), (0.0, 1.0), (-1.0, 1.0)]
                    .iter()
                    .map(|&(x, y)| Vec2::new(x, y))
                    .collect(),
            },
            Preset::Kite => Region::Implicit {
                g: Expression::parse("(x + 13*y^2/15)^2 + y^2 - 1").expect("kite expression parses"),
                bbox: BBox::new(Vec2::new(-1.25, -1.1), Vec2::new(1.1, 1.1)),
            },
            Preset::Mixed => Region::Union(vec![
                Region::disk(Vec2::new(-1.0, -1.0), 1.0),
                Region::Intersection(vec![
                    Region::rect(Vec2::new(0.0, 0.0), Vec2::new(1.5, 1.5)),
                    Region::Complement(Box::new(Region::rect(Vec2::new(0.0, 0.0), Vec2::new(0.75, 0.75)))),
                ]),
            ]),
        }
    }

    pub fn scene(self, amplitude: Amplitude) -> SourceScene {
        SourceScene::single(self.region(), amplitude)
    }
}

/// A preset name or an inline scene (the `custom` case).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SceneSpec {
    Preset(Preset),
    Inline(SourceScene),
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec::Preset(Preset::Mixed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecoverConfig {
    pub enabled: bool,
    /// Let edge identification request extra directions from the simulator.
    /// Ignored when recovering from recorded data.
    pub use_oracle: bool,
    /// Subtract the systematic mean before recovery when one is configured.
    pub mean_corrected: bool,
    pub params: RecoverParams,
}

impl Default for RecoverConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            use_oracle: true,
            mean_corrected: true,
            params: RecoverParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub scene: SceneSpec,
    /// Replaces the amplitude of every preset component; inline scenes carry
    /// their own.
    pub amplitude: Option<Amplitude>,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    #[serde(rename = "Lambda")]
    pub lambda: Option<usize>,
    pub gamma: f64,
    pub delta: f64,
    pub systematic: Option<Systematic>,
    pub seed: u64,
    pub grid: SamplingGrid,
    pub indicators: Vec<IndicatorKind>,
    pub mu_subtraction: MuSubtraction,
    /// Threshold for the `iepsilon` indicator.
    pub epsilon: f64,
    pub eval: EvalOptions,
    pub recover: RecoverConfig,
    pub source_resolution: usize,
    pub out: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scene: SceneSpec::default(),
            amplitude: None,
            l: None,
            lambda: None,
            gamma: 2.0,
            delta: 0.3,
            systematic: None,
            seed: 0,
            grid: SamplingGrid::default(),
            indicators: vec![IndicatorKind::Iminus, IndicatorKind::IminusProcessed, IndicatorKind::Iplus],
            mu_subtraction: MuSubtraction::Both,
            epsilon: 1.5,
            eval: EvalOptions::default(),
            recover: RecoverConfig::default(),
            source_resolution: 1200,
            out: None,
        }
    }
}

/// A config with the scene built and `L`, `Λ` filled in.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub preset: Option<Preset>,
    pub scene: SourceScene,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "Lambda")]
    pub lambda: usize,
}

impl ExperimentConfig {
    pub fn preset(p: Preset) -> Self {
        Self {
            scene: SceneSpec::Preset(p),
            ..Self::default()
        }
    }

    /// Builds the scene and checks every invariant that can fail later.
    pub fn resolve(&self) -> Result<Resolved> {
        let (preset, scene) = match &self.scene {
            SceneSpec::Preset(p) => (
                Some(*p),
                p.scene(self.amplitude.clone().unwrap_or_else(|| Amplitude::constant(1.0))),
            ),
            SceneSpec::Inline(s) => {
                if self.amplitude.is_some() {
                    return Err(Error::config("amplitude", "only applies to preset scenes"));
                }
                (None, s.clone())
            }
        };
        scene.validate().map_err(|e| Error::config("scene", e.to_string()))?;
        let (l0, lam0) = preset.map(Preset::acquisition).unwrap_or((15, 30));
        let l = self.l.unwrap_or(l0);
        let lambda = self.lambda.unwrap_or(lam0);
        if l == 0 {
            return Err(Error::config("L", "must be at least 1"));
        }
        if lambda == 0 {
            return Err(Error::config("Lambda", "must be at least 1"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 2.0) {
            return Err(Error::config("gamma", format!("must lie in (0, 2], got {}", self.gamma)));
        }
        let pairs = ObservationSet::new(l, self.gamma)?.collinear_pairs();
        if let Some((i, j)) = pairs.first() {
            log::warn!(
                "L = {l}, gamma = {}: {} pairs of collinear directions (first {i} and {j}); they add no new information",
                self.gamma,
                pairs.len()
            );
        }
        self.noise_model()
            .validate()
            .map_err(|e| Error::config("delta", e.to_string()))?;
        self.grid.validate().map_err(|e| Error::config("grid", e.to_string()))?;
        if !(self.epsilon > 0.0) {
            return Err(Error::config("epsilon", "must be positive"));
        }
        if self.eval.oversample == 0 {
            return Err(Error::config("eval.oversample", "must be at least 1"));
        }
        if self.source_resolution < 2 {
            return Err(Error::config("source_resolution", "must be at least 2"));
        }
        Ok(Resolved {
            config: self.clone(),
            preset,
            scene,
            l,
            lambda,
        })
    }

    pub fn noise_model(&self) -> NoiseModel {
        NoiseModel {
            delta: self.delta,
            systematic: self.systematic,
            seed: self.seed,
        }
    }
}

/// Parses a JSON config; errors name the offending path.
pub fn load_config(text: &str) -> Result<ExperimentConfig> {
    let text = if text.trim().is_empty() { "{}" } else { text };
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path == "." { "document".to_string() } else { path }, e.inner().to_string())
    })?;
    cfg.resolve()?;
    Ok(cfg)
}

/// Convenience for presets built in code.
pub fn preset_scene(p: Preset) -> SourceScene {
    p.scene(Amplitude::constant(1.0))
}

/// Inline scene helper: one component per region, all with amplitude 1.
pub fn characteristic(regions: Vec<Region>) -> SourceScene {
    SourceScene::new(
        regions
            .into_iter()
            .map(|region| Component {
                region,
                amplitude: Amplitude::constant(1.0),
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        for text in ["", "{}", "  \n"] {
            let c = load_config(text).unwrap();
            assert_eq!(c, ExperimentConfig::default());
            let r = c.resolve().unwrap();
            assert_eq!(r.preset, Some(Preset::Mixed));
            assert_eq!((r.l, r.lambda), (15, 20));
            assert_eq!(c.grid.p, 601);
            assert_eq!(c.grid.x_lo, -3.0);
            assert_eq!(c.delta, 0.3);
        }
    }

    #[test]
    fn kite_preset_with_overrides() {
        let c = load_config(r#"{"scene": "kite", "L": 21, "Lambda": 30}"#).unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.preset, Some(Preset::Kite));
        assert_eq!((r.l, r.lambda), (21, 30));
        assert!(r.scene.evaluate_source(Vec2::new(0.0, 0.0)).re == 1.0);
        assert!(r.scene.evaluate_source(Vec2::new(-1.1, 0.0)).re == 0.0);
        assert!(r.scene.evaluate_source(Vec2::new(-1.1, 0.8)).re == 1.0);
    }

    #[test]
    fn limited_aperture() {
        let c = load_config(r#"{"scene": "lshape", "gamma": 0.3, "L": 15}"#).unwrap();
        assert_eq!(c.gamma, 0.3);
        assert!(load_config(r#"{"gamma": 2.5}"#).is_err());
    }

    #[test]
    fn unknown_keys_report_their_path() {
        let e = load_config(r#"{"recover": {"params": {"vote": {"rhoo": 1}}}}"#).unwrap_err();
        match e {
            Error::Config { location, message } => {
                assert_eq!(location, "recover.params.vote.rhoo");
                assert!(message.contains("rhoo"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let e = load_config(r#"{"delta": -1}"#).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(load_config(r#"{"scene": "square"}"#).is_err());
        assert!(load_config("[").is_err());
    }

    #[test]
    fn inline_scene() {
        let text = r#"{"scene": {"components": [
            {"region": {"annulus": {"center": [0, 0], "outer": 1}}, "amplitude": {"constant": {"re": 2}}}
        ]}}"#;
        let r = load_config(text).unwrap().resolve().unwrap();
        assert_eq!(r.preset, None);
        assert_eq!(r.scene.evaluate_source(Vec2::default()).re, 2.0);
        let bad = r#"{"scene": {"components": []}, "amplitude": {"constant": {"re": 1}}}"#;
        assert!(load_config(bad).is_err());
    }

    #[test]
    fn presets_validate_and_round_trip() {
        for p in Preset::ALL {
            preset_scene(p).validate().unwrap();
            let c = ExperimentConfig::preset(p);
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(load_config(&json).unwrap(), c);
            assert_eq!(Preset::from_name(p.name()).unwrap(), p);
        }
    }

    #[test]
    fn mixed_ground_truth() {
        let gt = preset_scene(Preset::Mixed).ground_truth();
        assert_eq!(gt.corners.len(), 6);
        assert_eq!(gt.circles.len(), 1);
        assert!((gt.circles[0].radius - 1.0).abs() < 1e-12);
    }
}
