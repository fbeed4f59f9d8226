//! Direct sampling indicator fields on a rectangular sampling grid.
//!
//! Every per-direction quantity depends on `z` only through `s = x̂·z`, so
//! it is evaluated once on a fine 1D `s`-grid and looked up by nearest
//! sample.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{DirectionData, MeasurementSet};
use crate::geometry::{SourceScene, Vec2};
use crate::profile::{band_sum, minus_indicator};

/// `P × Q` equispaced points over `[x_lo, x_hi] × [y_lo, y_hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingGrid {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub p: usize,
    pub q: usize,
}

impl Default for SamplingGrid {
    fn default() -> Self {
        Self {
            x_lo: -3.0,
            x_hi: 3.0,
            y_lo: -3.0,
            y_hi: 3.0,
            p: 601,
            q: 601,
        }
    }
}

impl SamplingGrid {
    pub fn validate(&self) -> Result<()> {
        if self.p < 3 || self.q < 3 {
            return Err(Error::arg(format!(
                "sampling grid needs P, Q >= 3, got {} x {}",
                self.p, self.q
            )));
        }
        let finite = [self.x_lo, self.x_hi, self.y_lo, self.y_hi]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_lo >= self.x_hi || self.y_lo >= self.y_hi {
            return Err(Error::arg("sampling grid bounds must be finite and increasing"));
        }
        if self.p.saturating_mul(self.q) > 1 << 26 {
            return Err(Error::arg("sampling grid has too many points"));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_hi - self.x_lo) / (self.p - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_hi - self.y_lo) / (self.q - 1) as f64
    }

    pub fn x(&self, p: usize) -> f64 {
        self.x_lo + self.dx() * p as f64
    }

    pub fn y(&self, q: usize) -> f64 {
        self.y_lo + self.dy() * q as f64
    }

    /// Grid point for zero-based indices.
    pub fn point(&self, p: usize, q: usize) -> Vec2 {
        Vec2::new(self.x(p), self.y(q))
    }

    pub fn len(&self) -> usize {
        self.p * self.q
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, p: usize, q: usize) -> usize {
        q * self.p + p
    }

    /// Nearest grid indices of a point, if it lies inside the grid.
    pub fn locate(&self, z: Vec2) -> Option<(usize, usize)> {
        let fp = ((z.x - self.x_lo) / self.dx()).round();
        let fq = ((z.y - self.y_lo) / self.dy()).round();
        (fp >= 0.0 && fq >= 0.0 && fp < self.p as f64 && fq < self.q as f64)
            .then_some((fp as usize, fq as usize))
    }

    fn s_range(&self, xhat: Vec2) -> (f64, f64) {
        let c = [
            Vec2::new(self.x_lo, self.y_lo),
            Vec2::new(self.x_hi, self.y_lo),
            Vec2::new(self.x_lo, self.y_hi),
            Vec2::new(self.x_hi, self.y_hi),
        ];
        let s: Vec<f64> = c.iter().map(|v| xhat.dot(*v)).collect();
        (
            s.iter().cloned().fold(f64::INFINITY, f64::min),
            s.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorKind {
    Iminus,
    IminusProcessed,
    Iplus,
    Alhs,
    IminusM,
    IplusM,
    Iepsilon,
}

impl IndicatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            IndicatorKind::Iminus => "iminus",
            IndicatorKind::IminusProcessed => "iminus_processed",
            IndicatorKind::Iplus => "iplus",
            IndicatorKind::Alhs => "alhs",
            IndicatorKind::IminusM => "iminus_m",
            IndicatorKind::IplusM => "iplus_m",
            IndicatorKind::Iepsilon => "iepsilon",
        }
    }
}

/// How the systematic mean is removed from complex data.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuSubtraction {
    /// `u − μ(1 + i)`
    #[default]
    Both,
    /// `u − μ`
    RealOnly,
}

impl MuSubtraction {
    /// The complex value removed from every datum.
    pub fn shift(self, mu: f64) -> Complex64 {
        match self {
            MuSubtraction::Both => Complex64::new(mu, mu),
            MuSubtraction::RealOnly => Complex64::new(mu, 0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatorField {
    pub grid: SamplingGrid,
    pub kind: IndicatorKind,
    /// Row-major, `q` outer, `p` inner.
    pub values: Vec<f64>,
    /// For `Iplus`-type fields: `max|imag| / max|real|`.
    pub imag_residual: Option<f64>,
}

impl IndicatorField {
    pub fn at(&self, p: usize, q: usize) -> f64 {
        self.values[self.grid.index(p, q)]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Options shared by the grid evaluators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalOptions {
    /// 1D samples per grid spacing along `s`.
    pub oversample: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { oversample: 4 }
    }
}

/// A 1D function of `s` sampled finely enough for nearest lookup.
struct Line1d {
    s0: f64,
    step: f64,
    values: Vec<Complex64>,
}

impl Line1d {
    fn new(
        grid: &SamplingGrid,
        xhat: Vec2,
        opts: &EvalOptions,
        f: impl Fn(&[f64]) -> Result<Vec<Complex64>>,
    ) -> Result<Self> {
        let (lo, hi) = grid.s_range(xhat);
        let step = grid.dx().min(grid.dy()) / opts.oversample.max(1) as f64;
        let n = ((hi - lo) / step).ceil() as usize + 1;
        let s: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
        Ok(Self {
            s0: lo,
            step,
            values: f(&s)?,
        })
    }

    fn lookup(&self, s: f64) -> Complex64 {
        let i = ((s - self.s0) / self.step).round().max(0.0) as usize;
        self.values[i.min(self.values.len() - 1)]
    }

    fn broadcast(&self, grid: &SamplingGrid, xhat: Vec2, mut f: impl FnMut(usize, Complex64)) {
        for q in 0..grid.q {
            let y = grid.y(q);
            for p in 0..grid.p {
                let s = xhat.x * grid.x(p) + xhat.y * y;
                f(grid.index(p, q), self.lookup(s));
            }
        }
    }
}

fn check_directions(ms: &MeasurementSet) -> Result<()> {
    if ms.obs.count == 0 {
        return Err(Error::arg("no observation directions"));
    }
    Ok(())
}

fn per_direction<F>(ms: &MeasurementSet, grid: &SamplingGrid, opts: &EvalOptions, f: F) -> Result<Vec<Line1d>>
where
    F: Fn(&DirectionData, &[f64]) -> Result<Vec<Complex64>> + Sync,
{
    grid.validate()?;
    check_directions(ms)?;
    (0..ms.obs.count)
        .into_par_iter()
        .map(|l| {
            let d = ms.direction(l);
            Line1d::new(grid, d.xhat, opts, |s| f(&d, s))
        })
        .collect()
}

/// `𝓘⁻_x̂(z)` for one direction, as a complex matrix.
pub fn eval_minus_directional(
    ms: &MeasurementSet,
    l: usize,
    grid: &SamplingGrid,
    opts: &EvalOptions,
) -> Result<Vec<Complex64>> {
    grid.validate()?;
    if l >= ms.obs.count {
        return Err(Error::arg(format!("direction index {l} out of range")));
    }
    let d = ms.direction(l);
    let line = Line1d::new(grid, d.xhat, opts, |s| minus_indicator(&d, s))?;
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    line.broadcast(grid, d.xhat, |i, v| out[i] = v);
    Ok(out)
}

/// `𝓘⁻(z) = (1/L) Σ_x̂ |𝓘⁻_x̂(z)|`.
pub fn eval_i_minus(ms: &MeasurementSet, grid: &SamplingGrid, opts: &EvalOptions) -> Result<IndicatorField> {
    let lines = per_direction(ms, grid, opts, |d, s| minus_indicator(d, s))?;
    let mut values = vec![0.0; grid.len()];
    let dirs = ms.obs.directions();
    for (line, xhat) in lines.iter().zip(dirs) {
        line.broadcast(grid, xhat, |i, v| values[i] += v.norm());
    }
    let inv = 1.0 / ms.obs.count as f64;
    values.iter_mut().for_each(|v| *v *= inv);
    Ok(IndicatorField {
        grid: *grid,
        kind: IndicatorKind::Iminus,
        values,
        imag_residual: None,
    })
}

pub const SOBEL_1: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
pub const SOBEL_2: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];

/// Sobel gradient magnitude of one complex matrix, normalized by its maximum
/// (zero matrix stays zero). Border entries are 0.
pub fn sobel_normalized(m: &[Complex64], grid: &SamplingGrid) -> Vec<f64> {
    let (np, nq) = (grid.p, grid.q);
    let mut out = vec![0.0; m.len()];
    for q in 1..nq - 1 {
        for p in 1..np - 1 {
            let mut g1 = Complex64::new(0.0, 0.0);
            let mut g2 = Complex64::new(0.0, 0.0);
            // G_t(p,q) = Σ_{k,l} M(p−k+2, q−l+2) S_t(k,l), 1-based k,l
            for k in 0..3 {
                for l in 0..3 {
                    let v = m[grid.index(p + 1 - k, q + 1 - l)];
                    g1 += v * SOBEL_1[k][l];
                    g2 += v * SOBEL_2[k][l];
                }
            }
            out[grid.index(p, q)] = (g1.norm_sqr() + g2.norm_sqr()).sqrt();
        }
    }
    let max = out.iter().cloned().fold(0.0, f64::max);
    if max > 0.0 {
        out.iter_mut().for_each(|v| *v /= max);
    }
    out
}

/// Average over directions of the normalized Sobel magnitudes of `𝓘⁻_x̂`.
pub fn sobel_process(ms: &MeasurementSet, grid: &SamplingGrid, opts: &EvalOptions) -> Result<IndicatorField> {
    let lines = per_direction(ms, grid, opts, |d, s| minus_indicator(d, s))?;
    let dirs = ms.obs.directions();
    let mut values = vec![0.0; grid.len()];
    let mut mat = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (line, xhat) in lines.iter().zip(dirs) {
        line.broadcast(grid, xhat, |i, v| mat[i] = v);
        let n = sobel_normalized(&mat, grid);
        values.iter_mut().zip(n).for_each(|(a, b)| *a += b);
    }
    let inv = 1.0 / ms.obs.count as f64;
    values.iter_mut().for_each(|v| *v *= inv);
    Ok(IndicatorField {
        grid: *grid,
        kind: IndicatorKind::IminusProcessed,
        values,
        imag_residual: None,
    })
}

fn plus_sum(d: &DirectionData, s: &[f64]) -> Result<Vec<Complex64>> {
    band_sum(d, 1, 1.0, s)
}

/// `𝓘⁺(z) = (1/(4πL)) Σ_x̂ Σ w k [u(x̂,k) e^{ik x̂·z} + u(−x̂,k) e^{−ik x̂·z}]`,
/// real part.
pub fn eval_i_plus(ms: &MeasurementSet, grid: &SamplingGrid, opts: &EvalOptions) -> Result<IndicatorField> {
    let lines = per_direction(ms, grid, opts, plus_sum)?;
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (line, xhat) in lines.iter().zip(ms.obs.directions()) {
        line.broadcast(grid, xhat, |i, v| acc[i] += v);
    }
    let scale = 1.0 / (4.0 * PI * ms.obs.count as f64);
    let max_re = acc.iter().map(|v| v.re.abs()).fold(0.0, f64::max) * scale;
    let max_im = acc.iter().map(|v| v.im.abs()).fold(0.0, f64::max) * scale;
    Ok(IndicatorField {
        grid: *grid,
        kind: IndicatorKind::Iplus,
        values: acc.iter().map(|v| v.re * scale).collect(),
        imag_residual: Some(if max_re > 0.0 { max_im / max_re } else { 0.0 }),
    })
}

/// `Σ_x̂ |Σ w u(x̂,k) e^{ik x̂·z}|`.
pub fn eval_i_alhs(ms: &MeasurementSet, grid: &SamplingGrid, opts: &EvalOptions) -> Result<IndicatorField> {
    let lines = per_direction(ms, grid, opts, |d, s| {
        let zeros = vec![Complex64::new(0.0, 0.0); d.wavenumbers.len()];
        let only_plus = DirectionData { minus: &zeros, ..*d };
        band_sum(&only_plus, 0, 1.0, s)
    })?;
    let mut values = vec![0.0; grid.len()];
    for (line, xhat) in lines.iter().zip(ms.obs.directions()) {
        line.broadcast(grid, xhat, |i, v| values[i] += v.norm());
    }
    Ok(IndicatorField {
        grid: *grid,
        kind: IndicatorKind::Alhs,
        values,
        imag_residual: None,
    })
}

/// Data with the systematic mean removed.
pub fn subtract_mean(ms: &MeasurementSet, mu: f64, mode: MuSubtraction) -> MeasurementSet {
    let shift = mode.shift(mu);
    ms.map(|v| v - shift)
}

/// `(𝓘⁻_M, 𝓘⁺_M)`: the plain indicators of mean-corrected data.
pub fn eval_modified(
    ms: &MeasurementSet,
    grid: &SamplingGrid,
    mu: f64,
    mode: MuSubtraction,
    opts: &EvalOptions,
) -> Result<(IndicatorField, IndicatorField)> {
    let corrected = subtract_mean(ms, mu, mode);
    let mut minus = eval_i_minus(&corrected, grid, opts)?;
    minus.kind = IndicatorKind::IminusM;
    let mut plus = eval_i_plus(&corrected, grid, opts)?;
    plus.kind = IndicatorKind::IplusM;
    Ok((minus, plus))
}

/// 1 where `|f(z) − 𝓘⁺(z)| > ε`, else 0.
pub fn eval_i_epsilon(scene: &SourceScene, i_plus: &IndicatorField, epsilon: f64) -> Result<IndicatorField> {
    if !(epsilon > 0.0) {
        return Err(Error::arg(format!("epsilon must be positive, got {epsilon}")));
    }
    let g = i_plus.grid;
    let values = (0..g.q)
        .flat_map(|q| (0..g.p).map(move |p| (p, q)))
        .map(|(p, q)| {
            let f = scene.evaluate_source(g.point(p, q));
            let diff = f - Complex64::new(i_plus.at(p, q), 0.0);
            if diff.norm() > epsilon {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(IndicatorField {
        grid: g,
        kind: IndicatorKind::Iepsilon,
        values,
        imag_residual: None,
    })
}

/// Fraction of grid points where a binary field is 1.
pub fn mismatch_fraction(field: &IndicatorField) -> f64 {
    field.values.iter().filter(|v| **v > 0.5).count() as f64 / field.values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{synthesize_far_field, ObservationSet, WaveBand};
    use crate::geometry::{Amplitude, Region};

    fn small_grid() -> SamplingGrid {
        SamplingGrid {
            x_lo: -2.0,
            x_hi: 2.0,
            y_lo: -2.0,
            y_hi: 2.0,
            p: 41,
            q: 41,
        }
    }

    fn disk_data(l: usize) -> MeasurementSet {
        let scene = SourceScene::single(Region::disk(Vec2::new(0.2, -0.1), 0.8), Amplitude::constant(1.0));
        synthesize_far_field(&scene, &ObservationSet::new(l, 2.0).unwrap(), WaveBand::new(8).unwrap(), 128).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_fields() {
        let ms = MeasurementSet::zeros(ObservationSet::new(3, 2.0).unwrap(), WaveBand::new(4).unwrap());
        let g = small_grid();
        let o = EvalOptions::default();
        for f in [
            eval_i_minus(&ms, &g, &o).unwrap(),
            eval_i_plus(&ms, &g, &o).unwrap(),
            eval_i_alhs(&ms, &g, &o).unwrap(),
            sobel_process(&ms, &g, &o).unwrap(),
        ] {
            assert!(f.values.iter().all(|v| *v == 0.0), "{:?}", f.kind);
        }
    }

    #[test]
    fn grid_needs_interior() {
        let g = SamplingGrid { p: 2, ..small_grid() };
        assert!(g.validate().is_err());
    }

    #[test]
    fn sobel_of_constant_vanishes() {
        let g = small_grid();
        let m = vec![Complex64::new(2.0, 1.0); g.len()];
        assert!(sobel_normalized(&m, &g).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn sobel_matches_hand_convolution() {
        let g = SamplingGrid { p: 3, q: 3, ..small_grid() };
        // M(p, q) = p: index k pairs with p, so S_1 varies along l and sees
        // nothing, S_2 sees the ramp
        let m: Vec<Complex64> = (0..9).map(|i| Complex64::from((i % 3) as f64)).collect();
        let out = sobel_normalized(&m, &g);
        assert_eq!(out[g.index(1, 1)], 1.0);
        assert_eq!(out.iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn minus_field_is_homogeneous_and_sobel_scale_free() {
        let ms = disk_data(4);
        let g = small_grid();
        let o = EvalOptions::default();
        let c = Complex64::new(0.0, -3.0);
        let scaled = ms.map(|v| v * c);
        let a = eval_i_minus(&ms, &g, &o).unwrap();
        let b = eval_i_minus(&scaled, &g, &o).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((3.0 * x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
        let sa = sobel_process(&ms, &g, &o).unwrap();
        let sb = sobel_process(&scaled, &g, &o).unwrap();
        for (x, y) in sa.values.iter().zip(&sb.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn directional_field_is_constant_along_lines() {
        let ms = disk_data(3);
        let g = SamplingGrid { p: 81, q: 81, ..small_grid() };
        let o = EvalOptions::default();
        let m = eval_minus_directional(&ms, 1, &g, &o).unwrap();
        let x = ms.obs.direction(1);
        let d = ms.direction(1);
        let peak = m.iter().map(|v| v.norm()).fold(0.0, f64::max);
        // nearest lookup moves s by at most a quarter cell / 2
        for &(p, q) in &[(3usize, 7usize), (40, 40), (77, 12)] {
            let z = g.point(p, q);
            let exact = minus_indicator(&d, &[x.dot(z)]).unwrap()[0];
            assert!((m[g.index(p, q)] - exact).norm() < 0.05 * peak);
        }
    }

    #[test]
    fn modified_with_zero_mu_is_identity() {
        let ms = disk_data(3);
        let g = small_grid();
        let o = EvalOptions::default();
        let (m, p) = eval_modified(&ms, &g, 0.0, MuSubtraction::Both, &o).unwrap();
        assert_eq!(m.values, eval_i_minus(&ms, &g, &o).unwrap().values);
        assert_eq!(p.values, eval_i_plus(&ms, &g, &o).unwrap().values);
    }

    #[test]
    fn epsilon_field_examples() {
        let ms = disk_data(3);
        let g = small_grid();
        let scene = SourceScene::single(Region::disk(Vec2::new(0.2, -0.1), 0.8), Amplitude::constant(1.0));
        let ip = eval_i_plus(&ms, &g, &EvalOptions::default()).unwrap();
        let e = eval_i_epsilon(&scene, &ip, 1e9).unwrap();
        assert!(e.values.iter().all(|v| *v == 0.0));
        assert!(eval_i_epsilon(&scene, &ip, 0.0).is_err());
    }
}
