//! Far-field synthesis, the analytic disk oracle and the measurement noise
//! models.
//!
//! The far field of a source `f` is `u(x̂, k) = ∫ exp(−i k x̂·y) f(y) dy`.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::j1_over_x;
use crate::error::{Error, Result};
use crate::geometry::{Region, SourceScene, Vec2};

/// Sub-rows per quadrature cell used to estimate area coverage.
const COVERAGE_SUBROWS: usize = 32;

/// Observation directions `x̂_l` at angles `(γ·l − 0.7·L)·π/L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    pub count: usize,
    pub gamma: f64,
    pub angles: Vec<f64>,
}

impl ObservationSet {
    pub fn new(count: usize, gamma: f64) -> Result<Self> {
        if count == 0 {
            return Err(Error::arg("number of directions L must be positive"));
        }
        if !(gamma > 0.0 && gamma <= 2.0) {
            return Err(Error::arg(format!("gamma must lie in (0, 2], got {gamma}")));
        }
        let lf = count as f64;
        let angles = (0..count)
            .map(|l| (gamma * l as f64 - 0.7 * lf) * PI / lf)
            .collect();
        Ok(Self {
            count,
            gamma,
            angles,
        })
    }

    /// Directions at explicit angles (used when new directions are chosen
    /// adaptively).
    pub fn from_angles(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::arg("no directions"));
        }
        Ok(Self {
            count: angles.len(),
            gamma: f64::NAN,
            angles,
        })
    }

    pub fn directions(&self) -> Vec<Vec2> {
        self.angles.iter().map(|&a| Vec2::from_angle(a)).collect()
    }

    pub fn direction(&self, l: usize) -> Vec2 {
        Vec2::from_angle(self.angles[l])
    }

    /// Index pairs of collinear (equal or antipodal) directions.
    pub fn collinear_pairs(&self) -> Vec<(usize, usize)> {
        let d = self.directions();
        let mut out = Vec::new();
        for i in 0..d.len() {
            for j in i + 1..d.len() {
                if d[i].cross(d[j]).abs() < 1e-9 {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Wavenumbers `k_m = m/2`, `m = 1..=2Λ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaveBand {
    pub lambda: usize,
}

impl WaveBand {
    pub const SPACING: f64 = 0.5;

    pub fn new(lambda: usize) -> Result<Self> {
        if lambda == 0 {
            return Err(Error::arg("Lambda must be positive"));
        }
        Ok(Self { lambda })
    }

    pub fn len(&self) -> usize {
        2 * self.lambda
    }

    pub fn is_empty(&self) -> bool {
        self.lambda == 0
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (1..=self.len()).map(|m| m as f64 * Self::SPACING).collect()
    }

    pub fn k_max(&self) -> f64 {
        self.lambda as f64
    }
}

/// Far-field data for one direction and its antipode.
#[derive(Clone, Copy, Debug)]
pub struct DirectionData<'a> {
    pub xhat: Vec2,
    pub wavenumbers: &'a [f64],
    pub plus: &'a [Complex64],
    pub minus: &'a [Complex64],
}

impl DirectionData<'_> {
    /// The first `n` wavenumbers only (a nested lower band).
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.wavenumbers.len());
        Self {
            xhat: self.xhat,
            wavenumbers: &self.wavenumbers[..n],
            plus: &self.plus[..n],
            minus: &self.minus[..n],
        }
    }
}

/// Complex far-field values indexed by (direction, sign, wavenumber).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSet {
    pub obs: ObservationSet,
    pub band: WaveBand,
    wavenumbers: Vec<f64>,
    /// `[l][sign][m]` flattened, sign 0 is `+x̂`, sign 1 is `−x̂`.
    values: Vec<Complex64>,
}

impl MeasurementSet {
    pub fn zeros(obs: ObservationSet, band: WaveBand) -> Self {
        let n = obs.count * 2 * band.len();
        Self {
            wavenumbers: band.wavenumbers(),
            obs,
            band,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    fn index(&self, l: usize, sign: usize, m: usize) -> usize {
        (l * 2 + sign) * self.band.len() + m
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn plus(&self, l: usize) -> &[Complex64] {
        let i = self.index(l, 0, 0);
        &self.values[i..i + self.band.len()]
    }

    pub fn minus(&self, l: usize) -> &[Complex64] {
        let i = self.index(l, 1, 0);
        &self.values[i..i + self.band.len()]
    }

    pub fn get(&self, l: usize, sign: usize, m: usize) -> Complex64 {
        self.values[self.index(l, sign, m)]
    }

    pub fn set(&mut self, l: usize, sign: usize, m: usize, v: Complex64) {
        let i = self.index(l, sign, m);
        self.values[i] = v;
    }

    pub fn direction(&self, l: usize) -> DirectionData<'_> {
        DirectionData {
            xhat: self.obs.direction(l),
            wavenumbers: &self.wavenumbers,
            plus: self.plus(l),
            minus: self.minus(l),
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Every value transformed by `f`.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = f(*v));
        out
    }

    /// Writes `l,sign,m,k,re,im` rows in draw order.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        wr.write_record(["l", "sign", "m", "k", "re", "im"]).map_err(io)?;
        for l in 0..self.obs.count {
            for (sign, tag) in ["+", "-"].iter().enumerate() {
                for m in 0..self.band.len() {
                    let v = self.get(l, sign, m);
                    wr.write_record([
                        l.to_string(),
                        tag.to_string(),
                        (m + 1).to_string(),
                        format!("{}", self.wavenumbers[m]),
                        format!("{:.16e}", v.re),
                        format!("{:.16e}", v.im),
                    ])
                    .map_err(io)?;
                }
            }
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads a measurement CSV; the observation set fixes the directions.
    /// Every `(l, sign, m)` entry up to the largest `m` present must occur
    /// exactly once.
    pub fn read_csv<R: Read>(r: R, obs: ObservationSet) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let header = rd
            .headers()
            .map_err(|e| Error::Parse(format!("measurement header: {e}")))?
            .clone();
        let expected = ["l", "sign", "m", "k", "re", "im"];
        if header.iter().ne(expected.iter().copied()) {
            return Err(Error::Parse(format!(
                "measurement header must be {}, got {}",
                expected.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        let mut max_m = 0usize;
        for (line, rec) in rd.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(format!("row {}: {e}", line + 2)))?;
            let bad = |what: &str| Error::Parse(format!("row {}: bad {what}", line + 2));
            if rec.len() != 6 {
                return Err(bad("field count"));
            }
            let l: usize = rec[0].parse().map_err(|_| bad("l"))?;
            let sign = match &rec[1] {
                "+" => 0,
                "-" => 1,
                _ => return Err(bad("sign")),
            };
            let m: usize = rec[2].parse().map_err(|_| bad("m"))?;
            let k: f64 = rec[3].parse().map_err(|_| bad("k"))?;
            let re: f64 = rec[4].parse().map_err(|_| bad("re"))?;
            let im: f64 = rec[5].parse().map_err(|_| bad("im"))?;
            if l >= obs.count {
                return Err(Error::Parse(format!(
                    "row {}: direction index {l} out of range for L = {}",
                    line + 2,
                    obs.count
                )));
            }
            if m == 0 || m > 1 << 20 {
                return Err(bad("m"));
            }
            if (k - m as f64 * WaveBand::SPACING).abs() > 1e-9 {
                return Err(Error::Parse(format!(
                    "row {}: k = {k} does not match m = {m}",
                    line + 2
                )));
            }
            if !(re.is_finite() && im.is_finite()) {
                return Err(bad("value"));
            }
            max_m = max_m.max(m);
            rows.push((l, sign, m, Complex64::new(re, im)));
        }
        if max_m % 2 == 1 || max_m == 0 {
            return Err(Error::MissingData(format!(
                "wavenumber count must be a positive even number, got {max_m}"
            )));
        }
        let band = WaveBand::new(max_m / 2)?;
        let mut out = Self::zeros(obs, band);
        let mut seen = vec![false; out.values.len()];
        for (l, sign, m, v) in rows {
            let i = out.index(l, sign, m - 1);
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::Parse(format!("duplicate entry l={l} m={m}")));
            }
            out.values[i] = v;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            let per_l = 2 * band.len();
            return Err(Error::MissingData(format!(
                "missing entry l={} sign={} m={}",
                i / per_l,
                if (i % per_l) / band.len() == 0 { "+" } else { "-" },
                i % band.len() + 1
            )));
        }
        Ok(out)
    }
}

/// Cell-centred tensor grid over a scene's bounding box with per-cell
/// complex weights `amplitude × covered area fraction`.
#[derive(Clone, Debug)]
pub struct SourceQuadrature {
    h: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
    rows: Vec<RowSpan>,
}

#[derive(Clone, Debug)]
struct RowSpan {
    j: usize,
    i0: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl SourceQuadrature {
    /// `resolution` nodes along the longer side of the bounding box; the box
    /// is inflated by one cell on every side.
    pub fn new(scene: &SourceScene, resolution: usize) -> Result<Self> {
        if resolution < 64 {
            return Err(Error::arg(format!(
                "source grid resolution must be at least 64, got {resolution}"
            )));
        }
        if scene.is_empty() {
            return Ok(Self {
                h: 1.0,
                xs: Vec::new(),
                ys: Vec::new(),
                rows: Vec::new(),
            });
        }
        let b = scene
            .bbox()
            .ok_or_else(|| Error::scene("scene is unbounded"))?;
        let h = b.width().max(b.height()) / (resolution - 2) as f64;
        let nx = (b.width() / h).ceil() as usize + 2;
        let ny = (b.height() / h).ceil() as usize + 2;
        let x0 = b.lo.x - h;
        let y0 = b.lo.y - h;
        let xs: Vec<f64> = (0..nx).map(|i| x0 + h * (i as f64 + 0.5)).collect();
        let ys: Vec<f64> = (0..ny).map(|j| y0 + h * (j as f64 + 0.5)).collect();

        let rows: Vec<RowSpan> = (0..ny)
            .into_par_iter()
            .filter_map(|j| {
                let mut re = vec![0.0; nx];
                let mut im = vec![0.0; nx];
                let mut cover = vec![0.0; nx];
                for c in &scene.components {
                    cover.iter_mut().for_each(|v| *v = 0.0);
                    row_coverage(&c.region, x0, h, ys[j], &mut cover);
                    let constant = c.amplitude.as_constant();
                    for i in 0..nx {
                        if cover[i] > 0.0 {
                            let a = constant
                                .unwrap_or_else(|| c.amplitude.eval(Vec2::new(xs[i], ys[j])));
                            re[i] += cover[i] * a.re;
                            im[i] += cover[i] * a.im;
                        }
                    }
                }
                let first = (0..nx).find(|&i| re[i] != 0.0 || im[i] != 0.0)?;
                let last = (0..nx).rev().find(|&i| re[i] != 0.0 || im[i] != 0.0)?;
                Some(RowSpan {
                    j,
                    i0: first,
                    re: re[first..=last].to_vec(),
                    im: im[first..=last].to_vec(),
                })
            })
            .collect();
        Ok(Self { h, xs, ys, rows })
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// `(u(x̂, k), u(−x̂, k))`.
    pub fn far_field_pair(&self, xhat: Vec2, k: f64) -> (Complex64, Complex64) {
        let mut plus = Complex64::new(0.0, 0.0);
        let mut minus = Complex64::new(0.0, 0.0);
        let (cx, sx): (Vec<f64>, Vec<f64>) = self
            .xs
            .iter()
            .map(|&x| {
                let (s, c) = (k * xhat.x * x).sin_cos();
                (c, s)
            })
            .unzip();
        for row in &self.rows {
            // A = Σ W e^{-iθ}, B = Σ W e^{+iθ}
            let (mut ar, mut ai, mut br, mut bi) = (0.0, 0.0, 0.0, 0.0);
            let c = &cx[row.i0..row.i0 + row.re.len()];
            let s = &sx[row.i0..row.i0 + row.re.len()];
            for i in 0..row.re.len() {
                let (wr, wi) = (row.re[i], row.im[i]);
                let (ci, si) = (c[i], s[i]);
                ar += wr * ci + wi * si;
                ai += wi * ci - wr * si;
                br += wr * ci - wi * si;
                bi += wi * ci + wr * si;
            }
            let (sy, cy) = (k * xhat.y * self.ys[row.j]).sin_cos();
            let ey = Complex64::new(cy, -sy);
            plus += ey * Complex64::new(ar, ai);
            minus += ey.conj() * Complex64::new(br, bi);
        }
        let area = self.h * self.h;
        (plus * area, minus * area)
    }
}

/// Adds the covered fraction of each cell `[x0 + i·h, x0 + (i+1)·h]` in the
/// row centred at `yc`, averaged over sub-rows.
fn row_coverage(region: &Region, x0: f64, h: f64, yc: f64, cover: &mut [f64]) {
    let n = cover.len();
    let inv = 1.0 / (h * COVERAGE_SUBROWS as f64);
    for t in 0..COVERAGE_SUBROWS {
        let y = yc - 0.5 * h + h * (t as f64 + 0.5) / COVERAGE_SUBROWS as f64;
        let set = region.chord(Vec2::new(0.0, y), Vec2::new(1.0, 0.0));
        for &(a, b) in set.spans() {
            let a = a.max(x0);
            let b = b.min(x0 + n as f64 * h);
            if a >= b {
                continue;
            }
            let ia = (((a - x0) / h).floor() as usize).min(n - 1);
            let ib = (((b - x0) / h).floor() as usize).min(n - 1);
            for (i, c) in cover.iter_mut().enumerate().take(ib + 1).skip(ia) {
                let lo = a.max(x0 + i as f64 * h);
                let hi = b.min(x0 + (i + 1) as f64 * h);
                if hi > lo {
                    *c += (hi - lo) * inv;
                }
            }
        }
    }
}

/// Far field of `scene` for every direction pair and wavenumber.
pub fn synthesize_far_field(
    scene: &SourceScene,
    obs: &ObservationSet,
    band: WaveBand,
    resolution: usize,
) -> Result<MeasurementSet> {
    let quad = SourceQuadrature::new(scene, resolution)?;
    let wavelength = 2.0 * PI / band.k_max();
    if !scene.is_empty() && quad.spacing() > wavelength / 4.0 {
        log::warn!(
            "source grid spacing {:.4} gives fewer than 4 nodes per wavelength at k = {}",
            quad.spacing(),
            band.k_max()
        );
    }
    Ok(synthesize_with(&quad, obs, band))
}

/// Far field from a prepared quadrature, parallel over (direction, wavenumber).
pub fn synthesize_with(quad: &SourceQuadrature, obs: &ObservationSet, band: WaveBand) -> MeasurementSet {
    let mut out = MeasurementSet::zeros(obs.clone(), band);
    let ks = band.wavenumbers();
    let dirs = obs.directions();
    let pairs: Vec<(Complex64, Complex64)> = (0..obs.count * ks.len())
        .into_par_iter()
        .map(|idx| quad.far_field_pair(dirs[idx / ks.len()], ks[idx % ks.len()]))
        .collect();
    for (idx, (p, m)) in pairs.into_iter().enumerate() {
        let (l, mi) = (idx / ks.len(), idx % ks.len());
        out.set(l, 0, mi, p);
        out.set(l, 1, mi, m);
    }
    out
}

/// `c · exp(−i k x̂·center) · 2π R J1(kR)/k`.
pub fn disk_far_field_analytic(center: Vec2, radius: f64, c: Complex64, xhat: Vec2, k: f64) -> Result<Complex64> {
    if !(k > 0.0) {
        return Err(Error::arg(format!("wavenumber must be positive, got {k}")));
    }
    if !(radius > 0.0) {
        return Err(Error::arg(format!("radius must be positive, got {radius}")));
    }
    let phase = Complex64::from_polar(1.0, -k * xhat.dot(center));
    Ok(c * phase * (2.0 * PI * radius * radius * j1_over_x(k * radius)))
}

/// Systematic additive error `X̃ + iỸ`, `X̃, Ỹ ~ N(mu, sigma²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Systematic {
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub delta: f64,
    pub systematic: Option<Systematic>,
    pub seed: u64,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::arg(format!("delta must be finite and >= 0, got {}", self.delta)));
        }
        if let Some(s) = self.systematic {
            if !(s.mu.is_finite() && s.sigma.is_finite() && s.sigma >= 0.0) {
                return Err(Error::arg("systematic mu, sigma must be finite with sigma >= 0"));
            }
        }
        Ok(())
    }
}

/// `u ← u·(1 + δ(X + iY))`, then `u ← u + X̃ + iỸ` when a systematic error
/// is present. ChaCha8 seeded from `seed`; draws in order l ascending, sign
/// `+` before `−`, m ascending, and per entry X, Y, X̃, Ỹ.
pub fn apply_noise(ms: &MeasurementSet, model: &NoiseModel) -> Result<MeasurementSet> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let mut out = ms.clone();
    for v in out.values.iter_mut() {
        let x: f64 = StandardNormal.sample(&mut rng);
        let y: f64 = StandardNormal.sample(&mut rng);
        *v *= Complex64::new(1.0 + model.delta * x, model.delta * y);
        if let Some(s) = model.systematic {
            let xt: f64 = StandardNormal.sample(&mut rng);
            let yt: f64 = StandardNormal.sample(&mut rng);
            *v += Complex64::new(s.mu + s.sigma * xt, s.mu + s.sigma * yt);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Amplitude, Region};

    fn unit_disk() -> SourceScene {
        SourceScene::single(Region::disk(Vec2::default(), 1.0), Amplitude::constant(1.0))
    }

    #[test]
    fn directions_follow_angle_formula() {
        let obs = ObservationSet::new(15, 2.0).unwrap();
        assert!((obs.angles[0] + 0.7 * PI).abs() < 1e-15);
        assert!((obs.angles[1] - (2.0 - 10.5) * PI / 15.0).abs() < 1e-15);
        assert!(obs.collinear_pairs().is_empty());
        assert!(!ObservationSet::new(16, 2.0).unwrap().collinear_pairs().is_empty());
        assert!(ObservationSet::new(4, 0.0).is_err());
    }

    #[test]
    fn band_layout() {
        let b = WaveBand::new(30).unwrap();
        let k = b.wavenumbers();
        assert_eq!(k.len(), 60);
        assert_eq!(k[0], 0.5);
        assert_eq!(k[59], 30.0);
    }

    #[test]
    fn analytic_disk_examples() {
        let x = Vec2::from_angle(0.4);
        let c1 = Complex64::new(1.0, 0.0);
        let u = disk_far_field_analytic(Vec2::default(), 1.0, c1, x, 1.0).unwrap();
        assert!((u.re - 2.0 * PI * 0.440_050_585_744_933_5).abs() < 1e-12);
        assert!((u.re - 2.764_919).abs() < 1e-6);
        let u0 = disk_far_field_analytic(Vec2::default(), 1.0, c1, x, 1e-9).unwrap();
        assert!((u0.re - PI).abs() < 1e-12);
        let e = Vec2::new(1.0, 0.0);
        let a = disk_far_field_analytic(Vec2::default(), 1.0, c1, e, PI).unwrap();
        let b = disk_far_field_analytic(e, 1.0, c1, e, PI).unwrap();
        assert!((b + a).norm() < 1e-12);
        assert!(disk_far_field_analytic(Vec2::default(), 1.0, c1, e, 0.0).is_err());
    }

    #[test]
    fn empty_scene_gives_zero_data() {
        let obs = ObservationSet::new(3, 2.0).unwrap();
        let ms = synthesize_far_field(&SourceScene::default(), &obs, WaveBand::new(2).unwrap(), 64).unwrap();
        assert!(ms.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn disk_quadrature_is_close_to_analytic() {
        let obs = ObservationSet::new(2, 2.0).unwrap();
        let band = WaveBand::new(10).unwrap();
        let ms = synthesize_far_field(&unit_disk(), &obs, band, 400).unwrap();
        for l in 0..2 {
            let x = obs.direction(l);
            for (m, &k) in ms.wavenumbers().iter().enumerate() {
                let want = disk_far_field_analytic(Vec2::default(), 1.0, Complex64::new(1.0, 0.0), x, k).unwrap();
                let err = (ms.get(l, 0, m) - want).norm() / want.norm();
                assert!(err < 2e-3, "k={k}: rel err {err:e}");
                // conjugate symmetry for a real source
                assert!((ms.get(l, 1, m) - ms.get(l, 0, m).conj()).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn noise_is_reproducible_and_trivial_at_zero() {
        let obs = ObservationSet::new(3, 2.0).unwrap();
        let ms = synthesize_far_field(&unit_disk(), &obs, WaveBand::new(3).unwrap(), 128).unwrap();
        let none = NoiseModel { delta: 0.0, systematic: None, seed: 1 };
        assert_eq!(apply_noise(&ms, &none).unwrap(), ms);
        let model = NoiseModel {
            delta: 0.3,
            systematic: Some(Systematic { mu: 0.1, sigma: 0.1 }),
            seed: 7,
        };
        let a = apply_noise(&ms, &model).unwrap();
        let b = apply_noise(&ms, &model).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, ms);
        let other = apply_noise(&ms, &NoiseModel { seed: 8, ..model }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let obs = ObservationSet::new(3, 2.0).unwrap();
        let ms = synthesize_far_field(&unit_disk(), &obs, WaveBand::new(2).unwrap(), 128).unwrap();
        let mut buf = Vec::new();
        ms.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("l,sign,m,k,re,im\n0,+,1,0.5,"));
        let back = MeasurementSet::read_csv(&buf[..], obs.clone()).unwrap();
        assert_eq!(back, ms);
        // drop the last row
        let cut = text.trim_end().rsplit_once('\n').unwrap().0;
        assert!(matches!(
            MeasurementSet::read_csv(cut.as_bytes(), obs),
            Err(Error::MissingData(_))
        ));
    }
}
