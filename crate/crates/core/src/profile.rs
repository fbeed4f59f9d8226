//! Band-limited Radon profiles of the source along one direction.
//!
//! For a direction `x̂` the profile
//! `I(s) = (1/2π) ∫ [u(x̂,k) e^{iks} + u(−x̂,k) e^{−iks}] dk`
//! approximates the integral of `f` over the line `x̂·y = s`. Its derivative
//! jumps where the line touches a corner (finite jump) or is tangent to a
//! circular arc (inverse square-root blowup).

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{disk_far_field_analytic, DirectionData, WaveBand};
use crate::geometry::{SourceScene, Vec2};
use crate::quad::{trapezoid_weights, GaussRule};

/// Uniform grid `start + i·step`, `i < len`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl SGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite() && start.is_finite()) || len < 2 {
            return Err(Error::arg("s-grid needs a positive step and at least 2 points"));
        }
        Ok(Self { start, step, len })
    }

    /// Symmetric grid covering `[−half_span, half_span]`, containing 0.
    pub fn symmetric(half_span: f64, step: f64) -> Result<Self> {
        let half = (half_span / step).ceil() as usize;
        Self::new(-(half as f64) * step, step, 2 * half + 1)
    }

    /// Span `[−3√2, 3√2]` with step `π/(2·k_max)`.
    pub fn for_band(band: WaveBand) -> Self {
        Self::symmetric(3.0 * SQRT_2, Self::band_step(band.k_max()))
            .expect("band step is positive")
    }

    pub fn band_step(k_max: f64) -> f64 {
        PI / (2.0 * k_max)
    }

    pub fn at(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.at(i)).collect()
    }

    pub fn end(&self) -> f64 {
        self.at(self.len - 1)
    }
}

/// Samples of `I_x̂` with the magnitude of the derivative indicator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub xhat: Vec2,
    pub grid: SGrid,
    pub values: Vec<Complex64>,
    pub abs_deriv: Vec<f64>,
    pub k_min: f64,
    pub k_max: f64,
}

impl Profile {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "s,re_I,im_I,absDeriv")?;
        for i in 0..self.grid.len {
            let v = self.values[i];
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.grid.at(i),
                v.re,
                v.im,
                self.abs_deriv[i]
            )?;
        }
        Ok(())
    }
}

fn check(d: &DirectionData) -> Result<()> {
    let n = d.wavenumbers.len();
    if d.plus.len() != n || d.minus.len() != n {
        return Err(Error::MissingData(
            "far field for both x̂ and −x̂ is required at every wavenumber".into(),
        ));
    }
    if n == 0 {
        return Err(Error::MissingData("no wavenumbers".into()));
    }
    Ok(())
}

fn k_weights(ks: &[f64]) -> Vec<f64> {
    let h = if ks.len() > 1 { ks[1] - ks[0] } else { WaveBand::SPACING };
    trapezoid_weights(ks.len(), h)
}

/// `Σ_m w_m k_m^p [u(x̂,k_m) e^{i k_m s} + sign·u(−x̂,k_m) e^{−i k_m s}]` with
/// trapezoidal weights `w_m`.
pub fn band_sum(d: &DirectionData, power: i32, sign: f64, s: &[f64]) -> Result<Vec<Complex64>> {
    check(d)?;
    let w = k_weights(d.wavenumbers);
    let coef: Vec<(f64, Complex64, Complex64)> = d
        .wavenumbers
        .iter()
        .zip(&w)
        .zip(d.plus.iter().zip(d.minus))
        .map(|((&k, &wm), (&p, &m))| {
            let c = wm * k.powi(power);
            (k, p * c, m * (c * sign))
        })
        .collect();
    Ok(s
        .iter()
        .map(|&sv| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(k, p, m) in &coef {
                let e = Complex64::from_polar(1.0, k * sv);
                acc += p * e + m * e.conj();
            }
            acc
        })
        .collect())
}

/// `I_x̂(s)` on the grid. With `completion`, the gap `[0, k_1]` below the
/// band is filled by a trapezoid panel using `u(±x̂, 0)` extrapolated
/// quadratically from the first three wavenumbers.
pub fn profile_from_far_field(d: &DirectionData, grid: &SGrid, completion: bool) -> Result<Profile> {
    let s = grid.points();
    let mut values = band_sum(d, 0, 1.0, &s)?;
    if completion && d.wavenumbers.len() >= 3 {
        let k1 = d.wavenumbers[0];
        let zero = |u: &[Complex64]| u[0] * 3.0 - u[1] * 3.0 + u[2];
        let g0 = zero(d.plus) + zero(d.minus);
        for (v, &sv) in values.iter_mut().zip(&s) {
            let e = Complex64::from_polar(1.0, k1 * sv);
            let g1 = d.plus[0] * e + d.minus[0] * e.conj();
            *v += (g0 + g1) * (0.5 * k1);
        }
    }
    values.iter_mut().for_each(|v| *v /= 2.0 * PI);
    let abs_deriv = derivative_profile(d, &s)?;
    Ok(Profile {
        xhat: d.xhat,
        grid: *grid,
        values,
        abs_deriv,
        k_min: d.wavenumbers[0],
        k_max: *d.wavenumbers.last().expect("checked non-empty"),
    })
}

/// `𝓘⁻_x̂(s) = Σ w k [u(x̂,k) e^{iks} − u(−x̂,k) e^{−iks}]`, which is
/// `−2πi·I′(s)` band-limited.
pub fn minus_indicator(d: &DirectionData, s: &[f64]) -> Result<Vec<Complex64>> {
    band_sum(d, 1, -1.0, s)
}

/// `|𝓘⁻_x̂(s)|`.
pub fn derivative_profile(d: &DirectionData, s: &[f64]) -> Result<Vec<f64>> {
    Ok(minus_indicator(d, s)?.iter().map(|v| v.norm()).collect())
}

/// `Σ w k² [u(x̂,k) e^{iks} + u(−x̂,k) e^{−iks}]`, which is `−2π·I″(s)`
/// band-limited: a derivative jump `J` at `s_i` shows up as the kernel
/// `−2J Σ w cos(k (s − s_i))`.
pub fn jump_strength(d: &DirectionData, s: &[f64]) -> Result<Vec<Complex64>> {
    band_sum(d, 2, 1.0, s)
}

/// `jump_strength` response to a unit kink at offset 0.
struct KinkKernel<'a> {
    k: &'a [f64],
    w: Vec<f64>,
}

impl<'a> KinkKernel<'a> {
    fn new(d: &DirectionData<'a>) -> Self {
        Self {
            k: d.wavenumbers,
            w: k_weights(d.wavenumbers),
        }
    }

    fn at(&self, t: f64) -> f64 {
        -2.0 * self.k.iter().zip(&self.w).map(|(&k, &w)| w * (k * t).cos()).sum::<f64>()
    }
}

/// Integral of `f` over the line `x̂·y = s`, by 64-point Gauss-Legendre on
/// every chord interval (exact chord length for constant amplitudes).
pub fn radon_oracle(scene: &SourceScene, xhat: Vec2, s: f64) -> Result<Complex64> {
    let rule = GaussRule::new(64);
    let chords = scene.component_chords(xhat, s)?;
    let perp = xhat.perp();
    let mut acc = Complex64::new(0.0, 0.0);
    for (c, set) in scene.components.iter().zip(chords) {
        for &(a, b) in set.spans() {
            acc += match c.amplitude.as_constant() {
                Some(v) => v * (b - a),
                None => rule.integrate(a, b, |t| c.amplitude.eval(xhat * s + perp * t)),
            };
        }
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpClass {
    Finite,
    Blowup,
}

/// A detected discontinuity of `I′_x̂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub s0: f64,
    /// Detection strength: `|jump_strength|` for finite jumps, `|𝓘⁻|` for
    /// blowups, at `s0`.
    pub magnitude: f64,
    pub class: JumpClass,
    /// Estimated complex jump of `I′` at `s0` (finite jumps only).
    pub jump: Complex64,
    /// Peak ratio of `|𝓘⁻|` between the full and the half band.
    pub growth: f64,
    /// Same ratio between the half and the quarter band.
    pub coarse_growth: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectParams {
    /// Relative threshold against the strongest response of each class.
    pub tau_rel: f64,
    /// Non-maximum suppression window, in grid steps: a half-width for
    /// `|𝓘⁻|` peaks, whose ringing near tangencies is spaced about two steps,
    /// and a full width for `|jump_strength|` peaks, so that corners a few
    /// steps apart stay separate.
    pub window: usize,
    /// Band growth ratio separating blowups from finite jumps.
    pub g_min: f64,
    /// Peaks must also exceed this multiple of the median response over the
    /// s-grid; 0 disables the floor.
    pub noise_factor: f64,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self {
            tau_rel: 0.15,
            window: 5,
            g_min: 1.2,
            noise_factor: 4.0,
        }
    }
}

fn local_maxima(v: &[f64], window: usize, floor: f64) -> Vec<usize> {
    let n = v.len();
    let mut out = Vec::new();
    for i in 0..n {
        if v[i] <= floor {
            continue;
        }
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(n - 1);
        // ties resolve to the leftmost sample
        let is_max = (lo..=hi).all(|j| v[j] < v[i] || (v[j] == v[i] && j >= i));
        if is_max {
            out.push(i);
        }
    }
    out
}

/// Maximizes `f` on `[a, b]` by golden-section search.
fn golden_max(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn eval_abs(f: impl Fn(&[f64]) -> Result<Vec<Complex64>>, s: f64) -> f64 {
    f(&[s]).map(|v| v[0].norm()).unwrap_or(0.0)
}

/// Locates and classifies the jumps of `I′_x̂`.
///
/// Blowups are peaks of `|𝓘⁻|` that grow by at least `g_min` from the
/// half band (`k ≤ Λ/2`) to the full band. Finite jumps are peaks of
/// `|jump_strength|` away from blowups. Both are refined to sub-grid
/// accuracy; finite jump values come from a least-squares fit of kink
/// kernels at all finite events jointly.
pub fn detect_jumps(d: &DirectionData, grid: &SGrid, params: &DetectParams) -> Result<Vec<JumpEvent>> {
    check(d)?;
    let n_full = d.wavenumbers.len();
    if n_full < 4 {
        return Err(Error::arg("jump detection needs at least 4 wavenumbers"));
    }
    let half = d.truncated(n_full / 2);
    let quarter = d.truncated((n_full / 4).max(1));
    let s = grid.points();
    let h = grid.step;
    let a_full = derivative_profile(d, &s)?;
    let a_half = derivative_profile(&half, &s)?;
    let a_quarter = derivative_profile(&quarter, &s)?;
    let d2: Vec<f64> = jump_strength(d, &s)?.iter().map(|v| v.norm()).collect();
    let max_a = a_full.iter().cloned().fold(0.0, f64::max);
    if max_a == 0.0 {
        return Ok(Vec::new());
    }
    let floor = |v: &[f64]| {
        let mut m = v.to_vec();
        m.sort_by(f64::total_cmp);
        params.noise_factor * m[m.len() / 2]
    };
    let reach = 3;
    let ratio_at = |fine: &[f64], coarse: &[f64], i: usize| {
        let lo = i.saturating_sub(reach);
        let hi = (i + reach).min(s.len() - 1);
        let num = fine[lo..=hi].iter().cloned().fold(0.0, f64::max);
        let den = coarse[lo..=hi].iter().cloned().fold(0.0, f64::max);
        if den > 0.0 {
            num / den
        } else {
            f64::INFINITY
        }
    };
    let growth_at = |i: usize| ratio_at(&a_full, &a_half, i);
    let coarse_at = |i: usize| ratio_at(&a_half, &a_quarter, i);

    let mut events: Vec<JumpEvent> = Vec::new();
    for i in local_maxima(&a_full, params.window, (params.tau_rel * max_a).max(floor(&a_full))) {
        let growth = growth_at(i);
        if growth >= params.g_min {
            let s0 = golden_max(|t| eval_abs(|x| minus_indicator(d, x), t), s[i] - h, s[i] + h, 1e-6 * h);
            events.push(JumpEvent {
                s0,
                magnitude: eval_abs(|x| minus_indicator(d, x), s0),
                class: JumpClass::Blowup,
                jump: Complex64::new(0.0, 0.0),
                growth,
                coarse_growth: coarse_at(i),
            });
        }
    }

    let within = |t: f64, r: f64| events.iter().any(|e| (e.s0 - t).abs() <= r * h);
    let near_blowup = |t: f64| within(t, 3.0);
    let max_d2 = s
        .iter()
        .zip(&d2)
        .filter(|(t, _)| !near_blowup(**t))
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);
    let mut finite = Vec::new();
    let threshold = (params.tau_rel * max_d2).max(floor(&d2));
    if max_d2 > 0.0 {
        let masked: Vec<f64> = s
            .iter()
            .zip(&d2)
            .map(|(t, v)| if within(*t, 1.5) { 0.0 } else { *v })
            .collect();
        for i in local_maxima(&masked, params.window / 2, threshold) {
            let s0 = golden_max(|t| eval_abs(|x| jump_strength(d, x), t), s[i] - h, s[i] + h, 1e-6 * h);
            finite.push(JumpEvent {
                s0,
                magnitude: eval_abs(|x| jump_strength(d, x), s0),
                class: JumpClass::Finite,
                jump: Complex64::new(0.0, 0.0),
                growth: growth_at(i),
                coarse_growth: coarse_at(i),
            });
        }
    }
    // The kernel's first sidelobe is about a fifth of its peak, above
    // tau_rel, so a strong kink or blowup can raise a peak ~3h away. Fitted
    // jointly with its source, such a peak gets a jump too small to have
    // reached the threshold on its own; drop the weakest of those and refit
    // until none remain.
    let peak = KinkKernel::new(d).at(0.0).abs();
    let blowup_locs: Vec<f64> = events.iter().map(|e| e.s0).collect();
    while !finite.is_empty() {
        let locs: Vec<f64> = finite.iter().map(|e| e.s0).collect();
        let jumps = jumps_beside_blowups(d, &locs, &blowup_locs, h)?;
        let (weakest, j) = jumps
            .iter()
            .enumerate()
            .map(|(i, j)| (i, j.norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        if j * peak >= threshold {
            break;
        }
        finite.remove(weakest);
    }
    let mut locs: Vec<f64> = finite.iter().map(|e| e.s0).collect();
    let blowups: Vec<f64> = events.iter().map(|e| e.s0).collect();
    refine_kinks(d, &mut locs, h, &blowups)?;
    for (e, &s0) in finite.iter_mut().zip(&locs) {
        e.s0 = s0;
    }
    let jumps = fit_kinks(d, &locs, h)?;
    for (e, j) in finite.iter_mut().zip(jumps) {
        e.jump = j;
    }
    events.extend(finite);
    events.sort_by(|a, b| a.s0.total_cmp(&b.s0));
    Ok(events)
}

/// Least-squares jump values for kinks at `locs`, fitted to `jump_strength`
/// on samples within two steps of every location.
pub fn fit_kinks(d: &DirectionData, locs: &[f64], h: f64) -> Result<Vec<Complex64>> {
    let n = locs.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut samples: Vec<f64> = Vec::new();
    for &c in locs {
        for j in -4..=4 {
            samples.push(c + 0.5 * h * j as f64);
        }
    }
    let obs = jump_strength(d, &samples)?;
    Ok(kink_least_squares(&KinkKernel::new(d), &samples, &obs, locs)?.0)
}

/// Jumps at `locs` fitted to `obs` sampled at `samples`, and the residual
/// sum of squares.
fn kink_least_squares(
    kernel: &KinkKernel,
    samples: &[f64],
    obs: &[Complex64],
    locs: &[f64],
) -> Result<(Vec<Complex64>, f64)> {
    let n = locs.len();
    // two-sided band-limited sum, converted to the jump of the 2π-normalized
    // profile derivative
    let a: Vec<Vec<f64>> = samples
        .iter()
        .map(|&t| locs.iter().map(|&c| kernel.at(t - c)).collect())
        .collect();
    let mut ata = vec![vec![0.0; n]; n];
    let mut atb = vec![Complex64::new(0.0, 0.0); n];
    for (row, &b) in a.iter().zip(obs) {
        for i in 0..n {
            atb[i] += b * row[i];
            for j in 0..n {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let ridge = 1e-12 * (0..n).map(|i| ata[i][i]).fold(0.0, f64::max);
    for (i, r) in ata.iter_mut().enumerate() {
        r[i] += ridge;
    }
    let x = solve_real_complex(ata, atb)?;
    let rss = a
        .iter()
        .zip(obs)
        .map(|(row, &b)| (b - row.iter().zip(&x).map(|(r, j)| j * *r).sum::<Complex64>()).norm_sqr())
        .sum();
    Ok((x, rss))
}

/// Kink jumps at `locs` fitted jointly with a model of every blowup's own
/// `jump_strength` response: `Σ w k^p cos(k t)` and `Σ w k^p sin(k t)` about
/// the blowup for p = 0 (kink), 1/2 (tangency) and 1 (step, an edge
/// perpendicular to x̂). Samples around the blowups pin the model down by
/// its main lobe, so its ringing is not credited to the kinks.
fn jumps_beside_blowups(d: &DirectionData, locs: &[f64], blowups: &[f64], h: f64) -> Result<Vec<Complex64>> {
    let mut samples: Vec<f64> = Vec::new();
    for &c in locs {
        samples.extend((-4..=4).map(|j| c + 0.5 * h * j as f64));
    }
    for &b in blowups {
        samples.extend((-6..=6).map(|j| b + 0.5 * h * j as f64));
    }
    let obs = jump_strength(d, &samples)?;
    let w = k_weights(d.wavenumbers);
    let kernel = KinkKernel::new(d);
    let band = |p: f64, t: f64, odd: bool| -> f64 {
        let (mut acc, mut norm) = (0.0, 0.0);
        for (&k, &wk) in d.wavenumbers.iter().zip(&w) {
            let a = wk * k.powf(p);
            acc += a * if odd { (k * t).sin() } else { (k * t).cos() };
            norm += a;
        }
        acc / norm
    };
    let cols = locs.len() + 6 * blowups.len();
    let row = |t: f64| -> Vec<f64> {
        let mut r: Vec<f64> = locs.iter().map(|&c| kernel.at(t - c)).collect();
        for &b in blowups {
            for p in [0.0, 0.5, 1.0] {
                r.push(band(p, t - b, false));
                r.push(band(p, t - b, true));
            }
        }
        r
    };
    let mut ata = vec![vec![0.0; cols]; cols];
    let mut atb = vec![Complex64::new(0.0, 0.0); cols];
    for (&t, &y) in samples.iter().zip(&obs) {
        let r = row(t);
        for i in 0..cols {
            atb[i] += y * r[i];
            for j in 0..cols {
                ata[i][j] += r[i] * r[j];
            }
        }
    }
    let ridge = 1e-10 * (0..cols).map(|i| ata[i][i]).fold(0.0, f64::max);
    for (i, r) in ata.iter_mut().enumerate() {
        r[i] += ridge;
    }
    let x = solve_real_complex(ata, atb)?;
    Ok(x[..locs.len()].to_vec())
}

/// Moves kink locations, one at a time within half a step, to minimize the
/// residual of the joint kink fit to `jump_strength` near the kinks. Samples
/// within `1.5h` of any `avoid` offset are left out.
fn refine_kinks(d: &DirectionData, locs: &mut [f64], h: f64, avoid: &[f64]) -> Result<()> {
    if locs.is_empty() {
        return Ok(());
    }
    let mut samples: Vec<f64> = Vec::new();
    for &c in locs.iter() {
        for j in -6..=6 {
            let t = c + 0.5 * h * j as f64;
            if avoid.iter().all(|a| (a - t).abs() > 1.5 * h) && samples.iter().all(|u| (u - t).abs() > 0.25 * h) {
                samples.push(t);
            }
        }
    }
    if samples.len() < 2 * locs.len() {
        return Ok(());
    }
    let obs = jump_strength(d, &samples)?;
    let kernel = KinkKernel::new(d);
    for _ in 0..3 {
        for i in 0..locs.len() {
            let c = locs[i];
            // local problem: samples within 4h, kinks within 10h
            let idx: Vec<usize> = (0..samples.len()).filter(|&j| (samples[j] - c).abs() <= 4.0 * h).collect();
            let near: Vec<usize> = (0..locs.len()).filter(|&j| (locs[j] - c).abs() <= 10.0 * h).collect();
            if idx.len() < 2 * near.len() {
                continue;
            }
            let ls: Vec<f64> = idx.iter().map(|&j| samples[j]).collect();
            let lo: Vec<Complex64> = idx.iter().map(|&j| obs[j]).collect();
            let me = near.iter().position(|&j| j == i).expect("kink is near itself");
            let mut trial: Vec<f64> = near.iter().map(|&j| locs[j]).collect();
            let rss = |t: &[f64]| kink_least_squares(&kernel, &ls, &lo, t).map(|r| r.1).unwrap_or(f64::INFINITY);
            let before = rss(&trial);
            let best = golden_max(
                |t| {
                    trial[me] = t;
                    -rss(&trial)
                },
                c - 0.5 * h,
                c + 0.5 * h,
                1e-4 * h,
            );
            trial[me] = best;
            if rss(&trial) < before {
                locs[i] = best;
            }
        }
    }
    Ok(())
}

/// Gaussian elimination with partial pivoting for a real matrix and a
/// complex right-hand side.
pub(crate) fn solve_real_complex(mut a: Vec<Vec<f64>>, mut b: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[piv][col].abs() < 1e-300 {
            return Err(Error::Numerical("singular kink fit".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                let bc = b[col];
                b[r] -= bc * f;
            }
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for c in r + 1..n {
            acc -= x[c] * a[r][c];
        }
        x[r] = acc / a[r][r];
    }
    Ok(x)
}

/// Inward shift of the `|𝓘⁻|` peak at a circle tangency for this band,
/// measured on the analytic far field of the unit disk.
pub fn tangency_peak_offset(wavenumbers: &[f64]) -> Result<f64> {
    let k_max = *wavenumbers.last().ok_or_else(|| Error::MissingData("no wavenumbers".into()))?;
    let xhat = Vec2::new(1.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let plus = wavenumbers
        .iter()
        .map(|&k| disk_far_field_analytic(Vec2::default(), 1.0, one, xhat, k))
        .collect::<Result<Vec<_>>>()?;
    let d = DirectionData {
        xhat,
        wavenumbers,
        plus: &plus,
        minus: &plus,
    };
    let h = SGrid::band_step(k_max);
    let peak = golden_max(|t| eval_abs(|x| minus_indicator(&d, x), t), 1.0 - 4.0 * h, 1.0 + h, 1e-6 * h);
    Ok(1.0 - peak)
}

/// Smallest interval outside which `|I_x̂|` stays below the noise floor.
///
/// The floor is the larger of `floor_rel·max|I|` and three times the median
/// of `|I|` over the outer fifth of the grid on each side.
pub fn support_strip(profile: &Profile, floor_rel: f64) -> Result<(f64, f64)> {
    let mags: Vec<f64> = profile.values.iter().map(|v| v.norm()).collect();
    let max = mags.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::NoSupport);
    }
    let n = mags.len();
    let edge = (n / 5).max(1);
    let mut tail: Vec<f64> = mags[..edge].iter().chain(&mags[n - edge..]).cloned().collect();
    tail.sort_by(f64::total_cmp);
    let noise = tail[tail.len() / 2];
    let floor = (floor_rel * max).max(3.0 * noise);
    if max <= floor {
        return Err(Error::NoSupport);
    }
    let first = mags.iter().position(|&m| m > floor).ok_or(Error::NoSupport)?;
    let last = mags.iter().rposition(|&m| m > floor).ok_or(Error::NoSupport)?;
    Ok((profile.grid.at(first), profile.grid.at(last)))
}
