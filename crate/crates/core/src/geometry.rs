//! Source scenes: regions, amplitudes and exact ground-truth geometry.
//!
//! Lines are parametrized as `{s·x̂ + τ·x̂⊥}` with `x̂⊥ = (−x̂₂, x̂₁)`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::interval::IntervalSet;

const ROOT_TOL: f64 = 1e-10;
const IMPLICIT_SAMPLES: usize = 400;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Rotation by +90 degrees.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Self {
        self * (1.0 / self.norm())
    }

    pub fn dist(self, o: Self) -> f64 {
        (self - o).norm()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Axis-aligned box `[lo.x, hi.x] × [lo.y, hi.y]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub lo: Vec2,
    pub hi: Vec2,
}

impl BBox {
    pub fn new(lo: Vec2, hi: Vec2) -> Self {
        Self { lo, hi }
    }

    pub fn is_valid(&self) -> bool {
        self.lo.x.is_finite()
            && self.lo.y.is_finite()
            && self.hi.x.is_finite()
            && self.hi.y.is_finite()
            && self.lo.x < self.hi.x
            && self.lo.y < self.hi.y
    }

    pub fn union(&self, o: &BBox) -> BBox {
        BBox::new(
            Vec2::new(self.lo.x.min(o.lo.x), self.lo.y.min(o.lo.y)),
            Vec2::new(self.hi.x.max(o.hi.x), self.hi.y.max(o.hi.y)),
        )
    }

    pub fn intersect(&self, o: &BBox) -> BBox {
        BBox::new(
            Vec2::new(self.lo.x.max(o.lo.x), self.lo.y.max(o.lo.y)),
            Vec2::new(self.hi.x.min(o.hi.x), self.hi.y.min(o.hi.y)),
        )
    }

    pub fn width(&self) -> f64 {
        self.hi.x - self.lo.x
    }

    pub fn height(&self) -> f64 {
        self.hi.y - self.lo.y
    }

    pub fn corners(&self) -> [Vec2; 4] {
        [
            self.lo,
            Vec2::new(self.hi.x, self.lo.y),
            self.hi,
            Vec2::new(self.lo.x, self.hi.y),
        ]
    }

    /// Parameter range of the line `p + t·d` inside the box, if any.
    fn clip_line(&self, p: Vec2, d: Vec2) -> Option<(f64, f64)> {
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for (pc, dc, lo, hi) in [
            (p.x, d.x, self.lo.x, self.hi.x),
            (p.y, d.y, self.lo.y, self.hi.y),
        ] {
            if dc.abs() < 1e-300 {
                if pc < lo || pc > hi {
                    return None;
                }
            } else {
                let a = (lo - pc) / dc;
                let b = (hi - pc) / dc;
                t0 = t0.max(a.min(b));
                t1 = t1.min(a.max(b));
            }
        }
        (t0 < t1).then_some((t0, t1))
    }
}

/// A bounded (or, for complements, co-bounded) planar set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Region {
    /// Simple polygon, vertices counter-clockwise, last edge closes the loop.
    Polygon { vertices: Vec<Vec2> },
    /// `inner <= |y - center| <= outer`; `inner = 0` is a disk.
    Annulus {
        center: Vec2,
        #[serde(default)]
        inner: f64,
        outer: f64,
    },
    Union(Vec<Region>),
    Intersection(Vec<Region>),
    Complement(Box<Region>),
    /// `g(x, y) <= 0` inside `bbox`.
    Implicit { g: Expression, bbox: BBox },
}

impl Region {
    pub fn disk(center: Vec2, radius: f64) -> Self {
        Region::Annulus {
            center,
            inner: 0.0,
            outer: radius,
        }
    }

    pub fn rect(lo: Vec2, hi: Vec2) -> Self {
        Region::Polygon {
            vertices: vec![lo, Vec2::new(hi.x, lo.y), hi, Vec2::new(lo.x, hi.y)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Region::Polygon { vertices } => validate_polygon(vertices),
            Region::Annulus {
                center,
                inner,
                outer,
            } => {
                if !(center.x.is_finite() && center.y.is_finite()) {
                    return Err(Error::scene("annulus center must be finite"));
                }
                if !(inner.is_finite() && outer.is_finite() && *inner >= 0.0 && inner < outer) {
                    return Err(Error::scene(format!(
                        "annulus radii must satisfy 0 <= inner < outer, got inner={inner}, outer={outer}"
                    )));
                }
                Ok(())
            }
            Region::Union(parts) | Region::Intersection(parts) => {
                if parts.is_empty() {
                    return Err(Error::scene("set expression with no operands"));
                }
                parts.iter().try_for_each(Region::validate)
            }
            Region::Complement(inner) => inner.validate(),
            Region::Implicit { bbox, .. } => {
                if !bbox.is_valid() {
                    return Err(Error::scene("implicit region needs a finite, non-empty bbox"));
                }
                Ok(())
            }
        }
    }

    /// Bounding box, `None` when the region is unbounded.
    pub fn bbox(&self) -> Option<BBox> {
        match self {
            Region::Polygon { vertices } => {
                let first = *vertices.first()?;
                let mut b = BBox::new(first, first);
                for v in vertices {
                    b = b.union(&BBox::new(*v, *v));
                }
                Some(b)
            }
            Region::Annulus { center, outer, .. } => Some(BBox::new(
                *center - Vec2::new(*outer, *outer),
                *center + Vec2::new(*outer, *outer),
            )),
            Region::Union(parts) => {
                let mut acc: Option<BBox> = None;
                for p in parts {
                    let b = p.bbox()?;
                    acc = Some(acc.map_or(b, |a| a.union(&b)));
                }
                acc
            }
            Region::Intersection(parts) => parts
                .iter()
                .filter_map(Region::bbox)
                .reduce(|a, b| a.intersect(&b)),
            Region::Complement(_) => None,
            Region::Implicit { bbox, .. } => Some(*bbox),
        }
    }

    /// Membership; boundary points count as inside.
    pub fn contains(&self, p: Vec2) -> bool {
        match self {
            Region::Polygon { vertices } => polygon_contains(vertices, p),
            Region::Annulus {
                center,
                inner,
                outer,
            } => {
                let r = p.dist(*center);
                r <= *outer && r >= *inner
            }
            Region::Union(parts) => parts.iter().any(|r| r.contains(p)),
            Region::Intersection(parts) => parts.iter().all(|r| r.contains(p)),
            Region::Complement(inner) => !inner.contains(p),
            Region::Implicit { g, bbox } => {
                p.x >= bbox.lo.x
                    && p.x <= bbox.hi.x
                    && p.y >= bbox.lo.y
                    && p.y <= bbox.hi.y
                    && g.eval(p.x, p.y) <= 0.0
            }
        }
    }

    /// Parameters `t` for which `p + t·d` lies in the region (`d` unit).
    pub fn chord(&self, p: Vec2, d: Vec2) -> IntervalSet {
        match self {
            Region::Polygon { vertices } => polygon_chord(vertices, p, d),
            Region::Annulus {
                center,
                inner,
                outer,
            } => {
                let outer_set = disk_chord(*center, *outer, p, d);
                if *inner > 0.0 {
                    outer_set.intersect(&disk_chord(*center, *inner, p, d).complement())
                } else {
                    outer_set
                }
            }
            Region::Union(parts) => parts
                .iter()
                .fold(IntervalSet::empty(), |acc, r| acc.union(&r.chord(p, d))),
            Region::Intersection(parts) => {
                let mut it = parts.iter();
                let first = it.next().map(|r| r.chord(p, d)).unwrap_or_default();
                it.fold(first, |acc, r| acc.intersect(&r.chord(p, d)))
            }
            Region::Complement(inner) => inner.chord(p, d).complement(),
            Region::Implicit { g, bbox } => implicit_chord(g, bbox, p, d),
        }
    }

    fn collect_polygons<'a>(&'a self, out: &mut Vec<&'a [Vec2]>) {
        match self {
            Region::Polygon { vertices } => out.push(vertices),
            Region::Union(parts) | Region::Intersection(parts) => {
                parts.iter().for_each(|r| r.collect_polygons(out))
            }
            Region::Complement(inner) => inner.collect_polygons(out),
            _ => {}
        }
    }

    fn collect_circles(&self, out: &mut Vec<(Vec2, f64)>) {
        match self {
            Region::Annulus {
                center,
                inner,
                outer,
            } => {
                if *inner > 0.0 {
                    out.push((*center, *inner));
                }
                out.push((*center, *outer));
            }
            Region::Union(parts) | Region::Intersection(parts) => {
                parts.iter().for_each(|r| r.collect_circles(out))
            }
            Region::Complement(inner) => inner.collect_circles(out),
            _ => {}
        }
    }
}

fn signed_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>() * 0.5
}

fn segments_cross(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o = |p: Vec2, q: Vec2, r: Vec2| (q - p).cross(r - p);
    let (d1, d2) = (o(c, d, a), o(c, d, b));
    let (d3, d4) = (o(a, b, c), o(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Vec2, q: Vec2, r: Vec2, orient: f64| {
        orient == 0.0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(c, d, a, d1) || on(c, d, b, d2) || on(a, b, c, d3) || on(a, b, d, d4)
}

fn validate_polygon(v: &[Vec2]) -> Result<()> {
    let n = v.len();
    if n < 3 {
        return Err(Error::scene(format!("polygon needs at least 3 vertices, got {n}")));
    }
    if v.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
        return Err(Error::scene("polygon vertex is not finite"));
    }
    let area = signed_area(v);
    if area <= 0.0 {
        return Err(Error::scene(format!(
            "polygon must be counter-clockwise with positive area (signed area {area})"
        )));
    }
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        if a == b {
            return Err(Error::scene(format!("polygon has repeated vertex {i}")));
        }
        for j in i + 1..n {
            // adjacent edges share a vertex by construction
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (v[j], v[(j + 1) % n]);
            if segments_cross(a, b, c, d) {
                return Err(Error::scene(format!("polygon edges {i} and {j} intersect")));
            }
        }
    }
    Ok(())
}

fn point_segment_dist(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

fn polygon_contains(v: &[Vec2], p: Vec2) -> bool {
    let n = v.len();
    let scale = v.iter().fold(1.0f64, |m, q| m.max(q.x.abs()).max(q.y.abs()));
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        if point_segment_dist(p, a, b) <= 1e-12 * scale {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn polygon_chord(v: &[Vec2], p: Vec2, d: Vec2) -> IntervalSet {
    // even-odd crossings of the line with the edges; a vertex on the line is
    // counted once through the half-open side test
    let nrm = d.perp();
    let n = v.len();
    let mut ts: Vec<f64> = Vec::new();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        let sa = (a - p).dot(nrm);
        let sb = (b - p).dot(nrm);
        if (sa > 0.0) != (sb > 0.0) {
            let lam = sa / (sa - sb);
            let q = a + (b - a) * lam;
            ts.push((q - p).dot(d));
        }
    }
    ts.sort_by(f64::total_cmp);
    IntervalSet::from_spans(ts.chunks_exact(2).map(|c| (c[0], c[1])).collect())
}

fn disk_chord(c: Vec2, r: f64, p: Vec2, d: Vec2) -> IntervalSet {
    let w = p - c;
    let b = w.dot(d);
    let disc = b * b - (w.dot(w) - r * r);
    if disc <= 0.0 {
        return IntervalSet::empty();
    }
    let h = disc.sqrt();
    IntervalSet::single(-b - h, -b + h)
}

fn implicit_chord(g: &Expression, bbox: &BBox, p: Vec2, d: Vec2) -> IntervalSet {
    let Some((t0, t1)) = bbox.clip_line(p, d) else {
        return IntervalSet::empty();
    };
    let eval = |t: f64| {
        let q = p + d * t;
        g.eval(q.x, q.y)
    };
    let n = IMPLICIT_SAMPLES;
    let step = (t1 - t0) / n as f64;
    let mut spans = Vec::new();
    let mut start = if eval(t0) <= 0.0 { Some(t0) } else { None };
    let mut prev_t = t0;
    let mut prev_in = start.is_some();
    for i in 1..=n {
        let t = if i == n { t1 } else { t0 + step * i as f64 };
        let now_in = eval(t) <= 0.0;
        if now_in != prev_in {
            let root = bisect(&eval, prev_t, t, prev_in);
            if now_in {
                start = Some(root);
            } else if let Some(s) = start.take() {
                spans.push((s, root));
            }
        }
        prev_t = t;
        prev_in = now_in;
    }
    if let Some(s) = start {
        spans.push((s, t1));
    }
    IntervalSet::from_spans(spans)
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, a_inside: bool) -> f64 {
    while b - a > ROOT_TOL {
        let m = 0.5 * (a + b);
        if (f(m) <= 0.0) == a_inside {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Source amplitude on one component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Amplitude {
    Constant {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    /// `exp(a·|y|²)`
    RadialExponential { a: f64 },
    /// `|y| + c`
    RadialAffine { c: f64 },
    /// Real-valued expression in `x`, `y`, `r`.
    Expression(Expression),
}

impl Amplitude {
    pub fn constant(v: f64) -> Self {
        Amplitude::Constant { re: v, im: 0.0 }
    }

    pub fn eval(&self, p: Vec2) -> Complex64 {
        match self {
            Amplitude::Constant { re, im } => Complex64::new(*re, *im),
            Amplitude::RadialExponential { a } => Complex64::from((a * p.dot(p)).exp()),
            Amplitude::RadialAffine { c } => Complex64::from(p.norm() + c),
            Amplitude::Expression(e) => Complex64::from(e.eval(p.x, p.y)),
        }
    }

    pub fn as_constant(&self) -> Option<Complex64> {
        match self {
            Amplitude::Constant { re, im } => Some(Complex64::new(*re, *im)),
            _ => None,
        }
    }

    /// Multiplies the amplitude by a real factor.
    pub fn scaled(&self, s: f64) -> Amplitude {
        match self {
            Amplitude::Constant { re, im } => Amplitude::Constant {
                re: re * s,
                im: im * s,
            },
            other => {
                let src = match other {
                    Amplitude::RadialExponential { a } => format!("exp({a}*r^2)"),
                    Amplitude::RadialAffine { c } => format!("r + {c}"),
                    Amplitude::Expression(e) => e.source().to_string(),
                    Amplitude::Constant { .. } => unreachable!(),
                };
                Amplitude::Expression(
                    Expression::parse(&format!("({s}) * ({src})"))
                        .expect("scaled amplitude expression is well formed"),
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub region: Region,
    pub amplitude: Amplitude,
}

/// The source `f = Σ amplitude_m · χ_{region_m}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceScene {
    pub components: Vec<Component>,
}

impl SourceScene {
    pub fn new(components: Vec<Component>) -> Self {
        Self { components }
    }

    pub fn single(region: Region, amplitude: Amplitude) -> Self {
        Self::new(vec![Component { region, amplitude }])
    }

    /// Checks region invariants, boundedness and the boundary amplitude
    /// condition. Returns warnings for overlapping components.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        for (i, c) in self.components.iter().enumerate() {
            c.region
                .validate()
                .map_err(|e| Error::scene(format!("component {i}: {}", e.root())))?;
            let b = c
                .region
                .bbox()
                .ok_or_else(|| Error::scene(format!("component {i} is unbounded")))?;
            if !b.is_valid() {
                return Err(Error::scene(format!("component {i} is empty")));
            }
            for p in boundary_samples(&c.region, &b, 64) {
                let a = c.amplitude.eval(p);
                if !(a.re.is_finite() && a.im.is_finite()) {
                    return Err(Error::scene(format!(
                        "component {i}: amplitude is not finite at ({}, {})",
                        p.x, p.y
                    )));
                }
                if a.norm() < 1e-12 {
                    return Err(Error::scene(format!(
                        "component {i}: amplitude vanishes on the boundary at ({}, {})",
                        p.x, p.y
                    )));
                }
            }
        }
        if self.components.len() > 1 {
            let overlaps = self.overlap_count(10_000, 0x5eed);
            if overlaps > 0 {
                warnings.push(format!(
                    "{overlaps} of 10000 sample points lie in more than one component"
                ));
            }
        }
        Ok(warnings)
    }

    fn overlap_count(&self, samples: usize, seed: u64) -> usize {
        let Some(b) = self.bbox() else { return 0 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples)
            .filter(|_| {
                let p = Vec2::new(
                    rng.random_range(b.lo.x..=b.hi.x),
                    rng.random_range(b.lo.y..=b.hi.y),
                );
                self.components
                    .iter()
                    .filter(|c| c.region.contains(p))
                    .count()
                    > 1
            })
            .count()
    }

    /// Union of component boxes; `None` for an empty or unbounded scene.
    pub fn bbox(&self) -> Option<BBox> {
        let mut acc: Option<BBox> = None;
        for c in &self.components {
            let b = c.region.bbox()?;
            acc = Some(acc.map_or(b, |a| a.union(&b)));
        }
        acc
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn evaluate_source(&self, p: Vec2) -> Complex64 {
        self.components
            .iter()
            .filter(|c| c.region.contains(p))
            .map(|c| c.amplitude.eval(p))
            .sum()
    }

    pub fn translated(&self, t: Vec2) -> SourceScene {
        SourceScene::new(
            self.components
                .iter()
                .map(|c| Component {
                    region: translate_region(&c.region, t),
                    amplitude: translate_amplitude(&c.amplitude, t),
                })
                .collect(),
        )
    }

    /// Per-component intervals in τ along `l_{x̂,s}`.
    pub fn component_chords(&self, xhat: Vec2, s: f64) -> Result<Vec<IntervalSet>> {
        check_unit(xhat)?;
        Ok(self
            .components
            .iter()
            .map(|c| c.region.chord(xhat * s, xhat.perp()))
            .collect())
    }

    /// Intervals `[β_j, α_j]` in τ where `s·x̂ + τ·x̂⊥` meets the support.
    pub fn line_support_intersections(&self, xhat: Vec2, s: f64) -> Result<Vec<(f64, f64)>> {
        let sets = self.component_chords(xhat, s)?;
        Ok(sets
            .into_iter()
            .fold(IntervalSet::empty(), |a, b| a.union(&b))
            .spans()
            .to_vec())
    }

    /// Corners, circles and edges of the support.
    pub fn ground_truth(&self) -> GroundTruth {
        ground_truth(self)
    }
}

fn check_unit(xhat: Vec2) -> Result<()> {
    if (xhat.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::arg(format!(
            "direction ({}, {}) is not unit-norm",
            xhat.x, xhat.y
        )));
    }
    Ok(())
}

fn translate_region(r: &Region, t: Vec2) -> Region {
    match r {
        Region::Polygon { vertices } => Region::Polygon {
            vertices: vertices.iter().map(|v| *v + t).collect(),
        },
        Region::Annulus {
            center,
            inner,
            outer,
        } => Region::Annulus {
            center: *center + t,
            inner: *inner,
            outer: *outer,
        },
        Region::Union(p) => Region::Union(p.iter().map(|r| translate_region(r, t)).collect()),
        Region::Intersection(p) => {
            Region::Intersection(p.iter().map(|r| translate_region(r, t)).collect())
        }
        Region::Complement(inner) => Region::Complement(Box::new(translate_region(inner, t))),
        Region::Implicit { g, bbox } => Region::Implicit {
            g: shift_expression(g, t),
            bbox: BBox::new(bbox.lo + t, bbox.hi + t),
        },
    }
}

fn shift_expression(e: &Expression, t: Vec2) -> Expression {
    // f(y - t): substitute x -> x - tx, y -> y - ty
    let body = substitute_xy(e.source(), t);
    Expression::parse(&body).expect("shifted expression is well formed")
}

fn substitute_xy(src: &str, t: Vec2) -> String {
    let mut out = String::with_capacity(src.len() * 2);
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match word.as_str() {
                "x" => out.push_str(&format!("(x - ({}))", t.x)),
                "y" => out.push_str(&format!("(y - ({}))", t.y)),
                "r" => out.push_str(&format!("sqrt((x - ({}))^2 + (y - ({}))^2)", t.x, t.y)),
                _ => out.push_str(&word),
            }
        } else if c.is_ascii_digit() || c == '.' {
            // keep exponents such as 1e-3 intact
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            out.extend(&chars[start..i]);
        } else {
            out.push(c);
            i += 1;
        }
    }
    out
}

fn translate_amplitude(a: &Amplitude, t: Vec2) -> Amplitude {
    match a {
        Amplitude::Constant { .. } => a.clone(),
        Amplitude::RadialExponential { a: c } => Amplitude::Expression(
            Expression::parse(&substitute_xy(&format!("exp(({c})*(x^2 + y^2))"), t))
                .expect("well formed"),
        ),
        Amplitude::RadialAffine { c } => Amplitude::Expression(
            Expression::parse(&substitute_xy(&format!("r + ({c})"), t)).expect("well formed"),
        ),
        Amplitude::Expression(e) => Amplitude::Expression(shift_expression(e, t)),
    }
}

/// Boundary points found as chord endpoints of horizontal and vertical lines.
fn boundary_samples(r: &Region, b: &BBox, lines: usize) -> Vec<Vec2> {
    let mut out = Vec::new();
    for i in 0..lines {
        let f = (i as f64 + 0.5) / lines as f64;
        let y = b.lo.y + f * b.height();
        let p = Vec2::new(0.0, y);
        for &(a, c) in r.chord(p, Vec2::new(1.0, 0.0)).spans() {
            for t in [a, c] {
                if t.is_finite() {
                    out.push(p + Vec2::new(t, 0.0));
                }
            }
        }
        let x = b.lo.x + f * b.width();
        let p = Vec2::new(x, 0.0);
        for &(a, c) in r.chord(p, Vec2::new(0.0, 1.0)).spans() {
            for t in [a, c] {
                if t.is_finite() {
                    out.push(p + Vec2::new(0.0, t));
                }
            }
        }
    }
    out
}

/// Offsets of the two lines with normal `x̂` tangent to a circle.
pub fn tangent_offsets(center: Vec2, radius: f64, xhat: Vec2) -> (f64, f64) {
    let m = xhat.dot(center);
    (m - radius, m + radius)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
}

/// Exact support geometry of a scene.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub corners: Vec<Vec2>,
    pub circles: Vec<Circle>,
    /// Pairs of indices into `corners`.
    pub edges: Vec<(usize, usize)>,
}

/// Fraction of a small circle around `p` that lies in the support.
fn inside_fraction(scene: &SourceScene, p: Vec2, radius: f64) -> f64 {
    let n = 720;
    let inside = (0..n)
        .filter(|&i| {
            let q = p + Vec2::from_angle((i as f64 + 0.5) * std::f64::consts::TAU / n as f64) * radius;
            scene.components.iter().any(|c| c.region.contains(q))
        })
        .count();
    inside as f64 / n as f64
}

fn ground_truth(scene: &SourceScene) -> GroundTruth {
    let mut polys: Vec<&[Vec2]> = Vec::new();
    let mut circles: Vec<(Vec2, f64)> = Vec::new();
    for c in &scene.components {
        c.region.collect_polygons(&mut polys);
        c.region.collect_circles(&mut circles);
    }
    let scale = scene
        .bbox()
        .map(|b| b.width().max(b.height()))
        .unwrap_or(1.0);
    let probe = 1e-6 * scale;

    // candidate corners: vertices and edge-edge intersections
    let mut candidates: Vec<Vec2> = polys.iter().flat_map(|p| p.iter().copied()).collect();
    let edges: Vec<(Vec2, Vec2)> = polys
        .iter()
        .flat_map(|p| (0..p.len()).map(move |i| (p[i], p[(i + 1) % p.len()])))
        .collect();
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            if let Some(q) = segment_intersection(edges[i], edges[j]) {
                candidates.push(q);
            }
        }
    }
    let mut corners: Vec<Vec2> = Vec::new();
    for c in candidates {
        if corners.iter().any(|q| q.dist(c) < 1e-9 * scale) {
            continue;
        }
        let f = inside_fraction(scene, c, probe);
        if f > 0.0 && f < 1.0 && (f - 0.5).abs() > 0.01 {
            corners.push(c);
        }
    }
    corners.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));

    let mut edge_list = Vec::new();
    for i in 0..corners.len() {
        for j in i + 1..corners.len() {
            let on_boundary = (1..16).all(|t| {
                let q = corners[i] + (corners[j] - corners[i]) * (t as f64 / 16.0);
                let f = inside_fraction(scene, q, probe);
                f > 0.0 && f < 1.0
            });
            if on_boundary {
                edge_list.push((i, j));
            }
        }
    }

    let mut circ: Vec<Circle> = Vec::new();
    for (c, r) in circles {
        if circ
            .iter()
            .any(|k| k.center.dist(c) < 1e-12 && (k.radius - r).abs() < 1e-12)
        {
            continue;
        }
        let visible = (0..64).any(|i| {
            let q = c + Vec2::from_angle(i as f64 * std::f64::consts::TAU / 64.0) * r;
            let f = inside_fraction(scene, q, probe);
            f > 0.0 && f < 1.0
        });
        if visible {
            circ.push(Circle {
                center: c,
                radius: r,
            });
        }
    }
    GroundTruth {
        corners,
        circles: circ,
        edges: edge_list,
    }
}

fn segment_intersection((a, b): (Vec2, Vec2), (c, d): (Vec2, Vec2)) -> Option<Vec2> {
    let r = b - a;
    let s = d - c;
    let den = r.cross(s);
    if den.abs() < 1e-14 {
        return None;
    }
    let t = (c - a).cross(s) / den;
    let u = (c - a).cross(r) / den;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then(|| a + r * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn annulus() -> Region {
        Region::Annulus {
            center: Vec2::new(0.0, 0.0),
            inner: 0.5,
            outer: 1.0,
        }
    }

    #[test]
    fn contains_examples() {
        assert!(annulus().contains(Vec2::new(0.75, 0.0)));
        assert!(!annulus().contains(Vec2::new(0.0, 0.0)));
        let sq = Region::rect(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0));
        assert!(!sq.contains(Vec2::new(2.0, 2.0)));
        assert!(sq.contains(Vec2::new(1.0, 0.5)));
        assert!(sq.contains(Vec2::new(0.0, 0.0)));
    }

    #[test]
    fn evaluate_source_examples() {
        assert_eq!(SourceScene::default().evaluate_source(Vec2::new(0.3, 0.1)), Complex64::new(0.0, 0.0));
        let disk = Region::disk(Vec2::new(0.0, 0.0), 1.0);
        let s = SourceScene::single(disk.clone(), Amplitude::constant(1.0));
        assert_eq!(s.evaluate_source(Vec2::new(0.5, 0.0)).re, 1.0);
        let s = SourceScene::single(disk, Amplitude::RadialAffine { c: 5.0 });
        assert_eq!(s.evaluate_source(Vec2::new(0.5, 0.0)).re, 5.5);
    }

    #[test]
    fn line_support_examples() {
        let disk = SourceScene::single(Region::disk(Vec2::default(), 1.0), Amplitude::constant(1.0));
        let x = Vec2::from_angle(0.7);
        let iv = disk.line_support_intersections(x, 0.0).unwrap();
        assert_eq!(iv.len(), 1);
        assert!((iv[0].0 + 1.0).abs() < 1e-14 && (iv[0].1 - 1.0).abs() < 1e-14);
        assert!(disk.line_support_intersections(x, 2.0).unwrap().is_empty());

        let ann = SourceScene::single(annulus(), Amplitude::constant(1.0));
        let iv = ann.line_support_intersections(x, 0.0).unwrap();
        let want = [(-1.0, -0.5), (0.5, 1.0)];
        assert_eq!(iv.len(), 2);
        for (g, w) in iv.iter().zip(want) {
            assert!((g.0 - w.0).abs() < 1e-14 && (g.1 - w.1).abs() < 1e-14);
        }
        assert!(disk.line_support_intersections(Vec2::new(1.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn tangent_offset_examples() {
        assert_eq!(tangent_offsets(Vec2::new(1.0, 1.0), 1.0, Vec2::new(1.0, 0.0)), (0.0, 2.0));
        assert_eq!(tangent_offsets(Vec2::new(-1.0, -1.0), 1.0, Vec2::new(0.0, 1.0)), (-2.0, 0.0));
        let (a, b) = tangent_offsets(Vec2::default(), 0.5, Vec2::from_angle(1.3));
        assert_eq!((a, b), (-0.5, 0.5));
    }

    #[test]
    fn polygon_validation() {
        let cw = Region::Polygon {
            vertices: vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0)],
        };
        assert!(cw.validate().is_err());
        let bowtie = Region::Polygon {
            vertices: vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(1.0, 1.0),
                Vec2::new(1.0, 0.0),
                Vec2::new(0.0, 1.0),
            ],
        };
        assert!(bowtie.validate().is_err());
        assert!(Region::rect(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0)).validate().is_ok());
    }

    #[test]
    fn implicit_chord_brackets_roots() {
        let r = Region::Implicit {
            g: Expression::parse("x^2 + y^2 - 1").unwrap(),
            bbox: BBox::new(Vec2::new(-2.0, -2.0), Vec2::new(2.0, 2.0)),
        };
        let iv = r.chord(Vec2::new(0.0, 0.6), Vec2::new(1.0, 0.0));
        assert_eq!(iv.spans().len(), 1);
        assert!((iv.spans()[0].1 - 0.8).abs() < 1e-9);
    }

    #[test]
    fn boundary_amplitude_must_not_vanish() {
        let s = SourceScene::single(
            Region::disk(Vec2::default(), 1.0),
            Amplitude::Expression(Expression::parse("1 - r^2").unwrap()),
        );
        assert!(s.validate().is_err());
    }

    #[test]
    fn ground_truth_of_l_shape_from_set_expression() {
        let big = Region::rect(Vec2::new(0.0, 0.0), Vec2::new(1.5, 1.5));
        let notch = Region::rect(Vec2::new(0.0, 0.0), Vec2::new(0.75, 0.75));
        let lshape = Region::Intersection(vec![big, Region::Complement(Box::new(notch))]);
        let scene = SourceScene::single(lshape, Amplitude::constant(1.0));
        let gt = scene.ground_truth();
        assert_eq!(gt.corners.len(), 6, "{:?}", gt.corners);
        assert_eq!(gt.edges.len(), 6);
        assert!(gt.circles.is_empty());
    }

    #[test]
    fn translation_moves_expression_amplitudes() {
        let s = SourceScene::single(
            Region::disk(Vec2::new(0.0, 0.0), 1.0),
            Amplitude::RadialAffine { c: 5.0 },
        );
        let t = Vec2::new(0.3, -0.2);
        let moved = s.translated(t);
        let p = Vec2::new(0.4, 0.1);
        assert!((moved.evaluate_source(p + t) - s.evaluate_source(p)).norm() < 1e-14);
    }
}
