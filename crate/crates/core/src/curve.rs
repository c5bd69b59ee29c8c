//! Closed planar polylines, arc-length resampling, Menger curvature and the
//! p-elastica energy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{signed_area, BBox, Point2};
use crate::scalar::{ordered_sum, Real};

/// Weights of the bending energy `sum (alpha + beta |k|^p) ds`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct ElasticaParams<T> {
    pub p: T,
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> ElasticaParams<T> {
    pub fn new(p: T, alpha: T, beta: T) -> Result<Self> {
        let params = ElasticaParams { p, alpha, beta };
        params.validate()?;
        Ok(params)
    }

    /// `p = 2`, `alpha = beta = 1`.
    pub fn standard() -> Self {
        ElasticaParams { p: T::two(), alpha: T::one(), beta: T::one() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > T::one()) {
            return Err(Error::invalid("elastica_params", format!("p must exceed 1, got {}", self.p)));
        }
        if !(self.alpha > T::zero()) {
            return Err(Error::invalid("elastica_params", format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.beta >= T::zero()) || !self.beta.is_finite() {
            return Err(Error::invalid("elastica_params", format!("beta must be nonnegative, got {}", self.beta)));
        }
        Ok(())
    }

    /// Integrand `alpha + beta |k|^p`.
    #[inline]
    pub fn density(&self, k: T) -> T {
        self.alpha + self.beta * k.abs().powf(self.p)
    }
}

/// Length and curvature contributions of an energy evaluation, kept apart
/// so reports can show both.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyParts<T> {
    pub length: T,
    /// `integral |k|^p ds` (unweighted).
    pub curvature: T,
}

impl<T: Real> EnergyParts<T> {
    pub fn total(&self, params: &ElasticaParams<T>) -> T {
        params.alpha * self.length + params.beta * self.curvature
    }

    pub fn scaled(self, m: T) -> Self {
        EnergyParts { length: self.length * m, curvature: self.curvature * m }
    }
}

impl<T: Real> std::ops::Add for EnergyParts<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        EnergyParts { length: self.length + o.length, curvature: self.curvature + o.curvature }
    }
}

/// A closed polyline; the last point is joined back to the first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveFile<T>", into = "CurveFile<T>")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Curve<T> {
    points: Vec<Point2<T>>,
    orientation: i8,
    length: T,
}

/// On-disk form of a curve.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct CurveFile<T> {
    pub points: Vec<Point2<T>>,
    #[serde(default = "default_closed")]
    pub closed: bool,
}

fn default_closed() -> bool {
    true
}

impl<T: Real> TryFrom<CurveFile<T>> for Curve<T> {
    type Error = Error;
    fn try_from(f: CurveFile<T>) -> Result<Self> {
        if !f.closed {
            return Err(Error::invalid("read_curve", "open curves are not accepted (\"closed\": false)"));
        }
        Curve::new(f.points)
    }
}

impl<T: Real> From<Curve<T>> for CurveFile<T> {
    fn from(c: Curve<T>) -> Self {
        CurveFile { points: c.points, closed: true }
    }
}

impl<T: Real> Curve<T> {
    /// Builds a closed curve. A trailing copy of the first point is dropped;
    /// any other repeated consecutive point is rejected.
    pub fn new(mut points: Vec<Point2<T>>) -> Result<Self> {
        if points.len() > 1 && points.first() == points.last() {
            points.pop();
        }
        if points.len() < 3 {
            return Err(Error::degenerate("curve", format!("need at least 3 distinct points, got {}", points.len())));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::invalid("curve", format!("point {i} is not finite")));
        }
        let n = points.len();
        let mut seg = Vec::with_capacity(n);
        for i in 0..n {
            let l = points[i].dist(points[(i + 1) % n]);
            if l <= T::zero() {
                let p = points[i];
                return Err(Error::degenerate(
                    "curve",
                    format!("zero-length segment at point {i} ({}, {})", p.x, p.y),
                ));
            }
            seg.push(l);
        }
        let length = ordered_sum(seg);
        let orientation = if signed_area(&points) >= T::zero() { 1 } else { -1 };
        Ok(Curve { points, orientation, length })
    }

    /// Samples a closed parametric curve `f(theta)`, `theta` in `[0, 2pi)`,
    /// at `n` parameter-uniform points.
    pub fn from_fn(n: usize, f: impl Fn(T) -> Point2<T>) -> Result<Self> {
        let pts = (0..n).map(|i| f(T::TAU() * T::of_usize(i) / T::of_usize(n))).collect();
        Curve::new(pts)
    }

    /// Circle of radius `r` centred at `c`, sampled uniformly. Counterclockwise
    /// unless `clockwise`.
    pub fn circle(c: Point2<T>, r: T, n: usize, clockwise: bool) -> Result<Self> {
        let s = if clockwise { -T::one() } else { T::one() };
        Curve::from_fn(n, |a: T| Point2::new(c.x + r * a.cos(), c.y + s * r * a.sin()))
    }

    /// Axis-aligned ellipse with semi-axes `a`, `b`, counterclockwise, resampled
    /// to `n` equally spaced points.
    pub fn ellipse(c: Point2<T>, a: T, b: T, n: usize) -> Result<Self> {
        let fine = Curve::from_fn(16 * n.max(64), |t: T| Point2::new(c.x + a * t.cos(), c.y + b * t.sin()))?;
        resample_arclength(&fine, n)
    }

    pub fn points(&self) -> &[Point2<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// +1 for counterclockwise, −1 for clockwise.
    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn signed_area(&self) -> T {
        signed_area(&self.points)
    }

    pub fn bbox(&self) -> BBox<T> {
        BBox::from_points(&self.points).expect("curve is non-empty")
    }

    /// Segment `i` joins point `i` to point `i + 1 (mod n)`.
    pub fn segment(&self, i: usize) -> (Point2<T>, Point2<T>) {
        let n = self.points.len();
        (self.points[i % n], self.points[(i + 1) % n])
    }

    pub fn segment_lengths(&self) -> Vec<T> {
        let n = self.points.len();
        (0..n).map(|i| self.points[i].dist(self.points[(i + 1) % n])).collect()
    }

    /// Median segment length.
    pub fn median_spacing(&self) -> T {
        let mut s = self.segment_lengths();
        s.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        s[s.len() / 2]
    }

    /// Same trace traversed the other way.
    pub fn reversed(&self) -> Self {
        let mut pts = self.points.clone();
        pts.reverse();
        Curve { points: pts, orientation: -self.orientation, length: self.length }
    }

    /// Applies `f` to every point.
    pub fn map_points(&self, f: impl Fn(Point2<T>) -> Point2<T>) -> Result<Self> {
        Curve::new(self.points.iter().map(|&p| f(p)).collect())
    }

    pub fn translated(&self, d: Point2<T>) -> Result<Self> {
        self.map_points(|p| p + d)
    }

    pub fn scaled(&self, s: T) -> Result<Self> {
        self.map_points(|p| p * s)
    }

    pub fn rotated(&self, angle: T) -> Result<Self> {
        self.map_points(|p| p.rotated(angle))
    }

    pub fn cast<U: Real>(&self) -> Result<Curve<U>> {
        Curve::new(self.points.iter().map(|p| p.cast()).collect())
    }

    /// Ratio of the longest to the shortest segment.
    pub fn spacing_ratio(&self) -> T {
        let s = self.segment_lengths();
        let max = s.iter().copied().fold(T::zero(), T::max);
        let min = s.iter().copied().fold(T::infinity(), T::min);
        max / min
    }

    /// Quadrature weight of each vertex: half of each incident segment.
    pub fn vertex_weights(&self) -> Vec<T> {
        let s = self.segment_lengths();
        let n = s.len();
        (0..n).map(|j| (s[(j + n - 1) % n] + s[j]) * T::half()).collect()
    }
}

/// Resamples `curve` to `n_samples` points spaced equally in arc length along
/// the input polyline, starting at its first point.
pub fn resample_arclength<T: Real>(curve: &Curve<T>, n_samples: usize) -> Result<Curve<T>> {
    if n_samples < 8 {
        return Err(Error::invalid("resample_arclength", format!("n_samples must be at least 8, got {n_samples}")));
    }
    let pts = curve.points();
    let seg = curve.segment_lengths();
    let total = curve.length();
    if !(total > T::zero()) {
        return Err(Error::degenerate("resample_arclength", "total length is zero"));
    }
    let step = total / T::of_usize(n_samples);
    let m = pts.len();
    let mut out = Vec::with_capacity(n_samples);
    let mut i = 0usize;
    let mut start = T::zero();
    for j in 0..n_samples {
        let target = step * T::of_usize(j);
        while i + 1 < m && start + seg[i] <= target {
            start = start + seg[i];
            i += 1;
        }
        let s = ((target - start) / seg[i]).max(T::zero()).min(T::one());
        out.push(pts[i].lerp(pts[(i + 1) % m], s));
    }
    let mut c = Curve::new(out)?;
    // Keep the traversal sense of the input even if resampling flips a
    // near-zero signed area.
    c.orientation = curve.orientation;
    Ok(c)
}

/// Signed curvature of the circle through `a`, `b`, `c` (positive for a
/// left turn). Collinear triples give 0.
pub fn menger_curvature<T: Real>(a: Point2<T>, b: Point2<T>, c: Point2<T>) -> Option<T> {
    let ab = a.dist(b);
    let bc = b.dist(c);
    let ca = c.dist(a);
    if ab == T::zero() || bc == T::zero() || ca == T::zero() {
        return None;
    }
    let cross = (b - a).cross(c - b);
    Some(T::two() * cross / (ab * bc * ca))
}

/// Signed Menger curvature at every vertex (counterclockwise circle of radius
/// `R` gives `+1/R`).
pub fn curvature_samples<T: Real>(curve: &Curve<T>) -> Result<Vec<T>> {
    let pts = curve.points();
    let n = pts.len();
    (0..n)
        .map(|j| {
            let (a, b, c) = (pts[(j + n - 1) % n], pts[j], pts[(j + 1) % n]);
            menger_curvature(a, b, c).ok_or_else(|| {
                Error::degenerate("curvature_samples", format!("coincident triple at vertex {j} ({}, {})", b.x, b.y))
            })
        })
        .collect()
}

/// Length and `integral |k|^p ds` of a curve.
pub fn energy_parts<T: Real>(curve: &Curve<T>, p: T) -> Result<EnergyParts<T>> {
    let k = curvature_samples(curve)?;
    let w = curve.vertex_weights();
    let curvature = ordered_sum(k.iter().zip(&w).map(|(&k, &w)| k.abs().powf(p) * w));
    Ok(EnergyParts { length: curve.length(), curvature })
}

/// `sum_j (alpha + beta |k_j|^p) ds_j` where `ds_j` is the dual length of
/// vertex `j` (equal to `L/n` on arc-length resampled curves).
pub fn elastica_energy<T: Real>(curve: &Curve<T>, params: &ElasticaParams<T>) -> Result<T> {
    Ok(energy_parts(curve, params.p)?.total(params))
}
