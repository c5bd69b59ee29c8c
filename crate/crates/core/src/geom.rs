//! Planar primitives: points, boxes, segment predicates and a bucket index
//! for proximity queries between polylines.

use std::collections::HashMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// A point (or vector) in the plane. Serialized as `[x, y]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[T; 2]", into = "[T; 2]")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> From<[T; 2]> for Point2<T> {
    fn from(v: [T; 2]) -> Self {
        Point2 { x: v[0], y: v[1] }
    }
}

impl<T: Real> From<Point2<T>> for [T; 2] {
    fn from(p: Point2<T>) -> Self {
        [p.x, p.y]
    }
}

impl<T: Real> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Point2 { x, y }
    }

    pub fn zero() -> Self {
        Point2::new(T::zero(), T::zero())
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    /// Counterclockwise rotation by a quarter turn.
    pub fn perp(self) -> Self {
        Point2::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Point2::new(self.x / n, self.y / n)
    }

    pub fn lerp(self, o: Self, s: T) -> Self {
        self + (o - self) * s
    }

    pub fn midpoint(self, o: Self) -> Self {
        self.lerp(o, T::half())
    }

    pub fn rotated(self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn cast<U: Real>(self) -> Point2<U> {
        Point2::new(U::lit(self.x.as_f64()), U::lit(self.y.as_f64()))
    }
}

impl<T: Real> Add for Point2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> AddAssign for Point2<T> {
    fn add_assign(&mut self, o: Self) {
        self.x = self.x + o.x;
        self.y = self.y + o.y;
    }
}

impl<T: Real> Sub for Point2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> Mul<T> for Point2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Point2::new(self.x * s, self.y * s)
    }
}

impl<T: Real> Neg for Point2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Point2::new(-self.x, -self.y)
    }
}

/// Axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct BBox<T> {
    pub min: Point2<T>,
    pub max: Point2<T>,
}

impl<T: Real> BBox<T> {
    pub fn new(min: Point2<T>, max: Point2<T>) -> Self {
        BBox { min, max }
    }

    pub fn square(center: Point2<T>, half: T) -> Self {
        let h = Point2::new(half, half);
        BBox::new(center - h, center + h)
    }

    pub fn from_points<'a>(pts: impl IntoIterator<Item = &'a Point2<T>>) -> Option<Self> {
        let mut it = pts.into_iter();
        let first = *it.next()?;
        let mut b = BBox::new(first, first);
        for p in it {
            b.include(*p);
        }
        Some(b)
    }

    pub fn include(&mut self, p: Point2<T>) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn union(self, o: Self) -> Self {
        let mut b = self;
        b.include(o.min);
        b.include(o.max);
        b
    }

    pub fn expanded(self, margin: T) -> Self {
        let m = Point2::new(margin, margin);
        BBox::new(self.min - m, self.max + m)
    }

    pub fn width(&self) -> T {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> T {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point2<T>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn contains_box(&self, o: &Self) -> bool {
        self.contains(o.min) && self.contains(o.max)
    }
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance<T: Real>(p: Point2<T>, a: Point2<T>, b: Point2<T>) -> T {
    p.dist(closest_on_segment(p, a, b))
}

pub fn closest_on_segment<T: Real>(p: Point2<T>, a: Point2<T>, b: Point2<T>) -> Point2<T> {
    let ab = b - a;
    let len2 = ab.norm_sq();
    if len2 == T::zero() {
        return a;
    }
    let s = ((p - a).dot(ab) / len2).max(T::zero()).min(T::one());
    a + ab * s
}

/// Parameters `(s, u)` of a proper crossing of `[a0, a1]` and `[b0, b1]`,
/// both strictly inside `(0, 1)`. Touching at endpoints and collinear
/// overlaps are not proper crossings.
pub fn proper_intersection<T: Real>(
    a0: Point2<T>,
    a1: Point2<T>,
    b0: Point2<T>,
    b1: Point2<T>,
) -> Option<(T, T)> {
    let r = a1 - a0;
    let q = b1 - b0;
    let denom = r.cross(q);
    if denom == T::zero() {
        return None;
    }
    let w = b0 - a0;
    let s = w.cross(q) / denom;
    let u = w.cross(r) / denom;
    let (zero, one) = (T::zero(), T::one());
    if s > zero && s < one && u > zero && u < one {
        Some((s, u))
    } else {
        None
    }
}

/// Distance between two closed segments together with a representative
/// point halfway between the closest pair.
pub fn segment_distance<T: Real>(
    a0: Point2<T>,
    a1: Point2<T>,
    b0: Point2<T>,
    b1: Point2<T>,
) -> (T, Point2<T>) {
    if let Some((s, _)) = proper_intersection(a0, a1, b0, b1) {
        return (T::zero(), a0.lerp(a1, s));
    }
    let cands = [
        (a0, closest_on_segment(a0, b0, b1)),
        (a1, closest_on_segment(a1, b0, b1)),
        (closest_on_segment(b0, a0, a1), b0),
        (closest_on_segment(b1, a0, a1), b1),
    ];
    let mut best = (T::infinity(), a0);
    for (p, q) in cands {
        let d = p.dist(q);
        if d < best.0 {
            best = (d, p.midpoint(q));
        }
    }
    best
}

/// Unoriented angle between two segment directions, in `[0, pi/2]`.
pub fn line_angle<T: Real>(u: Point2<T>, v: Point2<T>) -> T {
    u.cross(v).abs().atan2(u.dot(v).abs())
}

/// Identifies one segment of one curve inside a collection of polylines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SegmentRef {
    pub curve: usize,
    pub index: usize,
}

/// Uniform bucket grid over a set of segments.
#[derive(Debug, Clone)]
pub struct SegmentIndex<T> {
    origin: Point2<T>,
    cell: T,
    buckets: HashMap<(i64, i64), Vec<usize>>,
    segments: Vec<(SegmentRef, Point2<T>, Point2<T>)>,
}

impl<T: Real> SegmentIndex<T> {
    /// Builds an index over closed polylines (last point joined to first).
    pub fn from_closed<'a, I>(polylines: I, cell: T) -> Self
    where
        I: IntoIterator<Item = &'a [Point2<T>]>,
    {
        let mut segments = Vec::new();
        for (ci, pts) in polylines.into_iter().enumerate() {
            let n = pts.len();
            for i in 0..n {
                segments.push((SegmentRef { curve: ci, index: i }, pts[i], pts[(i + 1) % n]));
            }
        }
        Self::from_segments(segments, cell)
    }

    pub fn from_segments(segments: Vec<(SegmentRef, Point2<T>, Point2<T>)>, cell: T) -> Self {
        let origin = segments.first().map(|s| s.1).unwrap_or_else(Point2::zero);
        let cell = if cell > T::zero() && cell.is_finite() { cell } else { T::one() };
        let mut idx = SegmentIndex { origin, cell, buckets: HashMap::new(), segments: Vec::new() };
        for (k, s) in segments.iter().enumerate() {
            let b = BBox::from_points([&s.1, &s.2]).expect("two points");
            let (i0, j0) = idx.key(b.min);
            let (i1, j1) = idx.key(b.max);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    idx.buckets.entry((i, j)).or_default().push(k);
                }
            }
        }
        idx.segments = segments;
        idx
    }

    fn key(&self, p: Point2<T>) -> (i64, i64) {
        let i = ((p.x - self.origin.x) / self.cell).floor().to_i64().unwrap_or(0);
        let j = ((p.y - self.origin.y) / self.cell).floor().to_i64().unwrap_or(0);
        (i, j)
    }

    pub fn segments(&self) -> &[(SegmentRef, Point2<T>, Point2<T>)] {
        &self.segments
    }

    /// Indices (into [`Self::segments`]) of segments whose bucket overlaps `bbox`.
    pub fn candidates(&self, bbox: BBox<T>) -> Vec<usize> {
        let (i0, j0) = self.key(bbox.min);
        let (i1, j1) = self.key(bbox.max);
        let mut out = Vec::new();
        if (i1 - i0 + 1).saturating_mul(j1 - j0 + 1) > 4 * self.buckets.len() as i64 + 16 {
            // Query box much larger than the populated region: scan buckets instead.
            for (&(i, j), v) in &self.buckets {
                if i >= i0 && i <= i1 && j >= j0 && j <= j1 {
                    out.extend_from_slice(v);
                }
            }
        } else {
            for i in i0..=i1 {
                for j in j0..=j1 {
                    if let Some(v) = self.buckets.get(&(i, j)) {
                        out.extend_from_slice(v);
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Distance from `p` to the nearest indexed segment, if one lies within `radius`.
    pub fn nearest_within(&self, p: Point2<T>, radius: T) -> Option<(T, SegmentRef)> {
        let mut best: Option<(T, SegmentRef)> = None;
        for k in self.candidates(BBox::new(p, p).expanded(radius)) {
            let (r, a, b) = self.segments[k];
            let d = point_segment_distance(p, a, b);
            if d <= radius && best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, r));
            }
        }
        best
    }

    /// Distance from `p` to the nearest indexed segment (unbounded search).
    pub fn nearest(&self, p: Point2<T>) -> Option<T> {
        if self.segments.is_empty() {
            return None;
        }
        let mut radius = self.cell;
        loop {
            if let Some((d, _)) = self.nearest_within(p, radius) {
                return Some(d);
            }
            radius = radius * T::two();
            if radius > self.cell * T::lit(1.0e6) {
                return self
                    .segments
                    .iter()
                    .map(|&(_, a, b)| point_segment_distance(p, a, b))
                    .fold(None, |m: Option<T>, d| Some(m.map_or(d, |m| m.min(d))));
            }
        }
    }
}

/// Shoelace signed area of a closed polyline (positive when counterclockwise).
pub fn signed_area<T: Real>(pts: &[Point2<T>]) -> T {
    let n = pts.len();
    let mut acc = T::zero();
    for i in 0..n {
        acc = acc + pts[i].cross(pts[(i + 1) % n]);
    }
    acc * T::half()
}

/// Even-odd test by horizontal ray casting. Kept independent of the
/// winding-number machinery so it can serve as a cross-check.
pub fn ray_cast_parity<T: Real>(p: Point2<T>, pts: &[Point2<T>]) -> bool {
    let n = pts.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (pts[i], pts[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = Point2<f64>;

    #[test]
    fn proper_intersection_excludes_touching() {
        let a0 = P::new(0.0, 0.0);
        let a1 = P::new(2.0, 0.0);
        assert!(proper_intersection(a0, a1, P::new(1.0, -1.0), P::new(1.0, 1.0)).is_some());
        // T-junction: endpoint on the other segment.
        assert!(proper_intersection(a0, a1, P::new(1.0, 0.0), P::new(1.0, 1.0)).is_none());
        // Collinear overlap.
        assert!(proper_intersection(a0, a1, P::new(1.0, 0.0), P::new(3.0, 0.0)).is_none());
    }

    #[test]
    fn segment_distance_parallel() {
        let (d, m) = segment_distance(P::new(0.0, 0.0), P::new(1.0, 0.0), P::new(0.5, 2.0), P::new(3.0, 2.0));
        assert!((d - 2.0).abs() < 1e-15);
        assert!((m.y - 1.0).abs() < 1e-15);
    }

    #[test]
    fn line_angle_is_unoriented() {
        let u = P::new(1.0, 0.0);
        assert!(line_angle(u, P::new(-1.0, 0.0)).abs() < 1e-15);
        assert!((line_angle(u, P::new(0.0, 3.0)) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn index_nearest_matches_brute_force() {
        let pts: Vec<P> = (0..50)
            .map(|i| {
                let a = i as f64 / 50.0 * std::f64::consts::TAU;
                P::new(a.cos(), a.sin())
            })
            .collect();
        let idx = SegmentIndex::from_closed([pts.as_slice()], 0.1);
        for q in [P::new(0.0, 0.0), P::new(3.0, 1.0), P::new(0.9, 0.1)] {
            let brute = (0..50)
                .map(|i| point_segment_distance(q, pts[i], pts[(i + 1) % 50]))
                .fold(f64::INFINITY, f64::min);
            assert!((idx.nearest(q).unwrap() - brute).abs() < 1e-14);
        }
    }
}
