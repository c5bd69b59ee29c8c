//! Finite systems of closed curves with integer multiplicities: winding
//! index, odd-index interior and its rasterization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{energy_parts, Curve, ElasticaParams, EnergyParts};
use crate::error::{Error, Result};
use crate::geom::{point_segment_distance, BBox, Point2, SegmentIndex};
use crate::scalar::Real;

/// Closed curves `curves[i]` each traversed `multiplicities[i]` times.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemFile<T>", into = "SystemFile<T>")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct CurveSystem<T> {
    curves: Vec<Curve<T>>,
    multiplicities: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct SystemFile<T> {
    pub curves: Vec<Curve<T>>,
    #[serde(default)]
    pub multiplicities: Vec<u32>,
}

impl<T: Real> TryFrom<SystemFile<T>> for CurveSystem<T> {
    type Error = Error;
    fn try_from(f: SystemFile<T>) -> Result<Self> {
        let m = if f.multiplicities.is_empty() { vec![1; f.curves.len()] } else { f.multiplicities };
        CurveSystem::new(f.curves, m)
    }
}

impl<T: Real> From<CurveSystem<T>> for SystemFile<T> {
    fn from(s: CurveSystem<T>) -> Self {
        SystemFile { curves: s.curves, multiplicities: s.multiplicities }
    }
}

impl<T: Real> CurveSystem<T> {
    pub fn new(curves: Vec<Curve<T>>, multiplicities: Vec<u32>) -> Result<Self> {
        if curves.len() != multiplicities.len() {
            return Err(Error::invalid(
                "curve_system",
                format!("{} curves but {} multiplicities", curves.len(), multiplicities.len()),
            ));
        }
        if let Some(i) = multiplicities.iter().position(|&m| m == 0) {
            return Err(Error::invalid("curve_system", format!("multiplicity of curve {i} must be positive")));
        }
        Ok(CurveSystem { curves, multiplicities })
    }

    /// The empty system (no curves).
    pub fn empty() -> Self {
        CurveSystem { curves: Vec::new(), multiplicities: Vec::new() }
    }

    /// Every curve with multiplicity one.
    pub fn simple(curves: Vec<Curve<T>>) -> Self {
        let m = vec![1; curves.len()];
        CurveSystem { curves, multiplicities: m }
    }

    pub fn single(curve: Curve<T>) -> Self {
        Self::simple(vec![curve])
    }

    pub fn curves(&self) -> &[Curve<T>] {
        &self.curves
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.multiplicities
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Curve<T>, u32)> {
        self.curves.iter().zip(self.multiplicities.iter().copied())
    }

    pub fn push(&mut self, curve: Curve<T>, multiplicity: u32) {
        assert!(multiplicity > 0, "multiplicity must be positive");
        self.curves.push(curve);
        self.multiplicities.push(multiplicity);
    }

    /// Union of two systems (curve lists concatenated).
    pub fn union(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.curves.extend(other.curves.iter().cloned());
        s.multiplicities.extend(other.multiplicities.iter().copied());
        s
    }

    pub fn with_multiplicities(&self, m: Vec<u32>) -> Result<Self> {
        CurveSystem::new(self.curves.clone(), m)
    }

    pub fn map_curves(&self, f: impl Fn(&Curve<T>) -> Result<Curve<T>>) -> Result<Self> {
        let curves = self.curves.iter().map(f).collect::<Result<Vec<_>>>()?;
        CurveSystem::new(curves, self.multiplicities.clone())
    }

    pub fn bbox(&self) -> Option<BBox<T>> {
        self.curves.iter().map(|c| c.bbox()).reduce(|a, b| a.union(b))
    }

    /// Median segment length over all curves (0 for the empty system).
    pub fn median_spacing(&self) -> T {
        let mut s: Vec<T> = self.curves.iter().flat_map(|c| c.segment_lengths()).collect();
        if s.is_empty() {
            return T::zero();
        }
        s.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        s[s.len() / 2]
    }

    /// Default proximity tolerance: twice the median sample spacing.
    pub fn default_dist_tol(&self) -> T {
        self.median_spacing() * T::two()
    }

    /// Multiplicity-weighted total length.
    pub fn total_length(&self) -> T {
        self.iter().fold(T::zero(), |acc, (c, m)| acc + c.length() * T::of_usize(m as usize))
    }

    /// Multiplicity-weighted length and curvature integrals.
    pub fn energy_parts(&self, p: T) -> Result<EnergyParts<T>> {
        let parts: Vec<EnergyParts<T>> = self
            .iter()
            .map(|(c, m)| Ok(energy_parts(c, p)?.scaled(T::of_usize(m as usize))))
            .collect::<Result<_>>()?;
        Ok(parts.into_iter().fold(EnergyParts::default(), |a, b| a + b))
    }

    /// Elastica energy of the system, each curve counted with its multiplicity.
    pub fn energy(&self, params: &ElasticaParams<T>) -> Result<T> {
        Ok(self.energy_parts(params.p)?.total(params))
    }

    /// Distance from `p` to the trace.
    pub fn distance_to_trace(&self, p: Point2<T>) -> T {
        let mut best = T::infinity();
        for c in &self.curves {
            for i in 0..c.len() {
                let (a, b) = c.segment(i);
                best = best.min(point_segment_distance(p, a, b));
            }
        }
        best
    }

    /// Spatial index over every segment of the system.
    pub fn segment_index(&self, cell: T) -> SegmentIndex<T> {
        SegmentIndex::from_closed(self.curves.iter().map(|c| c.points()), cell)
    }

    /// `sum_i m_i * I(p, gamma_i)`, rejecting points within `dist_tol` of the trace.
    pub fn winding_index_with_tol(&self, p: Point2<T>, dist_tol: T) -> Result<i64> {
        let d = self.distance_to_trace(p);
        if d <= dist_tol {
            return Err(Error::PointOnTrace {
                op: "winding_index",
                x: p.x.as_f64(),
                y: p.y.as_f64(),
                distance: d.as_f64(),
                tol: dist_tol.as_f64(),
            });
        }
        let mut total = 0i64;
        for (c, m) in self.iter() {
            let w = curve_winding(p, c.points());
            let r = w.round();
            assert!((w - r).abs() < 0.1, "winding residual {} too large", (w - r).abs());
            total += r as i64 * m as i64;
        }
        Ok(total)
    }

    /// Winding index with the default tolerance.
    pub fn winding_index(&self, p: Point2<T>) -> Result<i64> {
        self.winding_index_with_tol(p, self.default_dist_tol())
    }

    /// Odd-index interior membership.
    pub fn interior_membership(&self, p: Point2<T>) -> Result<bool> {
        Ok(self.winding_index(p)?.rem_euclid(2) == 1)
    }

    pub fn interior_membership_with_tol(&self, p: Point2<T>, dist_tol: T) -> Result<bool> {
        Ok(self.winding_index_with_tol(p, dist_tol)?.rem_euclid(2) == 1)
    }

    /// Area of the interior, rasterized on `resolution × resolution` cells of `bbox`.
    pub fn interior_area(&self, bbox: BBox<T>, resolution: usize) -> T {
        let raster = Raster::new(bbox, resolution, resolution);
        raster.cell_area() * T::of_usize(interior_mask(self, &raster).count())
    }

    pub fn cast<U: Real>(&self) -> Result<CurveSystem<U>> {
        let curves = self.curves.iter().map(|c| c.cast()).collect::<Result<Vec<_>>>()?;
        CurveSystem::new(curves, self.multiplicities.clone())
    }
}

/// Winding number of a closed polyline around `p` as a real number (sum of
/// signed turning angles divided by 2pi).
fn curve_winding<T: Real>(p: Point2<T>, pts: &[Point2<T>]) -> f64 {
    let n = pts.len();
    let mut acc = 0.0f64;
    for i in 0..n {
        let a = pts[i] - p;
        let b = pts[(i + 1) % n] - p;
        acc += a.cross(b).as_f64().atan2(a.dot(b).as_f64());
    }
    acc / std::f64::consts::TAU
}

/// Cell-centred sampling lattice over a rectangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Raster<T> {
    pub bbox: BBox<T>,
    pub nx: usize,
    pub ny: usize,
}

impl<T: Real> Raster<T> {
    pub fn new(bbox: BBox<T>, nx: usize, ny: usize) -> Self {
        assert!(nx > 0 && ny > 0, "raster needs at least one cell");
        Raster { bbox, nx, ny }
    }

    /// Square cells of side approximately `cell` covering `bbox`.
    pub fn with_cell(bbox: BBox<T>, cell: T) -> Self {
        let nx = (bbox.width() / cell).ceil().to_usize().unwrap_or(1).max(1);
        let ny = (bbox.height() / cell).ceil().to_usize().unwrap_or(1).max(1);
        let w = cell * T::of_usize(nx);
        let h = cell * T::of_usize(ny);
        let c = bbox.min.midpoint(bbox.max);
        let half = Point2::new(w * T::half(), h * T::half());
        Raster::new(BBox::new(c - half, c + half), nx, ny)
    }

    pub fn dx(&self) -> T {
        self.bbox.width() / T::of_usize(self.nx)
    }

    pub fn dy(&self) -> T {
        self.bbox.height() / T::of_usize(self.ny)
    }

    pub fn cell_area(&self) -> T {
        self.dx() * self.dy()
    }

    pub fn center(&self, i: usize, j: usize) -> Point2<T> {
        Point2::new(
            self.bbox.min.x + (T::of_usize(i) + T::half()) * self.dx(),
            self.bbox.min.y + (T::of_usize(j) + T::half()) * self.dy(),
        )
    }

    /// Cell containing `p`, if inside the raster.
    pub fn cell_of(&self, p: Point2<T>) -> Option<(usize, usize)> {
        if !self.bbox.contains(p) {
            return None;
        }
        let i = ((p.x - self.bbox.min.x) / self.dx()).floor().to_usize()?.min(self.nx - 1);
        let j = ((p.y - self.bbox.min.y) / self.dy()).floor().to_usize()?.min(self.ny - 1);
        Some((i, j))
    }

    /// Index range of cells whose centres may lie in `[lo, hi]` along x.
    fn col_range(&self, lo: T, hi: T) -> (usize, usize) {
        span(lo, hi, self.bbox.min.x, self.dx(), self.nx)
    }

    fn row_range(&self, lo: T, hi: T) -> (usize, usize) {
        span(lo, hi, self.bbox.min.y, self.dy(), self.ny)
    }
}

fn span<T: Real>(lo: T, hi: T, origin: T, step: T, n: usize) -> (usize, usize) {
    let a = ((lo - origin) / step - T::half()).floor().max(T::zero());
    let b = ((hi - origin) / step - T::half()).ceil().min(T::of_usize(n.saturating_sub(1)));
    let a = a.to_usize().unwrap_or(0);
    let b = b.to_usize().unwrap_or(0);
    (a, b)
}

/// Boolean image over a [`Raster`], row-major with row `j` at height `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    pub nx: usize,
    pub ny: usize,
    pub data: Vec<bool>,
}

impl Mask {
    pub fn new(nx: usize, ny: usize) -> Self {
        Mask { nx, ny, data: vec![false; nx * ny] }
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[j * self.nx + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.data[j * self.nx + i] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    fn zip(&self, o: &Mask, f: impl Fn(bool, bool) -> bool) -> Mask {
        assert_eq!((self.nx, self.ny), (o.nx, o.ny), "mask shapes differ");
        Mask { nx: self.nx, ny: self.ny, data: self.data.iter().zip(&o.data).map(|(&a, &b)| f(a, b)).collect() }
    }

    pub fn and(&self, o: &Mask) -> Mask {
        self.zip(o, |a, b| a && b)
    }

    pub fn or(&self, o: &Mask) -> Mask {
        self.zip(o, |a, b| a || b)
    }

    pub fn and_not(&self, o: &Mask) -> Mask {
        self.zip(o, |a, b| a && !b)
    }

    pub fn xor(&self, o: &Mask) -> Mask {
        self.zip(o, |a, b| a != b)
    }

    /// Dilation by `r` cells in the chessboard metric.
    pub fn dilate(&self, r: usize) -> Mask {
        let mut out = Mask::new(self.nx, self.ny);
        for j in 0..self.ny {
            for i in 0..self.nx {
                if !self.get(i, j) {
                    continue;
                }
                for jj in j.saturating_sub(r)..=(j + r).min(self.ny - 1) {
                    for ii in i.saturating_sub(r)..=(i + r).min(self.nx - 1) {
                        out.set(ii, jj, true);
                    }
                }
            }
        }
        out
    }
}

/// Odd-winding interior sampled at cell centres, by scanline crossing
/// counts weighted with multiplicities. Rows are processed in parallel.
pub fn interior_mask<T: Real>(system: &CurveSystem<T>, raster: &Raster<T>) -> Mask {
    let rows: Vec<Vec<bool>> = (0..raster.ny)
        .into_par_iter()
        .map(|j| {
            let y = raster.center(0, j).y;
            let mut crossings: Vec<(T, i64)> = Vec::new();
            for (c, m) in system.iter() {
                let pts = c.points();
                let n = pts.len();
                for i in 0..n {
                    let (a, b) = (pts[i], pts[(i + 1) % n]);
                    if (a.y <= y) != (b.y <= y) {
                        let x = a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x);
                        let dir = if b.y > a.y { 1 } else { -1 };
                        crossings.push((x, dir * m as i64));
                    }
                }
            }
            crossings.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite crossing"));
            // Winding of a point = signed crossings of the ray towards +x.
            let mut w: i64 = crossings.iter().map(|c| c.1).sum();
            let mut k = 0;
            (0..raster.nx)
                .map(|i| {
                    let x = raster.center(i, j).x;
                    while k < crossings.len() && crossings[k].0 <= x {
                        w -= crossings[k].1;
                        k += 1;
                    }
                    w.rem_euclid(2) == 1
                })
                .collect()
        })
        .collect();
    Mask { nx: raster.nx, ny: raster.ny, data: rows.concat() }
}

/// Cells whose centre lies within `tol` of the trace.
pub fn trace_band_mask<T: Real>(system: &CurveSystem<T>, raster: &Raster<T>, tol: T) -> Mask {
    let mut mask = Mask::new(raster.nx, raster.ny);
    for c in system.curves() {
        for s in 0..c.len() {
            let (a, b) = c.segment(s);
            let bb = BBox::from_points([&a, &b]).expect("two points").expanded(tol);
            if bb.max.x < raster.bbox.min.x
                || bb.min.x > raster.bbox.max.x
                || bb.max.y < raster.bbox.min.y
                || bb.min.y > raster.bbox.max.y
            {
                continue;
            }
            let (i0, i1) = raster.col_range(bb.min.x, bb.max.x);
            let (j0, j1) = raster.row_range(bb.min.y, bb.max.y);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    if !mask.get(i, j) && point_segment_distance(raster.center(i, j), a, b) <= tol {
                        mask.set(i, j, true);
                    }
                }
            }
        }
    }
    mask
}
